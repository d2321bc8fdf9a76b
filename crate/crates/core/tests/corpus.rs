//! Expected verdicts for the checked-in corpus, against both the engine and
//! the bounded concrete search.

use std::path::PathBuf;

use tsocb::dsl::{parse_dfa, parse_dlcs, parse_program, render_dfa, render_dlcs, render_program};
use tsocb::engine::{check_reach, concretize_witness, validate_witness, CheckOptions};
use tsocb::gen::{gen_bakery, gen_dlcs_reduction, gen_intersection};
use tsocb::program::Program;
use tsocb::tso::{cb_reach_bounded, Bounds};

fn read(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn program(name: &str) -> Program {
    parse_program(&read(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn reachable(p: &Program, k: u32) -> bool {
    let target = p.target().unwrap();
    let v = check_reach(p, k, target, &CheckOptions::default());
    if let Some(w) = v.witness() {
        let run = concretize_witness(p, w).unwrap();
        assert!(validate_witness(p, k, &run));
    }
    v.is_reachable()
}

#[test]
fn message_passing_needs_two_contexts() {
    let p = program("mp.tso");
    assert!(!reachable(&p, 1));
    assert!(reachable(&p, 2));
}

#[test]
fn stale_message_is_never_seen() {
    let p = program("mp_stale.tso");
    for k in 1..=4 {
        assert!(!reachable(&p, k), "k={k}");
    }
    let b = Bounds {
        domain_bound: 2,
        ..Bounds::default()
    };
    assert!(!cb_reach_bounded(&p, p.target().unwrap(), 4, b).is_reachable());
}

#[test]
fn store_buffering_needs_four_contexts() {
    let p = program("sb.tso");
    assert!(!reachable(&p, 3));
    assert!(reachable(&p, 4));
    let b = Bounds {
        domain_bound: 1,
        ..Bounds::default()
    };
    assert!(!cb_reach_bounded(&p, p.target().unwrap(), 3, b).is_reachable());
    assert!(cb_reach_bounded(&p, p.target().unwrap(), 4, b).is_reachable());
}

#[test]
fn gap_guard_is_met_with_large_values() {
    let p = program("gap.tso");
    assert!(!reachable(&p, 1));
    assert!(reachable(&p, 2));
}

#[test]
fn corpus_files_round_trip() {
    for name in ["mp.tso", "mp_stale.tso", "sb.tso", "gap.tso", "bakery2.tso", "echo.tso", "never_sent.tso"] {
        let p = program(name);
        assert_eq!(parse_program(&render_program(&p)).unwrap(), p, "{name}");
    }
    for name in ["ends_in_a.dfa", "even_length.dfa", "empty.dfa"] {
        let d = parse_dfa(&read(name)).unwrap();
        assert_eq!(parse_dfa(&render_dfa(&d)).unwrap(), d, "{name}");
    }
    for name in ["echo.dlcs", "never_sent.dlcs"] {
        let m = parse_dlcs(&read(name)).unwrap();
        assert_eq!(parse_dlcs(&render_dlcs(&m)).unwrap(), m, "{name}");
    }
}

#[test]
fn generated_corpus_files_are_current() {
    assert_eq!(program("bakery2.tso"), gen_bakery(2).unwrap().program);
    assert_eq!(
        program("echo.tso"),
        gen_dlcs_reduction(&parse_dlcs(&read("echo.dlcs")).unwrap()).unwrap().program
    );
    assert_eq!(
        program("never_sent.tso"),
        gen_dlcs_reduction(&parse_dlcs(&read("never_sent.dlcs")).unwrap()).unwrap().program
    );
}

#[test]
fn channel_programs_match_their_channel_systems() {
    assert!(reachable(&program("echo.tso"), 6));
    assert!(!reachable(&program("never_sent.tso"), 6));
}

#[test]
fn intersection_of_corpus_automata() {
    let a = parse_dfa(&read("ends_in_a.dfa")).unwrap();
    let e = parse_dfa(&read("even_length.dfa")).unwrap();
    let z = parse_dfa(&read("empty.dfa")).unwrap();
    let g = gen_intersection(&[a.clone(), e]).unwrap();
    assert!(reachable(&g.program, g.k_hint));
    let g = gen_intersection(&[a, z]).unwrap();
    assert!(!reachable(&g.program, g.k_hint));
}
