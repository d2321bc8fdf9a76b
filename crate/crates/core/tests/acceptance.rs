//! Acceptance suite. Every criterion runs even if an earlier one fails, and
//! each prints a single PASS or FAIL line.

use std::collections::{BTreeSet, HashSet};
use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tsocb::ab::{ab_transitions, to_tso_run, tso_run_reaches, AbLayout};
use tsocb::dfa::{dfa_intersection_oracle, Dfa};
use tsocb::dlcs::{dlcs_reach_bounded, DlcsBounds, DlcsModel, DlcsVerdict};
use tsocb::dsl::{parse_dlcs, parse_program};
use tsocb::engine::{check_reach, concretize_witness, inflate, validate_witness, CheckOptions, Outcome};
use tsocb::gen::random::{random_ab_run, random_cb_run, random_program, target_of, Shape};
use tsocb::gen::{gen_bakery, gen_dlcs_reduction, gen_intersection};
use tsocb::program::Program;
use tsocb::rel::{abstract_in, abstract_of, rel_apply_all, RelMode};
use tsocb::tso::{cb_reach_bounded, normalize_updates, tso_reach_bounded, Bounds, TsoVerdict};

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn corpus(name: &str) -> String {
    std::fs::read_to_string(corpus_dir().join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Bounds of the concrete oracle for random programs.
fn oracle_bounds() -> Bounds {
    Bounds {
        buffer_bound: 2,
        domain_bound: 3,
        depth: 300,
        max_states: 2_000_000,
    }
}

type Outcome1 = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome1);

fn oracle_equivalence() -> Outcome1 {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let shape = Shape::default();
    let (mut agree, mut reachable, mut witnesses, mut exhausted) = (0, 0, 0, 0);
    for i in 0..200 {
        let p = random_program(&mut rng, &shape);
        let target = target_of(&p);
        for k in 1..=3 {
            let concrete = cb_reach_bounded(&p, target, k, oracle_bounds());
            if concrete == TsoVerdict::BoundExhausted {
                exhausted += 1;
            }
            let v = check_reach(&p, k, target, &CheckOptions::default());
            if v.outcome == Outcome::BoundExhausted {
                return Err(format!("program {i}, k={k}: engine budget exhausted"));
            }
            if concrete.is_reachable() && !v.is_reachable() {
                return Err(format!("program {i}, k={k}: oracle reaches the target, engine does not"));
            }
            agree += 1;
            if let Some(w) = v.witness() {
                reachable += 1;
                let run = concretize_witness(&p, w)
                    .map_err(|e| format!("program {i}, k={k}: {e}"))?;
                if !validate_witness(&p, k, &run) {
                    return Err(format!("program {i}, k={k}: concretized witness does not validate"));
                }
                // the witness is also a genuine TSO run
                let tso = to_tso_run(&p, k, &run.trace())
                    .map_err(|e| format!("program {i}, k={k}: {e}"))?;
                if !tso_run_reaches(&tso, target, k) {
                    return Err(format!("program {i}, k={k}: TSO replay misses the target"));
                }
                witnesses += 1;
            }
        }
    }
    Ok(format!(
        "{agree}/600 queries agree, {witnesses}/{reachable} witnesses concretize, {exhausted} oracle runs hit the state budget"
    ))
}

fn step_soundness() -> Outcome1 {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let shape = Shape::default();
    let mut steps = 0;
    while steps < 1000 {
        let p = random_program(&mut rng, &shape);
        let k = rng.gen_range(1..=3);
        let mode = RelMode::for_program(&p);
        let layout = AbLayout::new(&p, k);
        let run = random_ab_run(&mut rng, &p, k, 30, 8);
        for (i, (label, _)) in run.steps.iter().enumerate() {
            let (s, m) = &run.configs[i];
            let (_, m2) = &run.configs[i + 1];
            let effects = ab_transitions(&p, s)
                .into_iter()
                .find(|st| st.label == *label)
                .ok_or_else(|| format!("label {label} vanished"))?
                .effects;
            let succ = rel_apply_all(mode, &layout, &abstract_in(mode, m), &effects);
            if !succ.contains(&abstract_in(mode, m2)) {
                return Err(format!("step {label} from {m:?} to {m2:?} has no abstract counterpart"));
            }
            steps += 1;
        }
    }
    Ok(format!("{steps}/{steps} concrete steps abstracted"))
}

fn inflation() -> Outcome1 {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    let shape = Shape::default();
    let mut runs = 0;
    while runs < 100 {
        let p = random_program(&mut rng, &shape);
        let k = rng.gen_range(1..=3);
        let run = random_ab_run(&mut rng, &p, k, 30, 8);
        if run.steps.is_empty() {
            continue;
        }
        let d = rng.gen_range(1..=9);
        let c = rng.gen_range(1..=9);
        let stretched = inflate(&run, d, c);
        if !validate_witness(&p, k, &stretched) {
            return Err(format!("inflate({d}, {c}) broke a valid run"));
        }
        for ((_, a), (_, b)) in run.configs.iter().zip(&stretched.configs) {
            if abstract_of(a) != abstract_of(b) {
                return Err(format!("inflate({d}, {c}) changed the order of {a:?}"));
            }
        }
        runs += 1;
    }
    Ok(format!("{runs}/{runs} inflated runs valid with unchanged order"))
}

fn random_dfa(rng: &mut ChaCha8Rng, letters: usize) -> Dfa {
    let n = rng.gen_range(1..=4);
    let mut transitions = Vec::new();
    for q in 0..n {
        for a in 0..letters {
            transitions.push((q, a, rng.gen_range(0..n)));
        }
    }
    Dfa {
        states: (0..n).map(|i| format!("s{i}")).collect(),
        alphabet: (0..letters).map(|i| format!("l{i}")).collect(),
        transitions,
        init: 0,
        finals: (0..n).filter(|_| rng.gen_bool(0.35)).collect(),
    }
}

/// Reachable state tuples by saturation, independent of the library oracle.
fn product_nonempty(dfas: &[Dfa]) -> bool {
    let letters = dfas[0].alphabet.len();
    let mut reached: HashSet<Vec<usize>> = HashSet::from([dfas.iter().map(|d| d.init).collect()]);
    loop {
        let mut grown = reached.clone();
        for tuple in &reached {
            for a in 0..letters {
                let next: Vec<usize> = tuple
                    .iter()
                    .zip(dfas)
                    .map(|(q, d)| {
                        d.transitions
                            .iter()
                            .find(|(p, l, _)| p == q && *l == a)
                            .map(|t| t.2)
                            .expect("complete automaton")
                    })
                    .collect();
                grown.insert(next);
            }
        }
        if grown.len() == reached.len() {
            break;
        }
        reached = grown;
    }
    reached
        .iter()
        .any(|t| t.iter().zip(dfas).all(|(q, d)| d.finals.contains(q)))
}

fn intersection_construction() -> Outcome1 {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    let (mut nonempty, mut slowest) = (0, Duration::ZERO);
    for i in 0..24 {
        let letters = rng.gen_range(1..=3);
        let count = rng.gen_range(2..=3);
        let dfas: Vec<Dfa> = (0..count).map(|_| random_dfa(&mut rng, letters)).collect();
        let expected = product_nonempty(&dfas);
        if expected != dfa_intersection_oracle(&dfas) {
            return Err(format!("instance {i}: the two product oracles disagree"));
        }
        let g = gen_intersection(&dfas).map_err(|e| e.to_string())?;
        let start = Instant::now();
        let v = check_reach(&g.program, g.k_hint, g.target, &CheckOptions::default());
        let took = start.elapsed();
        slowest = slowest.max(took);
        if v.is_reachable() != expected {
            return Err(format!("instance {i}: engine says {}, product says {expected}", v.is_reachable()));
        }
        if took > Duration::from_secs(5) {
            return Err(format!("instance {i} took {took:?}"));
        }
        nonempty += usize::from(expected);
    }
    Ok(format!("24/24 instances agree ({nonempty} non-empty), slowest {slowest:?}"))
}

/// Hand-built channel systems; all but the last have at most four states.
const DLCS_INSTANCES: &[(&str, &str)] = &[
    ("echo", "dlcs\nstates s0 s1 s2 s3\nvars v w\nalphabet a\ninit s0\ntarget s3\n\
      s0 -> s1 : v := *\ns1 -> s2 : send a v\ns2 -> s2 : recv a w\ns2 -> s3 : assume v = w\n"),
    ("never sent", "dlcs\nstates s0 s1 s2\nvars v\nalphabet a b\ninit s0\ntarget s2\n\
      s0 -> s1 : send a v\ns1 -> s2 : recv b v\n"),
    ("loss", "dlcs\nstates s0 s1 s2 s3\nvars v w\nalphabet a b\ninit s0\ntarget s3\n\
      s0 -> s1 : send a v\ns1 -> s2 : send b w\ns2 -> s3 : recv b v\n"),
    ("fresh differs", "dlcs\nstates s0 s1 s2 s3\nvars v w\nalphabet a\ninit s0\ntarget s3\n\
      s0 -> s1 : v := *\ns1 -> s2 : w := *\ns2 -> s3 : assume v = w\n"),
    ("stale value", "dlcs\nstates s0 s1 s2 s3\nvars v w u\nalphabet a\ninit s0\ntarget s3\n\
      s0 -> s1 : v := *\ns1 -> s2 : send a w\ns2 -> s2 : recv a u\ns2 -> s3 : assume u = v\n"),
    ("fifo order", "dlcs\nstates s0 s1 s2 s3 s4\nvars v\nalphabet a b\ninit s0\ntarget s4\n\
      s0 -> s1 : send a v\ns1 -> s2 : send b v\ns2 -> s3 : recv b v\ns3 -> s4 : recv a v\n"),
];

fn dlcs_reduction() -> Outcome1 {
    let dlcs_bounds = DlcsBounds {
        channel_len: 2,
        fresh_values: 3,
        depth: 40,
        max_states: 1_000_000,
    };
    let tso_bounds = Bounds {
        buffer_bound: 2,
        domain_bound: 3,
        depth: 60,
        max_states: 3_000_000,
    };
    let mut summary = Vec::new();
    for (name, text) in DLCS_INSTANCES {
        let m: DlcsModel = parse_dlcs(text).map_err(|e| format!("{name}: {e}"))?;
        let target = m.target.expect("instances declare a target");
        let expected = match dlcs_reach_bounded(&m, target, dlcs_bounds) {
            DlcsVerdict::Reachable(_) => true,
            DlcsVerdict::NotWithinBounds => false,
            DlcsVerdict::BoundExhausted => return Err(format!("{name}: channel oracle out of budget")),
        };
        let g = gen_dlcs_reduction(&m).map_err(|e| format!("{name}: {e}"))?;
        let got = match tso_reach_bounded(&g.program, g.target, tso_bounds) {
            TsoVerdict::Reachable(_) => true,
            TsoVerdict::NotWithinBounds => false,
            TsoVerdict::BoundExhausted => return Err(format!("{name}: TSO oracle out of budget")),
        };
        if got != expected {
            return Err(format!("{name}: channel system says {expected}, TSO program says {got}"));
        }
        summary.push(format!("{name}={}", if got { "reach" } else { "unreach" }));
    }
    Ok(format!("{}/{} agree ({})", summary.len(), DLCS_INSTANCES.len(), summary.join(", ")))
}

/// Every corpus program with the largest k it is checked at.
fn corpus_programs() -> Vec<(String, Program, u32)> {
    let mut out = Vec::new();
    let mut names: Vec<_> = std::fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .map(|e| e.expect("entry").file_name().into_string().expect("utf-8 name"))
        .filter(|n| n.ends_with(".tso"))
        .collect();
    names.sort();
    for n in names {
        let p = parse_program(&corpus(&n)).unwrap_or_else(|e| panic!("{n}: {e}"));
        let kmax = if n.starts_with("bakery") || n.starts_with("echo") || n.starts_with("never") { 4 } else { 5 };
        out.push((n, p, kmax));
    }
    out
}

fn monotonicity() -> Outcome1 {
    let mut pairs = 0;
    for (name, p, kmax) in corpus_programs() {
        let target = p.target().ok_or_else(|| format!("{name} has no target"))?;
        let mut prev = false;
        for k in 1..=kmax {
            let v = check_reach(&p, k, target, &CheckOptions::default());
            if v.outcome == Outcome::BoundExhausted {
                return Err(format!("{name} at k={k}: budget exhausted"));
            }
            if prev && !v.is_reachable() {
                return Err(format!("{name}: reachable at k={} but not at k={k}", k - 1));
            }
            if k > 1 {
                pairs += 1;
            }
            prev = v.is_reachable();
        }
    }
    Ok(format!("{pairs}/{pairs} consecutive bounds monotone"))
}

fn litmus() -> Outcome1 {
    let mp = parse_program(&corpus("mp.tso")).map_err(|e| e.to_string())?;
    let target = mp.target().expect("mp target");
    let b = Bounds {
        buffer_bound: 2,
        domain_bound: 2,
        depth: 100,
        max_states: 2_000_000,
    };
    for (k, want) in [(1, false), (2, true)] {
        let engine = check_reach(&mp, k, target, &CheckOptions::default()).is_reachable();
        let oracle = cb_reach_bounded(&mp, target, k, b).is_reachable();
        if engine != want || oracle != want {
            return Err(format!("message passing at k={k}: engine {engine}, oracle {oracle}, expected {want}"));
        }
    }

    let g = gen_bakery(2).map_err(|e| e.to_string())?;
    let ob = Bounds {
        buffer_bound: 2,
        domain_bound: 4,
        depth: 300,
        max_states: 20_000_000,
    };
    // the oracle decides the expected verdict before the engine runs
    let expected = match cb_reach_bounded(&g.program, g.target, 4, ob) {
        TsoVerdict::Reachable(_) => true,
        TsoVerdict::NotWithinBounds => false,
        TsoVerdict::BoundExhausted => return Err("bakery oracle out of budget".into()),
    };
    let v = check_reach(&g.program, 4, g.target, &CheckOptions::default());
    if v.is_reachable() != expected {
        return Err(format!("bakery n=2, k=4: engine {}, oracle {expected}", v.is_reachable()));
    }
    Ok(format!(
        "message passing k=1 unreachable, k=2 reachable; bakery n=2 k=4 violation {} ({} states)",
        if expected { "reachable" } else { "unreachable" },
        v.stats.states_explored
    ))
}

/// Upper bound on the stored bytes per state: control states and `act`
/// (two bytes per entry), `j`, one byte per `c(x, t)`, a bit per `u(j, x)`,
/// and two bytes per abstract variable's rank.
fn key_bound(vars: usize, regs: usize, threads: usize, k: usize) -> usize {
    let ab_vars = 1 + vars + regs + k * vars + threads * vars;
    2 * threads + 2 * k + 1 + vars * threads + (k * vars).div_ceil(8) + 2 * ab_vars
}

fn state_size() -> Outcome1 {
    let mut checked = 0;
    let mut programs: Vec<(String, Program, u32)> = corpus_programs();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0008);
    for i in 0..30 {
        programs.push((format!("random {i}"), random_program(&mut rng, &Shape::default()), 3));
    }
    for (name, p, kmax) in programs {
        let target = p.target().expect("target");
        for k in 1..=kmax.min(3) {
            let v = check_reach(&p, k, target, &CheckOptions::default());
            let bound = key_bound(p.num_vars(), p.num_regs(), p.num_threads(), k as usize);
            // the engine asserts that every explored state's key has this length
            if v.stats.key_len > bound {
                return Err(format!("{name} at k={k}: {} bytes per state, bound {bound}", v.stats.key_len));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked}/{checked} searches within the per-state bound"))
}

fn normalization() -> Outcome1 {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0009);
    let shape = Shape {
        arw: false,
        ..Shape::default()
    };
    let mut runs = 0;
    let mut moved = 0;
    while runs < 100 {
        let p = random_program(&mut rng, &shape);
        let k = rng.gen_range(1..=3);
        let run = random_cb_run(&mut rng, &p, k, 40, &oracle_bounds());
        if run.steps.is_empty() {
            continue;
        }
        let n = normalize_updates(&p, &run, k).map_err(|e| e.to_string())?;
        if !n.is_valid(&p) || n.last() != run.last() {
            return Err(format!("normalization changed the final configuration of a {}-step run", run.steps.len()));
        }
        let labels: Vec<_> = n.labels().collect();
        if labels != run.labels().collect::<Vec<_>>() {
            moved += 1;
        }
        runs += 1;
    }
    Ok(format!("{runs}/{runs} runs keep their final configuration ({moved} reordered)"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 oracle equivalence on random programs", oracle_equivalence),
        ("2 abstract step soundness", step_soundness),
        ("3 inflation preserves runs and order", inflation),
        ("4 automata intersection construction", intersection_construction),
        ("5 lossy channel reduction", dlcs_reduction),
        ("6 context bound monotonicity", monotonicity),
        ("7 litmus regression", litmus),
        ("8 per-state size bound", state_size),
        ("9 update normalization", normalization),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = BTreeSet::new();
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {name}: PASS ({detail}; {secs:.1}s)"),
            Err(why) => {
                println!("criterion {name}: FAIL ({why}; {secs:.1}s)");
                failed.insert(name);
            }
        }
    }
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
