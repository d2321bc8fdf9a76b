//! Randomized checks of the abstraction, runnable from the shell.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tsocb::ab::{ab_transitions, AbLayout};
use tsocb::engine::{check_reach, concretize_witness, inflate, validate_witness, CheckOptions};
use tsocb::gen::random::{random_ab_run, random_cb_run, random_program, target_of, Shape};
use tsocb::rel::{abstract_in, abstract_of, rel_apply_all, RelMode};
use tsocb::tso::{cb_reach_bounded, normalize_updates, Bounds};

struct Tally {
    name: &'static str,
    checked: usize,
    failed: usize,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally {
            name,
            checked: 0,
            failed: 0,
        }
    }

    fn record(&mut self, ok: bool) {
        self.checked += 1;
        if !ok {
            self.failed += 1;
        }
    }

    fn report(&self) -> bool {
        let status = if self.failed == 0 { "ok" } else { "FAILED" };
        outln!("{:<28} {status} ({} checked, {} failed)", self.name, self.checked, self.failed);
        self.failed == 0
    }
}

/// Runs every check with `cases` random instances each. True iff all pass.
pub fn run(seed: u64, cases: usize) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = Shape::default();
    let mut steps = Tally::new("abstract step soundness");
    let mut inflation = Tally::new("inflation");
    let mut normalize = Tally::new("update normalization");
    let mut oracle = Tally::new("agreement with TSO search");

    for _ in 0..cases {
        let p = random_program(&mut rng, &shape);
        let k = rng.gen_range(1..=3);
        let mode = RelMode::for_program(&p);
        let layout = AbLayout::new(&p, k);

        let run = random_ab_run(&mut rng, &p, k, 25, 6);
        for (i, (label, _)) in run.steps.iter().enumerate() {
            let (s, m) = &run.configs[i];
            let (_, m2) = &run.configs[i + 1];
            let effects = ab_transitions(&p, s)
                .into_iter()
                .find(|st| st.label == *label)
                .map(|st| st.effects);
            let ok = effects.is_some_and(|e| {
                rel_apply_all(mode, &layout, &abstract_in(mode, m), &e).contains(&abstract_in(mode, m2))
            });
            steps.record(ok);
        }

        let d = rng.gen_range(1..8);
        let c = rng.gen_range(1..8);
        let stretched = inflate(&run, d, c);
        let same_order = run
            .configs
            .iter()
            .zip(&stretched.configs)
            .all(|((_, a), (_, b))| abstract_of(a) == abstract_of(b));
        inflation.record(same_order && validate_witness(&p, k, &stretched));

        let mut plain = shape.clone();
        plain.arw = false;
        let q = random_program(&mut rng, &plain);
        let cb = random_cb_run(&mut rng, &q, 3, 30, &Bounds::default());
        let ok = normalize_updates(&q, &cb, 3).is_ok_and(|n| n.is_valid(&q) && n.last() == cb.last());
        normalize.record(ok);
    }

    let bounds = Bounds {
        depth: 60,
        max_states: 200_000,
        ..Bounds::default()
    };
    for _ in 0..cases.min(50) {
        let p = random_program(&mut rng, &shape);
        let target = target_of(&p);
        for k in 1..=2 {
            let v = check_reach(&p, k, target, &CheckOptions::default());
            let concrete = cb_reach_bounded(&p, target, k, bounds).is_reachable();
            let witness_ok = v.witness().is_none_or(|w| {
                concretize_witness(&p, w).is_ok_and(|run| validate_witness(&p, k, &run))
            });
            oracle.record((!concrete || v.is_reachable()) && witness_ok);
        }
    }

    let passed: Vec<bool> = [steps, inflation, normalize, oracle].iter().map(|t| t.report()).collect();
    passed.iter().all(|&p| p)
}
