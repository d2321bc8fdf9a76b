//! Random small programs and random runs, for differential testing against
//! the concrete oracles.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::ab::{ab_initial, ab_transitions, all_acts, apply_effects, needs_value, AbLayout};
use crate::engine::ConcreteRun;
use crate::program::{Op, Program, ProgramDef, Relation, Target, ThreadDef, ThreadId};
use crate::tso::{tso_enabled, tso_step, Bounds, Run};

/// Size limits for [`random_program`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shape {
    pub threads: usize,
    pub max_states: usize,
    pub max_vars: usize,
    pub max_regs: usize,
    pub max_transitions: usize,
    pub relations: Vec<Relation>,
    pub arw: bool,
}

impl Default for Shape {
    fn default() -> Self {
        Shape {
            threads: 2,
            max_states: 4,
            max_vars: 2,
            max_regs: 2,
            max_transitions: 6,
            relations: vec![Relation::Eq, Relation::Neq, Relation::Lt(0), Relation::Lt(1)],
            arw: true,
        }
    }
}

/// A random program of the given shape whose target is the endpoint of a
/// random transition.
pub fn random_program<R: Rng + ?Sized>(rng: &mut R, shape: &Shape) -> Program {
    let nvars = rng.gen_range(1..=shape.max_vars.max(1));
    let vars: Vec<String> = (0..nvars).map(|i| format!("x{i}")).collect();
    let mut threads = Vec::new();
    for t in 0..shape.threads {
        let nstates = rng.gen_range(2..=shape.max_states.max(2));
        let nregs = rng.gen_range(1..=shape.max_regs.max(1));
        let regs: Vec<String> = (0..nregs).map(|i| format!("r{t}_{i}")).collect();
        let mut th = ThreadDef::new(format!("t{t}"), "q0");
        for r in &regs {
            th.reg(r);
        }
        // a spine through every state, then a few extra edges
        let extra = rng.gen_range(0..=shape.max_transitions.saturating_sub(nstates - 1));
        let mut edges: Vec<(usize, usize)> = (1..nstates).map(|s| (rng.gen_range(0..s), s)).collect();
        for _ in 0..extra {
            edges.push((rng.gen_range(0..nstates), rng.gen_range(0..nstates)));
        }
        for (from, to) in edges {
            let op = random_op(rng, shape, &regs, &vars);
            th.trans(format!("q{from}"), op, format!("q{to}"));
        }
        threads.push(th);
    }
    let tt = rng.gen_range(0..threads.len());
    let states: Vec<String> = {
        let th = &threads[tt];
        let mut s: Vec<String> = th.transitions.iter().map(|t| t.to.clone()).collect();
        s.sort();
        s.dedup();
        s
    };
    let target_state = states.choose(rng).expect("at least one edge").clone();
    let def = ProgramDef {
        vars,
        target: Some((threads[tt].name.clone(), target_state)),
        threads,
    };
    def.build().expect("random programs are well formed")
}

fn random_op<R: Rng + ?Sized>(rng: &mut R, shape: &Shape, regs: &[String], vars: &[String]) -> Op<String, String> {
    let r = |rng: &mut R| regs.choose(rng).expect("nonempty").clone();
    let x = |rng: &mut R| vars.choose(rng).expect("nonempty").clone();
    let kinds = if shape.arw { 6 } else { 5 };
    match rng.gen_range(0..kinds) {
        0 => Op::Assign(r(rng), r(rng)),
        1 => Op::NewValue(r(rng)),
        2 => {
            let rel = *shape.relations.choose(rng).expect("nonempty");
            Op::Guard(rel, r(rng), r(rng))
        }
        3 => Op::Read(x(rng), r(rng)),
        4 => Op::Write(x(rng), r(rng)),
        _ => Op::Arw(x(rng), r(rng), r(rng)),
    }
}

/// A random TSO run with at most `k` contexts and at most `len` steps,
/// respecting the buffer and domain bounds in `b`.
pub fn random_cb_run<R: Rng + ?Sized>(rng: &mut R, p: &Program, k: usize, len: usize, b: &Bounds) -> Run {
    let mut run = Run::empty(p);
    let mut current: Option<ThreadId> = None;
    let mut contexts = 0;
    for _ in 0..len {
        let cfg = run.last().clone();
        let labels: Vec<_> = tso_enabled(p, &cfg, b)
            .into_iter()
            .filter(|l| Some(l.thread) == current || contexts < k)
            .collect();
        let Some(l) = labels.choose(rng) else { break };
        if Some(l.thread) != current {
            current = Some(l.thread);
            contexts += 1;
        }
        let next = tso_step(p, &cfg, l).expect("enabled label");
        run.steps.push((*l, next));
    }
    run
}

/// A random run of the concrete abstract machine for a random `act`, with
/// `NewValue` drawing from `0..=domain`. Steps whose guards fail are
/// skipped, so the run may be shorter than `len`.
pub fn random_ab_run<R: Rng + ?Sized>(rng: &mut R, p: &Program, k: u32, len: usize, domain: u64) -> ConcreteRun {
    let acts = all_acts(p.num_threads(), k);
    let act = acts.choose(rng).expect("at least one act").clone();
    let layout = AbLayout::new(p, k);
    let start = (ab_initial(p, k, &act), vec![0; layout.len()]);
    let mut run = ConcreteRun {
        act,
        steps: Vec::new(),
        configs: vec![start],
    };
    for _ in 0..len {
        let (s, m) = run.last().clone();
        let mut options = ab_transitions(p, &s);
        options.shuffle(rng);
        let taken = options.into_iter().find_map(|st| {
            let v = needs_value(&st.effects).then(|| rng.gen_range(0..=domain));
            apply_effects(&layout, &st.effects, &m, v)
                .ok()
                .map(|m2| (st.label, v, st.next, m2))
        });
        let Some((label, v, next, m2)) = taken else { break };
        run.steps.push((label, v));
        run.configs.push((next, m2));
    }
    run
}

/// The target of a random program; all generated programs carry one.
pub fn target_of(p: &Program) -> Target {
    p.target().expect("random programs have a target")
}
