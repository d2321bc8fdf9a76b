//! Reachability search over the finite abstraction, and replay of abstract
//! witnesses with concrete values.
//!
//! [`check_reach`] explores control state plus value order breadth first
//! from every choice of `act`. A reachable verdict carries the abstract
//! states along the path; [`concretize_witness`] turns them into a run of
//! the concrete abstract machine, stretching gaps between values with
//! [`inflate`] whenever a fresh value or a gap guard needs more room.

use std::time::Instant;

use indexmap::IndexSet;
use rayon::prelude::*;
use thiserror::Error;

use crate::ab::{
    ab_initial, ab_initial_states, ab_transitions, apply_effects, AbEffect, AbError, AbLabel,
    AbLayout, AbState, AbTrace, AbVar, Valuation,
};
use crate::program::{eval_rel, Program, Target, ThreadId};
use crate::rel::{
    abstract_in, canonical_key, decode_key, rel_apply_all, KeyShape, RelMode,
    RelState, SearchState,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckOptions {
    /// Give up after this many distinct states.
    pub max_states: usize,
    /// Give up once the visited set is estimated to exceed this many bytes.
    pub max_bytes: Option<usize>,
    /// Worker threads for successor computation. Results do not depend on it.
    pub threads: usize,
    /// Override the abstraction mode; chosen from the program by default.
    pub mode: Option<RelMode>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            max_states: 20_000_000,
            max_bytes: None,
            threads: 1,
            mode: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Stats {
    pub states_explored: usize,
    pub peak_frontier: usize,
    pub wall_ms: u64,
    /// Bytes per stored state.
    pub key_len: usize,
}

/// Abstract path to the target: the search state after every label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub mode: RelMode,
    pub initial: SearchState,
    pub steps: Vec<(AbLabel, SearchState)>,
}

impl Witness {
    pub fn act(&self) -> &[ThreadId] {
        &self.initial.ab.act
    }

    pub fn k(&self) -> u32 {
        self.initial.ab.act.len() as u32
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Reachable(Witness),
    Unreachable,
    /// A state or memory budget ran out first.
    BoundExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub outcome: Outcome,
    pub stats: Stats,
}

impl Verdict {
    pub fn is_reachable(&self) -> bool {
        matches!(self.outcome, Outcome::Reachable(_))
    }

    pub fn witness(&self) -> Option<&Witness> {
        match &self.outcome {
            Outcome::Reachable(w) => Some(w),
            _ => None,
        }
    }
}

/// Successors of a search state, in a fixed order.
pub fn successors(
    p: &Program,
    mode: RelMode,
    layout: &AbLayout,
    s: &SearchState,
) -> Vec<(AbLabel, SearchState)> {
    let mut out = Vec::new();
    for step in ab_transitions(p, &s.ab) {
        for rel in rel_apply_all(mode, layout, &s.rel, &step.effects) {
            out.push((
                step.label,
                SearchState {
                    ab: step.next.clone(),
                    rel,
                },
            ));
        }
    }
    out
}

/// Per-entry overhead of the visited set beyond the key itself.
const ENTRY_OVERHEAD: usize = 56;

/// Is `target` reachable within `k` contexts?
pub fn check_reach(p: &Program, k: u32, target: Target, opts: &CheckOptions) -> Verdict {
    assert!(k >= 1, "k must be at least 1");
    assert!(k < u8::MAX as u32, "k too large");
    let start = Instant::now();
    let mode = opts.mode.unwrap_or_else(|| RelMode::for_program(p));
    let layout = AbLayout::new(p, k);
    let shape = KeyShape::new(layout);
    let key_len = shape.len();

    let mut visited: IndexSet<Box<[u8]>> = IndexSet::new();
    let mut parents: Vec<Option<(u32, AbLabel)>> = Vec::new();
    let mut stats = Stats {
        key_len,
        ..Stats::default()
    };

    let witness = |visited: &IndexSet<Box<[u8]>>, parents: &[Option<(u32, AbLabel)>], at: usize| {
        let mut steps = Vec::new();
        let mut i = at;
        while let Some((from, l)) = parents[i] {
            steps.push((l, decode_key(&shape, &visited[i])));
            i = from as usize;
        }
        steps.reverse();
        Witness {
            mode,
            initial: decode_key(&shape, &visited[i]),
            steps,
        }
    };
    let finish = |outcome, mut stats: Stats, n: usize| {
        stats.states_explored = n;
        stats.wall_ms = start.elapsed().as_millis() as u64;
        Verdict { outcome, stats }
    };

    for ab in ab_initial_states(p, k) {
        let s = SearchState {
            ab,
            rel: RelState::initial(&layout),
        };
        let at = s.ab.at(target);
        let (i, fresh) = visited.insert_full(canonical_key(&s).into_boxed_slice());
        if fresh {
            parents.push(None);
        }
        if at {
            let w = witness(&visited, &parents, i);
            return finish(Outcome::Reachable(w), stats, visited.len());
        }
    }

    let pool = (opts.threads > 1).then(|| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(opts.threads)
            .build()
            .expect("thread pool")
    });
    let expand = |key: &[u8]| successors(p, mode, &layout, &decode_key(&shape, key));

    let mut level = 0..visited.len();
    while !level.is_empty() {
        stats.peak_frontier = stats.peak_frontier.max(level.len());
        let succ: Vec<Vec<(AbLabel, SearchState)>> = match &pool {
            Some(pool) => pool.install(|| {
                level
                    .clone()
                    .into_par_iter()
                    .map(|i| expand(&visited[i]))
                    .collect()
            }),
            None => level.clone().map(|i| expand(&visited[i])).collect(),
        };
        let next_start = visited.len();
        for (i, list) in level.clone().zip(succ) {
            for (label, s) in list {
                let key = canonical_key(&s);
                assert_eq!(key.len(), key_len, "state key length");
                if visited.contains(&key[..]) {
                    continue;
                }
                let over_bytes = opts
                    .max_bytes
                    .is_some_and(|b| (visited.len() + 1) * (key_len + ENTRY_OVERHEAD) > b);
                if visited.len() >= opts.max_states || over_bytes {
                    return finish(Outcome::BoundExhausted, stats, visited.len());
                }
                let (j, _) = visited.insert_full(key.into_boxed_slice());
                parents.push(Some((i as u32, label)));
                if s.ab.at(target) {
                    let w = witness(&visited, &parents, j);
                    return finish(Outcome::Reachable(w), stats, visited.len());
                }
            }
        }
        level = next_start..visited.len();
    }
    finish(Outcome::Unreachable, stats, visited.len())
}

/// A run of the concrete abstract machine with every intermediate
/// configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcreteRun {
    pub act: Vec<ThreadId>,
    /// Label and the value a `NewValue` picked.
    pub steps: Vec<(AbLabel, Option<u64>)>,
    /// `configs[0]` is initial; `configs[i + 1]` follows `steps[i]`.
    pub configs: Vec<(AbState, Valuation)>,
}

impl ConcreteRun {
    pub fn k(&self) -> u32 {
        self.act.len() as u32
    }

    pub fn trace(&self) -> AbTrace {
        AbTrace {
            act: self.act.clone(),
            steps: self.steps.clone(),
        }
    }

    pub fn last(&self) -> &(AbState, Valuation) {
        self.configs.last().expect("at least the initial configuration")
    }
}

/// Adds `c` to every value `>= d` anywhere in the run. Order between values
/// is preserved and no gap shrinks, so a valid run stays valid.
pub fn inflate(run: &ConcreteRun, d: u64, c: u64) -> ConcreteRun {
    let bump = |v: u64| if v >= d { v + c } else { v };
    ConcreteRun {
        act: run.act.clone(),
        steps: run.steps.iter().map(|(l, v)| (*l, v.map(bump))).collect(),
        configs: run
            .configs
            .iter()
            .map(|(s, m)| (s.clone(), m.iter().map(|v| bump(*v)).collect()))
            .collect(),
    }
}

/// True iff `run` starts in the initial configuration for its `act` and
/// every step replays.
pub fn validate_witness(p: &Program, k: u32, run: &ConcreteRun) -> bool {
    if run.act.len() != k as usize || run.configs.len() != run.steps.len() + 1 {
        return false;
    }
    let layout = AbLayout::new(p, k);
    let init = (ab_initial(p, k, &run.act), vec![0; layout.len()]);
    if run.configs[0] != init {
        return false;
    }
    match run.trace().replay(p, k) {
        Ok(configs) => configs == run.configs,
        Err(_) => false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConcretizeError {
    #[error("witness invalid at step {step}: {reason}")]
    Invalid { step: usize, reason: String },
}

/// Replays an abstract witness with natural values.
///
/// A fresh value joining an existing class copies that class's value; one
/// opening a new class between two others takes the midpoint, after
/// stretching the run if the neighbours are adjacent. A gap guard
/// `a + n < b` that fails although `a` ranks below `b` stretches every
/// value from `b` up by the missing distance.
pub fn concretize_witness(p: &Program, w: &Witness) -> Result<ConcreteRun, ConcretizeError> {
    let k = w.k();
    let layout = AbLayout::new(p, k);
    let mode = w.mode;
    let mut run = ConcreteRun {
        act: w.act().to_vec(),
        steps: Vec::new(),
        configs: vec![(ab_initial(p, k, w.act()), vec![0; layout.len()])],
    };
    let invalid = |step, reason: String| ConcretizeError::Invalid { step, reason };
    if run.configs[0].0 != w.initial.ab {
        return Err(invalid(0, "initial state mismatch".into()));
    }

    for (i, (label, want)) in w.steps.iter().enumerate() {
        let (s, _) = run.last().clone();
        let step = ab_transitions(p, &s)
            .into_iter()
            .find(|st| st.label == *label)
            .ok_or_else(|| invalid(i, format!("label {label} not enabled")))?;
        if step.next != want.ab {
            return Err(invalid(i, "control state mismatch".into()));
        }

        let mut fresh = None;
        if let Some(AbEffect::Fresh(d)) = step.effects.iter().find(|e| matches!(e, AbEffect::Fresh(_))) {
            let (v, stretched) = fresh_value(mode, &layout, &run.last().1, &want.rel, layout.index(*d));
            if let Some((from, by)) = stretched {
                run = inflate(&run, from, by);
            }
            fresh = Some(v);
        }

        // stretch for gap guards until every guard holds
        let m2 = loop {
            let m = &run.last().1;
            match apply_effects(&layout, &step.effects, m, fresh) {
                Ok(m2) => break m2,
                Err(AbError::GuardFailed) => {
                    let (from, by) = gap_repair(&layout, &step.effects, m, fresh)
                        .ok_or_else(|| invalid(i, "guard cannot be satisfied".into()))?;
                    run = inflate(&run, from, by);
                    fresh = fresh.map(|v| if v >= from { v + by } else { v });
                }
                Err(e) => return Err(invalid(i, e.to_string())),
            }
        };
        if abstract_in(mode, &m2) != want.rel {
            return Err(invalid(i, "value order differs from the witness".into()));
        }
        run.steps.push((*label, fresh));
        run.configs.push((step.next, m2));
    }
    Ok(run)
}

/// Picks a value for fresh variable `d` so that the valuation ranks as
/// `want`. Returns the value and, if needed, an inflation `(from, by)` to
/// apply to the run first (the value is already adjusted for it).
fn fresh_value(
    mode: RelMode,
    layout: &AbLayout,
    m: &[u64],
    want: &RelState,
    d: usize,
) -> (u64, Option<(u64, u64)>) {
    let rd = want.ranks[d];
    let others = || (0..layout.len()).filter(move |&i| i != d);
    if let Some(i) = others().find(|&i| want.ranks[i] == rd) {
        return (m[i], None);
    }
    match mode {
        RelMode::EqualityOnly => {
            let top = others().map(|i| m[i]).max().unwrap_or(0);
            (top + 1, None)
        }
        RelMode::Ordered => {
            let lo = others()
                .filter(|&i| want.ranks[i] < rd)
                .map(|i| m[i])
                .max()
                .expect("the sentinel ranks below every fresh class");
            let hi = others()
                .filter(|&i| want.ranks[i] > rd)
                .map(|i| m[i])
                .min();
            match hi {
                None => (lo + 1, None),
                Some(hi) if hi - lo >= 2 => (lo + (hi - lo) / 2, None),
                Some(hi) => (lo + 1, Some((hi, 1))),
            }
        }
    }
}

/// Finds the first gap guard that fails on `m` and the inflation that fixes
/// it.
fn gap_repair(
    layout: &AbLayout,
    effects: &[AbEffect],
    m: &[u64],
    fresh: Option<u64>,
) -> Option<(u64, u64)> {
    let mut m = m.to_vec();
    for e in effects {
        if let AbEffect::Guard(rel, a, b) = e {
            let (va, vb) = (m[layout.index(*a)], m[layout.index(*b)]);
            if !eval_rel(*rel, va, vb) {
                let need = match rel {
                    crate::program::Relation::Lt(n) => va + *n as u64 + 1,
                    crate::program::Relation::Le(n) => va + *n as u64,
                    _ => return None,
                };
                if va >= vb || need <= vb {
                    return None;
                }
                return Some((vb, need - vb));
            }
        } else {
            m = apply_effects(layout, std::slice::from_ref(e), &m, fresh).ok()?;
        }
    }
    None
}

/// Display name of an abstract variable.
pub fn var_name(p: &Program, v: AbVar) -> String {
    match v {
        AbVar::Sentinel => "@zero".into(),
        AbVar::Shared(x) => p.var_name(x).into(),
        AbVar::Reg(r) => p.reg_name(r).into(),
        AbVar::PerContext(x, j) => format!("{}@{j}", p.var_name(x)),
        AbVar::PerThread(x, t) => format!("{}@{}", p.var_name(x), p.thread(t).name),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ab::to_tso_run;
    use crate::dsl::parse_program;
    use crate::rel::abstract_of;

    fn prog(text: &str) -> Program {
        parse_program(text).unwrap()
    }

    #[test]
    fn initial_target_is_reachable_at_once() {
        let p = prog("domain nat thread t { regs a init q q -> r : a := * }");
        let v = check_reach(&p, 1, p.target_by_name("t", "q").unwrap(), &CheckOptions::default());
        assert!(v.witness().unwrap().steps.is_empty());
    }

    #[test]
    fn equality_witness_needs_no_inflation() {
        let p = prog(
            "domain nat thread t { regs a b init q q -> r : a := * r -> s : b := * \
             s -> u : assume a != b u -> w : assume a = a }",
        );
        let target = p.target_by_name("t", "w").unwrap();
        let v = check_reach(&p, 1, target, &CheckOptions::default());
        let w = v.witness().unwrap();
        let run = concretize_witness(&p, w).unwrap();
        assert!(validate_witness(&p, 1, &run));
        assert!(run.last().1.iter().all(|v| *v <= 2));
    }

    #[test]
    fn gap_guard_triggers_inflation() {
        let p = prog(
            "domain nat thread t { regs a b init q q -> r : a := * r -> s : b := * \
             s -> u : assume a <2 b u -> w : assume a < b }",
        );
        let target = p.target_by_name("t", "u").unwrap();
        let v = check_reach(&p, 1, target, &CheckOptions::default());
        let run = concretize_witness(&p, v.witness().unwrap()).unwrap();
        assert!(validate_witness(&p, 1, &run));
        let m = &run.last().1;
        let (a, b) = (m[1], m[2]);
        assert!(a + 2 < b, "{a} {b}");
        for ((_, m), (_, st)) in run.configs[1..].iter().zip(&v.witness().unwrap().steps) {
            assert_eq!(abstract_of(m), st.rel);
        }
    }

    #[test]
    fn unreachable_gap() {
        // a + 1 < b and b < a + 1 cannot both hold
        let p = prog(
            "domain nat thread t { regs a b init q q -> r : a := * r -> s : b := * \
             s -> u : assume a <1 b u -> w : assume b < a }",
        );
        let v = check_reach(&p, 1, p.target_by_name("t", "w").unwrap(), &CheckOptions::default());
        assert_eq!(v.outcome, Outcome::Unreachable);
    }

    #[test]
    fn inflate_examples() {
        let p = prog("domain nat thread t { regs a b init q q -> r : a := * r -> s : b := a }");
        let target = p.target_by_name("t", "s").unwrap();
        let w = check_reach(&p, 1, target, &CheckOptions::default());
        let run = concretize_witness(&p, w.witness().unwrap()).unwrap();
        let big = inflate(&run, 1, 5);
        assert!(validate_witness(&p, 1, &big));
        assert_eq!(inflate(&run, 1000, 3), run);
        assert_eq!(inflate(&inflate(&run, 1, 2), 1, 3), inflate(&run, 1, 5));
    }

    #[test]
    fn perturbed_run_is_invalid() {
        let p = prog("domain nat thread t { regs a b init q q -> r : a := * r -> s : assume a = b }");
        let target = p.target_by_name("t", "s").unwrap();
        let w = check_reach(&p, 1, target, &CheckOptions::default());
        let run = concretize_witness(&p, w.witness().unwrap()).unwrap();
        assert!(validate_witness(&p, 1, &run));
        let mut bad = run.clone();
        bad.steps[0].1 = Some(9);
        assert!(!validate_witness(&p, 1, &bad));
        let empty = ConcreteRun {
            act: run.act.clone(),
            steps: vec![],
            configs: vec![run.configs[0].clone()],
        };
        assert!(validate_witness(&p, 1, &empty));
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let p = prog(
            "domain nat vars x y \
             thread t1 { regs a b init q0 q0 -> q1 : a := * q1 -> q2 : write x a q2 -> q3 : read y b \
               q3 -> q4 : assume a < b } \
             thread t2 { regs c d init p0 p0 -> p1 : c := * p1 -> p2 : write y c p2 -> p3 : read x d } \
             target t1:q4",
        );
        let target = p.target().unwrap();
        let seq = check_reach(&p, 3, target, &CheckOptions::default());
        let par = check_reach(
            &p,
            3,
            target,
            &CheckOptions {
                threads: 4,
                ..CheckOptions::default()
            },
        );
        assert_eq!(seq.outcome, par.outcome);
        let run = concretize_witness(&p, seq.witness().unwrap()).unwrap();
        let tso = to_tso_run(&p, 3, &run.trace()).unwrap();
        assert!(tso.last().at(target));
    }

    #[test]
    fn budget_is_reported() {
        let p = prog(
            "domain nat thread t { regs a b c init q q -> q : a := * q -> q : b := * \
             q -> q : c := * q -> s : assume a <9 b s -> s : assume c = c }",
        );
        let v = check_reach(
            &p,
            1,
            p.target_by_name("t", "s").unwrap(),
            &CheckOptions {
                max_states: 5,
                ..CheckOptions::default()
            },
        );
        assert_eq!(v.outcome, Outcome::BoundExhausted);
    }
}
