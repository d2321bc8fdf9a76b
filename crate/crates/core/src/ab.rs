//! The buffer-abstract machine for `k` contexts.
//!
//! Store buffers are replaced by finitely many extra variables. Up front the
//! machine fixes which thread is active in each of the `k` contexts
//! (`act`). When a thread writes, it also decides in which of its own
//! future contexts that write will reach memory, and records the value in
//! two places: `PerThread(x, t)`, the newest write of `t` to `x`, which
//! `t`'s own reads see while the write is pending; and `PerContext(x, j)`,
//! the last write to `x` that reaches memory in context `j`. At the end of
//! context `j` every `PerContext(x, j)` with `x` in `u(j)` is copied to
//! `Shared(x)`.
//!
//! `c(x, t)` is the context in which `t`'s newest write to `x` reaches
//! memory, `0` when there is none, and [`NEVER`] when it stays buffered for
//! the rest of the run. FIFO order is kept by never choosing a context
//! earlier than the latest one already chosen by the thread.
//!
//! Transitions are described by [`AbEffect`] lists over [`AbVar`]s so the
//! same rules drive both the concrete machine here (values in `u64`) and the
//! order abstraction in [`crate::rel`].

use std::collections::HashMap;
use std::fmt;

use indexmap::IndexSet;
use thiserror::Error;

use crate::program::{eval_rel, Op, Program, Relation, StateId, Target, ThreadId, VarId, RegId};
use crate::tso::{self, Action, Label, Run, StepError};

/// `c(x, t)` of a write that never leaves the buffer.
pub const NEVER: u8 = u8::MAX;

/// Variables of the abstract machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AbVar {
    /// Never written; always 0. Fresh values are never placed below it.
    Sentinel,
    Shared(VarId),
    Reg(RegId),
    /// The last write to `x` reaching memory in context `j` (1-based).
    PerContext(VarId, u8),
    /// The newest write of thread `t` to `x`.
    PerThread(VarId, ThreadId),
}

/// Dense numbering of the abstract variables of a program at a given `k`:
/// the sentinel, shared variables, registers, per-context copies, then
/// per-thread copies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AbLayout {
    pub vars: usize,
    pub regs: usize,
    pub threads: usize,
    pub k: usize,
}

impl AbLayout {
    pub fn new(p: &Program, k: u32) -> Self {
        AbLayout {
            vars: p.num_vars(),
            regs: p.num_regs(),
            threads: p.num_threads(),
            k: k as usize,
        }
    }

    pub fn len(&self) -> usize {
        1 + self.vars + self.regs + self.vars * self.k + self.vars * self.threads
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, v: AbVar) -> usize {
        let per_context = 1 + self.vars + self.regs;
        let per_thread = per_context + self.vars * self.k;
        match v {
            AbVar::Sentinel => 0,
            AbVar::Shared(x) => 1 + x.index(),
            AbVar::Reg(r) => 1 + self.vars + r.index(),
            AbVar::PerContext(x, j) => per_context + x.index() * self.k + (j as usize - 1),
            AbVar::PerThread(x, t) => per_thread + x.index() * self.threads + t.index(),
        }
    }

    pub fn var(&self, i: usize) -> AbVar {
        let per_context = 1 + self.vars + self.regs;
        let per_thread = per_context + self.vars * self.k;
        if i == 0 {
            AbVar::Sentinel
        } else if i <= self.vars {
            AbVar::Shared(VarId((i - 1) as u16))
        } else if i < per_context {
            AbVar::Reg(RegId((i - 1 - self.vars) as u16))
        } else if i < per_thread {
            let o = i - per_context;
            AbVar::PerContext(VarId((o / self.k) as u16), (o % self.k + 1) as u8)
        } else {
            let o = i - per_thread;
            AbVar::PerThread(
                VarId((o / self.threads) as u16),
                ThreadId((o % self.threads) as u16),
            )
        }
    }

    pub fn all(&self) -> impl Iterator<Item = AbVar> + '_ {
        (0..self.len()).map(|i| self.var(i))
    }
}

/// Control part of the abstract machine.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AbState {
    pub states: Vec<StateId>,
    /// `act[j - 1]` is the thread active in context `j`.
    pub act: Vec<ThreadId>,
    /// Current context, `1..=k`.
    pub j: u8,
    /// `c[x * threads + t]`.
    pub c: Vec<u8>,
    /// `u[(j - 1) * vars + x]`: `x` is written to memory at the end of `j`.
    pub u: Vec<bool>,
}

impl AbState {
    pub fn k(&self) -> usize {
        self.act.len()
    }

    pub fn c(&self, x: VarId, t: ThreadId) -> u8 {
        self.c[x.index() * self.states.len() + t.index()]
    }

    fn set_c(&mut self, x: VarId, t: ThreadId, v: u8) {
        let n = self.states.len();
        self.c[x.index() * n + t.index()] = v;
    }

    pub fn u(&self, j: u8, x: VarId) -> bool {
        let vars = self.u.len() / self.k();
        self.u[(j as usize - 1) * vars + x.index()]
    }

    fn set_u(&mut self, j: u8, x: VarId, v: bool) {
        let vars = self.u.len() / self.k();
        self.u[(j as usize - 1) * vars + x.index()] = v;
    }

    /// The thread active in the current context.
    pub fn active(&self) -> ThreadId {
        self.act[self.j as usize - 1]
    }

    /// Largest `c(y, t)` over all `y` (0 if `t` has no pending write).
    pub fn max_c(&self, t: ThreadId) -> u8 {
        let n = self.states.len();
        self.c
            .iter()
            .skip(t.index())
            .step_by(n)
            .copied()
            .max()
            .unwrap_or(0)
    }

    pub fn at(&self, target: Target) -> bool {
        self.states[target.thread.index()] == target.state
    }
}

/// How a write leaves the buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Flush {
    /// At the end of this context.
    Context(u8),
    /// Not within the run.
    Never,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AbAction {
    /// A transition of the thread. `flush` is set for writes only.
    Op {
        transition: usize,
        flush: Option<Flush>,
    },
    /// End of the current context.
    ContextSwitch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AbLabel {
    pub thread: ThreadId,
    pub action: AbAction,
}

impl fmt::Display for AbLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.action {
            AbAction::Op {
                transition,
                flush: None,
            } => write!(f, "t{}:#{transition}", self.thread.0),
            AbAction::Op {
                transition,
                flush: Some(Flush::Context(j)),
            } => write!(f, "t{}:#{transition}@{j}", self.thread.0),
            AbAction::Op {
                transition,
                flush: Some(Flush::Never),
            } => write!(f, "t{}:#{transition}@never", self.thread.0),
            AbAction::ContextSwitch => write!(f, "t{}:switch", self.thread.0),
        }
    }
}

/// What a transition does to the abstract variables. Effects of one
/// transition apply in order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AbEffect {
    Copy(AbVar, AbVar),
    /// The destination gets an arbitrary value.
    Fresh(AbVar),
    /// Blocks unless the relation holds.
    Guard(Relation, AbVar, AbVar),
    /// Simultaneous copies: every source is read before any destination is
    /// written.
    MultiCopy(Vec<(AbVar, AbVar)>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbStep {
    pub label: AbLabel,
    pub effects: Vec<AbEffect>,
    pub next: AbState,
}

/// Every `act` function, in lexicographic order.
pub fn all_acts(threads: usize, k: u32) -> Vec<Vec<ThreadId>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..threads).map(move |t| {
                    let mut v = prefix.clone();
                    v.push(ThreadId(t as u16));
                    v
                })
            })
            .collect();
    }
    out
}

pub fn ab_initial(p: &Program, k: u32, act: &[ThreadId]) -> AbState {
    assert_eq!(act.len(), k as usize, "act must cover every context");
    AbState {
        states: p.threads().iter().map(|t| t.init).collect(),
        act: act.to_vec(),
        j: 1,
        c: vec![0; p.num_vars() * p.num_threads()],
        u: vec![false; k as usize * p.num_vars()],
    }
}

/// The `|T|^k` initial states.
pub fn ab_initial_states(p: &Program, k: u32) -> Vec<AbState> {
    all_acts(p.num_threads(), k)
        .iter()
        .map(|act| ab_initial(p, k, act))
        .collect()
}

/// Every transition out of `s`, in label order.
///
/// At a context switch, variables that can no longer be read are reset to
/// the sentinel value: the per-context copies of the finished context, and
/// the per-thread copies whose write has just reached memory (their `c`
/// goes back to 0). This keeps dead values out of the state.
pub fn ab_transitions(p: &Program, s: &AbState) -> Vec<AbStep> {
    let k = s.k() as u8;
    let j = s.j;
    let t = s.active();
    let mut out = Vec::new();
    for (i, tr) in p.thread(t).outgoing(s.states[t.index()]) {
        let mut next = s.clone();
        next.states[t.index()] = tr.to;
        let label = |flush| AbLabel {
            thread: t,
            action: AbAction::Op {
                transition: i,
                flush,
            },
        };
        let max_c = s.max_c(t);
        let start = out.len();
        match tr.op {
            Op::Assign(a, b) => out.push(AbStep {
                label: label(None),
                effects: vec![AbEffect::Copy(AbVar::Reg(a), AbVar::Reg(b))],
                next,
            }),
            Op::NewValue(a) => out.push(AbStep {
                label: label(None),
                effects: vec![AbEffect::Fresh(AbVar::Reg(a))],
                next,
            }),
            Op::Guard(rel, a, b) => out.push(AbStep {
                label: label(None),
                effects: vec![AbEffect::Guard(rel, AbVar::Reg(a), AbVar::Reg(b))],
                next,
            }),
            Op::Read(x, r) => {
                let c = s.c(x, t);
                let src = if c != 0 && c >= j {
                    AbVar::PerThread(x, t)
                } else {
                    AbVar::Shared(x)
                };
                out.push(AbStep {
                    label: label(None),
                    effects: vec![AbEffect::Copy(AbVar::Reg(r), src)],
                    next,
                });
            }
            Op::Write(x, r) => {
                for jj in j.max(max_c)..=k {
                    if s.act[jj as usize - 1] != t {
                        continue;
                    }
                    let mut n = next.clone();
                    n.set_c(x, t, jj);
                    n.set_u(jj, x, true);
                    out.push(AbStep {
                        label: label(Some(Flush::Context(jj))),
                        effects: vec![
                            AbEffect::Copy(AbVar::PerThread(x, t), AbVar::Reg(r)),
                            AbEffect::Copy(AbVar::PerContext(x, jj), AbVar::Reg(r)),
                        ],
                        next: n,
                    });
                }
                // when t owns the last context, flushing there is the same
                // as never flushing
                if s.act[k as usize - 1] != t {
                    let mut n = next;
                    n.set_c(x, t, NEVER);
                    out.push(AbStep {
                        label: label(Some(Flush::Never)),
                        effects: vec![AbEffect::Copy(AbVar::PerThread(x, t), AbVar::Reg(r))],
                        next: n,
                    });
                }
            }
            Op::Arw(x, r1, r2) => {
                if j < max_c {
                    continue;
                }
                let c = s.c(x, t);
                let effects = if c == j {
                    vec![
                        AbEffect::Guard(Relation::Eq, AbVar::Reg(r1), AbVar::PerThread(x, t)),
                        AbEffect::Copy(AbVar::PerThread(x, t), AbVar::Reg(r2)),
                        AbEffect::Copy(AbVar::PerContext(x, j), AbVar::Reg(r2)),
                    ]
                } else {
                    vec![
                        AbEffect::Guard(Relation::Eq, AbVar::Reg(r1), AbVar::Shared(x)),
                        AbEffect::Copy(AbVar::Shared(x), AbVar::Reg(r2)),
                    ]
                };
                out.push(AbStep {
                    label: label(None),
                    effects,
                    next,
                });
            }
        }
        // registers that just became dead fall back to the sentinel's class
        let th = p.thread(t);
        let was_dead = th.dead_at(tr.from);
        let resets: Vec<AbEffect> = th
            .dead_at(tr.to)
            .iter()
            .filter(|r| !was_dead.contains(r) || tr.op.registers().first().copied() == Some(r))
            .map(|r| AbEffect::Copy(AbVar::Reg(*r), AbVar::Sentinel))
            .collect();
        for st in &mut out[start..] {
            st.effects.extend(resets.iter().cloned());
        }
    }
    if j < k {
        let mut next = s.clone();
        let mut copies = Vec::new();
        for x in 0..p.num_vars() {
            let x = VarId(x as u16);
            if s.u(j, x) {
                copies.push((AbVar::Shared(x), AbVar::PerContext(x, j)));
                copies.push((AbVar::PerContext(x, j), AbVar::Sentinel));
                next.set_u(j, x, false);
            }
            for th in 0..p.num_threads() {
                let th = ThreadId(th as u16);
                if s.c(x, th) == j {
                    copies.push((AbVar::PerThread(x, th), AbVar::Sentinel));
                    next.set_c(x, th, 0);
                }
            }
        }
        next.j = j + 1;
        out.push(AbStep {
            label: AbLabel {
                thread: t,
                action: AbAction::ContextSwitch,
            },
            effects: vec![AbEffect::MultiCopy(copies)],
            next,
        });
    }
    out
}

/// Valuation of the abstract variables, indexed by [`AbLayout::index`].
pub type Valuation = Vec<u64>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AbError {
    #[error("label {0} not enabled")]
    NotEnabled(AbLabel),
    #[error("guard failed")]
    GuardFailed,
    #[error("a fresh value is needed")]
    MissingValue,
    #[error("the sentinel cannot be written")]
    SentinelWritten,
}

/// Applies effects to concrete values. `fresh` supplies the value for a
/// [`AbEffect::Fresh`].
pub fn apply_effects(
    layout: &AbLayout,
    effects: &[AbEffect],
    m: &[u64],
    fresh: Option<u64>,
) -> Result<Valuation, AbError> {
    let ix = |v: AbVar| layout.index(v);
    let mut m = m.to_vec();
    let dst = |v: AbVar| {
        if v == AbVar::Sentinel {
            Err(AbError::SentinelWritten)
        } else {
            Ok(ix(v))
        }
    };
    for e in effects {
        match e {
            AbEffect::Copy(d, s) => m[dst(*d)?] = m[ix(*s)],
            AbEffect::Fresh(d) => m[dst(*d)?] = fresh.ok_or(AbError::MissingValue)?,
            AbEffect::Guard(rel, a, b) => {
                if !eval_rel(*rel, m[ix(*a)], m[ix(*b)]) {
                    return Err(AbError::GuardFailed);
                }
            }
            AbEffect::MultiCopy(pairs) => {
                let vals: Vec<u64> = pairs.iter().map(|(_, s)| m[ix(*s)]).collect();
                for ((d, _), v) in pairs.iter().zip(vals) {
                    m[dst(*d)?] = v;
                }
            }
        }
    }
    Ok(m)
}

/// One concrete step of the abstract machine.
pub fn ab_concrete_step(
    p: &Program,
    layout: &AbLayout,
    s: &AbState,
    m: &[u64],
    label: &AbLabel,
    fresh: Option<u64>,
) -> Result<(AbState, Valuation), AbError> {
    let step = ab_transitions(p, s)
        .into_iter()
        .find(|st| st.label == *label)
        .ok_or(AbError::NotEnabled(*label))?;
    let m2 = apply_effects(layout, &step.effects, m, fresh)?;
    Ok((step.next, m2))
}

pub fn needs_value(effects: &[AbEffect]) -> bool {
    effects.iter().any(|e| matches!(e, AbEffect::Fresh(_)))
}

/// A run of the concrete abstract machine: the `act` function chosen at the
/// start and every label with the value picked by a `NewValue`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbTrace {
    pub act: Vec<ThreadId>,
    pub steps: Vec<(AbLabel, Option<u64>)>,
}

impl AbTrace {
    /// Replays the trace, returning every configuration including the
    /// initial one.
    pub fn replay(&self, p: &Program, k: u32) -> Result<Vec<(AbState, Valuation)>, AbError> {
        let layout = AbLayout::new(p, k);
        let mut cur = (ab_initial(p, k, &self.act), vec![0; layout.len()]);
        let mut out = vec![cur.clone()];
        for (l, v) in &self.steps {
            cur = ab_concrete_step(p, &layout, &cur.0, &cur.1, l, *v)?;
            out.push(cur.clone());
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AbVerdict {
    Reachable(AbTrace),
    NotWithinBounds,
    BoundExhausted,
}

impl AbVerdict {
    pub fn is_reachable(&self) -> bool {
        matches!(self, AbVerdict::Reachable(_))
    }
}

/// Breadth-first search of the concrete abstract machine with `NewValue`
/// drawing from `0..=domain_bound`.
pub fn reach_concrete(
    p: &Program,
    k: u32,
    target: Target,
    domain_bound: u64,
    max_states: usize,
) -> AbVerdict {
    let layout = AbLayout::new(p, k);
    let mut nodes: IndexSet<(AbState, Valuation)> = IndexSet::new();
    let mut parent: Vec<Option<(usize, AbLabel, Option<u64>)>> = Vec::new();
    for s in ab_initial_states(p, k) {
        if nodes.insert((s, vec![0; layout.len()])) {
            parent.push(None);
        }
    }
    let mut head = 0;
    while head < nodes.len() {
        let (s, m) = nodes.get_index(head).expect("in range").clone();
        if s.at(target) {
            let mut steps = Vec::new();
            let mut at = head;
            while let Some((from, l, v)) = parent[at] {
                steps.push((l, v));
                at = from;
            }
            steps.reverse();
            let act = nodes.get_index(at).expect("in range").0.act.clone();
            return AbVerdict::Reachable(AbTrace { act, steps });
        }
        for step in ab_transitions(p, &s) {
            let values: Vec<Option<u64>> = if needs_value(&step.effects) {
                (0..=domain_bound).map(Some).collect()
            } else {
                vec![None]
            };
            for v in values {
                let Ok(m2) = apply_effects(&layout, &step.effects, &m, v) else {
                    continue;
                };
                let node = (step.next.clone(), m2);
                if nodes.contains(&node) {
                    continue;
                }
                if nodes.len() >= max_states {
                    return AbVerdict::BoundExhausted;
                }
                nodes.insert(node);
                parent.push(Some((head, step.label, v)));
            }
        }
        head += 1;
    }
    AbVerdict::NotWithinBounds
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error(transparent)]
    Ab(#[from] AbError),
    #[error("TSO replay failed: {0}")]
    Tso(#[from] StepError),
}

/// Turns a run of the abstract machine into a TSO run with at most `k`
/// contexts, inserting the update steps the abstract run only promised:
/// buffered writes scheduled for context `j` are flushed at the end of `j`,
/// and the whole buffer is flushed right before an `arw`.
pub fn to_tso_run(p: &Program, k: u32, trace: &AbTrace) -> Result<Run, ReplayError> {
    let configs = trace.replay(p, k)?;
    let mut pending: HashMap<ThreadId, std::collections::VecDeque<Flush>> = HashMap::new();
    let mut labels = Vec::new();
    for ((l, v), (s, _)) in trace.steps.iter().zip(&configs) {
        let t = l.thread;
        let update = Label {
            thread: t,
            action: Action::Update,
        };
        match l.action {
            AbAction::ContextSwitch => {
                let q = pending.entry(t).or_default();
                while q.front() == Some(&Flush::Context(s.j)) {
                    q.pop_front();
                    labels.push(update);
                }
            }
            AbAction::Op { transition, flush } => {
                let op = &p.thread(t).transitions[transition].op;
                if let Op::Arw(..) = op {
                    let q = pending.entry(t).or_default();
                    labels.extend(std::iter::repeat_n(update, q.len()));
                    q.clear();
                }
                if let Some(f) = flush {
                    pending.entry(t).or_default().push_back(f);
                }
                labels.push(Label {
                    thread: t,
                    action: Action::Op {
                        transition,
                        value: *v,
                    },
                });
            }
        }
    }
    Ok(Run::replay(p, &labels)?)
}

/// Convenience wrapper: does `run` reach `target` and fit in `k` contexts?
pub fn tso_run_reaches(run: &Run, target: Target, k: u32) -> bool {
    run.last().at(target) && tso::cb_partition_check(run, k as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_program;
    use crate::tso::{cb_reach_bounded, Bounds};

    fn prog(text: &str) -> Program {
        parse_program(text).unwrap()
    }

    #[test]
    fn layout_round_trips() {
        let p = prog(
            "domain nat vars x y thread a { regs r init q } thread b { regs s w init q }",
        );
        for k in 1..4 {
            let l = AbLayout::new(&p, k);
            assert_eq!(l.len(), 1 + 2 + 3 + 2 * k as usize + 2 * 2);
            for i in 0..l.len() {
                assert_eq!(l.index(l.var(i)), i);
            }
        }
    }

    #[test]
    fn initial_states() {
        let p = prog("domain nat thread a { regs init q } thread b { regs init q }");
        let s = ab_initial(&p, 1, &[ThreadId(0)]);
        assert_eq!(s.j, 1);
        let acts = [ThreadId(0), ThreadId(1), ThreadId(0)];
        assert_eq!(ab_initial(&p, 3, &acts).act, acts.to_vec());
        for k in 1..=4 {
            assert_eq!(ab_initial_states(&p, k).len(), 2usize.pow(k));
        }
    }

    const WRITER: &str = "domain nat vars x thread t { regs r init q \
        q -> w : write x r q -> rd : read x r rd -> e : write x r }";

    #[test]
    fn read_without_pending_write_goes_to_memory() {
        let p = prog(WRITER);
        let s = ab_initial(&p, 2, &[ThreadId(0), ThreadId(0)]);
        let reads: Vec<_> = ab_transitions(&p, &s)
            .into_iter()
            .filter(|st| st.label.action == AbAction::Op { transition: 1, flush: None })
            .collect();
        assert_eq!(reads.len(), 1);
        assert_eq!(
            reads[0].effects,
            vec![AbEffect::Copy(AbVar::Reg(RegId(0)), AbVar::Shared(VarId(0)))]
        );
    }

    #[test]
    fn write_picks_each_own_context() {
        let p = prog(WRITER);
        let s = ab_initial(&p, 2, &[ThreadId(0), ThreadId(0)]);
        let writes: Vec<_> = ab_transitions(&p, &s)
            .into_iter()
            .filter_map(|st| match st.label.action {
                AbAction::Op {
                    transition: 0,
                    flush,
                } => flush,
                _ => None,
            })
            .collect();
        // the thread owns the last context, so "never" coincides with 2
        assert_eq!(writes, vec![Flush::Context(1), Flush::Context(2)]);

        let p2 = prog(&format!("{WRITER} thread o {{ regs init q }}"));
        let s = ab_initial(&p2, 2, &[ThreadId(0), ThreadId(1)]);
        let writes: Vec<_> = ab_transitions(&p2, &s)
            .into_iter()
            .filter_map(|st| match st.label.action {
                AbAction::Op {
                    transition: 0,
                    flush,
                } => flush,
                _ => None,
            })
            .collect();
        assert_eq!(writes, vec![Flush::Context(1), Flush::Never]);
    }

    #[test]
    fn no_switch_in_last_context() {
        let p = prog(WRITER);
        let mut s = ab_initial(&p, 2, &[ThreadId(0), ThreadId(0)]);
        assert!(ab_transitions(&p, &s)
            .iter()
            .any(|st| st.label.action == AbAction::ContextSwitch));
        s.j = 2;
        assert!(!ab_transitions(&p, &s)
            .iter()
            .any(|st| st.label.action == AbAction::ContextSwitch));
    }

    #[test]
    fn context_switch_flushes() {
        let p = prog(WRITER);
        let l = AbLayout::new(&p, 2);
        let mut s = ab_initial(&p, 2, &[ThreadId(0), ThreadId(0)]);
        s.set_u(1, VarId(0), true);
        s.set_c(VarId(0), ThreadId(0), 1);
        let mut m = vec![0; l.len()];
        m[l.index(AbVar::PerContext(VarId(0), 1))] = 7;
        let switch = AbLabel {
            thread: ThreadId(0),
            action: AbAction::ContextSwitch,
        };
        let (s2, m2) = ab_concrete_step(&p, &l, &s, &m, &switch, None).unwrap();
        assert_eq!(m2[l.index(AbVar::Shared(VarId(0)))], 7);
        assert_eq!(s2.j, 2);
        assert_eq!(s2.c(VarId(0), ThreadId(0)), 0);
    }

    #[test]
    fn gap_guard_fails_on_close_values() {
        let l = AbLayout {
            vars: 0,
            regs: 2,
            threads: 1,
            k: 1,
        };
        let a = AbVar::Reg(RegId(0));
        let b = AbVar::Reg(RegId(1));
        let m = vec![0, 3, 4];
        let e = [AbEffect::Guard(Relation::Lt(1), a, b)];
        assert_eq!(apply_effects(&l, &e, &m, None), Err(AbError::GuardFailed));
        let m = vec![0, 3, 5];
        assert!(apply_effects(&l, &e, &m, None).is_ok());
    }

    #[test]
    fn buffer_arw_compares_with_own_write() {
        let p = prog("domain nat vars x thread t { regs a b init q q -> w : write x a w -> z : arw x b a }");
        let l = AbLayout::new(&p, 1);
        let s = ab_initial(&p, 1, &[ThreadId(0)]);
        let m = vec![0; l.len()];
        let write = AbLabel {
            thread: ThreadId(0),
            action: AbAction::Op {
                transition: 0,
                flush: Some(Flush::Context(1)),
            },
        };
        let mut m1 = m.clone();
        m1[l.index(AbVar::Reg(RegId(0)))] = 5;
        let (s1, m1) = ab_concrete_step(&p, &l, &s, &m1, &write, None).unwrap();
        let arw = AbLabel {
            thread: ThreadId(0),
            action: AbAction::Op {
                transition: 1,
                flush: None,
            },
        };
        // b = 0 differs from the buffered 5
        assert_eq!(
            ab_concrete_step(&p, &l, &s1, &m1, &arw, None),
            Err(AbError::GuardFailed)
        );
        let mut m2 = m1.clone();
        m2[l.index(AbVar::Reg(RegId(1)))] = 5;
        assert!(ab_concrete_step(&p, &l, &s1, &m2, &arw, None).is_ok());
    }

    #[test]
    fn sentinel_cannot_be_written() {
        let l = AbLayout {
            vars: 0,
            regs: 1,
            threads: 1,
            k: 1,
        };
        let e = [AbEffect::Fresh(AbVar::Sentinel)];
        assert_eq!(
            apply_effects(&l, &e, &[0, 0], Some(1)),
            Err(AbError::SentinelWritten)
        );
    }

    /// Writes that stay buffered forever are observable: the reader sees
    /// the old value although the write happened first.
    #[test]
    fn unflushed_write_is_covered() {
        let p = prog(
            "domain nat vars x \
             thread w { regs one zero init q0 q0 -> q1 : one := * q1 -> q2 : assume one != zero q2 -> q3 : write x one } \
             thread r { regs v rzero init p0 p0 -> p1 : read x v p1 -> p2 : assume v = rzero } \
             target r:p2",
        );
        let target = p.target().unwrap();
        // w runs first and r second; r still reads 0 because w's write
        // never leaves the buffer
        let (w, r) = (ThreadId(0), ThreadId(1));
        let op = |thread, transition, flush| AbLabel {
            thread,
            action: AbAction::Op { transition, flush },
        };
        let trace = AbTrace {
            act: vec![w, r],
            steps: vec![
                (op(w, 0, None), Some(1)),
                (op(w, 1, None), None),
                (op(w, 2, Some(Flush::Never)), None),
                (
                    AbLabel {
                        thread: w,
                        action: AbAction::ContextSwitch,
                    },
                    None,
                ),
                (op(r, 0, None), None),
                (op(r, 1, None), None),
            ],
        };
        let configs = trace.replay(&p, 2).unwrap();
        assert!(configs.last().unwrap().0.at(target));
        let run = to_tso_run(&p, 2, &trace).unwrap();
        assert!(tso_run_reaches(&run, target, 2));
        assert_eq!(run.last().bufs[0].len(), 1);
        assert!(cb_reach_bounded(&p, target, 2, Bounds::default()).is_reachable());
    }
}
