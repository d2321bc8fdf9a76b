//! Concrete TSO semantics with bounded explicit-state search.
//!
//! Every thread owns a FIFO store buffer. Writes are appended to it, reads
//! see the thread's newest buffered write to the variable if there is one
//! and memory otherwise, and an update step moves the oldest buffered write
//! into memory. `arw` needs an empty buffer.
//!
//! The search here is an under-approximation: buffers are capped, fresh
//! values come from `0..=domain_bound` and runs are cut at a depth. A
//! negative answer only means "not within these bounds".

use std::collections::VecDeque;
use std::fmt;

use indexmap::IndexSet;
use thiserror::Error;

use crate::program::{eval_rel, Op, Program, StateId, Target, ThreadId, VarId};

/// A configuration: control states, register values, buffers and memory.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TsoConfig {
    pub states: Vec<StateId>,
    pub regs: Vec<u64>,
    /// Oldest write at the front.
    pub bufs: Vec<VecDeque<(VarId, u64)>>,
    pub mem: Vec<u64>,
}

impl TsoConfig {
    /// Every thread in its initial state, everything zero, buffers empty.
    pub fn initial(p: &Program) -> Self {
        TsoConfig {
            states: p.threads().iter().map(|t| t.init).collect(),
            regs: vec![0; p.num_regs()],
            bufs: vec![VecDeque::new(); p.num_threads()],
            mem: vec![0; p.num_vars()],
        }
    }

    /// The value `t` would read from `x`.
    pub fn read_value(&self, t: ThreadId, x: VarId) -> u64 {
        self.bufs[t.index()]
            .iter()
            .rev()
            .find(|(y, _)| *y == x)
            .map_or(self.mem[x.index()], |(_, d)| *d)
    }

    pub fn at(&self, target: Target) -> bool {
        self.states[target.thread.index()] == target.state
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    /// Transition `transition` of the thread. `value` is the value chosen by
    /// a `NewValue` and `None` for every other op.
    Op {
        transition: usize,
        value: Option<u64>,
    },
    /// Oldest buffered write of the thread reaches memory.
    Update,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label {
    pub thread: ThreadId,
    pub action: Action,
}

impl Label {
    pub fn is_update(&self) -> bool {
        self.action == Action::Update
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.action {
            Action::Op {
                transition,
                value: None,
            } => write!(f, "t{}:#{transition}", self.thread.0),
            Action::Op {
                transition,
                value: Some(d),
            } => write!(f, "t{}:#{transition}={d}", self.thread.0),
            Action::Update => write!(f, "t{}:u", self.thread.0),
        }
    }
}

/// Finitization of the concrete search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    /// Writes are disabled while the buffer holds this many entries.
    pub buffer_bound: usize,
    /// `NewValue` draws from `0..=domain_bound`.
    pub domain_bound: u64,
    /// Maximum run length.
    pub depth: usize,
    /// Maximum number of distinct search nodes.
    pub max_states: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            buffer_bound: 2,
            domain_bound: 3,
            depth: 300,
            max_states: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    pub initial: TsoConfig,
    pub steps: Vec<(Label, TsoConfig)>,
}

impl Run {
    pub fn empty(p: &Program) -> Self {
        Run {
            initial: TsoConfig::initial(p),
            steps: Vec::new(),
        }
    }

    pub fn last(&self) -> &TsoConfig {
        self.steps.last().map_or(&self.initial, |(_, c)| c)
    }

    pub fn labels(&self) -> impl Iterator<Item = &Label> {
        self.steps.iter().map(|(l, _)| l)
    }

    /// Replays `labels` from the initial configuration.
    pub fn replay(p: &Program, labels: &[Label]) -> Result<Self, StepError> {
        let mut run = Run::empty(p);
        for l in labels {
            let next = tso_step(p, run.last(), l)?;
            run.steps.push((*l, next));
        }
        Ok(run)
    }

    /// True iff the run starts in the initial configuration and each step
    /// is a legal transition.
    pub fn is_valid(&self, p: &Program) -> bool {
        if self.initial != TsoConfig::initial(p) {
            return false;
        }
        let mut cur = &self.initial;
        for (l, next) in &self.steps {
            match tso_step(p, cur, l) {
                Ok(c) if &c == next => cur = next,
                _ => return false,
            }
        }
        true
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("label {0} not enabled")]
    NotEnabled(Label),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TsoVerdict {
    Reachable(Run),
    /// The bounded space was exhausted without reaching the target.
    NotWithinBounds,
    /// `max_states` was hit before the search finished.
    BoundExhausted,
}

impl TsoVerdict {
    pub fn is_reachable(&self) -> bool {
        matches!(self, TsoVerdict::Reachable(_))
    }

    pub fn run(&self) -> Option<&Run> {
        match self {
            TsoVerdict::Reachable(r) => Some(r),
            _ => None,
        }
    }
}

fn thread_labels(p: &Program, c: &TsoConfig, b: &Bounds, t: ThreadId, out: &mut Vec<Label>) {
    let th = p.thread(t);
    let buf = &c.bufs[t.index()];
    for (i, tr) in th.outgoing(c.states[t.index()]) {
        let op = |value| Label {
            thread: t,
            action: Action::Op {
                transition: i,
                value,
            },
        };
        let enabled = match tr.op {
            Op::NewValue(_) => {
                out.extend((0..=b.domain_bound).map(|d| op(Some(d))));
                continue;
            }
            Op::Assign(..) | Op::Read(..) => true,
            Op::Guard(rel, a, bb) => eval_rel(rel, c.regs[a.index()], c.regs[bb.index()]),
            Op::Write(..) => buf.len() < b.buffer_bound,
            Op::Arw(x, r1, _) => buf.is_empty() && c.mem[x.index()] == c.regs[r1.index()],
        };
        if enabled {
            out.push(op(None));
        }
    }
    if !buf.is_empty() {
        out.push(Label {
            thread: t,
            action: Action::Update,
        });
    }
}

/// The labels enabled in `c`, sorted.
pub fn tso_enabled(p: &Program, c: &TsoConfig, b: &Bounds) -> Vec<Label> {
    let mut out = Vec::new();
    for t in 0..p.num_threads() {
        thread_labels(p, c, b, ThreadId(t as u16), &mut out);
    }
    out.sort();
    out
}

/// The successor of `c` under `l`. Buffer capacity is not checked here; it
/// is a property of the search, not of the semantics.
pub fn tso_step(p: &Program, c: &TsoConfig, l: &Label) -> Result<TsoConfig, StepError> {
    let not_enabled = || StepError::NotEnabled(*l);
    let t = l.thread;
    if t.index() >= p.num_threads() {
        return Err(not_enabled());
    }
    let mut n = c.clone();
    match l.action {
        Action::Update => {
            let (x, d) = n.bufs[t.index()].pop_front().ok_or_else(not_enabled)?;
            n.mem[x.index()] = d;
        }
        Action::Op { transition, value } => {
            let tr = p
                .thread(t)
                .transitions
                .get(transition)
                .ok_or_else(not_enabled)?;
            if tr.from != c.states[t.index()] || value.is_some() != matches!(tr.op, Op::NewValue(_))
            {
                return Err(not_enabled());
            }
            match tr.op {
                Op::Assign(a, b) => n.regs[a.index()] = c.regs[b.index()],
                Op::NewValue(a) => n.regs[a.index()] = value.expect("checked above"),
                Op::Guard(rel, a, b) => {
                    if !eval_rel(rel, c.regs[a.index()], c.regs[b.index()]) {
                        return Err(not_enabled());
                    }
                }
                Op::Read(x, r) => n.regs[r.index()] = c.read_value(t, x),
                Op::Write(x, r) => n.bufs[t.index()].push_back((x, c.regs[r.index()])),
                Op::Arw(x, r1, r2) => {
                    if !c.bufs[t.index()].is_empty() || c.mem[x.index()] != c.regs[r1.index()] {
                        return Err(not_enabled());
                    }
                    n.mem[x.index()] = c.regs[r2.index()];
                }
            }
            n.states[t.index()] = tr.to;
        }
    }
    Ok(n)
}

/// Breadth-first search over nodes of type `N`. `succ` lists the labelled
/// successors of a node in a fixed order, which makes the returned path
/// deterministic.
fn bfs<N, F>(
    init: N,
    is_target: impl Fn(&N) -> bool,
    mut succ: F,
    depth: usize,
    max_states: usize,
) -> Result<Option<Vec<(Label, N)>>, ()>
where
    N: Clone + Eq + std::hash::Hash,
    F: FnMut(&N) -> Vec<(Label, N)>,
{
    let mut nodes: IndexSet<N> = IndexSet::new();
    let mut parent: Vec<Option<(usize, Label)>> = vec![None];
    nodes.insert(init);
    let mut level_start = 0;
    for d in 0..=depth {
        let level_end = nodes.len();
        for i in level_start..level_end {
            let node = nodes.get_index(i).expect("in range").clone();
            if is_target(&node) {
                let mut path = Vec::new();
                let mut at = i;
                while let Some((from, l)) = parent[at] {
                    path.push((l, nodes.get_index(at).expect("in range").clone()));
                    at = from;
                }
                path.reverse();
                return Ok(Some(path));
            }
            if d == depth {
                continue;
            }
            for (l, s) in succ(&node) {
                if nodes.contains(&s) {
                    continue;
                }
                if nodes.len() >= max_states {
                    return Err(());
                }
                nodes.insert(s);
                parent.push(Some((i, l)));
            }
        }
        if level_end == nodes.len() {
            break;
        }
        level_start = level_end;
    }
    Ok(None)
}

fn verdict(p: &Program, found: Result<Option<Vec<(Label, TsoConfig)>>, ()>) -> TsoVerdict {
    match found {
        Ok(Some(steps)) => TsoVerdict::Reachable(Run {
            initial: TsoConfig::initial(p),
            steps,
        }),
        Ok(None) => TsoVerdict::NotWithinBounds,
        Err(()) => TsoVerdict::BoundExhausted,
    }
}

/// Bounded breadth-first search for a configuration at `target` under
/// unrestricted TSO scheduling. Witnesses are shortest.
pub fn tso_reach_bounded(p: &Program, target: Target, b: Bounds) -> TsoVerdict {
    let found = bfs(
        TsoConfig::initial(p),
        |c| c.at(target),
        |c| {
            tso_enabled(p, c, &b)
                .into_iter()
                .map(|l| (l, tso_step(p, c, &l).expect("enabled label steps")))
                .collect()
        },
        b.depth,
        b.max_states,
    );
    verdict(p, found)
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct CbNode {
    cfg: TsoConfig,
    contexts: u32,
    active: Option<ThreadId>,
}

/// Like [`tso_reach_bounded`] but only over runs made of at most `k`
/// contexts, each of which has a single thread doing every op and update.
pub fn cb_reach_bounded(p: &Program, target: Target, k: u32, b: Bounds) -> TsoVerdict {
    let init = CbNode {
        cfg: TsoConfig::initial(p),
        contexts: 0,
        active: None,
    };
    let found = bfs(
        init,
        |n| n.cfg.at(target),
        |n| {
            tso_enabled(p, &n.cfg, &b)
                .into_iter()
                .filter_map(|l| {
                    let contexts = if n.active == Some(l.thread) {
                        n.contexts
                    } else {
                        n.contexts + 1
                    };
                    (contexts <= k).then(|| {
                        let cfg = tso_step(p, &n.cfg, &l).expect("enabled label steps");
                        (
                            l,
                            CbNode {
                                cfg,
                                contexts,
                                active: Some(l.thread),
                            },
                        )
                    })
                })
                .collect()
        },
        b.depth,
        b.max_states,
    );
    verdict(
        p,
        found.map(|o| o.map(|path| path.into_iter().map(|(l, n)| (l, n.cfg)).collect())),
    )
}

/// Number of maximal single-thread segments of the label sequence.
pub fn context_count<'a>(labels: impl IntoIterator<Item = &'a Label>) -> usize {
    let mut count = 0;
    let mut prev = None;
    for l in labels {
        if prev != Some(l.thread) {
            count += 1;
            prev = Some(l.thread);
        }
    }
    count
}

/// True iff the run splits into at most `k` contexts.
pub fn cb_partition_check(run: &Run, k: usize) -> bool {
    context_count(run.labels()) <= k
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalizeError {
    #[error("run needs more than {0} contexts")]
    TooManyContexts(usize),
    #[error("run is not valid: {0}")]
    Invalid(#[from] StepError),
}

/// Moves every update to the end of its context without changing the order
/// of other labels. An `arw` acts as a barrier: updates are only moved up to
/// the next `arw` of the same context, since it needs an empty buffer.
pub fn normalize_updates(p: &Program, run: &Run, k: usize) -> Result<Run, NormalizeError> {
    if !cb_partition_check(run, k) {
        return Err(NormalizeError::TooManyContexts(k));
    }
    let is_arw = |l: &Label| match l.action {
        Action::Op { transition, .. } => {
            matches!(p.thread(l.thread).transitions[transition].op, Op::Arw(..))
        }
        Action::Update => false,
    };
    let labels: Vec<Label> = run.labels().copied().collect();
    let mut out = Vec::with_capacity(labels.len());
    let mut start = 0;
    while start < labels.len() {
        let thread = labels[start].thread;
        let mut end = start;
        while end < labels.len() && labels[end].thread == thread {
            end += 1;
            if is_arw(&labels[end - 1]) {
                break;
            }
        }
        let block = &labels[start..end];
        // an arw closing the block stays last, after the moved updates
        let (body, tail) = match block.last() {
            Some(l) if is_arw(l) => block.split_at(block.len() - 1),
            _ => (block, &[][..]),
        };
        out.extend(body.iter().filter(|l| !l.is_update()));
        out.extend(body.iter().filter(|l| l.is_update()));
        out.extend(tail);
        start = end;
    }
    Ok(Run::replay(p, &out)?)
}
