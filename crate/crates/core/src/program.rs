//! Concurrent programs over the naturals and the relations that guard them.
//!
//! A program is written against names ([`ProgramDef`]) and interned into a
//! [`Program`] once [`validate`] finds nothing wrong with it. Everything
//! downstream (the TSO oracle, the buffer abstraction, the search) works on
//! the interned form, where threads, states, registers and shared variables
//! are small integer ids.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub struct $name(pub u16);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }
    };
}

id_type!(
    /// Index into [`Program::threads`].
    ThreadId
);
id_type!(
    /// Index into a thread's state list.
    StateId
);
id_type!(
    /// Program-wide register index. Registers of different threads never share an id.
    RegId
);
id_type!(
    /// Index into [`Program::vars`].
    VarId
);

/// A relation between two naturals.
///
/// `Lt(n)` holds for `a, b` when `a + n < b`, `Le(n)` when `a + n <= b`.
/// Plain `<` and `<=` are `Lt(0)` and `Le(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Relation {
    Eq,
    Neq,
    Lt(u32),
    Le(u32),
}

impl Relation {
    /// The gap parameter, if any.
    pub fn gap(self) -> Option<u32> {
        match self {
            Relation::Eq | Relation::Neq => None,
            Relation::Lt(n) | Relation::Le(n) => Some(n),
        }
    }

    /// True for `=` and `!=`.
    pub fn is_equality(self) -> bool {
        matches!(self, Relation::Eq | Relation::Neq)
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Relation::Eq => f.write_str("="),
            Relation::Neq => f.write_str("!="),
            Relation::Lt(0) => f.write_str("<"),
            Relation::Le(0) => f.write_str("<="),
            Relation::Lt(n) => write!(f, "<{n}"),
            Relation::Le(n) => write!(f, "<={n}"),
        }
    }
}

/// Evaluates `rel` on two naturals.
pub fn eval_rel(rel: Relation, a: u64, b: u64) -> bool {
    let (a, b) = (a as u128, b as u128);
    match rel {
        Relation::Eq => a == b,
        Relation::Neq => a != b,
        Relation::Lt(n) => a + (n as u128) < b,
        Relation::Le(n) => a + (n as u128) <= b,
    }
}

/// The six operations a thread transition can carry.
///
/// `R` names registers and `V` shared variables: `Op<String, String>` in a
/// [`ProgramDef`], `Op<RegId, VarId>` in a validated [`Program`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Op<R = RegId, V = VarId> {
    /// `r1 := r2`
    Assign(R, R),
    /// `r1 := *`, an arbitrary natural.
    NewValue(R),
    /// `assume r1 REL r2`
    Guard(Relation, R, R),
    /// `read x r1`
    Read(V, R),
    /// `write x r1`
    Write(V, R),
    /// `arw x r1 r2`: if memory holds `r1` at `x`, store `r2` there, atomically.
    Arw(V, R, R),
}

impl<R, V> Op<R, V> {
    pub fn registers(&self) -> Vec<&R> {
        match self {
            Op::Assign(a, b) | Op::Guard(_, a, b) | Op::Arw(_, a, b) => vec![a, b],
            Op::NewValue(a) | Op::Read(_, a) | Op::Write(_, a) => vec![a],
        }
    }

    pub fn variable(&self) -> Option<&V> {
        match self {
            Op::Read(x, _) | Op::Write(x, _) | Op::Arw(x, _, _) => Some(x),
            _ => None,
        }
    }

    pub fn relation(&self) -> Option<Relation> {
        match self {
            Op::Guard(rel, _, _) => Some(*rel),
            _ => None,
        }
    }
}

// ---------------------------------------------------------------------------
// Name-based definitions
// ---------------------------------------------------------------------------

/// A transition written against names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionDef {
    pub from: String,
    pub op: Op<String, String>,
    pub to: String,
}

/// A thread written against names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreadDef {
    pub name: String,
    pub regs: Vec<String>,
    pub init: String,
    pub transitions: Vec<TransitionDef>,
}

impl ThreadDef {
    pub fn new(name: impl Into<String>, init: impl Into<String>) -> Self {
        ThreadDef {
            name: name.into(),
            regs: Vec::new(),
            init: init.into(),
            transitions: Vec::new(),
        }
    }

    pub fn reg(&mut self, name: impl Into<String>) -> &mut Self {
        self.regs.push(name.into());
        self
    }

    /// Appends a transition; `op` uses register and variable names.
    pub fn trans(
        &mut self,
        from: impl Into<String>,
        op: Op<String, String>,
        to: impl Into<String>,
    ) -> &mut Self {
        self.transitions.push(TransitionDef {
            from: from.into(),
            op,
            to: to.into(),
        });
        self
    }
}

/// A whole program written against names. Turn it into a [`Program`] with
/// [`ProgramDef::build`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProgramDef {
    pub vars: Vec<String>,
    pub threads: Vec<ThreadDef>,
    /// `(thread, state)`
    pub target: Option<(String, String)>,
}

/// Where a diagnostic points inside a [`ProgramDef`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DefLocation {
    Vars,
    Thread(usize),
    Transition { thread: usize, index: usize },
    Target,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DiagnosticKind {
    NoThreads,
    DuplicateThread,
    DuplicateVariable,
    DuplicateRegister,
    /// The same register name is declared by two threads.
    SharedRegister,
    UnknownRegister,
    UnknownVariable,
    UnknownTargetThread,
    UnknownTargetState,
    /// More states, registers, variables or threads than the id types hold.
    TooLarge,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
    pub location: DefLocation,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

const MAX_IDS: usize = u16::MAX as usize;

/// Checks every structural invariant of `def`. An empty result means
/// [`ProgramDef::build`] will succeed.
pub fn validate(def: &ProgramDef) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut diag = |kind, location, message: String| {
        out.push(Diagnostic {
            kind,
            message,
            location,
        })
    };

    if def.threads.is_empty() {
        diag(
            DiagnosticKind::NoThreads,
            DefLocation::Vars,
            "program declares no threads".into(),
        );
    }
    if def.threads.len() > MAX_IDS || def.vars.len() > MAX_IDS {
        diag(
            DiagnosticKind::TooLarge,
            DefLocation::Vars,
            "too many threads or variables".into(),
        );
    }

    let mut seen_vars = BTreeSet::new();
    for v in &def.vars {
        if !seen_vars.insert(v.as_str()) {
            diag(
                DiagnosticKind::DuplicateVariable,
                DefLocation::Vars,
                format!("variable `{v}` declared twice"),
            );
        }
    }

    let mut thread_names: HashMap<&str, usize> = HashMap::new();
    for (ti, t) in def.threads.iter().enumerate() {
        if thread_names.insert(t.name.as_str(), ti).is_some() {
            diag(
                DiagnosticKind::DuplicateThread,
                DefLocation::Thread(ti),
                format!("thread `{}` declared twice", t.name),
            );
        }
    }

    // register name -> owning thread names
    let mut owners: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let mut total_regs = 0usize;
    for (ti, t) in def.threads.iter().enumerate() {
        let mut own = BTreeSet::new();
        for r in &t.regs {
            total_regs += 1;
            if !own.insert(r.as_str()) {
                diag(
                    DiagnosticKind::DuplicateRegister,
                    DefLocation::Thread(ti),
                    format!("register `{r}` declared twice in thread `{}`", t.name),
                );
            }
            owners.entry(r.as_str()).or_default().insert(t.name.as_str());
        }
        let mut states = BTreeSet::new();
        states.insert(t.init.as_str());
        for (i, tr) in t.transitions.iter().enumerate() {
            states.insert(tr.from.as_str());
            states.insert(tr.to.as_str());
            let location = DefLocation::Transition {
                thread: ti,
                index: i,
            };
            for r in tr.op.registers() {
                if !own.contains(r.as_str()) {
                    diag(
                        DiagnosticKind::UnknownRegister,
                        location,
                        format!("unknown register `{r}` in thread `{}`", t.name),
                    );
                }
            }
            if let Some(x) = tr.op.variable() {
                if !seen_vars.contains(x.as_str()) {
                    diag(
                        DiagnosticKind::UnknownVariable,
                        location,
                        format!("unknown variable `{x}`"),
                    );
                }
            }
        }
        if states.len() > MAX_IDS {
            diag(
                DiagnosticKind::TooLarge,
                DefLocation::Thread(ti),
                format!("thread `{}` has too many states", t.name),
            );
        }
    }
    if total_regs > MAX_IDS {
        diag(
            DiagnosticKind::TooLarge,
            DefLocation::Vars,
            "too many registers".into(),
        );
    }
    for (r, ts) in &owners {
        if ts.len() > 1 {
            let names: Vec<_> = ts.iter().copied().collect();
            diag(
                DiagnosticKind::SharedRegister,
                DefLocation::Vars,
                format!(
                    "register `{r}` is declared by threads {}; registers of distinct threads must be disjoint",
                    names.join(", ")
                ),
            );
        }
    }

    if let Some((tname, sname)) = &def.target {
        match def.threads.iter().find(|t| &t.name == tname) {
            None => diag(
                DiagnosticKind::UnknownTargetThread,
                DefLocation::Target,
                format!("target names unknown thread `{tname}`"),
            ),
            Some(t) => {
                let known = t.init == *sname
                    || t
                        .transitions
                        .iter()
                        .any(|tr| tr.from == *sname || tr.to == *sname);
                if !known {
                    diag(
                        DiagnosticKind::UnknownTargetState,
                        DefLocation::Target,
                        format!("thread `{tname}` has no state `{sname}`"),
                    );
                }
            }
        }
    }
    out
}

impl ProgramDef {
    /// Validates and interns. States are numbered in order of first
    /// appearance: `init` first, then transition endpoints.
    pub fn build(&self) -> Result<Program, Vec<Diagnostic>> {
        let diags = validate(self);
        if !diags.is_empty() {
            return Err(diags);
        }
        let vars = self.vars.clone();
        let var_ids: HashMap<&str, VarId> = vars
            .iter()
            .enumerate()
            .map(|(i, v)| (v.as_str(), VarId(i as u16)))
            .collect();
        let mut regs = Vec::new();
        let mut threads = Vec::new();
        for (ti, t) in self.threads.iter().enumerate() {
            let tid = ThreadId(ti as u16);
            let mut reg_ids = HashMap::new();
            let mut own = Vec::new();
            for r in &t.regs {
                let id = RegId(regs.len() as u16);
                regs.push(Register {
                    name: r.clone(),
                    thread: tid,
                });
                reg_ids.insert(r.as_str(), id);
                own.push(id);
            }
            let mut states: Vec<String> = Vec::new();
            let mut state_ids: HashMap<String, StateId> = HashMap::new();
            let mut intern = |s: &str| -> StateId {
                if let Some(id) = state_ids.get(s) {
                    return *id;
                }
                let id = StateId(states.len() as u16);
                states.push(s.to_owned());
                state_ids.insert(s.to_owned(), id);
                id
            };
            let init = intern(&t.init);
            let mut transitions = Vec::new();
            for tr in &t.transitions {
                let from = intern(&tr.from);
                let to = intern(&tr.to);
                let r = |n: &String| reg_ids[n.as_str()];
                let x = |n: &String| var_ids[n.as_str()];
                let op = match &tr.op {
                    Op::Assign(a, b) => Op::Assign(r(a), r(b)),
                    Op::NewValue(a) => Op::NewValue(r(a)),
                    Op::Guard(rel, a, b) => Op::Guard(*rel, r(a), r(b)),
                    Op::Read(v, a) => Op::Read(x(v), r(a)),
                    Op::Write(v, a) => Op::Write(x(v), r(a)),
                    Op::Arw(v, a, b) => Op::Arw(x(v), r(a), r(b)),
                };
                transitions.push(Transition { from, op, to });
            }
            let dead = dead_registers(&own, states.len(), &transitions);
            threads.push(Thread {
                name: t.name.clone(),
                states,
                regs: own,
                init,
                transitions,
                dead,
            });
        }
        let mut program = Program {
            vars,
            regs,
            threads,
            target: None,
        };
        if let Some((t, s)) = &self.target {
            program.target = Some(program.target_by_name(t, s).expect("validated target"));
        }
        Ok(program)
    }
}

/// Backward liveness over the thread's control graph.
fn dead_registers(regs: &[RegId], nstates: usize, transitions: &[Transition]) -> Vec<Vec<RegId>> {
    let mut live = vec![BTreeSet::<RegId>::new(); nstates];
    let mut changed = true;
    while changed {
        changed = false;
        for tr in transitions {
            let (uses, def): (Vec<RegId>, Option<RegId>) = match tr.op {
                Op::Assign(a, b) => (vec![b], Some(a)),
                Op::NewValue(a) => (vec![], Some(a)),
                Op::Read(_, a) => (vec![], Some(a)),
                Op::Guard(_, a, b) | Op::Arw(_, a, b) => (vec![a, b], None),
                Op::Write(_, a) => (vec![a], None),
            };
            let mut add: Vec<RegId> = live[tr.to.index()]
                .iter()
                .copied()
                .filter(|r| Some(*r) != def)
                .collect();
            add.extend(uses);
            for r in add {
                changed |= live[tr.from.index()].insert(r);
            }
        }
    }
    live.iter()
        .map(|l| regs.iter().copied().filter(|r| !l.contains(r)).collect())
        .collect()
}

// ---------------------------------------------------------------------------
// Interned program
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Register {
    pub name: String,
    pub thread: ThreadId,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Transition {
    pub from: StateId,
    pub op: Op,
    pub to: StateId,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Thread {
    pub name: String,
    pub states: Vec<String>,
    pub regs: Vec<RegId>,
    pub init: StateId,
    pub transitions: Vec<Transition>,
    /// Per state, the registers whose value is overwritten before any use
    /// on every path from it.
    dead: Vec<Vec<RegId>>,
}

impl Thread {
    /// Registers of this thread whose current value can never be observed
    /// from `state`.
    pub fn dead_at(&self, state: StateId) -> &[RegId] {
        &self.dead[state.index()]
    }

    /// Transitions leaving `state`, with their index in [`Thread::transitions`].
    pub fn outgoing(&self, state: StateId) -> impl Iterator<Item = (usize, &Transition)> {
        self.transitions
            .iter()
            .enumerate()
            .filter(move |(_, t)| t.from == state)
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states
            .iter()
            .position(|s| s == name)
            .map(|i| StateId(i as u16))
    }
}

/// A control state of one thread that reachability queries ask about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Target {
    pub thread: ThreadId,
    pub state: StateId,
}

/// A validated, interned program. Immutable; build one with
/// [`ProgramDef::build`] or [`crate::dsl::parse_program`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Program {
    vars: Vec<String>,
    regs: Vec<Register>,
    threads: Vec<Thread>,
    target: Option<Target>,
}

impl Program {
    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn regs(&self) -> &[Register] {
        &self.regs
    }

    pub fn threads(&self) -> &[Thread] {
        &self.threads
    }

    pub fn thread(&self, t: ThreadId) -> &Thread {
        &self.threads[t.index()]
    }

    /// The target declared alongside the program, if any.
    pub fn target(&self) -> Option<Target> {
        self.target
    }

    pub fn with_target(mut self, target: Option<Target>) -> Self {
        self.target = target;
        self
    }

    pub fn num_threads(&self) -> usize {
        self.threads.len()
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_regs(&self) -> usize {
        self.regs.len()
    }

    /// The largest gap parameter used by any guard (0 if none).
    pub fn n_max(&self) -> u32 {
        self.ops().filter_map(|op| op.relation()?.gap()).max().unwrap_or(0)
    }

    /// True when every guard is `=` or `!=`.
    pub fn equality_only(&self) -> bool {
        self.ops()
            .filter_map(Op::relation)
            .all(Relation::is_equality)
    }

    /// Every relation used by a guard, deduplicated.
    pub fn relations(&self) -> BTreeSet<Relation> {
        self.ops().filter_map(Op::relation).collect()
    }

    fn ops(&self) -> impl Iterator<Item = &Op> {
        self.threads
            .iter()
            .flat_map(|t| t.transitions.iter().map(|tr| &tr.op))
    }

    pub fn thread_id(&self, name: &str) -> Option<ThreadId> {
        self.threads
            .iter()
            .position(|t| t.name == name)
            .map(|i| ThreadId(i as u16))
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.vars
            .iter()
            .position(|v| v == name)
            .map(|i| VarId(i as u16))
    }

    pub fn reg_id(&self, name: &str) -> Option<RegId> {
        self.regs
            .iter()
            .position(|r| r.name == name)
            .map(|i| RegId(i as u16))
    }

    pub fn target_by_name(&self, thread: &str, state: &str) -> Option<Target> {
        let t = self.thread_id(thread)?;
        let s = self.thread(t).state_id(state)?;
        Some(Target {
            thread: t,
            state: s,
        })
    }

    /// Parses `thread:state`.
    pub fn parse_target(&self, text: &str) -> Option<Target> {
        let (t, s) = text.split_once(':')?;
        self.target_by_name(t.trim(), s.trim())
    }

    pub fn target_name(&self, target: Target) -> (String, String) {
        let t = self.thread(target.thread);
        (t.name.clone(), t.states[target.state.index()].clone())
    }

    pub fn var_name(&self, x: VarId) -> &str {
        &self.vars[x.index()]
    }

    pub fn reg_name(&self, r: RegId) -> &str {
        &self.regs[r.index()].name
    }

    /// Renders an op with this program's names.
    pub fn op_text(&self, op: &Op) -> String {
        let r = |r: &RegId| self.reg_name(*r);
        let x = |x: &VarId| self.var_name(*x);
        match op {
            Op::Assign(a, b) => format!("{} := {}", r(a), r(b)),
            Op::NewValue(a) => format!("{} := *", r(a)),
            Op::Guard(rel, a, b) => format!("assume {} {rel} {}", r(a), r(b)),
            Op::Read(v, a) => format!("read {} {}", x(v), r(a)),
            Op::Write(v, a) => format!("write {} {}", x(v), r(a)),
            Op::Arw(v, a, b) => format!("arw {} {} {}", x(v), r(a), r(b)),
        }
    }

    /// Converts back to the name-based form.
    pub fn to_def(&self) -> ProgramDef {
        let threads = self
            .threads
            .iter()
            .map(|t| ThreadDef {
                name: t.name.clone(),
                regs: t.regs.iter().map(|r| self.reg_name(*r).to_owned()).collect(),
                init: t.states[t.init.index()].clone(),
                transitions: t
                    .transitions
                    .iter()
                    .map(|tr| {
                        let r = |r: &RegId| self.reg_name(*r).to_owned();
                        let x = |x: &VarId| self.var_name(*x).to_owned();
                        let op = match &tr.op {
                            Op::Assign(a, b) => Op::Assign(r(a), r(b)),
                            Op::NewValue(a) => Op::NewValue(r(a)),
                            Op::Guard(rel, a, b) => Op::Guard(*rel, r(a), r(b)),
                            Op::Read(v, a) => Op::Read(x(v), r(a)),
                            Op::Write(v, a) => Op::Write(x(v), r(a)),
                            Op::Arw(v, a, b) => Op::Arw(x(v), r(a), r(b)),
                        };
                        TransitionDef {
                            from: t.states[tr.from.index()].clone(),
                            op,
                            to: t.states[tr.to.index()].clone(),
                        }
                    })
                    .collect(),
            })
            .collect();
        ProgramDef {
            vars: self.vars.clone(),
            threads,
            target: self.target.map(|t| self.target_name(t)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(x: &str) -> String {
        x.to_owned()
    }

    fn two_threads() -> ProgramDef {
        let mut t1 = ThreadDef::new("t1", "q0");
        t1.reg("a").reg("b");
        t1.trans("q0", Op::NewValue(s("a")), "q1")
            .trans("q1", Op::Write(s("x"), s("a")), "q2");
        let mut t2 = ThreadDef::new("t2", "p0");
        t2.reg("c");
        t2.trans("p0", Op::Read(s("x"), s("c")), "p1");
        ProgramDef {
            vars: vec![s("x"), s("y")],
            threads: vec![t1, t2],
            target: Some((s("t2"), s("p1"))),
        }
    }

    #[test]
    fn well_formed_program_has_no_diagnostics() {
        assert!(validate(&two_threads()).is_empty());
        let p = two_threads().build().unwrap();
        assert_eq!(p.num_threads(), 2);
        assert_eq!(p.num_regs(), 3);
        assert_eq!(p.target(), p.target_by_name("t2", "p1"));
        assert_eq!(p.thread(ThreadId(0)).states, vec!["q0", "q1", "q2"]);
    }

    #[test]
    fn shared_register_is_reported_once() {
        let mut def = two_threads();
        def.threads[0].reg("r");
        def.threads[1].reg("r");
        let d = validate(&def);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].kind, DiagnosticKind::SharedRegister);
    }

    #[test]
    fn unknown_variable_is_reported() {
        let mut def = two_threads();
        def.threads[1].trans("p1", Op::Write(s("z"), s("c")), "p2");
        let d = validate(&def);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].kind, DiagnosticKind::UnknownVariable);
        assert_eq!(
            d[0].location,
            DefLocation::Transition {
                thread: 1,
                index: 1
            }
        );
    }

    #[test]
    fn other_diagnostics() {
        let mut def = two_threads();
        def.threads[1].name = s("t1");
        def.threads[0].trans("q2", Op::Assign(s("a"), s("nope")), "q0");
        def.target = Some((s("t1"), s("missing")));
        let kinds: BTreeSet<_> = validate(&def).into_iter().map(|d| d.kind).collect();
        assert!(kinds.contains(&DiagnosticKind::DuplicateThread));
        assert!(kinds.contains(&DiagnosticKind::UnknownRegister));
        assert!(kinds.contains(&DiagnosticKind::UnknownTargetState));
        assert!(validate(&ProgramDef::default())
            .iter()
            .any(|d| d.kind == DiagnosticKind::NoThreads));
    }

    #[test]
    fn eval_rel_examples() {
        assert!(eval_rel(Relation::Lt(2), 1, 4));
        assert!(eval_rel(Relation::Eq, 0, 0));
        assert!(eval_rel(Relation::Le(3), 2, 5));
        assert!(!eval_rel(Relation::Lt(3), 2, 5));
        assert!(eval_rel(Relation::Neq, 2, 5));
        assert!(!eval_rel(Relation::Lt(1), u64::MAX, u64::MAX));
    }

    #[test]
    fn n_max_and_relations() {
        let mut def = two_threads();
        def.threads[0]
            .trans("q2", Op::Guard(Relation::Lt(3), s("a"), s("b")), "q3")
            .trans("q3", Op::Guard(Relation::Le(5), s("a"), s("b")), "q4");
        let p = def.build().unwrap();
        assert_eq!(p.n_max(), 5);
        assert!(!p.equality_only());
        assert_eq!(two_threads().build().unwrap().n_max(), 0);
    }

    #[test]
    fn to_def_round_trips() {
        let def = two_threads();
        assert_eq!(def.build().unwrap().to_def(), def);
    }

    #[test]
    fn liveness_follows_uses() {
        let mut t = ThreadDef::new("t", "q0");
        t.reg("a").reg("b");
        t.trans("q0", Op::NewValue(s("a")), "q1")
            .trans("q1", Op::Assign(s("b"), s("a")), "q2")
            .trans("q2", Op::Write(s("x"), s("b")), "q3");
        let p = ProgramDef {
            vars: vec![s("x")],
            threads: vec![t],
            target: None,
        }
        .build()
        .unwrap();
        let th = p.thread(ThreadId(0));
        let dead = |q: &str| th.dead_at(th.state_id(q).unwrap()).to_vec();
        let (a, b) = (RegId(0), RegId(1));
        assert_eq!(dead("q0"), vec![a, b]);
        assert_eq!(dead("q1"), vec![b]);
        assert_eq!(dead("q2"), vec![a]);
        assert_eq!(dead("q3"), vec![a, b]);
    }

    proptest! {
        #[test]
        fn lt0_le0_are_plain_order(a in 0u64..50, b in 0u64..50) {
            prop_assert_eq!(eval_rel(Relation::Lt(0), a, b), a < b);
            prop_assert_eq!(eval_rel(Relation::Le(0), a, b), a <= b);
        }

        #[test]
        fn larger_gaps_are_stronger(a in 0u64..50, b in 0u64..50, n in 0u32..10, m in 0u32..10) {
            let (lo, hi) = (n.min(m), n.max(m));
            if eval_rel(Relation::Lt(hi), a, b) {
                prop_assert!(eval_rel(Relation::Lt(lo), a, b));
            }
            if eval_rel(Relation::Le(hi), a, b) {
                prop_assert!(eval_rel(Relation::Le(lo), a, b));
            }
        }

        #[test]
        fn validate_ignores_thread_order(shared in proptest::bool::ANY, bad_var in proptest::bool::ANY) {
            let mut def = two_threads();
            if shared {
                def.threads[0].reg("r");
                def.threads[1].reg("r");
            }
            if bad_var {
                def.threads[0].trans("q2", Op::Read(s("nope"), s("a")), "q3");
            }
            let mut rev = def.clone();
            rev.threads.reverse();
            let strip = |v: Vec<Diagnostic>| {
                let mut k: Vec<_> = v.into_iter().map(|d| (d.kind, d.message)).collect();
                k.sort();
                k
            };
            prop_assert_eq!(strip(validate(&def)), strip(validate(&rev)));
            prop_assert_eq!(validate(&def), validate(&def));
        }
    }
}
