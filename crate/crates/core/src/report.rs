//! JSON-serializable verdict reports.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ab::{ab_transitions, AbAction, AbEffect, AbLabel, Flush};
use crate::engine::{var_name, ConcreteRun, Outcome, Verdict};
use crate::program::{Program, Target};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetName {
    pub thread: String,
    pub state: String,
}

/// One witness step with the values of every abstract variable after it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessEntry {
    pub thread: String,
    pub label: String,
    pub effects: Vec<String>,
    pub values: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportStats {
    pub states_explored: usize,
    pub peak_frontier: usize,
    pub wall_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub reachable: bool,
    /// `reachable`, `unreachable` or `bound_exhausted`.
    pub outcome: String,
    pub k: u32,
    pub target: TargetName,
    /// Empty unless reachable.
    pub witness: Vec<WitnessEntry>,
    pub stats: ReportStats,
}

impl Report {
    /// `run` is the concretized witness, when there is one.
    pub fn new(p: &Program, k: u32, target: Target, verdict: &Verdict, run: Option<&ConcreteRun>) -> Self {
        let (thread, state) = p.target_name(target);
        let outcome = match verdict.outcome {
            Outcome::Reachable(_) => "reachable",
            Outcome::Unreachable => "unreachable",
            Outcome::BoundExhausted => "bound_exhausted",
        };
        Report {
            reachable: verdict.is_reachable(),
            outcome: outcome.into(),
            k,
            target: TargetName { thread, state },
            witness: run.map(|r| witness_entries(p, r)).unwrap_or_default(),
            stats: ReportStats {
                states_explored: verdict.stats.states_explored,
                peak_frontier: verdict.stats.peak_frontier,
                wall_ms: verdict.stats.wall_ms,
            },
        }
    }
}

/// `q -> r : write x a @2` style text for a label.
pub fn label_text(p: &Program, l: &AbLabel) -> String {
    let th = p.thread(l.thread);
    match l.action {
        AbAction::ContextSwitch => "switch".into(),
        AbAction::Op { transition, flush } => {
            let tr = &th.transitions[transition];
            let mut s = format!(
                "{} -> {} : {}",
                th.states[tr.from.index()],
                th.states[tr.to.index()],
                p.op_text(&tr.op)
            );
            match flush {
                Some(Flush::Context(j)) => s.push_str(&format!(" @{j}")),
                Some(Flush::Never) => s.push_str(" @never"),
                None => {}
            }
            s
        }
    }
}

pub fn effect_text(p: &Program, e: &AbEffect) -> String {
    let n = |v| var_name(p, v);
    match e {
        AbEffect::Copy(d, s) => format!("{} := {}", n(*d), n(*s)),
        AbEffect::Fresh(d) => format!("{} := *", n(*d)),
        AbEffect::Guard(rel, a, b) => format!("assume {} {rel} {}", n(*a), n(*b)),
        AbEffect::MultiCopy(pairs) => pairs
            .iter()
            .map(|(d, s)| format!("{} := {}", n(*d), n(*s)))
            .collect::<Vec<_>>()
            .join(", "),
    }
}

fn witness_entries(p: &Program, run: &ConcreteRun) -> Vec<WitnessEntry> {
    let layout = crate::ab::AbLayout::new(p, run.k());
    run.steps
        .iter()
        .enumerate()
        .map(|(i, (label, _))| {
            let effects = ab_transitions(p, &run.configs[i].0)
                .into_iter()
                .find(|st| st.label == *label)
                .map(|st| st.effects.iter().map(|e| effect_text(p, e)).collect())
                .unwrap_or_default();
            let values = layout
                .all()
                .zip(&run.configs[i + 1].1)
                .map(|(v, d)| (var_name(p, v), *d))
                .collect();
            WitnessEntry {
                thread: p.thread(label.thread).name.clone(),
                label: label_text(p, label),
                effects,
                values,
            }
        })
        .collect()
}
