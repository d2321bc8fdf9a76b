//! Lossy channel systems with data and a bounded explicit-state oracle for
//! their control-state reachability.
//!
//! The channel is a FIFO of `(letter, value)` pairs: sends append at the
//! back, receives consume the front, and at any time an arbitrary set of
//! messages may vanish.

use std::collections::{HashMap, VecDeque};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DlcsOp {
    /// `x := y`
    Assign(usize, usize),
    /// `x := *`, a value distinct from every variable's current value.
    Fresh(usize),
    Eq(usize, usize),
    Neq(usize, usize),
    /// `send a x`
    Send(usize, usize),
    /// `recv a x`
    Recv(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DlcsTransition {
    pub from: usize,
    pub op: DlcsOp,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DlcsModel {
    pub states: Vec<String>,
    pub vars: Vec<String>,
    pub alphabet: Vec<String>,
    pub transitions: Vec<DlcsTransition>,
    pub init: usize,
    pub target: Option<usize>,
}

impl DlcsModel {
    pub fn state(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    /// Index-range checks on every transition.
    pub fn validate(&self) -> Result<(), String> {
        let ns = self.states.len();
        let nv = self.vars.len();
        let na = self.alphabet.len();
        if self.init >= ns || self.target.is_some_and(|t| t >= ns) {
            return Err("init or target out of range".into());
        }
        for (i, t) in self.transitions.iter().enumerate() {
            let ok = t.from < ns
                && t.to < ns
                && match t.op {
                    DlcsOp::Assign(x, y) | DlcsOp::Eq(x, y) | DlcsOp::Neq(x, y) => {
                        x < nv && y < nv
                    }
                    DlcsOp::Fresh(x) => x < nv,
                    DlcsOp::Send(a, x) | DlcsOp::Recv(a, x) => a < na && x < nv,
                };
            if !ok {
                return Err(format!("transition {i} references an undeclared name"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DlcsConfig {
    pub state: usize,
    pub vals: Vec<u64>,
    pub channel: VecDeque<(usize, u64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DlcsBounds {
    pub channel_len: usize,
    /// Fresh values are drawn from `0..fresh_values`.
    pub fresh_values: u64,
    pub depth: usize,
    pub max_states: usize,
}

impl Default for DlcsBounds {
    fn default() -> Self {
        DlcsBounds {
            channel_len: 3,
            fresh_values: 4,
            depth: 200,
            max_states: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DlcsVerdict {
    /// Configurations from the initial one to one in the target state.
    Reachable(Vec<DlcsConfig>),
    NotWithinBounds,
    BoundExhausted,
}

impl DlcsVerdict {
    pub fn is_reachable(&self) -> bool {
        matches!(self, DlcsVerdict::Reachable(_))
    }
}

fn successors(m: &DlcsModel, c: &DlcsConfig, b: &DlcsBounds) -> Vec<DlcsConfig> {
    let mut out = Vec::new();
    for t in m.transitions.iter().filter(|t| t.from == c.state) {
        let mut next = c.clone();
        next.state = t.to;
        match t.op {
            DlcsOp::Assign(x, y) => {
                next.vals[x] = c.vals[y];
                out.push(next);
            }
            DlcsOp::Fresh(x) => {
                for d in 0..b.fresh_values {
                    if !c.vals.contains(&d) {
                        let mut n = next.clone();
                        n.vals[x] = d;
                        out.push(n);
                    }
                }
            }
            DlcsOp::Eq(x, y) => {
                if c.vals[x] == c.vals[y] {
                    out.push(next);
                }
            }
            DlcsOp::Neq(x, y) => {
                if c.vals[x] != c.vals[y] {
                    out.push(next);
                }
            }
            DlcsOp::Send(a, x) => {
                if c.channel.len() < b.channel_len {
                    next.channel.push_back((a, c.vals[x]));
                    out.push(next);
                }
            }
            DlcsOp::Recv(a, x) => {
                if let Some(&(l, d)) = c.channel.front() {
                    if l == a {
                        next.channel.pop_front();
                        next.vals[x] = d;
                        out.push(next);
                    }
                }
            }
        }
    }
    // loss: every proper subsequence of the channel
    let n = c.channel.len();
    for mask in 0..(1u32 << n) - 1 {
        let mut lossy = c.clone();
        lossy.channel = c
            .channel
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, m)| *m)
            .collect();
        out.push(lossy);
    }
    out
}

/// Breadth-first search for `target` within `bounds`. Reports
/// [`DlcsVerdict::NotWithinBounds`] when the bounded space is exhausted
/// without reaching it; that is not a proof of unreachability.
pub fn dlcs_reach_bounded(m: &DlcsModel, target: usize, bounds: DlcsBounds) -> DlcsVerdict {
    let init = DlcsConfig {
        state: m.init,
        vals: vec![0; m.vars.len()],
        channel: VecDeque::new(),
    };
    let mut nodes: Vec<(DlcsConfig, Option<usize>, usize)> = vec![(init.clone(), None, 0)];
    let mut index: HashMap<DlcsConfig, usize> = HashMap::from([(init, 0)]);
    let mut head = 0;
    while head < nodes.len() {
        let (cfg, _, depth) = nodes[head].clone();
        if cfg.state == target {
            let mut path = Vec::new();
            let mut at = Some(head);
            while let Some(i) = at {
                path.push(nodes[i].0.clone());
                at = nodes[i].1;
            }
            path.reverse();
            return DlcsVerdict::Reachable(path);
        }
        if depth < bounds.depth {
            for s in successors(m, &cfg, &bounds) {
                if !index.contains_key(&s) {
                    if nodes.len() >= bounds.max_states {
                        return DlcsVerdict::BoundExhausted;
                    }
                    index.insert(s.clone(), nodes.len());
                    nodes.push((s, Some(head), depth + 1));
                }
            }
        }
        head += 1;
    }
    DlcsVerdict::NotWithinBounds
}
