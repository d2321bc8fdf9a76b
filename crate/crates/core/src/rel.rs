//! Order abstraction of abstract-machine valuations.
//!
//! A valuation is replaced by the ranking it induces on the abstract
//! variables: equal values share a rank, smaller values get smaller ranks,
//! and ranks are dense (`0..=m`). Distances between values are forgotten;
//! guards with a gap `n` are softened to strict order, which is enough for
//! reachability because a run with small gaps can always be stretched (see
//! [`crate::engine::inflate`]).
//!
//! Programs whose guards are all `=` / `!=` use [`RelMode::EqualityOnly`],
//! which keeps just the partition into equal-value classes. Order never
//! matters to such programs, so the coarser state loses nothing.

use crate::ab::{AbEffect, AbLayout, AbState, AbVar};
use crate::program::{Program, Relation, StateId, ThreadId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelMode {
    /// Ranks are a total preorder.
    Ordered,
    /// Ranks are class labels numbered by first appearance in layout order.
    EqualityOnly,
}

impl RelMode {
    /// The coarsest mode that is exact for `p`.
    pub fn for_program(p: &Program) -> Self {
        if p.equality_only() {
            RelMode::EqualityOnly
        } else {
            RelMode::Ordered
        }
    }
}

/// Rank of every abstract variable, indexed by [`AbLayout::index`]. The
/// sentinel (index 0) always has rank 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelState {
    pub ranks: Vec<u16>,
}

impl RelState {
    /// Everything equal, as in the initial configuration.
    pub fn initial(layout: &AbLayout) -> Self {
        RelState {
            ranks: vec![0; layout.len()],
        }
    }

    /// Largest rank.
    pub fn max_rank(&self) -> u16 {
        self.ranks.iter().copied().max().unwrap_or(0)
    }

    pub fn rank(&self, layout: &AbLayout, v: AbVar) -> u16 {
        self.ranks[layout.index(v)]
    }

    /// Renumbers ranks so they are canonical for `mode`.
    pub fn normalize(&mut self, mode: RelMode) {
        match mode {
            RelMode::Ordered => densify(&mut self.ranks),
            RelMode::EqualityOnly => first_appearance(&mut self.ranks),
        }
    }
}

fn densify(ranks: &mut [u16]) {
    let top = ranks.iter().copied().max().unwrap_or(0) as usize;
    let mut used = vec![false; top + 1];
    for &r in ranks.iter() {
        used[r as usize] = true;
    }
    let mut map = vec![0u16; top + 1];
    let mut next = 0;
    for (r, u) in used.iter().enumerate() {
        if *u {
            map[r] = next;
            next += 1;
        }
    }
    for r in ranks.iter_mut() {
        *r = map[*r as usize];
    }
}

fn first_appearance(ranks: &mut [u16]) {
    let top = ranks.iter().copied().max().unwrap_or(0) as usize;
    let mut map = vec![u16::MAX; top + 1];
    let mut next = 0;
    for r in ranks.iter_mut() {
        if map[*r as usize] == u16::MAX {
            map[*r as usize] = next;
            next += 1;
        }
        *r = map[*r as usize];
    }
}

/// Dense ranking of `m`.
pub fn abstract_of(m: &[u64]) -> RelState {
    let mut sorted: Vec<u64> = m.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    RelState {
        ranks: m
            .iter()
            .map(|v| sorted.binary_search(v).expect("present") as u16)
            .collect(),
    }
}

/// [`abstract_of`] followed by [`RelState::normalize`].
pub fn abstract_in(mode: RelMode, m: &[u64]) -> RelState {
    let mut s = abstract_of(m);
    s.normalize(mode);
    s
}

/// Whether `rel` may hold between values ranked `a` and `b`. Exact for `=`
/// and `!=`; every gap relation except plain `<=` needs strict order.
pub fn rank_check(rel: Relation, a: u16, b: u16) -> bool {
    match rel {
        Relation::Eq => a == b,
        Relation::Neq => a != b,
        Relation::Le(0) => a <= b,
        Relation::Lt(_) | Relation::Le(_) => a < b,
    }
}

pub fn rel_check(layout: &AbLayout, s: &RelState, rel: Relation, a: AbVar, b: AbVar) -> bool {
    rank_check(rel, s.rank(layout, a), s.rank(layout, b))
}

/// Successors of `s` under one effect.
pub fn rel_apply(mode: RelMode, layout: &AbLayout, s: &RelState, e: &AbEffect) -> Vec<RelState> {
    let ix = |v: AbVar| layout.index(v);
    match e {
        AbEffect::Copy(d, src) => {
            let mut n = s.clone();
            n.ranks[ix(*d)] = s.ranks[ix(*src)];
            n.normalize(mode);
            vec![n]
        }
        AbEffect::MultiCopy(pairs) => {
            let mut n = s.clone();
            for (d, src) in pairs {
                n.ranks[ix(*d)] = s.ranks[ix(*src)];
            }
            n.normalize(mode);
            vec![n]
        }
        AbEffect::Guard(rel, a, b) => {
            if rel_check(layout, s, *rel, *a, *b) {
                vec![s.clone()]
            } else {
                Vec::new()
            }
        }
        AbEffect::Fresh(d) => fresh(mode, s, ix(*d)),
    }
}

fn fresh(mode: RelMode, s: &RelState, d: usize) -> Vec<RelState> {
    // ranks of everyone but d, renumbered; d temporarily takes the sentinel's
    // rank so it does not keep a class alive
    let mut base = s.clone();
    base.ranks[d] = base.ranks[0];
    base.normalize(mode);
    let classes = base.max_rank() + 1;
    let mut out = Vec::new();
    for c in 0..classes {
        let mut n = base.clone();
        n.ranks[d] = c;
        n.normalize(mode);
        out.push(n);
    }
    match mode {
        RelMode::Ordered => {
            // a new class just above class c
            for c in 0..classes {
                let mut n = base.clone();
                for (i, r) in n.ranks.iter_mut().enumerate() {
                    if i != d && *r > c {
                        *r += 1;
                    }
                }
                n.ranks[d] = c + 1;
                out.push(n);
            }
        }
        RelMode::EqualityOnly => {
            let mut n = base;
            n.ranks[d] = classes;
            n.normalize(mode);
            out.push(n);
        }
    }
    out
}

/// Successors of `s` under a sequence of effects.
pub fn rel_apply_all(
    mode: RelMode,
    layout: &AbLayout,
    s: &RelState,
    effects: &[AbEffect],
) -> Vec<RelState> {
    let mut cur = vec![s.clone()];
    for e in effects {
        cur = cur
            .iter()
            .flat_map(|s| rel_apply(mode, layout, s, e))
            .collect();
    }
    cur
}

/// A state of the finite search: control state plus order abstraction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SearchState {
    pub ab: AbState,
    pub rel: RelState,
}

/// Shape parameters of [`canonical_key`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyShape {
    pub layout: AbLayout,
}

impl KeyShape {
    pub fn new(layout: AbLayout) -> Self {
        KeyShape { layout }
    }

    /// Key length in bytes:
    /// `2|T| + 2k + 1 + |X||T| + ceil(k|X| / 8) + 2|X_AB|`
    /// with `|X_AB| = 1 + |X| + |R| + k|X| + |T||X|`.
    pub fn len(&self) -> usize {
        let l = &self.layout;
        2 * l.threads + 2 * l.k + 1 + l.vars * l.threads + (l.k * l.vars).div_ceil(8) + 2 * l.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Fixed-length byte encoding of a search state. Little-endian `u16` for
/// control states, `act` and ranks; one byte each for `j` and `c`; `u` as a
/// bitset.
pub fn canonical_key(s: &SearchState) -> Vec<u8> {
    let mut out = Vec::with_capacity(
        2 * s.ab.states.len() + 2 * s.ab.act.len() + 1 + s.ab.c.len() + s.ab.u.len() / 8 + 1
            + 2 * s.rel.ranks.len(),
    );
    for st in &s.ab.states {
        out.extend_from_slice(&st.0.to_le_bytes());
    }
    for t in &s.ab.act {
        out.extend_from_slice(&t.0.to_le_bytes());
    }
    out.push(s.ab.j);
    out.extend_from_slice(&s.ab.c);
    for chunk in s.ab.u.chunks(8) {
        let mut b = 0u8;
        for (i, bit) in chunk.iter().enumerate() {
            if *bit {
                b |= 1 << i;
            }
        }
        out.push(b);
    }
    for r in &s.rel.ranks {
        out.extend_from_slice(&r.to_le_bytes());
    }
    out
}

/// Inverse of [`canonical_key`].
pub fn decode_key(shape: &KeyShape, key: &[u8]) -> SearchState {
    let l = &shape.layout;
    assert_eq!(key.len(), shape.len(), "key length mismatch");
    let mut pos = 0;
    let u16s = |n: usize, pos: &mut usize| -> Vec<u16> {
        let v = (0..n)
            .map(|i| u16::from_le_bytes([key[*pos + 2 * i], key[*pos + 2 * i + 1]]))
            .collect();
        *pos += 2 * n;
        v
    };
    let states = u16s(l.threads, &mut pos).into_iter().map(StateId).collect();
    let act = u16s(l.k, &mut pos).into_iter().map(ThreadId).collect();
    let j = key[pos];
    pos += 1;
    let c = key[pos..pos + l.vars * l.threads].to_vec();
    pos += c.len();
    let nu = l.k * l.vars;
    let u = (0..nu).map(|i| key[pos + i / 8] & (1 << (i % 8)) != 0).collect();
    pos += nu.div_ceil(8);
    let ranks = u16s(l.len(), &mut pos);
    SearchState {
        ab: AbState {
            states,
            act,
            j,
            c,
            u,
        },
        rel: RelState { ranks },
    }
}
