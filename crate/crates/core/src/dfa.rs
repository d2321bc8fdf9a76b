//! Finite automata over a shared alphabet and a product-construction
//! emptiness check for their intersection.

use std::collections::{BTreeSet, HashSet, VecDeque};

/// A finite automaton. Despite the name, neither determinism nor
/// completeness is required.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfa {
    pub states: Vec<String>,
    pub alphabet: Vec<String>,
    /// `(from, letter, to)` as indices into `states` / `alphabet`.
    pub transitions: Vec<(usize, usize, usize)>,
    pub init: usize,
    pub finals: BTreeSet<usize>,
}

impl Dfa {
    pub fn accepts(&self, word: &[usize]) -> bool {
        let mut current: BTreeSet<usize> = [self.init].into();
        for &a in word {
            current = self
                .transitions
                .iter()
                .filter(|(p, l, _)| *l == a && current.contains(p))
                .map(|(_, _, q)| *q)
                .collect();
        }
        current.iter().any(|q| self.finals.contains(q))
    }

    pub fn letter(&self, name: &str) -> Option<usize> {
        self.alphabet.iter().position(|a| a == name)
    }
}

/// True iff all automata agree on the alphabet (as a list).
pub fn same_alphabet(dfas: &[Dfa]) -> bool {
    dfas.windows(2).all(|w| w[0].alphabet == w[1].alphabet)
}

/// Non-emptiness of the intersection of the automata's languages, by
/// breadth-first search over state tuples. Returns a shortest common word
/// (as letter indices) when one exists.
///
/// Panics if the alphabets differ.
pub fn intersection_witness(dfas: &[Dfa]) -> Option<Vec<usize>> {
    assert!(same_alphabet(dfas), "alphabet mismatch");
    let letters = dfas.first().map_or(0, |d| d.alphabet.len());
    let start: Vec<usize> = dfas.iter().map(|d| d.init).collect();
    let accepting =
        |tuple: &[usize]| tuple.iter().zip(dfas).all(|(q, d)| d.finals.contains(q));

    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(start.clone());
    queue.push_back((start, Vec::new()));
    while let Some((tuple, word)) = queue.pop_front() {
        if accepting(&tuple) {
            return Some(word);
        }
        for a in 0..letters {
            // every combination of successors, one per automaton
            let mut succs: Vec<Vec<usize>> = vec![Vec::new()];
            for (q, d) in tuple.iter().zip(dfas) {
                let next: Vec<usize> = d
                    .transitions
                    .iter()
                    .filter(|(p, l, _)| p == q && *l == a)
                    .map(|(_, _, r)| *r)
                    .collect();
                succs = succs
                    .into_iter()
                    .flat_map(|prefix| {
                        next.iter().map(move |r| {
                            let mut v = prefix.clone();
                            v.push(*r);
                            v
                        })
                    })
                    .collect();
            }
            for s in succs {
                if seen.insert(s.clone()) {
                    let mut w = word.clone();
                    w.push(a);
                    queue.push_back((s, w));
                }
            }
        }
    }
    None
}

/// True iff some word is accepted by every automaton.
pub fn dfa_intersection_oracle(dfas: &[Dfa]) -> bool {
    intersection_witness(dfas).is_some()
}
