//! Single-thread program whose target is reachable iff the intersection of
//! the given automata's languages is non-empty.
//!
//! Automaton `i` keeps its current state in `cur_<i>`; every automaton
//! state has its own register holding a unique value. A word is read letter
//! by letter from the hub state `q`, each letter moving every automaton in
//! turn.

use super::ops::*;
use super::{GenError, GenResult};
use crate::dfa::{same_alphabet, Dfa};
use crate::program::{ProgramDef, ThreadDef};

fn state_reg(i: usize, q: usize) -> String {
    format!("s{i}_{q}")
}

fn cur(i: usize) -> String {
    format!("cur_{i}")
}

/// Builds the program for `dfas` (numbered from 1 in register names).
pub fn gen_intersection(dfas: &[Dfa]) -> Result<GenResult, GenError> {
    if dfas.is_empty() {
        return Err(GenError::NoAutomata);
    }
    if !same_alphabet(dfas) {
        return Err(GenError::AlphabetMismatch);
    }
    let n = dfas.len();
    let mut t = ThreadDef::new("run", "setup");
    for i in 1..=n {
        t.reg(cur(i));
    }
    for (i, a) in dfas.iter().enumerate() {
        for q in 0..a.states.len() {
            t.reg(state_reg(i + 1, q));
        }
    }

    // Pick the state values one at a time, each different from all earlier
    // ones and from the still-zero cur_1.
    let mut step = 0usize;
    let mut at = "setup".to_owned();
    let mut next = |t: &mut ThreadDef, at: &mut String, op| {
        step += 1;
        let to = format!("setup_{step}");
        t.trans(at.clone(), op, &to);
        *at = to;
    };
    let mut assigned: Vec<String> = Vec::new();
    for (i, a) in dfas.iter().enumerate() {
        for q in 0..a.states.len() {
            let r = state_reg(i + 1, q);
            next(&mut t, &mut at, new_value(&r));
            next(&mut t, &mut at, neq(&r, &cur(1)));
            for prev in &assigned {
                next(&mut t, &mut at, neq(&r, prev));
            }
            assigned.push(r);
        }
    }
    for (i, a) in dfas.iter().enumerate() {
        let op = assign(&cur(i + 1), &state_reg(i + 1, a.init));
        if i + 1 == n {
            t.trans(at.clone(), op, "q");
        } else {
            next(&mut t, &mut at, op);
        }
    }

    // One gadget chain per letter.
    let alphabet = &dfas[0].alphabet;
    for (letter, name) in alphabet.iter().enumerate() {
        let hop = |i: usize| {
            if i == 0 || i == n {
                "q".to_owned()
            } else {
                format!("l{letter}_{i}")
            }
        };
        for (i, a) in dfas.iter().enumerate() {
            let l = a.letter(name).expect("alphabets checked");
            for (idx, &(p, _, q)) in a.transitions.iter().enumerate().filter(|(_, tr)| tr.1 == l) {
                let mid = format!("d{}_{idx}", i + 1);
                t.trans(hop(i), eq(&cur(i + 1), &state_reg(i + 1, p)), &mid);
                t.trans(&mid, assign(&cur(i + 1), &state_reg(i + 1, q)), hop(i + 1));
            }
        }
    }

    // Check that every automaton sits in a final state.
    let fin = |i: usize| if i == 0 { "q".to_owned() } else { format!("final_{i}") };
    for (i, a) in dfas.iter().enumerate() {
        for &f in &a.finals {
            t.trans(fin(i), eq(&cur(i + 1), &state_reg(i + 1, f)), fin(i + 1));
        }
    }
    let target = fin(n);
    if !t.transitions.iter().any(|tr| tr.to == target) {
        // keep the target declared when some automaton has no final state
        t.trans("q", neq(&cur(1), &cur(1)), &target);
    }

    let def = ProgramDef {
        vars: Vec::new(),
        threads: vec![t],
        target: Some(("run".into(), target)),
    };
    let program = def.build().map_err(|d| GenError::InvalidModel(d[0].message.clone()))?;
    let target = program.target().expect("declared above");
    Ok(GenResult {
        program,
        target,
        k_hint: 1,
    })
}
