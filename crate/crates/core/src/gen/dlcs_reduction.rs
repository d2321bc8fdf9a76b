//! Two-thread TSO program simulating a lossy channel system with data.
//!
//! Thread `t` runs the channel system's control. Thread `t_ch` plays the
//! channel: for each letter `a` it copies values from `x_a` to `y_a`. Every
//! message is written followed by a separator value `$`, which both threads
//! agree on at start-up. A receiver accepts a value only if it is followed by
//! the separator, so each message is consumed at most once. Messages lost
//! in the store buffer or overwritten in memory model channel loss.

use super::ops::*;
use super::{GenError, GenResult};
use crate::dlcs::{DlcsModel, DlcsOp};
use crate::program::{ProgramDef, ThreadDef};

const DOLLAR: &str = "r_dollar";
const TMP: &str = "r_tmp";
const DOLLAR_CH: &str = "r_dollar_ch";
const TMP_CH: &str = "r_tmp_ch";

struct Chain<'a> {
    thread: &'a mut ThreadDef,
    prefix: String,
    count: usize,
}

impl Chain<'_> {
    /// Adds `from -ops-> to` through fresh intermediate states.
    fn path(&mut self, from: &str, ops: Vec<NOp>, to: &str) {
        let mut at = from.to_owned();
        let last = ops.len() - 1;
        for (i, op) in ops.into_iter().enumerate() {
            let next = if i == last {
                to.to_owned()
            } else {
                self.count += 1;
                format!("{}{}", self.prefix, self.count)
            };
            self.thread.trans(&at, op, &next);
            at = next;
        }
    }
}

/// Builds `Prog(L)` for a validated channel system with a target state.
pub fn gen_dlcs_reduction(m: &DlcsModel) -> Result<GenResult, GenError> {
    m.validate().map_err(GenError::InvalidModel)?;
    let target = m
        .target
        .ok_or_else(|| GenError::InvalidModel("the channel system declares no target".into()))?;

    let x = |a: usize| format!("x_{}", m.alphabet[a]);
    let y = |a: usize| format!("y_{}", m.alphabet[a]);
    let r = |v: usize| format!("r_{}", m.vars[v]);
    let mut shared = Vec::new();
    for a in 0..m.alphabet.len() {
        shared.push(x(a));
        shared.push(y(a));
    }

    // helper state names must not clash with the model's states
    let mut prefix = "_g".to_owned();
    while m.states.iter().any(|s| s.starts_with(&prefix)) {
        prefix.insert(0, '_');
    }
    let boot = format!("{prefix}boot");

    // channel thread
    let mut ch = ThreadDef::new("t_ch", "setup_ch");
    ch.reg(DOLLAR_CH).reg(TMP_CH);
    {
        let mut c = Chain {
            thread: &mut ch,
            prefix: prefix.clone(),
            count: 0,
        };
        let mut init = vec![new_value(DOLLAR_CH), neq(DOLLAR_CH, TMP_CH)];
        init.extend(shared.iter().map(|v| arw(v, TMP_CH, DOLLAR_CH)));
        c.path("setup_ch", init, "q_ch");
        for a in 0..m.alphabet.len() {
            let copy = vec![
                read(&x(a), TMP_CH),
                neq(TMP_CH, DOLLAR_CH),
                write(&y(a), TMP_CH),
                read(&x(a), TMP_CH),
                eq(TMP_CH, DOLLAR_CH),
                write(&y(a), TMP_CH),
            ];
            c.path("q_ch", copy, "q_ch");
        }
    }

    // control thread
    let mut t = ThreadDef::new("t", &boot);
    t.reg(DOLLAR).reg(TMP);
    for v in 0..m.vars.len() {
        t.reg(r(v));
    }
    {
        let mut c = Chain {
            thread: &mut t,
            prefix,
            count: 0,
        };
        let mut init = Vec::new();
        for v in &shared {
            init.push(read(v, DOLLAR));
            init.push(neq(DOLLAR, TMP));
        }
        if init.is_empty() {
            // no letters, so no separator to learn
            init.push(eq(TMP, TMP));
        }
        c.path(&boot, init, &m.states[m.init]);
        for tr in &m.transitions {
            let ops = match tr.op {
                DlcsOp::Assign(a, b) => vec![assign(&r(a), &r(b))],
                DlcsOp::Eq(a, b) => vec![eq(&r(a), &r(b))],
                DlcsOp::Neq(a, b) => vec![neq(&r(a), &r(b))],
                DlcsOp::Fresh(v) => {
                    let mut ops = vec![new_value(TMP), neq(TMP, DOLLAR)];
                    ops.extend((0..m.vars.len()).map(|w| neq(TMP, &r(w))));
                    ops.push(assign(&r(v), TMP));
                    ops
                }
                DlcsOp::Send(a, v) => vec![write(&x(a), &r(v)), write(&x(a), DOLLAR)],
                DlcsOp::Recv(a, v) => vec![
                    read(&y(a), &r(v)),
                    neq(&r(v), DOLLAR),
                    read(&y(a), TMP),
                    eq(TMP, DOLLAR),
                ],
            };
            c.path(&m.states[tr.from], ops, &m.states[tr.to]);
        }
    }

    let def = ProgramDef {
        vars: shared,
        threads: vec![t, ch],
        target: Some(("t".into(), m.states[target].clone())),
    };
    let program = def.build().map_err(|d| GenError::InvalidModel(d[0].message.clone()))?;
    let target = program.target().expect("declared above");
    Ok(GenResult {
        program,
        target,
        // One message round trip: channel set-up, then the value and the
        // separator each cross from t to t_ch and back.
        k_hint: 6,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dlcs::{dlcs_reach_bounded, DlcsBounds, DlcsTransition};
    use crate::dsl::{parse_program, render_program};

    fn model(ops: &[DlcsOp]) -> DlcsModel {
        let states: Vec<String> = (0..=ops.len()).map(|i| format!("s{i}")).collect();
        DlcsModel {
            transitions: ops
                .iter()
                .enumerate()
                .map(|(i, &op)| DlcsTransition { from: i, op, to: i + 1 })
                .collect(),
            target: Some(ops.len()),
            states,
            vars: vec!["v".into(), "w".into()],
            alphabet: vec!["a".into(), "b".into()],
            init: 0,
        }
    }

    #[test]
    fn two_shared_variables_per_letter() {
        let g = gen_dlcs_reduction(&model(&[DlcsOp::Send(0, 0)])).unwrap();
        assert_eq!(g.program.num_vars(), 4);
        assert_eq!(g.program.num_threads(), 2);
    }

    #[test]
    fn send_then_receive_matches_oracle() {
        let m = model(&[DlcsOp::Fresh(0), DlcsOp::Send(0, 0), DlcsOp::Recv(0, 1), DlcsOp::Eq(0, 1)]);
        assert!(dlcs_reach_bounded(&m, 4, DlcsBounds::default()).is_reachable());
        let g = gen_dlcs_reduction(&m).unwrap();
        let b = crate::tso::Bounds {
            buffer_bound: 2,
            domain_bound: 3,
            depth: 60,
            max_states: 2_000_000,
        };
        assert!(crate::tso::tso_reach_bounded(&g.program, g.target, b).is_reachable());
        let opts = crate::engine::CheckOptions::default();
        assert!(crate::engine::check_reach(&g.program, g.k_hint, g.target, &opts).is_reachable());
    }

    #[test]
    fn renders_and_reparses() {
        let m = model(&[DlcsOp::Fresh(1), DlcsOp::Send(1, 1), DlcsOp::Recv(1, 0)]);
        let g = gen_dlcs_reduction(&m).unwrap();
        assert_eq!(parse_program(&render_program(&g.program)).unwrap(), g.program);
    }

    #[test]
    fn missing_target_rejected() {
        let mut m = model(&[DlcsOp::Send(0, 0)]);
        m.target = None;
        assert!(gen_dlcs_reduction(&m).is_err());
    }
}
