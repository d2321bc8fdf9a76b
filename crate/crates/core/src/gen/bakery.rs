//! Lamport's bakery protocol for `n` threads plus a monitor thread that
//! reaches `violation` when two threads are in the critical section at once.
//!
//! Each thread `t<i>` owns `ticket_<i>` and `chosen_<i>`, and raises
//! `in_crit_<i>` while in the critical section. False is the value 0 held
//! by the never-written register `t<i>_false`. Tickets are positive, and a
//! thread marks a flag true by writing its ticket, so every flag is tested
//! against false only. `r_j <= r_i` is split into `<` and `=` branches, so
//! only `=`, `!=` and `<` occur.

use super::ops::*;
use super::{GenError, GenResult};
use crate::program::{ProgramDef, ThreadDef};

fn worker(i: usize, n: usize) -> ThreadDef {
    let ff = format!("t{i}_false");
    let mine = format!("t{i}_mine");
    let other = format!("t{i}_other");
    let chosen = |j: usize| format!("chosen_{j}");
    let ticket = |j: usize| format!("ticket_{j}");
    let in_crit = format!("in_crit_{i}");

    let mut t = ThreadDef::new(format!("t{i}"), "choose");
    t.reg(&ff).reg(&mine).reg(&other);

    // begin choosing and pick a ticket no smaller than any other
    t.trans("choose", write(&chosen(i), &ff), "pick");
    t.trans("pick", new_value(&mine), "positive");
    t.trans("positive", lt(&ff, &mine), "scan_1");
    for j in 1..=n {
        let here = format!("scan_{j}");
        let cmp = format!("scan_{j}_cmp");
        let next = if j == n { "accept".to_owned() } else { format!("scan_{}", j + 1) };
        t.trans(&here, read(&ticket(j), &other), &cmp);
        t.trans(&cmp, lt(&mine, &other), "choose");
        t.trans(&cmp, lt(&other, &mine), &next);
        t.trans(&cmp, eq(&other, &mine), &next);
    }
    t.trans("accept", write(&ticket(i), &mine), "accepted");
    t.trans("accepted", write(&chosen(i), &mine), "wait_1");

    // wait for every thread that is choosing, then for every lower ticket
    for j in 1..=n {
        let wait = format!("wait_{j}");
        let wait_cmp = format!("wait_{j}_cmp");
        let tick = format!("ticket_{j}_read");
        let tick_cmp = format!("ticket_{j}_cmp");
        let tick_lower = format!("ticket_{j}_lower");
        let next = if j == n { "enter".to_owned() } else { format!("wait_{}", j + 1) };
        t.trans(&wait, read(&chosen(j), &other), &wait_cmp);
        t.trans(&wait_cmp, eq(&other, &ff), &wait);
        t.trans(&wait_cmp, neq(&other, &ff), &tick);
        t.trans(&tick, read(&ticket(j), &other), &tick_cmp);
        t.trans(&tick_cmp, eq(&other, &ff), &next);
        t.trans(&tick_cmp, neq(&other, &ff), &tick_lower);
        t.trans(&tick_lower, lt(&other, &mine), &tick);
        t.trans(&tick_lower, lt(&mine, &other), &next);
        t.trans(&tick_lower, eq(&mine, &other), &next);
    }

    t.trans("enter", write(&in_crit, &mine), "critical");
    t.trans("critical", write(&in_crit, &ff), "leave");
    t.trans("leave", assign(&mine, &ff), "choose");
    t
}

fn monitor(n: usize) -> ThreadDef {
    let mut m = ThreadDef::new("monitor", "watch");
    m.reg("m_seen").reg("m_zero");
    if n < 2 {
        // nothing to watch; keep the target state declared
        m.trans("watch", neq("m_zero", "m_zero"), "violation");
    }
    for i in 1..=n {
        for j in i + 1..=n {
            let a = format!("pair_{i}_{j}_a");
            let b = format!("pair_{i}_{j}_b");
            let c = format!("pair_{i}_{j}_c");
            m.trans("watch", read(&format!("in_crit_{i}"), "m_seen"), &a);
            m.trans(&a, neq("m_seen", "m_zero"), &b);
            m.trans(&b, read(&format!("in_crit_{j}"), "m_seen"), &c);
            m.trans(&c, neq("m_seen", "m_zero"), "violation");
        }
    }
    m
}

/// The bakery protocol for `n >= 1` threads with a mutual-exclusion monitor.
/// The target is `monitor:violation`.
pub fn gen_bakery(n: usize) -> Result<GenResult, GenError> {
    if n == 0 {
        return Err(GenError::BadParameter("n must be at least 1".into()));
    }
    let mut def = ProgramDef::default();
    for i in 1..=n {
        def.vars.push(format!("ticket_{i}"));
        def.vars.push(format!("chosen_{i}"));
    }
    for i in 1..=n {
        def.vars.push(format!("in_crit_{i}"));
    }
    for i in 1..=n {
        def.threads.push(worker(i, n));
    }
    def.threads.push(monitor(n));
    def.target = Some(("monitor".into(), "violation".into()));
    let program = def.build().map_err(|d| GenError::InvalidModel(d[0].message.clone()))?;
    let target = program.target().expect("declared above");
    Ok(GenResult {
        program,
        target,
        k_hint: n as u32 + 2,
    })
}
