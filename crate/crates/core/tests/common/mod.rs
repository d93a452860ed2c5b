//! Reference implementations shared by the integration tests. Nothing here
//! calls the library's propagation or search code.

#![allow(dead_code)]

use ks_forge_core::assignments::{Assignment, Premise, Requirement, Value};
use ks_forge_core::diagram::Diagram;
use rand::seq::index::sample;
use rand::Rng;

pub const UNDEF: u8 = 2;

/// Admissibility of one context, values in {0, 1, UNDEF}.
pub fn context_ok(vals: [u8; 3]) -> bool {
    let ones = vals.iter().filter(|&&v| v == 1).count();
    let zeros = vals.iter().filter(|&&v| v == 0).count();
    match ones {
        0 => zeros <= 1,
        1 => zeros == 2,
        _ => false,
    }
}

pub fn admissible(d: &Diagram, vals: &[u8]) -> bool {
    d.contexts().iter().all(|c| context_ok(c.map(|m| vals[m])))
}

pub fn satisfies(d: &Diagram, vals: &[u8], premises: &[Premise]) -> bool {
    premises.iter().all(|p| {
        let v = vals[d.index_of(&p.id).expect("premise id")];
        match p.req {
            Requirement::One => v == 1,
            Requirement::Zero => v == 0,
            Requirement::Definite => v != UNDEF,
        }
    })
}

pub fn to_assignment(d: &Diagram, vals: &[u8]) -> Assignment {
    vals.iter()
        .enumerate()
        .filter(|(_, &v)| v != UNDEF)
        .map(|(i, &v)| (d.id(i).to_string(), if v == 1 { Value::One } else { Value::Zero }))
        .collect()
}

/// Plain odometer over all `3^n` assignments (or `2^n` with `total`); calls
/// `visit` on every admissible one satisfying the premises until it returns
/// `true`.
pub fn brute_force(d: &Diagram, premises: &[Premise], total: bool, mut visit: impl FnMut(&[u8]) -> bool) {
    let n = d.len();
    let base = if total { 2 } else { 3 };
    let mut vals = vec![0u8; n];
    loop {
        if admissible(d, &vals) && satisfies(d, &vals, premises) && visit(&vals) {
            return;
        }
        let mut i = 0;
        loop {
            if i == n {
                return;
            }
            vals[i] += 1;
            if vals[i] < base {
                break;
            }
            vals[i] = 0;
            i += 1;
        }
    }
}

pub fn brute_force_exists(d: &Diagram, premises: &[Premise], total: bool) -> bool {
    let mut found = false;
    brute_force(d, premises, total, |_| {
        found = true;
        true
    });
    found
}

/// Exhaustive enumeration with pruning: an observable is assigned only if
/// every context whose members are all assigned stays admissible. Visits
/// every admissible assignment satisfying the premises.
pub fn pruned_enumeration(d: &Diagram, premises: &[Premise], total: bool, visit: &mut dyn FnMut(&[u8])) {
    let n = d.len();
    let mut ctx_of: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (c, ctx) in d.contexts().iter().enumerate() {
        let last = *ctx.iter().max().expect("three members");
        ctx_of[last].push(c);
    }
    let mut vals = vec![UNDEF; n];
    fn go(
        d: &Diagram,
        i: usize,
        vals: &mut Vec<u8>,
        ctx_of: &[Vec<usize>],
        premises: &[Premise],
        total: bool,
        visit: &mut dyn FnMut(&[u8]),
    ) {
        if i == vals.len() {
            if satisfies(d, vals, premises) {
                visit(vals);
            }
            return;
        }
        let choices: &[u8] = if total { &[0, 1] } else { &[0, 1, UNDEF] };
        for &v in choices {
            vals[i] = v;
            if ctx_of[i].iter().all(|&c| context_ok(d.contexts()[c].map(|m| vals[m]))) {
                go(d, i + 1, vals, ctx_of, premises, total, visit);
            }
        }
        vals[i] = UNDEF;
    }
    go(d, 0, &mut vals, &ctx_of, premises, total, visit);
}

/// Abstract diagram with `n` observables `o0..` and up to `max_ctx` random
/// contexts.
pub fn random_diagram<R: Rng>(rng: &mut R, max_obs: usize, max_ctx: usize) -> Diagram {
    let n = rng.random_range(3..=max_obs);
    let mut d = Diagram::new();
    for i in 0..n {
        d.add_observable(format!("o{i}"), None).unwrap();
    }
    let k = rng.random_range(0..=max_ctx);
    for _ in 0..k {
        let m = sample(rng, n, 3).into_vec();
        d.add_context_indices([m[0], m[1], m[2]]).unwrap();
    }
    d
}

pub fn random_premises<R: Rng>(rng: &mut R, d: &Diagram, max: usize) -> Vec<Premise> {
    let k = rng.random_range(0..=max.min(d.len()));
    sample(rng, d.len(), k)
        .into_iter()
        .map(|i| {
            let id = d.id(i).to_string();
            match rng.random_range(0..3) {
                0 => Premise::one(id),
                1 => Premise::zero(id),
                _ => Premise::definite(id),
            }
        })
        .collect()
}
