//! Fixtures shared by the integration tests.
#![allow(dead_code)]

use ssprofile::oscillatory::{eval_i, eval_m, eval_t, oracle_bruteforce, Bump, Factor, QuadratureSpec};
use ssprofile::{Equation, C64};

/// One operator evaluation on smooth compactly supported factors.
pub struct Instance {
    pub equation: Equation,
    pub factors: Vec<Bump>,
    pub eta: f64,
}

fn bump(center: f64, half_width: f64, re: f64, im: f64) -> Bump {
    Bump::new(center, half_width, C64::new(re, im))
}

/// Four instances each of the quartic, MBO and NLS operators. Weighted
/// operators keep the last factor away from zero frequency.
pub fn oracle_suite() -> Vec<Instance> {
    let kdv4 = |f: [Bump; 4], eta| Instance { equation: Equation::Kdv4, factors: f.to_vec(), eta };
    let mbo = |f: [Bump; 3], eta| Instance { equation: Equation::Mbo, factors: f.to_vec(), eta };
    let nls = |f: [Bump; 3], eta| Instance { equation: Equation::Nls, factors: f.to_vec(), eta };
    vec![
        kdv4([bump(0.2, 1.0, 1.0, 0.3), bump(0.5, 0.6, 0.7, -0.2), bump(-0.4, 0.7, 0.5, 0.5), bump(1.2, 0.5, 0.2, 0.9)], 1.1),
        kdv4([bump(-0.3, 0.8, 0.9, 0.0), bump(0.1, 0.9, 0.4, 0.4), bump(0.6, 0.5, -0.3, 0.8), bump(-1.0, 0.6, 1.0, -0.5)], -0.7),
        kdv4([bump(0.8, 0.5, 0.6, 0.1), bump(0.9, 0.4, 0.3, -0.6), bump(-0.2, 0.6, 0.8, 0.2), bump(1.5, 0.7, -0.4, 0.4)], 2.5),
        kdv4([bump(0.0, 1.2, 0.5, 0.5), bump(-0.6, 0.5, 0.9, -0.1), bump(0.4, 0.8, 0.2, 0.7), bump(0.9, 0.6, 0.6, 0.0)], 0.3),
        mbo([bump(0.2, 1.0, 1.0, 0.3), bump(-0.5, 0.9, 0.7, -0.2), bump(1.5, 0.6, 0.5, 0.5)], 1.3),
        mbo([bump(1.0, 0.7, 0.4, -0.4), bump(0.3, 0.8, 0.9, 0.1), bump(-1.4, 0.9, 0.6, 0.6)], -0.8),
        mbo([bump(-0.8, 1.1, 0.8, 0.2), bump(1.2, 0.6, -0.5, 0.5), bump(2.0, 0.8, 0.3, -0.7)], 3.0),
        mbo([bump(0.5, 0.5, 0.2, 0.9), bump(0.5, 0.5, 1.0, 0.0), bump(0.9, 0.4, 0.7, 0.3)], 1.9),
        nls([bump(1.0, 0.8, 1.0, 0.3), bump(-0.5, 0.9, 0.7, -0.2), bump(0.3, 1.2, 0.5, 0.5)], 1.3),
        nls([bump(-1.2, 0.7, 0.6, 0.6), bump(0.4, 1.0, 0.9, 0.0), bump(0.8, 0.5, -0.4, 0.7)], -0.4),
        nls([bump(2.0, 0.6, 0.3, -0.8), bump(1.5, 0.8, 0.8, 0.4), bump(2.2, 0.7, 0.5, 0.1)], 2.6),
        nls([bump(0.0, 1.5, 0.9, 0.2), bump(0.0, 1.5, 0.4, -0.4), bump(0.0, 1.5, 0.7, 0.7)], 0.0),
    ]
}

/// Result of running one instance through the engine and the oracle.
pub struct Comparison {
    pub engine: C64,
    pub oracle: C64,
    pub relative: f64,
}

pub fn compare(inst: &Instance) -> Comparison {
    let q = QuadratureSpec::default();
    let f: Vec<&dyn Factor> = inst.factors.iter().map(|b| b as &dyn Factor).collect();
    let etas = [inst.eta];
    let est = match inst.equation {
        Equation::Kdv4 => eval_m([f[0], f[1], f[2], f[3]], &etas, &q),
        Equation::Mbo => eval_i([f[0], f[1], f[2]], &etas, &q),
        Equation::Nls => eval_t([f[0], f[1], f[2]], &etas, &q),
        Equation::Mkdv => unreachable!("the suite covers the M, I and T operators"),
    }
    .expect("engine evaluates");
    let oracle = oracle_bruteforce(inst.equation, &f, inst.eta, 32).expect("oracle evaluates");
    let engine = est[0].value;
    Comparison { engine, oracle, relative: (engine - oracle).norm() / oracle.norm() }
}
