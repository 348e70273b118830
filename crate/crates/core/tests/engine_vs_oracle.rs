mod common;

use common::{compare, oracle_suite};
use ssprofile::oscillatory::{eval_operator, oracle_bruteforce, Bump, Factor, QuadratureSpec};
use ssprofile::{Equation, C64};

#[test]
fn fixed_suite_matches_oracle() {
    let suite = oracle_suite();
    assert_eq!(suite.len(), 12);
    for (i, inst) in suite.iter().enumerate() {
        let c = compare(inst);
        println!("#{i} {} η={}: engine {} oracle {} rel {:.2e}", inst.equation, inst.eta, c.engine, c.oracle, c.relative);
        assert!(c.relative < 1e-5, "instance {i}: {:.2e}", c.relative);
    }
}

#[test]
fn cubic_mkdv_operator_matches_oracle() {
    let a = Bump::new(1.0, 0.8, C64::new(1.0, 0.3));
    let b = Bump::new(-0.5, 0.9, C64::new(0.7, -0.2));
    let c = Bump::new(0.3, 1.2, C64::new(0.5, 0.5));
    let f: [&dyn Factor; 3] = [&a, &b, &c];
    let e = eval_operator(Equation::Mkdv, &f, &[0.9], &QuadratureSpec::default()).unwrap()[0];
    let o = oracle_bruteforce(Equation::Mkdv, &f, 0.9, 32).unwrap();
    assert!((e.value - o).norm() / o.norm() < 1e-5);
}

#[test]
fn oracle_is_resolution_converged() {
    // the reference itself must be stable under doubling its sampling
    let inst = &oracle_suite()[6];
    let f: Vec<&dyn Factor> = inst.factors.iter().map(|b| b as &dyn Factor).collect();
    let a = oracle_bruteforce(inst.equation, &f, inst.eta, 32).unwrap();
    let b = oracle_bruteforce(inst.equation, &f, inst.eta, 64).unwrap();
    assert!((a - b).norm() / b.norm() < 1e-7, "{a} vs {b}");
}
