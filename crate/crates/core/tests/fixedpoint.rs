use std::time::Instant;

use ssprofile::fixedpoint::{picard_solve, profile_norm, SolveConfig};
use ssprofile::verify::{check_fixedpoint_residual, check_profile_decay};
use ssprofile::{Equation, GridSpec, Profile, C64};

/// A solve on a reduced grid so the suite stays quick.
fn small(eq: Equation, amp: C64) -> SolveConfig {
    let mut cfg = SolveConfig::new(eq, amp);
    cfg.grid = Some(GridSpec::with_far_cut(30.0));
    cfg
}

/// The cutoff is a quintic smoothstep, so `z‴` jumps at these nodes.
const BREAKPOINTS: [f64; 2] = [0.5, 1.0];

/// Derivative at node `c` of the quartic through five consecutive nodes that
/// contain `c` and do not straddle a breakpoint, preferring centered stencils.
fn stencil_derivative(x: &[f64], y: &[C64], c: usize) -> Option<C64> {
    let straddles = |lo: usize| BREAKPOINTS.iter().any(|&b| x[lo] < b && x[lo + 4] > b);
    let start = [2usize, 1, 3, 0, 4]
        .into_iter()
        .filter(|&k| c >= k && c - k + 4 < x.len())
        .map(|k| c - k)
        .find(|&lo| !straddles(lo))?;
    let idx: Vec<usize> = (start..start + 5).collect();
    let xc = x[c];
    let mut acc = C64::default();
    for &j in &idx {
        let w = if j == c {
            idx.iter().filter(|&&m| m != c).map(|&m| 1.0 / (xc - x[m])).sum::<f64>()
        } else {
            let num: f64 = idx.iter().filter(|&&m| m != j && m != c).map(|&m| xc - x[m]).product();
            let den: f64 = idx.iter().filter(|&&m| m != j).map(|&m| x[j] - x[m]).product();
            num / den
        };
        acc += y[j] * w;
    }
    Some(acc)
}

/// Largest `|finite difference − stored z′|` over interior nodes, relative to `max|z′|`.
fn derivative_defect(z: &Profile) -> f64 {
    let x = z.grid.nodes();
    let scale = z.pos.dz.iter().map(|d| d.norm()).fold(0.0, f64::max);
    (2..x.len() - 2)
        .filter_map(|c| stencil_derivative(x, &z.pos.z, c).map(|d| (d - z.pos.dz[c]).norm() / scale))
        .fold(0.0, f64::max)
}

#[test]
fn zero_amplitude_is_trivial_for_every_equation() {
    for eq in Equation::ALL {
        let start = Instant::now();
        let (z, ansatz, report) = picard_solve(&SolveConfig::new(eq, C64::default())).unwrap();
        assert!(start.elapsed().as_secs_f64() < 1.0, "{eq}");
        assert!(report.converged);
        assert!(z.pos.z.iter().chain(&z.pos.dz).all(|v| *v == C64::default()), "{eq}");
        assert_eq!(ansatz.amplitude, C64::default());
        assert_eq!(report.c_value, C64::default());
    }
}

#[test]
fn quartic_fixed_point_identities() {
    let c = C64::new(0.01, 0.0);
    let (z, ansatz, report) = picard_solve(&small(Equation::Kdv4, c)).unwrap();
    assert!(report.converged);
    assert!((z.pos.origin.value - c).norm() <= 1e-6, "z(0+) = {}", z.pos.origin.value);
    let residual = check_fixedpoint_residual(&z, &ansatz).unwrap();
    assert!(residual < 1e-7, "residual {residual:e}");
    let defect = derivative_defect(&z);
    assert!(defect < 1e-4, "derivative defect {defect:e}");
}

#[test]
fn mbo_anchor_and_derivative() {
    let c = C64::new(0.02, 0.0);
    let (z, ansatz, report) = picard_solve(&small(Equation::Mbo, c)).unwrap();
    assert!(report.converged);
    assert!((z.pos.origin.value - c).norm() <= 1e-6, "z(0) = {}", z.pos.origin.value);
    assert!(check_fixedpoint_residual(&z, &ansatz).unwrap() < 1e-7);
    assert!(derivative_defect(&z) < 1e-4);
    // the two-high, one-zero-frequency term would otherwise leave z′ ~ 1/ξ
    let decay = check_profile_decay(&z).unwrap();
    assert!(decay.verdicts.iter().all(|v| v.pass), "{:?}", decay.verdicts);
}

#[test]
fn cubic_sign_flip_is_exact() {
    let c = C64::from_polar(0.01, 0.6);
    let (z, a, _) = picard_solve(&small(Equation::Mkdv, c)).unwrap();
    let (w, b, _) = picard_solve(&small(Equation::Mkdv, -c)).unwrap();
    assert_eq!(b.amplitude, -a.amplitude);
    for (u, v) in z.pos.z.iter().zip(&w.pos.z) {
        assert!((u + v).norm() <= 1e-15, "{u} vs {v}");
    }
}

#[test]
fn nls_phase_rotation_and_halving() {
    let amp = C64::new(0.02, 0.0);
    let rot = C64::from_polar(1.0, 0.9);
    let (z, _, r) = picard_solve(&small(Equation::Nls, amp)).unwrap();
    let (w, _, s) = picard_solve(&small(Equation::Nls, amp * rot)).unwrap();
    assert!((s.c_value - r.c_value * rot).norm() <= 1e-12);
    let neg = |p: &Profile| p.neg.as_ref().unwrap().z.clone();
    for (u, v) in z.pos.z.iter().chain(&neg(&z)).zip(w.pos.z.iter().chain(&neg(&w))) {
        assert!((u * rot - v).norm() <= 1e-12 * (1.0 + u.norm()), "{u} vs {v}");
    }
    let (h, _, _) = picard_solve(&small(Equation::Nls, amp * 0.5)).unwrap();
    let ratio = profile_norm(&h).unwrap().norm_total / profile_norm(&z).unwrap().norm_total;
    assert!((0.35..=0.65).contains(&ratio), "halving ratio {ratio}");
}
