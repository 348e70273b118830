//! Leading-order stationary phase.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::{Error, Result, C64};

/// Numerical Hessian by central differences.
fn hessian(phase: &dyn Fn(&[f64]) -> f64, x: &[f64]) -> DMatrix<f64> {
    let d = x.len();
    let step: Vec<f64> = x.iter().map(|v| 1e-4 * v.abs().max(1.0)).collect();
    let mut hess = DMatrix::zeros(d, d);
    let mut p = x.to_vec();
    for i in 0..d {
        for j in i..d {
            let mut eval = |di: f64, dj: f64| {
                p.copy_from_slice(x);
                p[i] += di * step[i];
                p[j] += dj * step[j];
                phase(&p)
            };
            let v = (eval(1.0, 1.0) - eval(1.0, -1.0) - eval(-1.0, 1.0) + eval(-1.0, -1.0)) / (4.0 * step[i] * step[j]);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    hess
}

/// `∫ e^{iλφ(x)} ψ(x) dx ≈ (2π/λ)^{d/2} e^{iπ/4·sgn D²φ} |det D²φ|^{−1/2} e^{iλφ(x₀)} ψ(x₀)`
/// at a nondegenerate critical point `x₀`.
pub fn stationary_phase_leading(
    phase: &dyn Fn(&[f64]) -> f64,
    amplitude: &dyn Fn(&[f64]) -> C64,
    point: &[f64],
    lambda: f64,
) -> Result<C64> {
    let d = point.len();
    let eig = SymmetricEigen::new(hessian(phase, point));
    let det: f64 = eig.eigenvalues.iter().product();
    // the central-difference bias is O(step²) ≈ 1e−8
    if det.abs() < 1e-6 {
        return Err(Error::Degenerate { det });
    }
    let signature: i32 = eig.eigenvalues.iter().map(|&l| if l > 0.0 { 1 } else { -1 }).sum();
    let pre = (2.0 * PI / lambda).powf(d as f64 / 2.0) / det.abs().sqrt();
    let rot = C64::from_polar(1.0, PI / 4.0 * signature as f64 + lambda * phase(point));
    Ok(amplitude(point) * rot * pre)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresnel_integral() {
        let v = stationary_phase_leading(&|x| x[0] * x[0], &|_| C64::new(1.0, 0.0), &[0.0], 100.0).unwrap();
        assert!((v.re - 0.12533).abs() < 1e-5 && (v.im - 0.12533).abs() < 1e-5);
    }

    #[test]
    fn saddle_matches_gaussian_closed_form() {
        // ∬ e^{iλ p q − p² − q²} = π/√(1 + λ²/4) exactly
        let lambda: f64 = 400.0;
        let exact = PI / (1.0 + lambda * lambda / 4.0).sqrt();
        let lead = stationary_phase_leading(
            &|x| x[0] * x[1],
            &|x| C64::new((-x[0] * x[0] - x[1] * x[1]).exp(), 0.0),
            &[0.0, 0.0],
            lambda,
        )
        .unwrap();
        assert!((lead - exact).norm() / exact < 1e-4);
    }

    #[test]
    fn degenerate_point_rejected() {
        let r = stationary_phase_leading(&|x| x[0].powi(4), &|_| C64::new(1.0, 0.0), &[0.0], 10.0);
        assert!(matches!(r, Err(Error::Degenerate { .. })));
    }
}
