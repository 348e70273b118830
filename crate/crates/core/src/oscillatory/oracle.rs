//! Brute-force frequency-space reference for the multilinear operators.
//!
//! A tensor trapezoid rule over the free frequencies with Richardson
//! extrapolation. It shares no code with the pseudo-spectral engine; singular
//! weights are removed by `η = y|y|^{p−1}` (`p = 3` for KDV4, `p = 2` for MBO).

use std::f64::consts::PI;

use rayon::prelude::*;

use super::Factor;
use crate::profile_space::Equation;
use crate::{Error, Result, C64};

/// Phase of the integrand and the dependent last frequency.
fn phase_and_last(eq: Equation, eta: f64, free: &[f64]) -> (f64, f64) {
    match eq {
        Equation::Kdv4 => {
            let last = eta - free.iter().sum::<f64>();
            let sum: f64 = free.iter().map(|v| v * v * v).sum::<f64>() + last * last * last;
            (-(eta * eta * eta - sum), last)
        }
        Equation::Mkdv => {
            let last = eta - free[0] - free[1];
            let sum = free[0].powi(3) + free[1].powi(3) + last.powi(3);
            (-(eta.powi(3) - sum), last)
        }
        Equation::Mbo => {
            let last = eta - free[0] - free[1];
            let p = |v: f64| v * v.abs();
            (p(eta) - p(free[0]) - p(free[1]) - p(last), last)
        }
        Equation::Nls => {
            // η₁ − η₂ + η₃ = η
            let last = eta - free[0] + free[1];
            (eta * eta - free[0] * free[0] + free[1] * free[1] - last * last, last)
        }
    }
}

/// One integration axis: the map from the uniform variable to the frequency and
/// the Jacobian times the singular weight.
#[derive(Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    power: f64,
    weight: f64,
}

impl Axis {
    fn new(band: (f64, f64), weight: f64) -> Self {
        let power = if weight > 0.0 && band.0 < 0.0 && band.1 > 0.0 { 1.0 / (1.0 - weight) } else { 1.0 };
        let inv = |v: f64| v.signum() * v.abs().powf(1.0 / power);
        Axis { lo: inv(band.0), hi: inv(band.1), power, weight }
    }

    /// Frequency and `(dη/dy)·|η|^{−s}` at `y`.
    fn map(&self, y: f64) -> (f64, f64) {
        let p = self.power;
        let eta = y.signum() * y.abs().powf(p);
        if p == 1.0 {
            let w = if self.weight > 0.0 { eta.abs().powf(-self.weight) } else { 1.0 };
            (eta, w)
        } else {
            // p|y|^{p−1}·|y|^{−ps} with p = 1/(1 − s): the weight cancels exactly
            (eta, p)
        }
    }
}

fn trapezoid(eq: Equation, factors: &[&dyn Factor], axes: &[Axis], eta: f64, n: usize) -> C64 {
    let s = eq.weight_exponent();
    let d = axes.len();
    let last = factors[d];
    let conj_middle = eq == Equation::Nls;
    let node = |ax: &Axis, i: usize| -> (f64, f64, f64) {
        let y = ax.lo + (ax.hi - ax.lo) * i as f64 / n as f64;
        let end = if i == 0 || i == n { 0.5 } else { 1.0 };
        let (e, w) = ax.map(y);
        (e, w * end * (ax.hi - ax.lo) / n as f64, y)
    };
    let inner = |i0: usize| -> C64 {
        let (e0, w0, _) = node(&axes[0], i0);
        let g0 = factors[0].value(e0);
        if g0 == C64::default() {
            return C64::default();
        }
        let mut acc = C64::default();
        let mut free = vec![0.0; d];
        free[0] = e0;
        let mut idx = vec![0usize; d];
        loop {
            let mut w = w0;
            let mut g = g0;
            for j in 1..d {
                let (e, wj, _) = node(&axes[j], idx[j]);
                free[j] = e;
                w *= wj;
                let v = factors[j].value(e);
                g *= if conj_middle && j == 1 { v.conj() } else { v };
            }
            if g != C64::default() {
                let (theta, el) = phase_and_last(eq, eta, &free);
                let gl = last.value(el);
                if gl != C64::default() {
                    let wl = if s > 0.0 { el.abs().powf(-s) } else { 1.0 };
                    acc += g * gl * wl * w * C64::from_polar(1.0, theta);
                }
            }
            // odometer over axes 1..d
            let mut j = d;
            loop {
                if j == 1 {
                    return acc;
                }
                j -= 1;
                idx[j] += 1;
                if idx[j] <= n {
                    break;
                }
                idx[j] = 0;
            }
        }
    };
    if d == 1 {
        return (0..=n).map(inner).sum();
    }
    (0..=n).into_par_iter().map(inner).sum()
}

/// Reference value of the equation's operator at `η` for compactly supported
/// factors inside `|ξ| ≤ 50`. `nodes_per_period` sets the oscillation resolution
/// (at least 32).
pub fn oracle_bruteforce(eq: Equation, factors: &[&dyn Factor], eta: f64, nodes_per_period: usize) -> Result<C64> {
    let k = eq.degree();
    if factors.len() != k {
        return Err(Error::Config(format!("{eq} needs {k} factors, got {}", factors.len())));
    }
    let bands: Vec<(f64, f64)> = factors
        .iter()
        .map(|f| f.band().ok_or_else(|| Error::Config("oracle needs compactly supported factors".into())))
        .collect::<Result<_>>()?;
    let radius = bands.iter().fold(eta.abs(), |m, b| m.max(b.0.abs()).max(b.1.abs()));
    if radius > 50.0 {
        return Err(Error::Config(format!("oracle radius {radius} exceeds 50")));
    }
    let s = eq.weight_exponent();
    let lb = bands[k - 1];
    if s > 0.0 && lb.0 < 0.0 && lb.1 > 0.0 {
        return Err(Error::Config("oracle needs the last weighted factor supported away from 0".into()));
    }
    // the NLS middle frequency enters with a minus sign, so its band is used as is
    let axes: Vec<Axis> = bands[..k - 1].iter().map(|&b| Axis::new(b, s)).collect();
    // largest phase gradient on the box bounds the oscillation rate
    let grad = match eq {
        Equation::Kdv4 | Equation::Mkdv => 3.0 * radius * radius,
        Equation::Mbo | Equation::Nls => 2.0 * radius,
    };
    let width = bands.iter().map(|b| b.1 - b.0).fold(0.0f64, f64::max);
    let per = nodes_per_period.max(32) as f64;
    let n = ((width * grad * per / (2.0 * PI)).ceil() as usize).max(128);
    let coarse = trapezoid(eq, factors, &axes, eta, n);
    let fine = trapezoid(eq, factors, &axes, eta, 2 * n);
    Ok((fine * 4.0 - coarse) / 3.0)
}
