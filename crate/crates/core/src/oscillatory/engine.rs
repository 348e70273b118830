//! Pseudo-spectral evaluation of the multilinear operators.
//!
//! Each factor `g_j` is turned into the physical function with transform
//! `e^{iμ(ξ)}|ξ|^{−s} g_j(ξ)`, the factors are multiplied pointwise, and the
//! product is transformed back. The operator is then
//! `Op(η) = (2π)^{k−1} e^{−iμ(η)} F[Π f_j](η)`.
//!
//! The zero-frequency behaviour of each factor (jumps, `|ξ|^{−s}` weights, log
//! singularities) is removed by one-sided models `|ξ|^{j−s}e^{−|ξ|/ℓ}` whose
//! physical transforms are known in closed form, so the sampled remainder is
//! smooth enough for the discrete sums to be accurate. The slowly decaying model
//! product outside the physical window is added back by a rotated-contour
//! Gauss–Laguerre rule.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use statrs::function::gamma::{digamma, gamma};

use super::{Factor, LowFrequency};
use crate::profile_space::Equation;
use crate::{Error, Result, C64};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Smooth taper on `|ξ|`: 1 below `start`, 0 above `end`, `C^∞` in between.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Truncation {
    pub start: f64,
    pub end: f64,
}

impl Truncation {
    pub fn weight(&self, a: f64) -> f64 {
        if a <= self.start {
            1.0
        } else if a >= self.end {
            0.0
        } else {
            let t = (a - self.start) / (self.end - self.start);
            let bump = |u: f64| if u <= 0.0 { 0.0 } else { (-1.0 / u).exp() };
            let up = bump(t);
            1.0 - up / (up + bump(1.0 - t))
        }
    }
}

/// Requested resolution of a pseudo-spectral evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanSpec {
    pub equation: Equation,
    /// Largest `|η|` at which the operator is needed.
    pub out_max: f64,
    /// Frequency interval outside which every factor vanishes (after truncation).
    pub band: (f64, f64),
    pub truncation: Option<Truncation>,
    /// Extra physical margin on both sides of the window; raised to at least
    /// `max(200, span/10)`.
    pub margin: f64,
    /// Multiplies the anti-aliasing Nyquist bound.
    pub oversampling: f64,
}

impl PlanSpec {
    /// Factors built from profiles on a grid with the given far cut: outputs up to
    /// `far_cut`, factors tapered between `1.05·far_cut` and `1.25·far_cut`.
    pub fn for_profiles(equation: Equation, far_cut: f64) -> Self {
        let end = 1.25 * far_cut;
        PlanSpec {
            equation,
            out_max: far_cut,
            band: (-end, end),
            truncation: Some(Truncation { start: 1.05 * far_cut, end }),
            margin: 0.0,
            oversampling: 1.0,
        }
    }

    /// Factors supported in `[lo, hi]`.
    pub fn for_band(equation: Equation, out_max: f64, lo: f64, hi: f64) -> Self {
        PlanSpec {
            equation,
            out_max,
            band: (lo, hi),
            truncation: None,
            margin: 400.0 / (hi - lo).max(1e-6),
            oversampling: 1.0,
        }
    }
}

/// Physical window and FFT size derived from a [`PlanSpec`].
#[derive(Clone, Debug)]
pub struct Plan {
    pub spec: PlanSpec,
    pub n: usize,
    pub dx: f64,
    pub x0: f64,
    /// Frequency spacing `2π/(n·dx)`.
    pub h: f64,
}

fn is_smooth(mut n: usize) -> bool {
    for p in [2, 3, 5] {
        while n.is_multiple_of(p) {
            n /= p;
        }
    }
    n == 1
}

fn next_smooth(n: usize) -> usize {
    (n.max(16)..).find(|&m| is_smooth(m)).expect("5-smooth numbers are unbounded")
}

impl Plan {
    pub fn new(spec: PlanSpec) -> Result<Self> {
        let (lo, hi) = spec.band;
        if !(hi > lo && spec.out_max.is_finite() && spec.out_max > 0.0) {
            return Err(Error::Config(format!("invalid plan band ({lo}, {hi}) or output range {}", spec.out_max)));
        }
        let eq = spec.equation;
        // group positions x = −μ′(ξ) over the band
        let samples = 4096;
        let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..=samples {
            let xi = lo + (hi - lo) * i as f64 / samples as f64;
            let x = -eq.modulation_prime(xi);
            xmin = xmin.min(x);
            xmax = xmax.max(x);
        }
        let span = xmax - xmin;
        let margin = spec.margin.max(200.0).max(0.1 * span);
        let len = span + 2.0 * margin;
        let v = lo.abs().max(hi.abs());
        let k = eq.degree() as f64;
        let nyquist = 1.02 * spec.oversampling * (k * v + spec.out_max) / 2.0;
        let n = next_smooth((len * nyquist / PI).ceil() as usize);
        let dx = len / n as f64;
        Ok(Plan { spec, n, dx, x0: xmin - margin, h: 2.0 * PI / len })
    }

    fn index(&self, m: i64) -> usize {
        if m >= 0 {
            m as usize
        } else {
            (self.n as i64 + m) as usize
        }
    }
}

/// Closed-form zero-frequency model of one factor.
#[derive(Clone, Debug, Default)]
struct Model {
    /// Decay length `ℓ` of the `e^{−|ξ|/ℓ}` envelope.
    scale: f64,
    /// `(side σ, exponent a, coefficient, log)`: the term
    /// `coeff·|ξ|^{a−1}(log|ξ|)e^{−|ξ|/ℓ}` on `σξ > 0`.
    terms: Vec<(f64, f64, C64, bool)>,
}

/// A factor's model and whether the operator conjugates that factor.
type ConjModel = (Model, bool);

impl Model {
    fn new(factor: &dyn Factor, eq: Equation, scale: f64) -> Self {
        let s = eq.weight_exponent();
        let mut terms = Vec::new();
        for (sigma, lf) in [(1.0, factor.low_frequency(true)), (-1.0, factor.low_frequency(false))] {
            let LowFrequency { value, slope, curvature, log_coeff } = lf;
            // quadratic part of the modulation on this side, entering through e^{iμ}
            let mu2 = match eq {
                Equation::Mbo => -sigma,
                Equation::Nls => -1.0,
                Equation::Kdv4 | Equation::Mkdv => 0.0,
            };
            // e^{−u/ℓ}(a0 + a1 u + a2 u²) matches c0 + c1 u + c2 u² to second order
            let matched = |c0: C64, c1: C64, c2: C64| {
                let a0 = c0;
                let a1 = c1 + a0 / scale;
                let a2 = c2 + a1 / scale - a0 / (2.0 * scale * scale);
                [a0, a1, a2]
            };
            let plain = matched(value, slope, curvature + I * mu2 * value);
            let log = matched(log_coeff, C64::default(), I * mu2 * log_coeff);
            for (j, (&p, &l)) in plain.iter().zip(&log).enumerate() {
                let e = j as f64 + 1.0 - s;
                if p != C64::default() {
                    terms.push((sigma, e, p, false));
                }
                if l != C64::default() {
                    terms.push((sigma, e, l, true));
                }
            }
        }
        Model { scale, terms }
    }

    fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn freq(&self, xi: f64) -> C64 {
        let a = xi.abs();
        let mut out = C64::default();
        for &(sigma, e, c, log) in &self.terms {
            if sigma * xi > 0.0 {
                let mut v = a.powf(e - 1.0) * (-a / self.scale).exp();
                if log {
                    v *= a.ln();
                }
                out += c * v;
            }
        }
        out
    }

    /// Inverse transform `(1/2π)∫ model(ξ) e^{ixξ} dξ`, analytic in `x`.
    fn phys(&self, x: C64) -> C64 {
        let mut out = C64::default();
        for &(sigma, e, c, log) in &self.terms {
            let p = C64::new(1.0 / self.scale, 0.0) - I * sigma * x;
            let lp = p.ln();
            let pw = (-e * lp).exp();
            let g = gamma(e);
            let v = if log { g * (digamma(e) - lp) * pw } else { g * pw };
            out += c * v;
        }
        out / (2.0 * PI)
    }

    /// `conj(phys(conj x))`, the analytic continuation of `conj(phys(x))`.
    fn phys_conj(&self, x: C64) -> C64 {
        self.phys(x.conj()).conj()
    }
}

/// Operator values on the uniform fine grid and at requested frequencies.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub h: f64,
    /// `Op(n·h)` for `n = 0, 1, …`.
    pub fine_pos: Vec<C64>,
    /// `Op(−n·h)` for `n = 0, 1, …`.
    pub fine_neg: Vec<C64>,
    /// `Op` at the requested frequencies.
    pub at: Vec<C64>,
}

/// Gauss–Laguerre nodes and weights by the Golub–Welsch eigenproblem.
fn gauss_laguerre(n: usize) -> Vec<(f64, f64)> {
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        jac[(i, i)] = (2 * i + 1) as f64;
        if i + 1 < n {
            let b = (i + 1) as f64;
            jac[(i, i + 1)] = b;
            jac[(i + 1, i)] = b;
        }
    }
    let eig = SymmetricEigen::new(jac);
    let mut out: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], v0 * v0)
        })
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// A reusable evaluator for one plan.
pub struct Engine {
    pub plan: Plan,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    laguerre: Vec<(f64, f64)>,
}

impl Engine {
    pub fn new(spec: PlanSpec) -> Result<Self> {
        let plan = Plan::new(spec)?;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(plan.n);
        let inverse = planner.plan_fft_inverse(plan.n);
        log::debug!("engine: n = {}, dx = {:.3e}, window [{:.1}, {:.1}]", plan.n, plan.dx, plan.x0, plan.x0 + plan.n as f64 * plan.dx);
        Ok(Engine { plan, forward, inverse, laguerre: gauss_laguerre(48) })
    }

    /// Physical samples of the factor on the window, plus its zero-frequency model.
    fn synthesize(&self, factor: &dyn Factor, buf: &mut [C64]) -> Model {
        let plan = &self.plan;
        let eq = plan.spec.equation;
        let s = eq.weight_exponent();
        let half = (plan.n / 2) as i64 - 1;
        // the model envelope must die out well inside the Nyquist range
        let nyquist = half as f64 * plan.h;
        let model = Model::new(factor, eq, (nyquist / 40.0).min(1.0));
        let (lo, hi) = if model.is_empty() { plan.spec.band } else { (-nyquist, nyquist) };
        let m_lo = ((lo / plan.h).ceil() as i64).max(-half);
        let m_hi = ((hi / plan.h).floor() as i64).min(half);
        buf.fill(C64::default());
        let h = plan.h;
        let x0 = plan.x0;
        let trunc = plan.spec.truncation;
        let fill = |m: i64| -> C64 {
            if m == 0 {
                return C64::default();
            }
            let xi = m as f64 * h;
            let a = xi.abs();
            let w = trunc.map_or(1.0, |t| t.weight(a));
            let g = if w > 0.0 { factor.value(xi) * w } else { C64::default() };
            let weighted = if s > 0.0 { g * a.powf(-s) } else { g };
            let r = weighted * C64::from_polar(1.0, eq.modulation(xi)) - model.freq(xi);
            r * C64::from_polar(1.0, x0 * xi)
        };
        if m_hi >= 1 {
            let start = m_lo.max(1);
            buf[start as usize..=m_hi as usize]
                .par_iter_mut()
                .enumerate()
                .for_each(|(i, v)| *v = fill(start + i as i64));
        }
        if m_lo <= -1 {
            let end = m_hi.min(-1);
            let first = plan.index(m_lo);
            let last = plan.index(end);
            buf[first..=last]
                .par_iter_mut()
                .enumerate()
                .for_each(|(i, v)| *v = fill(m_lo + i as i64));
        }
        self.inverse.process(buf);
        let scale = h / (2.0 * PI);
        let dx = plan.dx;
        if model.is_empty() {
            buf.par_iter_mut().for_each(|v| *v *= scale);
        } else {
            buf.par_iter_mut().enumerate().for_each(|(j, v)| {
                let x = x0 + j as f64 * dx;
                *v = *v * scale + model.phys(C64::new(x, 0.0));
            });
        }
        model
    }

    /// Physical samples `(1/2π)∫ e^{iμ(ξ)}|ξ|^{−s} g(ξ) e^{ixξ} dξ` of one factor at
    /// `x = x0 + j·dx` across the window.
    pub fn physical(&self, factor: &dyn Factor) -> Vec<C64> {
        let mut buf = vec![C64::default(); self.plan.n];
        self.synthesize(factor, &mut buf);
        buf
    }

    /// Product of the physical factors (middle factor conjugated for NLS) and
    /// the product of their models, as a closure-ready list.
    fn product(&self, factors: &[&dyn Factor]) -> Result<(Vec<C64>, Vec<ConjModel>)> {
        let eq = self.plan.spec.equation;
        if factors.len() != eq.degree() {
            return Err(Error::Config(format!("{eq} needs {} factors, got {}", eq.degree(), factors.len())));
        }
        let conj_middle = eq == Equation::Nls;
        let n = self.plan.n;
        let mut prod = vec![C64::default(); n];
        let addr = |f: &dyn Factor| f as *const dyn Factor as *const () as usize;
        let all_same = factors.iter().all(|f| addr(*f) == addr(factors[0]));
        let mut models = Vec::with_capacity(factors.len());
        if all_same {
            let model = self.synthesize(factors[0], &mut prod);
            let k = factors.len();
            prod.par_iter_mut().for_each(|v| {
                let f = *v;
                *v = if conj_middle { f * f.conj() * f } else { f.powu(k as u32) };
            });
            for j in 0..k {
                models.push((model.clone(), conj_middle && j == 1));
            }
        } else {
            let mut scratch = vec![C64::default(); n];
            for (j, f) in factors.iter().enumerate() {
                let conj = conj_middle && j == 1;
                let target: &mut [C64] = if j == 0 { &mut prod } else { &mut scratch };
                let model = self.synthesize(*f, target);
                if conj {
                    target.par_iter_mut().for_each(|v| *v = v.conj());
                }
                if j > 0 {
                    prod.par_iter_mut().zip(scratch.par_iter()).for_each(|(p, s)| *p *= s);
                }
                models.push((model, conj));
            }
        }
        Ok((prod, models))
    }

    /// `∫ p(x) e^{−iηx} dx` outside the window, with `p` the product of the
    /// factor models; the contour is rotated so the weight becomes `e^{−|η|t}`.
    fn outside(&self, models: &[ConjModel], eta: f64) -> C64 {
        if eta == 0.0 || models.iter().any(|(m, _)| m.is_empty()) {
            return C64::default();
        }
        let plan = &self.plan;
        let q = |x: C64| -> C64 {
            models
                .iter()
                .map(|(m, conj)| if *conj { m.phys_conj(x) } else { m.phys(x) })
                .product()
        };
        let s = eta.signum();
        let a = eta.abs();
        let xl = plan.x0 - 0.5 * plan.dx;
        let xr = plan.x0 + (plan.n as f64 - 0.5) * plan.dx;
        let mut left = C64::default();
        let mut right = C64::default();
        for &(tau, w) in &self.laguerre {
            let t = tau / a;
            left += w * q(C64::new(xl, -s * t));
            right += w * q(C64::new(xr, -s * t));
        }
        let left = C64::from_polar(1.0, -eta * xl) * left * (I * s) / a;
        let right = C64::from_polar(1.0, -eta * xr) * right * (-I * s) / a;
        left + right
    }

    /// `Σ_j p_j e^{−iη x_j} dx` at each requested `η`, eight frequencies per pass.
    fn direct(&self, p: &[C64], etas: &[f64]) -> Vec<C64> {
        const CHUNK: usize = 1 << 13;
        const LANES: usize = 8;
        let dx = self.plan.dx;
        let x0 = self.plan.x0;
        let groups: Vec<&[f64]> = etas.chunks(LANES).collect();
        groups
            .par_iter()
            .flat_map_iter(|group| {
                let g = group.len();
                let mut acc = [C64::default(); LANES];
                let mut step = [C64::new(1.0, 0.0); LANES];
                for l in 0..g {
                    step[l] = C64::from_polar(1.0, -group[l] * dx);
                }
                for (ci, chunk) in p.chunks(CHUNK).enumerate() {
                    let j0 = (ci * CHUNK) as f64;
                    let mut rot = [C64::new(1.0, 0.0); LANES];
                    for l in 0..g {
                        rot[l] = C64::from_polar(1.0, -group[l] * j0 * dx);
                    }
                    let mut part = [C64::default(); LANES];
                    for &v in chunk {
                        for l in 0..LANES {
                            part[l] += v * rot[l];
                            rot[l] *= step[l];
                        }
                    }
                    for l in 0..g {
                        acc[l] += part[l];
                    }
                }
                (0..g)
                    .map(|l| acc[l] * dx * C64::from_polar(1.0, -group[l] * x0))
                    .collect::<Vec<_>>()
            })
            .collect()
    }

    /// Evaluate the operator on the fine grid up to `out_max` and at `etas`.
    pub fn evaluate(&self, factors: &[&dyn Factor], etas: &[f64]) -> Result<Evaluation> {
        let plan = &self.plan;
        let eq = plan.spec.equation;
        let k = eq.degree() as i32;
        let norm = (2.0 * PI).powi(k - 1);
        let (mut prod, models) = self.product(factors)?;
        if let Some((i, _)) = prod.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { xi: plan.x0 + i as f64 * plan.dx });
        }
        let op = |eta: f64, transform: C64| norm * C64::from_polar(1.0, -eq.modulation(eta)) * transform;
        let direct = self.direct(&prod, etas);
        let at: Vec<C64> = etas
            .iter()
            .zip(direct)
            .map(|(&eta, d)| op(eta, d + self.outside(&models, eta)))
            .collect();
        self.forward.process(&mut prod);
        let n_max = ((plan.spec.out_max * 1.001) / plan.h).ceil() as usize;
        let n_max = n_max.min(plan.n / 2 - 1);
        // the model tail matters only near η = 0, where it decays like 1/η
        let near = ((2.0 / plan.h).ceil() as usize).min(n_max);
        let fine = |sign: f64| -> Vec<C64> {
            (0..=n_max)
                .into_par_iter()
                .map(|n| {
                    let eta = sign * n as f64 * plan.h;
                    let idx = if sign > 0.0 || n == 0 { n } else { plan.n - n };
                    let mut t = plan.dx * C64::from_polar(1.0, -eta * plan.x0) * prod[idx];
                    if n <= near {
                        t += self.outside(&models, eta);
                    }
                    op(eta, t)
                })
                .collect()
        };
        let fine_pos = fine(1.0);
        let fine_neg = fine(-1.0);
        Ok(Evaluation { h: plan.h, fine_pos, fine_neg, at })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laguerre_integrates_polynomials() {
        let rule = gauss_laguerre(48);
        let m2: f64 = rule.iter().map(|(t, w)| w * t * t).sum();
        assert!((m2 - 2.0).abs() < 1e-10);
        let m0: f64 = rule.iter().map(|(_, w)| w).sum();
        assert!((m0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn smooth_sizes() {
        assert!(is_smooth(3_840_000));
        assert_eq!(next_smooth(1001), 1024);
    }

    #[test]
    fn taper_limits() {
        let t = Truncation { start: 1.0, end: 2.0 };
        assert_eq!(t.weight(0.5), 1.0);
        assert_eq!(t.weight(2.5), 0.0);
        assert!((t.weight(1.5) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn model_transform_matches_quadrature() {
        // (1/2π)∫_0^∞ ξ^{−1/2}(log ξ)e^{−ξ}e^{ixξ}dξ against a substituted trapezoid sum
        let m = Model { scale: 1.0, terms: vec![(1.0, 0.5, C64::new(1.0, 0.0), true), (-1.0, 1.5, C64::new(0.3, 0.2), false)] };
        let x = 1.7;
        let n = 400_000;
        let umax: f64 = 8.0;
        let du = umax / n as f64;
        let mut sum = C64::default();
        for i in 1..n {
            let u = i as f64 * du;
            let xi = u * u;
            // ξ = u², dξ = 2u du, ξ^{−1/2} = 1/u
            let plus = 2.0 * xi.ln() * (-xi).exp() * C64::from_polar(1.0, x * xi);
            let minus = C64::new(0.3, 0.2) * 2.0 * xi * (-xi).exp() * C64::from_polar(1.0, -x * xi);
            sum += (plus + minus) * du;
        }
        let quad = sum / (2.0 * PI);
        let exact = m.phys(C64::new(x, 0.0));
        assert!((quad - exact).norm() < 1e-4, "{quad} vs {exact}");
    }
}
