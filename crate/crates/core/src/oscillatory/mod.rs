//! Multilinear oscillatory operators.
//!
//! For an equation with modulation `μ`, weight `s` and degree `k`, the operator
//! applied to modulated factors `g_j` is
//! `Op[g](η) = ∫_{Σ η_j = η} e^{−i(μ(η) − Σ μ(η_j))} Π |η_j|^{−s} g_j(η_j)`,
//! with the middle factor conjugated and `η_2 ↦ −η_2` for NLS. This is the
//! quartic `M` (KDV4), the cubic mKdV integrand, `I` (MBO) and `T` (NLS).

pub mod engine;
pub mod oracle;
pub mod stationary;

use serde::{Deserialize, Serialize};

use crate::ansatz::{chi, AnsatzParams};
use crate::profile_space::{Equation, Profile};
use crate::{Error, Result, C64};

pub use engine::{Engine, Evaluation, Plan, PlanSpec, Truncation};
pub use oracle::oracle_bruteforce;
pub use stationary::stationary_phase_leading;

/// Behaviour of a factor at `0±`:
/// `g ≈ value + slope·|ξ| + curvature·|ξ|² + log_coeff·log|ξ|`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LowFrequency {
    pub value: C64,
    pub slope: C64,
    pub curvature: C64,
    pub log_coeff: C64,
}

/// A modulated factor `g(ξ)` of a multilinear operator.
pub trait Factor: Sync {
    fn value(&self, xi: f64) -> C64;

    /// Zero-frequency model on the positive (`true`) or negative side.
    fn low_frequency(&self, _positive: bool) -> LowFrequency {
        LowFrequency::default()
    }

    /// Interval outside which the factor vanishes, if compact.
    fn band(&self) -> Option<(f64, f64)> {
        None
    }
}

/// `S_A + z` for a profile and its ansatz.
pub struct ProfileFactor<'a> {
    pub profile: &'a Profile,
    pub ansatz: &'a AnsatzParams,
}

impl Factor for ProfileFactor<'_> {
    fn value(&self, xi: f64) -> C64 {
        self.ansatz.eval(xi) + self.profile.evaluate(xi)
    }

    fn low_frequency(&self, positive: bool) -> LowFrequency {
        let p = self.profile;
        let log_coeff = p.log_coeff;
        match (&p.neg, positive) {
            (_, true) => LowFrequency { value: p.pos.origin.value, slope: p.pos.origin.slope, log_coeff, ..Default::default() },
            (Some(neg), false) => {
                LowFrequency { value: neg.origin.value, slope: neg.origin.slope, log_coeff, ..Default::default() }
            }
            (None, false) => LowFrequency {
                value: p.pos.origin.value.conj(),
                slope: p.pos.origin.slope.conj(),
                log_coeff: log_coeff.conj(),
                ..Default::default()
            },
        }
    }
}

/// The ansatz alone.
pub struct AnsatzFactor<'a>(pub &'a AnsatzParams);

impl Factor for AnsatzFactor<'_> {
    fn value(&self, xi: f64) -> C64 {
        self.0.eval(xi)
    }
}

/// The cutoff `χ(ξ)` on positive frequencies only, or `χ(|ξ|)` on both.
#[derive(Clone, Copy, Debug)]
pub struct Cutoff {
    pub two_sided: bool,
}

impl Factor for Cutoff {
    fn value(&self, xi: f64) -> C64 {
        if xi > 0.0 || self.two_sided {
            C64::new(chi(xi.abs()), 0.0)
        } else {
            C64::default()
        }
    }
}

/// Smooth compact bump `amp·exp(1 − 1/(1 − t²))·e^{iωξ}`, `t = (ξ − center)/half_width`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: f64,
    pub half_width: f64,
    pub amplitude: C64,
    pub shift: f64,
}

impl Bump {
    pub fn new(center: f64, half_width: f64, amplitude: C64) -> Self {
        Bump { center, half_width, amplitude, shift: 0.0 }
    }

    fn envelope(&self, xi: f64) -> (f64, f64) {
        let t = (xi - self.center) / self.half_width;
        if t.abs() >= 1.0 {
            return (0.0, 0.0);
        }
        let q = 1.0 - t * t;
        let e = (1.0 - 1.0 / q).exp();
        // d/dξ exp(1 − 1/q) = e · (−2t/q²) / half_width
        (e, e * (-2.0 * t / (q * q)) / self.half_width)
    }

    /// `g′(ξ)`.
    pub fn deriv(&self, xi: f64) -> C64 {
        let (e, de) = self.envelope(xi);
        let ph = C64::from_polar(1.0, self.shift * xi);
        self.amplitude * ph * (de + C64::new(0.0, self.shift) * e)
    }
}

impl Factor for Bump {
    fn value(&self, xi: f64) -> C64 {
        self.amplitude * self.envelope(xi).0 * C64::from_polar(1.0, self.shift * xi)
    }

    fn low_frequency(&self, positive: bool) -> LowFrequency {
        let (lo, hi) = self.band().expect("bumps are compact");
        if lo >= 0.0 || hi <= 0.0 {
            return LowFrequency::default();
        }
        let d = self.deriv(0.0);
        let step = 1e-5 * self.half_width;
        let d2 = (self.deriv(step) - self.deriv(-step)) / (2.0 * step);
        LowFrequency {
            value: self.value(0.0),
            slope: if positive { d } else { -d },
            curvature: d2 / 2.0,
            log_coeff: C64::default(),
        }
    }

    fn band(&self) -> Option<(f64, f64)> {
        Some((self.center - self.half_width, self.center + self.half_width))
    }
}

/// A closure factor whose zero-frequency model is found by probing.
pub struct Probed<F: Fn(f64) -> C64 + Sync> {
    pub f: F,
    pub band: Option<(f64, f64)>,
}

impl<F: Fn(f64) -> C64 + Sync> Factor for Probed<F> {
    fn value(&self, xi: f64) -> C64 {
        (self.f)(xi)
    }

    fn low_frequency(&self, positive: bool) -> LowFrequency {
        let s = if positive { 1.0 } else { -1.0 };
        // one-sided quadratic through three probes at d, 2d, 3d
        let d = 1e-4;
        let v = [(self.f)(s * d), (self.f)(s * 2.0 * d), (self.f)(s * 3.0 * d)];
        let curvature = (v[2] - v[1] * 2.0 + v[0]) / (2.0 * d * d);
        let slope = (v[1] - v[0]) / d - curvature * 3.0 * d;
        let value = v[0] - slope * d - curvature * d * d;
        LowFrequency { value, slope, curvature, log_coeff: C64::default() }
    }

    fn band(&self) -> Option<(f64, f64)> {
        self.band
    }
}

/// Low (`1 − χ(|ξ|)`) or high (`χ(|ξ|)`) part of a factor.
pub struct Split<'a> {
    pub inner: &'a dyn Factor,
    pub low: bool,
}

impl Factor for Split<'_> {
    fn value(&self, xi: f64) -> C64 {
        let c = chi(xi.abs());
        self.inner.value(xi) * if self.low { 1.0 - c } else { c }
    }

    fn low_frequency(&self, positive: bool) -> LowFrequency {
        if self.low {
            self.inner.low_frequency(positive)
        } else {
            LowFrequency::default()
        }
    }

    fn band(&self) -> Option<(f64, f64)> {
        match (self.inner.band(), self.low) {
            (Some((a, b)), true) => Some((a.max(-1.0), b.min(1.0))),
            (None, true) => Some((-1.0, 1.0)),
            (b, false) => b,
        }
    }
}

/// Controls for the single-frequency evaluators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Frequency radius where non-compact factors are tapered off; defaults to
    /// `max(4·max|η|, 8)`.
    pub truncation_radius: Option<f64>,
    /// Anti-aliasing oversampling of the primary evaluation.
    pub oversampling: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { rel_tol: 1e-6, abs_tol: 1e-10, truncation_radius: None, oversampling: 1.0 }
    }
}

/// A value with an error estimate from a second, finer evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub eta: f64,
    pub value: C64,
    pub error: f64,
    /// Set when the error estimate exceeds `max(rel_tol·|value|, abs_tol)`.
    pub flagged: bool,
}

fn plan_for(eq: Equation, factors: &[&dyn Factor], etas: &[f64], q: &QuadratureSpec, refine: bool) -> PlanSpec {
    let eta_max = etas.iter().fold(0.0f64, |m, e| m.max(e.abs())).max(1.0);
    let bands: Option<Vec<(f64, f64)>> = factors.iter().map(|f| f.band()).collect();
    let mut spec = match bands {
        Some(b) => {
            let lo = b.iter().map(|x| x.0).fold(f64::INFINITY, f64::min);
            let hi = b.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
            let narrow = b.iter().map(|x| x.1 - x.0).fold(f64::INFINITY, f64::min);
            let mut s = PlanSpec::for_band(eq, eta_max, lo, hi);
            s.margin = 400.0 / narrow.max(1e-6);
            s
        }
        None => {
            let r = q.truncation_radius.unwrap_or((4.0 * eta_max).max(8.0));
            let r = if refine { 1.2 * r } else { r };
            let end = 1.25 * r;
            PlanSpec {
                equation: eq,
                out_max: eta_max,
                band: (-end, end),
                truncation: Some(Truncation { start: 1.05 * r, end }),
                margin: 0.0,
                oversampling: 1.0,
            }
        }
    };
    spec.oversampling = q.oversampling * if refine { 1.5 } else { 1.0 };
    if refine {
        spec.margin *= 1.5;
    }
    spec
}

/// Evaluate the equation's operator at each `η`, with an error estimate from a
/// second evaluation on a wider, finer window.
pub fn eval_operator(eq: Equation, factors: &[&dyn Factor], etas: &[f64], q: &QuadratureSpec) -> Result<Vec<Estimate>> {
    if etas.is_empty() {
        return Ok(Vec::new());
    }
    if factors.len() != eq.degree() {
        return Err(Error::Config(format!("{eq} needs {} factors, got {}", eq.degree(), factors.len())));
    }
    let coarse = Engine::new(plan_for(eq, factors, etas, q, false))?.evaluate(factors, etas)?.at;
    let fine = Engine::new(plan_for(eq, factors, etas, q, true))?.evaluate(factors, etas)?.at;
    Ok(etas
        .iter()
        .zip(coarse.iter().zip(&fine))
        .map(|(&eta, (&v, &w))| {
            let error = (v - w).norm();
            Estimate { eta, value: v, error, flagged: error > (q.rel_tol * v.norm()).max(q.abs_tol) }
        })
        .collect())
}

/// Quartic operator `M` (KDV4).
pub fn eval_m(f: [&dyn Factor; 4], etas: &[f64], q: &QuadratureSpec) -> Result<Vec<Estimate>> {
    eval_operator(Equation::Kdv4, &f, etas, q)
}

/// Cubic mKdV operator.
pub fn eval_cubic_mkdv(f: [&dyn Factor; 3], etas: &[f64], q: &QuadratureSpec) -> Result<Vec<Estimate>> {
    eval_operator(Equation::Mkdv, &f, etas, q)
}

/// MBO operator `I`.
pub fn eval_i(g: [&dyn Factor; 3], etas: &[f64], q: &QuadratureSpec) -> Result<Vec<Estimate>> {
    eval_operator(Equation::Mbo, &g, etas, q)
}

/// NLS operator `T` (middle factor conjugated).
pub fn eval_t(h: [&dyn Factor; 3], etas: &[f64], q: &QuadratureSpec) -> Result<Vec<Estimate>> {
    eval_operator(Equation::Nls, &h, etas, q)
}

/// `I` split by frequency size of each factor (`h`: `|η_j| ≳ 1`, `l`: `|η_j| ≲ 1`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionValues {
    pub eta: f64,
    /// At least two high factors.
    pub high_high: C64,
    pub high_low_low: C64,
    pub low_high_low: C64,
    pub low_low_high: C64,
    pub low_low_low: C64,
}

impl RegionValues {
    pub fn total(&self) -> C64 {
        self.high_high + self.high_low_low + self.low_high_low + self.low_low_high + self.low_low_low
    }
}

/// `I` at each `η` together with its five-region decomposition.
pub fn eval_i_regions(g: [&dyn Factor; 3], etas: &[f64], q: &QuadratureSpec) -> Result<Vec<RegionValues>> {
    let lows: Vec<Split> = g.iter().map(|f| Split { inner: *f, low: true }).collect();
    let highs: Vec<Split> = g.iter().map(|f| Split { inner: *f, low: false }).collect();
    let mut out: Vec<RegionValues> = etas
        .iter()
        .map(|&eta| RegionValues {
            eta,
            high_high: C64::default(),
            high_low_low: C64::default(),
            low_high_low: C64::default(),
            low_low_high: C64::default(),
            low_low_low: C64::default(),
        })
        .collect();
    for mask in 0..8u32 {
        let pick = |j: usize| -> &dyn Factor {
            if mask & (1 << j) != 0 {
                &highs[j]
            } else {
                &lows[j]
            }
        };
        let vals = eval_i([pick(0), pick(1), pick(2)], etas, q)?;
        for (r, v) in out.iter_mut().zip(vals) {
            let slot = match mask {
                0 => &mut r.low_low_low,
                1 => &mut r.high_low_low,
                2 => &mut r.low_high_low,
                4 => &mut r.low_low_high,
                _ => &mut r.high_high,
            };
            *slot += v.value;
        }
    }
    Ok(out)
}
