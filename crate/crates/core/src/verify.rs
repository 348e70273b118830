//! Numerical checks of decay laws, asymptotic leading terms and kernel bounds.
//!
//! Each check returns a typed report and a [`Verdict`] that serializes to
//! `{name, pass, measured, threshold, window}`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::ansatz::{chi, mbo_phase_params, mbo_phase_params_matched, AnsatzParams, Coefficients};
use crate::fixedpoint::Assembler;
use crate::oscillatory::{
    eval_cubic_mkdv, eval_i, eval_i_regions, eval_m, AnsatzFactor, Bump, Cutoff, Factor, Probed, QuadratureSpec,
};
use crate::profile_space::japanese;
use crate::{Error, Profile, Result, C64};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Pass/fail record of one check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub measured: f64,
    pub threshold: f64,
    pub window: Option<(f64, f64)>,
}

impl Verdict {
    pub fn at_most(name: &str, measured: f64, threshold: f64, window: Option<(f64, f64)>) -> Self {
        Verdict { name: name.to_string(), pass: measured <= threshold, measured, threshold, window }
    }
}

/// Least-squares slope of `log|f|` against `log η`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub window: (f64, f64),
    pub fitted_exponent: f64,
    pub r_squared: f64,
    pub samples: usize,
    /// Samples inside the window dropped for being zero or non-finite.
    pub excluded: usize,
}

/// Fit `|f(η)| ≈ C η^p` on `window` from `(η, |f|)` pairs.
pub fn check_decay_exponent(samples: &[(f64, f64)], window: (f64, f64)) -> Result<SlopeFit> {
    let (lo, hi) = window;
    if !(lo > 0.0 && hi >= 4.0 * lo) {
        return Err(Error::Fit(format!("window [{lo}, {hi}] must satisfy 0 < lo and hi ≥ 4·lo")));
    }
    let inside: Vec<&(f64, f64)> = samples.iter().filter(|(x, _)| *x >= lo && *x <= hi).collect();
    let pts: Vec<(f64, f64)> = inside
        .iter()
        .filter(|(_, v)| *v > 0.0 && v.is_finite())
        .map(|(x, v)| (x.ln(), v.ln()))
        .collect();
    let excluded = inside.len() - pts.len();
    if pts.len() < 8 {
        return Err(Error::Fit(format!("{} usable samples in [{lo}, {hi}], need 8", pts.len())));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(SlopeFit { window, fitted_exponent: slope, r_squared, samples: pts.len(), excluded })
}

/// `n` log-spaced points on `[lo, hi]`.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let r = (hi / lo).ln();
    (0..n).map(|i| lo * (r * i as f64 / (n - 1).max(1) as f64).exp()).collect()
}

/// "Bounded under doubling": the largest normalized value on the top octave is at
/// most twice the largest on the octave below.
fn doubling_ratio(series: &[(f64, f64)], top: f64) -> f64 {
    // upper octave (top/2, top], lower octave [top/4, top/2]
    let max_on = |a: f64, b: f64, open: bool| {
        series
            .iter()
            .filter(|(x, _)| (if open { *x > a * (1.0 + 1e-12) } else { *x >= a * (1.0 - 1e-12) }) && *x <= b * (1.0 + 1e-12))
            .map(|p| p.1)
            .fold(0.0, f64::max)
    };
    let upper = max_on(top / 2.0, top, true);
    let lower = max_on(top / 4.0, top / 2.0, false);
    if lower > 0.0 {
        upper / lower
    } else {
        f64::INFINITY
    }
}

/// Decay of a converged remainder and its derivative on the top decade of the grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub value: SlopeFit,
    pub deriv: SlopeFit,
    pub kappa: f64,
    pub verdicts: Vec<Verdict>,
}

/// `|z|` slope ≤ −κ + 0.05 and `|z′|` slope ≤ −(κ+1) + 0.05 on `[far/10, far]`.
pub fn check_profile_decay(z: &Profile) -> Result<DecayReport> {
    let far = z.grid.far_cut();
    let window = (far / 10.0, far);
    let two = z.two_sided_samples();
    // both signs share the weight, so take the larger of the two at each |ξ|
    let side = |f: &dyn Fn(&(f64, C64, C64)) -> f64| -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = two.iter().filter(|s| s.0 > 0.0).map(|s| (s.0, f(s))).collect();
        for s in two.iter().filter(|s| s.0 < 0.0) {
            if let Some(p) = out.iter_mut().find(|p| (p.0 + s.0).abs() <= 1e-12 * p.0) {
                p.1 = p.1.max(f(s));
            }
        }
        out
    };
    let value = check_decay_exponent(&side(&|s| s.1.norm()), window)?;
    let deriv = check_decay_exponent(&side(&|s| s.2.norm()), window)?;
    let k = z.kappa;
    let verdicts = vec![
        Verdict::at_most("remainder decay exponent", value.fitted_exponent, -k + 0.05, Some(window)),
        Verdict::at_most("derivative decay exponent", deriv.fitted_exponent, -(k + 1.0) + 0.05, Some(window)),
    ];
    Ok(DecayReport { value, deriv, kappa: k, verdicts })
}

/// `(∫_0^1 e^{2iηy²} dy)²`, the unit-square integral of `e^{2iη(y₂²+y₃²)}`.
pub fn y_square_integral(eta: f64) -> C64 {
    // composite Gauss–Legendre, ten nodes per panel, panels short against the phase
    const X: [f64; 5] = [0.148_874_338_981_631_2, 0.433_395_394_129_247_2, 0.679_409_568_299_024_4, 0.865_063_366_688_984_5, 0.973_906_528_517_171_7];
    const W: [f64; 5] = [0.295_524_224_714_752_9, 0.269_266_719_309_996_4, 0.219_086_362_515_982, 0.149_451_349_150_580_6, 0.066_671_344_308_688_1];
    let panels = ((4.0 * eta.abs()).ceil() as usize).max(16);
    let h = 1.0 / panels as f64;
    let f = |y: f64| C64::from_polar(1.0, 2.0 * eta * y * y);
    let mut s = C64::default();
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * h;
        for (x, w) in X.iter().zip(W) {
            s += (f(mid + 0.5 * h * x) + f(mid - 0.5 * h * x)) * (0.5 * h * w);
        }
    }
    s * s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct YLeadingRow {
    pub eta: f64,
    pub exact: C64,
    pub leading: C64,
    pub rel_error: f64,
    /// `rel_error · η / log²η`.
    pub normalized: f64,
}

/// Leading term `(π/8η)e^{iπ/2}` of the unit-square Fresnel integral.
pub fn check_y_leading(etas: &[f64]) -> (Vec<YLeadingRow>, Verdict) {
    let rows: Vec<YLeadingRow> = etas
        .iter()
        .map(|&eta| {
            let exact = y_square_integral(eta);
            let leading = I * (PI / (8.0 * eta));
            let rel_error = (exact - leading).norm() / leading.norm();
            YLeadingRow { eta, exact, leading, rel_error, normalized: rel_error * eta / eta.ln().powi(2) }
        })
        .collect();
    let series: Vec<(f64, f64)> = rows.iter().map(|r| (r.eta, r.normalized)).collect();
    let top = etas.iter().cloned().fold(0.0, f64::max);
    let ratio = doubling_ratio(&series, top);
    let window = etas.iter().cloned().fold(None, |w: Option<(f64, f64)>, e| Some(w.map_or((e, e), |(a, b)| (a.min(e), b.max(e)))));
    (rows, Verdict::at_most("unit-square Fresnel leading term, doubling ratio", ratio, 2.0, window))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MboAsymptoticRow {
    pub eta: f64,
    pub value: C64,
    /// `|R|·η^{7/2}/|A|³` with the printed ansatz and leading terms.
    pub normalized_printed: f64,
    /// The same with the constants matched to the stationary-phase expansion.
    pub normalized_matched: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MboAsymptotics {
    pub amplitude: C64,
    pub c: f64,
    pub rows: Vec<MboAsymptoticRow>,
    pub verdict_printed: Verdict,
    pub verdict_matched: Verdict,
}

/// Leading terms of `I[S]`: the resonant `(η,η,−η)` contribution `3π|A|²A` and
/// the `(η/3,η/3,η/3)` stationary point with coefficient `osc·A³`.
fn mbo_leading(s: &AnsatzParams, eta: f64, osc: C64) -> C64 {
    let a = s.rate;
    let amp = s.amplitude;
    let l = eta.ln();
    let lead = 3.0 * PI * amp.norm_sqr() * amp * (I * a * l).exp();
    let second = osc * amp.powi(3) * (-I * 3.0 * a * 3f64.ln()).exp() * (I * (2.0 * eta * eta / 3.0 + 3.0 * a * l)).exp();
    (lead + second) / eta.powf(1.5)
}

fn non_increasing(vals: &[f64]) -> f64 {
    // largest ratio of a later value to an earlier one
    let mut worst = 0.0f64;
    for i in 0..vals.len() {
        for j in i + 1..vals.len() {
            if vals[i] > 0.0 {
                worst = worst.max(vals[j] / vals[i]);
            }
        }
    }
    worst
}

/// Residual `R[S] = I[S] − leading terms`, normalized by `η^{−7/2}|A|³`.
///
/// The printed form uses `a, B` from the closed forms and the second leading
/// term `iπ√3 A³`; the matched form uses `−3πi A³`, which is what the operator
/// produces. Each verdict asks for a non-increasing normalized residual.
pub fn check_mbo_asymptotics(amp: C64, c: f64, etas: &[f64], q: &QuadratureSpec) -> Result<MboAsymptotics> {
    if etas.iter().any(|e| *e < 5.0) {
        return Err(Error::Config("asymptotic checks need η ≥ 5".into()));
    }
    let printed = AnsatzParams::mbo(amp, c, Coefficients::Printed);
    let matched = AnsatzParams::mbo(amp, c, Coefficients::Matched);
    let eval = |s: &AnsatzParams| -> Result<Vec<C64>> {
        let f = AnsatzFactor(s);
        Ok(eval_i([&f, &f, &f], etas, q)?.into_iter().map(|e| e.value).collect())
    };
    let vp = eval(&printed)?;
    let vm = eval(&matched)?;
    let a3 = amp.norm().powi(3);
    let rows: Vec<MboAsymptoticRow> = etas
        .iter()
        .zip(vp.iter().zip(&vm))
        .map(|(&eta, (&p, &m))| {
            let norm = |r: C64| if a3 > 0.0 { r.norm() * eta.powf(3.5) / a3 } else { 0.0 };
            let rp = p - mbo_leading(&printed, eta, I * PI * 3f64.sqrt());
            let rm = m - mbo_leading(&matched, eta, -3.0 * PI * I);
            MboAsymptoticRow { eta, value: m, normalized_printed: norm(rp), normalized_matched: norm(rm) }
        })
        .collect();
    let window = Some((etas.iter().cloned().fold(f64::INFINITY, f64::min), etas.iter().cloned().fold(0.0, f64::max)));
    let np: Vec<f64> = rows.iter().map(|r| r.normalized_printed).collect();
    let nm: Vec<f64> = rows.iter().map(|r| r.normalized_matched).collect();
    // non-increasing up to quadrature noise
    let verdict_printed = Verdict::at_most("MBO residual, printed constants (max later/earlier)", non_increasing(&np), 1.05, window);
    let verdict_matched = Verdict::at_most("MBO residual, matched constants (max later/earlier)", non_increasing(&nm), 1.05, window);
    Ok(MboAsymptotics { amplitude: amp, c, rows, verdict_printed, verdict_matched })
}

/// Printed and matched MBO phase constants side by side.
pub fn mbo_constants(amp: C64, c: f64) -> [(f64, C64); 2] {
    [mbo_phase_params(amp, c), mbo_phase_params_matched(amp, c)]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HllRow {
    pub eta: f64,
    pub high_low_low: C64,
    /// `(π/(4η^{3/2}))g₁(η)g₂(0)g₃(0)`.
    pub leading_printed: C64,
    /// `(π/η^{3/2})g₁(η)g₂(0)g₃(0)`.
    pub leading_matched: C64,
    /// `|difference|·η^{5/2}/log²η` against each leading term.
    pub normalized_printed: f64,
    pub normalized_matched: f64,
    /// The matched difference without the `log²η`.
    pub normalized_matched_plain: f64,
}

/// High×low×low part of `I` for `g₁ = χ`, `g₂ = g₃` a unit bump at 0 of half-width 1.
pub fn check_hll_leading(etas: &[f64], q: &QuadratureSpec) -> Result<(Vec<HllRow>, Verdict)> {
    let g1 = Cutoff { two_sided: false };
    let low = Bump::new(0.0, 1.0, C64::new(1.0, 0.0));
    let regions = eval_i_regions([&g1, &low, &low], etas, q)?;
    let g0 = low.value(0.0);
    let rows: Vec<HllRow> = regions
        .iter()
        .map(|r| {
            let eta = r.eta;
            let base = g1.value(eta) * g0 * g0 / eta.powf(1.5);
            let lp = base * (PI / 4.0);
            let lm = base * PI;
            let scale = eta.powf(2.5);
            let l2 = eta.ln().powi(2);
            HllRow {
                eta,
                high_low_low: r.high_low_low,
                leading_printed: lp,
                leading_matched: lm,
                normalized_printed: (r.high_low_low - lp).norm() * scale / l2,
                normalized_matched: (r.high_low_low - lm).norm() * scale / l2,
                normalized_matched_plain: (r.high_low_low - lm).norm() * scale,
            }
        })
        .collect();
    let series: Vec<(f64, f64)> = rows.iter().map(|r| (r.eta, r.normalized_matched)).collect();
    let top = etas.iter().cloned().fold(0.0, f64::max);
    let window = Some((top / 4.0, top));
    Ok((rows, Verdict::at_most("high×low×low leading term, doubling ratio", doubling_ratio(&series, top), 2.0, window)))
}

/// `|ξ|^{−1/3}χ(|ξ|)`: the smooth factor behind the kernel `K`.
fn weighted_cutoff(xi: f64) -> C64 {
    let a = xi.abs();
    let c = chi(a);
    if c == 0.0 {
        C64::default()
    } else {
        C64::new(c / a.cbrt(), 0.0)
    }
}

/// `K(ζ) = ∬ e^{−i(ζ³−Ση_j³)} Π χ(|η_j|)|η_j|^{−1/3}` over `η₁+η₂+η₃ = ζ`.
pub fn kernel_k(zetas: &[f64], q: &QuadratureSpec) -> Result<Vec<C64>> {
    let f = Probed { f: weighted_cutoff, band: None };
    let zmax = zetas.iter().fold(0.0f64, |m, z| m.max(z.abs()));
    let mut q = q.clone();
    // stationary points sit at |η_j| ≤ |ζ|; the tapered region beyond is non-stationary
    q.truncation_radius.get_or_insert(1.5 * zmax + 8.0);
    Ok(eval_cubic_mkdv([&f, &f, &f], zetas, &q)?.into_iter().map(|e| e.value).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelRow {
    pub zeta: f64,
    pub value: C64,
    /// `|K(ζ)|·⟨ζ⟩²`.
    pub weighted: f64,
    /// Centered difference, see [`kernel_step`].
    pub deriv: f64,
    /// `|K(−ζ) − conj K(ζ)|`.
    pub symmetry_defect: f64,
}

/// Difference step `min(10⁻³⟨ζ⟩, 0.05/⟨ζ⟩²)`: the phase of `K` turns at rate
/// `3ζ²`, so a step proportional to `⟨ζ⟩` alone aliases at large `ζ`.
pub fn kernel_step(zeta: f64) -> f64 {
    let j = japanese(zeta);
    (1e-3 * j).min(0.05 / (j * j))
}

/// `|K|⟨ζ⟩²` and `|K′|` bounded under doubling on the given points.
pub fn check_k_kernel(zetas: &[f64], q: &QuadratureSpec) -> Result<(Vec<KernelRow>, Vec<Verdict>)> {
    let mut pts = Vec::with_capacity(4 * zetas.len());
    for &z in zetas {
        let h = kernel_step(z);
        pts.extend([z, z - h, z + h, -z]);
    }
    let vals = kernel_k(&pts, q)?;
    let rows: Vec<KernelRow> = zetas
        .iter()
        .zip(vals.chunks(4))
        .map(|(&zeta, v)| {
            let h = kernel_step(zeta);
            KernelRow {
                zeta,
                value: v[0],
                weighted: v[0].norm() * japanese(zeta).powi(2),
                deriv: ((v[2] - v[1]) / (2.0 * h)).norm(),
                symmetry_defect: (v[3] - v[0].conj()).norm(),
            }
        })
        .collect();
    let series: Vec<(f64, f64)> = rows.iter().map(|r| (r.zeta, r.weighted)).collect();
    let top = zetas.iter().cloned().fold(0.0, f64::max);
    let window = Some((zetas.iter().cloned().fold(f64::INFINITY, f64::min), top));
    let derivs: Vec<(f64, f64)> = rows.iter().map(|r| (r.zeta, r.deriv)).collect();
    let verdicts = vec![
        Verdict::at_most("kernel |K|<ζ>², doubling ratio", doubling_ratio(&series, top), 2.0, window),
        Verdict::at_most("kernel |K'|, doubling ratio", doubling_ratio(&derivs, top), 2.0, window),
    ];
    Ok((rows, verdicts))
}

/// `M[χ,χ,χ,χ](η)` with the one-sided cutoff; the domain is the compact simplex
/// `η_j ≥ 1/2`.
pub fn m_constant(etas: &[f64], q: &QuadratureSpec) -> Result<Vec<C64>> {
    let top = etas.iter().fold(2.0f64, |m, e| m.max(e.abs()));
    let f = Probed { f: |xi: f64| C64::new(chi(xi), 0.0), band: Some((0.5, top)) };
    Ok(eval_m([&f, &f, &f, &f], etas, q)?.into_iter().map(|e| e.value).collect())
}

/// Slope of `|M_constant|` on `window` at most `−17/6 + 0.3`.
pub fn check_m_constant(window: (f64, f64), points: usize, q: &QuadratureSpec) -> Result<(SlopeFit, Verdict)> {
    let etas = log_space(window.0, window.1, points);
    let vals = m_constant(&etas, q)?;
    let samples: Vec<(f64, f64)> = etas.iter().zip(&vals).map(|(e, v)| (*e, v.norm())).collect();
    let fit = check_decay_exponent(&samples, window)?;
    let v = Verdict::at_most("M constant decay exponent", fit.fitted_exponent, -17.0 / 6.0 + 0.3, Some(window));
    Ok((fit, v))
}

/// `max ⟨ξ⟩^{κ+1}|z′ + S′ − D|` over the grid nodes, where `D` is the equation's
/// density evaluated on `S + z`.
pub fn fixedpoint_residual(asm: &Assembler, z: &Profile, s: &AnsatzParams) -> Result<f64> {
    let d = asm.density(z, s)?;
    let nodes = asm.grid.nodes();
    let w = |x: f64| japanese(x).powf(z.kappa + 1.0);
    let mut worst = 0.0f64;
    for (i, &x) in nodes.iter().enumerate() {
        worst = worst.max((z.pos.dz[i] + s.eval_deriv(x) - d.nodes_pos[i]).norm() * w(x));
        if let Some(neg) = &z.neg {
            worst = worst.max((neg.dz[i] + s.eval_deriv(-x) - d.nodes_neg[i]).norm() * w(x));
        }
    }
    Ok(worst)
}

/// As [`fixedpoint_residual`], building the assembler for the profile's grid.
pub fn check_fixedpoint_residual(z: &Profile, s: &AnsatzParams) -> Result<f64> {
    let asm = Assembler::new(z.equation, z.grid.clone())?;
    fixedpoint_residual(&asm, z, s)
}
