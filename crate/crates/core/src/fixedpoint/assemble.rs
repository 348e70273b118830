//! One application of the profile map: the nonlinear density on a fine grid and
//! at the profile nodes, and the integrals that turn it into a new remainder.

use std::f64::consts::PI;

use crate::ansatz::AnsatzParams;
use crate::oscillatory::{Engine, PlanSpec, ProfileFactor};
use crate::profile_space::{Equation, FrequencyGrid, Origin, Profile};
use crate::{Error, Result, C64};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Multiplier turning the operator value into the density `z′ + S′`.
/// NLS is handled separately because of its `1/η`.
fn density_factor(eq: Equation, eta: f64) -> C64 {
    let a = eta.abs();
    match eq {
        Equation::Kdv4 => -I * (3.0 / (8.0 * PI.powi(3))) * a.cbrt(),
        Equation::Mkdv => -I * (3.0 / (4.0 * PI * PI)),
        Equation::Mbo => I / (2.0 * PI * PI) * a.sqrt(),
        Equation::Nls => I / (2.0 * PI * PI),
    }
}

/// Cumulative trapezoid `∫_0^{nh}` of uniformly sampled values.
struct Running {
    h: f64,
    vals: Vec<C64>,
    cum: Vec<C64>,
}

impl Running {
    fn new(h: f64, vals: Vec<C64>) -> Self {
        let mut cum = Vec::with_capacity(vals.len());
        let mut acc = C64::default();
        cum.push(acc);
        for w in vals.windows(2) {
            acc += (w[0] + w[1]) * (0.5 * h);
            cum.push(acc);
        }
        Running { h, vals, cum }
    }

    /// `∫_0^x`, closing the last partial step with the exact value at `x`.
    fn at(&self, x: f64, vx: C64) -> C64 {
        let n = ((x / self.h).floor() as usize).min(self.vals.len() - 1);
        let rest = x - n as f64 * self.h;
        self.cum[n] + (self.vals[n] + vx) * (0.5 * rest)
    }

    /// Linear interpolation of the samples.
    fn value_at(&self, x: f64) -> C64 {
        let t = x / self.h;
        let n = (t.floor() as usize).min(self.vals.len() - 2);
        let f = t - n as f64;
        self.vals[n] * (1.0 - f) + self.vals[n + 1] * f
    }

    fn total(&self) -> C64 {
        *self.cum.last().expect("non-empty")
    }

    fn end(&self) -> f64 {
        (self.vals.len() - 1) as f64 * self.h
    }
}

/// `∫_Ξ^∞` of the excess density beyond the sampled range `[0, Ξ]`.
///
/// The excess carries oscillating terms whose tails are negligible and a smooth
/// part decaying faster than `1/η`. Window means over `[x, 1.1x]` suppress the
/// oscillations; a power law `C·η^{−p}` (`1.05 ≤ p ≤ 8`) fitted to the means on
/// `[Ξ/10, Ξ]` is integrated in closed form.
fn tail_integral(r: &Running) -> C64 {
    let xi = r.end();
    let windows = 24;
    let pts: Vec<(f64, C64)> = (0..windows)
        .filter_map(|k| {
            let a = xi / 10.0 * (10.0 / 1.1f64).powf(k as f64 / (windows - 1) as f64);
            let b = (1.1 * a).min(xi);
            if b - a < 4.0 * r.h {
                return None;
            }
            let mean = (r.at(b, r.value_at(b)) - r.at(a, r.value_at(a))) / (b - a);
            (mean.norm() > 0.0).then_some(((a * b).sqrt(), mean))
        })
        .collect();
    if pts.len() < 8 {
        return C64::default();
    }
    let n = pts.len() as f64;
    let (sx, sy, sxx, sxy) = pts.iter().fold((0.0, 0.0, 0.0, 0.0), |acc, (e, v)| {
        let (x, y) = (e.ln(), v.norm().ln());
        (acc.0 + x, acc.1 + y, acc.2 + x * x, acc.3 + x * y)
    });
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let p = (-slope).clamp(1.05, 8.0);
    // window mean of η^{−p} over [a, 1.1a], with a = e/√1.1
    let basis = |e: f64| {
        let a = e / 1.1f64.sqrt();
        let b = 1.1 * a;
        (a.powf(1.0 - p) - b.powf(1.0 - p)) / ((p - 1.0) * (b - a))
    };
    let (num, den) = pts.iter().fold((C64::default(), 0.0), |acc, (e, v)| {
        let w = basis(*e);
        (acc.0 + v * w, acc.1 + w * w)
    });
    let c = num / den;
    c * xi.powf(1.0 - p) / (p - 1.0)
}

/// Density samples for one profile.
pub struct Density {
    pub h: f64,
    /// `D(n·h)` (regularized by `α/η` for NLS).
    pub fine_pos: Vec<C64>,
    pub fine_neg: Vec<C64>,
    /// Unregularized `D` at the profile nodes.
    pub nodes_pos: Vec<C64>,
    pub nodes_neg: Vec<C64>,
    /// NLS: `α` with `D ≈ α/η` near 0.
    pub log_coeff: C64,
}

/// Result of one profile-map application.
pub struct Applied {
    pub profile: Profile,
    /// `c(A, z)` (KDV4, MKDV), the prescribed `c` (MBO), or `c₊` (NLS).
    pub c: C64,
    /// NLS: `c₋`.
    pub c_neg: Option<C64>,
    /// MBO: the amplitude `Θ` assigns to the current profile and parameters.
    pub theta: Option<C64>,
}

/// Owns the pseudo-spectral engine for one equation and grid.
pub struct Assembler {
    pub equation: Equation,
    pub grid: FrequencyGrid,
    engine: Engine,
}

impl Assembler {
    pub fn new(equation: Equation, grid: FrequencyGrid) -> Result<Self> {
        let engine = Engine::new(PlanSpec::for_profiles(equation, grid.far_cut()))?;
        Ok(Assembler { equation, grid, engine })
    }

    /// Physical FFT size of the underlying engine.
    pub fn fft_size(&self) -> usize {
        self.engine.plan.n
    }

    /// The density `z′ + S′` of the profile equation for `S_A + z`.
    pub fn density(&self, z: &Profile, s: &AnsatzParams) -> Result<Density> {
        let eq = self.equation;
        let nodes = self.grid.nodes();
        let trivial = s.amplitude == C64::default()
            && z.log_coeff == C64::default()
            && z.pos.origin == Origin::default()
            && z.samples().iter().all(|(_, v, _)| *v == C64::default());
        let plan = &self.engine.plan;
        if trivial {
            // every factor vanishes identically
            let n_fine = ((plan.spec.out_max * 1.001) / plan.h).ceil() as usize + 1;
            let zeros = vec![C64::default(); n_fine];
            return Ok(Density {
                h: plan.h,
                fine_pos: zeros.clone(),
                fine_neg: zeros,
                nodes_pos: vec![C64::default(); nodes.len()],
                nodes_neg: vec![C64::default(); nodes.len()],
                log_coeff: C64::default(),
            });
        }
        let factor = ProfileFactor { profile: z, ansatz: s };
        let k = eq.degree();
        let factors: Vec<&dyn crate::oscillatory::Factor> = vec![&factor as &dyn crate::oscillatory::Factor; k];
        let mut etas: Vec<f64> = nodes.to_vec();
        let two_sided = eq == Equation::Nls;
        if two_sided {
            etas.extend(nodes.iter().map(|x| -x));
            etas.push(0.0);
        }
        let ev = self.engine.evaluate(&factors, &etas)?;
        let h = ev.h;
        let m = nodes.len();
        if eq != Equation::Nls {
            let scale = |sign: f64, vals: &[C64]| -> Vec<C64> {
                vals.iter().enumerate().map(|(n, v)| v * density_factor(eq, sign * n as f64 * h)).collect()
            };
            let nodes_pos = nodes.iter().zip(&ev.at).map(|(&x, v)| v * density_factor(eq, x)).collect();
            return Ok(Density {
                h,
                fine_pos: scale(1.0, &ev.fine_pos),
                fine_neg: scale(-1.0, &ev.fine_neg),
                nodes_pos,
                nodes_neg: Vec::new(),
                log_coeff: C64::default(),
            });
        }
        let pre = density_factor(eq, 1.0);
        let t0 = ev.at[2 * m];
        let alpha = pre * t0;
        let reg = |sign: f64, vals: &[C64]| -> Vec<C64> {
            let mut out: Vec<C64> = vals
                .iter()
                .enumerate()
                .map(|(n, v)| if n == 0 { C64::default() } else { pre * (v - t0) / (sign * n as f64 * h) })
                .collect();
            if out.len() > 1 {
                out[0] = out[1];
            }
            out
        };
        let mut fine_pos = reg(1.0, &ev.fine_pos);
        let mut fine_neg = reg(-1.0, &ev.fine_neg);
        // D_reg is continuous at 0; use the two one-sided neighbours
        let mid = (fine_pos[1] + fine_neg[1]) * 0.5;
        fine_pos[0] = mid;
        fine_neg[0] = mid;
        let nodes_pos = nodes.iter().zip(&ev.at[..m]).map(|(&x, v)| pre * v / x).collect();
        let nodes_neg = nodes.iter().zip(&ev.at[m..2 * m]).map(|(&x, v)| -pre * v / x).collect();
        Ok(Density { h, fine_pos, fine_neg, nodes_pos, nodes_neg, log_coeff: alpha })
    }

    /// One application of the profile map for given ansatz parameters.
    ///
    /// `c_given` is the prescribed zero-frequency value (MBO); the other
    /// equations compute their constants from the density.
    pub fn apply(&self, z: &Profile, s: &AnsatzParams, c_given: Option<C64>) -> Result<Applied> {
        let eq = self.equation;
        if eq != s.equation || eq != z.equation {
            return Err(Error::Config("profile, ansatz and assembler disagree on the equation".into()));
        }
        let d = self.density(z, s)?;
        match eq {
            Equation::Nls => Ok(self.assemble_nls(z, s, &d)),
            _ => Ok(self.assemble_hermitian(z, s, &d, c_given)),
        }
    }

    fn assemble_hermitian(&self, z: &Profile, s: &AnsatzParams, d: &Density, c_given: Option<C64>) -> Applied {
        let eq = self.equation;
        let nodes = self.grid.nodes();
        let h = d.h;
        let dens = Running::new(h, d.fine_pos.clone());
        let excess: Vec<C64> = d.fine_pos.iter().enumerate().map(|(n, v)| v - s.eval_deriv(n as f64 * h)).collect();
        let exc = Running::new(h, excess);
        let tail = tail_integral(&exc);
        // ∫_x^∞ (D − S′): S′ in closed form, since quadrature across the cutoff ramp is biased
        let end = exc.end();
        let s_end = s.eval(end);
        let beyond = |x: f64, dx: C64| dens.total() - dens.at(x, dx) - (s_end - s.eval(x)) + tail;
        let i1 = self.grid.index_of(1.0).expect("grid contains 1");
        let f1 = dens.at(1.0, d.nodes_pos[i1]);
        let b1 = beyond(1.0, d.nodes_pos[i1]);
        debug_assert!(exc.end() >= self.grid.far_cut() * 0.999);
        let (c, theta) = match c_given {
            Some(c) => {
                // Θ: S(1) = A + (oscillating terms at 1) must equal c + ∫_0^1 D + ∫_1^∞ (D − S′)
                let osc = if eq == Equation::Mbo { s.eval(1.0) - s.amplitude } else { C64::default() };
                (c, Some(c + f1 + b1 - osc))
            }
            None => (s.eval(1.0) - f1 - b1, None),
        };
        let mut zs = Vec::with_capacity(nodes.len());
        let mut dzs = Vec::with_capacity(nodes.len());
        for (i, &x) in nodes.iter().enumerate() {
            let dv = d.nodes_pos[i];
            let sp = s.eval_deriv(x);
            let v = if x <= 1.0 { c - s.eval(x) + dens.at(x, dv) } else { -beyond(x, dv) };
            zs.push(v);
            dzs.push(dv - sp);
        }
        let origin = Origin { value: c, slope: if eq.weight_exponent() > 0.0 { C64::default() } else { d.fine_pos[0] } };
        let profile = z.with_samples((zs, dzs, origin), None, C64::default());
        Applied { profile, c, c_neg: None, theta }
    }

    fn assemble_nls(&self, z: &Profile, s: &AnsatzParams, d: &Density) -> Applied {
        let nodes = self.grid.nodes();
        let h = d.h;
        let alpha = d.log_coeff;
        let i1 = self.grid.index_of(1.0).expect("grid contains 1");
        let amp = s.amplitude;
        // side σ: u ↦ quantities at ξ = σu
        let side = |sigma: f64, fine: &[C64], at_nodes: &[C64]| {
            let reg = Running::new(h, fine.to_vec());
            let excess: Vec<C64> = fine
                .iter()
                .enumerate()
                .map(|(n, v)| {
                    let u = n as f64 * h;
                    if n == 0 {
                        return C64::default();
                    }
                    // unregularized D(σu) = D_reg + α/(σu)
                    v + alpha / (sigma * u) - s.eval_deriv(sigma * u)
                })
                .collect();
            let exc = Running::new(h, excess);
            let tail = tail_integral(&exc);
            let reg_at = |i: usize| at_nodes[i] - alpha / (sigma * nodes[i]);
            // ∫_u^∞ (D − S′)(σv) dv, with the log and S′ parts in closed form
            let end = exc.end();
            let s_end = s.eval(sigma * end);
            let beyond = |i: usize| {
                let u = nodes[i];
                reg.total() - reg.at(u, reg_at(i)) + alpha * sigma * (end / u).ln() - (s_end - s.eval(sigma * u)) * sigma + tail
            };
            // ∫_0^u D_reg(σv) dv
            let inside = |i: usize| reg.at(nodes[i], reg_at(i));
            let b1 = beyond(i1);
            let r1 = inside(i1);
            // c₊ = A − ∫_1^∞ E;  c₋ = A + ∫_{−∞}^{−1} E = A + ∫_1^∞ E(−v) dv
            let c = amp - sigma * b1;
            let mut zs = Vec::with_capacity(nodes.len());
            let mut dzs = Vec::with_capacity(nodes.len());
            for (i, &u) in nodes.iter().enumerate() {
                let xi = sigma * u;
                let v = if u <= 1.0 {
                    // ∫_{σ}^{σu} D dη = σ(R(u) − R(1)) + α log u
                    c - s.eval(xi) + alpha * u.ln() + (inside(i) - r1) * sigma
                } else {
                    -sigma * beyond(i)
                };
                zs.push(v);
                dzs.push(at_nodes[i] - s.eval_deriv(xi));
            }
            // z(σu) − α log u → c − σR(1) as u → 0, with d/du slope σ·D_reg(0)
            let origin = Origin { value: c - r1 * sigma, slope: fine[0] * sigma };
            (c, (zs, dzs, origin))
        };
        let (c_pos, pos) = side(1.0, &d.fine_pos, &d.nodes_pos);
        let (c_neg, neg) = side(-1.0, &d.fine_neg, &d.nodes_neg);
        let profile = z.with_samples(pos, Some(neg), alpha);
        Applied { profile, c: c_pos, c_neg: Some(c_neg), theta: None }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn running_integral_of_linear_function() {
        let h = 0.01;
        let vals: Vec<C64> = (0..=100).map(|n| C64::new(n as f64 * h, 0.0)).collect();
        let r = Running::new(h, vals);
        assert!((r.total().re - 0.5).abs() < 1e-12);
        assert!((r.at(0.505, C64::new(0.505, 0.0)).re - 0.5 * 0.505 * 0.505).abs() < 1e-12);
    }

    #[test]
    fn power_tail_is_recovered() {
        let h = 0.01;
        let vals: Vec<C64> = (0..=10_000)
            .map(|n| {
                let x = (n as f64 * h).max(h);
                C64::new(2.0, -1.0) * x.powf(-1.5)
            })
            .collect();
        let t = tail_integral(&Running::new(h, vals));
        // ∫_100^∞ (2 − i) x^{−1.5} dx = (2 − i)·2/10
        assert!((t - C64::new(0.4, -0.2)).norm() < 1e-4, "{t}");
    }

    #[test]
    fn oscillating_excess_has_no_tail() {
        let h = 0.002;
        let vals: Vec<C64> = (0..=50_000)
            .map(|n| {
                let x = (n as f64 * h).max(h);
                C64::from_polar(1.0 / x, x * x / 2.0)
            })
            .collect();
        // the exact tail is about e^{iΞ²/2}·i/Ξ², of size 1e-4
        let t = tail_integral(&Running::new(h, vals));
        assert!(t.norm() < 3e-4, "{t}");
    }
}
