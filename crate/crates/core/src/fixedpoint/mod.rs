//! Fixed-point construction of the remainder, the zero-frequency maps and the
//! amplitude solves that tie the ansatz to the driving parameter.
//!
//! Every equation integrates its density `D = z′ + S′` from the origin on
//! `(0, 1]` and from infinity beyond 1, where the ansatz derivative cancels the
//! resonant part of `D`. The zero-frequency value that makes the two pieces
//! agree at 1 is the data-to-scattering map.

mod assemble;

use serde::{Deserialize, Deserializer, Serialize};

pub use assemble::{Applied, Assembler, Density};

use crate::ansatz::{AnsatzParams, Coefficients};
use crate::profile_space::{distance, weighted_norm_y, weighted_norm_z};
use crate::{Equation, Error, FrequencyGrid, GridSpec, NormReport, Profile, Result, C64};

/// Accept either a real number or a `[re, im]` pair.
fn scalar_or_pair<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<C64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Scalar {
        Real(f64),
        Pair(f64, f64),
    }
    Ok(match Scalar::deserialize(d)? {
        Scalar::Real(r) => C64::new(r, 0.0),
        Scalar::Pair(r, i) => C64::new(r, i),
    })
}

/// Settings of one solve. Missing JSON fields take the equation's defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawConfig")]
pub struct SolveConfig {
    pub equation: Equation,
    pub kappa: f64,
    /// Driving parameter: `c` for mKdV, quartic KdV and MBO, `A` for NLS.
    pub amplitude: C64,
    /// Stop when successive iterates are this close in the contraction norm.
    pub picard_tol: f64,
    pub max_iters: usize,
    /// `z ← (1 − damping)·z + damping·Γ[z]`.
    pub damping: f64,
    /// Loss of decay in the contraction norm `Z^{κ−δ}`.
    pub delta: f64,
    /// Frequency grid; `None` takes the equation's default far cut.
    pub grid: Option<GridSpec>,
    pub coefficients: Coefficients,
    /// Largest admissible driving amplitude.
    pub smallness: f64,
    /// Tolerance of the MBO amplitude solve per outer step.
    pub theta_tol: f64,
    /// Tolerance of `|c(A) − c|` in the mKdV/quartic KdV inversion.
    pub inversion_tol: f64,
    pub max_outer: usize,
}

/// JSON form of [`SolveConfig`] with every field optional.
#[derive(Deserialize)]
struct RawConfig {
    equation: Option<Equation>,
    kappa: Option<f64>,
    #[serde(default, deserialize_with = "optional_scalar")]
    amplitude: Option<C64>,
    picard_tol: Option<f64>,
    max_iters: Option<usize>,
    damping: Option<f64>,
    delta: Option<f64>,
    grid: Option<GridSpec>,
    coefficients: Option<Coefficients>,
    smallness: Option<f64>,
    theta_tol: Option<f64>,
    inversion_tol: Option<f64>,
    max_outer: Option<usize>,
}

fn optional_scalar<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<C64>, D::Error> {
    scalar_or_pair(d).map(Some)
}

impl From<RawConfig> for SolveConfig {
    fn from(r: RawConfig) -> Self {
        let eq = r.equation.unwrap_or(Equation::Kdv4);
        let d = SolveConfig::new(eq, r.amplitude.unwrap_or(C64::new(0.01, 0.0)));
        SolveConfig {
            kappa: r.kappa.unwrap_or(d.kappa),
            picard_tol: r.picard_tol.unwrap_or(d.picard_tol),
            max_iters: r.max_iters.unwrap_or(d.max_iters),
            damping: r.damping.unwrap_or(d.damping),
            delta: r.delta.unwrap_or(d.delta),
            grid: r.grid.or(d.grid),
            coefficients: r.coefficients.unwrap_or(d.coefficients),
            smallness: r.smallness.unwrap_or(d.smallness),
            theta_tol: r.theta_tol.unwrap_or(d.theta_tol),
            inversion_tol: r.inversion_tol.unwrap_or(d.inversion_tol),
            max_outer: r.max_outer.unwrap_or(d.max_outer),
            ..d
        }
    }
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig::new(Equation::Kdv4, C64::new(0.01, 0.0))
    }
}

impl SolveConfig {
    pub fn new(equation: Equation, amplitude: C64) -> Self {
        SolveConfig {
            equation,
            kappa: equation.default_kappa(),
            amplitude,
            picard_tol: 1e-8,
            max_iters: 40,
            damping: 1.0,
            delta: 0.02,
            grid: None,
            coefficients: Coefficients::default(),
            smallness: 0.1,
            theta_tol: 1e-10,
            inversion_tol: 1e-8,
            max_outer: 20,
        }
    }

    pub fn grid_spec(&self) -> GridSpec {
        self.grid.unwrap_or_else(|| GridSpec::with_far_cut(self.equation.default_far_cut()))
    }

    pub fn validate(&self) -> Result<()> {
        self.equation.check_kappa(self.kappa)?;
        self.grid_spec().validate()?;
        let bad = |what: &str| Err(Error::Config(what.to_string()));
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return bad("damping must lie in (0, 1]");
        }
        if !(self.picard_tol > 0.0 && self.theta_tol > 0.0 && self.inversion_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.delta >= 0.0 && self.delta < self.kappa) {
            return bad("delta must lie in [0, kappa)");
        }
        if self.max_iters == 0 || self.max_outer == 0 {
            return bad("iteration limits must be positive");
        }
        if !self.amplitude.is_finite() || self.amplitude.norm() > self.smallness {
            return Err(Error::Config(format!(
                "|amplitude| = {} exceeds the smallness threshold {}",
                self.amplitude.norm(),
                self.smallness
            )));
        }
        if self.equation == Equation::Mbo && self.amplitude.im != 0.0 {
            return bad("the MBO zero-frequency value must be real");
        }
        Ok(())
    }

    /// Ansatz for a given high-frequency amplitude.
    pub fn ansatz(&self, amp: C64) -> AnsatzParams {
        match self.equation {
            Equation::Kdv4 => AnsatzParams::kdv4(amp),
            Equation::Nls => AnsatzParams::nls(amp),
            Equation::Mkdv => AnsatzParams::mkdv(amp, self.coefficients),
            Equation::Mbo => AnsatzParams::mbo(amp, self.amplitude.re, self.coefficients),
        }
    }
}

/// Outcome of a solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub equation: Equation,
    pub kappa: f64,
    /// Picard steps of the primary solve (MBO and NLS: the only solve).
    pub iterations: usize,
    /// Successive iterate distances `‖z_{n+1} − z_n‖`.
    pub distances: Vec<f64>,
    /// `d_{n+1} / d_n`.
    pub contraction_estimates: Vec<f64>,
    /// `Z^κ` norm (`Y^κ` for NLS) of the final remainder.
    pub final_norm: NormReport,
    /// Zero-frequency value; `c₊` for NLS.
    pub c_value: C64,
    /// NLS: `c₋`.
    pub c_neg: Option<C64>,
    pub a_value: C64,
    /// Log-phase rate of the ansatz.
    pub rate: f64,
    /// MBO oscillating amplitude `B`.
    pub b_value: C64,
    /// `|c(A) − c|` after each amplitude update (mKdV, quartic KdV).
    pub inversion_history: Vec<f64>,
    /// Picard steps spent by every warm-started re-solve after the first.
    pub inner_iterations: Vec<usize>,
    /// MBO: amplitude steps per outer iteration.
    pub theta_iterations: Vec<usize>,
    pub fft_size: usize,
    pub converged: bool,
    pub flags: Vec<String>,
}

/// Norm of the remainder in the space where it is constructed.
pub fn profile_norm(z: &Profile) -> Result<NormReport> {
    match z.equation {
        Equation::Nls => weighted_norm_y(z),
        _ => weighted_norm_z(z),
    }
}

/// Zero-frequency value `c(A, z)` for mKdV and quartic KdV.
pub fn scattering_c(asm: &Assembler, s: &AnsatzParams, z: &Profile) -> Result<C64> {
    Ok(asm.apply(z, s, None)?.c)
}

/// `(c₊, c₋)` for NLS.
pub fn scattering_c_pm(asm: &Assembler, s: &AnsatzParams, z: &Profile) -> Result<(C64, C64)> {
    let out = asm.apply(z, s, None)?;
    Ok((out.c, out.c_neg.unwrap_or_default()))
}

/// One application of `Γ` at fixed ansatz (MBO: at fixed `A` and prescribed `c`).
pub fn gamma(asm: &Assembler, s: &AnsatzParams, z: &Profile) -> Result<Applied> {
    let given = (asm.equation == Equation::Mbo).then_some(s.c);
    asm.apply(z, s, given)
}

/// One application of the MBO amplitude map at fixed `z` and `c`; `a` and `B`
/// follow the input amplitude.
pub fn theta_mbo(asm: &Assembler, s: &AnsatzParams, z: &Profile) -> Result<C64> {
    let out = asm.apply(z, s, Some(s.c))?;
    Ok(out.theta.expect("MBO application returns an amplitude"))
}

/// Iterate the MBO amplitude map from `s` until it moves less than `tol`. Returns
/// the application at the accepted amplitude and the number of steps.
pub fn solve_theta(asm: &Assembler, s: &AnsatzParams, z: &Profile, tol: f64, max: usize) -> Result<(AnsatzParams, Applied, usize)> {
    let mut s = s.clone();
    let mut history = Vec::new();
    for step in 1..=max {
        let out = asm.apply(z, &s, Some(s.c))?;
        let next = out.theta.expect("MBO application returns an amplitude");
        let moved = (next - s.amplitude).norm();
        history.push(moved);
        if moved <= tol {
            return Ok((s, out, step));
        }
        s = s.with_amplitude(next);
    }
    Err(Error::NoConvergence { iterations: max, last: *history.last().unwrap_or(&f64::NAN), history })
}

/// Picard iteration at fixed ansatz from `z0`. For MBO the amplitude is re-solved
/// before every step, so the returned ansatz may differ from the input.
struct Picard {
    z: Profile,
    s: AnsatzParams,
    last: Applied,
    distances: Vec<f64>,
    theta_steps: Vec<usize>,
}

fn picard(asm: &Assembler, cfg: &SolveConfig, s: AnsatzParams, z0: Profile) -> Result<Picard> {
    let mut z = z0;
    let mut s = s;
    let mut distances = Vec::new();
    let mut theta_steps = Vec::new();
    for _ in 0..cfg.max_iters {
        let out = if asm.equation == Equation::Mbo {
            let (s_new, out, steps) = solve_theta(asm, &s, &z, cfg.theta_tol, cfg.max_outer.max(20))?;
            s = s_new;
            theta_steps.push(steps);
            out
        } else {
            asm.apply(&z, &s, None)?
        };
        let next = if cfg.damping < 1.0 { z.blend(&out.profile, cfg.damping) } else { out.profile.clone() };
        let d = distance(&next, &z, cfg.delta)?;
        if !d.is_finite() {
            return Err(Error::NonFinite { xi: f64::NAN });
        }
        distances.push(d);
        z = next;
        if d <= cfg.picard_tol {
            return Ok(Picard { z, s, last: out, distances, theta_steps });
        }
    }
    let last = *distances.last().unwrap_or(&f64::NAN);
    Err(Error::NoConvergence { iterations: cfg.max_iters, last, history: distances })
}

fn ratios(d: &[f64]) -> Vec<f64> {
    d.windows(2).map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 }).collect()
}

/// Solve `c(A, z_A) = c` for `A` by `A ← A + (c − c(A))`, each step warm-starting
/// the Picard solve for `z_A` from the previous remainder.
fn invert_from(asm: &Assembler, cfg: &SolveConfig, first: Picard) -> Result<(Picard, Vec<f64>, Vec<usize>)> {
    let target = cfg.amplitude;
    let mut cur = first;
    let mut history = vec![(cur.last.c - target).norm()];
    let mut inner = Vec::new();
    for _ in 0..cfg.max_outer {
        if *history.last().expect("non-empty") <= cfg.inversion_tol {
            return Ok((cur, history, inner));
        }
        let amp = cur.s.amplitude + (target - cur.last.c);
        let next = picard(asm, cfg, cfg.ansatz(amp), cur.z.clone())?;
        inner.push(next.distances.len());
        history.push((next.last.c - target).norm());
        cur = next;
    }
    if *history.last().expect("non-empty") <= cfg.inversion_tol {
        return Ok((cur, history, inner));
    }
    Err(Error::Config(format!(
        "amplitude inversion did not converge in {} steps (|c(A) − c| = {:e}); try a smaller |c|",
        cfg.max_outer,
        history.last().expect("non-empty")
    )))
}

/// High-frequency amplitude `A` with `c(A, z_A) = c` (mKdV, quartic KdV).
pub fn invert_c(cfg: &SolveConfig) -> Result<C64> {
    Ok(picard_solve(cfg)?.1.amplitude)
}

/// Construct the remainder for `cfg`, returning it with its ansatz and a report.
pub fn picard_solve(cfg: &SolveConfig) -> Result<(Profile, AnsatzParams, SolveReport)> {
    cfg.validate()?;
    let grid = FrequencyGrid::build(cfg.grid_spec())?;
    let asm = Assembler::new(cfg.equation, grid)?;
    picard_solve_with(&asm, cfg)
}

/// As [`picard_solve`] with a prebuilt assembler, so repeated solves on one grid
/// share the FFT plans.
pub fn picard_solve_with(asm: &Assembler, cfg: &SolveConfig) -> Result<(Profile, AnsatzParams, SolveReport)> {
    cfg.validate()?;
    if asm.equation != cfg.equation || asm.grid.spec() != &cfg.grid_spec() {
        return Err(Error::Config("assembler does not match the configuration".into()));
    }
    let eq = cfg.equation;
    let z0 = Profile::zero(eq, asm.grid.clone(), cfg.kappa);
    // mKdV and quartic KdV start from A = c; MBO from A = c as well
    let s0 = cfg.ansatz(cfg.amplitude);
    let first = picard(asm, cfg, s0, z0)?;
    let distances = first.distances.clone();
    let theta_iterations = first.theta_steps.clone();
    let (done, inversion_history, inner_iterations) = match eq {
        Equation::Kdv4 | Equation::Mkdv => invert_from(asm, cfg, first)?,
        _ => (first, Vec::new(), Vec::new()),
    };
    let contraction_estimates = ratios(&distances);
    let mut flags = Vec::new();
    if contraction_estimates.iter().skip(1).any(|r| *r >= 1.0) {
        flags.push("distance increased after the second iteration".to_string());
    }
    if eq == Equation::Mkdv && cfg.coefficients == Coefficients::Printed {
        flags.push("printed second-order coefficient leaves an undamped oscillation".to_string());
    }
    if eq == Equation::Mbo && cfg.coefficients == Coefficients::Printed {
        flags.push("printed phase constants do not cancel the resonant density".to_string());
    }
    let c_value = match eq {
        Equation::Mbo => cfg.amplitude,
        _ => done.last.c,
    };
    let report = SolveReport {
        equation: eq,
        kappa: cfg.kappa,
        iterations: distances.len(),
        final_norm: profile_norm(&done.z)?,
        distances,
        contraction_estimates,
        c_value,
        c_neg: done.last.c_neg,
        a_value: done.s.amplitude,
        rate: done.s.rate,
        b_value: done.s.b,
        inversion_history,
        inner_iterations,
        theta_iterations,
        fft_size: asm.fft_size(),
        converged: true,
        flags,
    };
    let mut s = done.s;
    if eq != Equation::Mbo {
        s.c = c_value;
    }
    Ok((done.z, s, report))
}
