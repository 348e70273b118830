//! Physical-space profiles, the self-similar field and a split-step evolution check.
//!
//! The profile `P` at `t = 1` is the inverse transform of
//! `P̂(ξ) = e^{iμ(ξ)} |ξ|^{−s} (S_A + z)(ξ)`. The full solution is
//! `t^{−α} P(x / t^{1/n})`.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::ansatz::AnsatzParams;
use crate::oscillatory::engine::{Engine, PlanSpec};
use crate::oscillatory::ProfileFactor;
use crate::{Equation, Error, Profile, Result, C64};

/// Lagrange stencil width for interpolating synthesized samples.
const STENCIL: usize = 8;

/// Oversampling of the second synthesis used for the per-node error estimate.
const CHECK_OVERSAMPLING: f64 = 1.5;

/// A field sampled at arbitrary nodes at time `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalField {
    pub equation: Equation,
    pub t: f64,
    pub x_nodes: Vec<f64>,
    pub values: Vec<C64>,
    /// Estimated synthesis error per node.
    pub errors: Vec<f64>,
    /// Largest imaginary part removed by symmetrization, relative to `max|value|`.
    pub imag_residual: f64,
}

/// `P̂(ξ) = e^{iμ(ξ)} |ξ|^{−s} (S_A + z)(ξ)`.
pub fn hat_profile(ansatz: &AnsatzParams, z: &Profile, xi: f64) -> Result<C64> {
    let eq = z.equation;
    let s = eq.weight_exponent();
    if xi == 0.0 && s > 0.0 {
        return Err(Error::Config(format!("{eq}: the transform has an integrable singularity at xi = 0")));
    }
    let g = ansatz.eval(xi) + z.evaluate(xi);
    let w = if s > 0.0 { xi.abs().powf(-s) } else { 1.0 };
    Ok(g * w * C64::from_polar(1.0, eq.modulation(xi)))
}

/// Physical samples of `P` on a uniform window, evaluated anywhere inside it.
#[derive(Clone, Debug)]
pub struct Synthesis {
    pub equation: Equation,
    x0: f64,
    dx: f64,
    samples: Vec<C64>,
}

impl Synthesis {
    /// Synthesize `S_A + z` with the tapered profile plan. `oversampling` refines
    /// the physical grid.
    pub fn new(ansatz: &AnsatzParams, z: &Profile, oversampling: f64) -> Result<Self> {
        let eq = z.equation;
        let mut spec = PlanSpec::for_profiles(eq, z.grid.far_cut());
        spec.oversampling = oversampling;
        let engine = Engine::new(spec)?;
        let samples = engine.physical(&ProfileFactor { profile: z, ansatz });
        if let Some(bad) = samples.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite { xi: engine.plan.x0 + bad as f64 * engine.plan.dx });
        }
        Ok(Synthesis { equation: eq, x0: engine.plan.x0, dx: engine.plan.dx, samples })
    }

    /// Physical interval covered by the samples.
    pub fn window(&self) -> (f64, f64) {
        (self.x0, self.x0 + (self.samples.len() - 1) as f64 * self.dx)
    }

    /// `P(x)` by centered Lagrange interpolation.
    pub fn eval(&self, x: f64) -> Result<C64> {
        let u = (x - self.x0) / self.dx;
        let half = STENCIL / 2;
        let base = u.floor() as i64 - half as i64 + 1;
        if base < 0 || base as usize + STENCIL > self.samples.len() {
            let (lo, hi) = self.window();
            return Err(Error::Config(format!("x = {x} outside the synthesis window [{lo:.1}, {hi:.1}]")));
        }
        let base = base as usize;
        let t = u - base as f64;
        let mut acc = C64::default();
        for j in 0..STENCIL {
            let mut w = 1.0;
            for m in 0..STENCIL {
                if m != j {
                    w *= (t - m as f64) / (j as f64 - m as f64);
                }
            }
            acc += self.samples[base + j] * w;
        }
        Ok(acc)
    }
}

fn symmetrize(eq: Equation, values: &mut [C64]) -> f64 {
    if !eq.is_hermitian() {
        return 0.0;
    }
    let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let worst = values.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    values.iter_mut().for_each(|v| v.im = 0.0);
    if scale > 0.0 {
        worst / scale
    } else {
        0.0
    }
}

/// `P(x)` at `t = 1` on the given nodes, with a per-node error estimate from a
/// second synthesis on a finer physical grid.
pub fn physical_profile(ansatz: &AnsatzParams, z: &Profile, x_nodes: &[f64]) -> Result<PhysicalField> {
    let eq = z.equation;
    let coarse = Synthesis::new(ansatz, z, 1.0)?;
    let fine = Synthesis::new(ansatz, z, CHECK_OVERSAMPLING)?;
    let pairs = x_nodes
        .par_iter()
        .map(|&x| Ok((fine.eval(x)?, coarse.eval(x)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut values: Vec<C64> = pairs.iter().map(|p| p.0).collect();
    let errors = pairs.iter().map(|(f, c)| (f - c).norm()).collect();
    let imag_residual = symmetrize(eq, &mut values);
    Ok(PhysicalField { equation: eq, t: 1.0, x_nodes: x_nodes.to_vec(), values, errors, imag_residual })
}

/// `t^{−α} P(x / t^{1/n})` from a field at time `field.t`: nodes scale by
/// `(t/t₀)^{1/n}` and values by `(t/t₀)^{−α}`.
pub fn selfsimilar_field(field: &PhysicalField, t: f64) -> Result<PhysicalField> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Config(format!("time must be positive, got {t}")));
    }
    let eq = field.equation;
    let r = t / field.t;
    let stretch = r.powf(1.0 / eq.dispersion_order() as f64);
    let amp = r.powf(-eq.amplitude_decay());
    Ok(PhysicalField {
        equation: eq,
        t,
        x_nodes: field.x_nodes.iter().map(|x| x * stretch).collect(),
        values: field.values.iter().map(|v| v * amp).collect(),
        errors: field.errors.iter().map(|e| e * amp).collect(),
        imag_residual: field.imag_residual,
    })
}

/// Write `x,re_u,im_u` rows and a JSON sidecar with the metadata.
pub fn write_field(csv_path: &Path, json_path: &Path, field: &PhysicalField) -> Result<()> {
    let mut w = csv::Writer::from_path(csv_path)?;
    w.write_record(["x", "re_u", "im_u"])?;
    for (x, v) in field.x_nodes.iter().zip(&field.values) {
        w.write_record([format!("{x:.17e}"), format!("{:.17e}", v.re), format!("{:.17e}", v.im)])?;
    }
    w.flush()?;
    let meta = serde_json::json!({
        "equation": field.equation,
        "t": field.t,
        "max_synthesis_error": field.errors.iter().cloned().fold(0.0, f64::max),
        "imag_residual": field.imag_residual,
    });
    std::fs::write(json_path, serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

/// Periodic window and time stepping for the evolution check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionGrid {
    /// The periodic window is `[−half_width, half_width)`.
    pub half_width: f64,
    pub points: usize,
    pub steps: usize,
    /// The discrepancy is measured on `|x| ≤ reference`.
    pub reference: f64,
}

impl EvolutionGrid {
    pub fn validate(&self, dt: f64) -> Result<()> {
        if !(dt > 0.0 && dt <= 0.2) {
            return Err(Error::Config(format!("evolution time step {dt} outside (0, 0.2]")));
        }
        if self.points < 64 || !self.points.is_power_of_two() || self.steps == 0 {
            return Err(Error::Config("evolution needs a power-of-two point count ≥ 64 and at least one step".into()));
        }
        if !(self.reference > 0.0 && 2.0 * self.reference <= self.half_width) {
            return Err(Error::Config(format!(
                "reference window {} must fit in half of the periodic window {}",
                self.reference, self.half_width
            )));
        }
        Ok(())
    }

    fn dx(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.points).map(|j| -self.half_width + j as f64 * self.dx()).collect()
    }

    /// Twice the window, twice the points, twice the steps.
    pub fn refined(&self) -> Self {
        EvolutionGrid { half_width: 2.0 * self.half_width, points: 2 * self.points, steps: 2 * self.steps, ..*self }
    }
}

/// Outcome of one evolution run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionReport {
    pub equation: Equation,
    pub dt: f64,
    pub grid: EvolutionGrid,
    /// `‖u_evolved − u_rescaled‖ / ‖u_rescaled‖` in L² on the reference window.
    pub discrepancy: f64,
    pub reference_norm: f64,
}

/// Smooth cutoff equal to 1 on `|x| ≤ 0.75 L` and 0 at `|x| = L`.
fn edge_taper(x: f64, half_width: f64) -> f64 {
    let a = x.abs() / half_width;
    if a <= 0.75 {
        return 1.0;
    }
    if a >= 1.0 {
        return 0.0;
    }
    let s = (a - 0.75) / 0.25;
    let f = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
    f(1.0 - s) / (f(1.0 - s) + f(s))
}

struct Stepper {
    eq: Equation,
    wavenumbers: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Stepper {
    fn new(eq: Equation, grid: &EvolutionGrid) -> Self {
        let n = grid.points;
        let h = 2.0 * PI / (n as f64 * grid.dx());
        let wavenumbers = (0..n).map(|j| if j < n / 2 { j as f64 } else { j as f64 - n as f64 } * h).collect();
        let mut planner = FftPlanner::new();
        Stepper { eq, wavenumbers, forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) }
    }

    /// Exact linear flow over `dt`, applied in frequency space.
    fn linear(&self, u: &mut [C64], dt: f64) {
        let eq = self.eq;
        let n = u.len() as f64;
        self.forward.process(u);
        u.par_iter_mut().zip(self.wavenumbers.par_iter()).for_each(|(v, &k)| {
            let symbol = match eq {
                Equation::Mkdv | Equation::Kdv4 => k * k * k,
                Equation::Mbo => -k * k.abs(),
                Equation::Nls => -k * k,
            };
            *v *= C64::from_polar(1.0 / n, symbol * dt);
        });
        self.inverse.process(u);
    }

    fn derivative(&self, u: &mut [C64]) {
        let n = u.len() as f64;
        self.forward.process(u);
        let len = u.len();
        u.iter_mut().zip(&self.wavenumbers).enumerate().for_each(|(j, (v, &k))| {
            // drop the unpaired Nyquist mode so real fields stay real
            *v = if j == len / 2 { C64::default() } else { *v * C64::new(0.0, k / n) };
        });
        self.inverse.process(u);
    }

    /// Right-hand side of the nonlinear part for the derivative equations.
    fn flux_rhs(&self, u: &[C64]) -> Vec<C64> {
        let (k, sign) = match self.eq {
            Equation::Mkdv => (3, -1.0),
            Equation::Kdv4 => (4, -1.0),
            Equation::Mbo => (3, 1.0),
            Equation::Nls => unreachable!("the cubic NLS substep is solved exactly"),
        };
        let mut f: Vec<C64> = u.iter().map(|v| v.powu(k)).collect();
        self.derivative(&mut f);
        f.iter_mut().for_each(|v| *v *= sign);
        f
    }

    /// Nonlinear flow over `dt` in physical space.
    fn nonlinear(&self, u: &mut [C64], dt: f64) {
        if self.eq == Equation::Nls {
            u.par_iter_mut().for_each(|v| *v *= C64::from_polar(1.0, v.norm_sqr() * dt));
            return;
        }
        let axpy = |a: &[C64], b: &[C64], c: f64| -> Vec<C64> { a.iter().zip(b).map(|(x, y)| x + y * c).collect() };
        let k1 = self.flux_rhs(u);
        let k2 = self.flux_rhs(&axpy(u, &k1, dt / 2.0));
        let k3 = self.flux_rhs(&axpy(u, &k2, dt / 2.0));
        let k4 = self.flux_rhs(&axpy(u, &k3, dt));
        for (j, v) in u.iter_mut().enumerate() {
            *v += (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) * (dt / 6.0);
        }
        if self.eq.is_hermitian() {
            u.iter_mut().for_each(|v| v.im = 0.0);
        }
    }

    /// Explicit stability bound for the nonlinear substep.
    fn check_cfl(&self, u: &[C64], dt: f64) -> Result<()> {
        let k = self.eq.degree() as f64;
        let umax = u.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let kmax = self.wavenumbers.iter().map(|k| k.abs()).fold(0.0, f64::max);
        let rate = match self.eq {
            Equation::Nls => umax * umax,
            _ => k * umax.powf(k - 1.0) * kmax,
        };
        if rate * dt > 2.0 {
            return Err(Error::Config(format!("nonlinear substep unstable: rate·dt = {:.3}", rate * dt)));
        }
        Ok(())
    }
}

/// Strang split-step from `t₀` to `t₀ + dt` of a field on the periodic grid.
pub fn evolve(eq: Equation, initial: &[C64], grid: &EvolutionGrid, dt: f64) -> Result<Vec<C64>> {
    grid.validate(dt)?;
    if initial.len() != grid.points {
        return Err(Error::Config(format!("field has {} samples, grid has {}", initial.len(), grid.points)));
    }
    let stepper = Stepper::new(eq, grid);
    let tau = dt / grid.steps as f64;
    let mut u = initial.to_vec();
    stepper.check_cfl(&u, tau)?;
    for _ in 0..grid.steps {
        stepper.linear(&mut u, tau / 2.0);
        stepper.nonlinear(&mut u, tau);
        stepper.linear(&mut u, tau / 2.0);
    }
    Ok(u)
}

/// Evolve the tapered `t = 1` field to `1 + dt` and compare with the rescaled
/// profile on the reference window.
pub fn evolution_crosscheck(synthesis: &Synthesis, grid: &EvolutionGrid, dt: f64) -> Result<EvolutionReport> {
    grid.validate(dt)?;
    let eq = synthesis.equation;
    let nodes = grid.nodes();
    let mut initial = nodes
        .par_iter()
        .map(|&x| Ok(synthesis.eval(x)? * edge_taper(x, grid.half_width)))
        .collect::<Result<Vec<C64>>>()?;
    symmetrize(eq, &mut initial);
    let evolved = evolve(eq, &initial, grid, dt)?;
    let t = 1.0 + dt;
    let stretch = t.powf(1.0 / eq.dispersion_order() as f64);
    let amp = t.powf(-eq.amplitude_decay());
    let (mut diff, mut norm) = (0.0, 0.0);
    for (x, u) in nodes.iter().zip(&evolved) {
        if x.abs() > grid.reference {
            continue;
        }
        let mut r = synthesis.eval(x / stretch)? * amp;
        if eq.is_hermitian() {
            r.im = 0.0;
        }
        diff += (u - r).norm_sqr();
        norm += r.norm_sqr();
    }
    let discrepancy = if norm > 0.0 { (diff / norm).sqrt() } else { diff.sqrt() };
    Ok(EvolutionReport { equation: eq, dt, grid: *grid, discrepancy, reference_norm: (norm * grid.dx()).sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_grid() -> (EvolutionGrid, Vec<f64>) {
        let grid = EvolutionGrid { half_width: 40.0, points: 1024, steps: 20, reference: 10.0 };
        let nodes = grid.nodes();
        (grid, nodes)
    }

    #[test]
    fn taper_is_smooth_step() {
        assert_eq!(edge_taper(0.0, 10.0), 1.0);
        assert_eq!(edge_taper(7.5, 10.0), 1.0);
        assert_eq!(edge_taper(10.0, 10.0), 0.0);
        assert!((edge_taper(-8.75, 10.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn linear_airy_flow_matches_exact_transform() {
        // e^{−x²} under u_t + u_xxx = 0 against direct quadrature of e^{iξ³t}·√π e^{−ξ²/4}
        let grid = EvolutionGrid { half_width: 160.0, points: 4096, steps: 1, reference: 10.0 };
        let nodes = grid.nodes();
        let stepper = Stepper::new(Equation::Mkdv, &grid);
        let mut u: Vec<C64> = nodes.iter().map(|x| C64::new((-x * x).exp(), 0.0)).collect();
        stepper.linear(&mut u, 0.5);
        for (j, &x) in nodes.iter().enumerate().step_by(37).filter(|(_, x)| x.abs() <= 20.0) {
            let (m, h) = (4000, 0.005);
            let exact: f64 = (-m..=m)
                .map(|i| {
                    let k = i as f64 * h;
                    PI.sqrt() * (-k * k / 4.0).exp() * (0.5 * k * k * k + x * k).cos() * h
                })
                .sum::<f64>()
                / (2.0 * PI);
            assert!((u[j].re - exact).abs() < 1e-10, "x = {x}: {} vs {exact}", u[j].re);
        }
    }

    #[test]
    fn nls_substep_conserves_mass() {
        let (grid, nodes) = gaussian_grid();
        let u: Vec<C64> = nodes.iter().map(|x| C64::new(0.5 * (-x * x).exp(), 0.2 * x * (-x * x).exp())).collect();
        let v = evolve(Equation::Nls, &u, &grid, 0.2).unwrap();
        let mass = |w: &[C64]| w.iter().map(|z| z.norm_sqr()).sum::<f64>();
        assert!((mass(&u) - mass(&v)).abs() < 1e-12 * mass(&u));
    }

    #[test]
    fn burgers_type_flux_matches_characteristics() {
        // u_t = −(u⁴)_x with small smooth data: first-order change is −dt·(u⁴)_x
        let (grid, nodes) = gaussian_grid();
        let stepper = Stepper::new(Equation::Kdv4, &grid);
        let mut u: Vec<C64> = nodes.iter().map(|x| C64::new(0.1 * (-x * x).exp(), 0.0)).collect();
        let dt = 1e-3;
        stepper.nonlinear(&mut u, dt);
        for (j, &x) in nodes.iter().enumerate().step_by(29) {
            let u0 = 0.1 * (-x * x).exp();
            let flux_x = 4.0 * u0.powi(3) * (-2.0 * x * 0.1 * (-x * x).exp());
            let predicted = u0 - dt * flux_x;
            assert!((u[j].re - predicted).abs() < 1e-9, "x = {x}");
        }
    }

    #[test]
    fn zero_field_evolves_to_zero() {
        let (grid, _) = gaussian_grid();
        let u = vec![C64::default(); grid.points];
        for eq in Equation::ALL {
            assert!(evolve(eq, &u, &grid, 0.1).unwrap().iter().all(|v| v.norm() == 0.0));
        }
    }

    #[test]
    fn grid_validation() {
        let (grid, _) = gaussian_grid();
        assert!(grid.validate(0.3).is_err());
        assert!(EvolutionGrid { points: 1000, ..grid }.validate(0.1).is_err());
        assert!(EvolutionGrid { reference: 30.0, ..grid }.validate(0.1).is_err());
    }

    #[test]
    fn rescaling_group_law() {
        let field = PhysicalField {
            equation: Equation::Kdv4,
            t: 1.0,
            x_nodes: vec![-2.0, 0.5, 3.0],
            values: vec![C64::new(1.0, 0.0), C64::new(-0.5, 0.0), C64::new(0.25, 0.0)],
            errors: vec![0.0; 3],
            imag_residual: 0.0,
        };
        let eight = selfsimilar_field(&field, 8.0).unwrap();
        assert!((eight.x_nodes[1] - 1.0).abs() < 1e-15);
        assert!((eight.values[0].re - 8f64.powf(-2.0 / 9.0)).abs() < 1e-15);
        let two_step = selfsimilar_field(&selfsimilar_field(&field, 2.0).unwrap(), 8.0).unwrap();
        for (a, b) in two_step.values.iter().zip(&eight.values) {
            assert!((a - b).norm() < 1e-14);
        }
        assert_eq!(selfsimilar_field(&field, 1.0).unwrap(), field);
        assert!(selfsimilar_field(&field, 0.0).is_err());
    }
}
