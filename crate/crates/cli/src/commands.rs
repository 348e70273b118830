use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use ssprofile::fixedpoint::{picard_solve, profile_norm, SolveConfig};
use ssprofile::oscillatory::QuadratureSpec;
use ssprofile::profile_space::{read_profile, write_profile, Sidecar};
use ssprofile::reconstruct::{
    evolution_crosscheck, hat_profile, physical_profile, selfsimilar_field, write_field, EvolutionGrid, Synthesis,
};
use ssprofile::verify::{self, Verdict};
use ssprofile::{Equation, GridSpec, Profile, C64};

use crate::manifest::{digest, Recorder};

/// Scalar overrides applied on top of a JSON config.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub equation: Option<Equation>,
    pub amplitude: Option<f64>,
    pub amplitude_im: Option<f64>,
    pub kappa: Option<f64>,
    pub far_cut: Option<f64>,
    pub max_iters: Option<usize>,
    pub picard_tol: Option<f64>,
}

/// Read the JSON config (if any), then apply the flag overrides.
pub fn load_config(path: Option<&Path>, o: &Overrides) -> Result<SolveConfig> {
    let mut json = match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
            serde_json::from_str::<serde_json::Value>(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => serde_json::json!({}),
    };
    let map = json.as_object_mut().context("config must be a JSON object")?;
    if let Some(eq) = o.equation {
        map.insert("equation".into(), serde_json::to_value(eq)?);
    }
    if o.amplitude.is_some() || o.amplitude_im.is_some() {
        let re = o.amplitude.unwrap_or(0.0);
        map.insert("amplitude".into(), serde_json::json!([re, o.amplitude_im.unwrap_or(0.0)]));
    }
    if let Some(k) = o.kappa {
        map.insert("kappa".into(), k.into());
    }
    if let Some(n) = o.max_iters {
        map.insert("max_iters".into(), n.into());
    }
    if let Some(t) = o.picard_tol {
        map.insert("picard_tol".into(), t.into());
    }
    let mut cfg: SolveConfig = serde_json::from_value(json)?;
    if let Some(far) = o.far_cut {
        cfg.grid = Some(GridSpec { far_cut: far, ..cfg.grid_spec() });
    }
    cfg.validate()?;
    Ok(cfg)
}

pub struct ProfilePaths {
    pub csv: PathBuf,
    pub json: PathBuf,
}

pub fn profile_paths(dir: &Path) -> ProfilePaths {
    ProfilePaths { csv: dir.join("profile.csv"), json: dir.join("profile.json") }
}

fn load_profile(dir: &Path) -> Result<(Profile, Sidecar, ProfilePaths)> {
    let paths = profile_paths(dir);
    let (z, side) = read_profile(&paths.csv, &paths.json)
        .with_context(|| format!("reading profile from {}", dir.display()))?;
    Ok((z, side, paths))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)?).with_context(|| format!("writing {}", path.display()))
}

/// Solve, write the profile, sidecar, report and manifest. Returns whether the
/// solve converged.
pub fn solve(cfg: &SolveConfig, out: &Path) -> Result<bool> {
    fs::create_dir_all(out)?;
    let mut rec = Recorder::new("solve", digest(cfg)?);
    let report_path = out.join("report.json");
    let converged = match picard_solve(cfg) {
        Ok((z, ansatz, report)) => {
            let paths = profile_paths(out);
            write_profile(&paths.csv, &paths.json, &z, &ansatz)?;
            write_json(&report_path, &report)?;
            rec.output(&paths.csv);
            rec.output(&paths.json);
            log::info!(
                "{}: {} iterations, |z| = {:.3e}, c = {:.6e}, A = {:.6e}",
                cfg.equation,
                report.iterations,
                report.final_norm.norm_total,
                report.c_value,
                report.a_value
            );
            report.converged
        }
        Err(ssprofile::Error::NoConvergence { iterations, last, history }) => {
            let failure = serde_json::json!({
                "equation": cfg.equation,
                "converged": false,
                "iterations": iterations,
                "last_distance": last,
                "distances": history,
            });
            write_json(&report_path, &failure)?;
            log::error!("{}: no convergence after {iterations} iterations (last distance {last:e})", cfg.equation);
            false
        }
        Err(e) => return Err(e.into()),
    };
    rec.output(&report_path);
    write_json(&out.join("config.json"), cfg)?;
    rec.output(&out.join("config.json"));
    rec.finish(out)?;
    Ok(converged)
}

/// Checks available to `verify`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    /// Log-log decay of `z` and `z′` on the top decade.
    Decay,
    /// Fixed-point residual of the stored derivative.
    Residual,
    /// Unit-square Fresnel integral against its leading term.
    YLeading,
    /// MBO ansatz interaction against its two leading terms.
    Mbo,
    /// High × low × low leading term.
    Hll,
    /// Kernel decay and its derivative.
    Kernel,
    /// Constant-term decay slope.
    MConstant,
}

impl Check {
    fn needs_profile(self) -> bool {
        matches!(self, Check::Decay | Check::Residual)
    }
}

#[derive(Serialize)]
struct VerifyOutput {
    checks: Vec<Check>,
    verdicts: Vec<Verdict>,
    details: serde_json::Map<String, serde_json::Value>,
}

/// Run the selected checks and write `verdicts.json`. Returns whether all passed.
pub fn verify(profile: Option<&Path>, checks: &[Check], residual_tol: f64, out: &Path) -> Result<bool> {
    fs::create_dir_all(out)?;
    let mut rec = Recorder::new("verify", digest(&(checks, residual_tol))?);
    let loaded = match profile {
        Some(dir) => {
            let (z, side, paths) = load_profile(dir)?;
            rec.input(&paths.csv);
            rec.input(&paths.json);
            Some((z, side))
        }
        None if checks.iter().any(|c| c.needs_profile()) => bail!("the selected checks need --profile"),
        None => None,
    };
    let q = QuadratureSpec::default();
    let mut verdicts = Vec::new();
    let mut details = serde_json::Map::new();
    for &check in checks {
        match check {
            Check::Decay => {
                let (z, _) = loaded.as_ref().expect("profile loaded above");
                let r = verify::check_profile_decay(z)?;
                verdicts.extend(r.verdicts.clone());
                details.insert("decay".into(), serde_json::to_value(&r)?);
            }
            Check::Residual => {
                let (z, side) = loaded.as_ref().expect("profile loaded above");
                let r = verify::check_fixedpoint_residual(z, &side.ansatz)?;
                verdicts.push(Verdict::at_most("weighted fixed-point residual", r, residual_tol, None));
            }
            Check::YLeading => {
                let (rows, v) = verify::check_y_leading(&[20.0, 40.0]);
                verdicts.push(v);
                details.insert("y_leading".into(), serde_json::to_value(&rows)?);
            }
            Check::Mbo => {
                let r = verify::check_mbo_asymptotics(C64::new(0.1, 0.0), 0.0, &[10.0, 20.0, 40.0], &q)?;
                verdicts.push(r.verdict_printed.clone());
                verdicts.push(r.verdict_matched.clone());
                details.insert("mbo".into(), serde_json::to_value(&r)?);
            }
            Check::Hll => {
                let (rows, v) = verify::check_hll_leading(&[15.0, 30.0, 60.0], &q)?;
                verdicts.push(v);
                details.insert("hll".into(), serde_json::to_value(&rows)?);
            }
            Check::Kernel => {
                let (rows, v) = verify::check_k_kernel(&verify::log_space(5.0, 50.0, 12), &q)?;
                verdicts.extend(v);
                details.insert("kernel".into(), serde_json::to_value(&rows)?);
            }
            Check::MConstant => {
                let (fit, v) = verify::check_m_constant((10.0, 60.0), 24, &q)?;
                verdicts.push(v);
                details.insert("m_constant".into(), serde_json::to_value(&fit)?);
            }
        }
    }
    for v in &verdicts {
        log::info!("{} {}: {:.4e} (threshold {:.4e})", if v.pass { "PASS" } else { "FAIL" }, v.name, v.measured, v.threshold);
    }
    let all = verdicts.iter().all(|v| v.pass);
    let path = out.join("verdicts.json");
    write_json(&path, &VerifyOutput { checks: checks.to_vec(), verdicts: verdicts.clone(), details })?;
    rec.output(&path);
    rec.verdicts(verdicts);
    rec.finish(out)?;
    Ok(all)
}

/// Deduplicate and sort driving values by modulus.
pub fn sweep_values(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.abs().total_cmp(&b.abs()).then(a.total_cmp(b)));
    let before = v.len();
    v.dedup();
    if v.len() < before {
        log::warn!("dropped {} duplicate sweep values", before - v.len());
    }
    v
}

/// Solve for each driving value and tabulate `(c, A, ‖z‖, iterations)`.
pub fn sweep(base: &SolveConfig, values: &[f64], out: &Path) -> Result<bool> {
    fs::create_dir_all(out)?;
    let values = sweep_values(values);
    let mut rec = Recorder::new("sweep", digest(&(base, &values))?);
    let path = out.join("sweep.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["c_re", "c_im", "a_re", "a_im", "z_norm", "iterations", "converged"])?;
    let mut all = true;
    for &value in &values {
        let cfg = SolveConfig { amplitude: C64::new(value, 0.0), ..base.clone() };
        cfg.validate()?;
        match picard_solve(&cfg) {
            Ok((z, _, report)) => {
                let norm = profile_norm(&z)?.norm_total;
                w.write_record([
                    fmt(report.c_value.re),
                    fmt(report.c_value.im),
                    fmt(report.a_value.re),
                    fmt(report.a_value.im),
                    fmt(norm),
                    report.iterations.to_string(),
                    report.converged.to_string(),
                ])?;
                all &= report.converged;
            }
            Err(ssprofile::Error::NoConvergence { iterations, .. }) => {
                log::error!("{}: no convergence at {value}", cfg.equation);
                let nan = fmt(f64::NAN);
                w.write_record([fmt(value), fmt(0.0), nan.clone(), nan.clone(), nan, iterations.to_string(), "false".into()])?;
                all = false;
            }
            Err(e) => return Err(e.into()),
        }
    }
    w.flush()?;
    rec.output(&path);
    rec.finish(out)?;
    Ok(all)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

fn fmt(v: f64) -> String {
    format!("{v:.17e}")
}

/// Physical profile at `t = 1` (rescaled to `t`) on `points` nodes of
/// `[x_min, x_max]`, with an optional evolution cross-check.
pub fn reconstruct(profile: &Path, x: (f64, f64, usize), t: f64, evolve: Option<f64>, out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    let (z, side, paths) = load_profile(profile)?;
    let mut rec = Recorder::new("reconstruct", digest(&(x, t, evolve))?);
    rec.input(&paths.csv);
    rec.input(&paths.json);
    let (lo, hi, n) = x;
    if !(hi > lo && n >= 2) {
        bail!("need x_max > x_min and at least two points");
    }
    let stretch = t.powf(1.0 / z.equation.dispersion_order() as f64);
    // sample P on nodes that land on the requested grid after rescaling
    let nodes: Vec<f64> = (0..n).map(|j| (lo + (hi - lo) * j as f64 / (n - 1) as f64) / stretch).collect();
    let field = selfsimilar_field(&physical_profile(&side.ansatz, &z, &nodes)?, t)?;
    let csv_path = out.join("field.csv");
    let json_path = out.join("field.json");
    write_field(&csv_path, &json_path, &field)?;
    rec.output(&csv_path);
    rec.output(&json_path);
    if let Some(dt) = evolve {
        let synthesis = Synthesis::new(&side.ansatz, &z, 1.0)?;
        let grid = EvolutionGrid { half_width: 200.0, points: 8192, steps: 20, reference: 20.0 };
        let report = evolution_crosscheck(&synthesis, &grid, dt)?;
        log::info!("evolution over {dt}: relative L2 discrepancy {:.3e}", report.discrepancy);
        let path = out.join("evolution.json");
        write_json(&path, &report)?;
        rec.output(&path);
    }
    rec.finish(out)?;
    Ok(())
}

/// Tabulate `S`, `z` and the physical transform `P̂` on the profile grid.
pub fn export(profile: &Path, out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    let (z, side, paths) = load_profile(profile)?;
    let mut rec = Recorder::new("export", digest(&side)?);
    rec.input(&paths.csv);
    rec.input(&paths.json);
    let path = out.join("spectrum.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["xi", "re_s", "im_s", "re_z", "im_z", "re_hat", "im_hat"])?;
    for (xi, zv, _) in z.two_sided_samples() {
        let s = side.ansatz.eval(xi);
        let hat = hat_profile(&side.ansatz, &z, xi)?;
        w.write_record([xi, s.re, s.im, zv.re, zv.im, hat.re, hat.im].map(fmt))?;
    }
    w.flush()?;
    rec.output(&path);
    rec.finish(out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_values_sorted_and_deduplicated() {
        assert_eq!(sweep_values(&[0.02, -0.005, 0.01, 0.02]), vec![-0.005, 0.01, 0.02]);
        assert!(sweep_values(&[]).is_empty());
    }

    #[test]
    fn flags_override_json() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        fs::write(&p, r#"{"equation": "nls", "amplitude": 0.01, "kappa": 0.3}"#).unwrap();
        let o = Overrides { kappa: Some(0.25), ..Default::default() };
        let cfg = load_config(Some(&p), &o).unwrap();
        assert_eq!(cfg.equation, Equation::Nls);
        assert_eq!(cfg.kappa, 0.25);
        assert_eq!(cfg.amplitude, C64::new(0.01, 0.0));
    }

    #[test]
    fn bad_kappa_names_interval() {
        let o = Overrides { equation: Some(Equation::Kdv4), kappa: Some(0.7), ..Default::default() };
        let err = load_config(None, &o).unwrap_err().to_string();
        assert!(err.contains("0.625"), "{err}");
    }
}
