use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Equation, FrequencyGrid, GridSpec, Origin, Profile};
use crate::ansatz::AnsatzParams;
use crate::{Error, Result, C64};

/// JSON companion of a profile CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub equation: Equation,
    pub kappa: f64,
    pub grid: GridSpec,
    pub ansatz: AnsatzParams,
    pub log_coeff: C64,
    pub origin_pos: Origin,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub origin_neg: Option<Origin>,
}

/// Write `xi,re_z,im_z,re_dz,im_dz` rows in ascending ξ plus the JSON sidecar.
pub fn write_profile(csv_path: &Path, json_path: &Path, p: &Profile, ansatz: &AnsatzParams) -> Result<()> {
    let mut w = csv::Writer::from_path(csv_path)?;
    w.write_record(["xi", "re_z", "im_z", "re_dz", "im_dz"])?;
    for (xi, z, dz) in p.samples() {
        w.serialize((xi, z.re, z.im, dz.re, dz.im))?;
    }
    w.flush()?;
    let side = Sidecar {
        equation: p.equation,
        kappa: p.kappa,
        grid: *p.grid.spec(),
        ansatz: ansatz.clone(),
        log_coeff: p.log_coeff,
        origin_pos: p.pos.origin,
        origin_neg: p.neg.as_ref().map(|b| b.origin),
    };
    std::fs::write(json_path, serde_json::to_string_pretty(&side)?)?;
    Ok(())
}

/// Read a profile written by [`write_profile`].
pub fn read_profile(csv_path: &Path, json_path: &Path) -> Result<(Profile, Sidecar)> {
    let side: Sidecar = serde_json::from_str(&std::fs::read_to_string(json_path)?)?;
    let grid = FrequencyGrid::build(side.grid)?;
    let mut r = csv::Reader::from_path(csv_path)?;
    let headers = r.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["xi", "re_z", "im_z", "re_dz", "im_dz"] {
        return Err(Error::Format(format!("unexpected header {:?}", headers)));
    }
    let mut rows: Vec<(f64, C64, C64)> = Vec::new();
    for rec in r.deserialize() {
        let (xi, a, b, c, d): (f64, f64, f64, f64, f64) = rec?;
        rows.push((xi, C64::new(a, b), C64::new(c, d)));
    }
    let n = grid.len();
    let split = |rows: &[(f64, C64, C64)]| -> (Vec<C64>, Vec<C64>) {
        (rows.iter().map(|r| r.1).collect(), rows.iter().map(|r| r.2).collect())
    };
    let (pos_rows, neg_rows): (Vec<_>, Vec<_>) = rows.into_iter().partition(|r| r.0 > 0.0);
    if pos_rows.len() != n {
        return Err(Error::Format(format!("expected {n} positive nodes, found {}", pos_rows.len())));
    }
    for (r, x) in pos_rows.iter().zip(grid.nodes()) {
        if (r.0 - x).abs() > 1e-12 * x.max(1.0) {
            return Err(Error::Format(format!("node {} does not match grid node {x}", r.0)));
        }
    }
    let (zp, dzp) = split(&pos_rows);
    let neg = if side.equation.is_hermitian() {
        None
    } else {
        if neg_rows.len() != n {
            return Err(Error::Format(format!("expected {n} negative nodes, found {}", neg_rows.len())));
        }
        let mut neg_rows = neg_rows;
        neg_rows.reverse();
        let (zn, dzn) = split(&neg_rows);
        Some((zn, dzn, side.origin_neg))
    };
    let p = Profile::from_samples(
        side.equation,
        grid,
        side.kappa,
        side.log_coeff,
        (zp, dzp, Some(side.origin_pos)),
        neg,
    );
    Ok((p, side))
}
