use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// The four dispersive equations handled by the library.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Equation {
    Mkdv,
    Kdv4,
    Mbo,
    Nls,
}

impl Equation {
    pub const ALL: [Equation; 4] = [Equation::Mkdv, Equation::Kdv4, Equation::Mbo, Equation::Nls];

    /// Order `n` of the dispersive term.
    pub fn dispersion_order(self) -> u32 {
        match self {
            Equation::Mkdv | Equation::Kdv4 => 3,
            Equation::Mbo | Equation::Nls => 2,
        }
    }

    /// Degree `k` of the nonlinearity.
    pub fn degree(self) -> usize {
        match self {
            Equation::Kdv4 => 4,
            _ => 3,
        }
    }

    /// Number of derivatives `m` falling on the nonlinearity.
    pub fn derivative_order(self) -> u32 {
        match self {
            Equation::Nls => 0,
            _ => 1,
        }
    }

    /// Scaling exponent `(n − m)/(k − 1)`.
    pub fn scaling_exponent(self) -> f64 {
        (self.dispersion_order() as f64 - self.derivative_order() as f64) / (self.degree() as f64 - 1.0)
    }

    /// Power of `t` in the self-similar prefactor `t^{−α} P(x / t^{1/n})`.
    pub fn amplitude_decay(self) -> f64 {
        match self {
            Equation::Mkdv => 1.0 / 3.0,
            Equation::Kdv4 => 2.0 / 9.0,
            Equation::Mbo => 0.25,
            Equation::Nls => 0.5,
        }
    }

    /// Power of `|ξ|` dividing each factor inside the multilinear operator.
    /// Equals the critical Fourier–Lebesgue index `1 − scaling_exponent`.
    pub fn weight_exponent(self) -> f64 {
        match self {
            Equation::Mkdv | Equation::Nls => 0.0,
            Equation::Kdv4 => 1.0 / 3.0,
            Equation::Mbo => 0.5,
        }
    }

    /// Dispersion symbol `P(ξ)`: `ξ³`, `ξ|ξ|` or `ξ²`.
    pub fn phase(self, xi: f64) -> f64 {
        match self {
            Equation::Mkdv | Equation::Kdv4 => xi * xi * xi,
            Equation::Mbo => xi * xi.abs(),
            Equation::Nls => xi * xi,
        }
    }

    /// Phase `μ(ξ)` with `f̂(ξ) = e^{iμ(ξ)} |ξ|^{−s} f̃(ξ)` relating the physical
    /// transform to the modulated profile.
    pub fn modulation(self, xi: f64) -> f64 {
        match self {
            Equation::Mkdv | Equation::Kdv4 => xi * xi * xi,
            Equation::Mbo => -xi * xi.abs(),
            Equation::Nls => -xi * xi,
        }
    }

    /// Derivative of [`Equation::modulation`].
    pub fn modulation_prime(self, xi: f64) -> f64 {
        match self {
            Equation::Mkdv | Equation::Kdv4 => 3.0 * xi * xi,
            Equation::Mbo => -2.0 * xi.abs(),
            Equation::Nls => -2.0 * xi,
        }
    }

    /// Whether the profile is the transform of a real field, so `z(−ξ) = conj z(ξ)`.
    pub fn is_hermitian(self) -> bool {
        self != Equation::Nls
    }

    /// Open interval of admissible decay rates κ.
    pub fn kappa_range(self) -> (f64, f64) {
        match self {
            Equation::Mkdv => (0.5, 4.0 / 7.0),
            Equation::Kdv4 => (5.0 / 8.0, 2.0 / 3.0),
            Equation::Mbo => (0.0, 0.25),
            Equation::Nls => (0.0, 0.5),
        }
    }

    pub fn default_kappa(self) -> f64 {
        match self {
            Equation::Mkdv => 0.55,
            Equation::Kdv4 => 0.64,
            Equation::Mbo => 0.2,
            Equation::Nls => 0.3,
        }
    }

    /// Default largest grid frequency. The cubic phases need grids growing like
    /// `far_cut³`, so they get a smaller default.
    pub fn default_far_cut(self) -> f64 {
        match self {
            Equation::Mkdv | Equation::Kdv4 => 100.0,
            Equation::Mbo | Equation::Nls => 1000.0,
        }
    }

    /// Check that κ lies in the admissible interval.
    pub fn check_kappa(self, kappa: f64) -> Result<()> {
        let (lo, hi) = self.kappa_range();
        if kappa > lo && kappa < hi {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "kappa = {kappa} outside the admissible interval ({lo:.6}, {hi:.6}) for {self}"
            )))
        }
    }

    /// Whether the zero-frequency value `c` drives the construction (otherwise `A` does).
    pub fn driven_by_c(self) -> bool {
        self != Equation::Nls
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Equation::Mkdv => "mkdv",
            Equation::Kdv4 => "kdv4",
            Equation::Mbo => "mbo",
            Equation::Nls => "nls",
        };
        f.write_str(s)
    }
}

impl FromStr for Equation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mkdv" => Ok(Equation::Mkdv),
            "kdv4" | "4kdv" => Ok(Equation::Kdv4),
            "mbo" => Ok(Equation::Mbo),
            "nls" => Ok(Equation::Nls),
            other => Err(Error::Config(format!("unknown equation '{other}'"))),
        }
    }
}
