//! Closed-form high-frequency ansätze `S_A` and their derivatives.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::profile_space::Equation;
use crate::{Error, Result, C64};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Smooth cutoff: 0 below 1/2, 1 above 1, quintic smoothstep in between.
pub fn chi(xi: f64) -> f64 {
    if xi <= 0.5 {
        0.0
    } else if xi >= 1.0 {
        1.0
    } else {
        let t = 2.0 * xi - 1.0;
        t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    }
}

/// Exact derivative of [`chi`].
pub fn chi_prime(xi: f64) -> f64 {
    if xi <= 0.5 || xi >= 1.0 {
        0.0
    } else {
        let t = 2.0 * xi - 1.0;
        2.0 * 30.0 * t * t * (1.0 - t) * (1.0 - t)
    }
}

/// Which constants to use for the oscillating correction terms.
///
/// `Printed` reproduces the closed forms exactly as stated. `Matched` uses the
/// constants obtained by matching the stationary-phase expansion of the
/// multilinear operators; only these make the remainder decay.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coefficients {
    Printed,
    #[default]
    Matched,
}

/// MBO log-phase rate `a` and oscillating amplitude `B`, as printed.
pub fn mbo_phase_params(amp: C64, c: f64) -> (f64, C64) {
    let a = (12.0 * amp.norm_sqr() + 3.0 * c * c) / (8.0 * PI);
    let b = I * (3.0 * 3f64.sqrt() / (8.0 * PI)) * amp.powi(3);
    (a, b)
}

/// MBO `a` and `B` matched to the operator's stationary-phase expansion: three
/// high×low×low placements of weight `π/η^{3/2}` each, and the `(η/3,η/3,η/3)`
/// point contributing `−3πi A³ e^{−3ia log 3} e^{2iη²/3+3ia log η} / η^{3/2}`.
pub fn mbo_phase_params_matched(amp: C64, c: f64) -> (f64, C64) {
    let a = 3.0 * (amp.norm_sqr() + c * c) / (2.0 * PI);
    let b = -I * (9.0 / (8.0 * PI)) * amp.powi(3) * (-I * 3.0 * a * 3f64.ln()).exp();
    (a, b)
}

/// MBO amplitude of the `e^{iξ²/2 + 2ia log ξ}/ξ²` term: two high factors at
/// `ξ/2` against the zero-frequency value `c`. Under the `|η|^{−1/2}` weight the
/// low factor only contributes `η^{−1/2}`, so this density term falls like `1/ξ`
/// and the remainder cannot decay in `Z^κ` without it.
pub fn mbo_mixed_amplitude(amp: C64, c: f64, a: f64) -> C64 {
    (3.0 / PI) * C64::from_polar(1.0, -PI / 4.0 - 2.0 * a * 2f64.ln()) * amp * amp * c
}

/// Parameters of the ansatz for one equation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnsatzParams {
    pub equation: Equation,
    /// High-frequency amplitude `A`.
    pub amplitude: C64,
    /// Zero-frequency value `c`.
    pub c: C64,
    /// Log-phase rate: `a` for MBO, `3|A|²/4π` for mKdV, `|A|²/2π` for NLS, 0 for KDV4.
    pub rate: f64,
    /// MBO amplitude `B` of the `e^{2iξ²/3}/ξ²` term.
    pub b: C64,
    /// MBO amplitude of the `e^{iξ²/2}/ξ²` term, see [`mbo_mixed_amplitude`].
    #[serde(default)]
    pub mixed: C64,
    /// mKdV amplitude of the `e^{−8iξ³/9}/ξ³` term.
    pub correction: C64,
    pub coefficients: Coefficients,
}

impl AnsatzParams {
    pub fn zero(equation: Equation) -> Self {
        AnsatzParams {
            equation,
            amplitude: C64::default(),
            c: C64::default(),
            rate: 0.0,
            b: C64::default(),
            mixed: C64::default(),
            correction: C64::default(),
            coefficients: Coefficients::Matched,
        }
    }

    pub fn kdv4(amp: C64) -> Self {
        AnsatzParams { amplitude: amp, ..Self::zero(Equation::Kdv4) }
    }

    pub fn nls(amp: C64) -> Self {
        AnsatzParams { amplitude: amp, rate: amp.norm_sqr() / (2.0 * PI), ..Self::zero(Equation::Nls) }
    }

    pub fn mkdv(amp: C64, coefficients: Coefficients) -> Self {
        let beta = 3.0 * amp.norm_sqr() / (4.0 * PI);
        let log3 = 3f64.ln();
        let correction = match coefficients {
            Coefficients::Matched => {
                I * (3.0 * 3f64.sqrt() / (32.0 * PI)) * amp.powi(3) * (I * 3.0 * beta * log3).exp()
            }
            Coefficients::Printed => {
                I * 3.0 * amp.norm_sqr() * amp * (-I * beta * log3).exp() / (16.0 * 2f64.sqrt() * PI)
            }
        };
        AnsatzParams { amplitude: amp, rate: beta, correction, coefficients, ..Self::zero(Equation::Mkdv) }
    }

    pub fn mbo(amp: C64, c: f64, coefficients: Coefficients) -> Self {
        let (a, b, mixed) = match coefficients {
            Coefficients::Printed => {
                let (a, b) = mbo_phase_params(amp, c);
                (a, b, C64::default())
            }
            Coefficients::Matched => {
                let (a, b) = mbo_phase_params_matched(amp, c);
                (a, b, mbo_mixed_amplitude(amp, c, a))
            }
        };
        AnsatzParams {
            amplitude: amp,
            c: C64::new(c, 0.0),
            rate: a,
            b,
            mixed,
            coefficients,
            ..Self::zero(Equation::Mbo)
        }
    }

    /// Rebuild with a new amplitude, recomputing the dependent parameters.
    pub fn with_amplitude(&self, amp: C64) -> Self {
        let mut p = match self.equation {
            Equation::Kdv4 => Self::kdv4(amp),
            Equation::Nls => Self::nls(amp),
            Equation::Mkdv => Self::mkdv(amp, self.coefficients),
            Equation::Mbo => Self::mbo(amp, self.c.re, self.coefficients),
        };
        p.c = self.c;
        p
    }

    /// Reject amplitudes above the smallness threshold.
    pub fn validate(&self, threshold: f64) -> Result<()> {
        if self.amplitude.norm() > threshold || self.c.norm() > threshold {
            return Err(Error::Config(format!(
                "amplitude |A| = {:.3e}, |c| = {:.3e} exceeds the smallness threshold {threshold}",
                self.amplitude.norm(),
                self.c.norm()
            )));
        }
        Ok(())
    }

    /// `S_A` for `ξ > 0` (or both signs for NLS).
    fn value_pos(&self, xi: f64) -> C64 {
        let a = xi.abs();
        let cut = chi(a);
        if cut == 0.0 {
            return C64::default();
        }
        let l = a.ln();
        let amp = self.amplitude;
        match self.equation {
            Equation::Kdv4 => amp * cut,
            Equation::Nls => amp * (I * self.rate * l).exp() * cut,
            Equation::Mkdv => {
                let lead = amp * (-I * self.rate * l).exp();
                let osc = self.correction * (-I * (3.0 * self.rate * l + 8.0 * a * a * a / 9.0)).exp() / (a * a * a);
                (lead + osc) * cut
            }
            Equation::Mbo => {
                let lead = amp * (I * self.rate * l).exp();
                let osc = self.b * (I * (2.0 * a * a / 3.0 + 3.0 * self.rate * l)).exp() / (a * a);
                let mixed = self.mixed * (I * (a * a / 2.0 + 2.0 * self.rate * l)).exp() / (a * a);
                (lead + osc + mixed) * cut
            }
        }
    }

    /// `dS_A/dξ` for `ξ > 0` (or both signs for NLS).
    fn deriv_pos(&self, xi: f64) -> C64 {
        let a = xi.abs();
        if a <= 0.5 {
            return C64::default();
        }
        let cut = chi(a);
        let dcut = chi_prime(a);
        let l = a.ln();
        let amp = self.amplitude;
        match self.equation {
            Equation::Kdv4 => amp * dcut,
            Equation::Nls => {
                let e = amp * (I * self.rate * l).exp();
                // d/dξ of χ(|ξ|) is χ′ sgn ξ and d/dξ log|ξ| = 1/ξ
                e * (dcut * xi.signum()) + e * cut * I * self.rate / xi
            }
            Equation::Mkdv => {
                let lead = amp * (-I * self.rate * l).exp();
                let osc = self.correction * (-I * (3.0 * self.rate * l + 8.0 * a * a * a / 9.0)).exp() / (a * a * a);
                let dlead = lead * (-I * self.rate / a);
                let dosc = osc * (-I * 3.0 * self.rate / a - I * 8.0 * a * a / 3.0 - 3.0 / a);
                (lead + osc) * dcut + (dlead + dosc) * cut
            }
            Equation::Mbo => {
                let lead = amp * (I * self.rate * l).exp();
                let osc = self.b * (I * (2.0 * a * a / 3.0 + 3.0 * self.rate * l)).exp() / (a * a);
                let dlead = lead * (I * self.rate / a);
                let dosc = osc * (I * 4.0 * a / 3.0 + I * 3.0 * self.rate / a - 2.0 / a);
                let mixed = self.mixed * (I * (a * a / 2.0 + 2.0 * self.rate * l)).exp() / (a * a);
                let dmixed = mixed * (I * a + I * 2.0 * self.rate / a - 2.0 / a);
                (lead + osc + mixed) * dcut + (dlead + dosc + dmixed) * cut
            }
        }
    }

    /// `S_A(ξ)`; Hermitian equations use `S(−ξ) = conj S(ξ)`.
    pub fn eval(&self, xi: f64) -> C64 {
        if xi < 0.0 && self.equation.is_hermitian() {
            self.value_pos(-xi).conj()
        } else {
            self.value_pos(xi)
        }
    }

    /// `S_A′(ξ)`.
    pub fn eval_deriv(&self, xi: f64) -> C64 {
        if xi < 0.0 && self.equation.is_hermitian() {
            -self.deriv_pos(-xi).conj()
        } else {
            self.deriv_pos(xi)
        }
    }
}
