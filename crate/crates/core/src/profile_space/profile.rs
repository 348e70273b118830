use serde::{Deserialize, Serialize};

use super::{Equation, FrequencyGrid, Pchip};
use crate::ansatz::{chi, chi_prime};
use crate::C64;

/// Behavior of one branch as `|ξ| → 0`: `z ≈ value + slope·|ξ| (+ log part)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Origin {
    pub value: C64,
    /// Derivative with respect to `|ξ|`.
    pub slope: C64,
}

/// Power-law continuation beyond `far_cut`: `z ≈ coeff · |ξ|^{−exponent}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Tail {
    pub coeff: C64,
    pub exponent: f64,
}

impl Tail {
    /// Fit the decay exponent on the last decade of nodes and match the value at
    /// the last node, so the continuation is continuous.
    pub fn fit(nodes: &[f64], z: &[C64]) -> Tail {
        let far = *nodes.last().expect("nonempty");
        let last = *z.last().expect("nonempty");
        if last.norm() == 0.0 {
            return Tail::default();
        }
        let pts: Vec<(f64, f64)> = nodes
            .iter()
            .zip(z)
            .filter(|(x, v)| **x >= far / 10.0 && **x > 1.0 && v.norm() > 0.0)
            .map(|(x, v)| (x.ln(), v.norm().ln()))
            .collect();
        let exponent = if pts.len() >= 3 {
            let n = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            (-sxy / sxx).clamp(0.0, 8.0)
        } else {
            0.0
        };
        Tail { coeff: last * far.powf(exponent), exponent }
    }

    pub fn value(&self, a: f64) -> C64 {
        self.coeff * a.powf(-self.exponent)
    }

    /// Derivative with respect to `|ξ|`.
    pub fn deriv(&self, a: f64) -> C64 {
        self.coeff * (-self.exponent * a.powf(-self.exponent - 1.0))
    }
}

/// One sign of frequency: values and derivatives at `|ξ|` = grid nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    /// `z` at the nodes.
    pub z: Vec<C64>,
    /// `dz/dξ` (the true derivative, not with respect to `|ξ|`) at the nodes.
    pub dz: Vec<C64>,
    pub origin: Origin,
    pub tail: Tail,
    values: Pchip,
    derivs: Pchip,
}

/// Interpolation abscissa: linear below 1, logarithmic above.
fn abscissa(a: f64) -> f64 {
    if a <= 1.0 {
        a
    } else {
        1.0 + a.ln()
    }
}

fn log_part(a: f64) -> f64 {
    a.ln() * (1.0 - chi(a))
}

impl Branch {
    fn new(grid: &FrequencyGrid, z: Vec<C64>, dz: Vec<C64>, origin: Option<Origin>, log_coeff: C64, negative: bool) -> Self {
        let nodes = grid.nodes();
        assert_eq!(nodes.len(), z.len());
        assert_eq!(nodes.len(), dz.len());
        let u: Vec<f64> = nodes.iter().map(|&a| abscissa(a)).collect();
        let reg: Vec<C64> = nodes.iter().zip(&z).map(|(&a, &v)| v - log_coeff * log_part(a)).collect();
        let origin = origin.unwrap_or_else(|| {
            let slope = (reg[1] - reg[0]) / (nodes[1] - nodes[0]);
            Origin { value: reg[0] - slope * nodes[0], slope }
        });
        let tail = Tail::fit(nodes, &z);
        // slopes in the interpolation abscissa from the stored derivatives
        let orient = if negative { -1.0 } else { 1.0 };
        let slopes = nodes
            .iter()
            .zip(&dz)
            .map(|(&a, &d)| {
                let log_slope = (1.0 - chi(a)) / a - a.ln() * chi_prime(a);
                let da = d * orient - log_coeff * log_slope;
                if a <= 1.0 {
                    da
                } else {
                    da * a
                }
            })
            .collect();
        let values = Pchip::with_slopes(u.clone(), reg, slopes);
        let derivs = Pchip::new(u, dz.clone());
        Branch { z, dz, origin, tail, values, derivs }
    }
}

/// The remainder `z` sampled on a frequency grid, with `z′` and the decay rate κ.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    pub equation: Equation,
    pub grid: FrequencyGrid,
    pub kappa: f64,
    /// Coefficient `α` of `α·log|ξ|` near zero (NLS only, zero otherwise).
    pub log_coeff: C64,
    pub pos: Branch,
    /// Negative frequencies, stored only when there is no Hermitian symmetry.
    pub neg: Option<Branch>,
}

impl Profile {
    pub fn zero(equation: Equation, grid: FrequencyGrid, kappa: f64) -> Self {
        let n = grid.len();
        let zeros = vec![C64::new(0.0, 0.0); n];
        let neg = (!equation.is_hermitian())
            .then(|| Branch::new(&grid, zeros.clone(), zeros.clone(), Some(Origin::default()), C64::default(), true));
        let pos = Branch::new(&grid, zeros.clone(), zeros, Some(Origin::default()), C64::default(), false);
        Profile { equation, grid, kappa, log_coeff: C64::default(), pos, neg }
    }

    /// Assemble from node samples. `neg` must be present exactly when the equation
    /// is not Hermitian. Origins left as `None` are extrapolated from the first nodes.
    #[allow(clippy::too_many_arguments)]
    pub fn from_samples(
        equation: Equation,
        grid: FrequencyGrid,
        kappa: f64,
        log_coeff: C64,
        pos: (Vec<C64>, Vec<C64>, Option<Origin>),
        neg: Option<(Vec<C64>, Vec<C64>, Option<Origin>)>,
    ) -> Self {
        assert_eq!(neg.is_some(), !equation.is_hermitian(), "branch layout does not match {equation}");
        let pos = Branch::new(&grid, pos.0, pos.1, pos.2, log_coeff, false);
        let neg = neg.map(|(z, dz, o)| Branch::new(&grid, z, dz, o, log_coeff, true));
        Profile { equation, grid, kappa, log_coeff, pos, neg }
    }

    /// Rebuild with the same grid and new samples, keeping origins as given.
    pub fn with_samples(&self, pos: (Vec<C64>, Vec<C64>, Origin), neg: Option<(Vec<C64>, Vec<C64>, Origin)>, log_coeff: C64) -> Self {
        Profile::from_samples(
            self.equation,
            self.grid.clone(),
            self.kappa,
            log_coeff,
            (pos.0, pos.1, Some(pos.2)),
            neg.map(|(a, b, o)| (a, b, Some(o))),
        )
    }

    fn branch(&self, xi: f64) -> (&Branch, bool) {
        match (&self.neg, xi < 0.0) {
            (Some(b), true) => (b, false),
            (None, true) => (&self.pos, true),
            _ => (&self.pos, false),
        }
    }

    /// `z(ξ)`. Hermitian equations reflect negative frequencies exactly.
    pub fn evaluate(&self, xi: f64) -> C64 {
        let (b, mirror) = self.branch(xi);
        let v = self.branch_value(b, xi.abs());
        if mirror {
            v.conj()
        } else {
            v
        }
    }

    /// `z′(ξ)`.
    pub fn evaluate_deriv(&self, xi: f64) -> C64 {
        let (b, mirror) = self.branch(xi);
        let a = xi.abs();
        let sign = if xi < 0.0 { -1.0 } else { 1.0 };
        // derivative with respect to ξ on the branch that owns |ξ|
        let d = if a < self.grid.near_zero_cut() {
            let da = b.origin.slope + if a > 0.0 { self.log_coeff / a } else { C64::default() };
            da * if mirror { 1.0 } else { sign }
        } else if a > self.grid.far_cut() {
            b.tail.deriv(a) * if mirror { 1.0 } else { sign }
        } else if let Some(i) = self.grid.index_of(a) {
            b.dz[i]
        } else {
            b.derivs.eval(abscissa(a))
        };
        if mirror {
            // z(ξ) = conj z(−ξ)  ⇒  z′(ξ) = −conj z′(−ξ)
            -d.conj()
        } else {
            d
        }
    }

    fn branch_value(&self, b: &Branch, a: f64) -> C64 {
        let grid = &self.grid;
        if a < grid.near_zero_cut() {
            let log = if a > 0.0 { self.log_coeff * a.ln() } else { C64::default() };
            return b.origin.value + b.origin.slope * a + log;
        }
        if a > grid.far_cut() {
            return b.tail.value(a);
        }
        if let Some(i) = grid.index_of(a) {
            return b.z[i];
        }
        b.values.eval(abscissa(a)) + self.log_coeff * log_part(a)
    }

    /// All samples `(ξ, z, z′)` in ascending ξ; negative frequencies only for NLS.
    pub fn samples(&self) -> Vec<(f64, C64, C64)> {
        let nodes = self.grid.nodes();
        let mut out = Vec::with_capacity(2 * nodes.len());
        if let Some(neg) = &self.neg {
            out.extend(nodes.iter().zip(&neg.z).zip(&neg.dz).rev().map(|((&x, &z), &dz)| (-x, z, dz)));
        }
        out.extend(nodes.iter().zip(&self.pos.z).zip(&self.pos.dz).map(|((&x, &z), &dz)| (x, z, dz)));
        out
    }

    /// Samples over both signs, mirroring Hermitian profiles.
    pub fn two_sided_samples(&self) -> Vec<(f64, C64, C64)> {
        if self.neg.is_some() {
            return self.samples();
        }
        let nodes = self.grid.nodes();
        let mut out = Vec::with_capacity(2 * nodes.len());
        let pos = || nodes.iter().zip(&self.pos.z).zip(&self.pos.dz);
        out.extend(pos().rev().map(|((&x, &z), &dz)| (-x, z.conj(), -dz.conj())));
        out.extend(pos().map(|((&x, &z), &dz)| (x, z, dz)));
        out
    }

    /// `(1 − θ)·self + θ·other` on the same grid.
    pub fn blend(&self, other: &Profile, theta: f64) -> Profile {
        let mix = |a: &Branch, b: &Branch| {
            let z = a.z.iter().zip(&b.z).map(|(x, y)| x * (1.0 - theta) + y * theta).collect();
            let dz = a.dz.iter().zip(&b.dz).map(|(x, y)| x * (1.0 - theta) + y * theta).collect();
            let o = Origin {
                value: a.origin.value * (1.0 - theta) + b.origin.value * theta,
                slope: a.origin.slope * (1.0 - theta) + b.origin.slope * theta,
            };
            (z, dz, o)
        };
        let pos = mix(&self.pos, &other.pos);
        let neg = match (&self.neg, &other.neg) {
            (Some(a), Some(b)) => Some(mix(a, b)),
            _ => None,
        };
        let log = self.log_coeff * (1.0 - theta) + other.log_coeff * theta;
        self.with_samples(pos, neg, log)
    }

    /// Conjugate reflection `ξ ↦ conj z(−ξ)`; the identity on Hermitian storage
    /// up to conjugating the stored values.
    pub fn conj_reflect(&self) -> Profile {
        let conj_branch = |b: &Branch, flip: bool| {
            let z = b.z.iter().map(|v| v.conj()).collect();
            let s = if flip { -1.0 } else { 1.0 };
            let dz = b.dz.iter().map(|v| v.conj() * s).collect();
            (z, dz, Origin { value: b.origin.value.conj(), slope: b.origin.slope.conj() })
        };
        match &self.neg {
            None => self.with_samples(conj_branch(&self.pos, false), None, self.log_coeff.conj()),
            Some(neg) => self.with_samples(
                conj_branch(neg, true),
                Some(conj_branch(&self.pos, true)),
                self.log_coeff.conj(),
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile_space::GridSpec;

    fn jap_profile(eq: Equation) -> Profile {
        let grid = FrequencyGrid::build(GridSpec::with_far_cut(100.0)).unwrap();
        let z: Vec<C64> = grid.nodes().iter().map(|&x| C64::new(1.0 / (1.0 + x * x).sqrt(), 0.0)).collect();
        let dz: Vec<C64> = grid.nodes().iter().map(|&x| C64::new(-x / (1.0 + x * x).powf(1.5), 0.0)).collect();
        let neg = (!eq.is_hermitian()).then(|| (z.clone(), dz.iter().map(|v| -v).collect(), None));
        Profile::from_samples(eq, grid, 0.5, C64::default(), (z, dz, None), neg)
    }

    #[test]
    fn node_query_is_exact() {
        let p = jap_profile(Equation::Kdv4);
        for (i, &x) in p.grid.nodes().iter().enumerate() {
            assert_eq!(p.evaluate(x), p.pos.z[i]);
        }
    }

    #[test]
    fn hermitian_reflection_is_exact() {
        let mut p = jap_profile(Equation::Mbo);
        p.pos.z.iter_mut().for_each(|v| *v *= C64::new(0.3, 0.7));
        let p = p.with_samples(
            (p.pos.z.clone(), p.pos.dz.clone(), p.pos.origin),
            None,
            C64::default(),
        );
        for xi in [0.0137, 0.4, 3.3, 57.0] {
            assert_eq!(p.evaluate(-xi), p.evaluate(xi).conj());
        }
    }

    #[test]
    fn midpoint_interpolation_accuracy() {
        let p = jap_profile(Equation::Kdv4);
        let nodes = p.grid.nodes();
        let mut worst: f64 = 0.0;
        for w in nodes.windows(2) {
            let m = 0.5 * (w[0] + w[1]);
            let exact = 1.0 / (1.0 + m * m).sqrt();
            worst = worst.max((p.evaluate(m).re - exact).abs() / exact);
        }
        assert!(worst < 1e-4, "worst relative error {worst}");
    }

    #[test]
    fn tail_continues_the_decay() {
        let p = jap_profile(Equation::Kdv4);
        assert!((p.pos.tail.exponent - 1.0).abs() < 0.01);
        let v = p.evaluate(400.0).re;
        assert!((v - 1.0 / 400.0).abs() < 1e-5);
    }
}
