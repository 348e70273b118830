use crate::C64;

/// Piecewise cubic Hermite interpolant of a complex sequence. [`Pchip::new`]
/// picks monotone Fritsch–Carlson slopes per component; [`Pchip::with_slopes`]
/// takes them from the caller.
#[derive(Clone, Debug, PartialEq)]
pub struct Pchip {
    u: Vec<f64>,
    y: Vec<C64>,
    d: Vec<C64>,
}

fn slopes(u: &[f64], y: &[f64]) -> Vec<f64> {
    let n = u.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let h: Vec<f64> = u.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] > 0.0 {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s * d0 <= 0.0 {
            0.0
        } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            s
        }
    };
    d[0] = end(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

impl Pchip {
    /// `u` must be strictly increasing with at least two entries.
    pub fn new(u: Vec<f64>, y: Vec<C64>) -> Self {
        assert!(u.len() == y.len() && u.len() >= 2, "pchip needs matching arrays of length >= 2");
        let re: Vec<f64> = y.iter().map(|v| v.re).collect();
        let im: Vec<f64> = y.iter().map(|v| v.im).collect();
        let dr = slopes(&u, &re);
        let di = slopes(&u, &im);
        let d = dr.into_iter().zip(di).map(|(a, b)| C64::new(a, b)).collect();
        Pchip { u, y, d }
    }

    /// Cubic Hermite interpolant with prescribed slopes `d = dy/du`.
    pub fn with_slopes(u: Vec<f64>, y: Vec<C64>, d: Vec<C64>) -> Self {
        assert!(u.len() == y.len() && u.len() == d.len() && u.len() >= 2, "hermite needs matching arrays of length >= 2");
        Pchip { u, y, d }
    }

    /// Value at `t`, clamped to the data range.
    pub fn eval(&self, t: f64) -> C64 {
        let n = self.u.len();
        if t <= self.u[0] {
            return self.y[0];
        }
        if t >= self.u[n - 1] {
            return self.y[n - 1];
        }
        let i = self.u.partition_point(|&v| v <= t) - 1;
        let h = self.u[i + 1] - self.u[i];
        let s = (t - self.u[i]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        self.y[i] * h00 + self.d[i] * (h10 * h) + self.y[i + 1] * h01 + self.d[i + 1] * (h11 * h)
    }

    /// Derivative with respect to the abscissa at `t`.
    pub fn eval_deriv(&self, t: f64) -> C64 {
        let n = self.u.len();
        let t = t.clamp(self.u[0], self.u[n - 1]);
        let i = (self.u.partition_point(|&v| v <= t).max(1) - 1).min(n - 2);
        let h = self.u[i + 1] - self.u[i];
        let s = (t - self.u[i]) / h;
        let s2 = s * s;
        let d00 = (6.0 * s2 - 6.0 * s) / h;
        let d10 = 3.0 * s2 - 4.0 * s + 1.0;
        let d01 = (-6.0 * s2 + 6.0 * s) / h;
        let d11 = 3.0 * s2 - 2.0 * s;
        self.y[i] * d00 + self.d[i] * d10 + self.y[i + 1] * d01 + self.d[i + 1] * d11
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_nodes_and_lines() {
        let u: Vec<f64> = (0..10).map(|i| i as f64 * 0.3).collect();
        let y: Vec<C64> = u.iter().map(|&t| C64::new(2.0 * t - 1.0, -t)).collect();
        let p = Pchip::new(u.clone(), y.clone());
        for (t, v) in u.iter().zip(&y) {
            assert_eq!(p.eval(*t), *v);
        }
        let v = p.eval(1.05);
        assert!((v - C64::new(1.1, -1.05)).norm() < 1e-14);
        assert!((p.eval_deriv(1.05) - C64::new(2.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn exact_slopes_give_fourth_order() {
        let err = |n: usize| {
            let u: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
            let y = u.iter().map(|t| C64::new(t.sin(), t.exp())).collect();
            let d = u.iter().map(|t| C64::new(t.cos(), t.exp())).collect();
            let p = Pchip::with_slopes(u, y, d);
            (0..1000)
                .map(|k| {
                    let t = (k as f64 + 0.5) / 1000.0;
                    (p.eval(t) - C64::new(t.sin(), t.exp())).norm()
                })
                .fold(0.0, f64::max)
        };
        let ratio = err(8) / err(16);
        assert!(ratio > 14.0 && ratio < 18.0, "{ratio}");
    }

    #[test]
    fn monotone_data_stays_monotone() {
        let u: Vec<f64> = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        let y: Vec<C64> = [0.0, 0.0, 1.0, 1.0, 1.0].iter().map(|&v| C64::new(v, 0.0)).collect();
        let p = Pchip::new(u, y);
        let mut prev = -1.0;
        for k in 0..=400 {
            let v = p.eval(k as f64 * 0.01).re;
            assert!(v >= prev - 1e-15);
            assert!((-1e-15..=1.0 + 1e-15).contains(&v));
            prev = v;
        }
    }
}
