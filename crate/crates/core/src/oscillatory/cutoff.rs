use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smooth even cut-off: `1` on `[0, plateau c]`, `0` beyond `c`, with the
/// exponential-bump transition `g(s) = E(s)/(E(s) + E(1-s))`, `E(s) = exp(-1/s)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub c: f64,
    pub plateau: f64,
}

impl CutoffSpec {
    pub fn new(c: f64, plateau: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidInput(format!("cap height must be positive, got {c}")));
        }
        if !(plateau > 0.0 && plateau < 1.0) {
            return Err(Error::InvalidInput(format!("plateau must lie in (0, 1), got {plateau}")));
        }
        Ok(CutoffSpec { c, plateau })
    }

    pub fn width(&self) -> f64 {
        (1.0 - self.plateau) * self.c
    }

    /// `rho_c^{(deriv)}(t)` for `deriv` in `0..=2`.
    pub fn eval(&self, t: f64, deriv: u8) -> f64 {
        let a = t.abs();
        let start = self.plateau * self.c;
        if a <= start {
            return if deriv == 0 { 1.0 } else { 0.0 };
        }
        if a >= self.c {
            return 0.0;
        }
        let w = self.c - start;
        let s = (a - start) / w;
        let (g, g1, g2) = transition(s);
        match deriv {
            0 => 1.0 - g,
            1 => -g1 / w * t.signum(),
            2 => -g2 / (w * w),
            _ => panic!("cut-off derivatives are available up to order 2"),
        }
    }

    /// `(rho, rho', rho'')` at `t >= 0`.
    pub(crate) fn eval_all(&self, t: f64) -> (f64, f64, f64) {
        let start = self.plateau * self.c;
        if t <= start {
            return (1.0, 0.0, 0.0);
        }
        if t >= self.c {
            return (0.0, 0.0, 0.0);
        }
        let w = self.c - start;
        let (g, g1, g2) = transition((t - start) / w);
        (1.0 - g, -g1 / w, -g2 / (w * w))
    }
}

pub fn cutoff_eval(spec: &CutoffSpec, t: f64, deriv: u8) -> f64 {
    spec.eval(t, deriv)
}

/// `g, g', g''` on `(0, 1)`, written as a logistic function of
/// `z = 1/(1-s) - 1/s`.
fn transition(s: f64) -> (f64, f64, f64) {
    let z = 1.0 / (1.0 - s) - 1.0 / s;
    let z1 = 1.0 / ((1.0 - s) * (1.0 - s)) + 1.0 / (s * s);
    let z2 = 2.0 / (1.0 - s).powi(3) - 2.0 / s.powi(3);
    let e = (-z.abs()).exp();
    let sig = if z >= 0.0 { 1.0 / (1.0 + e) } else { e / (1.0 + e) };
    let d1 = e / ((1.0 + e) * (1.0 + e));
    let d2 = d1 * (1.0 - 2.0 * sig);
    (sig, d1 * z1, d2 * z1 * z1 + d1 * z2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_values() {
        let c = CutoffSpec::new(0.3, 1.0 / 3.0).unwrap();
        assert_eq!(c.eval(0.0, 0), 1.0);
        assert_eq!(c.eval(0.3, 0), 0.0);
        assert_eq!(c.eval(0.3, 1), 0.0);
        assert_eq!(c.eval(0.05, 2), 0.0);
        assert_eq!(c.eval(-0.05, 0), 1.0);
        assert_eq!(c.eval(0.5, 2), 0.0);
        // flat to all orders at both ends of the transition
        for s in [1e-3, 1.0 - 1e-3] {
            let t = 0.1 + s * 0.2;
            assert!(c.eval(t, 1).abs() < 1e-200 && c.eval(t, 2).abs() < 1e-200);
        }
        assert!(CutoffSpec::new(0.3, 1.0).is_err());
        assert!(CutoffSpec::new(-1.0, 0.5).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let c = CutoffSpec::new(2.0, 0.25).unwrap();
        let h = 1e-5;
        for t in [0.6, 0.9, 1.25, 1.7, 1.95, -1.1] {
            let d1 = (c.eval(t + h, 0) - c.eval(t - h, 0)) / (2.0 * h);
            let d2 = (c.eval(t + h, 1) - c.eval(t - h, 1)) / (2.0 * h);
            assert!((d1 - c.eval(t, 1)).abs() < 1e-7, "t={t}");
            assert!((d2 - c.eval(t, 2)).abs() < 1e-6, "t={t}");
        }
    }

    #[test]
    fn symmetric_and_monotone() {
        let c = CutoffSpec::new(1.0, 0.4).unwrap();
        let mut prev = 1.0;
        for i in 0..=100 {
            let t = i as f64 / 100.0;
            let v = c.eval(t, 0);
            assert!(v <= prev && (0.0..=1.0).contains(&v));
            assert_eq!(v, c.eval(-t, 0));
            prev = v;
        }
        // integral of rho' over the transition is -1
        let rule = crate::quadrature::GaussLegendre::new(40);
        let total = crate::quadrature::composite(&rule, 0.4, 1.0, 8, |t| c.eval(t, 1));
        assert!((total + 1.0).abs() < 1e-13);
    }
}
