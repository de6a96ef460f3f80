//! Exact polynomial Morse charts for polynomial graphs `f = |x|^2 + G`.
//!
//! The chart `X'(u) = u + P_2(u) + P_3(u) + ...` is built degree by degree:
//! if the defect `f(X') - |u|^2` starts with the homogeneous part `Q` of
//! degree `j + 1`, adding `P_j = -grad Q / (2 (j + 1))` removes it, since
//! `2 u . P_j = -Q` by Euler's identity.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::cancel::CancelToken;
use crate::error::{Error, Result};
use crate::exactpoly::MultiPoly;

fn check_normalized(f: &MultiPoly) -> Result<MultiPoly> {
    let d = f.dim();
    let g = f - &MultiPoly::norm_squared(d);
    match g.min_degree() {
        Some(k) if k < 3 => Err(Error::HessianNotNormalized(format!(
            "f - |x|^2 has a nonzero part of degree {k}"
        ))),
        _ => Ok(g),
    }
}

/// Components of `X'` with `f(X'(u)) = |u|^2 + O(|u|^{order + 2})`.
pub fn morse_series(f: &MultiPoly, order: u32, cancel: Option<&CancelToken>) -> Result<Vec<MultiPoly>> {
    check_normalized(f)?;
    let d = f.dim();
    let target = MultiPoly::norm_squared(d);
    let mut x: Vec<MultiPoly> = (0..d).map(|i| MultiPoly::var(d, i)).collect();
    for j in 2..=order {
        if let Some(c) = cancel {
            c.check()?;
        }
        let defect = &f.compose_truncated(&x, j + 1)? - &target;
        if let Some(low) = defect.min_degree() {
            if low < j + 1 {
                return Err(Error::NoConvergence { iterations: j as usize, residual: f64::NAN });
            }
        }
        let q = defect.homogeneous_component(j + 1);
        if q.is_zero() {
            continue;
        }
        let scale = BigRational::new(BigInt::from(-1), BigInt::from(2 * (j as i64 + 1)));
        for (xi, gq) in x.iter_mut().zip(q.gradient()) {
            *xi = &*xi + &gq.scale(&scale);
        }
    }
    Ok(x)
}

/// Leading Taylor components of the weights `T_k o X` and
/// `<grad T_k o X, n o X>` along an exact Morse chart, where
/// `n = (-grad f, 1)` is the unnormalized inward normal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightCheck {
    pub m: u32,
    pub k: u32,
    /// Lowest degree present in `T_k o X` (up to degree `m k`).
    pub t_low_degree: Option<u32>,
    /// Degree-`m k` part equals `H_m^k`.
    pub t_leading_matches: bool,
    pub grad_low_degree: Option<u32>,
    /// Degree-`m (k - 1)` part equals `k H_m^{k-1}`.
    pub grad_leading_matches: bool,
}

impl WeightCheck {
    pub fn passed(&self) -> bool {
        self.t_leading_matches
            && self.grad_leading_matches
            && self.t_low_degree == Some(self.m * self.k)
            && self.grad_low_degree == Some(self.m * (self.k - 1))
    }
}

pub fn weight_asymptotics(f: &MultiPoly, m: u32, k: u32, cancel: Option<&CancelToken>) -> Result<WeightCheck> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be positive".into()));
    }
    let g = check_normalized(f)?;
    if g.min_degree() != Some(m) {
        return Err(Error::InvalidInput(format!(
            "f - |x|^2 must start in degree {m}, found {:?}",
            g.min_degree()
        )));
    }
    let d = f.dim();
    let h = f.homogeneous_component(m);
    let top = m * k;
    let x = morse_series(f, top, cancel)?;
    let sq = x.iter().fold(MultiPoly::zero(d), |acc, p| &acc + &p.mul_truncated(p, top).expect("same dimension"));
    let t1 = &f.compose_truncated(&x, top)? - &sq;
    let tk = t1.pow_truncated(k, top);
    let t_low = tk.min_degree();
    let t_leading_matches = tk.homogeneous_component(top) == h.pow(k);

    if let Some(c) = cancel {
        c.check()?;
    }
    let low = m * (k - 1);
    let grad_f: Vec<MultiPoly> = f.gradient().iter().map(|p| p.compose_truncated(&x, low)).collect::<Result<_>>()?;
    let mut radial = MultiPoly::one(d);
    let two = BigRational::from_integer(BigInt::from(2));
    for (xi, gi) in x.iter().zip(&grad_f) {
        radial = &radial + &xi.mul_truncated(gi, low)?.scale(&two);
    }
    let kk = BigRational::from_integer(BigInt::from(k));
    let weight = t1.pow_truncated(k - 1, low).mul_truncated(&radial, low)?.scale(&kk);
    let grad_low = weight.min_degree();
    let grad_leading_matches = weight.homogeneous_component(low) == h.pow(k - 1).scale(&kk);
    Ok(WeightCheck { m, k, t_low_degree: t_low, t_leading_matches, grad_low_degree: grad_low, grad_leading_matches })
}
