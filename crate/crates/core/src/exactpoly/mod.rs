//! Exact multivariate polynomials over the rationals.
//!
//! Terms live in an ordered map keyed by [`Exponent`], whose ordering is graded
//! lexicographic, so iteration and serialization are deterministic. No stored
//! coefficient is ever zero.
//!
//! Beyond ring arithmetic the module provides the operators used by the lemma
//! checks: Laplacians and their iterates at the origin, homogeneous
//! components, truncated composition, spherical moments and averages, and the
//! symbol powers `T_k(x) = (x_n - x_1^2 - ... - x_{n-1}^2)^k`.

mod json;
mod random;
mod sphere;

pub use random::{random_homogeneous, random_polynomial};
pub use sphere::{
    radial_constant_alt, radial_laplacian_constant, sphere_area, sphere_monomial_moment, spherical_average,
    PiMultiple, RadialProfile,
};

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exponent vector of a monomial, ordered by total degree and then
/// lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Exponent(Vec<u32>);

impl Exponent {
    pub fn new(exps: Vec<u32>) -> Self {
        Exponent(exps)
    }

    pub fn zero(dim: usize) -> Self {
        Exponent(vec![0; dim])
    }

    pub fn unit(dim: usize, i: usize) -> Self {
        let mut e = vec![0; dim];
        e[i] = 1;
        Exponent(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn add(&self, other: &Exponent) -> Exponent {
        Exponent(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial in `dim` variables with [`BigRational`] coefficients.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MultiPoly {
    dim: usize,
    terms: BTreeMap<Exponent, BigRational>,
}

pub(crate) fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

#[cfg(test)]
pub(crate) fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact rational value of a finite `f64` (every finite double is a dyadic rational).
pub fn rational_from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::InvalidInput(format!("non-finite coefficient {x}")))
}

impl MultiPoly {
    pub fn zero(dim: usize) -> Self {
        MultiPoly { dim, terms: BTreeMap::new() }
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, BigRational::one())
    }

    pub fn constant(dim: usize, c: BigRational) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(Exponent::zero(dim), c);
        p
    }

    /// The coordinate function `x_{i+1}` (zero-based index `i`).
    pub fn var(dim: usize, i: usize) -> Self {
        assert!(i < dim, "variable index {i} out of range for dimension {dim}");
        let mut p = Self::zero(dim);
        p.add_term(Exponent::unit(dim, i), BigRational::one());
        p
    }

    pub fn monomial(exps: Vec<u32>, coeff: BigRational) -> Self {
        let dim = exps.len();
        let mut p = Self::zero(dim);
        p.add_term(Exponent(exps), coeff);
        p
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs; repeated
    /// exponents are summed and zero sums dropped.
    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, BigRational)>,
    {
        let mut p = Self::zero(dim);
        for (e, c) in terms {
            if e.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: e.len() });
            }
            p.add_term(Exponent(e), c);
        }
        Ok(p)
    }

    /// Sum of squares `x_1^2 + ... + x_dim^2`.
    pub fn norm_squared(dim: usize) -> Self {
        let mut p = Self::zero(dim);
        for i in 0..dim {
            let mut e = vec![0; dim];
            e[i] = 2;
            p.add_term(Exponent(e), BigRational::one());
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Total degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(Exponent::degree)
    }

    /// Lowest total degree present, `None` for the zero polynomial.
    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().next().map(Exponent::degree)
    }

    /// Terms in graded lexicographic order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Exponent, &BigRational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: &[u32]) -> BigRational {
        self.terms.get(&Exponent(exps.to_vec())).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Constant term, i.e. the value at the origin.
    pub fn constant_term(&self) -> BigRational {
        self.coeff(&vec![0; self.dim])
    }

    fn add_term(&mut self, e: Exponent, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_dim(&self, other: &MultiPoly) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &MultiPoly) -> Result<MultiPoly> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &MultiPoly) -> Result<MultiPoly> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c.clone());
        }
        Ok(out)
    }

    /// Exact product. Fails when the dimensions differ.
    pub fn checked_mul(&self, other: &MultiPoly) -> Result<MultiPoly> {
        self.check_dim(other)?;
        let mut out = MultiPoly::zero(self.dim);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.add_term(ea.add(eb), ca * cb);
            }
        }
        Ok(out)
    }

    /// Product keeping only terms of total degree `<= max_degree`.
    pub fn mul_truncated(&self, other: &MultiPoly, max_degree: u32) -> Result<MultiPoly> {
        self.check_dim(other)?;
        let mut out = MultiPoly::zero(self.dim);
        for (ea, ca) in &self.terms {
            let da = ea.degree();
            if da > max_degree {
                break;
            }
            for (eb, cb) in &other.terms {
                if da + eb.degree() > max_degree {
                    break;
                }
                out.add_term(ea.add(eb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &BigRational) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero(self.dim);
        }
        MultiPoly {
            dim: self.dim,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    /// `self^k` by repeated squaring; `p^0 = 1`.
    pub fn pow(&self, k: u32) -> MultiPoly {
        let mut result = MultiPoly::one(self.dim);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// `self^k` dropping terms above `max_degree` at every step.
    pub fn pow_truncated(&self, k: u32, max_degree: u32) -> MultiPoly {
        let mut result = MultiPoly::one(self.dim).truncate(max_degree);
        for _ in 0..k {
            result = result.mul_truncated(self, max_degree).expect("same dimension");
        }
        result
    }

    /// Terms of total degree `<= max_degree`.
    pub fn truncate(&self, max_degree: u32) -> MultiPoly {
        MultiPoly {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.degree() <= max_degree)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    /// Sum of the terms of total degree exactly `m`.
    pub fn homogeneous_component(&self, m: u32) -> MultiPoly {
        MultiPoly {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.degree() == m)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    /// `Some(d)` when every term has total degree `d`; the zero polynomial
    /// reports `None`.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let lo = self.min_degree()?;
        (self.degree() == Some(lo)).then_some(lo)
    }

    /// Partial derivative with respect to the variable with zero-based index `i`.
    pub fn derivative(&self, i: usize) -> MultiPoly {
        let mut out = MultiPoly::zero(self.dim);
        for (e, c) in &self.terms {
            let k = e.0[i];
            if k == 0 {
                continue;
            }
            let mut ne = e.0.clone();
            ne[i] -= 1;
            out.add_term(Exponent(ne), c * rat(k as i64));
        }
        out
    }

    pub fn gradient(&self) -> Vec<MultiPoly> {
        (0..self.dim).map(|i| self.derivative(i)).collect()
    }

    /// Exact Laplacian `sum_i d^2/dx_i^2`.
    pub fn laplacian(&self) -> MultiPoly {
        let mut out = MultiPoly::zero(self.dim);
        for (e, c) in &self.terms {
            for i in 0..self.dim {
                let k = e.0[i];
                if k < 2 {
                    continue;
                }
                let mut ne = e.0.clone();
                ne[i] -= 2;
                out.add_term(Exponent(ne), c * rat((k * (k - 1)) as i64));
            }
        }
        out
    }

    pub fn iterated_laplacian(&self, j: u32) -> MultiPoly {
        let mut p = self.clone();
        for _ in 0..j {
            if p.is_zero() {
                break;
            }
            p = p.laplacian();
        }
        p
    }

    /// `(Δ^j p)(0)`. Only the homogeneous component of degree `2j` can
    /// contribute, so the Laplacian is iterated on that component alone.
    pub fn iterated_laplacian_at_zero(&self, j: u32) -> BigRational {
        self.homogeneous_component(2 * j).iterated_laplacian(j).constant_term()
    }

    /// Exact evaluation at a rational point.
    pub fn eval(&self, x: &[BigRational]) -> Result<BigRational> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: x.len() });
        }
        let mut total = BigRational::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (xi, &k) in x.iter().zip(&e.0) {
                if k > 0 {
                    term *= num_traits::pow(xi.clone(), k as usize);
                }
            }
            total += term;
        }
        Ok(total)
    }

    /// Floating-point evaluation.
    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut v = c.to_f64().unwrap_or(f64::NAN);
                for (xi, &k) in x.iter().zip(&e.0) {
                    if k > 0 {
                        v *= xi.powi(k as i32);
                    }
                }
                v
            })
            .sum()
    }

    /// Substitutes polynomial `subs[i]` for variable `i`. All substitutes must
    /// share one dimension, which becomes the dimension of the result.
    pub fn compose(&self, subs: &[MultiPoly]) -> Result<MultiPoly> {
        self.compose_impl(subs, None)
    }

    /// Like [`MultiPoly::compose`] but drops terms above `max_degree`
    /// throughout; exact when every substitute has no constant term.
    pub fn compose_truncated(&self, subs: &[MultiPoly], max_degree: u32) -> Result<MultiPoly> {
        self.compose_impl(subs, Some(max_degree))
    }

    fn compose_impl(&self, subs: &[MultiPoly], max_degree: Option<u32>) -> Result<MultiPoly> {
        if subs.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: subs.len() });
        }
        let out_dim = subs.first().map(|s| s.dim).unwrap_or(0);
        for s in subs {
            if s.dim != out_dim {
                return Err(Error::DimensionMismatch { expected: out_dim, found: s.dim });
            }
        }
        let mul = |a: &MultiPoly, b: &MultiPoly| match max_degree {
            Some(d) => a.mul_truncated(b, d).expect("dimensions checked"),
            None => a * b,
        };
        // powers[i][k] = subs[i]^k, built lazily up to the largest exponent used
        let mut max_exp = vec![0u32; self.dim];
        for e in self.terms.keys() {
            for (m, &k) in max_exp.iter_mut().zip(&e.0) {
                *m = (*m).max(k);
            }
        }
        let mut powers: Vec<Vec<MultiPoly>> = Vec::with_capacity(self.dim);
        for (i, s) in subs.iter().enumerate() {
            let mut row = vec![MultiPoly::one(out_dim)];
            for k in 1..=max_exp[i] as usize {
                let next = mul(&row[k - 1], s);
                row.push(next);
            }
            powers.push(row);
        }
        let mut out = MultiPoly::zero(out_dim);
        for (e, c) in &self.terms {
            let mut term = MultiPoly::constant(out_dim, c.clone());
            for (i, &k) in e.0.iter().enumerate() {
                if k > 0 {
                    term = mul(&term, &powers[i][k as usize]);
                }
            }
            out = &out + &term;
        }
        Ok(out)
    }

    /// Applies the linear change of variables `x -> M x` (row-major `M`).
    pub fn linear_substitute(&self, m: &[Vec<BigRational>]) -> Result<MultiPoly> {
        let subs: Vec<MultiPoly> = m
            .iter()
            .map(|row| {
                if row.len() != self.dim {
                    return Err(Error::DimensionMismatch { expected: self.dim, found: row.len() });
                }
                let mut p = MultiPoly::zero(self.dim);
                for (j, c) in row.iter().enumerate() {
                    p.add_term(Exponent::unit(self.dim, j), c.clone());
                }
                Ok(p)
            })
            .collect::<Result<_>>()?;
        self.compose(&subs)
    }

    /// Embeds into `new_dim >= dim` variables, the new ones appended last.
    pub fn extend_dim(&self, new_dim: usize) -> MultiPoly {
        assert!(new_dim >= self.dim);
        MultiPoly {
            dim: new_dim,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut ne = e.0.clone();
                    ne.resize(new_dim, 0);
                    (Exponent(ne), c.clone())
                })
                .collect(),
        }
    }

    /// Largest absolute coefficient, zero for the zero polynomial.
    pub fn max_abs_coeff(&self) -> BigRational {
        self.terms.values().map(|c| c.abs()).max().unwrap_or_else(BigRational::zero)
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            let neg = c.is_negative();
            let abs = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let is_const = e.degree() == 0;
            if !abs.is_one() || is_const {
                write!(f, "{abs}")?;
                if !is_const {
                    write!(f, "*")?;
                }
            }
            let mut first_var = true;
            for (i, &k) in e.0.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                if !first_var {
                    write!(f, "*")?;
                }
                first_var = false;
                write!(f, "x{}", i + 1)?;
                if k > 1 {
                    write!(f, "^{k}")?;
                }
            }
        }
        Ok(())
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        self.checked_add(rhs).expect("polynomial dimension mismatch")
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        self.checked_sub(rhs).expect("polynomial dimension mismatch")
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        self.checked_mul(rhs).expect("polynomial dimension mismatch")
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        MultiPoly {
            dim: self.dim,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c.clone())).collect(),
        }
    }
}

/// Exact product of two polynomials of equal dimension.
pub fn poly_mul(p: &MultiPoly, q: &MultiPoly) -> Result<MultiPoly> {
    p.checked_mul(q)
}

/// `T_k(x) = (x_n - sum_{j<n} x_j^2)^k` in `n` variables.
pub fn t_k_symbol(n: usize, k: u32) -> Result<MultiPoly> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("T_k needs n >= 2, got {n}")));
    }
    let base = &MultiPoly::var(n, n - 1) - &MultiPoly::norm_squared(n - 1).extend_dim(n);
    Ok(base.pow(k))
}

pub fn laplacian(p: &MultiPoly) -> MultiPoly {
    p.laplacian()
}

pub fn iterated_laplacian_at_zero(p: &MultiPoly, j: u32) -> BigRational {
    p.iterated_laplacian_at_zero(j)
}

pub fn homogeneous_component(p: &MultiPoly, m: u32) -> MultiPoly {
    p.homogeneous_component(m)
}

#[cfg(test)]
mod tests;
