//! Stationary phase for quadratic phases, Morse charts, and the exact lemma
//! checks on iterated Laplacians of powers of homogeneous polynomials.

mod morse;
mod series;

pub use morse::{morse_normalize, verify_phi_lemma, MorseChart};
pub use series::{morse_series, weight_asymptotics, WeightCheck};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::cancel::CancelToken;
use crate::error::{Error, Result};
use crate::oscillatory::CutoffSpec;
use crate::quadrature::GaussLegendre;
use crate::exactpoly::{radial_laplacian_constant, sphere_area, spherical_average, MultiPoly};

/// One exact term `coeff * i^i_power` of a stationary-phase series.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhaseTerm {
    pub coeff: BigRational,
    /// Power of `i`, reduced mod 4.
    pub i_power: u32,
}

impl PhaseTerm {
    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    pub fn to_complex(&self) -> Complex64 {
        let c = self.coeff.to_f64().unwrap_or(f64::NAN);
        match self.i_power % 4 {
            0 => Complex64::new(c, 0.0),
            1 => Complex64::new(0.0, c),
            2 => Complex64::new(-c, 0.0),
            _ => Complex64::new(0.0, -c),
        }
    }
}

/// `int_{R^d} e^{i mu |u|^2} p(u) du ~ (pi/mu)^{d/2} e^{i d pi/4} sum_j terms[j] mu^{-j}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadPhaseExpansion {
    pub d: usize,
    pub terms: Vec<PhaseTerm>,
}

impl QuadPhaseExpansion {
    pub fn prefactor(&self, mu: f64) -> Complex64 {
        let d = self.d as f64;
        Complex64::from_polar((std::f64::consts::PI / mu).powf(0.5 * d), d * std::f64::consts::FRAC_PI_4)
    }

    /// Term `j` including the prefactor.
    pub fn term(&self, j: usize, mu: f64) -> Complex64 {
        match self.terms.get(j) {
            Some(t) if !t.is_zero() => self.prefactor(mu) * t.to_complex() * mu.powi(-(j as i32)),
            _ => Complex64::new(0.0, 0.0),
        }
    }

    /// Sum of terms `0..=j_last`.
    pub fn partial_sum(&self, j_last: usize, mu: f64) -> Complex64 {
        (0..=j_last.min(self.terms.len().saturating_sub(1))).map(|j| self.term(j, mu)).sum()
    }

    /// First index with a nonzero term.
    pub fn leading_index(&self) -> Option<usize> {
        self.terms.iter().position(|t| !t.is_zero())
    }
}

fn factorial(n: u64) -> BigInt {
    (2..=n).fold(BigInt::one(), |a, k| a * k)
}

/// Exact series with term `j` equal to `(Delta^j p)(0) (i/4)^j / j!`.
pub fn quad_phase_expand(p: &MultiPoly, j_max: u32) -> QuadPhaseExpansion {
    let mut terms = Vec::with_capacity(j_max as usize + 1);
    let mut q = p.clone();
    for j in 0..=j_max {
        let denom = factorial(j as u64) * (BigInt::one() << (2 * j as usize));
        terms.push(PhaseTerm { coeff: q.constant_term() / BigRational::from_integer(denom), i_power: j % 4 });
        q = q.laplacian();
    }
    QuadPhaseExpansion { d: p.dim(), terms }
}

/// Indices of the leading terms of `i mu J_1` and `J_2` for `k = 2 alpha + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeadingTerms {
    pub m: u32,
    pub alpha: u32,
    pub n: usize,
    pub n0: u64,
    /// `m(2 alpha + 1)/2 - 1`, a half-integer when `m` is odd.
    #[serde(with = "rational_string")]
    pub j1: BigRational,
    pub j2: u64,
    pub j1_gt_j2: bool,
    /// `j1 > m alpha + 1 > j2`.
    pub separated: bool,
    /// `m alpha > n0 + 4 alpha`.
    pub collision: bool,
    /// `ceil(n0/(m - 4)) + 1`; every `alpha >= alpha_star` collides.
    pub alpha_star: u64,
}

pub fn leading_term_indices(m: u32, alpha: u32, n: usize, n0: u64) -> Result<LeadingTerms> {
    if m <= 4 {
        return Err(Error::HypothesisViolated { m });
    }
    if alpha == 0 {
        return Err(Error::InvalidInput("alpha must be positive".into()));
    }
    let mm = BigInt::from(m);
    let j1 = BigRational::new(&mm * BigInt::from(2 * alpha as u64 + 1), BigInt::from(2)) - BigRational::one();
    let j2 = m as u64 * alpha as u64;
    let mid = BigRational::from_integer(BigInt::from(j2 + 1));
    let j2r = BigRational::from_integer(BigInt::from(j2));
    let collision = j2 > n0 + 4 * alpha as u64;
    let alpha_star = n0.div_ceil(m as u64 - 4) + 1;
    Ok(LeadingTerms {
        m,
        alpha,
        n,
        n0,
        j1_gt_j2: j1 > j2r,
        separated: j1 > mid && mid > j2r,
        j1,
        j2,
        collision,
        alpha_star,
    })
}

/// Exact data of the iterated-Laplacian vanishing check for `H^{2 alpha}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaCheck {
    pub m: u32,
    pub alpha: u32,
    pub d: usize,
    /// `(Delta^{m alpha} H^{2 alpha})(0)`.
    #[serde(with = "rational_string")]
    pub value: BigRational,
    /// `A / |S^{d-1}|`, where `A` is the `r^{2 m alpha}` coefficient of the
    /// spherical integral of `H^{2 alpha}`.
    #[serde(with = "rational_string")]
    pub sphere_avg_coeff: BigRational,
    /// `Delta^s |u|^{2s}` with `s = m alpha`.
    #[serde(with = "rational_string")]
    pub constant: BigRational,
    /// `value == constant * sphere_avg_coeff`.
    pub consistent: bool,
}

pub fn delta_vanishing_check(h: &MultiPoly, m: u32, alpha: u32, cancel: Option<&CancelToken>) -> Result<DeltaCheck> {
    if alpha == 0 {
        return Err(Error::InvalidInput("alpha must be positive".into()));
    }
    if !h.is_zero() && h.homogeneous_degree() != Some(m) {
        return Err(Error::NotHomogeneous { degree: m });
    }
    let d = h.dim();
    let s = m * alpha;
    let check = || cancel.map_or(Ok(()), |c| c.check());
    let mut p = MultiPoly::one(d);
    for _ in 0..2 * alpha {
        check()?;
        p = &p * h;
    }
    let avg = if d == 1 {
        // S^0 = {-1, 1}
        let one = [BigRational::one()];
        let neg = [-BigRational::one()];
        (p.eval(&one)? + p.eval(&neg)?) / BigRational::from_integer(BigInt::from(2))
    } else {
        let a = spherical_average(&p).coeff(2 * s);
        a.ratio(&sphere_area(d)).unwrap_or_else(BigRational::zero)
    };
    let mut q = p;
    for _ in 0..s {
        check()?;
        q = q.laplacian();
    }
    let value = q.constant_term();
    let constant = radial_laplacian_constant(s, d);
    let consistent = value == &constant * &avg;
    Ok(DeltaCheck { m, alpha, d, value, sphere_avg_coeff: avg, constant, consistent })
}

/// Integer or `num/den` string form used in reports.
pub fn rational_to_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

mod rational_string {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&rational_to_string(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigRational, D::Error> {
        let text = String::deserialize(d)?;
        let parse = |t: &str| t.trim().parse::<BigInt>().map_err(serde::de::Error::custom);
        match text.split_once('/') {
            Some((a, b)) => {
                let den = parse(b)?;
                if den.is_zero() {
                    return Err(serde::de::Error::custom("zero denominator"));
                }
                Ok(BigRational::new(parse(a)?, den))
            }
            None => Ok(BigRational::from_integer(parse(&text)?)),
        }
    }
}

/// Bound on the error of a partial sum: twice the first omitted term, or
/// zero when every later term vanishes.
pub fn first_omitted_bound(exp: &QuadPhaseExpansion, j_last: usize, mu: f64) -> f64 {
    exp.terms
        .iter()
        .enumerate()
        .skip(j_last + 1)
        .find(|(_, t)| !t.is_zero())
        .map_or(0.0, |(j, _)| 2.0 * exp.term(j, mu).norm())
}

/// Quadrature of `int e^{i mu |u|^2} p(u) rho(|u|^2) du` for `d <= 2`, in
/// polar coordinates with equal-phase panels in `|u|`.
pub fn gaussian_weight_quadrature(p: &MultiPoly, mu: f64, cutoff: &CutoffSpec) -> Result<Complex64> {
    let d = p.dim();
    let rule = GaussLegendre::cached(10);
    let dirs: Vec<(Vec<f64>, f64)> = match d {
        1 => vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)],
        2 => {
            let mut out = Vec::new();
            let panels = 16;
            let step = 2.0 * std::f64::consts::PI / panels as f64;
            for k in 0..panels {
                for (th, w) in rule.mapped(k as f64 * step, (k + 1) as f64 * step) {
                    out.push((vec![th.cos(), th.sin()], w));
                }
            }
            out
        }
        _ => return Err(Error::UnsupportedDimension(d + 1)),
    };
    let c = cutoff.c;
    let panels = ((mu.abs() * c / std::f64::consts::FRAC_PI_4).ceil() as usize).max(32);
    let mut total = Complex64::new(0.0, 0.0);
    for j in 0..panels {
        let a = (j as f64 / panels as f64).sqrt();
        let b = ((j + 1) as f64 / panels as f64).sqrt();
        for (v, wv) in rule.mapped(a, b) {
            let t = c * v * v;
            let rho = cutoff.eval(t, 0);
            if rho == 0.0 {
                continue;
            }
            let r = c.sqrt() * v;
            let ang: f64 = dirs
                .iter()
                .map(|(e, w)| {
                    let x: Vec<f64> = e.iter().map(|ei| r * ei).collect();
                    w * p.eval_f64(&x)
                })
                .sum();
            total += Complex64::from_polar(rho * ang * r.powi(d as i32 - 1) * c.sqrt() * wv, mu * t);
        }
    }
    Ok(total)
}
