use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::{rat, MultiPoly};

/// Exact real number of the form `coeff * pi^pi_power`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PiMultiple {
    pub coeff: BigRational,
    pub pi_power: u32,
}

impl PiMultiple {
    pub fn new(coeff: BigRational, pi_power: u32) -> Self {
        PiMultiple { coeff, pi_power }
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        self.coeff.to_f64().unwrap_or(f64::NAN) * std::f64::consts::PI.powi(self.pi_power as i32)
    }

    pub fn scale(&self, c: &BigRational) -> PiMultiple {
        PiMultiple { coeff: &self.coeff * c, pi_power: self.pi_power }
    }

    /// Exact quotient when both share the same power of pi.
    pub fn ratio(&self, other: &PiMultiple) -> Option<BigRational> {
        (self.pi_power == other.pi_power && !other.coeff.is_zero()).then(|| &self.coeff / &other.coeff)
    }
}

impl fmt::Display for PiMultiple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pi_power {
            0 => write!(f, "{}", self.coeff),
            1 => write!(f, "({})*pi", self.coeff),
            k => write!(f, "({})*pi^{}", self.coeff, k),
        }
    }
}

/// Radially symmetric polynomial `pi^pi_power * sum_s c_s r^{2s}`, keyed by
/// the even degree `2s`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RadialProfile {
    pub dim: usize,
    pub pi_power: u32,
    pub coeffs: BTreeMap<u32, BigRational>,
}

impl RadialProfile {
    /// Coefficient of `r^degree`, zero when absent.
    pub fn coeff(&self, degree: u32) -> PiMultiple {
        PiMultiple {
            coeff: self.coeffs.get(&degree).cloned().unwrap_or_else(BigRational::zero),
            pi_power: self.pi_power,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval_f64(&self, r: f64) -> f64 {
        let pi = std::f64::consts::PI.powi(self.pi_power as i32);
        self.coeffs
            .iter()
            .map(|(&k, c)| c.to_f64().unwrap_or(f64::NAN) * r.powi(k as i32))
            .sum::<f64>()
            * pi
    }
}

fn double_factorial(n: i64) -> BigInt {
    let mut acc = BigInt::one();
    let mut k = n;
    while k > 1 {
        acc *= k;
        k -= 2;
    }
    acc
}

fn factorial(n: u64) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// `int_{S^{d-1}} theta^alpha dA(theta)` in closed form, carried as a rational
/// multiple of `pi^{floor(d/2)}`.
pub fn sphere_monomial_moment(alpha: &[u32], d: usize) -> PiMultiple {
    assert!(d >= 2, "sphere moments need d >= 2");
    assert_eq!(alpha.len(), d, "exponent length must equal d");
    let pi_power = (d / 2) as u32;
    if alpha.iter().any(|a| a % 2 == 1) {
        return PiMultiple::new(BigRational::zero(), pi_power);
    }
    let ks: Vec<u64> = alpha.iter().map(|&a| (a / 2) as u64).collect();
    let big_k: u64 = ks.iter().sum();
    // prod Gamma(k_i + 1/2) = prod (2k_i - 1)!! / 2^K * pi^{d/2}
    let mut num = BigInt::from(2);
    for &k in &ks {
        num *= double_factorial(2 * k as i64 - 1);
    }
    let mut coeff = BigRational::new(num, BigInt::one() << big_k);
    if d % 2 == 0 {
        coeff /= BigRational::from_integer(factorial(big_k + d as u64 / 2 - 1));
    } else {
        // Gamma(m + 1/2) = (2m - 1)!! / 2^m * sqrt(pi)
        let m = big_k + (d as u64 - 1) / 2;
        coeff *= BigRational::new(BigInt::one() << m, double_factorial(2 * m as i64 - 1));
    }
    PiMultiple::new(coeff, pi_power)
}

/// Surface area `|S^{d-1}|`.
pub fn sphere_area(d: usize) -> PiMultiple {
    sphere_monomial_moment(&vec![0; d], d)
}

/// `r -> int_{|theta|=1} p(r theta) dA(theta)` as an exact radial polynomial.
pub fn spherical_average(p: &MultiPoly) -> RadialProfile {
    let d = p.dim();
    let pi_power = (d / 2) as u32;
    let mut coeffs: BTreeMap<u32, BigRational> = BTreeMap::new();
    for (e, c) in p.terms() {
        let m = sphere_monomial_moment(e.as_slice(), d);
        if m.is_zero() {
            continue;
        }
        *coeffs.entry(e.degree()).or_insert_with(BigRational::zero) += c * &m.coeff;
    }
    coeffs.retain(|_, c| !c.is_zero());
    RadialProfile { dim: d, pi_power, coeffs }
}

/// `Delta^s (|u|^{2s})` at the origin in `d` variables, via
/// `Delta r^{2k} = 2k(2k + d - 2) r^{2k-2}`.
pub fn radial_laplacian_constant(s_max: u32, d: usize) -> BigRational {
    (1..=s_max as i64).fold(BigRational::one(), |acc, s| acc * rat(2 * s * (2 * s + d as i64 - 2)))
}

/// The alternative product `prod_{j=1}^{s} ((2s-2j+2)(2s-2j+1) + n - 2)` for
/// ambient dimension `n`.
pub fn radial_constant_alt(s_max: u32, n: usize) -> BigRational {
    let s = s_max as i64;
    (1..=s).fold(BigRational::one(), |acc, j| {
        acc * rat((2 * s - 2 * j + 2) * (2 * s - 2 * j + 1) + n as i64 - 2)
    })
}
