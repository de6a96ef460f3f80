use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Exponent, MultiPoly};

fn small_rational<R: Rng>(rng: &mut R) -> BigRational {
    let mut n: i64 = 0;
    while n == 0 {
        n = rng.random_range(-9..=9);
    }
    BigRational::new(BigInt::from(n), BigInt::from(rng.random_range(1..=6i64)))
}

fn random_exponent<R: Rng>(rng: &mut R, dim: usize, degree: u32) -> Vec<u32> {
    let mut e = vec![0u32; dim];
    for _ in 0..degree {
        e[rng.random_range(0..dim)] += 1;
    }
    e
}

/// Seeded nonzero homogeneous polynomial of the given degree with up to
/// `max_terms` distinct monomials and small rational coefficients.
pub fn random_homogeneous(dim: usize, degree: u32, max_terms: usize, seed: u64) -> MultiPoly {
    assert!(dim >= 1 && max_terms >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms = rng.random_range(1..=max_terms);
    let mut p = MultiPoly::zero(dim);
    let mut attempts = 0;
    while p.num_terms() < terms && attempts < 64 * terms {
        attempts += 1;
        let e = Exponent::new(random_exponent(&mut rng, dim, degree));
        if p.coeff(e.as_slice()).is_zero() {
            p = &p + &MultiPoly::monomial(e.as_slice().to_vec(), small_rational(&mut rng));
        }
    }
    p
}

/// Seeded polynomial of degree at most `max_degree` with up to `max_terms` terms.
pub fn random_polynomial(dim: usize, max_degree: u32, max_terms: usize, seed: u64) -> MultiPoly {
    assert!(dim >= 1 && max_terms >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms = rng.random_range(1..=max_terms);
    let mut p = MultiPoly::zero(dim);
    for _ in 0..terms {
        let deg = rng.random_range(0..=max_degree);
        p = &p + &MultiPoly::monomial(random_exponent(&mut rng, dim, deg), small_rational(&mut rng));
    }
    p
}
