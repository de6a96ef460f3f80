use finphase_core::exactpoly::{
    radial_laplacian_constant, sphere_area, spherical_average, MultiPoly,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn poly(dim: usize, max_deg: u32, max_terms: usize) -> impl Strategy<Value = MultiPoly> {
    prop::collection::vec(
        (prop::collection::vec(0..=max_deg, dim), -20i64..=20, 1i64..=9),
        0..=max_terms,
    )
    .prop_map(move |raw| {
        let terms = raw.into_iter().filter_map(|(mut e, n, d)| {
            // clip total degree
            while e.iter().sum::<u32>() > max_deg {
                let i = e.iter().position(|&k| k > 0).unwrap();
                e[i] -= 1;
            }
            Some((e, q(n, d)))
        });
        MultiPoly::from_terms(dim, terms).unwrap()
    })
}

/// Random homogeneous polynomial of the given degree; may be zero.
fn homogeneous(dim: usize, deg: u32) -> impl Strategy<Value = MultiPoly> {
    poly(dim, deg, 6).prop_map(move |p| {
        let mut out = MultiPoly::zero(dim);
        for (e, c) in p.terms() {
            let mut exps = e.as_slice().to_vec();
            let missing = deg - e.degree();
            exps[dim - 1] += missing;
            out = &out + &MultiPoly::monomial(exps, c.clone());
        }
        out
    })
}

fn rotation_345(dim: usize, i: usize, j: usize) -> Vec<Vec<BigRational>> {
    let mut m: Vec<Vec<BigRational>> = (0..dim)
        .map(|r| (0..dim).map(|c| if r == c { q(1, 1) } else { q(0, 1) }).collect())
        .collect();
    m[i][i] = q(3, 5);
    m[i][j] = q(-4, 5);
    m[j][i] = q(4, 5);
    m[j][j] = q(3, 5);
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laplacian_is_linear(p in poly(3, 8, 8), r in poly(3, 8, 8), a in -9i64..9, b in 1i64..9) {
        let (a, b) = (q(a, 7), q(b, 5));
        let lhs = (&p.scale(&a) + &r.scale(&b)).laplacian();
        let rhs = &p.laplacian().scale(&a) + &r.laplacian().scale(&b);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn laplacian_commutes_with_rotation(p in poly(3, 6, 6), plane in 0usize..3) {
        let (i, j) = [(0, 1), (0, 2), (1, 2)][plane];
        let m = rotation_345(3, i, j);
        let lhs = p.linear_substitute(&m).unwrap().laplacian();
        let rhs = p.laplacian().linear_substitute(&m).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn iterated_laplacian_sees_only_matching_degree(p in poly(2, 8, 10), j in 0u32..5) {
        let full = p.iterated_laplacian_at_zero(j);
        let comp = p.homogeneous_component(2 * j).iterated_laplacian(j).constant_term();
        prop_assert_eq!(&full, &comp);
        for m in 0..=8 {
            if m != 2 * j {
                prop_assert!(p.homogeneous_component(m).iterated_laplacian_at_zero(j).is_zero());
            }
        }
    }

    #[test]
    fn laplacian_at_zero_matches_spherical_average(dim in 2usize..5, j in 1u32..4, seed in any::<u64>()) {
        // derive a homogeneous polynomial deterministically from the seed
        let mut s = seed;
        let mut next = move || { s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); (s >> 33) as i64 };
        let mut p = MultiPoly::zero(dim);
        for _ in 0..6 {
            let mut e = vec![0u32; dim];
            for _ in 0..2 * j {
                e[(next() as usize) % dim] += 1;
            }
            p = &p + &MultiPoly::monomial(e, q(next() % 17 - 8, 1 + next() % 5));
        }
        let lhs = p.iterated_laplacian_at_zero(j);
        let avg = spherical_average(&p).coeff(2 * j);
        let rhs = avg.ratio(&sphere_area(dim)).unwrap_or_else(BigRational::zero) * radial_laplacian_constant(j, dim);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn even_power_average_is_positive(h in prop_oneof![homogeneous(2, 5), homogeneous(2, 6)], alpha in 1u32..=2) {
        let m = if h.is_zero() { 0 } else { h.degree().unwrap() };
        let avg = spherical_average(&h.pow(2 * alpha));
        let coeff = avg.coeff(2 * m * alpha).coeff;
        if h.is_zero() {
            prop_assert!(avg.is_zero());
        } else {
            prop_assert!(coeff.is_positive());
        }
    }

    #[test]
    fn json_round_trip(p in poly(4, 7, 12)) {
        prop_assert_eq!(MultiPoly::from_json(&p.to_json()).unwrap(), p);
    }
}
