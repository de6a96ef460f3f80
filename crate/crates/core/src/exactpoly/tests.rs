use super::*;

fn x(dim: usize, i: usize) -> MultiPoly {
    MultiPoly::var(dim, i)
}

fn c(dim: usize, v: i64) -> MultiPoly {
    MultiPoly::constant(dim, rat(v))
}

#[test]
fn product_examples() {
    let x1 = x(2, 0);
    assert_eq!(&x1 * &x1, MultiPoly::monomial(vec![2, 0], rat(1)));
    let p = &(&x1 * &x1) + &x(2, 1);
    assert_eq!(&p * &MultiPoly::one(2), p);
    let r2 = MultiPoly::norm_squared(2);
    let expected = MultiPoly::from_terms(2, vec![(vec![4, 0], rat(1)), (vec![2, 2], rat(2)), (vec![0, 4], rat(1))]).unwrap();
    assert_eq!(&r2 * &r2, expected);
    assert!(poly_mul(&x(2, 0), &x(3, 0)).is_err());
}

#[test]
fn degree_is_additive() {
    let p = &x(3, 0) + &(&x(3, 1) * &x(3, 2));
    let q = &(&x(3, 2) * &x(3, 2)) + &(&x(3, 0) * &(&x(3, 1) * &x(3, 1)));
    assert_eq!((&p * &q).degree(), Some(5));
    assert_eq!(MultiPoly::zero(3).degree(), None);
}

#[test]
fn symbol_powers() {
    assert_eq!(t_k_symbol(3, 0).unwrap(), MultiPoly::one(3));
    let t1 = &x(3, 2) - &(&(&x(3, 0) * &x(3, 0)) + &(&x(3, 1) * &x(3, 1)));
    assert_eq!(t_k_symbol(3, 1).unwrap(), t1);
    // x3^2 - 2 x3 x1^2 - 2 x3 x2^2 + (x1^2 + x2^2)^2
    let r2 = MultiPoly::norm_squared(2).extend_dim(3);
    let x3 = x(3, 2);
    let expected = &(&(&x3 * &x3) - &(&(&c(3, 2) * &x3) * &r2)) + &(&r2 * &r2);
    assert_eq!(t_k_symbol(3, 2).unwrap(), expected);
    assert_eq!(t_k_symbol(4, 3).unwrap().degree(), Some(6));
    assert!(t_k_symbol(1, 1).is_err());
}

#[test]
fn laplacian_examples() {
    for d in 1..6 {
        assert_eq!(MultiPoly::norm_squared(d).laplacian(), c(d, 2 * d as i64));
    }
    assert!((&x(2, 0) * &x(2, 1)).laplacian().is_zero());
    let r2 = MultiPoly::norm_squared(2);
    assert_eq!((&r2 * &r2).laplacian(), r2.scale(&rat(16)));
    assert!(x(3, 1).laplacian().is_zero());
}

#[test]
fn iterated_laplacian_examples() {
    let r2 = MultiPoly::norm_squared(2);
    assert_eq!(r2.iterated_laplacian_at_zero(1), rat(4));
    assert_eq!((&r2 * &r2).iterated_laplacian_at_zero(2), rat(64));
    let quintic = &x(2, 0).pow(5) + &x(2, 1).pow(3).checked_mul(&x(2, 0).pow(2)).unwrap();
    assert_eq!(quintic.iterated_laplacian_at_zero(2), rat(0));
    assert_eq!(c(2, 7).iterated_laplacian_at_zero(0), rat(7));
}

/// Independent closed form: for the monomial x^{2k}, Delta^j at 0 with
/// j = |k| equals j! * prod (2k_i)! / k_i!.
fn monomial_oracle(ks: &[u32]) -> BigRational {
    let fact = |n: u32| (1..=n as i64).fold(rat(1), |a, k| a * rat(k));
    let j: u32 = ks.iter().sum();
    ks.iter().fold(fact(j), |acc, &k| acc * fact(2 * k) / fact(k))
}

#[test]
fn iterated_laplacian_matches_monomial_formula() {
    for ks in [vec![1, 0], vec![2, 1], vec![3, 0, 1], vec![2, 2, 1], vec![0, 4], vec![1, 1, 1, 1]] {
        let exps: Vec<u32> = ks.iter().map(|k| 2 * k).collect();
        let p = MultiPoly::monomial(exps, rat(1));
        let j = ks.iter().sum();
        assert_eq!(p.iterated_laplacian_at_zero(j), monomial_oracle(&ks), "ks={ks:?}");
    }
}

#[test]
fn homogeneous_components() {
    let t1 = t_k_symbol(3, 1).unwrap();
    let expected = &MultiPoly::zero(3) - &MultiPoly::norm_squared(2).extend_dim(3);
    assert_eq!(t1.homogeneous_component(2), expected);
    assert!(t1.homogeneous_component(5).is_zero());
    let r2 = MultiPoly::norm_squared(2).extend_dim(3);
    assert_eq!(t_k_symbol(3, 2).unwrap().homogeneous_component(4), &r2 * &r2);
    assert_eq!((&r2 * &r2).homogeneous_degree(), Some(4));
    assert_eq!(t1.homogeneous_degree(), None);
}

#[test]
fn moment_examples() {
    assert_eq!(sphere_monomial_moment(&[0, 0], 2), PiMultiple::new(rat(2), 1));
    assert_eq!(sphere_monomial_moment(&[2, 0], 2), PiMultiple::new(rat(1), 1));
    assert!(sphere_monomial_moment(&[1, 0], 2).is_zero());
    // |S^2| = 4 pi, |S^3| = 2 pi^2, |S^4| = 8/3 pi^2
    assert_eq!(sphere_area(3), PiMultiple::new(rat(4), 1));
    assert_eq!(sphere_area(4), PiMultiple::new(rat(2), 2));
    assert_eq!(sphere_area(5), PiMultiple::new(ratio(8, 3), 2));
    // int_{S^2} x^2 = 4 pi / 3
    assert_eq!(sphere_monomial_moment(&[2, 0, 0], 3), PiMultiple::new(ratio(4, 3), 1));
}

/// Moments in d = 2 by direct trapezoid quadrature over the circle, which is
/// spectrally accurate for trigonometric polynomials.
#[test]
fn circle_moments_match_quadrature() {
    let n = 64;
    for (a, b) in [(0u32, 0u32), (2, 0), (4, 2), (6, 4), (10, 0), (3, 1), (8, 8)] {
        let mut sum = 0.0;
        for i in 0..n {
            let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            sum += th.cos().powi(a as i32) * th.sin().powi(b as i32);
        }
        sum *= 2.0 * std::f64::consts::PI / n as f64;
        let exact = sphere_monomial_moment(&[a, b], 2).to_f64();
        assert!((sum - exact).abs() < 1e-12, "({a},{b}): {sum} vs {exact}");
    }
}

/// Moments on S^2 by Gauss-Legendre in cos(polar angle) times trapezoid in azimuth.
#[test]
fn two_sphere_moments_match_quadrature() {
    let gl = crate::quadrature::GaussLegendre::new(24);
    let nphi = 48;
    for alpha in [[2u32, 0, 0], [2, 2, 2], [4, 0, 2], [0, 6, 0], [2, 4, 0], [1, 2, 0]] {
        let mut sum = 0.0;
        for (z, w) in gl.mapped(-1.0, 1.0) {
            let rho = (1.0 - z * z).sqrt();
            for j in 0..nphi {
                let ph = 2.0 * std::f64::consts::PI * j as f64 / nphi as f64;
                let p = (rho * ph.cos()).powi(alpha[0] as i32)
                    * (rho * ph.sin()).powi(alpha[1] as i32)
                    * z.powi(alpha[2] as i32);
                sum += w * p * 2.0 * std::f64::consts::PI / nphi as f64;
            }
        }
        let exact = sphere_monomial_moment(&alpha, 3).to_f64();
        assert!((sum - exact).abs() < 1e-12, "{alpha:?}: {sum} vs {exact}");
    }
}

#[test]
fn spherical_average_examples() {
    let avg = spherical_average(&MultiPoly::norm_squared(2));
    assert_eq!(avg.coeff(2), PiMultiple::new(rat(2), 1));
    assert_eq!(avg.coeffs.len(), 1);
    assert!(spherical_average(&x(2, 0)).is_zero());
    let one = spherical_average(&MultiPoly::one(2));
    assert_eq!(one.coeff(0), PiMultiple::new(rat(2), 1));
}

#[test]
fn radial_constant_examples() {
    assert_eq!(radial_laplacian_constant(1, 2), rat(4));
    assert_eq!(radial_laplacian_constant(2, 2), rat(64));
    assert_eq!(radial_laplacian_constant(1, 4), rat(8));
    for d in 2..=6 {
        for s in 1..=6 {
            let direct = MultiPoly::norm_squared(d).pow(s).iterated_laplacian_at_zero(s);
            assert_eq!(radial_laplacian_constant(s, d), direct, "s={s} d={d}");
        }
    }
}

#[test]
fn alternative_constant_is_nonzero_and_differs() {
    // For s = 1 the two products are 2(2+d-2)=2d versus 2*1+n-2 = n = d+1.
    assert_eq!(radial_constant_alt(1, 3), rat(3));
    assert_eq!(radial_laplacian_constant(1, 2), rat(4));
    for s in 1..8 {
        for n in 3..8 {
            assert!(radial_constant_alt(s, n) > rat(0));
        }
    }
}

#[test]
fn compose_and_linear_substitution() {
    // (x1 + x2)^2 via composition of x1^2
    let sq = MultiPoly::monomial(vec![2, 0], rat(1));
    let s = &x(2, 0) + &x(2, 1);
    let out = sq.compose(&[s.clone(), x(2, 1)]).unwrap();
    assert_eq!(out, s.pow(2));
    let m = vec![vec![rat(0), rat(1)], vec![rat(1), rat(0)]];
    let swapped = MultiPoly::monomial(vec![3, 1], rat(2)).linear_substitute(&m).unwrap();
    assert_eq!(swapped, MultiPoly::monomial(vec![1, 3], rat(2)));
    let tr = s.pow(5).compose_truncated(&[x(2, 0), x(2, 1)], 3).unwrap();
    assert!(tr.is_zero());
}

#[test]
fn evaluation_agrees() {
    let p = t_k_symbol(3, 3).unwrap();
    let pt = [ratio(1, 3), ratio(-2, 5), ratio(7, 4)];
    let exact = p.eval(&pt).unwrap();
    let base = ratio(7, 4) - ratio(1, 9) - ratio(4, 25);
    assert_eq!(exact, &base * &base * &base);
    let approx = p.eval_f64(&[1.0 / 3.0, -0.4, 1.75]);
    assert!((approx - exact.to_f64().unwrap()).abs() < 1e-12);
}

#[test]
fn json_round_trip_is_exact() {
    let big = BigRational::new(BigInt::from(3).pow(90u32), BigInt::from(7).pow(41u32));
    let p = &t_k_symbol(3, 2).unwrap() + &MultiPoly::monomial(vec![1, 5, 0], -big);
    let s = p.to_json();
    assert_eq!(MultiPoly::from_json(&s).unwrap(), p);
    let v: MultiPoly = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
    assert_eq!(v, p);
    assert!(MultiPoly::from_json(r#"{"dim":2,"terms":[{"exp":[1],"num":"1","den":"1"}]}"#).is_err());
    assert!(MultiPoly::from_json(r#"{"dim":1,"terms":[{"exp":[1],"num":"1","den":"0"}]}"#).is_err());
    assert!(MultiPoly::from_json(r#"{"dim":1,"terms":[{"exp":[1],"num":"x","den":"1"}]}"#).is_err());
}

#[test]
fn graded_lex_order() {
    let p = MultiPoly::from_terms(
        2,
        vec![(vec![0, 2], rat(1)), (vec![1, 0], rat(1)), (vec![2, 0], rat(1)), (vec![0, 0], rat(1))],
    )
    .unwrap();
    let order: Vec<Vec<u32>> = p.terms().map(|(e, _)| e.as_slice().to_vec()).collect();
    assert_eq!(order, vec![vec![0, 0], vec![1, 0], vec![0, 2], vec![2, 0]]);
    assert_eq!(format!("{}", t_k_symbol(3, 1).unwrap()), "-x1^2 - x2^2 + x3");
}
