use finphase_core::polydetect::{detect, Model};
use finphase_core::sections::{cap_volume_mc, profile_integral, section_volume, volume_profile, SectionOptions};
use finphase_core::surfaces::{make_quadric, GraphSurface, QuadricKind, QuadricSpec};
use proptest::prelude::*;
use std::f64::consts::PI;

fn quadric(kind: QuadricKind, a: f64, n: usize) -> GraphSurface {
    make_quadric(&QuadricSpec { kind, a: vec![a; n] }, n, 12).unwrap()
}

fn unit(v: [f64; 3]) -> Vec<f64> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    v.iter().map(|x| x / n).collect()
}

fn grid(c: f64, m: usize) -> Vec<f64> {
    (1..=m).map(|i| c * i as f64 / m as f64).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn slices_grow_with_depth(x in -0.3f64..0.3, y in -0.3f64..0.3, t1 in 0.01f64..0.25, dt in 0.001f64..0.15) {
        let s = quadric(QuadricKind::Ellipsoid, 1.0, 3);
        let frame = s.inverse_gauss(&unit([x, y, 1.0])).unwrap();
        let (a, _) = section_volume(&s, &frame, t1).unwrap();
        let (b, _) = section_volume(&s, &frame, t1 + dt).unwrap();
        prop_assert!(b > a);
    }

    #[test]
    fn sphere_slices_do_not_depend_on_direction(x in -0.25f64..0.25, y in -0.25f64..0.25, t in 0.05f64..0.3) {
        let s = quadric(QuadricKind::Ellipsoid, 1.0, 3);
        let frame = s.inverse_gauss(&unit([x, y, 1.0])).unwrap();
        let (a, err) = section_volume(&s, &frame, t).unwrap();
        let want = PI * (2.0 * t - t * t);
        prop_assert!((a - want).abs() <= 1e-9 * want + 10.0 * err, "{} vs {}", a, want);
    }

    #[test]
    fn paraboloid_slices_are_linear(x in -1.0f64..1.0, y in -1.0f64..1.0, t in 0.05f64..2.0) {
        let s = quadric(QuadricKind::EllipticParaboloid, 1.0, 3);
        let xi = unit([x, y, 1.0]);
        let frame = s.inverse_gauss(&xi).unwrap();
        let (a, _) = section_volume(&s, &frame, t).unwrap();
        // A = pi t / xi_n^2 for |x'|^2 under the slanted plane
        let want = PI * t / (xi[2] * xi[2]);
        prop_assert!((a - want).abs() <= 1e-9 * want, "{} vs {}", a, want);
    }
}

#[test]
fn profile_integral_matches_cap_volume() {
    let s = quadric(QuadricKind::TwoSheetHyperboloid, 1.0, 3);
    let xi = unit([0.2, -0.1, 1.0]);
    let c = 0.6;
    let profile = volume_profile(&s, &xi, &grid(c, 400), c, &SectionOptions::default()).unwrap();
    let (v, _) = profile_integral(&profile);
    let frame = s.inverse_gauss(&xi).unwrap();
    let (mc, se) = cap_volume_mc(&s, &frame, c, 400_000, 5).unwrap();
    assert!((v - mc).abs() < 5.0 * se + 1e-5, "{v} vs {mc} +- {se}");
    // along the axis the slices are pi (2t + t^2), so the cap holds pi (c^2 + c^3/3)
    let axis = volume_profile(&s, &[0.0, 0.0, 1.0], &grid(c, 400), c, &SectionOptions::default()).unwrap();
    let exact = PI * (c * c + c * c * c / 3.0);
    assert!((profile_integral(&axis).0 - exact).abs() < 1e-5);
}

#[test]
fn quadric_profiles_are_polynomial() {
    let cases = [
        (QuadricKind::Ellipsoid, 2, [0.0, 2.0, -1.0]),
        (QuadricKind::EllipticParaboloid, 1, [0.0, 1.0, 0.0]),
        (QuadricKind::TwoSheetHyperboloid, 2, [0.0, 2.0, 1.0]),
    ];
    for (kind, deg, coeffs) in cases {
        let s = quadric(kind, 1.0, 3);
        let c = 0.5;
        let p = volume_profile(&s, &[0.0, 0.0, 1.0], &grid(c, 40), c, &SectionOptions::default()).unwrap();
        let v = detect(&p, 4).unwrap();
        assert!(v.is_polynomial, "{kind:?}");
        assert_eq!(v.degree, Some(deg));
        assert_eq!(v.preferred, Model::Polynomial);
        for (k, want) in coeffs[1..=deg as usize].iter().enumerate() {
            let got = v.coeffs[k] / PI;
            assert!((got - want).abs() <= 1e-4 * want.abs(), "{kind:?} t^{}: {got}", k + 1);
        }
    }
}

#[test]
fn monte_carlo_profiles_are_reproducible() {
    let s = quadric(QuadricKind::Ellipsoid, 1.0, 4);
    let xi = [0.0, 0.0, 0.0, 1.0];
    let opts = SectionOptions { mc_samples: 20_000, seed: 9, ..Default::default() };
    let a = volume_profile(&s, &xi, &grid(0.2, 6), 0.2, &opts).unwrap();
    let b = volume_profile(&s, &xi, &grid(0.2, 6), 0.2, &opts).unwrap();
    assert_eq!(a, b);
}
