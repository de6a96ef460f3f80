//! Sectional volumes `A(xi, t)` of the convex body above a graph surface.
//!
//! A slice `{<x, xi> = h + t}` of the region above the graph projects onto the
//! sublevel set `{x' : phi(x') <= h + t}` with `phi(x') = xi'.x' + xi_n f(x')`,
//! and the slice volume is the projected volume divided by `xi_n`. The
//! sublevel set is convex and contains the tangency point `a'`, where `phi`
//! attains its minimum `h`, so it is star-shaped about `a'`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::surfaces::{dot, norm, GraphSurface, TangentFrame};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeMethod {
    RadialQuadrature,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeProfile {
    pub xi: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub err: Vec<f64>,
    pub method: VolumeMethod,
    pub c: f64,
    pub seed: Option<u64>,
}

impl VolumeProfile {
    /// Restriction to grid points with `t <= t_max`.
    pub fn truncated(&self, t_max: f64) -> VolumeProfile {
        let keep: Vec<usize> = (0..self.t_grid.len()).filter(|&i| self.t_grid[i] <= t_max).collect();
        VolumeProfile {
            t_grid: keep.iter().map(|&i| self.t_grid[i]).collect(),
            values: keep.iter().map(|&i| self.values[i]).collect(),
            err: keep.iter().map(|&i| self.err[i]).collect(),
            ..self.clone()
        }
    }

    pub fn len(&self) -> usize {
        self.t_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_grid.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct SectionOptions {
    /// Angular Gauss-Legendre nodes for `n = 3`.
    pub angular_nodes: usize,
    pub bisect_tol: f64,
    /// Monte Carlo samples per slice for `n >= 4`.
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for SectionOptions {
    fn default() -> Self {
        SectionOptions { angular_nodes: 256, bisect_tol: 1e-12, mc_samples: 2_000_000, seed: 0 }
    }
}

/// `phi(x') - h` for the frame: zero at `a'`, convex, increasing along rays from `a'`.
fn height_fn<'a>(surface: &'a GraphSurface, frame: &'a TangentFrame) -> impl Fn(&[f64]) -> f64 + 'a {
    let d = surface.d();
    let xi_p = &frame.xi[..d];
    let xi_n = frame.xi[d];
    let h = frame.h;
    move |x: &[f64]| {
        if !surface.in_domain(x) {
            return f64::INFINITY;
        }
        dot(xi_p, x) + xi_n * surface.value(x) - h
    }
}

/// Distance from `a'` to the boundary of the slice projection in direction `dir`.
fn boundary_radius(surface: &GraphSurface, frame: &TangentFrame, dir: &[f64], t: f64, tol: f64) -> Option<f64> {
    let d = surface.d();
    let phi = height_fn(surface, frame);
    surface.radial_root(phi, &frame.a[..d], dir, t, tol)
}

/// Volume of the slice at height `t` with default options.
pub fn section_volume(surface: &GraphSurface, frame: &TangentFrame, t: f64) -> Result<(f64, f64)> {
    section_volume_with(surface, frame, t, &SectionOptions::default(), 0)
}

/// Volume and absolute error estimate of the slice at height `t`. `index`
/// offsets the Monte Carlo seed, giving each grid point its own stream.
pub fn section_volume_with(
    surface: &GraphSurface,
    frame: &TangentFrame,
    t: f64,
    opts: &SectionOptions,
    index: u64,
) -> Result<(f64, f64)> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidInput(format!("slice height must be positive, got {t}")));
    }
    let d = surface.d();
    let xi_n = frame.xi[d];
    match d {
        1 => {
            let rp = boundary_radius(surface, frame, &[1.0], t, opts.bisect_tol)
                .ok_or(Error::SliceEscapesChart { t })?;
            let rm = boundary_radius(surface, frame, &[-1.0], t, opts.bisect_tol)
                .ok_or(Error::SliceEscapesChart { t })?;
            let len = (rp + rm) / xi_n;
            Ok((len, (2.0 * opts.bisect_tol + 8.0 * f64::EPSILON * len) / xi_n))
        }
        2 => planar_area(surface, frame, t, opts).map(|(a, e)| (a / xi_n, e / xi_n)),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(index));
            monte_carlo_volume(surface, frame, t, opts.mc_samples, &mut rng).map(|(a, e)| (a / xi_n, e / xi_n))
        }
    }
}

fn planar_area(surface: &GraphSurface, frame: &TangentFrame, t: f64, opts: &SectionOptions) -> Result<(f64, f64)> {
    let two_pi = 2.0 * std::f64::consts::PI;
    let area_with = |nodes: usize| -> Result<(f64, f64)> {
        let rule = GaussLegendre::cached(nodes);
        let mut area = 0.0;
        let mut r_max: f64 = 0.0;
        for (theta, w) in rule.mapped(0.0, two_pi) {
            let dir = [theta.cos(), theta.sin()];
            let r = boundary_radius(surface, frame, &dir, t, opts.bisect_tol).ok_or_else(|| {
                if surface.radial_root(|_| 0.0, &[0.0, 0.0], &dir, 1.0, 1.0).is_none() {
                    Error::SliceEscapesChart { t }
                } else {
                    Error::RootFinding { angle: theta }
                }
            })?;
            r_max = r_max.max(r);
            area += 0.5 * w * r * r;
        }
        Ok((area, r_max))
    };
    let (fine, r_max) = area_with(opts.angular_nodes)?;
    let (coarse, _) = area_with((opts.angular_nodes / 2).max(4))?;
    let err = (fine - coarse).abs() + two_pi * r_max * opts.bisect_tol + 64.0 * f64::EPSILON * fine;
    Ok((fine, err))
}

fn random_direction<R: Rng>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let nv = norm(&v);
        if nv > 1e-12 {
            return v.iter().map(|x| x / nv).collect();
        }
    }
}

/// Largest boundary distance from `a'` over the axis directions and a random
/// set of directions.
fn max_boundary_radius<R: Rng>(surface: &GraphSurface, frame: &TangentFrame, t: f64, rng: &mut R) -> Result<f64> {
    let d = surface.d();
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for i in 0..d {
        for s in [-1.0, 1.0] {
            let mut v = vec![0.0; d];
            v[i] = s;
            dirs.push(v);
        }
    }
    for _ in 0..(256 * d) {
        dirs.push(random_direction(d, rng));
    }
    let mut r_max: f64 = 0.0;
    for dir in &dirs {
        let r = boundary_radius(surface, frame, dir, t, 1e-9).ok_or(Error::SliceEscapesChart { t })?;
        r_max = r_max.max(r);
    }
    Ok(r_max)
}

/// Hit-or-miss estimate of the projected slice volume in a box about `a'`.
fn monte_carlo_volume<R: Rng>(
    surface: &GraphSurface,
    frame: &TangentFrame,
    t: f64,
    samples: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if samples == 0 {
        return Err(Error::TooFewSamples { needed: 1, have: 0 });
    }
    let d = surface.d();
    let center = frame.a[..d].to_vec();
    let phi = height_fn(surface, frame);
    let mut half = 1.25 * max_boundary_radius(surface, frame, t, rng)?;
    for _ in 0..6 {
        let mut hits = 0usize;
        let mut near_wall = false;
        let mut x = vec![0.0; d];
        for _ in 0..samples {
            let mut linf: f64 = 0.0;
            for (xi, ci) in x.iter_mut().zip(&center) {
                let u: f64 = rng.random_range(-1.0..1.0);
                linf = linf.max(u.abs());
                *xi = ci + half * u;
            }
            if phi(&x) <= t {
                hits += 1;
                if linf > 0.95 {
                    near_wall = true;
                }
            }
        }
        if near_wall {
            half *= 1.5;
            continue;
        }
        let vbox = (2.0 * half).powi(d as i32);
        let p = hits as f64 / samples as f64;
        let vol = vbox * p;
        let se = vbox * (p * (1.0 - p) / samples as f64).sqrt();
        // one-hit floor keeps the error honest when p is tiny
        return Ok((vol, se.max(vbox / samples as f64)));
    }
    Err(Error::SliceEscapesChart { t })
}

/// Sectional volumes on `t_grid` for direction `xi`, evaluated in parallel.
pub fn volume_profile(
    surface: &GraphSurface,
    xi: &[f64],
    t_grid: &[f64],
    c: f64,
    opts: &SectionOptions,
) -> Result<VolumeProfile> {
    if t_grid.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, have: 0 });
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) || t_grid[0] <= 0.0 {
        return Err(Error::InvalidInput("t grid must be positive and strictly increasing".into()));
    }
    if t_grid[t_grid.len() - 1] > c * (1.0 + 1e-12) {
        return Err(Error::InvalidInput(format!("t grid exceeds the cap height {c}")));
    }
    let frame = surface.inverse_gauss(xi)?;
    // the cap itself has to fit in the chart
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    max_boundary_radius(surface, &frame, c, &mut rng)?;
    let results: Vec<Result<(f64, f64)>> = t_grid
        .par_iter()
        .enumerate()
        .map(|(i, &t)| section_volume_with(surface, &frame, t, opts, i as u64 + 1))
        .collect();
    let mut values = Vec::with_capacity(t_grid.len());
    let mut err = Vec::with_capacity(t_grid.len());
    for r in results {
        let (v, e) = r?;
        values.push(v);
        err.push(e);
    }
    let method = if surface.d() >= 3 { VolumeMethod::MonteCarlo } else { VolumeMethod::RadialQuadrature };
    Ok(VolumeProfile {
        xi: xi.to_vec(),
        t_grid: t_grid.to_vec(),
        values,
        err,
        method,
        c,
        seed: (method == VolumeMethod::MonteCarlo).then_some(opts.seed),
    })
}

/// Largest cap height `c <= c_max` whose slice stays inside `0.8 r_dom`.
pub fn default_cap_height(surface: &GraphSurface, frame: &TangentFrame, c_max: f64) -> f64 {
    let d = surface.d();
    let limit = 0.8 * surface.r_dom();
    let fits = |c: f64| -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut dirs: Vec<Vec<f64>> = (0..64 * d).map(|_| random_direction(d, &mut rng)).collect();
        for i in 0..d {
            for s in [-1.0, 1.0] {
                let mut v = vec![0.0; d];
                v[i] = s;
                dirs.push(v);
            }
        }
        dirs.iter().all(|dir| match boundary_radius(surface, frame, dir, c, 1e-10) {
            Some(r) => {
                let p: Vec<f64> = frame.a[..d].iter().zip(dir).map(|(a, v)| a + r * v).collect();
                norm(&p) <= limit
            }
            None => false,
        })
    };
    if fits(c_max) {
        return c_max;
    }
    let (mut lo, mut hi) = (0.0, c_max);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Log-log least-squares slope of `A` against `t` over the smallest decade
/// of the grid, with its standard error.
pub fn leading_exponent(profile: &VolumeProfile) -> Result<(f64, f64)> {
    if profile.values.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::NonPositiveProfile);
    }
    let t0 = profile.t_grid.first().copied().ok_or(Error::TooFewSamples { needed: 3, have: 0 })?;
    let idx: Vec<usize> = (0..profile.len()).filter(|&i| profile.t_grid[i] <= 10.0 * t0 * (1.0 + 1e-12)).collect();
    if idx.len() < 3 {
        return Err(Error::TooFewSamples { needed: 3, have: idx.len() });
    }
    let xs: Vec<f64> = idx.iter().map(|&i| profile.t_grid[i].ln()).collect();
    let ys: Vec<f64> = idx.iter().map(|&i| profile.values[i].ln()).collect();
    Ok(line_fit(&xs, &ys))
}

/// Ordinary least squares slope and its standard error.
pub(crate) fn line_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - icpt - slope * x).powi(2)).sum();
    let se = if xs.len() > 2 { (rss / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    (slope, se)
}

/// Hit-or-miss Monte Carlo estimate of the `n`-volume of the cap region
/// `{x above the graph : <x, xi> <= h + c}`, with standard error.
pub fn cap_volume_mc(surface: &GraphSurface, frame: &TangentFrame, c: f64, samples: usize, seed: u64) -> Result<(f64, f64)> {
    let d = surface.d();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = 1.25 * max_boundary_radius(surface, frame, c, &mut rng)?;
    let xi_p = &frame.xi[..d];
    let xi_n = frame.xi[d];
    let center = &frame.a[..d];
    // x_n ranges over [min f, max of the cutting plane] within the box
    let reach = half * (d as f64).sqrt();
    let top = (frame.h + c + norm(xi_p) * (norm(center) + reach)) / xi_n;
    let bottom = 0.0;
    let mut hits = 0usize;
    let mut x = vec![0.0; d];
    for _ in 0..samples {
        for (xi, ci) in x.iter_mut().zip(center) {
            *xi = ci + half * rng.random_range(-1.0..1.0);
        }
        let xn: f64 = rng.random_range(bottom..top);
        if surface.in_domain(&x) && xn >= surface.value(&x) && dot(xi_p, &x) + xi_n * xn <= frame.h + c {
            hits += 1;
        }
    }
    let vbox = (2.0 * half).powi(d as i32) * (top - bottom);
    let p = hits as f64 / samples as f64;
    Ok((vbox * p, vbox * (p * (1.0 - p) / samples as f64).sqrt()))
}

/// Trapezoid integral of the profile from 0 (where `A = 0`) to the last grid
/// point, with the propagated error.
pub fn profile_integral(profile: &VolumeProfile) -> (f64, f64) {
    let mut ts = vec![0.0];
    ts.extend_from_slice(&profile.t_grid);
    let mut vs = vec![0.0];
    vs.extend_from_slice(&profile.values);
    let mut es = vec![0.0];
    es.extend_from_slice(&profile.err);
    let mut total = 0.0;
    let mut var = 0.0;
    for i in 1..ts.len() {
        let h = ts[i] - ts[i - 1];
        total += 0.5 * h * (vs[i] + vs[i - 1]);
        var += (0.5 * h * es[i]).powi(2) + (0.5 * h * es[i - 1]).powi(2);
    }
    (total, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surfaces::{make_quadric, QuadricKind, QuadricSpec};
    use std::f64::consts::PI;

    fn quadric(kind: QuadricKind, a: Vec<f64>) -> GraphSurface {
        let n = a.len();
        make_quadric(&QuadricSpec { kind, a }, n, 12).unwrap()
    }

    fn unit(v: &[f64]) -> Vec<f64> {
        let nv = norm(v);
        v.iter().map(|x| x / nv).collect()
    }

    #[test]
    fn sphere_cap_slice() {
        let s = quadric(QuadricKind::Ellipsoid, vec![1.0; 3]);
        for xi in [vec![0.0, 0.0, 1.0], unit(&[0.2, -0.3, 0.9])] {
            let f = s.inverse_gauss(&xi).unwrap();
            let (a, e) = section_volume(&s, &f, 0.1).unwrap();
            assert!((a - 0.19 * PI).abs() < 1e-10, "{a}");
            assert!(e < 1e-9);
        }
    }

    #[test]
    fn paraboloid_disk() {
        let p = quadric(QuadricKind::EllipticParaboloid, vec![1.0; 3]);
        let f = p.inverse_gauss(&[0.0, 0.0, 1.0]).unwrap();
        let (a, _) = section_volume(&p, &f, 0.25).unwrap();
        assert!((a - 0.25 * PI).abs() < 1e-10);
        let (a, _) = section_volume(&p, &f, 1e-8).unwrap();
        assert!(a < 1e-7);
    }

    #[test]
    fn hyperboloid_slice() {
        let h = quadric(QuadricKind::TwoSheetHyperboloid, vec![1.0; 3]);
        let f = h.inverse_gauss(&[0.0, 0.0, 1.0]).unwrap();
        let (a, _) = section_volume(&h, &f, 0.2).unwrap();
        assert!((a - 0.44 * PI).abs() < 1e-10);
    }

    #[test]
    fn circle_chord() {
        let s = quadric(QuadricKind::Ellipsoid, vec![1.0, 1.0]);
        let xi = unit(&[0.3, 1.0]);
        let f = s.inverse_gauss(&xi).unwrap();
        for t in [0.01, 0.1, 0.3] {
            let (a, _) = section_volume(&s, &f, t).unwrap();
            assert!((a - 2.0 * (2.0 * t - t * t).sqrt()).abs() < 1e-10);
        }
    }

    #[test]
    fn three_sphere_monte_carlo() {
        let s = quadric(QuadricKind::Ellipsoid, vec![1.0; 4]);
        let f = s.inverse_gauss(&[0.0, 0.0, 0.0, 1.0]).unwrap();
        let opts = SectionOptions { mc_samples: 400_000, seed: 11, ..Default::default() };
        let t = 0.2;
        let (a, e) = section_volume_with(&s, &f, t, &opts, 0).unwrap();
        // ball of radius sqrt(2t - t^2)
        let exact = 4.0 / 3.0 * PI * (2.0 * t - t * t).powf(1.5);
        assert!((a - exact).abs() < 4.0 * e, "{a} vs {exact} (err {e})");
    }

    #[test]
    fn slice_outside_chart_is_reported() {
        let s = quadric(QuadricKind::Ellipsoid, vec![1.0; 3]);
        let f = s.inverse_gauss(&[0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(section_volume(&s, &f, 0.9), Err(Error::SliceEscapesChart { .. })));
        assert!(section_volume(&s, &f, -0.1).is_err());
    }

    #[test]
    fn profiles_and_exponents() {
        let p = quadric(QuadricKind::EllipticParaboloid, vec![1.0; 3]);
        let grid: Vec<f64> = (1..=10).map(|i| 0.05 * i as f64).collect();
        let prof = volume_profile(&p, &[0.0, 0.0, 1.0], &grid, 0.5, &SectionOptions::default()).unwrap();
        for (t, a) in prof.t_grid.iter().zip(&prof.values) {
            assert!((a - PI * t).abs() < 1e-10);
        }
        let geo: Vec<f64> = (0..8).map(|i| 1e-4 * 10f64.powf(i as f64 / 7.0)).collect();
        let prof = volume_profile(&p, &[0.0, 0.0, 1.0], &geo, 0.5, &SectionOptions::default()).unwrap();
        let (e, _) = leading_exponent(&prof).unwrap();
        assert!((e - 1.0).abs() < 0.02);
        let c = quadric(QuadricKind::Ellipsoid, vec![1.0, 1.0]);
        let prof = volume_profile(&c, &[0.0, 1.0], &geo, 0.5, &SectionOptions::default()).unwrap();
        let (e, _) = leading_exponent(&prof).unwrap();
        assert!((e - 0.5).abs() < 0.02);
        assert!(volume_profile(&p, &[0.0, 0.0, 1.0], &[0.2, 0.1], 0.5, &SectionOptions::default()).is_err());
        assert!(volume_profile(&p, &[0.0, 0.0, 1.0], &[0.2, 0.6], 0.5, &SectionOptions::default()).is_err());
    }

    #[test]
    fn exponent_rejects_bad_profiles() {
        let prof = VolumeProfile {
            xi: vec![0.0, 1.0],
            t_grid: vec![0.1, 0.2, 0.3],
            values: vec![0.0, 1.0, 2.0],
            err: vec![0.0; 3],
            method: VolumeMethod::RadialQuadrature,
            c: 0.3,
            seed: None,
        };
        assert!(matches!(leading_exponent(&prof), Err(Error::NonPositiveProfile)));
    }

    #[test]
    fn default_cap_height_respects_chart() {
        let s = quadric(QuadricKind::Ellipsoid, vec![1.0; 3]);
        let f = s.inverse_gauss(&[0.0, 0.0, 1.0]).unwrap();
        let c = default_cap_height(&s, &f, 0.3);
        // slice radius sqrt(2c - c^2) must stay within 0.8 * 0.95
        assert!(c <= 0.3 && (2.0 * c - c * c).sqrt() <= 0.76 + 1e-9);
        let p = quadric(QuadricKind::EllipticParaboloid, vec![1.0; 3]);
        let f = p.inverse_gauss(&[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(default_cap_height(&p, &f, 0.3), 0.3);
    }
}
