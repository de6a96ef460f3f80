//! Chart quadrature in level-set polar coordinates.
//!
//! Points of the cap are written `x' = a' + r(tau, theta) e_theta` where
//! `tau0(x') = xi'.x' + xi_n f(x') - h` equals `tau = c v^2`. The phase of every
//! integrand is then `lambda (h + tau)`, independent of the angle, and the
//! angular integrals collapse into smooth level densities sampled at Gauss
//! nodes in `v`. Panels in `v` sit at `sqrt(j / P)`, so each carries the same
//! phase increment.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use super::cutoff::CutoffSpec;
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::surfaces::{dot, GraphSurface, TangentFrame};

/// Largest phase increment per panel.
pub(crate) const PHASE_PER_PANEL: f64 = std::f64::consts::FRAC_PI_4;

/// Level densities on the `v` nodes, with quadrature weights folded in.
#[derive(Clone, Debug)]
pub(crate) struct LevelDensities {
    pub c: f64,
    pub panels: usize,
    pub bounds: Vec<f64>,
    pub rule: Arc<GaussLegendre>,
    pub v: Vec<f64>,
    pub tau: Vec<f64>,
    /// `x'`-area density.
    pub m0: Vec<f64>,
    /// Flux density `(xi_n - xi'.grad f)`.
    pub mnu: Vec<f64>,
    /// Per requested `k`: `(xi_n - xi'.grad f) T^k`.
    pub m1: Vec<Vec<f64>>,
    /// Per requested `k`: `k T^{k-1} (2 x'.grad f + 1)`.
    pub m2: Vec<Vec<f64>>,
}

struct Ray {
    dir: Vec<f64>,
    weight: f64,
    /// Boundary radius at level `c`, used for every node inside the cap so
    /// that extending the cap leaves those nodes untouched.
    r_cap: f64,
    r_max: f64,
}

/// Angular nodes: `theta_panels` Gauss panels on the circle for `d = 2`, the
/// two half-lines for `d = 1`.
fn rays(surface: &GraphSurface, frame: &TangentFrame, theta_panels: usize, rule: &GaussLegendre, c: f64, level: f64) -> Result<Vec<Ray>> {
    let d = surface.d();
    let dirs: Vec<(Vec<f64>, f64)> = match d {
        1 => vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)],
        2 => {
            let two_pi = 2.0 * std::f64::consts::PI;
            let mut out = Vec::with_capacity(theta_panels * rule.order());
            for p in 0..theta_panels {
                let a = two_pi * p as f64 / theta_panels as f64;
                let b = two_pi * (p + 1) as f64 / theta_panels as f64;
                for (th, w) in rule.mapped(a, b) {
                    out.push((vec![th.cos(), th.sin()], w));
                }
            }
            out
        }
        _ => return Err(Error::UnsupportedDimension(surface.n())),
    };
    let tau0 = tau_fn(surface, frame);
    dirs.into_iter()
        .map(|(dir, weight)| {
            let root = |t: f64| surface.radial_root(&tau0, &frame.a[..d], &dir, t, 1e-13).ok_or(Error::SliceEscapesChart { t });
            let r_cap = root(c)?;
            let r_max = if level > c { root(level)? } else { r_cap };
            Ok(Ray { dir, weight, r_cap, r_max })
        })
        .collect()
}

fn tau_fn<'a>(surface: &'a GraphSurface, frame: &'a TangentFrame) -> impl Fn(&[f64]) -> f64 + 'a {
    let d = surface.d();
    move |x: &[f64]| {
        if !surface.in_domain(x) {
            return f64::INFINITY;
        }
        dot(&frame.xi[..d], x) + frame.xi[d] * surface.value(x) - frame.h
    }
}

/// Solves `tau0(a' + r e) = target` for `r` in `(lo, hi)` by safeguarded
/// Newton iteration from `guess`. Returns `r`, the point and `grad f` there.
fn solve_ray(
    surface: &GraphSurface,
    frame: &TangentFrame,
    dir: &[f64],
    target: f64,
    guess: f64,
    mut lo: f64,
    mut hi: f64,
) -> (f64, Vec<f64>, Vec<f64>, f64) {
    let d = surface.d();
    let xi_p = &frame.xi[..d];
    let xi_n = frame.xi[d];
    let point = |r: f64| -> Vec<f64> { frame.a[..d].iter().zip(dir).map(|(a, e)| a + r * e).collect() };
    let mut r = guess.clamp(lo, hi);
    for _ in 0..80 {
        let x = point(r);
        let g = surface.gradient(&x);
        let val = dot(xi_p, &x) + xi_n * surface.value(&x) - frame.h - target;
        let slope: f64 = xi_p.iter().zip(&g).zip(dir).map(|((p, gi), e)| (p + xi_n * gi) * e).sum();
        if val < 0.0 {
            lo = r;
        } else {
            hi = r;
        }
        let mut next = if slope > 0.0 { r - val / slope } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let done = (next - r).abs() <= 4.0 * f64::EPSILON * r.max(f64::MIN_POSITIVE) || hi - lo <= 4.0 * f64::EPSILON * hi;
        r = next;
        if done {
            break;
        }
    }
    let x = point(r);
    let g = surface.gradient(&x);
    let slope: f64 = xi_p.iter().zip(&g).zip(dir).map(|((p, gi), e)| (p + xi_n * gi) * e).sum();
    (r, x, g, slope)
}

/// Samples the level densities on `panels` equal-phase panels over
/// `[0, c]`, extended by whole panels up to `extend_to` when given.
pub(crate) fn level_densities(
    surface: &GraphSurface,
    frame: &TangentFrame,
    c: f64,
    panels: usize,
    theta_panels: usize,
    gl_order: usize,
    ks: &[u32],
    extend_to: Option<f64>,
) -> Result<LevelDensities> {
    let d = surface.d();
    let rule = GaussLegendre::cached(gl_order);
    let total_panels = match extend_to {
        Some(e) if e > c => (panels as f64 * e / c).ceil() as usize,
        _ => panels,
    };
    let bounds: Vec<f64> = (0..=total_panels).map(|j| (j as f64 / panels as f64).sqrt()).collect();
    let v_max = bounds[total_panels];
    let level = c * v_max * v_max;
    let rays = rays(surface, frame, theta_panels, &rule, c, level)?;
    let xi_p = &frame.xi[..d];
    let xi_n = frame.xi[d];
    let q = rule.order();

    // panels are processed in independent chunks; each chunk owns its slice
    // of the output, so the angular summation order is fixed
    const CHUNK: usize = 32;
    let chunk_starts: Vec<usize> = (0..total_panels).step_by(CHUNK).collect();
    let nk = ks.len();
    let chunks: Vec<(Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>)> = chunk_starts
        .par_iter()
        .map(|&j0| {
            let j1 = (j0 + CHUNK).min(total_panels);
            let mut vs = Vec::with_capacity((j1 - j0) * q);
            let mut wv = Vec::with_capacity((j1 - j0) * q);
            for j in j0..j1 {
                for (v, w) in rule.mapped(bounds[j], bounds[j + 1]) {
                    vs.push(v);
                    wv.push(w);
                }
            }
            let len = vs.len();
            let mut m0 = vec![0.0; len];
            let mut mnu = vec![0.0; len];
            let mut m1 = vec![vec![0.0; len]; nk];
            let mut m2 = vec![vec![0.0; len]; nk];
            for ray in &rays {
                let mut r_prev = 0.0;
                let mut tau_prev = 0.0;
                for (idx, (&v, &w)) in vs.iter().zip(&wv).enumerate() {
                    let tau = c * v * v;
                    // quadratic growth gives a good first guess
                    let (hi, top) = if tau <= c { (ray.r_cap, 1.0) } else { (ray.r_max, v_max) };
                    let guess = if tau_prev > 0.0 { r_prev * (tau / tau_prev).sqrt() } else { hi * v / top };
                    let (r, x, g, slope) = solve_ray(surface, frame, &ray.dir, tau, guess, r_prev, hi);
                    r_prev = r;
                    tau_prev = tau;
                    let jac = r.powi(d as i32 - 1) * 2.0 * c * v / slope * w * ray.weight;
                    let s_nu = xi_n - dot(xi_p, &g);
                    let fx = surface.value(&x);
                    let t1 = fx - dot(&x, &x);
                    let radial = 2.0 * dot(&x, &g) + 1.0;
                    m0[idx] += jac;
                    mnu[idx] += jac * s_nu;
                    for (ki, &k) in ks.iter().enumerate() {
                        m1[ki][idx] += jac * s_nu * t1.powi(k as i32);
                        if k > 0 {
                            m2[ki][idx] += jac * k as f64 * t1.powi(k as i32 - 1) * radial;
                        }
                    }
                }
            }
            let tau: Vec<f64> = vs.iter().map(|v| c * v * v).collect();
            (vs, tau, m0, mnu, m1, m2)
        })
        .collect();

    let mut out = LevelDensities {
        c,
        panels: total_panels,
        bounds,
        rule: rule.clone(),
        v: Vec::new(),
        tau: Vec::new(),
        m0: Vec::new(),
        mnu: Vec::new(),
        m1: vec![Vec::new(); nk],
        m2: vec![Vec::new(); nk],
    };
    for (vs, tau, m0, mnu, m1, m2) in chunks {
        out.v.extend(vs);
        out.tau.extend(tau);
        out.m0.extend(m0);
        out.mnu.extend(mnu);
        for ki in 0..nk {
            out.m1[ki].extend(&m1[ki]);
            out.m2[ki].extend(&m2[ki]);
        }
    }
    Ok(out)
}

/// Sum of complex terms with its L1 norm.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Acc {
    pub sum: Complex64,
    pub l1: f64,
}

impl Acc {
    fn add(&mut self, z: Complex64) {
        self.sum += z;
        self.l1 += z.norm();
    }
}

/// Integrals at one `lambda` from precomputed level densities. The phase
/// factor `e^{i lambda h}` is left out.
pub(crate) struct LambdaSums {
    pub i: Vec<Acc>,
    pub f1: Acc,
    pub f2: Acc,
    pub f3: Acc,
}

pub(crate) fn lambda_sums(dens: &LevelDensities, cutoff: &CutoffSpec, lambda: f64, xi_n: f64, volume_terms: bool) -> LambdaSums {
    let nk = dens.m1.len();
    let mut i = vec![Acc::default(); nk];
    let mut f1 = Acc::default();
    let mut f2 = Acc::default();
    let mut f3 = Acc::default();
    let il = Complex64::new(0.0, lambda);
    for (idx, &tau) in dens.tau.iter().enumerate() {
        let (rho, rho1, _) = cutoff.eval_all(tau);
        if rho == 0.0 && rho1 == 0.0 {
            continue;
        }
        let ph = Complex64::from_polar(1.0, lambda * tau);
        for ki in 0..nk {
            i[ki].add(ph * rho * (il * dens.m1[ki][idx] + dens.m2[ki][idx]));
        }
        if volume_terms {
            f3.add(ph * rho1 * dens.mnu[idx]);
        }
    }
    if volume_terms {
        let (g_rho, g_rho2) = tail_integrals(dens, cutoff, lambda);
        for idx in 0..dens.tau.len() {
            f1.add(g_rho[idx] * dens.m0[idx] * (-lambda * lambda / xi_n));
            f2.add(g_rho2[idx] * dens.m0[idx] * (-1.0 / xi_n));
        }
    }
    LambdaSums { i, f1, f2, f3 }
}

/// `G_w(tau) = int_tau^c e^{i lambda s} w(s) ds` at every node, for `w = rho`
/// and `w = rho''`, by panel suffix sums plus a partial Gauss rule on the
/// node's own panel.
fn tail_integrals(dens: &LevelDensities, cutoff: &CutoffSpec, lambda: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    let c = dens.c;
    let rule = &dens.rule;
    let q = rule.order();
    let integrand = |u: f64| -> (Complex64, Complex64) {
        let s = c * u * u;
        let (rho, _, rho2) = cutoff.eval_all(s);
        let base = Complex64::from_polar(2.0 * c * u, lambda * s);
        (base * rho, base * rho2)
    };
    let panels = dens.panels;
    let mut panel_int = vec![(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); panels];
    for (j, p) in panel_int.iter_mut().enumerate() {
        for (u, w) in rule.mapped(dens.bounds[j], dens.bounds[j + 1]) {
            let (a, b) = integrand(u);
            p.0 += a * w;
            p.1 += b * w;
        }
    }
    // suffix[j] = integral over panels j..end
    let mut suffix = vec![(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); panels + 1];
    for j in (0..panels).rev() {
        suffix[j] = (suffix[j + 1].0 + panel_int[j].0, suffix[j + 1].1 + panel_int[j].1);
    }
    let mut g0 = Vec::with_capacity(dens.v.len());
    let mut g2 = Vec::with_capacity(dens.v.len());
    for (idx, &v) in dens.v.iter().enumerate() {
        let j = idx / q;
        let mut part = suffix[j + 1];
        for (u, w) in rule.mapped(v, dens.bounds[j + 1]) {
            let (a, b) = integrand(u);
            part.0 += a * w;
            part.1 += b * w;
        }
        g0.push(part.0);
        g2.push(part.1);
    }
    (g0, g2)
}

/// Number of equal-phase panels for `|lambda| c`.
pub(crate) fn panels_for(lambda_max: f64, c: f64, min_panels: usize) -> usize {
    let need = (lambda_max.abs() * c / PHASE_PER_PANEL).ceil() as usize;
    need.max(min_panels)
}
