//! Strictly convex hypersurfaces written as graphs `x_n = f(x')` over a ball
//! in `R^{n-1}`, normalized so that `f(0) = 0` and `grad f(0) = 0`.

use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactpoly::{rational_from_f64, MultiPoly};

pub const DEFAULT_TAYLOR_DEGREE: u32 = 12;
const NEWTON_TOL: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadricKind {
    Ellipsoid,
    TwoSheetHyperboloid,
    EllipticParaboloid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadricSpec {
    pub kind: QuadricKind,
    pub a: Vec<f64>,
}

/// JSON surface definition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SurfaceSpec {
    Ellipsoid { a: Vec<f64>, n: usize, taylor_degree: Option<u32> },
    TwoSheetHyperboloid { a: Vec<f64>, n: usize, taylor_degree: Option<u32> },
    EllipticParaboloid { a: Vec<f64>, n: usize, taylor_degree: Option<u32> },
    CustomPoly { poly: MultiPoly, r_dom: Option<f64> },
}

impl SurfaceSpec {
    pub fn build(&self) -> Result<GraphSurface> {
        let quad = |kind, a: &Vec<f64>, n, deg: &Option<u32>| {
            make_quadric(&QuadricSpec { kind, a: a.clone() }, n, deg.unwrap_or(DEFAULT_TAYLOR_DEGREE))
        };
        match self {
            SurfaceSpec::Ellipsoid { a, n, taylor_degree } => quad(QuadricKind::Ellipsoid, a, *n, taylor_degree),
            SurfaceSpec::TwoSheetHyperboloid { a, n, taylor_degree } => {
                quad(QuadricKind::TwoSheetHyperboloid, a, *n, taylor_degree)
            }
            SurfaceSpec::EllipticParaboloid { a, n, taylor_degree } => {
                quad(QuadricKind::EllipticParaboloid, a, *n, taylor_degree)
            }
            SurfaceSpec::CustomPoly { poly, r_dom } => GraphSurface::from_polynomial(poly.clone(), r_dom.unwrap_or(1.0)),
        }
    }
}

/// Polynomial with `f64` coefficients for fast evaluation.
#[derive(Clone, Debug)]
struct F64Poly {
    terms: Vec<(Vec<i32>, f64)>,
}

impl F64Poly {
    fn from_exact(p: &MultiPoly) -> Self {
        F64Poly {
            terms: p
                .terms()
                .map(|(e, c)| (e.as_slice().iter().map(|&k| k as i32).collect(), c.to_f64().unwrap_or(f64::NAN)))
                .collect(),
        }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter().zip(x).fold(*c, |acc, (&k, &xi)| if k == 0 { acc } else { acc * xi.powi(k) })
            })
            .sum()
    }
}

#[derive(Clone, Debug)]
enum GraphFn {
    /// `f = g(q) / a_n` with `q = sum w_j x_j^2`.
    Quadric { kind: QuadricKind, w: Vec<f64>, an: f64 },
    Polynomial { value: F64Poly, grad: Vec<F64Poly>, hess: Vec<Vec<F64Poly>>, remainder: F64Poly },
}

/// `x_n = f(x')` on the ball of radius `r_dom`.
#[derive(Clone, Debug)]
pub struct GraphSurface {
    n: usize,
    f: GraphFn,
    r_dom: f64,
    taylor: Option<MultiPoly>,
    taylor_degree: u32,
    taylor_exact: bool,
    convexity_margin: f64,
}

/// Tangency data for a direction `xi`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentFrame {
    pub xi: Vec<f64>,
    /// Tangency point on the surface.
    pub a: Vec<f64>,
    /// Inward unit normal at `a`.
    pub nu: Vec<f64>,
    /// Support value `<a, xi>`.
    pub h: f64,
    /// Orthonormal basis of the hyperplane orthogonal to `xi`.
    pub frame: Vec<Vec<f64>>,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactOrder {
    Finite(u32),
    Infinite,
}

fn binomial_half(k: u32) -> BigRational {
    // binom(1/2, k)
    let half = BigRational::new(1.into(), 2.into());
    let mut acc = BigRational::one();
    for i in 0..k {
        acc = acc * (&half - BigRational::from_integer(i.into())) / BigRational::from_integer((i + 1).into());
    }
    acc
}

/// Builds a quadric from the catalog, re-centred at its vertex.
///
/// Ellipsoid `sum a_j^2 x_j^2 = 1` around the lowest point, upper sheet of
/// `sum_{j<n} a_j^2 x_j^2 - a_n^2 x_n^2 = -1`, and paraboloid
/// `a_n^2 x_n = sum_{j<n} a_j^2 x_j^2` (for the paraboloid, `a` may omit
/// `a_n`, which then defaults to 1).
pub fn make_quadric(spec: &QuadricSpec, n: usize, taylor_degree: u32) -> Result<GraphSurface> {
    if n < 2 {
        return Err(Error::UnsupportedDimension(n));
    }
    let mut a = spec.a.clone();
    if spec.kind == QuadricKind::EllipticParaboloid && a.len() == n - 1 {
        a.push(1.0);
    }
    if a.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: a.len() });
    }
    if a.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidCoefficients(format!("all a_j must be positive, got {:?}", spec.a)));
    }
    let d = n - 1;
    let an = a[d];
    let w: Vec<f64> = a[..d].iter().map(|v| v * v).collect();
    let max_a = a[..d].iter().cloned().fold(0.0, f64::max);

    // exact Taylor data from the binomial series of sqrt(1 -/+ u)
    let mut q = MultiPoly::zero(d);
    for (j, wj) in w.iter().enumerate() {
        let mut e = vec![0; d];
        e[j] = 2;
        q = &q + &MultiPoly::monomial(e, rational_from_f64(*wj)?);
    }
    let inv_an = BigRational::one() / rational_from_f64(an)?;
    let (taylor, exact, r_dom) = match spec.kind {
        QuadricKind::EllipticParaboloid => {
            let inv_an2 = &inv_an * &inv_an;
            (q.scale(&inv_an2), true, 1e3 * an / max_a)
        }
        QuadricKind::Ellipsoid | QuadricKind::TwoSheetHyperboloid => {
            let mut t = MultiPoly::zero(d);
            let mut qk = MultiPoly::one(d);
            for k in 1..=taylor_degree / 2 {
                qk = &qk * &q;
                let b = binomial_half(k);
                // 1 - sqrt(1-u) = -sum_{k>=1} binom(1/2,k)(-u)^k ; sqrt(1+u) - 1 = sum binom(1/2,k) u^k
                let ck = if spec.kind == QuadricKind::Ellipsoid {
                    if k % 2 == 0 { -b } else { b }
                } else {
                    b
                };
                t = &t + &qk.scale(&(ck * &inv_an));
            }
            let r = if spec.kind == QuadricKind::Ellipsoid { 0.95 / max_a } else { 10.0 / max_a };
            (t, false, r)
        }
    };
    let mut s = GraphSurface {
        n,
        f: GraphFn::Quadric { kind: spec.kind, w, an },
        r_dom,
        taylor: Some(taylor),
        taylor_degree: if exact { u32::MAX } else { taylor_degree },
        taylor_exact: exact,
        convexity_margin: 0.0,
    };
    s.convexity_margin = s.estimate_convexity_margin();
    if s.convexity_margin <= 0.0 {
        return Err(Error::InvalidCoefficients("quadric chart is not strictly convex".into()));
    }
    Ok(s)
}

impl GraphSurface {
    /// Polynomial graph over the ball of radius `r_dom`. The polynomial must
    /// vanish to second order at the origin and have positive definite
    /// Hessian on the ball.
    pub fn from_polynomial(p: MultiPoly, r_dom: f64) -> Result<GraphSurface> {
        let d = p.dim();
        if d < 1 {
            return Err(Error::UnsupportedDimension(d + 1));
        }
        if !(r_dom > 0.0 && r_dom.is_finite()) {
            return Err(Error::InvalidInput(format!("r_dom must be positive, got {r_dom}")));
        }
        if p.min_degree().is_some_and(|m| m < 2) {
            return Err(Error::InvalidInput("graph polynomial must have no constant or linear part".into()));
        }
        let grad_exact = p.gradient();
        let hess: Vec<Vec<F64Poly>> = grad_exact
            .iter()
            .map(|g| (0..d).map(|j| F64Poly::from_exact(&g.derivative(j))).collect())
            .collect();
        let remainder = &p - &p.homogeneous_component(2);
        let mut s = GraphSurface {
            n: d + 1,
            f: GraphFn::Polynomial {
                value: F64Poly::from_exact(&p),
                grad: grad_exact.iter().map(F64Poly::from_exact).collect(),
                hess,
                remainder: F64Poly::from_exact(&remainder),
            },
            r_dom,
            taylor: Some(p),
            taylor_degree: u32::MAX,
            taylor_exact: true,
            convexity_margin: 0.0,
        };
        s.convexity_margin = s.estimate_convexity_margin();
        if s.convexity_margin <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "Hessian is not positive definite on the ball of radius {r_dom} (margin {})",
                s.convexity_margin
            )));
        }
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of graph variables, `n - 1`.
    pub fn d(&self) -> usize {
        self.n - 1
    }

    pub fn r_dom(&self) -> f64 {
        self.r_dom
    }

    pub fn taylor(&self) -> Option<&MultiPoly> {
        self.taylor.as_ref()
    }

    /// Degree up to which [`GraphSurface::taylor`] is valid; `u32::MAX` when exact.
    pub fn taylor_degree(&self) -> u32 {
        self.taylor_degree
    }

    pub fn taylor_exact(&self) -> bool {
        self.taylor_exact
    }

    pub fn convexity_margin(&self) -> f64 {
        self.convexity_margin
    }

    pub fn quadric_kind(&self) -> Option<QuadricKind> {
        match &self.f {
            GraphFn::Quadric { kind, .. } => Some(*kind),
            GraphFn::Polynomial { .. } => None,
        }
    }

    pub fn in_domain(&self, x: &[f64]) -> bool {
        norm(x) < self.r_dom
    }

    fn check_domain(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.d() {
            return Err(Error::DimensionMismatch { expected: self.d(), found: x.len() });
        }
        let r = norm(x);
        if r >= self.r_dom || !r.is_finite() {
            return Err(Error::OutsideDomain { norm: r, radius: self.r_dom });
        }
        Ok(())
    }

    /// `f(x')`; NaN outside the natural domain of a quadric.
    pub fn value(&self, x: &[f64]) -> f64 {
        match &self.f {
            GraphFn::Quadric { kind, w, an } => {
                let q: f64 = w.iter().zip(x).map(|(w, x)| w * x * x).sum();
                match kind {
                    QuadricKind::Ellipsoid => q / (an * (1.0 + (1.0 - q).sqrt())),
                    QuadricKind::TwoSheetHyperboloid => q / (an * (1.0 + (1.0 + q).sqrt())),
                    QuadricKind::EllipticParaboloid => q / (an * an),
                }
            }
            GraphFn::Polynomial { value, .. } => value.eval(x),
        }
    }

    /// `f(x')` minus its quadratic Taylor part, evaluated without cancellation.
    pub fn remainder(&self, x: &[f64]) -> f64 {
        match &self.f {
            GraphFn::Quadric { kind, w, an } => {
                let q: f64 = w.iter().zip(x).map(|(w, x)| w * x * x).sum();
                match kind {
                    QuadricKind::Ellipsoid => {
                        let s = 1.0 + (1.0 - q).sqrt();
                        q * q / (2.0 * an * s * s)
                    }
                    QuadricKind::TwoSheetHyperboloid => {
                        let s = 1.0 + (1.0 + q).sqrt();
                        -q * q / (2.0 * an * s * s)
                    }
                    QuadricKind::EllipticParaboloid => 0.0,
                }
            }
            GraphFn::Polynomial { remainder, .. } => remainder.eval(x),
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match &self.f {
            GraphFn::Quadric { kind, w, an } => {
                let q: f64 = w.iter().zip(x).map(|(w, x)| w * x * x).sum();
                let g1 = quadric_g1(*kind, q, *an);
                w.iter().zip(x).map(|(w, x)| 2.0 * g1 * w * x).collect()
            }
            GraphFn::Polynomial { grad, .. } => grad.iter().map(|g| g.eval(x)).collect(),
        }
    }

    pub fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let d = self.d();
        match &self.f {
            GraphFn::Quadric { kind, w, an } => {
                let q: f64 = w.iter().zip(x).map(|(w, x)| w * x * x).sum();
                let g1 = quadric_g1(*kind, q, *an);
                let g2 = quadric_g2(*kind, q, *an);
                DMatrix::from_fn(d, d, |i, j| {
                    let diag = if i == j { 2.0 * g1 * w[i] } else { 0.0 };
                    diag + 4.0 * g2 * w[i] * x[i] * w[j] * x[j]
                })
            }
            GraphFn::Polynomial { hess, .. } => DMatrix::from_fn(d, d, |i, j| hess[i][j].eval(x)),
        }
    }

    /// Smallest Hessian eigenvalue over a deterministic sample of the ball.
    fn estimate_convexity_margin(&self) -> f64 {
        let d = self.d();
        let mut pts: Vec<Vec<f64>> = vec![vec![0.0; d]];
        let radii = [0.25, 0.5, 0.75, 0.9, 0.999];
        let mut dirs: Vec<Vec<f64>> = Vec::new();
        for i in 0..d {
            for s in [-1.0, 1.0] {
                let mut v = vec![0.0; d];
                v[i] = s;
                dirs.push(v);
            }
        }
        for i in 0..d {
            for j in (i + 1)..d {
                for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                    let mut v = vec![0.0; d];
                    v[i] = si / 2f64.sqrt();
                    v[j] = sj / 2f64.sqrt();
                    dirs.push(v);
                }
            }
        }
        // a few irrational directions
        for k in 0..8 {
            let v: Vec<f64> = (0..d).map(|i| ((k * d + i) as f64 * 2.399_963 + 0.3).cos()).collect();
            let nv = norm(&v);
            if nv > 0.0 {
                dirs.push(v.iter().map(|x| x / nv).collect());
            }
        }
        for r in radii {
            for v in &dirs {
                pts.push(v.iter().map(|x| x * r * self.r_dom).collect());
            }
        }
        pts.iter()
            .map(|p| {
                let h = self.hessian(p);
                if h.iter().any(|v| !v.is_finite()) {
                    return f64::NEG_INFINITY;
                }
                h.symmetric_eigenvalues().min()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Inward unit normal `(-grad f, 1)/sqrt(1 + |grad f|^2)` at `(x', f(x'))`.
    pub fn inward_normal(&self, x: &[f64]) -> Vec<f64> {
        let g = self.gradient(x);
        let s = (1.0 + g.iter().map(|v| v * v).sum::<f64>()).sqrt();
        let mut nu: Vec<f64> = g.iter().map(|v| -v / s).collect();
        nu.push(1.0 / s);
        nu
    }

    /// Point on the surface with inward normal `xi`, found by damped Newton
    /// iteration on `grad f(a') = -xi'/xi_n` starting from the origin.
    pub fn inverse_gauss(&self, xi: &[f64]) -> Result<TangentFrame> {
        let n = self.n;
        let d = self.d();
        if xi.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: xi.len() });
        }
        let nx = norm(xi);
        if (nx - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!("direction must be a unit vector, |xi| = {nx}")));
        }
        if xi[d] <= 0.0 {
            return Err(Error::InvalidInput("direction must have positive last component".into()));
        }
        let target: Vec<f64> = xi[..d].iter().map(|v| -v / xi[d]).collect();
        let tol = NEWTON_TOL * (1.0 + norm(&target));
        let residual_of = |a: &[f64]| -> Vec<f64> {
            self.gradient(a).iter().zip(&target).map(|(g, t)| g - t).collect()
        };
        let mut a = vec![0.0; d];
        let mut r = residual_of(&a);
        let mut rn = norm(&r);
        let mut iters = 0;
        while rn > tol {
            if iters >= NEWTON_MAX_ITER {
                return Err(Error::NoConvergence { iterations: iters, residual: rn });
            }
            iters += 1;
            let h = self.hessian(&a);
            let step = h
                .lu()
                .solve(&DVector::from_column_slice(&r))
                .ok_or_else(|| Error::NoConvergence { iterations: iters, residual: rn })?;
            let mut damp = 1.0;
            loop {
                let cand: Vec<f64> = a.iter().zip(step.iter()).map(|(x, s)| x - damp * s).collect();
                if self.in_domain(&cand) {
                    let rc = residual_of(&cand);
                    let rcn = norm(&rc);
                    if rcn.is_finite() && (rcn < rn || rcn <= tol) {
                        a = cand;
                        r = rc;
                        rn = rcn;
                        break;
                    }
                }
                damp *= 0.5;
                if damp < 1e-12 {
                    if rn <= 1e3 * tol {
                        // roundoff stagnation close to the solution
                        let frame = self.frame_at(xi, &a, rn, iters);
                        return Ok(frame);
                    }
                    return Err(Error::NoConvergence { iterations: iters, residual: rn });
                }
            }
        }
        Ok(self.frame_at(xi, &a, rn, iters))
    }

    fn frame_at(&self, xi: &[f64], a_prime: &[f64], residual: f64, iterations: usize) -> TangentFrame {
        let mut a = a_prime.to_vec();
        a.push(self.value(a_prime));
        let nu = self.inward_normal(a_prime);
        let h = dot(&a, xi);
        TangentFrame { xi: xi.to_vec(), a, nu, h, frame: orthonormal_complement(xi), residual, iterations }
    }

    pub fn gaussian_curvature(&self, x: &[f64]) -> Result<f64> {
        self.check_domain(x)?;
        let g = self.gradient(x);
        let s = 1.0 + g.iter().map(|v| v * v).sum::<f64>();
        Ok(self.hessian(x).determinant() / s.powf((self.n as f64 + 1.0) / 2.0))
    }

    /// Degree-2 Taylor polynomial of `f` at the origin.
    pub fn osculating_paraboloid(&self) -> Result<MultiPoly> {
        match &self.taylor {
            Some(t) if self.taylor_degree >= 2 => Ok(t.truncate(2)),
            _ => Err(Error::MissingTaylor { needed: 2, have: self.taylor.as_ref().map(|_| self.taylor_degree) }),
        }
    }

    /// Largest `k <= k_max` with vanishing Taylor components in degrees
    /// `3..=k`; infinite when nothing beyond degree 2 survives.
    pub fn contact_order(&self, k_max: u32) -> Result<ContactOrder> {
        let t = self.taylor.as_ref().ok_or(Error::MissingTaylor { needed: k_max, have: None })?;
        if !self.taylor_exact && self.taylor_degree < k_max {
            return Err(Error::MissingTaylor { needed: k_max, have: Some(self.taylor_degree) });
        }
        for k in 3..=k_max {
            if !t.homogeneous_component(k).is_zero() {
                return Ok(ContactOrder::Finite(k - 1));
            }
        }
        let beyond_two = t.degree().is_some_and(|deg| deg > 2);
        Ok(if beyond_two { ContactOrder::Finite(k_max.max(2)) } else { ContactOrder::Infinite })
    }

    /// Distance along unit direction `dir` (in `x'` space, from `center`)
    /// to the level set `phi = level`, where `phi` is convex and
    /// `phi(center) < level`. Bisection to `tol`; errors if the root leaves
    /// the chart.
    pub(crate) fn radial_root<F: Fn(&[f64]) -> f64>(
        &self,
        phi: F,
        center: &[f64],
        dir: &[f64],
        level: f64,
        tol: f64,
    ) -> Option<f64> {
        let point = |s: f64| -> Vec<f64> { center.iter().zip(dir).map(|(c, v)| c + s * v).collect() };
        let mut lo = 0.0;
        let mut hi = self.r_dom * 1e-3;
        // expand until outside the level set or leaving the chart
        loop {
            let p = point(hi);
            if !self.in_domain(&p) {
                // bracket on the domain boundary
                let room = boundary_distance(center, dir, self.r_dom);
                let pb = point(room * (1.0 - 1e-12));
                if phi(&pb) > level {
                    hi = room * (1.0 - 1e-12);
                    break;
                }
                return None;
            }
            let v = phi(&p);
            if !v.is_finite() {
                return None;
            }
            if v > level {
                break;
            }
            lo = hi;
            hi *= 2.0;
        }
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if phi(&point(mid)) > level {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }
}

/// Distance from `c` along unit `v` to the sphere of radius `r`.
fn boundary_distance(c: &[f64], v: &[f64], r: f64) -> f64 {
    let b = dot(c, v);
    let cc = dot(c, c);
    -b + (b * b - cc + r * r).max(0.0).sqrt()
}

/// `d f / d q` for the quadric profile `f = f(q)`.
fn quadric_g1(kind: QuadricKind, q: f64, an: f64) -> f64 {
    match kind {
        QuadricKind::Ellipsoid => 0.5 / ((1.0 - q).sqrt() * an),
        QuadricKind::TwoSheetHyperboloid => 0.5 / ((1.0 + q).sqrt() * an),
        QuadricKind::EllipticParaboloid => 1.0 / (an * an),
    }
}

/// `d^2 f / d q^2`.
fn quadric_g2(kind: QuadricKind, q: f64, an: f64) -> f64 {
    match kind {
        QuadricKind::Ellipsoid => 0.25 / ((1.0 - q).powf(1.5) * an),
        QuadricKind::TwoSheetHyperboloid => -0.25 / ((1.0 + q).powf(1.5) * an),
        QuadricKind::EllipticParaboloid => 0.0,
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Orthonormal basis of the complement of the unit vector `xi`.
pub fn orthonormal_complement(xi: &[f64]) -> Vec<Vec<f64>> {
    let n = xi.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    // try coordinate vectors in order of least alignment with xi
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| xi[i].abs().partial_cmp(&xi[j].abs()).unwrap_or(std::cmp::Ordering::Equal));
    for &i in &order {
        if basis.len() == n - 1 {
            break;
        }
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        for _ in 0..2 {
            let p = dot(&v, xi);
            v.iter_mut().zip(xi).for_each(|(a, b)| *a -= p * b);
            for b in &basis {
                let p = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(a, c)| *a -= p * c);
            }
        }
        let nv = norm(&v);
        if nv > 1e-8 {
            basis.push(v.iter().map(|x| x / nv).collect());
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactpoly::MultiPoly;
    use num_bigint::BigInt;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn sphere(n: usize) -> GraphSurface {
        make_quadric(&QuadricSpec { kind: QuadricKind::Ellipsoid, a: vec![1.0; n] }, n, 12).unwrap()
    }

    fn paraboloid() -> GraphSurface {
        make_quadric(&QuadricSpec { kind: QuadricKind::EllipticParaboloid, a: vec![1.0, 1.0] }, 3, 12).unwrap()
    }

    #[test]
    fn catalog_examples() {
        let p = paraboloid();
        assert_eq!(p.taylor().unwrap(), &MultiPoly::norm_squared(2));
        assert!((p.value(&[0.3, -0.4]) - 0.25).abs() < 1e-15);
        let s = sphere(3);
        let x = [0.3, 0.4];
        assert!((s.value(&x) - (1.0 - (1.0f64 - 0.25).sqrt())).abs() < 1e-15);
        let h = make_quadric(&QuadricSpec { kind: QuadricKind::TwoSheetHyperboloid, a: vec![1.0; 3] }, 3, 12).unwrap();
        assert!((h.value(&x) - ((1.25f64).sqrt() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_coefficients() {
        let bad = QuadricSpec { kind: QuadricKind::Ellipsoid, a: vec![1.0, 0.0, 1.0] };
        assert!(matches!(make_quadric(&bad, 3, 12), Err(Error::InvalidCoefficients(_))));
        let neg = QuadricSpec { kind: QuadricKind::EllipticParaboloid, a: vec![-1.0, 1.0] };
        assert!(make_quadric(&neg, 3, 12).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let surfaces = vec![
            make_quadric(&QuadricSpec { kind: QuadricKind::Ellipsoid, a: vec![0.7, 1.1, 0.9] }, 3, 12).unwrap(),
            make_quadric(&QuadricSpec { kind: QuadricKind::TwoSheetHyperboloid, a: vec![1.3, 0.6, 0.8] }, 3, 12)
                .unwrap(),
            make_quadric(&QuadricSpec { kind: QuadricKind::EllipticParaboloid, a: vec![1.3, 0.6, 0.8] }, 3, 12)
                .unwrap(),
        ];
        let x = [0.21, -0.13];
        let eps = 1e-5;
        for s in &surfaces {
            let g = s.gradient(&x);
            let h = s.hessian(&x);
            for i in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[i] += eps;
                xm[i] -= eps;
                let fd = (s.value(&xp) - s.value(&xm)) / (2.0 * eps);
                assert!((fd - g[i]).abs() < 1e-8);
                let gp = s.gradient(&xp);
                let gm = s.gradient(&xm);
                for j in 0..2 {
                    assert!(((gp[j] - gm[j]) / (2.0 * eps) - h[(j, i)]).abs() < 1e-7);
                }
            }
            // remainder is f minus the quadratic Taylor part
            let q2 = s.taylor().unwrap().homogeneous_component(2).eval_f64(&x);
            assert!((s.value(&x) - q2 - s.remainder(&x)).abs() < 1e-14);
        }
    }

    #[test]
    fn taylor_series_of_quadrics_match_values() {
        let e = make_quadric(&QuadricSpec { kind: QuadricKind::Ellipsoid, a: vec![0.5, 1.5, 2.0] }, 3, 16).unwrap();
        let x = [0.05, 0.04];
        assert!((e.taylor().unwrap().eval_f64(&x) - e.value(&x)).abs() < 1e-16);
        // 1 - sqrt(1-u) = u/2 + u^2/8 + u^3/16 + ...
        let s = sphere(3);
        let t = s.taylor().unwrap();
        let u = MultiPoly::norm_squared(2);
        assert_eq!(t.homogeneous_component(2), u.scale(&r(1, 2)));
        assert_eq!(t.homogeneous_component(4), u.pow(2).scale(&r(1, 8)));
        assert_eq!(t.homogeneous_component(6), u.pow(3).scale(&r(1, 16)));
        let h = make_quadric(&QuadricSpec { kind: QuadricKind::TwoSheetHyperboloid, a: vec![1.0; 3] }, 3, 6).unwrap();
        assert_eq!(h.taylor().unwrap().homogeneous_component(4), u.pow(2).scale(&r(-1, 8)));
    }

    #[test]
    fn inverse_gauss_examples() {
        let p = paraboloid();
        let f = p.inverse_gauss(&[0.0, 0.0, 1.0]).unwrap();
        assert!(f.a.iter().all(|v| v.abs() < 1e-15) && f.h.abs() < 1e-15);
        let t = 0.1;
        let raw = [-2.0 * t, 0.0, 1.0];
        let nr = norm(&raw);
        let xi: Vec<f64> = raw.iter().map(|v| v / nr).collect();
        let f = p.inverse_gauss(&xi).unwrap();
        assert!((f.a[0] - 0.1).abs() < 1e-12 && f.a[1].abs() < 1e-12 && (f.a[2] - 0.01).abs() < 1e-12);
        // unit sphere: the chart is the sphere centred at e_n, so a - e_n = -xi
        let s = sphere(3);
        let raw = [0.3, -0.2, 0.9];
        let nr = norm(&raw);
        let xi: Vec<f64> = raw.iter().map(|v| v / nr).collect();
        let f = s.inverse_gauss(&xi).unwrap();
        for i in 0..3 {
            let shifted = f.a[i] - if i == 2 { 1.0 } else { 0.0 };
            assert!((shifted + xi[i]).abs() < 1e-12);
        }
        assert!((f.h - xi[2] - (-1.0)).abs() < 1e-12);
        for (a, b) in f.nu.iter().zip(&xi) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_gauss_rejects_downward_direction() {
        assert!(paraboloid().inverse_gauss(&[0.0, 0.0, -1.0]).is_err());
        assert!(paraboloid().inverse_gauss(&[0.0, 0.0, 2.0]).is_err());
        // unreachable on the sphere chart: normal too tilted
        let s = sphere(3);
        assert!(matches!(s.inverse_gauss(&[0.999, 0.0, (1.0f64 - 0.998001).sqrt()]), Err(Error::NoConvergence { .. })));
    }

    #[test]
    fn curvature_examples() {
        assert!((paraboloid().gaussian_curvature(&[0.0, 0.0]).unwrap() - 4.0).abs() < 1e-14);
        assert!((sphere(3).gaussian_curvature(&[0.0, 0.0]).unwrap() - 1.0).abs() < 1e-14);
        // sphere curvature is constant
        assert!((sphere(3).gaussian_curvature(&[0.3, 0.5]).unwrap() - 1.0).abs() < 1e-12);
        let p = MultiPoly::from_terms(2, vec![(vec![2, 0], r(2, 1)), (vec![0, 2], r(1, 2))]).unwrap();
        let g = GraphSurface::from_polynomial(p, 1.0).unwrap();
        assert!((g.gaussian_curvature(&[0.0, 0.0]).unwrap() - 4.0).abs() < 1e-14);
        assert!(g.gaussian_curvature(&[2.0, 0.0]).is_err());
    }

    #[test]
    fn osculating_paraboloid_examples() {
        assert_eq!(paraboloid().osculating_paraboloid().unwrap(), MultiPoly::norm_squared(2));
        assert_eq!(sphere(3).osculating_paraboloid().unwrap(), MultiPoly::norm_squared(2).scale(&r(1, 2)));
        let p = &MultiPoly::norm_squared(2) + &MultiPoly::monomial(vec![6, 0], r(1, 1));
        let g = GraphSurface::from_polynomial(p, 1.0).unwrap();
        assert_eq!(g.osculating_paraboloid().unwrap(), MultiPoly::norm_squared(2));
    }

    #[test]
    fn contact_order_examples() {
        assert_eq!(paraboloid().contact_order(8).unwrap(), ContactOrder::Infinite);
        let p = &MultiPoly::norm_squared(2) + &MultiPoly::monomial(vec![6, 0], r(1, 1));
        let g = GraphSurface::from_polynomial(p, 1.0).unwrap();
        assert_eq!(g.contact_order(8).unwrap(), ContactOrder::Finite(5));
        assert_eq!(sphere(3).contact_order(4).unwrap(), ContactOrder::Finite(3));
        assert!(sphere(3).contact_order(20).is_err());
    }

    #[test]
    fn polynomial_surface_validation() {
        let lin = &MultiPoly::norm_squared(2) + &MultiPoly::var(2, 0);
        assert!(GraphSurface::from_polynomial(lin, 1.0).is_err());
        // x1^2 + x2^2 - x1^4 loses convexity at |x1| = 1/sqrt(6)
        let p = &MultiPoly::norm_squared(2) - &MultiPoly::monomial(vec![4, 0], r(1, 1));
        assert!(GraphSurface::from_polynomial(p.clone(), 1.0).is_err());
        assert!(GraphSurface::from_polynomial(p, 0.3).is_ok());
    }

    #[test]
    fn complement_is_orthonormal() {
        let xi = [0.2, -0.5, 0.3, 0.7];
        let nx = norm(&xi);
        let xi: Vec<f64> = xi.iter().map(|v| v / nx).collect();
        let b = orthonormal_complement(&xi);
        assert_eq!(b.len(), 3);
        for (i, u) in b.iter().enumerate() {
            assert!(dot(u, &xi).abs() < 1e-14);
            for (j, v) in b.iter().enumerate() {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((dot(u, v) - e).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn spec_parses_from_json() {
        let s: SurfaceSpec = serde_json::from_str(r#"{"kind":"elliptic_paraboloid","a":[1,1],"n":3}"#).unwrap();
        assert_eq!(s.build().unwrap().taylor().unwrap(), &MultiPoly::norm_squared(2));
        let poly = MultiPoly::norm_squared(2).to_json();
        let s: SurfaceSpec =
            serde_json::from_str(&format!(r#"{{"kind":"custom_poly","poly":{poly},"r_dom":2.0}}"#)).unwrap();
        assert_eq!(s.build().unwrap().r_dom(), 2.0);
        assert!(serde_json::from_str::<SurfaceSpec>(r#"{"kind":"torus"}"#).is_err());
    }
}
