//! Radial-scaling Morse chart `f(X'(u)) = |u|^2`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exactpoly::{rational_from_f64, MultiPoly};
use crate::sections::line_fit;
use crate::surfaces::GraphSurface;

/// Chart `X'(u) = L (1 + eta(u)) u`, with `L` the linear pre-scaling that
/// brings the Hessian at the origin to `2I` and `eta` solved along rays.
#[derive(Clone, Debug)]
pub struct MorseChart<'a> {
    surface: &'a GraphSurface,
    pub dim: usize,
    /// Validity radius in `u`.
    pub delta: f64,
    /// Degree of the Taylor data used to form `H_m`.
    pub taylor_check_degree: u32,
    prescale: DMatrix<f64>,
    // 0.5 L^T H0 L - I, zero up to rounding
    quad_defect: DMatrix<f64>,
}

const DIRECTION_SAMPLES: usize = 256;
const MAX_NEWTON: usize = 60;

/// Builds the chart for a surface whose graph function vanishes to first
/// order at the origin with positive definite Hessian there.
pub fn morse_normalize(surface: &GraphSurface) -> Result<MorseChart<'_>> {
    let d = surface.d();
    let zero = vec![0.0; d];
    let g0 = surface.gradient(&zero);
    let f0 = surface.value(&zero);
    if f0.abs() > 1e-12 || g0.iter().any(|g| g.abs() > 1e-12) {
        return Err(Error::HessianNotNormalized(format!("f(0) = {f0}, grad f(0) = {g0:?}")));
    }
    let h0 = surface.hessian(&zero);
    let chol = (h0.clone() * 0.5)
        .cholesky()
        .ok_or_else(|| Error::HessianNotNormalized("hessian at the origin is not positive definite".into()))?;
    let g = chol.l();
    let prescale = g
        .transpose()
        .try_inverse()
        .ok_or_else(|| Error::HessianNotNormalized("singular Cholesky factor".into()))?;
    let quad_defect = prescale.transpose() * &h0 * &prescale * 0.5 - DMatrix::identity(d, d);

    let lnorm = prescale.norm();
    let reach = (0.9 * surface.r_dom() / lnorm).min(1.0);
    let mut chart = MorseChart {
        surface,
        dim: d,
        delta: 0.0,
        taylor_check_degree: surface.taylor_degree().min(24),
        prescale,
        quad_defect,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d6f727365);
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for i in 0..d {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; d];
            e[i] = s;
            dirs.push(e);
        }
    }
    if d > 1 {
        for _ in 0..DIRECTION_SAMPLES {
            dirs.push(random_unit(d, &mut rng));
        }
    }
    let mut level = f64::INFINITY;
    for e in &dirs {
        let w: Vec<f64> = e.iter().map(|x| x * reach).collect();
        let x = chart.to_x(&w);
        level = level.min(surface.value(&x));
    }
    if !(level > 0.0 && level.is_finite()) {
        return Err(Error::ChartRadiusTooSmall { radius: reach });
    }
    chart.delta = 0.95 * level.sqrt();
    Ok(chart)
}

pub(crate) fn random_unit<R: Rng>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 && n <= 1.0 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

impl<'a> MorseChart<'a> {
    pub fn surface(&self) -> &GraphSurface {
        self.surface
    }

    pub fn prescale(&self) -> &DMatrix<f64> {
        &self.prescale
    }

    fn to_x(&self, w: &[f64]) -> Vec<f64> {
        (&self.prescale * DVector::from_column_slice(w)).iter().copied().collect()
    }

    /// `f(L w) - |w|^2`, computed from the cancellation-free remainder.
    fn excess(&self, w: &[f64]) -> f64 {
        let wv = DVector::from_column_slice(w);
        self.surface.remainder(&self.to_x(w)) + wv.dot(&(&self.quad_defect * &wv))
    }

    /// Radial factor `eta(u)` with `f(L (1 + eta) u) = |u|^2`.
    pub fn eta(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: u.len() });
        }
        let r2: f64 = u.iter().map(|x| x * x).sum();
        if r2.sqrt() > self.delta {
            return Err(Error::OutsideDomain { norm: r2.sqrt(), radius: self.delta });
        }
        if r2 == 0.0 {
            return Ok(0.0);
        }
        let mut eta = 0.0f64;
        let mut last = f64::INFINITY;
        for _ in 0..MAX_NEWTON {
            let w: Vec<f64> = u.iter().map(|x| (1.0 + eta) * x).collect();
            let resid = r2 * eta * (2.0 + eta) + self.excess(&w);
            let x = self.to_x(&w);
            let grad = DVector::from_vec(self.surface.gradient(&x));
            let gw = self.prescale.transpose() * grad;
            let slope: f64 = gw.iter().zip(u).map(|(g, ui)| g * ui).sum();
            if !(slope > 0.0) {
                break;
            }
            let step = resid / slope;
            eta = (eta - step).max(0.5 * (eta - 1.0));
            if step.abs() <= 2.0 * f64::EPSILON * (1.0 + eta.abs()) || step.abs() >= last && step.abs() < 1e-14 {
                return Ok(eta);
            }
            last = step.abs();
        }
        Err(Error::NoConvergence { iterations: MAX_NEWTON, residual: last })
    }

    /// Normalized coordinates `w = (1 + eta) u`, where the Hessian is `2I`.
    pub fn normalized(&self, u: &[f64]) -> Result<Vec<f64>> {
        let eta = self.eta(u)?;
        Ok(u.iter().map(|x| (1.0 + eta) * x).collect())
    }

    /// `X'(u)` in the original chart coordinates.
    pub fn forward(&self, u: &[f64]) -> Result<Vec<f64>> {
        Ok(self.to_x(&self.normalized(u)?))
    }

    /// `f(X'(u)) - |u|^2`.
    pub fn defect(&self, u: &[f64]) -> Result<f64> {
        let x = self.forward(u)?;
        Ok(self.surface.value(&x) - u.iter().map(|v| v * v).sum::<f64>())
    }

    /// Central-difference Jacobian of `u -> w(u)` at the origin.
    pub fn jacobian_at_zero(&self) -> Result<DMatrix<f64>> {
        let h = 1e-5 * self.delta.min(1.0);
        let mut jac = DMatrix::zeros(self.dim, self.dim);
        for j in 0..self.dim {
            let mut e = vec![0.0; self.dim];
            e[j] = h;
            let plus = self.normalized(&e)?;
            e[j] = -h;
            let minus = self.normalized(&e)?;
            for i in 0..self.dim {
                jac[(i, j)] = (plus[i] - minus[i]) / (2.0 * h);
            }
        }
        Ok(jac)
    }

    /// Largest `|f(X'(u)) - |u|^2|` over `samples` seeded points with `|u| <= delta/2`.
    pub fn validate(&self, samples: usize, seed: u64) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let e = random_unit(self.dim, &mut rng);
            let r = 0.5 * self.delta * rng.random::<f64>();
            let u: Vec<f64> = e.iter().map(|x| r * x).collect();
            worst = worst.max(self.defect(&u)?.abs());
        }
        Ok(worst)
    }

    /// Degree-`m` Taylor component of `f(L w)` in normalized coordinates.
    pub fn taylor_component(&self, m: u32) -> Result<MultiPoly> {
        let taylor = self.surface.taylor().ok_or(Error::MissingTaylor { needed: m, have: None })?;
        if !self.surface.taylor_exact() && self.surface.taylor_degree() < m {
            return Err(Error::MissingTaylor { needed: m, have: Some(self.surface.taylor_degree()) });
        }
        let mut rows = Vec::with_capacity(self.dim);
        for i in 0..self.dim {
            let mut row = Vec::with_capacity(self.dim);
            for j in 0..self.dim {
                row.push(rational_from_f64(self.prescale[(i, j)])?);
            }
            rows.push(row);
        }
        Ok(taylor.homogeneous_component(m).linear_substitute(&rows)?)
    }
}

/// Log-log slope of `max |R(u)|` over a ladder of radii `2^{-i}`, where
/// `R(u) = |w(u)|^2 - |u|^2 + H_m(u)` in normalized coordinates. `R` is a
/// difference of terms of size `|u|^2`, so values below `64 eps |u|^2` count
/// as zero. Returns `+inf` when `R` vanishes on every sample.
pub fn verify_phi_lemma(chart: &MorseChart<'_>, h_m: &MultiPoly, m: u32) -> Result<f64> {
    const RUNGS: usize = 8;
    const RAYS: usize = 32;
    if h_m.dim() != chart.dim {
        return Err(Error::DimensionMismatch { expected: chart.dim, found: h_m.dim() });
    }
    if !h_m.is_zero() && h_m.homogeneous_degree() != Some(m) {
        return Err(Error::NotHomogeneous { degree: m });
    }
    if chart.delta < 1e-2 {
        return Err(Error::ChartRadiusTooSmall { radius: chart.delta });
    }
    let first = (2.0 / chart.delta).log2().ceil().max(1.0) as i32;
    let mut rng = ChaCha8Rng::seed_from_u64(0x706869);
    let dirs: Vec<Vec<f64>> = (0..RAYS).map(|_| random_unit(chart.dim, &mut rng)).collect();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut all_zero = true;
    for i in first..first + RUNGS as i32 {
        let r = 2f64.powi(-i);
        let mut worst: f64 = 0.0;
        for e in &dirs {
            let u: Vec<f64> = e.iter().map(|x| r * x).collect();
            let eta = chart.eta(&u)?;
            let w: Vec<f64> = u.iter().map(|x| (1.0 + eta) * x).collect();
            // |w|^2 - |u|^2 = -excess(w) on the chart
            let resid = h_m.eval_f64(&u) - chart.excess(&w);
            worst = worst.max(resid.abs());
        }
        if worst > 64.0 * f64::EPSILON * r * r {
            all_zero = false;
            xs.push(r.ln());
            ys.push(worst.ln());
        }
    }
    if all_zero {
        return Ok(f64::INFINITY);
    }
    if xs.len() < 3 {
        return Err(Error::TooFewSamples { needed: 3, have: xs.len() });
    }
    Ok(line_fit(&xs, &ys).0)
}
