//! Oscillatory surface integrals over a cut-off cap and their asymptotics.
//!
//! With `rho(x) = rho_c(<xi, x> - h)` and inward unit normal `nu`:
//!
//! * `I   = int_M [i lambda <xi,nu> T_k + <grad T_k, nu>] e^{i lambda <xi,x>} rho dS`
//! * `F_1 = -lambda^2 int_D e^{i lambda <xi,x>} rho dV`
//! * `F_2 = -int_D e^{i lambda <xi,x>} Laplacian(rho) dV`
//! * `F_3 = int_M e^{i lambda <xi,x>} d rho / d nu dS`
//!
//! where `D` is the convex region above the graph. Green's second identity
//! with the outward normal `-nu` gives `F_1 + F_2 = -I + F_3` for `k = 0`,
//! which is what [`stokes_residual`] measures.

mod cutoff;
mod expansion;
mod quad;

pub use cutoff::{cutoff_eval, CutoffSpec};
pub use expansion::{decay_order, extract_expansion, ExpansionFit};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::sections::{section_volume_with, SectionOptions};
use crate::surfaces::{GraphSurface, TangentFrame};
use quad::{lambda_sums, level_densities, panels_for, LevelDensities};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscOptions {
    pub gl_order: usize,
    pub min_panels: usize,
    pub theta_panels: usize,
    /// Upper bound on phase panels; larger `|lambda| c` is refused.
    pub max_panels: usize,
    /// Also evaluate `F_1`, `F_2`, `F_3`.
    pub volume_terms: bool,
    /// Integrate over the larger cap `{tau0 < extend_to}`; the cut-off makes
    /// the extra region contribute exact zeros.
    pub extend_to: Option<f64>,
}

impl Default for OscOptions {
    fn default() -> Self {
        OscOptions {
            gl_order: 8,
            min_panels: 32,
            theta_panels: 16,
            max_panels: 1 << 17,
            volume_terms: true,
            extend_to: None,
        }
    }
}

/// Values of the oscillatory integrals on a `lambda` grid for one `T_k` order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscSample {
    pub lambda_grid: Vec<f64>,
    pub k: u32,
    pub n: usize,
    pub h: f64,
    pub xi: Vec<f64>,
    pub cutoff: CutoffSpec,
    pub i: Vec<Complex64>,
    pub i_err: Vec<f64>,
    /// Empty unless volume terms were requested.
    pub f1: Vec<Complex64>,
    pub f1_err: Vec<f64>,
    pub f2: Vec<Complex64>,
    pub f2_err: Vec<f64>,
    pub f3: Vec<Complex64>,
    pub f3_err: Vec<f64>,
    pub panels: usize,
    pub theta_panels: usize,
}

impl OscSample {
    pub fn has_volume_terms(&self) -> bool {
        !self.f1.is_empty()
    }
}

fn combine(fine: quad::Acc, coarse: quad::Acc, phase: Complex64) -> (Complex64, f64) {
    let err = (fine.sum - coarse.sum).norm() + 2.0 * f64::EPSILON * fine.l1;
    (fine.sum * phase, err)
}

/// Evaluates `I` for every order in `ks` (and optionally `F_1..F_3`) on the
/// `lambda` grid. The quadrature is laid out once for the largest `|lambda|`
/// and repeated with half the panels in both directions; the difference is
/// the reported error.
pub fn oscillatory_samples(
    surface: &GraphSurface,
    frame: &TangentFrame,
    cutoff: &CutoffSpec,
    lambdas: &[f64],
    ks: &[u32],
    opts: &OscOptions,
) -> Result<Vec<OscSample>> {
    if lambdas.is_empty() || ks.is_empty() {
        return Err(Error::InvalidInput("lambda grid and k list must be nonempty".into()));
    }
    if lambdas.iter().any(|l| !l.is_finite()) {
        return Err(Error::InvalidInput("lambda values must be finite".into()));
    }
    if surface.d() > 2 {
        return Err(Error::UnsupportedDimension(surface.n()));
    }
    let lmax = lambdas.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let c = cutoff.c;
    let panels = panels_for(lmax, c, opts.min_panels);
    let theta = opts.theta_panels.max(2);
    let fine = level_densities(surface, frame, c, panels.min(opts.max_panels), theta, opts.gl_order, ks, opts.extend_to)?;
    let coarse = level_densities(
        surface,
        frame,
        c,
        (panels.min(opts.max_panels) / 2).max(1),
        (theta / 2).max(1),
        opts.gl_order,
        ks,
        opts.extend_to,
    )?;
    let xi_n = frame.xi[surface.d()];
    let mut out: Vec<OscSample> = ks
        .iter()
        .map(|&k| OscSample {
            lambda_grid: lambdas.to_vec(),
            k,
            n: surface.n(),
            h: frame.h,
            xi: frame.xi.clone(),
            cutoff: *cutoff,
            i: Vec::new(),
            i_err: Vec::new(),
            f1: Vec::new(),
            f1_err: Vec::new(),
            f2: Vec::new(),
            f2_err: Vec::new(),
            f3: Vec::new(),
            f3_err: Vec::new(),
            panels: fine.panels,
            theta_panels: theta,
        })
        .collect();
    let per_lambda: Vec<_> = lambdas.iter().map(|&l| sums_at(&fine, &coarse, cutoff, l, xi_n, frame.h, opts.volume_terms)).collect();
    for (ki, s) in out.iter_mut().enumerate() {
        for vals in &per_lambda {
            s.i.push(vals.i[ki].0);
            s.i_err.push(vals.i[ki].1);
            if opts.volume_terms {
                s.f1.push(vals.f1.0);
                s.f1_err.push(vals.f1.1);
                s.f2.push(vals.f2.0);
                s.f2_err.push(vals.f2.1);
                s.f3.push(vals.f3.0);
                s.f3_err.push(vals.f3.1);
            }
        }
    }
    if panels > opts.max_panels {
        let achieved = out.iter().flat_map(|s| s.i_err.iter().copied()).fold(0.0, f64::max);
        return Err(Error::UnresolvedOscillation { achieved });
    }
    Ok(out)
}

struct PointValues {
    i: Vec<(Complex64, f64)>,
    f1: (Complex64, f64),
    f2: (Complex64, f64),
    f3: (Complex64, f64),
}

fn sums_at(
    fine: &LevelDensities,
    coarse: &LevelDensities,
    cutoff: &CutoffSpec,
    lambda: f64,
    xi_n: f64,
    h: f64,
    volume_terms: bool,
) -> PointValues {
    let a = lambda_sums(fine, cutoff, lambda, xi_n, volume_terms);
    let b = lambda_sums(coarse, cutoff, lambda, xi_n, volume_terms);
    let phase = Complex64::from_polar(1.0, lambda * h);
    PointValues {
        i: a.i.iter().zip(&b.i).map(|(x, y)| combine(*x, *y, phase)).collect(),
        f1: combine(a.f1, b.f1, phase),
        f2: combine(a.f2, b.f2, phase),
        f3: combine(a.f3, b.f3, phase),
    }
}

fn single(
    surface: &GraphSurface,
    frame: &TangentFrame,
    cutoff: &CutoffSpec,
    lambda: f64,
    k: u32,
    volume_terms: bool,
) -> Result<OscSample> {
    let opts = OscOptions { volume_terms, ..Default::default() };
    let mut v = oscillatory_samples(surface, frame, cutoff, &[lambda], &[k], &opts)?;
    Ok(v.remove(0))
}

/// `I` (or `J^(k)` for `k >= 1`) at a single `lambda`.
pub fn integral_i(surface: &GraphSurface, frame: &TangentFrame, cutoff: &CutoffSpec, lambda: f64, k: u32) -> Result<Complex64> {
    Ok(single(surface, frame, cutoff, lambda, k, false)?.i[0])
}

pub fn integral_f1(surface: &GraphSurface, frame: &TangentFrame, cutoff: &CutoffSpec, lambda: f64) -> Result<Complex64> {
    Ok(single(surface, frame, cutoff, lambda, 0, true)?.f1[0])
}

pub fn integral_f2(surface: &GraphSurface, frame: &TangentFrame, cutoff: &CutoffSpec, lambda: f64) -> Result<Complex64> {
    Ok(single(surface, frame, cutoff, lambda, 0, true)?.f2[0])
}

pub fn integral_f3(surface: &GraphSurface, frame: &TangentFrame, cutoff: &CutoffSpec, lambda: f64) -> Result<Complex64> {
    Ok(single(surface, frame, cutoff, lambda, 0, true)?.f3[0])
}

/// `max_lambda |I + F_1 + F_2 - F_3| / (|I| + eps)` for a `k = 0` sample.
pub fn stokes_residual(sample: &OscSample) -> Result<f64> {
    if sample.k != 0 {
        return Err(Error::InvalidInput("the divergence identity needs k = 0".into()));
    }
    if !sample.has_volume_terms() {
        return Err(Error::InvalidInput("sample lacks F1, F2, F3".into()));
    }
    const FLOOR: f64 = 1e-9;
    let mut worst: f64 = 0.0;
    for j in 0..sample.lambda_grid.len() {
        let lhs = sample.i[j];
        let rhs = -sample.f1[j] - sample.f2[j] + sample.f3[j];
        worst = worst.max((lhs - rhs).norm() / (lhs.norm() + FLOOR));
    }
    Ok(worst)
}

/// `-lambda^2 e^{i lambda h} int_0^c e^{i lambda t} A(t) rho_c(t) dt` for a
/// given sectional volume function, by equal-phase panels in `t = c v^2`.
pub fn fubini_f1<F>(cutoff: &CutoffSpec, h: f64, lambda: f64, mut area: F) -> Result<Complex64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let c = cutoff.c;
    let panels = panels_for(lambda, c, 32);
    let rule = GaussLegendre::cached(8);
    let mut total = Complex64::new(0.0, 0.0);
    for j in 0..panels {
        let a = (j as f64 / panels as f64).sqrt();
        let b = ((j + 1) as f64 / panels as f64).sqrt();
        for (v, w) in rule.mapped(a, b) {
            let t = c * v * v;
            let rho = cutoff.eval(t, 0);
            if rho == 0.0 {
                continue;
            }
            total += Complex64::from_polar(2.0 * c * v * w * rho * area(t)?, lambda * t);
        }
    }
    Ok(total * Complex64::from_polar(-lambda * lambda, lambda * h))
}

/// [`fubini_f1`] with `A(t)` from [`crate::sections`].
pub fn fubini_f1_sections(
    surface: &GraphSurface,
    frame: &TangentFrame,
    cutoff: &CutoffSpec,
    lambda: f64,
    opts: &SectionOptions,
) -> Result<Complex64> {
    let mut idx = 0u64;
    fubini_f1(cutoff, frame.h, lambda, |t| {
        idx += 1;
        section_volume_with(surface, frame, t, opts, idx).map(|(a, _)| a)
    })
}
