//! Least-squares extraction of inverse-power expansions from sampled integrals.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::OscSample;
use crate::error::{Error, Result};
use crate::sections::line_fit;

/// Coefficients `b_k` of `e^{-i lambda h} I(lambda) ~ sum_k b_k lambda^{-k}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionFit {
    /// Support value whose phase was removed before fitting.
    pub h: f64,
    pub k_min: u32,
    pub k_max: u32,
    /// `coeffs[j]` multiplies `lambda^{-(k_min + j)}`.
    pub coeffs: Vec<Complex64>,
    pub std_err: Vec<f64>,
    /// Largest `k` whose coefficient exceeds three standard errors.
    pub last_significant: Option<u32>,
    pub tail_rms: f64,
    pub noise_rms: f64,
    pub threshold: f64,
    pub finite: bool,
    pub condition: f64,
}

impl ExpansionFit {
    pub fn coeff(&self, k: u32) -> Option<Complex64> {
        k.checked_sub(self.k_min).and_then(|j| self.coeffs.get(j as usize).copied())
    }

    /// Value of the fitted series at `lambda`, without the phase.
    pub fn eval(&self, lambda: f64) -> Complex64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, b)| b * lambda.powi(-((self.k_min as usize + j) as i32)))
            .sum()
    }
}

const MAX_CONDITION: f64 = 1e14;
const MIN_POINTS: usize = 12;

/// Fits the phase-stripped samples with `k_min..=k_max`, where
/// `k_min = (n - 1)/2 - 1` for odd `n`.
pub fn extract_expansion(sample: &OscSample, k_max: u32) -> Result<ExpansionFit> {
    let n = sample.n;
    if n % 2 == 0 {
        return Err(Error::InvalidInput(format!("expansion fits need odd n, got {n}")));
    }
    let k_min = ((n - 1) / 2).saturating_sub(1) as u32;
    if k_max < k_min {
        return Err(Error::InvalidInput(format!("k_max {k_max} is below k_min {k_min}")));
    }
    let lambdas = &sample.lambda_grid;
    let m = lambdas.len();
    if m < MIN_POINTS {
        return Err(Error::TooFewSamples { needed: MIN_POINTS, have: m });
    }
    if lambdas.iter().any(|&l| l <= 0.0) {
        return Err(Error::InvalidInput("lambda grid must be positive".into()));
    }
    let lmin = lambdas.iter().cloned().fold(f64::INFINITY, f64::min);
    let lmax = lambdas.iter().cloned().fold(0.0, f64::max);
    if lmax < 10.0 * lmin {
        return Err(Error::InvalidInput("lambda grid must span at least a decade".into()));
    }
    let nb = (k_max - k_min + 1) as usize;
    if m <= nb {
        return Err(Error::TooFewSamples { needed: nb + 1, have: m });
    }
    let y: Vec<Complex64> = lambdas
        .iter()
        .zip(&sample.i)
        .map(|(&l, &v)| v * Complex64::from_polar(1.0, -l * sample.h))
        .collect();
    let ymax = y.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if ymax == 0.0 {
        // an identically vanishing integral has the empty expansion
        return Ok(ExpansionFit {
            h: sample.h,
            k_min,
            k_max,
            coeffs: vec![Complex64::new(0.0, 0.0); nb],
            std_err: vec![0.0; nb],
            last_significant: None,
            tail_rms: 0.0,
            noise_rms: 0.0,
            threshold: 0.0,
            finite: true,
            condition: 1.0,
        });
    }
    let floor = ymax * f64::EPSILON;
    let err: Vec<f64> = sample.i_err.iter().map(|&e| e.max(floor)).collect();

    let mut a = DMatrix::<f64>::zeros(m, nb);
    let mut b_re = DVector::<f64>::zeros(m);
    let mut b_im = DVector::<f64>::zeros(m);
    for i in 0..m {
        let sw = 1.0 / err[i];
        let x = lmin / lambdas[i];
        for j in 0..nb {
            a[(i, j)] = sw * x.powi((k_min as usize + j) as i32);
        }
        b_re[i] = sw * y[i].re;
        b_im[i] = sw * y[i].im;
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition > MAX_CONDITION {
        return Err(Error::IllConditioned { condition });
    }
    let c_re = svd.solve(&b_re, 0.0).map_err(|e| Error::RankDeficient(e.to_string()))?;
    let c_im = svd.solve(&b_im, 0.0).map_err(|e| Error::RankDeficient(e.to_string()))?;
    // covariance (A^T W A)^{-1} = V S^{-2} V^T
    let v_t = svd.v_t.as_ref().ok_or_else(|| Error::RankDeficient("svd without V".into()))?;
    let mut coeffs = Vec::with_capacity(nb);
    let mut std_err = Vec::with_capacity(nb);
    let mut last_significant = None;
    for j in 0..nb {
        let var: f64 = (0..nb).map(|s| (v_t[(s, j)] / svd.singular_values[s]).powi(2)).sum();
        let scale = lmin.powi((k_min as usize + j) as i32);
        let b = Complex64::new(c_re[j], c_im[j]) * scale;
        let se = (2.0 * var).sqrt() * scale;
        if b.norm() > 3.0 * se {
            last_significant = Some(k_min + j as u32);
        }
        coeffs.push(b);
        std_err.push(se);
    }
    let fit = ExpansionFit {
        h: sample.h,
        k_min,
        k_max,
        coeffs,
        std_err,
        last_significant,
        tail_rms: 0.0,
        noise_rms: 0.0,
        threshold: 0.0,
        finite: false,
        condition,
    };
    let tail_rms = (lambdas.iter().zip(&y).map(|(&l, v)| (v - fit.eval(l)).norm_sqr()).sum::<f64>() / m as f64).sqrt();
    let noise_rms = (err.iter().map(|e| e * e).sum::<f64>() / m as f64).sqrt();
    let threshold = 3.0 * noise_rms;
    let finite = tail_rms <= threshold && last_significant.map_or(true, |k| k < k_max);
    Ok(ExpansionFit { tail_rms, noise_rms, threshold, finite, ..fit })
}

/// Log-log slope of `|values|` against `lambdas`. A sample that vanishes
/// exactly is reported as `-inf`.
pub fn decay_order(lambdas: &[f64], values: &[f64]) -> Result<f64> {
    const NEED: usize = 6;
    if lambdas.len() != values.len() {
        return Err(Error::DimensionMismatch { expected: lambdas.len(), found: values.len() });
    }
    if lambdas.len() < NEED {
        return Err(Error::TooFewSamples { needed: NEED, have: lambdas.len() });
    }
    if lambdas.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::InvalidInput("lambda values must be positive".into()));
    }
    if values.iter().any(|&v| v == 0.0) {
        return Ok(f64::NEG_INFINITY);
    }
    let xs: Vec<f64> = lambdas.iter().map(|l| l.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.abs().ln()).collect();
    Ok(line_fit(&xs, &ys).0)
}
