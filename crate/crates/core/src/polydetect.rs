//! Polynomial versus power-law classification of sampled volume profiles.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sections::VolumeProfile;

const MAX_CONDITION: f64 = 1e13;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyFit {
    /// Coefficients of `t, t^2, ..., t^degree`.
    pub coeffs: Vec<f64>,
    /// Error-weighted RMS residual, in the units of the profile values.
    pub residual_rms: f64,
    /// Same norm applied to the per-point error estimates.
    pub propagated_err: f64,
    pub condition: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Polynomial,
    PowerLaw,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyVerdict {
    pub is_polynomial: bool,
    pub degree: Option<u32>,
    pub coeffs: Vec<f64>,
    pub residual_rms: f64,
    pub threshold: f64,
    pub preferred: Model,
    pub exponent: Option<f64>,
    pub exponent_se: Option<f64>,
    pub ic_polynomial: f64,
    pub ic_power_law: f64,
}

fn floored_errors(profile: &VolumeProfile) -> Vec<f64> {
    profile
        .err
        .iter()
        .zip(&profile.values)
        .map(|(&e, &v)| e.max(4.0 * f64::EPSILON * v.abs()).max(f64::MIN_POSITIVE))
        .collect()
}

/// Chebyshev values `T_0..T_{m-1}` at `s`.
fn chebyshev(s: f64, m: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(m);
    for j in 0..m {
        t.push(match j {
            0 => 1.0,
            1 => s,
            _ => 2.0 * s * t[j - 1] - t[j - 2],
        });
    }
    t
}

/// Monomial coefficients in `t` of `sum_j c_j T_j(2t/T - 1)`.
fn chebyshev_to_monomial(c: &[f64], t_max: f64) -> Vec<f64> {
    let m = c.len();
    let lin = [-1.0, 2.0 / t_max];
    let mul_lin = |p: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; p.len() + 1];
        for (i, v) in p.iter().enumerate() {
            out[i] += lin[0] * v;
            out[i + 1] += lin[1] * v;
        }
        out
    };
    let mut polys: Vec<Vec<f64>> = Vec::with_capacity(m);
    for j in 0..m {
        let p = match j {
            0 => vec![1.0],
            1 => lin.to_vec(),
            _ => {
                let mut a: Vec<f64> = mul_lin(&polys[j - 1]).iter().map(|v| 2.0 * v).collect();
                for (i, v) in polys[j - 2].iter().enumerate() {
                    a[i] -= v;
                }
                a
            }
        };
        polys.push(p);
    }
    let mut out = vec![0.0; m];
    for (cj, p) in c.iter().zip(&polys) {
        for (i, v) in p.iter().enumerate() {
            out[i] += cj * v;
        }
    }
    out
}

/// Weighted least squares `A(t) = sum_{k=1}^{degree} a_k t^k` (no intercept),
/// solved in a Chebyshev basis on the rescaled grid.
pub fn fit_poly(profile: &VolumeProfile, degree: u32) -> Result<PolyFit> {
    fit_poly_on(&profile.t_grid, &profile.values, &floored_errors(profile), degree)
}

fn fit_poly_on(ts: &[f64], vs: &[f64], es: &[f64], degree: u32) -> Result<PolyFit> {
    let m = degree as usize;
    if m == 0 {
        return Err(Error::InvalidInput("polynomial degree must be at least 1".into()));
    }
    if ts.len() < m + 3 {
        return Err(Error::TooFewSamples { needed: m + 3, have: ts.len() });
    }
    let t_max = ts.iter().cloned().fold(0.0, f64::max);
    let rows = ts.len();
    let basis: Vec<Vec<f64>> = ts.iter().map(|&t| chebyshev(2.0 * t / t_max - 1.0, m)).collect();
    let design = DMatrix::from_fn(rows, m, |i, j| ts[i] * basis[i][j] / es[i]);
    let rhs = DVector::from_iterator(rows, vs.iter().zip(es).map(|(v, e)| v / e));
    let svd = design.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition < MAX_CONDITION) {
        return Err(Error::IllConditioned { condition });
    }
    let c = svd
        .solve(&rhs, 0.0)
        .map_err(|e| Error::RankDeficient(e.to_string()))?;
    let c: Vec<f64> = c.iter().copied().collect();
    let mut wsum = 0.0;
    let mut rss = 0.0;
    for i in 0..rows {
        let model: f64 = ts[i] * basis[i].iter().zip(&c).map(|(b, c)| b * c).sum::<f64>();
        let w = 1.0 / (es[i] * es[i]);
        wsum += w;
        rss += w * (vs[i] - model).powi(2);
    }
    let n = rows as f64;
    let q = chebyshev_to_monomial(&c, t_max);
    Ok(PolyFit { coeffs: q, residual_rms: (rss / wsum).sqrt(), propagated_err: (n / wsum).sqrt(), condition })
}

/// Weighted sum of squared normalized residuals of a power law `kappa t^e`
/// fitted in log space, with the exponent and its standard error.
fn power_law_fit(ts: &[f64], vs: &[f64], es: &[f64]) -> (f64, f64, f64) {
    // weights in log space: sigma(log A) = err / A
    let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = vs.iter().map(|v| v.ln()).collect();
    let ws: Vec<f64> = vs.iter().zip(es).map(|(v, e)| (v / e).powi(2)).collect();
    let sw: f64 = ws.iter().sum();
    let mx = xs.iter().zip(&ws).map(|(x, w)| x * w).sum::<f64>() / sw;
    let my = ys.iter().zip(&ws).map(|(y, w)| y * w).sum::<f64>() / sw;
    let sxx: f64 = xs.iter().zip(&ws).map(|(x, w)| w * (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys.iter()).zip(&ws).map(|((x, y), w)| w * (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let chi2: f64 = xs.iter().zip(&ys).zip(&ws).map(|((x, y), w)| w * (y - icpt - slope * x).powi(2)).sum();
    let dof = (xs.len() as f64 - 2.0).max(1.0);
    let se = (chi2 / dof / sxx).sqrt();
    (chi2, slope, se)
}

fn information_criterion(chi2: f64, n: usize, k: usize) -> f64 {
    let n = n as f64;
    n * (chi2.max(1e-300) / n).ln() + 2.0 * k as f64
}

/// Smallest degree whose weighted residual is within three propagated
/// errors. Model preference between polynomial and power law is decided by
/// an information criterion on the smallest decade of `t`.
pub fn detect(profile: &VolumeProfile, max_degree: u32) -> Result<PolyVerdict> {
    if max_degree == 0 {
        return Err(Error::InvalidInput("max_degree must be at least 1".into()));
    }
    let es = floored_errors(profile);
    let mut found: Option<(u32, PolyFit)> = None;
    let mut last: Option<PolyFit> = None;
    for deg in 1..=max_degree {
        match fit_poly_on(&profile.t_grid, &profile.values, &es, deg) {
            Ok(fit) => {
                if fit.residual_rms <= 3.0 * fit.propagated_err {
                    found = Some((deg, fit));
                    break;
                }
                last = Some(fit);
            }
            Err(Error::TooFewSamples { .. }) | Err(Error::IllConditioned { .. }) => break,
            Err(e) => return Err(e),
        }
    }

    // model comparison on the smallest decade
    let t0 = profile.t_grid.first().copied().unwrap_or(0.0);
    let idx: Vec<usize> = (0..profile.len()).filter(|&i| profile.t_grid[i] <= 10.0 * t0 * (1.0 + 1e-12)).collect();
    let ts: Vec<f64> = idx.iter().map(|&i| profile.t_grid[i]).collect();
    let vs: Vec<f64> = idx.iter().map(|&i| profile.values[i]).collect();
    let ds: Vec<f64> = idx.iter().map(|&i| es[i]).collect();
    let positive = vs.iter().all(|&v| v > 0.0);
    let (ic_power, exponent, exponent_se) = if positive && ts.len() >= 3 {
        let (chi2, e, se) = power_law_fit(&ts, &vs, &ds);
        (information_criterion(chi2, ts.len(), 2), Some(e), Some(se))
    } else {
        (f64::INFINITY, None, None)
    };
    let mut ic_poly = f64::INFINITY;
    for deg in 1..=max_degree {
        if ts.len() < deg as usize + 3 {
            break;
        }
        if let Ok(fit) = fit_poly_on(&ts, &vs, &ds, deg) {
            let chi2 = ts.len() as f64 * (fit.residual_rms / fit.propagated_err).powi(2);
            ic_poly = ic_poly.min(information_criterion(chi2, ts.len(), deg as usize));
        }
    }
    let (is_polynomial, degree, fit) = match found {
        Some((d, f)) => (true, Some(d), Some(f)),
        None => (false, None, last),
    };
    let preferred = if is_polynomial || ic_poly <= ic_power { Model::Polynomial } else { Model::PowerLaw };
    let (coeffs, residual_rms, threshold) = match fit {
        Some(f) => (f.coeffs, f.residual_rms, 3.0 * f.propagated_err),
        None => (Vec::new(), f64::NAN, f64::NAN),
    };
    Ok(PolyVerdict {
        is_polynomial,
        degree,
        coeffs,
        residual_rms,
        threshold,
        preferred,
        exponent,
        exponent_se,
        ic_polynomial: ic_poly,
        ic_power_law: ic_power,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sections::VolumeMethod;
    use std::f64::consts::PI;

    fn synthetic(ts: Vec<f64>, f: impl Fn(f64) -> f64, rel: f64) -> VolumeProfile {
        let values: Vec<f64> = ts.iter().map(|&t| f(t)).collect();
        let err = values.iter().map(|v| rel * v.abs()).collect();
        VolumeProfile {
            xi: vec![0.0, 0.0, 1.0],
            t_grid: ts,
            values,
            err,
            method: VolumeMethod::RadialQuadrature,
            c: 0.5,
            seed: None,
        }
    }

    fn grid() -> Vec<f64> {
        (1..=12).map(|i| 0.04 * i as f64).collect()
    }

    #[test]
    fn chebyshev_conversion_round_trips() {
        let c = [0.3, -1.2, 0.7, 2.0];
        let t_max = 0.8;
        let mono = chebyshev_to_monomial(&c, t_max);
        for t in [0.0, 0.13, 0.5, 0.8] {
            let cheb: f64 = chebyshev(2.0 * t / t_max - 1.0, 4).iter().zip(&c).map(|(a, b)| a * b).sum();
            let m: f64 = mono.iter().enumerate().map(|(k, a)| a * t.powi(k as i32)).sum();
            assert!((cheb - m).abs() < 1e-12);
        }
    }

    #[test]
    fn fits_linear_and_quadratic_profiles() {
        let p = synthetic(grid(), |t| PI * t, 1e-13);
        let f = fit_poly(&p, 1).unwrap();
        assert!((f.coeffs[0] - PI).abs() < 1e-10);
        assert!(f.residual_rms <= f.propagated_err);
        let s = synthetic(grid(), |t| PI * (2.0 * t - t * t), 1e-13);
        let f = fit_poly(&s, 2).unwrap();
        assert!((f.coeffs[0] - 2.0 * PI).abs() < 1e-9 && (f.coeffs[1] + PI).abs() < 1e-9);
        let f1 = fit_poly(&s, 1).unwrap();
        assert!(f1.residual_rms > 1e6 * f1.propagated_err);
    }

    #[test]
    fn fit_preconditions() {
        let p = synthetic(vec![0.1, 0.2, 0.3, 0.4], |t| t, 1e-10);
        assert!(matches!(fit_poly(&p, 2), Err(Error::TooFewSamples { .. })));
        assert!(fit_poly(&p, 0).is_err());
    }

    #[test]
    fn detects_degree() {
        let v = detect(&synthetic(grid(), |t| PI * t, 1e-13), 6).unwrap();
        assert!(v.is_polynomial);
        assert_eq!(v.degree, Some(1));
        let v = detect(&synthetic(grid(), |t| PI * (2.0 * t + t * t), 1e-13), 6).unwrap();
        assert_eq!(v.degree, Some(2));
    }

    #[test]
    fn square_root_law_is_not_polynomial() {
        let geo: Vec<f64> = (0..16).map(|i| 1e-3 * 10f64.powf(i as f64 / 7.5)).collect();
        let v = detect(&synthetic(geo, |t| 2.0 * (2.0 * t - t * t).sqrt(), 1e-12), 6).unwrap();
        assert!(!v.is_polynomial);
        assert_eq!(v.preferred, Model::PowerLaw);
        assert!((v.exponent.unwrap() - 0.5).abs() < 0.02);
    }

    #[test]
    fn scaling_values_scales_coefficients() {
        let base = synthetic(grid(), |t| PI * (2.0 * t - t * t), 1e-12);
        let mut scaled = base.clone();
        scaled.values.iter_mut().for_each(|v| *v *= 7.5);
        scaled.err.iter_mut().for_each(|v| *v *= 7.5);
        let a = detect(&base, 6).unwrap();
        let b = detect(&scaled, 6).unwrap();
        assert_eq!(a.degree, b.degree);
        assert_eq!(a.is_polynomial, b.is_polynomial);
        for (x, y) in a.coeffs.iter().zip(&b.coeffs) {
            assert!((7.5 * x - y).abs() < 1e-9 * y.abs().max(1.0));
        }
    }
}
