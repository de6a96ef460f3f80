//! The verification suites behind each subcommand.

use std::path::PathBuf;

use finphase_core::exactpoly::{random_homogeneous, radial_laplacian_constant, MultiPoly};
use finphase_core::oscillatory::{decay_order, extract_expansion, oscillatory_samples, stokes_residual};
use finphase_core::polydetect::detect;
use finphase_core::sections::volume_profile;
use finphase_core::stphase::{
    delta_vanishing_check, leading_term_indices, morse_normalize, rational_to_string, verify_phi_lemma, DeltaCheck,
    LeadingTerms,
};
use finphase_core::{CutoffSpec, ExpansionFit, OscOptions, OscSample, PolyVerdict, SectionOptions, TangentFrame, VolumeProfile};
use num_complex::Complex64;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{CutoffConfig, ExperimentConfig, LemmasConfig, OscillateConfig, VolumeConfig};
use crate::error::{CliError, CliResult};
use crate::output::{write_csv, write_dat, write_json, write_svg, Axes, Series};
use crate::Check;

/// Where and how results are written.
#[derive(Clone, Debug)]
pub struct RunContext {
    pub out_dir: PathBuf,
    pub seed: u64,
    pub svg: bool,
}

fn fmt_dir(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn cutoff(c: &CutoffConfig) -> CliResult<CutoffSpec> {
    CutoffSpec::new(c.c, c.plateau).map_err(|e| CliError::Config(e.to_string()))
}

#[derive(Serialize)]
struct VolumeRecord<'a> {
    direction: usize,
    xi: &'a [f64],
    method: finphase_core::VolumeMethod,
    seed: Option<u64>,
    verdict: &'a PolyVerdict,
}

pub fn run_volume(cfg: &ExperimentConfig, vc: &VolumeConfig, ctx: &RunContext) -> CliResult<Vec<Check>> {
    let spec = cfg.surface.as_ref().ok_or_else(|| CliError::Config("missing surface".into()))?;
    let surface = spec.build().map_err(|e| CliError::Config(e.to_string()))?;
    let dirs = cfg.resolve_directions(surface.n())?;
    let grid = vc.t_grid.resolve(vc.c)?;
    let mut opts = SectionOptions { seed: ctx.seed, ..Default::default() };
    if let Some(m) = vc.mc_samples {
        opts.mc_samples = m;
    }
    let mut profiles: Vec<VolumeProfile> = Vec::with_capacity(dirs.len());
    let mut verdicts: Vec<PolyVerdict> = Vec::with_capacity(dirs.len());
    for xi in &dirs {
        let p = volume_profile(&surface, xi, &grid, vc.c, &opts)?;
        verdicts.push(detect(&p, vc.max_degree)?);
        profiles.push(p);
    }

    let mut rows = Vec::new();
    for (i, p) in profiles.iter().enumerate() {
        for ((t, a), e) in p.t_grid.iter().zip(&p.values).zip(&p.err) {
            rows.push(vec![i.to_string(), fmt_dir(&p.xi), t.to_string(), a.to_string(), e.to_string()]);
        }
    }
    let comments = vec![
        format!("surface: {}", serde_json::to_string(spec).unwrap_or_default()),
        format!("cap height {} ; max degree {} ; seed {} ; mc samples {}", vc.c, vc.max_degree, ctx.seed, opts.mc_samples),
    ];
    write_csv(&ctx.out_dir.join("volume_profile.csv"), &comments, &["direction", "xi", "t", "A", "err"], &rows)?;
    let records: Vec<VolumeRecord> = profiles
        .iter()
        .zip(&verdicts)
        .enumerate()
        .map(|(i, (p, v))| VolumeRecord { direction: i, xi: &p.xi, method: p.method, seed: p.seed, verdict: v })
        .collect();
    write_json(&ctx.out_dir.join("volume_verdicts.json"), &records)?;
    let series: Vec<Series> = profiles
        .iter()
        .enumerate()
        .map(|(i, p)| Series { name: format!("direction {i}"), points: p.t_grid.iter().copied().zip(p.values.iter().copied()).collect() })
        .collect();
    write_dat(&ctx.out_dir.join("volume_profile.dat"), &comments, &series)?;
    if ctx.svg {
        let axes = Axes { title: "sectional volume", x_label: "t", y_label: "A(t)", log_x: false, log_y: false };
        write_svg(&ctx.out_dir.join("volume_profile.svg"), &axes, &series)?;
    }

    let mut checks = Vec::new();
    if verdicts.len() > 1 {
        let first = &verdicts[0];
        let same = verdicts.iter().all(|v| v.is_polynomial == first.is_polynomial && v.degree == first.degree);
        checks.push(Check::new("volume", "consistent-verdicts", same, format!("{} directions", verdicts.len())));
    }
    if let Some(exp) = &vc.expect {
        for (i, v) in verdicts.iter().enumerate() {
            if let Some(want) = exp.is_polynomial {
                checks.push(Check::new(
                    "volume",
                    &format!("polynomial dir={i}"),
                    v.is_polynomial == want,
                    format!("is_polynomial={} preferred={:?}", v.is_polynomial, v.preferred),
                ));
            }
            if let Some(deg) = exp.degree {
                checks.push(Check::new("volume", &format!("degree dir={i}"), v.degree == Some(deg), format!("degree={:?}", v.degree)));
            }
            if let Some(want) = &exp.coeffs {
                let worst = want
                    .iter()
                    .enumerate()
                    .map(|(k, w)| v.coeffs.get(k).map_or(f64::INFINITY, |c| (c - w).abs() / w.abs().max(1e-300)))
                    .fold(0.0, f64::max);
                let ok = v.coeffs.len() == want.len() && worst <= exp.coeff_rtol;
                checks.push(Check::new("volume", &format!("coefficients dir={i}"), ok, format!("max relative error {worst:.3e}")));
            }
            if let Some(want) = exp.exponent {
                let got = v.exponent.unwrap_or(f64::NAN);
                checks.push(Check::new(
                    "volume",
                    &format!("exponent dir={i}"),
                    (got - want).abs() <= exp.exponent_tol,
                    format!("exponent={got:.4} expected {want}"),
                ));
            }
        }
    }
    Ok(checks)
}

fn sample_rows(dir: usize, suite: &str, s: &OscSample, rows: &mut Vec<Vec<String>>) {
    let cell = |v: &[Complex64], e: &[f64], j: usize| -> [String; 3] {
        match (v.get(j), e.get(j)) {
            (Some(z), Some(err)) => [z.re.to_string(), z.im.to_string(), err.to_string()],
            _ => [String::new(), String::new(), String::new()],
        }
    };
    for (j, lambda) in s.lambda_grid.iter().enumerate() {
        let mut row = vec![dir.to_string(), suite.to_string(), s.k.to_string(), lambda.to_string()];
        row.extend(cell(&s.i, &s.i_err, j));
        row.extend(cell(&s.f1, &s.f1_err, j));
        row.extend(cell(&s.f2, &s.f2_err, j));
        row.extend(cell(&s.f3, &s.f3_err, j));
        rows.push(row);
    }
}

/// Restriction of a sample to the given grid indices.
fn subsample(s: &OscSample, idx: &[usize]) -> OscSample {
    let pick_c = |v: &Vec<Complex64>| if v.is_empty() { vec![] } else { idx.iter().map(|&i| v[i]).collect() };
    let pick_f = |v: &Vec<f64>| if v.is_empty() { vec![] } else { idx.iter().map(|&i| v[i]).collect() };
    OscSample {
        lambda_grid: pick_f(&s.lambda_grid),
        i: pick_c(&s.i),
        i_err: pick_f(&s.i_err),
        f1: pick_c(&s.f1),
        f1_err: pick_f(&s.f1_err),
        f2: pick_c(&s.f2),
        f2_err: pick_f(&s.f2_err),
        f3: pick_c(&s.f3),
        f3_err: pick_f(&s.f3_err),
        ..s.clone()
    }
}

fn indices_of(grid: &[f64], wanted: &[f64]) -> Vec<usize> {
    wanted.iter().filter_map(|w| grid.iter().position(|g| g == w)).collect()
}

#[derive(Serialize)]
struct ExpansionRecord<'a> {
    direction: usize,
    xi: &'a [f64],
    k: u32,
    cutoff: CutoffSpec,
    fit: &'a ExpansionFit,
}

#[derive(Serialize)]
struct OscRecord<'a> {
    direction: usize,
    frame: &'a TangentFrame,
    cutoff: CutoffSpec,
    options: &'a OscOptions,
    panels: usize,
    stokes_residual: f64,
    decay_f2: Option<f64>,
    decay_f3: Option<f64>,
}

pub fn run_oscillate(cfg: &ExperimentConfig, oc: &OscillateConfig, ctx: &RunContext) -> CliResult<Vec<Check>> {
    let spec = cfg.surface.as_ref().ok_or_else(|| CliError::Config("missing surface".into()))?;
    let surface = spec.build().map_err(|e| CliError::Config(e.to_string()))?;
    let dirs = cfg.resolve_directions(surface.n())?;
    let cut = cutoff(&oc.cutoff)?;
    let decay_grid = match &oc.decay_grid {
        Some(g) => Some(g.resolve(160.0)?),
        None => None,
    };
    let mut lambdas: Vec<f64> = oc.stokes_lambdas.clone();
    if let Some(g) = &decay_grid {
        lambdas.extend(g);
    }
    lambdas.sort_by(f64::total_cmp);
    lambdas.dedup();
    let opts = OscOptions::default();

    let mut checks = Vec::new();
    let mut rows = Vec::new();
    let mut records = Vec::new();
    let mut fits = Vec::new();
    let mut frames = Vec::new();
    let mut decay_series = Vec::new();
    for xi in &dirs {
        frames.push(surface.inverse_gauss(xi)?);
    }
    for (di, frame) in frames.iter().enumerate() {
        let sample = oscillatory_samples(&surface, frame, &cut, &lambdas, &[0], &opts)?.remove(0);
        sample_rows(di, "stokes", &sample, &mut rows);
        let stokes = stokes_residual(&subsample(&sample, &indices_of(&lambdas, &oc.stokes_lambdas)))?;
        checks.push(Check::new(
            "oscillate",
            &format!("stokes dir={di}"),
            stokes <= oc.stokes_tol,
            format!("residual {stokes:.3e} (tol {:.0e})", oc.stokes_tol),
        ));
        let (mut d2, mut d3) = (None, None);
        if let Some(g) = &decay_grid {
            let sub = subsample(&sample, &indices_of(&lambdas, g));
            let a2: Vec<f64> = sub.f2.iter().map(|z| z.norm()).collect();
            let a3: Vec<f64> = sub.f3.iter().map(|z| z.norm()).collect();
            let s2 = decay_order(g, &a2)?;
            let s3 = decay_order(g, &a3)?;
            checks.push(Check::new(
                "oscillate",
                &format!("decay dir={di}"),
                s2 <= oc.decay_max_slope && s3 <= oc.decay_max_slope,
                format!("slopes F2 {s2:.2} F3 {s3:.2} (max {})", oc.decay_max_slope),
            ));
            decay_series.push(Series { name: format!("|F2| dir {di}"), points: g.iter().copied().zip(a2).collect() });
            decay_series.push(Series { name: format!("|F3| dir {di}"), points: g.iter().copied().zip(a3).collect() });
            d2 = Some(s2);
            d3 = Some(s3);
        }
        records.push((di, sample.panels, stokes, d2, d3));

        if let Some(ec) = &oc.expansion {
            let ecut = cutoff(&ec.cutoff)?;
            let grid = ec.lambda_grid.resolve(160.0)?;
            let eopts = OscOptions { volume_terms: false, ..Default::default() };
            let samples = oscillatory_samples(&surface, frame, &ecut, &grid, &ec.k_list, &eopts)?;
            for s in &samples {
                sample_rows(di, "expansion", s, &mut rows);
                let fit = extract_expansion(s, ec.k_max)?;
                checks.push(Check::new(
                    "oscillate",
                    &format!("finite-expansion dir={di} k={}", s.k),
                    fit.finite == ec.expect_finite,
                    format!(
                        "finite={} (expected {}) tail {:.3e} threshold {:.3e} last significant {:?}",
                        fit.finite, ec.expect_finite, fit.tail_rms, fit.threshold, fit.last_significant
                    ),
                ));
                fits.push((di, s.k, ecut, fit));
            }
        }
    }

    let mut comments = vec![
        format!("surface: {}", serde_json::to_string(spec).unwrap_or_default()),
        format!("cutoff c {} plateau {} ; gauss order {} ; min panels {} ; theta panels {}", cut.c, cut.plateau, opts.gl_order, opts.min_panels, opts.theta_panels),
    ];
    if let Some(ec) = &oc.expansion {
        comments.push(format!("expansion cutoff c {} plateau {} ; k_max {}", ec.cutoff.c, ec.cutoff.plateau, ec.k_max));
    }
    let columns = [
        "direction", "suite", "k", "lambda", "re_I", "im_I", "err_I", "re_F1", "im_F1", "err_F1", "re_F2", "im_F2", "err_F2",
        "re_F3", "im_F3", "err_F3",
    ];
    write_csv(&ctx.out_dir.join("osc_samples.csv"), &comments, &columns, &rows)?;
    let osc: Vec<OscRecord> = records
        .iter()
        .map(|&(di, panels, stokes, d2, d3)| OscRecord {
            direction: di,
            frame: &frames[di],
            cutoff: cut,
            options: &opts,
            panels,
            stokes_residual: stokes,
            decay_f2: d2,
            decay_f3: d3,
        })
        .collect();
    write_json(&ctx.out_dir.join("osc_checks.json"), &osc)?;
    let exp: Vec<ExpansionRecord> = fits
        .iter()
        .map(|(di, k, c, fit)| ExpansionRecord { direction: *di, xi: &dirs[*di], k: *k, cutoff: *c, fit })
        .collect();
    write_json(&ctx.out_dir.join("osc_expansion.json"), &exp)?;
    if !decay_series.is_empty() {
        write_dat(&ctx.out_dir.join("osc_decay.dat"), &comments, &decay_series)?;
        if ctx.svg {
            let axes = Axes { title: "volume-term decay", x_label: "lambda", y_label: "modulus", log_x: true, log_y: true };
            write_svg(&ctx.out_dir.join("osc_decay.svg"), &axes, &decay_series)?;
        }
    }
    Ok(checks)
}

#[derive(Serialize)]
struct LeadingRecord {
    terms: LeadingTerms,
    alpha_star_collides: bool,
}

#[derive(Serialize)]
struct DeltaRecord {
    h: MultiPoly,
    h_is_zero: bool,
    check: DeltaCheck,
}

#[derive(Serialize)]
struct RadialRecord {
    s: u32,
    d: usize,
    constant: String,
    direct: String,
}

#[derive(Serialize)]
struct MorseRecord {
    surface: finphase_core::SurfaceSpec,
    delta: f64,
    max_defect: f64,
    m: Option<u32>,
    phi_slope: Option<f64>,
}

#[derive(Serialize)]
struct LemmaReport {
    leading: Vec<LeadingRecord>,
    delta: Vec<DeltaRecord>,
    radial_constants: Vec<RadialRecord>,
    morse: Vec<MorseRecord>,
}

fn delta_rows(lc: &LemmasConfig, seed: u64) -> Vec<(MultiPoly, u32, u32)> {
    let mut rows: Vec<(MultiPoly, u32, u32)> = lc.delta.iter().map(|r| (r.h.clone(), r.m, r.alpha)).collect();
    if let Some(rd) = &lc.random_delta {
        for i in 0..rd.count {
            let m = rd.degrees[i % rd.degrees.len()];
            let alpha = rd.alphas[(i / rd.degrees.len()) % rd.alphas.len()];
            // every tenth row is the zero polynomial
            let h = if i % 10 == 9 {
                MultiPoly::zero(rd.dim)
            } else {
                random_homogeneous(rd.dim, m, 4, seed.wrapping_mul(1_000_003).wrapping_add(i as u64))
            };
            rows.push((h, m, alpha));
        }
    }
    rows
}

pub fn run_lemmas(lc: &LemmasConfig, ctx: &RunContext) -> CliResult<Vec<Check>> {
    if let Some(rd) = &lc.random_delta {
        if rd.degrees.is_empty() || rd.alphas.is_empty() || rd.dim == 0 {
            return Err(CliError::Config("random_delta needs nonempty degrees, alphas and dim >= 1".into()));
        }
    }
    let mut checks = Vec::new();

    let mut leading = Vec::new();
    for r in &lc.leading {
        let t = leading_term_indices(r.m, r.alpha, r.n, r.n0)?;
        let at_star = leading_term_indices(r.m, t.alpha_star as u32, r.n, r.n0)?.collision;
        let consistent = !(r.alpha as u64 >= t.alpha_star) || t.collision;
        checks.push(Check::new(
            "lemmas",
            &format!("leading m={} alpha={} n0={}", r.m, r.alpha, r.n0),
            t.separated && at_star && consistent,
            format!(
                "j1={} j2={} collision={} alpha*={}",
                rational_to_string(&t.j1),
                t.j2,
                t.collision,
                t.alpha_star
            ),
        ));
        leading.push(LeadingRecord { terms: t, alpha_star_collides: at_star });
    }

    let rows = delta_rows(lc, ctx.seed);
    let results: Vec<finphase_core::Result<DeltaCheck>> =
        rows.par_iter().map(|(h, m, alpha)| delta_vanishing_check(h, *m, *alpha, None)).collect();
    let mut delta = Vec::new();
    let mut delta_ok = 0usize;
    for ((h, _, _), res) in rows.into_iter().zip(results) {
        let c = res?;
        let ok = c.consistent && c.value.is_zero() == h.is_zero() && c.sphere_avg_coeff.is_zero() == h.is_zero();
        delta_ok += ok as usize;
        delta.push(DeltaRecord { h_is_zero: h.is_zero(), h, check: c });
    }
    if !delta.is_empty() {
        checks.push(Check::new(
            "lemmas",
            "delta-vanishing",
            delta_ok == delta.len(),
            format!("{delta_ok}/{} rows: value = 0 iff H = 0 and value = C A", delta.len()),
        ));
    }

    let mut radial = Vec::new();
    if let Some((s_max, d_max)) = lc.radial_constants {
        let mut ok = true;
        for d in 1..=d_max {
            let base = MultiPoly::norm_squared(d);
            for s in 0..=s_max {
                let c = radial_laplacian_constant(s, d);
                let direct = base.pow(s).iterated_laplacian_at_zero(s);
                ok &= c == direct;
                radial.push(RadialRecord { s, d, constant: rational_to_string(&c), direct: rational_to_string(&direct) });
            }
        }
        checks.push(Check::new("lemmas", "radial-constants", ok, format!("s <= {s_max}, d <= {d_max}")));
    }

    let mut morse = Vec::new();
    for (i, row) in lc.morse.iter().enumerate() {
        let surface = row.surface.build().map_err(|e| CliError::Config(e.to_string()))?;
        let chart = morse_normalize(&surface)?;
        let defect = chart.validate(row.samples, ctx.seed.wrapping_add(i as u64))?;
        checks.push(Check::new("lemmas", &format!("morse-chart row={i}"), defect <= 1e-12, format!("max |f(X'(u)) - |u|^2| = {defect:.3e}")));
        let mut slope = None;
        if let Some(m) = row.m {
            let h = chart.taylor_component(m)?;
            let sl = verify_phi_lemma(&chart, &h, m)?;
            checks.push(Check::new("lemmas", &format!("phi-lemma row={i}"), sl > m as f64, format!("slope {sl:.3} vs m = {m}")));
            slope = Some(sl);
        }
        morse.push(MorseRecord { surface: row.surface.clone(), delta: chart.delta, max_defect: defect, m: row.m, phi_slope: slope });
    }

    write_json(&ctx.out_dir.join("lemma_report.json"), &LemmaReport { leading, delta, radial_constants: radial, morse })?;
    Ok(checks)
}
