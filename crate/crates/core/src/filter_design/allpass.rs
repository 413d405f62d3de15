//! Nth-band all-pass design by iteratively re-weighted phase least squares.

use super::{measure_iir, AllPassPrototype, DesignError, DesignMetrics, FilterKind, PrototypeSpec};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

const PHASE_GRID: usize = 512;
const OUTER_ITERATIONS: usize = 30;
const STABILITY_MARGIN: f64 = 1e-6;

/// Real all-pass section acting on complex data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Section {
    /// (α + z⁻¹)/(1 + αz⁻¹)
    First { alpha: f64 },
    /// (c2 + c1 z⁻¹ + z⁻²)/(1 + c1 z⁻¹ + c2 z⁻²) for a conjugate α pair,
    /// c1 = 2·Re α, c2 = |α|².
    Second { c1: f64, c2: f64 },
}

impl Section {
    pub fn coefficient_count(&self) -> usize {
        match self {
            Section::First { .. } => 1,
            Section::Second { .. } => 2,
        }
    }
}

fn is_real(a: Complex64) -> bool {
    a.im.abs() <= 1e-12 * a.norm().max(1.0)
}

pub(crate) fn realize(alphas: &[Complex64]) -> Result<Vec<Section>, String> {
    let mut used = vec![false; alphas.len()];
    let mut out = Vec::new();
    for i in 0..alphas.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let a = alphas[i];
        if is_real(a) {
            out.push(Section::First { alpha: a.re });
            continue;
        }
        let partner = (0..alphas.len()).find(|&j| {
            !used[j] && (alphas[j] - a.conj()).norm() <= 1e-9 * a.norm().max(1.0)
        });
        match partner {
            Some(j) => {
                used[j] = true;
                out.push(Section::Second {
                    c1: 2.0 * a.re,
                    c2: a.norm_sqr(),
                });
            }
            None => return Err(format!("complex coefficient {a} has no conjugate partner")),
        }
    }
    Ok(out)
}

/// Transition-band images (k/N ± (fp, fa)), k = 1..⌊N/2⌋, clipped to [0, 0.5].
/// Normalized frequencies.
pub fn spike_intervals(num_branches: usize, fp: f64, fa: f64) -> Vec<(f64, f64)> {
    let n = num_branches as f64;
    let mut out = Vec::new();
    for k in 1..=num_branches / 2 {
        let c = k as f64 / n;
        for (lo, hi) in [(c - fa, c - fp), (c + fp, c + fa)] {
            let (lo, hi) = (lo.max(0.0), hi.min(0.5));
            if lo < hi {
                out.push((lo, hi));
            }
        }
    }
    out
}

// Unwrapped phase of A(e^{jω}) = e^{-jKω}·D*(e^{jω})/D(e^{jω}) on the grid.
fn allpass_phase(d: &[f64], grid: &[f64]) -> Vec<f64> {
    let k = (d.len() - 1) as f64;
    let mut prev = 0.0;
    grid.iter()
        .enumerate()
        .map(|(i, &w)| {
            let dv: Complex64 = d
                .iter()
                .enumerate()
                .map(|(m, &c)| Complex64::from_polar(c, -w * m as f64))
                .sum();
            let mut a = dv.arg();
            if i > 0 {
                a -= 2.0 * PI * ((a - prev) / (2.0 * PI)).round();
            }
            prev = a;
            -k * w - 2.0 * a
        })
        .collect()
}

// Denominator coefficients d_0 = 1, d_1..d_K of one branch.
fn design_denominator(n: usize, num_branches: usize, k: usize, band: f64) -> Vec<f64> {
    let frac = n as f64 / num_branches as f64;
    let grid: Vec<f64> = (1..=PHASE_GRID)
        .map(|i| band * i as f64 / PHASE_GRID as f64)
        .collect();
    let target: Vec<f64> = grid.iter().map(|w| -(k as f64 - frac) * w).collect();
    let beta: Vec<f64> = grid.iter().map(|w| -frac * w / 2.0).collect();
    let mut weight = vec![1.0f64; grid.len()];
    let mut best: Option<(f64, Vec<f64>)> = None;
    for _ in 0..OUTER_ITERATIONS {
        let rows = grid.len();
        let a = DMatrix::from_fn(rows, k, |i, m| {
            weight[i].sqrt() * (-((m + 1) as f64) * grid[i] - beta[i]).sin()
        });
        let b = DVector::from_fn(rows, |i, _| weight[i].sqrt() * beta[i].sin());
        let sol = match a.svd(true, true).solve(&b, 1e-14) {
            Ok(s) => s,
            Err(_) => break,
        };
        let mut d = Vec::with_capacity(k + 1);
        d.push(1.0);
        d.extend(sol.iter());
        let ph = allpass_phase(&d, &grid);
        let mut err: Vec<f64> = ph.iter().zip(&target).map(|(p, t)| p - t).collect();
        let shift = 2.0 * PI * (err[0] / (2.0 * PI)).round();
        for e in err.iter_mut() {
            *e -= shift;
        }
        let peak = err.iter().map(|e| e.abs()).fold(0.0, f64::max);
        if best.as_ref().map_or(true, |(p, _)| peak < *p) {
            best = Some((peak, d));
        }
        let mean = err.iter().map(|e| e.abs()).sum::<f64>() / err.len() as f64;
        if mean == 0.0 {
            break;
        }
        for (w, e) in weight.iter_mut().zip(&err) {
            *w = (*w * e.abs() / mean).max(1e-8);
        }
    }
    best.map(|(_, d)| d).unwrap_or_else(|| {
        let mut d = vec![0.0; k + 1];
        d[0] = 1.0;
        d
    })
}

// α = −pole, poles being the roots of z^K + d_1 z^{K−1} + … + d_K.
fn alphas_from_denominator(d: &[f64]) -> Vec<Complex64> {
    let k = d.len() - 1;
    let comp = DMatrix::from_fn(k, k, |i, j| {
        if i == 0 {
            -d[j + 1]
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let roots: Vec<Complex64> = comp
        .complex_eigenvalues()
        .iter()
        .map(|r| Complex64::new(-r.re, -r.im))
        .collect();
    let mut reals: Vec<f64> = Vec::new();
    let mut upper: Vec<Complex64> = Vec::new();
    let mut lower: Vec<Complex64> = Vec::new();
    for r in roots {
        if r.im.abs() <= 1e-10 * r.norm().max(1.0) {
            reals.push(r.re);
        } else if r.im > 0.0 {
            upper.push(r);
        } else {
            lower.push(r);
        }
    }
    let mut pairs: Vec<Complex64> = Vec::new();
    for u in upper {
        let (j, _) = lower
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - u.conj()).norm().total_cmp(&(b.1 - u.conj()).norm()))
            .expect("conjugate root present");
        let l = lower.remove(j);
        pairs.push(Complex64::new(0.5 * (u.re + l.re), 0.5 * (u.im - l.im)));
    }
    reals.sort_by(f64::total_cmp);
    pairs.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut out: Vec<Complex64> = reals.into_iter().map(|r| Complex64::new(r, 0.0)).collect();
    for p in pairs {
        out.push(p);
        out.push(p.conj());
    }
    out
}

/// Design an N-branch all-pass prototype with n_FoS sections per branch.
///
/// Branch n approximates the phase −(n_FoS − n/N)·ω′ over the passband image
/// ω′ ∈ [0, 2πN·f_p/f_s]. The result is verified on a dense grid; failure
/// carries the achieved metrics so the caller can retry with more sections.
pub fn design_iir_nthband_alp(
    spec: &PrototypeSpec,
    n_fos: usize,
) -> Result<AllPassPrototype, DesignError> {
    spec.validate()?;
    if spec.kind != FilterKind::Iir {
        return Err(DesignError::InvalidSpec("spec kind must be IIR".into()));
    }
    if n_fos == 0 {
        return Err(DesignError::InvalidSpec("n_FoS must be at least 1".into()));
    }
    let n_b = spec.num_branches;
    if n_b == 1 {
        // single branch: the prototype is the pure delay z^{-n_FoS}
        return Ok(AllPassPrototype::new(1, n_fos, Vec::new())?.with_spec(*spec));
    }
    let band = n_b as f64 * 2.0 * PI * spec.fp_norm();
    if band >= PI {
        return Err(DesignError::InvalidSpec(format!(
            "passband edge {} must lie below f_s/(2N) = {}",
            spec.passband_edge,
            spec.sample_rate / (2.0 * n_b as f64)
        )));
    }
    let alphas: Vec<Vec<Complex64>> = (1..n_b)
        .into_par_iter()
        .map(|n| alphas_from_denominator(&design_denominator(n, n_b, n_fos, band)))
        .collect();
    for (i, branch) in alphas.iter().enumerate() {
        for (m, a) in branch.iter().enumerate() {
            if a.norm() > 1.0 - STABILITY_MARGIN {
                return Err(DesignError::Unstable {
                    branch: i + 1,
                    section: m,
                    magnitude: a.norm(),
                });
            }
        }
    }
    let proto = AllPassPrototype::new(n_b, n_fos, alphas)?.with_spec(*spec);
    let metrics = measure_iir(&proto, spec.fp_norm(), spec.fa_norm());
    verify(&metrics, spec)?;
    Ok(proto)
}

fn verify(m: &DesignMetrics, spec: &PrototypeSpec) -> Result<(), DesignError> {
    let mut reasons = Vec::new();
    if m.passband_deviation > spec.passband_ripple.max(1e-5) {
        reasons.push("passband deviation");
    }
    if m.stopband_peak > spec.stopband_ripple {
        reasons.push("stopband attenuation");
    }
    if m.phase_deviation_deg >= 1.0 {
        reasons.push("phase linearity");
    }
    if reasons.is_empty() {
        Ok(())
    } else {
        Err(DesignError::Failure {
            reason: format!("{} not met", reasons.join(", ")),
            metrics: *m,
        })
    }
}

/// Smallest n_FoS in `start..=max` whose design verifies.
pub fn design_iir_min_sections(
    spec: &PrototypeSpec,
    start: usize,
    max: usize,
) -> Result<AllPassPrototype, DesignError> {
    let mut last = None;
    for k in start.max(1)..=max {
        match design_iir_nthband_alp(spec, k) {
            Ok(p) => return Ok(p),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or_else(|| {
        DesignError::InvalidSpec(format!("empty section range {start}..={max}"))
    }))
}
