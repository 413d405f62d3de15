//! Parks-McClellan exchange for two-band linear-phase lowpass filters.

use super::{
    estimate_fir_length, kaiser_taps, measure_fir, DesignError, DesignMetrics, FirPrototype,
    PrototypeSpec,
};
use std::f64::consts::PI;

const GRID_DENSITY: usize = 16;
const MAX_ITERATIONS: usize = 250;
const CONVERGENCE: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct RemezOutcome {
    pub taps: Vec<f64>,
    pub deviation: f64,
    pub iterations: usize,
    pub converged: bool,
}

struct Grid {
    freq: Vec<f64>,
    desired: Vec<f64>,
    weight: Vec<f64>,
    // index of the first stopband point
    split: usize,
}

fn build_grid(r: usize, fp: f64, fa: f64, ws: f64, even: bool) -> Grid {
    let step = 0.5 / (GRID_DENSITY * r) as f64;
    let mut freq = Vec::new();
    let mut desired = Vec::new();
    let mut weight = Vec::new();
    let mut push_band = |lo: f64, hi: f64, d: f64, w: f64, freq: &mut Vec<f64>| {
        let count = (((hi - lo) / step).ceil() as usize).max(1);
        for i in 0..=count {
            freq.push(lo + (hi - lo) * i as f64 / count as f64);
            desired.push(d);
            weight.push(w);
        }
    };
    push_band(0.0, fp, 1.0, 1.0, &mut freq);
    let split = freq.len();
    // type II amplitudes vanish at 0.5, keep the grid off that point
    let top = if even { 0.5 - step.min((0.5 - fa) / 2.0) } else { 0.5 };
    push_band(fa, top.max(fa), 0.0, ws, &mut freq);
    if even {
        for i in 0..freq.len() {
            let q = (PI * freq[i]).cos();
            desired[i] /= q;
            weight[i] *= q;
        }
    }
    Grid {
        freq,
        desired,
        weight,
        split,
    }
}

/// Barycentric weights 1/Π(x_i − x_j), scaled to a peak magnitude of one.
fn bary_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut logs = vec![0.0; n];
    let mut signs = vec![1.0; n];
    for i in 0..n {
        let mut s = 0.0;
        let mut sg = 1.0;
        for j in 0..n {
            if i != j {
                let d = x[i] - x[j];
                s -= d.abs().ln();
                if d < 0.0 {
                    sg = -sg;
                }
            }
        }
        logs[i] = s;
        signs[i] = sg;
    }
    let peak = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    logs.iter()
        .zip(&signs)
        .map(|(l, s)| s * (l - peak).exp())
        .collect()
}

fn bary_eval(x: f64, nodes: &[f64], w: &[f64], values: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..nodes.len() {
        let d = x - nodes[i];
        if d == 0.0 {
            return values[i];
        }
        let t = w[i] / d;
        num += t * values[i];
        den += t;
    }
    num / den
}

// Signed local extrema of err, scanned per band so band edges count as ends.
fn local_extrema(err: &[f64], split: usize) -> Vec<usize> {
    let mut out = Vec::new();
    for (lo, hi) in [(0, split), (split, err.len())] {
        for i in lo..hi {
            let e = err[i];
            let left = if i > lo { err[i - 1] } else { f64::NAN };
            let right = if i + 1 < hi { err[i + 1] } else { f64::NAN };
            let is_max = e > 0.0 && !(left > e) && !(right > e);
            let is_min = e < 0.0 && !(left < e) && !(right < e);
            if is_max || is_min {
                out.push(i);
            }
        }
    }
    out
}

// Merge same-sign neighbours, then trim to `want` points.
fn select_extremals(mut cand: Vec<usize>, err: &[f64], want: usize) -> Vec<usize> {
    let alternate = |c: &mut Vec<usize>| {
        let mut out: Vec<usize> = Vec::with_capacity(c.len());
        for &i in c.iter() {
            match out.last() {
                Some(&j) if err[j].signum() == err[i].signum() => {
                    if err[i].abs() > err[j].abs() {
                        *out.last_mut().unwrap() = i;
                    }
                }
                _ => out.push(i),
            }
        }
        *c = out;
    };
    alternate(&mut cand);
    while cand.len() > want {
        let last = cand.len() - 1;
        if cand.len() - want == 1 {
            if err[cand[0]].abs() < err[cand[last]].abs() {
                cand.remove(0);
            } else {
                cand.pop();
            }
            continue;
        }
        let (k, _) = cand
            .iter()
            .enumerate()
            .min_by(|a, b| err[*a.1].abs().total_cmp(&err[*b.1].abs()))
            .unwrap();
        cand.remove(k);
        alternate(&mut cand);
    }
    cand
}

/// Equiripple lowpass of `len` taps with normalized edges fp < fa (cycles/sample)
/// and stopband weight `ws` relative to the passband.
pub fn remez_lowpass(len: usize, fp: f64, fa: f64, ws: f64) -> RemezOutcome {
    let even = len % 2 == 0;
    let r = if even { len / 2 } else { len.div_ceil(2) };
    let grid = build_grid(r, fp, fa, ws, even);
    let g = grid.freq.len();
    let xg: Vec<f64> = grid.freq.iter().map(|f| (2.0 * PI * f).cos()).collect();

    let mut ext: Vec<usize> = (0..=r).map(|i| i * (g - 1) / r).collect();
    let mut delta = 0.0;
    let mut prev_delta = f64::NAN;
    let mut converged = false;
    let mut iterations = 0;
    let mut nodes = Vec::new();
    let mut bw = Vec::new();
    let mut vals = Vec::new();

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let x: Vec<f64> = ext.iter().map(|&i| xg[i]).collect();
        let a = bary_weights(&x);
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, &k) in ext.iter().enumerate() {
            let sgn = if i % 2 == 0 { 1.0 } else { -1.0 };
            num += a[i] * grid.desired[k];
            den += a[i] * sgn / grid.weight[k];
        }
        delta = num / den;
        vals = ext
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                let sgn = if i % 2 == 0 { 1.0 } else { -1.0 };
                grid.desired[k] - sgn * delta / grid.weight[k]
            })
            .collect();
        nodes = x[..r].to_vec();
        bw = bary_weights(&nodes);
        vals.truncate(r);

        let err: Vec<f64> = (0..g)
            .map(|i| {
                grid.weight[i] * (grid.desired[i] - bary_eval(xg[i], &nodes, &bw, &vals))
            })
            .collect();
        if !delta.is_finite() || err.iter().any(|e| !e.is_finite()) {
            break;
        }
        let cand = local_extrema(&err, grid.split);
        let next = select_extremals(cand, &err, r + 1);
        if next.len() < r + 1 {
            break;
        }
        let change = (delta.abs() - prev_delta.abs()).abs();
        if next == ext || change <= CONVERGENCE * delta.abs() {
            converged = true;
            break;
        }
        prev_delta = delta;
        ext = next;
    }

    let taps = if nodes.is_empty() {
        vec![0.0; len]
    } else {
        // sample the zero-phase amplitude on L points and invert
        let amp: Vec<f64> = (0..len)
            .map(|k| {
                let w = 2.0 * PI * k as f64 / len as f64;
                let p = bary_eval(w.cos(), &nodes, &bw, &vals);
                if even {
                    p * (w / 2.0).cos()
                } else {
                    p
                }
            })
            .collect();
        let c = (len as f64 - 1.0) / 2.0;
        let mut h: Vec<f64> = (0..len)
            .map(|n| {
                amp.iter()
                    .enumerate()
                    .map(|(k, a)| a * (2.0 * PI * k as f64 / len as f64 * (n as f64 - c)).cos())
                    .sum::<f64>()
                    / len as f64
            })
            .collect();
        for n in 0..len / 2 {
            let m = 0.5 * (h[n] + h[len - 1 - n]);
            h[n] = m;
            h[len - 1 - n] = m;
        }
        h
    };
    RemezOutcome {
        taps,
        deviation: delta.abs(),
        iterations,
        converged,
    }
}

fn meets(m: &DesignMetrics, spec: &PrototypeSpec) -> bool {
    m.passband_deviation <= spec.passband_ripple && m.stopband_peak <= spec.stopband_ripple
}

// Exchange design at one length, Kaiser window if the exchange stalls.
fn attempt(len: usize, spec: &PrototypeSpec) -> (Vec<f64>, DesignMetrics) {
    let (fp, fa) = (spec.fp_norm(), spec.fa_norm());
    let ws = spec.passband_ripple / spec.stopband_ripple;
    let out = remez_lowpass(len, fp, fa, ws);
    let taps = if out.converged {
        out.taps
    } else {
        kaiser_taps(len, fp, fa, spec.passband_ripple.min(spec.stopband_ripple))
    };
    let m = measure_fir(&taps, fp, fa);
    (taps, m)
}

/// Minimum-length equiripple design meeting `spec`, searching upward from the
/// length estimate.
pub fn design_fir_equiripple(spec: &PrototypeSpec) -> Result<FirPrototype, DesignError> {
    spec.validate()?;
    let start = estimate_fir_length(
        spec.passband_ripple,
        spec.stopband_ripple,
        spec.transition_width(),
    )?;
    let limit = 4 * start + 64;
    let mut best: Option<DesignMetrics> = None;
    let mut record = |m: DesignMetrics| {
        let worse = best.map_or(true, |b| {
            m.stopband_peak / spec.stopband_ripple + m.passband_deviation / spec.passband_ripple
                < b.stopband_peak / spec.stopband_ripple
                    + b.passband_deviation / spec.passband_ripple
        });
        if worse {
            best = Some(m);
        }
    };

    // grow the step until a length passes, then bisect back down
    let mut failed = start - 1;
    let mut step = 1;
    let mut found = None;
    let mut len = start;
    while len <= limit {
        let (taps, m) = attempt(len, spec);
        record(m);
        if meets(&m, spec) {
            found = Some((len, taps));
            break;
        }
        failed = len;
        len += step;
        step *= 2;
    }
    let (mut hi, mut taps) = match found {
        Some(v) => v,
        None => {
            return Err(DesignError::Failure {
                reason: format!("no length up to {limit} met the specification"),
                metrics: best.expect("at least one attempt"),
            })
        }
    };
    let mut lo = failed;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let (t, m) = attempt(mid, spec);
        if meets(&m, spec) {
            hi = mid;
            taps = t;
        } else {
            lo = mid;
        }
    }
    Ok(FirPrototype::new(taps, spec.num_branches)?.with_spec(*spec))
}
