use super::{spike_intervals, AllPassPrototype, DesignError, DesignMetrics, Prototype};
use crate::fftcore::{Direction, TransformPlan};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Magnitude and unwrapped phase on a uniform grid over [0, 0.5] cycles/sample.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyResponse {
    pub grid: Vec<f64>,
    pub magnitude_db: Vec<f64>,
    pub phase_rad: Vec<f64>,
}

fn to_db(m: f64) -> f64 {
    if m > 0.0 {
        20.0 * m.log10()
    } else {
        -400.0
    }
}

fn unwrap(phase: &mut [f64]) {
    for i in 1..phase.len() {
        let d = phase[i] - phase[i - 1];
        phase[i] -= 2.0 * PI * (d / (2.0 * PI)).round();
    }
}

pub fn evaluate_response(
    filter: &Prototype,
    grid_size: usize,
) -> Result<FrequencyResponse, DesignError> {
    if grid_size < 2 {
        return Err(DesignError::InvalidSpec(format!(
            "grid size must be at least 2, got {grid_size}"
        )));
    }
    let grid: Vec<f64> = (0..grid_size)
        .map(|i| 0.5 * i as f64 / (grid_size - 1) as f64)
        .collect();
    let h: Vec<Complex64> = grid.iter().map(|&f| filter.response_at(f)).collect();
    let magnitude_db = h.iter().map(|v| to_db(v.norm())).collect();
    let mut phase_rad: Vec<f64> = h.iter().map(|v| v.arg()).collect();
    unwrap(&mut phase_rad);
    Ok(FrequencyResponse {
        grid,
        magnitude_db,
        phase_rad,
    })
}

// Peak deviation of unwrapped phase from its least-squares line, in degrees.
fn phase_deviation_deg(f: &[f64], h: &[Complex64]) -> f64 {
    if f.len() < 3 {
        return 0.0;
    }
    let mut ph: Vec<f64> = h.iter().map(|v| v.arg()).collect();
    unwrap(&mut ph);
    let n = f.len() as f64;
    let mf = f.iter().sum::<f64>() / n;
    let mp = ph.iter().sum::<f64>() / n;
    let sxy: f64 = f.iter().zip(&ph).map(|(x, y)| (x - mf) * (y - mp)).sum();
    let sxx: f64 = f.iter().map(|x| (x - mf) * (x - mf)).sum();
    let slope = sxy / sxx;
    f.iter()
        .zip(&ph)
        .map(|(x, y)| (y - mp - slope * (x - mf)).abs())
        .fold(0.0, f64::max)
        .to_degrees()
}

/// Dense-grid check of an FIR lowpass with normalized edges fp, fa.
/// The grid has at least 16·L points over [0, 0.5].
pub fn measure_fir(taps: &[f64], fp: f64, fa: f64) -> DesignMetrics {
    let size = (32 * taps.len()).next_power_of_two().max(1024);
    let mut buf = vec![Complex64::new(0.0, 0.0); size];
    for (b, &t) in buf.iter_mut().zip(taps) {
        b.re = t;
    }
    let plan = TransformPlan::new(size, Direction::Forward).expect("nonzero size");
    let spec = plan.transform(&buf).expect("matching size");
    let direct = |f: f64| -> Complex64 {
        taps.iter()
            .enumerate()
            .map(|(k, &b)| Complex64::from_polar(b, -2.0 * PI * f * k as f64))
            .sum()
    };
    let mut pass_f = Vec::new();
    let mut pass_h = Vec::new();
    let mut stop = 0.0f64;
    for (k, v) in spec.iter().enumerate().take(size / 2 + 1) {
        let f = k as f64 / size as f64;
        if f <= fp {
            pass_f.push(f);
            pass_h.push(*v);
        } else if f >= fa {
            stop = stop.max(v.norm());
        }
    }
    pass_f.push(fp);
    pass_h.push(direct(fp));
    stop = stop.max(direct(fa).norm());
    let pass = pass_h.iter().map(|v| (v.norm() - 1.0).abs()).fold(0.0, f64::max);
    DesignMetrics {
        passband_deviation: pass,
        stopband_peak: stop,
        phase_deviation_deg: phase_deviation_deg(&pass_f, &pass_h),
        coefficients: taps.len(),
    }
}

/// Dense-grid check of an all-pass prototype. Stopband points inside the
/// transition-band images are skipped.
pub fn measure_iir(proto: &AllPassPrototype, fp: f64, fa: f64) -> DesignMetrics {
    const POINTS: usize = 1 << 16;
    let spikes = spike_intervals(proto.num_branches(), fp, fa);
    let mut pass_f = Vec::new();
    let mut pass_h = Vec::new();
    let mut stop = 0.0f64;
    let mut grid: Vec<f64> = (0..=POINTS).map(|i| 0.5 * i as f64 / POINTS as f64).collect();
    grid.push(fp);
    grid.push(fa);
    grid.sort_by(f64::total_cmp);
    for f in grid {
        if f <= fp {
            pass_f.push(f);
            pass_h.push(proto.response_at(f));
        } else if f >= fa && !spikes.iter().any(|&(lo, hi)| f > lo && f < hi) {
            stop = stop.max(proto.response_at(f).norm());
        }
    }
    let pass = pass_h.iter().map(|v| (v.norm() - 1.0).abs()).fold(0.0, f64::max);
    DesignMetrics {
        passband_deviation: pass,
        stopband_peak: stop,
        phase_deviation_deg: phase_deviation_deg(&pass_f, &pass_h),
        coefficients: proto.coefficient_count(),
    }
}
