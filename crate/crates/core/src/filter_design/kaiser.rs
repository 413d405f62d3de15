use super::{measure_fir, DesignError, FirPrototype, PrototypeSpec};
use std::f64::consts::PI;

fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = x * x / 4.0;
    for k in 1..500 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

fn kaiser_beta(atten_db: f64) -> f64 {
    if atten_db > 50.0 {
        0.1102 * (atten_db - 8.7)
    } else if atten_db >= 21.0 {
        0.5842 * (atten_db - 21.0).powf(0.4) + 0.07886 * (atten_db - 21.0)
    } else {
        0.0
    }
}

/// Kaiser-windowed ideal lowpass with cutoff midway between fp and fa.
pub fn kaiser_taps(len: usize, fp: f64, fa: f64, delta: f64) -> Vec<f64> {
    let beta = kaiser_beta(-20.0 * delta.log10());
    let fc = 0.5 * (fp + fa);
    let c = (len as f64 - 1.0) / 2.0;
    let norm = bessel_i0(beta);
    (0..len)
        .map(|n| {
            let t = n as f64 - c;
            let ideal = if t == 0.0 {
                2.0 * fc
            } else {
                (2.0 * PI * fc * t).sin() / (PI * t)
            };
            let w = if len == 1 {
                1.0
            } else {
                let r = t / c;
                bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / norm
            };
            ideal * w
        })
        .collect()
}

/// Windowed design, used directly for very long filters where the exchange
/// algorithm is impractical. Searches upward from the Kaiser length formula.
pub fn design_fir_kaiser(spec: &PrototypeSpec) -> Result<FirPrototype, DesignError> {
    spec.validate()?;
    let (fp, fa) = (spec.fp_norm(), spec.fa_norm());
    let delta = spec.passband_ripple.min(spec.stopband_ripple);
    let atten = -20.0 * delta.log10();
    let start = (((atten - 7.95) / (14.36 * spec.transition_width())).ceil() as usize + 1).max(1);
    let mut len = start;
    let mut step = (start / 100).max(1);
    let limit = 2 * start + 64;
    let mut last = None;
    while len <= limit {
        let taps = kaiser_taps(len, fp, fa, delta);
        let m = measure_fir(&taps, fp, fa);
        if m.passband_deviation <= spec.passband_ripple && m.stopband_peak <= spec.stopband_ripple
        {
            return Ok(FirPrototype::new(taps, spec.num_branches)?.with_spec(*spec));
        }
        last = Some(m);
        len += step;
        step = (step * 2).min(start / 10 + 1);
    }
    Err(DesignError::Failure {
        reason: format!("windowed design did not meet the specification up to {limit} taps"),
        metrics: last.expect("at least one attempt"),
    })
}
