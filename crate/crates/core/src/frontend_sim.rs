//! Analogue stacking front end and wideband ADC.
//!
//! Two stacking paths exist. [`stack_baseband_equivalent`] interpolates each
//! element's complex baseband to f_s, mirrors it when the zone inverts the
//! spectrum and shifts it to F_n. [`simulate_rf_chain`] instead builds the
//! real RF signal at f_c on an oversampled grid, mixes it with the β_n·f_o LO,
//! band-pass filters the difference product and samples at f_s, so zone
//! folding happens on its own.

use crate::fftcore::{Direction, TransformPlan};
use crate::stacking_planner::FrequencyPlan;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

type C = Complex64;

#[derive(Debug, Error)]
pub enum FrontendError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("sub-bands {a} and {b} overlap after stacking")]
    Overlap { a: usize, b: usize },
    #[error("sub-band {n} aliases: {reason}")]
    Alias { n: usize, reason: String },
    #[error("signal file {path}: {message}")]
    Format { path: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Real,
    Complex,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Samples {
    Real(Vec<f64>),
    Complex(Vec<C>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalBuffer {
    pub samples: Samples,
    pub rate: f64,
    pub label: String,
}

impl SignalBuffer {
    pub fn real(samples: Vec<f64>, rate: f64, label: impl Into<String>) -> Self {
        Self {
            samples: Samples::Real(samples),
            rate,
            label: label.into(),
        }
    }

    pub fn complex(samples: Vec<C>, rate: f64, label: impl Into<String>) -> Self {
        Self {
            samples: Samples::Complex(samples),
            rate,
            label: label.into(),
        }
    }

    pub fn domain(&self) -> Domain {
        match self.samples {
            Samples::Real(_) => Domain::Real,
            Samples::Complex(_) => Domain::Complex,
        }
    }

    pub fn len(&self) -> usize {
        match &self.samples {
            Samples::Real(v) => v.len(),
            Samples::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_real(&self) -> Option<&[f64]> {
        match &self.samples {
            Samples::Real(v) => Some(v),
            Samples::Complex(_) => None,
        }
    }

    pub fn as_complex(&self) -> Option<&[C]> {
        match &self.samples {
            Samples::Complex(v) => Some(v),
            Samples::Real(_) => None,
        }
    }

    pub fn to_complex(&self) -> Vec<C> {
        match &self.samples {
            Samples::Real(v) => v.iter().map(|&x| C::new(x, 0.0)).collect(),
            Samples::Complex(v) => v.clone(),
        }
    }

    /// Mean |x|².
    pub fn power(&self) -> f64 {
        let n = self.len().max(1) as f64;
        match &self.samples {
            Samples::Real(v) => v.iter().map(|x| x * x).sum::<f64>() / n,
            Samples::Complex(v) => v.iter().map(|x| x.norm_sqr()).sum::<f64>() / n,
        }
    }
}

/// One antenna element's sub-band at the coarse channel rate f_s/N.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementSignal {
    pub n: usize,
    pub baseband: SignalBuffer,
    pub power: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StimulusShape {
    /// Flat complex Gaussian noise over |f| < B/2.
    Noise,
    /// Equal-amplitude bin-centred tones spread over ±0.9·B/2, random phases.
    Multitone(usize),
    /// Single complex exponential at the given baseband offset.
    Tone(f64),
    /// Noise only where it will fall inside a fine channel's passband after
    /// stacking and coarse analysis: within ±(1 − guard)/2·granularity of a
    /// multiple of the granularity.
    FineGrid {
        granularity_hz: f64,
        guard_fraction: f64,
    },
}

/// Coarse-channel output frequency of baseband frequency `f` of element n.
///
/// The stacked band sits at F_n, mirrored when s = +1, and the analysis
/// channel removes n·f_s/N.
pub fn coarse_output_frequency(plan: &FrequencyPlan, n: usize, f: f64) -> f64 {
    let mirror = if plan.sign > 0.0 { -1.0 } else { 1.0 };
    plan.signed_offsets[n - 1] + mirror * f
}

fn baseband_freq(k: usize, len: usize, rate: f64) -> f64 {
    let kk = if k < len.div_ceil(2) { k as f64 } else { k as f64 - len as f64 };
    kk * rate / len as f64
}

fn element_rng(seed: u64, n: usize) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(n as u64);
    r
}

/// Seeded unit-power complex baseband for sub-band n, bandwidth ≤ B.
pub fn generate_subband_signal(
    n: usize,
    plan: &FrequencyPlan,
    len: usize,
    seed: u64,
    shape: StimulusShape,
) -> Result<ElementSignal, FrontendError> {
    if n == 0 || n > plan.betas.len() {
        return Err(FrontendError::InvalidArgument(format!(
            "sub-band {n} is not occupied in a plan with {} sub-bands",
            plan.betas.len()
        )));
    }
    if len == 0 {
        return Err(FrontendError::InvalidArgument("signal length must be positive".into()));
    }
    let rate = plan.inputs.channel_spacing();
    let half_b = plan.inputs.bandwidth / 2.0;
    let mut rng = element_rng(seed, n);
    let samples: Vec<C> = match shape {
        StimulusShape::Tone(offset) => {
            if offset.abs() > half_b {
                return Err(FrontendError::InvalidArgument(format!(
                    "tone offset {offset} Hz outside ±B/2"
                )));
            }
            (0..len)
                .map(|k| C::from_polar(1.0, 2.0 * PI * offset * k as f64 / rate))
                .collect()
        }
        StimulusShape::Multitone(count) => {
            if count == 0 {
                return Err(FrontendError::InvalidArgument("need at least one tone".into()));
            }
            let span = 0.9 * half_b;
            let mut spec = vec![C::new(0.0, 0.0); len];
            for i in 0..count {
                let f = if count == 1 {
                    0.0
                } else {
                    -span + 2.0 * span * i as f64 / (count - 1) as f64
                };
                let bin = (f / rate * len as f64).round() as i64;
                let idx = bin.rem_euclid(len as i64) as usize;
                spec[idx] = C::from_polar(1.0, rng.gen_range(0.0..2.0 * PI));
            }
            from_spectrum(spec)
        }
        StimulusShape::Noise | StimulusShape::FineGrid { .. } => {
            if let StimulusShape::FineGrid {
                granularity_hz,
                guard_fraction,
            } = shape
            {
                if !(granularity_hz > 0.0 && (0.0..1.0).contains(&guard_fraction)) {
                    return Err(FrontendError::InvalidArgument(format!(
                        "fine grid needs granularity > 0 and guard in [0, 1), got {granularity_hz}, {guard_fraction}"
                    )));
                }
            }
            let normal = Normal::new(0.0, 1.0).unwrap();
            let spec: Vec<C> = (0..len)
                .map(|k| {
                    let re = normal.sample(&mut rng);
                    let im = normal.sample(&mut rng);
                    let f = baseband_freq(k, len, rate);
                    let keep = f.abs() < half_b
                        && match shape {
                            StimulusShape::FineGrid {
                                granularity_hz: g,
                                guard_fraction: gf,
                            } => {
                                let v = coarse_output_frequency(plan, n, f);
                                (v - (v / g).round() * g).abs() < (1.0 - gf) / 2.0 * g
                            }
                            _ => true,
                        };
                    if keep {
                        C::new(re, im)
                    } else {
                        C::new(0.0, 0.0)
                    }
                })
                .collect();
            from_spectrum(spec)
        }
    };
    let mut buf = SignalBuffer::complex(samples, rate, format!("subband{n}"));
    let p = buf.power();
    if p > 0.0 {
        let g = 1.0 / p.sqrt();
        if let Samples::Complex(v) = &mut buf.samples {
            v.iter_mut().for_each(|x| *x *= g);
        }
    }
    let power = buf.power();
    Ok(ElementSignal {
        n,
        baseband: buf,
        power,
    })
}

fn from_spectrum(spec: Vec<C>) -> Vec<C> {
    TransformPlan::new(spec.len(), Direction::Inverse)
        .unwrap()
        .transform(&spec)
        .unwrap()
}

/// Band-limited interpolation by an integer factor through the spectrum.
pub fn fft_interpolate(x: &[C], factor: usize) -> Vec<C> {
    let l = x.len();
    if l == 0 || factor == 1 {
        return x.to_vec();
    }
    let spec = TransformPlan::new(l, Direction::Forward)
        .unwrap()
        .transform(x)
        .unwrap();
    let m = l * factor;
    let mut big = vec![C::new(0.0, 0.0); m];
    let pos = l.div_ceil(2);
    big[..pos].copy_from_slice(&spec[..pos]);
    big[m - (l - pos)..].copy_from_slice(&spec[pos..]);
    let mut y = TransformPlan::new(m, Direction::Inverse)
        .unwrap()
        .transform(&big)
        .unwrap();
    let g = factor as f64;
    y.iter_mut().for_each(|v| *v *= g);
    y
}

fn check_elements(
    elements: &[ElementSignal],
    plan: &FrequencyPlan,
    len: usize,
) -> Result<(), FrontendError> {
    let rate = plan.inputs.channel_spacing();
    let mut seen: Vec<usize> = Vec::new();
    for e in elements {
        if e.n == 0 || e.n > plan.betas.len() {
            return Err(FrontendError::InvalidArgument(format!("sub-band {} not in plan", e.n)));
        }
        if seen.contains(&e.n) {
            return Err(FrontendError::InvalidArgument(format!("sub-band {} given twice", e.n)));
        }
        if e.baseband.domain() != Domain::Complex {
            return Err(FrontendError::InvalidArgument(format!(
                "sub-band {} baseband must be complex",
                e.n
            )));
        }
        if (e.baseband.rate - rate).abs() > 1e-9 * rate {
            return Err(FrontendError::InvalidArgument(format!(
                "sub-band {} rate {} differs from f_s/N = {rate}",
                e.n, e.baseband.rate
            )));
        }
        if e.baseband.len() != len {
            return Err(FrontendError::InvalidArgument(format!(
                "sub-band {} has {} samples, expected {len}",
                e.n,
                e.baseband.len()
            )));
        }
        seen.push(e.n);
    }
    let half_b = plan.inputs.bandwidth / 2.0;
    for (i, &a) in seen.iter().enumerate() {
        for &b in &seen[i + 1..] {
            let (fa, fb) = (plan.centres[a - 1], plan.centres[b - 1]);
            if (fa - fb).abs() < 2.0 * half_b {
                return Err(FrontendError::Overlap { a, b });
            }
        }
    }
    Ok(())
}

fn sum_in_order(parts: Vec<Vec<f64>>, len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for p in parts {
        for (o, v) in out.iter_mut().zip(p) {
            *o += v;
        }
    }
    out
}

/// Real stacked signal at f_s: Σ_n Re{interp(x_n) mirrored if s = +1, shifted to F_n}.
///
/// `len` is the baseband length of every element; the output has N·len samples.
pub fn stack_baseband_equivalent(
    elements: &[ElementSignal],
    plan: &FrequencyPlan,
    len: usize,
) -> Result<SignalBuffer, FrontendError> {
    check_elements(elements, plan, len)?;
    let n_ch = plan.inputs.num_channels;
    let fs = plan.inputs.sample_rate;
    let m = len * n_ch;
    let parts: Vec<Vec<f64>> = elements
        .par_iter()
        .map(|e| {
            let y = fft_interpolate(e.baseband.as_complex().unwrap(), n_ch);
            let f = plan.centres[e.n - 1];
            y.iter()
                .enumerate()
                .map(|(k, &v)| {
                    let v = if plan.sign > 0.0 { v.conj() } else { v };
                    let ph = 2.0 * PI * ((f * k as f64 / fs) % 1.0);
                    (v * C::from_polar(1.0, ph)).re
                })
                .collect()
        })
        .collect();
    Ok(SignalBuffer::real(sum_in_order(parts, m), fs, "stacked"))
}

/// Oversampled RF oracle: place each element at f_c, mix with β_n·f_o,
/// keep the difference product with an FFT-mask band-pass filter, then
/// sample at f_s in zone ν.
pub fn simulate_rf_chain(
    elements: &[ElementSignal],
    plan: &FrequencyPlan,
    len: usize,
    oversample: usize,
) -> Result<SignalBuffer, FrontendError> {
    if oversample < 4 {
        return Err(FrontendError::InvalidArgument(format!(
            "oversample factor must be at least 4, got {oversample}"
        )));
    }
    check_elements(elements, plan, len)?;
    let inp = &plan.inputs;
    let fs = inp.sample_rate;
    let r = fs * oversample as f64;
    let half_b = inp.bandwidth / 2.0;
    if inp.rf_centre + half_b >= r / 2.0 {
        return Err(FrontendError::InvalidArgument(format!(
            "RF band reaches {} Hz, above the virtual Nyquist {} Hz",
            inp.rf_centre + half_b,
            r / 2.0
        )));
    }
    let zone = inp.nyquist_zone as f64;
    for e in elements {
        let lo = plan.betas[e.n - 1] as f64 * inp.master_oscillator;
        let ifreq = (inp.rf_centre - lo).abs();
        if ifreq - half_b < (zone - 1.0) * fs / 2.0 || ifreq + half_b > zone * fs / 2.0 {
            return Err(FrontendError::Alias {
                n: e.n,
                reason: format!("IF band around {ifreq} Hz crosses a Nyquist zone boundary"),
            });
        }
    }
    if elements.is_empty() || len == 0 {
        return Ok(SignalBuffer::real(vec![0.0; len * inp.num_channels], fs, "rf_chain"));
    }
    let m = len * inp.num_channels * oversample;
    let fwd = TransformPlan::new(m, Direction::Forward).unwrap();
    let inv = TransformPlan::new(m, Direction::Inverse).unwrap();
    let parts: Vec<Vec<f64>> = elements
        .par_iter()
        .map(|e| {
            let y = fft_interpolate(e.baseband.as_complex().unwrap(), inp.num_channels * oversample);
            let lo = plan.betas[e.n - 1] as f64 * inp.master_oscillator;
            let ifreq = (inp.rf_centre - lo).abs();
            let mixed: Vec<C> = y
                .iter()
                .enumerate()
                .map(|(k, &v)| {
                    let t = k as f64 / r;
                    let rf = (v * C::from_polar(1.0, 2.0 * PI * ((inp.rf_centre * t) % 1.0))).re;
                    C::new(rf * 2.0 * (2.0 * PI * ((lo * t) % 1.0)).cos(), 0.0)
                })
                .collect();
            let mut spec = fwd.transform(&mixed).unwrap();
            for (k, s) in spec.iter_mut().enumerate() {
                let f = baseband_freq(k, m, r).abs();
                if (f - ifreq).abs() > half_b {
                    *s = C::new(0.0, 0.0);
                }
            }
            let band = inv.transform(&spec).unwrap();
            band.iter().step_by(oversample).map(|v| v.re).collect()
        })
        .collect();
    Ok(SignalBuffer::real(sum_in_order(parts, m / oversample), fs, "rf_chain"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdcModel {
    pub bits: u32,
    pub full_scale: f64,
    pub rate: f64,
    pub zone: u32,
}

impl AdcModel {
    pub fn new(bits: u32, full_scale: f64, rate: f64, zone: u32) -> Result<Self, FrontendError> {
        if !(4..=24).contains(&bits) {
            return Err(FrontendError::InvalidArgument(format!("ADC bits {bits} outside [4, 24]")));
        }
        if !(full_scale > 0.0 && rate > 0.0 && zone >= 1) {
            return Err(FrontendError::InvalidArgument(
                "ADC full scale and rate must be positive, zone at least 1".into(),
            ));
        }
        Ok(Self {
            bits,
            full_scale,
            rate,
            zone,
        })
    }

    pub fn step(&self) -> f64 {
        2.0 * self.full_scale / (1u64 << self.bits) as f64
    }

    /// Mid-rise quantizer with saturation; returns the level and whether it clipped.
    pub fn quantize_sample(&self, x: f64) -> (f64, bool) {
        let d = self.step();
        let top = (1i64 << (self.bits - 1)) - 1;
        let code = (x / d).floor() as i64;
        let clipped = code > top || code < -top - 1;
        let code = code.clamp(-top - 1, top);
        ((code as f64 + 0.5) * d, clipped)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantizeOutcome {
    pub signal: SignalBuffer,
    pub saturated: usize,
}

pub fn adc_quantize(x: &SignalBuffer, model: &AdcModel) -> Result<QuantizeOutcome, FrontendError> {
    let Some(v) = x.as_real() else {
        return Err(FrontendError::InvalidArgument("ADC input must be real".into()));
    };
    if (x.rate - model.rate).abs() > 1e-9 * model.rate {
        return Err(FrontendError::InvalidArgument(format!(
            "signal rate {} differs from ADC rate {}",
            x.rate, model.rate
        )));
    }
    let mut saturated = 0;
    let q = v
        .iter()
        .map(|&s| {
            let (y, c) = model.quantize_sample(s);
            saturated += c as usize;
            y
        })
        .collect();
    Ok(QuantizeOutcome {
        signal: SignalBuffer::real(q, x.rate, format!("{}_adc{}", x.label, model.bits)),
        saturated,
    })
}

/// White Gaussian noise at `snr_db` below the measured signal power.
/// `f64::INFINITY` returns the input unchanged.
pub fn add_awgn(x: &SignalBuffer, snr_db: f64, seed: u64) -> Result<SignalBuffer, FrontendError> {
    if snr_db == f64::INFINITY {
        return Ok(x.clone());
    }
    if !snr_db.is_finite() {
        return Err(FrontendError::InvalidArgument(format!("SNR {snr_db} dB is not finite")));
    }
    let noise_power = x.power() / 10f64.powf(snr_db / 10.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let label = format!("{}_awgn{snr_db}", x.label);
    Ok(match &x.samples {
        Samples::Real(v) => {
            let nd = Normal::new(0.0, noise_power.sqrt()).unwrap();
            let y = v.iter().map(|s| s + nd.sample(&mut rng)).collect();
            SignalBuffer::real(y, x.rate, label)
        }
        Samples::Complex(v) => {
            let nd = Normal::new(0.0, (noise_power / 2.0).sqrt()).unwrap();
            let y = v
                .iter()
                .map(|s| s + C::new(nd.sample(&mut rng), nd.sample(&mut rng)))
                .collect();
            SignalBuffer::complex(y, x.rate, label)
        }
    })
}

/// Power per FFT bin, normalized so the bins sum to the mean power.
/// Returned as (frequency_hz, power) in ascending frequency; real signals
/// keep only 0..f_s/2.
pub fn periodogram(x: &SignalBuffer) -> Vec<(f64, f64)> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let spec = TransformPlan::new(n, Direction::Forward)
        .unwrap()
        .transform(&x.to_complex())
        .unwrap();
    let scale = 1.0 / (n as f64 * n as f64);
    if x.domain() == Domain::Real {
        // fold bin n−k onto bin k
        return (0..=n / 2)
            .map(|k| {
                let mut p = spec[k].norm_sqr();
                if k != 0 && k != n - k {
                    p += spec[n - k].norm_sqr();
                }
                (k as f64 * x.rate / n as f64, p * scale)
            })
            .collect();
    }
    let mut bins: Vec<(f64, f64)> = spec
        .iter()
        .enumerate()
        .map(|(k, v)| (baseband_freq(k, n, x.rate), v.norm_sqr() * scale))
        .collect();
    bins.sort_by(|a, b| a.0.total_cmp(&b.0));
    bins
}

/// Width between the (1−frac)/2 and (1+frac)/2 points of the cumulative power.
pub fn occupied_bandwidth(psd: &[(f64, f64)], frac: f64) -> f64 {
    let total: f64 = psd.iter().map(|b| b.1).sum();
    if total == 0.0 {
        return 0.0;
    }
    let (lo_t, hi_t) = ((1.0 - frac) / 2.0 * total, (1.0 + frac) / 2.0 * total);
    let mut acc = 0.0;
    let (mut lo, mut hi) = (psd[0].0, psd[psd.len() - 1].0);
    let mut found_lo = false;
    for &(f, p) in psd {
        acc += p;
        if !found_lo && acc >= lo_t {
            lo = f;
            found_lo = true;
        }
        if acc >= hi_t {
            hi = f;
            break;
        }
    }
    hi - lo
}

/// `frequency_hz,power_db` rows.
pub fn spectrum_csv(psd: &[(f64, f64)]) -> String {
    let mut s = String::from("frequency_hz,power_db\n");
    for &(f, p) in psd {
        writeln!(s, "{},{}", f, 10.0 * p.max(1e-300).log10()).unwrap();
    }
    s
}

fn meta_path(path: &Path) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".meta");
    PathBuf::from(p)
}

/// Raw little-endian f64 samples (complex interleaved I, Q) plus a
/// `<path>.meta` sidecar with rate_hz, domain, length and label.
pub fn write_signal(path: &Path, x: &SignalBuffer) -> Result<(), FrontendError> {
    let mut bytes = Vec::with_capacity(x.len() * 16);
    match &x.samples {
        Samples::Real(v) => v.iter().for_each(|s| bytes.extend_from_slice(&s.to_le_bytes())),
        Samples::Complex(v) => v.iter().for_each(|s| {
            bytes.extend_from_slice(&s.re.to_le_bytes());
            bytes.extend_from_slice(&s.im.to_le_bytes());
        }),
    }
    std::fs::write(path, bytes)?;
    let domain = match x.domain() {
        Domain::Real => "real",
        Domain::Complex => "complex",
    };
    let meta = format!(
        "rate_hz={}\ndomain={}\nlength={}\nlabel={}\n",
        x.rate,
        domain,
        x.len(),
        x.label.replace('\n', " ")
    );
    std::fs::write(meta_path(path), meta)?;
    Ok(())
}

pub fn read_signal(path: &Path) -> Result<SignalBuffer, FrontendError> {
    let fmt_err = |m: String| FrontendError::Format {
        path: path.display().to_string(),
        message: m,
    };
    let meta = std::fs::read_to_string(meta_path(path))?;
    let (mut rate, mut domain, mut length, mut label) = (None, None, None, String::new());
    for line in meta.lines().filter(|l| !l.trim().is_empty()) {
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| fmt_err(format!("bad metadata line '{line}'")))?;
        match k.trim() {
            "rate_hz" => rate = Some(v.trim().parse::<f64>().map_err(|e| fmt_err(e.to_string()))?),
            "domain" => domain = Some(v.trim().to_string()),
            "length" => length = Some(v.trim().parse::<usize>().map_err(|e| fmt_err(e.to_string()))?),
            "label" => label = v.to_string(),
            other => return Err(fmt_err(format!("unknown metadata key '{other}'"))),
        }
    }
    let rate = rate.ok_or_else(|| fmt_err("missing rate_hz".into()))?;
    let length = length.ok_or_else(|| fmt_err("missing length".into()))?;
    let bytes = std::fs::read(path)?;
    let vals: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    match domain.as_deref() {
        Some("real") => {
            if vals.len() != length || bytes.len() % 8 != 0 {
                return Err(fmt_err(format!("expected {length} samples, found {}", vals.len())));
            }
            Ok(SignalBuffer::real(vals, rate, label))
        }
        Some("complex") => {
            if vals.len() != 2 * length || bytes.len() % 8 != 0 {
                return Err(fmt_err(format!(
                    "expected {length} complex samples, found {} values",
                    vals.len()
                )));
            }
            let v = vals.chunks_exact(2).map(|p| C::new(p[0], p[1])).collect();
            Ok(SignalBuffer::complex(v, rate, label))
        }
        Some(d) => Err(fmt_err(format!("unknown domain '{d}'"))),
        None => Err(fmt_err("missing domain".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantizer_levels() {
        let m = AdcModel::new(4, 1.0, 1.0, 1).unwrap();
        assert_eq!(m.step(), 0.125);
        assert_eq!(m.quantize_sample(0.01), (0.0625, false));
        assert_eq!(m.quantize_sample(-0.01), (-0.0625, false));
        assert_eq!(m.quantize_sample(0.99), (0.9375, false));
        assert_eq!(m.quantize_sample(1.5), (0.9375, true));
        assert_eq!(m.quantize_sample(-1.0), (-0.9375, false));
        assert_eq!(m.quantize_sample(-1.2), (-0.9375, true));
        assert!(AdcModel::new(3, 1.0, 1.0, 1).is_err());
        assert!(AdcModel::new(25, 1.0, 1.0, 1).is_err());
    }

    #[test]
    fn interpolation_keeps_samples() {
        let x: Vec<C> = (0..16)
            .map(|k| C::from_polar(1.0, 2.0 * PI * 3.0 * k as f64 / 16.0))
            .collect();
        let y = fft_interpolate(&x, 5);
        assert_eq!(y.len(), 80);
        for (k, v) in x.iter().enumerate() {
            assert!((y[5 * k] - v).norm() < 1e-12);
        }
    }

    #[test]
    fn awgn_infinite_is_identity() {
        let x = SignalBuffer::real(vec![1.0, -2.0, 3.0], 10.0, "x");
        assert_eq!(add_awgn(&x, f64::INFINITY, 1).unwrap(), x);
        assert!(add_awgn(&x, f64::NAN, 1).is_err());
    }
}
