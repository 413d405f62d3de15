//! Two-stage channeliser: coarse N-channel bank on the stacked real signal,
//! then an N_f-channel fine bank per occupied sub-band, and back.
//!
//! Coarse analysis keeps only the occupied outputs. Coarse synthesis rebuilds
//! a Hermitian frame from them (channel N − n is the conjugate of channel n for
//! real input) and returns the real part.

use crate::fftcore::{Direction, TransformPlan};
use crate::filter_design::{
    design_fir_kaiser, ripple_from_attenuation_db, ripple_from_peak_to_peak_db, DesignError,
    FilterKind, FirPrototype, Prototype, PrototypeSpec,
};
use crate::frontend_sim::{
    add_awgn, adc_quantize, generate_subband_signal, stack_baseband_equivalent, AdcModel,
    ElementSignal, FrontendError, SignalBuffer, StimulusShape,
};
use crate::polyphase_bank::{cascade_delay, AnalysisBank, SynthesisBank};
use crate::stacking_planner::FrequencyPlan;
use num_complex::Complex64;
use rayon::prelude::*;
use std::fmt::Write as _;
use std::sync::Arc;
use thiserror::Error;

type C = Complex64;
const ZERO: C = C::new(0.0, 0.0);

#[derive(Debug, Error)]
pub enum ChanneliserError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("rate mismatch: expected {expected} Hz, got {got} Hz")]
    Rate { expected: f64, got: f64 },
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error(transparent)]
    Frontend(#[from] FrontendError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelStandard {
    Gmr1,
    Gmr2,
    Custom,
}

impl std::str::FromStr for ChannelStandard {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gmr1" => Ok(Self::Gmr1),
            "gmr2" => Ok(Self::Gmr2),
            "custom" => Ok(Self::Custom),
            other => Err(format!("unknown channel standard '{other}'")),
        }
    }
}

/// Fine channel grid inside one sub-band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelPlan {
    pub standard: ChannelStandard,
    pub granularity: f64,
    pub num_fine: usize,
    pub subband_rate: f64,
    pub guardband_fraction: f64,
}

impl ChannelPlan {
    pub fn new(
        standard: ChannelStandard,
        granularity: f64,
        subband_rate: f64,
        guardband_fraction: f64,
    ) -> Result<Self, ChanneliserError> {
        let granularity = match standard {
            ChannelStandard::Gmr1 => 31.25e3,
            ChannelStandard::Gmr2 => 50e3,
            ChannelStandard::Custom => granularity,
        };
        if !(granularity > 0.0 && subband_rate > 0.0) {
            return Err(ChanneliserError::Config(format!(
                "granularity {granularity} and sub-band rate {subband_rate} must be positive"
            )));
        }
        let ratio = subband_rate / granularity;
        let num_fine = ratio.round();
        if (ratio - num_fine).abs() > 1e-9 * ratio || num_fine < 2.0 {
            return Err(ChanneliserError::Config(format!(
                "sub-band rate {subband_rate} is not an integer multiple (>= 2) of granularity {granularity}"
            )));
        }
        if !(guardband_fraction > 0.0 && guardband_fraction <= 0.1) {
            return Err(ChanneliserError::Config(format!(
                "user guardband fraction {guardband_fraction} outside (0, 0.1]"
            )));
        }
        Ok(Self {
            standard,
            granularity,
            num_fine: num_fine as usize,
            subband_rate,
            guardband_fraction,
        })
    }

    /// 64 fine channels per sub-band.
    pub fn desk(subband_rate: f64) -> Self {
        Self::new(ChannelStandard::Custom, subband_rate / 64.0, subband_rate, 0.1).unwrap()
    }
}

/// Fine prototype: passband ±(1 − g)/2, stopband from (1 + g)/2 of a fine
/// channel, 80 dB stopband, Kaiser window.
pub fn design_fine_prototype(cp: &ChannelPlan) -> Result<FirPrototype, ChanneliserError> {
    let g = cp.guardband_fraction;
    let spec = PrototypeSpec::new(
        cp.subband_rate,
        (1.0 - g) / 2.0 * cp.granularity,
        (1.0 + g) / 2.0 * cp.granularity,
        ripple_from_peak_to_peak_db(0.01),
        ripple_from_attenuation_db(80.0),
        cp.num_fine,
        FilterKind::Fir,
    )?;
    Ok(design_fir_kaiser(&spec)?)
}

#[derive(Debug, Clone)]
pub struct ChanneliserConfig {
    pub plan: FrequencyPlan,
    pub coarse: Arc<Prototype>,
    pub fine: Arc<Prototype>,
    pub channel_plan: ChannelPlan,
    /// Coarse channel indices carrying sub-bands, ascending.
    pub occupied: Vec<usize>,
}

impl ChanneliserConfig {
    /// `allow_edge_channels` permits occupying channel 0 and N/2.
    pub fn new(
        plan: FrequencyPlan,
        coarse: Arc<Prototype>,
        fine: Arc<Prototype>,
        channel_plan: ChannelPlan,
        mut occupied: Vec<usize>,
        allow_edge_channels: bool,
    ) -> Result<Self, ChanneliserError> {
        let n = plan.inputs.num_channels;
        let mut bad = Vec::new();
        if coarse.num_branches() != n {
            bad.push(format!(
                "coarse prototype has {} branches, plan has {n} channels",
                coarse.num_branches()
            ));
        }
        if fine.kind() != FilterKind::Fir {
            bad.push("fine prototype must be FIR".to_string());
        }
        if fine.num_branches() != channel_plan.num_fine {
            bad.push(format!(
                "fine prototype has {} branches, channel plan needs {}",
                fine.num_branches(),
                channel_plan.num_fine
            ));
        }
        if (channel_plan.subband_rate - plan.inputs.channel_spacing()).abs() > 1e-9 * channel_plan.subband_rate {
            bad.push(format!(
                "channel plan rate {} differs from f_s/N = {}",
                channel_plan.subband_rate,
                plan.inputs.channel_spacing()
            ));
        }
        occupied.sort_unstable();
        occupied.dedup();
        for &c in &occupied {
            let edge = c == 0 || c == n / 2;
            if c > n / 2 || (edge && !allow_edge_channels) {
                bad.push(format!("sub-band {c} cannot be occupied"));
            }
        }
        if !bad.is_empty() {
            return Err(ChanneliserError::Config(bad.join("; ")));
        }
        Ok(Self {
            plan,
            coarse,
            fine,
            channel_plan,
            occupied,
        })
    }

    pub fn num_coarse(&self) -> usize {
        self.plan.inputs.num_channels
    }

    pub fn sample_rate(&self) -> f64 {
        self.plan.inputs.sample_rate
    }

    /// Fine channel total over occupied sub-bands, and the N_c·N_f figure.
    pub fn fine_channel_counts(&self) -> (usize, usize) {
        let nf = self.channel_plan.num_fine;
        (self.occupied.len() * nf, self.num_coarse() / 2 * nf)
    }

    /// Full-rate delay of coarse+fine analysis and synthesis.
    pub fn structural_delay(&self) -> usize {
        cascade_delay(&self.coarse) + self.num_coarse() * cascade_delay(&self.fine)
    }
}

fn check_rate(expected: f64, got: f64) -> Result<(), ChanneliserError> {
    if (expected - got).abs() > 1e-9 * expected {
        return Err(ChanneliserError::Rate { expected, got });
    }
    Ok(())
}

/// All N coarse outputs as rows (channel-major), input zero-padded to whole frames.
pub fn coarse_analyze_all(
    cfg: &ChanneliserConfig,
    stacked: &SignalBuffer,
) -> Result<Vec<Vec<C>>, ChanneliserError> {
    check_rate(cfg.sample_rate(), stacked.rate)?;
    let x = stacked
        .as_real()
        .ok_or_else(|| ChanneliserError::Config("coarse input must be real".into()))?;
    let n = cfg.num_coarse();
    let frames = x.len().div_ceil(n);
    let mut bank = AnalysisBank::new(cfg.coarse.clone());
    let mut out = vec![Vec::with_capacity(frames); n];
    let mut block = vec![0.0; n];
    for k in 0..frames {
        let end = ((k + 1) * n).min(x.len());
        block.fill(0.0);
        block[..end - k * n].copy_from_slice(&x[k * n..end]);
        let f = bank.process_real(&block).expect("block size is N");
        for (row, v) in out.iter_mut().zip(f.values) {
            row.push(v);
        }
    }
    Ok(out)
}

/// Occupied coarse outputs at f_s/N, in the order of `cfg.occupied`.
pub fn coarse_analyze(
    cfg: &ChanneliserConfig,
    stacked: &SignalBuffer,
) -> Result<Vec<SignalBuffer>, ChanneliserError> {
    let mut all = coarse_analyze_all(cfg, stacked)?;
    let rate = cfg.plan.inputs.channel_spacing();
    Ok(cfg
        .occupied
        .iter()
        .map(|&c| SignalBuffer::complex(std::mem::take(&mut all[c]), rate, format!("coarse{c}")))
        .collect())
}

/// Restack occupied sub-bands into the real f_s signal.
pub fn coarse_synthesize(
    cfg: &ChanneliserConfig,
    subbands: &[SignalBuffer],
) -> Result<SignalBuffer, ChanneliserError> {
    let n = cfg.num_coarse();
    if subbands.len() != cfg.occupied.len() {
        return Err(ChanneliserError::Config(format!(
            "{} sub-band buffers for {} occupied channels",
            subbands.len(),
            cfg.occupied.len()
        )));
    }
    let rate = cfg.plan.inputs.channel_spacing();
    let mut len = None;
    let mut rows = Vec::with_capacity(subbands.len());
    for b in subbands {
        check_rate(rate, b.rate)?;
        let v = b
            .as_complex()
            .ok_or_else(|| ChanneliserError::Config("sub-band buffers must be complex".into()))?;
        if *len.get_or_insert(v.len()) != v.len() {
            return Err(ChanneliserError::Config("sub-band buffers differ in length".into()));
        }
        rows.push(v);
    }
    let frames = len.unwrap_or(0);
    let mut bank = SynthesisBank::new(cfg.coarse.clone());
    let mut y = Vec::with_capacity(frames * n);
    let mut frame = vec![ZERO; n];
    for k in 0..frames {
        frame.fill(ZERO);
        for (&c, row) in cfg.occupied.iter().zip(&rows) {
            frame[c] = row[k];
            if c != 0 && c != n / 2 {
                frame[n - c] = row[k].conj();
            }
        }
        let out = bank.process(&frame).expect("frame size is N");
        y.extend(out.iter().map(|v| v.re));
    }
    Ok(SignalBuffer::real(y, cfg.sample_rate(), "coarse_synth"))
}

/// N_f fine channel streams at the granularity rate.
pub fn fine_analyze(
    cfg: &ChanneliserConfig,
    subband: &SignalBuffer,
) -> Result<Vec<SignalBuffer>, ChanneliserError> {
    check_rate(cfg.channel_plan.subband_rate, subband.rate)?;
    let x = subband
        .as_complex()
        .ok_or_else(|| ChanneliserError::Config("fine input must be complex".into()))?;
    let nf = cfg.channel_plan.num_fine;
    let frames = x.len().div_ceil(nf);
    let mut bank = AnalysisBank::new(cfg.fine.clone());
    let mut rows = vec![Vec::with_capacity(frames); nf];
    let mut block = vec![ZERO; nf];
    for k in 0..frames {
        let end = ((k + 1) * nf).min(x.len());
        block.fill(ZERO);
        block[..end - k * nf].copy_from_slice(&x[k * nf..end]);
        let f = bank.process(&block).expect("block size is N_f");
        for (row, v) in rows.iter_mut().zip(f.values) {
            row.push(v);
        }
    }
    let rate = cfg.channel_plan.granularity;
    Ok(rows
        .into_iter()
        .enumerate()
        .map(|(l, r)| SignalBuffer::complex(r, rate, format!("{}_fine{l}", subband.label)))
        .collect())
}

pub fn fine_synthesize(
    cfg: &ChanneliserConfig,
    channels: &[SignalBuffer],
) -> Result<SignalBuffer, ChanneliserError> {
    let nf = cfg.channel_plan.num_fine;
    if channels.len() != nf {
        return Err(ChanneliserError::Config(format!(
            "{} fine streams, expected {nf}",
            channels.len()
        )));
    }
    let mut rows = Vec::with_capacity(nf);
    for c in channels {
        check_rate(cfg.channel_plan.granularity, c.rate)?;
        rows.push(
            c.as_complex()
                .ok_or_else(|| ChanneliserError::Config("fine streams must be complex".into()))?,
        );
    }
    let frames = rows[0].len();
    if rows.iter().any(|r| r.len() != frames) {
        return Err(ChanneliserError::Config("fine streams differ in length".into()));
    }
    let mut bank = SynthesisBank::new(cfg.fine.clone());
    let mut y = Vec::with_capacity(frames * nf);
    let mut frame = vec![ZERO; nf];
    for k in 0..frames {
        for (f, r) in frame.iter_mut().zip(&rows) {
            *f = r[k];
        }
        y.extend(bank.process(&frame).expect("frame size is N_f"));
    }
    Ok(SignalBuffer::complex(y, cfg.channel_plan.subband_rate, "fine_synth"))
}

/// Unit-power fine-grid elements for every occupied sub-band, stacked at f_s.
/// `len` is the per-element length at f_s/N.
pub fn stacked_stimulus(
    cfg: &ChanneliserConfig,
    len: usize,
    seed: u64,
) -> Result<(Vec<ElementSignal>, SignalBuffer), ChanneliserError> {
    let shape = StimulusShape::FineGrid {
        granularity_hz: cfg.channel_plan.granularity,
        guard_fraction: cfg.channel_plan.guardband_fraction,
    };
    let elements: Vec<ElementSignal> = cfg
        .occupied
        .iter()
        .map(|&n| generate_subband_signal(n, &cfg.plan, len, seed, shape))
        .collect::<Result<_, _>>()?;
    let x = stack_baseband_equivalent(&elements, &cfg.plan, len)?;
    Ok((elements, x))
}

#[derive(Debug, Clone, Default)]
pub struct EndToEndOptions {
    pub adc: Option<AdcModel>,
    pub snr_db: Option<f64>,
    pub noise_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrPoint {
    pub snr_db: f64,
    pub mse_rel_fir: f64,
    pub mse_rel_iir: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub aligned_delay: usize,
    pub structural_delay: usize,
    /// Mean error power over the compared span.
    pub mse: f64,
    /// `mse` divided by the reference signal power over the same span.
    pub mse_over_signal: f64,
    pub signal_power: f64,
    /// Coarse output power per channel relative to the mean occupied channel.
    pub per_channel_leakage_db: Vec<(usize, f64)>,
    pub compared_samples: usize,
    pub saturated_samples: usize,
    pub snr_points: Vec<SnrPoint>,
}

impl MetricsReport {
    pub fn mse_rel_db(&self) -> f64 {
        10.0 * self.mse_over_signal.log10()
    }

    pub fn report(&self) -> String {
        let mut s = String::new();
        writeln!(s, "aligned_delay_samples={}", self.aligned_delay).unwrap();
        writeln!(s, "structural_delay_samples={}", self.structural_delay).unwrap();
        writeln!(s, "compared_samples={}", self.compared_samples).unwrap();
        writeln!(s, "signal_power={:e}", self.signal_power).unwrap();
        writeln!(s, "mse={:e}", self.mse).unwrap();
        writeln!(s, "mse_over_signal={:e}", self.mse_over_signal).unwrap();
        writeln!(s, "mse_over_signal_db={:.3}", self.mse_rel_db()).unwrap();
        writeln!(s, "saturated_samples={}", self.saturated_samples).unwrap();
        for (c, db) in &self.per_channel_leakage_db {
            writeln!(s, "channel={c} relative_power_db={db:.2}").unwrap();
        }
        s
    }
}

/// Integer lag in [0, max_lag] maximizing Re Σ y[k]·x[k − lag], via FFT.
pub fn xcorr_peak(x: &[f64], y: &[f64], max_lag: usize) -> Option<usize> {
    let n = x.len().max(y.len());
    if n == 0 {
        return None;
    }
    let m = (2 * n).next_power_of_two();
    let fwd = TransformPlan::new(m, Direction::Forward).unwrap();
    let pad = |v: &[f64]| {
        let mut b = vec![ZERO; m];
        for (o, &s) in b.iter_mut().zip(v) {
            *o = C::new(s, 0.0);
        }
        fwd.transform(&b).unwrap()
    };
    let (xf, yf) = (pad(x), pad(y));
    let prod: Vec<C> = yf.iter().zip(&xf).map(|(a, b)| a * b.conj()).collect();
    let r = TransformPlan::new(m, Direction::Inverse).unwrap().transform(&prod).unwrap();
    let (lag, peak) = r[..=max_lag.min(n - 1)]
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |a, (k, v)| if v.re > a.1 { (k, v.re) } else { a });
    (peak > 0.0).then_some(lag)
}

/// Intermediate signals of one end-to-end run.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub metrics: MetricsReport,
    /// Channeliser input after noise and quantization.
    pub input: SignalBuffer,
    /// Occupied coarse channel outputs.
    pub coarse: Vec<SignalBuffer>,
    pub output: SignalBuffer,
}

/// Stimulus → (AWGN) → (ADC) → coarse analysis → fine analysis → fine
/// synthesis → coarse synthesis, compared with the clean stimulus.
pub fn end_to_end(
    cfg: &ChanneliserConfig,
    stimulus: &SignalBuffer,
    opts: &EndToEndOptions,
) -> Result<MetricsReport, ChanneliserError> {
    Ok(run_pipeline(cfg, stimulus, opts)?.metrics)
}

pub fn run_pipeline(
    cfg: &ChanneliserConfig,
    stimulus: &SignalBuffer,
    opts: &EndToEndOptions,
) -> Result<PipelineOutput, ChanneliserError> {
    check_rate(cfg.sample_rate(), stimulus.rate)?;
    let clean = stimulus
        .as_real()
        .ok_or_else(|| ChanneliserError::Config("stimulus must be real".into()))?;
    let mut x = match opts.snr_db {
        Some(snr) => add_awgn(stimulus, snr, opts.noise_seed)?,
        None => stimulus.clone(),
    };
    let mut saturated = 0;
    if let Some(adc) = &opts.adc {
        let q = adc_quantize(&x, adc)?;
        saturated = q.saturated;
        x = q.signal;
    }
    let mut all = coarse_analyze_all(cfg, &x)?;
    let leakage = channel_powers(cfg, &all);
    let rate = cfg.plan.inputs.channel_spacing();
    let subbands: Vec<SignalBuffer> = cfg
        .occupied
        .iter()
        .map(|&c| SignalBuffer::complex(std::mem::take(&mut all[c]), rate, format!("coarse{c}")))
        .collect();
    drop(all);
    let rebuilt: Vec<SignalBuffer> = subbands
        .par_iter()
        .map(|sb| fine_analyze(cfg, sb).and_then(|ch| fine_synthesize(cfg, &ch)))
        .collect::<Result<_, _>>()?;
    let output = coarse_synthesize(cfg, &rebuilt)?;
    let y = output.as_real().unwrap();

    let structural = cfg.structural_delay();
    let delay = xcorr_peak(clean, y, (structural * 2).max(1))
        .unwrap_or(structural);
    let start = (2 * delay).max(structural);
    let end = clean.len().min(y.len());
    let (mut err, mut pow, mut count) = (0.0, 0.0, 0usize);
    for k in start..end {
        let r = clean[k - delay];
        err += (y[k] - r).powi(2);
        pow += r * r;
        count += 1;
    }
    if count == 0 && clean.iter().any(|&v| v != 0.0) {
        return Err(ChanneliserError::Config(format!(
            "stimulus of {} samples leaves nothing to compare after the {}-sample delay",
            clean.len(),
            delay
        )));
    }
    let mse = if count > 0 { err / count as f64 } else { 0.0 };
    let signal_power = if count > 0 { pow / count as f64 } else { 0.0 };
    let metrics = MetricsReport {
        aligned_delay: delay,
        structural_delay: structural,
        mse,
        mse_over_signal: if signal_power > 0.0 { mse / signal_power } else { 0.0 },
        signal_power,
        per_channel_leakage_db: leakage,
        compared_samples: count,
        saturated_samples: saturated,
        snr_points: Vec::new(),
    };
    Ok(PipelineOutput {
        metrics,
        input: x,
        coarse: subbands,
        output,
    })
}

fn channel_powers(cfg: &ChanneliserConfig, all: &[Vec<C>]) -> Vec<(usize, f64)> {
    let n = cfg.num_coarse();
    let p: Vec<f64> = all
        .iter()
        .map(|r| r.iter().map(|v| v.norm_sqr()).sum::<f64>() / r.len().max(1) as f64)
        .collect();
    let occ: Vec<f64> = cfg.occupied.iter().map(|&c| p[c]).collect();
    let reference = occ.iter().sum::<f64>() / occ.len().max(1) as f64;
    (0..=n / 2)
        .map(|c| {
            let db = if reference > 0.0 {
                10.0 * (p[c] / reference).max(1e-300).log10()
            } else {
                f64::NEG_INFINITY
            };
            (c, db)
        })
        .collect()
}

/// One end-to-end run per SNR for each coarse candidate. SNRs below 35 dB
/// are rejected.
pub fn awgn_sweep(
    fir: &ChanneliserConfig,
    iir: &ChanneliserConfig,
    stimulus: &SignalBuffer,
    snr_list: &[f64],
    noise_seed: u64,
    adc: Option<AdcModel>,
) -> Result<Vec<SnrPoint>, ChanneliserError> {
    if let Some(bad) = snr_list.iter().find(|&&s| !(s >= 35.0)) {
        return Err(ChanneliserError::Config(format!(
            "SNR {bad} dB below the 35 dB floor"
        )));
    }
    snr_list
        .iter()
        .map(|&snr| {
            let opts = EndToEndOptions {
                adc,
                snr_db: Some(snr),
                noise_seed,
            };
            let a = end_to_end(fir, stimulus, &opts)?;
            let b = end_to_end(iir, stimulus, &opts)?;
            Ok(SnrPoint {
                snr_db: snr,
                mse_rel_fir: a.mse_over_signal,
                mse_rel_iir: b.mse_over_signal,
            })
        })
        .collect()
}

pub fn sweep_csv(points: &[SnrPoint]) -> String {
    let mut s = String::from("snr_db,mse_rel_db_fir,mse_rel_db_iir\n");
    for p in points {
        writeln!(
            s,
            "{},{:.4},{:.4}",
            p.snr_db,
            10.0 * p.mse_rel_fir.max(1e-300).log10(),
            10.0 * p.mse_rel_iir.max(1e-300).log10()
        )
        .unwrap();
    }
    s
}
