use crate::config::RunConfig;
use crate::CliError;
use stackchan::channeliser::{
    awgn_sweep, design_fine_prototype, run_pipeline, stacked_stimulus, sweep_csv, ChanneliserConfig,
    ChanneliserError, EndToEndOptions,
};
use stackchan::complexity::{sweep as complexity_sweep, sweep_csv as complexity_csv, SweepConfig};
use stackchan::filter_design::{
    design_fir_equiripple, design_iir_nthband_alp, export_coefficients, measure_fir, measure_iir,
    ripple_from_attenuation_db, ripple_from_peak_to_peak_db, DesignError, DesignMetrics, FilterKind,
    Prototype, PrototypeSpec,
};
use stackchan::frontend_sim::{periodogram, spectrum_csv, write_signal, AdcModel, SignalBuffer};
use stackchan::stacking_planner::{plan_stacking, FrequencyPlan};
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

/// Spectra written to CSV are averaged down to at most this many bins.
const SPECTRUM_BINS: usize = 4096;

fn runtime<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Runtime(e.to_string())
}

fn design_err(e: DesignError) -> CliError {
    CliError::Design(e.to_string())
}

fn chan_err(e: ChanneliserError) -> CliError {
    match e {
        ChanneliserError::Design(d) => design_err(d),
        ChanneliserError::Config(m) => CliError::Config(vec![m]),
        other => runtime(other),
    }
}

fn write(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    let p = dir.join(name);
    std::fs::write(&p, text).map_err(|e| CliError::Runtime(format!("{}: {e}", p.display())))
}

fn frequency_plan(cfg: &RunConfig) -> Result<FrequencyPlan, CliError> {
    plan_stacking(&cfg.plan).map_err(|e| CliError::Config(vec![format!("plan: {e}")]))
}

fn coarse_spec(cfg: &RunConfig, plan: &FrequencyPlan, kind: FilterKind) -> Result<PrototypeSpec, CliError> {
    PrototypeSpec::new(
        cfg.plan.sample_rate,
        plan.passband_edge,
        plan.stopband_edge,
        ripple_from_peak_to_peak_db(cfg.coarse.passband_ripple_db),
        ripple_from_attenuation_db(cfg.coarse.stopband_db),
        cfg.plan.num_channels,
        kind,
    )
    .map_err(|e| CliError::Config(vec![format!("coarse: {e}")]))
}

fn design_coarse(
    cfg: &RunConfig,
    plan: &FrequencyPlan,
    kind: FilterKind,
) -> Result<(Prototype, DesignMetrics), CliError> {
    let spec = coarse_spec(cfg, plan, kind)?;
    match kind {
        FilterKind::Fir => {
            let p = design_fir_equiripple(&spec).map_err(design_err)?;
            let m = measure_fir(p.taps(), spec.fp_norm(), spec.fa_norm());
            Ok((p.into(), m))
        }
        FilterKind::Iir => {
            let p = design_iir_nthband_alp(&spec, cfg.coarse.n_fos).map_err(design_err)?;
            let m = measure_iir(&p, spec.fp_norm(), spec.fa_norm());
            Ok((p.into(), m))
        }
    }
}

fn channeliser(cfg: &RunConfig, plan: &FrequencyPlan, kind: FilterKind) -> Result<ChanneliserConfig, CliError> {
    let cp = cfg.channel_plan().map_err(|e| CliError::Config(vec![format!("fine: {e}")]))?;
    let (coarse, _) = design_coarse(cfg, plan, kind)?;
    let fine = design_fine_prototype(&cp).map_err(chan_err)?;
    ChanneliserConfig::new(
        plan.clone(),
        Arc::new(coarse),
        Arc::new(fine.into()),
        cp,
        cfg.sim.occupied_subbands.clone(),
        false,
    )
    .map_err(chan_err)
}

fn kind_name(kind: FilterKind) -> &'static str {
    match kind {
        FilterKind::Fir => "fir",
        FilterKind::Iir => "iir",
    }
}

/// Average adjacent bins so the CSV stays a manageable size.
fn compact(psd: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    let group = psd.len().div_ceil(SPECTRUM_BINS).max(1);
    if group == 1 {
        return psd;
    }
    psd.chunks(group)
        .map(|c| {
            let n = c.len() as f64;
            (c.iter().map(|b| b.0).sum::<f64>() / n, c.iter().map(|b| b.1).sum::<f64>() / n)
        })
        .collect()
}

fn spectrum(x: &SignalBuffer) -> String {
    spectrum_csv(&compact(periodogram(x)))
}

fn adc_model(cfg: &RunConfig, x: &SignalBuffer) -> Result<Option<AdcModel>, CliError> {
    let Some(bits) = cfg.sim.adc_bits else {
        return Ok(None);
    };
    let rms = x.power().sqrt();
    let full_scale = if rms > 0.0 { rms * 10f64.powf(cfg.sim.adc_backoff_db / 20.0) } else { 1.0 };
    AdcModel::new(bits, full_scale, cfg.plan.sample_rate, cfg.plan.nyquist_zone)
        .map(Some)
        .map_err(|e| CliError::Config(vec![format!("sim.adc_bits: {e}")]))
}

pub fn plan(cfg: &RunConfig) -> Result<(), CliError> {
    let plan = frequency_plan(cfg)?;
    let report = plan.report();
    write(&cfg.output_dir, "plan_report.txt", &report)?;
    write(&cfg.output_dir, "plan.csv", &plan.csv())?;
    print!("{report}");
    Ok(())
}

pub fn design(cfg: &RunConfig) -> Result<(), CliError> {
    let plan = frequency_plan(cfg)?;
    let kind = cfg.coarse.prototype;
    let (coarse, m) = design_coarse(cfg, &plan, kind)?;
    let cp = cfg.channel_plan().map_err(|e| CliError::Config(vec![format!("fine: {e}")]))?;
    let fine = design_fine_prototype(&cp).map_err(chan_err)?;
    let fine_spec = *fine.spec().expect("designed prototypes carry their spec");
    let fm = measure_fir(fine.taps(), fine_spec.fp_norm(), fine_spec.fa_norm());
    let fine: Prototype = fine.into();

    let coarse_file = format!("coarse_{}.coef", kind_name(kind));
    export_coefficients(&coarse, cfg.output_dir.join(&coarse_file)).map_err(runtime)?;
    export_coefficients(&fine, cfg.output_dir.join("fine.coef")).map_err(runtime)?;

    let mut s = String::new();
    writeln!(s, "quantity,target,achieved").unwrap();
    writeln!(s, "coarse_kind,{0},{0}", kind_name(kind)).unwrap();
    writeln!(s, "coarse_num_branches,{},{}", cfg.plan.num_channels, coarse.num_branches()).unwrap();
    writeln!(s, "coarse_fp_hz,{},{}", plan.passband_edge, plan.passband_edge).unwrap();
    writeln!(s, "coarse_fa_hz,{},{}", plan.stopband_edge, plan.stopband_edge).unwrap();
    writeln!(
        s,
        "coarse_passband_ripple_db,{},{:.6}",
        cfg.coarse.passband_ripple_db,
        20.0 * ((1.0 + m.passband_deviation) / (1.0 - m.passband_deviation)).log10()
    )
    .unwrap();
    writeln!(s, "coarse_stopband_db,{},{:.3}", cfg.coarse.stopband_db, m.stopband_attenuation_db()).unwrap();
    writeln!(s, "coarse_phase_dev_deg,1,{:.4}", m.phase_deviation_deg).unwrap();
    writeln!(s, "coarse_coefficients,,{}", m.coefficients).unwrap();
    if kind == FilterKind::Iir {
        writeln!(s, "coarse_n_fos,{},{}", cfg.coarse.n_fos, coarse.n_fos()).unwrap();
    }
    writeln!(s, "fine_num_branches,{},{}", cp.num_fine, fine.num_branches()).unwrap();
    writeln!(s, "fine_stopband_db,80,{:.3}", fm.stopband_attenuation_db()).unwrap();
    writeln!(s, "fine_coefficients,,{}", fm.coefficients).unwrap();
    write(&cfg.output_dir, "design_report.csv", &s)?;
    print!("{s}");
    Ok(())
}

pub fn estimate(cfg: &RunConfig) -> Result<(), CliError> {
    let sweep_cfg = SweepConfig {
        passband_ripple_db: cfg.coarse.passband_ripple_db,
        stopband_attenuation_db: cfg.coarse.stopband_db,
        ..SweepConfig::default_schedule()
    };
    let rows = complexity_sweep(&sweep_cfg).map_err(|e| CliError::Config(vec![e.to_string()]))?;
    for r in &rows {
        if let Some(w) = &r.warning {
            eprintln!("warning: N={}: {w}", r.n);
        }
    }
    let csv = complexity_csv(&rows);
    write(&cfg.output_dir, "complexity.csv", &csv)?;
    print!("{csv}");
    Ok(())
}

pub fn stack(cfg: &RunConfig) -> Result<(), CliError> {
    let plan = frequency_plan(cfg)?;
    let ch = channeliser_for_stimulus(cfg, &plan)?;
    let (elements, x) = stacked_stimulus(&ch, cfg.sim.num_samples, cfg.sim.seed).map_err(chan_err)?;
    for e in &elements {
        write_signal(&cfg.output_dir.join(format!("element_{}.f64", e.n)), &e.baseband).map_err(runtime)?;
    }
    write_signal(&cfg.output_dir.join("stacked.f64"), &x).map_err(runtime)?;
    write(&cfg.output_dir, "stacked_spectrum.csv", &spectrum(&x))?;
    println!("elements={}", elements.len());
    println!("samples={}", x.len());
    println!("rate_hz={}", x.rate);
    println!("power={:e}", x.power());
    Ok(())
}

/// The stimulus needs only the plan and the fine grid, so skip the slow
/// coarse design with a trivial coarse prototype.
fn channeliser_for_stimulus(cfg: &RunConfig, plan: &FrequencyPlan) -> Result<ChanneliserConfig, CliError> {
    let cp = cfg.channel_plan().map_err(|e| CliError::Config(vec![format!("fine: {e}")]))?;
    let n = cfg.plan.num_channels;
    let coarse = stackchan::filter_design::FirPrototype::polyphase_identity(n).map_err(design_err)?;
    let fine = stackchan::filter_design::FirPrototype::polyphase_identity(cp.num_fine).map_err(design_err)?;
    ChanneliserConfig::new(
        plan.clone(),
        Arc::new(coarse.into()),
        Arc::new(fine.into()),
        cp,
        cfg.sim.occupied_subbands.clone(),
        false,
    )
    .map_err(chan_err)
}

pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    let plan = frequency_plan(cfg)?;
    let ch = channeliser(cfg, &plan, cfg.coarse.prototype)?;
    let (_, x) = stacked_stimulus(&ch, cfg.sim.num_samples, cfg.sim.seed).map_err(chan_err)?;
    let opts = EndToEndOptions {
        adc: adc_model(cfg, &x)?,
        snr_db: cfg.sim.snr_db,
        noise_seed: cfg.sim.seed.wrapping_add(1),
    };
    let out = run_pipeline(&ch, &x, &opts).map_err(chan_err)?;
    let dir = &cfg.output_dir;
    write(dir, "spectrum_input.csv", &spectrum(&out.input))?;
    for (c, sb) in ch.occupied.iter().zip(&out.coarse) {
        write(dir, &format!("spectrum_coarse_{c}.csv"), &spectrum(sb))?;
    }
    write(dir, "spectrum_output.csv", &spectrum(&out.output))?;
    let mut report = format!("coarse_kind={}\n", kind_name(cfg.coarse.prototype));
    report.push_str(&out.metrics.report());
    write(dir, "metrics.txt", &report)?;
    print!("{report}");
    Ok(())
}

pub fn sweep(cfg: &RunConfig) -> Result<(), CliError> {
    let plan = frequency_plan(cfg)?;
    let fir = channeliser(cfg, &plan, FilterKind::Fir)?;
    let iir = channeliser(cfg, &plan, FilterKind::Iir)?;
    let (_, x) = stacked_stimulus(&fir, cfg.sim.num_samples, cfg.sim.seed).map_err(chan_err)?;
    let adc = adc_model(cfg, &x)?;
    let points = awgn_sweep(&fir, &iir, &x, &cfg.sim.sweep_snr_db, cfg.sim.seed.wrapping_add(1), adc)
        .map_err(chan_err)?;
    let csv = sweep_csv(&points);
    write(&cfg.output_dir, "awgn_sweep.csv", &csv)?;
    print!("{csv}");
    Ok(())
}
