//! Acceptance criteria, run in order. Each prints one
//! `PASS`/`FAIL criterion k: ...` line; any failure makes the target fail.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use common::*;
use rand::Rng;
use stackchan::channeliser::*;
use stackchan::complexity::*;
use stackchan::fftcore::{Direction, TransformPlan};
use stackchan::filter_design::*;
use stackchan::frontend_sim::*;
use stackchan::polyphase_bank::*;
use stackchan::stacking_planner::*;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

struct Outcome {
    ok: bool,
    limit: Duration,
    detail: String,
}

fn outcome(ok: bool, limit_s: u64, detail: String) -> Outcome {
    Outcome {
        ok,
        limit: Duration::from_secs(limit_s),
        detail,
    }
}

fn main() {
    let criteria: [(u32, fn() -> Outcome); 11] = [
        (1, criterion_01_stacking_plan),
        (2, criterion_02_iir_length_estimate),
        (3, criterion_03_fir_length),
        (4, criterion_04_iir_prototype),
        (5, criterion_05_oracle_equivalence),
        (6, criterion_06_counters_and_sweep),
        (7, criterion_07_fold_algebra),
        (8, criterion_08_end_to_end),
        (9, criterion_09_awgn_sweep),
        (10, criterion_10_guardband_budget),
        (11, criterion_11_fft_core),
    ];
    let mut passed = 0;
    for (k, run) in criteria {
        let t = Instant::now();
        let (pass, detail) = match std::panic::catch_unwind(run) {
            Ok(o) => {
                let took = t.elapsed();
                (
                    o.ok && took < o.limit,
                    format!("{} [{:.2}s, limit {}s]", o.detail, took.as_secs_f64(), o.limit.as_secs()),
                )
            }
            Err(_) => (false, "panicked".to_string()),
        };
        println!("{} criterion {k}: {detail}", if pass { "PASS" } else { "FAIL" });
        passed += pass as usize;
    }
    println!("acceptance: {passed}/{} criteria passed", criteria.len());
    if passed != criteria.len() {
        std::process::exit(1);
    }
}

fn section_iii(zone: u32) -> StackingInputs {
    StackingInputs {
        sample_rate: FS,
        master_oscillator: 10e6,
        rf_centre: 1650.75e6,
        nyquist_zone: zone,
        bandwidth: 48.5e6,
        num_channels: 20,
    }
}

/// Brute-force β search: every β whose F lands in [0, f_s/2], closest to n·f_s/N.
fn exhaustive_offsets(inp: &StackingInputs) -> Vec<f64> {
    let rho = (inp.nyquist_zone / 2) as f64;
    let s = if 2.0 * rho - inp.nyquist_zone as f64 + 0.5 > 0.0 { 1.0 } else { -1.0 };
    let c = inp.rf_centre - rho * inp.sample_rate;
    let limit = ((c.abs() + inp.sample_rate) / inp.master_oscillator) as u64 + 2;
    (1..inp.num_channels / 2)
        .map(|n| {
            let target = n as f64 * inp.sample_rate / inp.num_channels as f64;
            (1..=limit)
                .map(|b| s * (b as f64 * inp.master_oscillator - c))
                .filter(|f| (0.0..=inp.sample_rate / 2.0).contains(f))
                .map(|f| (f - target).abs())
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

fn criterion_01_stacking_plan() -> Outcome {
    let inp = section_iii(2);
    let plan = plan_stacking(&inp).unwrap();
    let oracle = exhaustive_offsets(&inp);
    let edges = plan.passband_edge == 29e6 && plan.stopband_edge == 35e6;
    let phis = plan.offsets == oracle;
    outcome(
        edges && phis,
        1,
        format!(
            "f_p={} Hz f_a={} Hz (want 29e6/35e6), phi list matches exhaustive search: {phis}",
            plan.passband_edge, plan.stopband_edge
        ),
    )
}

fn criterion_02_iir_length_estimate() -> Outcome {
    let l = estimate_iir_sections(ripple_from_attenuation_db(49.09), 6.0 / 1280.0).unwrap();
    outcome(
        l.abs_diff(180) <= 1,
        1,
        format!("L_IIR estimate {l} (want 180 +/- 1)"),
    )
}

/// |H(f)| by direct summation.
fn fir_mag(h: &[f64], f: f64) -> f64 {
    h.iter()
        .enumerate()
        .map(|(k, &c)| C::from_polar(c, -2.0 * PI * f * k as f64))
        .sum::<C>()
        .norm()
}

fn criterion_03_fir_length() -> Outcome {
    let spec = baseline_spec(FilterKind::Fir);
    let est = estimate_fir_length(spec.passband_ripple, spec.stopband_ripple, 6.0 / 1280.0).unwrap();
    let p = design_fir_equiripple(&spec).unwrap();
    let h = p.taps();
    let (fp, fa) = (spec.fp_norm(), spec.fa_norm());
    let grid = 8192;
    let pass = (0..=grid)
        .map(|i| (fir_mag(h, fp * i as f64 / grid as f64) - 1.0).abs())
        .fold(0.0, f64::max);
    let stop = (0..=4 * grid)
        .map(|i| fir_mag(h, fa + (0.5 - fa) * i as f64 / (4 * grid) as f64))
        .fold(0.0, f64::max);
    let met = pass <= spec.passband_ripple * (1.0 + 1e-6) && stop <= spec.stopband_ripple * (1.0 + 1e-6);
    let est_ok = (est as f64 - 600.0).abs() <= 120.0;
    let len_ok = (p.len() as f64 - 600.0).abs() <= 60.0;
    outcome(
        est_ok && len_ok && met,
        120,
        format!(
            "estimate {est} (600 +/- 20%), designed length {} (600 +/- 10%), passband dev {pass:.3e} <= {:.3e}, stopband {:.2} dB >= 51.42 dB",
            p.len(),
            spec.passband_ripple,
            -20.0 * stop.log10()
        ),
    )
}

/// H(e^{j2πf}) = (1/N) Σ_n e^{-j2πfn} A_n(e^{j2πfN}), evaluated from the raw α.
fn allpass_response(p: &AllPassPrototype, f: f64) -> C {
    let n_b = p.num_branches();
    let w = 2.0 * PI * f * n_b as f64;
    let zi = C::from_polar(1.0, -w);
    let mut sum = C::from_polar(1.0, -w * p.n_fos() as f64);
    for (i, branch) in p.all_alphas().iter().enumerate() {
        let a: C = branch.iter().map(|al| (al + zi) / (1.0 + al * zi)).product();
        sum += C::from_polar(1.0, -2.0 * PI * f * (i + 1) as f64) * a;
    }
    sum / n_b as f64
}

fn criterion_04_iir_prototype() -> Outcome {
    let spec = baseline_spec(FilterKind::Iir);
    let p = design_iir_nthband_alp(&spec, 9).unwrap();
    let (fp, fa, n) = (spec.fp_norm(), spec.fa_norm(), 20.0);
    let in_spike = |f: f64| {
        (1..=10).any(|k| {
            let c = k as f64 / n;
            (f > c - fa && f < c - fp) || (f > c + fp && f < c + fa)
        })
    };
    let points = 1 << 15;
    let mut stop = 0.0f64;
    for i in 0..=points {
        let f = fa + (0.5 - fa) * i as f64 / points as f64;
        if !in_spike(f) {
            stop = stop.max(allpass_response(&p, f).norm());
        }
    }
    let pass_pts = 2048;
    let mut mags = Vec::new();
    let mut phases = Vec::new();
    let mut prev = 0.0;
    let mut unwrap = 0.0;
    for i in 0..=pass_pts {
        let f = fp * i as f64 / pass_pts as f64;
        let h = allpass_response(&p, f);
        mags.push(h.norm());
        let ph = h.arg();
        if i > 0 {
            let d = ph - prev;
            unwrap -= 2.0 * PI * (d / (2.0 * PI)).round();
        }
        prev = ph;
        phases.push((f, ph + unwrap));
    }
    let dev_db = mags.iter().map(|m| (20.0 * m.log10()).abs()).fold(0.0, f64::max);
    let m = phases.len() as f64;
    let (sx, sy) = phases.iter().fold((0.0, 0.0), |a, &(x, y)| (a.0 + x, a.1 + y));
    let (mx, my) = (sx / m, sy / m);
    let slope = phases.iter().map(|&(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / phases.iter().map(|&(x, _)| (x - mx).powi(2)).sum::<f64>();
    let phase_dev = phases
        .iter()
        .map(|&(x, y)| (y - (my + slope * (x - mx))).abs())
        .fold(0.0, f64::max)
        .to_degrees();
    let att = -20.0 * stop.log10();
    outcome(
        att >= 49.0 && dev_db <= 0.001 && phase_dev < 1.0 && p.coefficient_count() == 180,
        300,
        format!(
            "stopband {att:.2} dB (>= 49) outside spikes, passband dev {:.1} udB (<= 1000), phase dev {phase_dev:.4} deg (< 1), L_IIR {}",
            dev_db * 1e6,
            p.coefficient_count()
        ),
    )
}

fn criterion_05_oracle_equivalence() -> Outcome {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for (i, n) in [2usize, 4, 8, 20].into_iter().enumerate() {
        // 4096 samples, cut to whole frames
        let x = random_complex(4096 / n * n, 100 + i as u64);
        let mut protos: Vec<Prototype> = vec![
            random_fir(n, 6 * n + 1, i as u64).into(),
            random_allpass(n, 4, i as u64).into(),
        ];
        if n == 20 {
            protos.push(baseline_fir().clone().into());
            protos.push(baseline_iir().clone().into());
        }
        for p in protos {
            let mut bank = AnalysisBank::new(Arc::new(p.clone()));
            let frames = bank.analyze(&x).unwrap();
            for l in 0..n {
                let got: Vec<C> = frames.iter().map(|f| f.values[l]).collect();
                worst = worst.max(rel_err(&got, &direct_channelize_oracle(&p, &x, l)));
            }
            cases += 1;
        }
    }
    outcome(
        worst <= 1e-10,
        60,
        format!("{cases} bank/prototype cases, worst relative error {worst:.2e} (<= 1e-10)"),
    )
}

fn criterion_06_counters_and_sweep() -> Outcome {
    let mut ok = true;
    for n in [4usize, 16, 64] {
        let frames = 25;
        let l_fir = 8 * n;
        let mut a = AnalysisBank::new(Arc::new(random_fir(n, l_fir, 5).into()));
        a.analyze(&random_complex(n * frames, 6)).unwrap();
        let (a1, p1) = fir_candidate_cost(n, l_fir).unwrap();
        ok &= a.counters().real_adds() == frames as f64 * a1 && a.counters().real_mults() == frames as f64 * p1;

        let n_fos = 5;
        let mut b = AnalysisBank::new(Arc::new(random_allpass(n, n_fos, 7).into()));
        b.analyze(&random_complex(n * frames, 8)).unwrap();
        let (a2, p2) = iir_candidate_cost(n, n * n_fos).unwrap();
        ok &= b.counters().real_adds() == frames as f64 * a2 && b.counters().real_mults() == frames as f64 * p2;
    }
    let rows = sweep(&SweepConfig::default_schedule()).unwrap();
    let cheaper = rows.iter().all(|r| r.a2 < r.a1 && r.p2 < r.p1);
    outcome(
        ok && cheaper,
        10,
        format!(
            "counters equal models for N in {{4,16,64}}: {ok}; a2<a1 and p2<p1 on all {} sweep rows: {cheaper}",
            rows.len()
        ),
    )
}

/// Frequency of the strongest bin within ±B/2 of `centre`.
fn peak_near(psd: &[(f64, f64)], centre: f64, half: f64) -> f64 {
    psd.iter()
        .filter(|(f, _)| (f - centre).abs() <= half)
        .fold((0.0, -1.0), |a, &(f, p)| if p > a.1 { (f, p) } else { a })
        .0
}

fn criterion_07_fold_algebra() -> Outcome {
    let len = 2048;
    let mut worst_bins = 0.0f64;
    for zone in [1, 2] {
        let plan = plan_stacking(&section_iii(zone)).unwrap();
        let els: Vec<ElementSignal> = (1..=9)
            .map(|n| generate_subband_signal(n, &plan, len, 9, StimulusShape::Tone(0.0)).unwrap())
            .collect();
        for x in [
            stack_baseband_equivalent(&els, &plan, len).unwrap(),
            simulate_rf_chain(&els, &plan, len, 4).unwrap(),
        ] {
            let psd = periodogram(&x);
            let bin = x.rate / x.len() as f64;
            for &centre in &plan.centres {
                let f = peak_near(&psd, centre, plan.inputs.bandwidth / 2.0);
                worst_bins = worst_bins.max((f - centre).abs() / bin);
            }
        }
    }
    outcome(
        worst_bins <= 1.0,
        120,
        format!("worst sub-band centre error {worst_bins:.3} FFT bins over zones 1,2 and both paths (<= 1)"),
    )
}

fn desk_config(coarse: Prototype) -> ChanneliserConfig {
    static FINE: OnceLock<Arc<Prototype>> = OnceLock::new();
    let cp = ChannelPlan::desk(64e6);
    let fine = FINE
        .get_or_init(|| Arc::new(design_fine_prototype(&cp).unwrap().into()))
        .clone();
    ChanneliserConfig::new(
        plan_stacking(&section_iii(2)).unwrap(),
        Arc::new(coarse),
        fine,
        cp,
        (1..=9).collect(),
        false,
    )
    .unwrap()
}

fn criterion_08_end_to_end() -> Outcome {
    let fir = desk_config(baseline_fir().clone().into());
    let iir = desk_config(baseline_iir().clone().into());
    let (_, x) = stacked_stimulus(&fir, 32768, 1).unwrap();
    let a = end_to_end(&fir, &x, &EndToEndOptions::default()).unwrap();
    let b = end_to_end(&iir, &x, &EndToEndOptions::default()).unwrap();
    let (ea, eb) = (a.mse_over_signal, b.mse_over_signal);
    let ratio = ea.max(eb) / ea.min(eb);
    outcome(
        ea <= 1e-5 && eb <= 1e-5 && ratio <= 2.0,
        300,
        format!("relative MSE FIR {ea:.3e}, IIR {eb:.3e} (each <= 1e-5), ratio {ratio:.2} (<= 2)"),
    )
}

fn criterion_09_awgn_sweep() -> Outcome {
    let fir = desk_config(baseline_fir().clone().into());
    let iir = desk_config(baseline_iir().clone().into());
    let (_, x) = stacked_stimulus(&fir, 32768, 1).unwrap();
    let pts = awgn_sweep(&fir, &iir, &x, &[35.0, 45.0, 55.0, 65.0, 75.0], 7, None).unwrap();
    let db = |v: f64| 10.0 * v.log10();
    let monotone = pts.windows(2).all(|w| {
        w[1].mse_rel_fir <= w[0].mse_rel_fir && w[1].mse_rel_iir <= w[0].mse_rel_iir
    });
    let gap = pts
        .iter()
        .filter(|p| p.snr_db >= 45.0)
        .map(|p| (db(p.mse_rel_fir) - db(p.mse_rel_iir)).abs())
        .fold(0.0, f64::max);
    let at35 = pts[0];
    outcome(
        monotone && gap <= 1.0,
        600,
        format!(
            "monotone: {monotone}, max candidate gap at >= 45 dB {gap:.2} dB (<= 1), at 35 dB FIR {:.2} dB IIR {:.2} dB",
            db(at35.mse_rel_fir),
            db(at35.mse_rel_iir)
        ),
    )
}

fn criterion_10_guardband_budget() -> Outcome {
    let g = guardband_percentage(6.0 / 1280.0, 20).unwrap();
    let mut r = rng(10);
    let mut linear = true;
    for _ in 0..1000 {
        let n = r.gen_range(2..200usize);
        let max = 1.0 / n as f64;
        let (a, b) = (r.gen_range(0.0..max / 2.0), r.gen_range(0.0..max / 2.0));
        if a == 0.0 || b == 0.0 {
            continue;
        }
        let (ga, gb, gs) = (
            guardband_percentage(a, n).unwrap(),
            guardband_percentage(b, n).unwrap(),
            guardband_percentage(a + b, n).unwrap(),
        );
        let k = r.gen_range(0.1..1.0);
        let gk = guardband_percentage(k * a, n).unwrap();
        linear &= (gs - ga - gb).abs() <= 1e-9 * gs && (gk - k * ga).abs() <= 1e-9 * ga;
        linear &= (ga - 100.0 * n as f64 * a).abs() <= 1e-9 * ga;
    }
    outcome(
        (g - 9.375).abs() < 1e-12 && linear,
        1,
        format!("guardband_percentage(6/1280, 20) = {g} (want 9.375), linearity over 1000 random cases: {linear}"),
    )
}

fn naive_dft(x: &[C]) -> Vec<C> {
    let n = x.len();
    (0..n)
        .map(|m| {
            x.iter()
                .enumerate()
                .map(|(k, v)| v * C::from_polar(1.0, -2.0 * PI * ((k * m) % n) as f64 / n as f64))
                .sum()
        })
        .collect()
}

fn criterion_11_fft_core() -> Outcome {
    let (mut rt, mut pars, mut orc) = (0.0f64, 0.0f64, 0.0f64);
    for (i, n) in [1usize, 2, 3, 5, 7, 13, 20, 64, 100, 1000, 1280, 2048, 4096].into_iter().enumerate() {
        let x = random_complex(n, 200 + i as u64);
        let fwd = TransformPlan::new(n, Direction::Forward).unwrap();
        let inv = TransformPlan::new(n, Direction::Inverse).unwrap();
        let big = fwd.transform(&x).unwrap();
        let back = inv.transform(&big).unwrap();
        rt = rt.max(x.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max));
        let ex: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        let eb: f64 = big.iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64;
        pars = pars.max((ex - eb).abs() / ex);
        if n <= 2048 {
            orc = orc.max(rel_err(&big, &naive_dft(&x)));
        }
    }
    outcome(
        rt <= 1e-10 && pars <= 1e-10 && orc <= 1e-10,
        60,
        format!("round trip {rt:.2e}, Parseval {pars:.2e}, direct oracle {orc:.2e} (all <= 1e-10) incl. sizes 20, 1280, 2048"),
    )
}
