mod common;

use common::*;
use proptest::prelude::*;
use stackchan::filter_design::*;
use std::f64::consts::PI;

fn fir_mag(h: &[f64], f: f64) -> f64 {
    h.iter()
        .enumerate()
        .map(|(k, &c)| C::from_polar(c, -2.0 * PI * f * k as f64))
        .sum::<C>()
        .norm()
}

#[test]
fn estimator_examples() {
    assert_eq!(estimate_fir_length(0.001, 0.001, 0.1).unwrap(), 33);
    // −10log10(δp·δs) = 15 gives a zero numerator
    let d = 10f64.powf(-0.75);
    assert_eq!(estimate_fir_length(d, d, 0.1).unwrap(), 1);
    assert_eq!(estimate_iir_sections(ripple_from_attenuation_db(49.09), 6.0 / 1280.0).unwrap(), 180);
    assert_eq!(estimate_iir_sections(ripple_from_attenuation_db(20.0), 0.05).unwrap(), 0);
    assert_eq!(estimate_iir_sections(ripple_from_attenuation_db(40.0), 0.058).unwrap(), 10);
    let spec = baseline_spec(FilterKind::Fir);
    let est = estimate_fir_length(spec.passband_ripple, spec.stopband_ripple, 6.0 / 1280.0).unwrap();
    assert!((480..=720).contains(&est), "{est}");
}

#[test]
fn baseline_fir_design() {
    let p = baseline_fir();
    let spec = baseline_spec(FilterKind::Fir);
    assert!((540..=660).contains(&p.len()), "{}", p.len());
    assert!(p.is_symmetric(1e-12));
    let (fp, fa) = (spec.fp_norm(), spec.fa_norm());
    for i in 0..=4000 {
        let f = fp * i as f64 / 4000.0;
        assert!((fir_mag(p.taps(), f) - 1.0).abs() <= spec.passband_ripple * (1.0 + 1e-6));
    }
    for i in 0..=16000 {
        let f = fa + (0.5 - fa) * i as f64 / 16000.0;
        assert!(fir_mag(p.taps(), f) <= spec.stopband_ripple * (1.0 + 1e-6), "f={f}");
    }
    // no spikes for the FIR: mid first image is deep in the stopband
    assert!(20.0 * fir_mag(p.taps(), 1.5 / 20.0).log10() <= -49.0);
}

#[test]
fn small_remez_design_meets_its_spec() {
    let s = PrototypeSpec::new(1.0, 0.2, 0.3, 0.01, 0.01, 1, FilterKind::Fir).unwrap();
    let p = design_fir_equiripple(&s).unwrap();
    let est = estimate_fir_length(0.01, 0.01, 0.1).unwrap();
    assert!(p.len() >= est && p.len() <= est + 6, "{} vs {est}", p.len());
    let m = measure_fir(p.taps(), 0.2, 0.3);
    assert!(m.passband_deviation <= 0.01 && m.stopband_peak <= 0.01);

    let wide = PrototypeSpec::new(1.0, 0.2, 0.3, 0.5, 0.5, 1, FilterKind::Fir).unwrap();
    assert!((1..=3).contains(&design_fir_equiripple(&wide).unwrap().len()));
}

#[test]
fn symmetric_design_has_constant_group_delay() {
    let p = baseline_fir();
    let h = p.taps();
    let centre = (h.len() - 1) as f64 / 2.0;
    let fp = 29e6 / FS;
    // numerical group delay from the unwrapped phase of a zero-phase-corrected response
    for i in 1..50 {
        let f = fp * i as f64 / 50.0;
        let df = 1e-7;
        let ph = |f: f64| {
            h.iter()
                .enumerate()
                .map(|(k, &c)| C::from_polar(c, -2.0 * PI * f * (k as f64 - centre)))
                .sum::<C>()
                .arg()
        };
        let tau = -(ph(f + df) - ph(f - df)) / (4.0 * PI * df);
        assert!(tau.abs() < 1e-6, "f={f} residual delay {tau}");
    }
}

#[test]
fn baseline_iir_design() {
    let p = baseline_iir();
    let spec = baseline_spec(FilterKind::Iir);
    assert_eq!(p.coefficient_count(), 180);
    let m = measure_iir(p, spec.fp_norm(), spec.fa_norm());
    assert!(m.stopband_attenuation_db() >= 49.09, "{m}");
    assert!(m.passband_deviation_db() <= 1e-3, "{m}");
    assert!(m.phase_deviation_deg < 1.0, "{m}");
    for b in 1..20 {
        assert!(p.alphas(b).iter().all(|a| a.norm() <= 1.0 - 1e-6));
        for i in 0..4096 {
            let w = PI * i as f64 / 4096.0;
            assert!((p.branch_response(b, w).norm() - 1.0).abs() <= 1e-10);
        }
    }
    assert!((p.response_at(0.0).norm() - 1.0).abs() < 1e-9);
    // stopband excess is confined to the transition-band images
    let spikes = spike_intervals(20, spec.fp_norm(), spec.fa_norm());
    for i in 0..=20000 {
        let f = spec.fa_norm() + (0.5 - spec.fa_norm()) * i as f64 / 20000.0;
        if p.response_at(f).norm() > spec.stopband_ripple {
            assert!(spikes.iter().any(|&(lo, hi)| f > lo && f < hi), "f={f}");
        }
    }
}

#[test]
fn single_branch_is_a_pure_delay() {
    let s = PrototypeSpec::new(1.0, 0.2, 0.3, 0.01, 0.01, 1, FilterKind::Iir).unwrap();
    let p = design_iir_nthband_alp(&s, 3).unwrap();
    assert_eq!(p.all_alphas().len(), 0);
    for f in [0.0, 0.1, 0.37] {
        assert!((p.response_at(f) - C::from_polar(1.0, -2.0 * PI * f * 3.0)).norm() < 1e-12);
    }
}

#[test]
fn iir_estimator_tracks_own_designs() {
    // achieved N·n_FoS against the fit over 5–40 % guardbands at 50 and 60 dB
    for n in [4usize, 8] {
        for pct in [5.0, 10.0, 20.0, 40.0] {
            for att in [50.0, 60.0] {
                let df = pct / (100.0 * n as f64);
                let (fp, fa) = ((1.0 / n as f64 - df) / 2.0, (1.0 / n as f64 + df) / 2.0);
                let ds = ripple_from_attenuation_db(att);
                let s = PrototypeSpec::new(1.0, fp, fa, 0.1, ds, n, FilterKind::Iir).unwrap();
                let got = design_iir_min_sections(&s, 1, 40).unwrap().coefficient_count();
                let est = estimate_iir_sections(ds, df).unwrap();
                assert!(100 * est.abs_diff(got) <= 15 * got, "N={n} {pct}% {att} dB: est {est} got {got}");
            }
        }
    }
}

#[test]
fn coefficient_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("iir.coef");
    let p: Prototype = baseline_iir().clone().into();
    export_coefficients(&p, &path).unwrap();
    match import_coefficients(&path).unwrap() {
        Prototype::AllPass(q) => assert_eq!(q.all_alphas(), baseline_iir().all_alphas()),
        other => panic!("{other:?}"),
    }
    let fir = dir.path().join("fir.coef");
    std::fs::write(&fir, "# kind=fir\n# N=2\n0.25\n0.5\n0.25\n").unwrap();
    match import_coefficients(&fir).unwrap() {
        Prototype::Fir(f) => assert_eq!(f.taps(), &[0.25, 0.5, 0.25]),
        other => panic!("{other:?}"),
    }
    let bad = dir.path().join("bad.coef");
    std::fs::write(&bad, "# kind=iir\n# N=2 n_fos=1\n1,0,1.0\n").unwrap();
    assert!(import_coefficients(&bad).is_err());
}

#[test]
fn responses_of_trivial_filters() {
    let unit = FirPrototype::new(vec![1.0], 1).unwrap();
    for f in [0.0, 0.13, 0.5] {
        let h = unit.response_at(f);
        assert!((h.norm() - 1.0).abs() < 1e-15 && h.arg().abs() < 1e-15);
    }
    let ap = random_allpass(6, 3, 4);
    assert!((ap.response_at(0.0).norm() - 1.0).abs() < 1e-9);
}

#[test]
fn polyphase_examples() {
    assert_eq!(polyphase_decompose(&[1.0, 2.0, 3.0, 4.0], 2), vec![vec![1.0, 3.0], vec![2.0, 4.0]]);
    let h = [1.0, 2.0, 3.0];
    assert_eq!(polyphase_decompose(&h, 3), vec![vec![1.0], vec![2.0], vec![3.0]]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn recompose_inverts_decompose(seed in 0u64..1000, len in 1usize..200, n in prop::sample::select(vec![2usize, 4, 20])) {
        let h: Vec<f64> = random_complex(len, seed).iter().map(|v| v.re).collect();
        let mut back = polyphase_recompose(&polyphase_decompose(&h, n));
        prop_assert!(back.len() >= len && back.len() < len + n);
        prop_assert!(back[len..].iter().all(|&v| v == 0.0));
        back.truncate(len);
        prop_assert_eq!(back, h);
    }

    #[test]
    fn ripple_conversions_invert(db in 0.001..120.0f64) {
        let d = ripple_from_attenuation_db(db);
        prop_assert!((-20.0 * d.log10() - db).abs() < 1e-9);
        let p = ripple_from_peak_to_peak_db(db.min(3.0));
        prop_assert!((20.0 * (1.0 + p).log10() - db.min(3.0) / 2.0).abs() < 1e-9);
    }

    #[test]
    fn allpass_branches_have_unit_magnitude(seed in 0u64..500, n in 2usize..8, n_fos in 1usize..5) {
        let p = random_allpass(n, n_fos, seed);
        for b in 1..n {
            for i in 0..64 {
                let w = PI * i as f64 / 64.0;
                prop_assert!((p.branch_response(b, w).norm() - 1.0).abs() <= 1e-10);
            }
        }
        prop_assert_eq!(p.coefficient_count(), n * n_fos);
    }
}
