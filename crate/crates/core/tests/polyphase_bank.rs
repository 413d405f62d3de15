mod common;

use common::*;
use proptest::prelude::*;
use stackchan::complexity::{fir_candidate_cost, iir_candidate_cost};
use stackchan::fftcore::{dft, Direction};
use stackchan::filter_design::*;
use stackchan::polyphase_bank::*;
use std::f64::consts::PI;
use std::sync::Arc;

fn frames_of(bank: &mut AnalysisBank, x: &[C]) -> Vec<Vec<C>> {
    bank.analyze(x)
        .unwrap()
        .into_iter()
        .map(|f| f.values)
        .collect()
}

fn check_oracle(proto: Prototype, x: &[C]) {
    let n = proto.num_branches();
    let mut bank = AnalysisBank::new(Arc::new(proto.clone()));
    let frames = frames_of(&mut bank, x);
    assert_eq!(frames.len() * n, x.len());
    for l in 0..n {
        let got: Vec<C> = frames.iter().map(|f| f[l]).collect();
        let want = direct_channelize_oracle(&proto, x, l);
        let e = rel_err(&got, &want);
        assert!(e < 1e-10, "N={n} channel {l}: {e:e}");
    }
}

#[test]
fn oracle_random_fir() {
    for (i, n) in [2usize, 4, 8, 20].into_iter().enumerate() {
        let x = random_complex(4096 / n * n, 10 + i as u64);
        check_oracle(random_fir(n, 5 * n + 3, i as u64).into(), &x);
    }
}

#[test]
fn oracle_random_allpass() {
    for (i, n) in [2usize, 4, 8, 20].into_iter().enumerate() {
        let x = random_complex(4096 / n * n, 20 + i as u64);
        check_oracle(random_allpass(n, 3, i as u64).into(), &x);
    }
}

#[test]
fn oracle_designed_prototypes() {
    let x = random_complex(4080, 7);
    check_oracle(baseline_fir().clone().into(), &x);
    check_oracle(baseline_iir().clone().into(), &x);
}

#[test]
fn identity_oracle_frames() {
    let p: Prototype = FirPrototype::polyphase_identity(4).unwrap().into();
    let x: Vec<C> = (0..8).map(|k| C::new(k as f64, 0.0)).collect();
    // frame k holds x[4k], x[4k-1], x[4k-2], x[4k-3] on branches 0..3
    let blocks = [vec![0.0, 0.0, 0.0, 0.0], vec![4.0, 3.0, 2.0, 1.0]];
    for l in 0..4 {
        let y = direct_channelize_oracle(&p, &x, l);
        for (k, b) in blocks.iter().enumerate() {
            let want: C = b
                .iter()
                .enumerate()
                .map(|(j, &v)| C::from_polar(v / 4.0, 2.0 * PI * (j * l) as f64 / 4.0))
                .sum();
            assert!((y[k] - want).norm() < 1e-12);
        }
    }
}

#[test]
fn lowpass_passthrough_on_channel_zero() {
    let proto: Prototype = baseline_fir().clone().into();
    let n = 20;
    let f = 0.3 * 29e6 / FS;
    let x: Vec<C> = (0..n * 400)
        .map(|k| C::new((2.0 * PI * f * k as f64).cos(), 0.0))
        .collect();
    let y = direct_channelize_oracle(&proto, &x, 0);
    let d = baseline_fir().len() - 1;
    // group delay (L-1)/2 samples, decimated
    for k in 100..400 {
        let t = (k * n) as f64 - d as f64 / 2.0;
        let want = (2.0 * PI * f * t).cos();
        assert!((y[k].re - want).abs() < 2e-3, "k={k}");
    }
}

#[test]
fn tone_stays_in_its_channel() {
    let proto: Prototype = baseline_iir().clone().into();
    let n = 20;
    let m = 7;
    let frames = 2200;
    let x: Vec<C> = (0..n * frames)
        .map(|k| C::from_polar(1.0, 2.0 * PI * (m * k) as f64 / n as f64))
        .collect();
    let mut bank = AnalysisBank::new(Arc::new(proto));
    let out = bank.analyze(&x).unwrap();
    let mut power = vec![0.0; n];
    for f in out.iter().skip(200) {
        assert!(f.frame_index >= bank.warmup_frames() && !f.warm_up);
        for (p, v) in power.iter_mut().zip(&f.values) {
            *p += v.norm_sqr();
        }
    }
    for (l, &p) in power.iter().enumerate() {
        if l != m {
            let rel = 10.0 * (p / power[m]).log10();
            assert!(rel <= -49.0, "channel {l}: {rel:.2} dB");
        }
    }
}

#[test]
fn counters_match_models() {
    for n in [4usize, 16, 64] {
        let frames = 37;
        let l_fir = 5 * n + 1;
        let mut a = AnalysisBank::new(Arc::new(random_fir(n, l_fir, 1).into()));
        a.analyze(&random_complex(n * frames, 2)).unwrap();
        let (a1, p1) = fir_candidate_cost(n, l_fir).unwrap();
        let c = a.counters();
        assert_eq!(c.frames, frames as u64);
        assert_eq!(c.real_adds(), frames as f64 * a1);
        assert_eq!(c.real_mults(), frames as f64 * p1);

        let n_fos = 3;
        let mut b = AnalysisBank::new(Arc::new(random_allpass(n, n_fos, 3).into()));
        b.analyze(&random_complex(n * frames, 4)).unwrap();
        let (a2, p2) = iir_candidate_cost(n, n * n_fos).unwrap();
        let c = b.counters();
        assert_eq!(c.real_adds(), frames as f64 * a2);
        assert_eq!(c.real_mults(), frames as f64 * p2);
        assert_eq!(c.filter_adds, 2 * c.filter_mults);

        b.reset();
        assert_eq!(b.counters(), OperationCounters::default());
    }
}

#[test]
fn counter_hand_examples() {
    let mut bank = AnalysisBank::new(Arc::new(random_fir(16, 320, 9).into()));
    bank.process(&random_complex(16, 1)).unwrap();
    let c = bank.counters();
    assert_eq!((c.real_adds(), c.real_mults()), (896.0, 736.0));

    let mut bank = AnalysisBank::new(Arc::new(random_allpass(16, 10, 9).into()));
    bank.process(&random_complex(16, 1)).unwrap();
    let c = bank.counters();
    assert_eq!((c.real_adds(), c.real_mults()), (888.0, 396.0));
}

#[test]
fn identity_round_trip_is_a_delay() {
    let n = 4;
    let proto = Arc::new(Prototype::from(FirPrototype::polyphase_identity(n).unwrap()));
    let mut a = AnalysisBank::new(proto.clone());
    let mut s = SynthesisBank::new(proto);
    let d = s.cascade_delay();
    assert_eq!(d, 4);
    let x = random_complex(n * 64, 5);
    let frames = frames_of(&mut a, &x);
    let y = s.synthesize(&frames).unwrap();
    for k in d..x.len() {
        assert!((y[k] - x[k - d]).norm() < 1e-12);
    }
}

/// Complex noise confined to |f − l/N| < f_p for every channel l.
fn passband_noise(len: usize, n: usize, fp: f64, seed: u64) -> Vec<C> {
    let raw = random_complex(len, seed);
    let mut spec = dft(&raw, Direction::Forward).unwrap();
    for (i, v) in spec.iter_mut().enumerate() {
        let f = i as f64 / len as f64;
        let off = (f * n as f64 - (f * n as f64).round()).abs() / n as f64;
        if off >= fp {
            *v = C::new(0.0, 0.0);
        }
    }
    dft(&spec, Direction::Inverse).unwrap()
}

fn round_trip_mse(proto: Prototype, x: &[C]) -> f64 {
    let proto = Arc::new(proto);
    let mut a = AnalysisBank::new(proto.clone());
    let mut s = SynthesisBank::new(proto);
    let d = s.cascade_delay();
    let frames = frames_of(&mut a, x);
    let y = s.synthesize(&frames).unwrap();
    let skip = 4 * d;
    let tail = x.len() / 8;
    let range = skip..x.len() - tail;
    let err: f64 = range.clone().map(|k| (y[k] - x[k - d]).norm_sqr()).sum();
    let pow: f64 = range.map(|k| x[k - d].norm_sqr()).sum();
    err / pow
}

#[test]
fn designed_round_trip_error_is_alias_limited() {
    // leakage through one stopband on analysis and synthesis, summed over
    // the N−1 images, bounds the aligned error power
    let x = passband_noise(20 * 1600, 20, 29e6 / FS, 11);
    let fir = baseline_fir();
    let ds = fir.spec().unwrap().stopband_ripple;
    let e = round_trip_mse(fir.clone().into(), &x);
    assert!(e < 4.0 * 19.0 * ds * ds, "FIR {e:e}");
    let iir = baseline_iir();
    let ds = iir.spec().unwrap().stopband_ripple;
    let e = round_trip_mse(iir.clone().into(), &x);
    assert!(e < 4.0 * 19.0 * ds * ds, "IIR {e:e}");
}

#[test]
fn framing_errors() {
    let mut a = AnalysisBank::new(Arc::new(random_fir(4, 9, 0).into()));
    assert_eq!(
        a.process(&random_complex(3, 0)).unwrap_err(),
        BankError::Framing { expected: 4, got: 3 }
    );
    assert!(a.analyze(&random_complex(10, 0)).is_err());
    let mut s = SynthesisBank::new(Arc::new(random_fir(4, 9, 0).into()));
    assert!(s.process(&random_complex(5, 0)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn allpass_branches_are_linear(seed in 0u64..1000, n in 2usize..9, frames in 1usize..40) {
        let proto = Arc::new(Prototype::from(random_allpass(n, 3, seed)));
        let x = random_complex(n * frames, seed + 1);
        let y = random_complex(n * frames, seed + 2);
        let sum: Vec<C> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let mut bank = AnalysisBank::new(proto);
        let fx = frames_of(&mut bank, &x);
        bank.reset();
        let fy = frames_of(&mut bank, &y);
        bank.reset();
        let fs = frames_of(&mut bank, &sum);
        for k in 0..frames {
            for l in 0..n {
                prop_assert!((fx[k][l] + fy[k][l] - fs[k][l]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn rate_bookkeeping(n in 1usize..12, frames in 0usize..30, taps in 1usize..40) {
        let mut bank = AnalysisBank::new(Arc::new(random_fir(n, taps, 3).into()));
        let out = bank.analyze(&random_complex(n * frames, 4)).unwrap();
        prop_assert_eq!(out.len(), frames);
        prop_assert_eq!(bank.counters().frames as usize, frames);
        prop_assert_eq!(bank.commutator_phase(), 0);
        for (k, f) in out.iter().enumerate() {
            prop_assert_eq!(f.frame_index as usize, k);
            prop_assert_eq!(f.warm_up, (k as u64) < bank.warmup_frames());
        }
    }

    #[test]
    fn zero_input_after_reset(seed in 0u64..100) {
        let mut bank = AnalysisBank::new(Arc::new(random_allpass(4, 2, seed).into()));
        bank.analyze(&random_complex(40, seed)).unwrap();
        bank.reset();
        for f in bank.analyze(&vec![C::new(0.0, 0.0); 40]).unwrap() {
            prop_assert!(f.values.iter().all(|v| v.norm() == 0.0));
        }
    }
}
