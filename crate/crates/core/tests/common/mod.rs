#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stackchan::filter_design::*;
use std::sync::OnceLock;

pub type C = Complex64;

pub const FS: f64 = 1280e6;

pub fn baseline_spec(kind: FilterKind) -> PrototypeSpec {
    let att = match kind {
        FilterKind::Fir => 51.42,
        FilterKind::Iir => 49.09,
    };
    PrototypeSpec::new(
        FS,
        29e6,
        35e6,
        ripple_from_peak_to_peak_db(0.0492),
        ripple_from_attenuation_db(att),
        20,
        kind,
    )
    .unwrap()
}

pub fn baseline_fir() -> &'static FirPrototype {
    static P: OnceLock<FirPrototype> = OnceLock::new();
    P.get_or_init(|| design_fir_equiripple(&baseline_spec(FilterKind::Fir)).unwrap())
}

pub fn baseline_iir() -> &'static AllPassPrototype {
    static P: OnceLock<AllPassPrototype> = OnceLock::new();
    P.get_or_init(|| design_iir_nthband_alp(&baseline_spec(FilterKind::Iir), 9).unwrap())
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(len: usize, seed: u64) -> Vec<C> {
    let mut r = rng(seed);
    (0..len)
        .map(|_| C::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
        .collect()
}

/// Random FIR with nonzero taps.
pub fn random_fir(n: usize, len: usize, seed: u64) -> FirPrototype {
    let mut r = rng(seed);
    let taps = (0..len)
        .map(|_| {
            let v: f64 = r.gen_range(0.1..1.0);
            if r.gen_bool(0.5) {
                v
            } else {
                -v
            }
        })
        .collect();
    FirPrototype::new(taps, n).unwrap()
}

/// Random stable all-pass bank; every other branch gets one conjugate pair.
pub fn random_allpass(n: usize, n_fos: usize, seed: u64) -> AllPassPrototype {
    let mut r = rng(seed);
    let alphas = (1..n)
        .map(|b| {
            let mut a = Vec::with_capacity(n_fos);
            if b % 2 == 0 && n_fos >= 2 {
                let z = C::from_polar(r.gen_range(0.2..0.9), r.gen_range(0.3..2.8));
                a.push(z);
                a.push(z.conj());
            }
            while a.len() < n_fos {
                a.push(C::new(r.gen_range(-0.9..0.9), 0.0));
            }
            a
        })
        .collect();
    AllPassPrototype::new(n, n_fos, alphas).unwrap()
}

pub fn rel_err(a: &[C], b: &[C]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den.max(1e-300)).sqrt()
}
