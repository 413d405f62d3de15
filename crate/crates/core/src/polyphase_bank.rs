//! Maximally decimated DFT-modulated analysis and synthesis banks.
//!
//! Analysis: branch n sees the input delayed by n samples, decimated by N,
//! i.e. `u_n[k] = x[kN − n]`. For a block `b = x[kN .. kN+N]` branch 0 takes
//! `b[0]` and branch n ≥ 1 takes `b_prev[N − n]`. With N = 2 and blocks
//! `[x0, x1], [x2, x3]`, the second frame feeds branch 0 with x2 and branch 1
//! with x1. Branch outputs go through the normalized inverse DFT, so channel l
//! of frame k equals `Σ_j h[j] e^{+j2πjl/N} x[kN − j]`: the prototype shifted
//! up by l·f_s/N, filtered and decimated.
//!
//! Synthesis: forward DFT, then output phase m is produced by synthesis branch
//! m from transform bin (N − m) mod N. The synthesis prototype is N·h shifted
//! by s = (−D) mod N samples, D being the nominal analysis-synthesis delay
//! (L − 1 for FIR, 2·N·n_FoS for the all-pass design). Every path is then an
//! integer number of frames long and the cascade delay is D + s.

use crate::complexity::ifft_cost;
use crate::fftcore::{Direction, TransformPlan};
use crate::filter_design::{polyphase_decompose, Prototype, Section};
use num_complex::Complex64;
use std::sync::Arc;
use thiserror::Error;

type C = Complex64;
const ZERO: C = C::new(0.0, 0.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BankError {
    #[error("expected {expected} samples per call, got {got}")]
    Framing { expected: usize, got: usize },
}

/// Real-operation tallies. Branch filtering is counted exactly; the
/// transform is charged per frame from the analytic butterfly model, which is
/// fractional for non-power-of-two sizes.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OperationCounters {
    pub filter_mults: u64,
    pub filter_adds: u64,
    pub transform_mults: f64,
    pub transform_adds: f64,
    pub frames: u64,
}

impl OperationCounters {
    pub fn real_mults(&self) -> f64 {
        self.filter_mults as f64 + self.transform_mults
    }

    pub fn real_adds(&self) -> f64 {
        self.filter_adds as f64 + self.transform_adds
    }
}

/// One sample per channel; `values[l]` is channel l.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelFrame {
    pub values: Vec<C>,
    pub frame_index: u64,
    pub warm_up: bool,
}

#[derive(Debug, Clone)]
enum Branch {
    Zero,
    Fir {
        taps: Vec<f64>,
        // ring of lead + taps.len() past inputs
        line: Vec<C>,
        lead: usize,
        pos: usize,
    },
    Delay {
        line: Vec<C>,
        pos: usize,
    },
    AllPass {
        sections: Vec<Section>,
        // x[-1], x[-2], y[-1], y[-2] per section
        state: Vec<[C; 4]>,
    },
}

impl Branch {
    fn fir(coeffs: &[f64]) -> Self {
        let lead = coeffs.iter().take_while(|&&c| c == 0.0).count();
        if lead == coeffs.len() {
            return Branch::Zero;
        }
        let taps = coeffs[lead..].to_vec();
        Branch::Fir {
            line: vec![ZERO; lead + taps.len()],
            taps,
            lead,
            pos: 0,
        }
    }

    fn delay(d: usize) -> Self {
        Branch::Delay {
            line: vec![ZERO; d],
            pos: 0,
        }
    }

    fn allpass(sections: Vec<Section>) -> Self {
        let state = vec![[ZERO; 4]; sections.len()];
        Branch::AllPass { sections, state }
    }

    // (real mults, real adds) per complex sample
    fn cost(&self) -> (u64, u64) {
        match self {
            Branch::Zero | Branch::Delay { .. } => (0, 0),
            Branch::Fir { taps, .. } => (2 * taps.len() as u64, 2 * (taps.len() as u64 - 1)),
            Branch::AllPass { sections, .. } => {
                let coeffs: u64 = sections.iter().map(|s| s.coefficient_count() as u64).sum();
                (2 * coeffs, 4 * coeffs)
            }
        }
    }

    fn reset(&mut self) {
        match self {
            Branch::Zero => {}
            Branch::Fir { line, pos, .. } | Branch::Delay { line, pos } => {
                line.fill(ZERO);
                *pos = 0;
            }
            Branch::AllPass { state, .. } => state.fill([ZERO; 4]),
        }
    }

    fn step(&mut self, x: C) -> C {
        match self {
            Branch::Zero => ZERO,
            Branch::Fir {
                taps,
                line,
                lead,
                pos,
            } => {
                let len = line.len();
                line[*pos] = x;
                let mut acc = ZERO;
                // taps[k] multiplies the input delayed by lead + k
                let mut idx = (*pos + len - *lead) % len;
                for &t in taps.iter() {
                    acc += line[idx] * t;
                    idx = if idx == 0 { len - 1 } else { idx - 1 };
                }
                *pos = (*pos + 1) % len;
                acc
            }
            Branch::Delay { line, pos } => {
                if line.is_empty() {
                    return x;
                }
                let y = line[*pos];
                line[*pos] = x;
                *pos = (*pos + 1) % line.len();
                y
            }
            Branch::AllPass { sections, state } => {
                let mut v = x;
                for (s, st) in sections.iter().zip(state.iter_mut()) {
                    let y = match *s {
                        Section::First { alpha } => (v - st[2]) * alpha + st[0],
                        Section::Second { c1, c2 } => {
                            (v - st[3]) * c2 + (st[0] - st[2]) * c1 + st[1]
                        }
                    };
                    st[1] = st[0];
                    st[0] = v;
                    st[3] = st[2];
                    st[2] = y;
                    v = y;
                }
                v
            }
        }
    }
}

fn analysis_branches(proto: &Prototype) -> Vec<Branch> {
    let n = proto.num_branches();
    match proto {
        Prototype::Fir(p) => {
            let scaled: Vec<f64> = p.taps().iter().map(|t| t * n as f64).collect();
            polyphase_decompose(&scaled, n)
                .iter()
                .map(|b| Branch::fir(b))
                .collect()
        }
        Prototype::AllPass(p) => (0..n)
            .map(|b| {
                if b == 0 {
                    Branch::delay(p.n_fos())
                } else {
                    Branch::allpass(p.sections(b))
                }
            })
            .collect(),
    }
}

fn nominal_cascade_delay(proto: &Prototype) -> usize {
    match proto {
        Prototype::Fir(p) => p.len() - 1,
        Prototype::AllPass(p) => 2 * p.num_branches() * p.n_fos(),
    }
}

/// Shift s = (−D) mod N applied to the synthesis prototype.
pub fn synthesis_shift(proto: &Prototype) -> usize {
    let n = proto.num_branches();
    (n - nominal_cascade_delay(proto) % n) % n
}

/// Full-rate delay of an analysis-synthesis cascade, D + s samples.
pub fn cascade_delay(proto: &Prototype) -> usize {
    nominal_cascade_delay(proto) + synthesis_shift(proto)
}

fn synthesis_branches(proto: &Prototype) -> Vec<Branch> {
    let n = proto.num_branches();
    match proto {
        Prototype::Fir(p) => {
            let s = synthesis_shift(proto);
            let mut shifted = vec![0.0; s];
            shifted.extend(p.taps().iter().map(|t| t * n as f64));
            polyphase_decompose(&shifted, n)
                .iter()
                .map(|b| Branch::fir(b))
                .collect()
        }
        Prototype::AllPass(_) => analysis_branches(proto),
    }
}

/// Frames whose outputs still depend on the all-zero initial state.
pub fn warmup_frames(proto: &Prototype) -> u64 {
    let n = proto.num_branches();
    let (l, n_fos) = match proto {
        Prototype::Fir(p) => (p.len(), p.n_fos()),
        Prototype::AllPass(p) => (n * p.n_fos(), p.n_fos()),
    };
    (l.div_ceil(n) + n_fos) as u64
}

#[derive(Debug, Clone)]
struct Core {
    n: usize,
    prototype: Arc<Prototype>,
    branches: Vec<Branch>,
    plan: TransformPlan,
    per_frame: (u64, u64),
    transform_cost: (f64, f64),
    counters: OperationCounters,
    warmup: u64,
    buf: Vec<C>,
    out: Vec<C>,
}

impl Core {
    fn new(prototype: Arc<Prototype>, branches: Vec<Branch>, direction: Direction) -> Self {
        let n = prototype.num_branches();
        let per_frame = branches.iter().fold((0, 0), |(m, a), b| {
            let (bm, ba) = b.cost();
            (m + bm, a + ba)
        });
        let (a_t, p_t) = ifft_cost(n);
        Self {
            n,
            plan: TransformPlan::new(n, direction).expect("N >= 1"),
            per_frame,
            transform_cost: (p_t, a_t),
            counters: OperationCounters::default(),
            warmup: warmup_frames(&prototype),
            prototype,
            branches,
            buf: vec![ZERO; n],
            out: vec![ZERO; n],
        }
    }

    fn tally(&mut self) {
        let c = &mut self.counters;
        c.filter_mults += self.per_frame.0;
        c.filter_adds += self.per_frame.1;
        c.transform_mults += self.transform_cost.0;
        c.transform_adds += self.transform_cost.1;
        c.frames += 1;
    }

    fn reset(&mut self) {
        for b in self.branches.iter_mut() {
            b.reset();
        }
        self.counters = OperationCounters::default();
    }
}

/// Streaming analysis bank: N input samples in, one N-channel frame out.
#[derive(Debug, Clone)]
pub struct AnalysisBank {
    core: Core,
    history: Vec<C>,
    commutator_phase: usize,
}

impl AnalysisBank {
    pub fn new(prototype: Arc<Prototype>) -> Self {
        let branches = analysis_branches(&prototype);
        let core = Core::new(prototype, branches, Direction::Inverse);
        Self {
            history: vec![ZERO; core.n],
            core,
            commutator_phase: 0,
        }
    }

    pub fn num_channels(&self) -> usize {
        self.core.n
    }

    pub fn prototype(&self) -> &Arc<Prototype> {
        &self.core.prototype
    }

    pub fn counters(&self) -> OperationCounters {
        self.core.counters
    }

    /// Branch the next input sample goes to; always 0 between whole frames.
    pub fn commutator_phase(&self) -> usize {
        self.commutator_phase
    }

    pub fn warmup_frames(&self) -> u64 {
        self.core.warmup
    }

    pub fn reset(&mut self) {
        self.core.reset();
        self.history.fill(ZERO);
        self.commutator_phase = 0;
    }

    pub fn process(&mut self, block: &[C]) -> Result<ChannelFrame, BankError> {
        let n = self.core.n;
        if block.len() != n {
            return Err(BankError::Framing {
                expected: n,
                got: block.len(),
            });
        }
        let core = &mut self.core;
        for b in 0..n {
            let u = if b == 0 { block[0] } else { self.history[n - b] };
            core.buf[b] = core.branches[b].step(u);
        }
        self.history.copy_from_slice(block);
        core.plan
            .transform_into(&core.buf, &mut core.out)
            .expect("sizes match");
        let frame_index = core.counters.frames;
        core.tally();
        self.commutator_phase = (self.commutator_phase + n) % n;
        Ok(ChannelFrame {
            values: core.out.clone(),
            frame_index,
            warm_up: frame_index < core.warmup,
        })
    }

    pub fn process_real(&mut self, block: &[f64]) -> Result<ChannelFrame, BankError> {
        let c: Vec<C> = block.iter().map(|&v| C::new(v, 0.0)).collect();
        self.process(&c)
    }

    /// Run whole frames of `x`; a trailing partial frame is an error.
    pub fn analyze(&mut self, x: &[C]) -> Result<Vec<ChannelFrame>, BankError> {
        let n = self.core.n;
        if x.len() % n != 0 {
            return Err(BankError::Framing {
                expected: n * x.len().div_ceil(n),
                got: x.len(),
            });
        }
        x.chunks(n).map(|b| self.process(b)).collect()
    }
}

/// Streaming synthesis bank: one N-channel frame in, N output samples out.
#[derive(Debug, Clone)]
pub struct SynthesisBank {
    core: Core,
}

impl SynthesisBank {
    pub fn new(prototype: Arc<Prototype>) -> Self {
        let branches = synthesis_branches(&prototype);
        Self {
            core: Core::new(prototype, branches, Direction::Forward),
        }
    }

    pub fn num_channels(&self) -> usize {
        self.core.n
    }

    pub fn counters(&self) -> OperationCounters {
        self.core.counters
    }

    pub fn reset(&mut self) {
        self.core.reset();
    }

    /// Full-rate delay from analysis input to synthesis output.
    pub fn cascade_delay(&self) -> usize {
        cascade_delay(&self.core.prototype)
    }

    pub fn process(&mut self, frame: &[C]) -> Result<Vec<C>, BankError> {
        let n = self.core.n;
        if frame.len() != n {
            return Err(BankError::Framing {
                expected: n,
                got: frame.len(),
            });
        }
        let core = &mut self.core;
        core.plan
            .transform_into(frame, &mut core.buf)
            .expect("sizes match");
        let mut y = vec![ZERO; n];
        for (m, ym) in y.iter_mut().enumerate() {
            *ym = core.branches[m].step(core.buf[(n - m) % n]);
        }
        core.tally();
        Ok(y)
    }

    pub fn synthesize(&mut self, frames: &[Vec<C>]) -> Result<Vec<C>, BankError> {
        let mut out = Vec::with_capacity(frames.len() * self.core.n);
        for f in frames {
            out.extend(self.process(f)?);
        }
        Ok(out)
    }
}

/// Channel l computed the slow way: modulate, filter at the full rate, keep
/// every Nth sample. Output length is floor(len/N).
pub fn direct_channelize_oracle(prototype: &Prototype, input: &[C], l: usize) -> Vec<C> {
    let n = prototype.num_branches();
    let frames = input.len() / n;
    let rot = |j: usize| C::from_polar(1.0, 2.0 * std::f64::consts::PI * ((j * l) % n) as f64 / n as f64);
    match prototype {
        Prototype::Fir(p) => {
            let h: Vec<C> = p.taps().iter().enumerate().map(|(j, &t)| rot(j) * t).collect();
            (0..frames)
                .map(|k| {
                    let t = k * n;
                    h.iter()
                        .enumerate()
                        .take(t + 1)
                        .map(|(j, hj)| hj * input[t - j])
                        .sum()
                })
                .collect()
        }
        Prototype::AllPass(p) => {
            let len = input.len();
            let mut total = vec![ZERO; len];
            for b in 0..n {
                // x delayed by b, through A_b(z^N)
                let mut v: Vec<C> = (0..len).map(|t| if t >= b { input[t - b] } else { ZERO }).collect();
                if b == 0 {
                    let d = n * p.n_fos();
                    v = (0..len).map(|t| if t >= d { v[t - d] } else { ZERO }).collect();
                } else {
                    for s in p.sections(b) {
                        let mut y = vec![ZERO; len];
                        let at = |a: &[C], t: usize, back: usize| if t >= back { a[t - back] } else { ZERO };
                        for t in 0..len {
                            y[t] = match s {
                                Section::First { alpha } => {
                                    (v[t] - at(&y, t, n)) * alpha + at(&v, t, n)
                                }
                                Section::Second { c1, c2 } => {
                                    (v[t] - at(&y, t, 2 * n)) * c2
                                        + (at(&v, t, n) - at(&y, t, n)) * c1
                                        + at(&v, t, 2 * n)
                                }
                            };
                        }
                        v = y;
                    }
                }
                let w = rot(b);
                for (tt, vv) in total.iter_mut().zip(&v) {
                    *tt += w * vv;
                }
            }
            (0..frames).map(|k| total[k * n] / n as f64).collect()
        }
    }
}
