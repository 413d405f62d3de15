//! Prototype lowpass design: equiripple FIR and Nth-band all-pass based IIR
//! with almost linear phase, plus the coefficient-count estimators.

mod allpass;
mod coeff_io;
mod estimate;
mod kaiser;
mod remez;
mod response;

pub use allpass::{design_iir_min_sections, design_iir_nthband_alp, spike_intervals, Section};
pub use coeff_io::{export_coefficients, import_coefficients, read_coefficients, write_coefficients};
pub use estimate::{estimate_fir_length, estimate_iir_sections};
pub use kaiser::{design_fir_kaiser, kaiser_taps};
pub use remez::{design_fir_equiripple, remez_lowpass, RemezOutcome};
pub use response::{evaluate_response, measure_fir, measure_iir, FrequencyResponse};

use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DesignError {
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("design failed: {reason}; achieved {metrics}")]
    Failure {
        reason: String,
        metrics: DesignMetrics,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unstable coefficient at branch {branch}, section {section}: |alpha| = {magnitude}")]
    Unstable {
        branch: usize,
        section: usize,
        magnitude: f64,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Measured quality of a prototype on a dense grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignMetrics {
    /// Peak linear deviation of |H| from 1 over the passband.
    pub passband_deviation: f64,
    /// Peak linear |H| over the stopband (spike intervals excluded for IIR).
    pub stopband_peak: f64,
    /// Peak deviation of the unwrapped passband phase from its best-fit line, degrees.
    pub phase_deviation_deg: f64,
    pub coefficients: usize,
}

impl DesignMetrics {
    pub fn passband_deviation_db(&self) -> f64 {
        20.0 * (1.0 + self.passband_deviation).log10()
    }

    pub fn stopband_attenuation_db(&self) -> f64 {
        -20.0 * self.stopband_peak.log10()
    }
}

impl std::fmt::Display for DesignMetrics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "coefficients={} passband_dev={:.3e} ({:.6} dB) stopband={:.2} dB phase_dev={:.4} deg",
            self.coefficients,
            self.passband_deviation,
            self.passband_deviation_db(),
            self.stopband_attenuation_db(),
            self.phase_deviation_deg
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterKind {
    Fir,
    Iir,
}

/// Lowpass prototype requirements. Frequencies in Hz, ripples linear.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrototypeSpec {
    pub sample_rate: f64,
    pub passband_edge: f64,
    pub stopband_edge: f64,
    pub passband_ripple: f64,
    pub stopband_ripple: f64,
    pub num_branches: usize,
    pub kind: FilterKind,
}

impl PrototypeSpec {
    pub fn new(
        sample_rate: f64,
        passband_edge: f64,
        stopband_edge: f64,
        passband_ripple: f64,
        stopband_ripple: f64,
        num_branches: usize,
        kind: FilterKind,
    ) -> Result<Self, DesignError> {
        let spec = Self {
            sample_rate,
            passband_edge,
            stopband_edge,
            passband_ripple,
            stopband_ripple,
            num_branches,
            kind,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), DesignError> {
        let bad = |m: String| Err(DesignError::InvalidSpec(m));
        if !(self.sample_rate.is_finite() && self.sample_rate > 0.0) {
            return bad(format!("sample rate {} must be positive", self.sample_rate));
        }
        if !(self.passband_edge > 0.0 && self.passband_edge < self.stopband_edge) {
            return bad(format!(
                "need 0 < f_p < f_a, got f_p={} f_a={}",
                self.passband_edge, self.stopband_edge
            ));
        }
        if self.stopband_edge > self.sample_rate / 2.0 {
            return bad(format!(
                "stopband edge {} exceeds f_s/2 = {}",
                self.stopband_edge,
                self.sample_rate / 2.0
            ));
        }
        for (name, d) in [
            ("passband", self.passband_ripple),
            ("stopband", self.stopband_ripple),
        ] {
            if !(d > 0.0 && d < 1.0) {
                return bad(format!("{name} ripple {d} must lie in (0, 1)"));
            }
        }
        if self.num_branches == 0 {
            return bad("number of branches must be at least 1".into());
        }
        Ok(())
    }

    pub fn fp_norm(&self) -> f64 {
        self.passband_edge / self.sample_rate
    }

    pub fn fa_norm(&self) -> f64 {
        self.stopband_edge / self.sample_rate
    }

    /// Normalized transition width Δf = (f_a − f_p)/f_s.
    pub fn transition_width(&self) -> f64 {
        (self.stopband_edge - self.passband_edge) / self.sample_rate
    }
}

/// Linear peak deviation from a peak-to-peak passband ripple in dB
/// (half the figure is taken as the peak excursion).
pub fn ripple_from_peak_to_peak_db(db: f64) -> f64 {
    10f64.powf(db / 2.0 / 20.0) - 1.0
}

/// Linear stopband ripple from an attenuation in dB.
pub fn ripple_from_attenuation_db(db: f64) -> f64 {
    10f64.powf(-db / 20.0)
}

/// Linear-phase FIR prototype with nominal unit DC gain.
#[derive(Debug, Clone, PartialEq)]
pub struct FirPrototype {
    taps: Vec<f64>,
    num_branches: usize,
    spec: Option<PrototypeSpec>,
}

impl FirPrototype {
    pub fn new(taps: Vec<f64>, num_branches: usize) -> Result<Self, DesignError> {
        if taps.is_empty() {
            return Err(DesignError::InvalidSpec("FIR prototype needs at least one tap".into()));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(DesignError::InvalidSpec("non-finite FIR tap".into()));
        }
        if num_branches == 0 {
            return Err(DesignError::InvalidSpec("number of branches must be at least 1".into()));
        }
        Ok(Self {
            taps,
            num_branches,
            spec: None,
        })
    }

    /// Rectangular prototype of N taps of 1/N: every polyphase branch is a
    /// single unit tap, so an N-channel bank built on it is a bare transform.
    pub fn polyphase_identity(num_branches: usize) -> Result<Self, DesignError> {
        let n = num_branches.max(1);
        Self::new(vec![1.0 / n as f64; n], num_branches)
    }

    pub fn with_spec(mut self, spec: PrototypeSpec) -> Self {
        self.spec = Some(spec);
        self
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn num_branches(&self) -> usize {
        self.num_branches
    }

    pub fn spec(&self) -> Option<&PrototypeSpec> {
        self.spec.as_ref()
    }

    /// n_FoS such that L_FIR = N·(n_FoS + 1) once padded to whole branches.
    pub fn n_fos(&self) -> usize {
        self.taps.len().div_ceil(self.num_branches).saturating_sub(1)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let l = self.taps.len();
        (0..l / 2).all(|k| (self.taps[k] - self.taps[l - 1 - k]).abs() <= tol)
    }

    pub fn response_at(&self, f: f64) -> Complex64 {
        let w = -2.0 * PI * f;
        self.taps
            .iter()
            .enumerate()
            .map(|(k, &b)| Complex64::from_polar(b, w * k as f64))
            .sum()
    }
}

/// Nth-band all-pass prototype H(z) = (1/N) Σ z^{-n} A_n(z^N), A_0 = z^{-n_FoS}.
///
/// Each A_n is a cascade of n_FoS first-order factors (α + z⁻¹)/(1 + αz⁻¹).
/// Complex α appear in conjugate pairs and are realized as one real
/// second-order section per pair.
#[derive(Debug, Clone, PartialEq)]
pub struct AllPassPrototype {
    num_branches: usize,
    n_fos: usize,
    alphas: Vec<Vec<Complex64>>,
    spec: Option<PrototypeSpec>,
}

impl AllPassPrototype {
    /// `alphas[n - 1]` holds the n_FoS coefficients of branch n.
    pub fn new(
        num_branches: usize,
        n_fos: usize,
        alphas: Vec<Vec<Complex64>>,
    ) -> Result<Self, DesignError> {
        if num_branches == 0 {
            return Err(DesignError::InvalidSpec("number of branches must be at least 1".into()));
        }
        if alphas.len() != num_branches - 1 {
            return Err(DesignError::InvalidSpec(format!(
                "expected {} coefficient branches, got {}",
                num_branches - 1,
                alphas.len()
            )));
        }
        for (i, branch) in alphas.iter().enumerate() {
            if branch.len() != n_fos {
                return Err(DesignError::InvalidSpec(format!(
                    "branch {} has {} sections, expected {}",
                    i + 1,
                    branch.len(),
                    n_fos
                )));
            }
            for (m, a) in branch.iter().enumerate() {
                if !(a.re.is_finite() && a.im.is_finite()) || a.norm() >= 1.0 {
                    return Err(DesignError::Unstable {
                        branch: i + 1,
                        section: m,
                        magnitude: a.norm(),
                    });
                }
            }
            allpass::realize(branch).map_err(|m| {
                DesignError::InvalidSpec(format!("branch {}: {}", i + 1, m))
            })?;
        }
        Ok(Self {
            num_branches,
            n_fos,
            alphas,
            spec: None,
        })
    }

    pub fn with_spec(mut self, spec: PrototypeSpec) -> Self {
        self.spec = Some(spec);
        self
    }

    pub fn num_branches(&self) -> usize {
        self.num_branches
    }

    pub fn n_fos(&self) -> usize {
        self.n_fos
    }

    pub fn branch0_delay(&self) -> usize {
        self.n_fos
    }

    /// α for branch n ≥ 1.
    pub fn alphas(&self, n: usize) -> &[Complex64] {
        &self.alphas[n - 1]
    }

    pub fn all_alphas(&self) -> &[Vec<Complex64>] {
        &self.alphas
    }

    pub fn spec(&self) -> Option<&PrototypeSpec> {
        self.spec.as_ref()
    }

    /// L_IIR = N·n_FoS.
    pub fn coefficient_count(&self) -> usize {
        self.num_branches * self.n_fos
    }

    /// Real sections realizing branch n (n ≥ 1).
    pub fn sections(&self, n: usize) -> Vec<Section> {
        allpass::realize(&self.alphas[n - 1]).expect("validated at construction")
    }

    /// A_n(e^{jω}); branch 0 is the pure delay.
    pub fn branch_response(&self, n: usize, w: f64) -> Complex64 {
        let zi = Complex64::from_polar(1.0, -w);
        if n == 0 {
            return zi.powu(self.n_fos as u32);
        }
        self.alphas[n - 1]
            .iter()
            .map(|a| (a + zi) / (1.0 + a * zi))
            .product()
    }

    pub fn response_at(&self, f: f64) -> Complex64 {
        let n_b = self.num_branches;
        let w = 2.0 * PI * f;
        let sum: Complex64 = (0..n_b)
            .map(|n| {
                Complex64::from_polar(1.0, -w * n as f64) * self.branch_response(n, w * n_b as f64)
            })
            .sum();
        sum / n_b as f64
    }
}

/// Either prototype candidate.
#[derive(Debug, Clone, PartialEq)]
pub enum Prototype {
    Fir(FirPrototype),
    AllPass(AllPassPrototype),
}

impl Prototype {
    pub fn kind(&self) -> FilterKind {
        match self {
            Prototype::Fir(_) => FilterKind::Fir,
            Prototype::AllPass(_) => FilterKind::Iir,
        }
    }

    pub fn num_branches(&self) -> usize {
        match self {
            Prototype::Fir(p) => p.num_branches(),
            Prototype::AllPass(p) => p.num_branches(),
        }
    }

    pub fn n_fos(&self) -> usize {
        match self {
            Prototype::Fir(p) => p.n_fos(),
            Prototype::AllPass(p) => p.n_fos(),
        }
    }

    /// L_FIR or L_IIR.
    pub fn coefficient_count(&self) -> usize {
        match self {
            Prototype::Fir(p) => p.len(),
            Prototype::AllPass(p) => p.coefficient_count(),
        }
    }

    pub fn spec(&self) -> Option<&PrototypeSpec> {
        match self {
            Prototype::Fir(p) => p.spec(),
            Prototype::AllPass(p) => p.spec(),
        }
    }

    pub fn response_at(&self, f: f64) -> Complex64 {
        match self {
            Prototype::Fir(p) => p.response_at(f),
            Prototype::AllPass(p) => p.response_at(f),
        }
    }

    /// Nominal group delay at the full rate, in samples: (L − 1)/2 for the
    /// linear-phase FIR, N·n_FoS for the all-pass design.
    pub fn group_delay(&self) -> f64 {
        match self {
            Prototype::Fir(p) => (p.len() - 1) as f64 / 2.0,
            Prototype::AllPass(p) => (p.num_branches() * p.n_fos()) as f64,
        }
    }
}

impl From<FirPrototype> for Prototype {
    fn from(p: FirPrototype) -> Self {
        Prototype::Fir(p)
    }
}

impl From<AllPassPrototype> for Prototype {
    fn from(p: AllPassPrototype) -> Self {
        Prototype::AllPass(p)
    }
}

/// Branch n holds taps[n], taps[n+N], …
pub fn polyphase_decompose(taps: &[f64], n: usize) -> Vec<Vec<f64>> {
    assert!(n >= 1, "polyphase_decompose needs N >= 1");
    (0..n)
        .map(|b| taps.iter().skip(b).step_by(n).copied().collect())
        .collect()
}

/// Inverse of [`polyphase_decompose`]; ragged branches are zero padded.
pub fn polyphase_recompose(branches: &[Vec<f64>]) -> Vec<f64> {
    let n = branches.len();
    let depth = branches.iter().map(Vec::len).max().unwrap_or(0);
    let mut taps = vec![0.0; n * depth];
    for (b, branch) in branches.iter().enumerate() {
        for (k, &v) in branch.iter().enumerate() {
            taps[k * n + b] = v;
        }
    }
    taps
}
