//! LO selection for frequency stacking and the prototype band edges it implies.
//!
//! Sub-band n (1 ≤ n < N/2) is mixed with LO β_n·f_o and lands at
//! `F_n = s·(β_n·f_o − (f_c − ρ·f_s))` after sampling in zone ν, where
//! ρ = ⌊ν/2⌋ and s = sgn(2ρ − ν + 1/2). β_n is the integer that puts F_n
//! closest to the channel centre n·f_s/N. The worst offset plus half the
//! sub-band width sets the passband edge.

use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("invalid stacking input: {0}")]
    InvalidInput(String),
    #[error("sub-band {n} cannot be placed: {reason}")]
    Infeasible { n: usize, reason: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StackingInputs {
    pub sample_rate: f64,
    pub master_oscillator: f64,
    pub rf_centre: f64,
    pub nyquist_zone: u32,
    pub bandwidth: f64,
    pub num_channels: usize,
}

impl StackingInputs {
    pub fn validate(&self) -> Result<(), PlanError> {
        let mut bad = Vec::new();
        if !(self.sample_rate.is_finite() && self.sample_rate > 0.0) {
            bad.push(format!("f_s={} must be positive", self.sample_rate));
        }
        if !(self.master_oscillator.is_finite() && self.master_oscillator > 0.0) {
            bad.push(format!("f_o={} must be positive", self.master_oscillator));
        }
        if !self.rf_centre.is_finite() {
            bad.push(format!("f_c={} must be finite", self.rf_centre));
        }
        if self.nyquist_zone < 1 {
            bad.push("Nyquist zone must be at least 1".to_string());
        }
        if self.num_channels < 4 || self.num_channels % 2 != 0 {
            bad.push(format!("N={} must be even and at least 4", self.num_channels));
        }
        if !(self.bandwidth > 0.0 && self.bandwidth < self.channel_spacing()) {
            bad.push(format!(
                "B={} must be positive and below f_s/N={}",
                self.bandwidth,
                self.channel_spacing()
            ));
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(PlanError::InvalidInput(bad.join("; ")))
        }
    }

    pub fn channel_spacing(&self) -> f64 {
        self.sample_rate / self.num_channels as f64
    }

    pub fn rho(&self) -> i64 {
        (self.nyquist_zone / 2) as i64
    }

    pub fn sign(&self) -> f64 {
        let v = 2.0 * self.rho() as f64 - self.nyquist_zone as f64 + 0.5;
        assert!(v != 0.0);
        v.signum()
    }

    /// f_c − ρ·f_s, the RF centre relative to the zone's lower alias.
    fn zone_offset(&self) -> f64 {
        self.rf_centre - self.rho() as f64 * self.sample_rate
    }

    /// Stacked position for a given LO multiple.
    pub fn stacked_centre(&self, beta: u64) -> f64 {
        self.sign() * (beta as f64 * self.master_oscillator - self.zone_offset())
    }

    /// Inclusive β range keeping F_n inside [0, f_s/2].
    pub fn beta_window(&self) -> Option<(u64, u64)> {
        let (fo, c, half) = (self.master_oscillator, self.zone_offset(), self.sample_rate / 2.0);
        let (lo, hi) = if self.sign() > 0.0 {
            (c / fo, (half + c) / fo)
        } else {
            ((c - half) / fo, c / fo)
        };
        let lo = lo.ceil().max(1.0);
        let hi = hi.floor();
        if hi < lo {
            None
        } else {
            Some((lo as u64, hi as u64))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyPlan {
    pub inputs: StackingInputs,
    pub rho: i64,
    pub sign: f64,
    /// Entry i is sub-band n = i + 1.
    pub betas: Vec<u64>,
    pub centres: Vec<f64>,
    pub offsets: Vec<f64>,
    /// F_n − n·f_s/N.
    pub signed_offsets: Vec<f64>,
    pub passband_edge: f64,
    pub stopband_edge: f64,
    pub guardband_pct: f64,
}

impl FrequencyPlan {
    pub fn sub_bands(&self) -> impl Iterator<Item = usize> + '_ {
        1..=self.betas.len()
    }

    pub fn channel_centre(&self, n: usize) -> f64 {
        n as f64 * self.inputs.channel_spacing()
    }

    pub fn max_offset(&self) -> f64 {
        self.offsets.iter().cloned().fold(0.0, f64::max)
    }

    /// Human-readable `key=value` report.
    pub fn report(&self) -> String {
        let i = &self.inputs;
        let mut s = String::new();
        writeln!(s, "fs_hz={}", i.sample_rate).unwrap();
        writeln!(s, "fo_hz={}", i.master_oscillator).unwrap();
        writeln!(s, "fc_hz={}", i.rf_centre).unwrap();
        writeln!(s, "nyquist_zone={}", i.nyquist_zone).unwrap();
        writeln!(s, "bandwidth_hz={}", i.bandwidth).unwrap();
        writeln!(s, "num_channels={}", i.num_channels).unwrap();
        writeln!(s, "rho={}", self.rho).unwrap();
        writeln!(s, "sign={}", self.sign as i32).unwrap();
        writeln!(s, "fp_hz={}", self.passband_edge).unwrap();
        writeln!(s, "fa_hz={}", self.stopband_edge).unwrap();
        writeln!(s, "max_phi_hz={}", self.max_offset()).unwrap();
        writeln!(s, "guardband_pct={}", self.guardband_pct).unwrap();
        for n in self.sub_bands() {
            writeln!(
                s,
                "n={} beta={} F_hz={} phi_hz={} phi_signed_hz={}",
                n,
                self.betas[n - 1],
                self.centres[n - 1],
                self.offsets[n - 1],
                self.signed_offsets[n - 1]
            )
            .unwrap();
        }
        s
    }

    pub fn csv(&self) -> String {
        let mut s = String::from("n,beta_n,F_n_hz,phi_n_hz\n");
        for n in self.sub_bands() {
            writeln!(
                s,
                "{},{},{},{}",
                n,
                self.betas[n - 1],
                self.centres[n - 1],
                self.offsets[n - 1]
            )
            .unwrap();
        }
        s
    }
}

/// Choose β_n for every sub-band and derive f_p, f_a and Δ%.
///
/// Equidistant candidates resolve to the smaller β (lower LO).
pub fn plan_stacking(inputs: &StackingInputs) -> Result<FrequencyPlan, PlanError> {
    inputs.validate()?;
    let n_ch = inputs.num_channels;
    let spacing = inputs.channel_spacing();
    let half = inputs.sample_rate / 2.0;
    let b2 = inputs.bandwidth / 2.0;
    let mut plan = FrequencyPlan {
        inputs: *inputs,
        rho: inputs.rho(),
        sign: inputs.sign(),
        betas: Vec::new(),
        centres: Vec::new(),
        offsets: Vec::new(),
        signed_offsets: Vec::new(),
        passband_edge: 0.0,
        stopband_edge: 0.0,
        guardband_pct: 0.0,
    };
    let window = inputs.beta_window();
    for n in 1..n_ch / 2 {
        let Some((lo, hi)) = window else {
            return Err(PlanError::Infeasible {
                n,
                reason: "no LO multiple places the band inside [0, f_s/2]".into(),
            });
        };
        let target = n as f64 * spacing;
        let beta = best_beta(inputs, target, lo, hi);
        let f = inputs.stacked_centre(beta);
        if f - b2 < 0.0 || f + b2 > half {
            return Err(PlanError::Infeasible {
                n,
                reason: format!("stacked band [{}, {}] leaves [0, f_s/2]", f - b2, f + b2),
            });
        }
        plan.betas.push(beta);
        plan.centres.push(f);
        plan.signed_offsets.push(f - target);
        plan.offsets.push((f - target).abs());
    }
    let (worst_n, worst) = plan
        .offsets
        .iter()
        .enumerate()
        .fold((1, 0.0), |acc, (i, &p)| if p > acc.1 { (i + 1, p) } else { acc });
    plan.passband_edge = worst + b2;
    plan.stopband_edge = spacing - plan.passband_edge;
    if plan.stopband_edge <= plan.passband_edge {
        return Err(PlanError::Infeasible {
            n: worst_n,
            reason: format!(
                "f_a={} does not exceed f_p={}",
                plan.stopband_edge, plan.passband_edge
            ),
        });
    }
    let df = (plan.stopband_edge - plan.passband_edge) / inputs.sample_rate;
    plan.guardband_pct = guardband_percentage(df, n_ch)?;
    Ok(plan)
}

fn best_beta(inputs: &StackingInputs, target: f64, lo: u64, hi: u64) -> u64 {
    // F is linear in β, so the optimum is one of the two neighbours of the
    // real-valued solution, clamped to the window
    let fo = inputs.master_oscillator;
    let exact = (inputs.sign() * target + inputs.zone_offset()) / fo;
    let a = (exact.floor().max(lo as f64).min(hi as f64)) as u64;
    let b = (exact.ceil().max(lo as f64).min(hi as f64)) as u64;
    let da = (inputs.stacked_centre(a) - target).abs();
    let db = (inputs.stacked_centre(b) - target).abs();
    let tol = 1e-9 * fo;
    if (da - db).abs() <= tol {
        a.min(b)
    } else if da < db {
        a
    } else {
        b
    }
}

/// Δ% = Δf·N·100 for a normalized transition width Δf ∈ (0, 1/N].
pub fn guardband_percentage(delta_f: f64, n: usize) -> Result<f64, PlanError> {
    if n == 0 || !(delta_f > 0.0 && delta_f <= 1.0 / n as f64) {
        return Err(PlanError::InvalidArgument(format!(
            "transition width {delta_f} outside (0, 1/{n}]"
        )));
    }
    Ok(delta_f * n as f64 * 100.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanValidation {
    pub passed: bool,
    /// (n, f_p − |F_n − n·f_s/N| − B/2); negative means the band spills out.
    pub margins: Vec<(usize, f64)>,
    pub dc_empty: bool,
    pub nyquist_empty: bool,
    pub failures: Vec<String>,
}

/// Check every stacked band sits inside its channel's passband region
/// `[n·f_s/N − f_p, n·f_s/N + f_p]` and the DC and Nyquist channels are free.
pub fn validate_plan(plan: &FrequencyPlan, passband_edge: f64) -> PlanValidation {
    let i = &plan.inputs;
    let b2 = i.bandwidth / 2.0;
    let half = i.sample_rate / 2.0;
    let mut failures = Vec::new();
    let mut margins = Vec::new();
    let (mut dc_empty, mut nyquist_empty) = (true, true);
    for (k, &f) in plan.centres.iter().enumerate() {
        let n = k + 1;
        let margin = passband_edge - (f - plan.channel_centre(n)).abs() - b2;
        if margin < 0.0 {
            failures.push(format!("sub-band {n} exceeds its passband by {} Hz", -margin));
        }
        margins.push((n, margin));
        if f - b2 < passband_edge {
            dc_empty = false;
        }
        if f + b2 > half - passband_edge {
            nyquist_empty = false;
        }
    }
    if !dc_empty {
        failures.push("channel 0 is occupied".into());
    }
    if !nyquist_empty {
        failures.push(format!("channel {} is occupied", i.num_channels / 2));
    }
    PlanValidation {
        passed: failures.is_empty(),
        margins,
        dc_empty,
        nyquist_empty,
        failures,
    }
}
