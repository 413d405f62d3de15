//! Closed-form operation-count models for the two channeliser candidates.
//!
//! Candidate 1 is the FIR polyphase bank, candidate 2 the all-pass IIR bank.
//! Both share the analytic transform cost: 9 real adds and 3 real mults per
//! radix-2 butterfly, (N/2)·log2(N) butterflies.

use crate::filter_design::{
    estimate_fir_length, estimate_iir_sections, ripple_from_attenuation_db,
    ripple_from_peak_to_peak_db,
};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComplexityError {
    #[error("invalid size: {0}")]
    InvalidSize(String),
    #[error("invalid sweep configuration: {0}")]
    InvalidConfig(String),
}

/// Transform cost `(adds, mults)` = ((9N/2)·log2 N, (3N/2)·log2 N).
///
/// log2 is taken as a real number, so non-power-of-two sizes get a
/// fractional count.
pub fn ifft_cost(n: usize) -> (f64, f64) {
    if n <= 1 {
        return (0.0, 0.0);
    }
    let half_log = n as f64 / 2.0 * (n as f64).log2();
    (9.0 * half_log, 3.0 * half_log)
}

/// Filtering cost of the FIR bank per frame: (2·(L − N), 2·L).
pub fn fir_filter_cost(n: usize, l_fir: usize) -> Result<(f64, f64), ComplexityError> {
    if n < 1 || l_fir < n {
        return Err(ComplexityError::InvalidSize(format!(
            "need L_FIR >= N >= 1, got N={n}, L_FIR={l_fir}"
        )));
    }
    Ok((2.0 * (l_fir - n) as f64, 2.0 * l_fir as f64))
}

/// Filtering cost of the IIR bank per frame: (4(1 − 1/N)·L, 2(1 − 1/N)·L).
pub fn iir_filter_cost(n: usize, l_iir: usize) -> Result<(f64, f64), ComplexityError> {
    if n < 1 || l_iir % n != 0 {
        return Err(ComplexityError::InvalidSize(format!(
            "need L_IIR a multiple of N >= 1, got N={n}, L_IIR={l_iir}"
        )));
    }
    let coeffs = ((n - 1) * (l_iir / n)) as f64;
    Ok((4.0 * coeffs, 2.0 * coeffs))
}

/// Total FIR candidate cost `(a1, p1)`.
pub fn fir_candidate_cost(n: usize, l_fir: usize) -> Result<(f64, f64), ComplexityError> {
    let (a, p) = fir_filter_cost(n, l_fir)?;
    let (at, pt) = ifft_cost(n);
    Ok((a + at, p + pt))
}

/// Total IIR candidate cost `(a2, p2)`.
pub fn iir_candidate_cost(n: usize, l_iir: usize) -> Result<(f64, f64), ComplexityError> {
    let (a, p) = iir_filter_cost(n, l_iir)?;
    let (at, pt) = ifft_cost(n);
    Ok((a + at, p + pt))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityReport {
    pub n: usize,
    pub guardband_pct: f64,
    pub l_fir: usize,
    pub l_iir: usize,
    pub a_fir: f64,
    pub p_fir: f64,
    pub a_iir: f64,
    pub p_iir: f64,
    pub a_ifft: f64,
    pub p_ifft: f64,
    pub a1: f64,
    pub p1: f64,
    pub a2: f64,
    pub p2: f64,
    /// Set when the row lies outside the range the IIR estimator was fitted on.
    pub warning: Option<String>,
}

impl ComplexityReport {
    pub fn new(n: usize, guardband_pct: f64, l_fir: usize, l_iir: usize) -> Result<Self, ComplexityError> {
        let (a_fir, p_fir) = fir_filter_cost(n, l_fir)?;
        let (a_iir, p_iir) = iir_filter_cost(n, l_iir)?;
        let (a_ifft, p_ifft) = ifft_cost(n);
        Ok(Self {
            n,
            guardband_pct,
            l_fir,
            l_iir,
            a_fir,
            p_fir,
            a_iir,
            p_iir,
            a_ifft,
            p_ifft,
            a1: a_fir + a_ifft,
            p1: p_fir + p_ifft,
            a2: a_iir + a_ifft,
            p2: p_iir + p_ifft,
            warning: None,
        })
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.guardband_pct,
            self.l_fir,
            self.l_iir,
            self.a1,
            self.p1,
            self.a2,
            self.p2,
            self.a_fir,
            self.p_fir,
            self.a_iir,
            self.p_iir,
            self.a_ifft,
            self.p_ifft
        )
    }
}

pub const CSV_HEADER: &str = "N,delta_pct,L_fir,L_iir,a1,p1,a2,p2,a_fir,p_fir,a_iir,p_iir,a_ifft,p_ifft";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub n_values: Vec<usize>,
    /// Guardband percentage for each entry of `n_values`.
    pub guardband_pct: Vec<f64>,
    pub passband_ripple_db: f64,
    pub stopband_attenuation_db: f64,
}

impl SweepConfig {
    /// Powers of two 2..=128 with Δ% falling linearly from 40 to 5.
    pub fn default_schedule() -> Self {
        let n_values: Vec<usize> = (1..=7).map(|k| 1usize << k).collect();
        let last = (n_values.len() - 1) as f64;
        let guardband_pct = (0..n_values.len())
            .map(|i| 40.0 - 35.0 * i as f64 / last)
            .collect();
        Self {
            n_values,
            guardband_pct,
            passband_ripple_db: 0.0492,
            stopband_attenuation_db: 50.0,
        }
    }
}

/// Evaluate both candidates over the configured (N, Δ%) pairs.
///
/// Δf = Δ%/(100·N). L_FIR comes from the FIR length estimate, L_IIR from the
/// all-pass estimate rounded up to a multiple of N (whole sections per branch).
pub fn sweep(cfg: &SweepConfig) -> Result<Vec<ComplexityReport>, ComplexityError> {
    if cfg.n_values.len() != cfg.guardband_pct.len() {
        return Err(ComplexityError::InvalidConfig(format!(
            "{} N values but {} guardband entries",
            cfg.n_values.len(),
            cfg.guardband_pct.len()
        )));
    }
    if !(cfg.passband_ripple_db > 0.0 && cfg.stopband_attenuation_db > 0.0) {
        return Err(ComplexityError::InvalidConfig(
            "ripple specifications must be positive".into(),
        ));
    }
    let dp = ripple_from_peak_to_peak_db(cfg.passband_ripple_db);
    let ds = ripple_from_attenuation_db(cfg.stopband_attenuation_db);
    let mut rows = Vec::with_capacity(cfg.n_values.len());
    for (&n, &pct) in cfg.n_values.iter().zip(&cfg.guardband_pct) {
        if n < 2 {
            return Err(ComplexityError::InvalidSize(format!("N must be at least 2, got {n}")));
        }
        if !(pct > 0.0 && pct < 100.0) {
            return Err(ComplexityError::InvalidConfig(format!(
                "guardband {pct}% outside (0, 100)"
            )));
        }
        let df = pct / (100.0 * n as f64);
        let err = |e: crate::filter_design::DesignError| ComplexityError::InvalidConfig(e.to_string());
        let l_fir = estimate_fir_length(dp, ds, df).map_err(err)?.max(n);
        let raw_iir = estimate_iir_sections(ds, df).map_err(err)?;
        let l_iir = raw_iir.div_ceil(n) * n;
        let mut row = ComplexityReport::new(n, pct, l_fir, l_iir)?;
        let mut notes = Vec::new();
        if !(5.0..=40.0).contains(&pct) {
            notes.push(format!("guardband {pct}% outside fitted range 5-40%"));
        }
        if raw_iir == 0 {
            notes.push("IIR estimate is zero".to_string());
        }
        if !notes.is_empty() {
            row.warning = Some(notes.join("; "));
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[ComplexityReport]) -> String {
    let mut s = String::new();
    writeln!(s, "{CSV_HEADER}").unwrap();
    for r in rows {
        writeln!(s, "{}", r.csv_row()).unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ifft_examples() {
        assert_eq!(ifft_cost(4), (36.0, 12.0));
        assert_eq!(ifft_cost(1), (0.0, 0.0));
        assert_eq!(ifft_cost(2), (9.0, 3.0));
    }

    #[test]
    fn candidate_examples() {
        assert_eq!(fir_candidate_cost(16, 320).unwrap(), (896.0, 736.0));
        assert_eq!(fir_candidate_cost(1, 1).unwrap(), (0.0, 2.0));
        assert!(fir_candidate_cost(16, 8).is_err());
        assert!(fir_candidate_cost(0, 8).is_err());
        assert_eq!(iir_candidate_cost(16, 160).unwrap(), (888.0, 396.0));
        assert_eq!(iir_filter_cost(1, 7).unwrap(), (0.0, 0.0));
        assert_eq!(iir_filter_cost(20, 180).unwrap(), (684.0, 342.0));
        assert!(iir_candidate_cost(16, 100).is_err());
    }

    #[test]
    fn default_sweep() {
        let rows = sweep(&SweepConfig::default_schedule()).unwrap();
        assert_eq!(rows.len(), 7);
        assert_eq!(rows[0].guardband_pct, 40.0);
        assert_eq!(rows[6].guardband_pct, 5.0);
        for r in &rows {
            assert!(r.a2 < r.a1 && r.p2 < r.p1, "{r:?}");
            assert_eq!(r.l_iir % r.n, 0);
            assert!(r.warning.is_none());
        }
        let csv = sweep_csv(&rows);
        assert!(csv.starts_with(CSV_HEADER));
        assert_eq!(csv.lines().count(), 8);
    }

    #[test]
    fn out_of_envelope_rows_are_flagged() {
        let cfg = SweepConfig {
            n_values: vec![8],
            guardband_pct: vec![60.0],
            ..SweepConfig::default_schedule()
        };
        let rows = sweep(&cfg).unwrap();
        assert!(rows[0].warning.is_some());
        let bad = SweepConfig {
            n_values: vec![1],
            guardband_pct: vec![20.0],
            ..SweepConfig::default_schedule()
        };
        assert!(sweep(&bad).is_err());
    }
}
