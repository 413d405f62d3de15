//! INI run configuration.
//!
//! ```ini
//! [plan]
//! fs_hz = 1280e6
//! fo_hz = 10e6
//! fc_hz = 1650.75e6
//! nyquist_zone = 2
//! bandwidth_hz = 48.5e6
//! num_coarse_channels = 20
//!
//! [coarse]
//! prototype = fir        ; fir | iir
//! n_fos = 9
//! stopband_db = 50
//! passband_ripple_db = 0.0492
//!
//! [fine]
//! standard = custom      ; gmr1 | gmr2 | custom
//! granularity_hz = 1e6
//! guardband_fraction = 0.1
//!
//! [sim]
//! seed = 1
//! num_samples = 32768    ; per sub-band, at f_s/N
//! adc_bits = none
//! adc_backoff_db = 12
//! snr_db = none
//! sweep_snr_db = 35,45,55,65,75
//! occupied_subbands = 1-9
//!
//! [io]
//! output_dir = out
//! ```
//!
//! Every key is optional; missing keys take the values above.

use ini::Ini;
use stackchan::channeliser::{ChannelPlan, ChannelStandard};
use stackchan::filter_design::FilterKind;
use stackchan::stacking_planner::{plan_stacking, StackingInputs};
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Largest fine bank allowed without `--full-scale`.
pub const DESK_MAX_FINE: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct CoarseConfig {
    pub prototype: FilterKind,
    pub n_fos: usize,
    pub stopband_db: f64,
    pub passband_ripple_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FineConfig {
    pub standard: ChannelStandard,
    pub granularity_hz: f64,
    pub guardband_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub seed: u64,
    pub num_samples: usize,
    pub adc_bits: Option<u32>,
    pub adc_backoff_db: f64,
    pub snr_db: Option<f64>,
    pub sweep_snr_db: Vec<f64>,
    pub occupied_subbands: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub plan: StackingInputs,
    pub coarse: CoarseConfig,
    pub fine: FineConfig,
    pub sim: SimConfig,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            plan: StackingInputs {
                sample_rate: 1280e6,
                master_oscillator: 10e6,
                rf_centre: 1650.75e6,
                nyquist_zone: 2,
                bandwidth: 48.5e6,
                num_channels: 20,
            },
            coarse: CoarseConfig {
                prototype: FilterKind::Fir,
                n_fos: 9,
                stopband_db: 50.0,
                passband_ripple_db: 0.0492,
            },
            fine: FineConfig {
                standard: ChannelStandard::Custom,
                granularity_hz: 1e6,
                guardband_fraction: 0.1,
            },
            sim: SimConfig {
                seed: 1,
                num_samples: 32768,
                adc_bits: None,
                adc_backoff_db: 12.0,
                snr_db: None,
                sweep_snr_db: vec![35.0, 45.0, 55.0, 65.0, 75.0],
                occupied_subbands: (1..=9).collect(),
            },
            output_dir: PathBuf::from("out"),
        }
    }
}

fn parse<T: FromStr>(key: &str, v: &str, what: &str, bad: &mut Vec<String>) -> Option<T> {
    match v.trim().parse::<T>() {
        Ok(x) => Some(x),
        Err(_) => {
            bad.push(format!("{key}: expected {what}, got '{}'", v.trim()));
            None
        }
    }
}

/// Drop a trailing `; comment` or `# comment`.
fn strip_comment(v: &str) -> &str {
    let cut = v
        .char_indices()
        .find(|&(i, c)| (c == ';' || c == '#') && (i == 0 || v[..i].ends_with(char::is_whitespace)))
        .map_or(v.len(), |(i, _)| i);
    v[..cut].trim()
}

fn is_none(v: &str) -> bool {
    matches!(v.trim().to_ascii_lowercase().as_str(), "" | "none" | "off")
}

/// `1-9`, `1,3,5`, `2-4,7` or empty.
fn parse_index_list(v: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in v.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let a: usize = a.trim().parse().map_err(|_| part.to_string())?;
                let b: usize = b.trim().parse().map_err(|_| part.to_string())?;
                if a > b {
                    return Err(part.to_string());
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| part.to_string())?),
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

impl RunConfig {
    pub fn load(path: &Path, full_scale: bool) -> Result<Self, Vec<String>> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| vec![format!("config {}: {e}", path.display())])?;
        Self::from_ini_str(&text, full_scale)
    }

    /// Parse and validate; the error lists every bad key.
    pub fn from_ini_str(text: &str, full_scale: bool) -> Result<Self, Vec<String>> {
        let ini = Ini::load_from_str_noescape(text).map_err(|e| vec![format!("config syntax: {e}")])?;
        let mut c = Self::default();
        let mut bad = Vec::new();
        for (section, props) in ini.iter() {
            let Some(section) = section else {
                for (k, _) in props.iter() {
                    bad.push(format!("{k}: key outside any section"));
                }
                continue;
            };
            for (k, v) in props.iter() {
                let v = strip_comment(v);
                let key = format!("{section}.{k}");
                let b = &mut bad;
                match (section, k) {
                    ("plan", "fs_hz") => c.plan.sample_rate = parse(&key, v, "a number", b).unwrap_or(c.plan.sample_rate),
                    ("plan", "fo_hz") => c.plan.master_oscillator = parse(&key, v, "a number", b).unwrap_or(c.plan.master_oscillator),
                    ("plan", "fc_hz") => c.plan.rf_centre = parse(&key, v, "a number", b).unwrap_or(c.plan.rf_centre),
                    ("plan", "nyquist_zone") => c.plan.nyquist_zone = parse(&key, v, "a positive integer", b).unwrap_or(c.plan.nyquist_zone),
                    ("plan", "bandwidth_hz") => c.plan.bandwidth = parse(&key, v, "a number", b).unwrap_or(c.plan.bandwidth),
                    ("plan", "num_coarse_channels") => c.plan.num_channels = parse(&key, v, "a positive integer", b).unwrap_or(c.plan.num_channels),
                    ("coarse", "prototype") => match v.trim().to_ascii_lowercase().as_str() {
                        "fir" => c.coarse.prototype = FilterKind::Fir,
                        "iir" => c.coarse.prototype = FilterKind::Iir,
                        other => b.push(format!("{key}: expected fir or iir, got '{other}'")),
                    },
                    ("coarse", "n_fos") => c.coarse.n_fos = parse(&key, v, "a positive integer", b).unwrap_or(c.coarse.n_fos),
                    ("coarse", "stopband_db") => c.coarse.stopband_db = parse(&key, v, "a number", b).unwrap_or(c.coarse.stopband_db),
                    ("coarse", "passband_ripple_db") => c.coarse.passband_ripple_db = parse(&key, v, "a number", b).unwrap_or(c.coarse.passband_ripple_db),
                    ("fine", "standard") => match v.parse::<ChannelStandard>() {
                        Ok(s) => c.fine.standard = s,
                        Err(_) => b.push(format!("{key}: expected gmr1, gmr2 or custom, got '{}'", v.trim())),
                    },
                    ("fine", "granularity_hz") => c.fine.granularity_hz = parse(&key, v, "a number", b).unwrap_or(c.fine.granularity_hz),
                    ("fine", "guardband_fraction") => c.fine.guardband_fraction = parse(&key, v, "a number", b).unwrap_or(c.fine.guardband_fraction),
                    ("sim", "seed") => c.sim.seed = parse(&key, v, "an unsigned integer", b).unwrap_or(c.sim.seed),
                    ("sim", "num_samples") => c.sim.num_samples = parse(&key, v, "a positive integer", b).unwrap_or(c.sim.num_samples),
                    ("sim", "adc_bits") => {
                        c.sim.adc_bits = if is_none(v) { None } else { parse(&key, v, "an integer or none", b).or(c.sim.adc_bits) }
                    }
                    ("sim", "adc_backoff_db") => c.sim.adc_backoff_db = parse(&key, v, "a number", b).unwrap_or(c.sim.adc_backoff_db),
                    ("sim", "snr_db") => {
                        c.sim.snr_db = if is_none(v) { None } else { parse(&key, v, "a number or none", b).or(c.sim.snr_db) }
                    }
                    ("sim", "sweep_snr_db") => {
                        let vals: Result<Vec<f64>, _> = v.split(',').map(|s| s.trim().parse::<f64>()).collect();
                        match vals {
                            Ok(vs) => c.sim.sweep_snr_db = vs,
                            Err(_) => b.push(format!("{key}: expected a comma-separated list of numbers, got '{}'", v.trim())),
                        }
                    }
                    ("sim", "occupied_subbands") => match parse_index_list(v) {
                        Ok(l) => c.sim.occupied_subbands = l,
                        Err(part) => b.push(format!("{key}: bad entry '{part}'")),
                    },
                    ("io", "output_dir") => c.output_dir = PathBuf::from(v.trim()),
                    _ => b.push(format!("{key}: unknown key")),
                }
            }
        }
        if let Err(more) = c.validate(full_scale) {
            bad.extend(more);
        }
        if bad.is_empty() {
            Ok(c)
        } else {
            Err(bad)
        }
    }

    /// Range and cross-module checks, every failure listed.
    pub fn validate(&self, full_scale: bool) -> Result<(), Vec<String>> {
        let mut bad = Vec::new();
        if let Err(e) = self.plan.validate() {
            bad.push(format!("plan: {e}"));
        } else if let Err(e) = plan_stacking(&self.plan) {
            bad.push(format!("plan: {e}"));
        }
        let c = &self.coarse;
        if c.n_fos == 0 {
            bad.push("coarse.n_fos: must be at least 1".into());
        }
        if !(c.stopband_db > 0.0) {
            bad.push(format!("coarse.stopband_db: must be positive, got {}", c.stopband_db));
        }
        if !(c.passband_ripple_db > 0.0) {
            bad.push(format!(
                "coarse.passband_ripple_db: must be positive, got {}",
                c.passband_ripple_db
            ));
        }
        if self.plan.num_channels > 0 && self.plan.sample_rate > 0.0 {
            match self.channel_plan() {
                Ok(cp) if cp.num_fine > DESK_MAX_FINE && !full_scale => bad.push(format!(
                    "fine: {} fine channels need --full-scale (limit {DESK_MAX_FINE})",
                    cp.num_fine
                )),
                Ok(_) => {}
                Err(e) => bad.push(format!("fine: {e}")),
            }
        }
        let s = &self.sim;
        if s.num_samples < 64 {
            bad.push(format!("sim.num_samples: must be at least 64, got {}", s.num_samples));
        }
        if let Some(bits) = s.adc_bits {
            if !(4..=24).contains(&bits) {
                bad.push(format!("sim.adc_bits: must be in 4..=24, got {bits}"));
            }
        }
        if !s.adc_backoff_db.is_finite() {
            bad.push("sim.adc_backoff_db: must be finite".into());
        }
        if let Some(snr) = s.snr_db {
            if snr.is_nan() {
                bad.push("sim.snr_db: must be a number".into());
            }
        }
        if s.sweep_snr_db.is_empty() {
            bad.push("sim.sweep_snr_db: list is empty".into());
        }
        if let Some(x) = s.sweep_snr_db.iter().find(|&&x| !(x >= 35.0)) {
            bad.push(format!("sim.sweep_snr_db: {x} is below 35 dB"));
        }
        let max_sub = (self.plan.num_channels / 2).saturating_sub(1);
        if let Some(&n) = s.occupied_subbands.iter().find(|&&n| n == 0 || n > max_sub) {
            bad.push(format!("sim.occupied_subbands: {n} outside 1..={max_sub}"));
        }
        if self.output_dir.as_os_str().is_empty() {
            bad.push("io.output_dir: empty path".into());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(bad)
        }
    }

    pub fn channel_plan(&self) -> Result<ChannelPlan, String> {
        ChannelPlan::new(
            self.fine.standard,
            self.fine.granularity_hz,
            self.plan.channel_spacing(),
            self.fine.guardband_fraction,
        )
        .map_err(|e| e.to_string())
    }
}
