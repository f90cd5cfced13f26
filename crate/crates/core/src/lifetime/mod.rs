//! Lifetime-driven gain selection.
//!
//! At every prognosis tick the tower moment (measured or predicted) is fed
//! to a rainflow counter, the lifetime projection `L_e` is refreshed, and
//! the active gain set moves one step along the ladder when `L_e` leaves
//! the band `L_d·(1 ± h)`, at most once per dwell window. Ladder index 0
//! is the speed-biased design and the last index the load-biased one.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::io::{fmt_exact, write_numeric_csv};
use crate::rainflow::{estimate_lifetime, RainflowState, SnCurve};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Fixed balanced gains.
    Baseline,
    /// Adaptation driven by the measured tower moment.
    Life1,
    /// Adaptation driven by the SVR-predicted tower moment.
    Life2,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Baseline, Scheme::Life1, Scheme::Life2];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Baseline => "baseline",
            Scheme::Life1 => "life1",
            Scheme::Life2 => "life2",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "baseline" => Ok(Scheme::Baseline),
            "life1" => Ok(Scheme::Life1),
            "life2" => Ok(Scheme::Life2),
            other => Err(Error::InvalidInput(format!(
                "unknown scheme `{other}` (expected baseline, life1 or life2)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LifetimeConfig {
    /// s
    pub desired_lifetime: f64,
    pub damage_limit: f64,
    pub band_fraction: f64,
    /// s
    pub dwell_min: f64,
    /// s
    pub prognosis_period: f64,
    pub mode: Scheme,
    /// Number of gain sets on the ladder.
    pub ladder_len: usize,
    /// Ladder index used by Baseline and at the start of every run.
    pub balanced_index: usize,
}

impl Default for LifetimeConfig {
    fn default() -> Self {
        LifetimeConfig {
            desired_lifetime: 600.0,
            damage_limit: 1.0,
            band_fraction: 0.05,
            dwell_min: 10.0,
            prognosis_period: 0.1,
            mode: Scheme::Baseline,
            ladder_len: 3,
            balanced_index: 1,
        }
    }
}

impl LifetimeConfig {
    /// Every violated invariant, one message each.
    pub fn problems(&self) -> Vec<String> {
        let mut p = Vec::new();
        if !(self.desired_lifetime > 0.0 && self.desired_lifetime.is_finite()) {
            p.push(format!("desired lifetime must be > 0, got {}", self.desired_lifetime));
        }
        if !(self.damage_limit > 0.0 && self.damage_limit.is_finite()) {
            p.push(format!("damage limit must be > 0, got {}", self.damage_limit));
        }
        if !(self.band_fraction > 0.0 && self.band_fraction < 1.0) {
            p.push(format!("band fraction must be in (0, 1), got {}", self.band_fraction));
        }
        if !(self.prognosis_period > 0.0) {
            p.push(format!("prognosis period must be > 0, got {}", self.prognosis_period));
        }
        if !(self.dwell_min >= self.prognosis_period) {
            p.push(format!(
                "dwell ({}) must be at least the prognosis period ({})",
                self.dwell_min, self.prognosis_period
            ));
        }
        if self.ladder_len == 0 || self.balanced_index >= self.ladder_len {
            p.push(format!(
                "balanced index {} outside a ladder of {}",
                self.balanced_index, self.ladder_len
            ));
        }
        p
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.problems();
        if p.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(p))
        }
    }
}

/// Life1 and Baseline use the measured moment, Life2 the prediction.
pub fn select_moment_source(mode: Scheme, predicted: f64, measured: f64) -> f64 {
    match mode {
        Scheme::Life2 => predicted,
        Scheme::Life1 | Scheme::Baseline => measured,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptationRecord {
    pub time: f64,
    pub l_e: f64,
    pub d_k: f64,
    pub active_gain_index: usize,
    pub switched: bool,
}

#[derive(Debug, Clone)]
pub struct PrognosisState {
    pub rainflow: RainflowState,
    pub active_gain_index: usize,
    /// Start time of the current dwell window.
    pub last_switch_time: f64,
    pub l_e_latest: f64,
    /// When false the index never moves (used for mode audits).
    pub adaptation_enabled: bool,
    started: bool,
}

impl PrognosisState {
    pub fn new(cfg: &LifetimeConfig, gate_fraction: f64) -> Result<Self> {
        cfg.validate()?;
        Ok(PrognosisState {
            rainflow: RainflowState::new(gate_fraction)?,
            active_gain_index: cfg.balanced_index,
            last_switch_time: 0.0,
            l_e_latest: f64::INFINITY,
            adaptation_enabled: cfg.mode != Scheme::Baseline,
            started: false,
        })
    }

    /// One prognosis tick. Returns the record for the adaptation log.
    pub fn tick(
        &mut self,
        cfg: &LifetimeConfig,
        moment: f64,
        time: f64,
        sn: &SnCurve,
    ) -> Result<AdaptationRecord> {
        self.rainflow.push_sample(moment, time, sn)?;
        if !self.started {
            self.started = true;
            self.last_switch_time = time;
        }
        let elapsed = self.rainflow.elapsed_t_k;
        let d_k = self.rainflow.damage_d_k;
        self.l_e_latest = estimate_lifetime(d_k, elapsed, cfg.damage_limit)?;

        let mut switched = false;
        if self.adaptation_enabled && cfg.mode != Scheme::Baseline {
            let dwell_done = time - self.last_switch_time >= cfg.dwell_min - 1e-9;
            let low = cfg.desired_lifetime * (1.0 - cfg.band_fraction);
            let high = cfg.desired_lifetime * (1.0 + cfg.band_fraction);
            let target = if self.l_e_latest < low {
                (self.active_gain_index + 1).min(cfg.ladder_len - 1)
            } else if self.l_e_latest > high {
                self.active_gain_index.saturating_sub(1)
            } else {
                self.active_gain_index
            };
            if dwell_done && target != self.active_gain_index {
                self.active_gain_index = target;
                self.last_switch_time = time;
                switched = true;
            }
        }
        Ok(AdaptationRecord {
            time,
            l_e: self.l_e_latest,
            d_k,
            active_gain_index: self.active_gain_index,
            switched,
        })
    }
}

/// Functional form of [`PrognosisState::tick`].
pub fn prognosis_tick(
    ps: &mut PrognosisState,
    cfg: &LifetimeConfig,
    moment: f64,
    time: f64,
    sn: &SnCurve,
) -> Result<usize> {
    ps.tick(cfg, moment, time, sn).map(|r| r.active_gain_index)
}

pub fn write_adaptation_log(path: &Path, log: &[AdaptationRecord]) -> Result<()> {
    let rows = log.iter().map(|r| {
        vec![
            fmt_exact(r.time),
            fmt_exact(r.l_e),
            fmt_exact(r.d_k),
            r.active_gain_index.to_string(),
            u8::from(r.switched).to_string(),
        ]
    });
    write_numeric_csv(
        path,
        &["time_s", "L_e_s", "D_k", "active_gain_index", "switch_flag"],
        rows,
    )
}
