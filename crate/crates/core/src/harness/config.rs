//! Experiment configuration: a plain `key = value` file.
//!
//! Unknown keys are rejected. Lists are comma separated. Every key has a
//! default, so an empty file (or the literal name `default`) is the
//! reference setup. Per-profile seeds are derived from `seed` unless given
//! explicitly; see [`ExperimentConfig::bench_seeds`].
//!
//! | key | default | meaning |
//! |---|---|---|
//! | `seed` | 2024 | master seed |
//! | `dt` | 0.0125 | integration step, s |
//! | `duration` | 600 | run length, s |
//! | `turbine` | nrel5mw | parameter set |
//! | `design_wind` | 18 | linearization wind, m/s |
//! | `bench.winds` | 19, 17, 15 | benchmark mean winds, m/s |
//! | `bench.ti` | 0.10 | benchmark turbulence intensity |
//! | `bench.seeds` | derived | one per benchmark wind |
//! | `train.winds` | 15, 17, 19 | training mean winds |
//! | `train.tis` | 0.05, 0.15 | training turbulence intensities |
//! | `train.seeds` | derived | one per (wind, TI) pair, wind-major |
//! | `sample_every` | 8 | plant steps per prognosis/dataset sample |
//! | `sn.m` | 4 | S-N exponent |
//! | `sn.k` | auto | S-N constant, or `auto` to calibrate |
//! | `sn.target_ratio` | 1.2 | Baseline D(T)/D_d the calibration aims for |
//! | `sn.calibration` | per_wind | `per_wind` or `single` |
//! | `sn.reference_wind` | 17 | wind used by `single` calibration |
//! | `rainflow.gate` | 0.005 | hysteresis gate, fraction of running range |
//! | `life.desired_lifetime` | 600 | L_d, s |
//! | `life.damage_limit` | 1 | D_d |
//! | `life.band` | 0.05 | h |
//! | `life.dwell` | 10 | minimum time between switches, s |
//! | `gains.state_weights` | 4000, 400, 400, 0, 0, 0 | regulator state weights |
//! | `gains.control_weight` | 2500 | regulator input weight |
//! | `gains.integral_weight` | 1 | weight on the speed-error integral |
//! | `gains.tower_scales` | 0.3, 1, 3 | ladder multipliers on tower weights |
//! | `observer.process` | 1e-4 × 6 | observer process weights |
//! | `observer.disturbance` | 1 | wind-state process weight |
//! | `observer.boost` | 10 | multiplier on the wind-state weight |
//! | `observer.measurement` | 0.01, 0.001 | measurement weights |
//! | `svr.c_grid` | 0.1, 1, 10, 100 | cost grid |
//! | `svr.eps_grid` | 0.001, 0.01, 0.05 | tube grid (× target std) |
//! | `svr.seed` | derived | visit-order seed |
//! | `svr.model` | unset | trained model file for Life2 |
//! | `out` | out | output directory |

use std::path::{Path, PathBuf};

use crate::control::{ObserverWeights, WeightProfile};
use crate::error::{Error, Result};
use crate::io::{parse_f64_list, parse_key_values, read_text};
use crate::lifetime::LifetimeConfig;
use crate::model::TurbineParams;
use crate::rainflow::DEFAULT_GATE_FRACTION;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Calibration {
    PerWind,
    Single,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub dt: f64,
    pub duration: f64,
    pub params: TurbineParams,
    pub design_wind: f64,
    pub bench_winds: Vec<f64>,
    pub bench_ti: f64,
    pub bench_seeds: Option<Vec<u64>>,
    pub train_winds: Vec<f64>,
    pub train_tis: Vec<f64>,
    pub train_seeds: Option<Vec<u64>>,
    pub sample_every: usize,
    pub sn_m: f64,
    /// `None` means calibrate from the Baseline runs.
    pub sn_k: Option<f64>,
    pub sn_target_ratio: f64,
    pub calibration: Calibration,
    pub reference_wind: f64,
    pub gate_fraction: f64,
    pub life: LifetimeConfig,
    pub weights: WeightProfile,
    pub tower_scales: Vec<f64>,
    pub observer: ObserverWeights,
    pub svr_c_grid: Vec<f64>,
    pub svr_eps_grid: Vec<f64>,
    pub svr_seed: Option<u64>,
    pub svr_model: Option<PathBuf>,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let (c_grid, eps_grid) = crate::load_predict::default_grid();
        ExperimentConfig {
            seed: 2024,
            dt: 0.0125,
            duration: 600.0,
            params: TurbineParams::nrel_5mw(),
            design_wind: 18.0,
            bench_winds: vec![19.0, 17.0, 15.0],
            bench_ti: 0.10,
            bench_seeds: None,
            train_winds: vec![15.0, 17.0, 19.0],
            train_tis: vec![0.05, 0.15],
            train_seeds: None,
            sample_every: 8,
            sn_m: 4.0,
            sn_k: None,
            sn_target_ratio: 1.2,
            calibration: Calibration::PerWind,
            reference_wind: 17.0,
            gate_fraction: DEFAULT_GATE_FRACTION,
            life: LifetimeConfig {
                prognosis_period: 0.1,
                ..LifetimeConfig::default()
            },
            weights: WeightProfile::turbine_default(),
            tower_scales: crate::control::LADDER_TOWER_SCALES.to_vec(),
            observer: ObserverWeights::turbine_default(),
            svr_c_grid: c_grid,
            svr_eps_grid: eps_grid,
            svr_seed: None,
            svr_model: None,
            out: PathBuf::from("out"),
        }
    }
}

const KEYS: &[&str] = &[
    "seed",
    "dt",
    "duration",
    "turbine",
    "design_wind",
    "bench.winds",
    "bench.ti",
    "bench.seeds",
    "train.winds",
    "train.tis",
    "train.seeds",
    "sample_every",
    "sn.m",
    "sn.k",
    "sn.target_ratio",
    "sn.calibration",
    "sn.reference_wind",
    "rainflow.gate",
    "life.desired_lifetime",
    "life.damage_limit",
    "life.band",
    "life.dwell",
    "gains.state_weights",
    "gains.control_weight",
    "gains.integral_weight",
    "gains.tower_scales",
    "observer.process",
    "observer.disturbance",
    "observer.boost",
    "observer.measurement",
    "svr.c_grid",
    "svr.eps_grid",
    "svr.seed",
    "svr.model",
    "out",
];

impl ExperimentConfig {
    /// Load from a file, or the defaults when `path` is `default`. Relative
    /// paths inside the file resolve against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        if path.as_os_str() == "default" {
            return Ok(Self::default());
        }
        let text = read_text(path)?;
        let mut cfg = Self::parse(&path.display().to_string(), &text)?;
        if let Some(dir) = path.parent() {
            if let Some(m) = &cfg.svr_model {
                if m.is_relative() {
                    cfg.svr_model = Some(dir.join(m));
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parse without validating; problems with individual values are
    /// collected and reported together.
    pub fn parse(source: &str, text: &str) -> Result<Self> {
        let kv = parse_key_values(source, text)?;
        let mut cfg = Self::default();
        let mut problems = Vec::new();
        for (key, value) in &kv {
            if !KEYS.contains(&key.as_str()) {
                problems.push(format!("unknown key `{key}`"));
                continue;
            }
            if let Err(e) = cfg.set(key, value) {
                problems.push(format!("{key}: {e}"));
            }
        }
        if problems.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::Config(problems))
        }
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let f = || value.parse::<f64>().map_err(|e| format!("`{value}`: {e}"));
        let list = || parse_f64_list(value);
        let seeds = || -> std::result::Result<Vec<u64>, String> {
            value
                .split(',')
                .map(|t| t.trim().parse::<u64>().map_err(|e| format!("`{}`: {e}", t.trim())))
                .collect()
        };
        match key {
            "seed" => self.seed = value.parse().map_err(|e| format!("`{value}`: {e}"))?,
            "dt" => self.dt = f()?,
            "duration" => self.duration = f()?,
            "turbine" => match value {
                "nrel5mw" => self.params = TurbineParams::nrel_5mw(),
                other => return Err(format!("unknown turbine `{other}` (only nrel5mw)")),
            },
            "design_wind" => self.design_wind = f()?,
            "bench.winds" => self.bench_winds = list()?,
            "bench.ti" => self.bench_ti = f()?,
            "bench.seeds" => self.bench_seeds = Some(seeds()?),
            "train.winds" => self.train_winds = list()?,
            "train.tis" => self.train_tis = list()?,
            "train.seeds" => self.train_seeds = Some(seeds()?),
            "sample_every" => {
                self.sample_every = value.parse().map_err(|e| format!("`{value}`: {e}"))?
            }
            "sn.m" => self.sn_m = f()?,
            "sn.k" => {
                self.sn_k = if value == "auto" { None } else { Some(f()?) };
            }
            "sn.target_ratio" => self.sn_target_ratio = f()?,
            "sn.calibration" => {
                self.calibration = match value {
                    "per_wind" => Calibration::PerWind,
                    "single" => Calibration::Single,
                    other => return Err(format!("`{other}` (expected per_wind or single)")),
                }
            }
            "sn.reference_wind" => self.reference_wind = f()?,
            "rainflow.gate" => self.gate_fraction = f()?,
            "life.desired_lifetime" => self.life.desired_lifetime = f()?,
            "life.damage_limit" => self.life.damage_limit = f()?,
            "life.band" => self.life.band_fraction = f()?,
            "life.dwell" => self.life.dwell_min = f()?,
            "gains.state_weights" => self.weights.state = list()?,
            "gains.control_weight" => self.weights.control = f()?,
            "gains.integral_weight" => self.weights.integral = f()?,
            "gains.tower_scales" => self.tower_scales = list()?,
            "observer.process" => self.observer.process = list()?,
            "observer.disturbance" => self.observer.disturbance = f()?,
            "observer.boost" => self.observer.disturbance_boost = f()?,
            "observer.measurement" => {
                let v = list()?;
                self.observer.measurement = v
                    .try_into()
                    .map_err(|_| "expected two values".to_string())?;
            }
            "svr.c_grid" => self.svr_c_grid = list()?,
            "svr.eps_grid" => self.svr_eps_grid = list()?,
            "svr.seed" => self.svr_seed = Some(value.parse().map_err(|e| format!("`{value}`: {e}"))?),
            "svr.model" => self.svr_model = Some(PathBuf::from(value)),
            "out" => self.out = PathBuf::from(value),
            _ => unreachable!("key list checked by caller"),
        }
        Ok(())
    }

    /// Every violated constraint, one message each.
    pub fn problems(&self) -> Vec<String> {
        let mut p = Vec::new();
        if let Err(Error::Config(v)) = self.params.validate() {
            p.extend(v);
        }
        if !(self.dt > 0.0 && self.dt <= 0.05) {
            p.push(format!("dt must be in (0, 0.05] s, got {}", self.dt));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            p.push(format!("duration must be > 0, got {}", self.duration));
        } else if self.dt > 0.0 && self.duration < self.dt * self.sample_every as f64 * 2.0 {
            p.push(format!("duration {} too short for dt {}", self.duration, self.dt));
        }
        if self.dt > 0.0 && self.sample_every > 0 {
            let period = self.dt * self.sample_every as f64;
            if (self.life.prognosis_period - period).abs() > 1e-9 {
                p.push(format!(
                    "prognosis period {} must equal dt × sample_every = {period}",
                    self.life.prognosis_period
                ));
            }
        }
        if self.sample_every == 0 {
            p.push("sample_every must be ≥ 1".into());
        }
        let (_, rated, cutout) = self.params.cutin_rated_cutout_wind;
        if !(self.design_wind >= rated && self.design_wind <= cutout) {
            p.push(format!("design wind {} outside [{rated}, {cutout}]", self.design_wind));
        }
        for (name, winds) in [("bench.winds", &self.bench_winds), ("train.winds", &self.train_winds)] {
            if winds.is_empty() {
                p.push(format!("{name} is empty"));
            }
            for w in winds.iter() {
                if !(*w >= rated && *w <= cutout) {
                    p.push(format!("{name}: {w} m/s outside the above-rated region [{rated}, {cutout}]"));
                }
            }
        }
        for (name, ti) in std::iter::once(("bench.ti", &self.bench_ti))
            .chain(self.train_tis.iter().map(|t| ("train.tis", t)))
        {
            if !(0.0..0.5).contains(ti) {
                p.push(format!("{name}: turbulence intensity {ti} outside [0, 0.5)"));
            }
        }
        if self.train_tis.is_empty() {
            p.push("train.tis is empty".into());
        }
        if let Some(s) = &self.bench_seeds {
            if s.len() != self.bench_winds.len() {
                p.push(format!("bench.seeds has {} entries for {} winds", s.len(), self.bench_winds.len()));
            }
        }
        if let Some(s) = &self.train_seeds {
            let need = self.train_winds.len() * self.train_tis.len();
            if s.len() != need {
                p.push(format!("train.seeds has {} entries, need {need}", s.len()));
            }
        }
        if !(self.sn_m > 0.0) {
            p.push(format!("sn.m must be > 0, got {}", self.sn_m));
        }
        if let Some(k) = self.sn_k {
            if !(k > 0.0 && k.is_finite()) {
                p.push(format!("sn.k must be > 0, got {k}"));
            }
        }
        if !(self.sn_target_ratio > 0.0) {
            p.push(format!("sn.target_ratio must be > 0, got {}", self.sn_target_ratio));
        }
        if self.calibration == Calibration::Single && !self.bench_winds.contains(&self.reference_wind) {
            p.push(format!(
                "sn.reference_wind {} is not one of the benchmark winds",
                self.reference_wind
            ));
        }
        if !(0.0..1.0).contains(&self.gate_fraction) {
            p.push(format!("rainflow.gate must be in [0, 1), got {}", self.gate_fraction));
        }
        let mut life = self.life.clone();
        life.ladder_len = self.tower_scales.len();
        p.extend(life.problems());
        let n = crate::model::STATE_DIM;
        if self.weights.state.len() != n {
            p.push(format!("gains.state_weights needs {n} values"));
        }
        if self.observer.process.len() != n {
            p.push(format!("observer.process needs {n} values"));
        }
        if self.tower_scales.len() != 3 {
            p.push(format!("gains.tower_scales needs 3 values, got {}", self.tower_scales.len()));
        } else if !self.tower_scales.windows(2).all(|w| w[0] < w[1]) || self.tower_scales[0] <= 0.0 {
            p.push("gains.tower_scales must be positive and increasing".into());
        }
        if self.svr_c_grid.is_empty() || self.svr_c_grid.iter().any(|c| !(*c > 0.0)) {
            p.push("svr.c_grid must be non-empty with positive values".into());
        }
        if self.svr_eps_grid.is_empty() || self.svr_eps_grid.iter().any(|e| !(*e >= 0.0)) {
            p.push("svr.eps_grid must be non-empty with non-negative values".into());
        }
        if let Some(m) = &self.svr_model {
            if !m.is_file() {
                p.push(format!("svr.model {} does not exist", m.display()));
            }
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

    pub fn bench_seeds(&self) -> Vec<u64> {
        self.bench_seeds.clone().unwrap_or_else(|| {
            (0..self.bench_winds.len() as u64).map(|i| self.seed.wrapping_add(100 + i)).collect()
        })
    }

    /// Seeds for the training profiles, wind-major over `train.tis`.
    pub fn train_seeds(&self) -> Vec<u64> {
        self.train_seeds.clone().unwrap_or_else(|| {
            let n = (self.train_winds.len() * self.train_tis.len()) as u64;
            (0..n).map(|i| self.seed.wrapping_add(200 + i)).collect()
        })
    }

    pub fn svr_seed(&self) -> u64 {
        self.svr_seed.unwrap_or(self.seed.wrapping_add(300))
    }

    /// Lifetime settings with the ladder size filled in.
    pub fn lifetime(&self) -> LifetimeConfig {
        LifetimeConfig {
            ladder_len: self.tower_scales.len(),
            balanced_index: self.tower_scales.len() / 2,
            ..self.life.clone()
        }
    }

    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }
}
