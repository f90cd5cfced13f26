use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::harness::config::{Calibration, ExperimentConfig};
use crate::harness::pipeline::{bench_profiles, ProfileSpec};
use crate::harness::sim::{run_scenario, ControlDesign, ScenarioInputs, SimulationTrace};
use crate::io::{fmt_exact, write_numeric_csv};
use crate::lifetime::Scheme;
use crate::load_predict::SvrModel;
use crate::model::WindProfile;
use crate::rainflow::{estimate_lifetime, SnCurve};

pub const METRICS_HEADER: [&str; 8] = [
    "scheme",
    "wind_mean_mps",
    "tower_fa_std_Nm",
    "pitch_rate_rms_radps",
    "gen_speed_rmse_radps",
    "gen_power_rmse_W",
    "final_damage_ratio",
    "L_e_end_s",
];

/// One benchmark run, summarised.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub scheme: Scheme,
    pub wind_mean: f64,
    /// Standard deviation of the tower-base fore-aft moment, N·m.
    pub tower_fa_std: f64,
    /// rad/s
    pub pitch_rate_rms: f64,
    /// Against rated generator speed, rad/s.
    pub gen_speed_rmse: f64,
    /// Against rated power, W.
    pub gen_power_rmse: f64,
    /// Closed-cycle damage of the true moment over the run, divided by D_d.
    pub final_damage_ratio: f64,
    /// Lifetime estimate from that damage, s.
    pub l_e_end: f64,
}

fn std_dev(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
}

fn rms_about(x: &[f64], center: f64) -> f64 {
    (x.iter().map(|v| (v - center).powi(2)).sum::<f64>() / x.len() as f64).sqrt()
}

impl MetricsRow {
    pub fn from_trace(tr: &SimulationTrace, cfg: &ExperimentConfig) -> Result<Self> {
        let scheme = tr
            .scheme
            .ok_or_else(|| Error::InvalidInput("trace has no scheme".into()))?;
        if tr.is_empty() {
            return Err(Error::InvalidInput("empty trace".into()));
        }
        let life = cfg.lifetime();
        let elapsed = tr.adaptation.last().map(|r| r.time).unwrap_or(0.0);
        Ok(MetricsRow {
            scheme,
            wind_mean: tr.wind_mean,
            tower_fa_std: std_dev(&tr.tower_moment),
            pitch_rate_rms: rms_about(&tr.pitch_rate, 0.0),
            gen_speed_rmse: rms_about(&tr.generator_speed, cfg.params.rated_generator_speed()),
            gen_power_rmse: rms_about(&tr.generator_power, cfg.params.rated_power),
            final_damage_ratio: tr.audit_closed_damage / life.damage_limit,
            l_e_end: estimate_lifetime(tr.audit_closed_damage, elapsed, life.damage_limit)?,
        })
    }

    fn values(&self) -> [f64; 7] {
        [
            self.wind_mean,
            self.tower_fa_std,
            self.pitch_rate_rms,
            self.gen_speed_rmse,
            self.gen_power_rmse,
            self.final_damage_ratio,
            self.l_e_end,
        ]
    }
}

pub fn write_metrics(path: &Path, rows: &[MetricsRow]) -> Result<()> {
    write_numeric_csv(
        path,
        &METRICS_HEADER,
        rows.iter().map(|r| {
            std::iter::once(r.scheme.name().to_string())
                .chain(r.values().iter().map(|v| fmt_exact(*v)))
                .collect::<Vec<_>>()
        }),
    )
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRow>> {
    let name = path.display().to_string();
    let mut r = csv::Reader::from_path(path)?;
    let found: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if found != METRICS_HEADER {
        return Err(Error::parse(&name, format!("unexpected header {found:?}")));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != METRICS_HEADER.len() {
            return Err(Error::parse(&name, format!("row has {} fields", rec.len())));
        }
        let scheme: Scheme = rec[0].parse()?;
        let v = (1..8)
            .map(|i| rec[i].trim().parse::<f64>().map_err(|e| Error::parse(&name, e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        rows.push(MetricsRow {
            scheme,
            wind_mean: v[0],
            tower_fa_std: v[1],
            pitch_rate_rms: v[2],
            gen_speed_rmse: v[3],
            gen_power_rmse: v[4],
            final_damage_ratio: v[5],
            l_e_end: v[6],
        });
    }
    Ok(rows)
}

/// Per-scheme averages over the winds and the change against Baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub scheme: Scheme,
    pub avg: MetricsRow,
    /// Percent change of each averaged metric relative to Baseline, in the
    /// order std, pitch-rate RMS, speed RMSE, power RMSE.
    pub pct_vs_baseline: [f64; 4],
}

pub fn compare(rows: &[MetricsRow]) -> Result<Vec<Comparison>> {
    let avg = |s: Scheme| -> Option<MetricsRow> {
        let sel: Vec<&MetricsRow> = rows.iter().filter(|r| r.scheme == s).collect();
        if sel.is_empty() {
            return None;
        }
        let n = sel.len() as f64;
        let mean = |f: fn(&MetricsRow) -> f64| sel.iter().map(|r| f(r)).sum::<f64>() / n;
        Some(MetricsRow {
            scheme: s,
            wind_mean: mean(|r| r.wind_mean),
            tower_fa_std: mean(|r| r.tower_fa_std),
            pitch_rate_rms: mean(|r| r.pitch_rate_rms),
            gen_speed_rmse: mean(|r| r.gen_speed_rmse),
            gen_power_rmse: mean(|r| r.gen_power_rmse),
            final_damage_ratio: mean(|r| r.final_damage_ratio),
            l_e_end: mean(|r| r.l_e_end),
        })
    };
    let base = avg(Scheme::Baseline).ok_or_else(|| Error::InvalidInput("no Baseline rows".into()))?;
    let pct = |a: f64, b: f64| 100.0 * (a - b) / b;
    Ok(Scheme::ALL
        .iter()
        .filter_map(|s| avg(*s))
        .map(|a| Comparison {
            scheme: a.scheme,
            pct_vs_baseline: [
                pct(a.tower_fa_std, base.tower_fa_std),
                pct(a.pitch_rate_rms, base.pitch_rate_rms),
                pct(a.gen_speed_rmse, base.gen_speed_rmse),
                pct(a.gen_power_rmse, base.gen_power_rmse),
            ],
            avg: a,
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct BenchmarkResult {
    pub profiles: Vec<ProfileSpec>,
    /// S-N curve used for each profile.
    pub sn_curves: Vec<SnCurve>,
    /// Baseline, Life1, Life2 for each wind, wind-major.
    pub traces: Vec<SimulationTrace>,
    pub rows: Vec<MetricsRow>,
}

/// K that puts the Baseline closed-cycle damage at `ratio`·D_d, given the
/// damage obtained with K = 1.
pub fn calibrate_k(damage_at_unit_k: f64, ratio: f64, damage_limit: f64) -> Result<f64> {
    if !(damage_at_unit_k > 0.0) || !damage_at_unit_k.is_finite() {
        return Err(Error::InvalidInput(format!(
            "cannot calibrate S-N constant from damage {damage_at_unit_k}"
        )));
    }
    Ok(damage_at_unit_k / (ratio * damage_limit))
}

/// One S-N curve per wind profile. With `sn.k` set in the config every
/// profile uses it; otherwise K is calibrated from a Baseline run so that
/// Baseline ends at `sn.target_ratio`·D_d, per profile or once at the
/// reference wind.
pub fn calibrate_sn_curves(cfg: &ExperimentConfig, design: &ControlDesign, winds: &[WindProfile]) -> Result<Vec<SnCurve>> {
    let life = cfg.lifetime();
    Ok(match cfg.sn_k {
        Some(k) => vec![SnCurve::new(cfg.sn_m, k)?; winds.len()],
        None => {
            let unit = SnCurve::new(cfg.sn_m, 1.0)?;
            let probe = |wind: &WindProfile| -> Result<f64> {
                let inputs = ScenarioInputs {
                    design,
                    wind,
                    sn: unit,
                    svr: None,
                    adaptation: false,
                };
                Ok(run_scenario(cfg, Scheme::Baseline, &inputs)?.audit_closed_damage)
            };
            let ks = match cfg.calibration {
                Calibration::PerWind => winds
                    .par_iter()
                    .map(|w| calibrate_k(probe(w)?, cfg.sn_target_ratio, life.damage_limit))
                    .collect::<Result<Vec<_>>>()?,
                Calibration::Single => {
                    let seed = cfg
                        .bench_winds
                        .iter()
                        .position(|w| *w == cfg.reference_wind)
                        .map_or(cfg.bench_seeds()[0], |i| cfg.bench_seeds()[i]);
                    let reference = ProfileSpec {
                        mean: cfg.reference_wind,
                        ti: cfg.bench_ti,
                        seed,
                    }
                    .generate(cfg)?;
                    let k = calibrate_k(probe(&reference)?, cfg.sn_target_ratio, life.damage_limit)?;
                    vec![k; winds.len()]
                }
            };
            ks.into_iter()
                .map(|k| SnCurve::new(cfg.sn_m, k))
                .collect::<Result<Vec<_>>>()?
        }
    })
}

/// Nine runs: Baseline, Life1, Life2 at each benchmark wind.
pub fn run_benchmark(cfg: &ExperimentConfig, design: &ControlDesign, svr: &SvrModel) -> Result<BenchmarkResult> {
    cfg.validate()?;
    let profiles = bench_profiles(cfg);
    let winds = profiles
        .iter()
        .map(|p| p.generate(cfg))
        .collect::<Result<Vec<WindProfile>>>()?;
    let sn_curves = calibrate_sn_curves(cfg, design, &winds)?;

    let jobs: Vec<(usize, Scheme)> = (0..profiles.len())
        .flat_map(|i| Scheme::ALL.iter().map(move |s| (i, *s)))
        .collect();
    let traces = jobs
        .par_iter()
        .map(|(i, s)| {
            let inputs = ScenarioInputs {
                design,
                wind: &winds[*i],
                sn: sn_curves[*i],
                svr: Some(svr),
                adaptation: true,
            };
            run_scenario(cfg, *s, &inputs)
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = traces
        .iter()
        .map(|t| MetricsRow::from_trace(t, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(BenchmarkResult {
        profiles,
        sn_curves,
        traces,
        rows,
    })
}
