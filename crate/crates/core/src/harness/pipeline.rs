use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::harness::sim::{run_scenario, ControlDesign, ScenarioInputs};
use crate::io::{fmt_exact, write_text};
use crate::lifetime::Scheme;
use crate::load_predict::{
    accuracy, grid_search, train_svr, Dataset, FeatureVector, Hyper, ProfileTag, Sample, SvrModel,
};
use crate::model::{gen_wind_profile, WindProfile};
use crate::rainflow::SnCurve;

/// One wind profile of the protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSpec {
    pub mean: f64,
    pub ti: f64,
    pub seed: u64,
}

impl ProfileSpec {
    pub fn generate(&self, cfg: &ExperimentConfig) -> Result<WindProfile> {
        gen_wind_profile(self.mean, self.ti, cfg.duration, cfg.dt, self.seed)
    }

    pub fn tag(&self) -> ProfileTag {
        ProfileTag {
            mean_wind: self.mean,
            turbulence_intensity: self.ti,
            seed: self.seed,
        }
    }

    /// File-name stem, e.g. `w17_ti10`.
    pub fn stem(&self) -> String {
        format!("w{}_ti{}", self.mean, (self.ti * 100.0).round())
    }
}

pub fn training_profiles(cfg: &ExperimentConfig) -> Vec<ProfileSpec> {
    let seeds = cfg.train_seeds();
    let mut out = Vec::new();
    for w in &cfg.train_winds {
        for ti in &cfg.train_tis {
            out.push(ProfileSpec {
                mean: *w,
                ti: *ti,
                seed: seeds[out.len()],
            });
        }
    }
    out
}

/// The benchmark profiles double as the held-out test set.
pub fn bench_profiles(cfg: &ExperimentConfig) -> Vec<ProfileSpec> {
    cfg.bench_winds
        .iter()
        .zip(cfg.bench_seeds())
        .map(|(w, s)| ProfileSpec {
            mean: *w,
            ti: cfg.bench_ti,
            seed: s,
        })
        .collect()
}

/// Baseline closed-loop run sampled at the prognosis rate.
pub fn collect_dataset(cfg: &ExperimentConfig, design: &ControlDesign, profile: &ProfileSpec) -> Result<Dataset> {
    let wind = profile.generate(cfg)?;
    let inputs = ScenarioInputs {
        design,
        wind: &wind,
        sn: SnCurve::new(cfg.sn_m, 1.0)?,
        svr: None,
        adaptation: false,
    };
    let tr = run_scenario(cfg, Scheme::Baseline, &inputs)?;
    let rows = (0..tr.len())
        .step_by(cfg.sample_every)
        .map(|k| Sample {
            time: tr.time[k],
            features: FeatureVector {
                wind: tr.wind[k],
                tower_fa_disp: tr.tower_disp[k],
                rotor_power: tr.rotor_power[k],
                tower_fa_accel: tr.tower_accel[k],
            },
            target: tr.tower_moment[k],
        })
        .collect();
    Ok(Dataset::new(rows, vec![profile.tag()]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileScore {
    pub profile: ProfileSpec,
    pub rmse: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineReport {
    pub best: Hyper,
    pub grid: Vec<(Hyper, f64)>,
    pub train_rows: usize,
    pub test_rows: usize,
    pub train_passes: usize,
    pub converged: bool,
    pub train_rmse: f64,
    pub train_accuracy: f64,
    pub test_rmse: f64,
    pub test_accuracy: f64,
    pub per_profile: Vec<ProfileScore>,
}

impl PipelineReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# SVR tower-moment predictor");
        let _ = writeln!(s, "train_rows = {}", self.train_rows);
        let _ = writeln!(s, "test_rows = {}", self.test_rows);
        let _ = writeln!(s, "best_cost_c = {}", fmt_exact(self.best.cost_c));
        let _ = writeln!(s, "best_epsilon = {}", fmt_exact(self.best.epsilon));
        let _ = writeln!(s, "train_passes = {}", self.train_passes);
        let _ = writeln!(s, "converged = {}", self.converged);
        let _ = writeln!(s, "train_rmse_Nm = {}", fmt_exact(self.train_rmse));
        let _ = writeln!(s, "train_accuracy = {}", fmt_exact(self.train_accuracy));
        let _ = writeln!(s, "test_rmse_Nm = {}", fmt_exact(self.test_rmse));
        let _ = writeln!(s, "test_accuracy = {}", fmt_exact(self.test_accuracy));
        let _ = writeln!(s, "# accuracy = 1 - RMSE / (max - min of the actual moment)");
        let _ = writeln!(s, "# grid: cost_c, epsilon, validation_rmse_Nm");
        for (h, r) in &self.grid {
            let _ = writeln!(s, "grid = {}, {}, {}", fmt_exact(h.cost_c), fmt_exact(h.epsilon), fmt_exact(*r));
        }
        let _ = writeln!(s, "# test profiles: mean_wind, ti, seed, rmse_Nm, accuracy");
        for p in &self.per_profile {
            let _ = writeln!(
                s,
                "test = {}, {}, {}, {}, {}",
                p.profile.mean,
                p.profile.ti,
                p.profile.seed,
                fmt_exact(p.rmse),
                fmt_exact(p.accuracy)
            );
        }
        s
    }
}

/// Hold out the final 20 % of every profile for hyperparameter selection.
fn split_for_validation(parts: &[Dataset]) -> (Dataset, Dataset) {
    let mut fit = Dataset::default();
    let mut val = Dataset::default();
    for p in parts {
        let cut = p.len() * 4 / 5;
        fit.rows.extend_from_slice(&p.rows[..cut]);
        val.rows.extend_from_slice(&p.rows[cut..]);
        fit.sources.extend_from_slice(&p.sources);
        val.sources.extend_from_slice(&p.sources);
    }
    (fit, val)
}

/// Six training runs and three test runs, grid search, final fit and
/// evaluation. With `out`, writes nine dataset CSVs, `svr.model` and
/// `svr_report.txt`.
pub fn train_pipeline(
    cfg: &ExperimentConfig,
    design: &ControlDesign,
    out: Option<&Path>,
) -> Result<(SvrModel, PipelineReport)> {
    cfg.validate()?;
    let train_specs = training_profiles(cfg);
    let test_specs = bench_profiles(cfg);
    let all: Vec<ProfileSpec> = train_specs.iter().chain(&test_specs).copied().collect();
    let outcomes: Vec<Result<Dataset>> = all.par_iter().map(|p| collect_dataset(cfg, design, p)).collect();
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (i, (p, d)) in all.iter().zip(&outcomes).enumerate() {
            if let Ok(d) = d {
                let role = if i < train_specs.len() { "train" } else { "test" };
                d.write_csv(&dir.join(format!("dataset_{role}_{}.csv", p.stem())))?;
            }
        }
    }
    if let Some(pos) = outcomes.iter().position(Result::is_err) {
        let failed = all[pos];
        let err = outcomes.into_iter().nth(pos).expect("index in range").unwrap_err();
        if let Some(dir) = out {
            // whatever was written above is incomplete
            write_text(
                &dir.join("PARTIAL.txt"),
                &format!(
                    "training pipeline aborted: profile {} failed: {err}\nthe dataset files in this directory are partial\n",
                    failed.stem()
                ),
            )?;
        }
        return Err(err);
    }
    let datasets: Vec<Dataset> = outcomes.into_iter().map(|d| d.expect("checked")).collect();
    let (train_parts, test_parts) = datasets.split_at(train_specs.len());

    let (fit, val) = split_for_validation(train_parts);
    let grid = grid_search(&fit, &val, &cfg.svr_c_grid, &cfg.svr_eps_grid, cfg.svr_seed())?;
    let train = Dataset::concat(train_parts);
    let (model, rep) = train_svr(&train, grid.best, cfg.svr_seed())?;
    let (_, train_accuracy) = {
        let preds = train
            .rows
            .iter()
            .map(|r| model.predict(&r.features))
            .collect::<Result<Vec<_>>>()?;
        accuracy(&preds, &train.targets())?
    };

    let score = |d: &Dataset| -> Result<(f64, f64)> {
        let preds = d
            .rows
            .iter()
            .map(|r| model.predict(&r.features))
            .collect::<Result<Vec<_>>>()?;
        accuracy(&preds, &d.targets())
    };
    let test = Dataset::concat(test_parts);
    let (test_rmse, test_accuracy) = score(&test)?;
    let per_profile = test_specs
        .iter()
        .zip(test_parts)
        .map(|(p, d)| {
            score(d).map(|(rmse, accuracy)| ProfileScore {
                profile: *p,
                rmse,
                accuracy,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let report = PipelineReport {
        best: grid.best,
        grid: grid.table,
        train_rows: train.len(),
        test_rows: test.len(),
        train_passes: rep.passes,
        converged: rep.converged,
        train_rmse: rep.training_rmse,
        train_accuracy,
        test_rmse,
        test_accuracy,
        per_profile,
    };
    if let Some(dir) = out {
        model.save(&dir.join("svr.model"))?;
        write_text(&dir.join("svr_report.txt"), &report.to_text())?;
    }
    Ok((model, report))
}
