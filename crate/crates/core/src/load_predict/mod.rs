//! Tower fore-aft moment prediction with a linear ε-insensitive SVR.
//!
//! Predictors are the hub-height wind, tower-top displacement, rotor power
//! and tower-top acceleration. Features and target are standardized with
//! training-set statistics; the regression runs entirely in standardized
//! units and [`SvrModel::predict`] maps back to N·m.

mod dataset;
mod grid;
mod solver;

pub use dataset::{Dataset, ProfileTag, Sample, DATASET_HEADER};
pub use grid::{default_grid, grid_search, GridResult};
pub use solver::{dual_objective, reference_dual_solve, train_svr, train_svr_from, TrainReport};

use std::path::Path;

use crate::error::{ensure_finite, Error, Result};
use crate::io::{fmt_exact, parse_f64_list, parse_key_values, read_text, write_text};

pub const N_FEATURES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector {
    /// m/s
    pub wind: f64,
    /// m
    pub tower_fa_disp: f64,
    /// W
    pub rotor_power: f64,
    /// m/s²
    pub tower_fa_accel: f64,
}

impl FeatureVector {
    pub fn to_array(&self) -> [f64; N_FEATURES] {
        [self.wind, self.tower_fa_disp, self.rotor_power, self.tower_fa_accel]
    }

    pub fn from_array(a: [f64; N_FEATURES]) -> Self {
        FeatureVector {
            wind: a[0],
            tower_fa_disp: a[1],
            rotor_power: a[2],
            tower_fa_accel: a[3],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// Per-column affine standardization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaler {
    pub feature_mean: [f64; N_FEATURES],
    pub feature_std: [f64; N_FEATURES],
    pub target_mean: f64,
    pub target_std: f64,
}

impl Scaler {
    pub fn identity() -> Self {
        Scaler {
            feature_mean: [0.0; N_FEATURES],
            feature_std: [1.0; N_FEATURES],
            target_mean: 0.0,
            target_std: 1.0,
        }
    }

    pub fn transform(&self, f: &FeatureVector) -> [f64; N_FEATURES] {
        let a = f.to_array();
        std::array::from_fn(|j| (a[j] - self.feature_mean[j]) / self.feature_std[j])
    }

    pub fn inverse(&self, z: &[f64; N_FEATURES]) -> FeatureVector {
        FeatureVector::from_array(std::array::from_fn(|j| {
            z[j] * self.feature_std[j] + self.feature_mean[j]
        }))
    }

    pub fn transform_target(&self, y: f64) -> f64 {
        (y - self.target_mean) / self.target_std
    }

    pub fn inverse_target(&self, t: f64) -> f64 {
        t * self.target_std + self.target_mean
    }
}

/// Regularization cost and tube half-width (standardized target units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyper {
    pub cost_c: f64,
    pub epsilon: f64,
}

impl Hyper {
    pub fn validate(&self) -> Result<()> {
        if !(self.cost_c > 0.0 && self.cost_c.is_finite()) || !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "SVR needs C > 0 and epsilon >= 0, got C = {}, epsilon = {}",
                self.cost_c, self.epsilon
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvrModel {
    /// Weights on the standardized features.
    pub weights: [f64; N_FEATURES],
    pub bias: f64,
    pub scaler: Scaler,
    pub hyper: Hyper,
    /// Seed of the sample-visit order used in training.
    pub seed: u64,
}

impl SvrModel {
    /// Prediction in standardized units, `w·z + b`.
    pub fn predict_standardized(&self, z: &[f64; N_FEATURES]) -> f64 {
        self.weights.iter().zip(z).map(|(w, x)| w * x).sum::<f64>() + self.bias
    }

    /// Predicted tower moment in N·m.
    pub fn predict(&self, f: &FeatureVector) -> Result<f64> {
        if !f.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite feature vector {f:?}")));
        }
        let y = self
            .scaler
            .inverse_target(self.predict_standardized(&self.scaler.transform(f)));
        ensure_finite("predicted moment", y)?;
        Ok(y)
    }

    pub fn to_text(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| fmt_exact(*x)).collect::<Vec<_>>().join(", ");
        let mut s = String::from("# linear epsilon-SVR, standardized features\n");
        s += &format!("weights = {}\n", list(&self.weights));
        s += &format!("bias = {}\n", fmt_exact(self.bias));
        s += &format!("feature_mean = {}\n", list(&self.scaler.feature_mean));
        s += &format!("feature_std = {}\n", list(&self.scaler.feature_std));
        s += &format!("target_mean = {}\n", fmt_exact(self.scaler.target_mean));
        s += &format!("target_std = {}\n", fmt_exact(self.scaler.target_std));
        s += &format!("cost_c = {}\n", fmt_exact(self.hyper.cost_c));
        s += &format!("epsilon = {}\n", fmt_exact(self.hyper.epsilon));
        s += &format!("seed = {}\n", self.seed);
        s
    }

    pub fn from_text(source: &str, text: &str) -> Result<Self> {
        let kv = parse_key_values(source, text)?;
        let get = |k: &str| -> Result<&str> {
            kv.iter()
                .find(|(key, _)| key == k)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| Error::parse(source, format!("missing key `{k}`")))
        };
        let scalar = |k: &str| -> Result<f64> {
            get(k)?
                .parse::<f64>()
                .map_err(|e| Error::parse(source, format!("{k}: {e}")))
        };
        let vec4 = |k: &str| -> Result<[f64; N_FEATURES]> {
            let v = parse_f64_list(get(k)?).map_err(|e| Error::parse(source, format!("{k}: {e}")))?;
            v.try_into()
                .map_err(|_| Error::parse(source, format!("{k}: expected {N_FEATURES} values")))
        };
        let scaler = Scaler {
            feature_mean: vec4("feature_mean")?,
            feature_std: vec4("feature_std")?,
            target_mean: scalar("target_mean")?,
            target_std: scalar("target_std")?,
        };
        if scaler.feature_std.iter().chain([&scaler.target_std]).any(|s| !(*s > 0.0)) {
            return Err(Error::parse(source, "scaler standard deviations must be > 0"));
        }
        let hyper = Hyper {
            cost_c: scalar("cost_c")?,
            epsilon: scalar("epsilon")?,
        };
        hyper.validate()?;
        Ok(SvrModel {
            weights: vec4("weights")?,
            bias: scalar("bias")?,
            scaler,
            hyper,
            seed: get("seed")?
                .parse::<u64>()
                .map_err(|e| Error::parse(source, format!("seed: {e}")))?,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_text())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&path.display().to_string(), &read_text(path)?)
    }
}

/// Compute the scaler of `ds` and return the standardized copy.
pub fn standardize(ds: &Dataset) -> Result<(Dataset, Scaler)> {
    ds.validate()?;
    let n = ds.len() as f64;
    let mut feature_mean = [0.0; N_FEATURES];
    let mut feature_std = [0.0; N_FEATURES];
    for j in 0..N_FEATURES {
        let col = ds.rows.iter().map(|r| r.features.to_array()[j]);
        let mean = col.clone().sum::<f64>() / n;
        let var = col.map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        if !(var.sqrt() > 1e-12 * mean.abs().max(1.0)) {
            return Err(Error::ZeroVariance {
                feature: ["wind", "tower_fa_disp", "rotor_power", "tower_fa_accel"][j].to_string(),
            });
        }
        feature_mean[j] = mean;
        feature_std[j] = var.sqrt();
    }
    let target_mean = ds.rows.iter().map(|r| r.target).sum::<f64>() / n;
    let target_std = (ds.rows.iter().map(|r| (r.target - target_mean).powi(2)).sum::<f64>() / n).sqrt();
    if !(target_std > 0.0) {
        return Err(Error::ZeroVariance {
            feature: "target".into(),
        });
    }
    let scaler = Scaler {
        feature_mean,
        feature_std,
        target_mean,
        target_std,
    };
    Ok((ds.map_standardized(&scaler), scaler))
}

/// RMSE and normalized accuracy `1 − RMSE / (max − min)` of the actuals.
pub fn accuracy(pred: &[f64], actual: &[f64]) -> Result<(f64, f64)> {
    if pred.len() != actual.len() || pred.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "{} predictions for {} actuals",
            pred.len(),
            actual.len()
        )));
    }
    let rmse = (pred
        .iter()
        .zip(actual)
        .map(|(p, a)| (p - a).powi(2))
        .sum::<f64>()
        / pred.len() as f64)
        .sqrt();
    let (lo, hi) = actual
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(*x), h.max(*x)));
    if !(hi > lo) {
        return Err(Error::ZeroRange);
    }
    Ok((rmse, 1.0 - rmse / (hi - lo)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_dataset() -> Dataset {
        let rows = (0..50)
            .map(|k| {
                let t = k as f64;
                Sample {
                    time: t * 0.1,
                    features: FeatureVector {
                        wind: 15.0 + (0.3 * t).sin(),
                        tower_fa_disp: 0.3 + 0.01 * (0.7 * t).cos(),
                        rotor_power: 5.3e6 + 1e4 * (0.11 * t).sin(),
                        tower_fa_accel: 0.05 * (1.3 * t).sin(),
                    },
                    target: 5.0e7 + 1e6 * (0.3 * t).sin(),
                }
            })
            .collect();
        Dataset::new(rows, vec![])
    }

    #[test]
    fn standardized_columns_have_unit_moments() {
        let (z, _) = standardize(&toy_dataset()).unwrap();
        for j in 0..N_FEATURES {
            let col: Vec<f64> = z.rows.iter().map(|r| r.features.to_array()[j]).collect();
            let m = col.iter().sum::<f64>() / col.len() as f64;
            let s = (col.iter().map(|x| (x - m).powi(2)).sum::<f64>() / col.len() as f64).sqrt();
            assert!(m.abs() < 1e-10 && (s - 1.0).abs() < 1e-10, "{j}: {m} {s}");
        }
    }

    #[test]
    fn standardize_round_trip() {
        let ds = toy_dataset();
        let (z, sc) = standardize(&ds).unwrap();
        for (a, b) in ds.rows.iter().zip(&z.rows) {
            let back = sc.inverse(&b.features.to_array()).to_array();
            for (x, y) in a.features.to_array().iter().zip(back) {
                assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-300) + 1e-15);
            }
            assert!((sc.inverse_target(b.target) - a.target).abs() <= 1e-12 * a.target.abs());
        }
    }

    #[test]
    fn constant_column_rejected() {
        let mut ds = toy_dataset();
        for r in &mut ds.rows {
            r.features.tower_fa_accel = 0.2;
        }
        assert!(matches!(standardize(&ds), Err(Error::ZeroVariance { .. })));
    }

    #[test]
    fn accuracy_definition() {
        let a = [1.0, 2.0, 3.0, 5.0];
        assert_eq!(accuracy(&a, &a).unwrap(), (0.0, 1.0));
        let shifted: Vec<f64> = a.iter().map(|x| x + 0.5).collect();
        let (rmse, acc) = accuracy(&shifted, &a).unwrap();
        assert!((rmse - 0.5).abs() < 1e-15);
        assert!((acc - (1.0 - 0.5 / 4.0)).abs() < 1e-15);
        assert!(matches!(accuracy(&[1.0], &[1.0]), Err(Error::ZeroRange)));
        assert!(accuracy(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn implied_target_range_from_reported_accuracy() {
        // 597.3 kN·m RMSE at 98.5 % accuracy under 1 − rmse/range
        let range: f64 = 597.3e3 / (1.0 - 0.985);
        assert!((range - 39.82e6).abs() < 0.01e6);
    }

    #[test]
    fn prediction_basics() {
        let mut m = SvrModel {
            weights: [0.0; 4],
            bias: 0.25,
            scaler: Scaler::identity(),
            hyper: Hyper { cost_c: 1.0, epsilon: 0.0 },
            seed: 0,
        };
        assert_eq!(m.predict(&FeatureVector::from_array([0.0; 4])).unwrap(), 0.25);
        m.weights = [1.5, -2.0, 0.0, 3.0];
        assert_eq!(m.predict_standardized(&[1.0, 0.0, 0.0, 0.0]), 1.75);
        assert!(m.predict(&FeatureVector::from_array([f64::NAN, 0.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn model_file_round_trip_is_exact() {
        let (_, scaler) = standardize(&toy_dataset()).unwrap();
        let m = SvrModel {
            weights: [0.1, -1.0 / 3.0, 2.0 / 7.0, 1e-20],
            bias: -0.0123456789,
            scaler,
            hyper: Hyper { cost_c: 10.0, epsilon: 0.01 },
            seed: 99,
        };
        assert_eq!(SvrModel::from_text("mem", &m.to_text()).unwrap(), m);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("svr.model");
        m.save(&p).unwrap();
        assert_eq!(SvrModel::load(&p).unwrap(), m);
    }
}
