use std::path::Path;

use super::{FeatureVector, Scaler};
use crate::error::{Error, Result};
use crate::io::{fmt_exact, read_numeric_csv, write_numeric_csv};

pub const DATASET_HEADER: [&str; 6] = [
    "time_s",
    "wind_ms",
    "tower_disp_m",
    "rotor_power_W",
    "tower_accel_ms2",
    "tower_moment_Nm",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub time: f64,
    pub features: FeatureVector,
    /// Tower-base fore-aft moment, N·m.
    pub target: f64,
}

/// Wind profile a block of rows was recorded under.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileTag {
    pub mean_wind: f64,
    pub turbulence_intensity: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub rows: Vec<Sample>,
    pub sources: Vec<ProfileTag>,
}

impl Dataset {
    pub fn new(rows: Vec<Sample>, sources: Vec<ProfileTag>) -> Self {
        Dataset { rows, sources }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Concatenate datasets, keeping every source tag.
    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a Dataset>) -> Dataset {
        let mut out = Dataset::default();
        for p in parts {
            out.rows.extend_from_slice(&p.rows);
            out.sources.extend_from_slice(&p.sources);
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self
            .rows
            .iter()
            .any(|r| !r.features.is_finite() || !r.target.is_finite() || !r.time.is_finite())
        {
            return Err(Error::InvalidInput("dataset contains non-finite entries".into()));
        }
        let first = self.rows.first().map(|r| r.target);
        if first.is_none() || self.rows.iter().all(|r| Some(r.target) == first) {
            return Err(Error::InvalidInput(
                "dataset needs at least two distinct target values".into(),
            ));
        }
        Ok(())
    }

    pub fn targets(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.target).collect()
    }

    pub(crate) fn map_standardized(&self, sc: &Scaler) -> Dataset {
        Dataset {
            rows: self
                .rows
                .iter()
                .map(|r| Sample {
                    time: r.time,
                    features: FeatureVector::from_array(sc.transform(&r.features)),
                    target: sc.transform_target(r.target),
                })
                .collect(),
            sources: self.sources.clone(),
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let rows = self.rows.iter().map(|r| {
            let f = r.features.to_array();
            vec![
                fmt_exact(r.time),
                fmt_exact(f[0]),
                fmt_exact(f[1]),
                fmt_exact(f[2]),
                fmt_exact(f[3]),
                fmt_exact(r.target),
            ]
        });
        write_numeric_csv(path, &DATASET_HEADER, rows)
    }

    /// Read a dataset CSV. Source tags are not stored in the file.
    pub fn read_csv(path: &Path) -> Result<Dataset> {
        let rows = read_numeric_csv(path, &DATASET_HEADER)?
            .into_iter()
            .map(|r| Sample {
                time: r[0],
                features: FeatureVector::from_array([r[1], r[2], r[3], r[4]]),
                target: r[5],
            })
            .collect();
        Ok(Dataset::new(rows, Vec::new()))
    }
}
