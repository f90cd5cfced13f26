//! Seeded hub-height wind time series.
//!
//! Turbulence is unit white noise through a first-order low-pass filter
//! with a 10 s time constant, started in its stationary distribution, then
//! rescaled so that the sample standard deviation is exactly `ti × mean`
//! and the sample mean is exactly `mean`. Samples are floored at 0.1 m/s.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::io::{fmt_sig, read_numeric_csv, write_numeric_csv};

/// Low-pass time constant of the turbulence filter, s.
pub const TURBULENCE_TIME_CONSTANT: f64 = 10.0;
const WIND_FLOOR: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct WindProfile {
    /// m/s, one per time step starting at t = 0.
    pub samples: Vec<f64>,
    /// s
    pub dt: f64,
    pub mean: f64,
    pub turbulence_intensity: f64,
    /// `None` for profiles loaded from file.
    pub seed: Option<u64>,
}

impl WindProfile {
    pub fn constant(mean: f64, duration: f64, dt: f64) -> Self {
        let n = (duration / dt).round() as usize;
        WindProfile {
            samples: vec![mean; n],
            dt,
            mean,
            turbulence_intensity: 0.0,
            seed: None,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 * self.dt
    }

    /// Sample mean and population standard deviation.
    pub fn sample_stats(&self) -> (f64, f64) {
        mean_std(&self.samples)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let rows = self
            .samples
            .iter()
            .enumerate()
            .map(|(k, v)| vec![fmt_sig(k as f64 * self.dt, 9), fmt_sig(*v, 9)]);
        write_numeric_csv(path, &["time_s", "wind_ms"], rows)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let table = read_numeric_csv(path, &["time_s", "wind_ms"])?;
        if table.len() < 2 {
            return Err(Error::parse(path.display().to_string(), "need at least two rows"));
        }
        let dt = table[1][0] - table[0][0];
        if !(dt > 0.0) {
            return Err(Error::parse(path.display().to_string(), "time column not increasing"));
        }
        let samples: Vec<f64> = table.iter().map(|r| r[1]).collect();
        if samples.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::parse(path.display().to_string(), "wind samples must be > 0"));
        }
        let (mean, std) = mean_std(&samples);
        Ok(WindProfile {
            samples,
            dt,
            mean,
            turbulence_intensity: std / mean,
            seed: None,
        })
    }
}

pub(crate) fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn gen_wind_profile(mean: f64, ti: f64, duration: f64, dt: f64, seed: u64) -> Result<WindProfile> {
    let mut problems = Vec::new();
    if !(mean > 0.0 && mean.is_finite()) {
        problems.push(format!("mean wind must be > 0, got {mean}"));
    }
    if !(0.0..0.5).contains(&ti) {
        problems.push(format!("turbulence intensity must be in [0, 0.5), got {ti}"));
    }
    if !(duration > 0.0 && duration.is_finite()) {
        problems.push(format!("duration must be > 0, got {duration}"));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        problems.push(format!("dt must be > 0, got {dt}"));
    }
    if !problems.is_empty() {
        return Err(Error::InvalidInput(problems.join("; ")));
    }
    let n = ((duration / dt).round() as usize).max(1);
    if ti == 0.0 || n < 2 {
        return Ok(WindProfile {
            samples: vec![mean; n],
            dt,
            mean,
            turbulence_intensity: ti,
            seed: Some(seed),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alpha = (-dt / TURBULENCE_TIME_CONSTANT).exp();
    let drive = (1.0 - alpha * alpha).sqrt();
    let mut state: f64 = StandardNormal.sample(&mut rng);
    let mut raw = Vec::with_capacity(n);
    for _ in 0..n {
        raw.push(state);
        let w: f64 = StandardNormal.sample(&mut rng);
        state = alpha * state + drive * w;
    }
    let (m, s) = mean_std(&raw);
    let sigma = ti * mean;
    let samples = raw
        .iter()
        .map(|r| (mean + sigma * (r - m) / s).max(WIND_FLOOR))
        .collect();
    Ok(WindProfile {
        samples,
        dt,
        mean,
        turbulence_intensity: ti,
        seed: Some(seed),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn turbulence_intensity_matches_request() {
        let w = gen_wind_profile(17.0, 0.10, 600.0, 0.0125, 42).unwrap();
        let (m, s) = w.sample_stats();
        let ratio = s / m;
        assert!((0.09..=0.11).contains(&ratio), "ratio {ratio}");
        assert_eq!(w.len(), 48_000);
        assert!(w.samples.iter().all(|v| *v > 0.0));
    }

    #[test]
    fn zero_ti_is_constant() {
        let w = gen_wind_profile(12.0, 0.0, 10.0, 0.1, 1).unwrap();
        assert!(w.samples.iter().all(|v| *v == 12.0));
    }

    #[test]
    fn same_seed_same_samples() {
        let a = gen_wind_profile(15.0, 0.15, 100.0, 0.0125, 7).unwrap();
        let b = gen_wind_profile(15.0, 0.15, 100.0, 0.0125, 7).unwrap();
        let c = gen_wind_profile(15.0, 0.15, 100.0, 0.0125, 8).unwrap();
        assert_eq!(a.samples, b.samples);
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn invalid_arguments_rejected() {
        assert!(gen_wind_profile(0.0, 0.1, 10.0, 0.1, 0).is_err());
        assert!(gen_wind_profile(10.0, 0.5, 10.0, 0.1, 0).is_err());
        assert!(gen_wind_profile(10.0, 0.1, 0.0, 0.1, 0).is_err());
    }

    #[test]
    fn csv_round_trip_at_nine_digits() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("wind.csv");
        let w = gen_wind_profile(17.0, 0.1, 20.0, 0.0125, 3).unwrap();
        w.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("time_s,wind_ms\n"));
        let back = WindProfile::read_csv(&path).unwrap();
        assert_eq!(back.len(), w.len());
        for (a, b) in back.samples.iter().zip(&w.samples) {
            assert!((a - b).abs() <= 1e-8 * b.abs());
        }
        assert!((back.dt - w.dt).abs() < 1e-9);
    }
}
