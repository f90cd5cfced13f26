//! Streaming three-point rainflow counting with Miner's-rule damage.
//!
//! Samples are reduced to turning points on the fly. A reversal only
//! counts once the signal has moved back from the candidate extreme by
//! more than the hysteresis gate, `gate_fraction × (running max − running
//! min)`. Every confirmed turning point goes onto one stack; whenever the
//! three newest points X, Y, Z satisfy `|X − Y| ≤ |Y − Z|`, X and Y close a
//! full cycle and are removed, and the check repeats. Whatever is left on
//! the stack at [`RainflowState::finalize`] is counted as half cycles.
//!
//! ```
//! use wtlife::rainflow::{RainflowState, SnCurve};
//!
//! let sn = SnCurve::new(4.0, 1.0e6).unwrap();
//! let mut rf = RainflowState::new(0.0).unwrap();
//! for (k, x) in [0.0, 2.0, -1.0, 1.0, -3.0].iter().enumerate() {
//!     rf.push_sample(*x, k as f64, &sn).unwrap();
//! }
//! rf.finalize(&sn);
//! let full: Vec<_> = rf.cycles.iter().filter(|c| c.weight == 1.0).collect();
//! // 0→2 closes against the 2→−1 swing, then −1→1 against 1→−3
//! assert_eq!(full.len(), 2);
//! assert!(full.iter().all(|c| c.range_s == 2.0));
//! ```

mod export;
pub mod oracle;

pub use export::{read_cycle_log, write_cycle_log, write_damage_trace};
pub use oracle::offline_rainflow_oracle;

use crate::error::{ensure_finite, Error, Result};

/// Default hysteresis gate as a fraction of the running load range.
pub const DEFAULT_GATE_FRACTION: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cycle {
    pub range_s: f64,
    pub mean: f64,
    /// 1.0 for a full cycle, 0.5 for a half cycle.
    pub weight: f64,
    pub closed_at: f64,
}

impl Cycle {
    pub fn damage(&self, sn: &SnCurve) -> f64 {
        sn.damage(self.range_s, self.weight)
    }
}

/// Wöhler curve `N(s) = K / s^m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnCurve {
    pub exponent_m: f64,
    pub constant_k: f64,
}

impl SnCurve {
    pub fn new(exponent_m: f64, constant_k: f64) -> Result<Self> {
        if !(exponent_m > 0.0 && exponent_m.is_finite() && constant_k > 0.0 && constant_k.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "S-N curve needs m > 0 and K > 0, got m = {exponent_m}, K = {constant_k}"
            )));
        }
        Ok(SnCurve {
            exponent_m,
            constant_k,
        })
    }

    /// Miner increment `weight · range^m / K`.
    pub fn damage(&self, range: f64, weight: f64) -> f64 {
        weight * range.powf(self.exponent_m) / self.constant_k
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct TurningPoint {
    value: f64,
    time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RainflowState {
    stack: Vec<TurningPoint>,
    /// Extreme of the current excursion, not yet confirmed.
    pending: Option<TurningPoint>,
    /// +1 rising, −1 falling, 0 before the first excursion.
    direction: i8,
    last_time: Option<f64>,
    running_min: f64,
    running_max: f64,
    pub gate_fraction: f64,
    pub last_sample: f64,
    pub cycles: Vec<Cycle>,
    pub damage_d_k: f64,
    pub elapsed_t_k: f64,
    start_time: f64,
    max_stack_len: usize,
}

impl RainflowState {
    pub fn new(gate_fraction: f64) -> Result<Self> {
        if !(gate_fraction >= 0.0 && gate_fraction < 1.0) {
            return Err(Error::InvalidInput(format!(
                "hysteresis gate fraction must be in [0, 1), got {gate_fraction}"
            )));
        }
        Ok(RainflowState {
            stack: Vec::new(),
            pending: None,
            direction: 0,
            last_time: None,
            running_min: f64::INFINITY,
            running_max: f64::NEG_INFINITY,
            gate_fraction,
            last_sample: 0.0,
            cycles: Vec::new(),
            damage_d_k: 0.0,
            elapsed_t_k: 0.0,
            start_time: 0.0,
            max_stack_len: 0,
        })
    }

    /// Current hysteresis gate in load units.
    pub fn hysteresis_gate(&self) -> f64 {
        if self.running_max >= self.running_min {
            self.gate_fraction * (self.running_max - self.running_min)
        } else {
            0.0
        }
    }

    /// Turning-point values currently on the stack, oldest first.
    pub fn extrema_stack(&self) -> Vec<f64> {
        self.stack.iter().map(|p| p.value).collect()
    }

    /// Largest stack length seen so far.
    pub fn max_stack_len(&self) -> usize {
        self.max_stack_len
    }

    /// Feed one sample. Returns the full cycles it closed.
    pub fn push_sample(&mut self, load: f64, time: f64, sn: &SnCurve) -> Result<Vec<Cycle>> {
        ensure_finite("load", load)?;
        ensure_finite("time", time)?;
        match self.last_time {
            Some(t) if time <= t => {
                return Err(Error::InvalidInput(format!(
                    "sample times must increase strictly ({time} after {t})"
                )))
            }
            None => self.start_time = time,
            _ => {}
        }
        self.last_time = Some(time);
        self.elapsed_t_k = time - self.start_time;
        self.last_sample = load;
        self.running_min = self.running_min.min(load);
        self.running_max = self.running_max.max(load);
        let gate = self.hysteresis_gate();
        let here = TurningPoint { value: load, time };

        if self.stack.is_empty() && self.pending.is_none() {
            self.push_turning_point(here, time, sn);
            return Ok(Vec::new());
        }
        let before = self.cycles.len();
        match self.direction {
            0 => {
                let origin = self.stack.last().expect("start point").value;
                if (load - origin).abs() > gate {
                    self.direction = if load > origin { 1 } else { -1 };
                    self.pending = Some(here);
                }
            }
            dir => {
                let p = self.pending.expect("pending extreme while moving");
                let extends = if dir > 0 { load >= p.value } else { load <= p.value };
                if extends {
                    self.pending = Some(here);
                } else if (p.value - load).abs() > gate {
                    self.push_turning_point(p, time, sn);
                    self.direction = -dir;
                    self.pending = Some(here);
                }
            }
        }
        Ok(self.cycles[before..].to_vec())
    }

    fn push_turning_point(&mut self, p: TurningPoint, now: f64, sn: &SnCurve) {
        self.stack.push(p);
        self.max_stack_len = self.max_stack_len.max(self.stack.len());
        while self.stack.len() >= 3 {
            let k = self.stack.len();
            let (x, y, z) = (self.stack[k - 3], self.stack[k - 2], self.stack[k - 1]);
            let inner = (x.value - y.value).abs();
            if inner > (y.value - z.value).abs() {
                break;
            }
            let c = Cycle {
                range_s: inner,
                mean: 0.5 * (x.value + y.value),
                weight: 1.0,
                closed_at: now,
            };
            self.damage_d_k += c.damage(sn);
            self.cycles.push(c);
            self.stack.drain(k - 3..k - 1);
        }
    }

    /// Confirm the last extreme and drain the stack as half cycles.
    pub fn finalize(&mut self, sn: &SnCurve) -> Vec<Cycle> {
        let closed_at = self.last_time.unwrap_or(0.0);
        if let Some(p) = self.pending.take() {
            self.push_turning_point(p, closed_at, sn);
        }
        let halves: Vec<Cycle> = self
            .stack
            .windows(2)
            .map(|w| Cycle {
                range_s: (w[0].value - w[1].value).abs(),
                mean: 0.5 * (w[0].value + w[1].value),
                weight: 0.5,
                closed_at,
            })
            .collect();
        for c in &halves {
            self.damage_d_k += c.damage(sn);
        }
        self.cycles.extend_from_slice(&halves);
        self.stack.clear();
        self.direction = 0;
        halves
    }
}

/// Lifetime projection `L_e = T_k · D_d / D_k`; infinite when nothing has
/// been consumed yet.
pub fn estimate_lifetime(damage_d_k: f64, elapsed_t_k: f64, damage_limit_d_d: f64) -> Result<f64> {
    for (name, v) in [
        ("damage", damage_d_k),
        ("elapsed time", elapsed_t_k),
        ("damage limit", damage_limit_d_d),
    ] {
        if !(v >= 0.0) || v.is_nan() {
            return Err(Error::InvalidInput(format!("{name} must be non-negative, got {v}")));
        }
    }
    if damage_d_k == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(elapsed_t_k / damage_d_k * damage_limit_d_d)
}

/// Streaming count of a whole series followed by [`RainflowState::finalize`].
pub fn count_series(series: &[f64], dt: f64, gate_fraction: f64, sn: &SnCurve) -> Result<RainflowState> {
    let mut rf = RainflowState::new(gate_fraction)?;
    for (k, x) in series.iter().enumerate() {
        rf.push_sample(*x, k as f64 * dt, sn)?;
    }
    rf.finalize(sn);
    Ok(rf)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sn() -> SnCurve {
        SnCurve::new(4.0, 1.0e6).unwrap()
    }

    #[test]
    fn monotone_ramp_closes_nothing() {
        let mut rf = RainflowState::new(0.0).unwrap();
        for k in 0..10 {
            let closed = rf.push_sample(100.0 * k as f64 / 9.0, k as f64, &sn()).unwrap();
            assert!(closed.is_empty());
        }
        assert_eq!(rf.damage_d_k, 0.0);
    }

    #[test]
    fn sine_periods_match_miner_arithmetic() {
        let n = 1000;
        let series: Vec<f64> = (0..=n)
            .map(|k| (2.0 * std::f64::consts::PI * 10.0 * k as f64 / n as f64).sin())
            .collect();
        let rf = count_series(&series, 0.01, 0.0, &sn()).unwrap();
        let expected = 10.0 * 2f64.powi(4) / 1e6;
        let one_cycle = 2f64.powi(4) / 1e6;
        assert!((rf.damage_d_k - expected).abs() <= one_cycle, "{}", rf.damage_d_k);
        assert!(rf.max_stack_len() <= 3);
    }

    #[test]
    fn finalize_on_empty_state() {
        let mut rf = RainflowState::new(0.0).unwrap();
        assert!(rf.finalize(&sn()).is_empty());
        assert_eq!(rf.damage_d_k, 0.0);
    }

    #[test]
    fn single_reversal_is_one_half_cycle() {
        let mut rf = RainflowState::new(0.0).unwrap();
        rf.push_sample(0.0, 0.0, &sn()).unwrap();
        rf.push_sample(10.0, 1.0, &sn()).unwrap();
        let halves = rf.finalize(&sn());
        assert_eq!(halves.len(), 1);
        assert_eq!(halves[0].range_s, 10.0);
        assert_eq!(halves[0].weight, 0.5);
        assert_eq!(rf.damage_d_k, 0.5 * 1e4 / 1e6);
    }

    #[test]
    fn time_must_increase() {
        let mut rf = RainflowState::new(0.0).unwrap();
        rf.push_sample(1.0, 1.0, &sn()).unwrap();
        assert!(rf.push_sample(2.0, 1.0, &sn()).is_err());
        assert!(rf.push_sample(2.0, 0.5, &sn()).is_err());
    }

    #[test]
    fn gate_suppresses_small_reversals() {
        // a big swing sets the range, then ripples below 0.5 % of it
        let mut series = vec![0.0, 1000.0, 0.0];
        for k in 0..20 {
            series.push(if k % 2 == 0 { 1.0 } else { 0.0 });
        }
        let gated = count_series(&series, 1.0, DEFAULT_GATE_FRACTION, &sn()).unwrap();
        let ungated = count_series(&series, 1.0, 0.0, &sn()).unwrap();
        assert!(gated.cycles.len() < ungated.cycles.len());
        assert!(gated.cycles.iter().all(|c| c.range_s >= 1000.0 || c.weight == 0.5));
    }

    #[test]
    fn lifetime_projection() {
        let dd = 0.01;
        assert_eq!(estimate_lifetime(0.5 * dd, 300.0, dd).unwrap(), 600.0);
        assert_eq!(estimate_lifetime(dd, 600.0, dd).unwrap(), 600.0);
        assert_eq!(estimate_lifetime(0.0, 10.0, dd).unwrap(), f64::INFINITY);
        assert!(estimate_lifetime(-1.0, 10.0, dd).is_err());
        assert!(estimate_lifetime(1.0, -10.0, dd).is_err());
    }

    #[test]
    fn bad_sn_curve_rejected() {
        assert!(SnCurve::new(0.0, 1.0).is_err());
        assert!(SnCurve::new(3.0, -1.0).is_err());
    }
}
