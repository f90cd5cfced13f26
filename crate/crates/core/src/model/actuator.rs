//! Second-order collective pitch actuator
//! `β/β_com = ω²/(s² + 2ζωs + ω²)` with position and rate saturation.

use crate::error::{ensure_finite, Error, Result};
use crate::model::TurbineParams;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ActuatorState {
    /// rad
    pub pitch: f64,
    /// rad/s
    pub pitch_rate: f64,
}

/// Actuator limits and dynamics, extracted once from [`TurbineParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PitchActuator {
    pub natural_freq: f64,
    pub damping: f64,
    pub range: (f64, f64),
    pub rate_limit: f64,
}

impl PitchActuator {
    pub fn from_params(params: &TurbineParams) -> Self {
        PitchActuator {
            natural_freq: params.actuator_natural_freq(),
            damping: params.actuator_damping,
            range: params.pitch_range,
            rate_limit: params.pitch_rate_limit,
        }
    }

    /// Pitch acceleration. Acceleration that would push the rate further
    /// past its limit, or the angle past a stop, is suppressed.
    pub(crate) fn acceleration(&self, pitch: f64, rate: f64, command: f64) -> f64 {
        let w = self.natural_freq;
        let mut acc = w * w * (command - pitch) - 2.0 * self.damping * w * rate;
        if (rate >= self.rate_limit && acc > 0.0) || (rate <= -self.rate_limit && acc < 0.0) {
            acc = 0.0;
        }
        if (pitch <= self.range.0 && acc < 0.0 && rate <= 0.0)
            || (pitch >= self.range.1 && acc > 0.0 && rate >= 0.0)
        {
            acc = 0.0;
        }
        acc
    }

    /// Clamp a state onto the admissible set after an integration step.
    pub(crate) fn saturate(&self, state: &mut ActuatorState) {
        state.pitch_rate = state.pitch_rate.clamp(-self.rate_limit, self.rate_limit);
        if state.pitch <= self.range.0 {
            state.pitch = self.range.0;
            state.pitch_rate = state.pitch_rate.max(0.0);
        } else if state.pitch >= self.range.1 {
            state.pitch = self.range.1;
            state.pitch_rate = state.pitch_rate.min(0.0);
        }
    }
}

/// Advance the actuator by one RK4 step with the command held constant.
pub fn pitch_actuator_step(
    actuator: &PitchActuator,
    state: ActuatorState,
    commanded_pitch: f64,
    dt: f64,
) -> Result<(ActuatorState, f64)> {
    ensure_finite("commanded_pitch", commanded_pitch)?;
    ensure_finite("dt", dt)?;
    if dt <= 0.0 {
        return Err(Error::InvalidInput(format!("dt must be > 0, got {dt}")));
    }
    let f = |b: f64, r: f64| (r, actuator.acceleration(b, r, commanded_pitch));
    let (b0, r0) = (state.pitch, state.pitch_rate);
    let k1 = f(b0, r0);
    let k2 = f(b0 + 0.5 * dt * k1.0, r0 + 0.5 * dt * k1.1);
    let k3 = f(b0 + 0.5 * dt * k2.0, r0 + 0.5 * dt * k2.1);
    let k4 = f(b0 + dt * k3.0, r0 + dt * k3.1);
    let mut next = ActuatorState {
        pitch: b0 + dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        pitch_rate: r0 + dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    };
    actuator.saturate(&mut next);
    Ok((next, next.pitch))
}

#[cfg(test)]
mod tests {
    use super::*;

    const DT: f64 = 0.0125;

    fn actuator() -> PitchActuator {
        PitchActuator::from_params(&TurbineParams::nrel_5mw())
    }

    #[test]
    fn ten_degree_step_settles_without_large_overshoot() {
        let act = actuator();
        let target = 10f64.to_radians();
        let mut s = ActuatorState::default();
        let mut peak: f64 = 0.0;
        for _ in 0..(20.0 / DT) as usize {
            s = pitch_actuator_step(&act, s, target, DT).unwrap().0;
            peak = peak.max(s.pitch);
            assert!(s.pitch_rate.abs() <= act.rate_limit);
        }
        assert!((s.pitch - target).to_degrees().abs() < 0.01);
        let overshoot = (peak - target) / target;
        assert!(overshoot < 0.02, "overshoot {overshoot}");
    }

    #[test]
    fn settled_state_is_an_equilibrium() {
        let act = actuator();
        let s = ActuatorState {
            pitch: 0.3,
            pitch_rate: 0.0,
        };
        let (next, pitch) = pitch_actuator_step(&act, s, 0.3, DT).unwrap();
        assert_eq!(next, s);
        assert_eq!(pitch, 0.3);
    }

    /// Frequency response of the unsaturated discrete actuator against the
    /// analytic magnitude of the second-order transfer function.
    #[test]
    fn magnitude_response_matches_analytic() {
        let mut act = actuator();
        act.rate_limit = f64::INFINITY;
        act.range = (-10.0, 10.0);
        let (w, z) = (act.natural_freq, act.damping);
        for &freq in &[0.5, 1.0, 2.0, 5.0] {
            let amp = 0.01;
            let mut s = ActuatorState::default();
            let period = 2.0 * std::f64::consts::PI / freq;
            let settle = 40.0;
            let total = settle + 10.0 * period;
            let steps = (total / DT) as usize;
            let mut peak: f64 = 0.0;
            for k in 0..steps {
                let t = k as f64 * DT;
                s = pitch_actuator_step(&act, s, amp * (freq * t).sin(), DT).unwrap().0;
                if t > settle {
                    peak = peak.max(s.pitch.abs());
                }
            }
            let analytic = w * w / (((w * w - freq * freq).powi(2) + (2.0 * z * w * freq).powi(2)).sqrt());
            let measured = peak / amp;
            assert!(
                (measured - analytic).abs() / analytic < 0.02,
                "ω = {freq}: measured {measured}, analytic {analytic}"
            );
        }
    }

    #[test]
    fn position_saturation() {
        let act = actuator();
        let mut s = ActuatorState::default();
        for _ in 0..2000 {
            s = pitch_actuator_step(&act, s, -0.5, DT).unwrap().0;
            assert!(s.pitch >= act.range.0);
        }
        assert_eq!(s.pitch, 0.0);
    }

    #[test]
    fn rejects_bad_dt() {
        let act = actuator();
        assert!(pitch_actuator_step(&act, ActuatorState::default(), 0.1, 0.0).is_err());
        assert!(pitch_actuator_step(&act, ActuatorState::default(), f64::NAN, DT).is_err());
    }
}
