//! Nonlinear reduced-order turbine plant.
//!
//! Six states: rotor speed, tower fore-aft displacement and velocity,
//! collective pitch and pitch rate, and the rotor thrust acting on the tower.
//!
//! ```text
//! J ω̇      = T_aero(ω, β, v − ẋ) − N·T_gen(N·ω)
//! m ẍ      = F − c ẋ − k x
//! τ Ḟ      = ½ρA (v − ẋ)² ct(λ, β) − F
//! β̈        = ω_pa² (β_com − β) − 2ζ ω_pa β̇        (saturated)
//! ```
//!
//! The tower sees the relative wind `v − ẋ`, which provides aerodynamic
//! damping of the fore-aft mode. The thrust lag `τ` keeps the tower
//! acceleration a pure function of the state, so both measurements are
//! strictly proper in the state.
//!
//! Tower-base fore-aft moment:
//!
//! ```text
//! M = H·F − H·m·γ  =  H·(k x + c ẋ)
//! ```
//!
//! i.e. thrust times hub height minus the inertial relief of the modal
//! mass, which equals the elastic plus viscous restoring force times the
//! hub height.

use crate::error::{ensure_finite, Error, Result};
use crate::model::actuator::{ActuatorState, PitchActuator};
use crate::model::aero::{power_coefficient, thrust_from_power};
use crate::model::TurbineParams;

/// Dimension of the plant state vector.
pub const STATE_DIM: usize = 6;

/// Scale of the thrust entry in the state vector (vector holds MN).
pub(crate) const THRUST_SCALE: f64 = 1.0e6;

/// Smallest relative wind the aerodynamics are evaluated at, m/s.
const MIN_RELATIVE_WIND: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlantState {
    /// rad/s (low-speed shaft)
    pub rotor_speed: f64,
    /// m
    pub tower_fa_displacement: f64,
    /// m/s
    pub tower_fa_velocity: f64,
    /// rad
    pub pitch_angle: f64,
    /// rad/s
    pub pitch_rate: f64,
    /// Thrust acting on the tower top, N.
    pub rotor_thrust: f64,
}

impl PlantState {
    /// State vector `[ω, x, ẋ, β, β̇, F/1e6]`.
    pub fn to_vector(&self) -> [f64; STATE_DIM] {
        [
            self.rotor_speed,
            self.tower_fa_displacement,
            self.tower_fa_velocity,
            self.pitch_angle,
            self.pitch_rate,
            self.rotor_thrust / THRUST_SCALE,
        ]
    }

    pub fn from_vector(v: &[f64; STATE_DIM]) -> Self {
        PlantState {
            rotor_speed: v[0],
            tower_fa_displacement: v[1],
            tower_fa_velocity: v[2],
            pitch_angle: v[3],
            pitch_rate: v[4],
            rotor_thrust: v[5] * THRUST_SCALE,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_vector().iter().all(|x| x.is_finite())
    }
}

/// Measurements and prognosis signals produced at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlantOutputs {
    /// rad/s (high-speed shaft)
    pub generator_speed: f64,
    /// Tower-top fore-aft acceleration, m/s².
    pub tower_accel: f64,
    /// Tower-base fore-aft bending moment, N·m.
    pub tower_fa_moment: f64,
    /// Aerodynamic rotor power, W.
    pub rotor_power: f64,
    /// Electrical generator power, W.
    pub generator_power: f64,
}

/// The nonlinear plant with its derived constants.
#[derive(Debug, Clone)]
pub struct Plant {
    params: TurbineParams,
    actuator: PitchActuator,
    stiffness: f64,
    damping: f64,
    half_rho_area: f64,
}

impl Plant {
    pub fn new(params: TurbineParams) -> Self {
        Plant {
            actuator: PitchActuator::from_params(&params),
            stiffness: params.tower_stiffness(),
            damping: params.tower_damping(),
            half_rho_area: 0.5 * params.air_density * params.rotor_area(),
            params,
        }
    }

    pub fn params(&self) -> &TurbineParams {
        &self.params
    }

    pub fn actuator(&self) -> &PitchActuator {
        &self.actuator
    }

    /// Aerodynamic torque (N·m) and quasi-steady thrust (N).
    pub(crate) fn aero_loads(&self, rotor_speed: f64, pitch: f64, relative_wind: f64) -> (f64, f64) {
        let v = relative_wind.max(MIN_RELATIVE_WIND);
        let omega = rotor_speed.max(1e-3);
        let lambda = omega * self.params.rotor_radius / v;
        let cp = power_coefficient(lambda, pitch, &self.params);
        let ct = thrust_from_power(cp);
        let torque = self.half_rho_area * v * v * v * cp / omega;
        let thrust = self.half_rho_area * v * v * ct;
        (torque, thrust)
    }

    /// Time derivative of the state vector.
    pub fn derivatives(&self, x: &[f64; STATE_DIM], pitch_command: f64, wind: f64) -> [f64; STATE_DIM] {
        let p = &self.params;
        let [omega, disp, vel, pitch, rate, thrust_mn] = *x;
        let thrust = thrust_mn * THRUST_SCALE;
        let (aero_torque, qs_thrust) = self.aero_loads(omega, pitch, wind - vel);
        let gen_torque = p.generator_torque(omega * p.gearbox_ratio);
        let omega_dot = (aero_torque - p.gearbox_ratio * gen_torque) / p.rotor_inertia;
        let accel = (thrust - self.damping * vel - self.stiffness * disp) / p.tower_modal_mass;
        let thrust_dot = (qs_thrust - thrust) / p.thrust_lag;
        let pitch_acc = self.actuator.acceleration(pitch, rate, pitch_command);
        [omega_dot, vel, accel, rate, pitch_acc, thrust_dot / THRUST_SCALE]
    }

    /// Measurements and prognosis signals for a state at a given wind.
    pub fn outputs(&self, state: &PlantState, wind: f64) -> PlantOutputs {
        let p = &self.params;
        let tower_accel = (state.rotor_thrust
            - self.damping * state.tower_fa_velocity
            - self.stiffness * state.tower_fa_displacement)
            / p.tower_modal_mass;
        let moment = p.hub_height * (state.rotor_thrust - p.tower_modal_mass * tower_accel);
        let (aero_torque, _) =
            self.aero_loads(state.rotor_speed, state.pitch_angle, wind - state.tower_fa_velocity);
        let generator_speed = state.rotor_speed * p.gearbox_ratio;
        PlantOutputs {
            generator_speed,
            tower_accel,
            tower_fa_moment: moment,
            rotor_power: aero_torque * state.rotor_speed,
            generator_power: p.generator_efficiency
                * p.generator_torque(generator_speed)
                * generator_speed,
        }
    }

    /// One fixed RK4 step with command and wind held over the step.
    pub fn step(
        &self,
        state: &PlantState,
        pitch_command: f64,
        wind: f64,
        dt: f64,
        time: f64,
    ) -> Result<(PlantState, PlantOutputs)> {
        ensure_finite("pitch_command", pitch_command)?;
        ensure_finite("wind", wind)?;
        if !(dt > 0.0) {
            return Err(Error::InvalidInput(format!("dt must be > 0, got {dt}")));
        }
        if !(wind > 0.0) {
            return Err(Error::InvalidInput(format!("wind must be > 0, got {wind}")));
        }
        let x0 = state.to_vector();
        let f = |x: &[f64; STATE_DIM]| self.derivatives(x, pitch_command, wind);
        let k1 = f(&x0);
        let k2 = f(&axpy(&x0, 0.5 * dt, &k1));
        let k3 = f(&axpy(&x0, 0.5 * dt, &k2));
        let k4 = f(&axpy(&x0, dt, &k3));
        let mut x1 = x0;
        for i in 0..STATE_DIM {
            x1[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let mut next = PlantState::from_vector(&x1);
        let mut act = ActuatorState {
            pitch: next.pitch_angle,
            pitch_rate: next.pitch_rate,
        };
        self.actuator.saturate(&mut act);
        next.pitch_angle = act.pitch;
        next.pitch_rate = act.pitch_rate;
        if !next.is_finite() {
            return Err(Error::Diverged {
                time: time + dt,
                detail: format!("non-finite plant state {next:?}"),
            });
        }
        Ok((next, self.outputs(&next, wind)))
    }

    /// Equilibrium at rated rotor speed for a constant wind in the
    /// above-rated region. Returns the state and the trim pitch.
    pub fn trim(&self, wind: f64) -> Result<PlantState> {
        let p = &self.params;
        let omega = p.rated_rotor_speed;
        let demand = p.gearbox_ratio * p.generator_torque(omega * p.gearbox_ratio);
        let residual = |pitch: f64| self.aero_loads(omega, pitch, wind).0 - demand;
        // Scan down from the stop for the feathering-side root.
        let (lo_stop, hi_stop) = p.pitch_range;
        let hi_start = hi_stop.min(45f64.to_radians());
        let step = 0.1f64.to_radians();
        let mut hi = hi_start;
        let mut bracket = None;
        while hi - step >= lo_stop - 1e-12 {
            let lo = (hi - step).max(lo_stop);
            if residual(hi) <= 0.0 && residual(lo) > 0.0 {
                bracket = Some((lo, hi));
                break;
            }
            hi = lo;
            if lo <= lo_stop {
                break;
            }
        }
        let (mut lo, mut hi) = bracket.ok_or_else(|| Error::TrimFailed {
            wind,
            residual: residual(lo_stop),
        })?;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if residual(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        let pitch = 0.5 * (lo + hi);
        let res = residual(pitch);
        if res.abs() > 1e-3 * demand {
            return Err(Error::TrimFailed { wind, residual: res });
        }
        let (_, thrust) = self.aero_loads(omega, pitch, wind);
        Ok(PlantState {
            rotor_speed: omega,
            tower_fa_displacement: thrust / self.stiffness,
            tower_fa_velocity: 0.0,
            pitch_angle: pitch,
            pitch_rate: 0.0,
            rotor_thrust: thrust,
        })
    }
}

fn axpy(x: &[f64; STATE_DIM], h: f64, k: &[f64; STATE_DIM]) -> [f64; STATE_DIM] {
    let mut out = *x;
    for i in 0..STATE_DIM {
        out[i] += h * k[i];
    }
    out
}

/// Free-function form of [`Plant::step`].
pub fn plant_step(
    state: &PlantState,
    pitch_command: f64,
    wind: f64,
    dt: f64,
    params: &TurbineParams,
) -> Result<(PlantState, PlantOutputs)> {
    Plant::new(params.clone()).step(state, pitch_command, wind, dt, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    const DT: f64 = 0.0125;

    fn plant() -> Plant {
        Plant::new(TurbineParams::nrel_5mw())
    }

    #[test]
    fn trim_pitch_at_18_ms_is_14_6_degrees() {
        let s = plant().trim(18.0).unwrap();
        assert!((s.pitch_angle.to_degrees() - 14.6).abs() < 0.05, "{}", s.pitch_angle.to_degrees());
    }

    #[test]
    fn steady_wind_holds_rated_speed() {
        let pl = plant();
        let mut s = pl.trim(18.0).unwrap();
        let cmd = s.pitch_angle;
        for k in 0..(60.0 / DT) as usize {
            s = pl.step(&s, cmd, 18.0, DT, k as f64 * DT).unwrap().0;
        }
        let rated = pl.params().rated_rotor_speed;
        assert!((s.rotor_speed - rated).abs() / rated < 0.01);
    }

    #[test]
    fn trim_below_rated_fails() {
        assert!(matches!(plant().trim(8.0), Err(Error::TrimFailed { .. })));
    }

    #[test]
    fn zero_wind_rejected() {
        let pl = plant();
        let s = pl.trim(18.0).unwrap();
        assert!(pl.step(&s, s.pitch_angle, 0.0, DT, 0.0).is_err());
        assert!(plant_step(&s, s.pitch_angle, 0.0, DT, pl.params()).is_err());
    }

    #[test]
    fn moment_identity_holds() {
        let pl = plant();
        let mut s = pl.trim(18.0).unwrap();
        s.tower_fa_displacement += 0.1;
        s.tower_fa_velocity = 0.05;
        let out = pl.outputs(&s, 18.0);
        let p = pl.params();
        let direct = p.hub_height
            * (p.tower_stiffness() * s.tower_fa_displacement + p.tower_damping() * s.tower_fa_velocity);
        assert!((out.tower_fa_moment - direct).abs() < 1e-6 * direct.abs());
    }

    #[test]
    fn rated_power_at_trim() {
        let pl = plant();
        let s = pl.trim(18.0).unwrap();
        let out = pl.outputs(&s, 18.0);
        assert!((out.generator_power - 5.0e6).abs() < 1.0);
        let mech = out.generator_power / pl.params().generator_efficiency;
        assert!((out.rotor_power - mech).abs() / mech < 1e-6);
    }

    #[test]
    fn power_below_betz_on_grid() {
        let pl = plant();
        let p = pl.params();
        for wind in [5.0, 11.4, 18.0, 25.0] {
            let avail = 0.593 * 0.5 * p.air_density * p.rotor_area() * wind * wind * wind;
            for i in 1..60 {
                let omega = 0.05 * i as f64;
                for j in 0..30 {
                    let pitch = (3.0 * j as f64).to_radians();
                    let s = PlantState {
                        rotor_speed: omega,
                        pitch_angle: pitch,
                        ..Default::default()
                    };
                    assert!(pl.outputs(&s, wind).rotor_power <= avail);
                }
            }
        }
    }
}
