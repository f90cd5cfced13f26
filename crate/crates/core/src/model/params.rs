use std::f64::consts::PI;

use crate::error::{Error, Result};

const RPM: f64 = 2.0 * PI / 60.0;

/// Physical parameters of the reduced-order 5 MW reference turbine.
///
/// The rating data are the published reference-turbine values; the rotor
/// inertia, tower modal mass and damping are the usual reference-model
/// numbers folded into a single fore-aft mode.
#[derive(Debug, Clone, PartialEq)]
pub struct TurbineParams {
    /// Electrical rated power, W.
    pub rated_power: f64,
    /// m
    pub hub_height: f64,
    /// m
    pub rotor_radius: f64,
    /// m
    pub hub_radius: f64,
    /// Low-speed shaft rated speed, rad/s.
    pub rated_rotor_speed: f64,
    /// (cut-in, rated, cut-out), m/s.
    pub cutin_rated_cutout_wind: (f64, f64, f64),
    pub gearbox_ratio: f64,
    /// (min, max) collective pitch, rad.
    pub pitch_range: (f64, f64),
    /// rad/s
    pub pitch_rate_limit: f64,
    pub lambda_opt: f64,
    /// rad
    pub beta_opt: f64,
    pub cp_max: f64,
    /// Rotor plus generator inertia referred to the low-speed shaft, kg·m².
    pub rotor_inertia: f64,
    /// Tower-top equivalent modal mass of the first fore-aft mode, kg.
    pub tower_modal_mass: f64,
    /// rad/s
    pub tower_modal_freq: f64,
    pub tower_damping_ratio: f64,
    /// kg/m³
    pub air_density: f64,
    pub generator_efficiency: f64,
    /// Time constant of the rotor-thrust build-up seen by the tower, s.
    pub thrust_lag: f64,
    /// Pitch actuator damping ratio.
    pub actuator_damping: f64,
}

impl TurbineParams {
    /// The 5 MW reference configuration.
    pub fn nrel_5mw() -> Self {
        TurbineParams {
            rated_power: 5.0e6,
            hub_height: 90.0,
            rotor_radius: 63.0,
            hub_radius: 1.5,
            rated_rotor_speed: 12.1 * RPM,
            cutin_rated_cutout_wind: (3.0, 11.4, 25.0),
            gearbox_ratio: 90.0,
            pitch_range: (0.0, 90f64.to_radians()),
            pitch_rate_limit: 8f64.to_radians(),
            lambda_opt: 7.55,
            beta_opt: 0.0,
            cp_max: 0.482,
            rotor_inertia: 4.308_556_8e7,
            tower_modal_mass: 4.37e5,
            tower_modal_freq: 2.08,
            tower_damping_ratio: 0.01,
            air_density: 1.225,
            generator_efficiency: 0.944,
            thrust_lag: 0.25,
            actuator_damping: 0.8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        let (cutin, rated, cutout) = self.cutin_rated_cutout_wind;
        if !(self.rated_rotor_speed > 0.0) {
            problems.push("rated_rotor_speed must be > 0".to_string());
        }
        if !(self.gearbox_ratio > 0.0) {
            problems.push("gearbox_ratio must be > 0".to_string());
        }
        if !(self.cp_max > 0.0 && self.cp_max < 16.0 / 27.0) {
            problems.push(format!("cp_max {} outside (0, Betz limit)", self.cp_max));
        }
        if !(cutin < rated && rated < cutout) {
            problems.push("wind speeds must satisfy cut-in < rated < cut-out".to_string());
        }
        if !(self.pitch_range.0 < self.pitch_range.1) {
            problems.push("pitch_range must be increasing".to_string());
        }
        for (name, v) in [
            ("rotor_radius", self.rotor_radius),
            ("rotor_inertia", self.rotor_inertia),
            ("tower_modal_mass", self.tower_modal_mass),
            ("tower_modal_freq", self.tower_modal_freq),
            ("air_density", self.air_density),
            ("pitch_rate_limit", self.pitch_rate_limit),
            ("thrust_lag", self.thrust_lag),
            ("generator_efficiency", self.generator_efficiency),
        ] {
            if !(v > 0.0) {
                problems.push(format!("{name} must be > 0"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }

    pub fn rotor_area(&self) -> f64 {
        PI * self.rotor_radius * self.rotor_radius
    }

    /// Rated generator (high-speed shaft) speed, rad/s.
    pub fn rated_generator_speed(&self) -> f64 {
        self.rated_rotor_speed * self.gearbox_ratio
    }

    /// Generator torque that delivers rated electrical power at rated speed, N·m.
    pub fn rated_generator_torque(&self) -> f64 {
        self.rated_power / (self.generator_efficiency * self.rated_generator_speed())
    }

    /// Pitch actuator natural frequency: four times the rated rotor speed.
    pub fn actuator_natural_freq(&self) -> f64 {
        4.0 * self.rated_rotor_speed
    }

    pub fn tower_stiffness(&self) -> f64 {
        self.tower_modal_mass * self.tower_modal_freq * self.tower_modal_freq
    }

    pub fn tower_damping(&self) -> f64 {
        2.0 * self.tower_damping_ratio * self.tower_modal_mass * self.tower_modal_freq
    }

    /// Generator torque demand at a given generator speed.
    ///
    /// Rated torque at and above 95 % of rated speed; below that the
    /// demand blends down to the optimal-λ quadratic law so that lulls
    /// under rated wind do not stall the rotor.
    pub fn generator_torque(&self, generator_speed: f64) -> f64 {
        let rated = self.rated_generator_torque();
        let w_rated = self.rated_generator_speed();
        let upper = 0.95 * w_rated;
        let lower = 0.80 * w_rated;
        if generator_speed >= upper {
            return rated;
        }
        let k_opt = 0.5 * self.air_density * PI * self.rotor_radius.powi(5) * self.cp_max
            / (self.lambda_opt.powi(3) * self.gearbox_ratio.powi(3));
        let w = generator_speed.max(0.0);
        if w <= lower {
            return k_opt * w * w;
        }
        let at_lower = k_opt * lower * lower;
        at_lower + (rated - at_lower) * (w - lower) / (upper - lower)
    }
}

impl Default for TurbineParams {
    fn default() -> Self {
        Self::nrel_5mw()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_configuration_is_valid() {
        let p = TurbineParams::nrel_5mw();
        p.validate().unwrap();
        assert_eq!(p.tower_modal_freq, 2.08);
    }

    #[test]
    fn rated_generator_speed_is_1089_rpm() {
        let p = TurbineParams::nrel_5mw();
        let rpm = p.rated_generator_speed() / RPM;
        assert!((rpm - 1089.0).abs() < 1e-9);
    }

    #[test]
    fn actuator_frequency_is_four_times_rated_speed() {
        let p = TurbineParams::nrel_5mw();
        assert!((p.actuator_natural_freq() - 5.068).abs() < 1e-3);
    }

    #[test]
    fn generator_torque_is_flat_above_rated() {
        let p = TurbineParams::nrel_5mw();
        let w = p.rated_generator_speed();
        let rated = p.rated_generator_torque();
        assert_eq!(p.generator_torque(w), rated);
        assert_eq!(p.generator_torque(1.2 * w), rated);
        assert!(p.generator_torque(0.9 * w) < rated);
        // continuous at both blend corners
        let eps = 1e-9 * w;
        for corner in [0.8 * w, 0.95 * w] {
            let jump = p.generator_torque(corner + eps) - p.generator_torque(corner - eps);
            assert!(jump.abs() < 1e-3);
        }
    }

    #[test]
    fn invalid_parameters_are_listed() {
        let mut p = TurbineParams::nrel_5mw();
        p.cp_max = 0.7;
        p.gearbox_ratio = 0.0;
        match p.validate() {
            Err(Error::Config(list)) => assert_eq!(list.len(), 2),
            other => panic!("unexpected {other:?}"),
        }
    }
}
