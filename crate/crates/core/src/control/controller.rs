use nalgebra::{DMatrix, DVector};

use crate::control::augment::AugmentedModel;
use crate::control::synth::GainSet;
use crate::error::{Error, Result};

/// Observer and integrator state of one running controller.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerState {
    /// Estimated augmented state `[x̂; x̂_d]` in deviation coordinates.
    pub x_hat_a: DVector<f64>,
    /// Integral of generator speed error, rad.
    pub x_i: f64,
}

impl ControllerState {
    pub fn zeros(order: usize) -> Self {
        ControllerState {
            x_hat_a: DVector::zeros(order),
            x_i: 0.0,
        }
    }

    /// Estimated wind deviation (last augmented state).
    pub fn disturbance_estimate(&self) -> f64 {
        self.x_hat_a[self.x_hat_a.len() - 1]
    }

    pub fn is_finite(&self) -> bool {
        self.x_i.is_finite() && self.x_hat_a.iter().all(|v| v.is_finite())
    }
}

/// Observer-based DAC with partial integral action.
#[derive(Debug, Clone)]
pub struct DacController {
    pub aug: AugmentedModel,
    pub gains: GainSet,
    /// Pitch command limits, rad.
    pub pitch_range: (f64, f64),
}

impl DacController {
    pub fn new(aug: AugmentedModel, gains: GainSet, pitch_range: (f64, f64)) -> Result<Self> {
        let na = aug.order();
        if gains.k_a.shape() != (1, na) || gains.l.shape() != (na, 2) {
            return Err(Error::DimensionMismatch(format!(
                "K_a {:?} and L {:?} for augmented order {na}",
                gains.k_a.shape(),
                gains.l.shape()
            )));
        }
        Ok(DacController {
            aug,
            gains,
            pitch_range,
        })
    }

    pub fn initial_state(&self) -> ControllerState {
        ControllerState::zeros(self.aug.order())
    }

    pub fn trim_pitch(&self) -> f64 {
        self.aug.plant.op_pitch
    }

    /// Incremental control `u = −K_a x̂_a − K_i x_i` before trim offset.
    pub fn control(&self, cs: &ControllerState) -> f64 {
        -(&self.gains.k_a * &cs.x_hat_a)[(0, 0)] - self.gains.k_i * cs.x_i
    }

    /// One fixed step. `y` is `(ω_g − ω_g,rated, γ)`. Returns the next
    /// state and the saturated absolute pitch command.
    pub fn step(&self, cs: &ControllerState, y: [f64; 2], dt: f64) -> Result<(ControllerState, f64)> {
        if !(dt > 0.0) {
            return Err(Error::InvalidInput(format!("dt must be > 0, got {dt}")));
        }
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite measurement {y:?}")));
        }
        let trim = self.trim_pitch();
        let cmd = (trim + self.control(cs)).clamp(self.pitch_range.0, self.pitch_range.1);
        let u = cmd - trim;

        let y_vec = DVector::from_row_slice(&y);
        // input held over the step, like the plant
        let drive = &self.aug.b_a * u + &self.gains.l * &y_vec;
        let m = &self.aug.a_a - &self.gains.l * &self.aug.c_a;
        let f = |x: &DVector<f64>| &m * x + &drive;
        let x = &cs.x_hat_a;
        let k1 = f(x);
        let k2 = f(&(x + &k1 * (0.5 * dt)));
        let k3 = f(&(x + &k2 * (0.5 * dt)));
        let k4 = f(&(x + &k3 * dt));
        let x_hat_a = x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        let x_i = cs.x_i + dt * (self.gains.c_i[0] * y[0] + self.gains.c_i[1] * y[1]);

        let next = ControllerState { x_hat_a, x_i };
        if !next.is_finite() {
            return Err(Error::Diverged {
                time: f64::NAN,
                detail: "controller state became non-finite".into(),
            });
        }
        Ok((next, cmd))
    }
}

/// Final-value generator-speed error of the linear closed loop (plant,
/// integrator, observer) after a wind step of `step_size` m/s.
///
/// With `K_i = 0` the integrator does not feed back and is dropped from
/// the solve.
pub fn steady_state_rejection_test(gains: &GainSet, aug: &AugmentedModel, step_size: f64) -> Result<f64> {
    if step_size == 0.0 {
        return Ok(0.0);
    }
    let n = aug.plant.order();
    let full = crate::control::synth::closed_loop_matrix(aug, gains);
    let dim = full.nrows();
    let mut e = DVector::zeros(dim);
    e.rows_mut(0, n).copy_from(&aug.plant.b_d.column(0));
    let keep: Vec<usize> = if gains.k_i == 0.0 {
        (0..dim).filter(|&i| i != n).collect()
    } else {
        (0..dim).collect()
    };
    let m = DMatrix::from_fn(keep.len(), keep.len(), |i, j| full[(keep[i], keep[j])]);
    let rhs = DVector::from_fn(keep.len(), |i, _| -e[keep[i]] * step_size);
    let z = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::UnstableClosedLoop { max_real: 0.0 })?;
    // plant states occupy the first n entries in both layouts
    let x = z.rows(0, n);
    Ok((aug.plant.c.row(0) * x)[(0, 0)])
}
