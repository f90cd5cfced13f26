use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::plant::{Plant, PlantState, STATE_DIM};
use crate::model::TurbineParams;

/// Continuous-time LTI model `ẋ = Ax + Bu + B_d d`, `y = Cx` in deviation
/// coordinates around a trimmed operating point.
///
/// `u` is the pitch command (rad), `d` the hub-height wind (m/s), and `y`
/// the generator speed (rad/s) and tower-top fore-aft acceleration (m/s²).
/// The state ordering follows [`PlantState::to_vector`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub b_d: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub op_wind: f64,
    pub op_pitch: f64,
    /// Operating point the deviations are measured from.
    pub trim: PlantState,
}

impl StateSpaceModel {
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        b_d: DMatrix<f64>,
        c: DMatrix<f64>,
        op_wind: f64,
        op_pitch: f64,
    ) -> Result<Self> {
        let model = StateSpaceModel {
            a,
            b,
            b_d,
            c,
            op_wind,
            op_pitch,
            trim: PlantState::default(),
        };
        model.check_dimensions()?;
        Ok(model)
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn check_dimensions(&self) -> Result<()> {
        let n = self.a.nrows();
        let ok = self.a.ncols() == n
            && self.b.shape() == (n, 1)
            && self.b_d.shape() == (n, 1)
            && self.c.shape() == (2, n);
        if ok {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "A {:?}, B {:?}, B_d {:?}, C {:?} (expected n×n, n×1, n×1, 2×n)",
                self.a.shape(),
                self.b.shape(),
                self.b_d.shape(),
                self.c.shape()
            )))
        }
    }

    /// Simulate the linear model with RK4 for inputs given per step;
    /// returns the output deviations at each step end.
    pub fn simulate(&self, x0: &DVector<f64>, u: &[f64], d: &[f64], dt: f64) -> Vec<[f64; 2]> {
        let f = |x: &DVector<f64>, u: f64, d: f64| &self.a * x + &self.b * u + &self.b_d * d;
        let mut x = x0.clone();
        let mut out = Vec::with_capacity(u.len());
        for (&uk, &dk) in u.iter().zip(d) {
            let k1 = f(&x, uk, dk);
            let k2 = f(&(&x + &k1 * (0.5 * dt)), uk, dk);
            let k3 = f(&(&x + &k2 * (0.5 * dt)), uk, dk);
            let k4 = f(&(&x + &k3 * dt), uk, dk);
            x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
            let y = &self.c * &x;
            out.push([y[0], y[1]]);
        }
        out
    }
}

/// Central finite-difference linearization of plant plus actuator about
/// the rated-speed trim at `op_wind`.
pub fn linearize(params: &TurbineParams, op_wind: f64) -> Result<StateSpaceModel> {
    let (_, rated, cutout) = params.cutin_rated_cutout_wind;
    if !(op_wind >= rated && op_wind <= cutout) {
        return Err(Error::InvalidInput(format!(
            "operating wind {op_wind} m/s outside the above-rated region [{rated}, {cutout}]"
        )));
    }
    let plant = Plant::new(params.clone());
    let trim = plant.trim(op_wind)?;
    let x0 = trim.to_vector();
    let u0 = trim.pitch_angle;

    let f0 = plant.derivatives(&x0, u0, op_wind);
    let scale = f0.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if scale > 1e-9 {
        return Err(Error::TrimFailed {
            wind: op_wind,
            residual: scale,
        });
    }

    let n = STATE_DIM;
    let mut a = DMatrix::zeros(n, n);
    for j in 0..n {
        let h = 1e-6 * x0[j].abs().max(1.0);
        let mut xp = x0;
        let mut xm = x0;
        xp[j] += h;
        xm[j] -= h;
        let fp = plant.derivatives(&xp, u0, op_wind);
        let fm = plant.derivatives(&xm, u0, op_wind);
        for i in 0..n {
            a[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    let hu = 1e-6;
    let fp = plant.derivatives(&x0, u0 + hu, op_wind);
    let fm = plant.derivatives(&x0, u0 - hu, op_wind);
    let b = DMatrix::from_fn(n, 1, |i, _| (fp[i] - fm[i]) / (2.0 * hu));
    let hd = 1e-6 * op_wind;
    let fp = plant.derivatives(&x0, u0, op_wind + hd);
    let fm = plant.derivatives(&x0, u0, op_wind - hd);
    let b_d = DMatrix::from_fn(n, 1, |i, _| (fp[i] - fm[i]) / (2.0 * hd));

    // Generator speed is N·ω; tower acceleration is the ẍ row, which is
    // linear in the state.
    let mut c = DMatrix::zeros(2, n);
    c[(0, 0)] = params.gearbox_ratio;
    for j in 0..n {
        c[(1, j)] = a[(2, j)];
    }

    Ok(StateSpaceModel {
        a,
        b,
        b_d,
        c,
        op_wind,
        op_pitch: u0,
        trim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigenvalues;

    const DT: f64 = 0.0125;

    #[test]
    fn tower_mode_near_2_08_rad_s() {
        let m = linearize(&TurbineParams::nrel_5mw(), 18.0).unwrap();
        let eigs = eigenvalues(&m.a);
        let tower = eigs
            .iter()
            .filter(|e| e.im > 0.0)
            .min_by(|a, b| (a.im - 2.08).abs().total_cmp(&(b.im - 2.08).abs()))
            .unwrap();
        assert!((tower.im - 2.08).abs() / 2.08 < 0.05, "tower pole {tower}");
        assert!(tower.re < 0.0);
    }

    #[test]
    fn below_rated_operating_point_rejected() {
        assert!(linearize(&TurbineParams::nrel_5mw(), 9.0).is_err());
    }

    #[test]
    fn dimensions_checked() {
        let bad = StateSpaceModel::new(
            DMatrix::zeros(2, 2),
            DMatrix::zeros(2, 1),
            DMatrix::zeros(3, 1),
            DMatrix::zeros(2, 2),
            18.0,
            0.0,
        );
        assert!(matches!(bad, Err(Error::DimensionMismatch(_))));
    }

    /// Open-loop comparison: linear model vs nonlinear plant, both driven
    /// by the same wind step and trim pitch command.
    fn fidelity(fraction: f64) -> [f64; 2] {
        let params = TurbineParams::nrel_5mw();
        let m = linearize(&params, 18.0).unwrap();
        let plant = Plant::new(params.clone());
        let trim = m.trim;
        let y_trim = plant.outputs(&trim, 18.0);
        let steps = (30.0 / DT) as usize;
        let wind = 18.0 * (1.0 + fraction);
        let lin = m.simulate(
            &DVector::zeros(m.order()),
            &vec![0.0; steps],
            &vec![wind - 18.0; steps],
            DT,
        );
        let mut s = trim;
        let mut err = [0.0; 2];
        let mut mag = [0.0; 2];
        for (k, yl) in lin.iter().enumerate() {
            let (next, out) = plant.step(&s, trim.pitch_angle, wind, DT, k as f64 * DT).unwrap();
            s = next;
            let yn = [
                out.generator_speed - y_trim.generator_speed,
                out.tower_accel - y_trim.tower_accel,
            ];
            for ch in 0..2 {
                err[ch] += (yl[ch] - yn[ch]).powi(2);
                mag[ch] += yn[ch].powi(2);
            }
        }
        [(err[0] / mag[0]).sqrt(), (err[1] / mag[1]).sqrt()]
    }

    #[test]
    fn linear_model_tracks_nonlinear_for_small_gusts() {
        for frac in [0.01, 0.02, -0.02] {
            let rel = fidelity(frac);
            assert!(rel[0] < 0.05 && rel[1] < 0.05, "{frac}: {rel:?}");
        }
    }

    #[test]
    fn zero_perturbation_holds_equilibrium() {
        let params = TurbineParams::nrel_5mw();
        let m = linearize(&params, 18.0).unwrap();
        let lin = m.simulate(&DVector::zeros(m.order()), &[0.0; 100], &[0.0; 100], DT);
        assert!(lin.iter().all(|y| y[0] == 0.0 && y[1] == 0.0));
        let plant = Plant::new(params);
        let mut s = m.trim;
        for k in 0..800 {
            s = plant.step(&s, m.op_pitch, 18.0, DT, k as f64 * DT).unwrap().0;
        }
        assert!((s.rotor_speed - m.trim.rotor_speed).abs() < 1e-9);
        assert!((s.tower_fa_displacement - m.trim.tower_fa_displacement).abs() < 1e-9);
    }
}
