//! Gain synthesis for the observer-based disturbance-accommodating
//! controller with partial integral action.
//!
//! The regulator works on the integral-extended plant
//!
//! ```text
//! ż = [A   0] z + [B] u,     z = [x; x_i],   ẋ_i = ω_g error
//!     [C_i C 0]     [0]
//! ```
//!
//! and yields `[K_x K_i] = R⁻¹ B_zᵀ P_z` from a continuous Riccati solve.
//! The wind state is not controllable, so its gain is the quadratic-optimal
//! feedforward for a constant disturbance on the plant-only regulator,
//! `K_d = −R⁻¹ Bᵀ (A − B K₀)⁻ᵀ P₀ B_d θ`, where `(P₀, K₀)` solve the
//! problem without the integrator.
//! The observer gain comes from the dual Riccati equation on `(A_aᵀ, C_aᵀ)`
//! with the disturbance-state process weight boosted.

use nalgebra::{Complex, DMatrix};

use crate::control::augment::AugmentedModel;
use crate::error::{Error, Result};
use crate::linalg::{
    care, eigenvalues, format_complex, max_real_part, unobservable_unstable_mode,
};

/// Regulator weights: one per plant state, the control input, and the
/// integral of generator-speed error.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightProfile {
    pub state: Vec<f64>,
    pub control: f64,
    pub integral: f64,
}

/// Observer (Kalman-style) weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ObserverWeights {
    /// Process weight per plant state.
    pub process: Vec<f64>,
    /// Base process weight of the wind state before boosting.
    pub disturbance: f64,
    /// Multiplier on the disturbance weight.
    pub disturbance_boost: f64,
    /// Weights of the two measurement channels.
    pub measurement: [f64; 2],
}

/// Indices of the tower fore-aft states in the plant state vector.
pub const TOWER_STATES: [usize; 2] = [1, 2];

impl WeightProfile {
    /// Balanced design for the six-state turbine model.
    pub fn turbine_default() -> Self {
        WeightProfile {
            state: vec![4.0e3, 4.0e2, 4.0e2, 0.0, 0.0, 0.0],
            control: 2.5e3,
            integral: 1.0,
        }
    }

    /// Copy with the tower-state weights multiplied by `factor`.
    pub fn scale_tower(&self, factor: f64) -> Self {
        let mut w = self.clone();
        for &i in &TOWER_STATES {
            if i < w.state.len() {
                w.state[i] *= factor;
            }
        }
        w
    }
}

impl ObserverWeights {
    pub fn turbine_default() -> Self {
        ObserverWeights {
            process: vec![1e-4, 1e-4, 1e-4, 1e-4, 1e-4, 1e-4],
            disturbance: 1.0,
            disturbance_boost: 10.0,
            measurement: [1e-2, 1e-3],
        }
    }
}

/// Gains of one controller design.
#[derive(Debug, Clone, PartialEq)]
pub struct GainSet {
    /// 1 × (n+1): state-feedback on the estimated augmented state.
    pub k_a: DMatrix<f64>,
    pub k_i: f64,
    /// (n+1) × 2 observer gain.
    pub l: DMatrix<f64>,
    /// Selects the generator-speed channel for integral action.
    pub c_i: [f64; 2],
    pub aggressiveness_index: usize,
    pub op_wind: f64,
}

impl GainSet {
    /// Gain set with the integral action removed.
    pub fn without_integral(&self) -> GainSet {
        GainSet {
            k_i: 0.0,
            ..self.clone()
        }
    }
}

fn integral_extended(aug: &AugmentedModel) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = aug.plant.order();
    let mut a_z = DMatrix::zeros(n + 1, n + 1);
    a_z.view_mut((0, 0), (n, n)).copy_from(&aug.plant.a);
    a_z.view_mut((n, 0), (1, n)).copy_from(&aug.plant.c.row(0));
    let mut b_z = DMatrix::zeros(n + 1, 1);
    b_z.view_mut((0, 0), (n, 1)).copy_from(&aug.plant.b);
    (a_z, b_z)
}

/// Regulator-side spectrum `eig(A_z − B_z [K_x K_i])`.
pub fn regulator_spectrum(aug: &AugmentedModel, gains: &GainSet) -> Vec<Complex<f64>> {
    let n = aug.plant.order();
    let (a_z, b_z) = integral_extended(aug);
    let mut k_z = DMatrix::zeros(1, n + 1);
    k_z.view_mut((0, 0), (1, n)).copy_from(&gains.k_a.view((0, 0), (1, n)));
    k_z[(0, n)] = gains.k_i;
    eigenvalues(&(a_z - b_z * k_z))
}

/// Observer-side spectrum `eig(A_a − L C_a)`.
pub fn observer_spectrum(aug: &AugmentedModel, gains: &GainSet) -> Vec<Complex<f64>> {
    eigenvalues(&(&aug.a_a - &gains.l * &aug.c_a))
}

/// Full closed-loop matrix of plant, integrator and observer, state
/// ordered `[x, x_i, x̂_a]` with the wind treated as an external input.
pub fn closed_loop_matrix(aug: &AugmentedModel, gains: &GainSet) -> DMatrix<f64> {
    let n = aug.plant.order();
    let na = n + 1;
    let dim = n + 1 + na;
    let a = &aug.plant.a;
    let b = &aug.plant.b;
    let c = &aug.plant.c;
    let c_i_row = c.row(0) * gains.c_i[0] + c.row(1) * gains.c_i[1];
    let mut m = DMatrix::zeros(dim, dim);
    // plant
    m.view_mut((0, 0), (n, n)).copy_from(a);
    m.view_mut((0, n), (n, 1)).copy_from(&(b * (-gains.k_i)));
    m.view_mut((0, n + 1), (n, na)).copy_from(&(-(b * &gains.k_a)));
    // integrator
    m.view_mut((n, 0), (1, n)).copy_from(&c_i_row);
    // observer
    m.view_mut((n + 1, 0), (na, n)).copy_from(&(&gains.l * c));
    m.view_mut((n + 1, n), (na, 1)).copy_from(&(&aug.b_a * (-gains.k_i)));
    m.view_mut((n + 1, n + 1), (na, na))
        .copy_from(&(&aug.a_a - &aug.b_a * &gains.k_a - &gains.l * &aug.c_a));
    m
}

/// Damping ratio of the closed-loop regulator pole pair nearest the
/// open-loop tower mode.
pub fn tower_mode_damping(aug: &AugmentedModel, gains: &GainSet) -> f64 {
    let open = eigenvalues(&aug.plant.a);
    let tower = open
        .iter()
        .filter(|e| e.im > 1.0 && e.im < 3.5)
        .min_by(|a, b| a.re.abs().total_cmp(&b.re.abs()))
        .copied()
        .unwrap_or(Complex::new(0.0, 2.08));
    let closed = regulator_spectrum(aug, gains);
    let pole = closed
        .iter()
        .filter(|e| e.im > 0.0)
        .min_by(|a, b| (*a - tower).norm().total_cmp(&(*b - tower).norm()))
        .copied()
        .unwrap_or(tower);
    -pole.re / pole.norm()
}

/// Synthesize one certified-stable gain set.
pub fn synthesize_gains(
    aug: &AugmentedModel,
    weights: &WeightProfile,
    observer: &ObserverWeights,
    aggressiveness_index: usize,
) -> Result<GainSet> {
    let n = aug.plant.order();
    if weights.state.len() != n || observer.process.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "weights for {} / {} states, model has {n}",
            weights.state.len(),
            observer.process.len()
        )));
    }
    if !(weights.control > 0.0) || weights.integral < 0.0 || weights.state.iter().any(|w| *w < 0.0) {
        return Err(Error::InvalidInput(
            "regulator weights must be non-negative with a positive control weight".into(),
        ));
    }
    if let Some(mode) = unobservable_unstable_mode(&aug.a_a, &aug.c_a) {
        return Err(Error::Undetectable {
            mode: format_complex(mode),
        });
    }

    // Regulator on the integral-extended plant.
    let (a_z, b_z) = integral_extended(aug);
    let mut q_diag = weights.state.clone();
    q_diag.push(weights.integral);
    let q_z = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(q_diag));
    let r = DMatrix::from_element(1, 1, weights.control);
    let p_z = care(&a_z, &b_z, &q_z, &r)?;
    let k_z = b_z.transpose() * &p_z / weights.control;
    // Feedforward from the plant-only regulator; the integrator removes
    // what it leaves behind.
    let a = &aug.plant.a;
    let b = &aug.plant.b;
    let q_x = DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&weights.state));
    let p_x = care(a, b, &q_x, &r)?;
    let k_x0 = b.transpose() * &p_x / weights.control;
    let bd_theta = aug.a_a.view((0, n), (n, 1)).into_owned();
    let a_cl_t_inv = (a - b * &k_x0)
        .transpose()
        .try_inverse()
        .ok_or(Error::UnstableClosedLoop { max_real: 0.0 })?;
    let k_d = -(b.transpose() * a_cl_t_inv * &p_x * bd_theta) / weights.control;

    let mut k_a = DMatrix::zeros(1, n + 1);
    k_a.view_mut((0, 0), (1, n)).copy_from(&k_z.view((0, 0), (1, n)));
    k_a[(0, n)] = k_d[(0, 0)];
    let k_i = k_z[(0, n)];

    // Observer from the dual problem.
    let mut qo = observer.process.clone();
    qo.push(observer.disturbance * observer.disturbance_boost);
    let q_o = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(qo));
    let r_o = DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&observer.measurement));
    let p_o = care(&aug.a_a.transpose(), &aug.c_a.transpose(), &q_o, &r_o)?;
    let r_o_inv = r_o.try_inverse().ok_or_else(|| {
        Error::InvalidInput("observer measurement weights must be positive".into())
    })?;
    let l = p_o * aug.c_a.transpose() * r_o_inv;

    let gains = GainSet {
        k_a,
        k_i,
        l,
        c_i: [1.0, 0.0],
        aggressiveness_index,
        op_wind: aug.plant.op_wind,
    };
    certify(aug, &gains)?;
    Ok(gains)
}

/// Tower-weight multipliers of the speed-biased, balanced and load-biased
/// designs.
pub const LADDER_TOWER_SCALES: [f64; 3] = [0.3, 1.0, 3.0];

/// Synthesize the three-level aggressiveness ladder, index 0 first.
pub fn build_ladder(
    aug: &AugmentedModel,
    base: &WeightProfile,
    observer: &ObserverWeights,
) -> Result<Vec<GainSet>> {
    LADDER_TOWER_SCALES
        .iter()
        .enumerate()
        .map(|(i, s)| synthesize_gains(aug, &base.scale_tower(*s), observer, i))
        .collect()
}

/// Stability gate: every eigenvalue of the closed-loop matrix strictly in
/// the left half-plane.
pub fn certify(aug: &AugmentedModel, gains: &GainSet) -> Result<()> {
    let max_real = max_real_part(&eigenvalues(&closed_loop_matrix(aug, gains)));
    if max_real < 0.0 {
        Ok(())
    } else {
        Err(Error::UnstableClosedLoop { max_real })
    }
}
