use nalgebra::DMatrix;

use crate::error::{ensure_finite, Result};
use crate::linalg::{apply_balance, balance, numeric_rank};
use crate::model::StateSpaceModel;

/// Plant model augmented with the wind waveform model `d = θ x_d`,
/// `ẋ_d = F x_d`:
///
/// ```text
/// A_a = [A  B_d·θ]    B_a = [B]    C_a = [C  0]
///       [0    F  ]          [0]
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedModel {
    pub a_a: DMatrix<f64>,
    pub b_a: DMatrix<f64>,
    pub c_a: DMatrix<f64>,
    pub theta: f64,
    pub f: f64,
    /// The plant model the augmentation was built from.
    pub plant: StateSpaceModel,
}

impl AugmentedModel {
    /// Order of the augmented model (plant order + 1).
    pub fn order(&self) -> usize {
        self.a_a.nrows()
    }

    /// Re-extract `(A, B_d·θ, F)` from the block layout.
    pub fn blocks(&self) -> (DMatrix<f64>, DMatrix<f64>, f64) {
        let n = self.plant.order();
        (
            self.a_a.view((0, 0), (n, n)).into_owned(),
            self.a_a.view((0, n), (n, 1)).into_owned(),
            self.a_a[(n, n)],
        )
    }
}

/// Assemble the augmented model. The step waveform is `(θ, F) = (1, 0)`.
pub fn augment_disturbance(model: &StateSpaceModel, theta: f64, f: f64) -> Result<AugmentedModel> {
    model.check_dimensions()?;
    ensure_finite("theta", theta)?;
    ensure_finite("F", f)?;
    let n = model.order();
    let mut a_a = DMatrix::zeros(n + 1, n + 1);
    a_a.view_mut((0, 0), (n, n)).copy_from(&model.a);
    a_a.view_mut((0, n), (n, 1)).copy_from(&(&model.b_d * theta));
    a_a[(n, n)] = f;
    let mut b_a = DMatrix::zeros(n + 1, 1);
    b_a.view_mut((0, 0), (n, 1)).copy_from(&model.b);
    let mut c_a = DMatrix::zeros(2, n + 1);
    c_a.view_mut((0, 0), (2, n)).copy_from(&model.c);
    Ok(AugmentedModel {
        a_a,
        b_a,
        c_a,
        theta,
        f,
        plant: model.clone(),
    })
}

/// Numeric rank of the observability matrix `[C_a; C_a A_a; …]`.
///
/// The pair is diagonally balanced first (a similarity, so the rank is
/// unchanged) and singular values above `1e-9 × σ_max` are counted.
pub fn check_observability(aug: &AugmentedModel) -> usize {
    let n = aug.order();
    let d = balance(&aug.a_a);
    let (a, _, c) = apply_balance(&d, &aug.a_a, None, Some(&aug.c_a));
    let c = c.expect("c supplied");
    let p = c.nrows();
    let mut obs = DMatrix::zeros(p * n, n);
    let mut block = c.clone();
    for k in 0..n {
        // normalise each block row so high powers do not swamp low ones
        let scale = block.amax();
        let rows = if scale > 0.0 { &block / scale } else { block.clone() };
        obs.view_mut((k * p, 0), (p, n)).copy_from(&rows);
        block = &block * &a;
    }
    numeric_rank(&obs)
}
