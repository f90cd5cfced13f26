//! Analytic rotor power and thrust coefficients.
//!
//! Power coefficient: the common exponential-in-`1/λᵢ` fit
//!
//! ```text
//! cp₀(λ, β) = 0.5176 (116/λᵢ − 0.4β − 5) e^(−21/λᵢ) + 0.0068 λ
//! 1/λᵢ      = 1/(λ + 0.08β) − 0.035/(β³ + 1)          (β in degrees)
//! ```
//!
//! rescaled as `cp(λ, β) = a · cp₀(s·λ, q·β)`. The tip-speed-ratio scale `s`
//! and amplitude `a` put the β = 0 optimum exactly at `(λ_opt, cp_max)`; the
//! pitch scale `q` makes the 18 m/s rated-speed trim pitch 14.6°. Negative
//! values of the fit are clipped to zero.
//!
//! Thrust coefficient: actuator-disc momentum theory. The axial induction
//! `a_ind ∈ [0, 1/3]` solving `cp = 4 a_ind (1 − a_ind)²` gives
//! `ct = 4 a_ind (1 − a_ind)`.

use crate::error::{ensure_finite, Error, Result};
use crate::model::TurbineParams;

/// Location of the β = 0 maximum of the unscaled fit.
const FIT_LAMBDA_STAR: f64 = 8.100_117_237_708_234;
/// Value of the unscaled fit at that maximum.
const FIT_CP_STAR: f64 = 0.480_011_902_827_874_76;
/// Pitch-axis stretch calibrated to the 18 m/s trim point.
const PITCH_SCALE: f64 = 1.480_685_783_489_424_5;

fn fit(lambda: f64, beta_deg: f64) -> f64 {
    let inv_li = 1.0 / (lambda + 0.08 * beta_deg) - 0.035 / (beta_deg.powi(3) + 1.0);
    0.5176 * (116.0 * inv_li - 0.4 * beta_deg - 5.0) * (-21.0 * inv_li).exp() + 0.0068 * lambda
}

/// Power coefficient without input checks; used on the integration path.
pub(crate) fn power_coefficient(tip_speed_ratio: f64, pitch: f64, params: &TurbineParams) -> f64 {
    let s = FIT_LAMBDA_STAR / params.lambda_opt;
    let a = params.cp_max / FIT_CP_STAR;
    let beta_deg = (pitch - params.beta_opt).to_degrees() * PITCH_SCALE;
    (a * fit(s * tip_speed_ratio, beta_deg)).max(0.0)
}

/// Momentum-theory thrust coefficient for a given power coefficient.
pub(crate) fn thrust_from_power(cp: f64) -> f64 {
    if cp <= 0.0 {
        return 0.0;
    }
    // Newton on 4a(1−a)² − cp from the small-induction guess; the root
    // is well inside [0, 1/3] because cp stays below the Betz limit.
    let mut a = cp / 4.0;
    for _ in 0..8 {
        let f = 4.0 * a * (1.0 - a) * (1.0 - a) - cp;
        let df = 4.0 * (1.0 - a) * (1.0 - 3.0 * a);
        a -= f / df;
    }
    4.0 * a * (1.0 - a)
}

/// Power and thrust coefficients `(cp, ct)` at a tip-speed ratio and pitch.
pub fn aero_coefficients(
    tip_speed_ratio: f64,
    pitch: f64,
    params: &TurbineParams,
) -> Result<(f64, f64)> {
    ensure_finite("tip_speed_ratio", tip_speed_ratio)?;
    ensure_finite("pitch", pitch)?;
    if tip_speed_ratio <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "tip_speed_ratio must be > 0, got {tip_speed_ratio}"
        )));
    }
    let cp = power_coefficient(tip_speed_ratio, pitch, params);
    Ok((cp, thrust_from_power(cp)))
}
