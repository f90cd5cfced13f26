//! Dual coordinate descent for linear ε-SVR.
//!
//! The bias is handled by appending a constant 1 to every standardized
//! feature vector, so the dual has only box constraints:
//!
//! ```text
//! min_β  ½ βᵀQβ − tᵀβ + ε‖β‖₁,   −C ≤ β_i ≤ C,   Q = Z Zᵀ
//! ```
//!
//! with `w = Σ β_i z_i`. Each coordinate step solves its one-dimensional
//! subproblem exactly. Samples are visited in a seeded random order.
//! Every few passes the free coordinates (strictly inside the box and
//! nonzero) are solved jointly with the rest held fixed; the step is kept
//! only if it lowers the objective.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{accuracy, standardize, Dataset, Hyper, SvrModel, N_FEATURES};
use crate::error::{Error, Result};

const DIM: usize = N_FEATURES + 1;
/// Stop once a full pass improves the dual objective by less than this.
pub const PASS_TOLERANCE: f64 = 1e-8;
pub const MAX_PASSES: usize = 5000;
const SUBSPACE_EVERY: usize = 10;
const SUBSPACE_MAX_FREE: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub passes: usize,
    /// False when the pass cap was hit before the tolerance.
    pub converged: bool,
    /// Objective decrease over the final pass.
    pub final_improvement: f64,
    pub dual_objective: f64,
    /// RMSE of the trained model on the training rows, N·m.
    pub training_rmse: f64,
    /// Converged dual variables, one per row.
    pub dual: Vec<f64>,
}

fn augmented(ds_std: &Dataset) -> Vec<[f64; DIM]> {
    ds_std
        .rows
        .iter()
        .map(|r| {
            let f = r.features.to_array();
            [f[0], f[1], f[2], f[3], 1.0]
        })
        .collect()
}

fn dot(a: &[f64; DIM], b: &[f64; DIM]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dual objective of `beta` on an already standardized dataset.
pub fn dual_objective(ds_std: &Dataset, beta: &[f64], epsilon: f64) -> f64 {
    let z = augmented(ds_std);
    let mut w = [0.0; DIM];
    for (zi, b) in z.iter().zip(beta) {
        for k in 0..DIM {
            w[k] += b * zi[k];
        }
    }
    0.5 * dot(&w, &w)
        - ds_std.rows.iter().zip(beta).map(|(r, b)| r.target * b).sum::<f64>()
        + epsilon * beta.iter().map(|b| b.abs()).sum::<f64>()
}

/// Train from `β = 0`.
pub fn train_svr(ds: &Dataset, hyper: Hyper, seed: u64) -> Result<(SvrModel, TrainReport)> {
    train_svr_from(ds, hyper, seed, None)
}

/// Train from a given dual starting point (warm start).
pub fn train_svr_from(
    ds: &Dataset,
    hyper: Hyper,
    seed: u64,
    start: Option<&[f64]>,
) -> Result<(SvrModel, TrainReport)> {
    hyper.validate()?;
    let (ds_std, scaler) = standardize(ds)?;
    let z = augmented(&ds_std);
    let t: Vec<f64> = ds_std.rows.iter().map(|r| r.target).collect();
    let (w, beta, passes, improvement) = coordinate_descent(&z, &t, hyper, seed, start)?;

    let model = SvrModel {
        weights: [w[0], w[1], w[2], w[3]],
        bias: w[4],
        scaler,
        hyper,
        seed,
    };
    let preds = ds
        .rows
        .iter()
        .map(|r| model.predict(&r.features))
        .collect::<Result<Vec<f64>>>()?;
    let (training_rmse, _) = accuracy(&preds, &ds.targets())?;
    let report = TrainReport {
        passes,
        converged: improvement < PASS_TOLERANCE,
        final_improvement: improvement,
        dual_objective: dual_objective(&ds_std, &beta, hyper.epsilon),
        training_rmse,
        dual: beta,
    };
    Ok((model, report))
}

type Solution = ([f64; DIM], Vec<f64>, usize, f64);

fn coordinate_descent(
    z: &[[f64; DIM]],
    t: &[f64],
    hyper: Hyper,
    seed: u64,
    start: Option<&[f64]>,
) -> Result<Solution> {
    let n = z.len();
    let (c, eps) = (hyper.cost_c, hyper.epsilon);
    let mut beta: Vec<f64> = match start {
        Some(b) if b.len() == n => b.iter().map(|v| v.clamp(-c, c)).collect(),
        Some(b) => {
            return Err(Error::DimensionMismatch(format!(
                "{} starting duals for {n} rows",
                b.len()
            )))
        }
        None => vec![0.0; n],
    };
    let mut w = [0.0; DIM];
    for (zi, b) in z.iter().zip(&beta) {
        for k in 0..DIM {
            w[k] += b * zi[k];
        }
    }
    let q_diag: Vec<f64> = z.iter().map(|zi| dot(zi, zi)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut passes = 0;
    let mut improvement = f64::INFINITY;
    while passes < MAX_PASSES {
        passes += 1;
        order.shuffle(&mut rng);
        let mut change = 0.0;
        for &i in &order {
            let g = dot(&w, &z[i]) - t[i];
            let q = q_diag[i];
            let old = beta[i];
            let target = if g + eps < q * old {
                old - (g + eps) / q
            } else if g - eps > q * old {
                old - (g - eps) / q
            } else {
                0.0
            };
            let new = target.clamp(-c, c);
            let d = new - old;
            if d != 0.0 {
                for k in 0..DIM {
                    w[k] += d * z[i][k];
                }
                beta[i] = new;
                change += 0.5 * q * d * d + g * d + eps * (new.abs() - old.abs());
            }
        }
        if passes % SUBSPACE_EVERY == 0 {
            change -= subspace_step(z, t, hyper, &mut beta, &mut w);
        }
        improvement = -change;
        if improvement < PASS_TOLERANCE {
            return Ok((w, beta, passes, improvement));
        }
    }
    Ok((w, beta, passes, improvement))
}

fn objective_of(w: &[f64; DIM], t: &[f64], beta: &[f64], eps: f64) -> f64 {
    0.5 * dot(w, w) - t.iter().zip(beta).map(|(t, b)| t * b).sum::<f64>()
        + eps * beta.iter().map(|b| b.abs()).sum::<f64>()
}

/// Joint solve over the free coordinates with their signs frozen. Moves
/// towards that solution as far as signs and bounds allow; a coordinate
/// that hits zero or the box leaves the free set and the solve repeats.
/// Returns the objective decrease (zero when rejected).
fn subspace_step(z: &[[f64; DIM]], t: &[f64], hyper: Hyper, beta: &mut [f64], w: &mut [f64; DIM]) -> f64 {
    let (c, eps) = (hyper.cost_c, hyper.epsilon);
    let mut free: Vec<usize> = (0..beta.len()).filter(|&i| beta[i] != 0.0 && beta[i].abs() < c).collect();
    if free.is_empty() || free.len() > SUBSPACE_MAX_FREE {
        return 0.0;
    }
    let before = objective_of(w, t, beta, eps);
    let mut trial = beta.to_vec();
    while !free.is_empty() {
        let mut w_fixed = [0.0; DIM];
        for (i, b) in trial.iter().enumerate() {
            if !free.contains(&i) {
                for k in 0..DIM {
                    w_fixed[k] += b * z[i][k];
                }
            }
        }
        let m = free.len();
        let q = DMatrix::from_fn(m, m, |a, b| dot(&z[free[a]], &z[free[b]]));
        let rhs = DMatrix::from_fn(m, 1, |a, _| {
            let i = free[a];
            t[i] - eps * trial[i].signum() - dot(&z[i], &w_fixed)
        });
        let Ok(sol) = q.clone().svd(true, true).solve(&rhs, 1e-12) else {
            break;
        };
        // when Q_FF is singular and rhs leaves its range, the objective is
        // linear along the residual: follow it to the first boundary
        let resid = &rhs - &q * &sol;
        let unbounded = resid.norm() > 1e-10 * (1.0 + rhs.norm());
        let dir: Vec<f64> = (0..m)
            .map(|a| if unbounded { resid[a] } else { sol[a] - trial[free[a]] })
            .collect();
        let mut alpha: f64 = if unbounded { f64::INFINITY } else { 1.0 };
        let mut blocking = None;
        for (a, &i) in free.iter().enumerate() {
            let (b0, d) = (trial[i], dir[a]);
            let limit = match (b0 > 0.0, d) {
                (true, d) if d < 0.0 => b0 / -d,
                (true, d) if d > 0.0 => (c - b0) / d,
                (false, d) if d > 0.0 => -b0 / d,
                (false, d) if d < 0.0 => (c + b0) / -d,
                _ => f64::INFINITY,
            };
            if limit < alpha {
                alpha = limit;
                blocking = Some(a);
            }
        }
        if !alpha.is_finite() {
            break;
        }
        for (a, &i) in free.iter().enumerate() {
            trial[i] = (trial[i] + alpha * dir[a]).clamp(-c, c);
        }
        match blocking {
            Some(a) => {
                let i = free.remove(a);
                // land exactly on the boundary that stopped the step
                trial[i] = if trial[i].abs() * 2.0 < c { 0.0 } else { c.copysign(trial[i]) };
            }
            None => break,
        }
    }
    let mut w_new = [0.0; DIM];
    for (i, b) in trial.iter().enumerate() {
        for k in 0..DIM {
            w_new[k] += b * z[i][k];
        }
    }
    let after = objective_of(&w_new, t, &trial, eps);
    if after < before {
        beta.copy_from_slice(&trial);
        *w = w_new;
        before - after
    } else {
        0.0
    }
}

/// Dense reference solve of the same dual, split as `β = α⁺ − α⁻` with
/// `0 ≤ α± ≤ C`, by accelerated projected gradient. Meant for small
/// problems; returns `β`.
pub fn reference_dual_solve(ds_std: &Dataset, hyper: Hyper, iterations: usize) -> Vec<f64> {
    let z = augmented(ds_std);
    let n = z.len();
    let t: Vec<f64> = ds_std.rows.iter().map(|r| r.target).collect();
    let q = DMatrix::from_fn(n, n, |i, j| dot(&z[i], &z[j]));
    let lmax = SymmetricEigen::new(q.clone())
        .eigenvalues
        .iter()
        .fold(0.0f64, |m, v| m.max(*v));
    let step = 1.0 / (2.0 * lmax.max(1e-12));
    let c = hyper.cost_c;
    let eps = hyper.epsilon;

    let grad = |ap: &[f64], am: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let beta: Vec<f64> = ap.iter().zip(am).map(|(p, m)| p - m).collect();
        let qb: Vec<f64> = (0..n).map(|i| (0..n).map(|j| q[(i, j)] * beta[j]).sum()).collect();
        let gp = (0..n).map(|i| qb[i] - t[i] + eps).collect();
        let gm = (0..n).map(|i| -(qb[i] - t[i]) + eps).collect();
        (gp, gm)
    };
    let mut xp = vec![0.0; n];
    let mut xm = vec![0.0; n];
    let mut yp = xp.clone();
    let mut ym = xm.clone();
    let mut tk = 1.0f64;
    for _ in 0..iterations {
        let (gp, gm) = grad(&yp, &ym);
        let np: Vec<f64> = (0..n).map(|i| (yp[i] - step * gp[i]).clamp(0.0, c)).collect();
        let nm: Vec<f64> = (0..n).map(|i| (ym[i] - step * gm[i]).clamp(0.0, c)).collect();
        let tn = 0.5 * (1.0 + (1.0 + 4.0 * tk * tk).sqrt());
        let mom = (tk - 1.0) / tn;
        yp = (0..n).map(|i| np[i] + mom * (np[i] - xp[i])).collect();
        ym = (0..n).map(|i| nm[i] + mom * (nm[i] - xm[i])).collect();
        xp = np;
        xm = nm;
        tk = tn;
    }
    xp.iter().zip(&xm).map(|(p, m)| p - m).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::load_predict::{FeatureVector, Sample};

    fn linear_dataset(n: usize, noise: f64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        use rand::Rng;
        let rows = (0..n)
            .map(|k| {
                let f = FeatureVector::from_array([
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                ]);
                Sample {
                    time: k as f64,
                    features: f,
                    target: 2.0 * f.wind + 1.0 + noise * rng.random_range(-1.0..1.0),
                }
            })
            .collect();
        Dataset::new(rows, vec![])
    }

    #[test]
    fn realizable_target_recovered() {
        let ds = linear_dataset(200, 0.0);
        let (m, rep) = train_svr(&ds, Hyper { cost_c: 100.0, epsilon: 0.0 }, 1).unwrap();
        let preds: Vec<f64> = ds.rows.iter().map(|r| m.predict(&r.features).unwrap()).collect();
        let (rmse, _) = accuracy(&preds, &ds.targets()).unwrap();
        assert!(rmse < 1e-4, "rmse {rmse} after {} passes", rep.passes);
    }

    #[test]
    fn wide_tube_gives_zero_weights() {
        let ds = linear_dataset(100, 0.1);
        // standardized targets lie within a few units of zero
        let (m, _) = train_svr(&ds, Hyper { cost_c: 1.0, epsilon: 10.0 }, 1).unwrap();
        assert!(m.weights.iter().all(|w| w.abs() < 1e-12));
        assert!(m.bias.abs() < 1e-12);
    }

    #[test]
    fn matches_dense_reference() {
        for (n, hyper) in [
            (12, Hyper { cost_c: 1.0, epsilon: 0.05 }),
            (20, Hyper { cost_c: 0.1, epsilon: 0.0 }),
            (15, Hyper { cost_c: 10.0, epsilon: 0.2 }),
        ] {
            let ds = linear_dataset(n, 0.5);
            let (_, rep) = train_svr(&ds, hyper, 3).unwrap();
            let (ds_std, _) = standardize(&ds).unwrap();
            let beta = reference_dual_solve(&ds_std, hyper, 200_000);
            let reference = dual_objective(&ds_std, &beta, hyper.epsilon);
            assert!(
                (rep.dual_objective - reference).abs() < 1e-6,
                "n={n}: {} vs {reference}",
                rep.dual_objective
            );
        }
    }

    #[test]
    fn degenerate_dual_converges_before_cap() {
        // more rows than features, no tube, large C: Q is rank 5 and the
        // dual is flat along most directions
        for n in [8, 14, 20] {
            let ds = linear_dataset(n, 1.0);
            let hyper = Hyper { cost_c: 10.0, epsilon: 0.0 };
            let (_, rep) = train_svr(&ds, hyper, 9).unwrap();
            assert!(rep.converged, "n={n}: cap hit");
            let (ds_std, _) = standardize(&ds).unwrap();
            let beta = reference_dual_solve(&ds_std, hyper, 200_000);
            let reference = dual_objective(&ds_std, &beta, hyper.epsilon);
            assert!((rep.dual_objective - reference).abs() < 1e-6, "n={n}");
        }
    }

    #[test]
    fn training_rmse_is_recomputable() {
        let ds = linear_dataset(80, 0.3);
        let (m, rep) = train_svr(&ds, Hyper { cost_c: 1.0, epsilon: 0.01 }, 4).unwrap();
        let preds: Vec<f64> = ds.rows.iter().map(|r| m.predict(&r.features).unwrap()).collect();
        assert_eq!(accuracy(&preds, &ds.targets()).unwrap().0, rep.training_rmse);
    }

    #[test]
    fn same_seed_same_bits() {
        let ds = linear_dataset(150, 0.3);
        let h = Hyper { cost_c: 1.0, epsilon: 0.01 };
        let a = train_svr(&ds, h, 11).unwrap().0;
        let b = train_svr(&ds, h, 11).unwrap().0;
        assert_eq!(a, b);
    }

    #[test]
    fn in_tube_perturbation_leaves_weights() {
        let ds = linear_dataset(60, 0.5);
        let h = Hyper { cost_c: 1.0, epsilon: 0.1 };
        let (ds_std, _) = standardize(&ds).unwrap();
        let z = augmented(&ds_std);
        let t: Vec<f64> = ds_std.rows.iter().map(|r| r.target).collect();
        let (w, beta, _, _) = coordinate_descent(&z, &t, h, 2, None).unwrap();
        let mut moved = t.clone();
        let mut touched = 0;
        for i in 0..t.len() {
            let pred = dot(&w, &z[i]);
            let resid = t[i] - pred;
            if beta[i] == 0.0 && resid.abs() < h.epsilon {
                // slide to the other side of the prediction, still in the tube
                moved[i] = pred - 0.5 * resid;
                touched += 1;
            }
        }
        assert!(touched > 0);
        // restart both problems from the converged point; the original one
        // is the reference so that only the perturbation differs
        let (w1, _, _, _) = coordinate_descent(&z, &t, h, 7, Some(&beta)).unwrap();
        let (w2, _, _, _) = coordinate_descent(&z, &moved, h, 7, Some(&beta)).unwrap();
        for (a, b) in w1.iter().zip(&w2) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }
}
