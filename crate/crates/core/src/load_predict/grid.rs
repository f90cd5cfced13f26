use rayon::prelude::*;

use super::{accuracy, train_svr, Dataset, Hyper, SvrModel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub best: Hyper,
    /// Validation RMSE (N·m) per cell in grid order; `inf` where training
    /// did not converge.
    pub table: Vec<(Hyper, f64)>,
    pub model: SvrModel,
}

/// `C ∈ {0.1, 1, 10, 100}`, `ε ∈ {0.001, 0.01, 0.05}` (standardized target
/// units, i.e. multiples of the target standard deviation).
pub fn default_grid() -> (Vec<f64>, Vec<f64>) {
    (vec![0.1, 1.0, 10.0, 100.0], vec![0.001, 0.01, 0.05])
}

/// Exhaustive search; lowest validation RMSE wins, ties go to the smaller
/// C and then the larger ε.
pub fn grid_search(
    train: &Dataset,
    val: &Dataset,
    costs: &[f64],
    epsilons: &[f64],
    seed: u64,
) -> Result<GridResult> {
    if costs.is_empty() || epsilons.is_empty() {
        return Err(Error::InvalidInput("hyperparameter grid is empty".into()));
    }
    let cells: Vec<Hyper> = costs
        .iter()
        .flat_map(|&c| epsilons.iter().map(move |&e| Hyper { cost_c: c, epsilon: e }))
        .collect();
    let actual = val.targets();
    let outcomes: Vec<Option<(SvrModel, f64)>> = cells
        .par_iter()
        .map(|h| {
            let (model, _) = train_svr(train, *h, seed).ok()?;
            let preds = val
                .rows
                .iter()
                .map(|r| model.predict(&r.features))
                .collect::<Result<Vec<f64>>>()
                .ok()?;
            let (rmse, _) = accuracy(&preds, &actual).ok()?;
            Some((model, rmse))
        })
        .collect();

    let table: Vec<(Hyper, f64)> = cells
        .iter()
        .zip(&outcomes)
        .map(|(h, o)| (*h, o.as_ref().map_or(f64::INFINITY, |(_, r)| *r)))
        .collect();
    let best = (0..cells.len())
        .filter(|&i| outcomes[i].is_some())
        .min_by(|&a, &b| {
            table[a]
                .1
                .total_cmp(&table[b].1)
                .then(cells[a].cost_c.total_cmp(&cells[b].cost_c))
                .then(cells[b].epsilon.total_cmp(&cells[a].epsilon))
        })
        .ok_or_else(|| Error::NonConvergence {
            passes: super::solver::MAX_PASSES,
            gap: f64::INFINITY,
        })?;
    let model = outcomes[best].as_ref().expect("filtered").0.clone();
    Ok(GridResult {
        best: cells[best],
        table,
        model,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::load_predict::{FeatureVector, Sample};

    fn noiseless(n: usize, offset: f64) -> Dataset {
        let rows = (0..n)
            .map(|k| {
                let x = k as f64 + offset;
                let f = FeatureVector::from_array([
                    (0.37 * x).sin(),
                    (0.21 * x).cos(),
                    (0.13 * x).sin(),
                    (0.05 * x).cos(),
                ]);
                Sample {
                    time: x,
                    features: f,
                    target: 2.0 * f.wind + 1.0,
                }
            })
            .collect();
        Dataset::new(rows, vec![])
    }

    #[test]
    fn single_cell_grid() {
        let r = grid_search(&noiseless(60, 0.0), &noiseless(30, 0.5), &[1.0], &[0.01], 0).unwrap();
        assert_eq!(r.best, Hyper { cost_c: 1.0, epsilon: 0.01 });
        assert_eq!(r.table.len(), 1);
    }

    #[test]
    fn noiseless_optimum_recovered() {
        // with exact data the tight tube and high cost dominate
        let r = grid_search(
            &noiseless(80, 0.0),
            &noiseless(40, 0.5),
            &[0.01, 100.0],
            &[0.0, 0.5],
            0,
        )
        .unwrap();
        assert_eq!(r.best, Hyper { cost_c: 100.0, epsilon: 0.0 });
        assert_eq!(r.table.len(), 4);
    }

    #[test]
    fn empty_grid_rejected() {
        assert!(grid_search(&noiseless(10, 0.0), &noiseless(10, 0.5), &[], &[0.1], 0).is_err());
    }
}
