//! Batch rainflow counting used as a reference for the streaming counter.

use super::Cycle;

/// Reduce a series to its reversal points, keeping both ends.
fn reversals(series: &[f64]) -> Vec<f64> {
    let mut flat: Vec<f64> = Vec::with_capacity(series.len());
    for &x in series {
        if flat.last() != Some(&x) {
            flat.push(x);
        }
    }
    if flat.len() <= 2 {
        return flat;
    }
    let mut out = vec![flat[0]];
    for i in 1..flat.len() - 1 {
        let rising_in = flat[i] > flat[i - 1];
        let rising_out = flat[i + 1] > flat[i];
        if rising_in != rising_out {
            out.push(flat[i]);
        }
    }
    out.push(flat[flat.len() - 1]);
    out
}

/// Offline three-point counting: repeatedly find the leftmost triple with
/// `|X − Y| ≤ |Y − Z|`, log `X–Y` as a full cycle and delete it. Whatever
/// cannot be reduced is reported pairwise as half cycles.
///
/// `closed_at` is left at zero; the oracle knows nothing about time.
pub fn offline_rainflow_oracle(series: &[f64]) -> Vec<Cycle> {
    let mut pts = reversals(series);
    let mut cycles = Vec::new();
    'rescan: loop {
        for i in 0..pts.len().saturating_sub(2) {
            let (x, y, z) = (pts[i], pts[i + 1], pts[i + 2]);
            if (x - y).abs() <= (y - z).abs() {
                cycles.push(Cycle {
                    range_s: (x - y).abs(),
                    mean: (x + y) / 2.0,
                    weight: 1.0,
                    closed_at: 0.0,
                });
                pts.remove(i + 1);
                pts.remove(i);
                continue 'rescan;
            }
        }
        break;
    }
    for pair in pts.windows(2) {
        cycles.push(Cycle {
            range_s: (pair[1] - pair[0]).abs(),
            mean: (pair[0] + pair[1]) / 2.0,
            weight: 0.5,
            closed_at: 0.0,
        });
    }
    cycles
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series_has_no_cycles() {
        assert!(offline_rainflow_oracle(&[3.0; 50]).is_empty());
    }

    #[test]
    fn two_points_give_one_half_cycle() {
        let c = offline_rainflow_oracle(&[0.0, 5.0]);
        assert_eq!(c.len(), 1);
        assert_eq!((c[0].range_s, c[0].weight), (5.0, 0.5));
    }

    #[test]
    fn reversal_extraction_skips_plateaus_and_ramps() {
        assert_eq!(reversals(&[0.0, 1.0, 2.0, 2.0, 1.0, 1.0, 3.0]), vec![0.0, 2.0, 1.0, 3.0]);
    }
}
