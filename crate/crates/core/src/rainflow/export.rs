use std::path::Path;

use super::Cycle;
use crate::error::{Error, Result};
use crate::io::{fmt_exact, read_numeric_csv, write_numeric_csv};

const CYCLE_HEADER: [&str; 4] = ["closed_at_s", "range_Nm", "mean_Nm", "weight"];

pub fn write_cycle_log(path: &Path, cycles: &[Cycle]) -> Result<()> {
    let rows = cycles.iter().map(|c| {
        vec![
            fmt_exact(c.closed_at),
            fmt_exact(c.range_s),
            fmt_exact(c.mean),
            fmt_exact(c.weight),
        ]
    });
    write_numeric_csv(path, &CYCLE_HEADER, rows)
}

pub fn read_cycle_log(path: &Path) -> Result<Vec<Cycle>> {
    read_numeric_csv(path, &CYCLE_HEADER)?
        .into_iter()
        .map(|r| {
            if r[3] != 0.5 && r[3] != 1.0 {
                return Err(Error::parse(
                    path.display().to_string(),
                    format!("cycle weight must be 0.5 or 1, got {}", r[3]),
                ));
            }
            Ok(Cycle {
                closed_at: r[0],
                range_s: r[1],
                mean: r[2],
                weight: r[3],
            })
        })
        .collect()
}

/// Rows of `(time, D_k, L_e)`; an infinite `L_e` is written as `inf`.
pub fn write_damage_trace(path: &Path, rows: &[(f64, f64, f64)]) -> Result<()> {
    let rows = rows
        .iter()
        .map(|(t, d, l)| vec![fmt_exact(*t), fmt_exact(*d), fmt_exact(*l)]);
    write_numeric_csv(path, &["time_s", "D_k", "L_e"], rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_log_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cycles.csv");
        let cycles = vec![
            Cycle { range_s: 1.5e6, mean: -3.0, weight: 1.0, closed_at: 0.1 },
            Cycle { range_s: 0.0, mean: 2.0 / 3.0, weight: 0.5, closed_at: 600.0 },
        ];
        write_cycle_log(&p, &cycles).unwrap();
        assert!(std::fs::read_to_string(&p).unwrap().starts_with("closed_at_s,range_Nm,mean_Nm,weight\n"));
        assert_eq!(read_cycle_log(&p).unwrap(), cycles);
    }

    #[test]
    fn damage_trace_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("damage.csv");
        write_damage_trace(&p, &[(0.0, 0.0, f64::INFINITY), (1.0, 1e-3, 600.0)]).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("time_s,D_k,L_e\n"));
        assert!(text.contains("inf"));
    }
}
