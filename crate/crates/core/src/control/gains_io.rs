//! Gain-set files: CSV blocks, each introduced by a one-line header
//! (`K_a`, `K_i`, `L`, `meta`). Values are written at 17 significant
//! digits so a round trip is exact.

use std::path::Path;

use nalgebra::DMatrix;

use crate::control::synth::GainSet;
use crate::error::{Error, Result};
use crate::io::{fmt_exact, read_text, write_text};

fn push_row(out: &mut String, vals: impl IntoIterator<Item = f64>) {
    let row: Vec<String> = vals.into_iter().map(fmt_exact).collect();
    out.push_str(&row.join(","));
    out.push('\n');
}

pub fn gains_to_string(g: &GainSet) -> String {
    let mut s = String::from("K_a\n");
    push_row(&mut s, g.k_a.iter().copied());
    s.push_str("K_i\n");
    push_row(&mut s, [g.k_i]);
    s.push_str("L\n");
    for r in 0..g.l.nrows() {
        push_row(&mut s, g.l.row(r).iter().copied());
    }
    s.push_str("meta\naggressiveness_index,op_wind\n");
    s.push_str(&format!("{},{}\n", g.aggressiveness_index, fmt_exact(g.op_wind)));
    s
}

pub fn gains_from_str(source: &str, text: &str) -> Result<GainSet> {
    let mut blocks: Vec<(String, Vec<String>)> = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        if matches!(line, "K_a" | "K_i" | "L" | "meta") {
            blocks.push((line.to_string(), Vec::new()));
        } else if let Some(last) = blocks.last_mut() {
            last.1.push(line.to_string());
        } else {
            return Err(Error::parse(source, format!("data before first block header: `{line}`")));
        }
    }
    let block = |name: &str| -> Result<&Vec<String>> {
        blocks
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, rows)| rows)
            .ok_or_else(|| Error::parse(source, format!("missing block `{name}`")))
    };
    let nums = |row: &str| -> Result<Vec<f64>> {
        row.split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::parse(source, format!("`{t}`: {e}")))
            })
            .collect()
    };

    let ka_rows = block("K_a")?;
    if ka_rows.len() != 1 {
        return Err(Error::parse(source, "K_a must be a single row"));
    }
    let ka = nums(&ka_rows[0])?;
    let na = ka.len();
    let ki = block("K_i")?
        .first()
        .ok_or_else(|| Error::parse(source, "empty K_i block"))
        .and_then(|r| nums(r))?;
    if ki.len() != 1 {
        return Err(Error::parse(source, "K_i must be a scalar"));
    }
    let l_rows = block("L")?
        .iter()
        .map(|r| nums(r))
        .collect::<Result<Vec<_>>>()?;
    if l_rows.len() != na || l_rows.iter().any(|r| r.len() != 2) {
        return Err(Error::parse(source, format!("L must be {na}×2")));
    }
    let meta = block("meta")?;
    let values = meta
        .get(1)
        .ok_or_else(|| Error::parse(source, "meta block needs a header and a value row"))?;
    let (idx, wind) = values
        .split_once(',')
        .ok_or_else(|| Error::parse(source, "meta row needs two fields"))?;
    let aggressiveness_index = idx
        .trim()
        .parse::<usize>()
        .map_err(|e| Error::parse(source, format!("aggressiveness_index: {e}")))?;
    let op_wind = wind
        .trim()
        .parse::<f64>()
        .map_err(|e| Error::parse(source, format!("op_wind: {e}")))?;

    Ok(GainSet {
        k_a: DMatrix::from_row_slice(1, na, &ka),
        k_i: ki[0],
        l: DMatrix::from_fn(na, 2, |i, j| l_rows[i][j]),
        c_i: [1.0, 0.0],
        aggressiveness_index,
        op_wind,
    })
}

pub fn write_gains(path: &Path, g: &GainSet) -> Result<()> {
    write_text(path, &gains_to_string(g))
}

pub fn read_gains(path: &Path) -> Result<GainSet> {
    gains_from_str(&path.display().to_string(), &read_text(path)?)
}

/// Write a ladder as `gains_<index>.csv` files in `dir`.
pub fn write_ladder(dir: &Path, ladder: &[GainSet]) -> Result<Vec<std::path::PathBuf>> {
    ladder
        .iter()
        .map(|g| {
            let p = dir.join(format!("gains_{}.csv", g.aggressiveness_index));
            write_gains(&p, g).map(|_| p)
        })
        .collect()
}
