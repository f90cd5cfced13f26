use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use plotters::prelude::*;

use crate::error::{Error, Result};
use crate::harness::bench::{compare, write_metrics, BenchmarkResult};
use crate::harness::sim::SimulationTrace;
use crate::io::{fmt_exact, write_numeric_csv, write_text};
use crate::lifetime::Scheme;

pub const TRACE_HEADER: [&str; 14] = [
    "time_s",
    "wind_mps",
    "gen_speed_radps",
    "gen_power_W",
    "pitch_rad",
    "pitch_rate_radps",
    "tower_disp_m",
    "tower_moment_Nm",
    "predicted_moment_Nm",
    "D_k",
    "D_audit",
    "L_e_s",
    "active_gain_index",
    "switch_flag",
];

pub fn trace_file_name(scheme: Scheme, wind: f64) -> String {
    format!("trace_{}_w{}.csv", scheme.name().to_lowercase(), wind)
}

/// Trace at the prognosis rate (every `sample_every` plant steps).
pub fn write_trace(path: &Path, tr: &SimulationTrace) -> Result<()> {
    let rows = tr.adaptation.iter().enumerate().map(|(j, a)| {
        let k = j * tr.sample_every;
        vec![
            fmt_exact(tr.time[k]),
            fmt_exact(tr.wind[k]),
            fmt_exact(tr.generator_speed[k]),
            fmt_exact(tr.generator_power[k]),
            fmt_exact(tr.pitch[k]),
            fmt_exact(tr.pitch_rate[k]),
            fmt_exact(tr.tower_disp[k]),
            fmt_exact(tr.tower_moment[k]),
            fmt_exact(tr.predicted_moment[j]),
            fmt_exact(a.d_k),
            fmt_exact(tr.audit_damage[j]),
            fmt_exact(a.l_e),
            a.active_gain_index.to_string(),
            u8::from(a.switched).to_string(),
        ]
    });
    write_numeric_csv(path, &TRACE_HEADER, rows)
}

const COLORS: [RGBColor; 3] = [RGBColor(40, 40, 40), RGBColor(200, 60, 30), RGBColor(30, 90, 200)];

fn plot_err<E: std::fmt::Debug>(e: E) -> Error {
    Error::Plot(format!("{e:?}"))
}

/// One panel, one line per scheme.
fn panel<DB: DrawingBackend>(
    area: &DrawingArea<DB, plotters::coord::Shift>,
    title: &str,
    x_desc: &str,
    series: &[(Scheme, Vec<(f64, f64)>)],
) -> Result<()>
where
    DB::ErrorType: 'static,
{
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut t_end: f64 = 0.0;
    for (_, s) in series {
        for &(t, v) in s {
            if v.is_finite() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
            t_end = t_end.max(t);
        }
    }
    if !lo.is_finite() {
        lo = 0.0;
    }
    if !(hi > lo) {
        hi = lo + 1.0;
    }
    let pad = 0.05 * (hi - lo);
    let mut chart = ChartBuilder::on(area)
        .caption(title, ("sans-serif", 16))
        .margin(8)
        .x_label_area_size(30)
        .y_label_area_size(70)
        .build_cartesian_2d(0.0..t_end.max(1e-9), (lo - pad)..(hi + pad))
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc(x_desc)
        .light_line_style(WHITE)
        .draw()
        .map_err(plot_err)?;
    for (i, (scheme, s)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        chart
            .draw_series(LineSeries::new(
                s.iter().copied().filter(|(_, v)| v.is_finite()),
                color.stroke_width(1),
            ))
            .map_err(plot_err)?
            .label(scheme.name())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], color));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)?;
    Ok(())
}

fn sampled(tr: &SimulationTrace, f: impl Fn(usize, usize) -> f64) -> Vec<(f64, f64)> {
    (0..tr.adaptation.len())
        .map(|j| {
            let k = j * tr.sample_every;
            (tr.time[k], f(k, j))
        })
        .collect()
}

/// Load spectrum: cycle ranges in descending order against the cumulative
/// cycle count (half cycles count 0.5).
fn exceedance(tr: &SimulationTrace) -> Vec<(f64, f64)> {
    let mut cycles: Vec<(f64, f64)> = tr.audit_cycles.iter().map(|c| (c.range_s, c.weight)).collect();
    cycles.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut n = 0.0;
    cycles
        .into_iter()
        .map(|(r, w)| {
            n += w;
            (n, r / 1e6)
        })
        .collect()
}

/// Two SVG files for one wind: tower load, damage and load spectrum, and
/// speed, power and pitch-rate regulation.
pub fn write_plots(dir: &Path, wind: f64, traces: &[&SimulationTrace], rated_speed: f64, damage_limit: f64) -> Result<[PathBuf; 2]> {
    let label = |tr: &SimulationTrace| tr.scheme.unwrap_or(Scheme::Baseline);
    let loads = dir.join(format!("plot_loads_w{wind}.svg"));
    {
        let root = SVGBackend::new(&loads, (900, 1000)).into_drawing_area();
        root.fill(&WHITE).map_err(plot_err)?;
        let areas = root.split_evenly((3, 1));
        let moment: Vec<_> = traces
            .iter()
            .map(|t| (label(t), sampled(t, |k, _| t.tower_moment[k] / 1e6)))
            .collect();
        panel(&areas[0], &format!("Tower-base fore-aft moment [MN·m], {wind} m/s"), "time [s]", &moment)?;
        let damage: Vec<_> = traces
            .iter()
            .map(|t| (label(t), sampled(t, |_, j| t.audit_damage[j] / damage_limit)))
            .collect();
        panel(&areas[1], "Accumulated damage D_k / D_d", "time [s]", &damage)?;
        let spectrum: Vec<_> = traces.iter().map(|t| (label(t), exceedance(t))).collect();
        panel(&areas[2], "Load spectrum: cycle range [MN·m]", "cumulative cycles", &spectrum)?;
        root.present().map_err(plot_err)?;
    }
    let reg = dir.join(format!("plot_regulation_w{wind}.svg"));
    {
        let root = SVGBackend::new(&reg, (900, 900)).into_drawing_area();
        root.fill(&WHITE).map_err(plot_err)?;
        let areas = root.split_evenly((3, 1));
        let speed: Vec<_> = traces
            .iter()
            .map(|t| (label(t), sampled(t, |k, _| t.generator_speed[k] - rated_speed)))
            .collect();
        panel(&areas[0], &format!("Generator speed error [rad/s], {wind} m/s"), "time [s]", &speed)?;
        let power: Vec<_> = traces
            .iter()
            .map(|t| (label(t), sampled(t, |k, _| t.generator_power[k] / 1e6)))
            .collect();
        panel(&areas[1], "Generator power [MW]", "time [s]", &power)?;
        let rate: Vec<_> = traces
            .iter()
            .map(|t| (label(t), sampled(t, |k, _| t.pitch_rate[k].to_degrees())))
            .collect();
        panel(&areas[2], "Pitch rate [deg/s]", "time [s]", &rate)?;
        root.present().map_err(plot_err)?;
    }
    Ok([loads, reg])
}

/// Human-readable summary with the per-scheme averages and definitions.
pub fn report_text(result: &BenchmarkResult) -> Result<String> {
    let mut s = String::new();
    let _ = writeln!(s, "# Benchmark report\n");
    let _ = writeln!(
        s,
        "| scheme | wind [m/s] | tower std [kN·m] | pitch-rate RMS [deg/s] | speed RMSE [rpm] | power RMSE [kW] | D(end)/D_d | L_e [s] |"
    );
    let _ = writeln!(s, "|---|---|---|---|---|---|---|---|");
    for r in &result.rows {
        let _ = writeln!(
            s,
            "| {} | {} | {:.1} | {:.3} | {:.3} | {:.2} | {:.4} | {:.1} |",
            r.scheme,
            r.wind_mean,
            r.tower_fa_std / 1e3,
            r.pitch_rate_rms.to_degrees(),
            r.gen_speed_rmse * 60.0 / std::f64::consts::TAU,
            r.gen_power_rmse / 1e3,
            r.final_damage_ratio,
            r.l_e_end
        );
    }
    let _ = writeln!(s, "\n## Averages over winds (plain mean) and change against Baseline\n");
    let _ = writeln!(s, "| scheme | tower std | pitch-rate RMS | speed RMSE | power RMSE |");
    let _ = writeln!(s, "|---|---|---|---|---|");
    for c in compare(&result.rows)? {
        let p = c.pct_vs_baseline;
        let _ = writeln!(
            s,
            "| {} | {:.1} kN·m ({:+.2}%) | {:.3} deg/s ({:+.2}%) | {:.3} rpm ({:+.2}%) | {:.2} kW ({:+.2}%) |",
            c.scheme,
            c.avg.tower_fa_std / 1e3,
            p[0],
            c.avg.pitch_rate_rms.to_degrees(),
            p[1],
            c.avg.gen_speed_rmse * 60.0 / std::f64::consts::TAU,
            p[2],
            c.avg.gen_power_rmse / 1e3,
            p[3]
        );
    }
    let _ = writeln!(s, "\n## S-N constants\n");
    for (p, sn) in result.profiles.iter().zip(&result.sn_curves) {
        let _ = writeln!(s, "- {} m/s (seed {}): m = {}, K = {:.6e}", p.mean, p.seed, sn.exponent_m, sn.constant_k);
    }
    let _ = writeln!(s, "\n## Definitions\n");
    let _ = writeln!(s, "- tower std: standard deviation of the tower-base fore-aft moment over the run.");
    let _ = writeln!(s, "- speed and power RMSE are taken against rated generator speed and rated power.");
    let _ = writeln!(s, "- D(end)/D_d uses closed rainflow cycles of the true moment, counted at the prognosis rate.");
    let _ = writeln!(s, "- L_e = T_k · D_d / D_k at the end of the run.");
    let _ = writeln!(s, "- `metrics.csv` holds the same numbers in SI units at full precision.");
    Ok(s)
}

/// Write `metrics.csv`, `report.md`, one trace CSV per run and two plots per
/// wind. Returns every path written.
pub fn write_benchmark_artifacts(dir: &Path, result: &BenchmarkResult, rated_speed: f64, damage_limit: f64) -> Result<Vec<PathBuf>> {
    if result.rows.is_empty() || result.traces.is_empty() {
        return Err(Error::InvalidInput("nothing to report: no benchmark rows".into()));
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let metrics = dir.join("metrics.csv");
    write_metrics(&metrics, &result.rows)?;
    written.push(metrics);
    for tr in &result.traces {
        let scheme = tr.scheme.unwrap_or(Scheme::Baseline);
        let p = dir.join(trace_file_name(scheme, tr.wind_mean));
        write_trace(&p, tr)?;
        written.push(p);
    }
    for p in &result.profiles {
        let group: Vec<&SimulationTrace> = result
            .traces
            .iter()
            .filter(|t| t.wind_mean == p.mean)
            .collect();
        written.extend(write_plots(dir, p.mean, &group, rated_speed, damage_limit)?);
    }
    let report = dir.join("report.md");
    write_text(&report, &report_text(result)?)?;
    written.push(report);
    Ok(written)
}
