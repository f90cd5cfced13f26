use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use wtlife::control::gains_io::write_ladder;
use wtlife::control::tower_mode_damping;
use wtlife::harness::bench::{calibrate_sn_curves, compare, read_metrics, MetricsRow};
use wtlife::harness::pipeline::{bench_profiles, training_profiles};
use wtlife::harness::report::{report_text, trace_file_name, write_trace};
use wtlife::harness::{
    run_benchmark, run_scenario, train_pipeline, write_benchmark_artifacts, ControlDesign,
    ExperimentConfig, ScenarioInputs,
};
use wtlife::lifetime::Scheme;
use wtlife::load_predict::SvrModel;
use wtlife::{Error, Result};

/// Tower lifetime control experiments on a surrogate 5 MW turbine.
#[derive(Parser, Debug)]
#[command(name = "wtlife", version)]
struct Cli {
    /// key = value config file, or `default`.
    #[arg(long, global = true, default_value = "default")]
    config: PathBuf,
    /// Output directory (overrides `out` in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed (overrides `seed` in the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the training and benchmark wind profiles as CSV.
    GenWind,
    /// Synthesize and certify the gain ladder, one CSV per gain set.
    SynthGains,
    /// Run the SVR training pipeline and write datasets, model and report.
    TrainSvr,
    /// Run one scheme at every benchmark wind and write its traces.
    Simulate {
        #[arg(long, value_enum, default_value_t = SchemeArg::Baseline)]
        scheme: SchemeArg,
    },
    /// Baseline, Life1 and Life2 at every benchmark wind, with metrics,
    /// traces, plots and a report.
    Benchmark,
    /// Rebuild the comparison table from an existing metrics.csv.
    Report,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SchemeArg {
    Baseline,
    Life1,
    Life2,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Baseline => Scheme::Baseline,
            SchemeArg::Life1 => Scheme::Life1,
            SchemeArg::Life2 => Scheme::Life2,
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    if cli.config.as_os_str() != "default" && !cli.config.is_file() {
        return Err(Error::Config(vec![format!(
            "config file {} does not exist",
            cli.config.display()
        )]));
    }
    let mut cfg = ExperimentConfig::load(&cli.config)?;
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

/// The configured model, else `svr.model` in the output directory.
fn find_model(cfg: &ExperimentConfig) -> Option<PathBuf> {
    cfg.svr_model
        .clone()
        .or_else(|| Some(cfg.out.join("svr.model")).filter(|p| p.is_file()))
}

fn gen_wind(cfg: &ExperimentConfig) -> Result<()> {
    ensure_dir(&cfg.out)?;
    for (role, specs) in [("train", training_profiles(cfg)), ("test", bench_profiles(cfg))] {
        for p in specs {
            let path = cfg.out.join(format!("wind_{role}_{}.csv", p.stem()));
            let w = p.generate(cfg)?;
            w.write_csv(&path)?;
            let (mean, std) = w.sample_stats();
            println!(
                "{}  mean {mean:.3} m/s  TI {:.4}  seed {}",
                path.display(),
                std / mean,
                p.seed
            );
        }
    }
    Ok(())
}

fn synth_gains(cfg: &ExperimentConfig) -> Result<()> {
    ensure_dir(&cfg.out)?;
    let design = ControlDesign::synthesize(cfg)?;
    let paths = write_ladder(&cfg.out, &design.ladder)?;
    for (g, p) in design.ladder.iter().zip(paths) {
        println!(
            "{}  tower-mode damping {:.4}  K_i {:.6e}",
            p.display(),
            tower_mode_damping(&design.aug, g),
            g.k_i
        );
    }
    Ok(())
}

fn train_svr(cfg: &ExperimentConfig) -> Result<SvrModel> {
    let design = ControlDesign::synthesize(cfg)?;
    let (model, report) = train_pipeline(cfg, &design, Some(&cfg.out))?;
    println!(
        "best C {} eps {}; test RMSE {:.4e} N·m; test accuracy {:.4}",
        report.best.cost_c, report.best.epsilon, report.test_rmse, report.test_accuracy
    );
    println!("wrote {}", cfg.out.join("svr.model").display());
    Ok(model)
}

fn simulate(cfg: &ExperimentConfig, scheme: Scheme) -> Result<()> {
    let model = match scheme {
        Scheme::Life2 => {
            let path = find_model(cfg).ok_or_else(|| {
                Error::Config(vec![
                    "Life2 needs a trained model: set svr.model or run train-svr first".into(),
                ])
            })?;
            Some(SvrModel::load(&path)?)
        }
        _ => None,
    };
    ensure_dir(&cfg.out)?;
    let design = ControlDesign::synthesize(cfg)?;
    let specs = bench_profiles(cfg);
    let winds = specs.iter().map(|p| p.generate(cfg)).collect::<Result<Vec<_>>>()?;
    let sn = calibrate_sn_curves(cfg, &design, &winds)?;
    for (w, sn) in winds.iter().zip(sn) {
        let inputs = ScenarioInputs {
            design: &design,
            wind: w,
            sn,
            svr: model.as_ref(),
            adaptation: true,
        };
        let tr = run_scenario(cfg, scheme, &inputs)?;
        let path = cfg.out.join(trace_file_name(scheme, w.mean));
        write_trace(&path, &tr)?;
        let m = MetricsRow::from_trace(&tr, cfg)?;
        println!(
            "{}  δ {:.4e} N·m  pitch-rate RMS {:.3} deg/s  D/D_d {:.4}",
            path.display(),
            m.tower_fa_std,
            m.pitch_rate_rms.to_degrees(),
            m.final_damage_ratio
        );
    }
    Ok(())
}

fn benchmark(cfg: &ExperimentConfig) -> Result<()> {
    let model = match find_model(cfg) {
        Some(p) => SvrModel::load(&p)?,
        None => {
            println!("no SVR model found; training one first");
            train_svr(cfg)?
        }
    };
    let design = ControlDesign::synthesize(cfg)?;
    let result = run_benchmark(cfg, &design, &model)?;
    let written = write_benchmark_artifacts(
        &cfg.out,
        &result,
        cfg.params.rated_generator_speed(),
        cfg.life.damage_limit,
    )?;
    print!("{}", report_text(&result)?);
    println!("wrote {} files to {}", written.len(), cfg.out.display());
    Ok(())
}

fn report(cfg: &ExperimentConfig) -> Result<()> {
    let rows = read_metrics(&cfg.out.join("metrics.csv"))?;
    if rows.is_empty() {
        return Err(Error::InvalidInput("metrics.csv has no rows".into()));
    }
    println!("| scheme | δ | pitch-rate RMS | speed RMSE | power RMSE |");
    println!("|---|---|---|---|---|");
    for c in compare(&rows)? {
        let p = c.pct_vs_baseline;
        println!(
            "| {} | {:.4e} ({:+.2}%) | {:.4e} ({:+.2}%) | {:.4e} ({:+.2}%) | {:.4e} ({:+.2}%) |",
            c.scheme,
            c.avg.tower_fa_std,
            p[0],
            c.avg.pitch_rate_rms,
            p[1],
            c.avg.gen_speed_rmse,
            p[2],
            c.avg.gen_power_rmse,
            p[3]
        );
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::GenWind => gen_wind(&cfg),
        Command::SynthGains => synth_gains(&cfg),
        Command::TrainSvr => train_svr(&cfg).map(|_| ()),
        Command::Simulate { scheme } => simulate(&cfg, (*scheme).into()),
        Command::Benchmark => benchmark(&cfg),
        Command::Report => report(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
