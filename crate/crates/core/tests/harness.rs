use std::path::Path;

use wtlife::harness::bench::{calibrate_sn_curves, read_metrics};
use wtlife::harness::pipeline::{bench_profiles, collect_dataset};
use wtlife::harness::{
    run_benchmark, run_scenario, train_pipeline, write_benchmark_artifacts, ControlDesign,
    ExperimentConfig, ScenarioInputs, SimulationTrace,
};
use wtlife::lifetime::Scheme;
use wtlife::load_predict::{train_svr, Hyper, SvrModel};
use wtlife::model::{gen_wind_profile, WindProfile};
use wtlife::rainflow::{count_series, SnCurve};
use wtlife::Error;

fn short_cfg(duration: f64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.duration = duration;
    cfg.life.desired_lifetime = duration;
    cfg
}

fn run(cfg: &ExperimentConfig, design: &ControlDesign, scheme: Scheme, wind: &WindProfile, sn: SnCurve, svr: Option<&SvrModel>, adaptation: bool) -> SimulationTrace {
    let inputs = ScenarioInputs {
        design,
        wind,
        sn,
        svr,
        adaptation,
    };
    run_scenario(cfg, scheme, &inputs).unwrap()
}

#[test]
fn baseline_settles_at_constant_wind() {
    let cfg = short_cfg(60.0);
    let design = ControlDesign::synthesize(&cfg).unwrap();
    let wind = WindProfile::constant(18.0, cfg.duration, cfg.dt);
    let sn = SnCurve::new(4.0, 1.0).unwrap();
    let tr = run(&cfg, &design, Scheme::Baseline, &wind, sn, None, true);
    let rated = cfg.params.rated_generator_speed();
    let tail = tr.len() - (10.0 / cfg.dt) as usize;
    let worst = tr.generator_speed[tail..]
        .iter()
        .map(|w| (w - rated).abs())
        .fold(0.0f64, f64::max);
    assert!(worst < 1e-3 * rated, "speed error {worst} rad/s");
    let spread = tr.pitch[tail..]
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(*p), hi.max(*p)));
    assert!(spread.1 - spread.0 < 1e-4, "pitch still moving: {spread:?}");
}

#[test]
fn zero_duration_is_a_validation_error() {
    let cfg = short_cfg(0.0);
    let err = cfg.validate().unwrap_err();
    assert!(err.is_validation());
    let ok = short_cfg(10.0);
    let design = ControlDesign::synthesize(&ok).unwrap();
    let wind = WindProfile::constant(18.0, 10.0, ok.dt);
    let inputs = ScenarioInputs {
        design: &design,
        wind: &wind,
        sn: SnCurve::new(4.0, 1.0).unwrap(),
        svr: None,
        adaptation: true,
    };
    assert!(run_scenario(&cfg, Scheme::Baseline, &inputs).unwrap_err().is_validation());
}

#[test]
fn life2_without_model_is_rejected_before_running() {
    let cfg = short_cfg(10.0);
    let design = ControlDesign::synthesize(&cfg).unwrap();
    let wind = WindProfile::constant(18.0, 10.0, cfg.dt);
    let inputs = ScenarioInputs {
        design: &design,
        wind: &wind,
        sn: SnCurve::new(4.0, 1.0).unwrap(),
        svr: None,
        adaptation: true,
    };
    let err = run_scenario(&cfg, Scheme::Life2, &inputs).unwrap_err();
    assert!(matches!(err, Error::Config(_)), "{err}");
}

#[test]
fn adaptation_off_reproduces_baseline_bits() {
    let cfg = short_cfg(120.0);
    let design = ControlDesign::synthesize(&cfg).unwrap();
    let wind = gen_wind_profile(17.0, 0.1, cfg.duration, cfg.dt, 41).unwrap();
    let sn = SnCurve::new(4.0, 1e20).unwrap();
    let b = run(&cfg, &design, Scheme::Baseline, &wind, sn, None, true);
    let l = run(&cfg, &design, Scheme::Life1, &wind, sn, None, false);
    assert_eq!(b.pitch_command, l.pitch_command);
    assert_eq!(b.generator_speed, l.generator_speed);
    assert!(l.adaptation.iter().all(|a| a.active_gain_index == 1 && !a.switched));
}

#[test]
fn switching_respects_dwell_and_ladder() {
    let cfg = short_cfg(300.0);
    let design = ControlDesign::synthesize(&cfg).unwrap();
    let wind = gen_wind_profile(19.0, 0.1, cfg.duration, cfg.dt, 7).unwrap();
    // strong enough that the run starts well outside the band
    let sn = SnCurve::new(4.0, 1e26).unwrap();
    let tr = run(&cfg, &design, Scheme::Life1, &wind, sn, None, true);
    let switches: Vec<f64> = tr.adaptation.iter().filter(|a| a.switched).map(|a| a.time).collect();
    assert!(!switches.is_empty());
    for w in switches.windows(2) {
        assert!(w[1] - w[0] >= cfg.life.dwell_min - 1e-9, "{w:?}");
    }
    let mut prev = cfg.lifetime().balanced_index;
    for a in &tr.adaptation {
        assert!(a.active_gain_index < design.ladder.len());
        assert!(a.active_gain_index.abs_diff(prev) <= 1);
        assert_eq!(a.switched, a.active_gain_index != prev);
        prev = a.active_gain_index;
    }
}

#[test]
fn switches_only_outside_band() {
    let cfg = short_cfg(300.0);
    let design = ControlDesign::synthesize(&cfg).unwrap();
    let wind = gen_wind_profile(17.0, 0.1, cfg.duration, cfg.dt, 3).unwrap();
    let unit = run(&cfg, &design, Scheme::Baseline, &wind, SnCurve::new(4.0, 1.0).unwrap(), None, true);
    let sn = SnCurve::new(4.0, unit.audit_closed_damage / cfg.life.damage_limit).unwrap();
    let tr = run(&cfg, &design, Scheme::Life1, &wind, sn, None, true);
    let l_d = cfg.life.desired_lifetime;
    let h = cfg.life.band_fraction;
    let mut prev = cfg.lifetime().balanced_index;
    let mut held_inside = 0;
    for a in &tr.adaptation {
        let inside = a.l_e >= l_d * (1.0 - h) && a.l_e <= l_d * (1.0 + h);
        if inside {
            assert!(!a.switched, "switched at {} with L_e inside the band", a.time);
            held_inside += 1;
        }
        if a.switched {
            if a.l_e < l_d * (1.0 - h) {
                assert_eq!(a.active_gain_index, prev + 1);
            } else {
                assert_eq!(a.active_gain_index + 1, prev);
            }
        }
        prev = a.active_gain_index;
    }
    assert!(held_inside > 0);
}

#[test]
fn damage_audit_matches_online_count() {
    let cfg = short_cfg(200.0);
    let design = ControlDesign::synthesize(&cfg).unwrap();
    let wind = gen_wind_profile(19.0, 0.1, cfg.duration, cfg.dt, 12).unwrap();
    let sn = SnCurve::new(4.0, 1e25).unwrap();
    let tr = run(&cfg, &design, Scheme::Life1, &wind, sn, None, true);
    let sampled: Vec<f64> = tr.tower_moment.iter().step_by(cfg.sample_every).copied().collect();
    let recount = count_series(&sampled, cfg.dt * cfg.sample_every as f64, cfg.gate_fraction, &sn).unwrap();
    let residue = recount.damage_d_k - tr.audit_closed_damage;
    assert!(residue >= 0.0);
    assert!((recount.damage_d_k - tr.online_damage).abs() <= residue * (1.0 + 1e-9) + 1e-15);
    assert_eq!(tr.online_damage, tr.audit_closed_damage);
    assert!((recount.damage_d_k - tr.audit_total_damage).abs() <= 1e-12 * recount.damage_d_k);
}

#[test]
fn life2_with_own_wind_model_tracks_life1() {
    let cfg = ExperimentConfig::default();
    let design = ControlDesign::synthesize(&cfg).unwrap();
    let spec = bench_profiles(&cfg)[1];
    let data = collect_dataset(&cfg, &design, &spec).unwrap();
    let (model, _) = train_svr(&data, Hyper { cost_c: 1.0, epsilon: 0.001 }, 3).unwrap();
    let wind = spec.generate(&cfg).unwrap();
    let sn = calibrate_sn_curves(&cfg, &design, std::slice::from_ref(&wind)).unwrap()[0];
    let l1 = run(&cfg, &design, Scheme::Life1, &wind, sn, None, true);
    let l2 = run(&cfg, &design, Scheme::Life2, &wind, sn, Some(&model), true);
    let mut worst: f64 = 0.0;
    for (a, b) in l1.adaptation.iter().zip(&l2.adaptation) {
        if a.time >= 60.0 && a.d_k > 0.0 {
            worst = worst.max((b.d_k - a.d_k).abs() / a.d_k);
        }
    }
    assert!(worst <= 0.05, "worst pointwise D_k gap {:.2}%", worst * 100.0);
}

fn small_model(cfg: &ExperimentConfig, design: &ControlDesign) -> SvrModel {
    let data = collect_dataset(cfg, design, &bench_profiles(cfg)[0]).unwrap();
    train_svr(&data, Hyper { cost_c: 1.0, epsilon: 0.01 }, 1).unwrap().0
}

#[test]
fn benchmark_artifacts_contract() {
    let cfg = short_cfg(60.0);
    let design = ControlDesign::synthesize(&cfg).unwrap();
    let model = small_model(&cfg, &design);
    let result = run_benchmark(&cfg, &design, &model).unwrap();
    assert_eq!(result.rows.len(), 9);
    let dir = tempfile::tempdir().unwrap();
    let written = write_benchmark_artifacts(dir.path(), &result, cfg.params.rated_generator_speed(), cfg.life.damage_limit).unwrap();
    let count = |prefix: &str, ext: &str| {
        written
            .iter()
            .filter(|p| {
                let name = p.file_name().unwrap().to_string_lossy();
                name.starts_with(prefix) && name.ends_with(ext)
            })
            .count()
    };
    assert_eq!(count("metrics", ".csv"), 1);
    assert_eq!(count("trace_", ".csv"), 9);
    assert_eq!(count("plot_", ".svg"), 6);
    assert!(written.iter().all(|p| p.is_file()));

    let back = read_metrics(&dir.path().join("metrics.csv")).unwrap();
    assert_eq!(back, result.rows);
    for r in &back {
        assert!(r.tower_fa_std >= 0.0 && r.pitch_rate_rms >= 0.0 && r.gen_speed_rmse >= 0.0 && r.gen_power_rmse >= 0.0);
        assert!(r.final_damage_ratio.is_finite() && r.final_damage_ratio >= 0.0);
        assert!(r.pitch_rate_rms < 8f64.to_radians());
    }

    let mut empty = result.clone();
    empty.rows.clear();
    assert!(write_benchmark_artifacts(dir.path(), &empty, 1.0, 1.0).is_err());
}

#[test]
fn unwritable_output_is_reported() {
    let cfg = short_cfg(20.0);
    let design = ControlDesign::synthesize(&cfg).unwrap();
    let model = small_model(&cfg, &design);
    let result = run_benchmark(&cfg, &design, &model).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let err = write_benchmark_artifacts(&blocker.join("out"), &result, 1.0, 1.0).unwrap_err();
    assert!(!err.is_validation(), "{err}");
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap()
}

#[test]
fn pipeline_is_deterministic_and_complete() {
    let cfg = short_cfg(60.0);
    let design = ControlDesign::synthesize(&cfg).unwrap();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (ma, ra) = train_pipeline(&cfg, &design, Some(a.path())).unwrap();
    let (mb, rb) = train_pipeline(&cfg, &design, Some(b.path())).unwrap();
    assert_eq!(ma, mb);
    assert_eq!(ra, rb);
    assert_eq!(read(a.path(), "svr_report.txt"), read(b.path(), "svr_report.txt"));
    assert_eq!(read(a.path(), "svr.model"), read(b.path(), "svr.model"));
    let datasets = std::fs::read_dir(a.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with("dataset_"))
        .count();
    assert_eq!(datasets, 9);
    assert_eq!(SvrModel::load(&a.path().join("svr.model")).unwrap(), ma);
}
