use nalgebra::DVector;

use crate::control::{
    augment_disturbance, build_ladder, AugmentedModel, ControllerState, DacController, GainSet,
    WeightProfile,
};
use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::lifetime::{select_moment_source, AdaptationRecord, LifetimeConfig, PrognosisState, Scheme};
use crate::load_predict::{FeatureVector, SvrModel};
use crate::model::{linearize, Plant, TurbineParams, WindProfile};
use crate::rainflow::{Cycle, RainflowState, SnCurve};

/// Linear design and the certified gain ladder.
#[derive(Debug, Clone)]
pub struct ControlDesign {
    pub aug: AugmentedModel,
    pub ladder: Vec<GainSet>,
    pub controllers: Vec<DacController>,
}

impl ControlDesign {
    pub fn synthesize(cfg: &ExperimentConfig) -> Result<Self> {
        let model = linearize(&cfg.params, cfg.design_wind)?;
        let aug = augment_disturbance(&model, 1.0, 0.0)?;
        let ladder = if cfg.tower_scales == crate::control::LADDER_TOWER_SCALES {
            build_ladder(&aug, &cfg.weights, &cfg.observer)?
        } else {
            cfg.tower_scales
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let w: WeightProfile = cfg.weights.scale_tower(*s);
                    crate::control::synthesize_gains(&aug, &w, &cfg.observer, i)
                })
                .collect::<Result<Vec<_>>>()?
        };
        Self::from_ladder(aug, ladder, &cfg.params)
    }

    pub fn from_ladder(aug: AugmentedModel, ladder: Vec<GainSet>, params: &TurbineParams) -> Result<Self> {
        let controllers = ladder
            .iter()
            .map(|g| DacController::new(aug.clone(), g.clone(), params.pitch_range))
            .collect::<Result<Vec<_>>>()?;
        Ok(ControlDesign {
            aug,
            ladder,
            controllers,
        })
    }
}

/// Per-step signals of one closed-loop run. Vectors share the plant step
/// index; `adaptation` and the damage series are at the prognosis rate.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimulationTrace {
    pub scheme: Option<Scheme>,
    pub wind_mean: f64,
    pub dt: f64,
    pub sample_every: usize,
    pub time: Vec<f64>,
    pub wind: Vec<f64>,
    /// rad/s
    pub generator_speed: Vec<f64>,
    /// W
    pub generator_power: Vec<f64>,
    /// W
    pub rotor_power: Vec<f64>,
    /// rad
    pub pitch: Vec<f64>,
    /// rad/s
    pub pitch_rate: Vec<f64>,
    /// rad
    pub pitch_command: Vec<f64>,
    /// m
    pub tower_disp: Vec<f64>,
    /// m/s²
    pub tower_accel: Vec<f64>,
    /// N·m
    pub tower_moment: Vec<f64>,
    pub disturbance_estimate: Vec<f64>,
    /// Prognosis-rate records (online damage of the moment source).
    pub adaptation: Vec<AdaptationRecord>,
    /// Prognosis-rate predicted moment (NaN when no model).
    pub predicted_moment: Vec<f64>,
    /// Prognosis-rate damage of the true moment, closed cycles only.
    pub audit_damage: Vec<f64>,
    /// Cycles of the true moment including the end-of-run residue.
    pub audit_cycles: Vec<Cycle>,
    /// Closed-cycle damage of the true moment at the end.
    pub audit_closed_damage: f64,
    /// Damage of the true moment including residue half cycles.
    pub audit_total_damage: f64,
    /// Online damage of the moment source at the end.
    pub online_damage: f64,
}

impl SimulationTrace {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn prognosis_times(&self) -> Vec<f64> {
        self.adaptation.iter().map(|r| r.time).collect()
    }
}

/// Everything a run needs besides the config.
pub struct ScenarioInputs<'a> {
    pub design: &'a ControlDesign,
    pub wind: &'a WindProfile,
    pub sn: SnCurve,
    pub svr: Option<&'a SvrModel>,
    /// `false` pins the balanced gains regardless of scheme.
    pub adaptation: bool,
}

/// Observer and integrator state that reproduces the trim at `wind` with
/// the balanced gains, so runs start without a transient.
fn initial_controller_state(design: &ControlDesign, gains: &GainSet, plant_trim: &[f64], wind: f64) -> ControllerState {
    let aug = &design.aug;
    let n = aug.plant.order();
    let op = aug.plant.trim.to_vector();
    let mut x = DVector::zeros(n + 1);
    for i in 0..n {
        x[i] = plant_trim[i] - op[i];
    }
    x[n] = wind - aug.plant.op_wind;
    // u = −K_a x̂ − K_i x_i must equal the trim pitch offset
    let u_needed = plant_trim[3] - aug.plant.op_pitch;
    let kx = (&gains.k_a * &x)[(0, 0)];
    let x_i = if gains.k_i != 0.0 { -(u_needed + kx) / gains.k_i } else { 0.0 };
    ControllerState { x_hat_a: x, x_i }
}

/// Closed loop: wind → plant → measurements → controller → pitch, with a
/// prognosis tick every `sample_every` steps.
pub fn run_scenario(cfg: &ExperimentConfig, scheme: Scheme, inputs: &ScenarioInputs) -> Result<SimulationTrace> {
    cfg.validate()?;
    if scheme == Scheme::Life2 && inputs.svr.is_none() {
        return Err(Error::Config(vec!["Life2 needs a trained SVR model (svr.model)".into()]));
    }
    let wind = inputs.wind;
    if (wind.dt - cfg.dt).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!(
            "wind profile dt {} differs from simulation dt {}",
            wind.dt, cfg.dt
        )));
    }
    let steps = cfg.steps().min(wind.len());
    let life = LifetimeConfig {
        mode: scheme,
        ..cfg.lifetime()
    };
    let plant = Plant::new(cfg.params.clone());
    let rated_speed = cfg.params.rated_generator_speed();
    let mut state = plant.trim(wind.mean)?;
    let design = inputs.design;
    let balanced = life.balanced_index;
    let mut cs = initial_controller_state(design, &design.ladder[balanced], &state.to_vector(), wind.mean);

    let mut ps = PrognosisState::new(&life, cfg.gate_fraction)?;
    ps.adaptation_enabled = inputs.adaptation && scheme != Scheme::Baseline;
    let mut audit = RainflowState::new(cfg.gate_fraction)?;
    let sn = inputs.sn;

    let mut tr = SimulationTrace {
        scheme: Some(scheme),
        wind_mean: wind.mean,
        dt: cfg.dt,
        sample_every: cfg.sample_every,
        ..Default::default()
    };
    let mut active = balanced;
    for k in 0..steps {
        let t = k as f64 * cfg.dt;
        let v = wind.samples[k];
        let out = plant.outputs(&state, v);
        if k % cfg.sample_every == 0 {
            let features = FeatureVector {
                wind: v,
                tower_fa_disp: state.tower_fa_displacement,
                rotor_power: out.rotor_power,
                tower_fa_accel: out.tower_accel,
            };
            let predicted = match inputs.svr {
                Some(m) => m.predict(&features)?,
                None => f64::NAN,
            };
            let source = select_moment_source(scheme, predicted, out.tower_fa_moment);
            let rec = ps.tick(&life, source, t, &sn)?;
            active = rec.active_gain_index;
            audit.push_sample(out.tower_fa_moment, t, &sn)?;
            tr.adaptation.push(rec);
            tr.predicted_moment.push(predicted);
            tr.audit_damage.push(audit.damage_d_k);
        }
        let y = [out.generator_speed - rated_speed, out.tower_accel];
        let (next_cs, cmd) = design.controllers[active].step(&cs, y, cfg.dt).map_err(|e| match e {
            Error::Diverged { detail, .. } => Error::Diverged { time: t, detail },
            other => other,
        })?;
        cs = next_cs;

        tr.time.push(t);
        tr.wind.push(v);
        tr.generator_speed.push(out.generator_speed);
        tr.generator_power.push(out.generator_power);
        tr.rotor_power.push(out.rotor_power);
        tr.pitch.push(state.pitch_angle);
        tr.pitch_rate.push(state.pitch_rate);
        tr.pitch_command.push(cmd);
        tr.tower_disp.push(state.tower_fa_displacement);
        tr.tower_accel.push(out.tower_accel);
        tr.tower_moment.push(out.tower_fa_moment);
        tr.disturbance_estimate.push(cs.disturbance_estimate() + design.aug.plant.op_wind);

        state = plant.step(&state, cmd, v, cfg.dt, t)?.0;
    }
    tr.audit_closed_damage = audit.damage_d_k;
    tr.online_damage = ps.rainflow.damage_d_k;
    audit.finalize(&sn);
    tr.audit_total_damage = audit.damage_d_k;
    tr.audit_cycles = audit.cycles;
    Ok(tr)
}
