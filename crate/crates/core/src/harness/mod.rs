//! Experiment orchestration: scenarios, the SVR training pipeline, the
//! three-scheme benchmark and report artifacts.

pub mod bench;
pub mod config;
pub mod pipeline;
pub mod report;
pub mod sim;

pub use config::{Calibration, ExperimentConfig};
pub use sim::{run_scenario, ControlDesign, ScenarioInputs, SimulationTrace};
pub use bench::{compare, run_benchmark, BenchmarkResult, Comparison, MetricsRow};
pub use pipeline::{train_pipeline, PipelineReport, ProfileSpec};
pub use report::write_benchmark_artifacts;
