//! Tower fatigue lifetime control for a pitch-regulated wind turbine.
//!
//! - [`model`]: reduced-order 5 MW turbine, wind profiles, linearization.
//! - [`control`]: disturbance-accommodating controller and the gain ladder.
//! - [`rainflow`]: streaming rainflow counting, Miner damage, lifetime estimate.
//! - [`load_predict`]: linear SVR predictor for the tower-base moment.
//! - [`lifetime`]: band and dwell switching along the ladder.
//! - [`harness`]: config, closed-loop runs, training pipeline, benchmark, reports.
//!
//! The guide in `book/` walks through each of these with runnable examples.

pub mod control;
pub mod error;
pub mod harness;
pub mod io;
pub mod lifetime;
pub mod linalg;
pub mod load_predict;
pub mod model;
pub mod rainflow;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    mod overview {}
    #[doc = include_str!("../../../book/src/plant.md")]
    mod plant {}
    #[doc = include_str!("../../../book/src/control.md")]
    mod control {}
    #[doc = include_str!("../../../book/src/rainflow.md")]
    mod rainflow {}
    #[doc = include_str!("../../../book/src/load_prediction.md")]
    mod load_prediction {}
    #[doc = include_str!("../../../book/src/lifetime.md")]
    mod lifetime {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
