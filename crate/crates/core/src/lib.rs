//! Differentially private selection when candidates have heterogeneous
//! sensitivities.
//!
//! The crate provides the selection mechanisms (report noisy max variants,
//! k-ary randomized response, random stopping, GEM, mGEM and the combined
//! correlation-dispatching GEM), the synthetic scenarios used to compare
//! them, closed-form and Monte Carlo analysis tools, a two-armed bandit
//! simulation with private action selection, and an experiment harness.
//!
//! ```
//! use dpselect::{make_problem, MechanismKind, MechanismSpec, RngStream};
//!
//! let problem = make_problem(vec![0.0, 1.0, 0.5], vec![1.0, 0.2, 0.4]).unwrap();
//! let mechanism = MechanismSpec::new(MechanismKind::Gem, 1.0).build().unwrap();
//! let mut rng = RngStream::new(42, 0);
//! let outcome = mechanism.select(&problem, &mut rng).unwrap();
//! assert!(outcome.chosen_index < 3);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bandit;
pub mod error;
pub mod harness;
pub mod heuristics;
pub mod mechanisms;
pub mod noise;
pub mod problem;
pub mod rng;
pub mod scenarios;
pub mod stats;

pub use error::{Error, Result};
pub use mechanisms::{Mechanism, MechanismKind, MechanismSpec};
pub use problem::{make_problem, random_select, Branch, PrivacyBudget, SelectionOutcome, SelectionProblem};
pub use rng::RngStream;
