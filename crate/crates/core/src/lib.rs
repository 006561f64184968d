//! Adaptive receding-horizon synthesis of optimal plans (ARES).
//!
//! The crate is organised bottom-up:
//!
//! * [`mdp`] - the deterministic MDP contract, rollouts and plan backtracking,
//!   plus a one-dimensional integrator used as a brute-force oracle problem.
//! * [`flock`] - the bird-flock V-formation MDP: dynamics, clear-view,
//!   velocity-matching and upwash metrics, and the sum-of-squares fitness.
//! * [`pso`] - particle swarm optimisation with random neighbourhoods.
//! * [`engine`] - the ARES loop: levels, dynamic thresholds, clones,
//!   per-clone PSO and rank-based resampling.
//! * [`eval`] - Monte-Carlo success-rate evaluation with additive
//!   (ε, δ) sample sizing.
//!
//! Data-parallel loops (clones within a level, experiments within a batch)
//! go through [`par`], which uses rayon when the `parallel` feature is on and
//! plain iterators otherwise. Results never depend on which is used.

pub mod engine;
pub mod error;
pub mod eval;
pub mod flock;
pub mod io;
pub mod mdp;
pub mod par;
pub mod pso;
pub mod render;
pub mod rng;

pub use error::{Error, Result};
