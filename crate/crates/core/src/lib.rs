//! Simulation and verification toolkit for fairness-oracle extraction.
//!
//! A *fairness oracle* holds a truth set `T` of classifiers over a finite
//! universe of individuals and answers accept/reject queries on
//! (context, classifier) pairs. A *weak* oracle is only pinned down on two
//! fronts: it must accept everything its strong counterpart accepts, and it
//! must reject classifiers that are far from every member of `T` under a
//! stated distance (Hamming, transportation cost, or the symmetrized
//! transportation cost). Everything in between, the gray zone, is
//! deterministic but otherwise arbitrary.
//!
//! This crate builds such oracles from explicit specifications
//! ([`oracle::OracleSpec`]), runs extraction algorithms against them through a
//! query-only handle ([`oracle::OracleHandle`]), and verifies the recovery
//! guarantees exactly against independent brute-force ground truth at small
//! universe sizes. All cost comparisons are exact: costs are rationals and
//! square-root thresholds are compared through squared integer arithmetic, so
//! floating point never decides a strict-vs-nonstrict boundary.

pub mod classifier;
pub mod cost;
pub mod error;
pub mod extraction;
pub mod gen;
pub mod metric;
pub mod oracle;
pub mod rational;
pub mod report;
pub mod seed;
pub mod verify;

pub use classifier::{Classifier, Quadrants, Universe};
pub use cost::PairCost;
pub use error::{Error, Result};
pub use oracle::{DistanceKind, GrayKind, GrayPolicy, OracleHandle, OracleSpec};
pub use rational::Rat;
