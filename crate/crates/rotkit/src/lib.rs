//! Exact computation of rotation sets, rotation numbers and sets of periods
//! (mod 1) for continuous degree-one maps on lifted graph spaces.
//!
//! A *lifted space* consists of a distinguished copy of the real line (the
//! *spine*, the unwinding of a loop of length 1), together with finitely many
//! off-spine components per period, each attached to the spine at a single
//! point. The library represents a fundamental domain of such a space
//! ([`lifted_graph::LiftedGraph`]), affine Markov degree-one liftings on it
//! ([`markov_map::MarkovMap`]), and provides:
//!
//! * the labeled transition graph of a Markov map with exact rotation
//!   intervals via cycle means and loop enumeration ([`markov_graph`]),
//! * exact piecewise-linear circle liftings, monotone envelopes, combedness
//!   tests and rotation numbers ([`circle_lift`]),
//! * positive-covering machinery and the arithmetic of period sets
//!   ([`covering_arith`]),
//! * exact orbit computation and rotation-number estimation
//!   ([`orbit_engine`]),
//! * a JSON model format and machine-readable reports ([`model`], [`report`]).
//!
//! All core arithmetic uses arbitrary-precision rationals; there is no
//! floating point anywhere in the certification paths.

pub mod circle_lift;
pub mod covering_arith;
pub mod lifted_graph;
pub mod markov_graph;
pub mod markov_map;
pub mod model;
pub mod orbit_engine;
pub mod report;

pub(crate) mod par;
pub(crate) mod rational;

pub use rational::{parse_rational, rat, rational_to_string, Rational};
