//! # chordwalk
//!
//! Generates uniformly distributed random points inside arbitrary convex
//! bodies with two chord-walk Markov chains, computes explicit Doeblin
//! (minorization) convergence bounds for each body, and validates chain
//! output against exact or rejection ground-truth samplers.
//!
//! The two kernels are:
//!
//! * **fixed basis**: the move direction is drawn uniformly from a finite
//!   spanning set `e_1 … e_l`, then the point is resampled uniformly on the
//!   chord through the current point along that direction;
//! * **random direction**: the direction is drawn uniformly on the unit
//!   sphere `S^{d-1}` instead.
//!
//! Both leave the flat (Lebesgue) measure on the body invariant and converge
//! geometrically in total variation; [`bounds`] evaluates the certified rates
//! from the body's inscribed/outscribed radii and accessibility constant.
//!
//! ```
//! use chordwalk::geometry::{make_body, BodyDescriptor};
//! use chordwalk::sampler::{run_chain, Algorithm, ChainConfig};
//!
//! let body = make_body(&"simplex:n=3".parse::<BodyDescriptor>().unwrap()).unwrap();
//! let cfg = ChainConfig::new(Algorithm::RandomDirection, 1000, 7);
//! let points = run_chain(body.as_ref(), &cfg).unwrap();
//! assert_eq!(points.len(), 1000);
//! ```
//!
//! The body catalogue covers Euclidean balls and cubes, probability
//! simplices, stochastic matrices, the Birkhoff polytope of bistochastic
//! matrices, quantum states (density matrices in Bloch coordinates), states
//! with positive partial transpose, and "lifted" bodies that turn uniform
//! sampling under the graph of a quasi-concave density into sampling from
//! that density.

pub mod bounds;
pub mod diagnostics;
pub mod geometry;
pub mod oracle;
pub mod quantum;
pub mod sampler;
