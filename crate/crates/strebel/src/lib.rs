//! Trajectory structure and conformal fingerprints of the quadratic
//! differential -(Σ α_i/(z-a_i))² dz².
//!
//! The differential is determined by finitely many double poles `a_i` with
//! real weights `α_i` (positive total weight). Its closed trajectories are
//! the level curves |Π (z-a_i)^{α_i}| = λ; each level set splits into
//! finitely many closed components, and every component lives either in a
//! circle domain (around one pole, or around ∞) or in a ring domain.
//!
//! The crate computes, end to end:
//!
//! * the critical structure: numerator polynomial, its zeros, the potential
//!   values there, and the critical-graph connectivity test ([`qd`]);
//! * traced level curves, component census per level, domain classification,
//!   the critical graph, and an independent marching-squares contour oracle
//!   ([`tracer`], [`contour`]);
//! * numerical Riemann maps of both sides of a component via a
//!   Szegő-kernel boundary integral, with Cauchy-integral evaluation and
//!   pole preimages, plus closed-form maps (f/λ)^{1/α} for circle domains
//!   ([`confmap`]);
//! * conformal fingerprints k = φ₊⁻¹∘φ₋, their closed-form Blaschke-product
//!   expressions for circle-domain components and the functional-equation
//!   residual for ring-domain components ([`fingerprint`]);
//! * a deterministic JSON/CSV/SVG front end ([`cli`]).
//!
//! See the crate examples for one runnable program per capability.

pub mod cli;
pub mod config;
pub mod confmap;
pub mod contour;
pub mod error;
pub mod fingerprint;
pub mod fourier;
pub mod qd;
pub mod report;
pub mod roots;
pub mod svg;
pub mod tracer;

pub use error::{Error, Result};
pub use qd::{CriticalSet, QuadDifferential};
