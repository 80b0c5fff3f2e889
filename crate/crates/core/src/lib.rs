//! Whitney decompositions of Hölder graph domains, a cut-cell Poisson solver
//! and the measurement machinery for boundary `W^{2,p}` estimates.
//!
//! The crate is organized around four layers:
//!
//! - [`geometry`]: graph domains `Ω₁ = {xⁿ > φ(x′)} ∩ B₁` given by sampled
//!   boundary functions, with exact membership, distance and collar queries
//!   against the piecewise-linear interpolant.
//! - [`whitney`]: dyadic Whitney decompositions, 6/5-dilations in exact
//!   rational arithmetic, the diameter families `F^s` and the distance-band
//!   families `F^{s,j}`, plus checkers for their combinatorial properties.
//! - [`fdsolver`]: a Shortley–Weller finite-difference Laplacian on cut
//!   cells (2-D), an iterative sparse solver and second-difference Hessians.
//! - [`analysis`]: discrete `L^p`/`W^{2,p}` norms, estimate-constant
//!   measurement, Green's-kernel quadrature, pointwise boundary `C^{1,α}`
//!   fits, per-cube Hessian scaling and the `v + w` splitting arithmetic.
//!
//! Geometric primitives are generic over the scalar type so the same box
//! predicates run in floating point for measurement and in exact rational
//! arithmetic where a containment or overlap decision must be float-free.
//! Concrete aliases are exported below.

pub mod analysis;
pub mod exact;
pub mod fdsolver;
pub mod geom;
pub mod geometry;
pub mod whitney;

/// Exact rational scalar for dyadic/5-adic box coordinates.
pub type Rat = num_rational::Ratio<i128>;
/// Arbitrary-precision rational, used where `f64` samples enter exact tests.
pub type BigRat = num_rational::BigRational;

/// Axis-aligned box over `f64` coordinates.
pub type BoxF<const N: usize> = geom::AxisBox<f64, N>;
/// Axis-aligned box over exact rational coordinates.
pub type BoxQ<const N: usize> = geom::AxisBox<Rat, N>;

/// Point in `N` dimensions, `f64` coordinates.
pub type PointF<const N: usize> = [f64; N];

pub use geometry::{Domain, DomainKind, GraphDomainSpec};
pub use whitney::{DyadicCube, WhitneyDecomposition};
