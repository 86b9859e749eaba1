//! Verification tools for expectation-value dynamics of the 1-D Schrödinger
//! equation.
//!
//! Two independent engines live here. The exact side ([`pwlin`],
//! [`counterexample`]) works in arbitrary-precision rational arithmetic and
//! assembles a hermitean, non-self-adjoint observable whose expectation value
//! along a unitary translation orbit exceeds every bound — with zero-tolerance
//! certificates. The numeric side ([`grid`], [`observable`], [`propagator`])
//! evolves wavefunctions on a periodic grid with two unitary integrators and
//! verifies the identity d/dt⟨A⟩ = i⟨[H,A]⟩ for self-adjoint observables, plus
//! the boundedness diagnostic sup_t ‖Aψ(t)‖ that separates the two worlds.
//!
//! Core math is generic over the scalar: the exact algebra over any ordered
//! field ([`scalar::ExactScalar`]), the grid engine over `f32`/`f64`
//! ([`scalar::RealScalar`]). Concrete aliases for the canonical
//! instantiations are exported at the crate root.

pub mod acceptance;
pub mod counterexample;
pub mod crosscheck;
pub mod grid;
pub mod observable;
pub mod propagator;
pub mod pwlin;
pub mod rat;
pub mod report;
pub mod scalar;

/// Arbitrary-precision rational scalar used by the exact engine.
pub type Rational = num_rational::BigRational;

/// Piecewise-linear function over arbitrary-precision rationals.
pub type PwLin = pwlin::PiecewiseLinear<Rational>;

/// Double-precision grid.
pub type Grid64 = grid::Grid<f64>;

/// Double-precision grid state.
pub type State64 = grid::GridState<f64>;

/// Double-precision spectral workspace.
pub type Spectral64 = grid::Spectral<f64>;

/// Double-precision observable.
pub type Observable64 = observable::Observable<f64>;
