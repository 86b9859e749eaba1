//! Scalar abstractions: an exact ordered field for the rational side and a
//! floating-point scalar for the grid side.

use std::fmt;
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, Num, Signed};
use rustfft::FftNum;

/// Exact ordered-field scalar: everything the piecewise-linear algebra needs.
///
/// `BigRational` is the canonical instantiation; `Ratio<i64>` works for small
/// inputs. Floating-point types are excluded on purpose (`Ord` is required so
/// breakpoint comparisons are total and exact).
pub trait ExactScalar:
    Num + Signed + Ord + FromPrimitive + Clone + fmt::Debug + fmt::Display
{
}

impl<T> ExactScalar for T where
    T: Num + Signed + Ord + FromPrimitive + Clone + fmt::Debug + fmt::Display
{
}

/// Real floating-point scalar for grid states and spectral operators:
/// `f32` or `f64`.
pub trait RealScalar:
    Float + FloatConst + FftNum + FromPrimitive + Sum + fmt::Display + fmt::LowerExp
{
}

impl<T> RealScalar for T where
    T: Float + FloatConst + FftNum + FromPrimitive + Sum + fmt::Display + fmt::LowerExp
{
}

/// Convert a small integer constant into any scalar.
pub(crate) fn small<T: FromPrimitive>(n: i64) -> T {
    T::from_i64(n).expect("small integer constant must be representable")
}
