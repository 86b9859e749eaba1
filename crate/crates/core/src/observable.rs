//! Discrete self-adjoint observables on the periodic grid.
//!
//! Multiplication operators are diagonal in position space with real node
//! values; momentum and kinetic energy are diagonal in Fourier space with
//! real symbols. Both families are exactly hermitean with respect to the
//! discrete inner product, up to FFT roundoff. Units are fixed to ħ = m = 1,
//! so the Hamiltonian is H = p²/2 + V.

use num_complex::Complex;

use thiserror::Error;

use crate::grid::{inner_product, Grid, GridState, Spectral, Symbol};
use crate::scalar::{small, RealScalar};

#[derive(Debug, Error)]
pub enum ObservableError {
    #[error("potential value at node {index} (x = {x}) is not finite")]
    NonFinitePotential { index: usize, x: f64 },
    #[error("operator length {got} does not match grid size {grid}")]
    LengthMismatch { got: usize, grid: usize },
}

/// Named potential families shipped with the propagator.
///
/// Singular potentials are out of scope; the barrier is a smooth bump so its
/// periodic extension is smooth to machine precision.
#[derive(Clone, Debug, PartialEq)]
pub enum Potential<T> {
    Free,
    /// V(x) = x²/2.
    Harmonic,
    /// V(x) = x⁴/4.
    Quartic,
    /// V(x) = height · exp(−x²/(2 width²)).
    Barrier {
        height: T,
        width: T,
    },
}

impl<T: RealScalar> Potential<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Potential::Free => "free",
            Potential::Harmonic => "harmonic",
            Potential::Quartic => "quartic",
            Potential::Barrier { .. } => "barrier",
        }
    }

    pub fn value(&self, x: T) -> T {
        match self {
            Potential::Free => T::zero(),
            Potential::Harmonic => x * x / small(2),
            Potential::Quartic => x * x * x * x / small(4),
            Potential::Barrier { height, width } => {
                *height * (-(x * x) / (small::<T>(2) * *width * *width)).exp()
            }
        }
    }

    pub fn values(&self, grid: &Grid<T>) -> Vec<T> {
        (0..grid.len()).map(|k| self.value(grid.node(k))).collect()
    }

    /// Spatial derivative V′, used by the Ehrenfest force relation.
    pub fn derivative(&self, x: T) -> T {
        match self {
            Potential::Free => T::zero(),
            Potential::Harmonic => x,
            Potential::Quartic => x * x * x,
            Potential::Barrier { height, width } => {
                let w2 = *width * *width;
                -*height * x / w2 * (-(x * x) / (small::<T>(2) * w2)).exp()
            }
        }
    }
}

/// A discrete observable: how to apply A to a grid state.
#[derive(Clone, Debug)]
pub enum Observable<T> {
    /// Multiplication by x.
    Position,
    /// −i d/dx via Fourier differentiation (Nyquist mode zeroed).
    Momentum,
    /// p²/2 via the full Fourier symbol.
    Kinetic,
    /// Multiplication by the potential node values.
    Potential(Vec<T>),
    /// Kinetic plus potential: H = p²/2 + V.
    Hamiltonian(Vec<T>),
    /// Multiplication by an arbitrary real-valued grid function.
    Multiplication(Vec<T>),
    /// Rank-one orthogonal projector |v⟩⟨v| / ⟨v,v⟩.
    Projector(Vec<Complex<T>>),
}

impl<T: RealScalar> Observable<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Observable::Position => "position",
            Observable::Momentum => "momentum",
            Observable::Kinetic => "kinetic",
            Observable::Potential(_) => "potential",
            Observable::Hamiltonian(_) => "hamiltonian",
            Observable::Multiplication(_) => "multiplication",
            Observable::Projector(_) => "projector",
        }
    }

    /// Build H = p²/2 + V for a named potential, rejecting non-finite node
    /// values.
    pub fn hamiltonian(grid: &Grid<T>, potential: &Potential<T>) -> Result<Self, ObservableError> {
        let values = potential.values(grid);
        for (index, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(ObservableError::NonFinitePotential {
                    index,
                    x: grid.node(index).to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(Observable::Hamiltonian(values))
    }

    /// Multiplication observable for a named potential.
    pub fn potential(grid: &Grid<T>, potential: &Potential<T>) -> Self {
        Observable::Potential(potential.values(grid))
    }

    pub fn check_len(&self, grid: &Grid<T>) -> Result<(), ObservableError> {
        let len = match self {
            Observable::Potential(v)
            | Observable::Hamiltonian(v)
            | Observable::Multiplication(v) => Some(v.len()),
            Observable::Projector(v) => Some(v.len()),
            _ => None,
        };
        match len {
            Some(l) if l != grid.len() => Err(ObservableError::LengthMismatch {
                got: l,
                grid: grid.len(),
            }),
            _ => Ok(()),
        }
    }

    /// Apply the observable to raw amplitudes.
    pub fn apply(&self, sp: &mut Spectral<T>, psi: &[Complex<T>]) -> Vec<Complex<T>> {
        match self {
            Observable::Position => {
                let grid = *sp.grid();
                psi.iter()
                    .enumerate()
                    .map(|(k, c)| *c * Complex::new(grid.node(k), T::zero()))
                    .collect()
            }
            Observable::Momentum => sp.apply_symbol(Symbol::Momentum, psi),
            Observable::Kinetic => sp.apply_symbol(Symbol::Kinetic, psi),
            Observable::Potential(v) | Observable::Multiplication(v) => psi
                .iter()
                .zip(v)
                .map(|(c, &m)| *c * Complex::new(m, T::zero()))
                .collect(),
            Observable::Hamiltonian(v) => {
                let mut out = sp.apply_symbol(Symbol::Kinetic, psi);
                for ((o, c), &m) in out.iter_mut().zip(psi).zip(v) {
                    *o = *o + *c * Complex::new(m, T::zero());
                }
                out
            }
            Observable::Projector(v) => {
                let grid = sp.grid();
                let vv = inner_product(v, v, grid);
                let coeff = inner_product(v, psi, grid) / vv;
                v.iter().map(|c| *c * coeff).collect()
            }
        }
    }

    /// Largest relative hermiticity defect |⟨Aξ,ζ⟩ − ⟨ξ,Aζ⟩| over supplied
    /// state pairs.
    pub fn hermiticity_defect(
        &self,
        sp: &mut Spectral<T>,
        pairs: &[(GridState<T>, GridState<T>)],
    ) -> T {
        let grid = *sp.grid();
        let mut worst = T::zero();
        for (xi, zeta) in pairs {
            let a_xi = self.apply(sp, &xi.amplitudes);
            let a_zeta = self.apply(sp, &zeta.amplitudes);
            let lhs = inner_product(&a_xi, &zeta.amplitudes, &grid);
            let rhs = inner_product(&xi.amplitudes, &a_zeta, &grid);
            let scale = xi.norm(&grid) * zeta.norm(&grid);
            let defect = (lhs - rhs).norm() / scale.max(T::min_positive_value());
            worst = worst.max(defect);
        }
        worst
    }
}
