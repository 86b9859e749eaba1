//! Uniform periodic grid, complex grid states and the shared FFT workspace.

use std::sync::Arc;

use num_complex::Complex;
use num_traits::Zero;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

use crate::scalar::{small, RealScalar};

#[derive(Debug, Error)]
pub enum GridError {
    #[error("node count must be a power of two and at least 16 (got {0})")]
    BadNodeCount(usize),
    #[error("box length must be positive and finite")]
    BadLength,
}

/// Uniform 1-D periodic grid on [−L/2, L/2) with `n` nodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid<T> {
    length: T,
    n: usize,
}

impl<T: RealScalar> Grid<T> {
    pub fn new(length: T, n: usize) -> Result<Self, GridError> {
        if n < 16 || !n.is_power_of_two() {
            return Err(GridError::BadNodeCount(n));
        }
        if !(length.is_finite() && length > T::zero()) {
            return Err(GridError::BadLength);
        }
        Ok(Self { length, n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn length(&self) -> T {
        self.length
    }

    /// Node spacing h = L/n.
    pub fn spacing(&self) -> T {
        self.length / small(self.n as i64)
    }

    /// Node xₖ = −L/2 + k·h.
    pub fn node(&self, k: usize) -> T {
        -self.length / small(2) + self.spacing() * small(k as i64)
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.n).map(|k| self.node(k)).collect()
    }

    /// Signed wavenumber of FFT bin `m`: 2π/L times the signed mode index,
    /// with the Nyquist bin mapped to +n/2.
    pub fn wavenumber(&self, m: usize) -> T {
        let signed = if m <= self.n / 2 {
            m as i64
        } else {
            m as i64 - self.n as i64
        };
        T::TAU() / self.length * small(signed)
    }

    /// Does [lo, hi] fit inside the box?
    pub fn covers(&self, lo: T, hi: T) -> bool {
        let half = self.length / small(2);
        -half <= lo && hi <= half
    }
}

/// Complex wavefunction sampled on a grid, tagged with its physical time.
#[derive(Clone, Debug)]
pub struct GridState<T> {
    pub amplitudes: Vec<Complex<T>>,
    pub time: T,
}

impl<T: RealScalar> GridState<T> {
    pub fn new(amplitudes: Vec<Complex<T>>, time: T) -> Self {
        Self { amplitudes, time }
    }

    /// Discrete L² norm (h Σ|ψₖ|²)^{1/2}.
    pub fn norm(&self, grid: &Grid<T>) -> T {
        (norm_sq_unscaled(&self.amplitudes) * grid.spacing()).sqrt()
    }

    /// Scale to unit discrete norm.
    pub fn normalized(mut self, grid: &Grid<T>) -> Self {
        let n = self.norm(grid);
        let inv = Complex::new(T::one() / n, T::zero());
        for a in &mut self.amplitudes {
            *a = *a * inv;
        }
        self
    }

    pub fn is_finite(&self) -> bool {
        self.amplitudes
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Normalized Gaussian packet centered at `x0` with momentum `p0` and
    /// width `sigma`.
    pub fn gaussian(grid: &Grid<T>, x0: T, p0: T, sigma: T) -> Self {
        let two = small::<T>(2);
        let amps = (0..grid.len())
            .map(|k| {
                let x = grid.node(k);
                let envelope = (-(x - x0) * (x - x0) / (two * sigma * sigma)).exp();
                Complex::from_polar(envelope, p0 * x)
            })
            .collect();
        Self::new(amps, T::zero()).normalized(grid)
    }

    /// Plane wave e^{i 2π m x / L} / √L — an exact discrete eigenvector of
    /// every Fourier-diagonal operator, with unit discrete norm.
    pub fn plane_wave(grid: &Grid<T>, mode: i64) -> Self {
        let k = T::TAU() / grid.length() * small(mode);
        let amp = T::one() / grid.length().sqrt();
        let amps = (0..grid.len())
            .map(|j| Complex::from_polar(amp, k * grid.node(j)))
            .collect();
        Self::new(amps, T::zero())
    }
}

/// Unscaled Σ|vₖ|².
pub fn norm_sq_unscaled<T: RealScalar>(v: &[Complex<T>]) -> T {
    v.iter().map(|c| c.norm_sqr()).fold(T::zero(), |a, b| a + b)
}

/// Discrete inner product h Σ conj(aₖ) bₖ, conjugate-linear in the first
/// argument.
pub fn inner_product<T: RealScalar>(
    a: &[Complex<T>],
    b: &[Complex<T>],
    grid: &Grid<T>,
) -> Complex<T> {
    debug_assert_eq!(a.len(), b.len());
    let mut acc: Complex<T> = Complex::zero();
    for (x, y) in a.iter().zip(b) {
        acc = acc + x.conj() * *y;
    }
    acc * Complex::new(grid.spacing(), T::zero())
}

/// Shared FFT plans plus the precomputed symbol tables for one grid.
///
/// One workspace per worker; transforms mutate internal scratch, so a
/// workspace is never shared mutably across workers.
pub struct Spectral<T: RealScalar> {
    grid: Grid<T>,
    fft: Arc<dyn Fft<T>>,
    ifft: Arc<dyn Fft<T>>,
    scratch: Vec<Complex<T>>,
    /// Momentum symbol: signed wavenumber, Nyquist bin zeroed so the operator
    /// is exactly hermitean and odd under reflection.
    momentum_symbol: Vec<T>,
    /// Kinetic symbol k²/2 with the full Nyquist mode retained.
    kinetic_symbol: Vec<T>,
}

impl<T: RealScalar> Spectral<T> {
    pub fn new(grid: Grid<T>) -> Self {
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(grid.len());
        let ifft = planner.plan_fft_inverse(grid.len());
        let scratch_len = fft
            .get_inplace_scratch_len()
            .max(ifft.get_inplace_scratch_len());
        let n = grid.len();
        let momentum_symbol = (0..n)
            .map(|m| {
                if m == n / 2 {
                    T::zero()
                } else {
                    grid.wavenumber(m)
                }
            })
            .collect();
        let kinetic_symbol = (0..n)
            .map(|m| {
                let k = grid.wavenumber(m);
                k * k / small(2)
            })
            .collect();
        Self {
            grid,
            fft,
            ifft,
            scratch: vec![Complex::zero(); scratch_len],
            momentum_symbol,
            kinetic_symbol,
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn momentum_symbol(&self) -> &[T] {
        &self.momentum_symbol
    }

    pub fn kinetic_symbol(&self) -> &[T] {
        &self.kinetic_symbol
    }

    /// In-place unnormalized forward DFT.
    pub fn forward(&mut self, buf: &mut [Complex<T>]) {
        self.fft.process_with_scratch(buf, &mut self.scratch);
    }

    /// In-place inverse DFT including the 1/n normalization, so `forward`
    /// followed by `inverse` is the identity up to roundoff.
    pub fn inverse(&mut self, buf: &mut [Complex<T>]) {
        self.ifft.process_with_scratch(buf, &mut self.scratch);
        let scale = Complex::new(T::one() / small(self.grid.len() as i64), T::zero());
        for c in buf.iter_mut() {
            *c = *c * scale;
        }
    }

    /// Apply a Fourier-diagonal operator with real symbol σ(k):
    /// ψ ↦ F⁻¹ σ F ψ.
    pub fn apply_symbol(&mut self, which: Symbol, psi: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut buf = psi.to_vec();
        self.forward(&mut buf);
        {
            let symbol = match which {
                Symbol::Momentum => &self.momentum_symbol,
                Symbol::Kinetic => &self.kinetic_symbol,
            };
            for (c, &s) in buf.iter_mut().zip(symbol) {
                *c = *c * Complex::new(s, T::zero());
            }
        }
        self.inverse(&mut buf);
        buf
    }
}

/// Which precomputed Fourier symbol to apply.
#[derive(Clone, Copy, Debug)]
pub enum Symbol {
    Momentum,
    Kinetic,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(Grid::new(40.0f64, 512).is_ok());
        assert!(matches!(
            Grid::new(40.0f64, 100),
            Err(GridError::BadNodeCount(100))
        ));
        assert!(matches!(
            Grid::new(40.0f64, 8),
            Err(GridError::BadNodeCount(8))
        ));
        assert!(Grid::new(-1.0f64, 64).is_err());
        assert!(Grid::new(f64::NAN, 64).is_err());
    }

    #[test]
    fn nodes_and_wavenumbers() {
        let g = Grid::new(16.0f64, 16).unwrap();
        assert_eq!(g.spacing(), 1.0);
        assert_eq!(g.node(0), -8.0);
        assert_eq!(g.node(15), 7.0);
        assert!((g.wavenumber(1) - std::f64::consts::TAU / 16.0).abs() < 1e-15);
        assert!((g.wavenumber(15) + std::f64::consts::TAU / 16.0).abs() < 1e-15);
        assert!(g.covers(-8.0, 8.0));
        assert!(!g.covers(-9.0, 0.0));
    }

    #[test]
    fn gaussian_is_normalized_and_centered() {
        let g = Grid::new(40.0f64, 512).unwrap();
        let psi = GridState::gaussian(&g, 2.0, 0.0, 1.0);
        assert!((psi.norm(&g) - 1.0).abs() < 1e-14);
        let h = g.spacing();
        let mean_x: f64 = (0..g.len())
            .map(|k| g.node(k) * psi.amplitudes[k].norm_sqr() * h)
            .sum();
        assert!((mean_x - 2.0).abs() < 1e-8);
    }

    #[test]
    fn forward_inverse_round_trip() {
        let g = Grid::new(10.0f64, 64).unwrap();
        let mut sp = Spectral::new(g);
        let psi = GridState::gaussian(&g, 0.5, 1.0, 1.0);
        let mut buf = psi.amplitudes.clone();
        sp.forward(&mut buf);
        sp.inverse(&mut buf);
        let err: f64 = buf
            .iter()
            .zip(&psi.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-13);
    }

    #[test]
    fn plane_wave_unit_norm() {
        let g = Grid::new(20.0f64, 64).unwrap();
        let psi = GridState::plane_wave(&g, 3);
        assert!((psi.norm(&g) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn works_in_single_precision() {
        let g = Grid::new(16.0f32, 32).unwrap();
        let mut sp = Spectral::new(g);
        let psi = GridState::gaussian(&g, 0.0, 0.0, 1.0);
        let out = sp.apply_symbol(Symbol::Kinetic, &psi.amplitudes);
        assert!(out.iter().all(|c| c.re.is_finite()));
    }
}
