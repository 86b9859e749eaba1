//! Unitary time integration and verification of the expectation-value
//! identity d/dt⟨A⟩ = i⟨[H,A]⟩.
//!
//! Two independent second-order integrators are provided so every numerical
//! discrepancy can be attributed to a measured discretization order: the
//! Cayley transform (Crank–Nicolson) solved iteratively, and Strang splitting
//! between the kinetic and potential flows (split-step Fourier). Both are
//! unitary up to solver tolerance respectively roundoff.

use num_complex::Complex;

use thiserror::Error;

use crate::grid::{inner_product, norm_sq_unscaled, GridState, Spectral};
use crate::observable::{Observable, ObservableError, Potential};
use crate::scalar::{small, RealScalar};

#[derive(Debug, Error)]
pub enum PropagatorError {
    #[error("time step and final time must be positive")]
    BadTimes,
    #[error("save_every must be at least 1 and leave at least three saved samples")]
    BadSaveSpacing,
    #[error(
        "linear solver did not reach residual {tol:e} after {iters} iterations (got {residual:e})"
    )]
    SolverDiverged {
        iters: usize,
        tol: f64,
        residual: f64,
    },
    #[error("state became non-finite at t = {time}")]
    NanDetected { time: f64 },
    #[error("discrete norm drifted to {norm} at t = {time}; the run is numerically invalid")]
    NormLost { norm: f64, time: f64 },
    #[error("wraparound: mass {mass:e} in the outer 10% of the box at t = {time} exceeds {threshold:e}; enlarge the box")]
    Wraparound {
        mass: f64,
        time: f64,
        threshold: f64,
    },
    #[error("expectation of {name} has imaginary part {imag:e} beyond tolerance; operator is not hermitean on this state")]
    NonRealExpectation { name: &'static str, imag: f64 },
    #[error("commutator form has real part {real:e} beyond tolerance; operators are not hermitean on this state")]
    CommutatorInconsistent { real: f64 },
    #[error(transparent)]
    Observable(#[from] ObservableError),
}

/// Iterative-solver settings for the Crank–Nicolson step.
#[derive(Clone, Copy, Debug)]
pub struct SolverOptions<T> {
    /// Relative residual target ‖b − Aψ⁺‖/‖b‖.
    pub tol: T,
    pub max_iter: usize,
}

impl<T: RealScalar> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::from_f64(1e-12).unwrap(),
            max_iter: 1000,
        }
    }
}

fn axpy<T: RealScalar>(y: &mut [Complex<T>], alpha: T, x: &[Complex<T>]) {
    let a = Complex::new(alpha, T::zero());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi = *yi + a * *xi;
    }
}

/// v ± i·(dt/2)·(H v).
fn cayley_apply<T: RealScalar>(
    sp: &mut Spectral<T>,
    h: &Observable<T>,
    half_dt: T,
    v: &[Complex<T>],
    sign: T,
) -> Vec<Complex<T>> {
    let mut out = h.apply(sp, v);
    let ia = Complex::new(T::zero(), sign * half_dt);
    for (o, x) in out.iter_mut().zip(v) {
        *o = *x + ia * *o;
    }
    out
}

/// One Crank–Nicolson step: solve (I + i dt H/2) ψ⁺ = (I − i dt H/2) ψ.
///
/// The system is solved by conjugate gradients on the normal equations,
/// warm-started from the explicit half step. For states whose spectral
/// content stays in the moderate part of the spectrum this converges in a
/// handful of iterations regardless of the operator norm.
pub fn step_crank_nicolson<T: RealScalar>(
    sp: &mut Spectral<T>,
    state: &GridState<T>,
    h: &Observable<T>,
    dt: T,
    opts: &SolverOptions<T>,
) -> Result<GridState<T>, PropagatorError> {
    if dt <= T::zero() || !dt.is_finite() {
        return Err(PropagatorError::BadTimes);
    }
    let half_dt = dt / small(2);
    let b = cayley_apply(sp, h, half_dt, &state.amplitudes, -T::one());
    let b_norm = norm_sq_unscaled(&b).sqrt();
    let target = opts.tol * b_norm;

    let mut x = b.clone();
    let ax = cayley_apply(sp, h, half_dt, &x, T::one());
    let mut r: Vec<Complex<T>> = b.iter().zip(&ax).map(|(bi, axi)| *bi - *axi).collect();
    let mut res_norm = norm_sq_unscaled(&r).sqrt();
    if res_norm > target {
        // CGNR: CG on A*A x = A*b, built from residuals of the original system.
        let mut z = cayley_apply(sp, h, half_dt, &r, -T::one());
        let mut zz = norm_sq_unscaled(&z);
        let mut p = z.clone();
        let mut converged = false;
        for _ in 0..opts.max_iter {
            let w = cayley_apply(sp, h, half_dt, &p, T::one());
            let ww = norm_sq_unscaled(&w);
            let alpha = zz / ww;
            axpy(&mut x, alpha, &p);
            axpy(&mut r, -alpha, &w);
            res_norm = norm_sq_unscaled(&r).sqrt();
            if res_norm <= target {
                converged = true;
                break;
            }
            z = cayley_apply(sp, h, half_dt, &r, -T::one());
            let zz_new = norm_sq_unscaled(&z);
            let beta = zz_new / zz;
            zz = zz_new;
            for (pi, zi) in p.iter_mut().zip(&z) {
                *pi = *zi + Complex::new(beta, T::zero()) * *pi;
            }
        }
        if !converged {
            return Err(PropagatorError::SolverDiverged {
                iters: opts.max_iter,
                tol: opts.tol.to_f64().unwrap_or(f64::NAN),
                residual: (res_norm / b_norm).to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    Ok(GridState::new(x, state.time + dt))
}

/// Precomputed Strang-splitting stepper e^{−i dt V/2} e^{−i dt T} e^{−i dt V/2}.
pub struct SplitFourierStepper<T> {
    dt: T,
    half_potential_phase: Vec<Complex<T>>,
    kinetic_phase: Vec<Complex<T>>,
}

impl<T: RealScalar> SplitFourierStepper<T> {
    pub fn new(sp: &Spectral<T>, potential_values: &[T], dt: T) -> Result<Self, PropagatorError> {
        if dt <= T::zero() || !dt.is_finite() {
            return Err(PropagatorError::BadTimes);
        }
        let half = dt / small(2);
        let half_potential_phase = potential_values
            .iter()
            .map(|&v| Complex::from_polar(T::one(), -half * v))
            .collect();
        let kinetic_phase = sp
            .kinetic_symbol()
            .iter()
            .map(|&t| Complex::from_polar(T::one(), -dt * t))
            .collect();
        Ok(Self {
            dt,
            half_potential_phase,
            kinetic_phase,
        })
    }

    pub fn step(&self, sp: &mut Spectral<T>, state: &GridState<T>) -> GridState<T> {
        let mut buf = state.amplitudes.clone();
        for (c, ph) in buf.iter_mut().zip(&self.half_potential_phase) {
            *c = *c * *ph;
        }
        sp.forward(&mut buf);
        for (c, ph) in buf.iter_mut().zip(&self.kinetic_phase) {
            *c = *c * *ph;
        }
        sp.inverse(&mut buf);
        for (c, ph) in buf.iter_mut().zip(&self.half_potential_phase) {
            *c = *c * *ph;
        }
        GridState::new(buf, state.time + self.dt)
    }
}

/// One split-step Fourier step without precomputation.
pub fn step_split_fourier<T: RealScalar>(
    sp: &mut Spectral<T>,
    state: &GridState<T>,
    potential_values: &[T],
    dt: T,
) -> Result<GridState<T>, PropagatorError> {
    Ok(SplitFourierStepper::new(sp, potential_values, dt)?.step(sp, state))
}

/// Real part of the quadratic form ⟨ψ, Aψ⟩, with a consistency check that the
/// imaginary part is at relative roundoff level.
pub fn expectation<T: RealScalar>(
    sp: &mut Spectral<T>,
    state: &GridState<T>,
    a: &Observable<T>,
) -> Result<T, PropagatorError> {
    let a_psi = a.apply(sp, &state.amplitudes);
    expectation_from(sp, state, &a_psi).map_err(|imag| PropagatorError::NonRealExpectation {
        name: a.name(),
        imag,
    })
}

/// Quadratic form from a precomputed image Aψ; `Err` carries the offending
/// imaginary part.
fn expectation_from<T: RealScalar>(
    sp: &Spectral<T>,
    state: &GridState<T>,
    a_psi: &[Complex<T>],
) -> Result<T, f64> {
    let grid = sp.grid();
    let val = inner_product(&state.amplitudes, a_psi, grid);
    let scale =
        (norm_sq_unscaled(&state.amplitudes) * norm_sq_unscaled(a_psi)).sqrt() * grid.spacing();
    let tol = T::from_f64(1e-10).unwrap() * scale.max(T::one());
    if val.im.abs() > tol {
        return Err(val.im.to_f64().unwrap_or(f64::NAN));
    }
    Ok(val.re)
}

/// The commutator form i(⟨Hψ, Aψ⟩ − ⟨Aψ, Hψ⟩), the weak-sense right-hand
/// side of the expectation identity. The two inner products are evaluated
/// independently; their difference must be purely imaginary for hermitean
/// operators, which is asserted at relative roundoff level.
pub fn commutator_form<T: RealScalar>(
    sp: &mut Spectral<T>,
    state: &GridState<T>,
    h: &Observable<T>,
    a: &Observable<T>,
) -> Result<T, PropagatorError> {
    let h_psi = h.apply(sp, &state.amplitudes);
    let a_psi = a.apply(sp, &state.amplitudes);
    commutator_form_from(sp, &h_psi, &a_psi)
}

fn commutator_form_from<T: RealScalar>(
    sp: &Spectral<T>,
    h_psi: &[Complex<T>],
    a_psi: &[Complex<T>],
) -> Result<T, PropagatorError> {
    let grid = sp.grid();
    let forward = inner_product(h_psi, a_psi, grid);
    let backward = inner_product(a_psi, h_psi, grid);
    let value = Complex::new(T::zero(), T::one()) * (forward - backward);
    let scale = (norm_sq_unscaled(h_psi) * norm_sq_unscaled(a_psi)).sqrt() * grid.spacing();
    let tol = T::from_f64(1e-10).unwrap() * scale.max(T::one());
    if value.im.abs() > tol {
        return Err(PropagatorError::CommutatorInconsistent {
            real: value.im.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(value.re)
}

/// Time-integration scheme selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Integrator {
    CrankNicolson,
    SplitFourier,
}

impl Integrator {
    pub fn name(&self) -> &'static str {
        match self {
            Integrator::CrankNicolson => "crank_nicolson",
            Integrator::SplitFourier => "split_fourier",
        }
    }
}

/// Options for a reported evolution run.
#[derive(Clone, Copy, Debug)]
pub struct EvolveOptions<T> {
    pub t_final: T,
    pub dt: T,
    pub save_every: usize,
    pub integrator: Integrator,
    pub solver: SolverOptions<T>,
    /// Abort threshold for mass in the outer 10% of the box.
    pub edge_mass_abort: T,
}

impl<T: RealScalar> EvolveOptions<T> {
    pub fn new(t_final: T, dt: T, save_every: usize, integrator: Integrator) -> Self {
        Self {
            t_final,
            dt,
            save_every,
            integrator,
            solver: SolverOptions::default(),
            edge_mass_abort: T::from_f64(1e-8).unwrap(),
        }
    }
}

/// Per-observable time series of the identity check.
#[derive(Clone, Debug)]
pub struct ObservableTrack<T> {
    pub name: String,
    /// ⟨A⟩ at each saved time.
    pub expectation: Vec<T>,
    /// Centered time derivative of ⟨A⟩ over saved samples (one-sided
    /// second-order differences at the ends).
    pub lhs: Vec<T>,
    /// i⟨[H,A]⟩ evaluated at each saved time.
    pub rhs: Vec<T>,
    pub residual: Vec<T>,
    /// Running maximum of ‖Aψ(t)‖ — the boundedness diagnostic that holds
    /// for self-adjoint observables along unitary orbits.
    pub sup_norm_running: Vec<T>,
    pub max_abs_residual: T,
    pub sup_norm: T,
}

/// Full report of one evolution run.
#[derive(Clone, Debug)]
pub struct EhrenfestReport<T> {
    pub times: Vec<T>,
    pub norm: Vec<T>,
    pub energy: Vec<T>,
    pub tracks: Vec<ObservableTrack<T>>,
    pub norm_drift: T,
    pub energy_drift: T,
}

/// Evolve and verify: step the state, record ⟨A⟩, both sides of the
/// expectation identity, norm/energy drift and the sup-norm diagnostic.
pub fn evolve_and_report<T: RealScalar>(
    sp: &mut Spectral<T>,
    initial: GridState<T>,
    potential: &Potential<T>,
    observables: &[Observable<T>],
    opts: &EvolveOptions<T>,
) -> Result<EhrenfestReport<T>, PropagatorError> {
    if opts.t_final <= T::zero() || opts.dt <= T::zero() || !opts.dt.is_finite() {
        return Err(PropagatorError::BadTimes);
    }
    let steps = (opts.t_final / opts.dt)
        .round()
        .to_f64()
        .map(|s| s as usize)
        .unwrap_or(0);
    if opts.save_every == 0 || steps / opts.save_every < 2 {
        return Err(PropagatorError::BadSaveSpacing);
    }
    let grid = *sp.grid();
    for a in observables {
        a.check_len(&grid)?;
    }
    let h = Observable::hamiltonian(&grid, potential)?;
    let potential_values = potential.values(&grid);
    let sf_stepper = match opts.integrator {
        Integrator::SplitFourier => Some(SplitFourierStepper::new(sp, &potential_values, opts.dt)?),
        Integrator::CrankNicolson => None,
    };

    let mut times = Vec::new();
    let mut norms: Vec<T> = Vec::new();
    let mut energies = Vec::new();
    let mut expectations: Vec<Vec<T>> = vec![Vec::new(); observables.len()];
    let mut rhs: Vec<Vec<T>> = vec![Vec::new(); observables.len()];
    let mut a_norms: Vec<Vec<T>> = vec![Vec::new(); observables.len()];

    let mut record = |sp: &mut Spectral<T>, state: &GridState<T>| -> Result<(), PropagatorError> {
        if !state.is_finite() {
            return Err(PropagatorError::NanDetected {
                time: state.time.to_f64().unwrap_or(f64::NAN),
            });
        }
        let norm = state.norm(&grid);
        if (norm - T::one()).abs() > T::from_f64(1e-3).unwrap() {
            return Err(PropagatorError::NormLost {
                norm: norm.to_f64().unwrap_or(f64::NAN),
                time: state.time.to_f64().unwrap_or(f64::NAN),
            });
        }
        let mass = edge_mass(&grid, state);
        if mass > opts.edge_mass_abort {
            return Err(PropagatorError::Wraparound {
                mass: mass.to_f64().unwrap_or(f64::NAN),
                time: state.time.to_f64().unwrap_or(f64::NAN),
                threshold: opts.edge_mass_abort.to_f64().unwrap_or(f64::NAN),
            });
        }
        let h_psi = h.apply(sp, &state.amplitudes);
        let energy = expectation_from(sp, state, &h_psi).map_err(|imag| {
            PropagatorError::NonRealExpectation {
                name: "hamiltonian",
                imag,
            }
        })?;
        times.push(state.time);
        norms.push(norm);
        energies.push(energy);
        for (i, a) in observables.iter().enumerate() {
            let a_psi = a.apply(sp, &state.amplitudes);
            let exp_val = expectation_from(sp, state, &a_psi).map_err(|imag| {
                PropagatorError::NonRealExpectation {
                    name: a.name(),
                    imag,
                }
            })?;
            expectations[i].push(exp_val);
            rhs[i].push(commutator_form_from(sp, &h_psi, &a_psi)?);
            a_norms[i].push((norm_sq_unscaled(&a_psi) * grid.spacing()).sqrt());
        }
        Ok(())
    };

    let mut state = initial;
    record(sp, &state)?;
    for step in 1..=steps {
        state = match opts.integrator {
            Integrator::CrankNicolson => {
                step_crank_nicolson(sp, &state, &h, opts.dt, &opts.solver)?
            }
            Integrator::SplitFourier => sf_stepper.as_ref().unwrap().step(sp, &state),
        };
        if step % opts.save_every == 0 {
            record(sp, &state)?;
        }
    }

    let delta = opts.dt * small(opts.save_every as i64);
    let tracks = observables
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let lhs = finite_difference_derivative(&expectations[i], delta);
            let residual: Vec<T> = lhs.iter().zip(&rhs[i]).map(|(&l, &r)| l - r).collect();
            let max_abs_residual = residual.iter().fold(T::zero(), |m, &r| m.max(r.abs()));
            let mut sup_running = Vec::with_capacity(a_norms[i].len());
            let mut sup = T::zero();
            for &v in &a_norms[i] {
                sup = sup.max(v);
                sup_running.push(sup);
            }
            ObservableTrack {
                name: a.name().to_string(),
                expectation: expectations[i].clone(),
                lhs,
                rhs: rhs[i].clone(),
                residual,
                sup_norm_running: sup_running,
                max_abs_residual,
                sup_norm: sup,
            }
        })
        .collect();

    let norm_drift = norms
        .iter()
        .fold(T::zero(), |m, &n| m.max((n - T::one()).abs()));
    let e0 = energies[0];
    let energy_drift = energies
        .iter()
        .fold(T::zero(), |m, &e| m.max((e - e0).abs()))
        / e0.abs().max(T::min_positive_value());

    Ok(EhrenfestReport {
        times,
        norm: norms,
        energy: energies,
        tracks,
        norm_drift,
        energy_drift,
    })
}

/// Mass h Σ |ψₖ|² carried by nodes with |x| ≥ 0.45 L (the outer 10% of the
/// box): the wraparound monitor for traveling or spreading packets.
pub fn edge_mass<T: RealScalar>(grid: &crate::grid::Grid<T>, state: &GridState<T>) -> T {
    let cut = grid.length() * T::from_f64(0.45).unwrap();
    let mut acc = T::zero();
    for (k, c) in state.amplitudes.iter().enumerate() {
        if grid.node(k).abs() >= cut {
            acc = acc + c.norm_sqr();
        }
    }
    acc * grid.spacing()
}

/// Second-order derivative of a sampled series: centered differences inside,
/// one-sided three-point stencils at the ends.
fn finite_difference_derivative<T: RealScalar>(f: &[T], delta: T) -> Vec<T> {
    let n = f.len();
    assert!(n >= 3, "need at least three samples");
    let two = small::<T>(2);
    let three = small::<T>(3);
    let four = small::<T>(4);
    let mut out = Vec::with_capacity(n);
    out.push((-three * f[0] + four * f[1] - f[2]) / (two * delta));
    for i in 1..n - 1 {
        out.push((f[i + 1] - f[i - 1]) / (two * delta));
    }
    out.push((three * f[n - 1] - four * f[n - 2] + f[n - 3]) / (two * delta));
    out
}
