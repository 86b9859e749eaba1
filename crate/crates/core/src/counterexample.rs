//! Exact assembly of a hermitean, non-self-adjoint observable whose
//! expectation value blows up along the translation orbit of a tent function.
//!
//! The translation group acts on the tent state ψ₀ by `ψ(t) = ψ₀(· − t)`.
//! Inside each of a family of disjoint open intervals Iⱼ ⊂ (0,1) a bump φⱼ is
//! built from two nested second differences of translated tents, which makes
//! φⱼ orthogonal to every function that is affine on its support cells — in
//! particular to every ψ(t) with t outside Iⱼ + ℤ. A rank-one projector sum
//! with growing weights then has expectation exactly j + 1 at a resonance
//! time tⱼ ∈ Iⱼ and exactly 0 at nearby times, so t ↦ ⟨A⟩_ψ(t) is unbounded
//! and discontinuous. Everything here is exact rational arithmetic; every
//! claim is checkable with zero tolerance.

use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::pwlin::PwlinError;
use crate::rat::{rational, rational_string};
use crate::scalar::small;
use crate::{PwLin, Rational};

#[derive(Debug, Error)]
pub enum CounterexampleError {
    #[error("eta must be positive")]
    NonPositiveEta,
    #[error("bump interval must satisfy 0 < left < right < 1 (got {0} .. {1})")]
    BadInterval(String, String),
    #[error("t0 and t0 + 6*eta must lie strictly inside the interval")]
    PlacementOutsideInterval,
    #[error("interval rule produced overlapping intervals for bumps {0} and {1}")]
    OverlappingIntervals(usize, usize),
    #[error("resonance search found no time with nonzero overlap for bump {0}")]
    ResonanceNotFound(usize),
    #[error("a certificate needs at least {needed} bumps, system has {got}")]
    TooFewBumps { needed: usize, got: usize },
    #[error(transparent)]
    Pwlin(#[from] PwlinError),
}

/// State of the translation orbit at time `t`: ψ₀(· − t).
pub fn orbit_state(t: &Rational) -> PwLin {
    PwLin::tent().translate(t)
}

/// Second difference f − 2·f(· − step) + f(· − 2·step).
pub fn second_difference(f: &PwLin, step: &Rational) -> Result<PwLin, CounterexampleError> {
    let fs = vec![
        f.clone(),
        f.translate(step),
        f.translate(&(step.clone() * small::<Rational>(2))),
    ];
    let coeffs = vec![rational(1, 1), rational(-2, 1), rational(1, 1)];
    Ok(PwLin::combine(&coeffs, &fs)?)
}

/// First-stage bump: the second difference of translated tents with step η,
/// a three-cell sawtooth of height η supported on [t₀, t₀+2η] + {0, 1, 2}.
pub fn build_phi_tilde(t0: &Rational, eta: &Rational) -> Result<PwLin, CounterexampleError> {
    if !eta.is_positive() {
        return Err(CounterexampleError::NonPositiveEta);
    }
    second_difference(&orbit_state(t0), eta)
}

/// Second-stage bump: a second difference of φ̃ with step 2η, equal to the
/// 7-term combination of tent translates with coefficients
/// (1, −2, −1, 4, −1, −2, 1) at shifts t₀ + kη, k = 0..6. Zero mass and zero
/// first moment on each support cell, hence orthogonal to affine pieces.
pub fn build_phi(t0: &Rational, eta: &Rational) -> Result<PwLin, CounterexampleError> {
    if !eta.is_positive() {
        return Err(CounterexampleError::NonPositiveEta);
    }
    let phi_tilde = build_phi_tilde(t0, eta)?;
    second_difference(&phi_tilde, &(eta.clone() * small::<Rational>(2)))
}

/// Open interval with exact placement parameters for one bump.
#[derive(Clone, Debug)]
pub struct BumpSpec {
    pub interval: (Rational, Rational),
    pub t0: Rational,
    pub eta: Rational,
}

impl BumpSpec {
    pub fn new(
        left: Rational,
        right: Rational,
        t0: Rational,
        eta: Rational,
    ) -> Result<Self, CounterexampleError> {
        if !eta.is_positive() {
            return Err(CounterexampleError::NonPositiveEta);
        }
        if !(Rational::zero() < left && left < right && right < Rational::one()) {
            return Err(CounterexampleError::BadInterval(
                rational_string(&left),
                rational_string(&right),
            ));
        }
        let reach = t0.clone() + small::<Rational>(6) * eta.clone();
        if !(left < t0 && reach < right) {
            return Err(CounterexampleError::PlacementOutsideInterval);
        }
        Ok(Self {
            interval: (left, right),
            t0,
            eta,
        })
    }

    pub fn width(&self) -> Rational {
        self.interval.1.clone() - self.interval.0.clone()
    }

    /// Does `t` fall inside the open set Iⱼ + ℤ?
    pub fn contains_mod_one(&self, t: &Rational) -> bool {
        let frac = t - t.floor();
        self.interval.0 < frac && frac < self.interval.1
    }
}

/// Placement of t₀ and η inside each interval, as fractions of its width.
#[derive(Clone, Debug)]
pub struct IntervalRule {
    pub t0_fraction: Rational,
    pub eta_fraction: Rational,
}

impl Default for IntervalRule {
    fn default() -> Self {
        Self {
            t0_fraction: rational(1, 4),
            eta_fraction: rational(1, 16),
        }
    }
}

impl IntervalRule {
    /// Interval for bump `j` (1-based): the harmonic gap (1/(j+2), 1/(j+1)).
    pub fn interval(j: usize) -> (Rational, Rational) {
        let j = j as i64;
        (rational(1, j + 2), rational(1, j + 1))
    }

    pub fn bump_spec(&self, j: usize) -> Result<BumpSpec, CounterexampleError> {
        let (left, right) = Self::interval(j);
        let width = right.clone() - left.clone();
        let t0 = left.clone() + width.clone() * self.t0_fraction.clone();
        let eta = width * self.eta_fraction.clone();
        BumpSpec::new(left, right, t0, eta)
    }
}

/// One assembled bump: the unnormalized φⱼ together with its exact squared
/// norm, resonance time and weight.
///
/// ‖φⱼ‖² = 24η³ is rational but its square root generally is not, so the
/// normalized bump is never materialized; all formulas divide by `norm_sq`
/// explicitly, which is algebraically identical to using φⱼ/‖φⱼ‖.
#[derive(Clone, Debug)]
pub struct Bump {
    pub spec: BumpSpec,
    pub phi: PwLin,
    pub norm_sq: Rational,
    pub t_resonance: Rational,
    pub weight: Rational,
}

/// The assembled operator A ψ = Σⱼ aⱼ ⟨φ̂ⱼ, ψ⟩ φ̂ⱼ, stored unnormalized.
#[derive(Clone, Debug)]
pub struct CounterexampleSystem {
    bumps: Vec<Bump>,
}

/// Build `n` bumps under the given placement rule.
///
/// The resonance time candidate is t₀ + η; if its overlap with the orbit
/// vanishes (it does not, for the default rule), t₀ + kη/4 for k = 1..23 are
/// scanned and the first nonzero overlap wins. The weight is chosen so the
/// expectation at tⱼ is exactly j + 1.
pub fn assemble_system(
    n: usize,
    rule: &IntervalRule,
) -> Result<CounterexampleSystem, CounterexampleError> {
    assert!(n >= 1, "a system needs at least one bump");
    let specs: Vec<BumpSpec> = (1..=n)
        .map(|j| rule.bump_spec(j))
        .collect::<Result<_, _>>()?;
    // Intervals are nested toward 0 by construction; verify disjointness
    // anyway so a future rule cannot silently break the Gram identity.
    for j in 1..specs.len() {
        if specs[j].interval.1 > specs[j - 1].interval.0 {
            return Err(CounterexampleError::OverlappingIntervals(j, j + 1));
        }
    }
    let mut bumps = Vec::with_capacity(n);
    for (idx, spec) in specs.into_iter().enumerate() {
        let j = idx + 1;
        let phi = build_phi(&spec.t0, &spec.eta)?;
        let norm_sq = phi.inner_product(&phi);
        let quarter_eta = spec.eta.clone() / small::<Rational>(4);
        let mut resonance = None;
        let candidates = std::iter::once(spec.t0.clone() + spec.eta.clone())
            .chain((1..=23).map(|k| spec.t0.clone() + quarter_eta.clone() * small::<Rational>(k)));
        for t in candidates {
            let overlap = phi.inner_product(&orbit_state(&t));
            if !overlap.is_zero() {
                resonance = Some((t, overlap));
                break;
            }
        }
        let (t_resonance, overlap) = resonance.ok_or(CounterexampleError::ResonanceNotFound(j))?;
        // aⱼ ⟨φⱼ, ψ(tⱼ)⟩² / ‖φⱼ‖² = j + 1 exactly.
        let weight =
            small::<Rational>(j as i64 + 1) * norm_sq.clone() / (overlap.clone() * overlap);
        bumps.push(Bump {
            spec,
            phi,
            norm_sq,
            t_resonance,
            weight,
        });
    }
    Ok(CounterexampleSystem { bumps })
}

impl CounterexampleSystem {
    pub fn bumps(&self) -> &[Bump] {
        &self.bumps
    }

    pub fn len(&self) -> usize {
        self.bumps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bumps.is_empty()
    }

    /// Apply A to a finite combination of orbit states. The sum is finite
    /// because ψ overlaps at most finitely many bumps.
    pub fn apply(&self, psi: &PwLin) -> PwLin {
        let mut coeffs = Vec::new();
        let mut parts = Vec::new();
        for bump in &self.bumps {
            let overlap = bump.phi.inner_product(psi);
            if overlap.is_zero() {
                continue;
            }
            coeffs.push(bump.weight.clone() * overlap / bump.norm_sq.clone());
            parts.push(bump.phi.clone());
        }
        if coeffs.is_empty() {
            return PwLin::zero();
        }
        PwLin::combine(&coeffs, &parts).expect("equal-length combination")
    }

    /// Exact ⟨ψ(t), A ψ(t)⟩. Only the bump whose interval contains t mod 1
    /// can contribute; everywhere else the value is exactly zero.
    pub fn expectation(&self, t: &Rational) -> Rational {
        for bump in &self.bumps {
            if bump.spec.contains_mod_one(t) {
                let overlap = bump.phi.inner_product(&orbit_state(t));
                return bump.weight.clone() * overlap.clone() * overlap / bump.norm_sq.clone();
            }
        }
        Rational::zero()
    }

    /// Exact Gram check: ⟨φᵢ, φⱼ⟩ = δᵢⱼ ‖φᵢ‖², i.e. the normalized system is
    /// orthonormal.
    pub fn gram_is_identity(&self) -> bool {
        for i in 0..self.bumps.len() {
            for j in 0..self.bumps.len() {
                let ip = self.bumps[i].phi.inner_product(&self.bumps[j].phi);
                let expected = if i == j {
                    self.bumps[i].norm_sq.clone()
                } else {
                    Rational::zero()
                };
                if ip != expected {
                    return false;
                }
            }
        }
        true
    }

    /// Exact hermiticity on a supplied test set: ⟨Aψ, φ⟩ = ⟨ψ, Aφ⟩.
    pub fn hermiticity_holds(&self, pairs: &[(PwLin, PwLin)]) -> bool {
        pairs.iter().all(|(psi, phi)| {
            self.apply(psi).inner_product(phi) == psi.inner_product(&self.apply(phi))
        })
    }

    /// Exact first-moment identities ∫ x φⱼ(x) dx = 0 over every support
    /// cell [t₀+k, t₀+6η+k], k = 0, 1, 2.
    pub fn moment_identities_hold(&self) -> bool {
        self.bumps.iter().all(|bump| {
            (0..=2).all(|k| {
                let a = bump.spec.t0.clone() + small::<Rational>(k);
                let b = a.clone() + small::<Rational>(6) * bump.spec.eta.clone();
                bump.phi
                    .first_moment(&a, &b)
                    .map(|m| m.is_zero())
                    .unwrap_or(false)
            })
        })
    }
}

/// Result of checking ⟨ψ(t), φ⟩ = 0 over a sample of admissible times.
#[derive(Clone, Debug)]
pub struct OrthogonalityCertificate {
    /// Accepted samples with their exact inner products (all should be zero).
    pub entries: Vec<(Rational, Rational)>,
    /// Samples rejected because t mod 1 falls inside the bump interval,
    /// where orthogonality is not claimed.
    pub rejected: Vec<(Rational, String)>,
}

impl OrthogonalityCertificate {
    pub fn all_zero(&self) -> bool {
        self.entries.iter().all(|(_, ip)| ip.is_zero())
    }

    pub fn violations(&self) -> Vec<&(Rational, Rational)> {
        self.entries
            .iter()
            .filter(|(_, ip)| !ip.is_zero())
            .collect()
    }
}

/// Check orthogonality of the orbit to `phi` at each sample time.
///
/// Samples with t mod 1 inside the bump interval are rejected with an
/// explanation rather than tested.
pub fn verify_orthogonality(
    phi: &PwLin,
    spec: &BumpSpec,
    samples: &[Rational],
) -> OrthogonalityCertificate {
    let mut entries = Vec::new();
    let mut rejected = Vec::new();
    for t in samples {
        if spec.contains_mod_one(t) {
            rejected.push((
                t.clone(),
                format!(
                    "t mod 1 lies inside ({}, {}); orthogonality is not claimed there",
                    rational_string(&spec.interval.0),
                    rational_string(&spec.interval.1)
                ),
            ));
        } else {
            entries.push((t.clone(), phi.inner_product(&orbit_state(t))));
        }
    }
    OrthogonalityCertificate { entries, rejected }
}

/// One row of the unboundedness table.
#[derive(Clone, Debug)]
pub struct UnboundednessRow {
    pub j: usize,
    pub t_resonance: Rational,
    pub expectation: Rational,
    /// A nearby admissible time with exact expectation zero, witnessing the
    /// discontinuity of t ↦ ⟨A⟩_ψ(t).
    pub witness_zero_t: Rational,
}

/// Table demonstrating that the expectation exceeds every row index and
/// collapses to zero arbitrarily nearby.
#[derive(Clone, Debug)]
pub struct UnboundednessCertificate {
    pub rows: Vec<UnboundednessRow>,
}

pub fn unboundedness_certificate(
    system: &CounterexampleSystem,
) -> Result<UnboundednessCertificate, CounterexampleError> {
    if system.len() < 2 {
        return Err(CounterexampleError::TooFewBumps {
            needed: 2,
            got: system.len(),
        });
    }
    let mut rows = Vec::with_capacity(system.len());
    for (idx, bump) in system.bumps().iter().enumerate() {
        let j = idx + 1;
        let expectation = system.expectation(&bump.t_resonance);
        // The shared endpoint of two adjacent open intervals lies in none of
        // them, and is closer to tⱼ than the interval is wide.
        let witness = bump.spec.interval.1.clone();
        debug_assert!((witness.clone() - bump.t_resonance.clone()).abs() < bump.spec.width());
        debug_assert!(system.expectation(&witness).is_zero());
        rows.push(UnboundednessRow {
            j,
            t_resonance: bump.t_resonance.clone(),
            expectation,
            witness_zero_t: witness,
        });
    }
    Ok(UnboundednessCertificate { rows })
}

/// JSON certificate emitted by the command-line harness. Rationals are
/// rendered as exact `p/q` strings.
#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub n: usize,
    pub rows: Vec<CertificateRow>,
    pub gram_ok: bool,
    pub hermitean_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateRow {
    pub j: usize,
    pub t_j: String,
    pub expectation: String,
    pub witness_zero_t: String,
}

/// Assemble the machine-checkable certificate: the unboundedness table plus
/// the Gram and hermiticity verdicts. Hermiticity is tested on `pairs`
/// seeded-random finite combinations of orbit states.
pub fn certificate(
    system: &CounterexampleSystem,
    rng: &mut impl Rng,
    pairs: usize,
) -> Result<Certificate, CounterexampleError> {
    let table = unboundedness_certificate(system)?;
    let test_pairs: Vec<(PwLin, PwLin)> = (0..pairs)
        .map(|_| {
            Ok((
                random_orbit_combination(rng)?,
                random_orbit_combination(rng)?,
            ))
        })
        .collect::<Result<_, CounterexampleError>>()?;
    Ok(Certificate {
        n: system.len(),
        rows: table
            .rows
            .iter()
            .map(|r| CertificateRow {
                j: r.j,
                t_j: rational_string(&r.t_resonance),
                expectation: rational_string(&r.expectation),
                witness_zero_t: rational_string(&r.witness_zero_t),
            })
            .collect(),
        gram_ok: system.gram_is_identity(),
        hermitean_ok: system.hermiticity_holds(&test_pairs),
    })
}

/// Random finite combination of orbit states with small rational shifts and
/// coefficients, for hermiticity and invariance tests.
pub fn random_orbit_combination(rng: &mut impl Rng) -> Result<PwLin, CounterexampleError> {
    let terms = rng.gen_range(1..=3usize);
    let mut coeffs = Vec::with_capacity(terms);
    let mut states = Vec::with_capacity(terms);
    for _ in 0..terms {
        let q = rng.gen_range(1..=32i64);
        let p = rng.gen_range(-q..=2 * q);
        let c_num = rng.gen_range(-8..=8i64);
        let c_den = rng.gen_range(1..=8i64);
        coeffs.push(rational(if c_num == 0 { 1 } else { c_num }, c_den));
        states.push(orbit_state(&rational(p, q)));
    }
    Ok(PwLin::combine(&coeffs, &states)?)
}

/// Random rational time with denominator at most `max_denom`, conditioned to
/// lie outside Iⱼ + ℤ for the given bump.
pub fn random_time_outside(rng: &mut impl Rng, spec: &BumpSpec, max_denom: i64) -> Rational {
    loop {
        let q = rng.gen_range(1..=max_denom);
        let p = rng.gen_range(-q..=3 * q);
        let t = rational(p, q);
        if !spec.contains_mod_one(&t) {
            return t;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rational as q;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn default_params() -> (Rational, Rational) {
        // Bump 1 of the default rule: I = (1/3, 1/2), t0 = 3/8, eta = 1/96.
        let spec = IntervalRule::default().bump_spec(1).unwrap();
        (spec.t0, spec.eta)
    }

    #[test]
    fn phi_tilde_peak_and_relations() {
        let (t0, eta) = default_params();
        let pt = build_phi_tilde(&t0, &eta).unwrap();
        assert_eq!(pt.evaluate(&(t0.clone() + eta.clone())), eta);
        assert_eq!(pt.evaluate(&t0), q(0, 1));

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let two_eta = eta.clone() * q(2, 1);
        for _ in 0..20 {
            let den = rng.gen_range(1..=997i64);
            let num = rng.gen_range(0..=den);
            // Random rational t in [t0, t0 + 2eta].
            let t = t0.clone() + two_eta.clone() * q(num, den);
            let here = pt.evaluate(&t);
            assert_eq!(pt.evaluate(&(t.clone() + q(1, 1))), q(-2, 1) * here.clone());
            assert_eq!(pt.evaluate(&(t + q(2, 1))), here);
        }
    }

    #[test]
    fn phi_tilde_support_is_three_cells() {
        let (t0, eta) = default_params();
        let pt = build_phi_tilde(&t0, &eta).unwrap();
        let hi = t0.clone() + q(2, 1) * eta.clone();
        let expected: Vec<(Rational, Rational)> = (0..=2)
            .map(|k| (t0.clone() + q(k, 1), hi.clone() + q(k, 1)))
            .collect();
        assert_eq!(pt.support(), expected);
        assert!(build_phi_tilde(&t0, &q(0, 1)).is_err());
        assert!(build_phi_tilde(&t0, &q(-1, 9)).is_err());
    }

    #[test]
    fn phi_equals_seven_term_expansion() {
        let (t0, eta) = default_params();
        let phi = build_phi(&t0, &eta).unwrap();
        let coeffs: Vec<Rational> = [1, -2, -1, 4, -1, -2, 1].iter().map(|&c| q(c, 1)).collect();
        let states: Vec<PwLin> = (0..7)
            .map(|k| orbit_state(&(t0.clone() + q(k, 1) * eta.clone())))
            .collect();
        assert_eq!(phi, PwLin::combine(&coeffs, &states).unwrap());
    }

    #[test]
    fn phi_norm_squared_is_24_eta_cubed() {
        // Per-cell closed form: the three cells carry 4η³, 16η³, 4η³.
        for (t0, eta) in [default_params(), (q(2, 5), q(1, 100))] {
            let phi = build_phi(&t0, &eta).unwrap();
            let eta3 = eta.clone() * eta.clone() * eta.clone();
            let per_cell = [q(4, 1), q(16, 1), q(4, 1)];
            let total: Rational = per_cell
                .iter()
                .map(|c| c.clone() * eta3.clone())
                .fold(q(0, 1), |a, b| a + b);
            assert_eq!(total, q(24, 1) * eta3.clone());
            assert_eq!(phi.inner_product(&phi), total);
        }
    }

    #[test]
    fn phi_moments_vanish_on_each_cell() {
        let (t0, eta) = default_params();
        let phi = build_phi(&t0, &eta).unwrap();
        for k in 0..=2 {
            let a = t0.clone() + q(k, 1);
            let b = a.clone() + q(6, 1) * eta.clone();
            assert_eq!(phi.first_moment(&a, &b).unwrap(), q(0, 1));
        }
    }

    #[test]
    fn phi_support_is_contained_in_wide_cells() {
        let (t0, eta) = default_params();
        let phi = build_phi(&t0, &eta).unwrap();
        let hi = t0.clone() + q(6, 1) * eta.clone();
        let expected: Vec<(Rational, Rational)> = (0..=2)
            .map(|k| (t0.clone() + q(k, 1), hi.clone() + q(k, 1)))
            .collect();
        assert_eq!(phi.support(), expected);
    }

    #[test]
    fn default_resonance_overlap_is_eta_cubed() {
        // From the tent autocorrelation C(τ) = 2/3 − τ² + τ³/2 (0 ≤ τ ≤ 1):
        // ⟨φ, ψ(t₀+η)⟩ = −2C(0) + 4C(2η) − C(3η) − 2C(4η) + C(5η) = η³.
        let (t0, eta) = default_params();
        let phi = build_phi(&t0, &eta).unwrap();
        let overlap = phi.inner_product(&orbit_state(&(t0.clone() + eta.clone())));
        let eta3 = eta.clone() * eta.clone() * eta.clone();
        assert_eq!(overlap, eta3);
    }

    #[test]
    fn orthogonality_outside_interval_mod_one() {
        let system = assemble_system(2, &IntervalRule::default()).unwrap();
        let bump = &system.bumps()[0];
        let right = bump.spec.interval.1.clone();
        let mut samples = vec![q(0, 1), right + q(1, 7)];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            samples.push(random_time_outside(&mut rng, &bump.spec, 1000));
        }
        // One inadmissible sample must be rejected, not tested.
        samples.push(bump.t_resonance.clone());
        let cert = verify_orthogonality(&bump.phi, &bump.spec, &samples);
        assert_eq!(cert.rejected.len(), 1);
        assert_eq!(cert.entries.len(), 102);
        assert!(cert.all_zero(), "violations: {:?}", cert.violations());
    }

    #[test]
    fn single_bump_system_beats_bound_one() {
        let system = assemble_system(1, &IntervalRule::default()).unwrap();
        let bump = &system.bumps()[0];
        // a₁ ⟨φ̂₁, ψ(t₁)⟩² = a₁ ⟨φ₁, ψ(t₁)⟩² / ‖φ₁‖² = 2 > 1.
        let overlap = bump.phi.inner_product(&orbit_state(&bump.t_resonance));
        let value = bump.weight.clone() * overlap.clone() * overlap / bump.norm_sq.clone();
        assert_eq!(value, q(2, 1));
    }

    #[test]
    fn gram_matrix_is_identity_for_eight_bumps() {
        let system = assemble_system(8, &IntervalRule::default()).unwrap();
        assert!(system.gram_is_identity());
    }

    #[test]
    fn default_intervals_are_pairwise_disjoint() {
        for j in 1..40 {
            let (l1, _r1) = IntervalRule::interval(j);
            let (_l2, r2) = IntervalRule::interval(j + 1);
            assert!(r2 <= l1);
        }
    }

    #[test]
    fn expectation_values_along_the_orbit() {
        let system = assemble_system(6, &IntervalRule::default()).unwrap();
        assert_eq!(system.expectation(&q(0, 1)), q(0, 1));
        for (idx, bump) in system.bumps().iter().enumerate() {
            let j = idx as i64 + 1;
            assert_eq!(system.expectation(&bump.t_resonance), q(j + 1, 1));
            assert!(system.expectation(&bump.t_resonance) > q(j, 1));
        }
    }

    #[test]
    fn expectation_matches_full_projector_sum() {
        // Independent oracle: sum over every bump without the interval
        // shortcut.
        let system = assemble_system(5, &IntervalRule::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut times: Vec<Rational> = (0..10)
            .map(|_| {
                let den = rng.gen_range(1..=500i64);
                q(rng.gen_range(-den..=3 * den), den)
            })
            .collect();
        times.extend(system.bumps().iter().map(|b| b.t_resonance.clone()));
        for t in &times {
            let psi = orbit_state(t);
            let brute: Rational = system
                .bumps()
                .iter()
                .map(|b| {
                    let ov = b.phi.inner_product(&psi);
                    b.weight.clone() * ov.clone() * ov / b.norm_sq.clone()
                })
                .fold(q(0, 1), |a, b| a + b);
            assert_eq!(system.expectation(t), brute);
        }
    }

    #[test]
    fn apply_is_zero_off_resonance_and_scales_eigenvectors() {
        let system = assemble_system(4, &IntervalRule::default()).unwrap();
        assert!(system.apply(&orbit_state(&q(0, 1))).is_zero());
        assert!(system.apply(&orbit_state(&q(3, 5))).is_zero());
        for bump in system.bumps() {
            let image = system.apply(&bump.phi);
            let scaled = PwLin::combine(
                std::slice::from_ref(&bump.weight),
                std::slice::from_ref(&bump.phi),
            )
            .unwrap();
            assert_eq!(image, scaled);
        }
    }

    #[test]
    fn hermiticity_on_random_orbit_combinations() {
        let system = assemble_system(5, &IntervalRule::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let pairs: Vec<(PwLin, PwLin)> = (0..20)
            .map(|_| {
                (
                    random_orbit_combination(&mut rng).unwrap(),
                    random_orbit_combination(&mut rng).unwrap(),
                )
            })
            .collect();
        assert!(system.hermiticity_holds(&pairs));
    }

    #[test]
    fn affine_pieces_are_annihilated() {
        let system = assemble_system(2, &IntervalRule::default()).unwrap();
        let bump = &system.bumps()[0];
        let (t0, eta) = (bump.spec.t0.clone(), bump.spec.eta.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..50 {
            let k = rng.gen_range(0..=2i64);
            let a = q(rng.gen_range(-20..=20), rng.gen_range(1..=10));
            let b = q(rng.gen_range(-20..=20), rng.gen_range(1..=10));
            // Affine between the cell-window endpoints, ramping to zero
            // outside; only the window intersects the bump's support cell.
            let lo = t0.clone() + q(k, 1);
            let hi = lo.clone() + q(6, 1) * eta.clone();
            let g = PwLin::from_points(vec![
                (lo.clone() - q(1, 64), q(0, 1)),
                (lo.clone(), a),
                (hi.clone(), b),
                (hi.clone() + q(1, 64), q(0, 1)),
            ])
            .unwrap();
            assert_eq!(g.inner_product(&bump.phi), q(0, 1));
        }
    }

    #[test]
    fn invariance_every_translate_is_accepted() {
        let system = assemble_system(3, &IntervalRule::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..20 {
            let den = rng.gen_range(1..=200i64);
            let t = q(rng.gen_range(-2 * den..=3 * den), den);
            // apply() is defined on the whole orbit; the image is again a
            // compactly supported piecewise-linear function.
            let _ = system.apply(&orbit_state(&t));
        }
    }

    #[test]
    fn unboundedness_table_shape() {
        let system = assemble_system(20, &IntervalRule::default()).unwrap();
        let table = unboundedness_certificate(&system).unwrap();
        assert_eq!(table.rows.len(), 20);
        let mut prev = q(0, 1);
        for row in &table.rows {
            assert_eq!(row.expectation, q(row.j as i64 + 1, 1));
            assert!(row.expectation > q(row.j as i64, 1));
            assert!(row.expectation > prev);
            prev = row.expectation.clone();
            let dist = (row.witness_zero_t.clone() - row.t_resonance.clone()).abs();
            assert!(dist < system.bumps()[row.j - 1].spec.width());
            assert_eq!(system.expectation(&row.witness_zero_t), q(0, 1));
        }
        let tiny = assemble_system(1, &IntervalRule::default()).unwrap();
        assert!(unboundedness_certificate(&tiny).is_err());
    }

    #[test]
    fn certificate_serializes_with_exact_strings() {
        let system = assemble_system(3, &IntervalRule::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cert = certificate(&system, &mut rng, 5).unwrap();
        assert!(cert.gram_ok && cert.hermitean_ok);
        let json = serde_json::to_string(&cert).unwrap();
        assert!(json.contains("\"expectation\":\"2/1\""));
        // Same seed, same bytes.
        let mut rng2 = ChaCha8Rng::seed_from_u64(5);
        let cert2 = certificate(&system, &mut rng2, 5).unwrap();
        assert_eq!(json, serde_json::to_string(&cert2).unwrap());
    }
}
