//! Numerical shadow of the exact counterexample: sample the orbit state and
//! the bumps onto a grid, evaluate the discrete quadratic form of the
//! projector sum, and compare against the exact rational value.
//!
//! The discrete expectation uses plain node quadrature throughout (including
//! the bump normalization), so the gap against the exact value is the
//! trapezoid error of piecewise-quadratic integrands with kinks — second
//! order in the spacing. On an arbitrary grid the error constant depends on
//! where the kinks fall inside the cells and fluctuates between resolutions;
//! [`aligned_grid`] picks a spacing commensurate with every breakpoint so
//! each kink sits on a node, the error reduces to the smooth −h²/12 ∫(fg)″
//! term and halving h divides the gap by exactly four.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::counterexample::CounterexampleSystem;
use crate::grid::Grid;
use crate::rat::{rational_string, to_f64};
use crate::{PwLin, Rational};

#[derive(Debug, Error)]
pub enum CrosscheckError {
    #[error("grid must cover [-1, 4]; a centered box of length {0} does not")]
    BoxTooSmall(f64),
    #[error("grid too coarse: spacing {h:e} leaves fewer than 8 nodes across the finest bump scale {eta_min:e}; need at least {needed_n} nodes")]
    GridTooCoarse {
        h: f64,
        eta_min: f64,
        needed_n: usize,
    },
    #[error("aligned grid would need {0} nodes; use fewer bumps or an explicit grid")]
    AlignmentTooFine(u64),
}

/// Grid whose nodes hit every breakpoint of the system exactly.
///
/// The spacing is 1/(D·2^`extra_refine`) with D the least common multiple of
/// all bump breakpoint denominators, refined until at least 8 nodes span the
/// finest η; the node count is the smallest power of two covering [−1, 4]
/// with margin. Feasible for small systems only — D grows quickly with the
/// bump count.
pub fn aligned_grid(
    system: &CounterexampleSystem,
    extra_refine: u32,
) -> Result<Grid<f64>, CrosscheckError> {
    let mut denom = BigInt::from(1);
    for bump in system.bumps() {
        denom = denom.lcm(bump.spec.t0.denom());
        denom = denom.lcm(bump.spec.eta.denom());
        denom = denom.lcm(bump.spec.interval.1.denom());
    }
    let eta_min = system
        .bumps()
        .iter()
        .map(|b| to_f64(&b.spec.eta))
        .fold(f64::INFINITY, f64::min);
    let mut d = denom
        .to_u64()
        .ok_or(CrosscheckError::AlignmentTooFine(u64::MAX))?;
    // Refine until h = 1/d puts at least 8 nodes across eta_min, then apply
    // the requested extra refinement on top.
    while (d as f64) * eta_min < 8.0 {
        d = d
            .checked_mul(2)
            .ok_or(CrosscheckError::AlignmentTooFine(u64::MAX))?;
    }
    d = d
        .checked_shl(extra_refine)
        .ok_or(CrosscheckError::AlignmentTooFine(u64::MAX))?;
    let needed = (8.5 * d as f64).ceil() as u64;
    let n = needed.next_power_of_two();
    if n > 1 << 22 {
        return Err(CrosscheckError::AlignmentTooFine(n));
    }
    let length = n as f64 / d as f64;
    Ok(Grid::new(length, n as usize).expect("power-of-two node count"))
}

/// Evaluate an exact function on the grid nodes in floating point.
pub fn sample_onto_grid(f: &PwLin, grid: &Grid<f64>) -> Vec<f64> {
    let pts: Vec<(f64, f64)> = f
        .points()
        .iter()
        .map(|(x, v)| (to_f64(x), to_f64(v)))
        .collect();
    let eval = |x: f64| -> f64 {
        if pts.is_empty() || x < pts[0].0 || x > pts[pts.len() - 1].0 {
            return 0.0;
        }
        let i = pts.partition_point(|&(bx, _)| bx <= x);
        if i == pts.len() {
            return pts[i - 1].1;
        }
        let (x0, v0) = pts[i - 1];
        let (x1, v1) = pts[i];
        v0 + (v1 - v0) * (x - x0) / (x1 - x0)
    };
    (0..grid.len()).map(|k| eval(grid.node(k))).collect()
}

/// One compared sample.
#[derive(Clone, Debug)]
pub struct CrosscheckSample {
    pub t: Rational,
    pub exact: Rational,
    pub exact_f64: f64,
    pub discrete: f64,
    pub abs_gap: f64,
}

/// Comparison of exact and discrete expectations over a list of times.
#[derive(Clone, Debug)]
pub struct CrosscheckReport {
    pub grid_n: usize,
    pub grid_length: f64,
    pub spacing: f64,
    pub samples: Vec<CrosscheckSample>,
    pub mean_abs_gap: f64,
    pub max_abs_gap: f64,
}

/// Sample the system and the orbit onto `grid` and compare expectations at
/// each time.
///
/// Refuses grids that do not cover [−1, 4] (the support range of the three
/// tent cells over one period of interest) or that put fewer than 8 nodes
/// across the finest bump scale η.
pub fn counterexample_crosscheck(
    system: &CounterexampleSystem,
    grid: &Grid<f64>,
    times: &[Rational],
) -> Result<CrosscheckReport, CrosscheckError> {
    if !grid.covers(-1.0, 4.0) {
        return Err(CrosscheckError::BoxTooSmall(grid.length()));
    }
    let h = grid.spacing();
    let eta_min = system
        .bumps()
        .iter()
        .map(|b| to_f64(&b.spec.eta))
        .fold(f64::INFINITY, f64::min);
    if h > eta_min / 8.0 {
        let needed_n = ((grid.length() * 8.0 / eta_min).ceil() as usize).next_power_of_two();
        return Err(CrosscheckError::GridTooCoarse {
            h,
            eta_min,
            needed_n,
        });
    }

    // Per-bump sampled data: (values, weight, discrete norm²).
    let sampled: Vec<(Vec<f64>, f64, f64)> = system
        .bumps()
        .iter()
        .map(|b| {
            let phi = sample_onto_grid(&b.phi, grid);
            let norm_sq: f64 = phi.iter().map(|v| v * v).sum::<f64>() * h;
            (phi, to_f64(&b.weight), norm_sq)
        })
        .collect();

    let mut samples = Vec::with_capacity(times.len());
    for t in times {
        let psi = sample_onto_grid(&crate::counterexample::orbit_state(t), grid);
        let mut discrete = 0.0;
        for (phi, weight, norm_sq) in &sampled {
            let overlap: f64 = phi.iter().zip(&psi).map(|(a, b)| a * b).sum::<f64>() * h;
            discrete += weight * overlap * overlap / norm_sq;
        }
        let exact = system.expectation(t);
        let exact_f64 = to_f64(&exact);
        samples.push(CrosscheckSample {
            t: t.clone(),
            exact,
            exact_f64,
            discrete,
            abs_gap: (discrete - exact_f64).abs(),
        });
    }
    let mean_abs_gap = samples.iter().map(|s| s.abs_gap).sum::<f64>() / samples.len().max(1) as f64;
    let max_abs_gap = samples.iter().map(|s| s.abs_gap).fold(0.0, f64::max);
    Ok(CrosscheckReport {
        grid_n: grid.len(),
        grid_length: grid.length(),
        spacing: h,
        samples,
        mean_abs_gap,
        max_abs_gap,
    })
}

/// Default comparison times for a system: every resonance time plus the
/// matching zero witnesses (interval right endpoints).
pub fn default_times(system: &CounterexampleSystem) -> Vec<Rational> {
    let mut times = Vec::new();
    for bump in system.bumps() {
        times.push(bump.t_resonance.clone());
        times.push(bump.spec.interval.1.clone());
    }
    times
}

/// Short human-readable description of a sample, used by the CLI output.
pub fn describe_sample(s: &CrosscheckSample) -> String {
    format!(
        "t = {}: exact {} ({:.6e}), discrete {:.6e}, gap {:.3e}",
        rational_string(&s.t),
        rational_string(&s.exact),
        s.exact_f64,
        s.discrete,
        s.abs_gap
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counterexample::{assemble_system, IntervalRule};
    use crate::rat::rational as q;

    #[test]
    fn refuses_small_or_coarse_grids() {
        let system = assemble_system(3, &IntervalRule::default()).unwrap();
        let small_box = Grid::new(4.0f64, 1024).unwrap();
        assert!(matches!(
            counterexample_crosscheck(&system, &small_box, &[q(1, 3)]),
            Err(CrosscheckError::BoxTooSmall(_))
        ));
        let coarse = Grid::new(10.0f64, 1024).unwrap();
        let err = counterexample_crosscheck(&system, &coarse, &[q(1, 3)]);
        match err {
            Err(CrosscheckError::GridTooCoarse { needed_n, .. }) => {
                assert!(needed_n > 1024);
            }
            other => panic!("expected GridTooCoarse, got {other:?}"),
        }
    }

    #[test]
    fn discrete_expectation_tracks_exact_values() {
        let system = assemble_system(2, &IntervalRule::default()).unwrap();
        let grid = aligned_grid(&system, 0).unwrap();
        let report = counterexample_crosscheck(&system, &grid, &default_times(&system)).unwrap();
        for s in &report.samples {
            let scale = s.exact_f64.abs().max(1.0);
            assert!(
                s.abs_gap / scale < 0.05,
                "sample off by more than 5%: {}",
                describe_sample(s)
            );
        }
    }

    #[test]
    fn gap_shrinks_second_order_under_refinement() {
        let system = assemble_system(2, &IntervalRule::default()).unwrap();
        let times = default_times(&system);
        let coarse = aligned_grid(&system, 0).unwrap();
        let fine = aligned_grid(&system, 1).unwrap();
        assert!((coarse.spacing() / fine.spacing() - 2.0).abs() < 1e-12);
        let r1 = counterexample_crosscheck(&system, &coarse, &times).unwrap();
        let r2 = counterexample_crosscheck(&system, &fine, &times).unwrap();
        let ratio = r1.mean_abs_gap / r2.mean_abs_gap;
        assert!(ratio >= 3.5, "refinement ratio {ratio}");
    }
}
