//! Persistence of run artifacts: per-observable CSV time series and JSON
//! summary structures.

use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use crate::propagator::{EhrenfestReport, ObservableTrack};
use crate::scalar::RealScalar;

/// Write one observable's time series as CSV.
///
/// Header: `t,expectation,lhs,rhs,residual,norm,energy,sup_A_norm_running`;
/// floating point is printed with 17 significant digits so the file is
/// bit-faithful to the run.
pub fn write_track_csv<T: RealScalar>(
    path: &Path,
    report: &EhrenfestReport<T>,
    track: &ObservableTrack<T>,
) -> io::Result<()> {
    let mut out = io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        out,
        "t,expectation,lhs,rhs,residual,norm,energy,sup_A_norm_running"
    )?;
    for i in 0..report.times.len() {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            report.times[i],
            track.expectation[i],
            track.lhs[i],
            track.rhs[i],
            track.residual[i],
            report.norm[i],
            report.energy[i],
            track.sup_norm_running[i],
        )?;
    }
    out.flush()
}

/// Per-observable scalars for the JSON summary.
#[derive(Clone, Debug, Serialize)]
pub struct TrackSummary {
    pub name: String,
    pub max_abs_residual: f64,
    pub sup_a_norm: f64,
    pub final_expectation: f64,
}

/// Optional dt-refinement study attached to a run summary.
#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceSummary {
    /// max residual at dt and at dt/2, per observable.
    pub residual_coarse: Vec<f64>,
    pub residual_fine: Vec<f64>,
    /// log2 of the residual ratio, per observable (2.0 for a second-order
    /// scheme).
    pub slopes: Vec<f64>,
}

/// JSON summary of one evolution run.
#[derive(Clone, Debug, Serialize)]
pub struct EvolveSummary {
    pub integrator: String,
    pub potential: String,
    pub grid_n: usize,
    pub grid_length: f64,
    pub dt: f64,
    pub t_final: f64,
    pub save_every: usize,
    pub norm_drift: f64,
    pub energy_drift: f64,
    pub observables: Vec<TrackSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceSummary>,
}

impl EvolveSummary {
    #[allow(clippy::too_many_arguments)]
    pub fn from_report(
        report: &EhrenfestReport<f64>,
        integrator: &str,
        potential: &str,
        grid_n: usize,
        grid_length: f64,
        dt: f64,
        t_final: f64,
        save_every: usize,
    ) -> Self {
        Self {
            integrator: integrator.to_string(),
            potential: potential.to_string(),
            grid_n,
            grid_length,
            dt,
            t_final,
            save_every,
            norm_drift: report.norm_drift,
            energy_drift: report.energy_drift,
            observables: report
                .tracks
                .iter()
                .map(|t| TrackSummary {
                    name: t.name.clone(),
                    max_abs_residual: t.max_abs_residual,
                    sup_a_norm: t.sup_norm,
                    final_expectation: *t.expectation.last().unwrap_or(&f64::NAN),
                })
                .collect(),
            convergence: None,
        }
    }
}

/// JSON report of a crosscheck run.
#[derive(Clone, Debug, Serialize)]
pub struct CrosscheckSummary {
    pub n_bumps: usize,
    pub grid_n: usize,
    pub grid_length: f64,
    pub samples: Vec<CrosscheckSampleJson>,
    pub mean_abs_gap: f64,
    pub max_abs_gap: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refined: Option<CrosscheckRefinement>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CrosscheckSampleJson {
    pub t: String,
    pub exact: String,
    pub exact_f64: f64,
    pub discrete: f64,
    pub abs_gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CrosscheckRefinement {
    pub grid_n: usize,
    pub mean_abs_gap: f64,
    /// Coarse-to-fine mean gap ratio; ~4 for the second-order quadrature.
    pub gap_ratio: f64,
}
