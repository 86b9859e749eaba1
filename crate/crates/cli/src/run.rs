//! Mode dispatch: execute a validated scenario, write its artifacts, return
//! the manifest.

use std::path::Path;

use anyhow::Context;
use num_traits::{Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ehrenfest_core::counterexample::{
    assemble_system, certificate, random_time_outside, unboundedness_certificate,
    verify_orthogonality, CounterexampleSystem, IntervalRule,
};
use ehrenfest_core::crosscheck::{
    aligned_grid, counterexample_crosscheck, default_times, describe_sample,
};
use ehrenfest_core::grid::{Grid, GridState, Spectral};
use ehrenfest_core::observable::Observable;
use ehrenfest_core::propagator::{evolve_and_report, EvolveOptions};
use ehrenfest_core::rat::rational;
use ehrenfest_core::report::{
    write_track_csv, ConvergenceSummary, CrosscheckRefinement, CrosscheckSampleJson,
    CrosscheckSummary, EvolveSummary,
};

use crate::config::{config_hash, Mode, ObservableKind, ScenarioConfig};
use crate::manifest::{CheckResult, RunManifest};

/// Execute a scenario and persist its artifacts under `out_dir`.
///
/// The process exit code contract is `manifest.passed`.
pub fn run(config: &ScenarioConfig, out_dir: &Path, quiet: bool) -> anyhow::Result<RunManifest> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    let mut manifest = RunManifest::new(config.mode.name(), config_hash(config), config.seed);
    match config.mode {
        Mode::Counterexample => run_counterexample(config, out_dir, quiet, &mut manifest)?,
        Mode::Evolve => run_evolve(config, out_dir, quiet, &mut manifest)?,
        Mode::Crosscheck => run_crosscheck(config, out_dir, quiet, &mut manifest)?,
    }
    let (manifest, path) = manifest.finalize(out_dir)?;
    if !quiet {
        println!(
            "{}: {} — manifest at {}",
            config.mode.name(),
            if manifest.passed {
                "all checks passed"
            } else {
                "CHECKS FAILED"
            },
            path.display()
        );
    }
    Ok(manifest)
}

fn build_system(n_bumps: usize, rule: &IntervalRule) -> anyhow::Result<CounterexampleSystem> {
    assemble_system(n_bumps, rule).context("assembling the bump system")
}

fn run_counterexample(
    config: &ScenarioConfig,
    out_dir: &Path,
    quiet: bool,
    manifest: &mut RunManifest,
) -> anyhow::Result<()> {
    let cfg = &config.counterexample;
    let rule = IntervalRule {
        t0_fraction: cfg.t0_fraction.clone(),
        eta_fraction: cfg.eta_fraction.clone(),
    };
    let system = build_system(cfg.n_bumps, &rule)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let cert = certificate(&system, &mut rng, cfg.hermiticity_pairs)
        .context("building the certificate")?;
    manifest.record_check(CheckResult::new(
        "gram_orthonormal",
        cert.gram_ok,
        format!("{0}×{0} Gram matrix diagonal with exact norms", cfg.n_bumps),
    ));
    manifest.record_check(CheckResult::new(
        "hermitean_on_test_set",
        cert.hermitean_ok,
        format!("{} random orbit-combination pairs", cfg.hermiticity_pairs),
    ));

    let moments_ok = system.moment_identities_hold();
    manifest.record_check(CheckResult::new(
        "first_moments_vanish",
        moments_ok,
        "exact ∫ x φ over every support cell".to_string(),
    ));

    let mut all_zero = true;
    let mut sampled = 0usize;
    for bump in system.bumps() {
        let samples: Vec<_> = (0..cfg.orthogonality_samples)
            .map(|_| random_time_outside(&mut rng, &bump.spec, 1000))
            .collect();
        let oc = verify_orthogonality(&bump.phi, &bump.spec, &samples);
        sampled += oc.entries.len();
        all_zero &= oc.all_zero();
    }
    manifest.record_check(CheckResult::new(
        "orbit_orthogonality",
        all_zero,
        format!("{sampled} admissible random times, all overlaps exactly zero"),
    ));

    let table = unboundedness_certificate(&system).context("unboundedness table")?;
    let rows_ok = table.rows.iter().all(|row| {
        row.expectation == rational(row.j as i64 + 1, 1)
            && row.expectation > rational(row.j as i64, 1)
    });
    manifest.record_check(CheckResult::new(
        "expectation_exceeds_index",
        rows_ok,
        "⟨A⟩ at each resonance is exactly j + 1 > j".to_string(),
    ));
    let witnesses_ok = table.rows.iter().all(|row| {
        let bump = &system.bumps()[row.j - 1];
        (row.witness_zero_t.clone() - row.t_resonance.clone()).abs() < bump.spec.width()
            && system.expectation(&row.witness_zero_t).is_zero()
    });
    manifest.record_check(CheckResult::new(
        "zero_witness_nearby",
        witnesses_ok,
        "a nearby admissible time with exact expectation zero per bump".to_string(),
    ));

    let cert_path = out_dir.join("certificate.json");
    let mut text = serde_json::to_string_pretty(&cert)?;
    text.push('\n');
    std::fs::write(&cert_path, text)?;
    manifest.record_output(&cert_path);

    if !quiet {
        println!("bump system with {} intervals:", cert.n);
        for row in &cert.rows {
            println!(
                "  j = {:>3}: t_j = {}, ⟨A⟩ = {}, zero witness at t = {}",
                row.j, row.t_j, row.expectation, row.witness_zero_t
            );
        }
    }
    Ok(())
}

fn observable_for(
    kind: &ObservableKind,
    grid: &Grid<f64>,
    config: &ScenarioConfig,
) -> Observable<f64> {
    match kind {
        ObservableKind::Position => Observable::Position,
        ObservableKind::Momentum => Observable::Momentum,
        ObservableKind::Kinetic => Observable::Kinetic,
        ObservableKind::Potential => Observable::potential(grid, &config.evolve.potential),
        ObservableKind::Hamiltonian => {
            Observable::hamiltonian(grid, &config.evolve.potential).expect("finite potential")
        }
    }
}

fn run_evolve(
    config: &ScenarioConfig,
    out_dir: &Path,
    quiet: bool,
    manifest: &mut RunManifest,
) -> anyhow::Result<()> {
    let cfg = &config.evolve;
    let grid = Grid::new(cfg.length, cfg.n).context("grid")?;
    let mut sp = Spectral::new(grid);
    let observables: Vec<Observable<f64>> = cfg
        .observables
        .iter()
        .map(|kind| observable_for(kind, &grid, config))
        .collect();
    let opts = EvolveOptions::new(cfg.t_final, cfg.dt, cfg.save_every, cfg.integrator);
    let initial = GridState::gaussian(&grid, cfg.x0, cfg.p0, cfg.sigma);
    let report = evolve_and_report(&mut sp, initial, &cfg.potential, &observables, &opts)
        .context("evolution run")?;

    let mut summary = EvolveSummary::from_report(
        &report,
        cfg.integrator.name(),
        cfg.potential.name(),
        cfg.n,
        cfg.length,
        cfg.dt,
        cfg.t_final,
        cfg.save_every,
    );

    if cfg.richardson {
        let refined_opts = EvolveOptions::new(
            cfg.t_final,
            cfg.dt / 2.0,
            cfg.save_every * 2,
            cfg.integrator,
        );
        let initial = GridState::gaussian(&grid, cfg.x0, cfg.p0, cfg.sigma);
        let refined = evolve_and_report(
            &mut sp,
            initial,
            &cfg.potential,
            &observables,
            &refined_opts,
        )
        .context("dt/2 refinement run")?;
        summary.convergence = Some(ConvergenceSummary {
            residual_coarse: report.tracks.iter().map(|t| t.max_abs_residual).collect(),
            residual_fine: refined.tracks.iter().map(|t| t.max_abs_residual).collect(),
            slopes: report
                .tracks
                .iter()
                .zip(&refined.tracks)
                .map(|(c, f)| (c.max_abs_residual / f.max_abs_residual).log2())
                .collect(),
        });
    }

    for track in &report.tracks {
        let path = out_dir.join(format!("{}.csv", track.name));
        write_track_csv(&path, &report, track).context("writing CSV")?;
        manifest.record_output(&path);
    }
    let summary_path = out_dir.join("summary.json");
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    std::fs::write(&summary_path, text)?;
    manifest.record_output(&summary_path);

    manifest.record_check(CheckResult::new(
        "norm_preserved",
        report.norm_drift <= 1e-6,
        format!("max |norm − 1| = {:.3e}", report.norm_drift),
    ));
    if let Some(bound) = cfg.residual_bound {
        let worst = report
            .tracks
            .iter()
            .map(|t| t.max_abs_residual)
            .fold(0.0f64, f64::max);
        manifest.record_check(CheckResult::new(
            "identity_residual",
            worst <= bound,
            format!("max |residual| = {worst:.3e} (bound {bound:e})"),
        ));
    }

    if !quiet {
        println!(
            "{} on {} potential: {} saved samples over T = {}",
            cfg.integrator.name(),
            cfg.potential.name(),
            report.times.len(),
            cfg.t_final
        );
        for track in &report.tracks {
            println!(
                "  {:<12} max |residual| = {:.3e}, sup ‖Aψ‖ = {:.6}",
                track.name, track.max_abs_residual, track.sup_norm
            );
        }
        println!(
            "  norm drift {:.3e}, energy drift {:.3e}",
            report.norm_drift, report.energy_drift
        );
    }
    Ok(())
}

fn run_crosscheck(
    config: &ScenarioConfig,
    out_dir: &Path,
    quiet: bool,
    manifest: &mut RunManifest,
) -> anyhow::Result<()> {
    let cfg = &config.crosscheck;
    let rule = IntervalRule {
        t0_fraction: cfg.t0_fraction.clone(),
        eta_fraction: cfg.eta_fraction.clone(),
    };
    let system = build_system(cfg.n_bumps, &rule)?;
    let grid = match (cfg.grid_n, cfg.grid_length) {
        (Some(n), Some(l)) => Grid::new(l, n).context("crosscheck grid")?,
        (Some(n), None) => Grid::new(10.0, n).context("crosscheck grid")?,
        _ => aligned_grid(&system, 0).context("aligned crosscheck grid")?,
    };
    let times = match &cfg.times {
        Some(t) => t.clone(),
        None => default_times(&system),
    };
    let report = counterexample_crosscheck(&system, &grid, &times)
        .context("crosscheck against the exact expectation")?;

    // Resonance samples must match the exact value within 5%.
    let resonance_ok = report
        .samples
        .iter()
        .all(|s| s.exact_f64 == 0.0 || s.abs_gap / s.exact_f64.abs().max(1.0) <= 0.05);
    manifest.record_check(CheckResult::new(
        "discrete_matches_exact",
        resonance_ok,
        format!(
            "{} samples, max |gap| = {:.3e}",
            report.samples.len(),
            report.max_abs_gap
        ),
    ));

    let refined = if cfg.refine {
        let fine_grid = match (cfg.grid_n, cfg.grid_length) {
            (Some(n), Some(l)) => Grid::new(l, n * 2).context("refined grid")?,
            (Some(n), None) => Grid::new(10.0, n * 2).context("refined grid")?,
            _ => aligned_grid(&system, 1).context("refined aligned grid")?,
        };
        let fine =
            counterexample_crosscheck(&system, &fine_grid, &times).context("refined crosscheck")?;
        let ratio = report.mean_abs_gap / fine.mean_abs_gap;
        manifest.record_check(CheckResult::new(
            "second_order_refinement",
            ratio >= 3.5,
            format!("mean gap ratio under h → h/2 is {ratio:.2}"),
        ));
        Some(CrosscheckRefinement {
            grid_n: fine.grid_n,
            mean_abs_gap: fine.mean_abs_gap,
            gap_ratio: ratio,
        })
    } else {
        None
    };

    let summary = CrosscheckSummary {
        n_bumps: cfg.n_bumps,
        grid_n: report.grid_n,
        grid_length: report.grid_length,
        samples: report
            .samples
            .iter()
            .map(|s| CrosscheckSampleJson {
                t: ehrenfest_core::rat::rational_string(&s.t),
                exact: ehrenfest_core::rat::rational_string(&s.exact),
                exact_f64: s.exact_f64,
                discrete: s.discrete,
                abs_gap: s.abs_gap,
            })
            .collect(),
        mean_abs_gap: report.mean_abs_gap,
        max_abs_gap: report.max_abs_gap,
        refined,
    };
    let path = out_dir.join("crosscheck.json");
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    std::fs::write(&path, text)?;
    manifest.record_output(&path);

    if !quiet {
        println!(
            "crosscheck on {} nodes (h = {:.3e}):",
            report.grid_n, report.spacing
        );
        for s in &report.samples {
            println!("  {}", describe_sample(s));
        }
    }
    Ok(())
}
