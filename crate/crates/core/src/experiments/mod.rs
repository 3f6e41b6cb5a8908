//! Parameter sweeps, CSV output, curve gaps and the validation suite.

mod gap;
mod spec;
mod validate;

pub use gap::{decade_levels, measure_db_gap, Curve};
pub use spec::{
    parse_list, ExperimentId, ExperimentSpec, SchemeChoice, SweepAxis, FIG2, FIG3, FIG4, FIG5,
};
pub use validate::{
    mc_grid, validate_all, validate_with, BerReference, CheckOutcome, ValidationReport, MC_GRID,
};

use std::fs::File;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::analytics;
use crate::error::Result;
use crate::model::{Misalignment, SweepResult};
use crate::simulation::{estimate_ber, RngSeed};

/// Column order of every CSV this crate writes.
pub const CSV_HEADER: &str = "experiment,sir_db,snr_db,delta,scheme,n_block,trials,analytic_ber,sim_ber,sim_stderr,esinr_linear,avg_esinr_linear";

/// One row to compute: sweep value, scheme, and offset for conventional rows.
#[derive(Debug, Clone, Copy)]
struct Job {
    value: f64,
    scheme: SchemeChoice,
    delta: Option<f64>,
}

fn jobs(spec: &ExperimentSpec) -> Vec<Job> {
    let mut out = Vec::new();
    for &value in &spec.values {
        for &scheme in &spec.schemes {
            match scheme {
                SchemeChoice::Conventional => out.extend(spec.deltas.iter().map(|&d| Job {
                    value,
                    scheme,
                    delta: Some(d),
                })),
                _ => out.push(Job {
                    value,
                    scheme,
                    delta: None,
                }),
            }
        }
    }
    out
}

fn run_job(spec: &ExperimentSpec, job: Job, seed: RngSeed) -> Result<SweepResult> {
    let params = spec.params_at(job.value)?;
    let (sir_db, snr_db) = spec.point(job.value);
    let (analytic_ber, esinr_linear, avg_esinr_linear, kind) = match job.delta {
        Some(d) => {
            let d = Misalignment::new(d)?;
            (
                analytics::ber_block(params, d, spec.n)?,
                Some(analytics::esinr(params, d)?),
                None,
                job.scheme.kind(d, spec.k),
            )
        }
        None => (
            analytics::avg_ber(params)?,
            None,
            Some(analytics::avg_esinr_closed(params)?),
            job.scheme.kind(Misalignment::ALIGNED, spec.k),
        ),
    };
    let sim = if spec.blocks > 0 {
        Some(estimate_ber(params, kind, spec.blocks, spec.n, seed)?)
    } else {
        None
    };
    Ok(SweepResult {
        experiment: spec.id.as_str().to_owned(),
        sir_db,
        snr_db,
        delta: job.delta,
        scheme: job.scheme.label().to_owned(),
        n_block: spec.n,
        trials: spec.blocks,
        analytic_ber: Some(analytic_ber),
        sim_ber: sim.map(|s| s.ber),
        sim_stderr: sim.map(|s| s.std_err),
        esinr_linear,
        avg_esinr_linear,
    })
}

/// Runs every row of the sweep in order: sweep values outermost, then
/// schemes, then offsets. Row `i` simulates under a seed derived from
/// `(spec.seed, i)`, so the output does not depend on scheduling.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<SweepResult>> {
    spec.validate()?;
    let master = RngSeed(spec.seed);
    jobs(spec)
        .into_par_iter()
        .enumerate()
        .map(|(i, job)| run_job(spec, job, master.derive(i as u64)))
        .collect()
}

pub fn write_csv<W: Write>(writer: W, rows: &[SweepResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    if rows.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `rows` to `path`, deleting the file again if anything fails.
pub fn write_csv_file(path: &Path, rows: &[SweepResult]) -> Result<()> {
    let result = File::create(path)
        .map_err(Into::into)
        .and_then(|f| write_csv(f, rows));
    if result.is_err() {
        let _ = std::fs::remove_file(path);
    }
    result
}

/// Runs the sweep, then writes it. A failed run leaves no file behind.
pub fn run_to_file(spec: &ExperimentSpec, path: &Path) -> Result<Vec<SweepResult>> {
    let rows = run_experiment(spec)?;
    write_csv_file(path, &rows)?;
    Ok(rows)
}

pub fn read_csv(path: &Path) -> Result<Vec<SweepResult>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Into::into)).collect()
}
