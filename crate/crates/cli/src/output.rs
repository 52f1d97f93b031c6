//! Trajectory CSV files and their JSON metadata sidecars.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::error::CliError;
use crate::pipeline::{ExperimentReport, OrderRun};

/// File stem for one order of an experiment.
pub fn stem(name: &str, k: usize) -> String {
    format!("{name}_K{k}")
}

/// Columns appended after the trajectory's own: `fidelity`, then `exact_<name>`.
pub fn extra_columns(run: &OrderRun) -> Vec<(String, Vec<f64>)> {
    let mut extra = Vec::new();
    if let Some(f) = &run.fidelity {
        extra.push(("fidelity".to_string(), f.clone()));
    }
    for (name, series) in &run.exact_observables {
        extra.push((format!("exact_{name}"), series.clone()));
    }
    extra
}

pub fn write_csv(run: &OrderRun, include_alphas: bool, path: &Path) -> Result<(), CliError> {
    let out = BufWriter::new(File::create(path)?);
    run.trajectory
        .write_csv(out, include_alphas, &extra_columns(run))?;
    Ok(())
}

pub fn metadata(report: &ExperimentReport, run: &OrderRun) -> serde_json::Value {
    let last = |v: &[f64]| v.last().copied();
    json!({
        "name": report.config.name,
        "k": run.k,
        "num_qubits": report.num_qubits,
        "backend": report.backend,
        "basis_size": run.basis_size,
        "level_sizes": run.level_sizes,
        "closed_at": run.closed_at,
        "distinct_strings": run.distinct_strings,
        "rows": run.trajectory.len(),
        "final_norm": last(&run.trajectory.norm),
        "final_energy": last(&run.trajectory.energy),
        "final_fidelity": run.fidelity.as_deref().and_then(last),
        "min_fidelity": run.min_fidelity(),
        "ground_energy": report.ground_energy,
        "config": report.config,
    })
}

/// Writes `<stem>.csv` and `<stem>.json` for every order; returns the paths written.
pub fn write_outputs(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for run in &report.runs {
        let stem = stem(&report.config.name, run.k);
        let csv = dir.join(format!("{stem}.csv"));
        write_csv(run, report.config.output.include_alphas, &csv)?;
        let meta = dir.join(format!("{stem}.json"));
        let text =
            serde_json::to_string_pretty(&metadata(report, run)).expect("metadata serializes");
        std::fs::write(&meta, text + "\n")?;
        written.push(csv);
        written.push(meta);
    }
    Ok(written)
}
