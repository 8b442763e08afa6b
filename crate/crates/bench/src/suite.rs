//! `bench`: repetitions × instances × solvers on a worker pool.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::generate::GenSpec;
use crate::options::SolveOptions;
use crate::run::{run, RunOutcome};
use crate::tables::write_trace_file;

pub const THREADS_ENV: &str = "DME_DC_THREADS";

#[derive(Clone, Debug)]
pub struct SolverEntry {
    /// Column label in the aggregate table; defaults to the solver name.
    pub label: Option<String>,
    pub options: SolveOptions,
}

#[derive(Clone, Debug)]
pub struct InstanceEntry {
    pub label: Option<String>,
    pub spec: GenSpec,
}

/// Splits an optional `label` key off a JSON object and parses the rest strictly.
fn labelled<'de, D, T>(de: D) -> Result<(Option<String>, T), D::Error>
where
    D: serde::Deserializer<'de>,
    T: serde::de::DeserializeOwned,
{
    use serde::de::Error;
    let mut map = serde_json::Map::<String, serde_json::Value>::deserialize(de)?;
    let label = match map.remove("label") {
        None => None,
        Some(serde_json::Value::String(s)) => Some(s),
        Some(other) => return Err(D::Error::custom(format!("`label` must be a string, got {other}"))),
    };
    let body = serde_json::from_value(serde_json::Value::Object(map)).map_err(D::Error::custom)?;
    Ok((label, body))
}

impl<'de> Deserialize<'de> for SolverEntry {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let (label, options) = labelled(de)?;
        Ok(Self { label, options })
    }
}

impl<'de> Deserialize<'de> for InstanceEntry {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let (label, spec) = labelled(de)?;
        Ok(Self { label, spec })
    }
}

/// A suite file. Each instance is regenerated once per seed, overriding its own seed.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Suite {
    pub seeds: Vec<u64>,
    pub instances: Vec<InstanceEntry>,
    pub solvers: Vec<SolverEntry>,
}

impl Suite {
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read suite {}: {e}", path.display())))?;
        let suite: Suite =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("suite {}: {e}", path.display())))?;
        suite.validate()?;
        Ok(suite)
    }

    fn validate(&self) -> CliResult<()> {
        if self.seeds.is_empty() || self.instances.is_empty() || self.solvers.is_empty() {
            return Err(CliError::Config("suite needs at least one seed, instance and solver".into()));
        }
        for s in &self.solvers {
            s.options.validate()?;
            if s.options.solver.is_none() {
                return Err(CliError::Config("every suite solver entry needs `solver`".into()));
            }
        }
        Ok(())
    }
}

fn solver_label(e: &SolverEntry) -> String {
    e.label.clone().unwrap_or_else(|| e.options.solver.map_or("?", |s| s.name()).to_owned())
}

fn instance_label(e: &InstanceEntry) -> String {
    e.label.clone().unwrap_or_else(|| e.spec.label())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AggregateRow {
    pub instance: String,
    pub solver: String,
    pub runs: usize,
    pub failures: usize,
    pub avg_iters: f64,
    pub avg_wall_ms: f64,
    pub avg_final_objective: f64,
    /// Successful runs that met the stopping rule.
    pub converged: usize,
}

pub fn pool_size() -> usize {
    let hw = std::thread::available_parallelism().map_or(1, |n| n.get());
    match std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        Some(cap) if cap > 0 => cap.min(hw),
        _ => hw,
    }
}

struct Job {
    cell: usize,
    instance: usize,
    solver: usize,
    seed: u64,
}

/// Runs every cell and aggregates per (instance, solver). A run that fails,
/// including an incompatible pairing, counts toward `failures` and the suite continues.
pub fn run_suite(suite: &Suite, threads: usize, trace_dir: Option<&Path>) -> CliResult<Vec<AggregateRow>> {
    if let Some(dir) = trace_dir {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
    }
    let n_solvers = suite.solvers.len();
    let mut jobs = Vec::new();
    for (i, _) in suite.instances.iter().enumerate() {
        for (j, _) in suite.solvers.iter().enumerate() {
            for &seed in &suite.seeds {
                jobs.push(Job { cell: i * n_solvers + j, instance: i, solver: j, seed });
            }
        }
    }
    let results: Mutex<Vec<Option<CliResult<RunOutcome>>>> = Mutex::new(vec![None; jobs.len()]);
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..threads.clamp(1, jobs.len().max(1)) {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                let Some(job) = jobs.get(idx) else { break };
                let out = run_job(suite, job, trace_dir);
                results.lock().unwrap_or_else(|e| e.into_inner())[idx] = Some(out);
            });
        }
    });
    let results = results.into_inner().unwrap_or_else(|e| e.into_inner());

    let mut rows: Vec<AggregateRow> = Vec::with_capacity(suite.instances.len() * n_solvers);
    for inst in &suite.instances {
        for solver in &suite.solvers {
            rows.push(AggregateRow {
                instance: instance_label(inst),
                solver: solver_label(solver),
                runs: 0,
                failures: 0,
                avg_iters: 0.0,
                avg_wall_ms: 0.0,
                avg_final_objective: 0.0,
                converged: 0,
            });
        }
    }
    for (job, res) in jobs.iter().zip(results) {
        let row = &mut rows[job.cell];
        row.runs += 1;
        match res {
            Some(Ok(out)) if out.error.is_none() => {
                row.avg_iters += out.summary.iters as f64;
                row.avg_wall_ms += out.summary.wall_ms;
                row.avg_final_objective += out.summary.final_objective;
                row.converged += usize::from(out.summary.status == "converged");
            }
            Some(Ok(out)) => {
                eprintln!(
                    "{} / {} seed {}: {}",
                    row.instance,
                    row.solver,
                    job.seed,
                    out.summary.error.unwrap_or_default()
                );
                row.failures += 1;
            }
            Some(Err(e)) => {
                eprintln!("{} / {} seed {}: {e}", row.instance, row.solver, job.seed);
                row.failures += 1;
            }
            None => row.failures += 1,
        }
    }
    for row in &mut rows {
        let ok = row.runs - row.failures;
        if ok == 0 {
            row.avg_iters = f64::NAN;
            row.avg_wall_ms = f64::NAN;
            row.avg_final_objective = f64::NAN;
        } else {
            row.avg_iters /= ok as f64;
            row.avg_wall_ms /= ok as f64;
            row.avg_final_objective /= ok as f64;
        }
    }
    Ok(rows)
}

fn run_job(suite: &Suite, job: &Job, trace_dir: Option<&Path>) -> CliResult<RunOutcome> {
    let inst = &suite.instances[job.instance];
    let solver = &suite.solvers[job.solver];
    let mut spec = inst.spec.clone();
    spec.seed = job.seed;
    let file = spec.build()?;
    let out = run(&file, &solver.options)?;
    if let Some(dir) = trace_dir {
        let name = format!("{}__{}__seed{}.csv", instance_label(inst), solver_label(solver), job.seed);
        write_trace_file(&trace_path(dir, &name), &out.rows)?;
    }
    Ok(out)
}

fn trace_path(dir: &Path, name: &str) -> PathBuf {
    let clean: String =
        name.chars().map(|c| if c.is_ascii_alphanumeric() || "._-".contains(c) { c } else { '_' }).collect();
    dir.join(clean)
}

pub fn write_aggregate<W: std::io::Write>(mut w: csv::Writer<W>, rows: &[AggregateRow]) -> CliResult<()> {
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
