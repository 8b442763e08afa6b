//! `report`: merges traces into one long-format table.

use std::collections::BTreeSet;
use std::path::Path;

use crate::error::{CliError, CliResult};
use crate::tables::{melt, read_report_input, LongRow, ReportInput, METRICS};

/// Run id for a trace file: its stem, suffixed with `#2`, `#3`, … on repeats.
fn unique_id(stem: &str, taken: &mut BTreeSet<String>) -> String {
    let mut id = stem.to_owned();
    let mut n = 2;
    while taken.contains(&id) {
        id = format!("{stem}#{n}");
        n += 1;
    }
    taken.insert(id.clone());
    id
}

/// Checks a metric filter and expands an empty one to every metric.
pub fn resolve_metrics(filter: &[String]) -> CliResult<Vec<String>> {
    if filter.is_empty() {
        return Ok(METRICS.iter().map(|m| (*m).to_owned()).collect());
    }
    for m in filter {
        if !METRICS.contains(&m.as_str()) {
            return Err(CliError::Config(format!("unknown metric `{m}`; expected one of {}", METRICS.join(", "))));
        }
    }
    Ok(filter.to_vec())
}

/// Long-format rows from trace or long-format files. Long-format inputs keep
/// their run ids, so feeding the output back in reproduces it.
pub fn build_report(inputs: &[impl AsRef<Path>], metrics: &[String]) -> CliResult<Vec<LongRow>> {
    if inputs.is_empty() {
        return Err(CliError::Config("report needs at least one input file".into()));
    }
    let metrics = resolve_metrics(metrics)?;
    let mut taken = BTreeSet::new();
    let mut out = Vec::new();
    for path in inputs {
        let path = path.as_ref();
        let label = path.display().to_string();
        let file = std::fs::File::open(path).map_err(|e| CliError::Config(format!("cannot read {label}: {e}")))?;
        match read_report_input(std::io::BufReader::new(file), &label)? {
            ReportInput::Trace(rows) => {
                let stem = path.file_stem().map_or_else(|| "run".to_owned(), |s| s.to_string_lossy().into_owned());
                out.extend(melt(&unique_id(&stem, &mut taken), &rows, &metrics));
            }
            ReportInput::Long(rows) => {
                let ids: BTreeSet<String> = rows.iter().map(|r| r.run_id.clone()).collect();
                if let Some(dup) = ids.iter().find(|id| taken.contains(*id)) {
                    return Err(CliError::Config(format!("run id `{dup}` in {label} is already taken")));
                }
                taken.extend(ids);
                out.extend(rows.into_iter().filter(|r| metrics.contains(&r.metric)));
            }
        }
    }
    Ok(out)
}
