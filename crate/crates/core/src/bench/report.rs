use std::fs;
use std::path::Path;

use super::run::SuiteResult;
use super::stats::MapScatter;
use super::{BenchError, CaseResult};

pub const RESULTS_CSV: &str = "results.csv";
pub const SUMMARY_JSON: &str = "summary.json";
pub const SCATTER_CSV: &str = "ecs_scatter.csv";
pub const TRAJECTORY_DIR: &str = "trajectories";

/// Column order of `results.csv`; matches the field order of [`CaseResult`].
pub(crate) const HEADER: [&str; 19] = [
    "case_id",
    "family",
    "seed",
    "density",
    "clutter",
    "structure",
    "frontend",
    "fe_status",
    "fe_time_ms",
    "path_cost",
    "polytopes",
    "backend",
    "be_status",
    "be_time_ms",
    "traj_duration",
    "mean_sq_jerk",
    "collision",
    "status",
    "total_time_ms",
];

fn header() -> &'static [&'static str] {
    &HEADER
}

fn csv_err(e: csv::Error) -> BenchError {
    BenchError::Format(e.to_string())
}

fn rows_to_csv<T: serde::Serialize>(head: &[&str], rows: &[T]) -> Result<String, BenchError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(head).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| BenchError::Format(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// `results.csv` contents, header included even when empty.
pub fn results_csv_string(results: &[CaseResult]) -> Result<String, BenchError> {
    rows_to_csv(header(), results)
}

pub fn read_results_csv(path: &Path) -> Result<Vec<CaseResult>, BenchError> {
    let text = fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let head = r.headers().map_err(csv_err)?.clone();
    if head.iter().collect::<Vec<_>>() != header() {
        return Err(BenchError::Format(format!(
            "{}: unexpected header",
            path.display()
        )));
    }
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

fn write(path: &Path, contents: &str) -> Result<(), BenchError> {
    fs::write(path, contents).map_err(|e| BenchError::io(path, e))
}

/// Writes `results.csv` first, then the summary, scatter and per-run
/// trajectories; a failure part-way leaves the files written so far.
pub fn write_report(result: &SuiteResult, out: &Path) -> Result<(), BenchError> {
    fs::create_dir_all(out).map_err(|e| BenchError::io(out, e))?;
    write(
        &out.join(RESULTS_CSV),
        &results_csv_string(&result.results)?,
    )?;
    let summary = serde_json::to_string_pretty(&result.summary).expect("summary serializes");
    write(&out.join(SUMMARY_JSON), &summary)?;
    write(
        &out.join(SCATTER_CSV),
        &rows_to_csv::<MapScatter>(
            &["case_id", "d", "c", "s", "successes", "failures"],
            &result.summary.correlation.scatter,
        )?,
    )?;
    let dir = out.join(TRAJECTORY_DIR);
    fs::create_dir_all(&dir).map_err(|e| BenchError::io(&dir, e))?;
    for (key, traj) in &result.trajectories {
        let json = serde_json::to_string(traj).expect("trajectory serializes");
        write(&dir.join(format!("{key}.json")), &json)?;
    }
    Ok(())
}
