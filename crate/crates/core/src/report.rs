//! Run artifacts: results table, per-method traces and predictions, and the
//! SVG charts rendered from them.
//!
//! Layout of a run directory:
//!
//! ```text
//! <run>/results.csv
//! <run>/results.md
//! <run>/timings.csv
//! <run>/failures.csv            (only when a method failed)
//! <run>/traces_z.svg
//! <run>/traces_zz.svg
//! <run>/<config_id>/trace.csv
//! <run>/<config_id>/predictions.csv
//! <run>/<config_id>/scatter.svg
//! <run>/<config_id>/parameters.csv  (QNN methods only)
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::optimizer::TracePoint;
use crate::svg::{scatter_svg, trace_svg};

pub const RESULTS_HEADER: [&str; 7] = [
    "config_id",
    "feature_map",
    "ansatz",
    "r2",
    "mae",
    "wall_time_s",
    "seed",
];

/// Reference R2 and MAE (kW) per method id, used for the delta columns of
/// `results.md`.
pub const REFERENCE_TABLE: [(&str, f64, f64); 15] = [
    ("QNN-1", 0.92, 136.50),
    ("QNN-2", 0.93, 123.81),
    ("QNN-3", 0.93, 119.71),
    ("QNN-4", 0.92, 134.59),
    ("QNN-5", 0.93, 119.05),
    ("QNN-6", 0.92, 134.45),
    ("QNN-7", 0.35, 446.02),
    ("QNN-8", 0.34, 462.55),
    ("QNN-9", 0.29, 478.16),
    ("QNN-10", 0.33, 443.65),
    ("QNN-11", 0.34, 462.29),
    ("QNN-12", 0.34, 440.12),
    ("dt", 0.91, 66.38),
    ("knn", 0.92, 103.30),
    ("ols", 0.88, 162.76),
];

pub fn reference(config_id: &str) -> Option<(f64, f64)> {
    REFERENCE_TABLE
        .iter()
        .find(|(id, _, _)| *id == config_id)
        .map(|&(_, r2, mae)| (r2, mae))
}

/// Feature-map column value for classical baselines.
pub const CLASSICAL_FEATURE_MAP: &str = "none";

#[derive(Clone, Debug, PartialEq)]
pub struct MethodResult {
    /// `QNN-1`..`QNN-12`, `dt`, `knn` or `ols`.
    pub config_id: String,
    /// `Z`, `ZZ`, or [`CLASSICAL_FEATURE_MAP`].
    pub feature_map: String,
    /// Entanglement strategy for QNNs, model name for baselines.
    pub ansatz: String,
    pub r2: f64,
    pub mae: f64,
    pub wall_time_s: f64,
    pub seed: u64,
    /// Empty for non-iterative baselines.
    pub trace: Vec<TracePoint>,
    /// `(actual_kW, predicted_kW)` on the test set.
    pub predictions: Vec<(f64, f64)>,
    /// Trained circuit parameters; empty for baselines.
    pub parameters: Vec<f64>,
    pub status: String,
}

impl MethodResult {
    pub fn is_quantum(&self) -> bool {
        self.config_id.starts_with("QNN-")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MethodFailure {
    pub config_id: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ExperimentReport {
    pub methods: Vec<MethodResult>,
    pub failures: Vec<MethodFailure>,
    /// Free-form `key: value` lines shown above the markdown table.
    pub notes: Vec<(String, String)>,
    /// Whether `results.csv` carries measured wall times. Off by default so
    /// repeated runs give byte-identical files; `timings.csv` always does.
    pub include_wall_time: bool,
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |e| Error::io(path, e)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(io(path))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))
}

fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(|e| Error::csv(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(io(path))
}

fn results_csv(report: &ExperimentReport, path: &Path) -> Result<()> {
    write_rows(
        path,
        &RESULTS_HEADER,
        report.methods.iter().map(|m| {
            let wall = if report.include_wall_time {
                m.wall_time_s.to_string()
            } else {
                String::new()
            };
            [
                m.config_id.clone(),
                m.feature_map.clone(),
                m.ansatz.clone(),
                m.r2.to_string(),
                m.mae.to_string(),
                wall,
                m.seed.to_string(),
            ]
        }),
    )
}

/// Writes every artifact for `report` into `dir`, creating it if needed.
pub fn write_run_artifact(report: &ExperimentReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io(dir))?;
    results_csv(report, &dir.join("results.csv"))?;
    write_rows(
        &dir.join("timings.csv"),
        &["config_id", "wall_time_s", "status"],
        report.methods.iter().map(|m| {
            [
                m.config_id.clone(),
                m.wall_time_s.to_string(),
                m.status.clone(),
            ]
        }),
    )?;
    let failures = dir.join("failures.csv");
    if report.failures.is_empty() {
        if failures.exists() {
            fs::remove_file(&failures).map_err(io(&failures))?;
        }
    } else {
        write_rows(
            &failures,
            &["config_id", "message"],
            report
                .failures
                .iter()
                .map(|f| [f.config_id.clone(), f.message.clone()]),
        )?;
    }
    for m in &report.methods {
        let sub = dir.join(&m.config_id);
        fs::create_dir_all(&sub).map_err(io(&sub))?;
        write_rows(
            &sub.join("trace.csv"),
            &["iteration", "objective"],
            m.trace
                .iter()
                .map(|t| [t.iteration.to_string(), t.value.to_string()]),
        )?;
        write_rows(
            &sub.join("predictions.csv"),
            &["actual_kW", "predicted_kW"],
            m.predictions
                .iter()
                .map(|(a, p)| [a.to_string(), p.to_string()]),
        )?;
        if !m.parameters.is_empty() {
            write_rows(
                &sub.join("parameters.csv"),
                &["index", "value"],
                m.parameters
                    .iter()
                    .enumerate()
                    .map(|(i, v)| [i.to_string(), v.to_string()]),
            )?;
        }
    }
    render_outputs(report, dir)
}

/// Writes `results.md` and all SVG charts from the in-memory report.
pub fn render_outputs(report: &ExperimentReport, dir: &Path) -> Result<()> {
    write_file(&dir.join("results.md"), &results_markdown(report))?;
    for m in &report.methods {
        if m.predictions.is_empty() {
            continue;
        }
        let title = format!("{}: actual vs predicted", m.config_id);
        let svg = scatter_svg(&m.predictions, &title)?;
        write_file(&dir.join(&m.config_id).join("scatter.svg"), &svg)?;
    }
    for (map, file) in [("Z", "traces_z.svg"), ("ZZ", "traces_zz.svg")] {
        let series: Vec<(String, Vec<(f64, f64)>)> = report
            .methods
            .iter()
            .filter(|m| m.feature_map == map && !m.trace.is_empty())
            .map(|m| {
                let pts = m
                    .trace
                    .iter()
                    .map(|t| (t.iteration as f64, t.value))
                    .collect();
                (m.config_id.clone(), pts)
            })
            .collect();
        if series.is_empty() {
            continue;
        }
        let svg = trace_svg(&series, &format!("{map} feature map: training objective"))?;
        write_file(&dir.join(file), &svg)?;
    }
    Ok(())
}

fn display_method(m: &MethodResult) -> String {
    match m.config_id.as_str() {
        "dt" => "Decision Tree".into(),
        "knn" => "k-Nearest Neighbors".into(),
        "ols" => "Linear Regression".into(),
        other => other.into(),
    }
}

fn display_ansatz(m: &MethodResult) -> String {
    if !m.is_quantum() {
        return "-".into();
    }
    m.ansatz
        .parse::<crate::circuit::EntanglementStrategy>()
        .map(|s| s.display_name().to_string())
        .unwrap_or_else(|_| m.ansatz.clone())
}

fn signed(v: f64, decimals: usize) -> String {
    let s = format!("{:+.*}", decimals, v);
    if s == format!("-{:.*}", decimals, 0.0) {
        format!("+{:.*}", decimals, 0.0)
    } else {
        s
    }
}

/// Table with quantum rows first, metrics to two decimals, and deltas
/// against [`REFERENCE_TABLE`].
pub fn results_markdown(report: &ExperimentReport) -> String {
    let header = [
        "Model",
        "Feature Map",
        "Ansatz",
        "R²",
        "MAE (kW)",
        "Ref R²",
        "Ref MAE",
        "ΔR²",
        "ΔMAE",
    ];
    let ordered = report
        .methods
        .iter()
        .filter(|m| m.is_quantum())
        .chain(report.methods.iter().filter(|m| !m.is_quantum()));
    let rows: Vec<[String; 9]> = ordered
        .map(|m| {
            let feature_map = if m.is_quantum() {
                m.feature_map.clone()
            } else {
                "-".into()
            };
            let (ref_r2, ref_mae, d_r2, d_mae) = match reference(&m.config_id) {
                Some((r2, mae)) => (
                    format!("{r2:.2}"),
                    format!("{mae:.2}"),
                    signed(m.r2 - r2, 2),
                    signed(m.mae - mae, 2),
                ),
                None => ("-".into(), "-".into(), "-".into(), "-".into()),
            };
            [
                display_method(m),
                feature_map,
                display_ansatz(m),
                format!("{:.2}", m.r2),
                format!("{:.2}", m.mae),
                ref_r2,
                ref_mae,
                d_r2,
                d_mae,
            ]
        })
        .collect();

    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, &w))| {
                let pad = w - c.chars().count();
                if i < 3 {
                    format!("{c}{}", " ".repeat(pad))
                } else {
                    format!("{}{c}", " ".repeat(pad))
                }
            })
            .collect();
        format!("| {} |\n", padded.join(" | "))
    };

    let mut out = String::from("# Results\n\n");
    for (k, v) in &report.notes {
        let _ = writeln!(out, "- {k}: {v}");
    }
    if !report.notes.is_empty() {
        out.push('\n');
    }
    out.push_str(&line(&header.map(String::from)));
    let rule: Vec<String> = widths
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            if i < 3 {
                format!(":{}", "-".repeat(w - 1))
            } else {
                format!("{}:", "-".repeat(w - 1))
            }
        })
        .collect();
    let _ = writeln!(out, "| {} |", rule.join(" | "));
    for row in &rows {
        out.push_str(&line(row));
    }
    out.push_str(
        "\nReference columns hold the published values for the same method id; \
         deltas are this run minus reference.\n",
    );
    if !report.failures.is_empty() {
        out.push_str("\n## Failed methods\n\n");
        for f in &report.failures {
            let _ = writeln!(out, "- {}: {}", f.config_id, f.message);
        }
    }
    out
}

fn read_csv(path: &Path) -> Result<(csv::StringRecord, Vec<csv::StringRecord>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let header = r.headers().map_err(|e| Error::csv(path, e))?.clone();
    let rows = r
        .records()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::csv(path, e))?;
    Ok((header, rows))
}

fn expect_header(path: &Path, header: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    if header.iter().eq(expected.iter().copied()) {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{}: expected header {}, found {}",
            path.display(),
            expected.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )))
    }
}

fn parse<T: std::str::FromStr>(path: &Path, field: &str, text: &str) -> Result<T> {
    text.parse()
        .map_err(|_| Error::invalid(format!("{}: bad {field} value `{text}`", path.display())))
}

fn read_pairs(path: &Path, expected: &[&str]) -> Result<Vec<(String, String)>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let (header, rows) = read_csv(path)?;
    expect_header(path, &header, expected)?;
    Ok(rows
        .iter()
        .map(|r| (r[0].to_string(), r[1].to_string()))
        .collect())
}

/// Loads a report back from the CSV artifacts of a run directory.
pub fn read_run_artifact(dir: &Path) -> Result<ExperimentReport> {
    let results = dir.join("results.csv");
    let (header, rows) = read_csv(&results)?;
    expect_header(&results, &header, &RESULTS_HEADER)?;

    let timings: Vec<(String, String, String)> = {
        let path = dir.join("timings.csv");
        if path.exists() {
            let (h, rows) = read_csv(&path)?;
            expect_header(&path, &h, &["config_id", "wall_time_s", "status"])?;
            rows.iter()
                .map(|r| (r[0].to_string(), r[1].to_string(), r[2].to_string()))
                .collect()
        } else {
            Vec::new()
        }
    };

    let mut report = ExperimentReport::default();
    for row in &rows {
        let id = row[0].to_string();
        let sub: PathBuf = dir.join(&id);
        let timing = timings.iter().find(|t| t.0 == id);
        let wall_time_s = if !row[5].is_empty() {
            report.include_wall_time = true;
            parse(&results, "wall_time_s", &row[5])?
        } else if let Some(t) = timing {
            parse(&dir.join("timings.csv"), "wall_time_s", &t.1)?
        } else {
            0.0
        };
        let trace_path = sub.join("trace.csv");
        let trace = read_pairs(&trace_path, &["iteration", "objective"])?
            .iter()
            .map(|(i, v)| {
                Ok(TracePoint {
                    iteration: parse(&trace_path, "iteration", i)?,
                    value: parse(&trace_path, "objective", v)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let pred_path = sub.join("predictions.csv");
        let predictions = read_pairs(&pred_path, &["actual_kW", "predicted_kW"])?
            .iter()
            .map(|(a, p)| {
                Ok((
                    parse(&pred_path, "actual_kW", a)?,
                    parse(&pred_path, "predicted_kW", p)?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let param_path = sub.join("parameters.csv");
        let parameters = read_pairs(&param_path, &["index", "value"])?
            .iter()
            .map(|(_, v)| parse(&param_path, "value", v))
            .collect::<Result<Vec<f64>>>()?;
        report.methods.push(MethodResult {
            config_id: id,
            feature_map: row[1].to_string(),
            ansatz: row[2].to_string(),
            r2: parse(&results, "r2", &row[3])?,
            mae: parse(&results, "mae", &row[4])?,
            wall_time_s,
            seed: parse(&results, "seed", &row[6])?,
            trace,
            predictions,
            parameters,
            status: timing.map(|t| t.2.clone()).unwrap_or_default(),
        });
    }
    report.failures = read_pairs(&dir.join("failures.csv"), &["config_id", "message"])?
        .into_iter()
        .map(|(config_id, message)| MethodFailure { config_id, message })
        .collect();
    Ok(report)
}
