//! Plot-ready CSV tables extracted from a directory of result files.

use std::fs;
use std::path::{Path, PathBuf};

use memaudit::elements::PolynomialMemristor;
use serde::Deserialize;
use serde_json::Value;

use crate::error::CliError;
use crate::run::write_atomic;

pub const CURVE_POINTS: usize = 401;
pub const CURVE_RANGE: (f64, f64) = (-2.0, 2.0);

pub const CURVES_FILE: &str = "memristor_curves.csv";
pub const EXCHANGE_FILE: &str = "exchange_flow.csv";
pub const CASCADE_FILE: &str = "cascade_dc.csv";

#[derive(Deserialize)]
struct Document {
    schema_version: u32,
    kind: String,
    name: String,
    spec: Value,
    runs: Vec<Value>,
}

fn result_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = fs::read_dir(dir)
        .map_err(|e| CliError::Validation(format!("cannot read result directory {}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            p.is_file() && name.ends_with(".json") && !name.ends_with(".meta.json")
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::Validation(format!("no result files in {}", dir.display())));
    }
    Ok(files)
}

fn load(path: &Path) -> Result<Document, CliError> {
    let corrupt = |why: String| CliError::Validation(format!("corrupt result file {}: {why}", path.display()));
    let text = fs::read_to_string(path).map_err(|e| corrupt(e.to_string()))?;
    let doc: Document = serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))?;
    if doc.schema_version != crate::run::SCHEMA_VERSION {
        return Err(corrupt(format!("unsupported schema_version {}", doc.schema_version)));
    }
    Ok(doc)
}

fn number(v: &Value, key: &str, path: &Path) -> Result<f64, CliError> {
    v.get(key).and_then(Value::as_f64).ok_or_else(|| {
        CliError::Validation(format!(
            "corrupt result file {}: missing number '{key}'",
            path.display()
        ))
    })
}

/// Memristor models named anywhere in a spec.
fn models(spec: &Value) -> Vec<PolynomialMemristor> {
    let mut out = Vec::new();
    let mut take = |block: Option<&Value>, tagged: bool| {
        let Some(b) = block else { return };
        if tagged && b.get("type").and_then(Value::as_str) != Some("memristor") {
            return;
        }
        let f = |k: &str| b.get(k).and_then(Value::as_f64).unwrap_or(0.0);
        out.push(PolynomialMemristor::new(f("a"), f("b"), f("c")));
    };
    take(spec.get("memristor"), false);
    for key in ["branch_a", "branch_b", "device"] {
        take(spec.get(key), true);
    }
    out
}

/// `plot` subcommand; returns the written files.
pub fn plot(result_dir: &Path, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let docs = result_files(result_dir)?
        .into_iter()
        .map(|p| load(&p).map(|d| (p, d)))
        .collect::<Result<Vec<_>, _>>()?;
    fs::create_dir_all(out).map_err(CliError::runtime)?;

    let mut curves = csv::Writer::from_writer(Vec::new());
    curves
        .write_record(["model", "a", "b", "c", "q", "flux", "memristance"])
        .map_err(CliError::runtime)?;
    let mut seen: Vec<PolynomialMemristor> = Vec::new();
    for (_, doc) in &docs {
        for m in models(&doc.spec) {
            if seen.contains(&m) {
                continue;
            }
            seen.push(m);
            let label = format!("a={} b={} c={}", m.a, m.b, m.c);
            let (lo, hi) = CURVE_RANGE;
            for i in 0..CURVE_POINTS {
                let q = lo + (hi - lo) * i as f64 / (CURVE_POINTS - 1) as f64;
                curves
                    .write_record([
                        label.clone(),
                        m.a.to_string(),
                        m.b.to_string(),
                        m.c.to_string(),
                        q.to_string(),
                        m.flux(q).to_string(),
                        m.memristance(q).to_string(),
                    ])
                    .map_err(CliError::runtime)?;
            }
        }
    }

    let mut exchange = csv::Writer::from_writer(Vec::new());
    exchange
        .write_record([
            "name",
            "seed",
            "t_a",
            "t_b",
            "delta_t",
            "measured",
            "standard_error",
            "predicted",
        ])
        .map_err(CliError::runtime)?;
    let mut cascade = csv::Writer::from_writer(Vec::new());
    cascade
        .write_record([
            "name",
            "seed",
            "n_stages",
            "total_dc_mean",
            "total_dc_se",
            "available_power_estimate",
        ])
        .map_err(CliError::runtime)?;

    for (path, doc) in &docs {
        for run in &doc.runs {
            match doc.kind.as_str() {
                "exchange" => {
                    let (t_a, t_b) = (number(run, "t_a", path)?, number(run, "t_b", path)?);
                    let predicted = run.get("predicted").and_then(Value::as_f64);
                    exchange
                        .write_record([
                            doc.name.clone(),
                            number(run, "seed", path)?.to_string(),
                            t_a.to_string(),
                            t_b.to_string(),
                            (t_a - t_b).to_string(),
                            number(run, "mean", path)?.to_string(),
                            number(run, "standard_error", path)?.to_string(),
                            predicted.map_or(String::new(), |p| p.to_string()),
                        ])
                        .map_err(CliError::runtime)?;
                }
                "cascade" => {
                    cascade
                        .write_record([
                            doc.name.clone(),
                            number(run, "seed", path)?.to_string(),
                            number(run, "n_stages", path)?.to_string(),
                            number(run, "total_dc_mean", path)?.to_string(),
                            number(run, "total_dc_se", path)?.to_string(),
                            number(run, "available_power_estimate", path)?.to_string(),
                        ])
                        .map_err(CliError::runtime)?;
                }
                _ => {}
            }
        }
    }

    let mut written = Vec::new();
    for (file, writer) in [
        (CURVES_FILE, curves),
        (EXCHANGE_FILE, exchange),
        (CASCADE_FILE, cascade),
    ] {
        let bytes = writer.into_inner().map_err(|e| CliError::runtime(e.error()))?;
        let path = out.join(file);
        write_atomic(&path, &bytes)?;
        written.push(path);
    }
    Ok(written)
}
