use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use memaudit::audit::{check_fdt_compliance, classify_passivity_with, expected_exchange_power, PowerFlowEstimate};
use memaudit::circuits::{
    run_cascade_with, run_exchange_with, run_ideal_drive, simulate_rectifier, BranchSpec, ExchangeOptions,
    RectifierOptions, EXCHANGE_SUBSTREAM_A, EXCHANGE_SUBSTREAM_B,
};
use memaudit::noise::{synthesize_oversampled, synthesize_substream, write_raw, NoiseRecord, NoiseRole, SimConfig};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::spec::{with_temperature, ExperimentSpec, Kind, Plan};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seeds: Option<Vec<u64>>,
    pub workers: Option<usize>,
    pub out: PathBuf,
}

#[derive(Debug, Serialize)]
pub struct ResultDocument {
    pub schema_version: u32,
    pub tool: String,
    pub kind: Kind,
    pub name: String,
    pub units: memaudit::noise::UnitSystem,
    pub k_boltzmann: f64,
    pub config_hash: String,
    pub spec: ExperimentSpec,
    pub notes: Vec<String>,
    pub runs: Vec<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<Value>,
}

#[derive(Serialize)]
struct SeedRun<T: Serialize> {
    seed: u64,
    #[serde(flatten)]
    result: T,
}

#[derive(Serialize)]
struct ExchangeRun {
    seed: u64,
    t_a: f64,
    t_b: f64,
    /// Net power flow a -> b.
    mean: f64,
    standard_error: f64,
    n_blocks: usize,
    block_length: usize,
    burn_in_discarded: usize,
    predicted: Option<f64>,
    clamp_count: u64,
    branch_a: BranchSpec,
    branch_b: BranchSpec,
}

/// SHA-256 of the canonical JSON form of the spec, seeds included.
pub fn config_hash(spec: &ExperimentSpec) -> String {
    let canonical = serde_json::to_vec(spec).expect("spec serializes");
    hex::encode(Sha256::digest(&canonical))
}

/// Writes `bytes` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(CliError::runtime)?;
    tmp.write_all(bytes).map_err(CliError::runtime)?;
    tmp.as_file().sync_all().map_err(CliError::runtime)?;
    tmp.persist(path).map_err(|e| CliError::runtime(e.error))?;
    Ok(())
}

fn write_noise_record(record: &NoiseRecord, path: &Path) -> Result<(), CliError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let staging = tempfile::tempdir_in(dir).map_err(CliError::runtime)?;
    let staged = staging.path().join("record.f64");
    write_raw(record, &staged).map_err(CliError::runtime)?;
    let sidecar = |p: &Path| {
        let mut s = p.as_os_str().to_owned();
        s.push(".json");
        PathBuf::from(s)
    };
    fs::rename(sidecar(&staged), sidecar(path)).map_err(CliError::runtime)?;
    fs::rename(&staged, path).map_err(CliError::runtime)?;
    Ok(())
}

fn write_csv_atomic(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(CliError::runtime)?;
    for row in rows {
        w.write_record(row.iter().map(|x| x.to_string()))
            .map_err(CliError::runtime)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::runtime(e.error()))?;
    write_atomic(path, &bytes)
}

/// Expected net flow a -> b when both branches have constant resistance.
fn predicted_flow(a: &BranchSpec, b: &BranchSpec, config: &SimConfig) -> Option<f64> {
    let constant = |s: &BranchSpec| match s {
        BranchSpec::Resistor(r) => Some(r.resistance),
        BranchSpec::Memristor { model, .. } if model.is_linear() => Some(model.a),
        BranchSpec::Memristor { .. } => None,
    };
    let (ra, rb) = (constant(a)?, constant(b)?);
    let k = config.k_boltzmann;
    if a.is_noisy() && b.is_noisy() && ra == rb {
        return expected_exchange_power(
            ra,
            a.temperature(),
            b.temperature(),
            config.band_low,
            config.band_high,
            k,
        )
        .ok();
    }
    let (sa, sb) = (a.noise_psd(k), b.noise_psd(k));
    let sum = ra + rb;
    Some((rb * sa - ra * sb) / (sum * sum) * config.bandwidth())
}

struct Context<'a> {
    spec: &'a ExperimentSpec,
    out: &'a Path,
}

impl Context<'_> {
    fn config(&self, seed: u64) -> SimConfig {
        self.spec.sim_config().with_seed(seed)
    }

    fn trace_path(&self, stem: &str) -> PathBuf {
        self.out.join("traces").join(format!("{}.{stem}.csv", self.spec.name))
    }

    fn noise_path(&self, stem: &str) -> PathBuf {
        self.out.join("noise").join(format!("{}.{stem}.f64", self.spec.name))
    }

    fn exchange(&self, a: &BranchSpec, b: &BranchSpec, temps: &[f64]) -> Result<Vec<Value>, CliError> {
        let jobs: Vec<(f64, u64)> = temps
            .iter()
            .flat_map(|&t| self.spec.seeds.iter().map(move |&s| (t, s)))
            .collect();
        let sweep = self.spec.sweep_t_a.is_some();
        let opts = ExchangeOptions {
            decimation: self.spec.output.decimation,
            ..Default::default()
        };
        jobs.par_iter()
            .map(|&(t_a, seed)| {
                let branch_a = with_temperature(a, t_a)?;
                let config = self.config(seed);
                let (est, trace) = run_exchange_with(&branch_a, b, &config, &opts).map_err(CliError::runtime)?;
                let stem = if sweep {
                    format!("seed{seed}.ta{t_a}")
                } else {
                    format!("seed{seed}")
                };
                if self.spec.output.traces {
                    let cols = [
                        &trace.current,
                        &trace.voltage,
                        &trace.charge_a,
                        &trace.charge_b,
                        &trace.power_a,
                        &trace.power_b,
                        &trace.dissipation_a,
                        &trace.dissipation_b,
                        &trace.source_power,
                    ];
                    write_csv_atomic(
                        &self.trace_path(&stem),
                        &[
                            "t",
                            "current",
                            "voltage",
                            "charge_a",
                            "charge_b",
                            "power_a",
                            "power_b",
                            "dissipation_a",
                            "dissipation_b",
                            "source_power",
                        ],
                        (0..trace.len()).map(|i| {
                            let mut row = vec![i as f64 * trace.dt];
                            row.extend(cols.iter().map(|c| c[i]));
                            row
                        }),
                    )?;
                }
                if self.spec.output.noise_records {
                    for (label, branch, sub) in [
                        ("branch_a", &branch_a, EXCHANGE_SUBSTREAM_A),
                        ("branch_b", b, EXCHANGE_SUBSTREAM_B),
                    ] {
                        let psd = branch.noise_psd(config.k_boltzmann);
                        if psd > 0.0 {
                            let rec = synthesize_substream(&config, psd, NoiseRole::VoltageSource, sub)
                                .map_err(CliError::runtime)?;
                            write_noise_record(&rec, &self.noise_path(&format!("{stem}.{label}")))?;
                        }
                    }
                }
                let run = ExchangeRun {
                    seed,
                    t_a,
                    t_b: b.temperature(),
                    mean: est.mean,
                    standard_error: est.standard_error,
                    n_blocks: est.n_blocks,
                    block_length: est.block_length,
                    burn_in_discarded: est.burn_in_discarded,
                    predicted: predicted_flow(&branch_a, b, &config),
                    clamp_count: trace.clamp_count,
                    branch_a,
                    branch_b: *b,
                };
                Ok(serde_json::to_value(run).expect("serializable"))
            })
            .collect()
    }

    fn rectify(&self, plan: &Plan) -> Result<Vec<Value>, CliError> {
        let Plan::Rectify {
            memristor,
            shunt,
            capacitor,
        } = plan
        else {
            unreachable!()
        };
        let opts = RectifierOptions {
            topology: self.spec.topology,
            oversample: self.spec.oversample,
            substream: 0,
        };
        self.spec
            .seeds
            .par_iter()
            .map(|&seed| {
                let config = self.config(seed);
                let run = simulate_rectifier(memristor, shunt, capacitor, &config, &opts).map_err(CliError::runtime)?;
                if self.spec.output.traces {
                    let dec = self.spec.output.decimation;
                    write_csv_atomic(
                        &self.trace_path(&format!("seed{seed}")),
                        &["t", "voltage", "charge"],
                        (0..run.voltage.len())
                            .step_by(dec)
                            .map(|i| vec![i as f64 * config.dt(), run.voltage[i], run.charge[i]]),
                    )?;
                }
                if self.spec.output.noise_records {
                    let rec = synthesize_oversampled(
                        &config,
                        shunt.current_noise_psd(config.k_boltzmann),
                        NoiseRole::CurrentSource,
                        0,
                        opts.oversample,
                    )
                    .map_err(CliError::runtime)?;
                    write_noise_record(&rec, &self.noise_path(&format!("seed{seed}.drive")))?;
                }
                Ok(serde_json::to_value(SeedRun {
                    seed,
                    result: run.result,
                })
                .expect("serializable"))
            })
            .collect()
    }

    fn cascade(&self, plan: &Plan) -> Result<Vec<Value>, CliError> {
        let Plan::Cascade {
            memristor,
            shunt,
            capacitor,
            n_stages,
        } = plan
        else {
            unreachable!()
        };
        let opts = RectifierOptions {
            topology: self.spec.topology,
            oversample: self.spec.oversample,
            substream: 0,
        };
        self.spec
            .seeds
            .par_iter()
            .map(|&seed| {
                let result = run_cascade_with(*n_stages, memristor, shunt, capacitor, &self.config(seed), &opts)
                    .map_err(CliError::runtime)?;
                Ok(serde_json::to_value(SeedRun { seed, result }).expect("serializable"))
            })
            .collect()
    }

    fn fdt_check(&self, device: &BranchSpec) -> Result<Vec<Value>, CliError> {
        self.spec
            .seeds
            .par_iter()
            .map(|&seed| {
                let result = check_fdt_compliance(device, &self.config(seed)).map_err(CliError::runtime)?;
                Ok(serde_json::to_value(SeedRun { seed, result }).expect("serializable"))
            })
            .collect()
    }

    fn ideal_drive(&self, plan: &Plan) -> Result<Vec<Value>, CliError> {
        let Plan::IdealDrive { memristor, psd_level } = plan else {
            unreachable!()
        };
        self.spec
            .seeds
            .par_iter()
            .map(|&seed| {
                let config = self.config(seed);
                let drive = synthesize_substream(&config, *psd_level, NoiseRole::CurrentSource, 0)
                    .map_err(CliError::runtime)?;
                if self.spec.output.noise_records {
                    write_noise_record(&drive, &self.noise_path(&format!("seed{seed}.drive")))?;
                }
                let result = run_ideal_drive(memristor, &drive, &config).map_err(CliError::runtime)?;
                Ok(serde_json::to_value(SeedRun { seed, result }).expect("serializable"))
            })
            .collect()
    }
}

fn clamp_total(runs: &[Value]) -> u64 {
    fn walk(v: &Value) -> u64 {
        match v {
            Value::Object(map) => map
                .iter()
                .map(|(k, v)| {
                    if k == "clamp_count" {
                        v.as_u64().unwrap_or(0)
                    } else {
                        walk(v)
                    }
                })
                .sum(),
            Value::Array(items) => items.iter().map(walk).sum(),
            _ => 0,
        }
    }
    runs.iter().map(walk).sum()
}

/// Runs every seed of the spec and assembles the result document.
pub fn execute(spec: &ExperimentSpec, plan: &Plan, out: &Path) -> Result<ResultDocument, CliError> {
    let ctx = Context { spec, out };
    let mut notes = Vec::new();
    let mut summary = None;
    let runs = match plan {
        Plan::Exchange {
            branch_a,
            branch_b,
            temperatures_a,
        } => {
            notes.push(
                "mean is the burn-in-trimmed average of the terminal power I*V_b absorbed by branch b \
                 (positive: net flow a -> b)"
                    .into(),
            );
            ctx.exchange(branch_a, branch_b, temperatures_a)?
        }
        Plan::Rectify { .. } | Plan::Cascade { .. } => {
            let name = serde_json::to_value(spec.topology).expect("serializable");
            notes.push(format!(
                "topology {}: {}",
                name.as_str().unwrap_or(""),
                spec.topology.describe()
            ));
            if spec.kind == Kind::Cascade {
                notes.push("available_power_estimate = total_dc^2 / (4 N R_shunt), matched-load convention".into());
                ctx.cascade(plan)?
            } else {
                ctx.rectify(plan)?
            }
        }
        Plan::Passivity { device, t_bath } => {
            let verdict = classify_passivity_with(device, *t_bath, &spec.sim_config(), &spec.seeds, spec.threshold)
                .map_err(CliError::runtime)?;
            notes.push(format!(
                "verdict: {} (z = {:.3}, threshold {})",
                serde_json::to_value(verdict.classification)
                    .expect("serializable")
                    .as_str()
                    .unwrap_or(""),
                verdict.z_score,
                verdict.threshold
            ));
            let runs = verdict
                .per_seed
                .iter()
                .map(|s| {
                    serde_json::to_value(SeedRun::<PowerFlowEstimate> {
                        seed: s.seed,
                        result: s.estimate,
                    })
                    .expect("serializable")
                })
                .collect();
            summary = Some(serde_json::to_value(&verdict).expect("serializable"));
            runs
        }
        Plan::FdtCheck { device } => ctx.fdt_check(device)?,
        Plan::IdealDrive { .. } => ctx.ideal_drive(plan)?,
    };
    let clamps = clamp_total(&runs);
    if clamps > 0 {
        notes.push(format!(
            "memristance floor engaged {clamps} times; results near the admissibility boundary are degenerate"
        ));
    }
    Ok(ResultDocument {
        schema_version: SCHEMA_VERSION,
        tool: format!("memaudit {}", env!("CARGO_PKG_VERSION")),
        kind: spec.kind,
        name: spec.name.clone(),
        units: spec.units,
        k_boltzmann: spec.units.boltzmann(),
        config_hash: config_hash(spec),
        spec: spec.clone(),
        notes,
        runs,
        summary,
    })
}

#[derive(Serialize)]
struct Meta<'a> {
    name: &'a str,
    result: String,
    config_hash: &'a str,
    started_unix: f64,
    finished_unix: f64,
    elapsed_seconds: f64,
    workers: usize,
}

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// `run` subcommand: returns the path of the result file.
pub fn run(spec_path: &Path, opts: &RunOptions) -> Result<PathBuf, CliError> {
    let mut spec = crate::spec::load(spec_path)?;
    crate::spec::resolve_seeds(&mut spec, opts.seeds.clone())?;
    let plan = spec.plan()?;
    let workers = match opts.workers {
        Some(0) => return Err(CliError::Parse("--workers must be at least 1".into())),
        Some(w) => w,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };

    fs::create_dir_all(&opts.out).map_err(CliError::runtime)?;
    if spec.output.traces {
        fs::create_dir_all(opts.out.join("traces")).map_err(CliError::runtime)?;
    }
    if spec.output.noise_records {
        fs::create_dir_all(opts.out.join("noise")).map_err(CliError::runtime)?;
    }

    let started = unix_now();
    let clock = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(CliError::runtime)?;
    let doc = pool.install(|| execute(&spec, &plan, &opts.out))?;

    let result_path = opts.out.join(format!("{}.json", spec.name));
    let mut bytes = serde_json::to_vec_pretty(&doc).map_err(CliError::runtime)?;
    bytes.push(b'\n');
    write_atomic(&result_path, &bytes)?;

    let meta = Meta {
        name: &spec.name,
        result: format!("{}.json", spec.name),
        config_hash: &doc.config_hash,
        started_unix: started,
        finished_unix: unix_now(),
        elapsed_seconds: clock.elapsed().as_secs_f64(),
        workers,
    };
    let mut meta_bytes = serde_json::to_vec_pretty(&meta).map_err(CliError::runtime)?;
    meta_bytes.push(b'\n');
    write_atomic(&opts.out.join(format!("{}.meta.json", spec.name)), &meta_bytes)?;
    Ok(result_path)
}
