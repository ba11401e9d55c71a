//! Experiment specification files (TOML, or JSON by extension).

use std::path::Path;

use memaudit::circuits::{BranchSpec, RectifierTopology};
use memaudit::elements::{Capacitor, PolynomialMemristor, ThermalResistor};
use memaudit::noise::{SimConfig, UnitSystem};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Exchange,
    Rectify,
    Cascade,
    Passivity,
    FdtCheck,
    IdealDrive,
}

impl Kind {
    pub const ALL: [Kind; 6] = [
        Kind::Exchange,
        Kind::Rectify,
        Kind::Cascade,
        Kind::Passivity,
        Kind::FdtCheck,
        Kind::IdealDrive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Exchange => "exchange",
            Kind::Rectify => "rectify",
            Kind::Cascade => "cascade",
            Kind::Passivity => "passivity",
            Kind::FdtCheck => "fdt-check",
            Kind::IdealDrive => "ideal-drive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimBlock {
    #[serde(default = "defaults::sample_rate")]
    pub sample_rate: f64,
    #[serde(default = "defaults::band_low")]
    pub band_low: f64,
    #[serde(default = "defaults::band_high")]
    pub band_high: f64,
    #[serde(default = "defaults::n_samples")]
    pub n_samples: usize,
    #[serde(default = "defaults::burn_in_fraction")]
    pub burn_in_fraction: f64,
}

impl Default for SimBlock {
    fn default() -> Self {
        SimBlock {
            sample_rate: defaults::sample_rate(),
            band_low: defaults::band_low(),
            band_high: defaults::band_high(),
            n_samples: defaults::n_samples(),
            burn_in_fraction: defaults::burn_in_fraction(),
        }
    }
}

mod defaults {
    pub fn sample_rate() -> f64 {
        1.0
    }
    pub fn band_low() -> f64 {
        0.05
    }
    pub fn band_high() -> f64 {
        0.45
    }
    pub fn n_samples() -> usize {
        1 << 22
    }
    pub fn burn_in_fraction() -> f64 {
        0.1
    }
    pub fn noisy() -> bool {
        true
    }
    pub fn decimation() -> usize {
        16
    }
    pub fn oversample() -> usize {
        1
    }
    pub fn threshold() -> f64 {
        5.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemristorBlock {
    pub a: f64,
    #[serde(default)]
    pub b: f64,
    #[serde(default)]
    pub c: f64,
    #[serde(default)]
    pub q0: f64,
}

impl MemristorBlock {
    pub fn model(&self) -> PolynomialMemristor {
        PolynomialMemristor::new(self.a, self.b, self.c).with_initial_charge(self.q0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResistorBlock {
    #[serde(rename = "R")]
    pub resistance: f64,
    #[serde(rename = "T")]
    pub temperature: f64,
    #[serde(default = "defaults::noisy")]
    pub noisy: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacitorBlock {
    #[serde(rename = "C")]
    pub capacitance: f64,
    #[serde(default)]
    pub v0: f64,
}

/// A branch block: `type = "resistor"` with `R, T, noisy`, or
/// `type = "memristor"` with `a, b, c, q0, T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum BranchBlock {
    Resistor {
        #[serde(rename = "R")]
        resistance: f64,
        #[serde(rename = "T")]
        temperature: f64,
        #[serde(default = "defaults::noisy")]
        noisy: bool,
    },
    Memristor {
        a: f64,
        #[serde(default)]
        b: f64,
        #[serde(default)]
        c: f64,
        #[serde(default)]
        q0: f64,
        #[serde(rename = "T")]
        temperature: f64,
    },
}

impl BranchBlock {
    pub fn to_branch(self) -> memaudit::Result<BranchSpec> {
        match self {
            BranchBlock::Resistor {
                resistance,
                temperature,
                noisy,
            } => BranchSpec::resistor(resistance, temperature, noisy),
            BranchBlock::Memristor {
                a,
                b,
                c,
                q0,
                temperature,
            } => Ok(BranchSpec::memristor(
                PolynomialMemristor::new(a, b, c).with_initial_charge(q0),
                temperature,
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveBlock {
    pub psd_level: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default)]
    pub traces: bool,
    #[serde(default = "defaults::decimation")]
    pub decimation: usize,
    #[serde(default)]
    pub noise_records: bool,
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock {
            traces: false,
            decimation: defaults::decimation(),
            noise_records: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: Kind,
    pub name: String,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub units: UnitSystem,
    #[serde(default)]
    pub sim: SimBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch_a: Option<BranchBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch_b: Option<BranchBlock>,
    /// Branch-a temperatures to sweep in an exchange run; overrides `branch_a.T`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_t_a: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub memristor: Option<MemristorBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shunt: Option<ResistorBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacitor: Option<CapacitorBlock>,
    #[serde(default)]
    pub topology: RectifierTopology,
    #[serde(default = "defaults::oversample")]
    pub oversample: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_stages: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub device: Option<BranchBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_bath: Option<f64>,
    #[serde(default = "defaults::threshold")]
    pub threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive: Option<DriveBlock>,
    #[serde(default)]
    pub output: OutputBlock,
}

/// Every key accepted in a spec file, with a one-line description, for `--help`.
pub const CONFIG_KEYS: &[(&str, &str)] = &[
    ("kind", "experiment kind (see list above)"),
    ("name", "result file stem; letters, digits, '-', '_' and '.'"),
    ("seeds", "non-empty list of RNG seeds, one run per seed"),
    ("units", "\"normalized\" (k_B = 1, default) or \"si\""),
    ("[sim] sample_rate", "sampling rate fs (default 1)"),
    ("[sim] band_low", "lower band edge f_L > 0 (default 0.05)"),
    ("[sim] band_high", "upper band edge f_H <= fs/2 (default 0.45)"),
    ("[sim] n_samples", "record length, power of two (default 4194304)"),
    (
        "[sim] burn_in_fraction",
        "leading fraction discarded before averaging (default 0.1)",
    ),
    (
        "[branch_a] / [branch_b] type",
        "\"resistor\" or \"memristor\" (exchange)",
    ),
    (
        "[branch_*] R, T, noisy",
        "resistor branch: resistance, temperature, noise source on/off (default true)",
    ),
    (
        "[branch_*] a, b, c, q0, T",
        "memristor branch: M(q) = a + 2bq + 3cq^2, initial charge, ambient temperature",
    ),
    ("sweep_t_a", "optional list of branch-a temperatures (exchange)"),
    (
        "[memristor] a, b, c, q0",
        "memristor model (rectify, cascade, ideal-drive)",
    ),
    ("[shunt] R, T, noisy", "noisy shunt resistor (rectify, cascade)"),
    (
        "[capacitor] C, v0",
        "output capacitor and its initial voltage (rectify, cascade)",
    ),
    ("topology", "\"parallel\" (default) or \"series\" rectifier wiring"),
    ("oversample", "integration grid refinement, power of two (default 1)"),
    ("n_stages", "number of series rectifier stages (cascade)"),
    (
        "[device]",
        "branch block of the device under audit (passivity, fdt-check)",
    ),
    ("t_bath", "bath temperature of the reference resistor (passivity)"),
    ("threshold", "verdict threshold in pooled standard errors (default 5)"),
    (
        "[drive] psd_level",
        "one-sided PSD of the ideal current drive (ideal-drive)",
    ),
    ("[output] traces", "write per-seed CSV traces (default false)"),
    ("[output] decimation", "keep every n-th trace sample (default 16)"),
    (
        "[output] noise_records",
        "write raw float64 noise records with JSON sidecars (default false)",
    ),
];

/// Reads a spec; TOML unless the extension is `.json`. The seed list may still be empty.
pub fn load(path: &Path) -> Result<ExperimentSpec, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let spec: ExperimentSpec = if is_json {
        serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?
    } else {
        toml::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?
    };
    Ok(spec)
}

/// Applies a command-line seed list, then rejects a vacuous run.
pub fn resolve_seeds(spec: &mut ExperimentSpec, seeds: Option<Vec<u64>>) -> Result<(), CliError> {
    if let Some(seeds) = seeds {
        spec.seeds = seeds;
    }
    if spec.seeds.is_empty() {
        return Err(CliError::Parse("seed list is empty; nothing to run".into()));
    }
    Ok(())
}

fn require<T: Copy>(value: Option<T>, key: &str, kind: Kind) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Validation(format!("kind '{}' requires the '{key}' block", kind.name())))
}

/// Fully validated ingredients of one experiment.
#[derive(Debug, Clone)]
pub enum Plan {
    Exchange {
        branch_a: BranchSpec,
        branch_b: BranchSpec,
        temperatures_a: Vec<f64>,
    },
    Rectify {
        memristor: PolynomialMemristor,
        shunt: ThermalResistor,
        capacitor: Capacitor,
    },
    Cascade {
        memristor: PolynomialMemristor,
        shunt: ThermalResistor,
        capacitor: Capacitor,
        n_stages: usize,
    },
    Passivity {
        device: BranchSpec,
        t_bath: f64,
    },
    FdtCheck {
        device: BranchSpec,
    },
    IdealDrive {
        memristor: PolynomialMemristor,
        psd_level: f64,
    },
}

impl ExperimentSpec {
    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            sample_rate: self.sim.sample_rate,
            band_low: self.sim.band_low,
            band_high: self.sim.band_high,
            n_samples: self.sim.n_samples,
            seed: self.seeds[0],
            k_boltzmann: self.units.boltzmann(),
            burn_in_fraction: self.sim.burn_in_fraction,
            units: self.units,
        }
    }

    /// Checks everything that can be checked without simulating: band, element
    /// parameters, admissibility, cutoff and block-count preconditions.
    pub fn plan(&self) -> Result<Plan, CliError> {
        let valid_name = !self.name.is_empty()
            && self
                .name
                .chars()
                .all(|ch| ch.is_ascii_alphanumeric() || matches!(ch, '-' | '_' | '.'))
            && !self.name.starts_with('.');
        if !valid_name {
            return Err(CliError::Validation(format!(
                "name '{}' must be non-empty and use only letters, digits, '-', '_' and '.'",
                self.name
            )));
        }
        let config = self.sim_config();
        config.validate()?;
        memaudit::noise::in_band_bins(&config)?;
        let min_len = config.min_block_length();
        let retained = config.n_samples - config.burn_in_samples();
        if retained / min_len < memaudit::noise::MIN_BLOCKS {
            return Err(CliError::Validation(format!(
                "{retained} retained samples give fewer than {} blocks of {min_len}; lengthen n_samples",
                memaudit::noise::MIN_BLOCKS
            )));
        }
        if self.output.decimation == 0 {
            return Err(CliError::Validation("output.decimation must be at least 1".into()));
        }
        if !self.oversample.is_power_of_two() {
            return Err(CliError::Validation(format!(
                "oversample must be a power of two, got {}",
                self.oversample
            )));
        }
        let kind = self.kind;
        let plan = match kind {
            Kind::Exchange => {
                let branch_a = require(self.branch_a, "branch_a", kind)?.to_branch()?;
                let branch_b = require(self.branch_b, "branch_b", kind)?.to_branch()?;
                branch_a.validate()?;
                branch_b.validate()?;
                let temperatures_a = match &self.sweep_t_a {
                    None => vec![branch_a.temperature()],
                    Some(ts) if ts.is_empty() => return Err(CliError::Validation("sweep_t_a is empty".into())),
                    Some(ts) => {
                        for &t in ts {
                            with_temperature(&branch_a, t)?.validate()?;
                        }
                        ts.clone()
                    }
                };
                Plan::Exchange {
                    branch_a,
                    branch_b,
                    temperatures_a,
                }
            }
            Kind::Rectify | Kind::Cascade => {
                let memristor = require(self.memristor, "memristor", kind)?.model();
                let s = require(self.shunt, "shunt", kind)?;
                let shunt = ThermalResistor::new(s.resistance, s.temperature, s.noisy)?;
                let cap = require(self.capacitor, "capacitor", kind)?;
                let capacitor = Capacitor::new(cap.capacitance)?.with_initial_voltage(cap.v0);
                memristor.require_admissible()?;
                check_rectifier(&shunt, &capacitor, &config)?;
                if kind == Kind::Rectify {
                    Plan::Rectify {
                        memristor,
                        shunt,
                        capacitor,
                    }
                } else {
                    let n_stages = require(self.n_stages, "n_stages", kind)?;
                    if n_stages == 0 {
                        return Err(CliError::Validation("n_stages must be at least 1".into()));
                    }
                    Plan::Cascade {
                        memristor,
                        shunt,
                        capacitor,
                        n_stages,
                    }
                }
            }
            Kind::Passivity => {
                let device = require(self.device, "device", kind)?.to_branch()?;
                device.validate()?;
                let t_bath = require(self.t_bath, "t_bath", kind)?;
                if !(t_bath.is_finite() && t_bath >= 0.0) {
                    return Err(CliError::Validation(format!(
                        "t_bath must be non-negative, got {t_bath}"
                    )));
                }
                if self.seeds.len() < memaudit::audit::MIN_SEEDS {
                    return Err(CliError::Validation(format!(
                        "passivity needs at least {} seeds, got {}",
                        memaudit::audit::MIN_SEEDS,
                        self.seeds.len()
                    )));
                }
                if !(self.threshold.is_finite() && self.threshold > 0.0) {
                    return Err(CliError::Validation(format!(
                        "threshold must be positive, got {}",
                        self.threshold
                    )));
                }
                if !(device.small_signal_resistance() > 0.0) {
                    return Err(CliError::Validation(
                        "device has zero small-signal resistance; no reference resistor matches it".into(),
                    ));
                }
                Plan::Passivity { device, t_bath }
            }
            Kind::FdtCheck => {
                let device = require(self.device, "device", kind)?.to_branch()?;
                device.validate()?;
                Plan::FdtCheck { device }
            }
            Kind::IdealDrive => {
                let memristor = require(self.memristor, "memristor", kind)?.model();
                memristor.require_admissible()?;
                let drive = require(self.drive, "drive", kind)?;
                if !(drive.psd_level.is_finite() && drive.psd_level >= 0.0) {
                    return Err(CliError::Validation(format!(
                        "drive.psd_level must be non-negative, got {}",
                        drive.psd_level
                    )));
                }
                Plan::IdealDrive {
                    memristor,
                    psd_level: drive.psd_level,
                }
            }
        };
        Ok(plan)
    }
}

pub fn with_temperature(branch: &BranchSpec, t: f64) -> memaudit::Result<BranchSpec> {
    match *branch {
        BranchSpec::Resistor(r) => BranchSpec::resistor(r.resistance, t, r.noisy),
        BranchSpec::Memristor { model, .. } => Ok(BranchSpec::memristor(model, t)),
    }
}

fn check_rectifier(shunt: &ThermalResistor, cap: &Capacitor, config: &SimConfig) -> Result<(), CliError> {
    if !shunt.noisy {
        return Err(CliError::Validation("the rectifier shunt must be noisy".into()));
    }
    let corner = 1.0 / (2.0 * std::f64::consts::PI * shunt.resistance * cap.capacitance);
    if !(corner < config.band_low / 10.0) {
        return Err(CliError::Validation(format!(
            "capacitor corner frequency {corner} is not below f_L/10 = {}; increase C",
            config.band_low / 10.0
        )));
    }
    Ok(())
}
