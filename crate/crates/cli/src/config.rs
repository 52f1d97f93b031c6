//! Experiment configuration: TOML schema, overrides and validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qas_core::state::Entangler;
use qas_core::{Estimator, IntegratorConfig, Mode, ModelSpec, PauliString, PauliSum};

use crate::error::CliError;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "QAS_OUT_DIR";

/// Fallback output directory when neither the config nor the environment sets one.
pub const DEFAULT_OUT_DIR: &str = "qas-out";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub model: ModelSpec,
    pub initial_state: InitialState,
    /// Moment order, or a list of orders to sweep.
    pub k: Orders,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub estimator: Estimator,
    #[serde(default)]
    pub backend: Backend,
    #[serde(default)]
    pub observables: Vec<ObservableSpec>,
    /// Compare against dense exact dynamics (small systems only).
    #[serde(default)]
    pub oracle: bool,
    /// Record the residual estimate `epsilon_t` (real time only).
    #[serde(default)]
    pub error_monitor: bool,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Orders {
    One(usize),
    Many(Vec<usize>),
}

impl Orders {
    pub fn values(&self) -> Vec<usize> {
        match self {
            Orders::One(k) => vec![*k],
            Orders::Many(ks) => ks.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialState {
    PlusProduct,
    ZeroProduct,
    HardwareEfficient {
        depth: usize,
        seed: u64,
        #[serde(default)]
        entangler: Entangler,
    },
    /// Ground state of another model; `n` defaults to the evolved model's.
    GroundStateOf {
        model: ModelSpec,
    },
    /// Amplitudes, one `re im` pair per line in computational-basis order.
    File {
        path: PathBuf,
    },
}

impl InitialState {
    pub fn is_product(&self) -> bool {
        matches!(self, InitialState::PlusProduct | InitialState::ZeroProduct)
    }
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Product backend for product initial states, statevector otherwise.
    #[default]
    Auto,
    Statevector,
    Product,
}

/// A named observable: either a single string (`pauli`, sparse `"X0 Z3"` or
/// dense `"XIZ"`) or a full sum in the Pauli-sum text format (`terms`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableSpec {
    pub name: String,
    #[serde(default)]
    pub pauli: Option<String>,
    #[serde(default)]
    pub terms: Option<String>,
}

impl ObservableSpec {
    pub fn sparse(name: &str, pauli: &str) -> Self {
        ObservableSpec {
            name: name.into(),
            pauli: Some(pauli.into()),
            terms: None,
        }
    }

    pub fn build(&self, n: usize) -> qas_core::Result<PauliSum> {
        match (&self.pauli, &self.terms) {
            (Some(p), None) => {
                let string = if p.chars().any(|c| c.is_ascii_digit()) {
                    PauliString::from_sparse(n, p)?
                } else {
                    p.parse::<PauliString>()?
                };
                PauliSum::from_real_terms(n, [(1.0, string)])
            }
            (None, Some(t)) => {
                let sum = PauliSum::parse(t)?;
                if sum.num_qubits() != n {
                    return Err(qas_core::QasError::Dimension {
                        expected: n,
                        found: sum.num_qubits(),
                    });
                }
                Ok(sum)
            }
            _ => Err(qas_core::QasError::Configuration(
                "observable needs exactly one of 'pauli' or 'terms'".into(),
            )),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Output directory; falls back to `$QAS_OUT_DIR`, then `qas-out`.
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub include_alphas: bool,
}

impl OutputSpec {
    pub fn resolve_dir(&self) -> PathBuf {
        self.dir
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| CliError::Config(e.message().trim().to_string()))?;
        Self::from_table(table)
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text)?;
        cfg.resolve_relative_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    pub fn from_table(table: toml::Table) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(toml::Value::Table(table))
            .map_err(|e| {
                let path = e.path().to_string();
                CliError::Config(format!("{path}: {}", e.into_inner().message().trim()))
            })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_table(&self) -> toml::Table {
        toml::Table::try_from(self).expect("config serializes to a TOML table")
    }

    /// Re-parses with `key.path=value` overrides applied.
    pub fn with_overrides(&self, overrides: &[String]) -> Result<Self, CliError> {
        let mut table = self.to_table();
        for item in overrides {
            apply_override(&mut table, item)?;
        }
        Self::from_table(table)
    }

    fn resolve_relative_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = self.model.path.as_mut() {
            fix(p);
        }
        match &mut self.initial_state {
            InitialState::File { path } => fix(path),
            InitialState::GroundStateOf { model } => {
                if let Some(p) = model.path.as_mut() {
                    fix(p);
                }
            }
            _ => {}
        }
    }

    /// Semantic checks, reported with the offending field path.
    pub fn validate(&self) -> Result<(), CliError> {
        let err = |path: &str, msg: String| Err(CliError::Config(format!("{path}: {msg}")));
        if self.name.trim().is_empty() {
            return err("name", "must not be empty".into());
        }
        if let Err(e) = self.integrator.validate() {
            let msg = e.to_string();
            let field = ["dt", "t_final", "regularization_cutoff", "record_every"]
                .into_iter()
                .find(|f| msg.contains(f))
                .unwrap_or("");
            return err(
                format!("integrator.{field}")
                    .trim_end_matches('.'),
                msg,
            );
        }
        let ks = self.k.values();
        if ks.is_empty() {
            return err("k", "at least one moment order is required".into());
        }
        if let Estimator::Sampled { shots: 0, .. } = self.estimator {
            return err("estimator.shots", "must be at least 1".into());
        }
        let n = match self.model.n {
            Some(n) if n >= 1 => n,
            Some(_) => return err("model.n", "must be at least 1".into()),
            None if self.model.family == qas_core::Family::File => 0,
            None => return err("model.n", "is required".into()),
        };
        if self.backend == Backend::Product && !self.initial_state.is_product() {
            return err(
                "backend",
                "the product backend needs a plus-product or zero-product initial state".into(),
            );
        }
        if let InitialState::HardwareEfficient { .. } = self.initial_state {
            if n > qas_core::state::MAX_STATEVECTOR_QUBITS {
                return err(
                    "initial_state",
                    format!(
                        "statevector limited to {} qubits",
                        qas_core::state::MAX_STATEVECTOR_QUBITS
                    ),
                );
            }
        }
        if self.oracle && n > qas_core::oracle::MAX_DENSE_QUBITS {
            return err(
                "oracle",
                format!(
                    "dense oracle limited to {} qubits",
                    qas_core::oracle::MAX_DENSE_QUBITS
                ),
            );
        }
        let mut seen = std::collections::HashSet::new();
        for (i, o) in self.observables.iter().enumerate() {
            if o.name.is_empty() || o.name.contains(',') {
                return err(
                    &format!("observables[{i}].name"),
                    "must be non-empty without commas".into(),
                );
            }
            if !seen.insert(o.name.as_str()) {
                return err(
                    &format!("observables[{i}].name"),
                    format!("duplicate name '{}'", o.name),
                );
            }
            if n > 0 {
                if let Err(e) = o.build(n) {
                    return err(&format!("observables[{i}]"), e.to_string());
                }
            }
        }
        Ok(())
    }
}

/// Sets `a.b.c = value` in a TOML table. The value is read as TOML when it
/// parses (numbers, booleans, arrays) and as a bare string otherwise.
pub fn apply_override(table: &mut toml::Table, item: &str) -> Result<(), CliError> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override '{item}' is not key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!(
            "override key '{key}' is malformed"
        )));
    }
    let mut cursor = table;
    for part in &parts[..parts.len() - 1] {
        let entry = cursor
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cursor = entry.as_table_mut().ok_or_else(|| {
            CliError::Config(format!("override '{key}': '{part}' is not a table"))
        })?;
    }
    cursor.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "demo"
k = 1

[model]
family = "single-z"
n = 1

[initial_state]
kind = "plus-product"

[integrator]
dt = 0.01
t_final = 1.0

[[observables]]
name = "x"
pauli = "X"
"#;

    #[test]
    fn parses_minimal() {
        let cfg = ExperimentConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(cfg.k.values(), vec![1]);
        assert_eq!(cfg.mode, Mode::Real);
        assert_eq!(cfg.backend, Backend::Auto);
        assert_eq!(cfg.integrator.regularization_cutoff, 1e-10);
    }

    #[test]
    fn k_accepts_lists() {
        let text = MINIMAL.replace("k = 1", "k = [1, 2, 3]");
        let cfg = ExperimentConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg.k.values(), vec![1, 2, 3]);
    }

    #[test]
    fn negative_dt_reports_path() {
        let text = MINIMAL.replace("dt = 0.01", "dt = -0.01");
        let err = ExperimentConfig::from_toml_str(&text).unwrap_err();
        assert!(err.to_string().contains("integrator.dt"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unknown_field_reports_path() {
        let text = MINIMAL.replace("t_final = 1.0", "t_final = 1.0\nstep = 3");
        let err = ExperimentConfig::from_toml_str(&text).unwrap_err();
        assert!(err.to_string().contains("integrator"), "{err}");
    }

    #[test]
    fn wrong_type_reports_nested_path() {
        let text = MINIMAL.replace("n = 1", "n = \"one\"");
        let err = ExperimentConfig::from_toml_str(&text).unwrap_err();
        assert!(err.to_string().contains("model.n"), "{err}");
    }

    #[test]
    fn overrides_apply_and_revalidate() {
        let cfg = ExperimentConfig::from_toml_str(MINIMAL).unwrap();
        let cfg2 = cfg
            .with_overrides(&[
                "integrator.dt=0.5".into(),
                "k=[0,1]".into(),
                "name=other".into(),
            ])
            .unwrap();
        assert_eq!(cfg2.integrator.dt, 0.5);
        assert_eq!(cfg2.k.values(), vec![0, 1]);
        assert_eq!(cfg2.name, "other");
        assert!(cfg.with_overrides(&["integrator.dt=-1".into()]).is_err());
        assert!(cfg.with_overrides(&["novalue".into()]).is_err());
    }

    #[test]
    fn product_backend_requires_product_state() {
        let text = MINIMAL
            .replace(
                "kind = \"plus-product\"",
                "kind = \"hardware-efficient\"\ndepth = 2\nseed = 1",
            )
            .replacen("k = 1", "k = 1\nbackend = \"product\"", 1);
        let err = ExperimentConfig::from_toml_str(&text).unwrap_err();
        assert!(
            err.to_string().starts_with("configuration error: backend"),
            "{err}"
        );
    }

    #[test]
    fn observable_forms() {
        let dense = ObservableSpec::sparse("a", "XIZ").build(3).unwrap();
        let sparse = ObservableSpec::sparse("b", "X0 Z2").build(3).unwrap();
        assert_eq!(dense, sparse);
        let sum = ObservableSpec {
            name: "c".into(),
            pauli: None,
            terms: Some("0.5 0 XI\n0.5 0 IX".into()),
        };
        assert_eq!(sum.build(2).unwrap().len(), 2);
        assert!(sum.build(3).is_err());
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = ExperimentConfig::from_toml_str(MINIMAL).unwrap();
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), cfg);
    }
}
