//! The three-step run: reference state, overlap matrices, coefficient
//! evolution. Matrices for an order are fully assembled before its
//! integration starts.

use std::path::Path;
use std::time::Instant;

use num_complex::Complex64;

use qas_core::evolve::{evolve, Mode, Trajectory};
use qas_core::moments::realize_states;
use qas_core::oracle::{dense_from_pauli_sum, fidelity_with_states, ground_state, ExactPropagator};
use qas_core::overlaps::{OverlapAssembler, OverlapMatrices};
use qas_core::state::{build_hardware_efficient_state, CircuitSpec, PauliExpectation};
use qas_core::{
    CMatrix, CVector, Estimator, MomentBasis, PauliSum, ProductState, QasError, StateVector,
};

use crate::config::{Backend, ExperimentConfig, InitialState};
use crate::error::CliError;

/// Results for one moment order.
#[derive(Clone, Debug)]
pub struct OrderRun {
    pub k: usize,
    pub basis_size: usize,
    pub level_sizes: Vec<usize>,
    pub closed_at: Option<usize>,
    pub distinct_strings: usize,
    pub trajectory: Trajectory,
    /// `|<exact(t)|phi(t)>|^2` per recorded time, when the oracle runs in real time.
    pub fidelity: Option<Vec<f64>>,
    /// Exact expectation of each observable per recorded time.
    pub exact_observables: Vec<(String, Vec<f64>)>,
    pub assembly_seconds: f64,
    pub evolve_seconds: f64,
}

impl OrderRun {
    pub fn min_fidelity(&self) -> Option<f64> {
        self.fidelity
            .as_ref()
            .map(|f| f.iter().copied().fold(f64::INFINITY, f64::min))
    }

    pub fn final_energy(&self) -> f64 {
        *self
            .trajectory
            .energy
            .last()
            .expect("trajectory has a first row")
    }

    pub fn summary(&self, name: &str) -> String {
        let traj = &self.trajectory;
        let mut line = format!(
            "{name} K={} m={} closed_at={} final_norm={:.12} final_energy={:.12}",
            self.k,
            self.basis_size,
            self.closed_at.map_or("-".to_string(), |k| k.to_string()),
            traj.norm.last().copied().unwrap_or(f64::NAN),
            self.final_energy(),
        );
        if let Some(f) = &self.fidelity {
            line += &format!(
                " final_fidelity={:.12} min_fidelity={:.12}",
                f.last().copied().unwrap_or(f64::NAN),
                self.min_fidelity().unwrap_or(f64::NAN)
            );
        }
        line += &format!(
            " assembly={:.2}s evolve={:.2}s",
            self.assembly_seconds, self.evolve_seconds
        );
        line
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub num_qubits: usize,
    /// Backend used for overlap measurements (never `Auto`).
    pub backend: Backend,
    /// Dense ground energy of the evolved Hamiltonian, when the oracle ran.
    pub ground_energy: Option<f64>,
    pub runs: Vec<OrderRun>,
}

impl ExperimentReport {
    pub fn run_for(&self, k: usize) -> Option<&OrderRun> {
        self.runs.iter().find(|r| r.k == k)
    }
}

/// Reference state in whichever representations the run needs.
pub struct Reference {
    pub product: Option<ProductState>,
    pub vector: Option<StateVector>,
}

pub fn resolve_backend(cfg: &ExperimentConfig) -> Backend {
    match (cfg.backend, cfg.initial_state.is_product()) {
        (Backend::Auto, true) => Backend::Product,
        (Backend::Auto, false) => Backend::Statevector,
        (b, _) => b,
    }
}

pub fn prepare_reference(
    cfg: &ExperimentConfig,
    n: usize,
    backend: Backend,
) -> Result<Reference, CliError> {
    let need_vector = backend == Backend::Statevector || cfg.oracle;
    match &cfg.initial_state {
        InitialState::PlusProduct | InitialState::ZeroProduct => {
            let product = if matches!(cfg.initial_state, InitialState::PlusProduct) {
                ProductState::plus(n)?
            } else {
                ProductState::zero(n)?
            };
            let vector = if need_vector {
                Some(product.to_state_vector()?)
            } else {
                None
            };
            Ok(Reference {
                product: Some(product),
                vector,
            })
        }
        InitialState::HardwareEfficient {
            depth,
            seed,
            entangler,
        } => {
            let spec = CircuitSpec::random(n, *depth, *seed).with_entangler(*entangler);
            Ok(Reference {
                product: None,
                vector: Some(build_hardware_efficient_state(&spec)?),
            })
        }
        InitialState::GroundStateOf { model } => {
            let mut model = model.clone();
            model.n.get_or_insert(n);
            let h0 = model.build()?;
            if h0.num_qubits() != n {
                return Err(CliError::Config(format!(
                    "initial_state.model: {} qubits, evolved model has {n}",
                    h0.num_qubits()
                )));
            }
            let (_, psi) = ground_state(&dense_from_pauli_sum(&h0)?)?;
            Ok(Reference {
                product: None,
                vector: Some(psi),
            })
        }
        InitialState::File { path } => Ok(Reference {
            product: None,
            vector: Some(read_amplitudes(path, n)?),
        }),
    }
}

/// Reads `re im` pairs, one amplitude per line; `#` comments and blank lines
/// are skipped. The state is normalized after reading.
pub fn read_amplitudes(path: &Path, n: usize) -> Result<StateVector, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Config(format!(
            "initial_state.path: cannot read {}: {e}",
            path.display()
        ))
    })?;
    let mut amps = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|e| QasError::Parse {
                line: i + 1,
                message: format!("bad amplitude '{s}': {e}"),
            })
        };
        if parts.len() != 2 {
            return Err(QasError::Parse {
                line: i + 1,
                message: "expected '<re> <im>'".into(),
            }
            .into());
        }
        amps.push(Complex64::new(parse(parts[0])?, parse(parts[1])?));
    }
    Ok(StateVector::normalized(n, amps)?)
}

fn assemble_all<S: PauliExpectation + ?Sized>(
    basis: &MomentBasis,
    h: &PauliSum,
    state: &S,
    estimator: Estimator,
    with_f: bool,
    observables: &[(String, PauliSum)],
) -> qas_core::Result<(OverlapMatrices, Vec<(String, CMatrix)>)> {
    let mut asm = OverlapAssembler::new(basis, state, estimator)?;
    let e = asm.gram()?;
    let d = asm.operator(h)?;
    let f = if with_f {
        Some(asm.operator(&h.gram_square()?)?)
    } else {
        None
    };
    let obs = observables
        .iter()
        .map(|(name, o)| Ok((name.clone(), asm.operator(o)?)))
        .collect::<qas_core::Result<Vec<_>>>()?;
    Ok((
        OverlapMatrices {
            e,
            d,
            f,
            estimator,
            distinct_strings: asm.distinct_strings(),
        },
        obs,
    ))
}

fn sum_expectation(psi: &StateVector, o: &PauliSum) -> qas_core::Result<f64> {
    let mut acc = Complex64::default();
    for (c, p) in o.terms() {
        acc += c * psi.expectation(p)?;
    }
    Ok(acc.re)
}

/// Runs every requested order. `progress` receives one summary line per order.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    mut progress: impl FnMut(&str),
) -> Result<ExperimentReport, CliError> {
    cfg.validate()?;
    let h = cfg.model.build()?;
    let n = h.num_qubits();
    let observables = cfg
        .observables
        .iter()
        .map(|o| Ok((o.name.clone(), o.build(n)?)))
        .collect::<qas_core::Result<Vec<_>>>()?;
    let backend = resolve_backend(cfg);
    let reference = prepare_reference(cfg, n, backend)?;

    let propagator = if cfg.oracle {
        Some(ExactPropagator::new(&dense_from_pauli_sum(&h)?)?)
    } else {
        None
    };
    let ground_energy = propagator.as_ref().map(ExactPropagator::ground_energy);
    let mut exact_cache: Option<(Vec<f64>, Vec<StateVector>)> = None;

    let with_f = cfg.error_monitor && cfg.mode == Mode::Real;
    let mut runs = Vec::new();
    for k in cfg.k.values() {
        let started = Instant::now();
        let basis = MomentBasis::from_hamiltonian(&h, k)?;
        let (matrices, obs_mats) = match backend {
            Backend::Product => {
                let state = reference
                    .product
                    .as_ref()
                    .expect("product reference prepared");
                assemble_all(&basis, &h, state, cfg.estimator, with_f, &observables)?
            }
            _ => {
                let state = reference
                    .vector
                    .as_ref()
                    .expect("statevector reference prepared");
                assemble_all(&basis, &h, state, cfg.estimator, with_f, &observables)?
            }
        };
        let assembly_seconds = started.elapsed().as_secs_f64();

        let started = Instant::now();
        let mut alpha0 = CVector::zeros(basis.len());
        alpha0[0] = Complex64::new(1.0, 0.0);
        let trajectory = evolve(&matrices, &alpha0, &cfg.integrator, cfg.mode, &obs_mats)?;
        let evolve_seconds = started.elapsed().as_secs_f64();

        let (mut fidelity, mut exact_observables) = (None, Vec::new());
        if let (Some(prop), Some(psi), Mode::Real) = (&propagator, &reference.vector, cfg.mode) {
            let stale = exact_cache
                .as_ref()
                .is_none_or(|(t, _)| *t != trajectory.times);
            if stale {
                exact_cache = Some((
                    trajectory.times.clone(),
                    prop.evolve(psi, &trajectory.times)?,
                ));
            }
            let exact = &exact_cache.as_ref().expect("exact states cached").1;
            let states = realize_states(&basis, psi)?;
            fidelity = Some(
                exact
                    .iter()
                    .zip(&trajectory.alphas)
                    .map(|(ex, a)| fidelity_with_states(ex, &states, a))
                    .collect::<qas_core::Result<Vec<_>>>()?,
            );
            for (name, o) in &observables {
                let series = exact
                    .iter()
                    .map(|ex| sum_expectation(ex, o))
                    .collect::<qas_core::Result<Vec<_>>>()?;
                exact_observables.push((name.clone(), series));
            }
        }

        let run = OrderRun {
            k,
            basis_size: basis.len(),
            level_sizes: basis.level_sizes().to_vec(),
            closed_at: basis.closed_at(),
            distinct_strings: matrices.distinct_strings,
            trajectory,
            fidelity,
            exact_observables,
            assembly_seconds,
            evolve_seconds,
        };
        progress(&run.summary(&cfg.name));
        runs.push(run);
    }

    Ok(ExperimentReport {
        config: cfg.clone(),
        num_qubits: n,
        backend,
        ground_energy,
        runs,
    })
}
