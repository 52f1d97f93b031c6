//! Named experiment configurations.

use qas_core::evolve::{IntegratorConfig, Method, Mode};
use qas_core::models::{Family, ModelSpec};
use qas_core::state::Entangler;
use qas_core::Estimator;

use crate::config::{Backend, ExperimentConfig, InitialState, ObservableSpec, Orders, OutputSpec};

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    build: fn() -> ExperimentConfig,
}

impl Preset {
    pub fn config(&self) -> ExperimentConfig {
        (self.build)()
    }
}

const DEEP_DEPTH: usize = 200;
const DEEP_SEED: u64 = 0;

fn real_time(t_final: f64, record_every: usize) -> IntegratorConfig {
    IntegratorConfig {
        method: Method::Rk4,
        dt: 1e-3,
        t_final,
        record_every,
        ..IntegratorConfig::default()
    }
}

fn base(name: &str, model: ModelSpec, initial_state: InitialState, k: Orders) -> ExperimentConfig {
    ExperimentConfig {
        name: name.into(),
        model,
        initial_state,
        k,
        mode: Mode::Real,
        integrator: real_time(8.0, 10),
        estimator: Estimator::Exact,
        backend: Backend::Auto,
        observables: Vec::new(),
        oracle: true,
        error_monitor: false,
        output: OutputSpec::default(),
    }
}

fn deep_circuit() -> InitialState {
    InitialState::HardwareEfficient {
        depth: DEEP_DEPTH,
        seed: DEEP_SEED,
        entangler: Entangler::Chain,
    }
}

fn fig2a() -> ExperimentConfig {
    ExperimentConfig {
        integrator: real_time(8.0, 1),
        observables: vec![ObservableSpec::sparse("x", "X0")],
        error_monitor: true,
        ..base(
            "fig2a-single-qubit",
            ModelSpec::new(Family::SingleZ, 1),
            InitialState::PlusProduct,
            Orders::One(1),
        )
    }
}

fn fig2b() -> ExperimentConfig {
    ExperimentConfig {
        observables: vec![ObservableSpec::sparse("x1", "X0")],
        ..base(
            "fig2b-barren-plateau",
            ModelSpec::new(Family::ZzPair, 12),
            deep_circuit(),
            Orders::One(1),
        )
    }
}

fn fig3a() -> ExperimentConfig {
    base(
        "fig3a-fermion-tunnel",
        ModelSpec::new(Family::FermionTunnel, 10),
        deep_circuit(),
        Orders::Many(vec![1, 2, 3]),
    )
}

fn fig3b() -> ExperimentConfig {
    ExperimentConfig {
        integrator: real_time(4.0, 10),
        ..base(
            "fig3b-ising",
            ModelSpec::ising(10, 1.0, 1.0),
            deep_circuit(),
            Orders::Many(vec![1, 2, 3]),
        )
    }
}

fn fig5() -> ExperimentConfig {
    ExperimentConfig {
        integrator: real_time(4.0, 10),
        observables: vec![
            ObservableSpec::sparse("z1", "Z0"),
            ObservableSpec::sparse("z2", "Z1"),
        ],
        oracle: false,
        backend: Backend::Product,
        ..base(
            "fig5-product-large-n",
            ModelSpec::random_strings(1000, 9, 0),
            InitialState::ZeroProduct,
            Orders::One(9),
        )
    }
}

fn fig6() -> ExperimentConfig {
    ExperimentConfig {
        mode: Mode::Imaginary,
        integrator: IntegratorConfig {
            method: Method::Rk4,
            dt: 1e-2,
            t_final: 60.0,
            renormalize_each_step: true,
            record_every: 1,
            ..IntegratorConfig::default()
        },
        ..base(
            "fig6-imag-ising",
            ModelSpec::ising(10, 1.0, 1.0),
            deep_circuit(),
            Orders::Many(vec![1, 2, 3]),
        )
    }
}

// The quench presets write the transverse field with the opposite sign to the
// +h/2 convention of the Ising family; the two are related by a global X flip.
fn quench_ising() -> ExperimentConfig {
    base(
        "quench-ising",
        ModelSpec::ising(8, 1.0, -2.0),
        InitialState::GroundStateOf {
            model: ModelSpec::ising(8, 1.0, -0.5),
        },
        Orders::Many(vec![1, 2, 3, 4]),
    )
}

fn quench_xxz() -> ExperimentConfig {
    base(
        "quench-xxz",
        ModelSpec::xxz(8, 2.0),
        InitialState::GroundStateOf {
            model: ModelSpec::xxz(8, 0.5),
        },
        Orders::Many(vec![1, 2, 3]),
    )
}

pub fn presets() -> Vec<Preset> {
    vec![
        Preset {
            name: "fig2a-single-qubit",
            description: "H = Z on |+>, K = 1; <X>(t) against cos 2t",
            build: fig2a,
        },
        Preset {
            name: "fig2b-barren-plateau",
            description: "N = 12, depth-200 hardware-efficient start, H = Z1 Z2, K = 1",
            build: fig2b,
        },
        Preset {
            name: "fig3a-fermion-tunnel",
            description: "N = 10 end-to-end fermion tunnelling from a deep circuit, K = 1, 2, 3",
            build: fig3a,
        },
        Preset {
            name: "fig3b-ising",
            description: "N = 10 transverse Ising (J = h = 1) from a deep circuit, K = 1, 2, 3",
            build: fig3b,
        },
        Preset {
            name: "fig5-product-large-n",
            description: "N = 1000, 9 random strings from |0...0>, K = 9, product backend",
            build: fig5,
        },
        Preset {
            name: "fig6-imag-ising",
            description:
                "imaginary time, N = 10 Ising (J = h = 1) from a deep circuit, K = 1, 2, 3",
            build: fig6,
        },
        Preset {
            name: "quench-ising",
            description: "N = 8 Ising ground state at |h| = 0.5 quenched to |h| = 2, K = 1..4",
            build: quench_ising,
        },
        Preset {
            name: "quench-xxz",
            description: "N = 8 XXZ ground state at delta = 0.5 quenched to delta = 2, K = 1, 2, 3",
            build: quench_xxz,
        },
    ]
}

pub fn preset(name: &str) -> Option<ExperimentConfig> {
    presets()
        .into_iter()
        .find(|p| p.name == name)
        .map(|p| p.config())
}
