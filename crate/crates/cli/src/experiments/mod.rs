//! Registered experiments.
//!
//! | experiment | checks |
//! |---|---|
//! | amplitude-damping | Kraus moments against the Heisenberg closed forms; late-time minimum uncertainty |
//! | discord-relativity | zero discord before a partial swap, positive after, optimizer against a measurement grid |
//! | master-equation-scaling | cat-state coherence decay rate grows as the square of the separation |
//! | nz-lemmas | projector obstructions are generic; the trace identity is exact |
//! | preferred-structure | ranking of alternative two-mode structures by asymptotic uncertainty |
//! | qbm-parallel-decoherence | both the particle and the center of mass decohere; the symplectic floor holds |
//! | qbm-restructure | restructured coefficients, decoupled environment, invariant normal frequencies |
//! | supplement-algebra | CAR/CCR and spin algebras of the second-quantization maps |
//! | two-mode-asymptotics | closed-form asymptotic products and covariance against long-time simulation |
//! | zero-discord-classifier | classical-quantum, classical-classical and entangled families |

mod algebra;
mod correlations;
mod damping;
mod qbm;

use crate::config::{ExperimentConfig, Value};
use crate::error::{CliError, Result};
use crate::report::Report;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy)]
pub enum ParamDefault {
    Real(f64),
    Integer(i64),
    Text(&'static str),
    Reals(&'static [f64]),
    /// Optional; the experiment derives a value when absent.
    Derived,
}

#[derive(Debug, Clone, Copy)]
pub struct ParamSpec {
    pub name: &'static str,
    pub default: ParamDefault,
}

const fn p(name: &'static str, default: ParamDefault) -> ParamSpec {
    ParamSpec { name, default }
}

/// Metrics, pass flags and plot-ready series produced by one run.
#[derive(Debug, Default)]
pub struct Outcome {
    pub metrics: BTreeMap<String, f64>,
    pub pass: BTreeMap<String, bool>,
    pub series: BTreeMap<String, Vec<f64>>,
}

impl Outcome {
    fn metric(&mut self, name: &str, v: f64) -> &mut Self {
        self.metrics.insert(name.into(), v);
        self
    }

    fn check(&mut self, name: &str, ok: bool) -> &mut Self {
        self.pass.insert(name.into(), ok);
        self
    }

    fn series(&mut self, name: &str, v: Vec<f64>) -> &mut Self {
        self.series.insert(name.into(), v);
        self
    }
}

pub struct Experiment {
    pub name: &'static str,
    pub description: &'static str,
    pub params: &'static [ParamSpec],
    run: fn(&Params, u64) -> Result<Outcome>,
}

use ParamDefault::{Derived, Integer, Real, Reals, Text};

/// Lexicographic by name.
pub static REGISTRY: &[Experiment] = &[
    Experiment {
        name: "amplitude-damping",
        description: "Kraus evolution of a coherent state against closed-form damped moments",
        params: &[
            p("alpha", Real(1.0)),
            p("dim", Integer(40)),
            p("k", Real(0.5)),
            p("late_kt", Real(15.0)),
            p("mass", Real(1.0)),
            p("omega", Real(1.0)),
            p("times", Reals(&[0.1, 1.0, 5.0])),
        ],
        run: damping::amplitude_damping,
    },
    Experiment {
        name: "discord-relativity",
        description: "discord of a product state before and after a partial-swap re-factorization",
        params: &[
            p("grid", Integer(100)),
            p("p_a", Real(0.3)),
            p("p_b", Real(0.4)),
            p("restarts", Integer(32)),
            p("theta", Real(std::f64::consts::FRAC_PI_4)),
        ],
        run: correlations::discord_relativity,
    },
    Experiment {
        name: "master-equation-scaling",
        description: "cat-state coherence decay rates at separations d and 2d under the Brownian master equation",
        params: &[
            p("basis_frequency", Real(1.0)),
            p("dim", Integer(30)),
            p("gamma", Real(0.02)),
            p("kt", Real(500.0)),
            p("mass", Real(1.0)),
            p("samples", Integer(40)),
            p("separation", Real(1.5)),
            p("system_frequency", Real(1.0)),
            p("window", Real(1.0)),
        ],
        run: damping::master_equation_scaling,
    },
    Experiment {
        name: "nz-lemmas",
        description: "projection-operator obstructions over random states under a partial-swap structure map",
        params: &[p("count", Integer(100)), p("env_weight", Real(0.3)), p("theta", Real(std::f64::consts::FRAC_PI_4))],
        run: correlations::nz_lemmas,
    },
    Experiment {
        name: "preferred-structure",
        description: "ranks identity, center-of-mass/relative and random structures by asymptotic uncertainty",
        params: &[
            p("candidates", Integer(8)),
            p("damping", Reals(&[0.5, 0.8])),
            p("masses", Reals(&[1.0, 1.0])),
            p("omegas", Reals(&[1.0, 1.0])),
        ],
        run: damping::preferred_structure,
    },
    Experiment {
        name: "qbm-parallel-decoherence",
        description: "closed Ohmic Caldeira-Leggett model: purity of the particle and of the center of mass",
        params: &[
            p("dt", Real(0.5)),
            p("env_mass", Real(1.0)),
            p("gamma", Real(0.05)),
            p("kt", Derived),
            p("n_env", Integer(16)),
            p("omega_cut", Real(4.0)),
            p("system_frequency", Real(1.0)),
            p("system_mass", Real(1.0)),
            p("t_end", Real(20.0)),
        ],
        run: qbm::parallel_decoherence,
    },
    Experiment {
        name: "qbm-restructure",
        description: "center-of-mass/relative restructuring of the Caldeira-Leggett Hamiltonian and its normal modes",
        params: &[
            p("coupling_sign", Text("plus")),
            p("env_mass", Real(1.0)),
            p("gamma", Real(0.05)),
            p("omega_cut", Real(4.0)),
            p("sizes", Reals(&[2.0, 4.0, 8.0])),
            p("system_frequency", Real(1.0)),
            p("system_mass", Real(1.0)),
        ],
        run: qbm::restructure,
    },
    Experiment {
        name: "supplement-algebra",
        description: "Jordan-Wigner, fermion Fourier, Bogoliubov, Holstein-Primakoff and truncated boson algebras",
        params: &[p("fock_dim", Integer(5)), p("sites", Integer(4))],
        run: algebra::supplement_algebra,
    },
    Experiment {
        name: "two-mode-asymptotics",
        description: "asymptotic uncertainty products and covariance of alternative structures against simulation",
        params: &[
            p("alphas", Reals(&[0.7, 0.2, -0.4, 0.5])),
            p("coefficients", Text("random")),
            p("damping", Reals(&[0.3, 0.9])),
            p("dim", Integer(10)),
            p("kt", Real(12.0)),
            p("masses", Reals(&[1.0, 2.0])),
            p("omegas", Reals(&[1.0, 0.5])),
            p("samples", Integer(20)),
        ],
        run: damping::two_mode_asymptotics,
    },
    Experiment {
        name: "zero-discord-classifier",
        description: "classifies random classical-quantum, classical-classical and entangled pure states",
        params: &[p("count", Integer(50)), p("dim_a", Integer(2)), p("dim_b", Integer(2)), p("tol", Real(1e-8))],
        run: correlations::zero_discord_classifier,
    },
];

pub fn find(name: &str) -> Option<&'static Experiment> {
    REGISTRY.iter().find(|e| e.name == name)
}

/// One line per experiment: name, padded, then its description.
pub fn list_experiments() -> String {
    let width = REGISTRY.iter().map(|e| e.name.len()).max().unwrap_or(0);
    REGISTRY.iter().map(|e| format!("{:<width$}  {}\n", e.name, e.description)).collect()
}

/// Parameters after defaults and type checks.
#[derive(Debug, Clone)]
pub struct Params {
    values: BTreeMap<String, Value>,
}

impl Params {
    pub fn resolve(exp: &Experiment, given: &BTreeMap<String, Value>) -> Result<Self> {
        if let Some(unknown) = given.keys().find(|k| !exp.params.iter().any(|s| s.name == k.as_str())) {
            return Err(CliError::Config(format!("{} does not take parameter `{unknown}`", exp.name)));
        }
        let mut values = BTreeMap::new();
        for spec in exp.params {
            let bad = |v: &Value, want: &str| {
                CliError::Config(format!("parameter `{}` must be {want}, got {}", spec.name, v.render()))
            };
            let value = match (spec.default, given.get(spec.name)) {
                (Derived, None) => continue,
                (Real(_) | Derived, Some(Value::Integer(i))) => Value::Real(*i as f64),
                (Real(_) | Derived, Some(v @ Value::Real(_))) => v.clone(),
                (Real(_) | Derived, Some(v)) => return Err(bad(v, "a real")),
                (Integer(_), Some(v @ Value::Integer(_))) => v.clone(),
                (Integer(_), Some(v)) => return Err(bad(v, "an integer")),
                (Text(_), Some(v @ Value::Text(_))) => v.clone(),
                (Text(_), Some(v)) => return Err(bad(v, "text")),
                (Reals(_), Some(Value::List(items))) => Value::List(
                    items
                        .iter()
                        .map(|x| match x {
                            Value::Integer(i) => Value::Real(*i as f64),
                            other => other.clone(),
                        })
                        .collect(),
                ),
                (Reals(_), Some(v)) => return Err(bad(v, "a list")),
                (Real(x), None) => Value::Real(x),
                (Integer(i), None) => Value::Integer(i),
                (Text(s), None) => Value::Text(s.into()),
                (Reals(xs), None) => Value::List(xs.iter().map(|&x| Value::Real(x)).collect()),
            };
            values.insert(spec.name.to_string(), value);
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &BTreeMap<String, Value> {
        &self.values
    }

    fn real(&self, name: &str) -> f64 {
        match self.values.get(name) {
            Some(Value::Real(x)) => *x,
            other => panic!("parameter {name} resolved to {other:?}"),
        }
    }

    fn optional_real(&self, name: &str) -> Option<f64> {
        self.values.get(name).map(|_| self.real(name))
    }

    fn positive(&self, name: &str) -> Result<f64> {
        let x = self.real(name);
        if x > 0.0 {
            Ok(x)
        } else {
            Err(CliError::Config(format!("parameter `{name}` must be positive, got {x}")))
        }
    }

    fn count(&self, name: &str, min: i64, max: i64) -> Result<usize> {
        match self.values.get(name) {
            Some(Value::Integer(i)) if (min..=max).contains(i) => Ok(*i as usize),
            Some(Value::Integer(i)) => {
                Err(CliError::Config(format!("parameter `{name}` must lie in {min}..={max}, got {i}")))
            }
            other => panic!("parameter {name} resolved to {other:?}"),
        }
    }

    fn text(&self, name: &str) -> &str {
        match self.values.get(name) {
            Some(Value::Text(s)) => s,
            other => panic!("parameter {name} resolved to {other:?}"),
        }
    }

    fn reals(&self, name: &str, len: Option<usize>) -> Result<Vec<f64>> {
        let xs: Vec<f64> = match self.values.get(name) {
            Some(Value::List(items)) => items
                .iter()
                .map(|v| match v {
                    Value::Real(x) => *x,
                    other => panic!("list {name} holds {other:?}"),
                })
                .collect(),
            other => panic!("parameter {name} resolved to {other:?}"),
        };
        match len {
            Some(n) if xs.len() != n => {
                Err(CliError::Config(format!("parameter `{name}` needs {n} entries, got {}", xs.len())))
            }
            _ if xs.is_empty() => Err(CliError::Config(format!("parameter `{name}` is empty"))),
            _ => Ok(xs),
        }
    }
}

fn pair(xs: &[f64]) -> [f64; 2] {
    [xs[0], xs[1]]
}

/// Validates the config, runs the experiment and assembles the report.
/// `seed_override` wins over the config's seed; one of them must be present.
pub fn run_experiment(cfg: &ExperimentConfig, seed_override: Option<u64>) -> Result<Report> {
    let exp = find(&cfg.experiment).ok_or_else(|| {
        let names: Vec<&str> = REGISTRY.iter().map(|e| e.name).collect();
        CliError::Config(format!("unknown experiment {:?}; expected one of {}", cfg.experiment, names.join(", ")))
    })?;
    let seed = seed_override
        .or(cfg.seed)
        .ok_or_else(|| CliError::Config("missing required key `seed`".into()))?;
    let params = Params::resolve(exp, &cfg.parameters)?;
    let outcome = (exp.run)(&params, seed)?;
    let report = Report {
        experiment: exp.name.to_string(),
        seed,
        config: params.values,
        metrics: outcome.metrics,
        pass: outcome.pass,
        series: outcome.series,
        artifacts: Vec::new(),
    };
    report.check_finite()?;
    Ok(report)
}
