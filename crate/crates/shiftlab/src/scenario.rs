//! Scenario files: the declarative front door.
//!
//! A scenario is a TOML document naming an operator (plus optional extras),
//! a dictionary of vectors/sequences, and an ordered experiment list. The
//! schema is deliberately small — every field is either a name, a rational
//! literal (`-3/4`, `1/2+1/3i`), or a plain number — so that a scenario can
//! be read top to bottom like the worked example it encodes.
//!
//! Everything random is seeded: a scenario-level `seed` combines with the
//! vector's name (FNV-1a) so that distinct vectors draw distinct, but
//! reproducible, rational entries. Reports embed the scenario source, which
//! makes reruns and witness verification self-contained.

use std::collections::BTreeMap;
use std::path::Path;

use num_traits::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{crat, parse_crat, parse_rat, rat, CRat, Rat};
use crate::linalg::C64;
use crate::operator::{
    build_truncation, parse_entries, parse_weight_list, OperatorKind, OperatorSpec,
    TruncatedOperator, VolterraScheme, WeightRule,
};
use crate::sequence::CoefficientSequence;
use crate::shift_rep::WeightSequence;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_D_MAX: usize = 6;
pub const DEFAULT_N_MAX_RANK: usize = 12;

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    /// Base seed for every `random` vector in the file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// The operator experiments refer to as `default`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<OperatorConfig>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub operators: BTreeMap<String, OperatorConfig>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub vectors: BTreeMap<String, VectorConfig>,
    #[serde(default)]
    pub experiments: Vec<ExperimentConfig>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfig {
    /// weighted_shift | adjoint_shift | jordan | diagonal | volterra |
    /// dense | random_dense
    pub kind: String,
    pub n: usize,
    /// Shift weight rule: `1/(n+1)`-style or a rational constant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<String>,
    /// Explicit shift weights w_0, w_1, … (overrides `weights`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight_list: Option<Vec<String>>,
    /// Jordan eigenvalue (complex rational literal).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenvalue: Option<String>,
    /// Diagonal entries (n of them) or dense entries (n² row-major).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entries: Option<Vec<String>>,
    /// Volterra discretisation: midpoint | exact_basis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<String>,
    /// Faithful-power horizon override.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    /// Seed for random_dense (falls back to the scenario seed).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct VectorConfig {
    /// Standard basis vector e_k.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<usize>,
    /// Explicit complex-rational entries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entries: Option<Vec<String>>,
    /// geometric | reciprocal | reciprocal_factorial | ones | moments
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<String>,
    /// Ratio for the geometric rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<String>,
    /// Index offset: entry_n = 1/(n+offset) (reciprocal, offset ≥ 1,
    /// default 1) resp. 1/(n+offset)! (reciprocal_factorial, default 0).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<usize>,
    /// Poles for the moments rule (positive rationals).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
    /// Load entries from a text file (one literal per line, `#` comments).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random: Option<RandomVector>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RandomVector {
    pub length: usize,
    /// Overrides the scenario seed for this vector alone.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// rational (default) | complex_rational
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
}

/// One experiment. `kind` selects the variant; vector- and operator-valued
/// fields hold names declared in the scenario (operators default to
/// `default`). Tolerances and order bounds are per-experiment overrides.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExperimentConfig {
    /// ‖A·K − K·S_β‖ for K = build_K(A, f, β, m), plus tail bound and kernel.
    Intertwining {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        operator: Option<String>,
        f: String,
        m: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol: Option<f64>,
    },
    /// K_f·φ(S_β) against the directly built K_{φ(A)f}.
    Compose {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        operator: Option<String>,
        f: String,
        /// Polynomial coefficients φ_0, φ_1, … (complex rationals).
        phi: Vec<String>,
        m: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol: Option<f64>,
    },
    /// Case-1/Case-2 decision for the symbol of (A, f, g).
    Injectivity {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        operator: Option<String>,
        f: String,
        g: String,
        length: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        d_max: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_max_rank: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol: Option<f64>,
    },
    /// Rank profile + exact Kronecker oracle on a declared sequence.
    SequenceRationality {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        sequence: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        d_max: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_max_rank: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol: Option<f64>,
    },
    /// Hilbert–Schmidt identity Σ|H_{ij}|² = Σ min(n+1, 2N−1−n)|c_n|².
    HsCheck {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        sequence: String,
        order: usize,
    },
    /// Tail ratio test c_{n+1} = α·c_n for n ≥ k.
    EventuallyGeometric {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        sequence: String,
        k: usize,
    },
    /// |ν| constant on the sampling circle.
    ConstantModulus {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        sequence: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        grid: Option<usize>,
    },
    /// ‖A^n + λA^{−n}‖ on a dyadic sweep, with optional exponent fit,
    /// difference bound, and nilpotency conclusion.
    Growth {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        operator: Option<String>,
        lambda: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dyadic_min: Option<usize>,
        dyadic_max: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        fit: Option<bool>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        nilpotency: Option<bool>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        difference_bound: Option<bool>,
    },
    /// λ-scaling and adjoint deviations over a list of λ.
    GrowthIdentities {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        operator: Option<String>,
        lambdas: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_values: Option<Vec<usize>>,
    },
    /// ‖(A^{−n} + λA^n)x‖ at fixed x.
    LocalGrowth {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        operator: Option<String>,
        lambda: String,
        x: String,
        n_values: Vec<usize>,
    },
    /// ‖A^{n_max}‖^{1/n_max} with the dyadic stabilisation trail.
    SpectralRadius {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        operator: Option<String>,
        n_max: usize,
    },
    /// ‖A^n‖ for n = 0…n_max (CSV-friendly decay table).
    PowerNorms {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        operator: Option<String>,
        n_max: usize,
    },
    /// Finite linear dependence in the orbit {A^n f}.
    Dependence {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        operator: Option<String>,
        f: String,
        n_max: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol: Option<f64>,
    },
    /// Rank of [x, Ax, …, A^{m−1}x].
    Krylov {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        operator: Option<String>,
        x: String,
        m: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol: Option<f64>,
    },
    /// Cyclicity of y = Σ α_k A^k x, with hypothesis probes; `beta` adds
    /// the K-matrix route for the combination identity.
    Combination {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        operator: Option<String>,
        x: String,
        alpha: String,
        m: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol: Option<f64>,
    },
    /// Duality bridge: rational power series ⇒ non-cyclic for the backward
    /// shift.
    Dss {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        sequence: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        d_max: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_max_rank: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol: Option<f64>,
    },
    /// Interleaved moment probe ⟨T^n x, y⟩ with rationality verdicts.
    SquareLattice {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        operator: Option<String>,
        x: String,
        y: String,
        length: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        d_max: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_max_rank: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol: Option<f64>,
    },
    /// The stock Volterra studies (midpoint radius / exact-basis cyclicity).
    Volterra {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        /// midpoint | exact_basis
        scheme: String,
        n: usize,
        n_max: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol: Option<f64>,
    },
}

impl ExperimentConfig {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ExperimentConfig::Intertwining { .. } => "intertwining",
            ExperimentConfig::Compose { .. } => "compose",
            ExperimentConfig::Injectivity { .. } => "injectivity",
            ExperimentConfig::SequenceRationality { .. } => "sequence_rationality",
            ExperimentConfig::HsCheck { .. } => "hs_check",
            ExperimentConfig::EventuallyGeometric { .. } => "eventually_geometric",
            ExperimentConfig::ConstantModulus { .. } => "constant_modulus",
            ExperimentConfig::Growth { .. } => "growth",
            ExperimentConfig::GrowthIdentities { .. } => "growth_identities",
            ExperimentConfig::LocalGrowth { .. } => "local_growth",
            ExperimentConfig::SpectralRadius { .. } => "spectral_radius",
            ExperimentConfig::PowerNorms { .. } => "power_norms",
            ExperimentConfig::Dependence { .. } => "dependence",
            ExperimentConfig::Krylov { .. } => "krylov",
            ExperimentConfig::Combination { .. } => "combination",
            ExperimentConfig::Dss { .. } => "dss",
            ExperimentConfig::SquareLattice { .. } => "square_lattice",
            ExperimentConfig::Volterra { .. } => "volterra",
        }
    }

    pub fn label(&self) -> Option<&str> {
        match self {
            ExperimentConfig::Intertwining { label, .. }
            | ExperimentConfig::Compose { label, .. }
            | ExperimentConfig::Injectivity { label, .. }
            | ExperimentConfig::SequenceRationality { label, .. }
            | ExperimentConfig::HsCheck { label, .. }
            | ExperimentConfig::EventuallyGeometric { label, .. }
            | ExperimentConfig::ConstantModulus { label, .. }
            | ExperimentConfig::Growth { label, .. }
            | ExperimentConfig::GrowthIdentities { label, .. }
            | ExperimentConfig::LocalGrowth { label, .. }
            | ExperimentConfig::SpectralRadius { label, .. }
            | ExperimentConfig::PowerNorms { label, .. }
            | ExperimentConfig::Dependence { label, .. }
            | ExperimentConfig::Krylov { label, .. }
            | ExperimentConfig::Combination { label, .. }
            | ExperimentConfig::Dss { label, .. }
            | ExperimentConfig::SquareLattice { label, .. }
            | ExperimentConfig::Volterra { label, .. } => label.as_deref(),
        }
    }

    fn tol_override(&self) -> Option<f64> {
        match self {
            ExperimentConfig::Intertwining { tol, .. }
            | ExperimentConfig::Compose { tol, .. }
            | ExperimentConfig::Injectivity { tol, .. }
            | ExperimentConfig::SequenceRationality { tol, .. }
            | ExperimentConfig::Dependence { tol, .. }
            | ExperimentConfig::Krylov { tol, .. }
            | ExperimentConfig::Combination { tol, .. }
            | ExperimentConfig::Dss { tol, .. }
            | ExperimentConfig::SquareLattice { tol, .. }
            | ExperimentConfig::Volterra { tol, .. } => *tol,
            _ => None,
        }
    }
}

/// A parsed, checked, fully built scenario: operators constructed, vectors
/// materialised, original source retained for the report.
#[derive(Debug)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub source: String,
    pub operators: BTreeMap<String, TruncatedOperator>,
    pub vectors: BTreeMap<String, CoefficientSequence>,
    /// The contract rescale A ↦ A/(‖A‖+1) was applied to every operator.
    pub contracted: bool,
}

pub fn parse_scenario(text: &str) -> Result<ScenarioFile> {
    let file: ScenarioFile =
        toml::from_str(text).map_err(|e| Error::Parse(format!("scenario: {e}")))?;
    if file.name.trim().is_empty() {
        return Err(Error::Parse("scenario name must be nonempty".into()));
    }
    for (idx, exp) in file.experiments.iter().enumerate() {
        if let Some(t) = exp.tol_override() {
            if !(t > 0.0) {
                return Err(Error::Parse(format!(
                    "experiment {} ({}) has non-positive tolerance {t}",
                    idx + 1,
                    exp.kind_name()
                )));
            }
        }
    }
    Ok(file)
}

/// Builds every declared operator and vector. `contract` applies the
/// explicit rescale A ↦ A/(‖A‖+1) to all operators — the "we may assume
/// r(A) < 1" reduction, opt-in by flag.
pub fn resolve(
    file: ScenarioFile,
    source: String,
    contract: bool,
    base_dir: Option<&Path>,
) -> Result<Scenario> {
    let mut operators = BTreeMap::new();
    if let Some(cfg) = &file.operator {
        operators.insert("default".to_string(), build_operator(cfg, file.seed)?);
    }
    for (name, cfg) in &file.operators {
        if name == "default" && file.operator.is_some() {
            return Err(Error::Parse(
                "operator `default` declared twice (top-level and named)".into(),
            ));
        }
        operators.insert(name.clone(), build_operator(cfg, file.seed)?);
    }
    if contract {
        for op in operators.values_mut() {
            *op = op.contract_rescale();
        }
    }
    let mut vectors = BTreeMap::new();
    for (name, cfg) in &file.vectors {
        vectors.insert(name.clone(), build_vector(name, cfg, file.seed, base_dir)?);
    }
    let scenario = Scenario {
        file,
        source,
        operators,
        vectors,
        contracted: contract,
    };
    scenario.check_references()?;
    Ok(scenario)
}

impl Scenario {
    pub fn operator(&self, name: Option<&str>) -> Result<&TruncatedOperator> {
        let key = name.unwrap_or("default");
        self.operators
            .get(key)
            .ok_or_else(|| Error::Parse(format!("unresolved operator `{key}`")))
    }

    pub fn vector(&self, name: &str) -> Result<&CoefficientSequence> {
        self.vectors
            .get(name)
            .ok_or_else(|| Error::Parse(format!("unresolved vector `{name}`")))
    }

    pub fn effective_tol(&self, exp: &ExperimentConfig) -> f64 {
        exp.tol_override().unwrap_or(DEFAULT_TOL)
    }

    /// Every reference an experiment makes must resolve now, not at
    /// execution time.
    fn check_references(&self) -> Result<()> {
        for exp in &self.file.experiments {
            for v in exp.vector_refs() {
                self.vector(v)?;
            }
            if let Some(op) = exp.operator_ref() {
                self.operator(op)?;
            }
        }
        Ok(())
    }
}

impl ExperimentConfig {
    /// Names of vectors/sequences the experiment reads.
    pub fn vector_refs(&self) -> Vec<&str> {
        match self {
            ExperimentConfig::Intertwining { f, .. } => vec![f],
            ExperimentConfig::Compose { f, .. } => vec![f],
            ExperimentConfig::Injectivity { f, g, .. } => vec![f, g],
            ExperimentConfig::SequenceRationality { sequence, .. }
            | ExperimentConfig::HsCheck { sequence, .. }
            | ExperimentConfig::EventuallyGeometric { sequence, .. }
            | ExperimentConfig::ConstantModulus { sequence, .. }
            | ExperimentConfig::Dss { sequence, .. } => vec![sequence],
            ExperimentConfig::LocalGrowth { x, .. } => vec![x],
            ExperimentConfig::Dependence { f, .. } => vec![f],
            ExperimentConfig::Krylov { x, .. } => vec![x],
            ExperimentConfig::Combination { x, alpha, .. } => vec![x, alpha],
            ExperimentConfig::SquareLattice { x, y, .. } => vec![x, y],
            ExperimentConfig::Growth { .. }
            | ExperimentConfig::GrowthIdentities { .. }
            | ExperimentConfig::SpectralRadius { .. }
            | ExperimentConfig::PowerNorms { .. }
            | ExperimentConfig::Volterra { .. } => vec![],
        }
    }

    /// The operator name the experiment runs against, when it needs one.
    /// `Some(None)` collapses to `default`.
    pub fn operator_ref(&self) -> Option<Option<&str>> {
        match self {
            ExperimentConfig::Intertwining { operator, .. }
            | ExperimentConfig::Compose { operator, .. }
            | ExperimentConfig::Injectivity { operator, .. }
            | ExperimentConfig::Growth { operator, .. }
            | ExperimentConfig::GrowthIdentities { operator, .. }
            | ExperimentConfig::LocalGrowth { operator, .. }
            | ExperimentConfig::SpectralRadius { operator, .. }
            | ExperimentConfig::PowerNorms { operator, .. }
            | ExperimentConfig::Dependence { operator, .. }
            | ExperimentConfig::Krylov { operator, .. }
            | ExperimentConfig::Combination { operator, .. }
            | ExperimentConfig::SquareLattice { operator, .. } => Some(operator.as_deref()),
            ExperimentConfig::SequenceRationality { .. }
            | ExperimentConfig::HsCheck { .. }
            | ExperimentConfig::EventuallyGeometric { .. }
            | ExperimentConfig::ConstantModulus { .. }
            | ExperimentConfig::Dss { .. }
            | ExperimentConfig::Volterra { .. } => None,
        }
    }
}

fn build_operator(cfg: &OperatorConfig, scenario_seed: Option<u64>) -> Result<TruncatedOperator> {
    let kind = match cfg.kind.as_str() {
        "weighted_shift" | "adjoint_shift" => {
            let rule = match (&cfg.weight_list, &cfg.weights) {
                (Some(list), _) => WeightRule::from_list(parse_weight_list(list)?)?,
                (None, Some(spec)) => WeightRule::parse(spec)?,
                (None, None) => {
                    return Err(Error::Parse(format!(
                        "{} needs `weights` or `weight_list`",
                        cfg.kind
                    )))
                }
            };
            if cfg.kind == "weighted_shift" {
                OperatorKind::WeightedShift { weights: rule }
            } else {
                OperatorKind::AdjointShift { weights: rule }
            }
        }
        "jordan" => {
            let ev = cfg
                .eigenvalue
                .as_deref()
                .ok_or_else(|| Error::Parse("jordan needs `eigenvalue`".into()))?;
            OperatorKind::JordanBlock {
                eigenvalue: parse_crat(ev)?,
            }
        }
        "diagonal" => {
            let entries = cfg
                .entries
                .as_deref()
                .ok_or_else(|| Error::Parse("diagonal needs `entries`".into()))?;
            OperatorKind::Diagonal {
                entries: parse_entries(entries)?,
            }
        }
        "volterra" => {
            let scheme = match cfg.scheme.as_deref() {
                Some("midpoint") => VolterraScheme::Midpoint,
                Some("exact_basis") => VolterraScheme::ExactBasis,
                other => {
                    return Err(Error::Parse(format!(
                        "volterra scheme must be midpoint or exact_basis, got {other:?}"
                    )))
                }
            };
            OperatorKind::Volterra { scheme }
        }
        "dense" => {
            let entries = cfg
                .entries
                .as_deref()
                .ok_or_else(|| Error::Parse("dense needs `entries`".into()))?;
            OperatorKind::Dense {
                entries: parse_entries(entries)?,
            }
        }
        "random_dense" => {
            let seed = cfg.seed.or(scenario_seed).unwrap_or(0);
            OperatorKind::Dense {
                entries: random_dense_entries(cfg.n, seed),
            }
        }
        other => return Err(Error::Parse(format!("unknown operator kind `{other}`"))),
    };
    build_truncation(&OperatorSpec {
        kind,
        n: cfg.n,
        horizon_override: cfg.horizon,
    })
}

/// Well-conditioned reproducible test matrix: 2·I plus rational noise with
/// denominator 64, scaled by 1/n — diagonally dominant, hence invertible.
fn random_dense_entries(n: usize, seed: u64) -> Vec<CRat> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let num: i64 = rng.gen_range(-64..=64);
            let mut z = crat(Rat::new(num.into(), (64 * n as i64).into()), Rat::zero());
            if i == j {
                z += crat(rat(2, 1), Rat::zero());
            }
            entries.push(z);
        }
    }
    entries
}

fn build_vector(
    name: &str,
    cfg: &VectorConfig,
    scenario_seed: Option<u64>,
    base_dir: Option<&Path>,
) -> Result<CoefficientSequence> {
    let sources = [
        cfg.basis.is_some(),
        cfg.entries.is_some(),
        cfg.rule.is_some(),
        cfg.file.is_some(),
        cfg.random.is_some(),
    ]
    .iter()
    .filter(|b| **b)
    .count();
    if sources != 1 {
        return Err(Error::Parse(format!(
            "vector `{name}` must use exactly one of basis/entries/rule/file/random"
        )));
    }
    if let Some(k) = cfg.basis {
        let len = cfg.length.unwrap_or(k + 1);
        if len <= k {
            return Err(Error::Parse(format!(
                "vector `{name}`: basis index {k} needs length > {k}"
            )));
        }
        return Ok(CoefficientSequence::basis(k, len));
    }
    if let Some(items) = &cfg.entries {
        let mut values = Vec::with_capacity(items.len());
        for item in items {
            values.push(parse_crat(item)?);
        }
        return Ok(CoefficientSequence::from_exact(values));
    }
    if let Some(rule) = &cfg.rule {
        let len = cfg.length.ok_or_else(|| {
            Error::Parse(format!("vector `{name}`: rule `{rule}` needs `length`"))
        })?;
        return match rule.as_str() {
            "geometric" => {
                let ratio = cfg.ratio.as_deref().ok_or_else(|| {
                    Error::Parse(format!("vector `{name}`: geometric needs `ratio`"))
                })?;
                Ok(CoefficientSequence::geometric(&parse_crat(ratio)?, len))
            }
            "reciprocal" => {
                let offset = cfg.offset.unwrap_or(1);
                if offset == 0 {
                    return Err(Error::Parse(format!(
                        "vector `{name}`: reciprocal offset must be ≥ 1"
                    )));
                }
                Ok(CoefficientSequence::reciprocal(offset, len))
            }
            "reciprocal_factorial" => Ok(CoefficientSequence::reciprocal_factorial(
                cfg.offset.unwrap_or(0),
                len,
            )),
            "ones" => Ok(CoefficientSequence::ones(len)),
            "moments" => {
                let raw = cfg.lambdas.as_deref().ok_or_else(|| {
                    Error::Parse(format!("vector `{name}`: moments needs `lambdas`"))
                })?;
                let mut lambdas = Vec::with_capacity(raw.len());
                for l in raw {
                    lambdas.push(parse_rat(l)?);
                }
                Ok(CoefficientSequence::moments(&lambdas, len))
            }
            other => Err(Error::Parse(format!(
                "vector `{name}`: unknown rule `{other}`"
            ))),
        };
    }
    if let Some(path) = &cfg.file {
        let resolved = match base_dir {
            Some(dir) => dir.join(path),
            None => Path::new(path).to_path_buf(),
        };
        return CoefficientSequence::read_file(&resolved);
    }
    let random = cfg.random.as_ref().expect("checked above");
    let seed = random
        .seed
        .unwrap_or_else(|| scenario_seed.unwrap_or(0) ^ fnv1a(name.as_bytes()));
    let complex = match random.kind.as_deref() {
        None | Some("rational") => false,
        Some("complex_rational") => true,
        Some(other) => {
            return Err(Error::Parse(format!(
                "vector `{name}`: unknown random kind `{other}`"
            )))
        }
    };
    Ok(random_sequence(random.length, seed, complex))
}

/// Nonzero rational entries with denominator 64, reproducible per seed.
fn random_sequence(len: usize, seed: u64, complex: bool) -> CoefficientSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let part = |rng: &mut ChaCha8Rng| -> Rat {
        let mut num: i64 = 0;
        while num == 0 {
            num = rng.gen_range(-64..=64);
        }
        Rat::new(num.into(), 64.into())
    };
    let values = (0..len)
        .map(|_| {
            let re = part(&mut rng);
            let im = if complex { part(&mut rng) } else { Rat::zero() };
            crat(re, im)
        })
        .collect();
    CoefficientSequence::from_exact(values)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// `ones` or `(n+1)^p` — the two β families the experiments use.
pub fn parse_beta(spec: &str, len: usize) -> Result<WeightSequence> {
    let s = spec.trim();
    if s == "ones" {
        return Ok(WeightSequence::ones(len));
    }
    if let Some(p) = s.strip_prefix("(n+1)^") {
        let p: u32 = p
            .parse()
            .map_err(|_| Error::Parse(format!("bad β exponent in `{spec}`")))?;
        return Ok(WeightSequence::polynomial(p, len));
    }
    Err(Error::Parse(format!(
        "unknown β family `{spec}` (use `ones` or `(n+1)^p`)"
    )))
}

/// Complex-rational literal → float λ for the growth sweeps.
pub fn parse_lambda_c64(spec: &str) -> Result<C64> {
    Ok(crate::exact::crat_to_c64(&parse_crat(spec)?))
}
