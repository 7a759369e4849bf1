//! Experiment orchestration: scenario in, deterministic report out, and the
//! independent re-verification of emitted witnesses.
//!
//! Experiments run strictly in declaration order. Failures abort the run
//! with the underlying error (parse problems and numerical preconditions
//! carry distinct exit codes at the CLI). Per-experiment runtimes are
//! written to stderr only: the report bytes contain nothing that varies
//! between runs.
//!
//! `verify_report` is the trust anchor: it reparses the embedded scenario,
//! rebuilds the operators from scratch, and recomputes every witness's
//! residuals from the stored vectors. A report whose witnesses were
//! tampered with — or whose scenario no longer reproduces them — fails.

use std::collections::BTreeMap;
use std::path::Path;

use serde_json::Value;

use crate::cyclic::{
    combination_cyclicity, dss_noncyclicity, krylov_rank, square_lattice_probe,
    volterra_scenario,
};
use crate::error::{Error, Result};
use crate::growth::{
    asymmetric_growth, difference_bound_check, growth_exponent_fit,
    growth_identity_deviations, local_growth, nilpotency_check,
};
use crate::hankel::{constant_modulus_check, eventually_geometric_check, hs_norm_check};
use crate::linalg::{fmt_f64, opnorm, Vect};
use crate::operator::{
    power_norms, spectral_radius_estimate, TruncatedOperator, VolterraScheme,
};
use crate::rationality::{
    case2_residuals, injectivity_decision, rank_profile, rationality_oracle_exact,
    InjectivityParams, RationalityVerdict,
};
use crate::report::{
    ev_bool, ev_f64, ev_opt_usize, ev_str, ev_usize, witness_from_record, witness_record,
    AnalysisReport, ExperimentRecord, Table, SCHEMA_VERSION,
};
use crate::scenario::{
    parse_beta, parse_lambda_c64, parse_scenario, resolve, ExperimentConfig, Scenario,
    DEFAULT_D_MAX, DEFAULT_N_MAX_RANK,
};
use crate::sequence::{Arithmetic, CoefficientSequence};
use crate::shift_rep::{
    build_k, intertwining_residual, kernel_vectors, orthogonality_residuals,
    SubspaceWitness, WitnessKind,
};

/// Relative tolerance for the exact norm identities (λ-scaling, adjoint).
pub const IDENTITY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Apply A ↦ A/(‖A‖+1) to every operator before running.
    pub contract: bool,
    /// Insist on exact arithmetic for the algebraic decisions (rationality,
    /// kernels, Krylov ranks); error out where only floats are available.
    pub exact: bool,
}

/// Loads, resolves, and runs a scenario file.
pub fn run_file(path: &Path, opts: &RunOptions) -> Result<AnalysisReport> {
    let source = std::fs::read_to_string(path)?;
    let file = parse_scenario(&source)?;
    let scenario = resolve(file, source, opts.contract, path.parent())?;
    run_scenario(&scenario, opts)
}

pub fn run_scenario(scenario: &Scenario, opts: &RunOptions) -> Result<AnalysisReport> {
    let mut experiments = Vec::with_capacity(scenario.file.experiments.len());
    for (i, exp) in scenario.file.experiments.iter().enumerate() {
        let index = i + 1;
        let started = std::time::Instant::now();
        let record = execute(scenario, exp, index, opts).map_err(|e| {
            Error::Precondition(format!(
                "experiment {index} ({}) in `{}`: {e}",
                exp.kind_name(),
                scenario.file.name
            ))
        })?;
        eprintln!(
            "[{}] {:>2}/{} {:<22} {:>9.2} ms  {}",
            scenario.file.name,
            index,
            scenario.file.experiments.len(),
            record.kind,
            started.elapsed().as_secs_f64() * 1e3,
            record.label
        );
        experiments.push(record);
    }
    Ok(AnalysisReport {
        schema_version: SCHEMA_VERSION,
        scenario: scenario.file.name.clone(),
        contracted: scenario.contracted,
        exact_mode: opts.exact,
        experiments,
        scenario_source: scenario.source.clone(),
    })
}

fn ensure_exact(opts: &RunOptions, available: bool, what: &str) -> Result<()> {
    if opts.exact && !available {
        return Err(Error::ExactUnavailable(what.into()));
    }
    Ok(())
}

fn op_name(operator: &Option<String>) -> &str {
    operator.as_deref().unwrap_or("default")
}

/// Dyadic sweep n_min, 2n_min, …, ≤ n_max.
fn dyadic_range(n_min: usize, n_max: usize) -> Result<Vec<usize>> {
    if n_min == 0 || n_max < n_min {
        return Err(Error::Precondition(format!(
            "empty dyadic range [{n_min}, {n_max}]"
        )));
    }
    let mut out = Vec::new();
    let mut n = n_min;
    while n <= n_max {
        out.push(n);
        n *= 2;
    }
    Ok(out)
}

/// Folds a rationality verdict into evidence + tables under a prefix.
fn push_rationality(
    prefix: &str,
    v: &RationalityVerdict,
    evidence: &mut BTreeMap<String, Value>,
    tables: &mut Vec<Table>,
    warnings: &mut Vec<String>,
) {
    evidence.insert(format!("{prefix}_class"), ev_str(v.class.as_str()));
    evidence.insert(
        format!("{prefix}_stabilized_rank"),
        ev_opt_usize(v.stabilized_rank),
    );
    if !v.rank_sequence.is_empty() {
        let mut t = Table::new(&format!("{prefix}_rank_profile"), &["order", "rank"]);
        for (order, rank) in &v.rank_sequence {
            t.push_row(vec![order.to_string(), rank.to_string()]);
        }
        tables.push(t);
    }
    if !v.determinant_evidence.is_empty() {
        let mut t = Table::new("hankel_determinants", &["order", "determinant", "nonzero"]);
        for d in &v.determinant_evidence {
            t.push_row(vec![
                d.order.to_string(),
                d.display.clone(),
                d.nonzero.to_string(),
            ]);
        }
        tables.push(t);
    }
    if let Some(cert) = &v.certificate {
        evidence.insert(
            "certificate_generator".into(),
            Value::Array(cert.generator.display_values().into_iter().map(Value::String).collect()),
        );
        evidence.insert(
            "certificate_numerator".into(),
            Value::Array(cert.numerator.display_values().into_iter().map(Value::String).collect()),
        );
        evidence.insert(
            "certificate_denominator".into(),
            Value::Array(
                cert.denominator.display_values().into_iter().map(Value::String).collect(),
            ),
        );
        evidence.insert(
            "certificate_denominator_degree".into(),
            ev_opt_usize(cert.denominator.degree()),
        );
    }
    warnings.extend(v.warnings.iter().cloned());
}

fn krylov_evidence(
    out: &crate::cyclic::KrylovOutcome,
    evidence: &mut BTreeMap<String, Value>,
    tables: &mut Vec<Table>,
    warnings: &mut Vec<String>,
) {
    evidence.insert("rank".into(), ev_usize(out.rank));
    evidence.insert("columns".into(), ev_usize(out.columns));
    evidence.insert("dimension".into(), ev_usize(out.dimension));
    evidence.insert("arithmetic".into(), ev_str(out.arithmetic.as_str()));
    evidence.insert("horizon_limited".into(), ev_bool(out.horizon_limited));
    evidence.insert("truncated_at".into(), ev_opt_usize(out.truncated_at));
    let mut t = Table::new("krylov_norms", &["n", "norm"]);
    for (n, norm) in out.raw_norms.iter().enumerate() {
        t.push_row(vec![n.to_string(), fmt_f64(*norm)]);
    }
    tables.push(t);
    if out.horizon_limited {
        warnings.push(
            "the orbit died at the truncation boundary; the rank certifies \
             the compression, not the infinite model"
                .into(),
        );
    }
}

fn execute(
    scenario: &Scenario,
    exp: &ExperimentConfig,
    index: usize,
    opts: &RunOptions,
) -> Result<ExperimentRecord> {
    let mut evidence: BTreeMap<String, Value> = BTreeMap::new();
    let mut tolerances: BTreeMap<String, String> = BTreeMap::new();
    let mut warnings: Vec<String> = Vec::new();
    let mut witnesses = Vec::new();
    let mut tables: Vec<Table> = Vec::new();
    let label = exp
        .label()
        .map(str::to_string)
        .unwrap_or_else(|| format!("{}_{index}", exp.kind_name()));

    let verdict = match exp {
        ExperimentConfig::Intertwining {
            operator, f, m, beta, ..
        } => {
            let op = scenario.operator(operator.as_deref())?;
            let tol = scenario.effective_tol(exp);
            tolerances.insert("tol".into(), fmt_f64(tol));
            let fseq = scenario.vector(f)?;
            let fv = fseq.as_vect(op.dim())?;
            let ws = parse_beta(beta.as_deref().unwrap_or("ones"), m + 1)?;
            let k = build_k(op, &fv, &ws, *m)?;
            let residual = intertwining_residual(&k, op)?;
            let kernel_dim = kernel_vectors(&k, tol).len();
            evidence.insert("residual".into(), ev_f64(residual));
            evidence.insert("tail_bound".into(), ev_f64(k.tail_bound));
            evidence.insert("columns".into(), ev_usize(*m));
            evidence.insert("beta".into(), ev_str(ws.label()));
            evidence.insert("kernel_dim".into(), ev_usize(kernel_dim));
            let mut t = Table::new("column_norms", &["n", "norm"]);
            for n in 0..k.column_count() {
                t.push_row(vec![n.to_string(), fmt_f64(k.columns.column(n).norm())]);
            }
            tables.push(t);
            if residual <= tol { "pass" } else { "fail" }.to_string()
        }

        ExperimentConfig::Compose {
            operator,
            f,
            phi,
            m,
            beta,
            ..
        } => {
            let op = scenario.operator(operator.as_deref())?;
            let tol = scenario.effective_tol(exp);
            tolerances.insert("tol".into(), fmt_f64(tol));
            let fseq = scenario.vector(f)?;
            let fv = fseq.as_vect(op.dim())?;
            let phi_seq = {
                let mut vals = Vec::with_capacity(phi.len());
                for p in phi {
                    vals.push(crate::exact::parse_crat(p)?);
                }
                CoefficientSequence::from_exact(vals)
            };
            let beta_spec = beta.as_deref().unwrap_or("ones");
            let k = build_k(op, &fv, &parse_beta(beta_spec, m + 1)?, *m)?;
            let composed = crate::shift_rep::compose_with_inner(&k, &phi_seq)?;
            // φ(A)f by Horner-free accumulation, then the straight build.
            let mut y = Vect::zeros(op.dim());
            let mut v = fv.clone();
            let deg = phi_seq.degree().unwrap_or(0);
            for i in 0..=deg {
                y += &v * phi_seq.get(i);
                if i < deg {
                    v = &op.entries * v;
                }
            }
            let m2 = composed.column_count();
            let direct = build_k(op, &y, &parse_beta(beta_spec, m2 + 1)?, m2)?;
            let denom = opnorm(&direct.columns).max(f64::MIN_POSITIVE);
            let residual = opnorm(&(&composed.columns - &direct.columns)) / denom;
            evidence.insert("residual".into(), ev_f64(residual));
            evidence.insert("degree".into(), ev_usize(deg));
            evidence.insert("columns_out".into(), ev_usize(m2));
            evidence.insert("tail_bound".into(), ev_f64(composed.tail_bound));
            if residual <= tol { "pass" } else { "fail" }.to_string()
        }

        ExperimentConfig::Injectivity {
            operator,
            f,
            g,
            length,
            d_max,
            n_max_rank,
            ..
        } => {
            let op = scenario.operator(operator.as_deref())?;
            let name = op_name(operator);
            let params = InjectivityParams {
                length: *length,
                d_max: d_max.unwrap_or(DEFAULT_D_MAX),
                n_max_rank: n_max_rank.unwrap_or(DEFAULT_N_MAX_RANK),
                tol: scenario.effective_tol(exp),
            };
            tolerances.insert("tol".into(), fmt_f64(params.tol));
            tolerances.insert("d_max".into(), params.d_max.to_string());
            tolerances.insert("n_max_rank".into(), params.n_max_rank.to_string());
            let fseq = scenario.vector(f)?;
            let gseq = scenario.vector(g)?;
            let outcome = injectivity_decision(op, name, fseq, gseq, &params)?;
            ensure_exact(
                opts,
                outcome.symbol.exact_values().is_some(),
                "injectivity symbol is float-only",
            )?;
            if let Some(case) = outcome.case_label {
                evidence.insert("case".into(), ev_str(case));
            }
            if let Some(sr) = &outcome.spectral_radius {
                evidence.insert("spectral_radius".into(), ev_f64(sr.estimate));
            }
            push_rationality(
                "float",
                &outcome.float_verdict,
                &mut evidence,
                &mut tables,
                &mut warnings,
            );
            if let Some(exact) = &outcome.exact_verdict {
                push_rationality("exact", exact, &mut evidence, &mut tables, &mut warnings);
            }
            if let Some(c2) = &outcome.case2 {
                evidence.insert("case2_row0_residual".into(), ev_f64(c2.row0_residual));
                evidence.insert("case2_alpha_residual".into(), ev_f64(c2.alpha_residual));
                evidence.insert("case2_panel_columns".into(), ev_usize(c2.panel_columns));
            }
            warnings.extend(outcome.warnings.iter().cloned());
            if let Some(w) = &outcome.witness {
                witnesses.push(witness_record(w));
            }
            outcome.verdict.as_str().to_string()
        }

        ExperimentConfig::SequenceRationality {
            sequence,
            d_max,
            n_max_rank,
            ..
        } => {
            let seq = scenario.vector(sequence)?;
            let tol = scenario.effective_tol(exp);
            let n_max = n_max_rank.unwrap_or(DEFAULT_N_MAX_RANK);
            tolerances.insert("tol".into(), fmt_f64(tol));
            tolerances.insert("n_max_rank".into(), n_max.to_string());
            let float_verdict = rank_profile(seq, n_max, tol)?;
            push_rationality(
                "float",
                &float_verdict,
                &mut evidence,
                &mut tables,
                &mut warnings,
            );
            let exact_verdict = if seq.exact_values().is_some() {
                let d_eff = d_max
                    .unwrap_or(DEFAULT_D_MAX)
                    .min(seq.len().saturating_sub(1) / 2);
                tolerances.insert("d_max".into(), d_eff.to_string());
                Some(rationality_oracle_exact(seq, d_eff)?)
            } else {
                None
            };
            ensure_exact(
                opts,
                exact_verdict.is_some(),
                "sequence rationality has no exact entries",
            )?;
            if let Some(exact) = &exact_verdict {
                push_rationality("exact", exact, &mut evidence, &mut tables, &mut warnings);
            }
            exact_verdict
                .as_ref()
                .map(|v| v.class)
                .unwrap_or(float_verdict.class)
                .as_str()
                .to_string()
        }

        ExperimentConfig::HsCheck {
            sequence, order, ..
        } => {
            let seq = scenario.vector(sequence)?;
            let (matrix_sum, weight_sum) = hs_norm_check(seq, *order)?;
            evidence.insert("matrix_sum".into(), ev_f64(matrix_sum));
            evidence.insert("weight_sum".into(), ev_f64(weight_sum));
            evidence.insert("order".into(), ev_usize(*order));
            if matrix_sum == weight_sum {
                "exact_equality".to_string()
            } else {
                evidence.insert(
                    "difference".into(),
                    ev_f64((matrix_sum - weight_sum).abs()),
                );
                "mismatch".to_string()
            }
        }

        ExperimentConfig::EventuallyGeometric { sequence, k, .. } => {
            let seq = scenario.vector(sequence)?;
            evidence.insert("from_index".into(), ev_usize(*k));
            match eventually_geometric_check(seq, *k)? {
                Some((ratio, display)) => {
                    evidence.insert("ratio".into(), ev_str(display));
                    evidence.insert("ratio_modulus".into(), ev_f64(ratio.norm()));
                    "geometric_tail".to_string()
                }
                None => "not_geometric".to_string(),
            }
        }

        ExperimentConfig::ConstantModulus { sequence, grid, .. } => {
            let seq = scenario.vector(sequence)?;
            let g = grid.unwrap_or(64);
            evidence.insert("grid".into(), ev_usize(g));
            let (modulus, warning) = constant_modulus_check(seq, g)?;
            if let Some(w) = warning {
                warnings.push(w);
            }
            match modulus {
                Some(m) => {
                    evidence.insert("modulus".into(), ev_f64(m));
                    "constant_modulus".to_string()
                }
                None => "not_constant".to_string(),
            }
        }

        ExperimentConfig::Growth {
            operator,
            lambda,
            dyadic_min,
            dyadic_max,
            fit,
            nilpotency,
            difference_bound,
            ..
        } => {
            let op = scenario.operator(operator.as_deref())?;
            let lam = parse_lambda_c64(lambda)?;
            let ns = dyadic_range(dyadic_min.unwrap_or(4), *dyadic_max)?;
            let report = asymmetric_growth(op, lam, &ns)?;
            evidence.insert("lambda".into(), ev_str(lambda.clone()));
            evidence.insert("condition".into(), ev_f64(report.condition.condition));
            let mut t = Table::new("norms", &["n", "norm"]);
            for (n, norm) in &report.norms {
                t.push_row(vec![n.to_string(), fmt_f64(*norm)]);
            }
            tables.push(t);
            let mut fitted_r = None;
            if fit.unwrap_or(true) {
                let fr = growth_exponent_fit(&report)?;
                evidence.insert("fit_r".into(), ev_f64(fr.r));
                evidence.insert("fit_ci_halfwidth".into(), ev_f64(fr.ci_halfwidth));
                evidence.insert(
                    "fit_window".into(),
                    ev_str(format!("[{}, {}]", fr.window.0, fr.window.1)),
                );
                fitted_r = Some(fr.r);
            }
            if nilpotency.unwrap_or(false) {
                let r_round = fitted_r.map(|r| r.round().max(0.0) as usize).unwrap_or(0);
                let order = nilpotency_check(op, r_round);
                evidence.insert("nilpotency_order".into(), ev_opt_usize(order));
                evidence.insert("nilpotency_bound".into(), ev_usize(r_round + 4));
            }
            if difference_bound.unwrap_or(false) {
                let r_round = fitted_r.map(|r| r.round().max(0.0) as usize).unwrap_or(0);
                let signed: Vec<i64> = ns
                    .iter()
                    .map(|n| *n as i64)
                    .chain(ns.iter().map(|n| -(*n as i64)))
                    .collect();
                let db = difference_bound_check(op, r_round, &signed)?;
                evidence.insert("difference_constant".into(), ev_f64(db.constant));
                evidence.insert("difference_arg_max".into(), ev_str(db.arg_max.to_string()));
                evidence.insert("difference_pass".into(), ev_bool(db.pass));
                let mut dt = Table::new("difference_bound", &["n", "norm", "ratio"]);
                for (n, norm, ratio) in &db.table {
                    dt.push_row(vec![n.to_string(), fmt_f64(*norm), fmt_f64(*ratio)]);
                }
                tables.push(dt);
            }
            "measured".to_string()
        }

        ExperimentConfig::GrowthIdentities {
            operator,
            lambdas,
            n_values,
            ..
        } => {
            let op = scenario.operator(operator.as_deref())?;
            let ns = n_values.clone().unwrap_or_else(|| vec![1, 2, 3, 4, 6, 8]);
            tolerances.insert("identity_tol".into(), fmt_f64(IDENTITY_TOL));
            let mut t = Table::new(
                "identity_deviations",
                &["lambda", "scaling_deviation", "adjoint_deviation"],
            );
            let mut worst = 0.0f64;
            for l in lambdas {
                let lam = parse_lambda_c64(l)?;
                let dev = growth_identity_deviations(op, lam, &ns)?;
                worst = worst.max(dev.scaling).max(dev.adjoint);
                t.push_row(vec![l.clone(), fmt_f64(dev.scaling), fmt_f64(dev.adjoint)]);
            }
            tables.push(t);
            evidence.insert("max_deviation".into(), ev_f64(worst));
            if worst <= IDENTITY_TOL { "pass" } else { "fail" }.to_string()
        }

        ExperimentConfig::LocalGrowth {
            operator,
            lambda,
            x,
            n_values,
            ..
        } => {
            let op = scenario.operator(operator.as_deref())?;
            let lam = parse_lambda_c64(lambda)?;
            let xv = scenario.vector(x)?.as_vect(op.dim())?;
            let vals = local_growth(op, &xv, lam, n_values)?;
            let mut t = Table::new("local_norms", &["n", "norm"]);
            for (n, norm) in &vals {
                t.push_row(vec![n.to_string(), fmt_f64(*norm)]);
            }
            tables.push(t);
            evidence.insert("lambda".into(), ev_str(lambda.clone()));
            "measured".to_string()
        }

        ExperimentConfig::SpectralRadius {
            operator, n_max, ..
        } => {
            let op = scenario.operator(operator.as_deref())?;
            let sr = spectral_radius_estimate(op, *n_max)?;
            evidence.insert("estimate".into(), ev_f64(sr.estimate));
            evidence.insert("below_one".into(), ev_bool(sr.below_one));
            let mut t = Table::new("dyadic_radius", &["n", "estimate"]);
            for (n, e) in &sr.dyadic_table {
                t.push_row(vec![n.to_string(), fmt_f64(*e)]);
            }
            tables.push(t);
            "measured".to_string()
        }

        ExperimentConfig::PowerNorms {
            operator, n_max, ..
        } => {
            let op = scenario.operator(operator.as_deref())?;
            let norms = power_norms(op, *n_max)?;
            let mut t = Table::new("power_norms", &["n", "norm"]);
            for (i, norm) in norms.iter().enumerate() {
                t.push_row(vec![(i + 1).to_string(), fmt_f64(*norm)]);
            }
            tables.push(t);
            "measured".to_string()
        }

        ExperimentConfig::Dependence {
            operator, f, n_max, ..
        } => {
            let op = scenario.operator(operator.as_deref())?;
            let tol = scenario.effective_tol(exp);
            tolerances.insert("tol".into(), fmt_f64(tol));
            let fv = scenario.vector(f)?.as_vect(op.dim())?;
            match crate::shift_rep::dependence_detect(op, &fv, *n_max, tol)? {
                Some((coeffs, residual)) => {
                    evidence.insert("residual".into(), ev_f64(residual));
                    evidence.insert(
                        "dependence_vector".into(),
                        Value::Array(
                            coeffs.display_values().into_iter().map(Value::String).collect(),
                        ),
                    );
                    "dependent".to_string()
                }
                None => "independent".to_string(),
            }
        }

        ExperimentConfig::Krylov { operator, x, m, .. } => {
            let op = scenario.operator(operator.as_deref())?;
            let tol = scenario.effective_tol(exp);
            tolerances.insert("tol".into(), fmt_f64(tol));
            let xseq = scenario.vector(x)?;
            let out = krylov_rank(op, xseq, *m, tol)?;
            ensure_exact(
                opts,
                out.arithmetic == Arithmetic::ExactRational,
                "Krylov panel is float-only",
            )?;
            krylov_evidence(&out, &mut evidence, &mut tables, &mut warnings);
            if out.is_full() { "full_rank" } else { "rank_deficient" }.to_string()
        }

        ExperimentConfig::Combination {
            operator,
            x,
            alpha,
            m,
            beta,
            ..
        } => {
            let op = scenario.operator(operator.as_deref())?;
            let tol = scenario.effective_tol(exp);
            tolerances.insert("tol".into(), fmt_f64(tol));
            let xseq = scenario.vector(x)?;
            let aseq = scenario.vector(alpha)?;
            let out = combination_cyclicity(op, xseq, aseq, *m, tol)?;
            ensure_exact(
                opts,
                out.outcome.arithmetic == Arithmetic::ExactRational,
                "combination panel is float-only",
            )?;
            evidence.insert("identity_residual".into(), ev_f64(out.identity_residual));
            warnings.extend(out.warnings.iter().cloned());
            if let Some(bspec) = beta {
                // The K-matrix route: y must equal build_K(A, x)·α when β ≡ 1.
                let ws = parse_beta(bspec, aseq.len() + 1)?;
                if !ws.is_ones() {
                    return Err(Error::Precondition(
                        "the combination identity needs β ≡ 1".into(),
                    ));
                }
                let xv = xseq.as_vect(op.dim())?;
                let k = build_k(op, &xv, &ws, aseq.len())?;
                let alpha_v = aseq.as_vect(aseq.len())?;
                let yv = out.y.as_vect(op.dim())?;
                let knorm = opnorm(&k.columns);
                let scale = (alpha_v.norm() * knorm).max(f64::MIN_POSITIVE);
                let k_res = (&yv - &k.columns * &alpha_v).norm() / scale;
                evidence.insert("k_identity_residual".into(), ev_f64(k_res));
                evidence.insert("k_tail_bound".into(), ev_f64(k.tail_bound));
            }
            krylov_evidence(&out.outcome, &mut evidence, &mut tables, &mut warnings);
            if out.outcome.is_full() {
                "cyclic_full_rank"
            } else {
                "rank_deficient"
            }
            .to_string()
        }

        ExperimentConfig::Dss {
            sequence,
            d_max,
            n_max_rank,
            ..
        } => {
            let seq = scenario.vector(sequence)?;
            let tol = scenario.effective_tol(exp);
            tolerances.insert("tol".into(), fmt_f64(tol));
            let out = dss_noncyclicity(
                seq,
                d_max.unwrap_or(DEFAULT_D_MAX),
                n_max_rank.unwrap_or(DEFAULT_N_MAX_RANK),
                tol,
            )?;
            ensure_exact(
                opts,
                out.exact_verdict.is_some(),
                "duality bridge has no exact entries",
            )?;
            push_rationality(
                "float",
                &out.float_verdict,
                &mut evidence,
                &mut tables,
                &mut warnings,
            );
            if let Some(exact) = &out.exact_verdict {
                push_rationality("exact", exact, &mut evidence, &mut tables, &mut warnings);
            }
            warnings.extend(out.warnings.iter().cloned());
            out.verdict.as_str().to_string()
        }

        ExperimentConfig::SquareLattice {
            operator,
            x,
            y,
            length,
            d_max,
            n_max_rank,
            ..
        } => {
            let op = scenario.operator(operator.as_deref())?;
            let tol = scenario.effective_tol(exp);
            tolerances.insert("tol".into(), fmt_f64(tol));
            let xs = scenario.vector(x)?;
            let ys = scenario.vector(y)?;
            let out = square_lattice_probe(
                op,
                xs,
                ys,
                *length,
                d_max.unwrap_or(DEFAULT_D_MAX),
                n_max_rank.unwrap_or(DEFAULT_N_MAX_RANK),
                tol,
            )?;
            ensure_exact(
                opts,
                out.exact_verdict.is_some(),
                "lattice probe has no exact entries",
            )?;
            evidence.insert("even_max".into(), ev_f64(out.even_max));
            push_rationality(
                "float",
                &out.float_verdict,
                &mut evidence,
                &mut tables,
                &mut warnings,
            );
            if let Some(exact) = &out.exact_verdict {
                push_rationality("exact", exact, &mut evidence, &mut tables, &mut warnings);
            }
            out.exact_verdict
                .as_ref()
                .map(|v| v.class)
                .unwrap_or(out.float_verdict.class)
                .as_str()
                .to_string()
        }

        ExperimentConfig::Volterra {
            scheme, n, n_max, ..
        } => {
            let tol = scenario.effective_tol(exp);
            tolerances.insert("tol".into(), fmt_f64(tol));
            let parsed = match scheme.as_str() {
                "midpoint" => VolterraScheme::Midpoint,
                "exact_basis" => VolterraScheme::ExactBasis,
                other => {
                    return Err(Error::Parse(format!("unknown Volterra scheme `{other}`")))
                }
            };
            let out = volterra_scenario(*n, parsed, *n_max, tol)?;
            evidence.insert("dimension".into(), ev_usize(out.dimension));
            if let Some(sr) = &out.spectral_radius {
                evidence.insert("spectral_radius".into(), ev_f64(sr.estimate));
                evidence.insert("below_one".into(), ev_bool(sr.below_one));
                let mut t = Table::new("dyadic_radius", &["n", "estimate"]);
                for (n, e) in &sr.dyadic_table {
                    t.push_row(vec![n.to_string(), fmt_f64(*e)]);
                }
                tables.push(t);
            }
            if !out.krylov.is_empty() {
                let mut t = Table::new(
                    "krylov_probes",
                    &["seed", "rank", "columns", "horizon_limited"],
                );
                for (seed_label, k) in &out.krylov {
                    t.push_row(vec![
                        seed_label.clone(),
                        k.rank.to_string(),
                        k.columns.to_string(),
                        k.horizon_limited.to_string(),
                    ]);
                }
                tables.push(t);
            }
            if let Some(comb) = &out.combination {
                evidence.insert("combination_rank".into(), ev_usize(comb.outcome.rank));
                evidence.insert(
                    "combination_identity_residual".into(),
                    ev_f64(comb.identity_residual),
                );
                warnings.extend(comb.warnings.iter().cloned());
            }
            "measured".to_string()
        }
    };

    Ok(ExperimentRecord {
        index,
        kind: exp.kind_name().to_string(),
        label,
        verdict,
        evidence,
        witnesses,
        tolerances,
        warnings,
        tables,
    })
}

#[derive(Clone, Debug)]
pub struct VerifyOutcome {
    pub witnesses: usize,
    pub failures: Vec<String>,
}

impl VerifyOutcome {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Re-verifies every witness in a report from first principles: reparse the
/// embedded scenario, rebuild the operators, recompute each witness's
/// residuals from its stored vectors, and compare against its tolerance.
pub fn verify_report(report: &AnalysisReport) -> Result<VerifyOutcome> {
    let file = parse_scenario(&report.scenario_source)?;
    let scenario = resolve(
        file,
        report.scenario_source.clone(),
        report.contracted,
        None,
    )?;
    let mut witnesses = 0usize;
    let mut failures = Vec::new();
    for exp in &report.experiments {
        for (wi, wrec) in exp.witnesses.iter().enumerate() {
            witnesses += 1;
            let location = format!(
                "experiment {} ({}) witness {}",
                exp.index,
                exp.label,
                wi + 1
            );
            let witness = match witness_from_record(wrec) {
                Ok(w) => w,
                Err(e) => {
                    failures.push(format!("{location}: {e}"));
                    continue;
                }
            };
            match recheck_witness(&scenario, &witness) {
                Ok(residuals) => {
                    for (i, r) in residuals.iter().enumerate() {
                        if !(*r <= witness.tol) {
                            failures.push(format!(
                                "{location}: recomputed residual {} = {} exceeds tolerance {}",
                                i,
                                fmt_f64(*r),
                                fmt_f64(witness.tol)
                            ));
                        }
                    }
                }
                Err(e) => failures.push(format!("{location}: {e}")),
            }
        }
    }
    Ok(VerifyOutcome {
        witnesses,
        failures,
    })
}

/// Recomputes a witness's residual vector against the freshly rebuilt
/// operator, using only material stored inside the witness.
fn recheck_witness(scenario: &Scenario, w: &SubspaceWitness) -> Result<Vec<f64>> {
    let op: &TruncatedOperator = scenario
        .operators
        .get(&w.operator)
        .ok_or_else(|| Error::Parse(format!("witness names unknown operator `{}`", w.operator)))?;
    let n = op.dim();
    let get = |key: &str| -> Result<&CoefficientSequence> {
        w.vectors
            .get(key)
            .ok_or_else(|| Error::Parse(format!("witness is missing vector `{key}`")))
    };
    match w.kind {
        WitnessKind::Orthogonality => {
            let f_v = get("f")?.as_vect(n)?;
            let g_v = get("g")?.as_vect(n)?;
            let scale = f_v.norm() * g_v.norm();
            if scale == 0.0 {
                return Err(Error::Precondition(
                    "orthogonality witness with a zero vector".into(),
                ));
            }
            let raw = orthogonality_residuals(op, &f_v, &g_v, w.residuals.len())?;
            Ok(raw.into_iter().map(|r| r / scale).collect())
        }
        WitnessKind::RangeDefect => {
            let b = get("generator_b")?;
            let alpha_seq = get("alpha")?;
            let f_v = get("f")?.as_vect(n)?;
            let g_v = get("g")?.as_vect(n)?;
            let alpha = alpha_seq.as_vect(alpha_seq.len())?;
            let (row0, alpha_rel, consistency, _) =
                case2_residuals(&op.entries, &f_v, &g_v, b, &alpha)?;
            Ok(vec![row0, alpha_rel, consistency])
        }
        WitnessKind::KernelVector | WitnessKind::Eigenvector => Err(Error::Precondition(
            format!("witness kind `{}` has no re-verification rule", w.kind.as_str()),
        )),
    }
}
