//! The acceptance gate: ten checks, each printing one PASS/FAIL line with
//! its pinned tolerance (visible under `cargo test --test acceptance --
//! --nocapture`). Every numeric bound here is frozen; loosening one is a
//! regression, not a fix.

use std::time::{Duration, Instant};

use num_traits::Zero;
use shiftlab::corpus;
use shiftlab::cyclic::volterra_scenario;
use shiftlab::exact::{crat, rat, CRat, Rat};
use shiftlab::growth::{
    asymmetric_growth, growth_exponent_fit, growth_identity_deviations, nilpotency_check,
};
use shiftlab::hankel::{exact_hankel_apply, hankel_matrix, hs_norm_check};
use shiftlab::linalg::C64;
use shiftlab::operator::{
    build_truncation, OperatorKind, OperatorSpec, TruncatedOperator, VolterraScheme, WeightRule,
};
use shiftlab::rationality::{
    injectivity_decision, rank_profile, rationality_oracle_exact, InjectivityParams,
    InjectivityVerdict, RationalityClass,
};
use shiftlab::report::AnalysisReport;
use shiftlab::runner::{verify_report, RunOptions};
use shiftlab::scenario::{parse_scenario, resolve};
use shiftlab::sequence::{Arithmetic, CoefficientSequence};
use shiftlab::shift_rep::{build_k, intertwining_residual, WeightSequence, WitnessKind};

fn conclude(index: usize, name: &str, ok: bool, detail: &str) {
    println!(
        "acceptance {:02} {:<28} {} — {}",
        index,
        name,
        if ok { "PASS" } else { "FAIL" },
        detail
    );
    assert!(ok, "criterion {index} ({name}): {detail}");
}

fn cesaro_shift(n: usize) -> TruncatedOperator {
    build_truncation(&OperatorSpec {
        kind: OperatorKind::WeightedShift {
            weights: WeightRule::parse("1/(n+1)").unwrap(),
        },
        n,
        horizon_override: None,
    })
    .unwrap()
}

fn jordan(n: usize, eigenvalue: i64) -> TruncatedOperator {
    build_truncation(&OperatorSpec {
        kind: OperatorKind::JordanBlock {
            eigenvalue: crat(rat(eigenvalue, 1), Rat::zero()),
        },
        n,
        horizon_override: None,
    })
    .unwrap()
}

fn run_corpus() -> Vec<AnalysisReport> {
    let opts = RunOptions::default();
    corpus::SHIPPED
        .iter()
        .map(|(name, source)| {
            corpus::run_source(source, &opts).unwrap_or_else(|e| panic!("{name}: {e}"))
        })
        .collect()
}

#[test]
fn criterion_01_intertwining_residual() {
    let started = Instant::now();
    let op = cesaro_shift(64);
    let f = CoefficientSequence::basis(0, 64).as_vect(64).unwrap();
    let k = build_k(&op, &f, &WeightSequence::ones(33), 32).unwrap();
    let residual = intertwining_residual(&k, &op).unwrap();
    let elapsed = started.elapsed();
    let ok = residual <= 1e-10 && elapsed < Duration::from_secs(1);
    conclude(
        1,
        "intertwining_residual",
        ok,
        &format!(
            "‖A·K − K·S‖ = {residual:.3e} ≤ 1e-10 for w_n = 1/(n+1), N = 64, m = 32, β ≡ 1 \
             ({} ms < 1000)",
            elapsed.as_millis()
        ),
    );
}

#[test]
fn criterion_02_weighted_shift_scenario() {
    let started = Instant::now();
    let report = corpus::run_source(
        corpus::find("example_4_4_weighted_shift").unwrap(),
        &RunOptions::default(),
    )
    .unwrap();
    let by_label = |label: &str| {
        report
            .experiments
            .iter()
            .find(|e| e.label == label)
            .unwrap_or_else(|| panic!("experiment `{label}` missing"))
    };

    let ortho = by_label("orthogonal_pair");
    let witness_ok = ortho.verdict == "zero_symbol"
        && ortho.witnesses.len() == 1
        && ortho.witnesses[0].residuals.len() == 65
        && ortho.witnesses[0]
            .residuals
            .iter()
            .all(|r| r.parse::<f64>().unwrap() <= 1e-8);

    let noev = by_label("no_evidence_pair");
    let dets = noev
        .tables
        .iter()
        .find(|t| t.name == "hankel_determinants")
        .expect("determinant table");
    let dets_ok = noev.verdict == "no_evidence"
        && noev.evidence["exact_class"] == "non_rational_up_to_order"
        && dets.rows.len() == 7
        && dets.rows.iter().all(|row| row[2] == "true");

    let elapsed = started.elapsed();
    let ok = witness_ok && dets_ok && elapsed < Duration::from_secs(10);
    conclude(
        2,
        "weighted_shift_scenario",
        ok,
        &format!(
            "(e_1, e_0): 65 orthogonality residuals ≤ 1e-8; (e_0, 1/(n+1)): \
             7/7 exact Hankel determinants nonzero ({} ms < 10000)",
            elapsed.as_millis()
        ),
    );
}

#[test]
fn criterion_03_nilpotent_rational_kernel() {
    let op = jordan(3, 0);
    let f = CoefficientSequence::from_exact(vec![
        crat(rat(1, 2), Rat::zero()),
        crat(rat(-1, 3), Rat::zero()),
        crat(rat(1, 4), Rat::zero()),
    ]);
    let g = CoefficientSequence::from_exact(vec![
        crat(rat(2, 3), Rat::zero()),
        crat(rat(1, 5), rat(1, 7)),
        crat(rat(-1, 7), Rat::zero()),
    ]);
    let params = InjectivityParams {
        length: 9,
        d_max: 4,
        n_max_rank: 8,
        tol: 1e-8,
    };
    let outcome = injectivity_decision(&op, "default", &f, &g, &params).unwrap();
    let witness = outcome.witness.as_ref().expect("range-defect witness");
    let cert = outcome
        .exact_verdict
        .as_ref()
        .and_then(|v| v.certificate.as_ref())
        .expect("exact certificate");

    // The recurrence annihilates the symbol's Hankel window exactly.
    let b = cert.generator.as_exact_vec(4).unwrap();
    let h = hankel_matrix(&outcome.symbol, 4).unwrap();
    let image = exact_hankel_apply(&h, &b).unwrap();
    let annihilated = image.iter().all(CRat::is_zero);

    let ok = outcome.verdict == InjectivityVerdict::RationalKernel
        && witness.kind == WitnessKind::RangeDefect
        && annihilated;
    conclude(
        3,
        "nilpotent_rational_kernel",
        ok,
        "J_3(0) random pair: Case-2 verdict, range-defect witness, exact H·b = 0",
    );
}

#[test]
fn criterion_04_moment_sequence_ranks() {
    let started = Instant::now();
    let poles: [i64; 3] = [4, 9, 16];
    let mut ok = true;
    let mut detail = String::new();
    for d in 1..=3usize {
        let lambdas: Vec<Rat> = poles[..d].iter().map(|l| rat(*l, 1)).collect();
        let seq = CoefficientSequence::moments(&lambdas, 25);
        let float = rank_profile(&seq, 12, 1e-8).unwrap();
        let exact = rationality_oracle_exact(&seq, 6).unwrap();
        let deg = exact
            .certificate
            .as_ref()
            .and_then(|c| c.denominator.degree());
        ok &= float.class == RationalityClass::Rational
            && float.stabilized_rank == Some(2 * d)
            && exact.class == RationalityClass::Rational
            && deg == Some(2 * d);
        detail.push_str(&format!(
            "d={d}: rank {:?}, deg {:?}; ",
            float.stabilized_rank, deg
        ));
    }
    let elapsed = started.elapsed();
    ok &= elapsed < Duration::from_secs(5);
    detail.push_str(&format!(
        "rank = denominator degree = 2d at N_max = 12 ({} ms < 5000)",
        elapsed.as_millis()
    ));
    conclude(4, "moment_sequence_ranks", ok, &detail);
}

#[test]
fn criterion_05_growth_exponents() {
    let ns: Vec<usize> = (0..8).map(|k| 4usize << k).collect();
    let lambda = C64::new(1.0, 0.0);

    let j3 = jordan(3, 1);
    let fit3 = growth_exponent_fit(&asymmetric_growth(&j3, lambda, &ns).unwrap()).unwrap();
    let nilp3 = nilpotency_check(&j3, 2);
    let j3_ok = (fit3.r - 2.0).abs() <= 0.1 && nilp3 == Some(3) && 3 <= 2 + 4;

    let j2 = jordan(2, 1);
    let report2 = asymmetric_growth(&j2, lambda, &ns).unwrap();
    let flat = report2
        .norms
        .iter()
        .all(|(_, norm)| (norm - 2.0).abs() <= 1e-12);
    let fit2 = growth_exponent_fit(&report2).unwrap();
    let j2_ok = flat && fit2.r.abs() <= 0.1;

    conclude(
        5,
        "growth_exponents",
        j3_ok && j2_ok,
        &format!(
            "J_3(1): r = {:.6} ∈ 2 ± 0.1, nilpotency 3 ≤ r+4; J_2(1): all dyadic norms \
             = 2 ± 1e-12, r = {:.2e} ∈ 0 ± 0.1",
            fit3.r, fit2.r
        ),
    );
}

#[test]
fn criterion_06_norm_identities() {
    let scenario_source = corpus::find("jordan_gh").unwrap();
    let scenario = resolve(
        parse_scenario(scenario_source).unwrap(),
        scenario_source.to_string(),
        false,
        None,
    )
    .unwrap();
    let noise = scenario.operator(Some("noise8")).unwrap();
    let j2 = jordan(2, 1);
    let j3 = jordan(3, 1);
    let ns = [1usize, 2, 3, 4, 6, 8];
    let lambdas = [C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::new(0.0, 1.0)];

    let mut worst = 0.0f64;
    for op in [&j2, &j3, noise] {
        for lam in lambdas {
            let dev = growth_identity_deviations(op, lam, &ns).unwrap();
            worst = worst.max(dev.scaling).max(dev.adjoint);
        }
    }
    conclude(
        6,
        "norm_identities",
        worst <= 1e-12,
        &format!(
            "λ-scaling and adjoint deviations ≤ {worst:.3e} ≤ 1e-12 on J_2, J_3, \
             and a random 8×8 over λ ∈ {{1, 2, i}}"
        ),
    );
}

#[test]
fn criterion_07_volterra() {
    let started = Instant::now();
    let exact = volterra_scenario(16, VolterraScheme::ExactBasis, 16, 1e-10).unwrap();
    let constant = &exact
        .krylov
        .iter()
        .find(|(label, _)| label == "constant_1")
        .unwrap()
        .1;
    let comb = exact.combination.as_ref().unwrap();
    let midpoint = volterra_scenario(128, VolterraScheme::Midpoint, 64, 1e-10).unwrap();
    let sr = midpoint.spectral_radius.unwrap();
    let elapsed = started.elapsed();
    let ok = constant.rank == 16
        && constant.arithmetic == Arithmetic::ExactRational
        && comb.outcome.rank == 16
        && comb.identity_residual < 1e-12
        && sr.estimate <= 0.05
        && elapsed < Duration::from_secs(10);
    conclude(
        7,
        "volterra",
        ok,
        &format!(
            "exact N=16: rank(1) = 16, rank(Σ t^k/(k!)²) = 16, identity residual \
             {:.2e} < 1e-12; midpoint N=128: ‖V^64‖^{{1/64}} = {:.4} ≤ 0.05 ({} ms < 10000)",
            comb.identity_residual,
            sr.estimate,
            elapsed.as_millis()
        ),
    );
}

#[test]
fn criterion_08_hilbert_schmidt_identity() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
    let mut equal = 0usize;
    for _ in 0..100 {
        let len = rng.gen_range(8..=24);
        let vals: Vec<CRat> = (0..len)
            .map(|_| {
                crat(
                    Rat::new(rng.gen_range(-64i64..=64).into(), 64.into()),
                    Rat::new(rng.gen_range(-64i64..=64).into(), 64.into()),
                )
            })
            .collect();
        let seq = CoefficientSequence::from_exact(vals);
        let order = (seq.len() + 1) / 2;
        let (m, w) = hs_norm_check(&seq, order).unwrap();
        if m == w {
            equal += 1;
        }
    }

    let factorial = CoefficientSequence::reciprocal_factorial(1, 24);
    let mut bounded = true;
    let mut last = 0.0f64;
    for order in 2..=12 {
        let (m, w) = hs_norm_check(&factorial, order).unwrap();
        bounded &= m == w && m >= last && m < 2.0;
        last = m;
    }

    conclude(
        8,
        "hilbert_schmidt_identity",
        equal == 100 && bounded,
        &format!(
            "float equality on {equal}/100 random sequences; partial sums for \
             c_n = 1/(n+1)! increase to {last:.6} < 2"
        ),
    );
}

#[test]
fn criterion_09_witnesses_are_tamper_evident() {
    let reports = run_corpus();
    let mut verified = 0usize;
    for report in &reports {
        let outcome = verify_report(report).unwrap();
        assert!(
            outcome.ok(),
            "{}: clean report failed verification: {:?}",
            report.scenario,
            outcome.failures
        );
        verified += outcome.witnesses;
    }
    assert!(verified >= 3, "corpus should carry ≥ 3 witnesses");

    // Perturb every entry of one stored vector at a time by 1e-3.
    let mut tampered_count = 0usize;
    let mut caught = 0usize;
    for report in &reports {
        let bytes = report.to_json_bytes();
        for (ei, exp) in report.experiments.iter().enumerate() {
            for (wi, witness) in exp.witnesses.iter().enumerate() {
                for key in witness.vectors.keys() {
                    let mut copy = AnalysisReport::from_json_bytes(&bytes).unwrap();
                    let rec = &mut copy.experiments[ei].witnesses[wi];
                    let vrec = rec.vectors.get_mut(key).unwrap();
                    let seq = CoefficientSequence::from_display(
                        Arithmetic::parse(&vrec.arithmetic).unwrap(),
                        &vrec.values,
                    )
                    .unwrap();
                    let bumped: Vec<C64> =
                        seq.floats().iter().map(|z| z + C64::new(1e-3, 0.0)).collect();
                    let bumped = CoefficientSequence::from_floats(bumped);
                    vrec.arithmetic = Arithmetic::Float.as_str().to_string();
                    vrec.values = bumped.display_values();
                    tampered_count += 1;
                    if !verify_report(&copy).unwrap().ok() {
                        caught += 1;
                    }
                }
            }
        }
    }
    conclude(
        9,
        "witnesses_are_tamper_evident",
        caught == tampered_count && tampered_count > 0,
        &format!(
            "{verified} witnesses re-verified clean; {caught}/{tampered_count} \
             single-vector perturbations of 1e-3 rejected"
        ),
    );
}

#[test]
fn criterion_10_reports_are_deterministic() {
    let first: Vec<Vec<u8>> = run_corpus().iter().map(|r| r.to_json_bytes()).collect();
    let second: Vec<Vec<u8>> = run_corpus().iter().map(|r| r.to_json_bytes()).collect();
    let identical = first == second;
    let bytes: usize = first.iter().map(Vec::len).sum();
    conclude(
        10,
        "reports_are_deterministic",
        identical,
        &format!("two corpus runs emitted byte-identical reports ({bytes} bytes total)"),
    );
}
