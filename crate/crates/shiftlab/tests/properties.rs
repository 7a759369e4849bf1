//! Randomised invariants. Each property encodes a statement that is a
//! theorem in exact arithmetic (or exact up to a pinned float slack), so a
//! counterexample is a bug, never noise.

use num_traits::Zero;
use proptest::prelude::*;

use shiftlab::corpus;
use shiftlab::cyclic::{combination_cyclicity, krylov_rank};
use shiftlab::exact::{crat, rat, CRat, Rat};
use shiftlab::growth::growth_identity_deviations;
use shiftlab::hankel::{hs_norm_check, verify_recurrence_exact};
use shiftlab::linalg::{opnorm, C64};
use shiftlab::operator::{
    apply_power, apply_power_exact, build_truncation, power_norms, OperatorKind, OperatorSpec,
    TruncatedOperator, WeightRule,
};
use shiftlab::rationality::{rank_profile, rationality_oracle_exact, RationalityClass};
use shiftlab::runner::RunOptions;
use shiftlab::scenario::parse_scenario;
use shiftlab::sequence::CoefficientSequence;
use shiftlab::shift_rep::{build_k, intertwining_residual, kernel_vectors, WeightSequence};

fn dense(n: usize, entries: Vec<CRat>) -> TruncatedOperator {
    build_truncation(&OperatorSpec {
        kind: OperatorKind::Dense { entries },
        n,
        horizon_override: None,
    })
    .unwrap()
}

fn shift_from_list(weights: Vec<Rat>, n: usize) -> TruncatedOperator {
    build_truncation(&OperatorSpec {
        kind: OperatorKind::WeightedShift {
            weights: WeightRule::List(weights),
        },
        n,
        horizon_override: None,
    })
    .unwrap()
}

fn jordan(n: usize, eigenvalue: Rat) -> TruncatedOperator {
    build_truncation(&OperatorSpec {
        kind: OperatorKind::JordanBlock {
            eigenvalue: crat(eigenvalue, Rat::zero()),
        },
        n,
        horizon_override: None,
    })
    .unwrap()
}

/// Entries k/8 with |k| ≤ 8; real and imaginary parts drawn independently.
fn rational_entry() -> impl Strategy<Value = CRat> {
    (-8i64..=8, -8i64..=8).prop_map(|(re, im)| crat(rat(re, 8), rat(im, 8)))
}

fn rational_vec(len: usize) -> impl Strategy<Value = Vec<CRat>> {
    proptest::collection::vec(rational_entry(), len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// A⁰x = x and A^{n+1}x = A·(A^n x), with the float route agreeing
    /// bitwise since both sides iterate the same multiplication.
    #[test]
    fn apply_power_iterates(entries in rational_vec(16), x in rational_vec(4), n in 0usize..6) {
        let op = dense(4, entries);
        let xs = CoefficientSequence::from_exact(x);
        let xv = xs.as_vect(4).unwrap();
        prop_assert_eq!(apply_power(&op, 0, &xv).unwrap(), xv.clone());
        let step = &op.entries * apply_power(&op, n, &xv).unwrap();
        prop_assert_eq!(apply_power(&op, n + 1, &xv).unwrap(), step);
    }

    /// ‖A^{m+n}‖ ≤ ‖A^m‖·‖A^n‖ up to SVD rounding.
    #[test]
    fn power_norms_submultiplicative(entries in rational_vec(16)) {
        let op = dense(4, entries);
        let norms = power_norms(&op, 8).unwrap();
        for m in 1..=4usize {
            for n in 1..=4usize {
                let lhs = norms[m + n - 1];
                let rhs = norms[m - 1] * norms[n - 1];
                prop_assert!(
                    lhs <= rhs * (1.0 + 1e-10) + 1e-300,
                    "‖A^{}‖ = {lhs} > ‖A^{m}‖·‖A^{n}‖ = {rhs}", m + n
                );
            }
        }
    }

    /// The exact and float power routes agree to float accuracy.
    #[test]
    fn exact_and_float_powers_agree(entries in rational_vec(16), x in rational_vec(4), n in 0usize..6) {
        let op = dense(4, entries);
        let xs = CoefficientSequence::from_exact(x.clone());
        let float = apply_power(&op, n, &xs.as_vect(4).unwrap()).unwrap();
        let exact = apply_power_exact(&op, n, &x).unwrap();
        let exact_seq = CoefficientSequence::from_exact(exact);
        for (a, b) in float.iter().zip(exact_seq.floats().iter()) {
            prop_assert!((a - b).norm() <= 1e-9 * (1.0 + b.norm()));
        }
    }

    /// For any contraction-weight shift and β ≡ 1 the intertwining
    /// A·K = K·S_β holds to the last bit: both sides evaluate the same
    /// float products in the same order.
    #[test]
    fn intertwining_exact_for_unit_beta(
        nums in proptest::collection::vec(1i64..=32, 15),
        f_entries in rational_vec(4),
    ) {
        prop_assume!(f_entries.iter().any(|z| !z.is_zero()));
        let op = shift_from_list(nums.into_iter().map(|k| rat(k, 64)).collect(), 16);
        let f = CoefficientSequence::from_exact(f_entries).as_vect(16).unwrap();
        let k = build_k(&op, &f, &WeightSequence::ones(9), 8).unwrap();
        let residual = intertwining_residual(&k, &op).unwrap();
        prop_assert_eq!(residual, 0.0);
    }

    /// Admissible growing β only reshuffles scalar factors between the two
    /// sides of the intertwining, so the residual stays at rounding level.
    #[test]
    fn intertwining_tiny_for_geometric_beta(
        nums in proptest::collection::vec(1i64..=32, 15),
        f_entries in rational_vec(4),
        ratio_num in 2i64..=4,
    ) {
        prop_assume!(f_entries.iter().any(|z| !z.is_zero()));
        let op = shift_from_list(nums.into_iter().map(|k| rat(k, 64)).collect(), 16);
        let f = CoefficientSequence::from_exact(f_entries).as_vect(16).unwrap();
        let ratio = ratio_num as f64 / 2.0;
        let beta: Vec<f64> = (0..9).map(|n| ratio.powi(n as i32)).collect();
        let k = build_k(&op, &f, &WeightSequence::from_values(beta, "geometric").unwrap(), 8)
            .unwrap();
        let residual = intertwining_residual(&k, &op).unwrap();
        prop_assert!(residual <= 1e-12, "residual {residual}");
    }

    /// Vectors reported as kernel members actually annihilate K.
    #[test]
    fn kernel_vectors_annihilate(f_entries in rational_vec(4)) {
        prop_assume!(f_entries.iter().any(|z| !z.is_zero()));
        let op = jordan(4, Rat::zero());
        let f = CoefficientSequence::from_exact(f_entries).as_vect(4).unwrap();
        let k = build_k(&op, &f, &WeightSequence::ones(9), 8).unwrap();
        let vs = kernel_vectors(&k, 1e-10);
        prop_assert!(!vs.is_empty(), "a nilpotent orbit must leave kernel directions");
        let scale = opnorm(&k.columns).max(1e-300);
        for v in &vs {
            let image = (&k.columns * v).norm();
            prop_assert!(image <= 1e-8 * scale * v.norm(), "‖Kv‖ = {image}");
        }
    }

    /// The balanced-window rank screen is invariant under the geometric
    /// rescaling c_n ↦ ρⁿ·c_n (a diagonal congruence of every window).
    #[test]
    fn rank_profile_scaling_invariant(
        d in 1usize..=2,
        rho_num in 1i64..=4,
    ) {
        let poles: Vec<Rat> = [4i64, 9].iter().take(d).map(|l| rat(*l, 1)).collect();
        let c = CoefficientSequence::moments(&poles, 25);
        let rho = crat(rat(rho_num, 2), Rat::zero());
        let exact = c.as_exact_vec(c.len()).unwrap();
        let mut power = crat(rat(1, 1), Rat::zero());
        let mut scaled: Vec<CRat> = Vec::with_capacity(exact.len());
        for value in exact {
            scaled.push(value * power.clone());
            power = power * rho.clone();
        }
        let scaled = CoefficientSequence::from_exact(scaled);
        let a = rank_profile(&c, 10, 1e-8).unwrap();
        let b = rank_profile(&scaled, 10, 1e-8).unwrap();
        prop_assert_eq!(a.stabilized_rank, b.stabilized_rank);
    }

    /// Σ_{i+j≤2N−2} |c_{i+j}|² computed entrywise from the Hankel window
    /// equals the weighted sum over anti-diagonals, exactly in floats.
    #[test]
    fn hs_mass_bookkeeping(values in proptest::collection::vec(rational_entry(), 5..=17)) {
        let c = CoefficientSequence::from_exact(values);
        let order = (c.len() + 1) / 2;
        let (matrix_sum, weight_sum) = hs_norm_check(&c, order).unwrap();
        prop_assert_eq!(matrix_sum, weight_sum);
    }

    /// Feed the oracle a series built from a known recurrence: it must
    /// come back `rational` with a verified generator of no higher degree.
    #[test]
    fn exact_oracle_recovers_recurrences(
        q_coeffs in proptest::collection::vec((-4i64..=4, -4i64..=4), 1..=3),
        p_coeffs in proptest::collection::vec((-6i64..=6, -6i64..=6), 1..=3),
    ) {
        prop_assume!(p_coeffs.iter().any(|(re, im)| *re != 0 || *im != 0));
        let q: Vec<CRat> = q_coeffs.iter().map(|(re, im)| crat(rat(*re, 4), rat(*im, 4))).collect();
        let p: Vec<CRat> = p_coeffs.iter().map(|(re, im)| crat(rat(*re, 2), rat(*im, 2))).collect();
        // c_n + Σ_j q_j c_{n−j} = p_n, i.e. the series of P(z)/(1 + Σ q_j z^j).
        let len = 15usize;
        let mut c: Vec<CRat> = Vec::with_capacity(len);
        for n in 0..len {
            let mut v = p.get(n).cloned().unwrap_or_else(CRat::zero);
            for (j, qj) in q.iter().enumerate() {
                if n >= j + 1 {
                    v = v - qj.clone() * c[n - j - 1].clone();
                }
            }
            c.push(v);
        }
        let seq = CoefficientSequence::from_exact(c.clone());
        prop_assume!(!seq.is_zero());
        let verdict = rationality_oracle_exact(&seq, 6).unwrap();
        prop_assert_eq!(verdict.class, RationalityClass::Rational);
        let cert = verdict.certificate.expect("rational verdict carries a certificate");
        let b = cert.generator.as_exact_vec(cert.generator.len()).unwrap();
        // Kronecker bound: the minimal recurrence degree is the Hankel rank,
        // max(deg Q, deg P + 1) — polynomial summands count on top of deg Q.
        let degree_cap = q.len().max(p.len());
        prop_assert!(
            b.len() <= degree_cap + 1,
            "recurrence degree {} > {degree_cap}", b.len() - 1
        );
        prop_assert!(verify_recurrence_exact(&c, &b));
    }

    /// ‖(λA)^n‖ = |λ|ⁿ‖A^n‖ and ‖(A*)^n‖ = ‖A^n‖ on arbitrary dense
    /// sections, not just the curated scenarios.
    #[test]
    fn growth_identities_hold(entries in rational_vec(25), lam_choice in 0usize..3) {
        let op = dense(5, entries);
        let lam = [C64::new(2.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.5, 0.5)][lam_choice];
        let dev = growth_identity_deviations(&op, lam, &[1, 2, 3, 4, 6, 8]).unwrap();
        prop_assert!(dev.scaling <= 1e-12, "scaling deviation {}", dev.scaling);
        prop_assert!(dev.adjoint <= 1e-12, "adjoint deviation {}", dev.adjoint);
    }

    /// Krylov rank is monotone in the panel width and blind to a scalar
    /// rescaling of the seed (both exact-arithmetic theorems).
    #[test]
    fn krylov_rank_monotone_and_scale_free(
        x_entries in rational_vec(5),
        lam_num in -2i64..=2,
        m in 2usize..=5,
    ) {
        prop_assume!(x_entries.iter().any(|z| !z.is_zero()));
        let op = jordan(5, rat(lam_num, 1));
        let x = CoefficientSequence::from_exact(x_entries.clone());
        let narrow = krylov_rank(&op, &x, m - 1, 1e-10).unwrap();
        let wide = krylov_rank(&op, &x, m, 1e-10).unwrap();
        prop_assert!(narrow.rank <= wide.rank);
        prop_assert!(wide.rank <= m.min(5));
        let three = crat(rat(3, 1), Rat::zero());
        let scaled = CoefficientSequence::from_exact(
            x_entries.into_iter().map(|z| z * three.clone()).collect(),
        );
        prop_assert_eq!(krylov_rank(&op, &scaled, m, 1e-10).unwrap().rank, wide.rank);
    }

    /// The two float routes to y = Σ α_k A^k x (accumulated orbit vs panel
    /// times coefficient vector) must coincide.
    #[test]
    fn combination_routes_agree(
        alpha_entries in proptest::collection::vec((-8i64..=8, -8i64..=8), 2..=6),
    ) {
        prop_assume!(alpha_entries.iter().any(|(re, im)| *re != 0 || *im != 0));
        let op = shift_from_list((1..24).map(|k| rat(1, k + 1)).collect(), 24);
        let x = CoefficientSequence::basis(0, 4);
        let alpha = CoefficientSequence::from_exact(
            alpha_entries.iter().map(|(re, im)| crat(rat(*re, 8), rat(*im, 8))).collect(),
        );
        let out = combination_cyclicity(&op, &x, &alpha, 12, 1e-10).unwrap();
        prop_assert!(out.identity_residual <= 1e-12, "residual {}", out.identity_residual);
    }
}

/// Parsing a shipped scenario, serialising the parse, and parsing again
/// must land on the same configuration (the schema is self-describing).
#[test]
fn shipped_scenarios_round_trip_through_toml() {
    for (name, source) in corpus::SHIPPED {
        let first = parse_scenario(source).unwrap_or_else(|e| panic!("{name}: {e}"));
        let rendered = toml::to_string(&first).unwrap_or_else(|e| panic!("{name}: {e}"));
        let second =
            parse_scenario(&rendered).unwrap_or_else(|e| panic!("{name} (re-parse): {e}"));
        assert_eq!(first, second, "{name} drifted across a TOML round trip");
    }
}

/// Serialising a report and parsing it back is the identity on bytes.
#[test]
fn reports_round_trip_through_json() {
    let report = corpus::run_source(corpus::find("jordan_gh").unwrap(), &RunOptions::default())
        .unwrap();
    let bytes = report.to_json_bytes();
    let reparsed = shiftlab::report::AnalysisReport::from_json_bytes(&bytes).unwrap();
    assert_eq!(bytes, reparsed.to_json_bytes());
}
