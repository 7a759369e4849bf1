//! Rationality verdicts and the injectivity pipeline.
//!
//! Kronecker's theorem drives everything: the Hankel matrix of ν = Σ c_n z^n
//! has finite rank q exactly when ν = P/Q is rational with deg Q = q (and
//! deg P < q), exactly when the c_n satisfy a linear recurrence with a monic
//! generator b of degree q — the reversed denominator. Float rank profiles
//! give the fast screen; the exact ℚ(i) oracle turns a screen into a
//! certificate (for rationality) or into nonvanishing Hankel determinants
//! (against low-degree rationality — a genuinely one-sided verdict, hence
//! `NonRationalUpToOrder`).
//!
//! `injectivity_decision` stacks the two classical obstructions in order of
//! precedence: a vanishing symbol (Case 1 — an orthogonality witness), then
//! a rational symbol (Case 2 — a range-defect witness built from the
//! rotated panel K̃ and the Toeplitz matrix of the recurrence generator).

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exact::{fmt_crat, CRat, ExactMat};
use crate::hankel::{kernel_generator, symbol_coefficients};
use crate::linalg::{numerical_rank, opnorm, unitary_e0_to, C64, Mat, Vect};
use crate::operator::{spectral_radius_estimate, SpectralRadiusEstimate, TruncatedOperator};
use crate::sequence::{Arithmetic, CoefficientSequence};
use crate::shift_rep::{SubspaceWitness, WitnessKind};

/// Window width for declaring a float rank profile stabilised.
pub const STABILIZATION_WINDOW: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RationalityClass {
    Zero,
    Rational,
    NonRationalUpToOrder,
}

impl RationalityClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            RationalityClass::Zero => "zero",
            RationalityClass::Rational => "rational",
            RationalityClass::NonRationalUpToOrder => "non_rational_up_to_order",
        }
    }
}

/// ν = P/Q with the recurrence generator b that produced them; Q is the
/// reversal of b with trailing zeros trimmed, so deg(b) is the Hankel rank
/// while deg(Q) can be smaller when the recurrence has leading zeros
/// (polynomial summands in ν).
#[derive(Clone, Debug)]
pub struct RationalityCertificate {
    pub generator: CoefficientSequence,
    pub numerator: CoefficientSequence,
    pub denominator: CoefficientSequence,
}

#[derive(Clone, Debug)]
pub struct DetEvidence {
    pub order: usize,
    pub display: String,
    pub nonzero: bool,
}

#[derive(Clone, Debug)]
pub struct RationalityVerdict {
    pub class: RationalityClass,
    pub stabilized_rank: Option<usize>,
    pub certificate: Option<RationalityCertificate>,
    /// (window order N, rank of the scaled H_N).
    pub rank_sequence: Vec<(usize, usize)>,
    /// Exact-mode refutation material: (order, det H_order).
    pub determinant_evidence: Vec<DetEvidence>,
    pub arithmetic: Arithmetic,
    pub warnings: Vec<String>,
}

/// Balanced Hankel window: entries c_{i+j}·s^{i+j} with s chosen so the
/// first and last nonzero anti-diagonals carry equal magnitude. The scaling
/// is the diagonal congruence D H D (D = diag(s^i)), so ranks are untouched
/// while fast-decaying sequences stop drowning their own tail.
pub fn scaled_hankel(c: &CoefficientSequence, n: usize) -> Result<(Mat, f64)> {
    let need = 2 * n - 1;
    if c.len() < need {
        return Err(Error::InsufficientPrefix { need, have: c.len() });
    }
    let window: Vec<f64> = (0..need).map(|k| c.get(k).norm()).collect();
    let first = window.iter().position(|a| *a > 0.0);
    let last = window.iter().rposition(|a| *a > 0.0);
    let s = match (first, last) {
        (Some(a), Some(b)) if b > a => {
            let raw = (window[a] / window[b]).powf(1.0 / (b - a) as f64);
            raw.clamp(1e-9, 1e9)
        }
        _ => 1.0,
    };
    let m = Mat::from_fn(n, n, |i, j| c.get(i + j) * C64::new(s.powi((i + j) as i32), 0.0));
    Ok((m, s))
}

/// Float screen: numerical ranks of the balanced windows H_2 … H_{n_max},
/// declared stabilised when the last four agree. A stabilised profile is
/// only promoted to `Rational` once a verified recurrence generator of that
/// degree exists; the class is never promoted on ranks alone.
pub fn rank_profile(c: &CoefficientSequence, n_max: usize, tol: f64) -> Result<RationalityVerdict> {
    let mut warnings = Vec::new();
    if c.is_zero() {
        return Ok(RationalityVerdict {
            class: RationalityClass::Zero,
            stabilized_rank: Some(0),
            certificate: None,
            rank_sequence: Vec::new(),
            determinant_evidence: Vec::new(),
            arithmetic: Arithmetic::Float,
            warnings,
        });
    }
    let n_eff = n_max.min((c.len() + 1) / 2);
    if n_eff < 2 {
        return Err(Error::InsufficientPrefix { need: 3, have: c.len() });
    }
    let mut rank_sequence = Vec::with_capacity(n_eff - 1);
    for n in 2..=n_eff {
        let (m, _) = scaled_hankel(c, n)?;
        rank_sequence.push((n, numerical_rank(&m, tol)));
    }

    let stabilised = rank_sequence.len() >= STABILIZATION_WINDOW
        && rank_sequence
            .iter()
            .rev()
            .take(STABILIZATION_WINDOW)
            .all(|(_, r)| *r == rank_sequence.last().unwrap().1);
    if rank_sequence.len() < STABILIZATION_WINDOW {
        warnings.push(format!(
            "only {} window orders available; stabilisation needs {}",
            rank_sequence.len(),
            STABILIZATION_WINDOW
        ));
    }

    if !stabilised {
        return Ok(RationalityVerdict {
            class: RationalityClass::NonRationalUpToOrder,
            stabilized_rank: None,
            certificate: None,
            rank_sequence,
            determinant_evidence: Vec::new(),
            arithmetic: Arithmetic::Float,
            warnings,
        });
    }

    let r = rank_sequence.last().unwrap().1;
    let generator = kernel_generator(c, r, tol)?;
    match generator {
        Some(b) => {
            let certificate = certificate_from_generator(c, &b)?;
            Ok(RationalityVerdict {
                class: RationalityClass::Rational,
                stabilized_rank: Some(r),
                certificate: Some(certificate),
                rank_sequence,
                determinant_evidence: Vec::new(),
                arithmetic: Arithmetic::Float,
                warnings,
            })
        }
        None => {
            warnings.push(format!(
                "rank profile stabilised at {r} but no recurrence of that degree \
                 survived re-verification"
            ));
            Ok(RationalityVerdict {
                class: RationalityClass::NonRationalUpToOrder,
                stabilized_rank: Some(r),
                certificate: None,
                rank_sequence,
                determinant_evidence: Vec::new(),
                arithmetic: Arithmetic::Float,
                warnings,
            })
        }
    }
}

/// Exact decision up to denominator degree `d_max`. Either returns a fully
/// verified certificate (recurrence checked on the whole prefix in ℚ(i)),
/// or refutes every degree ≤ d_max and ships exact Hankel determinants as
/// evidence. Requires 2·d_max + 1 coefficients.
pub fn rationality_oracle_exact(
    c: &CoefficientSequence,
    d_max: usize,
) -> Result<RationalityVerdict> {
    let xs = c
        .exact_values()
        .ok_or_else(|| Error::ExactUnavailable("sequence is float-valued".into()))?;
    if c.len() < 2 * d_max + 1 {
        return Err(Error::InsufficientPrefix {
            need: 2 * d_max + 1,
            have: c.len(),
        });
    }
    let mut warnings = Vec::new();
    if c.is_zero() {
        return Ok(RationalityVerdict {
            class: RationalityClass::Zero,
            stabilized_rank: Some(0),
            certificate: None,
            rank_sequence: Vec::new(),
            determinant_evidence: Vec::new(),
            arithmetic: Arithmetic::ExactRational,
            warnings,
        });
    }

    // Exact rank trail of the raw windows — scaling is a float device only.
    let n_rank_max = ((c.len() + 1) / 2).min(d_max + 1);
    let mut rank_sequence = Vec::new();
    for n in 2..=n_rank_max {
        let h = ExactMat::from_fn(n, n, |i, j| xs[i + j].clone());
        rank_sequence.push((n, h.rank()));
    }

    let generator = kernel_generator(c, d_max, 0.0)?;
    if let Some(b) = generator {
        let q = b.degree().unwrap_or(0);
        let certificate = certificate_from_generator(c, &b)?;
        return Ok(RationalityVerdict {
            class: RationalityClass::Rational,
            stabilized_rank: Some(q),
            certificate: Some(certificate),
            rank_sequence,
            determinant_evidence: Vec::new(),
            arithmetic: Arithmetic::ExactRational,
            warnings,
        });
    }

    let d_top = (d_max + 1).min((c.len() + 1) / 2);
    let mut determinant_evidence = Vec::with_capacity(d_top);
    for d in 1..=d_top {
        let h = ExactMat::from_fn(d, d, |i, j| xs[i + j].clone());
        let det = h.det()?;
        determinant_evidence.push(DetEvidence {
            order: d,
            display: fmt_crat(&det),
            nonzero: !det.is_zero(),
        });
    }
    if determinant_evidence.iter().all(|e| e.nonzero) {
        warnings.push(format!(
            "all exact Hankel determinants of orders ≤ {d_top} are nonzero"
        ));
    }
    Ok(RationalityVerdict {
        class: RationalityClass::NonRationalUpToOrder,
        stabilized_rank: None,
        certificate: None,
        rank_sequence,
        determinant_evidence,
        arithmetic: Arithmetic::ExactRational,
        warnings,
    })
}

/// P/Q from a verified generator: Q_j = b_{q−j} (trailing zeros trimmed),
/// P = the first q coefficients of ν·Q. Exact whenever both inputs are.
pub fn certificate_from_generator(
    c: &CoefficientSequence,
    b: &CoefficientSequence,
) -> Result<RationalityCertificate> {
    let q = b
        .degree()
        .ok_or_else(|| Error::Precondition("zero generator".into()))?;
    match (c.exact_values(), b.exact_values()) {
        (Some(cs), Some(bs)) => {
            let mut qq: Vec<CRat> = (0..=q).map(|j| bs[q - j].clone()).collect();
            while qq.len() > 1 && qq.last().map(Zero::is_zero).unwrap_or(false) {
                qq.pop();
            }
            let mut pp: Vec<CRat> = (0..q.max(1))
                .map(|l| {
                    let mut s = CRat::zero();
                    for (j, qj) in qq.iter().enumerate().take(l + 1) {
                        s = s + qj * &cs[l - j];
                    }
                    s
                })
                .collect();
            while pp.len() > 1 && pp.last().map(Zero::is_zero).unwrap_or(false) {
                pp.pop();
            }
            Ok(RationalityCertificate {
                generator: b.clone(),
                numerator: CoefficientSequence::from_exact(pp),
                denominator: CoefficientSequence::from_exact(qq),
            })
        }
        _ => {
            let bq: Vec<C64> = (0..=q).map(|j| b.get(j)).collect();
            let mut qq: Vec<C64> = (0..=q).map(|j| bq[q - j]).collect();
            let qmax = qq.iter().map(|z| z.norm()).fold(0.0, f64::max);
            while qq.len() > 1
                && qq.last().map(|z| z.norm() <= 1e-12 * qmax).unwrap_or(false)
            {
                qq.pop();
            }
            let mut pp: Vec<C64> = (0..q.max(1))
                .map(|l| {
                    (0..=l.min(qq.len() - 1))
                        .map(|j| qq[j] * c.get(l - j))
                        .sum()
                })
                .collect();
            let pmax = pp.iter().map(|z| z.norm()).fold(0.0, f64::max);
            while pp.len() > 1
                && pp.last().map(|z| z.norm() <= 1e-12 * pmax).unwrap_or(false)
            {
                pp.pop();
            }
            Ok(RationalityCertificate {
                generator: b.clone(),
                numerator: CoefficientSequence::from_floats(pp),
                denominator: CoefficientSequence::from_floats(qq),
            })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InjectivityVerdict {
    /// ψ = 0: the orbit of f is orthogonal to g (Case 1).
    ZeroSymbol,
    /// ψ rational: the Hankel operator has a finite-rank, hence strictly
    /// smaller, closed range (Case 2).
    RationalKernel,
    /// Neither obstruction visible at the tested orders.
    NoEvidence,
}

impl InjectivityVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            InjectivityVerdict::ZeroSymbol => "zero_symbol",
            InjectivityVerdict::RationalKernel => "rational_kernel",
            InjectivityVerdict::NoEvidence => "no_evidence",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct InjectivityParams {
    /// Symbol prefix length L (powers up to L−1).
    pub length: usize,
    /// Exact-oracle degree bound.
    pub d_max: usize,
    /// Largest float window order.
    pub n_max_rank: usize,
    /// Relative tolerance for ranks, kernels and witness residuals.
    pub tol: f64,
}

impl Default for InjectivityParams {
    fn default() -> Self {
        InjectivityParams {
            length: 33,
            d_max: 6,
            n_max_rank: 12,
            tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Case2Evidence {
    /// ‖row 0 of K̃·T_b‖ / (‖K̃‖·‖b‖).
    pub row0_residual: f64,
    /// ‖T_b* α‖ / (‖b‖·‖α‖).
    pub alpha_residual: f64,
    pub panel_columns: usize,
}

#[derive(Clone, Debug)]
pub struct InjectivityOutcome {
    pub verdict: InjectivityVerdict,
    pub case_label: Option<&'static str>,
    pub witness: Option<SubspaceWitness>,
    pub symbol: CoefficientSequence,
    pub float_verdict: RationalityVerdict,
    pub exact_verdict: Option<RationalityVerdict>,
    pub spectral_radius: Option<SpectralRadiusEstimate>,
    pub case2: Option<Case2Evidence>,
    pub warnings: Vec<String>,
}

/// The Case-1/Case-2 decision for the symbol of (A, f, g).
///
/// Preconditions: the tested power range must fit the horizon and the
/// spectral radius estimate must fall below 1 (apply the contract rescale
/// otherwise). Case 1 takes precedence over Case 2: a vanishing symbol is
/// also rational, and the sharper certificate wins.
pub fn injectivity_decision(
    a: &TruncatedOperator,
    operator_name: &str,
    f: &CoefficientSequence,
    g: &CoefficientSequence,
    params: &InjectivityParams,
) -> Result<InjectivityOutcome> {
    let mut warnings = Vec::new();

    let probe = a.horizon.cap(32);
    let spectral_radius = if probe >= 8 {
        let sr = spectral_radius_estimate(a, probe)?;
        if !sr.below_one {
            return Err(Error::Precondition(format!(
                "spectral radius estimate {:.6} ≥ 1; rerun with the contract rescale",
                sr.estimate
            )));
        }
        Some(sr)
    } else {
        warnings.push(format!(
            "horizon {} too short for a spectral radius probe",
            a.horizon
        ));
        None
    };

    let c = symbol_coefficients(a, f, g, params.length)?;
    let n = a.dim();
    let f_v = f.as_vect(n)?;
    let g_v = g.as_vect(n)?;
    let scale = f_v.norm() * g_v.norm();

    // Case 1: ψ = 0 (exact zero, or every |c_n| below tol·‖f‖‖g‖).
    let zero = match c.exact_values() {
        Some(_) => c.is_zero(),
        None => c.max_abs() <= params.tol * scale,
    };
    if zero {
        let residuals: Vec<f64> = c.floats().iter().map(|z| z.norm() / scale).collect();
        let mut vectors = BTreeMap::new();
        vectors.insert("f".to_string(), f.clone());
        vectors.insert("g".to_string(), g.clone());
        let witness = SubspaceWitness {
            kind: WitnessKind::Orthogonality,
            claim: format!(
                "⟨A^n f, g⟩ = 0 for n < {}: the orbit of f under {} stays \
                 orthogonal to g, so the symbol vanishes identically",
                params.length, operator_name
            ),
            operator: operator_name.to_string(),
            vectors,
            residuals,
            tol: params.tol,
        };
        let float_verdict = rank_profile(&c, params.n_max_rank, params.tol)?;
        return Ok(InjectivityOutcome {
            verdict: InjectivityVerdict::ZeroSymbol,
            case_label: Some("case_1_zero_symbol"),
            witness: Some(witness),
            symbol: c,
            float_verdict,
            exact_verdict: None,
            spectral_radius,
            case2: None,
            warnings,
        });
    }

    let float_verdict = rank_profile(&c, params.n_max_rank, params.tol)?;
    let exact_verdict = if c.exact_values().is_some() {
        let d_eff = params.d_max.min((c.len().saturating_sub(1)) / 2);
        if d_eff < params.d_max {
            warnings.push(format!(
                "exact oracle degree lowered to {d_eff} by the prefix length"
            ));
        }
        Some(rationality_oracle_exact(&c, d_eff)?)
    } else {
        None
    };

    let decisive = exact_verdict.as_ref().unwrap_or(&float_verdict);
    let generator = decisive
        .certificate
        .as_ref()
        .map(|cert| cert.generator.clone());

    if let (RationalityClass::Rational, Some(b)) = (decisive.class, generator) {
        let (case2, witness) =
            build_case2_witness(a, operator_name, &f_v, &g_v, f, g, &c, &b, params.tol)?;
        return Ok(InjectivityOutcome {
            verdict: InjectivityVerdict::RationalKernel,
            case_label: Some("case_2_rational_kernel"),
            witness: Some(witness),
            symbol: c,
            float_verdict,
            exact_verdict,
            spectral_radius,
            case2: Some(case2),
            warnings,
        });
    }

    Ok(InjectivityOutcome {
        verdict: InjectivityVerdict::NoEvidence,
        case_label: None,
        witness: None,
        symbol: c,
        float_verdict,
        exact_verdict,
        spectral_radius,
        case2: None,
        warnings,
    })
}

/// The Case-2 construction, shared with `verify`: rotate g onto e_0 with
/// the deterministic Householder unitary U, set Ã = U*AU, f̃ = U*f, build
/// the panel K̃ = [f̃, Ãf̃, …] and the Toeplitz matrix T_b of the generator.
/// Then row 0 of K̃·T_b vanishes (the composed panel's range misses the
/// g-direction) and α with α_n = conj(⟨A^n f, g⟩)/‖g‖ lies in ker T_b*.
/// The three Case-2 residuals, shared between the decision path and report
/// verification: vanishing first row of K̃·T_b, α ∈ ker T_b*, and the
/// consistency of α with (f, g) — α_n must be conj((Ã^n f̃)_0), i.e. the
/// stored kernel vector really is the conjugated symbol of the stored pair.
/// The third residual is what makes the witness tamper-evident: without it
/// a nilpotent A would zero the first two rows for any f whatsoever.
pub fn case2_residuals(
    a_entries: &Mat,
    f_v: &Vect,
    g_v: &Vect,
    b: &CoefficientSequence,
    alpha: &Vect,
) -> Result<(f64, f64, f64, usize)> {
    let l = alpha.len();
    let q = b
        .degree()
        .ok_or_else(|| Error::Precondition("zero generator".into()))?;
    if q >= l {
        return Err(Error::DegreeOverflow { degree: q, columns: l });
    }
    let u = unitary_e0_to(g_v);
    let a_rot = u.adjoint() * a_entries * &u;
    let f_rot = u.adjoint() * f_v;

    let n = a_rot.nrows();
    let mut panel = Mat::zeros(n, l);
    let mut v = f_rot;
    for col in 0..l {
        panel.set_column(col, &v);
        if col + 1 < l {
            v = &a_rot * v;
        }
    }
    let cols_out = l - q;
    let mut t_b = Mat::zeros(l, cols_out);
    for j in 0..cols_out {
        for i in 0..=q {
            t_b[(j + i, j)] = b.get(i);
        }
    }
    let product = &panel * &t_b;
    let row0 = product.row(0).norm();
    let b_norm = b.norm_l2();
    let panel_norm = opnorm(&panel);
    let row0_rel = if panel_norm * b_norm > 0.0 {
        row0 / (panel_norm * b_norm)
    } else {
        f64::INFINITY
    };
    let alpha_res = (t_b.adjoint() * alpha).norm();
    let alpha_rel = if b_norm * alpha.norm() > 0.0 {
        alpha_res / (b_norm * alpha.norm())
    } else {
        f64::INFINITY
    };
    let mut mismatch = 0.0f64;
    let mut magnitude = 0.0f64;
    for n in 0..l {
        let expected = panel[(0, n)].conj();
        mismatch = mismatch.max((alpha[n] - expected).norm());
        magnitude = magnitude.max(expected.norm()).max(alpha[n].norm());
    }
    let consistency = if magnitude > 0.0 {
        mismatch / magnitude
    } else {
        mismatch
    };
    Ok((row0_rel, alpha_rel, consistency, cols_out))
}

#[allow(clippy::too_many_arguments)]
fn build_case2_witness(
    a: &TruncatedOperator,
    operator_name: &str,
    f_v: &Vect,
    g_v: &Vect,
    f: &CoefficientSequence,
    g: &CoefficientSequence,
    c: &CoefficientSequence,
    b: &CoefficientSequence,
    tol: f64,
) -> Result<(Case2Evidence, SubspaceWitness)> {
    let g_norm = g_v.norm();
    let alpha = Vect::from_fn(c.len(), |n, _| c.get(n).conj() / C64::new(g_norm, 0.0));
    let (row0, alpha_rel, consistency, cols_out) =
        case2_residuals(&a.entries, f_v, g_v, b, &alpha)?;
    let case2 = Case2Evidence {
        row0_residual: row0,
        alpha_residual: alpha_rel,
        panel_columns: cols_out,
    };
    let mut vectors = BTreeMap::new();
    vectors.insert("generator_b".to_string(), b.clone());
    vectors.insert(
        "alpha".to_string(),
        CoefficientSequence::from_floats(alpha.iter().copied().collect()),
    );
    vectors.insert("f".to_string(), f.clone());
    vectors.insert("g".to_string(), g.clone());
    let witness = SubspaceWitness {
        kind: WitnessKind::RangeDefect,
        claim: format!(
            "with U the deterministic rotation g → ‖g‖·e_0, Ã = U*AU and \
             f̃ = U*f, the composed panel K̃·T_b has vanishing first row and \
             T_b*α = 0 for α_n = conj(⟨A^n f, g⟩)/‖g‖ — the recurrence \
             generator b turns the symbol of ({operator_name}, f, g) into a \
             rank-deficient Hankel relation"
        ),
        operator: operator_name.to_string(),
        vectors,
        residuals: vec![row0, alpha_rel, consistency],
        tol,
    };
    Ok((case2, witness))
}
