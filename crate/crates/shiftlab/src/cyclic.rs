//! Krylov cyclicity probes, combination tests, and the duality bridge.
//!
//! A vector x is cyclic for A when span{A^n x} is dense; at matrix scale
//! the proxy is the rank of the Krylov panel [x, Ax, …, A^{m−1}x]. Full
//! rank in the compression certifies independence upstairs (a compression
//! of independent vectors cannot become independent by accident — the
//! implication only runs this direction, which the verdicts respect).
//!
//! Two classical stories are wired in: the Volterra operator on L²(0,1),
//! whose monomial orbit makes every power t^m cyclic and every convergent
//! combination Σ α_k V^k(1) cyclic again; and the duality bridge — a vector
//! whose power series is rational generates a finite-dimensional backward
//! orbit, hence fails cyclicity for the backward shift.

use crate::error::{Error, Result};
use crate::exact::ExactMat;
use crate::hankel::symbol_coefficients;
use crate::linalg::{numerical_rank, C64, Mat, Vect};
use crate::operator::{
    build_truncation, spectral_radius_estimate, OperatorKind, OperatorSpec,
    SpectralRadiusEstimate, TruncatedOperator, VolterraScheme,
};
use crate::rationality::{
    rank_profile, rationality_oracle_exact, RationalityClass, RationalityVerdict,
};
use crate::sequence::{Arithmetic, CoefficientSequence};
use crate::shift_rep::dependence_detect;
use num_traits::Zero;

#[derive(Clone, Debug)]
pub struct KrylovPanel {
    /// Unit columns A^n x/‖A^n x‖ (zero columns stay zero).
    pub columns: Mat,
    /// ‖A^n x‖ before normalisation, per column.
    pub raw_norms: Vec<f64>,
    /// First column index whose raw vector vanished, if any.
    pub truncated_at: Option<usize>,
    /// Raw exact columns when operator and vector both live in ℚ(i).
    pub exact: Option<ExactMat>,
}

#[derive(Clone, Debug)]
pub struct KrylovOutcome {
    pub rank: usize,
    pub columns: usize,
    pub dimension: usize,
    pub arithmetic: Arithmetic,
    /// The panel died at the truncation boundary of a finite-horizon
    /// operator: the rank speaks for the truncation, not the model.
    pub horizon_limited: bool,
    pub raw_norms: Vec<f64>,
    pub truncated_at: Option<usize>,
}

impl KrylovOutcome {
    pub fn is_full(&self) -> bool {
        self.rank == self.columns.min(self.dimension)
    }
}

/// [x, Ax, …, A^{m−1}x] with per-column normalisation for the float view
/// and raw exact columns when available.
pub fn build_panel(
    a: &TruncatedOperator,
    x: &CoefficientSequence,
    m: usize,
) -> Result<KrylovPanel> {
    if m == 0 {
        return Err(Error::Precondition("empty Krylov panel".into()));
    }
    a.horizon.check(m.saturating_sub(1))?;
    let n = a.dim();
    let xv = x.as_vect(n)?;
    if xv.norm() == 0.0 {
        return Err(Error::Precondition("Krylov seed must be nonzero".into()));
    }
    let mut columns = Mat::zeros(n, m);
    let mut raw_norms = Vec::with_capacity(m);
    let mut truncated_at = None;
    let mut v = xv;
    for col in 0..m {
        let norm = v.norm();
        raw_norms.push(norm);
        if norm > 0.0 {
            columns.set_column(col, &(&v / C64::new(norm, 0.0)));
        } else if truncated_at.is_none() {
            truncated_at = Some(col);
        }
        if col + 1 < m {
            v = &a.entries * v;
        }
    }
    let exact = match (a.exact.as_ref(), x.exact_values()) {
        (Some(ma), Some(_)) => {
            let mut cols = Vec::with_capacity(m);
            let mut ve = x.as_exact_vec(n)?;
            for col in 0..m {
                cols.push(ve.clone());
                if col + 1 < m {
                    ve = ma.matvec(&ve);
                }
            }
            Some(ExactMat::from_fn(n, m, |i, j| cols[j][i].clone()))
        }
        _ => None,
    };
    Ok(KrylovPanel {
        columns,
        raw_norms,
        truncated_at,
        exact,
    })
}

/// Rank of the Krylov panel: exact rank of the raw columns when possible,
/// numerical rank of the unit columns otherwise.
pub fn krylov_rank(
    a: &TruncatedOperator,
    x: &CoefficientSequence,
    m: usize,
    tol: f64,
) -> Result<KrylovOutcome> {
    let panel = build_panel(a, x, m)?;
    let (rank, arithmetic) = match &panel.exact {
        Some(e) => (e.rank(), Arithmetic::ExactRational),
        None => (numerical_rank(&panel.columns, tol), Arithmetic::Float),
    };
    let horizon_limited = panel.truncated_at.is_some()
        && matches!(a.horizon, crate::operator::Horizon::Finite(_));
    Ok(KrylovOutcome {
        rank,
        columns: m,
        dimension: a.dim(),
        arithmetic,
        horizon_limited,
        raw_norms: panel.raw_norms,
        truncated_at: panel.truncated_at,
    })
}

#[derive(Clone, Debug)]
pub struct CombinationOutcome {
    pub outcome: KrylovOutcome,
    /// ‖Σ α_k A^k x − P·α‖ / (‖α‖·max_k ‖A^k x‖): two float routes to the
    /// same vector must agree.
    pub identity_residual: f64,
    pub y: CoefficientSequence,
    /// Unverified hypotheses of the combination theorem, reported as
    /// warnings rather than hard failures.
    pub warnings: Vec<String>,
}

/// Forms y = Σ_k α_k A^k x and measures the cyclicity of y. The theorem
/// behind the construction asks for a quasinilpotent-like A (no point
/// spectrum, vanishing radius trend) and a cyclic seed; the proxies for
/// both are probed and reported as warnings when they fail, since a finite
/// section can only ever gesture at them.
pub fn combination_cyclicity(
    a: &TruncatedOperator,
    x: &CoefficientSequence,
    alpha: &CoefficientSequence,
    m: usize,
    tol: f64,
) -> Result<CombinationOutcome> {
    if alpha.is_empty() || alpha.is_zero() {
        return Err(Error::Precondition("combination needs nonzero coefficients".into()));
    }
    let mut warnings = Vec::new();

    // Hypothesis proxies.
    let probe = a.horizon.cap(16);
    if probe >= 8 {
        let sr = spectral_radius_estimate(a, probe)?;
        let trend_ok = sr
            .dyadic_table
            .windows(2)
            .last()
            .map(|w| w[1].1 < w[0].1)
            .unwrap_or(false);
        if !trend_ok {
            warnings.push(format!(
                "spectral radius estimates are not decreasing (last {:.6}); \
                 the quasinilpotence hypothesis is unsupported",
                sr.estimate
            ));
        }
    } else {
        warnings.push("horizon too short to probe the spectral radius trend".into());
    }
    let n = a.dim();
    let xv = x.as_vect(n)?;
    let dep_horizon = a.horizon.cap(8);
    if dep_horizon >= 2 {
        if dependence_detect(a, &xv, dep_horizon, 1e-12)?.is_some() {
            warnings.push(
                "the seed orbit carries a finite linear dependence — point spectrum \
                 in sight, combination theorem hypotheses violated"
                    .into(),
            );
        }
    }
    let seed = krylov_rank(a, x, m, tol)?;
    if !seed.is_full() {
        warnings.push(format!(
            "seed panel rank {} of {} — x itself is not cyclic at this order",
            seed.rank,
            seed.columns.min(seed.dimension)
        ));
    }

    // y by iterative accumulation.
    let k_top = alpha.len() - 1;
    a.horizon.check(k_top)?;
    let mut y = Vect::zeros(n);
    let mut v = xv.clone();
    for k in 0..alpha.len() {
        y += &v * alpha.get(k);
        if k < k_top {
            v = &a.entries * v;
        }
    }
    let y_exact = match (a.exact.as_ref(), x.exact_values(), alpha.exact_values()) {
        (Some(ma), Some(_), Some(al)) => {
            let mut acc = vec![crate::exact::CRat::zero(); n];
            let mut ve = x.as_exact_vec(n)?;
            for (k, ak) in al.iter().enumerate() {
                for i in 0..n {
                    let t = &ve[i] * ak;
                    let cur = acc[i].clone();
                    acc[i] = cur + t;
                }
                if k < k_top {
                    ve = ma.matvec(&ve);
                }
            }
            Some(acc)
        }
        _ => None,
    };

    // Cross-check: the same vector through the assembled panel.
    let raw = build_panel(a, x, alpha.len())?;
    let mut raw_cols = Mat::zeros(n, alpha.len());
    for j in 0..alpha.len() {
        let col = raw.columns.column(j) * C64::new(raw.raw_norms[j], 0.0);
        raw_cols.set_column(j, &col);
    }
    let alpha_v = alpha.as_vect(alpha.len())?;
    let y2 = &raw_cols * &alpha_v;
    let col_max = raw.raw_norms.iter().cloned().fold(0.0, f64::max);
    let scale = alpha_v.norm() * col_max;
    let identity_residual = if scale > 0.0 {
        (&y - &y2).norm() / scale
    } else {
        f64::INFINITY
    };

    let y_seq = match y_exact {
        Some(acc) => CoefficientSequence::from_exact(acc),
        None => CoefficientSequence::from_floats(y.iter().copied().collect()),
    };
    let outcome = krylov_rank(a, &y_seq, m, tol)?;
    Ok(CombinationOutcome {
        outcome,
        identity_residual,
        y: y_seq,
        warnings,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DssVerdict {
    /// The power series is rational: the backward-shift orbit of the
    /// coefficient vector spans finitely many directions, so it is not
    /// cyclic.
    NonCyclic,
    /// No rationality at the tested orders: no obstruction found.
    NoEvidence,
}

impl DssVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            DssVerdict::NonCyclic => "non_cyclic",
            DssVerdict::NoEvidence => "no_evidence",
        }
    }
}

#[derive(Clone, Debug)]
pub struct DssOutcome {
    pub verdict: DssVerdict,
    pub float_verdict: RationalityVerdict,
    pub exact_verdict: Option<RationalityVerdict>,
    pub warnings: Vec<String>,
}

/// The duality bridge: rationality of Σ c_n z^n certifies non-cyclicity of
/// (c_n) for the backward shift. One-sided by nature — `NoEvidence` never
/// asserts cyclicity.
pub fn dss_noncyclicity(
    c: &CoefficientSequence,
    d_max: usize,
    n_max_rank: usize,
    tol: f64,
) -> Result<DssOutcome> {
    let mut warnings = Vec::new();
    if let Some(h) = c.decay_hint.or_else(|| c.estimate_decay()) {
        if h >= 1.0 {
            warnings.push(format!(
                "decay estimate {h:.3} ≥ 1: the series may leave H², \
                 the bridge applies formally only"
            ));
        }
    }
    let float_verdict = rank_profile(c, n_max_rank, tol)?;
    let exact_verdict = match c.exact_values() {
        Some(_) => {
            let d_eff = d_max.min(c.len().saturating_sub(1) / 2);
            Some(rationality_oracle_exact(c, d_eff)?)
        }
        None => None,
    };
    let class = exact_verdict
        .as_ref()
        .map(|v| v.class)
        .unwrap_or(float_verdict.class);
    let verdict = match class {
        RationalityClass::Rational | RationalityClass::Zero => DssVerdict::NonCyclic,
        RationalityClass::NonRationalUpToOrder => DssVerdict::NoEvidence,
    };
    Ok(DssOutcome {
        verdict,
        float_verdict,
        exact_verdict,
        warnings,
    })
}

#[derive(Clone, Debug)]
pub struct VolterraOutcome {
    pub scheme: VolterraScheme,
    pub dimension: usize,
    /// Midpoint scheme: the quasinilpotence probe.
    pub spectral_radius: Option<SpectralRadiusEstimate>,
    /// Exact-basis scheme: labelled Krylov probes (seed description, outcome).
    pub krylov: Vec<(String, KrylovOutcome)>,
    /// Exact-basis scheme: the Σ V^k(1)/k! combination.
    pub combination: Option<CombinationOutcome>,
}

/// The stock Volterra studies. `midpoint` builds the collocation matrix and
/// measures ‖V^n‖^{1/n} up to `n_max`; `exact_basis` works on the monomial
/// coordinates, checking that 1, t, and the boundary monomial generate the
/// expected Krylov ranks and that the factorial combination stays cyclic.
pub fn volterra_scenario(
    n: usize,
    scheme: VolterraScheme,
    n_max: usize,
    tol: f64,
) -> Result<VolterraOutcome> {
    match scheme {
        VolterraScheme::Midpoint => {
            if n > 256 {
                return Err(Error::Precondition(format!("midpoint grid {n} > 256")));
            }
            let op = build_truncation(&OperatorSpec {
                kind: OperatorKind::Volterra { scheme },
                n,
                horizon_override: None,
            })?;
            let sr = spectral_radius_estimate(&op, n_max)?;
            Ok(VolterraOutcome {
                scheme,
                dimension: n,
                spectral_radius: Some(sr),
                krylov: Vec::new(),
                combination: None,
            })
        }
        VolterraScheme::ExactBasis => {
            if n > 24 {
                return Err(Error::Precondition(format!(
                    "exact-basis dimension {n} > 24 (factorials overflow the display)"
                )));
            }
            let op = build_truncation(&OperatorSpec {
                kind: OperatorKind::Volterra { scheme },
                n,
                horizon_override: None,
            })?;
            let mut krylov = Vec::new();
            for (label, idx) in [
                ("constant_1".to_string(), 0usize),
                ("monomial_t".to_string(), 1),
                (format!("boundary_monomial_{}", n - 1), n - 1),
            ] {
                let seed = CoefficientSequence::basis(idx, n);
                krylov.push((label, krylov_rank(&op, &seed, n, tol)?));
            }
            let alpha = CoefficientSequence::reciprocal_factorial(0, n);
            let combination = combination_cyclicity(
                &op,
                &CoefficientSequence::basis(0, n),
                &alpha,
                n,
                tol,
            )?;
            Ok(VolterraOutcome {
                scheme,
                dimension: n,
                spectral_radius: None,
                krylov,
                combination: Some(combination),
            })
        }
    }
}

#[derive(Clone, Debug)]
pub struct LatticeOutcome {
    pub sequence: CoefficientSequence,
    /// max |c_{2k}|: the even entries must vanish when x sits in the
    /// T²-invariant subspace and y is picked against it.
    pub even_max: f64,
    pub float_verdict: RationalityVerdict,
    pub exact_verdict: Option<RationalityVerdict>,
}

/// Interleaved moment probe: c_{2k} = ⟨T^{2k}x, y⟩ and
/// c_{2k+1} = ⟨T^{2k}x, T*y⟩, which assemble into the single symbol
/// sequence ⟨T^n x, y⟩. Rationality of the result with denominator degree
/// 2d is the lattice's fingerprint for d distinct poles.
pub fn square_lattice_probe(
    t: &TruncatedOperator,
    x: &CoefficientSequence,
    y: &CoefficientSequence,
    len: usize,
    d_max: usize,
    n_max_rank: usize,
    tol: f64,
) -> Result<LatticeOutcome> {
    let c = symbol_coefficients(t, x, y, len)?;
    let even_max = c
        .floats()
        .iter()
        .step_by(2)
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let float_verdict = rank_profile(&c, n_max_rank, tol)?;
    let exact_verdict = match c.exact_values() {
        Some(_) => {
            let d_eff = d_max.min(c.len().saturating_sub(1) / 2);
            Some(rationality_oracle_exact(&c, d_eff)?)
        }
        None => None,
    };
    Ok(LatticeOutcome {
        sequence: c,
        even_max,
        float_verdict,
        exact_verdict,
    })
}
