//! Operator specifications and faithful truncations.
//!
//! Every operator in the lab is a finite N×N matrix standing in for an
//! operator on a separable Hilbert space. The point of the `Horizon` is
//! honesty about that substitution: a truncated forward shift of order N
//! computes A^n f correctly only while the support of f stays below the
//! boundary, so power-hungry routines must declare how far they walk and
//! refuse to walk further. Kinds whose truncation is the operator itself
//! (Jordan cells, diagonals, dense matrices, discretisations taken as-is)
//! carry an unbounded horizon.
//!
//! Float entries are always derived from an exact ℚ(i) realisation when one
//! exists, so the two arithmetics agree at the last bit of the projection.

use nalgebra::DMatrix;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exact::{crat, crat_to_c64, fmt_rat, parse_crat, parse_rat, CRat, ExactMat, Rat};
use crate::linalg::{opnorm, C64, Mat, Vect};
use crate::sequence::CoefficientSequence;

pub const DEFAULT_CONDITION_CAP: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Horizon {
    Finite(usize),
    Unbounded,
}

impl Horizon {
    pub fn admits(&self, n: usize) -> bool {
        match self {
            Horizon::Finite(h) => n <= *h,
            Horizon::Unbounded => true,
        }
    }

    pub fn check(&self, n: usize) -> Result<()> {
        if self.admits(n) {
            Ok(())
        } else {
            match self {
                Horizon::Finite(h) => Err(Error::HorizonExceeded {
                    requested: n,
                    horizon: *h,
                }),
                Horizon::Unbounded => unreachable!(),
            }
        }
    }

    pub fn cap(&self, n: usize) -> usize {
        match self {
            Horizon::Finite(h) => n.min(*h),
            Horizon::Unbounded => n,
        }
    }
}

impl std::fmt::Display for Horizon {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Horizon::Finite(h) => write!(f, "{h}"),
            Horizon::Unbounded => write!(f, "unbounded"),
        }
    }
}

/// Weight rules for (adjoint) weighted shifts; weights must be positive with
/// a finite supremum, which each rule guarantees structurally.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightRule {
    /// w_n = 1/(n+offset); the Example-class shift is offset 1.
    Reciprocal { offset: usize },
    Constant(Rat),
    List(Vec<Rat>),
}

impl WeightRule {
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim().replace(' ', "");
        if let Some(inner) = t.strip_prefix("1/(n+").and_then(|s| s.strip_suffix(')')) {
            let offset: usize = inner
                .parse()
                .map_err(|_| Error::Parse(format!("bad weight rule `{text}`")))?;
            if offset == 0 {
                return Err(Error::Parse("weight rule 1/(n+0) hits w_0 = 1/0".into()));
            }
            return Ok(WeightRule::Reciprocal { offset });
        }
        let c = parse_rat(&t)?;
        if !c.is_positive() {
            return Err(Error::Parse(format!("constant weight `{text}` must be positive")));
        }
        Ok(WeightRule::Constant(c))
    }

    pub fn from_list(values: Vec<Rat>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSpec("empty weight list".into()));
        }
        if values.iter().any(|w| !w.is_positive()) {
            return Err(Error::InvalidSpec("weights must be positive".into()));
        }
        Ok(WeightRule::List(values))
    }

    pub fn weight(&self, n: usize) -> Result<Rat> {
        match self {
            WeightRule::Reciprocal { offset } => {
                Ok(Rat::new(1.into(), ((n + offset) as i64).into()))
            }
            WeightRule::Constant(c) => Ok(c.clone()),
            WeightRule::List(ws) => ws.get(n).cloned().ok_or(Error::InsufficientPrefix {
                need: n + 1,
                have: ws.len(),
            }),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            WeightRule::Reciprocal { offset } => format!("1/(n+{offset})"),
            WeightRule::Constant(c) => fmt_rat(c),
            WeightRule::List(ws) => format!("list[{}]", ws.len()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VolterraScheme {
    /// Midpoint collocation of (Vf)(t) = ∫_0^t f ds on a uniform grid,
    /// h·(L + I/2) with L strictly lower triangular of ones and h = 1/N.
    Midpoint,
    /// The matrix of V on the monomial basis {t^k/k!}: a weight-one forward
    /// shift, exact as far as column N−1.
    ExactBasis,
}

#[derive(Clone, Debug)]
pub enum OperatorKind {
    WeightedShift { weights: WeightRule },
    AdjointShift { weights: WeightRule },
    JordanBlock { eigenvalue: CRat },
    Diagonal { entries: Vec<CRat> },
    Volterra { scheme: VolterraScheme },
    Dense { entries: Vec<CRat> },
    PolynomialOf { base: Box<OperatorSpec>, coeffs: Vec<CRat> },
    /// Result of an in-run transformation (rescaling, rotation, adjoint);
    /// not buildable from scratch, kept for provenance strings.
    Derived { label: String },
}

#[derive(Clone, Debug)]
pub struct OperatorSpec {
    pub kind: OperatorKind,
    /// Matrix dimension N ≥ 2 (the Jordan cell size for that kind).
    pub n: usize,
    pub horizon_override: Option<usize>,
}

impl OperatorSpec {
    pub fn describe(&self) -> String {
        let n = self.n;
        match &self.kind {
            OperatorKind::WeightedShift { weights } => {
                format!("weighted_shift(w={}, N={n})", weights.describe())
            }
            OperatorKind::AdjointShift { weights } => {
                format!("adjoint_shift(w={}, N={n})", weights.describe())
            }
            OperatorKind::JordanBlock { eigenvalue } => {
                format!("jordan_block(λ={}, k={n})", crate::exact::fmt_crat(eigenvalue))
            }
            OperatorKind::Diagonal { .. } => format!("diagonal(N={n})"),
            OperatorKind::Volterra { scheme } => match scheme {
                VolterraScheme::Midpoint => format!("volterra(midpoint, N={n})"),
                VolterraScheme::ExactBasis => format!("volterra(exact_basis, N={n})"),
            },
            OperatorKind::Dense { .. } => format!("dense(N={n})"),
            OperatorKind::PolynomialOf { base, coeffs } => {
                format!("polynomial(deg={}, of {})", coeffs.len().saturating_sub(1), base.describe())
            }
            OperatorKind::Derived { label } => label.clone(),
        }
    }
}

/// A built truncation: float entries, the exact realisation when one exists,
/// and the horizon contract under which powers may be trusted.
#[derive(Clone, Debug)]
pub struct TruncatedOperator {
    pub entries: Mat,
    pub exact: Option<ExactMat>,
    pub horizon: Horizon,
    pub spec: OperatorSpec,
}

impl TruncatedOperator {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn describe(&self) -> String {
        self.spec.describe()
    }

    /// Float adjoint; exact data conjugate-transposes alongside.
    pub fn adjoint(&self) -> TruncatedOperator {
        let exact = self.exact.as_ref().map(|m| {
            ExactMat::from_fn(m.ncols(), m.nrows(), |i, j| m[(j, i)].conj())
        });
        TruncatedOperator {
            entries: self.entries.adjoint(),
            exact,
            horizon: self.horizon,
            spec: OperatorSpec {
                kind: OperatorKind::Derived {
                    label: format!("adjoint of {}", self.describe()),
                },
                n: self.dim(),
                horizon_override: None,
            },
        }
    }

    /// A/(‖A‖+1): a strict contraction with the same invariant structure.
    /// The scale is a computed float, so the exact realisation is dropped.
    pub fn contract_rescale(&self) -> TruncatedOperator {
        let s = 1.0 / (opnorm(&self.entries) + 1.0);
        TruncatedOperator {
            entries: &self.entries * C64::new(s, 0.0),
            exact: None,
            horizon: self.horizon,
            spec: OperatorSpec {
                kind: OperatorKind::Derived {
                    label: format!("contract rescale of {}", self.describe()),
                },
                n: self.dim(),
                horizon_override: None,
            },
        }
    }
}

fn exact_to_float(m: &ExactMat) -> Mat {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| crat_to_c64(&m[(i, j)]))
}

/// Builds the N×N truncation of a spec together with its horizon.
///
/// Shift kinds default to horizon ⌊N/2⌋ (a power A^n only fills rows up to
/// support(f)+n, so half the order keeps every computed coordinate faithful
/// for vectors supported in the lower half); `exact_basis` Volterra is
/// faithful to column N−1 and gets horizon N; the remaining kinds are their
/// own truncation.
pub fn build_truncation(spec: &OperatorSpec) -> Result<TruncatedOperator> {
    let n = spec.n;
    if n < 2 {
        return Err(Error::InvalidSpec(format!("truncation order {n} < 2")));
    }
    let (exact, default_horizon): (ExactMat, Horizon) = match &spec.kind {
        OperatorKind::WeightedShift { weights } => {
            let mut m = ExactMat::zeros(n, n);
            for j in 0..n - 1 {
                m[(j + 1, j)] = crat(weights.weight(j)?, Rat::zero());
            }
            (m, Horizon::Finite(n / 2))
        }
        OperatorKind::AdjointShift { weights } => {
            let mut m = ExactMat::zeros(n, n);
            for j in 0..n - 1 {
                m[(j, j + 1)] = crat(weights.weight(j)?, Rat::zero());
            }
            (m, Horizon::Finite(n / 2))
        }
        OperatorKind::JordanBlock { eigenvalue } => {
            let mut m = ExactMat::zeros(n, n);
            for i in 0..n {
                m[(i, i)] = eigenvalue.clone();
                if i + 1 < n {
                    m[(i, i + 1)] = CRat::one();
                }
            }
            (m, Horizon::Unbounded)
        }
        OperatorKind::Diagonal { entries } => {
            if entries.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: entries.len(),
                });
            }
            let mut m = ExactMat::zeros(n, n);
            for i in 0..n {
                m[(i, i)] = entries[i].clone();
            }
            (m, Horizon::Unbounded)
        }
        OperatorKind::Volterra { scheme } => match scheme {
            VolterraScheme::Midpoint => {
                let h = Rat::new(1.into(), (n as i64).into());
                let half = Rat::new(1.into(), 2.into());
                let m = ExactMat::from_fn(n, n, |i, j| {
                    if i == j {
                        crat(&h * &half, Rat::zero())
                    } else if i > j {
                        crat(h.clone(), Rat::zero())
                    } else {
                        CRat::zero()
                    }
                });
                (m, Horizon::Unbounded)
            }
            VolterraScheme::ExactBasis => {
                let mut m = ExactMat::zeros(n, n);
                for j in 0..n - 1 {
                    m[(j + 1, j)] = CRat::one();
                }
                (m, Horizon::Finite(n))
            }
        },
        OperatorKind::Dense { entries } => {
            if entries.len() != n * n {
                return Err(Error::DimensionMismatch {
                    expected: n * n,
                    got: entries.len(),
                });
            }
            let m = ExactMat::from_fn(n, n, |i, j| entries[i * n + j].clone());
            (m, Horizon::Unbounded)
        }
        OperatorKind::PolynomialOf { base, coeffs } => {
            let built = build_truncation(base)?;
            let seq = CoefficientSequence::from_exact(coeffs.clone());
            return polynomial_of(&built, &seq).map(|mut op| {
                op.spec = spec.clone();
                op
            });
        }
        OperatorKind::Derived { label } => {
            return Err(Error::InvalidSpec(format!(
                "derived operator `{label}` cannot be rebuilt from a spec"
            )));
        }
    };
    let horizon = match spec.horizon_override {
        Some(h) => Horizon::Finite(h),
        None => default_horizon,
    };
    Ok(TruncatedOperator {
        entries: exact_to_float(&exact),
        exact: Some(exact),
        horizon,
        spec: spec.clone(),
    })
}

/// x ↦ A^n x by iterated float mat-vec; n must respect the horizon.
pub fn apply_power(op: &TruncatedOperator, n: usize, x: &Vect) -> Result<Vect> {
    op.horizon.check(n)?;
    if x.len() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            got: x.len(),
        });
    }
    let mut v = x.clone();
    for _ in 0..n {
        v = &op.entries * v;
    }
    Ok(v)
}

/// Exact counterpart of `apply_power`.
pub fn apply_power_exact(op: &TruncatedOperator, n: usize, x: &[CRat]) -> Result<Vec<CRat>> {
    op.horizon.check(n)?;
    let m = op
        .exact
        .as_ref()
        .ok_or_else(|| Error::ExactUnavailable(format!("{} has no exact form", op.describe())))?;
    if x.len() != m.nrows() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            got: x.len(),
        });
    }
    let mut v = x.to_vec();
    for _ in 0..n {
        v = m.matvec(&v);
    }
    Ok(v)
}

/// ‖A^n‖ for n = 1..=n_max by one running product and an SVD per step.
pub fn power_norms(op: &TruncatedOperator, n_max: usize) -> Result<Vec<f64>> {
    op.horizon.check(n_max)?;
    let mut out = Vec::with_capacity(n_max);
    let mut p = op.entries.clone();
    for _ in 0..n_max {
        out.push(opnorm(&p));
        if out.len() < n_max {
            p = &p * &op.entries;
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct SpectralRadiusEstimate {
    pub estimate: f64,
    pub n_max: usize,
    /// (n, ‖A^n‖^{1/n}) at dyadic n — the stabilisation table.
    pub dyadic_table: Vec<(usize, f64)>,
    pub below_one: bool,
}

/// ‖A^{n_max}‖^{1/n_max} with the dyadic trail recorded; n_max ≥ 8.
pub fn spectral_radius_estimate(
    op: &TruncatedOperator,
    n_max: usize,
) -> Result<SpectralRadiusEstimate> {
    if n_max < 8 {
        return Err(Error::Precondition(format!(
            "spectral radius estimate needs n_max ≥ 8, got {n_max}"
        )));
    }
    op.horizon.check(n_max)?;
    let norms = power_norms(op, n_max)?;
    let root = |n: usize| -> f64 {
        let a = norms[n - 1];
        if a == 0.0 {
            0.0
        } else {
            a.powf(1.0 / n as f64)
        }
    };
    let mut dyadic_table = Vec::new();
    let mut k = 1usize;
    while k <= n_max {
        dyadic_table.push((k, root(k)));
        k *= 2;
    }
    let estimate = root(n_max);
    Ok(SpectralRadiusEstimate {
        estimate,
        n_max,
        dyadic_table,
        below_one: estimate < 1.0,
    })
}

/// p(A) = Σ_k α_k A^k. The result inherits horizon ⌊h/deg⌋ so that its own
/// powers never consume more than h base powers. When the coefficients
/// truncate an infinite rule, the discarded tail must provably converge:
/// the spectral-radius estimate must sit below 1 (see
/// [`polynomial_tail_bound`] for the quantitative remainder).
pub fn polynomial_of(
    op: &TruncatedOperator,
    coeffs: &CoefficientSequence,
) -> Result<TruncatedOperator> {
    if coeffs.is_empty() {
        return Err(Error::InvalidSpec("empty polynomial coefficients".into()));
    }
    let deg = coeffs.degree().unwrap_or(0);
    op.horizon.check(deg)?;
    let n = op.dim();

    if coeffs.from_infinite_rule {
        let sr = spectral_radius_estimate(op, op.horizon.cap(16))?;
        if !sr.below_one {
            return Err(Error::Divergence { rho: sr.estimate });
        }
    }

    // Float assembly, Horner-free: running power times coefficient.
    let mut acc = Mat::zeros(n, n);
    let mut pw = Mat::identity(n, n);
    for k in 0..=deg {
        let a = coeffs.get(k);
        if a.norm() != 0.0 {
            acc += &pw * a;
        }
        if k < deg {
            pw = &pw * &op.entries;
        }
    }

    let exact = match (op.exact.as_ref(), coeffs.exact_values()) {
        (Some(m), Some(al)) => {
            let mut eacc = ExactMat::zeros(n, n);
            let mut epw = ExactMat::identity(n);
            for (k, a) in al.iter().enumerate().take(deg + 1) {
                if !a.is_zero() {
                    for i in 0..n {
                        for j in 0..n {
                            let t = &epw[(i, j)] * a;
                            let cur = eacc[(i, j)].clone();
                            eacc[(i, j)] = cur + t;
                        }
                    }
                }
                if k < deg {
                    epw = epw.mul(m);
                }
            }
            Some(eacc)
        }
        _ => None,
    };

    let horizon = match op.horizon {
        Horizon::Unbounded => Horizon::Unbounded,
        Horizon::Finite(h) => {
            if deg == 0 {
                Horizon::Unbounded
            } else {
                Horizon::Finite(h / deg)
            }
        }
    };
    Ok(TruncatedOperator {
        entries: acc,
        exact,
        horizon,
        spec: OperatorSpec {
            kind: OperatorKind::Derived {
                label: format!("polynomial(deg={deg}) of {}", op.describe()),
            },
            n,
            horizon_override: None,
        },
    })
}

/// Remainder estimate for a truncated power series Σ_{k≥K} α_k A^k, using
/// the observed norm ratio q = ‖A^K‖ / ‖A^{K−1}‖ as a geometric dominator:
/// tail ≤ sup_k |α_k| · ‖A^K‖ / (1 − q). Errors when q ≥ 1.
pub fn polynomial_tail_bound(
    op: &TruncatedOperator,
    coeffs: &CoefficientSequence,
) -> Result<f64> {
    let k = coeffs.len();
    let norms = power_norms(op, op.horizon.cap(k))?;
    let (last, prev) = match norms.len() {
        0 => return Err(Error::Precondition("no powers available for tail bound".into())),
        1 => (norms[0], 1.0),
        n => (norms[n - 1], norms[n - 2]),
    };
    if prev == 0.0 || last == 0.0 {
        return Ok(0.0);
    }
    let q = last / prev;
    if q >= 1.0 {
        return Err(Error::SquareSummability(format!(
            "power norms are not decaying (ratio {q:.3}); tail bound unavailable"
        )));
    }
    Ok(coeffs.max_abs() * last / (1.0 - q))
}

/// Entrywise agreement between the float matrix and the projected exact one;
/// used by property tests and the `--exact` consistency path.
pub fn exact_float_agreement(op: &TruncatedOperator) -> Option<f64> {
    let m = op.exact.as_ref()?;
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let d = (crat_to_c64(&m[(i, j)]) - op.entries[(i, j)]).norm();
            worst = worst.max(d);
        }
    }
    Some(worst)
}

/// Convenience used across modules: an exact vector from a float one when
/// every entry is dyadic-representable (always true for f64).
pub fn vect_to_exact(v: &Vect) -> Vec<CRat> {
    v.iter()
        .map(|z| {
            crat(
                Rat::from_float(z.re).unwrap_or_else(Rat::zero),
                Rat::from_float(z.im).unwrap_or_else(Rat::zero),
            )
        })
        .collect()
}

/// Parses dense/diagonal entry lists given as exact literals.
pub fn parse_entries(items: &[String]) -> Result<Vec<CRat>> {
    items.iter().map(|s| parse_crat(s)).collect()
}

/// Parses a rational weight list.
pub fn parse_weight_list(items: &[String]) -> Result<Vec<Rat>> {
    items.iter().map(|s| parse_rat(s)).collect()
}

pub fn usize_from_toml(v: i64, what: &str) -> Result<usize> {
    v.to_usize()
        .ok_or_else(|| Error::Parse(format!("{what} must be nonnegative, got {v}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use approx::assert_relative_eq;

    fn shift_spec(n: usize) -> OperatorSpec {
        OperatorSpec {
            kind: OperatorKind::WeightedShift {
                weights: WeightRule::Reciprocal { offset: 1 },
            },
            n,
            horizon_override: None,
        }
    }

    #[test]
    fn weighted_shift_entries_and_horizon() {
        let op = build_truncation(&shift_spec(8)).unwrap();
        assert_eq!(op.horizon, Horizon::Finite(4));
        // A e_0 = e_1 (w_0 = 1), A e_1 = e_2/2.
        assert_eq!(op.entries[(1, 0)].re, 1.0);
        assert_eq!(op.entries[(2, 1)].re, 0.5);
        assert_eq!(op.entries[(0, 1)].re, 0.0);
        assert!(op.horizon.check(5).is_err());
    }

    #[test]
    fn shift_powers_on_basis_match_factorials() {
        // A e_0 has n-th power e_n/n! for w_n = 1/(n+1).
        let op = build_truncation(&shift_spec(16)).unwrap();
        let e0 = CoefficientSequence::basis(0, 1).as_vect(16).unwrap();
        let v = apply_power(&op, 4, &e0).unwrap();
        assert_relative_eq!(v[4].re, 1.0 / 24.0, max_relative = 1e-15);
        let ex = apply_power_exact(&op, 4, &CoefficientSequence::basis(0, 16).as_exact_vec(16).unwrap()).unwrap();
        assert_eq!(ex[4], crat(rat(1, 24), Rat::zero()));
    }

    #[test]
    fn jordan_and_diagonal_are_unbounded() {
        let j = build_truncation(&OperatorSpec {
            kind: OperatorKind::JordanBlock { eigenvalue: CRat::one() },
            n: 3,
            horizon_override: None,
        })
        .unwrap();
        assert_eq!(j.horizon, Horizon::Unbounded);
        assert_eq!(j.entries[(0, 1)].re, 1.0);
        // (J - I)^3 = 0 for a size-3 cell.
        let b = &j.entries - Mat::identity(3, 3);
        let b3 = &b * &b * &b;
        assert_eq!(opnorm(&b3), 0.0);
    }

    #[test]
    fn volterra_midpoint_matches_quadrature() {
        let op = build_truncation(&OperatorSpec {
            kind: OperatorKind::Volterra { scheme: VolterraScheme::Midpoint },
            n: 4,
            horizon_override: None,
        })
        .unwrap();
        assert_relative_eq!(op.entries[(0, 0)].re, 1.0 / 8.0);
        assert_relative_eq!(op.entries[(3, 1)].re, 1.0 / 4.0);
        assert_eq!(op.entries[(1, 3)].re, 0.0);
    }

    #[test]
    fn volterra_exact_basis_is_weight_one_shift() {
        let op = build_truncation(&OperatorSpec {
            kind: OperatorKind::Volterra { scheme: VolterraScheme::ExactBasis },
            n: 6,
            horizon_override: None,
        })
        .unwrap();
        assert_eq!(op.horizon, Horizon::Finite(6));
        assert_eq!(op.entries[(1, 0)].re, 1.0);
        assert_eq!(op.entries[(5, 4)].re, 1.0);
    }

    #[test]
    fn power_norms_of_example_shift_are_reciprocal_factorials() {
        // ‖A^n‖ = 1/n! exactly: the largest surviving weight chain starts
        // at column 0.
        let op = build_truncation(&shift_spec(24)).unwrap();
        let norms = power_norms(&op, 6).unwrap();
        assert_relative_eq!(norms[0], 1.0, max_relative = 1e-13);
        assert_relative_eq!(norms[2], 1.0 / 6.0, max_relative = 1e-13);
        assert_relative_eq!(norms[5], 1.0 / 720.0, max_relative = 1e-12);
    }

    #[test]
    fn spectral_radius_table_is_dyadic_and_decreasing_for_quasinilpotent() {
        let op = build_truncation(&shift_spec(64)).unwrap();
        let sr = spectral_radius_estimate(&op, 32).unwrap();
        assert!(sr.below_one);
        assert_eq!(
            sr.dyadic_table.iter().map(|t| t.0).collect::<Vec<_>>(),
            vec![1, 2, 4, 8, 16, 32]
        );
        // Frozen reference for N = 64, n = 32: (1/32!)^{1/32}.
        assert_relative_eq!(sr.estimate, 0.0781843145303306, max_relative = 1e-10);
        for w in sr.dyadic_table.windows(2) {
            assert!(w[1].1 < w[0].1);
        }
    }

    #[test]
    fn polynomial_of_jordan_matches_direct_sum() {
        // p(J) = I + 2J + J² on a 3-cell with λ = 0: entries from binomials.
        let j = build_truncation(&OperatorSpec {
            kind: OperatorKind::JordanBlock { eigenvalue: CRat::zero() },
            n: 3,
            horizon_override: None,
        })
        .unwrap();
        let p = polynomial_of(
            &j,
            &CoefficientSequence::from_exact(vec![
                CRat::one(),
                crat(rat(2, 1), Rat::zero()),
                CRat::one(),
            ]),
        )
        .unwrap();
        assert_eq!(p.entries[(0, 0)].re, 1.0);
        assert_eq!(p.entries[(0, 1)].re, 2.0);
        assert_eq!(p.entries[(0, 2)].re, 1.0);
        let ex = p.exact.unwrap();
        assert_eq!(ex[(0, 2)], CRat::one());
        assert_eq!(exact_float_agreement(&build_truncation(&shift_spec(8)).unwrap()), Some(0.0));
    }

    #[test]
    fn polynomial_divergence_guard_fires_above_radius_one() {
        // Geometric coefficients against an operator of norm 2 must refuse.
        let d = build_truncation(&OperatorSpec {
            kind: OperatorKind::Diagonal {
                entries: vec![crat(rat(2, 1), Rat::zero()); 4],
            },
            n: 4,
            horizon_override: None,
        })
        .unwrap();
        let g = CoefficientSequence::geometric(&crat(rat(1, 2), Rat::zero()), 6);
        let err = polynomial_of(&d, &g).unwrap_err();
        assert!(matches!(err, Error::Divergence { .. }));
    }

    #[test]
    fn horizon_override_restricts_and_relaxes() {
        let mut spec = shift_spec(16);
        spec.horizon_override = Some(3);
        assert_eq!(build_truncation(&spec).unwrap().horizon, Horizon::Finite(3));
        spec.horizon_override = Some(12);
        assert_eq!(build_truncation(&spec).unwrap().horizon, Horizon::Finite(12));
    }
}
