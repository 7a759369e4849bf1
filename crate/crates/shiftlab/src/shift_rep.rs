//! Representing matrices K_f for commutant-style shift relations.
//!
//! For an operator A, a vector f and a weight sequence β (β_0 = 1, positive,
//! with bounded ratios), the matrix K_f has columns A^n f / β_n. Whenever
//! {‖A^n‖/β_n} is square-summable, K_f is a bounded map out of the weighted
//! shift's space and satisfies A·K_f = K_f·S_β exactly — the central
//! intertwining identity. Everything downstream (Hankel symbols, cyclicity
//! cross-checks, range-defect certificates) consumes these panels, so the
//! builder measures its own truncation error: a geometric tail bound driven
//! by the observed decay of ‖A^n‖/β_n.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{
    cokernel_basis, inner, kernel_basis, min_singular_pair, opnorm, C64, Mat, Vect,
};
use crate::operator::{power_norms, TruncatedOperator};
use crate::sequence::CoefficientSequence;

/// The β-weights of the model shift S_β: β_0 = 1, β_n > 0, shift weights
/// w_n = β_{n+1}/β_n.
#[derive(Clone, Debug)]
pub struct WeightSequence {
    beta: Vec<f64>,
    label: String,
}

impl WeightSequence {
    pub fn from_values(beta: Vec<f64>, label: &str) -> Result<Self> {
        if beta.len() < 2 {
            return Err(Error::InvalidSpec("need at least β_0, β_1".into()));
        }
        if beta[0] != 1.0 {
            return Err(Error::InvalidSpec(format!("β_0 must be 1, got {}", beta[0])));
        }
        if beta.iter().any(|b| !b.is_finite() || *b <= 0.0) {
            return Err(Error::InvalidSpec("β must be positive and finite".into()));
        }
        Ok(WeightSequence {
            beta,
            label: label.to_string(),
        })
    }

    pub fn ones(len: usize) -> Self {
        WeightSequence {
            beta: vec![1.0; len.max(2)],
            label: "ones".into(),
        }
    }

    /// β_n = (n+1)^p — the polynomial regularisation used by the growth
    /// lemma's K̃ construction.
    pub fn polynomial(p: u32, len: usize) -> Self {
        WeightSequence {
            beta: (0..len.max(2)).map(|n| ((n + 1) as f64).powi(p as i32)).collect(),
            label: format!("(n+1)^{p}"),
        }
    }

    pub fn len(&self) -> usize {
        self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn beta(&self, n: usize) -> Result<f64> {
        self.beta.get(n).copied().ok_or(Error::InsufficientPrefix {
            need: n + 1,
            have: self.beta.len(),
        })
    }

    pub fn weight(&self, n: usize) -> Result<f64> {
        Ok(self.beta(n + 1)? / self.beta(n)?)
    }

    pub fn sup_weight(&self) -> f64 {
        self.beta
            .windows(2)
            .map(|w| w[1] / w[0])
            .fold(0.0, f64::max)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_ones(&self) -> bool {
        self.beta.iter().all(|b| *b == 1.0)
    }
}

/// The assembled panel together with its truncation certificate.
#[derive(Clone, Debug)]
pub struct ShiftRepMatrix {
    /// N×M, column n = A^n f / β_n.
    pub columns: Mat,
    /// Bound on the ℓ² mass of the discarded columns n ≥ M.
    pub tail_bound: f64,
    pub f: Vect,
    pub beta: WeightSequence,
    pub provenance: String,
}

impl ShiftRepMatrix {
    pub fn ambient_dim(&self) -> usize {
        self.columns.nrows()
    }

    pub fn column_count(&self) -> usize {
        self.columns.ncols()
    }
}

/// Certified facts about a distinguished subspace, self-contained enough for
/// independent re-verification: every vector is stored by value, residuals
/// and the tolerance are absolute numbers, and the claim says which identity
/// the residuals instantiate.
#[derive(Clone, Debug)]
pub struct SubspaceWitness {
    pub kind: WitnessKind,
    pub claim: String,
    /// Name of the scenario operator the residuals are computed against.
    pub operator: String,
    pub vectors: BTreeMap<String, CoefficientSequence>,
    pub residuals: Vec<f64>,
    pub tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessKind {
    /// Vectors annihilated by the panel: K h = 0.
    KernelVector,
    /// Cokernel directions: u with K*u = 0, so ran K misses them.
    RangeDefect,
    /// ⟨A^n f, g⟩ = 0 for all recorded n.
    Orthogonality,
    /// An (approximate) eigenpair produced by a dependence relation.
    Eigenvector,
}

impl WitnessKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            WitnessKind::KernelVector => "kernel_vector",
            WitnessKind::RangeDefect => "range_defect",
            WitnessKind::Orthogonality => "orthogonality",
            WitnessKind::Eigenvector => "eigenvector",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "kernel_vector" => Ok(WitnessKind::KernelVector),
            "range_defect" => Ok(WitnessKind::RangeDefect),
            "orthogonality" => Ok(WitnessKind::Orthogonality),
            "eigenvector" => Ok(WitnessKind::Eigenvector),
            other => Err(Error::Parse(format!("unknown witness kind `{other}`"))),
        }
    }
}

impl SubspaceWitness {
    pub fn holds(&self) -> bool {
        self.residuals.iter().all(|r| *r <= self.tol)
    }
}

/// Builds K_f with M columns. Preconditions: f ≠ 0, 2 ≤ M ≤ horizon(A),
/// and β must cover indices 0..=M. The square-summability hypothesis is
/// checked empirically: the tail ratios of t_n = ‖A^n‖/β_n over the last
/// window must stay below 1, and then
/// Σ_{n≥M} ‖A^n f/β_n‖² ≤ ‖f‖²·t_M²/(1−ρ̂²) certifies the cut.
pub fn build_k(
    a: &TruncatedOperator,
    f: &Vect,
    beta: &WeightSequence,
    m: usize,
) -> Result<ShiftRepMatrix> {
    if m < 2 {
        return Err(Error::Precondition(format!("need at least 2 columns, got {m}")));
    }
    a.horizon.check(m)?;
    if f.len() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: f.len(),
        });
    }
    let f_norm = f.norm();
    if f_norm == 0.0 {
        return Err(Error::Precondition("f must be nonzero".into()));
    }
    beta.beta(m)?;

    // Running powers: col_n = v_n / β_n where v_{n+1} = A v_n.
    let n_dim = a.dim();
    let mut columns = Mat::zeros(n_dim, m);
    let mut v = f.clone();
    for col in 0..m {
        let b = beta.beta(col)?;
        let scaled = if b == 1.0 { v.clone() } else { &v / C64::new(b, 0.0) };
        columns.set_column(col, &scaled);
        if col + 1 < m {
            v = &a.entries * v;
        }
    }

    // Tail certificate from operator norms (vector-independent dominator).
    let norms = power_norms(a, m)?;
    let t = |n: usize| -> Result<f64> {
        let nm = if n == 0 { 1.0 } else { norms[n - 1] };
        Ok(nm / beta.beta(n)?)
    };
    let t_m = t(m)?;
    let tail_bound = if t_m == 0.0 {
        0.0
    } else {
        let window = 4.min(m);
        let mut rho: f64 = 0.0;
        for n in (m - window)..m {
            let a_n = t(n)?;
            let a_n1 = t(n + 1)?;
            if a_n == 0.0 {
                continue;
            }
            rho = rho.max(a_n1 / a_n);
        }
        if rho >= 1.0 {
            return Err(Error::SquareSummability(format!(
                "‖A^n‖/β_n is not decaying near n = {m} (observed ratio {rho:.6})"
            )));
        }
        f_norm * t_m / (1.0 - rho * rho).sqrt()
    };

    Ok(ShiftRepMatrix {
        columns,
        tail_bound,
        f: f.clone(),
        beta: beta.clone(),
        provenance: format!("K[{} ; β = {}]", a.describe(), beta.label()),
    })
}

/// max_n ‖A·col_n − w_n·col_{n+1}‖ over n = 0..M−2. The last column is
/// excluded: its successor fell to the truncation. For β ≡ 1 the recomputed
/// product reuses the builder's expression verbatim, so the residual is
/// exactly zero.
pub fn intertwining_residual(k: &ShiftRepMatrix, a: &TruncatedOperator) -> Result<f64> {
    if a.dim() != k.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: k.ambient_dim(),
            got: a.dim(),
        });
    }
    let m = k.column_count();
    let mut worst: f64 = 0.0;
    for n in 0..m.saturating_sub(1) {
        let lhs = &a.entries * k.columns.column(n);
        let w = C64::new(k.beta.weight(n)?, 0.0);
        let rhs = k.columns.column(n + 1) * w;
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

/// Basis of {h : K h = 0} at relative tolerance `tol`.
pub fn kernel_vectors(k: &ShiftRepMatrix, tol: f64) -> Vec<Vect> {
    kernel_basis(&k.columns, tol)
}

/// Dimension of (ran K)^⊥ in the ambient space, with a self-verifying
/// witness: each cokernel direction u carries its residual ‖K*u‖.
pub fn range_defect(
    k: &ShiftRepMatrix,
    operator_name: &str,
    tol: f64,
) -> (usize, Option<SubspaceWitness>) {
    let basis = cokernel_basis(&k.columns, tol);
    if basis.is_empty() {
        return (0, None);
    }
    let sigma_max = opnorm(&k.columns);
    let mut vectors = BTreeMap::new();
    let mut residuals = Vec::new();
    for (i, u) in basis.iter().enumerate() {
        residuals.push((k.columns.adjoint() * u).norm());
        vectors.insert(
            format!("u{i}"),
            CoefficientSequence::from_floats(u.iter().copied().collect()),
        );
    }
    let witness = SubspaceWitness {
        kind: WitnessKind::RangeDefect,
        claim: format!(
            "{} directions u with K*u = 0: the closed range of {} omits them",
            basis.len(),
            k.provenance
        ),
        operator: operator_name.to_string(),
        vectors,
        residuals,
        tol: tol * sigma_max.max(1e-300),
    };
    (basis.len(), Some(witness))
}

/// Searches for an ℓ²-dependence Σ_{n≤n_max} c_n A^n f ≈ 0 among the raw
/// (unscaled) Krylov columns. Detection criterion: σ_min/σ_max < tol on the
/// raw panel. The relation is returned deterministically normalised (its
/// largest entry rotated to the positive real axis) together with the
/// absolute residual ‖Σ c_n A^n f‖.
pub fn dependence_detect(
    a: &TruncatedOperator,
    f: &Vect,
    n_max: usize,
    tol: f64,
) -> Result<Option<(CoefficientSequence, f64)>> {
    a.horizon.check(n_max)?;
    let cols = n_max + 1;
    let mut panel = Mat::zeros(a.dim(), cols);
    let mut v = f.clone();
    for j in 0..cols {
        panel.set_column(j, &v);
        if j + 1 < cols {
            v = &a.entries * v;
        }
    }
    let (smin, smax, c) = min_singular_pair(&panel);
    if smax == 0.0 || smin / smax >= tol {
        return Ok(None);
    }
    // Deterministic gauge: rotate the largest coordinate to ℝ₊.
    let (mut best_i, mut best_a) = (0usize, 0.0f64);
    for (i, z) in c.iter().enumerate() {
        if z.norm() > best_a {
            best_a = z.norm();
            best_i = i;
        }
    }
    let phase = c[best_i] / C64::new(best_a, 0.0);
    let c = c.map(|z| z / phase);
    let residual = (&panel * &c).norm();
    Ok(Some((
        CoefficientSequence::from_floats(c.iter().copied().collect()),
        residual,
    )))
}

/// K_f · φ(S_β) = K_{φ(A)f}: multiplying the panel on the right by the
/// analytic Toeplitz-type matrix of φ(S_β) costs deg(φ) columns and keeps
/// the representing structure. Preconditions: deg φ < M.
pub fn compose_with_inner(
    k: &ShiftRepMatrix,
    phi: &CoefficientSequence,
) -> Result<ShiftRepMatrix> {
    let deg = phi
        .degree()
        .ok_or_else(|| Error::Precondition("φ must be a nonzero polynomial".into()))?;
    let m = k.column_count();
    if deg >= m {
        return Err(Error::DegreeOverflow { degree: deg, columns: m });
    }
    let m_out = m - deg;
    // T[j+i, j] = φ_i β_{j+i} / β_j maps e_j ↦ φ(S_β) e_j in coordinates.
    let mut t = Mat::zeros(m, m_out);
    for j in 0..m_out {
        for i in 0..=deg {
            let w = k.beta.beta(j + i)? / k.beta.beta(j)?;
            t[(j + i, j)] = phi.get(i) * C64::new(w, 0.0);
        }
    }
    let columns = &k.columns * &t;
    let f_new = columns.column(0).into_owned();
    // ‖φ(S_β)‖ ≤ Σ_i |φ_i| ‖S_β‖^i with ‖S_β‖ = sup w.
    let sup_w = k.beta.sup_weight();
    let phi_norm_bound: f64 = (0..=deg).map(|i| phi.get(i).norm() * sup_w.powi(i as i32)).sum();
    Ok(ShiftRepMatrix {
        columns,
        tail_bound: k.tail_bound * phi_norm_bound,
        f: f_new,
        beta: k.beta.clone(),
        provenance: format!("{} ∘ φ(S_β), deg φ = {deg}", k.provenance),
    })
}

/// ⟨A^n f, g⟩ residual list for an orthogonality witness; the caller owns
/// the claim text.
pub fn orthogonality_residuals(
    a: &TruncatedOperator,
    f: &Vect,
    g: &Vect,
    count: usize,
) -> Result<Vec<f64>> {
    a.horizon.check(count.saturating_sub(1))?;
    let mut v = f.clone();
    let mut out = Vec::with_capacity(count);
    for n in 0..count {
        out.push(inner(&v, g).norm());
        if n + 1 < count {
            v = &a.entries * v;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{build_truncation, OperatorKind, OperatorSpec, WeightRule};
    use crate::sequence::CoefficientSequence;
    use approx::assert_relative_eq;
    use num_traits::{One, Zero};

    fn example_shift(n: usize) -> TruncatedOperator {
        build_truncation(&OperatorSpec {
            kind: OperatorKind::WeightedShift {
                weights: WeightRule::Reciprocal { offset: 1 },
            },
            n,
            horizon_override: None,
        })
        .unwrap()
    }

    #[test]
    fn intertwining_is_bitwise_zero_for_unit_beta() {
        let a = example_shift(32);
        let f = CoefficientSequence::basis(0, 1).as_vect(32).unwrap();
        let k = build_k(&a, &f, &WeightSequence::ones(17), 16).unwrap();
        assert_eq!(intertwining_residual(&k, &a).unwrap(), 0.0);
        assert!(k.tail_bound < 1e-12, "tail {}", k.tail_bound);
    }

    #[test]
    fn columns_are_scaled_powers() {
        let a = example_shift(16);
        let f = CoefficientSequence::basis(0, 1).as_vect(16).unwrap();
        let beta = WeightSequence::polynomial(2, 10);
        let k = build_k(&a, &f, &beta, 8).unwrap();
        // col_3 = A³e_0/β_3 = e_3/(3!·16).
        assert_relative_eq!(k.columns[(3, 3)].re, 1.0 / (6.0 * 16.0), max_relative = 1e-14);
    }

    #[test]
    fn rank_one_panel_has_full_defect_and_kernel() {
        // A = diag(1/2, 0, 0): A^n f collapses onto e_0 for n ≥ 1, and
        // ‖A^n‖ = 2^{−n} keeps the summability hypothesis honest.
        let a = build_truncation(&OperatorSpec {
            kind: OperatorKind::Diagonal {
                entries: vec![
                    crate::exact::crat(crate::exact::rat(1, 2), crate::exact::Rat::zero()),
                    crate::exact::CRat::zero(),
                    crate::exact::CRat::zero(),
                ],
            },
            n: 3,
            horizon_override: None,
        })
        .unwrap();
        let f = CoefficientSequence::ones(3).as_vect(3).unwrap();
        let k = build_k(&a, &f, &WeightSequence::ones(9), 8).unwrap();
        let (defect, witness) = range_defect(&k, "main", 1e-10);
        assert_eq!(defect, 1); // span{f, e_0} has codimension 1 in ℂ³
        assert!(witness.unwrap().holds());
        assert_eq!(kernel_vectors(&k, 1e-10).len(), 6); // rank 2 of 8 columns
    }

    #[test]
    fn dependence_found_for_eigenvector_mixtures() {
        // Diagonal(1, 1/2): any f has {f, Af, A²f} linearly dependent.
        let a = build_truncation(&OperatorSpec {
            kind: OperatorKind::Diagonal {
                entries: vec![
                    crate::exact::CRat::one(),
                    crate::exact::crat(crate::exact::rat(1, 2), crate::exact::Rat::zero()),
                ],
            },
            n: 2,
            horizon_override: None,
        })
        .unwrap();
        let f = CoefficientSequence::ones(2).as_vect(2).unwrap();
        let (c, res) = dependence_detect(&a, &f, 2, 1e-8).unwrap().unwrap();
        assert!(res < 1e-12, "residual {res}");
        // Relation ∝ (1/2, −3/2, 1): minimal polynomial (x−1)(x−1/2).
        let c0 = c.get(0) / c.get(2);
        let c1 = c.get(1) / c.get(2);
        assert_relative_eq!(c0.re, 0.5, max_relative = 1e-8);
        assert_relative_eq!(c1.re, -1.5, max_relative = 1e-8);
        // No dependence for a genuinely cyclic pair.
        let b = example_shift(16);
        let e0 = CoefficientSequence::basis(0, 1).as_vect(16).unwrap();
        assert!(dependence_detect(&b, &e0, 4, 1e-10).unwrap().is_none());
    }

    #[test]
    fn compose_with_inner_matches_direct_build() {
        let a = example_shift(32);
        let f = CoefficientSequence::basis(0, 1).as_vect(32).unwrap();
        let beta = WeightSequence::ones(17);
        let k = build_k(&a, &f, &beta, 16).unwrap();
        // φ(z) = 1 + z²/2
        let phi = CoefficientSequence::from_floats(vec![
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.5, 0.0),
        ]);
        let composed = compose_with_inner(&k, &phi).unwrap();
        assert_eq!(composed.column_count(), 14);
        // f_new = φ(A) f = e_0 + A²e_0/2 = e_0 + e_2/4.
        assert_relative_eq!(composed.f[0].re, 1.0, max_relative = 1e-15);
        assert_relative_eq!(composed.f[2].re, 0.25, max_relative = 1e-15);
        let direct = build_k(&a, &composed.f, &beta, 14).unwrap();
        let diff = &composed.columns - &direct.columns;
        assert!(opnorm(&diff) < 1e-14);
    }

    #[test]
    fn square_summability_guard_rejects_growing_powers() {
        // Diagonal(2): ‖A^n‖ = 2^n with β ≡ 1 is not square-summable.
        let a = build_truncation(&OperatorSpec {
            kind: OperatorKind::Diagonal {
                entries: vec![crate::exact::crat(crate::exact::rat(2, 1), crate::exact::Rat::zero()); 2],
            },
            n: 2,
            horizon_override: None,
        })
        .unwrap();
        let f = CoefficientSequence::basis(0, 1).as_vect(2).unwrap();
        let err = build_k(&a, &f, &WeightSequence::ones(9), 8).unwrap_err();
        assert!(matches!(err, Error::SquareSummability(_)));
    }
}
