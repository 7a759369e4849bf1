//! Float linear-algebra helpers: operator norms, rank-revealing SVD cuts,
//! numerical kernels/cokernels, and the deterministic Householder rotation
//! used by the Case-2 witness reduction.
//!
//! Conventions: operator norm = largest singular value of the dense matrix
//! (no iterative shortcuts at desk scale); numerical rank counts σ_k above
//! `tol · σ_max`; ⟨x, y⟩ is conjugate-linear in y.

use nalgebra::{Complex, DMatrix, DVector};

pub type C64 = Complex<f64>;
pub type Mat = DMatrix<C64>;
pub type Vect = DVector<C64>;

pub fn inner(x: &Vect, y: &Vect) -> C64 {
    // nalgebra's dotc conjugates the left argument; we want conj on y.
    y.dotc(x)
}

pub fn opnorm(m: &Mat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn singular_values(m: &Mat) -> Vec<f64> {
    let sv = m.clone().singular_values();
    let mut v: Vec<f64> = sv.iter().copied().collect();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    v
}

pub fn numerical_rank(m: &Mat, tol_rel: f64) -> usize {
    let sv = singular_values(m);
    match sv.first() {
        Some(&smax) if smax > 0.0 => sv.iter().filter(|&&s| s > tol_rel * smax).count(),
        _ => 0,
    }
}

/// σ-profile alongside the rank so verdicts can ship their evidence.
pub fn rank_with_profile(m: &Mat, tol_rel: f64) -> (usize, Vec<f64>) {
    let sv = singular_values(m);
    let rank = match sv.first() {
        Some(&smax) if smax > 0.0 => sv.iter().filter(|&&s| s > tol_rel * smax).count(),
        _ => 0,
    };
    (rank, sv)
}

/// Pads wide matrices square with zero rows so the SVD exposes every right
/// singular vector, then returns an orthonormal basis of the numerical
/// kernel (σ ≤ tol·σ_max, σ_max taken from the unpadded matrix).
pub fn kernel_basis(m: &Mat, tol_rel: f64) -> Vec<Vect> {
    let (r, c) = m.shape();
    let padded = if r < c {
        let mut p = Mat::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("svd requested v_t");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let mut out = Vec::new();
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if smax == 0.0 || s <= tol_rel * smax {
            out.push(v_t.row(k).conjugate().transpose());
        }
    }
    out
}

/// Orthonormal basis of the orthogonal complement of the column space
/// (left singular vectors with σ ≤ tol·σ_max, plus directions a tall matrix
/// never reaches). Implemented as the kernel of the adjoint.
pub fn cokernel_basis(m: &Mat, tol_rel: f64) -> Vec<Vect> {
    kernel_basis(&m.adjoint(), tol_rel)
}

/// (σ_min, σ_max, v) with v the right singular vector of σ_min. Wide
/// matrices are zero-padded square first, so the reported σ_min is the
/// smallest over the full domain (zero when columns outnumber rows).
pub fn min_singular_pair(m: &Mat) -> (f64, f64, Vect) {
    let (r, c) = m.shape();
    let padded = if r < c {
        let mut p = Mat::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("svd requested v_t");
    let (mut lo_k, mut lo) = (0usize, f64::INFINITY);
    let mut hi: f64 = 0.0;
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s < lo {
            lo = s;
            lo_k = k;
        }
        hi = hi.max(s);
    }
    (lo, hi, v_t.row(lo_k).conjugate().transpose())
}

pub fn condition_number(m: &Mat) -> f64 {
    let sv = singular_values(m);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Deterministic unitary with U e_0 = g/‖g‖ (Householder reflection times a
/// phase correction on the first column). Any unitary would do for the
/// Case-2 reduction; this one is reproducible.
pub fn unitary_e0_to(g: &Vect) -> Mat {
    let n = g.len();
    let norm = g.norm();
    assert!(norm > 0.0, "cannot rotate the zero vector");
    let ghat = g / C64::new(norm, 0.0);
    let g0 = ghat[0];
    // reflection phase chosen to avoid cancellation in u = ĝ - μ e_0
    let mu = if g0.norm() > 0.0 {
        -g0 / C64::new(g0.norm(), 0.0)
    } else {
        C64::new(-1.0, 0.0)
    };
    let mut u = ghat.clone();
    u[0] -= mu;
    let uu = u.norm_squared();
    let mut h = Mat::identity(n, n);
    if uu > 0.0 {
        let scale = C64::new(2.0 / uu, 0.0);
        for i in 0..n {
            for j in 0..n {
                h[(i, j)] -= scale * u[i] * u[j].conj();
            }
        }
    }
    // U = H · diag(μ, 1, …, 1), so U e_0 = μ · H e_0 = μ μ̄ ĝ = ĝ
    for i in 0..n {
        h[(i, 0)] *= mu;
    }
    h
}

/// 17-significant-digit decimal form; the report serializer uses this for
/// every float so emission is reproducible byte-for-byte.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn fmt_c64(z: C64) -> String {
    format!("{},{}", fmt_f64(z.re), fmt_f64(z.im))
}
