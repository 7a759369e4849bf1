//! Hankel symbol machinery.
//!
//! The pair (A, f, g) induces the symbol ψ(z) = Σ_n ⟨A^n f, g⟩ z^{−n}; its
//! analytic-coefficient part is the sequence c_n = ⟨A^n f, g⟩, and the
//! Hankel matrix H_N = [c_{i+j}] is the window through which rationality,
//! finite rank and recurrences become finite computations. Kronecker's
//! correspondence — finite rank ⟺ rational symbol ⟺ a finite linear
//! recurrence among the c_n — is what every routine here instantiates.
//!
//! Entries of a Hankel matrix are bit-copies of the source coefficients, a
//! property the Hilbert–Schmidt check exploits to achieve exact float
//! equality between its two bookkeeping orders.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exact::{dot, CRat, ExactMat};
use crate::linalg::{inner, min_singular_pair, C64, Mat};
use crate::operator::TruncatedOperator;
use crate::sequence::CoefficientSequence;

#[derive(Clone, Debug)]
pub struct HankelMatrix {
    /// N×N float window, entries[i][j] = c_{i+j}.
    pub entries: Mat,
    pub exact: Option<ExactMat>,
    pub order: usize,
    pub source_len: usize,
}

/// c_n = ⟨A^n f, g⟩ for n < len, by running powers (never matrix powers).
/// Exact inputs produce an exact sequence whose float view is its projection.
pub fn symbol_coefficients(
    a: &TruncatedOperator,
    f: &CoefficientSequence,
    g: &CoefficientSequence,
    len: usize,
) -> Result<CoefficientSequence> {
    if len == 0 {
        return Err(Error::Precondition("need at least one coefficient".into()));
    }
    a.horizon.check(len - 1)?;
    let n = a.dim();

    let exact_possible = a.exact.is_some()
        && f.exact_values().is_some()
        && g.exact_values().is_some();

    let mut seq = if exact_possible {
        let m = a.exact.as_ref().unwrap();
        let fe = f.as_exact_vec(n)?;
        let ge = g.as_exact_vec(n)?;
        let mut v = fe;
        let mut vals: Vec<CRat> = Vec::with_capacity(len);
        for k in 0..len {
            vals.push(dot(&v, &ge));
            if k + 1 < len {
                v = m.matvec(&v);
            }
        }
        CoefficientSequence::from_exact(vals)
    } else {
        let fv = f.as_vect(n)?;
        let gv = g.as_vect(n)?;
        let mut v = fv;
        let mut vals: Vec<C64> = Vec::with_capacity(len);
        for k in 0..len {
            vals.push(inner(&v, &gv));
            if k + 1 < len {
                v = &a.entries * v;
            }
        }
        CoefficientSequence::from_floats(vals)
    };
    seq.decay_hint = seq.estimate_decay();
    seq.from_infinite_rule = true;
    Ok(seq)
}

/// The N×N Hankel window; requires 2N−1 coefficients.
pub fn hankel_matrix(c: &CoefficientSequence, n: usize) -> Result<HankelMatrix> {
    if n == 0 {
        return Err(Error::Precondition("Hankel order must be positive".into()));
    }
    let need = 2 * n - 1;
    if c.len() < need {
        return Err(Error::InsufficientPrefix {
            need,
            have: c.len(),
        });
    }
    let entries = Mat::from_fn(n, n, |i, j| c.get(i + j));
    let exact = c
        .exact_values()
        .map(|xs| ExactMat::from_fn(n, n, |i, j| xs[i + j].clone()));
    Ok(HankelMatrix {
        entries,
        exact,
        order: n,
        source_len: c.len(),
    })
}

/// Two bookkeepings of ‖H_N‖²_HS:
///   (a) walking the matrix anti-diagonal by anti-diagonal, counting the
///       entries actually present and multiplying the count into |entry|²;
///   (b) the closed form Σ_n min(n+1, 2N−1−n)·|c_n|².
/// Entries are bit-copies of c_n, both sides multiply (count × |value|²)
/// with identical operands and sum in ascending n, so float equality of the
/// return values is equivalent to the structural facts: anti-diagonal n is
/// constant and has exactly min(n+1, 2N−1−n) cells.
pub fn hs_norm_check(c: &CoefficientSequence, n: usize) -> Result<(f64, f64)> {
    let h = hankel_matrix(c, n)?;
    let mut from_matrix = 0.0f64;
    let mut from_weights = 0.0f64;
    for d in 0..(2 * n - 1) {
        // matrix side: gather the d-th anti-diagonal
        let i_lo = d.saturating_sub(n - 1);
        let i_hi = d.min(n - 1);
        let mut count = 0usize;
        let first = h.entries[(i_lo, d - i_lo)];
        for i in i_lo..=i_hi {
            let e = h.entries[(i, d - i)];
            debug_assert!(
                e == first,
                "anti-diagonal {d} is not constant — Hankel construction broken"
            );
            count += 1;
        }
        from_matrix += (count as f64) * first.norm_sqr();
        // closed-form side, same ascending order
        let weight = (d + 1).min(2 * n - 1 - d) as f64;
        from_weights += weight * c.get(d).norm_sqr();
    }
    Ok((from_matrix, from_weights))
}

/// Searches for the minimal-degree monic recurrence Σ_j b_j c_{l+j} = 0
/// (all l with l + q < len), ascending in the degree q ≤ q_max. Float hits
/// are re-verified against the full prefix at 1e−10 relative and discarded
/// on failure; exact hits are exact. Returns the generator with b_q = 1.
pub fn kernel_generator(
    c: &CoefficientSequence,
    q_max: usize,
    tol: f64,
) -> Result<Option<CoefficientSequence>> {
    if c.len() < 3 {
        return Err(Error::InsufficientPrefix { need: 3, have: c.len() });
    }
    let q_cap = q_max.min((c.len() - 1) / 2);
    if c.is_zero() {
        return Ok(None);
    }

    if let Some(xs) = c.exact_values() {
        for q in 1..=q_cap {
            let rows = xs.len() - q;
            let slab = ExactMat::from_fn(rows, q + 1, |l, j| xs[l + j].clone());
            let null = slab.nullspace();
            if let Some(v) = null.first() {
                let mut b = v.clone();
                // trim trailing zeros, then normalise to a monic leader
                while b.len() > 1 && b.last().map(num_traits::Zero::is_zero).unwrap_or(false) {
                    b.pop();
                }
                let lead = b.last().cloned().unwrap();
                let b: Vec<CRat> = b.iter().map(|z| z / lead.clone()).collect();
                debug_assert!(verify_recurrence_exact(xs, &b));
                return Ok(Some(CoefficientSequence::from_exact(b)));
            }
        }
        return Ok(None);
    }

    let cs = c.floats();
    let cmax = c.max_abs();
    for q in 1..=q_cap {
        let rows = cs.len() - q;
        let slab = Mat::from_fn(rows, q + 1, |l, j| cs[l + j]);
        let (smin, smax, v) = min_singular_pair(&slab);
        if smax == 0.0 || smin / smax >= tol {
            continue;
        }
        // monic-normalise; reject vectors whose leader is numerically absent
        let lead = v[q];
        if lead.norm() < 1e-8 * v.norm() {
            continue;
        }
        let b: Vec<C64> = v.iter().map(|z| z / lead).collect();
        let b_norm = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let mut worst = 0.0f64;
        for l in 0..rows {
            let s: C64 = (0..=q).map(|j| b[j] * cs[l + j]).sum();
            worst = worst.max(s.norm());
        }
        if worst <= 1e-10 * b_norm * cmax {
            return Ok(Some(CoefficientSequence::from_floats(b)));
        }
    }
    Ok(None)
}

pub fn verify_recurrence_exact(c: &[CRat], b: &[CRat]) -> bool {
    let q = b.len() - 1;
    if c.len() <= q {
        return false;
    }
    for l in 0..(c.len() - q) {
        let mut s = CRat::zero();
        for (j, bj) in b.iter().enumerate() {
            s = s + bj * &c[l + j];
        }
        if !num_traits::Zero::is_zero(&s) {
            return false;
        }
    }
    true
}

/// Float re-verification used by `verify`: max_l |Σ_j b_j c_{l+j}| relative
/// to ‖b‖₂ · max|c|.
pub fn recurrence_residual(c: &CoefficientSequence, b: &CoefficientSequence) -> f64 {
    let q = match b.degree() {
        Some(q) => q,
        None => return f64::INFINITY,
    };
    if c.len() <= q {
        return f64::INFINITY;
    }
    let b_norm = b.norm_l2();
    let cmax = c.max_abs();
    if b_norm == 0.0 || cmax == 0.0 {
        return f64::INFINITY;
    }
    let mut worst = 0.0f64;
    for l in 0..(c.len() - q) {
        let s: C64 = (0..=q).map(|j| b.get(j) * c.get(l + j)).sum();
        worst = worst.max(s.norm());
    }
    worst / (b_norm * cmax)
}

/// Tests c_n = α·c_{n+1} for every n ≥ k (the complete-vector criterion for
/// (A−α)-invariant directions). Exact sequences use exact equality; float
/// ones compare at 1e−9 relative. An all-zero tail reports α = 0.
pub fn eventually_geometric_check(
    c: &CoefficientSequence,
    k: usize,
) -> Result<Option<(C64, String)>> {
    if c.len() < k + 4 {
        return Err(Error::InsufficientPrefix {
            need: k + 4,
            have: c.len(),
        });
    }
    if let Some(xs) = c.exact_values() {
        let mut alpha: Option<CRat> = None;
        for n in k..xs.len() - 1 {
            let (zn, zn1) = (&xs[n], &xs[n + 1]);
            if num_traits::Zero::is_zero(zn1) {
                if !num_traits::Zero::is_zero(zn) {
                    return Ok(None);
                }
                continue;
            }
            let cand = zn / zn1;
            match &alpha {
                Some(a) if *a != cand => return Ok(None),
                Some(_) => {}
                None => alpha = Some(cand),
            }
        }
        return Ok(match alpha {
            Some(a) => Some((
                crate::exact::crat_to_c64(&a),
                crate::exact::fmt_crat(&a),
            )),
            None => Some((C64::new(0.0, 0.0), "0".into())),
        });
    }

    let cs = c.floats();
    let floor = 1e-13 * c.max_abs();
    let mut alpha: Option<C64> = None;
    for n in k..cs.len() - 1 {
        let (zn, zn1) = (cs[n], cs[n + 1]);
        if zn1.norm() <= floor {
            if zn.norm() > floor {
                return Ok(None);
            }
            continue;
        }
        let cand = zn / zn1;
        match alpha {
            Some(a) => {
                let scale = a.norm().max(cand.norm()).max(1e-300);
                if (a - cand).norm() > 1e-9 * scale {
                    return Ok(None);
                }
            }
            None => alpha = Some(cand),
        }
    }
    Ok(match alpha {
        Some(a) => Some((a, format!("{},{}", crate::linalg::fmt_f64(a.re), crate::linalg::fmt_f64(a.im)))),
        None => Some((C64::new(0.0, 0.0), "0".into())),
    })
}

/// Evaluates |Σ_n c_n e^{−inθ}| on a uniform grid and returns the common
/// value when the modulus is constant to 1e−8 relative — the inner-function
/// signature on the circle. A non-decaying tail (decay hint ≥ 1) cannot be
/// summed pointwise, so it only warns.
pub fn constant_modulus_check(
    c: &CoefficientSequence,
    grid: usize,
) -> Result<(Option<f64>, Option<String>)> {
    if grid < 8 {
        return Err(Error::Precondition(format!("grid {grid} < 8")));
    }
    let hint = c.decay_hint.or_else(|| c.estimate_decay());
    let warning = match hint {
        Some(h) if h >= 1.0 => Some(format!(
            "tail decay estimate {h:.3} ≥ 1: boundary values are formal only"
        )),
        _ => None,
    };
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for j in 0..grid {
        let theta = 2.0 * std::f64::consts::PI * (j as f64) / (grid as f64);
        let mut s = C64::new(0.0, 0.0);
        for n in 0..c.len() {
            let ang = -(n as f64) * theta;
            s += c.get(n) * C64::new(ang.cos(), ang.sin());
        }
        let m = s.norm();
        lo = lo.min(m);
        hi = hi.max(m);
    }
    let value = if hi == 0.0 {
        Some(0.0)
    } else if (hi - lo) <= 1e-8 * hi {
        Some(0.5 * (hi + lo))
    } else {
        None
    };
    Ok((value, warning))
}

/// Exact H·b for witnesses that claim an exact kernel hit.
pub fn exact_hankel_apply(h: &HankelMatrix, b: &[CRat]) -> Result<Vec<CRat>> {
    let m = h
        .exact
        .as_ref()
        .ok_or_else(|| Error::ExactUnavailable("Hankel matrix is float-valued".into()))?;
    let mut padded = b.to_vec();
    if padded.len() > h.order {
        return Err(Error::DimensionMismatch {
            expected: h.order,
            got: padded.len(),
        });
    }
    padded.resize(h.order, CRat::zero());
    Ok(m.matvec(&padded))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{crat, rat, Rat};
    use crate::operator::{build_truncation, OperatorKind, OperatorSpec, WeightRule};
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
    fn shift_symbol_against_harmonic_vector_is_reciprocal_factorial() {
        // f = e_0, g = Σ_k e_k/(k+1): ⟨A^n e_0, g⟩ = (1/n!)·1/(n+1) = 1/(n+1)!.
        let a = example_shift(32);
        let f = CoefficientSequence::basis(0, 32);
        let g = CoefficientSequence::reciprocal(1, 32);
        let c = symbol_coefficients(&a, &f, &g, 8).unwrap();
        let xs = c.exact_values().expect("exact inputs give exact symbol");
        assert_eq!(xs[0], CRat::one());
        assert_eq!(xs[3], crat(rat(1, 24), Rat::zero()));
        assert_eq!(xs[5], crat(rat(1, 720), Rat::zero()));
    }

    #[test]
    fn shifted_basis_pair_gives_zero_symbol() {
        // f = e_1, g = e_0: A^n e_1 lives on e_{n+1}, never meeting e_0.
        let a = example_shift(32);
        let c = symbol_coefficients(
            &a,
            &CoefficientSequence::basis(1, 32),
            &CoefficientSequence::basis(0, 32),
            16,
        )
        .unwrap();
        assert!(c.is_zero());
    }

    #[test]
    fn hankel_window_is_constant_on_antidiagonals() {
        let c = CoefficientSequence::reciprocal_factorial(1, 9);
        let h = hankel_matrix(&c, 5).unwrap();
        assert_eq!(h.entries[(0, 3)], h.entries[(3, 0)]);
        assert_eq!(h.entries[(2, 2)], h.entries[(1, 3)]);
        assert_relative_eq!(h.entries[(0, 0)].re, 1.0);
    }

    #[test]
    fn hs_sides_agree_exactly_and_match_closed_form() {
        let c = CoefficientSequence::from_floats(vec![
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0),
        ]);
        let (m, w) = hs_norm_check(&c, 2).unwrap();
        assert_eq!(m, w);
        assert_eq!(m, 4.0); // weights 1, 2, 1 on |c| ≡ 1

        // factorial tail: Σ min(n+1, ...)·1/(n+1)!² stays below 2
        let cf = CoefficientSequence::reciprocal_factorial(1, 63);
        let (mf, wf) = hs_norm_check(&cf, 32).unwrap();
        assert_eq!(mf, wf);
        assert!(mf < 2.0, "partial HS mass {mf}");
        assert_relative_eq!(mf, 1.5906368546, max_relative = 1e-9);
    }

    #[test]
    fn kernel_generator_finds_exact_and_float_recurrences() {
        // c_n = 7, 1, 1/2, 1/4, …: eventually geometric with ratio 1/2,
        // so b = (−1/2, 1) acting from index 0 fails (c_0 breaks it) and the
        // minimal full-prefix relation is quadratic: (x−1/2)·(x−0) form.
        let mut xs = vec![crat(rat(7, 1), Rat::zero())];
        for k in 0..10 {
            xs.push(crat(Rat::new(1.into(), (1i64 << k).into()), Rat::zero()));
        }
        let c = CoefficientSequence::from_exact(xs);
        let b = kernel_generator(&c, 4, 1e-10).unwrap().unwrap();
        let be = b.exact_values().unwrap();
        assert_eq!(be.len(), 3);
        assert!(be[0].is_zero());
        assert_eq!(be[1], crat(rat(-1, 2), Rat::zero()));
        assert_eq!(be[2], CRat::one());

        let cf = CoefficientSequence::from_floats(
            (0..12).map(|n| C64::new(3.0f64.powi(-n), 0.0)).collect(),
        );
        let bf = kernel_generator(&cf, 4, 1e-10).unwrap().unwrap();
        assert_eq!(bf.len(), 2);
        assert_relative_eq!(bf.get(0).re, -1.0 / 3.0, max_relative = 1e-10);
        assert!(recurrence_residual(&cf, &bf) < 1e-12);
    }

    #[test]
    fn no_generator_for_factorial_decay() {
        let c = CoefficientSequence::reciprocal_factorial(1, 15);
        assert!(kernel_generator(&c, 6, 1e-10).unwrap().is_none());
    }

    #[test]
    fn eventually_geometric_detects_ratio_and_rejects_factorials() {
        let mut xs = vec![crat(rat(5, 1), Rat::zero())];
        for k in 0..8 {
            xs.push(crat(Rat::new(1.into(), (3i64.pow(k)).into()), Rat::zero()));
        }
        let c = CoefficientSequence::from_exact(xs);
        let (alpha, disp) = eventually_geometric_check(&c, 1).unwrap().unwrap();
        assert_relative_eq!(alpha.re, 3.0);
        assert_eq!(disp, "3");
        assert!(eventually_geometric_check(&c, 0).unwrap().is_none());
        let f = CoefficientSequence::reciprocal_factorial(0, 10);
        assert!(eventually_geometric_check(&f, 2).unwrap().is_none());
    }

    #[test]
    fn constant_modulus_flags_inner_type_symbols() {
        // c = (1): |1| ≡ 1. c = (1, 1/2): |1 + e^{−iθ}/2| is not constant.
        let one = CoefficientSequence::from_floats(vec![C64::new(1.0, 0.0)]);
        let (v, _) = constant_modulus_check(&one, 64).unwrap();
        assert_relative_eq!(v.unwrap(), 1.0);
        let two = CoefficientSequence::from_floats(vec![C64::new(1.0, 0.0), C64::new(0.5, 0.0)]);
        let (v2, _) = constant_modulus_check(&two, 64).unwrap();
        assert!(v2.is_none());
    }
}
