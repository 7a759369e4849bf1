//! Two-sided power growth ‖A^n + λA^{−n}‖ and its consequences.
//!
//! For invertible A, polynomial growth of the balanced powers — a bound
//! M·|n|^r for some λ outside the unit circle's worst case — propagates to
//! structure: ‖A^n(I − A²)‖ ≤ M'|n|^{r+2} for all integers n, and when the
//! spectrum pins to {1}, nilpotency of A − I at order ≤ r + 4. The routines
//! here measure the growth, fit the exponent on dyadic samples, test the
//! difference bound with an explicit constant, and hunt for the nilpotency
//! order directly.
//!
//! Inverse powers always go through one LU factorisation and repeated
//! solves, never an explicit inverse, and every entry point refuses
//! condition numbers beyond the cap — growth exponents read off a nearly
//! singular matrix are noise.

use nalgebra::LU;

use crate::error::{Error, Result};
use crate::linalg::{condition_number, opnorm, C64, Mat, Vect};
use crate::operator::{TruncatedOperator, DEFAULT_CONDITION_CAP};

#[derive(Clone, Copy, Debug)]
pub struct ConditionFlags {
    pub condition: f64,
    pub cap: f64,
}

#[derive(Clone, Debug)]
pub struct GrowthReport {
    pub lambda: C64,
    /// (n, ‖A^n + λA^{−n}‖), ascending in n ≥ 1.
    pub norms: Vec<(usize, f64)>,
    pub condition: ConditionFlags,
}

#[derive(Clone, Copy, Debug)]
pub struct FitResult {
    pub r: f64,
    /// Two standard errors of the fitted slope; 0 for the exact-constant case.
    pub ci_halfwidth: f64,
    /// (smallest n, largest n) actually used by the fit.
    pub window: (usize, usize),
    pub samples: usize,
}

fn checked_lu(a: &TruncatedOperator) -> Result<(LU<C64, nalgebra::Dyn, nalgebra::Dyn>, ConditionFlags)> {
    let condition = condition_number(&a.entries);
    let flags = ConditionFlags {
        condition,
        cap: DEFAULT_CONDITION_CAP,
    };
    if !condition.is_finite() || condition > DEFAULT_CONDITION_CAP {
        return Err(Error::IllConditioned {
            cond: condition,
            cap: DEFAULT_CONDITION_CAP,
        });
    }
    Ok((a.entries.clone().lu(), flags))
}

fn prepare_ns(ns: &[usize]) -> Result<Vec<usize>> {
    let mut sorted: Vec<usize> = ns.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.first() == Some(&0) || sorted.is_empty() {
        return Err(Error::Precondition("power list must contain only n ≥ 1".into()));
    }
    Ok(sorted)
}

/// Walks n = 1..=max once, handing (n, A^n, A^{−n}) to the consumer at each
/// requested n. A^{−n} advances by an LU solve per step.
fn sweep_pairs(
    a: &TruncatedOperator,
    ns: &[usize],
    mut consume: impl FnMut(usize, &Mat, &Mat),
) -> Result<ConditionFlags> {
    let sorted = prepare_ns(ns)?;
    let top = *sorted.last().unwrap();
    a.horizon.check(top)?;
    let (lu, flags) = checked_lu(a)?;
    let dim = a.dim();
    let mut pos = Mat::identity(dim, dim);
    let mut neg = Mat::identity(dim, dim);
    let mut want = sorted.iter().peekable();
    for n in 1..=top {
        pos = &pos * &a.entries;
        neg = lu.solve(&neg).ok_or(Error::IllConditioned {
            cond: f64::INFINITY,
            cap: DEFAULT_CONDITION_CAP,
        })?;
        if want.peek() == Some(&&n) {
            consume(n, &pos, &neg);
            want.next();
        }
    }
    Ok(flags)
}

/// ‖A^n + λA^{−n}‖ at the requested n.
pub fn asymmetric_growth(
    a: &TruncatedOperator,
    lambda: C64,
    ns: &[usize],
) -> Result<GrowthReport> {
    let mut norms = Vec::with_capacity(ns.len());
    let condition = sweep_pairs(a, ns, |n, pos, neg| {
        norms.push((n, opnorm(&(pos + neg * lambda))));
    })?;
    Ok(GrowthReport {
        lambda,
        norms,
        condition,
    })
}

/// The mirrored family ‖A^{−n} + μA^n‖ — the λ-scaling identity partner:
/// with μ = 1/λ this equals |λ|^{−1}·‖A^n + λA^{−n}‖.
pub fn reversed_growth(
    a: &TruncatedOperator,
    mu: C64,
    ns: &[usize],
) -> Result<GrowthReport> {
    let mut norms = Vec::with_capacity(ns.len());
    let condition = sweep_pairs(a, ns, |n, pos, neg| {
        norms.push((n, opnorm(&(neg + pos * mu))));
    })?;
    Ok(GrowthReport {
        lambda: mu,
        norms,
        condition,
    })
}

/// Least-squares exponent through log-log dyadic samples. Requires at least
/// eight dyadic n in the report; fits only the final half (the asymptotic
/// regime). A spread below 1e−12 relative short-circuits to r = 0 exactly.
pub fn growth_exponent_fit(report: &GrowthReport) -> Result<FitResult> {
    let dyadic: Vec<(usize, f64)> = report
        .norms
        .iter()
        .filter(|(n, _)| n.is_power_of_two())
        .copied()
        .collect();
    if dyadic.len() < 8 {
        return Err(Error::Precondition(format!(
            "exponent fit needs ≥ 8 dyadic samples, got {}",
            dyadic.len()
        )));
    }
    let tail = &dyadic[dyadic.len() / 2..];
    let window = (tail.first().unwrap().0, tail.last().unwrap().0);
    let hi = tail.iter().map(|(_, v)| *v).fold(0.0f64, f64::max);
    let lo = tail.iter().map(|(_, v)| *v).fold(f64::INFINITY, f64::min);
    if hi <= 0.0 {
        return Err(Error::Precondition("vanishing norms cannot be fitted".into()));
    }
    if hi - lo <= 1e-12 * hi {
        return Ok(FitResult {
            r: 0.0,
            ci_halfwidth: 0.0,
            window,
            samples: tail.len(),
        });
    }
    let xs: Vec<f64> = tail.iter().map(|(n, _)| (*n as f64).ln()).collect();
    let ys: Vec<f64> = tail.iter().map(|(_, v)| v.ln()).collect();
    let m = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / m;
    let ybar = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (intercept + slope * x)).powi(2))
        .sum();
    let dof = (tail.len() as f64 - 2.0).max(1.0);
    let se = (rss / dof / sxx).sqrt();
    Ok(FitResult {
        r: slope,
        ci_halfwidth: 2.0 * se,
        window,
        samples: tail.len(),
    })
}

#[derive(Clone, Debug)]
pub struct DifferenceBound {
    /// Explicit constant: max over tested n of ‖A^n(I−A²)‖ / |n|^{r+2}.
    pub constant: f64,
    /// Where the maximum sits; the bound is trusted when that is interior.
    pub arg_max: i64,
    pub pass: bool,
    /// (n, ‖A^n(I−A²)‖, ratio).
    pub table: Vec<(i64, f64, f64)>,
}

/// Tests ‖A^n(I − A²)‖ ≤ M·|n|^{r+2} over a signed range of n, reporting
/// the smallest admissible M. The check passes when the ratio's maximiser
/// is interior to the tested range (the sup is then witnessed, not merely
/// truncated) or when the difference vanishes identically.
pub fn difference_bound_check(
    a: &TruncatedOperator,
    r: usize,
    ns: &[i64],
) -> Result<DifferenceBound> {
    if ns.iter().any(|n| *n == 0) {
        return Err(Error::Precondition("difference bound tests n ≠ 0 only".into()));
    }
    let mut mags: Vec<usize> = ns.iter().map(|n| n.unsigned_abs() as usize).collect();
    mags.sort_unstable();
    mags.dedup();
    let dim = a.dim();
    let b = Mat::identity(dim, dim) - &a.entries * &a.entries;
    let mut by_mag: std::collections::BTreeMap<usize, (Option<f64>, Option<f64>)> =
        std::collections::BTreeMap::new();
    // forward powers: A^m B
    {
        let mut cur = b.clone();
        let mut power = 0usize;
        for &m in &mags {
            while power < m {
                cur = &a.entries * cur;
                power += 1;
            }
            by_mag.entry(m).or_insert((None, None)).0 = Some(opnorm(&cur));
        }
    }
    // backward powers: A^{−m} B via LU solves
    {
        let (lu, _) = checked_lu(a)?;
        let mut cur = b.clone();
        let mut power = 0usize;
        for &m in &mags {
            while power < m {
                cur = lu.solve(&cur).ok_or(Error::IllConditioned {
                    cond: f64::INFINITY,
                    cap: DEFAULT_CONDITION_CAP,
                })?;
                power += 1;
            }
            by_mag.entry(m).or_insert((None, None)).1 = Some(opnorm(&cur));
        }
    }
    let exponent = (r + 2) as f64;
    let mut table = Vec::new();
    let mut constant = 0.0f64;
    let mut arg_max = 0i64;
    let mut sorted_ns: Vec<i64> = ns.to_vec();
    sorted_ns.sort_unstable();
    sorted_ns.dedup();
    for &n in &sorted_ns {
        let m = n.unsigned_abs() as usize;
        let entry = by_mag.get(&m).unwrap();
        let val = if n > 0 { entry.0.unwrap() } else { entry.1.unwrap() };
        let ratio = val / (m as f64).powf(exponent);
        if ratio > constant {
            constant = ratio;
            arg_max = n;
        }
        table.push((n, val, ratio));
    }
    let max_mag = *mags.last().unwrap() as i64;
    let pass = constant == 0.0 || arg_max.abs() < max_mag;
    Ok(DifferenceBound {
        constant,
        arg_max,
        pass,
        table,
    })
}

/// The smallest m ≤ r + 4 with (A − I)^m numerically zero (relative to
/// max(1, ‖A−I‖)^m at 1e−10), or None when none qualifies.
pub fn nilpotency_check(a: &TruncatedOperator, r: usize) -> Option<usize> {
    let dim = a.dim();
    let b = &a.entries - Mat::identity(dim, dim);
    let scale = opnorm(&b).max(1.0);
    let mut cur = Mat::identity(dim, dim);
    for m in 1..=(r + 4) {
        cur = &cur * &b;
        if opnorm(&cur) <= 1e-10 * scale.powi(m as i32) {
            return Some(m);
        }
    }
    None
}

/// Orbit-level growth ‖(A^{−n} + λA^n)x‖ at the requested n.
pub fn local_growth(
    a: &TruncatedOperator,
    x: &Vect,
    lambda: C64,
    ns: &[usize],
) -> Result<Vec<(usize, f64)>> {
    let sorted = prepare_ns(ns)?;
    let top = *sorted.last().unwrap();
    a.horizon.check(top)?;
    if x.len() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: x.len(),
        });
    }
    let (lu, _) = checked_lu(a)?;
    let mut pos = x.clone();
    let mut neg = x.clone();
    let mut out = Vec::with_capacity(sorted.len());
    let mut want = sorted.iter().peekable();
    for n in 1..=top {
        pos = &a.entries * pos;
        neg = lu.solve(&neg).ok_or(Error::IllConditioned {
            cond: f64::INFINITY,
            cap: DEFAULT_CONDITION_CAP,
        })?;
        if want.peek() == Some(&&n) {
            out.push((n, (&neg + &pos * lambda).norm()));
            want.next();
        }
    }
    Ok(out)
}

/// Deviations of the two exact norm identities, measured relatively:
/// |λ|·‖A^{−n} + λ^{−1}A^n‖ = ‖A^n + λA^{−n}‖ (scaling) and
/// ‖(A*)^n + λ̄(A*)^{−n}‖ = ‖A^n + λA^{−n}‖ (adjoint).
pub struct IdentityDeviations {
    pub scaling: f64,
    pub adjoint: f64,
}

pub fn growth_identity_deviations(
    a: &TruncatedOperator,
    lambda: C64,
    ns: &[usize],
) -> Result<IdentityDeviations> {
    if lambda.norm() == 0.0 {
        return Err(Error::Precondition("λ must be nonzero for the identities".into()));
    }
    let base = asymmetric_growth(a, lambda, ns)?;
    let mirrored = reversed_growth(a, C64::new(1.0, 0.0) / lambda, ns)?;
    let adj = asymmetric_growth(&a.adjoint(), lambda.conj(), ns)?;
    let mut scaling = 0.0f64;
    let mut adjoint = 0.0f64;
    for ((n1, x), ((n2, y), (n3, z))) in base
        .norms
        .iter()
        .zip(mirrored.norms.iter().zip(adj.norms.iter()))
    {
        debug_assert!(n1 == n2 && n2 == n3);
        let s = x.max(1e-300);
        scaling = scaling.max((lambda.norm() * y - x).abs() / s);
        adjoint = adjoint.max((z - x).abs() / s);
    }
    Ok(IdentityDeviations { scaling, adjoint })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::CRat;
    use crate::operator::{build_truncation, OperatorKind, OperatorSpec};
    use approx::assert_relative_eq;
    use num_traits::One;

    fn jordan_one(k: usize) -> TruncatedOperator {
        build_truncation(&OperatorSpec {
            kind: OperatorKind::JordanBlock { eigenvalue: CRat::one() },
            n: k,
            horizon_override: None,
        })
        .unwrap()
    }

    fn dyadic(to: usize) -> Vec<usize> {
        let mut v = Vec::new();
        let mut n = 1;
        while n <= to {
            v.push(n);
            n *= 2;
        }
        v
    }

    #[test]
    fn two_cell_balanced_norms_collapse_to_constant() {
        // J_2(1)^n = [[1, n], [0, 1]] and its inverse power negates the
        // corner, so A^n + A^{−n} = 2I on the nose.
        let a = jordan_one(2);
        let report = asymmetric_growth(&a, C64::new(1.0, 0.0), &dyadic(512)).unwrap();
        for (_, v) in &report.norms {
            assert!((v - 2.0).abs() <= 1e-12, "norm {v}");
        }
        let fit = growth_exponent_fit(&report).unwrap();
        assert_eq!(fit.r, 0.0);
        assert_eq!(fit.ci_halfwidth, 0.0);
    }

    #[test]
    fn three_cell_exponent_is_two_and_nilpotency_follows() {
        let a = jordan_one(3);
        let report = asymmetric_growth(&a, C64::new(1.0, 0.0), &dyadic(512)).unwrap();
        let fit = growth_exponent_fit(&report).unwrap();
        assert!((fit.r - 2.0).abs() < 0.05, "fitted r = {}", fit.r);
        // spectrum {1} + polynomial growth of order r ⇒ (A−I)^m = 0 for
        // some m ≤ r + 4; here the true order is 3.
        let m = nilpotency_check(&a, fit.r.round() as usize).unwrap();
        assert_eq!(m, 3);
        assert_eq!(nilpotency_check(&jordan_one(2), 0), Some(2));
    }

    #[test]
    fn difference_bound_maximiser_sits_interior() {
        let a = jordan_one(3);
        let ns: Vec<i64> = (1..=32).flat_map(|n| [n as i64, -(n as i64)]).collect();
        let db = difference_bound_check(&a, 2, &ns).unwrap();
        assert!(db.pass, "maximiser at {}", db.arg_max);
        assert!(db.constant > 0.0);
        // ‖A^n(I−A²)‖ grows ~ n while the divisor is n⁴
        assert!(db.arg_max.unsigned_abs() <= 2);
    }

    #[test]
    fn scaling_and_adjoint_identities_hold_to_float_precision() {
        let a = jordan_one(3);
        for lambda in [C64::new(2.0, 0.0), C64::new(0.0, 1.0)] {
            let dev = growth_identity_deviations(&a, lambda, &dyadic(64)).unwrap();
            assert!(dev.scaling < 1e-12, "scaling dev {}", dev.scaling);
            assert!(dev.adjoint < 1e-12, "adjoint dev {}", dev.adjoint);
        }
    }

    #[test]
    fn local_growth_on_two_cell_is_constant_for_unit_lambda() {
        let a = jordan_one(2);
        let x = Vect::from_vec(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        let vals = local_growth(&a, &x, C64::new(1.0, 0.0), &dyadic(64)).unwrap();
        for (_, v) in vals {
            assert_relative_eq!(v, 2.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn shift_truncation_is_rejected_as_noninvertible() {
        let a = build_truncation(&OperatorSpec {
            kind: OperatorKind::WeightedShift {
                weights: crate::operator::WeightRule::Reciprocal { offset: 1 },
            },
            n: 8,
            horizon_override: None,
        })
        .unwrap();
        let err = asymmetric_growth(&a, C64::new(1.0, 0.0), &[1, 2]).unwrap_err();
        assert!(matches!(err, Error::IllConditioned { .. }));
    }
}
