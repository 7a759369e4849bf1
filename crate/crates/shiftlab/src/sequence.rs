//! Finite scalar sequences with dual arithmetic.
//!
//! A `CoefficientSequence` is a prefix c_0 … c_{L−1} of a scalar sequence.
//! It houses everything sequence-shaped in the lab: Hankel symbols ψ and ν,
//! the α-witness, inner-function and polynomial coefficients, and named
//! vectors from scenario files. Exact values (ℚ(i)) travel alongside their
//! float projection, so float consumers never branch while exact consumers
//! can demand losslessness.
//!
//! Text form: one value per line, `p/q`, decimal, or `a+bi` — all of which
//! are exactly representable, so imported sequences are always exact.

use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::exact::{
    big_factorial, crat, crat_to_c64, fmt_crat, parse_crat, CRat, Rat,
};
use crate::linalg::{fmt_f64, C64, Vect};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arithmetic {
    Float,
    ExactRational,
}

impl Arithmetic {
    pub fn as_str(&self) -> &'static str {
        match self {
            Arithmetic::Float => "float",
            Arithmetic::ExactRational => "exact_rational",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "float" => Ok(Arithmetic::Float),
            "exact_rational" => Ok(Arithmetic::ExactRational),
            other => Err(Error::Parse(format!("unknown arithmetic `{other}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CoefficientSequence {
    floats: Vec<C64>,
    exact: Option<Vec<CRat>>,
    /// Estimated lim sup |c_n|^{1/n}; set when the sequence comes from an
    /// operator with a spectral-radius estimate, or on demand.
    pub decay_hint: Option<f64>,
    /// True when the prefix truncates an infinite rule (geometric tails
    /// etc.); polynomial evaluation then demands a convergence check.
    pub from_infinite_rule: bool,
}

impl CoefficientSequence {
    pub fn from_floats(values: Vec<C64>) -> Self {
        CoefficientSequence {
            floats: values,
            exact: None,
            decay_hint: None,
            from_infinite_rule: false,
        }
    }

    pub fn from_exact(values: Vec<CRat>) -> Self {
        let floats = values.iter().map(crat_to_c64).collect();
        CoefficientSequence {
            floats,
            exact: Some(values),
            decay_hint: None,
            from_infinite_rule: false,
        }
    }

    pub fn arithmetic(&self) -> Arithmetic {
        if self.exact.is_some() {
            Arithmetic::ExactRational
        } else {
            Arithmetic::Float
        }
    }

    pub fn len(&self) -> usize {
        self.floats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.floats.is_empty()
    }

    pub fn get(&self, i: usize) -> C64 {
        self.floats[i]
    }

    pub fn floats(&self) -> &[C64] {
        &self.floats
    }

    pub fn exact_values(&self) -> Option<&[CRat]> {
        self.exact.as_deref()
    }

    pub fn is_zero(&self) -> bool {
        match &self.exact {
            Some(xs) => xs.iter().all(|z| z.is_zero()),
            None => self.floats.iter().all(|z| z.norm() == 0.0),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.floats.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn norm_l2(&self) -> f64 {
        self.floats.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Pads with zeros up to dimension `n`; refuses to drop entries.
    pub fn as_vect(&self, n: usize) -> Result<Vect> {
        if self.len() > n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.len(),
            });
        }
        Ok(Vect::from_fn(n, |i, _| {
            if i < self.len() {
                self.floats[i]
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    pub fn as_exact_vec(&self, n: usize) -> Result<Vec<CRat>> {
        let xs = self
            .exact
            .as_ref()
            .ok_or_else(|| Error::ExactUnavailable("sequence is float-valued".into()))?;
        if xs.len() > n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: xs.len(),
            });
        }
        let mut out = xs.clone();
        out.resize(n, CRat::zero());
        Ok(out)
    }

    /// max |c_n|^{1/n} over the last dyadic window [L/2, L): a cheap
    /// lim sup estimate; 0 when the window is all zeros.
    pub fn estimate_decay(&self) -> Option<f64> {
        let l = self.len();
        if l < 4 {
            return None;
        }
        let mut best: Option<f64> = None;
        for n in (l / 2).max(1)..l {
            let a = self.floats[n].norm();
            if a > 0.0 {
                let v = a.powf(1.0 / n as f64);
                best = Some(best.map_or(v, |b: f64| b.max(v)));
            }
        }
        Some(best.unwrap_or(0.0))
    }

    pub fn with_decay_hint(mut self, hint: Option<f64>) -> Self {
        self.decay_hint = hint;
        self
    }

    pub fn mark_infinite_rule(mut self) -> Self {
        self.from_infinite_rule = true;
        self
    }

    // --- rule constructors ------------------------------------------------

    /// c_n = ratio^n (exact when the ratio is).
    pub fn geometric(ratio: &CRat, len: usize) -> Self {
        let mut vals = Vec::with_capacity(len);
        let mut cur = CRat::one();
        for _ in 0..len {
            vals.push(cur.clone());
            cur = &cur * ratio;
        }
        Self::from_exact(vals).mark_infinite_rule()
    }

    /// c_n = 1/(n+offset)!  (offset 0 gives 1/n!, the Theorem-D α rule).
    pub fn reciprocal_factorial(offset: usize, len: usize) -> Self {
        let vals = (0..len)
            .map(|n| {
                crat(
                    Rat::new(num_bigint::BigInt::one(), big_factorial(n + offset)),
                    Rat::zero(),
                )
            })
            .collect();
        Self::from_exact(vals).mark_infinite_rule()
    }

    /// c_n = 1/(n+offset); offset ≥ 1.
    pub fn reciprocal(offset: usize, len: usize) -> Self {
        let vals = (0..len)
            .map(|n| crat(Rat::new(1.into(), ((n + offset) as i64).into()), Rat::zero()))
            .collect();
        Self::from_exact(vals).mark_infinite_rule()
    }

    pub fn ones(len: usize) -> Self {
        Self::from_exact(vec![CRat::one(); len])
    }

    pub fn basis(index: usize, len: usize) -> Self {
        let mut vals = vec![CRat::zero(); len];
        vals[index] = CRat::one();
        Self::from_exact(vals)
    }

    /// The square-lattice moment rule: c_{2k} = 0, c_{2k+1} = Σ_i λ_i^{−k}.
    pub fn moments(lambdas: &[Rat], len: usize) -> Self {
        let vals = (0..len)
            .map(|n| {
                if n % 2 == 0 {
                    CRat::zero()
                } else {
                    let k = ((n - 1) / 2) as i32;
                    let sum = lambdas
                        .iter()
                        .map(|lam| Rat::one() / lam.pow(k))
                        .fold(Rat::zero(), |a, b| a + b);
                    crat(sum, Rat::zero())
                }
            })
            .collect();
        Self::from_exact(vals).mark_infinite_rule()
    }

    // --- text I/O -----------------------------------------------------------

    /// One value per line; blank lines and `#` comments skipped. Every
    /// accepted literal is exactly representable, so the result is exact.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut vals = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let z = parse_crat(t)
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            vals.push(z);
        }
        if vals.is_empty() {
            return Err(Error::Parse("no values in sequence text".into()));
        }
        Ok(Self::from_exact(vals))
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        Self::parse_text(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match &self.exact {
            Some(xs) => {
                for z in xs {
                    let _ = writeln!(out, "{}", fmt_crat(z));
                }
            }
            None => {
                for z in &self.floats {
                    if z.im == 0.0 {
                        let _ = writeln!(out, "{}", fmt_f64(z.re));
                    } else if z.im < 0.0 {
                        let _ = writeln!(out, "{}{}i", fmt_f64(z.re), fmt_f64(z.im));
                    } else {
                        let _ = writeln!(out, "{}+{}i", fmt_f64(z.re), fmt_f64(z.im));
                    }
                }
            }
        }
        out
    }

    /// Display strings for reports: exact `p/q` forms when available,
    /// fixed-width floats otherwise.
    pub fn display_values(&self) -> Vec<String> {
        match &self.exact {
            Some(xs) => xs.iter().map(fmt_crat).collect(),
            None => self
                .floats
                .iter()
                .map(|z| format!("{},{}", fmt_f64(z.re), fmt_f64(z.im)))
                .collect(),
        }
    }

    /// Inverse of [`display_values`](Self::display_values): exact entries
    /// are complex-rational literals, float entries are `re,im` pairs in
    /// full-precision scientific notation.
    pub fn from_display(arithmetic: Arithmetic, values: &[String]) -> Result<Self> {
        match arithmetic {
            Arithmetic::ExactRational => {
                let mut xs = Vec::with_capacity(values.len());
                for v in values {
                    xs.push(parse_crat(v)?);
                }
                Ok(Self::from_exact(xs))
            }
            Arithmetic::Float => {
                let mut zs = Vec::with_capacity(values.len());
                for v in values {
                    let (re, im) = v.split_once(',').ok_or_else(|| {
                        Error::Parse(format!("float entry `{v}` is not a re,im pair"))
                    })?;
                    let re: f64 = re
                        .trim()
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad float in `{v}`")))?;
                    let im: f64 = im
                        .trim()
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad float in `{v}`")))?;
                    zs.push(C64::new(re, im));
                }
                Ok(Self::from_floats(zs))
            }
        }
    }

    /// Degree of the highest nonzero coefficient, if any.
    pub fn degree(&self) -> Option<usize> {
        match &self.exact {
            Some(xs) => xs.iter().rposition(|z| !z.is_zero()),
            None => self.floats.iter().rposition(|z| z.norm() != 0.0),
        }
    }
}

/// Exact λ parser for moment rules: accepts integers and `p/q`, requires λ > 0.
pub fn parse_lambda(s: &str) -> Result<Rat> {
    let r = crate::exact::parse_rat(s)?;
    if !r.is_positive() {
        return Err(Error::Parse(format!("moment pole `{s}` must be positive")));
    }
    Ok(r)
}

/// Checked f64 → usize for config plumbing.
pub fn to_usize(v: f64) -> Result<usize> {
    v.to_usize()
        .ok_or_else(|| Error::Parse(format!("expected a nonnegative integer, got {v}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    #[test]
    fn rules_match_closed_forms() {
        let g = CoefficientSequence::geometric(&crat(rat(1, 2), Rat::zero()), 5);
        assert_eq!(g.exact_values().unwrap()[3], crat(rat(1, 8), Rat::zero()));

        let f = CoefficientSequence::reciprocal_factorial(1, 4);
        // 1/1!, 1/2!, 1/3!, 1/4!
        assert_eq!(f.exact_values().unwrap()[3], crat(rat(1, 24), Rat::zero()));

        let m = CoefficientSequence::moments(&[rat(4, 1), rat(9, 1)], 6);
        let xs = m.exact_values().unwrap();
        assert!(xs[0].is_zero() && xs[2].is_zero() && xs[4].is_zero());
        assert_eq!(xs[1], crat(rat(2, 1), Rat::zero())); // 1 + 1
        assert_eq!(xs[3], crat(rat(13, 36), Rat::zero())); // 1/4 + 1/9
    }

    #[test]
    fn text_round_trip_stays_exact() {
        let s = CoefficientSequence::parse_text("1/2\n-3\n0.25\n2-1/3i\n").unwrap();
        assert_eq!(s.arithmetic(), Arithmetic::ExactRational);
        let round = CoefficientSequence::parse_text(&s.to_text()).unwrap();
        assert_eq!(s.exact_values().unwrap(), round.exact_values().unwrap());
        assert_eq!(s.exact_values().unwrap()[2], crat(rat(1, 4), Rat::zero()));
    }

    #[test]
    fn decay_estimate_tracks_geometric_ratio() {
        let g = CoefficientSequence::geometric(&crat(rat(1, 3), Rat::zero()), 32);
        let d = g.estimate_decay().unwrap();
        assert!((d - 1.0 / 3.0).abs() < 0.02, "{d}");
    }

    #[test]
    fn vect_padding_and_length_guard() {
        let b = CoefficientSequence::basis(1, 3);
        let v = b.as_vect(5).unwrap();
        assert_eq!(v.len(), 5);
        assert_eq!(v[1].re, 1.0);
        assert!(b.as_vect(2).is_err());
    }
}
