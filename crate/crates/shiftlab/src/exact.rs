//! Exact arithmetic over ℚ(i): scalars are `Complex<BigRational>`.
//!
//! Factorially decaying coefficient sequences underflow any fixed-precision
//! rank test, so every verdict that can be computed exactly is computed here:
//! Hankel determinants, linear-recurrence kernels, Krylov ranks. Scalars
//! round-trip through the text forms `p/q`, decimals, and `a+bi`.

use num_bigint::{BigInt, Sign};
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;
pub type CRat = Complex<Rat>;

pub fn rat(numer: i64, denom: i64) -> Rat {
    Rat::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn crat(re: Rat, im: Rat) -> CRat {
    Complex::new(re, im)
}

pub fn crat_int(n: i64) -> CRat {
    Complex::new(rat(n, 1), Rat::zero())
}

pub fn big_factorial(n: usize) -> BigInt {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= BigInt::from(k);
    }
    acc
}

/// Best-effort conversion to f64; exact values beyond f64 range collapse to
/// ±inf/0 the same way literal arithmetic would.
pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let s = match r.numer().sign() {
            Sign::Minus => -1.0,
            Sign::NoSign => 0.0,
            Sign::Plus => 1.0,
        };
        s * f64::INFINITY
    })
}

pub fn crat_to_c64(z: &CRat) -> Complex<f64> {
    Complex::new(rat_to_f64(&z.re), rat_to_f64(&z.im))
}

/// Parses `p/q`, plain integers, and decimal/scientific literals (`-0.25`,
/// `1.5e-3`) into an exact rational.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational literal".into()));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in `{s}`")))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in `{s}`")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in `{s}`")));
        }
        return Ok(Rat::new(n, d));
    }
    // decimal / scientific: mantissa [.fraction] [e exp]
    let (mant, exp10) = match s.split_once(['e', 'E']) {
        Some((m, e)) => {
            let exp: i64 = e
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent in `{s}`")))?;
            (m, exp)
        }
        None => (s, 0),
    };
    let (int_part, frac_part) = match mant.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mant, ""),
    };
    let digits = format!(
        "{}{}",
        if int_part.is_empty() || int_part == "-" || int_part == "+" {
            format!("{int_part}0")
        } else {
            int_part.to_string()
        },
        frac_part
    );
    let n: BigInt = digits
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational literal `{s}`")))?;
    let shift = exp10 - frac_part.len() as i64;
    let ten = BigInt::from(10);
    Ok(if shift >= 0 {
        Rat::from(n * ten.pow(shift as u32))
    } else {
        Rat::new(n, ten.pow((-shift) as u32))
    })
}

/// Parses `a`, `bi`, `a+bi`, `a-bi` with rational parts (`3/4-1/2i`).
pub fn parse_crat(s: &str) -> Result<CRat> {
    let s = s.trim().replace(' ', "");
    if s.is_empty() {
        return Err(Error::Parse("empty complex literal".into()));
    }
    if !s.ends_with('i') {
        return Ok(crat(parse_rat(&s)?, Rat::zero()));
    }
    let body = &s[..s.len() - 1];
    // split at the last top-level sign (not leading, not after an exponent marker)
    let bytes = body.as_bytes();
    let mut split = None;
    for k in (1..bytes.len()).rev() {
        if (bytes[k] == b'+' || bytes[k] == b'-')
            && bytes[k - 1] != b'e'
            && bytes[k - 1] != b'E'
        {
            split = Some(k);
            break;
        }
    }
    let imag_of = |t: &str| -> Result<Rat> {
        match t {
            "" | "+" => Ok(Rat::one()),
            "-" => Ok(-Rat::one()),
            _ => parse_rat(t),
        }
    };
    match split {
        Some(k) => Ok(crat(parse_rat(&body[..k])?, imag_of(&body[k..])?)),
        None => Ok(crat(Rat::zero(), imag_of(body)?)),
    }
}

pub fn fmt_rat(r: &Rat) -> String {
    r.to_string()
}

pub fn fmt_crat(z: &CRat) -> String {
    if z.im.is_zero() {
        fmt_rat(&z.re)
    } else if z.re.is_zero() {
        format!("{}i", fmt_rat(&z.im))
    } else if z.im.is_negative() {
        format!("{}{}i", fmt_rat(&z.re), fmt_rat(&z.im))
    } else {
        format!("{}+{}i", fmt_rat(&z.re), fmt_rat(&z.im))
    }
}

/// ⟨x, y⟩ = Σ x_k conj(y_k), conjugate-linear in the second slot.
pub fn dot(x: &[CRat], y: &[CRat]) -> CRat {
    assert_eq!(x.len(), y.len());
    let mut acc = CRat::zero();
    for (a, b) in x.iter().zip(y) {
        acc += a * b.conj();
    }
    acc
}

/// Dense matrix over ℚ(i), row-major. Sized for desk-scale exact work
/// (Hankel slabs, Krylov panels, truncations up to a few dozen).
#[derive(Clone, Debug, PartialEq)]
pub struct ExactMat {
    rows: usize,
    cols: usize,
    data: Vec<CRat>,
}

impl ExactMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ExactMat {
            rows,
            cols,
            data: vec![CRat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = CRat::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> CRat) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> Vec<CRat> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn mul(&self, other: &ExactMat) -> ExactMat {
        assert_eq!(self.cols, other.rows);
        let mut out = ExactMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a * &other[(k, j)];
                    out[(i, j)] += prod;
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[CRat]) -> Vec<CRat> {
        assert_eq!(self.cols, x.len());
        let mut out = vec![CRat::zero(); self.rows];
        for i in 0..self.rows {
            for j in 0..self.cols {
                if !self[(i, j)].is_zero() {
                    out[i] += &self[(i, j)] * &x[j];
                }
            }
        }
        out
    }

    /// Reduced row echelon form in place; returns the pivot columns.
    fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self[(i, c)].is_zero()) else {
                continue;
            };
            for j in 0..self.cols {
                let tmp = self[(p, j)].clone();
                self[(p, j)] = self[(r, j)].clone();
                self[(r, j)] = tmp;
            }
            let inv = CRat::one() / self[(r, c)].clone();
            for j in c..self.cols {
                let v = &self[(r, j)] * &inv;
                self[(r, j)] = v;
            }
            for i in 0..self.rows {
                if i != r && !self[(i, c)].is_zero() {
                    let f = self[(i, c)].clone();
                    for j in c..self.cols {
                        let v = &self[(i, j)] - &(&f * &self[(r, j)]);
                        self[(i, j)] = v;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref().len()
    }

    /// Basis of {x : Mx = 0}, one vector per free column, in column order.
    pub fn nullspace(&self) -> Vec<Vec<CRat>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let piv_of_col: Vec<Option<usize>> = {
            let mut v = vec![None; self.cols];
            for (r, &c) in pivots.iter().enumerate() {
                v[c] = Some(r);
            }
            v
        };
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if piv_of_col[free].is_some() {
                continue;
            }
            let mut x = vec![CRat::zero(); self.cols];
            x[free] = CRat::one();
            for (r, &c) in pivots.iter().enumerate() {
                x[c] = -m[(r, free)].clone();
            }
            basis.push(x);
        }
        basis
    }

    pub fn det(&self) -> Result<CRat> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                got: self.cols,
            });
        }
        let mut m = self.clone();
        let n = self.rows;
        let mut det = CRat::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !m[(i, c)].is_zero()) else {
                return Ok(CRat::zero());
            };
            if p != c {
                for j in 0..n {
                    let tmp = m[(p, j)].clone();
                    m[(p, j)] = m[(c, j)].clone();
                    m[(c, j)] = tmp;
                }
                det = -det;
            }
            det *= m[(c, c)].clone();
            let inv = CRat::one() / m[(c, c)].clone();
            for i in (c + 1)..n {
                if m[(i, c)].is_zero() {
                    continue;
                }
                let f = &m[(i, c)] * &inv;
                for j in c..n {
                    let v = &m[(i, j)] - &(&f * &m[(c, j)]);
                    m[(i, j)] = v;
                }
            }
        }
        Ok(det)
    }

    pub fn to_f64(&self) -> nalgebra::DMatrix<Complex<f64>> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |i, j| crat_to_c64(&self[(i, j)]))
    }
}

impl std::ops::Index<(usize, usize)> for ExactMat {
    type Output = CRat;
    fn index(&self, (i, j): (usize, usize)) -> &CRat {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ExactMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut CRat {
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["3/4", "-7", "0", "1/3+2i", "-1/2-1/3i", "5i", "-i", "2+i"] {
            let z = parse_crat(s).unwrap();
            let z2 = parse_crat(&fmt_crat(&z)).unwrap();
            assert_eq!(z, z2, "{s}");
        }
        assert_eq!(parse_rat("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rat("-1.5e-3").unwrap(), rat(-3, 2000));
        assert_eq!(parse_rat("12e2").unwrap(), rat(1200, 1));
        assert!(parse_rat("1/0").is_err());
    }

    #[test]
    fn rref_rank_nullspace() {
        // rank-1 outer product has a 2-dim nullspace in 3 columns
        let m = ExactMat::from_fn(3, 3, |i, j| crat_int((i as i64 + 1) * (j as i64 + 1)));
        assert_eq!(m.rank(), 1);
        let ns = m.nullspace();
        assert_eq!(ns.len(), 2);
        for x in &ns {
            assert!(m.matvec(x).iter().all(|v| v.is_zero()));
        }
    }

    #[test]
    fn factorial_hankel_determinants() {
        // exact determinants of H_d for c_n = 1/(n+1)!, d = 1..4
        let c: Vec<CRat> = (0..8)
            .map(|n| crat(Rat::new(BigInt::one(), big_factorial(n + 1)), Rat::zero()))
            .collect();
        let det_of = |d: usize| {
            ExactMat::from_fn(d, d, |i, j| c[i + j].clone())
                .det()
                .unwrap()
        };
        assert_eq!(det_of(1), crat_int(1));
        assert_eq!(det_of(2), crat(rat(-1, 12), Rat::zero()));
        assert_eq!(det_of(3), crat(rat(-1, 8640), Rat::zero()));
        assert_eq!(det_of(4), crat(rat(1, 870_912_000), Rat::zero()));
    }

    #[test]
    fn det_with_complex_entries() {
        let m = ExactMat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => crat(rat(1, 1), rat(1, 1)),
            (0, 1) => crat_int(2),
            (1, 0) => crat_int(1),
            _ => crat(rat(0, 1), rat(-1, 1)),
        });
        // (1+i)(-i) - 2 = 1 - i - 2
        assert_eq!(m.det().unwrap(), crat(rat(-1, 1), rat(-1, 1)));
    }
}
