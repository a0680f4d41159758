//! Exact rational series and frames, lifted to `Z/p^W` on demand.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::padic::{PRational, PadicRing};
use crate::qseries::{Frame, SeriesMatrix, TruncSeries};

pub type RSeries = Vec<BigRational>;

pub(crate) fn rat(x: &PRational) -> BigRational {
    x.0.clone()
}

pub(crate) fn int(k: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(k))
}

/// `(shift + D) f` with `D = z d/dz`.
pub fn theta(f: &[BigRational], shift: &BigRational) -> RSeries {
    f.iter().enumerate().map(|(d, c)| c * (shift + int(d as i64))).collect()
}

/// `z f`, truncated to the length of `f`.
pub fn times_z(f: &[BigRational]) -> RSeries {
    let mut out = vec![BigRational::zero(); f.len()];
    for d in 1..f.len() {
        out[d] = f[d - 1].clone();
    }
    out
}

pub fn p_valuation(x: &BigRational, p: u64) -> Option<i64> {
    PRational(x.clone()).valuation(p)
}

/// Smallest valuation among nonzero coefficients, `None` if all vanish.
pub fn min_valuation<'a>(xs: impl IntoIterator<Item = &'a BigRational>, p: u64) -> Option<i64> {
    xs.into_iter().filter_map(|x| p_valuation(x, p)).min()
}

/// `(-p)^(n/(p-1))`, the `n`-th power of a root of `pi^(p-1) = -p`.
pub fn dwork_pi_power(p: u64, n: usize) -> Result<BigRational> {
    let d = p as usize - 1;
    if !n.is_multiple_of(d) {
        return Err(Error::InvalidParameter(format!(
            "pi^{n} with pi^{d} = -{p} is not rational; need (p - 1) | n"
        )));
    }
    let base = int(-(p as i64));
    Ok(num_traits::pow(base, n / d))
}

/// An `n x n` matrix of exact series together with its value at `z = 0`.
#[derive(Clone, Debug)]
pub struct RationalFrame {
    /// `rows[i][j]` is the series in row `i`, column `j`.
    pub rows: Vec<Vec<RSeries>>,
    pub at_zero: Vec<Vec<BigRational>>,
}

impl RationalFrame {
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn order(&self) -> usize {
        self.rows[0][0].len() - 1
    }

    /// `z -> z^e`, truncated at `order`.
    pub fn substitute_power_to(&self, e: usize, order: usize) -> RationalFrame {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|f| {
                        let mut out = vec![BigRational::zero(); order + 1];
                        for (d, c) in f.iter().enumerate() {
                            if d * e <= order {
                                out[d * e] = c.clone();
                            }
                        }
                        out
                    })
                    .collect()
            })
            .collect();
        RationalFrame { rows, at_zero: self.at_zero.clone() }
    }

    /// Integral frame modulo `p^prec`: column `j` multiplied by `p^e_j`.
    pub fn lift(&self, p: u64, prec: u32) -> Result<Frame> {
        let ring = PadicRing::new(p, prec)?;
        let n = self.n();
        let mut shifts = Vec::with_capacity(n);
        for j in 0..n {
            let v = min_valuation(self.rows.iter().flat_map(|r| r[j].iter()), p).unwrap_or(0);
            shifts.push((-v).max(0) as u32);
        }
        let mut rows = Vec::with_capacity(n);
        for r in &self.rows {
            let mut row = Vec::with_capacity(n);
            for (j, f) in r.iter().enumerate() {
                let scale = BigRational::from_integer(BigInt::from(p).pow(shifts[j]));
                let coeffs =
                    f.iter().map(|c| ring.lift_residue(&PRational(c * &scale))).collect::<Result<Vec<BigUint>>>()?;
                row.push(TruncSeries::new(&ring, coeffs));
            }
            rows.push(row);
        }
        let at_zero = self
            .at_zero
            .iter()
            .map(|r| r.iter().map(|c| ring.lift_residue(&PRational(c.clone()))).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Frame { entries: SeriesMatrix::from_rows(rows), column_shift: shifts, at_zero })
    }
}

/// Truncated polynomials in `x` modulo `x^n`.
pub mod xpoly {
    use super::*;

    pub fn mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
        let n = a.len();
        let mut out = vec![BigRational::zero(); n];
        for i in 0..n {
            if a[i].is_zero() {
                continue;
            }
            for j in 0..n - i {
                out[i + j] += &a[i] * &b[j];
            }
        }
        out
    }

    pub fn inv(a: &[BigRational]) -> Option<Vec<BigRational>> {
        if a[0].is_zero() {
            return None;
        }
        let n = a.len();
        let mut out = vec![BigRational::zero(); n];
        out[0] = a[0].recip();
        for k in 1..n {
            let mut acc = BigRational::zero();
            for j in 1..=k {
                acc += &a[j] * &out[k - j];
            }
            out[k] = -acc / &a[0];
        }
        Some(out)
    }

    /// `x + c` truncated to `n` terms.
    pub fn linear(c: BigRational, n: usize) -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); n];
        out[0] = c;
        if n > 1 {
            out[1] = BigRational::one();
        }
        out
    }

    /// `x * a` truncated.
    pub fn shift(a: &[BigRational]) -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); a.len()];
        for k in 1..a.len() {
            out[k] = a[k - 1].clone();
        }
        out
    }
}

pub(crate) fn first_nonzero(f: &[BigRational]) -> Option<usize> {
    f.iter().position(|c| !c.is_zero())
}
