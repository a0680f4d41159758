//! Truncated power series in `z` over `Z/p^W`, and square matrices of them.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::padic::{biguint_valuation, PadicScalar, Ring, Valuation};

/// `c_0 + c_1 z + ... + c_M z^M + O(z^{M+1})`.
#[derive(Clone, PartialEq, Eq)]
pub struct TruncSeries {
    ring: Ring,
    coeffs: Vec<BigUint>,
}

impl TruncSeries {
    pub fn new(ring: &Ring, mut coeffs: Vec<BigUint>) -> TruncSeries {
        assert!(!coeffs.is_empty(), "a series needs at least the constant term");
        for c in coeffs.iter_mut() {
            if *c >= *ring.modulus() {
                *c = ring.reduce(c);
            }
        }
        TruncSeries { ring: ring.clone(), coeffs }
    }

    pub fn from_i64s(ring: &Ring, coeffs: &[i64], order: usize) -> TruncSeries {
        let mut out = vec![BigUint::zero(); order + 1];
        for (k, c) in coeffs.iter().enumerate().take(order + 1) {
            out[k] = ring.from_i64(*c).into_residue();
        }
        TruncSeries { ring: ring.clone(), coeffs: out }
    }

    pub fn from_scalars(ring: &Ring, coeffs: &[PadicScalar]) -> TruncSeries {
        TruncSeries::new(ring, coeffs.iter().map(|c| c.residue().clone()).collect())
    }

    pub fn zero(ring: &Ring, order: usize) -> TruncSeries {
        TruncSeries { ring: ring.clone(), coeffs: vec![BigUint::zero(); order + 1] }
    }

    pub fn constant(c: &PadicScalar, order: usize) -> TruncSeries {
        let mut s = TruncSeries::zero(c.ring(), order);
        s.coeffs[0] = c.residue().clone();
        s
    }

    pub fn one(ring: &Ring, order: usize) -> TruncSeries {
        TruncSeries::constant(&ring.one(), order)
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigUint] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> PadicScalar {
        self.ring.from_biguint(self.coeffs[k].clone())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn truncate(&self, order: usize) -> TruncSeries {
        assert!(order <= self.order());
        TruncSeries { ring: self.ring.clone(), coeffs: self.coeffs[..=order].to_vec() }
    }

    fn same_ring(&self, other: &TruncSeries) {
        assert!(
            self.ring == other.ring,
            "mixed series rings: {}^{} vs {}^{}",
            self.ring.p(),
            self.ring.prec(),
            other.ring.p(),
            other.ring.prec()
        );
    }

    pub fn add(&self, other: &TruncSeries) -> TruncSeries {
        self.same_ring(other);
        let m = self.order().min(other.order());
        let coeffs = (0..=m).map(|k| self.ring.reduce(&(&self.coeffs[k] + &other.coeffs[k]))).collect();
        TruncSeries { ring: self.ring.clone(), coeffs }
    }

    pub fn sub(&self, other: &TruncSeries) -> TruncSeries {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> TruncSeries {
        let md = self.ring.modulus();
        let coeffs = self.coeffs.iter().map(|c| if c.is_zero() { c.clone() } else { md - c }).collect();
        TruncSeries { ring: self.ring.clone(), coeffs }
    }

    pub fn scale(&self, c: &PadicScalar) -> TruncSeries {
        assert!(c.ring() == &self.ring, "scalar from a different ring");
        self.scale_residue(c.residue())
    }

    pub fn scale_residue(&self, c: &BigUint) -> TruncSeries {
        let coeffs = self.coeffs.iter().map(|x| self.ring.reduce(&(x * c))).collect();
        TruncSeries { ring: self.ring.clone(), coeffs }
    }

    /// Cauchy product truncated at the smaller order.
    pub fn mul(&self, other: &TruncSeries) -> TruncSeries {
        self.same_ring(other);
        let m = self.order().min(other.order());
        let mut coeffs = Vec::with_capacity(m + 1);
        for k in 0..=m {
            let mut acc = BigUint::zero();
            for i in 0..=k {
                let (a, b) = (&self.coeffs[i], &other.coeffs[k - i]);
                if !a.is_zero() && !b.is_zero() {
                    acc += a * b;
                }
            }
            coeffs.push(self.ring.reduce(&acc));
        }
        TruncSeries { ring: self.ring.clone(), coeffs }
    }

    /// Multiplicative inverse by Newton iteration `g <- g (2 - f g)`.
    pub fn invert(&self) -> Result<TruncSeries> {
        let c0 = self.coeff(0);
        let inv0 = c0.invert_unit().map_err(|_| Error::NonUnitConstantTerm)?;
        let m = self.order();
        let mut g = TruncSeries::constant(&inv0, 0);
        let mut known = 1usize;
        while known < m + 1 {
            known = (2 * known).min(m + 1);
            let f = self.truncate(known - 1);
            let g_ext = g.extend(known - 1);
            let fg = f.mul(&g_ext);
            let two_minus = TruncSeries::constant(&self.ring.from_i64(2), known - 1).sub(&fg);
            g = g_ext.mul(&two_minus);
        }
        Ok(g)
    }

    /// Pad with zero coefficients up to `order`.
    pub fn extend(&self, order: usize) -> TruncSeries {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(order + 1, BigUint::zero());
        coeffs.truncate(order + 1);
        TruncSeries { ring: self.ring.clone(), coeffs }
    }

    /// `f(z) -> f(cz)`.
    pub fn substitute_scale(&self, c: &PadicScalar) -> TruncSeries {
        let mut pw = self.ring.one();
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for x in &self.coeffs {
            coeffs.push(self.ring.reduce(&(x * pw.residue())));
            pw = &pw * c;
        }
        TruncSeries { ring: self.ring.clone(), coeffs }
    }

    /// `f(z) -> f(z^e)` keeping the order `M`.
    pub fn substitute_power(&self, e: usize) -> TruncSeries {
        self.substitute_power_to(e, self.order())
    }

    /// `f(z) -> f(z^e)` truncated at `order`; needs input order `>= order / e`.
    pub fn substitute_power_to(&self, e: usize, order: usize) -> TruncSeries {
        assert!(e >= 1);
        assert!(self.order() >= order / e, "input series too short for power substitution");
        let mut coeffs = vec![BigUint::zero(); order + 1];
        for k in 0..=order / e {
            coeffs[e * k] = self.coeffs[k].clone();
        }
        TruncSeries { ring: self.ring.clone(), coeffs }
    }

    /// `(1 - z)^m f` truncated at the same order.
    pub fn cancel_pole(&self, m: usize) -> TruncSeries {
        let mut out = self.clone();
        for _ in 0..m {
            out = out.times_one_minus_z();
        }
        out
    }

    pub(crate) fn times_one_minus_z(&self) -> TruncSeries {
        let md = self.ring.modulus();
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        coeffs.push(self.coeffs[0].clone());
        for k in 1..self.coeffs.len() {
            let (a, b) = (&self.coeffs[k], &self.coeffs[k - 1]);
            coeffs.push(if a >= b { a - b } else { md - b + a });
        }
        TruncSeries { ring: self.ring.clone(), coeffs }
    }

    /// Reduce coefficients modulo a smaller power of p.
    pub fn reduce_to(&self, ring: &Ring) -> TruncSeries {
        assert_eq!(ring.p(), self.ring.p());
        assert!(ring.prec() <= self.ring.prec());
        TruncSeries::new(ring, self.coeffs.clone())
    }

    /// Exact division by `p^k`, landing in `Z/p^(W-k)`.
    pub fn div_p_pow(&self, k: u32) -> Result<TruncSeries> {
        if k == 0 {
            return Ok(self.clone());
        }
        if k >= self.ring.prec() {
            return Err(Error::PrecisionExhausted(format!(
                "dividing a series by p^{k} at working exponent {}",
                self.ring.prec()
            )));
        }
        let pk = self.ring.p_pow(k);
        let ring = self.ring.with_prec(self.ring.prec() - k);
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (d, c) in self.coeffs.iter().enumerate() {
            let (q, r) = c.div_rem(&pk);
            if !r.is_zero() {
                return Err(Error::PrecisionExhausted(format!(
                    "coefficient {d} is not divisible by p^{k}"
                )));
            }
            coeffs.push(q);
        }
        Ok(TruncSeries { ring, coeffs })
    }

    pub fn mul_p_pow(&self, k: u32) -> TruncSeries {
        if k == 0 {
            return self.clone();
        }
        self.scale_residue(&self.ring.p_pow(k))
    }

    /// Minimum valuation over all coefficients.
    pub fn min_valuation(&self) -> Valuation {
        self.coeffs
            .iter()
            .filter_map(|c| biguint_valuation(c, self.ring.p()))
            .min()
            .map(Valuation::Finite)
            .unwrap_or(Valuation::AtLeast(self.ring.prec()))
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.coeffs.iter().map(big_to_json).collect())
    }
}

pub fn big_to_json(x: &BigUint) -> Value {
    serde_json::from_str(&x.to_string()).expect("decimal integer is valid JSON")
}

impl fmt::Display for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 if c.is_one() => write!(f, "z")?,
                1 => write!(f, "{c}*z")?,
                _ if c.is_one() => write!(f, "z^{k}")?,
                _ => write!(f, "{c}*z^{k}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(z^{})", self.coeffs.len())
    }
}

impl fmt::Debug for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self} mod {}^{}", self.ring.p(), self.ring.prec())
    }
}

/// `p^(-shift) * series`.
#[derive(Clone, Debug)]
pub struct ScaledSeries {
    pub series: TruncSeries,
    pub shift: u32,
}

/// Square matrix of series, all sharing ring and order.
#[derive(Clone, PartialEq, Eq)]
pub struct SeriesMatrix {
    n: usize,
    entries: Vec<TruncSeries>,
}

impl SeriesMatrix {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> TruncSeries) -> SeriesMatrix {
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(f(i, j));
            }
        }
        let m = SeriesMatrix { n, entries };
        m.check_uniform();
        m
    }

    pub fn from_rows(rows: Vec<Vec<TruncSeries>>) -> SeriesMatrix {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        let m = SeriesMatrix { n, entries: rows.into_iter().flatten().collect() };
        m.check_uniform();
        m
    }

    fn check_uniform(&self) {
        let (ring, order) = (self.entries[0].ring(), self.entries[0].order());
        assert!(
            self.entries.iter().all(|e| e.ring() == ring && e.order() == order),
            "matrix entries must share ring and order"
        );
    }

    pub fn identity(ring: &Ring, n: usize, order: usize) -> SeriesMatrix {
        SeriesMatrix::from_fn(n, |i, j| {
            if i == j {
                TruncSeries::one(ring, order)
            } else {
                TruncSeries::zero(ring, order)
            }
        })
    }

    /// Constant matrix from residues.
    pub fn constant(ring: &Ring, rows: &[Vec<BigUint>], order: usize) -> SeriesMatrix {
        SeriesMatrix::from_fn(rows.len(), |i, j| {
            TruncSeries::constant(&ring.from_biguint(rows[i][j].clone()), order)
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.entries[0].order()
    }

    pub fn ring(&self) -> &Ring {
        self.entries[0].ring()
    }

    pub fn get(&self, i: usize, j: usize) -> &TruncSeries {
        &self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[TruncSeries] {
        &self.entries
    }

    pub fn map(&self, f: impl Fn(&TruncSeries) -> TruncSeries) -> SeriesMatrix {
        SeriesMatrix { n: self.n, entries: self.entries.iter().map(f).collect() }
    }

    pub fn try_map(&self, f: impl Fn(&TruncSeries) -> Result<TruncSeries>) -> Result<SeriesMatrix> {
        Ok(SeriesMatrix { n: self.n, entries: self.entries.iter().map(f).collect::<Result<_>>()? })
    }

    pub fn add(&self, other: &SeriesMatrix) -> SeriesMatrix {
        assert_eq!(self.n, other.n);
        SeriesMatrix { n: self.n, entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn sub(&self, other: &SeriesMatrix) -> SeriesMatrix {
        assert_eq!(self.n, other.n);
        SeriesMatrix { n: self.n, entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a.sub(b)).collect() }
    }

    pub fn scale_residue(&self, c: &BigUint) -> SeriesMatrix {
        self.map(|e| e.scale_residue(c))
    }

    pub fn mul(&self, other: &SeriesMatrix) -> SeriesMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        SeriesMatrix::from_fn(n, |i, j| {
            let mut acc = self.get(i, 0).mul(other.get(0, j));
            for k in 1..n {
                acc = acc.add(&self.get(i, k).mul(other.get(k, j)));
            }
            acc
        })
    }

    /// Matrix of constant terms as residues.
    pub fn constant_term(&self) -> Vec<Vec<BigUint>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j).coeffs()[0].clone()).collect()).collect()
    }

    fn minor(&self, row: usize, col: usize) -> SeriesMatrix {
        let mut entries = Vec::with_capacity((self.n - 1) * (self.n - 1));
        for i in (0..self.n).filter(|&i| i != row) {
            for j in (0..self.n).filter(|&j| j != col) {
                entries.push(self.get(i, j).clone());
            }
        }
        SeriesMatrix { n: self.n - 1, entries }
    }

    /// Determinant by cofactor expansion along the first row.
    pub fn determinant(&self) -> TruncSeries {
        match self.n {
            1 => self.entries[0].clone(),
            2 => self.get(0, 0).mul(self.get(1, 1)).sub(&self.get(0, 1).mul(self.get(1, 0))),
            n => {
                let mut acc = TruncSeries::zero(self.ring(), self.order());
                for j in 0..n {
                    let term = self.get(0, j).mul(&self.minor(0, j).determinant());
                    acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
                }
                acc
            }
        }
    }

    pub fn adjugate(&self) -> SeriesMatrix {
        let n = self.n;
        if n == 1 {
            return SeriesMatrix::identity(self.ring(), 1, self.order());
        }
        SeriesMatrix::from_fn(n, |i, j| {
            let c = self.minor(j, i).determinant();
            if (i + j) % 2 == 0 {
                c
            } else {
                c.neg()
            }
        })
    }

    /// Inverse through `adj(A) / det(A)`.
    ///
    /// When `det A(0)` has valuation `d > 0` the inverse is not integral; it
    /// is returned as `p^(-d) * X` with `X` known modulo `p^(W-d)`.
    pub fn invert(&self) -> Result<ScaledMatrix> {
        let det = self.determinant();
        let prec = self.ring().prec();
        let d = match det.coeff(0).valuation() {
            Valuation::AtLeast(_) => return Err(Error::SingularConstantTerm { precision: prec }),
            Valuation::Finite(d) => d,
        };
        if d >= prec {
            return Err(Error::PrecisionExhausted(format!("determinant valuation {d} at working exponent {prec}")));
        }
        let unit = det.div_p_pow(d).map_err(|_| {
            Error::PrecisionExhausted(format!(
                "determinant series is not divisible by p^{d}; the inverse has unbounded denominators"
            ))
        })?;
        let unit_inv = unit.invert()?;
        let ring = unit_inv.ring().clone();
        let adj = self.adjugate().map(|e| e.reduce_to(&ring));
        let matrix = adj.map(|e| e.mul(&unit_inv));
        Ok(ScaledMatrix { matrix, shift: d, loss: d })
    }

    pub fn substitute_power(&self, e: usize) -> SeriesMatrix {
        self.map(|s| s.substitute_power(e))
    }

    pub fn substitute_scale(&self, c: &PadicScalar) -> SeriesMatrix {
        self.map(|s| s.substitute_scale(c))
    }

    pub fn cancel_pole(&self, m: usize) -> SeriesMatrix {
        self.map(|s| s.cancel_pole(m))
    }

    pub fn reduce_to(&self, ring: &Ring) -> SeriesMatrix {
        self.map(|s| s.reduce_to(ring))
    }

    pub fn truncate(&self, order: usize) -> SeriesMatrix {
        self.map(|s| s.truncate(order))
    }

    pub fn min_valuation(&self) -> Valuation {
        self.entries.iter().map(|e| e.min_valuation()).min().expect("nonempty")
    }

    /// Left multiplication by a constant matrix of residues.
    pub fn left_mul_constant(&self, c: &[Vec<BigUint>]) -> SeriesMatrix {
        let n = self.n;
        SeriesMatrix::from_fn(n, |i, j| {
            let mut acc = TruncSeries::zero(self.ring(), self.order());
            for k in 0..n {
                if !c[i][k].is_zero() {
                    acc = acc.add(&self.get(k, j).scale_residue(&c[i][k]));
                }
            }
            acc
        })
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            (0..self.n).map(|i| Value::Array((0..self.n).map(|j| self.get(i, j).to_json()).collect())).collect(),
        )
    }
}

impl fmt::Debug for SeriesMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            for j in 0..self.n {
                writeln!(f, "[{i},{j}] {}", self.get(i, j))?;
            }
        }
        Ok(())
    }
}

/// `p^(-shift) * matrix`, where the top `loss` digits of the working
/// precision were consumed to produce `matrix`.
#[derive(Clone, Debug)]
pub struct ScaledMatrix {
    pub matrix: SeriesMatrix,
    pub shift: u32,
    pub loss: u32,
}

/// Analytic part of a fundamental matrix, with column `j` stored as
/// `p^(column_shift[j]) * Psi'(z)[.., j]` so that all entries are integral.
#[derive(Clone, Debug)]
pub struct Frame {
    pub entries: SeriesMatrix,
    pub column_shift: Vec<u32>,
    /// `Psi'(0)`, exact modulo `p^W`.
    pub at_zero: Vec<Vec<BigUint>>,
}

impl Frame {
    pub fn n(&self) -> usize {
        self.entries.n()
    }

    pub fn order(&self) -> usize {
        self.entries.order()
    }

    pub fn ring(&self) -> &Ring {
        self.entries.ring()
    }

    /// `z -> z^e`, truncating at `order`.
    pub fn substitute_power_to(&self, e: usize, order: usize) -> Frame {
        Frame {
            entries: self.entries.map(|s| s.substitute_power_to(e, order)),
            column_shift: self.column_shift.clone(),
            at_zero: self.at_zero.clone(),
        }
    }

    /// The whole matrix with one common shift `max_j column_shift[j]`.
    pub fn to_scaled(&self) -> ScaledMatrix {
        let shift = self.column_shift.iter().copied().max().unwrap_or(0);
        let cs = &self.column_shift;
        let n = self.n();
        let matrix = SeriesMatrix::from_fn(n, |i, j| self.entries.get(i, j).mul_p_pow(shift - cs[j]));
        ScaledMatrix { matrix, shift, loss: 0 }
    }
}

/// Determinant and adjugate of a constant matrix given by residues.
pub fn constant_det_adj(ring: &Ring, m: &[Vec<BigUint>]) -> (BigUint, Vec<Vec<BigUint>>) {
    let sm = SeriesMatrix::constant(ring, m, 0);
    let det = sm.determinant().coeffs()[0].clone();
    let adj = sm.adjugate().constant_term();
    (det, adj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::PadicRing;

    fn s(ring: &Ring, c: &[i64], m: usize) -> TruncSeries {
        TruncSeries::from_i64s(ring, c, m)
    }

    #[test]
    fn products() {
        let ring = PadicRing::new(3, 5).unwrap();
        assert_eq!(s(&ring, &[1, 1], 4).mul(&s(&ring, &[1, -1], 4)), s(&ring, &[1, 0, -1], 4));
        let ring1 = PadicRing::new(3, 1).unwrap();
        let f = s(&ring1, &[1, -1], 3).mul(&s(&ring1, &[1, -4], 3)).mul(&s(&ring1, &[1, -16], 3));
        assert_eq!(f, s(&ring1, &[1, 0, 0, -1], 3));
    }

    #[test]
    fn inversion() {
        let ring = PadicRing::new(3, 5).unwrap();
        let inv = s(&ring, &[1, -1], 7).invert().unwrap();
        assert_eq!(inv, s(&ring, &[1; 8], 7));
        let ring9 = PadicRing::new(3, 2).unwrap();
        assert_eq!(s(&ring9, &[1, 3], 2).invert().unwrap(), s(&ring9, &[1, 6], 2));
        assert!(matches!(s(&ring, &[3, 1], 3).invert(), Err(Error::NonUnitConstantTerm)));
    }

    #[test]
    fn substitutions() {
        let ring = PadicRing::new(3, 2).unwrap();
        let geo = s(&ring, &[1; 4], 3);
        assert_eq!(geo.substitute_scale(&ring.from_i64(4)), s(&ring, &[1, 4, 7, 1], 3));
        let ring = PadicRing::new(3, 4).unwrap();
        let geo = s(&ring, &[1; 10], 9);
        assert_eq!(geo.substitute_power(3), s(&ring, &[1, 0, 0, 1, 0, 0, 1, 0, 0, 1], 9));
        assert_eq!(s(&ring, &[1, 1], 3).substitute_power(3), s(&ring, &[1, 0, 0, 1], 3));
    }

    #[test]
    fn pole_cancellation() {
        let ring = PadicRing::new(3, 4).unwrap();
        let geo = s(&ring, &[1; 10], 9);
        assert_eq!(geo.cancel_pole(1), s(&ring, &[1], 9));
        assert_eq!(geo.cancel_pole(0), geo);
    }

    #[test]
    fn matrix_inverse_diagonal() {
        let ring = PadicRing::new(3, 4).unwrap();
        let m = 5;
        let a = SeriesMatrix::from_rows(vec![
            vec![s(&ring, &[1], m), s(&ring, &[0], m)],
            vec![s(&ring, &[0], m), s(&ring, &[1, 1], m)],
        ]);
        let inv = a.invert().unwrap();
        assert_eq!(inv.shift, 0);
        assert_eq!(inv.matrix.get(1, 1), &s(&ring, &[1, -1, 1, -1, 1, -1], m));
        assert_eq!(SeriesMatrix::identity(&ring, 3, 2).invert().unwrap().matrix, SeriesMatrix::identity(&ring, 3, 2));
    }

    #[test]
    fn vandermonde_inverse_loses_difference_valuation() {
        let ring = PadicRing::new(3, 8).unwrap();
        // u1 - u2 = 9 * 2
        let (u1, u2) = (ring.from_i64(4 + 18), ring.from_i64(4));
        let one = ring.one();
        let m = 3;
        let a = SeriesMatrix::from_rows(vec![
            vec![TruncSeries::constant(&one, m), TruncSeries::constant(&one, m)],
            vec![TruncSeries::constant(&u1, m), TruncSeries::constant(&u2, m)],
        ]);
        let inv = a.invert().unwrap();
        assert_eq!(inv.shift, 2);
        assert_eq!(inv.matrix.ring().prec(), 6);
        let lower = a.reduce_to(inv.matrix.ring());
        let prod = lower.mul(&inv.matrix);
        let p2 = BigUint::from(9u32);
        assert_eq!(prod, SeriesMatrix::identity(inv.matrix.ring(), 2, m).scale_residue(&p2));
    }

    #[test]
    fn display() {
        let ring = PadicRing::new(3, 2).unwrap();
        assert_eq!(s(&ring, &[1, 0, 6, 1], 3).to_string(), "1 + 6*z^2 + z^3 + O(z^4)");
    }
}
