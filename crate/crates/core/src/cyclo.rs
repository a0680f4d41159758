//! Exact arithmetic in `Z[q] / Phi_{p^s}(q)` and the root-of-unity identities
//! for Pochhammer symbols and q-numbers.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::padic::is_prime;

/// Integer polynomial, lowest degree first, without trailing zeros.
pub type IntPoly = Vec<BigInt>;

fn trim(mut v: IntPoly) -> IntPoly {
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
    v
}

pub fn poly_mul(a: &[BigInt], b: &[BigInt]) -> IntPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

pub fn poly_add(a: &[BigInt], b: &[BigInt]) -> IntPoly {
    let mut out = vec![BigInt::zero(); a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] += y;
    }
    trim(out)
}

pub fn poly_sub(a: &[BigInt], b: &[BigInt]) -> IntPoly {
    let mut out = vec![BigInt::zero(); a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] -= y;
    }
    trim(out)
}

/// `c q^k`.
pub fn monomial(c: i64, k: usize) -> IntPoly {
    let mut v = vec![BigInt::zero(); k + 1];
    v[k] = BigInt::from(c);
    trim(v)
}

/// `f(q^e)`.
pub fn poly_compose_power(f: &[BigInt], e: usize) -> IntPoly {
    if f.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); (f.len() - 1) * e + 1];
    for (k, c) in f.iter().enumerate() {
        out[k * e] = c.clone();
    }
    out
}

/// `Phi_{p^s}(q) = sum_{k<p} q^{k p^(s-1)}`.
pub fn cyclotomic(p: u64, s: u32) -> IntPoly {
    let step = (p as usize).pow(s - 1);
    poly_compose_power(&vec![BigInt::one(); p as usize], step)
}

/// `[m]_q = 1 + q + ... + q^(m-1)`.
pub fn q_number_poly(m: usize) -> IntPoly {
    vec![BigInt::one(); m]
}

/// An element of `Z[q] / Phi_{p^s}(q)` in canonical form (degree below `phi(p^s)`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycloPoly {
    p: u64,
    s: u32,
    coeffs: IntPoly,
}

impl CycloPoly {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    pub fn mul(&self, other: &CycloPoly) -> CycloPoly {
        cyclo_reduce(self.p, self.s, &poly_mul(&self.coeffs, &other.coeffs))
    }

    pub fn sub(&self, other: &CycloPoly) -> CycloPoly {
        cyclo_reduce(self.p, self.s, &poly_sub(&self.coeffs, &other.coeffs))
    }
}

/// Remainder of `f` modulo the monic `Phi_{p^s}`.
pub fn cyclo_reduce(p: u64, s: u32, f: &[BigInt]) -> CycloPoly {
    let phi = cyclotomic(p, s);
    let deg = phi.len() - 1;
    let mut r = trim(f.to_vec());
    while r.len() > deg {
        let top = r.len() - 1;
        let c = r[top].clone();
        let off = top - deg;
        for (k, x) in phi.iter().enumerate() {
            r[off + k] -= &c * x;
        }
        r = trim(r);
    }
    CycloPoly { p, s, coeffs: r }
}

/// Polynomial in `z` over `Z[q]/Phi`, lowest degree first.
type ZPoly = Vec<CycloPoly>;

fn zpoly_mul(a: &ZPoly, b: &ZPoly, zero: &CycloPoly) -> ZPoly {
    let mut out = vec![zero.clone(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            let t = x.mul(y);
            out[i + j] = cyclo_reduce(zero.p, zero.s, &poly_add(&out[i + j].coeffs, &t.coeffs));
        }
    }
    out
}

/// `prod_{m<count} (1 - z^e q^(m f))`.
fn pochhammer_z(p: u64, s: u32, e: usize, f: usize, count: usize) -> ZPoly {
    let zero = cyclo_reduce(p, s, &[]);
    let one = cyclo_reduce(p, s, &[BigInt::one()]);
    let mut acc: ZPoly = vec![one];
    for m in 0..count {
        let mut factor = vec![zero.clone(); e + 1];
        factor[0] = cyclo_reduce(p, s, &[BigInt::one()]);
        factor[e] = cyclo_reduce(p, s, &monomial(-1, m * f));
        acc = zpoly_mul(&acc, &factor, &zero);
    }
    acc
}

fn is_one_minus_z_pow(poly: &ZPoly, k: usize) -> bool {
    poly.iter().enumerate().all(|(d, c)| match d {
        0 => c.is_one(),
        d if d == k => c.coeffs == vec![BigInt::from(-1)],
        _ => c.is_zero(),
    })
}

fn check_level(p: u64, s: u32) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::InvalidParameter(format!("{p} is not prime")));
    }
    if s == 0 {
        return Err(Error::InvalidParameter("level s must be at least 1".into()));
    }
    Ok(())
}

/// `(z, q)_{p^s} = (z^p, q^p)_{p^(s-1)} = 1 - z^{p^s}` over `Z[q]/Phi_{p^s}`.
pub fn pochhammer_at_root(p: u64, s: u32) -> Result<bool> {
    check_level(p, s)?;
    let pu = p as usize;
    let n = pu.pow(s);
    let full = pochhammer_z(p, s, 1, 1, n);
    let frob = pochhammer_z(p, s, pu, pu, n / pu);
    Ok(is_one_minus_z_pow(&full, n) && is_one_minus_z_pow(&frob, n) && full == frob)
}

/// `[p^s]_q = [p]_q [p]_{q^p} ... [p]_{q^(p^(s-1))}` as integer polynomials.
pub fn qnumber_factorization(p: u64, s: u32) -> Result<bool> {
    check_level(p, s)?;
    let pu = p as usize;
    let base = q_number_poly(pu);
    let mut prod = vec![BigInt::one()];
    for i in 0..s {
        prod = poly_mul(&prod, &poly_compose_power(&base, pu.pow(i)));
    }
    Ok(prod == q_number_poly(pu.pow(s)))
}

/// `Phi_{p^s}(q) (q^{p^(s-1)} - 1) = q^{p^s} - 1`.
pub fn cyclotomic_product_identity(p: u64, s: u32) -> Result<bool> {
    check_level(p, s)?;
    let pu = p as usize;
    let left = poly_mul(&cyclotomic(p, s), &poly_sub(&monomial(1, pu.pow(s - 1)), &[BigInt::one()]));
    Ok(left == poly_sub(&monomial(1, pu.pow(s)), &[BigInt::one()]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BracketRatio {
    Zero,
    One,
    Other,
}

/// `[q^i, q]_{p^s} / [1, q]_{p^s}` at a primitive `p^s`-th root of unity,
/// where `[x, q]_d = (1 - q x) ... (1 - q^(d-1) x)`.
pub fn bracket_ratio_at_root(p: u64, s: u32, i: i64) -> Result<BracketRatio> {
    check_level(p, s)?;
    let n = (p as usize).pow(s);
    let shift = i.rem_euclid(n as i64) as usize;
    let product = |off: usize| -> CycloPoly {
        let mut acc = cyclo_reduce(p, s, &[BigInt::one()]);
        for m in 1..n {
            let f = poly_sub(&[BigInt::one()], &monomial(1, (m + off) % n));
            acc = acc.mul(&cyclo_reduce(p, s, &f));
        }
        acc
    };
    let num = product(shift);
    let den = product(0);
    Ok(if num.is_zero() {
        BracketRatio::Zero
    } else if num == den {
        BracketRatio::One
    } else {
        BracketRatio::Other
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BracketCheck {
    pub i: i64,
    pub ratio: BracketRatio,
    /// `1` when `p^s | i`, otherwise `0`.
    pub expected: BracketRatio,
}

#[derive(Clone, Debug, Serialize)]
pub struct CycloReport {
    pub p: u64,
    pub s: u32,
    pub cyclotomic_product: bool,
    pub pochhammer_at_root: bool,
    pub qnumber_factorization: bool,
    pub bracket_ratios: Vec<BracketCheck>,
    pub bracket_ratios_hold: bool,
    pub all_hold: bool,
}

/// Every identity at level `s`, with bracket ratios for `i` in `range`.
pub fn cyclo_report(p: u64, s: u32, range: std::ops::RangeInclusive<i64>) -> Result<CycloReport> {
    let n = (p as i64).pow(s);
    let bracket_ratios = range
        .map(|i| {
            let expected = if i % n == 0 { BracketRatio::One } else { BracketRatio::Zero };
            Ok(BracketCheck { i, ratio: bracket_ratio_at_root(p, s, i)?, expected })
        })
        .collect::<Result<Vec<_>>>()?;
    let bracket_ratios_hold = bracket_ratios.iter().all(|b| b.ratio == b.expected);
    let cyclotomic_product = cyclotomic_product_identity(p, s)?;
    let pochhammer_at_root = pochhammer_at_root(p, s)?;
    let qnumber_factorization = qnumber_factorization(p, s)?;
    let all_hold = cyclotomic_product && pochhammer_at_root && qnumber_factorization && bracket_ratios_hold;
    Ok(CycloReport {
        p,
        s,
        cyclotomic_product,
        pochhammer_at_root,
        qnumber_factorization,
        bracket_ratios,
        bracket_ratios_hold,
        all_hold,
    })
}
