//! The Bessel-type operator `z - D^n` and its equivariant deformation,
//! handled in the truncated ring `Q[x]/(x^n)`.
//!
//! `g(x, z) = sum_d (c z)^d / ((x+1)_d)^n`, with `c = pi^n`, and the frame
//! rows are `(x + D)^k g` in the basis `1, x, ..., x^(n-1)`, so the frame is
//! the identity at `z = 0`.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::exact::{dwork_pi_power, int, xpoly, RationalFrame};
use super::{biguint_pow, family_from_rational, verdict, Comparison};
use crate::error::{Error, Result};
use crate::frobq::{search_digits, SearchConfig, SearchResult, Verdict};
use crate::padic::{PadicRing, PadicScalar};
use crate::qspecial::gamma_p_taylor;

/// `g` as polynomials in `x` per power of `z`, and the frame built from it.
#[derive(Clone, Debug)]
pub struct NilpotentFrame {
    pub n: usize,
    /// `g[d]` holds the coefficients of `x^0 .. x^(n-1)` at `z^d`.
    pub g: Vec<Vec<BigRational>>,
    pub theta: RationalFrame,
}

fn g_coeffs(n: usize, order: usize, scale: &BigRational) -> Vec<Vec<BigRational>> {
    let mut out = Vec::with_capacity(order + 1);
    let mut cur = xpoly::linear(BigRational::one(), n);
    cur[1..].iter_mut().for_each(|c| *c = BigRational::zero());
    out.push(cur.clone());
    for d in 1..=order {
        let inv = xpoly::inv(&xpoly::linear(int(d as i64), n)).expect("d is nonzero");
        for _ in 0..n {
            cur = xpoly::mul(&cur, &inv);
        }
        cur.iter_mut().for_each(|c| *c *= scale);
        out.push(cur.clone());
    }
    out
}

/// `(x + D)` on a series of polynomials.
fn x_plus_d(g: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
    g.iter()
        .enumerate()
        .map(|(d, poly)| {
            let shifted = xpoly::shift(poly);
            shifted.iter().zip(poly).map(|(s, c)| s + c * int(d as i64)).collect()
        })
        .collect()
}

fn frame_with_scale(n: usize, order: usize, scale: &BigRational) -> NilpotentFrame {
    let g = g_coeffs(n, order, scale);
    let mut rows = Vec::with_capacity(n);
    let mut cur = g.clone();
    for _ in 0..n {
        let row: Vec<Vec<BigRational>> = (0..n).map(|c| cur.iter().map(|poly| poly[c].clone()).collect()).collect();
        rows.push(row);
        cur = x_plus_d(&cur);
    }
    let at_zero = (0..n).map(|i| (0..n).map(|j| if i == j { int(1) } else { int(0) }).collect()).collect();
    NilpotentFrame { n, g, theta: RationalFrame { rows, at_zero } }
}

/// The frame with `z` rescaled by `pi^n`; needs `(p - 1) | n`.
pub fn bessel_frame(p: u64, n: usize, order: usize) -> Result<NilpotentFrame> {
    if n == 0 {
        return Err(Error::InvalidParameter("rank must be positive".into()));
    }
    Ok(frame_with_scale(n, order, &dwork_pi_power(p, n)?))
}

/// First degree where `(x + D)^n g - z g` fails to vanish for the unscaled `g`.
pub fn bessel_operator_residual(n: usize, order: usize) -> Option<usize> {
    let f = frame_with_scale(n, order, &BigRational::one());
    let mut left = f.g.clone();
    for _ in 0..n {
        left = x_plus_d(&left);
    }
    (0..=order).find(|&d| {
        let right = if d == 0 { vec![BigRational::zero(); n] } else { f.g[d - 1].clone() };
        left[d] != right
    })
}

/// Taylor coefficients of `Gamma_p(x)^n` (or `Gamma_p(-x)^n`) modulo `p^s`.
fn gamma_power_taylor(p: u64, n: usize, s: u32, reflected: bool) -> Result<Vec<PadicScalar>> {
    let ring = PadicRing::new(p, s)?;
    if n == 1 {
        return Ok(vec![ring.one()]);
    }
    let mut base = gamma_p_taylor(p, n - 1, s)?;
    if reflected {
        for (k, c) in base.iter_mut().enumerate() {
            if k % 2 == 1 {
                *c = -&*c;
            }
        }
    }
    let mut acc = vec![ring.zero(); n];
    acc[0] = ring.one();
    for _ in 0..n {
        let mut next = vec![ring.zero(); n];
        for i in 0..n {
            for j in 0..n - i {
                next[i + j] = &next[i + j] + &(&acc[i] * &base[j]);
            }
        }
        acc = next;
    }
    Ok(acc)
}

fn constant_matrix(p: u64, n: usize, s: u32, reflected: bool) -> Result<Vec<Vec<PadicScalar>>> {
    let c = gamma_power_taylor(p, n, s, reflected)?;
    let ring = PadicRing::new(p, s)?;
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| if j < i { ring.zero() } else { c[j - i].mul_p_pow(j as u32) })
                .collect()
        })
        .collect())
}

/// `Gamma_p(x)^n p^deg` in the basis `1, x, ..., x^(n-1)` modulo `p^s`:
/// upper-triangular Toeplitz in the Taylor coefficients, columns scaled by `p^j`.
pub fn bessel_constant_matrix(p: u64, n: usize, s: u32) -> Result<Vec<Vec<PadicScalar>>> {
    constant_matrix(p, n, s, false)
}

/// As [`bessel_constant_matrix`] with `Gamma_p(-x)^n`.
pub fn bessel_constant_matrix_reflected(p: u64, n: usize, s: u32) -> Result<Vec<Vec<PadicScalar>>> {
    constant_matrix(p, n, s, true)
}

#[derive(Clone, Debug, Serialize)]
pub struct BesselReport {
    pub n: usize,
    /// Digits of `lambda_1 .. lambda_(n-1)` in `Lambda_{i,i+k} = lambda_k p^i`.
    pub search: SearchResult,
    pub recheck_digits: Option<Vec<Vec<u32>>>,
    pub stable: bool,
    pub comparisons: Vec<Comparison>,
    pub verdict: Verdict,
}

fn search_once(p: u64, n: usize, cfg: &SearchConfig) -> Result<SearchResult> {
    cfg.validate()?;
    let frame = bessel_frame(p, n, cfg.order)?;
    let source = bessel_frame(p, n, cfg.order / p as usize)?.theta.substitute_power_to(p as usize, cfg.order);
    let positions: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let fam = family_from_rational(p, &frame.theta, &source, cfg.precision(), &positions)?;
    let fixed: Vec<((usize, usize), BigUint)> = (0..n).map(|i| ((i, i), biguint_pow(p, i as u32))).collect();
    let unknowns: Vec<Vec<((usize, usize), BigUint)>> =
        (1..n).map(|k| (0..n - k).map(|i| ((i, i + k), biguint_pow(p, i as u32))).collect()).collect();
    let affine = fam.affine(&fixed, &unknowns);
    let search = search_digits(&affine, p, cfg)?;
    Ok(SearchResult { search, order: cfg.order, working_exponent: cfg.precision(), loss: fam.audit().clone() })
}

/// Search for the nilpotent part of `Lambda` with diagonal `(1, p, ..., p^(n-1))`.
pub fn bessel_gamma_search(p: u64, n: usize, cfg: &SearchConfig) -> Result<BesselReport> {
    if n < 2 {
        return Err(Error::InvalidParameter("the nilpotent search needs n >= 2".into()));
    }
    let search = search_once(p, n, cfg)?;
    let recheck_digits = if cfg.recheck { Some(search_once(p, n, &cfg.widened())?.search.digits) } else { None };
    let stable = recheck_digits.as_ref().is_none_or(|d| *d == search.search.digits);
    let s = search.search.certified_exponent;
    let found = &search.search.digits;
    let mut comparisons = Vec::new();
    if n == 2 {
        let g1 = gamma_p_taylor(p, 1, s)?.swap_remove(1);
        comparisons.push(Comparison::new("p Gamma_p'(0)", &[g1.mul_p_pow(1)], s, found)?);
    }
    let first_row = |m: Vec<Vec<PadicScalar>>| m[0][1..].to_vec();
    comparisons.push(Comparison::new(
        "Gamma_p(x)^n p^deg",
        &first_row(bessel_constant_matrix(p, n, s)?),
        s,
        found,
    )?);
    comparisons.push(Comparison::new(
        "Gamma_p(-x)^n p^deg",
        &first_row(bessel_constant_matrix_reflected(p, n, s)?),
        s,
        found,
    )?);
    let verdict = verdict(stable, &comparisons);
    Ok(BesselReport { n, search, recheck_digits, stable, comparisons, verdict })
}
