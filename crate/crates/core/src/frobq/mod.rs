//! Frobenius intertwiners of the q-hypergeometric system.
//!
//! `U(z) = Psi(pa, ph, q, z) Lambda Psi(a, h, q^p, z^p)^{-1}` with both
//! frames normalized to the identity at `z = 0`, so that `U(0) = Lambda`.

pub mod family;
pub mod search;

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::One;
use serde::Serialize;

pub use family::{AffineFamily, CertifiedMatrix, IntertwinerFamily, LossAudit, NonIntegral, Position};
pub use search::{rationality_test, search_digits, test_certified, DigitSearch, Rationality, SearchConfig, StageRecord, Survivor};

use crate::error::{Error, Result};
use crate::hyperq::QHParams;
use crate::padic::{PRational, PadicScalar};
use crate::qseries::Frame;

/// Target and source frames at working exponent `prec`.
pub fn frames(params: &QHParams, order: usize, prec: u32) -> Result<(Frame, Frame)> {
    let p = params.ctx().p() as usize;
    let base = params.with_prec(prec);
    let target = base.frobenius_target().analytic_fundamental(order)?;
    let source = base.frobenius_source().analytic_fundamental(order / p)?.substitute_power_to(p, order);
    Ok((target, source))
}

fn diagonal(n: usize) -> Vec<Position> {
    (0..n).map(|i| (i, i)).collect()
}

/// The diagonal intertwiner family, certified modulo `p^prec`.
pub fn intertwiner_family(params: &QHParams, order: usize, prec: u32) -> Result<IntertwinerFamily> {
    IntertwinerFamily::build_certified(prec, &diagonal(params.n()), |w| frames(params, order, w))
}

/// `U(z)` for a given diagonal `Lambda`.
pub fn intertwiner_series(
    params: &QHParams,
    lambda: &[BigUint],
    order: usize,
    prec: u32,
) -> Result<CertifiedMatrix> {
    if lambda.len() != params.n() {
        return Err(Error::InvalidParameter("Lambda must have one entry per parameter".into()));
    }
    let fam = intertwiner_family(params, order, prec)?;
    let terms: Vec<(Position, BigUint)> = lambda.iter().enumerate().map(|(i, c)| ((i, i), c.clone())).collect();
    Ok(fam.evaluate(&terms))
}

/// `Lambda = diag(c_1, ..., c_{n-1}, 1)` with the `c_i` unknown.
pub fn diagonal_affine(fam: &IntertwinerFamily, n: usize) -> AffineFamily {
    let fixed = vec![((n - 1, n - 1), BigUint::one())];
    let unknowns: Vec<Vec<(Position, BigUint)>> = (0..n - 1).map(|i| vec![((i, i), BigUint::one())]).collect();
    fam.affine(&fixed, &unknowns)
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchResult {
    #[serde(flatten)]
    pub search: DigitSearch,
    pub order: usize,
    pub working_exponent: u32,
    pub loss: LossAudit,
}

/// Digits of `c_i` in `Lambda = diag(c_1, ..., c_{n-1}, 1)`.
pub fn digit_search(params: &QHParams, cfg: &SearchConfig) -> Result<SearchResult> {
    cfg.validate()?;
    if params.n() < 2 {
        return Err(Error::InvalidParameter("the search needs rank at least 2".into()));
    }
    let fam = intertwiner_family(params, cfg.order, cfg.precision())?;
    let affine = diagonal_affine(&fam, params.n());
    let search = search_digits(&affine, params.ctx().p(), cfg)?;
    Ok(SearchResult { search, order: cfg.order, working_exponent: cfg.precision(), loss: fam.audit().clone() })
}

/// `U(0)_{ii} / U(0)_{nn}` where
/// `U(0)_{ii} = prod_j G(p(a_i - a_j + h)) / (G(p(a_i - a_j)) G(ph))` and `G = Gamma_{p,q}`.
pub fn closed_form_constant(params: &QHParams, s: u32) -> Result<Vec<PadicScalar>> {
    let ctx = params.ctx();
    let p = ctx.p() as i64;
    let n = params.n();
    let a = params.a();
    let h = params.h();
    let mut cache: BTreeMap<PRational, PadicScalar> = BTreeMap::new();
    let mut gamma = |x: PRational| -> Result<PadicScalar> {
        if let Some(v) = cache.get(&x) {
            return Ok(v.clone());
        }
        let v = ctx.gamma_pq(&x, s)?;
        cache.insert(x, v.clone());
        Ok(v)
    };
    let mut diag = Vec::with_capacity(n);
    for i in 0..n {
        let mut num = None::<PadicScalar>;
        let mut den = None::<PadicScalar>;
        for j in 0..n {
            let c = &a[i] - &a[j];
            let top = gamma((&c + h).scale(p))?;
            let bottom = &gamma(c.scale(p))? * &gamma(h.scale(p))?;
            num = Some(match num {
                None => top,
                Some(x) => &x * &top,
            });
            den = Some(match den {
                None => bottom,
                Some(x) => &x * &bottom,
            });
        }
        let num = num.expect("n >= 1");
        let den = den.expect("n >= 1");
        diag.push(&num * &den.invert_unit()?);
    }
    let last_inv = diag[n - 1].invert_unit()?;
    Ok(diag.iter().map(|d| d * &last_inv).collect())
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Verified,
    Mismatch,
    Unstable,
}

#[derive(Clone, Debug, Serialize)]
pub struct TheoremReport {
    pub search: SearchResult,
    pub recheck_digits: Option<Vec<Vec<u32>>>,
    pub closed_form_digits: Vec<Vec<u32>>,
    pub closed_form_residues: Vec<String>,
    pub stable: bool,
    pub matches: bool,
    pub verdict: Verdict,
}

/// Search, closed form, and a stability re-run at `(M+20, W+2)`.
pub fn verify_main_theorem(params: &QHParams, cfg: &SearchConfig) -> Result<TheoremReport> {
    let search = digit_search(params, cfg)?;
    let s = search.search.certified_exponent;
    let recheck_digits = if cfg.recheck {
        Some(digit_search(params, &cfg.widened())?.search.digits)
    } else {
        None
    };
    let closed = closed_form_constant(params, s)?;
    let closed_form_digits: Vec<Vec<u32>> =
        closed[..params.n() - 1].iter().map(|c| c.digits(s)).collect::<Result<_>>()?;
    let closed_form_residues = closed[..params.n() - 1].iter().map(|c| c.residue().to_string()).collect();
    let stable = recheck_digits.as_ref().is_none_or(|d| *d == search.search.digits);
    let matches = closed_form_digits == search.search.digits;
    let verdict = if !stable {
        Verdict::Unstable
    } else if matches {
        Verdict::Verified
    } else {
        Verdict::Mismatch
    };
    Ok(TheoremReport { search, recheck_digits, closed_form_digits, closed_form_residues, stable, matches, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qspecial::QContext;

    fn params(h: &str, prec: u32) -> QHParams {
        let ctx = QContext::new(3, PRational::int(3), prec).unwrap();
        QHParams::new(ctx, vec!["1/5".parse().unwrap(), PRational::zero()], h.parse().unwrap()).unwrap()
    }

    #[test]
    fn trivial_deformation_gives_identity() {
        let u = intertwiner_series(&params("0", 8), &[BigUint::one(), BigUint::one()], 20, 6).unwrap();
        let m = u.reduce(6).unwrap().unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let c = m.get(i, j).coeffs();
                assert_eq!(c[0], if i == j { BigUint::one() } else { BigUint::from(0u32) });
                assert!(c[1..].iter().all(num_traits::Zero::is_zero), "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn vandermonde_loss_matches_log_valuation() {
        // v_3(4^(3/5) - 1) = v_3(3/5) + v_3(log 4) = 2
        let fam = intertwiner_family(&params("1/2", 12), 20, 6).unwrap();
        assert_eq!(fam.audit().target_vandermonde_valuation, 2);
        assert!(fam.certified_exponent() >= 6);
    }

    #[test]
    fn closed_form_last_entry_is_one() {
        let c = closed_form_constant(&params("1/2", 12), 5).unwrap();
        assert_eq!(c[1].residue(), &BigUint::one());
        assert!(c[0].is_unit());
    }

    #[test]
    fn lambda_length_checked() {
        assert!(intertwiner_series(&params("1/2", 8), &[BigUint::one()], 10, 4).is_err());
    }
}
