//! The `q -> 1` limit: classical hypergeometric, projective-space and
//! Bessel-type differential systems with their Dwork Frobenius structures.
//!
//! Frames are computed exactly over `Q` and lifted to `Z/p^W` only when a
//! working exponent is chosen.  Where the Frobenius needs Dwork's `pi`
//! (`pi^(p-1) = -p`) the variable is rescaled, `z -> pi^n z`, which keeps
//! everything rational when `(p - 1) | n`.

pub mod bessel;
pub mod exact;

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

pub use bessel::{
    bessel_constant_matrix, bessel_constant_matrix_reflected, bessel_frame, bessel_gamma_search,
    bessel_operator_residual, BesselReport, NilpotentFrame,
};
use exact::{dwork_pi_power, first_nonzero, int, rat, theta, times_z, RSeries, RationalFrame};

use crate::error::{Error, Result};
use crate::frobq::{diagonal_affine, search_digits, IntertwinerFamily, SearchConfig, SearchResult, Verdict};
use crate::padic::{is_prime, PRational, PadicScalar};
use crate::qseries::{Frame, ScaledSeries};
use crate::qspecial::gamma_p;

/// Parameters of `prod_j (D - a_j) - z prod_j (D - a_j + h)`, or of
/// `prod_j (D - a_j) - z` when `h` is absent.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ODEParams {
    p: u64,
    a: Vec<PRational>,
    h: Option<PRational>,
}

impl ODEParams {
    pub fn new(p: u64, a: Vec<PRational>, h: Option<PRational>) -> Result<ODEParams> {
        if !is_prime(p) {
            return Err(Error::InvalidParameter(format!("{p} is not prime")));
        }
        if a.is_empty() {
            return Err(Error::InvalidParameter("at least one exponent a_i is required".into()));
        }
        for x in a.iter().chain(h.iter()) {
            if !x.is_p_integral(p) {
                return Err(Error::DenominatorNotUnit { value: x.to_string(), p });
            }
        }
        for i in 0..a.len() {
            for j in 0..i {
                if a[i] == a[j] {
                    return Err(Error::InvalidParameter(format!("a_{} and a_{} coincide", j + 1, i + 1)));
                }
            }
        }
        Ok(ODEParams { p, a, h })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[PRational] {
        &self.a
    }

    pub fn h(&self) -> Option<&PRational> {
        self.h.as_ref()
    }

    pub fn is_projective(&self) -> bool {
        self.h.is_none()
    }

    /// `(pa, ph)`.
    pub fn frobenius_target(&self) -> ODEParams {
        let p = self.p as i64;
        ODEParams {
            p: self.p,
            a: self.a.iter().map(|x| x.scale(p)).collect(),
            h: self.h.as_ref().map(|x| x.scale(p)),
        }
    }

    /// Rescaling `z -> c z` applied to the solutions.
    fn variable_scale(&self) -> Result<BigRational> {
        if self.is_projective() {
            dwork_pi_power(self.p, self.n())
        } else {
            Ok(BigRational::one())
        }
    }

    /// Coefficients of the solution at exponent `a_i` with the `z^{a_i}`
    /// prefactor stripped, before any rescaling of `z`.
    pub fn solution_coeffs(&self, i: usize, order: usize) -> Result<RSeries> {
        self.solution_coeffs_scaled(i, order, &BigRational::one())
    }

    fn solution_coeffs_scaled(&self, i: usize, order: usize, scale: &BigRational) -> Result<RSeries> {
        let n = self.n();
        let diffs: Vec<BigRational> = (0..n).map(|j| rat(&self.a[i]) - rat(&self.a[j])).collect();
        let h = self.h.as_ref().map(rat);
        let mut out = Vec::with_capacity(order + 1);
        let mut cur = BigRational::one();
        out.push(cur.clone());
        for d in 1..=order {
            let m = int(d as i64 - 1);
            if !cur.is_zero() {
                for c in &diffs {
                    let den = c + &m + int(1);
                    if den.is_zero() {
                        return Err(Error::DegenerateDenominator { degree: d });
                    }
                    cur /= den;
                    if let Some(h) = &h {
                        cur *= c + h + &m;
                    }
                }
                cur *= scale;
            }
            out.push(cur.clone());
        }
        Ok(out)
    }

    /// Exact frame: row `k`, column `j` is `(a_j + D)^k F_j(c z)`.
    pub fn rational_frame(&self, order: usize) -> Result<RationalFrame> {
        let n = self.n();
        let scale = self.variable_scale()?;
        let mut rows = vec![Vec::with_capacity(n); n];
        let mut at_zero = vec![vec![BigRational::zero(); n]; n];
        for j in 0..n {
            let aj = rat(&self.a[j]);
            let mut f = self.solution_coeffs_scaled(j, order, &scale)?;
            for k in 0..n {
                at_zero[k][j] = num_traits::pow(aj.clone(), k);
                rows[k].push(f.clone());
                f = theta(&f, &aj);
            }
        }
        Ok(RationalFrame { rows, at_zero })
    }
}

/// `F_i` modulo `p^prec` with its p-power shift.
pub fn classical_hyper_series(params: &ODEParams, i: usize, order: usize, prec: u32) -> Result<ScaledSeries> {
    let one = RationalFrame { rows: vec![vec![params.solution_coeffs(i, order)?]], at_zero: vec![vec![int(1)]] };
    let f = one.lift(params.p(), prec)?;
    Ok(ScaledSeries { series: f.entries.get(0, 0).clone(), shift: f.column_shift[0] })
}

/// The frame `((a_j + D)^k F_j)` modulo `p^prec`.
pub fn classical_analytic_fundamental(params: &ODEParams, order: usize, prec: u32) -> Result<Frame> {
    params.rational_frame(order)?.lift(params.p(), prec)
}

/// First `(column, degree)` where the operator fails to annihilate a
/// solution, computed exactly; `None` if all solutions are annihilated up
/// to `order`.
pub fn operator_residual(params: &ODEParams, order: usize) -> Result<Option<(usize, usize)>> {
    let n = params.n();
    for j in 0..n {
        let f = params.solution_coeffs(j, order)?;
        let aj = rat(&params.a[j]);
        let mut left = f.clone();
        for k in 0..n {
            left = theta(&left, &(&aj - rat(&params.a[k])));
        }
        let right = match &params.h {
            Some(h) => {
                let mut r = f.clone();
                for k in 0..n {
                    r = theta(&r, &(&aj - rat(&params.a[k]) + rat(h)));
                }
                times_z(&r)
            }
            None => times_z(&f),
        };
        let diff: RSeries = left.iter().zip(&right).map(|(x, y)| x - y).collect();
        if let Some(d) = first_nonzero(&diff) {
            return Ok(Some((j, d)));
        }
    }
    Ok(None)
}

/// Target frame at `(pa, ph)` and source frame at `(a, h)` with `z -> z^p`.
pub fn frobenius_frames(params: &ODEParams, order: usize) -> Result<(RationalFrame, RationalFrame)> {
    let p = params.p() as usize;
    let target = params.frobenius_target().rational_frame(order)?;
    let source = params.rational_frame(order / p)?.substitute_power_to(p, order);
    Ok((target, source))
}

pub(crate) fn family_from_rational(
    p: u64,
    target: &RationalFrame,
    source: &RationalFrame,
    prec: u32,
    positions: &[(usize, usize)],
) -> Result<IntertwinerFamily> {
    IntertwinerFamily::build_certified(prec, positions, |w| Ok((target.lift(p, w)?, source.lift(p, w)?)))
}

/// The diagonal intertwiner family, certified modulo `p^prec`.
pub fn dwork_family(params: &ODEParams, order: usize, prec: u32) -> Result<IntertwinerFamily> {
    let (target, source) = frobenius_frames(params, order)?;
    let positions: Vec<(usize, usize)> = (0..params.n()).map(|i| (i, i)).collect();
    family_from_rational(params.p(), &target, &source, prec, &positions)
}

/// Digits of `Lambda = diag(c_1, ..., c_{n-1}, 1)` for the Dwork Frobenius.
pub fn dwork_search(params: &ODEParams, cfg: &SearchConfig) -> Result<SearchResult> {
    cfg.validate()?;
    let n = params.n();
    if n < 2 {
        return Err(Error::InvalidParameter("the search needs rank at least 2".into()));
    }
    let fam = dwork_family(params, cfg.order, cfg.precision())?;
    let affine = diagonal_affine(&fam, n);
    let search = search_digits(&affine, params.p(), cfg)?;
    Ok(SearchResult { search, order: cfg.order, working_exponent: cfg.precision(), loss: fam.audit().clone() })
}

/// Which Gamma product is compared against the projective search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectiveConvention {
    /// `U_ii = prod_j Gamma_p(p(a_i - a_j))`.
    Stated,
    /// `U_ii = prod_j Gamma_p(p(a_j - a_i))`.
    Reflected,
}

struct GammaCache {
    p: u64,
    s: u32,
    values: BTreeMap<PRational, PadicScalar>,
}

impl GammaCache {
    fn new(p: u64, s: u32) -> GammaCache {
        GammaCache { p, s, values: BTreeMap::new() }
    }

    fn get(&mut self, x: PRational) -> Result<PadicScalar> {
        if let Some(v) = self.values.get(&x) {
            return Ok(v.clone());
        }
        let v = gamma_p(self.p, &x, self.s)?;
        self.values.insert(x, v.clone());
        Ok(v)
    }
}

fn ratios(diag: Vec<PadicScalar>) -> Result<Vec<PadicScalar>> {
    let last = diag.last().expect("nonempty").invert_unit()?;
    Ok(diag.iter().map(|d| d * &last).collect())
}

/// `U_ii / U_nn` with
/// `U_ii = prod_j Gamma_p(p(a_i - a_j + h)) / (Gamma_p(p(a_i - a_j)) Gamma_p(ph))`.
pub fn dwork_closed_form(params: &ODEParams, s: u32) -> Result<Vec<PadicScalar>> {
    let h = params.h().ok_or_else(|| Error::InvalidParameter("the hypergeometric closed form needs h".into()))?;
    let p = params.p() as i64;
    let mut g = GammaCache::new(params.p(), s);
    let a = params.a();
    let mut diag = Vec::with_capacity(a.len());
    for ai in a {
        let mut acc = g.get(PRational::zero())?;
        for aj in a {
            let c = ai - aj;
            let num = g.get((&c + h).scale(p))?;
            let den = &g.get(c.scale(p))? * &g.get(h.scale(p))?;
            acc = &(&acc * &num) * &den.invert_unit()?;
        }
        diag.push(acc);
    }
    ratios(diag)
}

/// `U_ii / U_nn` for the projective-space operator.
pub fn projective_closed_form(params: &ODEParams, s: u32, convention: ProjectiveConvention) -> Result<Vec<PadicScalar>> {
    let p = params.p() as i64;
    let mut g = GammaCache::new(params.p(), s);
    let a = params.a();
    let mut diag = Vec::with_capacity(a.len());
    for ai in a {
        let mut acc = g.get(PRational::zero())?;
        for aj in a {
            let c = match convention {
                ProjectiveConvention::Stated => ai - aj,
                ProjectiveConvention::Reflected => aj - ai,
            };
            acc = &acc * &g.get(c.scale(p))?;
        }
        diag.push(acc);
    }
    ratios(diag)
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct Comparison {
    pub formula: String,
    pub digits: Vec<Vec<u32>>,
    pub residues: Vec<String>,
    pub matches: bool,
}

impl Comparison {
    pub(crate) fn new(formula: &str, values: &[PadicScalar], s: u32, found: &[Vec<u32>]) -> Result<Comparison> {
        let digits: Vec<Vec<u32>> = values.iter().map(|v| v.digits(s)).collect::<Result<_>>()?;
        let residues = values.iter().map(|v| v.reduce_to(s).residue().to_string()).collect();
        let matches = digits == found;
        Ok(Comparison { formula: formula.to_string(), digits, residues, matches })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CohomReport {
    pub search: SearchResult,
    pub recheck_digits: Option<Vec<Vec<u32>>>,
    pub stable: bool,
    /// The first entry decides the verdict.
    pub comparisons: Vec<Comparison>,
    pub verdict: Verdict,
}

pub(crate) fn verdict(stable: bool, comparisons: &[Comparison]) -> Verdict {
    if !stable {
        Verdict::Unstable
    } else if comparisons.first().is_some_and(|c| c.matches) {
        Verdict::Verified
    } else {
        Verdict::Mismatch
    }
}

/// Search plus comparison with the Gamma_p closed form(s).
pub fn verify_dwork(params: &ODEParams, cfg: &SearchConfig) -> Result<CohomReport> {
    let search = dwork_search(params, cfg)?;
    let recheck_digits =
        if cfg.recheck { Some(dwork_search(params, &cfg.widened())?.search.digits) } else { None };
    let stable = recheck_digits.as_ref().is_none_or(|d| *d == search.search.digits);
    let s = search.search.certified_exponent;
    let n = params.n();
    let found = &search.search.digits;
    let comparisons = if params.is_projective() {
        vec![
            Comparison::new(
                "prod_j Gamma_p(p(a_i - a_j))",
                &projective_closed_form(params, s, ProjectiveConvention::Stated)?[..n - 1],
                s,
                found,
            )?,
            Comparison::new(
                "prod_j Gamma_p(p(a_j - a_i))",
                &projective_closed_form(params, s, ProjectiveConvention::Reflected)?[..n - 1],
                s,
                found,
            )?,
        ]
    } else {
        vec![Comparison::new(
            "prod_j Gamma_p(p(a_i - a_j + h)) / (Gamma_p(p(a_i - a_j)) Gamma_p(ph))",
            &dwork_closed_form(params, s)?[..n - 1],
            s,
            found,
        )?]
    };
    let verdict = verdict(stable, &comparisons);
    Ok(CohomReport { search, recheck_digits, stable, comparisons, verdict })
}

/// `ODEParams` without `h`, searched and compared the same way.
pub fn projective_search(p: u64, a: Vec<PRational>, cfg: &SearchConfig) -> Result<CohomReport> {
    verify_dwork(&ODEParams::new(p, a, None)?, cfg)
}

pub(crate) fn biguint_pow(p: u64, k: u32) -> BigUint {
    BigUint::from(p).pow(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::PadicRing;

    fn r(s: &str) -> PRational {
        s.parse().unwrap()
    }

    fn example() -> ODEParams {
        ODEParams::new(3, vec![r("1/5"), r("0")], Some(r("1/2"))).unwrap()
    }

    #[test]
    fn h_zero_series_is_one() {
        let params = ODEParams::new(3, vec![r("1/5"), r("0")], Some(r("0"))).unwrap();
        for i in 0..2 {
            let f = params.solution_coeffs(i, 10).unwrap();
            assert!(f[0].is_one());
            assert!(f[1..].iter().all(|c| c.is_zero()));
        }
    }

    #[test]
    fn first_coefficient_is_single_ratio() {
        // c_1 = (h / 1) * (1/5 + 1/2) / (1/5 + 1) = 7/24, valuation -1 at p = 3
        let f = classical_hyper_series(&example(), 0, 1, 5).unwrap();
        assert_eq!(f.shift, 1);
        let ring = PadicRing::new(3, 5).unwrap();
        assert_eq!(f.series.coeffs()[0], BigUint::from(3u32));
        assert_eq!(&f.series.coeffs()[1], ring.lift(&r("7/8")).unwrap().residue());
    }

    #[test]
    fn frame_at_zero_is_vandermonde() {
        let frame = classical_analytic_fundamental(&example(), 6, 5).unwrap();
        let ring = PadicRing::new(3, 5).unwrap();
        assert_eq!(frame.at_zero[0], vec![BigUint::one(), BigUint::one()]);
        assert_eq!(frame.at_zero[1], vec![ring.lift(&r("1/5")).unwrap().into_residue(), BigUint::zero()]);
    }

    #[test]
    fn h_zero_frame_is_constant() {
        let params = ODEParams::new(3, vec![r("1/5"), r("0")], Some(r("0"))).unwrap();
        let frame = params.rational_frame(8).unwrap();
        for (i, row) in frame.rows.iter().enumerate() {
            for (j, f) in row.iter().enumerate() {
                assert_eq!(f[0], frame.at_zero[i][j]);
                assert!(f[1..].iter().all(|c| c.is_zero()));
            }
        }
    }

    #[test]
    fn second_row_applies_theta_directly() {
        // row 1, column j: (a_j + d) c_d, checked to O(z^3) modulo 3^3
        let params = example();
        let frame = classical_analytic_fundamental(&params, 2, 3).unwrap();
        let ring = PadicRing::new(3, 3).unwrap();
        let a = [r("1/5"), r("0")];
        let h = r("1/2");
        for j in 0..2 {
            let k = 1 - j;
            let c = &a[j] - &a[k];
            let mut coeff = PRational::int(1);
            let mut expected = Vec::new();
            for d in 0..=2i64 {
                if d > 0 {
                    let m = d - 1;
                    let step = PRational(
                        (&h + &PRational::int(m)).0 * (&(&c + &h) + &PRational::int(m)).0
                            / ((PRational::int(m + 1)).0 * (&c + &PRational::int(m + 1)).0),
                    );
                    coeff = &coeff * &step;
                }
                let val = &coeff * &(&a[j] + &PRational::int(d));
                expected.push(val);
            }
            let shift = frame.column_shift[j] as i64;
            for (d, val) in expected.iter().enumerate() {
                let scaled = val.scale(3i64.pow(shift as u32));
                assert_eq!(&frame.entries.get(1, j).coeffs()[d], ring.lift(&scaled).unwrap().residue(), "col {j} deg {d}");
            }
        }
    }

    #[test]
    fn operators_annihilate_solutions() {
        assert_eq!(operator_residual(&example(), 25).unwrap(), None);
        let three = ODEParams::new(5, vec![r("1/3"), r("2/7"), r("0")], Some(r("3/4"))).unwrap();
        assert_eq!(operator_residual(&three, 20).unwrap(), None);
        let proj = ODEParams::new(3, vec![r("1/5"), r("0")], None).unwrap();
        assert_eq!(operator_residual(&proj, 25).unwrap(), None);
    }

    #[test]
    fn wrong_operator_is_detected() {
        let params = example();
        let other = ODEParams::new(3, vec![r("1/5"), r("0")], Some(r("1/4"))).unwrap();
        let f = params.solution_coeffs(0, 6).unwrap();
        let g = other.solution_coeffs(0, 6).unwrap();
        assert_ne!(f, g);
    }

    #[test]
    fn self_ratio_is_one() {
        let c = dwork_closed_form(&example(), 6).unwrap();
        assert_eq!(c[1].residue(), &BigUint::one());
        let proj = ODEParams::new(3, vec![r("1/5"), r("0")], None).unwrap();
        for conv in [ProjectiveConvention::Stated, ProjectiveConvention::Reflected] {
            assert_eq!(projective_closed_form(&proj, 6, conv).unwrap()[1].residue(), &BigUint::one());
        }
        let single = ODEParams::new(2, vec![r("1/3")], None).unwrap();
        assert_eq!(projective_closed_form(&single, 4, ProjectiveConvention::Stated).unwrap()[0].residue(), &BigUint::one());
    }

    #[test]
    fn h_zero_intertwiner_is_identity() {
        let params = ODEParams::new(3, vec![r("1/5"), r("0")], Some(r("0"))).unwrap();
        let fam = dwork_family(&params, 20, 6).unwrap();
        let u = fam.evaluate(&[((0, 0), BigUint::one()), ((1, 1), BigUint::one())]);
        let m = u.reduce(6).unwrap().unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let c = m.get(i, j).coeffs();
                assert_eq!(c[0], if i == j { BigUint::one() } else { BigUint::zero() });
                assert!(c[1..].iter().all(|x| x.is_zero()));
            }
        }
    }

    #[test]
    fn pi_power_needs_divisibility() {
        assert_eq!(exact::dwork_pi_power(3, 2).unwrap(), int(-3));
        assert_eq!(exact::dwork_pi_power(2, 3).unwrap(), int(-8));
        assert!(exact::dwork_pi_power(5, 2).is_err());
    }

    #[test]
    fn coincident_exponents_rejected() {
        assert!(ODEParams::new(3, vec![r("1/5"), r("1/5")], None).is_err());
        assert!(ODEParams::new(3, vec![r("1/3")], None).is_err());
    }
}
