//! The rank-n q-hypergeometric system: solution series, fundamental
//! matrices, companion matrix, the difference operator, and the vertex
//! function at `h = p^s` with its congruences.

use num_bigint::BigUint;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::padic::{Factored, PRational, PadicScalar, Ring};
use crate::qseries::{Frame, ScaledSeries, SeriesMatrix, TruncSeries};
use crate::qspecial::QContext;

/// Equivariant parameters `u_i = q^{a_i}`, `hbar = q^h`.
#[derive(Clone, Debug)]
pub struct QHParams {
    ctx: QContext,
    a: Vec<PRational>,
    h: PRational,
}

impl QHParams {
    pub fn new(ctx: QContext, a: Vec<PRational>, h: PRational) -> Result<QHParams> {
        let p = ctx.p();
        if a.is_empty() {
            return Err(Error::InvalidParameter("at least one parameter a_i is required".into()));
        }
        for x in a.iter().chain(std::iter::once(&h)) {
            if !x.is_p_integral(p) {
                return Err(Error::DenominatorNotUnit { value: x.to_string(), p });
            }
        }
        let lifted: Vec<BigUint> =
            a.iter().map(|x| x.representative(p, ctx.prec())).collect::<Result<_>>()?;
        for i in 0..lifted.len() {
            for j in 0..i {
                if lifted[i] == lifted[j] {
                    return Err(Error::SingularConstantTerm { precision: ctx.prec() });
                }
            }
        }
        Ok(QHParams { ctx, a, h })
    }

    pub fn ctx(&self) -> &QContext {
        &self.ctx
    }

    pub fn ring(&self) -> &Ring {
        self.ctx.ring()
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[PRational] {
        &self.a
    }

    pub fn h(&self) -> &PRational {
        &self.h
    }

    pub fn with_prec(&self, prec: u32) -> QHParams {
        QHParams { ctx: self.ctx.with_prec(prec), a: self.a.clone(), h: self.h.clone() }
    }

    pub fn u(&self, i: usize) -> Result<PadicScalar> {
        self.ctx.q_power(&self.a[i])
    }

    pub fn hbar(&self) -> Result<PadicScalar> {
        self.ctx.q_power(&self.h)
    }

    /// Parameters `(pa, ph)` over the same `q`.
    pub fn frobenius_target(&self) -> QHParams {
        let p = self.ctx.p() as i64;
        QHParams {
            ctx: self.ctx.clone(),
            a: self.a.iter().map(|x| x.scale(p)).collect(),
            h: self.h.scale(p),
        }
    }

    /// Parameters `(a, h)` over `q^p`.
    pub fn frobenius_source(&self) -> QHParams {
        QHParams { ctx: self.ctx.frobenius_twist(), a: self.a.clone(), h: self.h.clone() }
    }

    /// `F_i(z) = sum_d prod_j (u_i hbar/u_j; q)_d / (u_i q/u_j; q)_d z^d`.
    pub fn hyper_series(&self, i: usize, order: usize) -> Result<ScaledSeries> {
        let ring = self.ring().clone();
        let mut coeffs = vec![Factored::one(&ring)];
        let mut current = Factored::one(&ring);
        for d in 1..=order {
            if !current.is_zero() {
                let m = (d - 1) as i64;
                for j in 0..self.n() {
                    let c = &self.a[i] - &self.a[j];
                    let num = self.ctx.one_minus_q_pow(&(&c + &self.h).add_int(m))?;
                    let den = self.ctx.one_minus_q_pow(&c.add_int(m + 1))?;
                    if den.is_zero() {
                        return Err(Error::DegenerateDenominator { degree: d });
                    }
                    current = current.mul(&num).div(&den)?;
                }
            }
            coeffs.push(current.clone());
        }
        scaled_from_factored(&ring, &coeffs)
    }

    /// Rows `i = 0..n`: `u_j^i F_j(z q^i)`, columns scaled to be integral.
    pub fn analytic_fundamental(&self, order: usize) -> Result<Frame> {
        let n = self.n();
        let mut cols = Vec::with_capacity(n);
        let mut shifts = Vec::with_capacity(n);
        let mut us = Vec::with_capacity(n);
        for j in 0..n {
            let f = self.hyper_series(j, order)?;
            shifts.push(f.shift);
            cols.push(f.series);
            us.push(self.u(j)?);
        }
        let mut rows = vec![Vec::with_capacity(n); n];
        let mut at_zero = vec![vec![BigUint::zero(); n]; n];
        for (i, row) in rows.iter_mut().enumerate() {
            let qi = self.ctx.q_pow_int(i as i64);
            for j in 0..n {
                let ui = us[j].pow_u64(i as u64);
                row.push(cols[j].substitute_scale(&qi).scale(&ui));
                at_zero[i][j] = ui.into_residue();
            }
        }
        Ok(Frame { entries: SeriesMatrix::from_rows(rows), column_shift: shifts, at_zero })
    }

    /// Elementary symmetric coefficients of `prod_i (1 - x u_i)`.
    fn alpha_bar(&self) -> Result<Vec<PadicScalar>> {
        let ring = self.ring();
        let mut poly = vec![ring.one()];
        for i in 0..self.n() {
            let u = self.u(i)?;
            let mut next = vec![ring.zero(); poly.len() + 1];
            for (k, c) in poly.iter().enumerate() {
                next[k] = &next[k] + c;
                next[k + 1] = &next[k + 1] - &(c * &u);
            }
            poly = next;
        }
        Ok(poly)
    }

    /// Companion matrix `M_L(z)` as truncated series.
    pub fn companion_matrix(&self, order: usize) -> Result<SeriesMatrix> {
        let n = self.n();
        let ring = self.ring().clone();
        let hbar = self.hbar()?;
        let abar = self.alpha_bar()?;
        let mut denom = TruncSeries::one(&ring, order);
        if order >= 1 {
            denom = TruncSeries::new(&ring, {
                let mut c = vec![BigUint::zero(); order + 1];
                c[0] = ring.one().into_residue();
                c[1] = (-&hbar.pow_u64(n as u64)).into_residue();
                c
            });
        }
        let inv = denom.invert()?;
        Ok(SeriesMatrix::from_fn(n, |i, j| {
            if i + 1 < n {
                if j == i + 1 {
                    TruncSeries::one(&ring, order)
                } else {
                    TruncSeries::zero(&ring, order)
                }
            } else {
                // abar_{n-j} (z hbar^j - 1) / (1 - hbar^n z)
                let mut c = vec![BigUint::zero(); order + 1];
                c[0] = (-&ring.one()).into_residue();
                if order >= 1 {
                    c[1] = hbar.pow_u64(j as u64).into_residue();
                }
                TruncSeries::new(&ring, c).mul(&inv).scale(&abar[n - j])
            }
        }))
    }

    /// `P = sum_m alpha_m (1 - z hbar^m) D^m` applied to `z^x f(z)`, with the
    /// `z^x` factor removed from the result.
    pub fn apply_difference_operator(&self, f: &TruncSeries, x: &PRational) -> Result<TruncSeries> {
        let ring = self.ring().clone();
        let n = self.n();
        let hbar = self.hbar()?;
        // alpha_m: coefficients of prod (1 - x / u_i)
        let mut alpha = vec![ring.one()];
        for i in 0..n {
            let ui = self.u(i)?.invert_unit()?;
            let mut next = vec![ring.zero(); alpha.len() + 1];
            for (k, c) in alpha.iter().enumerate() {
                next[k] = &next[k] + c;
                next[k + 1] = &next[k + 1] - &(c * &ui);
            }
            alpha = next;
        }
        let qx = self.ctx.q_power(x)?;
        let order = f.order();
        let mut acc = TruncSeries::zero(&ring, order);
        for (m, am) in alpha.iter().enumerate() {
            let shifted = f.substitute_scale(&self.ctx.q_pow_int(m as i64)).scale(&(am * &qx.pow_u64(m as u64)));
            let mut lin = vec![BigUint::zero(); order + 1];
            lin[0] = ring.one().into_residue();
            if order >= 1 {
                lin[1] = (-&hbar.pow_u64(m as u64)).into_residue();
            }
            acc = acc.add(&TruncSeries::new(&ring, lin).mul(&shifted));
        }
        Ok(acc)
    }

    pub fn vertex_at_prime_power(&self, x: &PRational, s: u32, order: usize) -> Result<Vertex> {
        vertex_at_prime_power(&self.ctx, &self.a, x, s, order)
    }
}

/// Scale a list of exactly-known coefficients into an integral series.
pub(crate) fn scaled_from_factored(ring: &Ring, coeffs: &[Factored]) -> Result<ScaledSeries> {
    let min_v = coeffs.iter().filter_map(|c| c.valuation()).min().unwrap_or(0);
    let shift = if min_v < 0 { (-min_v) as u32 } else { 0 };
    let mut out = Vec::with_capacity(coeffs.len());
    for c in coeffs {
        let scaled = match c {
            Factored::Zero => Factored::Zero,
            Factored::Value { valuation, unit } => {
                Factored::Value { valuation: valuation + shift as i64, unit: unit.clone() }
            }
        };
        out.push(scaled.to_scalar(ring)?.into_residue());
    }
    Ok(ScaledSeries { series: TruncSeries::new(ring, out), shift })
}

/// Analytic part of the normalized vertex at `h = p^s`; the full function
/// carries a `z^x` prefactor.
#[derive(Clone, Debug)]
pub struct Vertex {
    pub series: TruncSeries,
    pub exponent: PRational,
}

/// `[q^y, q]_N / [1, q]_N`, exact; integral for every `y` in `Z_p`.
fn bracket_ratio(ctx: &QContext, y: &PRational, len: u64, base: &Factored) -> Result<Factored> {
    ctx.bracket_factored(y, len)?.div(base)
}

/// `sum_d prod_i [q^{x+d-a_i}, q]_{p^s} / [1, q]_{p^s} z^d`.
pub fn vertex_at_prime_power(
    ctx: &QContext,
    a: &[PRational],
    x: &PRational,
    s: u32,
    order: usize,
) -> Result<Vertex> {
    let p = ctx.p();
    let len = p.pow(s);
    let base = ctx.bracket_factored(&PRational::zero(), len)?;
    let ring = ctx.ring().clone();
    let mut coeffs = Vec::with_capacity(order + 1);
    for d in 0..=order {
        let mut c = Factored::one(&ring);
        for ai in a {
            let y = &x.add_int(d as i64) - ai;
            c = c.mul(&bracket_ratio(ctx, &y, len, &base)?);
            if c.is_zero() {
                break;
            }
        }
        coeffs.push(c.to_scalar(&ring)?.into_residue());
    }
    Ok(Vertex { series: TruncSeries::new(&ring, coeffs), exponent: x.clone() })
}

/// `X == Y (mod p^k)` for exactly-known nonnegative-valuation values.
fn congruent(x: &Factored, y: &Factored, k: u32, ring: &Ring) -> Result<bool> {
    let r = ring.with_prec(k);
    let xv = x.to_scalar(&r)?;
    let yv = y.to_scalar(&r)?;
    Ok(xv == yv)
}

/// `[q^i,q]_{p^s} / [1,q]_{p^s}` is congruent mod `p^s` to
/// `[q^i,q^p]_{p^{s-1}} / [1,q^p]_{p^{s-1}}` when `p | i` and to 0 otherwise.
/// Checked on cross-multiplied products.
pub fn check_pochhammer_congruence(ctx: &QContext, i: i64, s: u32) -> Result<bool> {
    if s == 0 {
        return Err(Error::InvalidParameter("s must be at least 1".into()));
    }
    let p = ctx.p();
    let n_big = p.pow(s);
    let n_small = p.pow(s - 1);
    let probe = |c: &QContext| -> Result<[Factored; 4]> {
        let a = c.bracket_factored(&PRational::int(i), n_big)?;
        let b = c.bracket_factored(&PRational::zero(), n_big)?;
        let mut cc = Factored::one(c.ring());
        let mut dd = Factored::one(c.ring());
        for m in 1..n_small as i64 {
            cc = cc.mul(&c.one_minus_q_pow(&PRational::int(i + p as i64 * m))?);
            dd = dd.mul(&c.one_minus_q_pow(&PRational::int(p as i64 * m))?);
        }
        Ok([a, b, cc, dd])
    };
    let [_, b, _, d] = probe(ctx)?;
    let vb = b.valuation().expect("[1,q]_N is nonzero") as u32;
    let vd = d.valuation().expect("[1,q^p]_N is nonzero") as u32;
    let k = s + vb + vd;
    let wide = ctx.with_prec(k + 1);
    let [a, b, c, d] = probe(&wide)?;
    if i.rem_euclid(p as i64) == 0 {
        congruent(&a.mul(&d), &b.mul(&c), k, wide.ring())
    } else {
        congruent(&a, &Factored::Zero, s + vb, wide.ring())
    }
}

/// First coefficient where a congruence fails.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct CongruenceFailure {
    pub label: String,
    pub degree: usize,
    pub left: String,
    pub right: String,
}

/// `(z, q)_{p^s} == (z^p, q^p)_{p^{s-1}} (mod p^s)` as polynomials in `z`.
pub fn check_polynomial_congruence(ctx: &QContext, s: u32) -> Result<Option<CongruenceFailure>> {
    let p = ctx.p();
    let big = p.pow(s) as usize;
    let small = p.pow(s - 1) as usize;
    let ring = ctx.ring().with_prec(s);
    let q = ring.from_biguint(ctx.q().residue().clone());
    let one = ring.one();
    let mut lhs = TruncSeries::one(&ring, big);
    let mut qm = one.clone();
    for _ in 0..big {
        lhs = lhs.mul(&TruncSeries::new(&ring, linear(&one, &qm, 1, big)));
        qm = &qm * &q;
    }
    let qp = q.pow_u64(p);
    let mut rhs = TruncSeries::one(&ring, big);
    let mut qm = one.clone();
    for _ in 0..small {
        rhs = rhs.mul(&TruncSeries::new(&ring, linear(&one, &qm, p as usize, big)));
        qm = &qm * &qp;
    }
    Ok(first_difference("pochhammer", &lhs, &rhs))
}

fn linear(one: &PadicScalar, c: &PadicScalar, degree: usize, order: usize) -> Vec<BigUint> {
    let mut v = vec![BigUint::zero(); order + 1];
    v[0] = one.residue().clone();
    v[degree] = (-c).into_residue();
    v
}

fn first_difference(label: &str, a: &TruncSeries, b: &TruncSeries) -> Option<CongruenceFailure> {
    for d in 0..=a.order().min(b.order()) {
        if a.coeffs()[d] != b.coeffs()[d] {
            return Some(CongruenceFailure {
                label: label.to_string(),
                degree: d,
                left: a.coeffs()[d].to_string(),
                right: b.coeffs()[d].to_string(),
            });
        }
    }
    None
}

/// Vertex congruence
/// `V(pa, px, p^s, q, z) == V(a, x, p^{s-1}, q^p, z^p) (mod p^s)` to order `M`.
pub fn check_vertex_congruence(
    ctx: &QContext,
    a: &[PRational],
    x: &PRational,
    s: u32,
    order: usize,
) -> Result<Option<CongruenceFailure>> {
    let (lhs, rhs) = vertex_pair(ctx, a, x, s, order)?;
    Ok(first_difference(&format!("vertex x={x}"), &lhs, &rhs))
}

fn vertex_pair(
    ctx: &QContext,
    a: &[PRational],
    x: &PRational,
    s: u32,
    order: usize,
) -> Result<(TruncSeries, TruncSeries)> {
    if s == 0 {
        return Err(Error::InvalidParameter("s must be at least 1".into()));
    }
    let p = ctx.p();
    let pa: Vec<PRational> = a.iter().map(|y| y.scale(p as i64)).collect();
    let lhs = vertex_at_prime_power(ctx, &pa, &x.scale(p as i64), s, order)?.series;
    let twisted = ctx.frobenius_twist();
    let rhs = vertex_at_prime_power(&twisted, a, x, s - 1, order / p as usize)?.series;
    let ring = ctx.ring().with_prec(s);
    Ok((lhs.reduce_to(&ring), rhs.substitute_power_to(p as usize, order).reduce_to(&ring)))
}

/// Row-shifted fundamental-matrix form of the vertex congruence: entry `(k, i)`
/// is the vertex at `x = a_i` evaluated at `z q^k`, scaled by `q^{k x}`.
pub fn check_fundamental_congruence(
    ctx: &QContext,
    a: &[PRational],
    s: u32,
    order: usize,
) -> Result<Option<CongruenceFailure>> {
    let p = ctx.p() as i64;
    let ring = ctx.ring().with_prec(s);
    let q = ring.from_biguint(ctx.q().residue().clone());
    for ai in a {
        let (lhs, rhs) = vertex_pair(ctx, a, ai, s, order)?;
        for k in 0..a.len() {
            let qk = q.pow_u64(k as u64);
            let pref = ctx.q_power(&ai.scale(p * k as i64))?.reduce_to(s);
            let l = lhs.substitute_scale(&qk).scale(&pref);
            let r = rhs.substitute_scale(&qk).scale(&pref);
            if let Some(f) = first_difference(&format!("fundamental row {k}, x={ai}"), &l, &r) {
                return Ok(Some(f));
            }
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, Serialize)]
pub struct CongruenceReport {
    pub p: u64,
    pub s: u32,
    pub order: usize,
    pub polynomial: Option<CongruenceFailure>,
    /// Values of `i` for which the bracket-ratio congruence fails.
    pub pochhammer_failures: Vec<i64>,
    pub pochhammer_range: (i64, i64),
    pub vertex: Option<CongruenceFailure>,
    pub fundamental: Option<CongruenceFailure>,
    pub all_hold: bool,
}

/// Polynomial, bracket-ratio (for `i` in `range`), vertex (at each `x = a_i`)
/// and fundamental-matrix congruences at level `s`.
pub fn congruence_suite(
    ctx: &QContext,
    a: &[PRational],
    s: u32,
    order: usize,
    range: std::ops::RangeInclusive<i64>,
) -> Result<CongruenceReport> {
    for x in a {
        if !x.is_p_integral(ctx.p()) {
            return Err(Error::DenominatorNotUnit { value: x.to_string(), p: ctx.p() });
        }
    }
    let polynomial = check_polynomial_congruence(ctx, s)?;
    let pochhammer_range = (*range.start(), *range.end());
    let mut pochhammer_failures = Vec::new();
    for i in range {
        if !check_pochhammer_congruence(ctx, i, s)? {
            pochhammer_failures.push(i);
        }
    }
    let mut vertex = None;
    for x in a {
        vertex = check_vertex_congruence(ctx, a, x, s, order)?;
        if vertex.is_some() {
            break;
        }
    }
    let fundamental = check_fundamental_congruence(ctx, a, s, order)?;
    let all_hold = polynomial.is_none() && pochhammer_failures.is_empty() && vertex.is_none() && fundamental.is_none();
    Ok(CongruenceReport {
        p: ctx.p(),
        s,
        order,
        polynomial,
        pochhammer_failures,
        pochhammer_range,
        vertex,
        fundamental,
        all_hold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> PRational {
        s.parse().unwrap()
    }

    fn example(prec: u32) -> QHParams {
        let ctx = QContext::new(3, PRational::int(3), prec).unwrap();
        QHParams::new(ctx, vec![r("1/5"), r("0")], r("1/2")).unwrap()
    }

    #[test]
    fn h_zero_gives_constant_series() {
        let ctx = QContext::new(3, PRational::int(3), 6).unwrap();
        let params = QHParams::new(ctx, vec![r("1/5"), r("0")], r("0")).unwrap();
        let f = params.hyper_series(0, 10).unwrap();
        assert_eq!(f.shift, 0);
        assert_eq!(f.series, TruncSeries::one(params.ring(), 10));
    }

    #[test]
    fn first_coefficient_is_direct_ratio() {
        let params = example(5);
        let f = params.hyper_series(0, 3).unwrap();
        assert_eq!(f.series.coeffs()[0], params.ring().p_pow(f.shift));
        let ctx = params.ctx();
        let (a1, h) = (r("1/5"), r("1/2"));
        let num = ctx.one_minus_q_pow(&h).unwrap().mul(&ctx.one_minus_q_pow(&(&a1 + &h)).unwrap());
        let den = ctx.one_minus_q_pow(&r("1")).unwrap().mul(&ctx.one_minus_q_pow(&a1.add_int(1)).unwrap());
        let c1 = num.div(&den).unwrap();
        let expected = match c1 {
            Factored::Value { valuation, unit } => {
                Factored::Value { valuation: valuation + f.shift as i64, unit }.to_scalar(params.ring()).unwrap()
            }
            Factored::Zero => unreachable!(),
        };
        assert_eq!(f.series.coeff(1), expected);
    }

    #[test]
    fn fundamental_matrix_at_zero_is_vandermonde() {
        let params = example(8);
        let frame = params.analytic_fundamental(4).unwrap();
        let u1 = params.u(0).unwrap();
        assert_eq!(frame.at_zero[0][0], BigUint::from(1u32));
        assert_eq!(frame.at_zero[1][0], u1.residue().clone());
        assert_eq!(frame.at_zero[1][1], BigUint::from(1u32));
        let scaled = frame.to_scaled();
        for i in 0..2 {
            for j in 0..2 {
                let c0 = scaled.matrix.get(i, j).coeff(0);
                let expect = params.ring().from_biguint(&frame.at_zero[i][j] * params.ring().p_pow(scaled.shift));
                assert_eq!(c0, expect);
            }
        }
    }

    #[test]
    fn degenerate_denominator_detected() {
        let ctx = QContext::new(3, PRational::int(3), 6).unwrap();
        let params = QHParams::new(ctx, vec![r("0"), r("2")], r("1/2")).unwrap();
        assert!(matches!(params.hyper_series(0, 5), Err(Error::DegenerateDenominator { degree: 2 })));
    }

    #[test]
    fn companion_top_row_and_corner() {
        let params = example(6);
        let m = params.companion_matrix(3).unwrap();
        assert!(m.get(0, 0).is_zero());
        assert_eq!(m.get(0, 1), &TruncSeries::one(params.ring(), 3));
        let prod = &params.u(0).unwrap() * &params.u(1).unwrap();
        assert_eq!(m.get(1, 0).coeff(0), -&prod);
    }

    #[test]
    fn pochhammer_lemma_edge_cases() {
        let ctx = QContext::new(3, PRational::int(3), 6).unwrap();
        for s in 1..=2 {
            assert!(check_pochhammer_congruence(&ctx, 0, s).unwrap());
            assert!(check_pochhammer_congruence(&ctx, 1, s).unwrap());
            assert!(check_pochhammer_congruence(&ctx, -2, s).unwrap());
        }
    }

    #[test]
    fn vertex_congruence_small_case() {
        let ctx = QContext::new(3, PRational::int(3), 6).unwrap();
        let a = vec![r("1"), r("0")];
        assert_eq!(check_vertex_congruence(&ctx, &a, &r("1"), 2, 9).unwrap(), None);
    }

    #[test]
    fn vertex_trivial_rank_one() {
        let ctx = QContext::new(3, PRational::int(3), 6).unwrap();
        let v = vertex_at_prime_power(&ctx, &[r("1/5")], &r("1/5"), 1, 0).unwrap();
        assert_eq!(v.series.coeff(0), ctx.ring().one());
    }
}
