//! q-numbers, q-Pochhammer symbols, brackets, and the p-adic gamma functions
//! of Morita and Koblitz.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::padic::{Factored, PRational, PadicRing, PadicScalar, Ring};

/// Default number of extra representative digits tried before giving up on
/// stabilization.
pub const DEFAULT_STABILIZATION_CAP: u32 = 4;

/// `q = 1 + t` with `v_p(t) >= 1`, at working exponent `W`.
#[derive(Clone, Debug)]
pub struct QContext {
    ring: Ring,
    t: PRational,
    q: PadicScalar,
    t_valuation: u32,
}

impl QContext {
    pub fn new(p: u64, t: PRational, prec: u32) -> Result<QContext> {
        let ring = PadicRing::new(p, prec)?;
        if !t.is_p_integral(p) {
            return Err(Error::DenominatorNotUnit { value: t.to_string(), p });
        }
        let v = t
            .valuation(p)
            .ok_or_else(|| Error::InvalidParameter("t must be nonzero".into()))? as u32;
        let need = if p == 2 { 2 } else { 1 };
        if v < need {
            return Err(Error::InvalidParameter(format!(
                "t = {t} has valuation {v}; at least {need} is required for p = {p}"
            )));
        }
        let q = ring.lift(&t.add_int(1))?;
        Ok(QContext { ring, t, q, t_valuation: v })
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn p(&self) -> u64 {
        self.ring.p()
    }

    pub fn prec(&self) -> u32 {
        self.ring.prec()
    }

    pub fn t(&self) -> &PRational {
        &self.t
    }

    pub fn t_valuation(&self) -> u32 {
        self.t_valuation
    }

    pub fn q(&self) -> &PadicScalar {
        &self.q
    }

    pub fn with_prec(&self, prec: u32) -> QContext {
        QContext::new(self.p(), self.t.clone(), prec).expect("parameters already validated")
    }

    /// Context for `q^p`, i.e. `t' = (1 + t)^p - 1`.
    pub fn frobenius_twist(&self) -> QContext {
        let qp = self.t.add_int(1).pow(self.p() as u32);
        QContext::new(self.p(), qp.add_int(-1), self.prec()).expect("v(t') = v(t) + 1")
    }

    pub fn q_pow_int(&self, n: i64) -> PadicScalar {
        if n >= 0 {
            self.q.pow_u64(n as u64)
        } else {
            self.q.invert_unit().expect("q is a unit").pow_u64(n.unsigned_abs())
        }
    }

    /// `q^a` for `a` in `Z_p`, via an integer representative of `a` mod `p^W`.
    pub fn q_power(&self, a: &PRational) -> Result<PadicScalar> {
        let rep = a.representative(self.p(), self.prec())?;
        Ok(self.q.pow(&rep))
    }

    /// `1 - q^x` with its valuation `v_p(t) + v_p(x)` split off exactly.
    pub fn one_minus_q_pow(&self, x: &PRational) -> Result<Factored> {
        let p = self.p();
        if !x.is_p_integral(p) {
            return Err(Error::DenominatorNotUnit { value: x.to_string(), p });
        }
        let vx = match x.valuation(p) {
            None => return Ok(Factored::Zero),
            Some(v) => v as u32,
        };
        let v = self.t_valuation + vx;
        let wide = self.with_prec(self.prec() + v);
        let val = &wide.ring.one() - &wide.q_power(x)?;
        Factored::from_scalar_with_valuation(&val, v)
    }

    /// `[n]_q = 1 + q + ... + q^(n-1)`.
    pub fn q_number(&self, n: u64) -> PadicScalar {
        let mut acc = self.ring.zero();
        let mut pw = self.ring.one();
        for _ in 0..n {
            acc = &acc + &pw;
            pw = &pw * &self.q;
        }
        acc
    }

    pub fn q_factorial(&self, n: u64) -> PadicScalar {
        let mut acc = self.ring.one();
        let mut br = self.ring.zero();
        let mut pw = self.ring.one();
        for _ in 1..=n {
            br = &br + &pw;
            pw = &pw * &self.q;
            acc = &acc * &br;
        }
        acc
    }

    /// Gaussian binomial by `C(n,k) = C(n-1,k-1) + q^k C(n-1,k)`.
    pub fn q_binomial(&self, n: u64, k: u64) -> PadicScalar {
        if k > n {
            return self.ring.zero();
        }
        let k = k as usize;
        let qpow: Vec<PadicScalar> = (0..=k as i64).map(|j| self.q_pow_int(j)).collect();
        let mut row = vec![self.ring.zero(); k + 1];
        row[0] = self.ring.one();
        for m in 1..=n as usize {
            for j in (1..=k.min(m)).rev() {
                row[j] = &row[j - 1] + &(&qpow[j] * &row[j]);
            }
        }
        row[k].clone()
    }

    /// `(u; q)_d = prod_{m<d} (1 - u q^m)`.
    pub fn q_pochhammer(&self, u: &PadicScalar, d: u64) -> PadicScalar {
        let one = self.ring.one();
        let mut acc = one.clone();
        let mut uq = u.clone();
        for _ in 0..d {
            acc = &acc * &(&one - &uq);
            uq = &uq * &self.q;
        }
        acc
    }

    /// `[q^x, q]_d = (1 - q^(x+1)) ... (1 - q^(x+d-1))`.
    pub fn bracket(&self, x: &PRational, d: u64) -> Result<PadicScalar> {
        let one = self.ring.one();
        let mut acc = one.clone();
        let mut qx = self.q_power(&x.add_int(1))?;
        for _ in 1..d {
            acc = &acc * &(&one - &qx);
            qx = &qx * &self.q;
        }
        Ok(acc)
    }

    /// The bracket with its exact valuation (an exact zero when a factor is `1 - q^0`).
    pub fn bracket_factored(&self, x: &PRational, d: u64) -> Result<Factored> {
        let mut acc = Factored::one(&self.ring);
        for m in 1..d {
            let f = self.one_minus_q_pow(&x.add_int(m as i64))?;
            acc = acc.mul(&f);
            if acc.is_zero() {
                break;
            }
        }
        Ok(acc)
    }

    /// `Gamma_{p,q}(n) = (-1)^n prod_{0<i<n, p not | i} [i]_q`.
    pub fn gamma_pq_int(&self, n: u64) -> PadicScalar {
        let mut g = GammaProduct::koblitz(&self.ring, &self.q);
        self.ring.from_biguint(g.value_at(n))
    }

    /// Koblitz gamma at a point of `Z_p`, modulo `p^s`.
    pub fn gamma_pq(&self, x: &PRational, s: u32) -> Result<PadicScalar> {
        self.gamma_pq_with_cap(x, s, DEFAULT_STABILIZATION_CAP)
    }

    pub fn gamma_pq_with_cap(&self, x: &PRational, s: u32, cap: u32) -> Result<PadicScalar> {
        let ring = self.ring.with_prec(s);
        let q = ring.from_biguint(self.q.residue().clone());
        stabilize(x, &ring, cap, GammaProduct::koblitz(&ring, &q))
    }
}

/// Morita `Gamma_p(n)` modulo `p^W` of `ring`.
pub fn gamma_p_int(ring: &Ring, n: u64) -> PadicScalar {
    ring.from_biguint(GammaProduct::morita(ring).value_at(n))
}

/// Morita gamma at a point of `Z_p`, modulo `p^s`.
pub fn gamma_p(p: u64, x: &PRational, s: u32) -> Result<PadicScalar> {
    gamma_p_with_cap(p, x, s, DEFAULT_STABILIZATION_CAP)
}

pub fn gamma_p_with_cap(p: u64, x: &PRational, s: u32, cap: u32) -> Result<PadicScalar> {
    let ring = PadicRing::new(p, s)?;
    stabilize(x, &ring, cap, GammaProduct::morita(&ring))
}

fn stabilize(x: &PRational, ring: &Ring, cap: u32, mut g: GammaProduct) -> Result<PadicScalar> {
    let p = ring.p();
    let s = ring.prec();
    let rep = |k: u32| -> Result<u64> {
        x.representative(p, k)?
            .to_u64()
            .ok_or_else(|| Error::PrecisionExhausted(format!("representative modulo {p}^{k} is too large")))
    };
    let mut prev = g.value_at(rep(s)?);
    for k in s + 1..=s + cap {
        let cur = g.value_at(rep(k)?);
        if cur == prev {
            return Ok(ring.from_biguint(cur));
        }
        prev = cur;
    }
    Err(Error::NoStabilization { target: s, last: s + cap })
}

/// Incremental evaluation of `(-1)^n prod_{0<i<n, p not | i} f(i)` with
/// `f(i) = i` (Morita) or `f(i) = [i]_q` (Koblitz).
struct GammaProduct {
    p: u64,
    modulus: Modulus,
    q: Option<BigUint>,
    next: u64,
    value: BigUint,
    qpow: BigUint,
    qnum: BigUint,
}

enum Modulus {
    Small(u64),
    Big(BigUint),
}

impl GammaProduct {
    fn new(ring: &Ring, q: Option<BigUint>) -> GammaProduct {
        let modulus = match ring.modulus().to_u64() {
            Some(m) if m < (1 << 62) => Modulus::Small(m),
            _ => Modulus::Big(ring.modulus().clone()),
        };
        GammaProduct {
            p: ring.p(),
            modulus,
            q,
            next: 1,
            value: BigUint::one(),
            qpow: BigUint::one(),
            qnum: BigUint::zero(),
        }
    }

    fn morita(ring: &Ring) -> GammaProduct {
        GammaProduct::new(ring, None)
    }

    fn koblitz(ring: &Ring, q: &PadicScalar) -> GammaProduct {
        GammaProduct::new(ring, Some(q.residue().clone()))
    }

    fn reset(&mut self) {
        self.next = 1;
        self.value = BigUint::one();
        self.qpow = BigUint::one();
        self.qnum = BigUint::zero();
    }

    /// Advance the running product over `i < n` and return the signed value.
    fn value_at(&mut self, n: u64) -> BigUint {
        if n < self.next {
            self.reset();
        }
        match &self.modulus {
            Modulus::Small(m) => self.run_small(n, *m),
            Modulus::Big(m) => {
                let m = m.clone();
                self.run_big(n, &m)
            }
        }
        let m = match &self.modulus {
            Modulus::Small(m) => BigUint::from(*m),
            Modulus::Big(m) => m.clone(),
        };
        if n % 2 == 1 && !self.value.is_zero() {
            &m - &self.value
        } else {
            self.value.clone()
        }
    }

    fn run_small(&mut self, n: u64, m: u64) {
        let mm = m as u128;
        let mut value = self.value.to_u64().unwrap() as u128;
        let mut qpow = self.qpow.to_u64().unwrap() as u128;
        let mut qnum = self.qnum.to_u64().unwrap() as u128;
        let q = self.q.as_ref().map(|q| q.to_u64().unwrap() as u128);
        let mut i = self.next;
        while i < n {
            let factor = match q {
                Some(q) => {
                    qnum = (qnum + qpow) % mm;
                    qpow = qpow * q % mm;
                    qnum
                }
                None => (i as u128) % mm,
            };
            if !i.is_multiple_of(self.p) {
                value = value * factor % mm;
            }
            i += 1;
        }
        self.next = i.max(self.next);
        self.value = BigUint::from(value as u64);
        self.qpow = BigUint::from(qpow as u64);
        self.qnum = BigUint::from(qnum as u64);
    }

    fn run_big(&mut self, n: u64, m: &BigUint) {
        let mut i = self.next;
        while i < n {
            let factor = match &self.q {
                Some(q) => {
                    self.qnum = (&self.qnum + &self.qpow) % m;
                    self.qpow = &self.qpow * q % m;
                    self.qnum.clone()
                }
                None => BigUint::from(i) % m,
            };
            if !i.is_multiple_of(self.p) {
                self.value = &self.value * factor % m;
            }
            i += 1;
        }
        self.next = i.max(self.next);
    }
}

/// Taylor coefficients `gamma_0..gamma_k` of Morita's `Gamma_p` at 0, modulo `p^s`.
///
/// Divided differences on the nodes `0, p^j, ..., k p^j`, with `j` raised
/// until every coefficient agrees for two consecutive `j`.
pub fn gamma_p_taylor(p: u64, k: usize, s: u32) -> Result<Vec<PadicScalar>> {
    gamma_p_taylor_with_cap(p, k, s, DEFAULT_STABILIZATION_CAP)
}

pub fn gamma_p_taylor_with_cap(p: u64, k: usize, s: u32, cap: u32) -> Result<Vec<PadicScalar>> {
    if k == 0 {
        return Err(Error::InvalidParameter("Taylor order must be at least 1".into()));
    }
    let out = PadicRing::new(p, s)?;
    let mut prev: Option<Vec<BigUint>> = None;
    for j in s..=s + cap {
        let cur = divided_differences(p, k, s, j)?;
        if prev.as_ref() == Some(&cur) {
            return Ok(cur.into_iter().map(|c| out.from_biguint(c)).collect());
        }
        prev = Some(cur);
    }
    Err(Error::NoStabilization { target: s, last: s + cap })
}

fn divided_differences(p: u64, k: usize, s: u32, j: u32) -> Result<Vec<BigUint>> {
    let fact_val: u32 = (1..=k as u64).map(|m| crate::padic::int_valuation(&BigInt::from(m), p).unwrap()).sum();
    let prec = s + j * k as u32 + fact_val + 1;
    let ring = PadicRing::new(p, prec)?;
    let h = p
        .checked_pow(j)
        .ok_or_else(|| Error::PrecisionExhausted(format!("node spacing {p}^{j} overflows")))?;
    let mut g = GammaProduct::morita(&ring);
    let values: Vec<PadicScalar> = (0..=k as u64).map(|m| ring.from_biguint(g.value_at(m * h))).collect();
    let mut diffs = values;
    let mut out = Vec::with_capacity(k + 1);
    let target = PadicRing::new(p, s)?;
    let mut factorial = PRational::int(1);
    for r in 0..=k {
        if r > 0 {
            diffs = diffs.windows(2).map(|w| &w[1] - &w[0]).collect();
            factorial = factorial.scale(r as i64);
        }
        // gamma_r ~ Delta^r f(0) / (r! h^r)
        let scale = PRational(factorial.0.clone() * num_rational::BigRational::from_integer(BigInt::from(h).pow(r as u32)));
        let denom = Factored::from_rational(&ring, &scale);
        let v = denom.valuation().unwrap() as u32;
        let num = diffs[0].clone();
        let quotient = match num.valuation() {
            crate::padic::Valuation::AtLeast(_) => target.zero(),
            crate::padic::Valuation::Finite(vn) if vn < v => {
                return Err(Error::PrecisionExhausted(format!(
                    "Taylor coefficient {r} is not p-integral at node spacing {p}^{j}"
                )))
            }
            _ => {
                let shifted = num.div_p_pow(v)?;
                let unit = match &denom {
                    Factored::Value { unit, .. } => unit.reduce_to(shifted.prec()),
                    Factored::Zero => unreachable!(),
                };
                (&shifted * &unit.invert_unit()?).reduce_to(s)
            }
        };
        out.push(quotient.into_residue());
    }
    Ok(out)
}

/// Integer `n mod m` helper for tests and callers working with plain integers.
pub fn residue_of(x: &BigInt, ring: &Ring) -> BigUint {
    x.mod_floor(&BigInt::from(ring.modulus().clone())).to_biguint().unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u64, t: i64, w: u32) -> QContext {
        QContext::new(p, PRational::int(t), w).unwrap()
    }

    fn r(s: &str) -> PRational {
        s.parse().unwrap()
    }

    #[test]
    fn rejects_bad_deformation() {
        assert!(QContext::new(3, PRational::int(1), 5).is_err());
        assert!(QContext::new(3, PRational::int(0), 5).is_err());
        assert!(QContext::new(2, PRational::int(2), 5).is_err());
        assert!(QContext::new(2, PRational::int(4), 5).is_ok());
    }

    #[test]
    fn q_numbers() {
        let c = ctx(3, 3, 3);
        assert_eq!(c.q_number(1), c.ring().one());
        assert_eq!(c.q_number(3), c.ring().from_i64(21));
        assert_eq!(c.q_binomial(7, 0), c.ring().one());
        // [4 choose 2]_q = 1 + q + 2q^2 + q^3 + q^4 at q = 4
        assert_eq!(c.q_binomial(4, 2), c.ring().from_i64(1 + 4 + 32 + 64 + 256));
    }

    #[test]
    fn pochhammer_and_bracket() {
        let c = ctx(3, 3, 2);
        let four = c.ring().from_i64(4);
        assert_eq!(c.q_pochhammer(&four, 0), c.ring().one());
        assert!(c.q_pochhammer(&c.ring().one(), 3).is_zero());
        assert!(c.q_pochhammer(&four, 2).is_zero());
        assert_eq!(c.bracket(&r("5"), 1).unwrap(), c.ring().one());
        assert!(c.bracket(&r("-1"), 2).unwrap().is_zero());
        assert!(c.bracket(&r("3"), 3).unwrap().is_zero());
        assert!(c.bracket_factored(&r("-1"), 2).unwrap().is_zero());
    }

    #[test]
    fn q_power_of_half() {
        let c = ctx(3, 3, 7);
        let h = c.q_power(&r("1/2")).unwrap();
        assert_eq!(h, c.q().pow_u64(1094));
        assert_eq!((&h * &h).reduce_to(6), c.q().reduce_to(6));
    }

    #[test]
    fn one_minus_q_pow_valuation() {
        let c = ctx(3, 3, 6);
        let f = c.one_minus_q_pow(&r("6/5")).unwrap();
        assert_eq!(f.valuation(), Some(2));
        assert!(c.one_minus_q_pow(&r("0")).unwrap().is_zero());
    }

    #[test]
    fn koblitz_small_values() {
        let c = ctx(3, 3, 6);
        assert_eq!(c.gamma_pq_int(0), c.ring().one());
        assert_eq!(c.gamma_pq_int(1), c.ring().from_i64(-1));
        assert_eq!(c.gamma_pq_int(3), c.ring().from_i64(-5));
        assert_eq!(c.gamma_pq(&r("0"), 5).unwrap().residue(), &BigUint::one());
    }

    #[test]
    fn koblitz_at_half_uses_representatives() {
        let c = ctx(3, 3, 8);
        let ring4 = c.ring().with_prec(4);
        let g41 = c.gamma_pq_int(41).reduce_to(4);
        let g122 = c.gamma_pq_int(122).reduce_to(4);
        assert_eq!(g41, g122);
        assert_eq!(c.gamma_pq(&r("1/2"), 4).unwrap(), ring4.from_biguint(g41.into_residue()));
    }

    #[test]
    fn morita_small_values() {
        let ring = PadicRing::new(3, 5).unwrap();
        assert_eq!(gamma_p_int(&ring, 0), ring.one());
        assert_eq!(gamma_p_int(&ring, 1), ring.from_i64(-1));
        assert_eq!(gamma_p_int(&ring, 3), ring.from_i64(-2));
        let half = gamma_p(3, &r("1/2"), 4).unwrap();
        let direct = gamma_p_int(&ring.with_prec(4), 41);
        assert_eq!(half, direct);
    }

    #[test]
    fn taylor_coefficients() {
        let g = gamma_p_taylor(3, 2, 6).unwrap();
        assert_eq!(g[0].residue(), &BigUint::one());
        assert_eq!(g[1].residue(), &BigUint::from(273u32));
        // even log-coefficient vanishes: gamma_2 = gamma_1^2 / 2
        let two_inv = g[0].ring().from_i64(2).invert_unit().unwrap();
        assert_eq!(g[2], &(&g[1] * &g[1]) * &two_inv);
    }
}
