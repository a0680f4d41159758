//! Truncated p-adic integers: residues modulo `p^W` with exact valuations.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// The ring `Z/p^W`. Shared between all scalars and series computed at one precision.
#[derive(Debug, PartialEq, Eq)]
pub struct PadicRing {
    p: u64,
    prec: u32,
    modulus: BigUint,
}

pub type Ring = Arc<PadicRing>;

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl PadicRing {
    pub fn new(p: u64, prec: u32) -> Result<Ring> {
        if !is_prime(p) {
            return Err(Error::InvalidParameter(format!("{p} is not prime")));
        }
        if prec == 0 {
            return Err(Error::InvalidParameter("working exponent must be positive".into()));
        }
        Ok(Arc::new(PadicRing { p, prec, modulus: BigUint::from(p).pow(prec) }))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    pub fn p_pow(&self, k: u32) -> BigUint {
        BigUint::from(self.p).pow(k)
    }

    /// Same prime, different working exponent.
    pub fn with_prec(&self, prec: u32) -> Ring {
        PadicRing::new(self.p, prec).expect("prime already validated")
    }

    pub fn reduce(&self, x: &BigUint) -> BigUint {
        x % &self.modulus
    }

    pub fn reduce_signed(&self, x: &BigInt) -> BigUint {
        let m = BigInt::from(self.modulus.clone());
        x.mod_floor(&m).to_biguint().expect("nonnegative after mod_floor")
    }

    pub fn zero(self: &Arc<Self>) -> PadicScalar {
        PadicScalar { ring: self.clone(), residue: BigUint::zero() }
    }

    pub fn one(self: &Arc<Self>) -> PadicScalar {
        self.from_biguint(BigUint::one())
    }

    pub fn from_biguint(self: &Arc<Self>, x: BigUint) -> PadicScalar {
        let residue = if x < self.modulus { x } else { x % &self.modulus };
        PadicScalar { ring: self.clone(), residue }
    }

    pub fn from_bigint(self: &Arc<Self>, x: &BigInt) -> PadicScalar {
        PadicScalar { ring: self.clone(), residue: self.reduce_signed(x) }
    }

    pub fn from_i64(self: &Arc<Self>, x: i64) -> PadicScalar {
        self.from_bigint(&BigInt::from(x))
    }

    /// Image of a rational in `Z/p^W`.
    pub fn lift(self: &Arc<Self>, x: &PRational) -> Result<PadicScalar> {
        Ok(PadicScalar { ring: self.clone(), residue: self.lift_residue(x)? })
    }

    pub(crate) fn lift_residue(&self, x: &PRational) -> Result<BigUint> {
        let den = x.0.denom();
        let p = BigInt::from(self.p);
        if den.is_multiple_of(&p) {
            return Err(Error::DenominatorNotUnit { value: x.to_string(), p: self.p });
        }
        let m = BigInt::from(self.modulus.clone());
        let inv = den.mod_floor(&m).modinv(&m).expect("denominator coprime to p");
        Ok((x.0.numer() * inv).mod_floor(&m).to_biguint().expect("reduced"))
    }

    /// Inverse of a unit residue.
    pub(crate) fn inv_residue(&self, x: &BigUint) -> Option<BigUint> {
        x.modinv(&self.modulus)
    }
}

/// `lift_rational(x, p, W)`: the residue `r` with `r * den == num (mod p^W)`.
pub fn lift_rational(x: &PRational, p: u64, prec: u32) -> Result<PadicScalar> {
    PadicRing::new(p, prec)?.lift(x)
}

/// Exact p-adic valuation of a nonzero integer.
pub fn int_valuation(x: &BigInt, p: u64) -> Option<u32> {
    if x.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut x = x.abs();
    let mut v = 0;
    loop {
        let (q, r) = x.div_rem(&p);
        if !r.is_zero() {
            return Some(v);
        }
        x = q;
        v += 1;
    }
}

pub fn biguint_valuation(x: &BigUint, p: u64) -> Option<u32> {
    int_valuation(&BigInt::from_biguint(Sign::Plus, x.clone()), p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Valuation {
    Finite(u32),
    /// Residue is zero: the true valuation is at least the working exponent.
    AtLeast(u32),
}

impl Valuation {
    /// Lower bound usable in comparisons.
    pub fn bound(self) -> u32 {
        match self {
            Valuation::Finite(v) | Valuation::AtLeast(v) => v,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::AtLeast(w) => write!(f, ">={w}"),
        }
    }
}

/// Element of `Z/p^W`, canonical representative in `[0, p^W)`.
#[derive(Clone, PartialEq, Eq)]
pub struct PadicScalar {
    ring: Ring,
    residue: BigUint,
}

impl PadicScalar {
    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn p(&self) -> u64 {
        self.ring.p
    }

    pub fn prec(&self) -> u32 {
        self.ring.prec
    }

    pub fn residue(&self) -> &BigUint {
        &self.residue
    }

    pub fn into_residue(self) -> BigUint {
        self.residue
    }

    pub fn is_zero(&self) -> bool {
        self.residue.is_zero()
    }

    pub fn valuation(&self) -> Valuation {
        match biguint_valuation(&self.residue, self.ring.p) {
            Some(v) => Valuation::Finite(v),
            None => Valuation::AtLeast(self.ring.prec),
        }
    }

    pub fn is_unit(&self) -> bool {
        self.valuation() == Valuation::Finite(0)
    }

    /// Base-p digits, least significant first.
    pub fn digits(&self, count: u32) -> Result<Vec<u32>> {
        if count > self.ring.prec {
            return Err(Error::PrecisionExceeded { requested: count, available: self.ring.prec });
        }
        Ok(to_digits(&self.residue, self.ring.p, count))
    }

    pub fn invert_unit(&self) -> Result<PadicScalar> {
        match self.ring.inv_residue(&self.residue) {
            Some(r) => Ok(PadicScalar { ring: self.ring.clone(), residue: r }),
            None => Err(Error::NonUnitDivisor { valuation: self.valuation().bound() }),
        }
    }

    pub fn pow(&self, e: &BigUint) -> PadicScalar {
        PadicScalar { ring: self.ring.clone(), residue: self.residue.modpow(e, &self.ring.modulus) }
    }

    pub fn pow_u64(&self, e: u64) -> PadicScalar {
        self.pow(&BigUint::from(e))
    }

    /// Image under `Z/p^W -> Z/p^k` for `k <= W`.
    pub fn reduce_to(&self, prec: u32) -> PadicScalar {
        assert!(prec <= self.ring.prec, "cannot raise precision by reduction");
        let ring = self.ring.with_prec(prec);
        ring.from_biguint(self.residue.clone())
    }

    /// Exact division by `p^k`; the result lives modulo `p^(W-k)`.
    pub fn div_p_pow(&self, k: u32) -> Result<PadicScalar> {
        if k == 0 {
            return Ok(self.clone());
        }
        if k >= self.ring.prec {
            return Err(Error::PrecisionExhausted(format!(
                "dividing by p^{k} at working exponent {}",
                self.ring.prec
            )));
        }
        let pk = self.ring.p_pow(k);
        let (q, r) = self.residue.div_rem(&pk);
        if !r.is_zero() {
            return Err(Error::NonUnitDivisor { valuation: self.valuation().bound() });
        }
        Ok(self.ring.with_prec(self.ring.prec - k).from_biguint(q))
    }

    pub fn mul_p_pow(&self, k: u32) -> PadicScalar {
        self.ring.from_biguint(&self.residue * self.ring.p_pow(k))
    }

    /// Symmetric representative in `(-p^W/2, p^W/2]`.
    pub fn signed(&self) -> BigInt {
        let r = BigInt::from(self.residue.clone());
        let m = BigInt::from(self.ring.modulus.clone());
        if &r * 2 > m {
            r - m
        } else {
            r
        }
    }

    fn check(&self, other: &PadicScalar) {
        assert!(
            self.ring == other.ring,
            "mixed p-adic rings: ({}, {}) vs ({}, {})",
            self.ring.p,
            self.ring.prec,
            other.ring.p,
            other.ring.prec
        );
    }
}

pub fn to_digits(x: &BigUint, p: u64, count: u32) -> Vec<u32> {
    let p = BigUint::from(p);
    let mut x = x.clone();
    let mut out = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let (q, r) = x.div_rem(&p);
        out.push(r.to_u32().expect("digit below p"));
        x = q;
    }
    out
}

pub fn from_digits(digits: &[u32], p: u64) -> BigUint {
    let p = BigUint::from(p);
    digits.iter().rev().fold(BigUint::zero(), |acc, &d| acc * &p + BigUint::from(d))
}

impl fmt::Debug for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {}^{})", self.residue, self.ring.p, self.ring.prec)
    }
}

impl fmt::Display for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.residue)
    }
}

impl<'a> Add<&'a PadicScalar> for &'a PadicScalar {
    type Output = PadicScalar;
    fn add(self, rhs: &PadicScalar) -> PadicScalar {
        self.check(rhs);
        self.ring.from_biguint(&self.residue + &rhs.residue)
    }
}

impl<'a> Sub<&'a PadicScalar> for &'a PadicScalar {
    type Output = PadicScalar;
    fn sub(self, rhs: &PadicScalar) -> PadicScalar {
        self.check(rhs);
        self.ring.from_biguint(&self.residue + &self.ring.modulus - &rhs.residue)
    }
}

impl<'a> Mul<&'a PadicScalar> for &'a PadicScalar {
    type Output = PadicScalar;
    fn mul(self, rhs: &PadicScalar) -> PadicScalar {
        self.check(rhs);
        self.ring.from_biguint(&self.residue * &rhs.residue)
    }
}

impl Neg for &PadicScalar {
    type Output = PadicScalar;
    fn neg(self) -> PadicScalar {
        self.ring.from_biguint(&self.ring.modulus - &self.residue)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<PadicScalar> for PadicScalar {
            type Output = PadicScalar;
            fn $m(self, rhs: PadicScalar) -> PadicScalar {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for PadicScalar {
    type Output = PadicScalar;
    fn neg(self) -> PadicScalar {
        -&self
    }
}

/// A rational number; lies in `Z_p` for every p not dividing its denominator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PRational(pub BigRational);

impl PRational {
    pub fn new(num: i64, den: i64) -> PRational {
        PRational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn int(n: i64) -> PRational {
        PRational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> PRational {
        PRational::int(0)
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// `v_p` of the rational; `None` for zero.
    pub fn valuation(&self, p: u64) -> Option<i64> {
        let vn = int_valuation(self.numer(), p)? as i64;
        let vd = int_valuation(self.denom(), p).unwrap_or(0) as i64;
        Some(vn - vd)
    }

    pub fn is_p_integral(&self, p: u64) -> bool {
        !self.denom().is_multiple_of(&BigInt::from(p))
    }

    pub fn scale(&self, k: i64) -> PRational {
        PRational(&self.0 * BigRational::from_integer(BigInt::from(k)))
    }

    pub fn add_int(&self, k: i64) -> PRational {
        PRational(&self.0 + BigRational::from_integer(BigInt::from(k)))
    }

    /// Integer representative in `[0, p^k)`.
    pub fn representative(&self, p: u64, k: u32) -> Result<BigUint> {
        let ring = PadicRing::new(p, k.max(1))?;
        if k == 0 {
            return Ok(BigUint::zero());
        }
        ring.lift_residue(self)
    }

    pub fn pow(&self, e: u32) -> PRational {
        PRational(Pow::pow(&self.0, e))
    }
}

impl fmt::Display for PRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for PRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for PRational {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("cannot parse rational {s:?}"));
        let s = s.trim();
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let n: BigInt = n.parse().map_err(|_| bad())?;
        let d: BigInt = d.parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        Ok(PRational(BigRational::new(n, d)))
    }
}

impl Serialize for PRational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PRational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl Add for &PRational {
    type Output = PRational;
    fn add(self, rhs: &PRational) -> PRational {
        PRational(&self.0 + &rhs.0)
    }
}

impl Sub for &PRational {
    type Output = PRational;
    fn sub(self, rhs: &PRational) -> PRational {
        PRational(&self.0 - &rhs.0)
    }
}

impl Mul for &PRational {
    type Output = PRational;
    fn mul(self, rhs: &PRational) -> PRational {
        PRational(&self.0 * &rhs.0)
    }
}

impl Neg for &PRational {
    type Output = PRational;
    fn neg(self) -> PRational {
        PRational(-&self.0)
    }
}

/// `p^v * unit` with the valuation known exactly, or an exact zero.
///
/// Products and quotients of such values lose no p-adic precision, which is
/// what makes ratios like `(1 - q^X) / (1 - q^Y)` computable without guessing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Factored {
    Zero,
    Value { valuation: i64, unit: PadicScalar },
}

impl Factored {
    pub fn one(ring: &Ring) -> Factored {
        Factored::Value { valuation: 0, unit: ring.one() }
    }

    /// Exact rational, unit part computed modulo `p^W` of `ring`.
    pub fn from_rational(ring: &Ring, x: &PRational) -> Factored {
        let p = ring.p();
        match x.valuation(p) {
            None => Factored::Zero,
            Some(v) => {
                let pb = BigInt::from(p);
                let (mut n, mut d) = (x.numer().clone(), x.denom().clone());
                if v > 0 {
                    n /= Pow::pow(&pb, v as u32);
                } else if v < 0 {
                    d /= Pow::pow(&pb, (-v) as u32);
                }
                let unit = ring.lift(&PRational(BigRational::new(n, d))).expect("unit");
                Factored::Value { valuation: v, unit }
            }
        }
    }

    /// Split a residue whose true valuation is known to be `v`.
    pub fn from_scalar_with_valuation(x: &PadicScalar, v: u32) -> Result<Factored> {
        let unit = x.div_p_pow(v)?;
        if !unit.is_unit() {
            return Err(Error::PrecisionExhausted(format!(
                "expected valuation {v} but residue has valuation {}",
                x.valuation()
            )));
        }
        Ok(Factored::Value { valuation: v as i64, unit })
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Factored::Zero)
    }

    pub fn valuation(&self) -> Option<i64> {
        match self {
            Factored::Zero => None,
            Factored::Value { valuation, .. } => Some(*valuation),
        }
    }

    pub fn mul(&self, other: &Factored) -> Factored {
        match (self, other) {
            (Factored::Value { valuation: a, unit: u }, Factored::Value { valuation: b, unit: w }) => {
                let (u, w) = common_prec(u, w);
                Factored::Value { valuation: a + b, unit: &u * &w }
            }
            _ => Factored::Zero,
        }
    }

    pub fn div(&self, other: &Factored) -> Result<Factored> {
        match (self, other) {
            (_, Factored::Zero) => Err(Error::NonUnitDivisor { valuation: u32::MAX }),
            (Factored::Zero, _) => Ok(Factored::Zero),
            (Factored::Value { valuation: a, unit: u }, Factored::Value { valuation: b, unit: w }) => {
                let (u, w) = common_prec(u, w);
                Ok(Factored::Value { valuation: a - b, unit: &u * &w.invert_unit()? })
            }
        }
    }

    /// `p^v * unit` as a residue modulo `p^prec`; requires `v >= 0`.
    pub fn to_scalar(&self, ring: &Ring) -> Result<PadicScalar> {
        match self {
            Factored::Zero => Ok(ring.zero()),
            Factored::Value { valuation, unit } => {
                if *valuation < 0 {
                    return Err(Error::PrecisionExhausted(format!(
                        "value has negative valuation {valuation}"
                    )));
                }
                let v = *valuation as u32;
                if v >= ring.prec() {
                    return Ok(ring.zero());
                }
                let needed = ring.prec() - v;
                if unit.prec() < needed {
                    return Err(Error::PrecisionExhausted(format!(
                        "unit known modulo p^{} but p^{needed} is needed",
                        unit.prec()
                    )));
                }
                Ok(ring.from_biguint(unit.residue() * ring.p_pow(v)))
            }
        }
    }
}

fn common_prec(a: &PadicScalar, b: &PadicScalar) -> (PadicScalar, PadicScalar) {
    match a.prec().cmp(&b.prec()) {
        std::cmp::Ordering::Equal => (a.clone(), b.clone()),
        std::cmp::Ordering::Less => (a.clone(), b.reduce_to(a.prec())),
        std::cmp::Ordering::Greater => (a.reduce_to(b.prec()), b.clone()),
    }
}
