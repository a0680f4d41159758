//! `U(z) = Psi_T(z) Lambda Psi_S(z)^{-1}` as a linear function of the
//! entries of `Lambda`, with exact p-power bookkeeping.
//!
//! Both frames are normalized by their value at `z = 0`, so `U(0) = Lambda`.
//! With `A = Psi' diag(p^e)` integral, `V = Psi'(0)`,
//!
//! `U = p^{-dV_T - D} w_T^{-1} adj(V_T) A_T diag(p^{-e_T}) Lambda diag(p^{e_S}) adj(A_S) g^{-1} V_S`
//!
//! where `det V_T = p^{dV_T} w_T` and `det A_S = p^D g` with `w_T`, `g` units.

use num_bigint::BigUint;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::padic::{biguint_valuation, Ring, Valuation};
use crate::qseries::{constant_det_adj, Frame, SeriesMatrix, TruncSeries};

/// Where the working precision went.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct LossAudit {
    pub working_exponent: u32,
    pub certified_exponent: u32,
    pub target_column_shift: Vec<u32>,
    pub source_column_shift: Vec<u32>,
    pub target_vandermonde_valuation: u32,
    pub source_determinant_valuation: u32,
    pub output_shift: u32,
}

pub type Position = (usize, usize);

#[derive(Clone, Debug)]
pub struct IntertwinerFamily {
    basis: Vec<(Position, SeriesMatrix)>,
    shift: u32,
    audit: LossAudit,
}

impl IntertwinerFamily {
    /// Directions for the requested entries of `Lambda`.
    pub fn build(target: &Frame, source: &Frame, positions: &[Position]) -> Result<IntertwinerFamily> {
        let n = target.n();
        assert_eq!(n, source.n());
        assert_eq!(target.order(), source.order());
        assert!(target.ring() == source.ring(), "frames must share the working ring");
        let ring = target.ring().clone();
        let w_int = ring.prec();
        let p = ring.p();

        let (det_vt, adj_vt) = constant_det_adj(&ring, &target.at_zero);
        let dvt = biguint_valuation(&det_vt, p).ok_or(Error::SingularConstantTerm { precision: w_int })?;

        let det_s = source.entries.determinant();
        let d = match biguint_valuation(&det_s.coeffs()[0], p) {
            Some(d) => d,
            None => return Err(Error::SingularConstantTerm { precision: w_int }),
        };
        if d.max(dvt) >= w_int {
            return Err(Error::PrecisionExhausted(format!(
                "determinant valuations ({dvt}, {d}) reach the working exponent {w_int}"
            )));
        }
        let g = det_s.div_p_pow(d).map_err(|_| {
            Error::PrecisionExhausted("source determinant is not divisible by its constant-term valuation".into())
        })?;
        let prec = w_int - d.max(dvt);
        let rp = ring.with_prec(prec);
        let g_inv = g.reduce_to(&rp).invert()?;
        let w_t = ring.with_prec(w_int - dvt).from_biguint(&det_vt / ring.p_pow(dvt)).reduce_to(prec);
        let w_inv = w_t.invert_unit()?;
        let h = g_inv.scale(&w_inv);

        let adj_s = source.entries.adjugate().reduce_to(&rp);
        let at = target.entries.reduce_to(&rp);
        let vs: Vec<Vec<BigUint>> = source.at_zero.iter().map(|r| r.iter().map(|x| rp.reduce(x)).collect()).collect();
        let adj_vt: Vec<Vec<BigUint>> = adj_vt.iter().map(|r| r.iter().map(|x| rp.reduce(x)).collect()).collect();

        let et = &target.column_shift;
        let es = &source.column_shift;
        let exps: Vec<i64> = positions
            .iter()
            .map(|&(k, l)| -(dvt as i64) - d as i64 - et[k] as i64 + es[l] as i64)
            .collect();
        let shift = exps.iter().map(|e| -e).max().unwrap_or(0).max(0) as u32;

        let order = target.order();
        let mut basis = Vec::with_capacity(positions.len());
        for (&(k, l), e) in positions.iter().zip(&exps) {
            // left: adj(V_T) * column k of A_T
            let left: Vec<TruncSeries> = (0..n)
                .map(|r| {
                    let mut acc = TruncSeries::zero(&rp, order);
                    for m in 0..n {
                        if !adj_vt[r][m].is_zero() {
                            acc = acc.add(&at.get(m, k).scale_residue(&adj_vt[r][m]));
                        }
                    }
                    acc
                })
                .collect();
            // right: row l of adj(A_S) * V_S, times the unit factor
            let right: Vec<TruncSeries> = (0..n)
                .map(|c| {
                    let mut acc = TruncSeries::zero(&rp, order);
                    for m in 0..n {
                        if !vs[m][c].is_zero() {
                            acc = acc.add(&adj_s.get(l, m).scale_residue(&vs[m][c]));
                        }
                    }
                    acc.mul(&h)
                })
                .collect();
            let up = (shift as i64 + e) as u32;
            let y = SeriesMatrix::from_fn(n, |r, c| left[r].mul(&right[c]).mul_p_pow(up));
            basis.push(((k, l), y));
        }
        let certified = prec.saturating_sub(shift);
        let audit = LossAudit {
            working_exponent: w_int,
            certified_exponent: certified,
            target_column_shift: et.clone(),
            source_column_shift: es.clone(),
            target_vandermonde_valuation: dvt,
            source_determinant_valuation: d,
            output_shift: shift,
        };
        Ok(IntertwinerFamily { basis, shift, audit })
    }

    /// Build with frames produced at a working exponent chosen so that the
    /// result is certified modulo `p^target`.
    pub fn build_certified(
        target_prec: u32,
        positions: &[Position],
        frames: impl Fn(u32) -> Result<(Frame, Frame)>,
    ) -> Result<IntertwinerFamily> {
        let mut w_int = 2 * target_prec + 8;
        for _ in 0..4 {
            let (t, s) = frames(w_int)?;
            let fam = IntertwinerFamily::build(&t, &s, positions)?;
            let got = fam.audit.certified_exponent;
            if got >= target_prec {
                return Ok(fam);
            }
            w_int += target_prec - got;
        }
        Err(Error::PrecisionExhausted(format!("could not certify {target_prec} digits")))
    }

    pub fn shift(&self) -> u32 {
        self.shift
    }

    pub fn audit(&self) -> &LossAudit {
        &self.audit
    }

    pub fn certified_exponent(&self) -> u32 {
        self.audit.certified_exponent
    }

    pub fn ring(&self) -> &Ring {
        self.basis[0].1.ring()
    }

    fn direction(&self, pos: Position) -> &SeriesMatrix {
        &self.basis.iter().find(|(q, _)| *q == pos).expect("position was requested at build time").1
    }

    /// `U` for `Lambda = sum coeff * E_pos`.
    pub fn evaluate(&self, lambda: &[(Position, BigUint)]) -> CertifiedMatrix {
        let mut acc: Option<SeriesMatrix> = None;
        for (pos, c) in lambda {
            let term = self.direction(*pos).scale_residue(c);
            acc = Some(match acc {
                None => term,
                Some(a) => a.add(&term),
            });
        }
        CertifiedMatrix { scaled: acc.expect("nonempty Lambda"), shift: self.shift }
    }

    /// Restrict to `U(c) = fixed + sum_u c_u direction_u`.
    pub fn affine(&self, fixed: &[(Position, BigUint)], unknowns: &[Vec<(Position, BigUint)>]) -> AffineFamily {
        let fixed = self.evaluate(fixed).scaled;
        let unknowns = unknowns.iter().map(|u| self.evaluate(u).scaled).collect();
        AffineFamily { fixed, unknowns, shift: self.shift, certified: self.certified_exponent() }
    }
}

/// `U = p^{-shift} * scaled`, trustworthy modulo `p^(prec - shift)`.
#[derive(Clone, Debug)]
pub struct CertifiedMatrix {
    pub scaled: SeriesMatrix,
    pub shift: u32,
}

/// Where a p-integrality check failed.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct NonIntegral {
    pub row: usize,
    pub col: usize,
    pub degree: usize,
}

impl CertifiedMatrix {
    pub fn certified_exponent(&self) -> u32 {
        self.scaled.ring().prec().saturating_sub(self.shift)
    }

    /// `U mod p^s` if all coefficients are p-integral.
    pub fn reduce(&self, s: u32) -> Result<std::result::Result<SeriesMatrix, NonIntegral>> {
        if s > self.certified_exponent() {
            return Err(Error::PrecisionExceeded { requested: s, available: self.certified_exponent() });
        }
        Ok(reduce_scaled(&self.scaled, self.shift, s))
    }
}

pub(crate) fn reduce_scaled(
    scaled: &SeriesMatrix,
    shift: u32,
    s: u32,
) -> std::result::Result<SeriesMatrix, NonIntegral> {
    let ring = scaled.ring();
    let n = scaled.n();
    let pk = ring.p_pow(shift);
    let out = ring.with_prec(s);
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let mut coeffs = Vec::with_capacity(scaled.order() + 1);
            for (d, c) in scaled.get(i, j).coeffs().iter().enumerate() {
                let (q, r) = num_integer::Integer::div_rem(c, &pk);
                if !r.is_zero() {
                    return Err(NonIntegral { row: i, col: j, degree: d });
                }
                coeffs.push(q);
            }
            row.push(TruncSeries::new(&out, coeffs));
        }
        rows.push(row);
    }
    Ok(SeriesMatrix::from_rows(rows))
}

/// `U(c) = p^{-shift} (fixed + sum_u c_u unknowns[u])`.
#[derive(Clone, Debug)]
pub struct AffineFamily {
    pub fixed: SeriesMatrix,
    pub unknowns: Vec<SeriesMatrix>,
    pub shift: u32,
    pub certified: u32,
}

impl AffineFamily {
    pub fn ring(&self) -> &Ring {
        self.fixed.ring()
    }

    /// Copy with every matrix reduced modulo `p^(shift + s)`.
    pub fn at_level(&self, s: u32) -> AffineFamily {
        let ring = self.ring().with_prec((self.shift + s).min(self.ring().prec()));
        AffineFamily {
            fixed: self.fixed.reduce_to(&ring),
            unknowns: self.unknowns.iter().map(|u| u.reduce_to(&ring)).collect(),
            shift: self.shift,
            certified: self.certified,
        }
    }

    /// Digits of each unknown beyond `s` that `U mod p^s` depends on.
    pub fn lags(&self) -> Vec<u32> {
        self.unknowns
            .iter()
            .map(|u| match u.min_valuation() {
                Valuation::Finite(v) => self.shift.saturating_sub(v),
                Valuation::AtLeast(_) => 0,
            })
            .collect()
    }

    pub fn evaluate(&self, c: &[BigUint]) -> CertifiedMatrix {
        let mut acc = self.fixed.clone();
        for (u, cu) in self.unknowns.iter().zip(c) {
            if !cu.is_zero() {
                acc = acc.add(&u.scale_residue(cu));
            }
        }
        CertifiedMatrix { scaled: acc, shift: self.shift }
    }
}
