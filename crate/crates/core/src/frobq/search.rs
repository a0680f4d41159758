//! The rationality test and the digit-by-digit search for the unknown
//! constants of an intertwiner.

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::family::{reduce_scaled, AffineFamily, CertifiedMatrix, NonIntegral};
use crate::error::{Error, Result};
use crate::padic::{from_digits, to_digits};
use crate::qseries::SeriesMatrix;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SearchConfig {
    /// Series truncation order `M`.
    pub order: usize,
    /// Number of digits to determine.
    pub digits: u32,
    /// Extra certified digits beyond `digits`.
    pub guard: u32,
    /// Largest pole power `m` tried in `(1-z)^m U`; `None` means
    /// `max(n, p-1) * digits`.
    pub max_pole: Option<usize>,
    /// Coefficients in degrees `(ceil(window*M), M]` must vanish.
    pub window: f64,
    /// Longest digit prefix allowed in the first stage.
    pub max_offset: u32,
    /// Abort when more prefixes than this survive a stage.
    pub max_survivors: usize,
    /// Abort before a first stage with more candidates than this.
    pub max_candidates: u64,
    /// Repeat the search at `(M+20, W+2)` and require identical digits.
    pub recheck: bool,
}

impl SearchConfig {
    pub fn new(digits: u32) -> SearchConfig {
        SearchConfig {
            order: 40,
            digits,
            guard: 6,
            max_pole: None,
            window: 0.5,
            max_offset: 6,
            max_survivors: 64,
            max_candidates: 1 << 20,
            recheck: false,
        }
    }

    /// Working exponent `W = digits + guard`.
    pub fn precision(&self) -> u32 {
        self.digits + self.guard
    }

    /// The stability re-run configuration.
    pub fn widened(&self) -> SearchConfig {
        SearchConfig { order: self.order + 20, guard: self.guard + 2, recheck: false, ..self.clone() }
    }

    pub fn pole_bound(&self, n: usize, p: u64) -> usize {
        self.max_pole.unwrap_or(n.max(p as usize - 1) * self.digits as usize)
    }

    pub fn window_start(&self) -> usize {
        (self.window * self.order as f64).ceil() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.digits == 0 {
            return Err(Error::InvalidParameter("digit count must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.window) {
            return Err(Error::InvalidParameter("window fraction must lie in [0, 1)".into()));
        }
        if self.window_start() >= self.order {
            return Err(Error::InvalidParameter("vanishing window is empty".into()));
        }
        if self.max_offset == 0 {
            return Err(Error::InvalidParameter("max offset must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Rationality {
    Pass { m: usize },
    NonIntegral { row: usize, col: usize, degree: usize },
    Tail { row: usize, col: usize, degree: usize, coefficient: String },
}

impl Rationality {
    pub fn passed(&self) -> bool {
        matches!(self, Rationality::Pass { .. })
    }
}

impl From<NonIntegral> for Rationality {
    fn from(e: NonIntegral) -> Self {
        Rationality::NonIntegral { row: e.row, col: e.col, degree: e.degree }
    }
}

/// Smallest `m <= max_pole` such that `(1-z)^m U mod p^s` vanishes in degrees
/// `(window_start, M]`.  `u` must already be reduced modulo `p^s`.
pub fn rationality_test(u: &SeriesMatrix, window_start: usize, max_pole: usize) -> Rationality {
    let mut cur = u.clone();
    let order = u.order();
    for m in 0..=max_pole {
        let mut bad = None;
        'scan: for i in 0..u.n() {
            for j in 0..u.n() {
                let c = cur.get(i, j).coeffs();
                for d in window_start + 1..=order {
                    if !num_traits::Zero::is_zero(&c[d]) {
                        bad = Some((i, j, d, c[d].to_string()));
                        break 'scan;
                    }
                }
            }
        }
        match bad {
            None => return Rationality::Pass { m },
            Some((row, col, degree, coefficient)) if m == max_pole => {
                return Rationality::Tail { row, col, degree, coefficient }
            }
            Some(_) => cur = cur.map(|s| s.times_one_minus_z()),
        }
    }
    unreachable!("loop returns at m = max_pole")
}

/// Integrality plus rationality of a certified matrix at modulus `p^s`.
pub fn test_certified(u: &CertifiedMatrix, s: u32, cfg: &SearchConfig) -> Result<Rationality> {
    let bound = cfg.pole_bound(u.scaled.n(), u.scaled.ring().p());
    Ok(match u.reduce(s)? {
        Err(e) => e.into(),
        Ok(m) => rationality_test(&m, cfg.window_start(), bound),
    })
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct Survivor {
    /// Digits per unknown, least significant first.
    pub digits: Vec<Vec<u32>>,
    pub witness: usize,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct StageRecord {
    pub stage: usize,
    /// Modulus exponent of the rationality test.
    pub level: u32,
    pub prefix_length: u32,
    pub candidates: usize,
    pub survivors: Vec<Survivor>,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct DigitSearch {
    /// Digits per unknown, least significant first.
    pub digits: Vec<Vec<u32>>,
    /// Residues of the unknowns modulo `p^certified_exponent`.
    pub residues: Vec<String>,
    pub certified_exponent: u32,
    /// Longest prefix tested in the first stage.
    pub offset: u32,
    /// Per unknown, how many digits beyond the modulus exponent each test depends on.
    pub lags: Vec<u32>,
    pub stages: Vec<StageRecord>,
}

fn evaluate_at(fam: &AffineFamily, p: u64, digits: &[Vec<u32>], s: u32, cfg: &SearchConfig) -> Rationality {
    let c: Vec<BigUint> = digits.iter().map(|d| from_digits(d, p)).collect();
    let u = fam.evaluate(&c);
    match reduce_scaled(&u.scaled, u.shift, s) {
        Err(e) => e.into(),
        Ok(m) => rationality_test(&m, cfg.window_start(), cfg.pole_bound(m.n(), p)),
    }
}

/// Every digit tuple with `lens[u]` digits for unknown `u`.
fn all_tuples(p: u64, lens: &[u32]) -> Vec<Vec<Vec<u32>>> {
    let pers: Vec<u128> = lens.iter().map(|&l| (p as u128).pow(l)).collect();
    let total: u128 = pers.iter().product();
    (0..total)
        .map(|mut idx| {
            let mut out = Vec::with_capacity(lens.len());
            for (per, &len) in pers.iter().zip(lens) {
                let v = idx % per;
                idx /= per;
                out.push(to_digits(&BigUint::from(v), p, len));
            }
            out
        })
        .collect()
}

fn run_stage(
    fam: &AffineFamily,
    p: u64,
    level: u32,
    cands: Vec<Vec<Vec<u32>>>,
    cfg: &SearchConfig,
) -> (usize, Vec<Survivor>) {
    let fam_s = fam.at_level(level);
    let results: Vec<Rationality> = cands.par_iter().map(|d| evaluate_at(&fam_s, p, d, level, cfg)).collect();
    let n = cands.len();
    let survivors = cands
        .into_iter()
        .zip(results)
        .filter_map(|(digits, r)| match r {
            Rationality::Pass { m } => Some(Survivor { digits, witness: m }),
            _ => None,
        })
        .collect();
    (n, survivors)
}

/// Stage-wise search for the digits of every unknown.
///
/// `U mod p^s` depends on unknown `u` modulo `p^(s + lag_u)`, where `lag_u`
/// is read off the valuation of its direction.  Stage 1 tests all prefixes
/// of length `1 + lag_u` modulo `p`; each later stage appends one digit per
/// unknown and tests modulo the next power of `p`.
pub fn search_digits(fam: &AffineFamily, p: u64, cfg: &SearchConfig) -> Result<DigitSearch> {
    cfg.validate()?;
    let target = cfg.digits;
    let lags = fam.lags();
    let offset = 1 + lags.iter().copied().max().unwrap_or(0);
    if offset > cfg.max_offset {
        return Err(Error::InvalidParameter(format!(
            "stage 1 needs prefixes of length {offset}, above the limit {}",
            cfg.max_offset
        )));
    }
    let lens = |level: u32| -> Vec<u32> { lags.iter().map(|l| level + l).collect() };
    let digits_total: u32 = lens(1).iter().sum();
    let count = (p as u128).checked_pow(digits_total).unwrap_or(u128::MAX);
    if count > cfg.max_candidates as u128 {
        return Err(Error::InvalidParameter(format!(
            "stage 1 would test {p}^{digits_total} candidates (lags {lags:?}), above the limit {}",
            cfg.max_candidates
        )));
    }
    let mut stages = Vec::new();
    let mut level = 1;
    let (n_cands, mut survivors) = run_stage(fam, p, level, all_tuples(p, &lens(level)), cfg);
    stages.push(StageRecord { stage: 1, level, prefix_length: offset, candidates: n_cands, survivors: survivors.clone() });
    if survivors.is_empty() {
        return Err(Error::NoSurvivor { stage: 1 });
    }

    let distinct = |sv: &[Survivor]| -> usize {
        let mut heads: Vec<Vec<Vec<u32>>> = sv
            .iter()
            .map(|s| s.digits.iter().map(|d| d[..(target as usize).min(d.len())].to_vec()).collect())
            .collect();
        heads.sort();
        heads.dedup();
        heads.len()
    };
    let shortest = |level: u32| lens(level).into_iter().min().unwrap_or(level);
    loop {
        let done = shortest(level) >= target && distinct(&survivors) == 1;
        let can_continue = level < fam.certified.min(target + cfg.guard);
        if done || !can_continue {
            break;
        }
        if survivors.len() > cfg.max_survivors {
            return Err(ambiguity(stages.len() + 1, &survivors, target));
        }
        level += 1;
        let ones = vec![1; lags.len()];
        let cands: Vec<Vec<Vec<u32>>> = survivors
            .iter()
            .flat_map(|s| {
                all_tuples(p, &ones).into_iter().map(move |ext| {
                    s.digits.iter().zip(ext).map(|(d, e)| [d.clone(), e].concat()).collect::<Vec<_>>()
                })
            })
            .collect();
        let (n_cands, next) = run_stage(fam, p, level, cands, cfg);
        survivors = next;
        stages.push(StageRecord {
            stage: stages.len() + 1,
            level,
            prefix_length: level + lags.iter().copied().max().unwrap_or(0),
            candidates: n_cands,
            survivors: survivors.clone(),
        });
        if survivors.is_empty() {
            return Err(Error::NoSurvivor { stage: stages.len() });
        }
    }
    if shortest(level) < target {
        return Err(Error::PrecisionExhausted(format!(
            "only {} of {target} digits could be tested within the certified precision",
            shortest(level)
        )));
    }
    if distinct(&survivors) != 1 {
        return Err(ambiguity(stages.len(), &survivors, target));
    }
    let digits: Vec<Vec<u32>> = survivors[0].digits.iter().map(|d| d[..target as usize].to_vec()).collect();
    let residues = digits.iter().map(|d| from_digits(d, p).to_string()).collect();
    Ok(DigitSearch { digits, residues, certified_exponent: target, offset, lags, stages })
}

fn ambiguity(stage: usize, survivors: &[Survivor], target: u32) -> Error {
    let sample = survivors
        .iter()
        .take(8)
        .map(|s| s.digits.iter().map(|d| d[..(target as usize).min(d.len())].to_vec()).collect())
        .collect();
    Error::MultipleSurvivors { stage, count: survivors.len(), sample }
}
