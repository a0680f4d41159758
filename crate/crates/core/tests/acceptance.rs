//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;

use qfrob::cohom::{bessel_gamma_search, projective_search, verify_dwork, ODEParams};
use qfrob::cyclo::{pochhammer_at_root, qnumber_factorization};
use qfrob::frobq::{
    closed_form_constant, diagonal_affine, digit_search, intertwiner_family, verify_main_theorem, AffineFamily,
    SearchConfig,
};
use qfrob::hyperq::{congruence_suite, QHParams};
use qfrob::padic::{from_digits, PRational, PadicRing};
use qfrob::qspecial::{gamma_p_int, QContext};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn r(s: &str) -> PRational {
    s.parse().unwrap()
}

fn q_params(p: u64, a1: &str, h: &str, prec: u32) -> QHParams {
    let ctx = QContext::new(p, PRational::int(p as i64), prec).unwrap();
    QHParams::new(ctx, vec![r(a1), PRational::zero()], r(h)).unwrap()
}

fn check(ok: bool, pass: String, fail: String) -> Outcome {
    if ok {
        Ok(pass)
    } else {
        Err(fail)
    }
}

fn golden_reproduction() -> Outcome {
    let cfg = SearchConfig::new(9);
    let start = Instant::now();
    let found = digit_search(&q_params(3, "1/5", "1/2", cfg.precision()), &cfg).map_err(|e| e.to_string())?;
    let ms = start.elapsed().as_millis();
    let digits = &found.search.digits[0];
    check(
        *digits == [1, 0, 1, 1, 2, 1, 2, 1, 1] && ms < 120_000,
        format!("digits {digits:?} (c = {} mod 3^9) at M=40, W=15 in {ms} ms", found.search.residues[0]),
        format!("digits {digits:?} in {ms} ms"),
    )
}

fn closed_form_match() -> Outcome {
    let p = q_params(3, "1/5", "1/2", 15);
    let closed = closed_form_constant(&p, 9).map_err(|e| e.to_string())?;
    let value = closed[0].residue().clone();
    check(
        value == BigUint::from(10648u32) && closed[1].residue() == &BigUint::from(1u32),
        format!("Gamma_pq eigenvalue ratio = {value} mod 3^9"),
        format!("Gamma_pq eigenvalue ratio = {value} mod 3^9, expected 10648"),
    )
}

fn snapshot(fam: &AffineFamily, c: u32, s: u32, m: usize) -> Vec<String> {
    match fam.evaluate(&[BigUint::from(c)]).reduce(s).unwrap() {
        Err(e) => vec![format!("non-integral at {e:?}")],
        Ok(u) => {
            let u = u.cancel_pole(m);
            (0..4).map(|k| u.get(k / 2, k % 2).to_string()).collect()
        }
    }
}

fn step_snapshots() -> Outcome {
    let fam = intertwiner_family(&q_params(3, "1/5", "1/2", 15), 19, 10).map_err(|e| e.to_string())?;
    let fam = diagonal_affine(&fam, 2);
    let show = |xs: [&str; 4]| -> Vec<String> { xs.iter().map(|x| format!("{x} + O(z^20)")).collect() };
    let (one, zero, last) = ("1 + z + z^2", "0", "1 + 7*z + z^2");
    let expected = [
        // U mod 3 with c^(0)=1, c^(1)=0 and the searched c^(2)=1
        ((10, 1, 0), show(["1", "0", "0", "1"])),
        ((1, 1, 0), show(["1", "0", "z^12 + 2*z^15", "1"])),
        ((19, 1, 0), show(["1", "0", "2*z^12 + z^15", "1"])),
        ((10, 2, 2), show([one, zero, "6*z + 3*z^12 + 3*z^13 + 3*z^14 + 6*z^15 + 6*z^16 + 6*z^17", last])),
        ((37, 2, 2), show([one, zero, "6*z", last])),
        ((64, 2, 2), show([one, zero, "6*z + 6*z^12 + 6*z^13 + 6*z^14 + 3*z^15 + 3*z^16 + 3*z^17", last])),
    ];
    let mut bad = Vec::new();
    for ((c, s, m), want) in &expected {
        let got = snapshot(&fam, *c, *s, *m);
        if got != *want {
            bad.push(format!("c={c} mod 3^{s}: {got:?}"));
        }
    }
    let integral: Vec<u32> = (0..9).filter(|&c| fam.evaluate(&[BigUint::from(c)]).reduce(1).unwrap().is_ok()).collect();
    if integral != [1] {
        bad.push(format!("integral residues mod 9: {integral:?}"));
    }
    check(
        bad.is_empty(),
        "6 displayed matrices reproduced; integrality forces c = 1 mod 9".into(),
        bad.join("; "),
    )
}

fn congruences() -> Outcome {
    let mut bad = Vec::new();
    for (p, a) in [(3u64, [r("1/5"), r("0")]), (5, [r("1/2"), r("0")])] {
        for s in [1u32, 2] {
            let ctx = QContext::new(p, PRational::int(p as i64), s + 8).unwrap();
            let rep = congruence_suite(&ctx, &a, s, 12, -12..=12).map_err(|e| e.to_string())?;
            if !rep.all_hold {
                bad.push(format!("p={p} s={s}: {rep:?}"));
            }
        }
    }
    check(bad.is_empty(), "p in {3,5}, s in {1,2}, M=12, i in [-12,12]".into(), bad.join("; "))
}

fn second_prime() -> Outcome {
    let cfg = SearchConfig::new(4);
    let rep = verify_main_theorem(&q_params(5, "1/2", "1/3", cfg.precision()), &cfg).map_err(|e| e.to_string())?;
    check(
        rep.matches,
        format!("p=5: search {:?} = closed form {:?}", rep.search.search.digits[0], rep.closed_form_digits[0]),
        format!("p=5: search {:?}, closed form {:?}", rep.search.search.digits[0], rep.closed_form_digits[0]),
    )
}

fn dwork_limit() -> Outcome {
    let cfg = SearchConfig::new(4);
    let hyp = ODEParams::new(3, vec![r("1/5"), r("0")], Some(r("1/2"))).unwrap();
    let d = verify_dwork(&hyp, &cfg).map_err(|e| e.to_string())?;
    let proj = projective_search(3, vec![r("1/5"), r("0")], &cfg).map_err(|e| e.to_string())?;
    let stated = &proj.comparisons[0];
    let reflected = &proj.comparisons[1];
    let detail = format!(
        "dwork {:?} vs {:?} ({}); projective {:?} vs stated {:?}, reflected {:?}",
        d.search.search.digits[0],
        d.comparisons[0].digits[0],
        if d.comparisons[0].matches { "match" } else { "MISMATCH" },
        proj.search.search.digits[0],
        stated.digits[0],
        reflected.digits[0],
    );
    check(d.comparisons[0].matches && stated.matches, detail.clone(), detail)
}

/// `Gamma_3'(0) mod 3^k` as a first divided difference at `h = 3^j`.
fn gamma_derivative_oracle(k: u32) -> BigInt {
    let j = k + 6;
    let ring = PadicRing::new(3, k + j).unwrap();
    let h = 3u64.pow(j);
    let diff: BigInt = gamma_p_int(&ring, h).signed() - gamma_p_int(&ring, 0).signed();
    let (q, rem) = diff.div_rem(&BigInt::from(h));
    assert!(rem == BigInt::from(0));
    q.mod_floor(&BigInt::from(3u64.pow(k)))
}

fn bessel_automorphism() -> Outcome {
    let rep = bessel_gamma_search(3, 2, &SearchConfig::new(4)).map_err(|e| e.to_string())?;
    let gamma = from_digits(&rep.search.search.digits[0], 3);
    let expected: BigInt = (gamma_derivative_oracle(3) * BigInt::from(3)).mod_floor(&BigInt::from(81));
    let minus_two = (-&expected * BigInt::from(2)).mod_floor(&BigInt::from(81));
    let found = BigInt::from(gamma.clone());
    check(
        found == expected,
        format!("gamma = {gamma} = p Gamma_3'(0) mod 3^4"),
        format!(
            "gamma = {gamma} mod 3^4; p Gamma_3'(0) = {expected}; -2 p Gamma_3'(0) = {minus_two}{}",
            if found == minus_two { " (agrees)" } else { "" }
        ),
    )
}

fn cyclotomic() -> Outcome {
    let mut bad = Vec::new();
    for p in [2u64, 3, 5] {
        for s in [1u32, 2] {
            let poch = pochhammer_at_root(p, s).map_err(|e| e.to_string())?;
            let qnum = qnumber_factorization(p, s).map_err(|e| e.to_string())?;
            if !(poch && qnum) {
                bad.push(format!("p={p} s={s}: pochhammer {poch}, q-number {qnum}"));
            }
        }
    }
    check(bad.is_empty(), "p in {2,3,5}, s in {1,2}".into(), bad.join("; "))
}

fn stability() -> Outcome {
    let mut rows = Vec::new();
    let mut all = true;
    let mut note = |name: &str, stable: bool| {
        all &= stable;
        rows.push(format!("{name} {}", if stable { "stable" } else { "UNSTABLE" }));
    };
    let golden = SearchConfig { recheck: true, ..SearchConfig::new(9) };
    let rep = verify_main_theorem(&q_params(3, "1/5", "1/2", golden.precision()), &golden).map_err(|e| e.to_string())?;
    note("golden", rep.stable);
    let cfg = SearchConfig { recheck: true, ..SearchConfig::new(4) };
    let rep = verify_main_theorem(&q_params(5, "1/2", "1/3", cfg.precision()), &cfg).map_err(|e| e.to_string())?;
    note("p=5", rep.stable);
    let hyp = ODEParams::new(3, vec![r("1/5"), r("0")], Some(r("1/2"))).unwrap();
    note("dwork", verify_dwork(&hyp, &cfg).map_err(|e| e.to_string())?.stable);
    note("projective", projective_search(3, vec![r("1/5"), r("0")], &cfg).map_err(|e| e.to_string())?.stable);
    note("bessel", bessel_gamma_search(3, 2, &cfg).map_err(|e| e.to_string())?.stable);
    let summary = format!("(M+20, W+2) re-runs: {}", rows.join(", "));
    check(all, summary.clone(), summary)
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("golden reproduction", golden_reproduction),
        ("closed-form match", closed_form_match),
        ("step snapshots", step_snapshots),
        ("congruence suite", congruences),
        ("independent q-case instance", second_prime),
        ("Dwork limit", dwork_limit),
        ("Bessel automorphism", bessel_automorphism),
        ("cyclotomic identities", cyclotomic),
        ("stability certification", stability),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {}: {tag}  {name}: {detail}", i + 1);
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
