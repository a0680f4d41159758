//! The q-difference system satisfied by the solution frame, and the
//! congruences between the systems at `(pa, p^s, q)` and `(a, p^(s-1), q^p)`.

use qfrob::hyperq::{congruence_suite, QHParams};
use qfrob::padic::PRational;
use qfrob::qseries::SeriesMatrix;
use qfrob::qspecial::QContext;

fn r(s: &str) -> PRational {
    s.parse().unwrap()
}

fn instances(prec: u32) -> Vec<QHParams> {
    let three = QContext::new(3, r("3"), prec).unwrap();
    let five = QContext::new(5, r("5"), prec).unwrap();
    vec![
        QHParams::new(three.clone(), vec![r("1/5"), r("0")], r("1/2")).unwrap(),
        QHParams::new(five, vec![r("1/2"), r("0")], r("1/3")).unwrap(),
        QHParams::new(three, vec![r("1/7"), r("2/5"), r("0")], r("3/4")).unwrap(),
    ]
}

#[test]
fn frame_solves_first_order_system() {
    let order = 30;
    for params in instances(14) {
        let n = params.n();
        let frame = params.analytic_fundamental(order).unwrap();
        let psi = &frame.entries;
        let q = params.ctx().q().clone();
        let us: Vec<_> = (0..n).map(|j| params.u(j).unwrap()).collect();
        let shifted = psi.substitute_scale(&q);
        let left = SeriesMatrix::from_fn(n, |i, j| shifted.get(i, j).scale(&us[j]));
        let right = params.companion_matrix(order).unwrap().mul(psi);
        // the p-power column scaling costs at most its own size in precision
        let loss = frame.column_shift.iter().copied().max().unwrap();
        let ring = params.ring().with_prec(14 - loss);
        assert_eq!(left.reduce_to(&ring), right.reduce_to(&ring), "n = {n}, p = {}", params.ctx().p());
    }
}

#[test]
fn operator_annihilates_each_solution() {
    let order = 30;
    for params in instances(14) {
        for i in 0..params.n() {
            let f = params.hyper_series(i, order).unwrap();
            let out = params.apply_difference_operator(&f.series, &params.a()[i]).unwrap();
            assert!(out.is_zero(), "column {i}: {out}");
        }
    }
}

#[test]
fn perturbed_solution_is_not_annihilated() {
    let params = &instances(12)[0];
    let f = params.hyper_series(0, 20).unwrap();
    let wrong = params.apply_difference_operator(&f.series, &params.a()[1]).unwrap();
    assert!(!wrong.is_zero());
}

#[test]
fn congruences_hold_on_small_grid() {
    for (p, a) in [(3u64, [r("1/5"), r("0")]), (5, [r("1/3"), r("2/7")])] {
        for s in [1u32, 2] {
            let ctx = QContext::new(p, PRational::int(p as i64), s + 8).unwrap();
            let report = congruence_suite(&ctx, &a, s, 12, -12..=12).unwrap();
            assert!(report.all_hold, "p={p} s={s}: {report:?}");
        }
    }
}

#[test]
fn non_integral_exponent_rejected() {
    let ctx = QContext::new(5, r("5"), 8).unwrap();
    assert!(congruence_suite(&ctx, &[r("1/5"), r("0")], 1, 6, 0..=0).is_err());
}
