use census_lab::asymptotics::{
    compare_table, connected_fraction, ln_big, log_asymptotic, log_asymptotic_large,
    log_asymptotic_small, sigma_y, LRule,
};
use census_lab::config::Caps;
use census_lab::tilt::solve_tilt;
use census_lab::{max_complexity, CountTable};
use proptest::prelude::*;

fn rel(approx: f64, exact: f64) -> f64 {
    (approx - exact).abs() / exact
}

#[test]
fn small_regime_error_shrinks() {
    let table = CountTable::build(80, 90);
    let exact = |k: u64, l: u64| ln_big(&table.count_connected(k, l as i64).unwrap());
    let e80 = rel(log_asymptotic_small(80, 5).unwrap().log_value, exact(80, 5));
    let e40 = rel(log_asymptotic_small(40, 3).unwrap().log_value, exact(40, 3));
    assert!(e80 < e40, "{e80} vs {e40}");
}

#[test]
fn table_rows_follow_rule() {
    let rows = compare_table(&[20, 40, 80], "pow:0.4".parse::<LRule>().unwrap(), &Caps::default()).unwrap();
    assert_eq!(rows.iter().map(|r| r.l).collect::<Vec<_>>(), vec![3, 4, 5]);
    assert!(rows.windows(2).all(|w| w[1].rel_log_error < w[0].rel_log_error));
    assert!(rows.iter().all(|r| r.log_exact > 0.0));
}

#[test]
fn large_regime_route_b_error_shrinks() {
    let table = CountTable::build(60, 120);
    let err = |k: u64| {
        let exact = ln_big(&table.count_connected(k, k as i64).unwrap());
        rel(log_asymptotic_large(k, k).unwrap().reassembled.log_value, exact)
    };
    assert!(err(60) < err(30));
}

#[test]
fn very_large_fraction_in_range() {
    let table = CountTable::build(30, 90);
    let r = connected_fraction(&table, 30, 61).unwrap();
    assert!(r > 0.5 && r <= 1.0, "{r}");
    assert_eq!(connected_fraction(&table, 9, max_complexity(9)).unwrap(), 1.0);
}

#[test]
fn sigma_y_at_the_tilt() {
    let p = solve_tilt(1_000_000, 100).unwrap();
    assert!((sigma_y(1_000_000, p).powi(2) / 200.0 - 1.0).abs() < 0.05);
    // the k/l correction is still visible at l = 10k
    let (k, l) = (1000u64, 10_000u64);
    let p = solve_tilt(k, l).unwrap();
    let excess = sigma_y(k, p).powi(2) / l as f64 - 1.0;
    assert!((excess / (k as f64 / l as f64) - 1.0).abs() < 0.05, "{excess}");
    let (k, l) = (1000u64, 300_000u64);
    let p = solve_tilt(k, l).unwrap();
    assert!((sigma_y(k, p).powi(2) / l as f64 - 1.0).abs() < 0.05);
}

proptest! {
    #[test]
    fn components_always_sum(k in 3u64..1_000_000, frac in 0.0f64..1.0) {
        let top = max_complexity(k).min(k * (k as f64).ln() as u64);
        let l = ((top as f64) * frac) as u64;
        let (_, e) = log_asymptotic(k, l).unwrap();
        prop_assert!(e.log_value.is_finite());
        prop_assert!((e.component_sum() - e.log_value).abs() <= 1e-9 * e.log_value.abs().max(1.0));
    }

    #[test]
    fn routes_agree_on_the_diagonal(k in 1000u64..20_000) {
        let e = log_asymptotic_large(k, k).unwrap();
        let (a, b) = (e.closed_form.log_value, e.reassembled.log_value);
        prop_assert!(((a - b) / b).abs() < 1e-6);
    }
}
