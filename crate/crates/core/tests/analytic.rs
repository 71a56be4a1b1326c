use fockpulse_core::analytic::{cascade_distribution, n_out_cascade};
use fockpulse_core::{closed_form_distribution, n_out_closed_form, HalfInt};
use proptest::prelude::*;

const STEP: f64 = 1e-5;

fn probabilities(theta: f64, f: HalfInt) -> Vec<f64> {
    closed_form_distribution(theta, f).unwrap().probabilities
}

fn spin() -> impl Strategy<Value = HalfInt> {
    (0..=8i32).prop_map(HalfInt::from_twice)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 500, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn probabilities_sum_to_one(theta in 0.0f64..50.0, f in spin()) {
        let p = probabilities(theta, f);
        prop_assert_eq!(p.len(), f.twice() as usize + 1);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        prop_assert!(p.iter().all(|x| (-1e-15..=1.0).contains(x)));
    }

    #[test]
    fn poisson_levels_obey_the_chain(theta in 0.01f64..30.0, f in spin()) {
        let p = probabilities(theta, f);
        let up = probabilities(theta + STEP, f);
        let down = probabilities(theta - STEP, f);
        let top = p.len() - 1;
        for j in 0..p.len() {
            let slope = (up[j] - down[j]) / (2.0 * STEP);
            let feed = if j == 0 { 0.0 } else { p[j - 1] };
            let want = if j == top { feed } else { feed - p[j] };
            prop_assert!((slope - want).abs() < 1e-7, "j={} slope={} want={}", j, slope, want);
        }
    }

    #[test]
    fn photon_number_slope_is_complement_of_top(theta in 0.01f64..30.0, f in spin()) {
        let n = |x: f64| n_out_closed_form(x, f).unwrap();
        let slope = (n(theta + STEP) - n(theta - STEP)) / (2.0 * STEP);
        let top = *probabilities(theta, f).last().unwrap();
        prop_assert!((slope - (1.0 - top)).abs() < 1e-7, "slope={} top={}", slope, top);
    }

    #[test]
    fn photon_number_is_monotone_and_bounded(a in 0.0f64..40.0, b in 0.0f64..40.0, f in spin()) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let n_lo = n_out_closed_form(lo, f).unwrap();
        let n_hi = n_out_closed_form(hi, f).unwrap();
        prop_assert!(n_hi >= n_lo - 1e-10);
        prop_assert!(n_hi <= hi.min(f.twice() as f64) + 1e-10);
    }
}

#[test]
fn small_area_limit_is_linear() {
    // for θ → 0 both the mean and n_out approach θ
    let theta = 1e-3;
    let d = cascade_distribution(theta, 4).unwrap();
    assert!((d.mean() - theta).abs() < 1e-8);
    assert!((n_out_cascade(theta, 4).unwrap() - theta).abs() < 1e-12);
}

#[test]
fn cesium_area_transfers_eight_photons() {
    let theta = 44.546_6;
    assert!(probabilities(theta, HalfInt::from_int(4))[8] > 0.999_999);
    assert!((n_out_closed_form(theta, HalfInt::from_int(4)).unwrap() - 8.0).abs() < 1e-6);
}
