//! Property tests for the core invariants.

use proptest::prelude::*;

use survcp_core::conformal::{conformal_p_value, conformal_quantile};
use survcp_core::data::{split_dataset, Interval, SurvivalDataset};
use survcp_core::estimators::{fit_cox, fit_weibull_aft, SurvivalModel};
use survcp_core::rng::Seed;
use survcp_core::scp::weighted_quantile;

fn dataset_strategy() -> impl Strategy<Value = SurvivalDataset> {
    (4usize..60).prop_flat_map(|n| {
        (
            proptest::collection::vec(0.01f64..100.0, n),
            proptest::collection::vec(any::<bool>(), n),
            proptest::collection::vec(-2.0f64..2.0, n * 2),
        )
            .prop_map(move |(time, event, x)| {
                SurvivalDataset::new(x, 2, time, event).unwrap()
            })
    })
}

proptest! {
    #[test]
    fn split_set_identities(data in dataset_strategy(), seed in any::<u64>(),
                            frac in 0.3f64..0.7) {
        let s = split_dataset(&data, frac, Seed::new(seed)).unwrap();
        let n = data.n();
        // train and cal partition {0..n}
        let mut all: Vec<usize> = s.train.iter().chain(&s.cal).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        prop_assert!(s.train.iter().all(|i| !s.cal.contains(i)));
        // cal strata partition cal by the event flag
        let mut joined: Vec<usize> = s.cal0.iter().chain(&s.cal1).copied().collect();
        joined.sort_unstable();
        prop_assert_eq!(joined, s.cal.clone());
        prop_assert!(s.cal0.iter().all(|&i| !data.event()[i]));
        prop_assert!(s.cal1.iter().all(|&i| data.event()[i]));
    }

    #[test]
    fn interval_ordering_enforced(lo in -5.0f64..5.0, hi in -5.0f64..5.0) {
        let r = Interval::new(lo, hi);
        prop_assert_eq!(r.is_ok(), 0.0 <= lo && lo <= hi);
    }

    #[test]
    fn quantile_nesting_in_alpha(
        scores in proptest::collection::vec(-10.0f64..10.0, 1..50),
        a in 0.01f64..0.5, b in 0.01f64..0.5,
    ) {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        let qa = conformal_quantile(&scores, a).unwrap();
        let qb = conformal_quantile(&scores, b).unwrap();
        prop_assert!(qa >= qb);
    }

    #[test]
    fn p_value_bounds_and_monotonicity(
        cal in proptest::collection::vec(-1.0f64..1.0, 0..30),
        s in -1.0f64..1.0, t in -1.0f64..1.0,
    ) {
        let p = conformal_p_value(&cal, s);
        prop_assert!(p > 0.0 && p <= 1.0);
        let (s, t) = if s <= t { (s, t) } else { (t, s) };
        prop_assert!(conformal_p_value(&cal, s) >= conformal_p_value(&cal, t));
    }

    #[test]
    fn weighted_quantile_uniform_reduction(
        scores in proptest::collection::vec(-5.0f64..5.0, 1..40),
        alpha in 0.01f64..0.5,
    ) {
        let w = vec![1.0; scores.len()];
        let wq = weighted_quantile(&scores, &w, 1.0, 1.0 - alpha).unwrap();
        let cq = conformal_quantile(&scores, alpha).unwrap();
        prop_assert_eq!(wq, cq);
    }
}

fn survival_training_data(seed: u64) -> SurvivalDataset {
    // small random dataset with enough events for the fitters
    let mut rng = survcp_core::rng::StreamRng::new(Seed::new(seed));
    let n = 30;
    let mut x = Vec::with_capacity(2 * n);
    let mut time = Vec::with_capacity(n);
    let mut event = Vec::with_capacity(n);
    for _ in 0..n {
        let x1 = rng.uniform();
        let x2 = rng.uniform();
        x.push(x1);
        x.push(x2);
        time.push(libm::exp(1.0 + x1 - x2 + 0.5 * rng.normal()));
        event.push(rng.uniform() < 0.7);
    }
    // guarantee two events
    event[0] = true;
    event[1] = true;
    SurvivalDataset::new(x, 2, time, event).unwrap()
}

fn check_model<M: SurvivalModel>(model: &M, seed: u64) {
    let mut rng = survcp_core::rng::StreamRng::new(Seed::new(seed));
    for _ in 0..5 {
        let x = [rng.uniform(), rng.uniform()];
        // monotone CDF on a 100-point grid
        let mut prev = 0.0;
        for k in 1..=100 {
            let c = model.cdf(&x, 0.3 * k as f64);
            assert!((0.0..=1.0).contains(&c));
            assert!(c >= prev, "cdf not monotone at t = {}", 0.3 * k as f64);
            prev = c;
        }
        // Galois: cdf(inverse_cdf(u)) >= u whenever finite
        for _ in 0..20 {
            let u = rng.uniform();
            let t = model.inverse_cdf(&x, u);
            if t.is_finite() {
                assert!(model.cdf(&x, t) >= u - 1e-12, "galois failed at u = {u}");
            }
        }
    }
}

#[test]
fn fitted_models_satisfy_cdf_contracts() {
    for seed in [1u64, 2, 3, 4, 5] {
        let data = survival_training_data(seed);
        let rows: Vec<usize> = (0..data.n()).collect();
        let cox = fit_cox(&data, &rows, 0.0).unwrap();
        check_model(&cox, seed + 100);
        let aft = fit_weibull_aft(&data, &rows).unwrap();
        check_model(&aft, seed + 200);
    }
}

#[test]
fn p_value_super_uniform() {
    // 10_000 draws of 19 calibration + 1 test score, i.i.d. continuous
    let mut rng = survcp_core::rng::StreamRng::new(Seed::new(2024));
    let n_draws = 10_000;
    let m = 19;
    let mut pvals = Vec::with_capacity(n_draws);
    for _ in 0..n_draws {
        let cal: Vec<f64> = (0..m).map(|_| rng.uniform()).collect();
        pvals.push(conformal_p_value(&cal, rng.uniform()));
    }
    for k in 1..100 {
        let t = k as f64 / 100.0;
        let ecdf = pvals.iter().filter(|&&p| p <= t).count() as f64 / n_draws as f64;
        let se = libm::sqrt(t * (1.0 - t) / n_draws as f64);
        assert!(ecdf <= t + 3.0 * se, "P(p <= {t}) = {ecdf}");
    }
}
