//! Ensemble-level properties.

use proptest::prelude::*;
use xyloc_core::freefermion::solve;
use xyloc_core::localization::{
    clustering_rhs, dynloc_correlator, fit_exponential, lr_constant, realization_correlator, sample_pairs,
};
use xyloc_core::model::{ChainSpec, DisorderSpec, DistanceWindow, EnsembleConfig, TimeGrid};
use xyloc_core::parallel::Executor;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn grid_sup_never_exceeds_eigencorrelator(
        nu in proptest::collection::vec(-3.0f64..3.0, 2..14),
        gamma in -1.0f64..1.0,
        t_max in 1.0f64..50.0,
    ) {
        let n = nu.len();
        let spec = ChainSpec::uniform(1.0, gamma, nu).unwrap();
        let (_, d) = solve(&spec).unwrap();
        let pairs = sample_pairs(n, 0, n - 1, 0);
        let times: Vec<f64> = (0..=40).map(|i| t_max * i as f64 / 40.0).collect();
        let (g, e) = realization_correlator(&d, &pairs, &times);
        for (a, b) in g.iter().zip(&e) {
            prop_assert!(*a <= *b + 1e-12);
        }
    }

    #[test]
    fn lr_constant_is_reproducible(c in 0.01f64..100.0, eta in 0.01f64..5.0) {
        let a = lr_constant(c, eta).unwrap();
        let q = 1.0 - (-eta).exp();
        prop_assert_eq!(a.to_bits(), (96.0 * c / (q * q)).to_bits());
    }

    #[test]
    fn clustering_rhs_monotone(c in 0.1f64..10.0, eta in 0.05f64..2.0, d in 1usize..20, gamma in 0.01f64..3.0) {
        let base = clustering_rhs(c, eta, d, gamma, 1.0, 1.0);
        prop_assert!(clustering_rhs(c * 1.1, eta, d, gamma, 1.0, 1.0) > base);
        prop_assert!(clustering_rhs(c, eta, d + 1, gamma, 1.0, 1.0) < base);
    }

    #[test]
    fn fits_report_their_window(d_min in 1usize..6, span in 3usize..10) {
        let pts: Vec<(usize, f64)> = (0..20).map(|d| (d, (-0.3 * d as f64).exp())).collect();
        let w = DistanceWindow { d_min, d_max: d_min + span };
        let f = fit_exponential(&pts, &w, 0.9).unwrap();
        prop_assert_eq!((f.d_min, f.d_max), (w.d_min, w.d_max));
        prop_assert!((f.eta - 0.3).abs() < 1e-10);
    }
}

#[test]
fn ensemble_tables_do_not_depend_on_worker_count() {
    let mut cfg = EnsembleConfig::new(ChainSpec::uniform(1.0, 0.3, vec![0.0; 24]).unwrap(), DisorderSpec::uniform(3.0, 77, 30).unwrap()).unwrap();
    cfg.time_grid = TimeGrid::new(30.0, 0.25).unwrap();
    cfg.distance_window = DistanceWindow { d_min: 2, d_max: 10 };
    cfg.edge = 2;
    let reference = dynloc_correlator(&cfg, &Executor::sequential()).unwrap();
    for w in [2, 8] {
        assert_eq!(dynloc_correlator(&cfg, &Executor::new(w).unwrap()).unwrap(), reference);
    }
}
