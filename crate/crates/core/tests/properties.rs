use cogrelay::channel::{sample_channels, SeedPath};
use cogrelay::config::NetworkConfig;
use cogrelay::optimize::{optimal_source_power_for, SourcePowerParams};
use cogrelay::rate::{instantaneous_rate, rate_fixed_clustering, rate_gain_clustering, EquivalentLink};
use cogrelay::relay::{
    assign_clusters_fixed, build_relay_plan, eligibility_probability, f_alpha, relay_power_budget, robust_relay_power,
};
use cogrelay::{ClusteringMode, LogBase};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn truncated_mean_is_bounded_and_monotone(a in 0.0f64..50.0, d in 0.0f64..5.0, s2 in 0.05f64..5.0) {
        let f1 = f_alpha(a, s2).unwrap();
        let f2 = f_alpha(a + d, s2).unwrap();
        prop_assert!(f1 >= 0.0 && f1 <= s2);
        prop_assert!(f2 >= f1 - 1e-15);
        let p = eligibility_probability(a, s2, 1).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn budget_never_exceeds_the_cap(a in 0.1f64..10.0, ps in 0.1f64..10.0, gamma in 0.1f64..10.0, n in 1usize..5000, eps in 0.0f64..2.0) {
        let b = relay_power_budget(a, ps, gamma, 1.0, n, 1.0).unwrap();
        let f = f_alpha(a, 1.0).unwrap();
        prop_assert!(b.pr >= 0.0);
        prop_assert!(n as f64 * b.pr * f <= (2.0 * gamma - ps).max(0.0) * (1.0 + 1e-12));
        let robust = robust_relay_power(a, eps, ps, gamma, 1.0, n, 1.0).unwrap();
        prop_assert!(robust.pr <= b.pr + 1e-15);
    }

    #[test]
    fn fixed_clusters_are_balanced(n in 1usize..500, m in 1usize..8) {
        prop_assume!(n >= m);
        let groups = assign_clusters_fixed(n, m).unwrap();
        prop_assert_eq!(groups.len(), n);
        prop_assert!(groups.windows(2).all(|w| w[0] <= w[1]));
        let sizes: Vec<usize> = (0..m).map(|k| groups.iter().filter(|&&g| g == k).count()).collect();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }

    #[test]
    fn instantaneous_rate_is_finite_and_nonnegative(seed in any::<u64>(), n in 2usize..60, m in 1usize..4, ps in 0.1f64..9.0, gain in any::<bool>()) {
        prop_assume!(n >= m);
        let cfg = NetworkConfig { n, m, ..NetworkConfig::default() };
        let r = sample_channels(&cfg, SeedPath::new(seed, 0), false).unwrap();
        let mode = if gain { ClusteringMode::Gain } else { ClusteringMode::Fixed };
        let plan = build_relay_plan(&cfg, &r, mode, ps).unwrap();
        let link = EquivalentLink::new(&r, &plan);
        let rate = instantaneous_rate(ps, m, &link, LogBase::Bits).unwrap();
        prop_assert!(rate.is_finite() && rate >= 0.0);
        prop_assert!((&link.w - link.w.adjoint()).norm() < 1e-12);
    }

    #[test]
    fn closed_forms_grow_with_relay_count(n in 10usize..100_000, m in 1usize..5, ps in 0.5f64..9.5) {
        let cfg = NetworkConfig { n, m, ..NetworkConfig::default() };
        let big = NetworkConfig { n: 2 * n, ..cfg.clone() };
        let pr = |c: &NetworkConfig| relay_power_budget(c.alpha, ps, c.gamma, c.sigma_sp2, c.n, c.sigma_p2).unwrap().pr;
        let f1 = rate_fixed_clustering(&cfg, pr(&cfg), ps).unwrap();
        let f2 = rate_fixed_clustering(&big, pr(&big), ps).unwrap();
        prop_assert!(f2 >= f1);
        let g1 = rate_gain_clustering(&cfg, pr(&cfg), ps).unwrap();
        prop_assert!(g1 >= f1 - 1e-12);
    }

    #[test]
    fn optimal_source_power_is_feasible(gamma in 0.5f64..10.0, sp in 0.1f64..3.0, ss in 0.1f64..3.0, sd in 0.1f64..3.0, f in 0.05f64..1.0, cap in 1.0f64..20.0) {
        let p = SourcePowerParams { gamma, sigma_sp2: sp, sigma_s2: ss, sigma_d2: sd, f_alpha: f, ps_max: cap };
        let o = optimal_source_power_for(&p).unwrap();
        prop_assert!(o.ps_opt > 0.0 && o.ps_opt <= p.upper() * (1.0 + 1e-12));
        for x in [0.25, 0.5, 0.9, 1.0] {
            prop_assert!(p.objective(x * p.upper()) <= o.objective * (1.0 + 1e-9));
        }
    }

    #[test]
    fn config_text_round_trips(n in 1usize..10_000, m in 1usize..8, g in 0.01f64..100.0, a in 0.0f64..20.0) {
        let cfg = NetworkConfig { n, m, gamma: g, alpha: a, ..NetworkConfig::default() };
        let back = NetworkConfig::from_kv_str(&cfg.to_kv_string()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
