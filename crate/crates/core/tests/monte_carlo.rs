use cogrelay::channel::{sample_channels, SeedPath};
use cogrelay::figures::{figure, Figure, FigureOptions};
use cogrelay::relay::{build_relay_plan, peak_power_scale, plan_with_power, BudgetStatus};
use cogrelay::sim::{expected_interference, measure_interference, run_trials_with, sweep, SweepAxis, SweepOptions};
use cogrelay::{ClusteringMode, Execution, NetworkConfig};

#[test]
fn budgeted_interference_stays_under_the_cap() {
    for (n_p, alpha) in [(1usize, 1.7), (3, 1.0), (2, f64::INFINITY)] {
        let cfg = NetworkConfig { n: 100, n_p, alpha, ..NetworkConfig::default() };
        let out = run_trials_with(&cfg, ClusteringMode::Fixed, 5.0, 10_000, 99, Execution::Parallel).unwrap();
        let expect = expected_interference(&cfg, out.report.pr, 5.0).unwrap();
        assert!(expect <= cfg.gamma * (1.0 + 1e-12));
        for (l, e) in out.interference.iter().enumerate() {
            assert_eq!(e.count, 10_000);
            assert!(e.mean <= cfg.gamma + 3.0 * e.stderr, "N_p={n_p} primary {l}: {} ± {}", e.mean, e.stderr);
            assert!((e.mean - expect).abs() < 5.0 * e.stderr, "primary {l}: {} vs {expect}", e.mean);
        }
    }
}

#[test]
fn peak_scaled_relay_interference_concentrates() {
    let cfg = NetworkConfig { n: 10_000, ..NetworkConfig::default() };
    let gamma_r = cfg.residual_budget(5.0);
    let xi = peak_power_scale(cfg.alpha, cfg.sigma_p2, cfg.n_p, gamma_r).unwrap();
    let pr = xi / cfg.n as f64;
    let samples: Vec<f64> = (0..200)
        .map(|t| {
            let r = sample_channels(&cfg, SeedPath::new(4, t), false).unwrap();
            let mut plan = plan_with_power(&cfg, &r, ClusteringMode::Fixed, 5.0, pr, BudgetStatus::Ok).unwrap();
            plan.ps = 0.0;
            measure_interference(&r, &plan, &cfg)[0] * 2.0
        })
        .collect();
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let sd = (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!((mean / gamma_r - 1.0).abs() < 0.02, "{mean} vs {gamma_r}");
    assert!(sd / mean < 0.1, "relative spread {}", sd / mean);
}

#[test]
fn exhausted_budget_means_zero_rate() {
    let cfg = NetworkConfig { n: 50, sigma_sp2: 2.0, ..NetworkConfig::default() };
    let out = run_trials_with(&cfg, ClusteringMode::Gain, 5.0, 50, 1, Execution::Parallel).unwrap();
    assert_eq!(out.report.mean_rate, 0.0);
    assert_eq!(out.report.pr, 0.0);
    let r = sample_channels(&cfg, SeedPath::new(1, 0), false).unwrap();
    assert!(build_relay_plan(&cfg, &r, ClusteringMode::Gain, 5.0).unwrap().is_zero_rate());
}

#[test]
fn decaying_cap_sweeps() {
    let cfg = NetworkConfig::default();
    let values = [100.0, 1000.0, 10_000.0];
    let run = |delta: f64| {
        let opts = SweepOptions { n_trials: 400, master_seed: 3, delta: Some(delta), ..SweepOptions::default() };
        sweep(&cfg, SweepAxis::N, &values, &opts).unwrap()
    };
    let (a, b) = (run(0.1), run(0.2));
    let data = |s: &cogrelay::sim::SweepResult, k: usize| s.points[k].outcome.as_ref().unwrap().clone();
    let growth = |s: &cogrelay::sim::SweepResult| data(s, 2).closed_form.fixed - data(s, 0).closed_form.fixed;
    assert!(growth(&a) > growth(&b));
    let decay = |s: &cogrelay::sim::SweepResult| data(s, 0).interference[0].mean / data(s, 2).interference[0].mean;
    assert!(decay(&b) > decay(&a), "{} vs {}", decay(&b), decay(&a));
    for s in [&a, &b] {
        for k in 0..3 {
            let d = data(s, k);
            let r = d.report.unwrap();
            assert!(r.stderr > 0.0 && r.n_trials == 400);
            assert!(d.interference[0].mean <= d.config.gamma + 3.0 * d.interference[0].stderr);
        }
    }
}

#[test]
fn threshold_sweep_peaks_near_the_optimum() {
    let cfg = NetworkConfig::default();
    let values: Vec<f64> = (1..=120).map(|k| k as f64 * 0.05).collect();
    let out = sweep(&cfg, SweepAxis::Alpha, &values, &SweepOptions::default()).unwrap();
    let best = out
        .points
        .iter()
        .map(|p| (p.value, p.outcome.as_ref().unwrap().closed_form.fixed))
        .fold((0.0, f64::NEG_INFINITY), |a, x| if x.1 > a.1 { x } else { a });
    assert!((1.55..=1.85).contains(&best.0), "{best:?}");
    assert_eq!(out.values.len(), out.points.len());
}

#[test]
fn figures_are_reproducible_across_execution_modes() {
    let cfg = NetworkConfig::default();
    for fig in [Figure::Fig2, Figure::Fig3, Figure::Fig4] {
        let seq = FigureOptions { n_trials: 3, master_seed: 42, exec: Execution::Sequential };
        let par = FigureOptions { exec: Execution::Parallel, ..seq };
        let a = figure(fig, &cfg, &seq).unwrap().to_csv();
        let b = figure(fig, &cfg, &par).unwrap().to_csv();
        assert_eq!(a, b, "{}", fig.name());
    }
    let t =
        figure(Figure::Fig2, &cfg, &FigureOptions { n_trials: 0, master_seed: 0, exec: Execution::Parallel }).unwrap();
    assert_eq!(t.columns, ["alpha", "closed_form_rate_fixed", "closed_form_rate_gain", "mc_rate", "mc_stderr"]);
}
