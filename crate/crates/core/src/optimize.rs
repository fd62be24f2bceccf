//! Threshold and source-power design.
//!
//! One-dimensional maximizations use a coarse grid scan followed by
//! golden-section refinement inside the bracket around the best grid point.
//! The same routine serves as the numeric cross-check of the closed-form
//! source power.

use serde::Serialize;

use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::relay::{eligibility_probability, f_alpha, relay_power_budget};

/// Grid size of the coarse scan.
pub const GRID_POINTS: usize = 512;
/// Golden-section stopping width, relative to the search interval.
pub const REFINE_TOL: f64 = 1e-6;
/// Threshold search stops at this multiple of σ_p²; f and p are flat beyond.
pub const ALPHA_SEARCH_SPAN: f64 = 20.0;
/// Relative disagreement tolerated between closed-form and numeric source power.
pub const SOURCE_POWER_AGREEMENT: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Optimum {
    pub arg: f64,
    pub value: f64,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizes `f` on `[lo, hi]`.
pub fn maximize_1d<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> Optimum {
    assert!(hi > lo, "empty interval [{lo}, {hi}]");
    let step = (hi - lo) / (GRID_POINTS - 1) as f64;
    let at = |k: usize| if k == GRID_POINTS - 1 { hi } else { lo + step * k as f64 };
    let (best_k, _) =
        (0..GRID_POINTS)
            .map(|k| (k, f(at(k))))
            .fold((0, f64::NEG_INFINITY), |acc, (k, v)| if v > acc.1 { (k, v) } else { acc });

    let mut a = at(best_k.saturating_sub(1));
    let mut b = at((best_k + 1).min(GRID_POINTS - 1));
    let tol = REFINE_TOL * (hi - lo);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        }
    }
    // endpoints can beat the interior when the optimum sits on the boundary
    [(0.5 * (a + b)), a, b]
        .into_iter()
        .map(|x| Optimum { arg: x, value: f(x) })
        .fold(Optimum { arg: lo, value: f64::NEG_INFINITY }, |acc, o| if o.value > acc.value { o } else { acc })
}

/// The threshold objective whose maximizer is the optimal α for fixed Ps.
pub fn alpha_objective(config: &NetworkConfig, ps: f64, alpha: f64) -> f64 {
    let gamma_r = config.residual_budget(ps);
    let p = eligibility_probability(alpha, config.sigma_p2, config.n_p).unwrap_or(0.0);
    let f = f_alpha(alpha, config.sigma_p2).unwrap_or(0.0);
    gamma_r * ps * p / (gamma_r * config.sigma_d2 + (config.sigma_s2 * ps + 1.0) * f)
}

/// Rate-maximizing eligibility threshold for source power `ps`. Does not
/// depend on `config.n`.
pub fn optimal_alpha(config: &NetworkConfig, ps: f64) -> Result<Optimum> {
    config.validate()?;
    let gamma_r = config.residual_budget(ps);
    if gamma_r <= 0.0 {
        return Err(Error::Infeasible(format!("γ_r = {gamma_r} <= 0 at Ps = {ps}")));
    }
    Ok(maximize_1d(|a| alpha_objective(config, ps, a), 0.0, ALPHA_SEARCH_SPAN * config.sigma_p2))
}

/// Inputs of the source-power problem, with f(α) given directly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SourcePowerParams {
    pub gamma: f64,
    pub sigma_sp2: f64,
    pub sigma_s2: f64,
    pub sigma_d2: f64,
    pub f_alpha: f64,
    pub ps_max: f64,
}

impl SourcePowerParams {
    pub fn from_config(config: &NetworkConfig, alpha: f64) -> Result<Self> {
        Ok(Self {
            gamma: config.gamma,
            sigma_sp2: config.sigma_sp2,
            sigma_s2: config.sigma_s2,
            sigma_d2: config.sigma_d2,
            f_alpha: f_alpha(alpha, config.sigma_p2)?,
            ps_max: config.ps_max,
        })
    }

    /// `(2γ − σ_sp² Ps) Ps / ((2γ − σ_sp² Ps) σ_d² + (σ_s² Ps + 1) f)`.
    pub fn objective(&self, ps: f64) -> f64 {
        let gamma_r = 2.0 * self.gamma - self.sigma_sp2 * ps;
        gamma_r * ps / (gamma_r * self.sigma_d2 + (self.sigma_s2 * ps + 1.0) * self.f_alpha)
    }

    /// Upper end of the feasible interval, `min(Ps_max, 2γ/σ_sp²)`.
    pub fn upper(&self) -> f64 {
        self.ps_max.min(2.0 * self.gamma / self.sigma_sp2)
    }

    /// Stationary point of the objective, unclamped.
    ///
    /// The root of `s e P² − 2 s A P + 2γA = 0` (`e = σ_sp²σ_d² − σ_s² f`,
    /// `A = 2γσ_d² + f`) is written in rationalized form, which is free of
    /// cancellation as `e → 0` and reduces to `γ/σ_sp²` at `e = 0`.
    pub fn stationary_point(&self) -> f64 {
        let (s, d, t, f, g) = (self.sigma_sp2, self.sigma_d2, self.sigma_s2, self.f_alpha, self.gamma);
        let e = s * d - t * f;
        if e.abs() <= 1e-14 * (s * d).max(t * f) {
            return g / s;
        }
        let a = 2.0 * g * d + f;
        let root = (a * f * (s + 2.0 * g * t) / s).sqrt();
        2.0 * g * a / (s * (a + root))
    }

    pub fn closed_form(&self) -> f64 {
        self.stationary_point().min(self.ps_max)
    }

    pub fn numeric(&self) -> Optimum {
        maximize_1d(|p| self.objective(p), 0.0, self.upper())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SourcePowerOptimum {
    pub ps_opt: f64,
    pub closed_form: f64,
    pub numeric: f64,
    pub objective: f64,
}

/// Closed-form optimal source power, checked against numeric maximization.
pub fn optimal_source_power_for(params: &SourcePowerParams) -> Result<SourcePowerOptimum> {
    let positive = [params.gamma, params.sigma_sp2, params.sigma_s2, params.sigma_d2, params.ps_max];
    if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::Domain(format!("source power parameters must be > 0: {params:?}")));
    }
    if !(params.f_alpha > 0.0) {
        return Err(Error::Infeasible("f(α) = 0: no relay can be eligible".into()));
    }
    let closed = params.closed_form();
    let numeric = params.numeric();
    if (closed - numeric.arg).abs() > SOURCE_POWER_AGREEMENT * closed {
        return Err(Error::OracleMismatch { closed, numeric: numeric.arg });
    }
    Ok(SourcePowerOptimum {
        ps_opt: closed,
        closed_form: closed,
        numeric: numeric.arg,
        objective: params.objective(closed),
    })
}

pub fn optimal_source_power(config: &NetworkConfig, alpha: f64) -> Result<SourcePowerOptimum> {
    if !(alpha > 0.0) {
        return Err(Error::Infeasible(format!("threshold must be > 0, got {alpha}")));
    }
    optimal_source_power_for(&SourcePowerParams::from_config(config, alpha)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DesignPoint {
    pub alpha_opt: f64,
    pub ps_opt: f64,
    pub pr_opt: f64,
    pub objective_value: f64,
}

/// Optimal α at `ps`, then the optimal source power for that α, then the
/// relay power the budget allows.
pub fn design_point(config: &NetworkConfig, ps: f64) -> Result<DesignPoint> {
    let alpha = optimal_alpha(config, ps)?;
    let source = optimal_source_power(config, alpha.arg)?;
    let budget =
        relay_power_budget(alpha.arg, source.ps_opt, config.gamma, config.sigma_sp2, config.n, config.sigma_p2)?;
    Ok(DesignPoint {
        alpha_opt: alpha.arg,
        ps_opt: source.ps_opt,
        pr_opt: budget.pr,
        objective_value: alpha_objective(config, source.ps_opt, alpha.arg),
    })
}

/// Channel variance varied in a source-power trend study.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceAxis {
    SigmaSp2,
    SigmaS2,
    SigmaD2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Nonincreasing,
    Nondecreasing,
    Constant,
    Mixed,
}

impl Trend {
    fn of(values: &[f64]) -> Trend {
        let diffs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
        let eps = 1e-9;
        let up = diffs.iter().all(|&d| d >= -eps);
        let down = diffs.iter().all(|&d| d <= eps);
        match (up, down) {
            (true, true) => Trend::Constant,
            (true, false) => Trend::Nondecreasing,
            (false, true) => Trend::Nonincreasing,
            (false, false) => Trend::Mixed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrendSeries {
    pub axis: VarianceAxis,
    pub values: Vec<f64>,
    pub ps_opt: Vec<f64>,
    pub trend: Trend,
}

/// Optimal source power along each variance axis with the other two held at
/// their `base` values.
pub fn qualitative_ps_trends(base: &SourcePowerParams, values: &[f64]) -> Result<Vec<TrendSeries>> {
    [VarianceAxis::SigmaSp2, VarianceAxis::SigmaS2, VarianceAxis::SigmaD2]
        .into_iter()
        .map(|axis| {
            let ps_opt = values
                .iter()
                .map(|&v| {
                    let mut p = *base;
                    match axis {
                        VarianceAxis::SigmaSp2 => p.sigma_sp2 = v,
                        VarianceAxis::SigmaS2 => p.sigma_s2 = v,
                        VarianceAxis::SigmaD2 => p.sigma_d2 = v,
                    }
                    optimal_source_power_for(&p).map(|o| o.ps_opt)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(TrendSeries { axis, values: values.to_vec(), trend: Trend::of(&ps_opt), ps_opt })
        })
        .collect()
}

/// Interference cap shrinking as `γ_n = c0 n^{−δ}` and the powers that meet it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecaySchedule {
    pub n: usize,
    pub delta: f64,
    pub gamma_n: f64,
    pub ps_n: f64,
    pub pr_n: f64,
    /// Coefficient of `log n` in the predicted rate growth.
    pub predicted_slope: f64,
    /// δ ≥ ½: the rate stays bounded.
    pub bounded: bool,
}

impl DecaySchedule {
    /// Config with the scheduled cap and relay count.
    pub fn apply(&self, config: &NetworkConfig) -> NetworkConfig {
        NetworkConfig { n: self.n, gamma: self.gamma_n, ..config.clone() }
    }
}

/// `Ps_n = min(Ps*, γ_n/σ_sp²)`, where Ps* is the optimal source power at
/// γ = c0 and the configured α; `Pr_n = γ_{r,n} / (n f(α))`.
pub fn interference_decay_schedule(config: &NetworkConfig, delta: f64, c0: f64, n: usize) -> Result<DecaySchedule> {
    if delta.is_nan() || delta < 0.0 {
        return Err(Error::Domain(format!("δ must be >= 0, got {delta}")));
    }
    if !(c0 > 0.0) || n == 0 {
        return Err(Error::Domain(format!("need c0 > 0 and n >= 1, got c0 = {c0}, n = {n}")));
    }
    let base = NetworkConfig { gamma: c0, ..config.clone() };
    let ps_star = optimal_source_power(&base, config.alpha)?.ps_opt;
    let gamma_n = c0 * (n as f64).powf(-delta);
    let ps_n = ps_star.min(gamma_n / config.sigma_sp2);
    let budget = relay_power_budget(config.alpha, ps_n, gamma_n, config.sigma_sp2, n, config.sigma_p2)?;
    let bounded = delta >= 0.5;
    let m = config.m as f64;
    Ok(DecaySchedule {
        n,
        delta,
        gamma_n,
        ps_n,
        pr_n: budget.pr,
        predicted_slope: if bounded { 0.0 } else { m * (1.0 - 2.0 * delta) / 2.0 },
        bounded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_params(f: f64) -> SourcePowerParams {
        SourcePowerParams { gamma: 5.0, sigma_sp2: 1.0, sigma_s2: 1.0, sigma_d2: 1.0, f_alpha: f, ps_max: 10.0 }
    }

    #[test]
    fn maximize_parabola() {
        let o = maximize_1d(|x| -(x - 0.3).powi(2), -2.0, 5.0);
        assert!((o.arg - 0.3).abs() < 1e-5);
        let edge = maximize_1d(|x| x, 0.0, 1.0);
        assert_eq!(edge.arg, 1.0);
        let left = maximize_1d(|x| -x, 0.0, 1.0);
        assert_eq!(left.arg, 0.0);
    }

    #[test]
    fn alpha_reference_point() {
        let cfg = NetworkConfig::default();
        let o = optimal_alpha(&cfg, 5.0).unwrap();
        assert!((1.55..=1.85).contains(&o.arg), "{}", o.arg);
        for da in [-0.1, 0.1] {
            assert!(o.value >= alpha_objective(&cfg, 5.0, o.arg + da));
        }
        let far = NetworkConfig { n: 10, ..cfg.clone() };
        let near = NetworkConfig { n: 10_000, ..cfg.clone() };
        assert_eq!(optimal_alpha(&far, 5.0).unwrap(), optimal_alpha(&near, 5.0).unwrap());
        assert!(matches!(optimal_alpha(&cfg, 10.0), Err(Error::Infeasible(_))));
    }

    #[test]
    fn alpha_grid_oracle_four_primaries() {
        let cfg = NetworkConfig { n_p: 4, ..NetworkConfig::default() };
        let hi = ALPHA_SEARCH_SPAN * cfg.sigma_p2;
        let grid = 10_000;
        let (arg, _) = (1..=grid)
            .map(|k| hi * k as f64 / grid as f64)
            .map(|a| (a, alpha_objective(&cfg, 5.0, a)))
            .fold((0.0, f64::NEG_INFINITY), |acc, (a, v)| if v > acc.1 { (a, v) } else { acc });
        let o = optimal_alpha(&cfg, 5.0).unwrap();
        assert!((o.arg - arg).abs() < 1e-3 + hi / grid as f64, "{} vs {arg}", o.arg);
    }

    #[test]
    fn source_power_branches() {
        // σ_sp²σ_d² = σ_s² f  → γ/σ_sp²
        let eq = SourcePowerParams { sigma_s2: 1.25, ..unit_params(0.8) };
        let o = optimal_source_power_for(&eq).unwrap();
        assert!((o.ps_opt - 5.0).abs() < 1e-12);

        let o = optimal_source_power_for(&unit_params(0.8)).unwrap();
        assert!((o.ps_opt - 5.2555).abs() < 1e-3, "{}", o.ps_opt);
        // stationarity quadratic 0.2 P² − 21.6 P + 108 = 0
        let p = o.ps_opt;
        assert!((0.2 * p * p - 21.6 * p + 108.0).abs() < 1e-9);

        let capped = SourcePowerParams { ps_max: 1.0, ..unit_params(0.8) };
        assert_eq!(optimal_source_power_for(&capped).unwrap().ps_opt, 1.0);
    }

    #[test]
    fn source_power_near_equality_is_stable() {
        for eps in [1e-6, 1e-9, 1e-12, -1e-9] {
            let p = SourcePowerParams { sigma_s2: 1.25 * (1.0 + eps), ..unit_params(0.8) };
            assert!((p.stationary_point() - 5.0).abs() < 1e-4);
        }
    }

    #[test]
    fn source_power_errors() {
        assert!(matches!(optimal_source_power_for(&unit_params(0.0)), Err(Error::Infeasible(_))));
        let bad = SourcePowerParams { gamma: -1.0, ..unit_params(0.8) };
        assert!(optimal_source_power_for(&bad).is_err());
        assert!(optimal_source_power(&NetworkConfig::default(), 0.0).is_err());
    }

    #[test]
    fn reference_trends() {
        let values: Vec<f64> = (0..=25).map(|k| 0.5 + 0.1 * k as f64).collect();
        let series = qualitative_ps_trends(&unit_params(0.8), &values).unwrap();
        let by = |axis| series.iter().find(|s| s.axis == axis).unwrap().trend;
        assert!(matches!(by(VarianceAxis::SigmaSp2), Trend::Nonincreasing | Trend::Constant));
        assert!(matches!(by(VarianceAxis::SigmaS2), Trend::Nonincreasing | Trend::Constant));
        assert!(matches!(by(VarianceAxis::SigmaD2), Trend::Nondecreasing | Trend::Constant));
    }

    #[test]
    fn design_point_is_consistent() {
        let cfg = NetworkConfig::default();
        let d = design_point(&cfg, 5.0).unwrap();
        assert!(d.alpha_opt > 0.0);
        assert!(d.ps_opt > 0.0 && d.ps_opt <= cfg.ps_max);
        assert!(d.pr_opt > 0.0);
    }

    #[test]
    fn schedules() {
        let cfg = NetworkConfig::default();
        let s0 = interference_decay_schedule(&cfg, 0.0, 5.0, 1000).unwrap();
        assert_eq!(s0.gamma_n, 5.0);
        assert_eq!(s0.predicted_slope, 1.0);
        let s = interference_decay_schedule(&cfg, 0.2, 5.0, 1000).unwrap();
        assert!((s.predicted_slope - 0.6).abs() < 1e-12);
        assert!(!s.bounded);
        let f = f_alpha(cfg.alpha, cfg.sigma_p2).unwrap();
        let gamma_r = 2.0 * s.gamma_n - cfg.sigma_sp2 * s.ps_n;
        assert!(gamma_r > 0.0);
        assert!((1000.0 * s.pr_n * f - gamma_r).abs() < 1e-12);
        assert!(interference_decay_schedule(&cfg, 0.5, 5.0, 1000).unwrap().bounded);
        assert!(interference_decay_schedule(&cfg, -0.1, 5.0, 1000).is_err());
    }
}
