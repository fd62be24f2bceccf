//! Monte Carlo orchestration.
//!
//! Trial `t` of a run seeded with `master_seed` always reads the streams of
//! `SeedPath::new(master_seed, t)`, and per-trial results are reduced in
//! trial order, so reports do not depend on how trials are scheduled.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::arp::{arp_eta, arp_overall_rate, arp_schedule, arp_simulate, sample_arp_cycle, ArpRates, InterRelayMode};
use crate::channel::{sample_channels, ChannelRealization, SeedPath};
use crate::config::{ClusteringMode, NetworkConfig};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::optimize::interference_decay_schedule;
use crate::rate::{closed_form_rate, instantaneous_rate, rate_fixed_clustering, rate_gain_clustering, EquivalentLink};
use crate::relay::{build_relay_plan, expected_gated_gain, relay_power_budget, RelayPlan};
use crate::stats::Estimate;

const GAP_FLOOR: f64 = 1e-12;

/// Master seed of point `index` of a multi-point run.
pub fn point_seed(master: u64, index: u64) -> u64 {
    master.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateReport {
    pub n_trials: u64,
    pub mean_rate: f64,
    pub stderr: f64,
    pub closed_form_prediction: f64,
    /// `|mean − prediction| / max(prediction, ε)`.
    pub relative_gap: f64,
    pub clustering_mode: ClusteringMode,
    pub config: NetworkConfig,
    pub master_seed: u64,
    pub ps: f64,
    pub pr: f64,
}

impl RateReport {
    fn new(
        rate: Estimate,
        prediction: f64,
        mode: ClusteringMode,
        config: &NetworkConfig,
        master_seed: u64,
        ps: f64,
        pr: f64,
    ) -> Self {
        Self {
            n_trials: rate.count as u64,
            mean_rate: rate.mean,
            stderr: rate.stderr,
            closed_form_prediction: prediction,
            relative_gap: (rate.mean - prediction).abs() / prediction.max(GAP_FLOOR),
            clustering_mode: mode,
            config: config.clone(),
            master_seed,
            ps,
            pr,
        }
    }
}

/// Rate report together with the measured interference per primary node.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub report: RateReport,
    pub interference: Vec<Estimate>,
}

/// Interference at each primary averaged over the half-duplex cycle:
/// `(Pr/2) Σ_i T_i |g_{ℓi}|² + (Ps/2M) |h_{p,ℓ}|²`.
pub fn measure_interference(realization: &ChannelRealization, plan: &RelayPlan, config: &NetworkConfig) -> Vec<f64> {
    (0..config.n_p)
        .map(|l| {
            let relay: f64 =
                realization.g.row(l).iter().zip(&plan.eligible).filter(|(_, t)| **t).map(|(g, _)| g.norm_sqr()).sum();
            let source = realization.hp.column(l).norm_squared();
            plan.pr / 2.0 * relay + plan.ps / (2.0 * config.m as f64) * source
        })
        .collect()
}

/// Expected value of [`measure_interference`] over the fading.
pub fn expected_interference(config: &NetworkConfig, pr: f64, ps: f64) -> Result<f64> {
    let gated = expected_gated_gain(config.alpha, config.sigma_p2, config.n_p)?;
    Ok(pr / 2.0 * config.n as f64 * gated + ps / 2.0 * config.sigma_sp2)
}

fn reduce_interference(per_trial: &[Vec<f64>], n_p: usize) -> Vec<Estimate> {
    (0..n_p).map(|l| Estimate::from_values(per_trial.iter().map(|v| v[l]))).collect()
}

/// Monte Carlo rate and interference with the budgeted relay power.
pub fn run_trials_with(
    config: &NetworkConfig,
    mode: ClusteringMode,
    ps: f64,
    n_trials: u64,
    master_seed: u64,
    exec: Execution,
) -> Result<TrialOutcome> {
    config.validate()?;
    config.check_source_power(ps)?;
    if n_trials == 0 {
        return Err(Error::InvalidConfig("need at least one trial".into()));
    }
    let budget = relay_power_budget(config.alpha, ps, config.gamma, config.sigma_sp2, config.n, config.sigma_p2)?;
    let results = map_indexed(exec, n_trials, |t| -> Result<(f64, Vec<f64>)> {
        let realization = sample_channels(config, SeedPath::new(master_seed, t), false)?;
        let plan = build_relay_plan(config, &realization, mode, ps)?;
        let link = EquivalentLink::new(&realization, &plan);
        let rate = instantaneous_rate(ps, config.m, &link, config.log_base)?;
        Ok((rate, measure_interference(&realization, &plan, config)))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let rates: Vec<f64> = results.iter().map(|r| r.0).collect();
    let interference: Vec<Vec<f64>> = results.into_iter().map(|r| r.1).collect();
    let prediction = closed_form_rate(config, budget.pr, ps, mode)?;
    Ok(TrialOutcome {
        report: RateReport::new(Estimate::from_samples(&rates), prediction, mode, config, master_seed, ps, budget.pr),
        interference: reduce_interference(&interference, config.n_p),
    })
}

/// [`run_trials_with`] on the current rayon pool, rate report only.
pub fn run_trials(
    config: &NetworkConfig,
    mode: ClusteringMode,
    ps: f64,
    n_trials: u64,
    master_seed: u64,
) -> Result<RateReport> {
    Ok(run_trials_with(config, mode, ps, n_trials, master_seed, Execution::Parallel)?.report)
}

/// Monte Carlo summary of the alternating relay protocol.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ArpReport {
    pub l: usize,
    pub cycles: u64,
    pub eta: f64,
    pub ps: f64,
    /// One estimate per forwarding frame (frames 2..=L).
    pub frame_rates: Vec<Estimate>,
    pub overall: Estimate,
    /// Closed form, available for three-frame cycles.
    pub closed_form: Option<ArpRates>,
    pub interference: Vec<Estimate>,
    pub mean_relay_power: Vec<Estimate>,
    pub master_seed: u64,
    pub mode: InterRelayMode,
}

/// Runs `cycles` independent cycles with the relay power from the budget.
#[allow(clippy::too_many_arguments)]
pub fn run_arp_trials(
    config: &NetworkConfig,
    l: usize,
    ps: f64,
    cycles: u64,
    master_seed: u64,
    mode: InterRelayMode,
    exec: Execution,
) -> Result<ArpReport> {
    let eta = arp_eta(config, l, ps)?;
    run_arp_trials_with_eta(config, l, eta, ps, cycles, master_seed, mode, exec)
}

#[allow(clippy::too_many_arguments)]
pub fn run_arp_trials_with_eta(
    config: &NetworkConfig,
    l: usize,
    eta: f64,
    ps: f64,
    cycles: u64,
    master_seed: u64,
    mode: InterRelayMode,
    exec: Execution,
) -> Result<ArpReport> {
    config.validate()?;
    config.check_source_power(ps)?;
    if cycles == 0 {
        return Err(Error::InvalidConfig("need at least one cycle".into()));
    }
    let schedule = arp_schedule(l, config.n)?;
    let results = map_indexed(exec, cycles, |c| {
        let cycle = sample_arp_cycle(config, &schedule, master_seed, c)?;
        arp_simulate(config, &schedule, &cycle, eta, ps, mode)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let frames = l - 1;
    let frame_rates = (0..frames).map(|k| Estimate::from_values(results.iter().map(|r| r.frame_rates[k]))).collect();
    let mean_relay_power =
        (0..frames).map(|k| Estimate::from_values(results.iter().map(|r| r.mean_relay_power[k]))).collect();
    let interference: Vec<Vec<f64>> = results.iter().map(|r| r.interference.clone()).collect();
    let closed_form = if l == 3 { Some(arp_overall_rate(config, eta, ps)?) } else { None };
    Ok(ArpReport {
        l,
        cycles,
        eta,
        ps,
        frame_rates,
        overall: Estimate::from_values(results.iter().map(|r| r.overall())),
        closed_form,
        interference: reduce_interference(&interference, config.n_p),
        mean_relay_power,
        master_seed,
        mode,
    })
}

/// Parameter a sweep varies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Alpha,
    Ps,
    N,
    SigmaSp2,
    SigmaS2,
    SigmaD2,
    SigmaR2,
    /// Exponent of the decaying interference cap `γ n^{−δ}`.
    Delta,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Alpha => "alpha",
            SweepAxis::Ps => "ps",
            SweepAxis::N => "n",
            SweepAxis::SigmaSp2 => "sigma_sp2",
            SweepAxis::SigmaS2 => "sigma_s2",
            SweepAxis::SigmaD2 => "sigma_d2",
            SweepAxis::SigmaR2 => "sigma_r2",
            SweepAxis::Delta => "delta",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "alpha" => SweepAxis::Alpha,
            "ps" => SweepAxis::Ps,
            "n" => SweepAxis::N,
            "sigma_sp2" => SweepAxis::SigmaSp2,
            "sigma_s2" => SweepAxis::SigmaS2,
            "sigma_d2" => SweepAxis::SigmaD2,
            "sigma_r2" => SweepAxis::SigmaR2,
            "delta" => SweepAxis::Delta,
            other => return Err(Error::InvalidConfig(format!("unknown sweep axis `{other}`"))),
        })
    }
}

/// Half-duplex two-hop relaying or the alternating relay protocol.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    #[default]
    HalfDuplex,
    Alternating {
        frames: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepOptions {
    pub mode: ClusteringMode,
    pub protocol: Protocol,
    /// Source power, unless the axis or a decay schedule sets it.
    pub ps: f64,
    /// Zero runs closed forms only.
    pub n_trials: u64,
    pub master_seed: u64,
    pub exec: Execution,
    /// Applies the decaying cap `γ n^{−δ}` (with `c0` the configured γ) at
    /// every point.
    pub delta: Option<f64>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            mode: ClusteringMode::Fixed,
            protocol: Protocol::HalfDuplex,
            ps: 5.0,
            n_trials: 0,
            master_seed: 0,
            exec: Execution::Parallel,
            delta: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosedForms {
    pub fixed: f64,
    pub gain: f64,
    pub arp: Option<ArpRates>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointData {
    pub config: NetworkConfig,
    pub ps: f64,
    pub pr: f64,
    pub closed_form: ClosedForms,
    /// Present when Monte Carlo trials were run.
    pub report: Option<RateReport>,
    /// Measured per primary node; in closed-form mode the expected value
    /// with zero standard error.
    pub interference: Vec<Estimate>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub value: f64,
    pub outcome: std::result::Result<PointData, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub points: Vec<SweepPoint>,
}

fn point_config(
    base: &NetworkConfig,
    axis: SweepAxis,
    value: f64,
    opts: &SweepOptions,
) -> Result<(NetworkConfig, f64)> {
    let mut cfg = base.clone();
    let mut ps = opts.ps;
    let mut delta = opts.delta;
    match axis {
        SweepAxis::Alpha => cfg.alpha = value,
        SweepAxis::Ps => ps = value,
        SweepAxis::N => {
            if !(value >= 1.0 && value.fract() == 0.0) {
                return Err(Error::InvalidConfig(format!("relay count must be a positive integer, got {value}")));
            }
            cfg.n = value as usize;
        }
        SweepAxis::SigmaSp2 => cfg.sigma_sp2 = value,
        SweepAxis::SigmaS2 => cfg.sigma_s2 = value,
        SweepAxis::SigmaD2 => cfg.sigma_d2 = value,
        SweepAxis::SigmaR2 => cfg.sigma_r2 = value,
        SweepAxis::Delta => delta = Some(value),
    }
    if let Some(delta) = delta {
        let schedule = interference_decay_schedule(&cfg, delta, cfg.gamma, cfg.n)?;
        cfg = schedule.apply(&cfg);
        ps = schedule.ps_n;
    }
    cfg.validate()?;
    Ok((cfg, ps))
}

fn sweep_point(
    base: &NetworkConfig,
    axis: SweepAxis,
    value: f64,
    opts: &SweepOptions,
    index: u64,
) -> Result<PointData> {
    let (cfg, ps) = point_config(base, axis, value, opts)?;
    cfg.check_source_power(ps)?;
    let seed = point_seed(opts.master_seed, index);
    match opts.protocol {
        Protocol::HalfDuplex => {
            let budget = relay_power_budget(cfg.alpha, ps, cfg.gamma, cfg.sigma_sp2, cfg.n, cfg.sigma_p2)?;
            let closed_form = ClosedForms {
                fixed: rate_fixed_clustering(&cfg, budget.pr, ps)?,
                gain: rate_gain_clustering(&cfg, budget.pr, ps)?,
                arp: None,
            };
            let (report, interference) = if opts.n_trials > 0 {
                let out = run_trials_with(&cfg, opts.mode, ps, opts.n_trials, seed, opts.exec)?;
                (Some(out.report), out.interference)
            } else {
                let mean = expected_interference(&cfg, budget.pr, ps)?;
                (None, vec![Estimate { mean, stderr: 0.0, count: 0 }; cfg.n_p])
            };
            Ok(PointData { ps, pr: budget.pr, closed_form, report, interference, config: cfg })
        }
        Protocol::Alternating { frames } => {
            let eta = arp_eta(&cfg, frames, ps)?;
            let arp = if frames == 3 { Some(arp_overall_rate(&cfg, eta, ps)?) } else { None };
            let closed_form = ClosedForms { fixed: f64::NAN, gain: f64::NAN, arp };
            let (report, interference) = if opts.n_trials > 0 {
                let out = run_arp_trials_with_eta(
                    &cfg,
                    frames,
                    eta,
                    ps,
                    opts.n_trials,
                    seed,
                    InterRelayMode::Cancel,
                    opts.exec,
                )?;
                let prediction = arp.map_or(f64::NAN, |a| a.r_overall);
                let report =
                    RateReport::new(out.overall, prediction, ClusteringMode::Fixed, &cfg, seed, ps, eta / cfg.n as f64);
                (Some(report), out.interference)
            } else {
                (None, Vec::new())
            };
            Ok(PointData { ps, pr: eta / cfg.n as f64, closed_form, report, interference, config: cfg })
        }
    }
}

/// Evaluates each value of `axis` in order. A failing point is recorded and
/// the sweep moves on.
pub fn sweep(config: &NetworkConfig, axis: SweepAxis, values: &[f64], opts: &SweepOptions) -> Result<SweepResult> {
    if values.is_empty() {
        return Err(Error::InvalidConfig("sweep needs at least one value".into()));
    }
    let points = values
        .iter()
        .enumerate()
        .map(|(k, &value)| SweepPoint {
            value,
            outcome: sweep_point(config, axis, value, opts, k as u64).map_err(|e| e.to_string()),
        })
        .collect();
    Ok(SweepResult { axis, values: values.to_vec(), points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relay::plan_with_power;
    use crate::relay::BudgetStatus;

    #[test]
    fn single_trial_is_reproducible() {
        let cfg = NetworkConfig { n: 30, ..NetworkConfig::default() };
        let a = run_trials(&cfg, ClusteringMode::Fixed, 5.0, 1, 17).unwrap();
        let b = run_trials(&cfg, ClusteringMode::Fixed, 5.0, 1, 17).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.stderr, 0.0);
    }

    #[test]
    fn sequential_matches_parallel() {
        let cfg = NetworkConfig { n: 30, ..NetworkConfig::default() };
        let a = run_trials_with(&cfg, ClusteringMode::Gain, 5.0, 64, 3, Execution::Sequential).unwrap();
        let b = run_trials_with(&cfg, ClusteringMode::Gain, 5.0, 64, 3, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn saturated_source_gives_zero_rate() {
        let cfg = NetworkConfig { n: 30, ..NetworkConfig::default() };
        let r = run_trials(&cfg, ClusteringMode::Fixed, 10.0, 20, 1).unwrap();
        assert_eq!(r.mean_rate, 0.0);
        assert_eq!(r.closed_form_prediction, 0.0);
        assert_eq!(r.relative_gap, 0.0);
    }

    #[test]
    fn interference_terms() {
        let cfg = NetworkConfig { n: 10, n_p: 2, ..NetworkConfig::default() };
        let mut r = sample_channels(&cfg, SeedPath::new(2, 0), false).unwrap();
        let plan = build_relay_plan(&cfg, &r, ClusteringMode::Fixed, 5.0).unwrap();
        let silent = plan_with_power(&cfg, &r, ClusteringMode::Fixed, 5.0, 0.0, BudgetStatus::Ok).unwrap();
        let src = measure_interference(&r, &silent, &cfg);
        for (l, v) in src.iter().enumerate() {
            assert!((v - 5.0 / 4.0 * r.hp.column(l).norm_squared()).abs() < 1e-12);
        }
        r.hp.fill(crate::Complex64::new(0.0, 0.0));
        let mut none = plan.clone();
        none.eligible.iter_mut().for_each(|t| *t = false);
        assert_eq!(measure_interference(&r, &none, &cfg), vec![0.0, 0.0]);
    }

    #[test]
    fn sweep_records_failures() {
        let cfg = NetworkConfig { n: 20, ..NetworkConfig::default() };
        let out = sweep(&cfg, SweepAxis::Ps, &[5.0, 11.0, 2.0], &SweepOptions::default()).unwrap();
        assert!(out.points[0].outcome.is_ok());
        assert!(out.points[1].outcome.is_err());
        assert!(out.points[2].outcome.is_ok());
        assert!(sweep(&cfg, SweepAxis::Ps, &[], &SweepOptions::default()).is_err());
        assert!("bogus".parse::<SweepAxis>().is_err());
        assert_eq!("sigma_sp2".parse::<SweepAxis>().unwrap(), SweepAxis::SigmaSp2);
    }
}
