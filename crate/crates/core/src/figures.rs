//! Preset parameter studies. Each returns the data table behind one plot,
//! with the parameters that produced it in the table metadata.

use crate::arp::{arp_eta, arp_overall_rate, InterRelayMode};
use crate::config::{ClusteringMode, NetworkConfig};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::optimize::{
    interference_decay_schedule, optimal_alpha, qualitative_ps_trends, SourcePowerParams, VarianceAxis,
};
use crate::rate::{rate_fixed_clustering, rate_gain_clustering};
use crate::relay::relay_power_budget;
use crate::report::add_config_meta;
use crate::sim::{point_seed, run_arp_trials_with_eta, run_trials_with};
use crate::table::{Cell, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
    Fig6,
    Fig7,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig6 => "fig6",
            Figure::Fig7 => "fig7",
        }
    }

    /// Monte Carlo trials per point when none are requested.
    pub fn default_trials(self) -> u64 {
        match self {
            Figure::Fig2 | Figure::Fig4 => 200,
            Figure::Fig3 => 0,
            Figure::Fig6 | Figure::Fig7 => 100,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FigureOptions {
    /// Zero skips Monte Carlo; the MC columns are then left empty.
    pub n_trials: u64,
    pub master_seed: u64,
    pub exec: Execution,
}

pub const FIGURE_PS: f64 = 5.0;
pub const FIG2_N: usize = 100;
pub const FIG3_F_ALPHA: f64 = 0.8;
pub const FIG4_ALPHA: f64 = 5.0;
pub const FIG4_SIGMA_P2: [f64; 3] = [0.5, 1.0, 2.0];
pub const FIG4_N: [usize; 7] = [10, 20, 50, 100, 200, 500, 1000];
pub const FIG6_DELTA: [f64; 2] = [0.1, 0.2];
pub const FIG6_N: [usize; 5] = [100, 300, 1000, 3000, 10000];
pub const FIG7_SIGMA_R2: [f64; 3] = [0.5, 1.0, 2.0];
pub const FIG7_N: [usize; 5] = [50, 100, 200, 500, 1000];

pub fn fig2_alphas() -> Vec<f64> {
    (1..=32).map(|k| k as f64 * 0.25).collect()
}

pub fn fig3_values() -> Vec<f64> {
    (1..=12).map(|k| k as f64 * 0.25).collect()
}

pub fn figure(which: Figure, base: &NetworkConfig, opts: &FigureOptions) -> Result<Table> {
    base.validate()?;
    match which {
        Figure::Fig2 => fig2(base, opts),
        Figure::Fig3 => fig3(base),
        Figure::Fig4 => fig4(base, opts),
        Figure::Fig6 => fig6(base, opts),
        Figure::Fig7 => fig7(base, opts),
    }
}

fn header(name: &str, title: &str, columns: &[&str], base: &NetworkConfig, opts: Option<&FigureOptions>) -> Table {
    let mut t = Table::new(format!("{name}: {title}"), columns);
    if let Some(o) = opts {
        t.meta("master_seed", o.master_seed);
        t.meta("trials_per_point", o.n_trials);
    }
    add_config_meta(&mut t, base);
    t
}

fn mc_cells(
    cfg: &NetworkConfig,
    mode: ClusteringMode,
    ps: f64,
    opts: &FigureOptions,
    index: u64,
) -> Result<(Cell, Cell, Option<f64>)> {
    if opts.n_trials == 0 {
        return Ok((Cell::Empty, Cell::Empty, None));
    }
    let out = run_trials_with(cfg, mode, ps, opts.n_trials, point_seed(opts.master_seed, index), opts.exec)?;
    let interference = out.interference.first().map(|e| e.mean);
    Ok((out.report.mean_rate.into(), out.report.stderr.into(), interference))
}

/// Rate against the eligibility threshold at n = 100, Ps = 5.
pub fn fig2(base: &NetworkConfig, opts: &FigureOptions) -> Result<Table> {
    let cfg = NetworkConfig { n: FIG2_N, ..base.clone() };
    let mut t = header(
        "fig2",
        "rate versus eligibility threshold",
        &["alpha", "closed_form_rate_fixed", "closed_form_rate_gain", "mc_rate", "mc_stderr"],
        &cfg,
        Some(opts),
    );
    t.meta("ps", FIGURE_PS);
    t.meta("mc_clustering", ClusteringMode::Fixed);
    t.meta("alpha_opt", optimal_alpha(&cfg, FIGURE_PS)?.arg);
    for (k, alpha) in fig2_alphas().into_iter().enumerate() {
        let c = NetworkConfig { alpha, ..cfg.clone() };
        let pr = relay_power_budget(alpha, FIGURE_PS, c.gamma, c.sigma_sp2, c.n, c.sigma_p2)?.pr;
        let (mc, se, _) = mc_cells(&c, ClusteringMode::Fixed, FIGURE_PS, opts, k as u64)?;
        t.push(vec![
            alpha.into(),
            rate_fixed_clustering(&c, pr, FIGURE_PS)?.into(),
            rate_gain_clustering(&c, pr, FIGURE_PS)?.into(),
            mc,
            se,
        ]);
    }
    Ok(t)
}

/// Optimal source power along each channel variance with f(α) = 0.8.
pub fn fig3(base: &NetworkConfig) -> Result<Table> {
    let params = SourcePowerParams {
        gamma: base.gamma,
        sigma_sp2: base.sigma_sp2,
        sigma_s2: base.sigma_s2,
        sigma_d2: base.sigma_d2,
        f_alpha: FIG3_F_ALPHA,
        ps_max: base.ps_max,
    };
    let mut t =
        header("fig3", "optimal source power versus channel variances", &["variance", "value", "ps_opt"], base, None);
    t.meta("f_alpha", FIG3_F_ALPHA);
    let series = qualitative_ps_trends(&params, &fig3_values())?;
    for s in &series {
        let name = match s.axis {
            VarianceAxis::SigmaSp2 => "sigma_sp2",
            VarianceAxis::SigmaS2 => "sigma_s2",
            VarianceAxis::SigmaD2 => "sigma_d2",
        };
        t.meta(format!("trend_{name}"), format!("{:?}", s.trend).to_lowercase());
        for (v, p) in s.values.iter().zip(&s.ps_opt) {
            t.push(vec![name.into(), (*v).into(), (*p).into()]);
        }
    }
    Ok(t)
}

/// Closed form against Monte Carlo over n for several relay-to-primary
/// variances, α = 5, Ps = 5.
pub fn fig4(base: &NetworkConfig, opts: &FigureOptions) -> Result<Table> {
    let cfg = NetworkConfig { alpha: FIG4_ALPHA, ..base.clone() };
    let mut t = header(
        "fig4",
        "closed form and Monte Carlo rate versus relay count",
        &[
            "sigma_p2",
            "n",
            "closed_form_rate_fixed",
            "closed_form_rate_gain",
            "mc_rate_fixed",
            "mc_stderr_fixed",
            "mc_rate_gain",
            "mc_stderr_gain",
        ],
        &cfg,
        Some(opts),
    );
    t.meta("ps", FIGURE_PS);
    t.meta("sigma_p2_values", "0.5 1 2");
    let mut index = 0u64;
    for sp in FIG4_SIGMA_P2 {
        for n in FIG4_N {
            let c = NetworkConfig { sigma_p2: sp, n, ..cfg.clone() };
            let pr = relay_power_budget(c.alpha, FIGURE_PS, c.gamma, c.sigma_sp2, n, sp)?.pr;
            let (mf, sf, _) = mc_cells(&c, ClusteringMode::Fixed, FIGURE_PS, opts, index)?;
            let (mg, sg, _) = mc_cells(&c, ClusteringMode::Gain, FIGURE_PS, opts, index + 1)?;
            index += 2;
            t.push(vec![
                sp.into(),
                n.into(),
                rate_fixed_clustering(&c, pr, FIGURE_PS)?.into(),
                rate_gain_clustering(&c, pr, FIGURE_PS)?.into(),
                mf,
                sf,
                mg,
                sg,
            ]);
        }
    }
    Ok(t)
}

/// Rate and interference over n when the cap shrinks as γ n^{−δ}.
pub fn fig6(base: &NetworkConfig, opts: &FigureOptions) -> Result<Table> {
    let mut t = header(
        "fig6",
        "rate and interference under a decaying interference cap",
        &[
            "delta",
            "n",
            "gamma_n",
            "ps",
            "pr",
            "closed_form_rate_fixed",
            "mc_rate",
            "mc_stderr",
            "mc_interference",
            "predicted_slope",
        ],
        base,
        Some(opts),
    );
    t.meta("c0", base.gamma);
    let mut index = 0u64;
    for delta in FIG6_DELTA {
        for n in FIG6_N {
            let s = interference_decay_schedule(base, delta, base.gamma, n)?;
            let c = s.apply(base);
            let (mc, se, interference) = mc_cells(&c, ClusteringMode::Fixed, s.ps_n, opts, index)?;
            index += 1;
            t.push(vec![
                delta.into(),
                n.into(),
                s.gamma_n.into(),
                s.ps_n.into(),
                s.pr_n.into(),
                rate_fixed_clustering(&c, s.pr_n, s.ps_n)?.into(),
                mc,
                se,
                interference.into(),
                s.predicted_slope.into(),
            ]);
        }
    }
    Ok(t)
}

/// Three-frame alternating relaying over n for several inter-relay
/// variances, with the half-duplex rate for comparison.
pub fn fig7(base: &NetworkConfig, opts: &FigureOptions) -> Result<Table> {
    let mut t = header(
        "fig7",
        "alternating relay protocol rate versus relay count",
        &[
            "sigma_r2",
            "n",
            "eta",
            "closed_form_r1",
            "closed_form_r2",
            "closed_form_rate_arp",
            "mc_rate",
            "mc_stderr",
            "closed_form_rate_half_duplex",
        ],
        base,
        Some(opts),
    );
    t.meta("frames", 3);
    t.meta("ps", FIGURE_PS);
    let mut index = 0u64;
    for sr in FIG7_SIGMA_R2 {
        for n in FIG7_N {
            if n % 2 != 0 {
                return Err(Error::InvalidConfig(format!("alternating relaying needs even n, got {n}")));
            }
            let c = NetworkConfig { sigma_r2: sr, n, ..base.clone() };
            let eta = arp_eta(&c, 3, FIGURE_PS)?;
            let closed = arp_overall_rate(&c, eta, FIGURE_PS)?;
            let (mc, se) = if opts.n_trials > 0 {
                let r = run_arp_trials_with_eta(
                    &c,
                    3,
                    eta,
                    FIGURE_PS,
                    opts.n_trials,
                    point_seed(opts.master_seed, index),
                    InterRelayMode::Cancel,
                    opts.exec,
                )?;
                (Cell::Num(r.overall.mean), Cell::Num(r.overall.stderr))
            } else {
                (Cell::Empty, Cell::Empty)
            };
            index += 1;
            let pr = relay_power_budget(c.alpha, FIGURE_PS, c.gamma, c.sigma_sp2, n, c.sigma_p2)?.pr;
            t.push(vec![
                sr.into(),
                n.into(),
                eta.into(),
                closed.r1.into(),
                closed.r2.into(),
                closed.r_overall.into(),
                mc,
                se,
                rate_fixed_clustering(&c, pr, FIGURE_PS)?.into(),
            ]);
        }
    }
    Ok(t)
}
