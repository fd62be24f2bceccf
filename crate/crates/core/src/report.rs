//! Conversion of results into output tables. Column order is part of the
//! output contract.

use crate::arp::ArpRates;
use crate::config::NetworkConfig;
use crate::optimize::{DecaySchedule, Optimum, SourcePowerOptimum, SourcePowerParams};
use crate::sim::{ArpReport, RateReport, SweepResult};
use crate::table::{Cell, Table};

pub const RATE_COLUMNS: &[&str] =
    &["n_trials", "clustering_mode", "ps", "pr", "mean_rate", "stderr", "closed_form_prediction", "relative_gap"];

pub const SWEEP_COLUMNS: &[&str] = &[
    "axis_value",
    "status",
    "ps",
    "pr",
    "closed_form_rate_fixed",
    "closed_form_rate_gain",
    "closed_form_rate_arp",
    "mc_rate",
    "mc_stderr",
    "primary",
    "interference",
    "interference_stderr",
];

/// Adds the config snapshot to the table metadata.
pub fn add_config_meta(table: &mut Table, config: &NetworkConfig) {
    for (k, v) in config.kv_pairs() {
        table.meta(k, v);
    }
}

pub fn rate_table(report: &RateReport, interference: &[crate::stats::Estimate]) -> Table {
    let mut cols: Vec<String> = RATE_COLUMNS.iter().map(|s| s.to_string()).collect();
    for l in 0..interference.len() {
        cols.push(format!("interference_{l}"));
        cols.push(format!("interference_{l}_stderr"));
    }
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut t = Table::new("rate", &col_refs);
    t.meta("master_seed", report.master_seed);
    add_config_meta(&mut t, &report.config);
    let mut row: Vec<Cell> = vec![
        report.n_trials.into(),
        report.clustering_mode.to_string().into(),
        report.ps.into(),
        report.pr.into(),
        report.mean_rate.into(),
        report.stderr.into(),
        report.closed_form_prediction.into(),
        report.relative_gap.into(),
    ];
    for e in interference {
        row.push(e.mean.into());
        row.push(e.stderr.into());
    }
    t.push(row);
    t
}

/// One row per (point, primary node); failed points keep their row with
/// the error text in `status`.
pub fn sweep_table(result: &SweepResult, base: &NetworkConfig) -> Table {
    let mut t = Table::new(format!("sweep over {}", result.axis), SWEEP_COLUMNS);
    t.meta("axis", result.axis);
    add_config_meta(&mut t, base);
    for p in &result.points {
        match &p.outcome {
            Ok(d) => {
                let (mc, se) = match &d.report {
                    Some(r) => (Cell::Num(r.mean_rate), Cell::Num(r.stderr)),
                    None => (Cell::Empty, Cell::Empty),
                };
                let finite = |v: f64| if v.is_nan() { Cell::Empty } else { Cell::Num(v) };
                let arp = d.closed_form.arp.map(|a| a.r_overall);
                let rows = d.interference.len().max(1);
                for l in 0..rows {
                    let (i, ise) =
                        d.interference.get(l).map_or((Cell::Empty, Cell::Empty), |e| (e.mean.into(), e.stderr.into()));
                    t.push(vec![
                        p.value.into(),
                        "ok".into(),
                        d.ps.into(),
                        d.pr.into(),
                        finite(d.closed_form.fixed),
                        finite(d.closed_form.gain),
                        arp.into(),
                        mc.clone(),
                        se.clone(),
                        if d.interference.is_empty() { Cell::Empty } else { (l as u64).into() },
                        i,
                        ise,
                    ]);
                }
            }
            Err(msg) => {
                let mut row = vec![Cell::Num(p.value), Cell::Text(format!("error: {msg}"))];
                row.resize(SWEEP_COLUMNS.len(), Cell::Empty);
                t.push(row);
            }
        }
    }
    t
}

pub fn alpha_table(config: &NetworkConfig, ps: f64, opt: &Optimum) -> Table {
    let mut t = Table::new("optimal threshold", &["ps", "alpha_opt", "objective"]);
    add_config_meta(&mut t, config);
    t.push(vec![ps.into(), opt.arg.into(), opt.value.into()]);
    t
}

pub fn source_power_table(params: &SourcePowerParams, opt: &SourcePowerOptimum) -> Table {
    let mut t = Table::new(
        "optimal source power",
        &[
            "gamma",
            "f_alpha",
            "sigma_sp2",
            "sigma_s2",
            "sigma_d2",
            "ps_max",
            "ps_opt",
            "closed_form",
            "numeric",
            "objective",
        ],
    );
    t.push(vec![
        params.gamma.into(),
        params.f_alpha.into(),
        params.sigma_sp2.into(),
        params.sigma_s2.into(),
        params.sigma_d2.into(),
        params.ps_max.into(),
        opt.ps_opt.into(),
        opt.closed_form.into(),
        opt.numeric.into(),
        opt.objective.into(),
    ]);
    t
}

pub fn arp_table(report: &ArpReport, config: &NetworkConfig) -> Table {
    let mut cols = vec![
        "frame".to_string(),
        "mc_rate".into(),
        "mc_stderr".into(),
        "closed_form".into(),
        "mean_relay_power".into(),
    ];
    cols.extend(["relay_power_stderr".to_string()]);
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut t = Table::new("alternating relay protocol", &col_refs);
    t.meta("frames", report.l);
    t.meta("cycles", report.cycles);
    t.meta("eta", report.eta);
    t.meta("ps", report.ps);
    t.meta("inter_relay", format!("{:?}", report.mode).to_lowercase());
    t.meta("master_seed", report.master_seed);
    for (l, e) in report.interference.iter().enumerate() {
        t.meta(format!("interference_{l}"), format!("{} ± {}", e.mean, e.stderr));
    }
    add_config_meta(&mut t, config);
    let closed = |k: usize| -> Cell {
        match (report.closed_form, k) {
            (Some(ArpRates { r1, .. }), 0) => r1.into(),
            (Some(ArpRates { r2, .. }), 1) => r2.into(),
            _ => Cell::Empty,
        }
    };
    for (k, e) in report.frame_rates.iter().enumerate() {
        let p = &report.mean_relay_power[k];
        t.push(vec![
            ((k + 2) as u64).into(),
            e.mean.into(),
            e.stderr.into(),
            closed(k),
            p.mean.into(),
            p.stderr.into(),
        ]);
    }
    t.push(vec![
        "overall".into(),
        report.overall.mean.into(),
        report.overall.stderr.into(),
        report.closed_form.map(|c| c.r_overall).into(),
        Cell::Empty,
        Cell::Empty,
    ]);
    t
}

pub fn decay_row(s: &DecaySchedule) -> Vec<Cell> {
    vec![s.gamma_n.into(), s.ps_n.into(), s.pr_n.into()]
}
