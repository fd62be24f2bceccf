#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;

use std::fs::File;
use std::io::{self, BufWriter};
use std::process::ExitCode;

use clap::Parser;
use cogrelay::arp::InterRelayMode;
use cogrelay::figures::{figure, Figure, FigureOptions};
use cogrelay::optimize::{optimal_alpha, optimal_source_power_for, SourcePowerParams};
use cogrelay::relay::f_alpha;
use cogrelay::report::{alpha_table, arp_table, rate_table, source_power_table, sweep_table};
use cogrelay::sim::{
    run_arp_trials, run_arp_trials_with_eta, run_trials_with, sweep, Protocol, SweepAxis, SweepOptions,
};
use cogrelay::table::{OutputFormat, Table};
use cogrelay::{ClusteringMode, Error, Execution, NetworkConfig, Result};

use args::{Cli, Command, Format, GlobalArgs, Mode};

const DEFAULT_TRIALS: u64 = 1000;
const DEFAULT_ARP_CYCLES: u64 = 200;

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidConfig(_) | Error::Domain(_) | Error::NumericDegeneracy(_) => 1,
        Error::Infeasible(_) | Error::OracleMismatch { .. } => 2,
        Error::Io(_) => 3,
    }
}

fn load_config(g: &GlobalArgs) -> Result<NetworkConfig> {
    let mut cfg = match &g.config {
        Some(path) => NetworkConfig::from_file(path).map_err(|e| match e {
            Error::Io(io) => Error::Io(io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
            other => other,
        })?,
        None => NetworkConfig::default(),
    };
    for kv in &g.overrides {
        let (k, v) =
            kv.split_once('=').ok_or_else(|| Error::InvalidConfig(format!("override `{kv}` is not KEY=VALUE")))?;
        cfg.set(k, v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn mode(m: Mode) -> ClusteringMode {
    match m {
        Mode::Fixed => ClusteringMode::Fixed,
        Mode::Gain => ClusteringMode::Gain,
    }
}

fn parse_range(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidConfig(format!("range `{spec}` is not start:stop:step"));
    let parts: Vec<f64> = spec.split(':').map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_>>()?;
    let [start, stop, step] = parts[..] else { return Err(bad()) };
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(bad());
    }
    let count = ((stop - start) / step + 1e-9).floor() as u64 + 1;
    if count > 1_000_000 {
        return Err(Error::InvalidConfig(format!("range `{spec}` has too many points")));
    }
    Ok((0..count).map(|k| start + k as f64 * step).collect())
}

fn run(cli: &Cli) -> Result<Table> {
    let g = &cli.global;
    let cfg = load_config(g)?;
    let exec = Execution::Parallel;
    match &cli.command {
        Command::Rate { ps, mode: m } => {
            let out = run_trials_with(&cfg, mode(*m), *ps, g.trials.unwrap_or(DEFAULT_TRIALS), g.seed, exec)?;
            Ok(rate_table(&out.report, &out.interference))
        }
        Command::OptimizeAlpha { ps } => Ok(alpha_table(&cfg, *ps, &optimal_alpha(&cfg, *ps)?)),
        Command::OptimizePs { f_alpha: f, alpha } => {
            let f = match alpha {
                Some(a) => f_alpha(*a, cfg.sigma_p2)?,
                None => *f,
            };
            let params = SourcePowerParams {
                gamma: cfg.gamma,
                sigma_sp2: cfg.sigma_sp2,
                sigma_s2: cfg.sigma_s2,
                sigma_d2: cfg.sigma_d2,
                f_alpha: f,
                ps_max: cfg.ps_max,
            };
            Ok(source_power_table(&params, &optimal_source_power_for(&params)?))
        }
        Command::Sweep { axis, values, range, ps, mode: m, delta, arp_frames } => {
            let axis: SweepAxis = axis.parse()?;
            let values = match range {
                Some(r) => parse_range(r)?,
                None => values.clone(),
            };
            let opts = SweepOptions {
                mode: mode(*m),
                protocol: arp_frames.map_or(Protocol::HalfDuplex, |frames| Protocol::Alternating { frames }),
                ps: *ps,
                n_trials: g.trials.unwrap_or(0),
                master_seed: g.seed,
                exec,
                delta: *delta,
            };
            let result = sweep(&cfg, axis, &values, &opts)?;
            let mut t = sweep_table(&result, &cfg);
            t.meta("master_seed", g.seed).meta("trials_per_point", opts.n_trials);
            Ok(t)
        }
        Command::Arp { frames, ps, eta, keep_inter_relay } => {
            let im = if *keep_inter_relay { InterRelayMode::Keep } else { InterRelayMode::Cancel };
            let cycles = g.trials.unwrap_or(DEFAULT_ARP_CYCLES);
            let report = match eta {
                Some(eta) => run_arp_trials_with_eta(&cfg, *frames, *eta, *ps, cycles, g.seed, im, exec)?,
                None => run_arp_trials(&cfg, *frames, *ps, cycles, g.seed, im, exec)?,
            };
            Ok(arp_table(&report, &cfg))
        }
        Command::Fig2 | Command::Fig3 | Command::Fig4 | Command::Fig6 | Command::Fig7 => {
            let which = match cli.command {
                Command::Fig2 => Figure::Fig2,
                Command::Fig3 => Figure::Fig3,
                Command::Fig4 => Figure::Fig4,
                Command::Fig6 => Figure::Fig6,
                _ => Figure::Fig7,
            };
            let opts =
                FigureOptions { n_trials: g.trials.unwrap_or(which.default_trials()), master_seed: g.seed, exec };
            figure(which, &cfg, &opts)
        }
    }
}

fn emit(table: &Table, g: &GlobalArgs) -> Result<()> {
    let format = match g.format {
        Format::Csv => OutputFormat::Csv,
        Format::Json => OutputFormat::Json,
    };
    match &g.out {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
            table.write_to(BufWriter::new(file), format)
        }
        None => table.write_to(io::stdout().lock(), format),
    }
}

fn execute(cli: &Cli) -> Result<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.global.threads {
        if t == 0 {
            return Err(Error::InvalidConfig("--threads must be >= 1".into()));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    let table = pool.install(|| run(cli))?;
    emit(&table, &cli.global)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cogrelay: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
