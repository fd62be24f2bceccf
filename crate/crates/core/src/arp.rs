//! Alternating relay protocol.
//!
//! Relays are split into `G_1 = {0..n/2}` and `G_2 = {n/2..n}`. Over a cycle
//! of `L` frames the source transmits in frames `1..L−1` and is silent in
//! frame `L`. Frame 1: `G_1` listens. Frame `k ≥ 2`: `G_1` forwards in even
//! frames and `G_2` in odd frames, each relaying what it heard in frame
//! `k−1`, while the other group listens whenever the source is on. A
//! listening group therefore also hears the transmitting group through the
//! inter-group channel.
//!
//! Closed forms are given for `L = 3`; the simulator handles any `L ≥ 2`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::channel::{sample_channels, CMatrix, ChannelRealization, SeedPath, MAX_FRAME};
use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::rate::{equivalent_channel_from, log_det_gain, noise_covariance_from, EquivalentLink};
use crate::relay::{assign_clusters_fixed, eligibility_probability, f_alpha, rotation_phases, select_eligible};
use crate::Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RelayGroup {
    G1,
    G2,
}

impl RelayGroup {
    pub fn other(self) -> Self {
        match self {
            RelayGroup::G1 => RelayGroup::G2,
            RelayGroup::G2 => RelayGroup::G1,
        }
    }

    /// Relay indices of this group for `n` relays.
    pub fn range(self, n: usize) -> std::ops::Range<usize> {
        match self {
            RelayGroup::G1 => 0..n / 2,
            RelayGroup::G2 => n / 2..n,
        }
    }
}

/// What happens in one frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FrameRole {
    /// 1-based frame number.
    pub frame: usize,
    pub source_transmits: bool,
    /// Group forwarding to the destination.
    pub transmitter: Option<RelayGroup>,
    /// Group receiving from the source.
    pub listener: Option<RelayGroup>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ArpSchedule {
    pub l: usize,
    pub frames: Vec<FrameRole>,
}

impl ArpSchedule {
    /// Fraction of frames carrying new source data, `(L−1)/L`.
    pub fn duty_factor(&self) -> f64 {
        (self.l - 1) as f64 / self.l as f64
    }
}

/// Strict-alternation schedule for a cycle of `l` frames.
pub fn arp_schedule(l: usize, n: usize) -> Result<ArpSchedule> {
    if l < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 frames per cycle, got {l}")));
    }
    if l > MAX_FRAME as usize {
        return Err(Error::InvalidConfig(format!("at most {MAX_FRAME} frames per cycle, got {l}")));
    }
    if !n.is_multiple_of(2) || n == 0 {
        return Err(Error::InvalidConfig(format!("relay count must be even, got {n}")));
    }
    let frames = (1..=l)
        .map(|frame| {
            let source_transmits = frame < l;
            let transmitter = match frame {
                1 => None,
                k if k % 2 == 0 => Some(RelayGroup::G1),
                _ => Some(RelayGroup::G2),
            };
            let listener =
                if !source_transmits { None } else { Some(transmitter.map_or(RelayGroup::G1, RelayGroup::other)) };
            FrameRole { frame, source_transmits, transmitter, listener }
        })
        .collect();
    Ok(ArpSchedule { l, frames })
}

/// Relay share of the cycle interference budget, `γ_L = 2Lγ/(L−1) − 2σ_sp² Ps`.
/// The relays must satisfy `η f(α) ≤ max(γ_L, 0)`.
pub fn arp_interference_budget(l: usize, gamma: f64, ps: f64, sigma_sp2: f64) -> f64 {
    let l = l as f64;
    2.0 * l / (l - 1.0) * gamma - 2.0 * sigma_sp2 * ps
}

/// Largest relay power coefficient `η` (with `Pr = η/n`) the budget allows;
/// zero when the budget is exhausted or no relay can be eligible.
pub fn arp_eta(config: &NetworkConfig, l: usize, ps: f64) -> Result<f64> {
    let gamma_l = arp_interference_budget(l, config.gamma, ps, config.sigma_sp2);
    let f = f_alpha(config.alpha, config.sigma_p2)?;
    if gamma_l <= 0.0 || f <= 0.0 {
        return Ok(0.0);
    }
    Ok(gamma_l / f)
}

/// Diagonal gain ρ and noise level λ of one group's large-n channel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GroupAsymptotics {
    pub rho: f64,
    pub lambda: f64,
}

pub fn group1_asymptotics(config: &NetworkConfig, eta: f64, ps: f64) -> Result<GroupAsymptotics> {
    let p = eligibility_probability(config.alpha, config.sigma_p2, config.n_p)?;
    let load = config.sigma_s2 * ps + 1.0;
    let m = config.m as f64;
    Ok(GroupAsymptotics {
        rho: PI * (config.sigma_s2 * config.sigma_d2).sqrt() / (8.0 * m) * (p * eta / load).sqrt(),
        lambda: eta * config.sigma_d2 / (2.0 * load) + 1.0,
    })
}

pub fn group2_asymptotics(config: &NetworkConfig, eta: f64, ps: f64) -> Result<GroupAsymptotics> {
    let p = eligibility_probability(config.alpha, config.sigma_p2, config.n_p)?;
    let load = config.sigma_s2 * ps + 1.0;
    let load2 = load + eta * config.sigma_r2 / 2.0;
    let m = config.m as f64;
    let (sd2, sr2) = (config.sigma_d2, config.sigma_r2);
    Ok(GroupAsymptotics {
        rho: PI * (config.sigma_s2 * sd2).sqrt() / (8.0 * m) * (p * eta / load2).sqrt(),
        lambda: (eta * eta * sd2 * sr2 / (2.0 * load) + eta * sd2) / (2.0 * load2) + 1.0,
    })
}

fn group_rate(config: &NetworkConfig, ps: f64, g: GroupAsymptotics) -> f64 {
    let m = config.m as f64;
    let snr = config.n as f64 * ps * g.rho * g.rho / (m * g.lambda);
    config.log_base.from_nats(m * snr.ln_1p())
}

/// Per-frame rate of group 1 (frame 2 of an `L = 3` cycle).
pub fn arp_rate_group1(config: &NetworkConfig, eta: f64, ps: f64) -> Result<f64> {
    if eta <= 0.0 {
        return Ok(0.0);
    }
    Ok(group_rate(config, ps, group1_asymptotics(config, eta, ps)?))
}

/// Group 1 rate written directly in the system parameters; equals
/// [`arp_rate_group1`].
pub fn arp_rate_group1_direct(config: &NetworkConfig, eta: f64, ps: f64) -> Result<f64> {
    let p = eligibility_probability(config.alpha, config.sigma_p2, config.n_p)?;
    let m = config.m as f64;
    let (s2, d2) = (config.sigma_s2, config.sigma_d2);
    let snr =
        config.n as f64 * p * PI * PI * s2 * d2 * eta * ps / (32.0 * m.powi(3) * (eta * d2 + 2.0 * s2 * ps + 2.0));
    Ok(config.log_base.from_nats(m * snr.ln_1p()))
}

/// Per-frame rate of group 2 (frame 3 of an `L = 3` cycle).
pub fn arp_rate_group2(config: &NetworkConfig, eta: f64, ps: f64) -> Result<f64> {
    if eta <= 0.0 {
        return Ok(0.0);
    }
    Ok(group_rate(config, ps, group2_asymptotics(config, eta, ps)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ArpRates {
    pub r1: f64,
    pub r2: f64,
    pub r_overall: f64,
    pub eta: f64,
}

/// Cycle-averaged closed-form rate for `L = 3`.
pub fn arp_overall_rate(config: &NetworkConfig, eta: f64, ps: f64) -> Result<ArpRates> {
    let r1 = arp_rate_group1(config, eta, ps)?;
    let r2 = arp_rate_group2(config, eta, ps)?;
    Ok(ArpRates { r1, r2, r_overall: (r1 + r2) / 3.0, eta })
}

/// Coefficient of `log n` in the cycle rate for `L` frames, `(L−1)M/L`.
pub fn arp_growth_slope(l: usize, m: usize) -> f64 {
    (l - 1) as f64 * m as f64 / l as f64
}

/// Channel draws of one cycle, one realization per frame.
#[derive(Clone, Debug, PartialEq)]
pub struct ArpCycle {
    pub frames: Vec<ChannelRealization>,
}

/// Draws each frame independently; frames in which one group forwards while
/// the other listens also carry the inter-group matrix.
pub fn sample_arp_cycle(config: &NetworkConfig, schedule: &ArpSchedule, master: u64, cycle: u64) -> Result<ArpCycle> {
    let frames = schedule
        .frames
        .iter()
        .map(|role| {
            let path = SeedPath::new(master, cycle).with_frame(role.frame as u32);
            let needs_hr = role.transmitter.is_some() && role.listener.is_some();
            sample_channels(config, path, needs_hr)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ArpCycle { frames })
}

/// Treatment of the inter-relay signal at the destination.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InterRelayMode {
    /// Earlier segments are decoded first and subtracted.
    #[default]
    Cancel,
    /// Leftover segments are treated as noise.
    Keep,
}

/// Monte Carlo outcome of one cycle.
#[derive(Clone, Debug, PartialEq)]
pub struct ArpCycleResult {
    /// Rate delivered in frames `2..=L`, no duty-cycle factor applied.
    pub frame_rates: Vec<f64>,
    /// Equivalent channel and noise covariance of each forwarding frame.
    pub links: Vec<EquivalentLink>,
    /// Average over the forwarding group of `E|T_i c_i r_i|²`.
    pub mean_relay_power: Vec<f64>,
    /// Cycle-averaged interference at each primary node.
    pub interference: Vec<f64>,
}

impl ArpCycleResult {
    /// Rate averaged over the `L` frames of the cycle.
    pub fn overall(&self) -> f64 {
        self.frame_rates.iter().sum::<f64>() / (self.frame_rates.len() + 1) as f64
    }
}

struct Listened {
    group: RelayGroup,
    /// Source to the listening group, n/2 × M.
    h: CMatrix,
    /// Inter-group channel oriented listener × transmitter, if a group was
    /// forwarding in the same frame.
    hr: Option<CMatrix>,
    /// Expected received power at each listening relay.
    power: Vec<f64>,
    interfered: bool,
}

struct Forwarded {
    gains: Vec<Complex64>,
}

/// Simulates one cycle with relay power `Pr = eta / n`.
pub fn arp_simulate(
    config: &NetworkConfig,
    schedule: &ArpSchedule,
    cycle: &ArpCycle,
    eta: f64,
    ps: f64,
    mode: InterRelayMode,
) -> Result<ArpCycleResult> {
    let n = config.n;
    let half = n / 2;
    let m = config.m;
    if cycle.frames.len() != schedule.l {
        return Err(Error::InvalidConfig(format!(
            "cycle has {} frames, schedule expects {}",
            cycle.frames.len(),
            schedule.l
        )));
    }
    let clusters = assign_clusters_fixed(half, m)?;
    let p = eligibility_probability(config.alpha, config.sigma_p2, config.n_p)?;
    let pr = eta / n as f64;
    let load = config.sigma_s2 * ps + 1.0;
    let sig = Complex64::new(ps / m as f64, 0.0);

    // index k holds frame k + 1
    let mut listened: Vec<Option<Listened>> = Vec::with_capacity(schedule.l);
    let mut forwarded: Vec<Option<Forwarded>> = Vec::with_capacity(schedule.l);
    let mut out = ArpCycleResult {
        frame_rates: Vec::new(),
        links: Vec::new(),
        mean_relay_power: Vec::new(),
        interference: vec![0.0; config.n_p],
    };

    for (k, role) in schedule.frames.iter().enumerate() {
        let chan = &cycle.frames[k];

        if role.source_transmits {
            for (l, acc) in out.interference.iter_mut().enumerate() {
                *acc += ps / m as f64 * chan.hp.column(l).norm_squared();
            }
        }

        let mut fwd = None;
        if let Some(tx) = role.transmitter {
            let prev: &Listened = listened[k - 1]
                .as_ref()
                .filter(|prev| prev.group == tx)
                .ok_or_else(|| Error::InvalidConfig(format!("frame {}: group did not listen", role.frame)))?;
            let range = tx.range(n);
            let f = chan.f.columns(range.start, half).into_owned();
            let g = chan.g.columns(range.start, half).into_owned();
            let eligible = select_eligible(&g, config.alpha);
            let theta = rotation_phases(&f, &prev.h, &clusters);
            let denom = if prev.interfered { load + eta * config.sigma_r2 / 2.0 } else { load };
            let c_mag = if eta > 0.0 && p > 0.0 { (eta / (n as f64 * p * denom)).sqrt() } else { 0.0 };
            let gains: Vec<Complex64> = eligible
                .iter()
                .zip(&theta)
                .map(|(&t, &th)| if t { Complex64::from_polar(c_mag, th) } else { Complex64::new(0.0, 0.0) })
                .collect();

            let h_tilde = equivalent_channel_from(&f, &gains, &prev.h);
            let mut w = noise_covariance_from(&f, &gains);
            let mut leak = CMatrix::zeros(m, m);

            // walk the chain of groups whose forwarded noise reached this one
            let mut b = scale_columns(&f, &gains);
            let mut j = k - 1;
            while let Some(hr) = listened[j].as_ref().and_then(|l| l.hr.as_ref()) {
                let earlier = forwarded[j].as_ref().expect("forwarding frame has gains");
                b = scale_columns(&(&b * hr), &earlier.gains);
                w += &b * b.adjoint();
                let source = listened[j - 1].as_ref().expect("forwarder listened before");
                let s = &b * &source.h;
                leak += &s * s.adjoint() * sig;
                j -= 1;
            }

            let total = match mode {
                InterRelayMode::Cancel => w.clone(),
                InterRelayMode::Keep => &w + &leak,
            };
            let nats = log_det_gain(ps, m, &h_tilde, &total)?;
            out.frame_rates.push(config.log_base.from_nats(nats));
            out.links.push(EquivalentLink { h_tilde, w });

            let power: f64 = gains.iter().zip(&prev.power).map(|(d, rp)| d.norm_sqr() * rp).sum();
            out.mean_relay_power.push(power / half as f64);

            for (l, acc) in out.interference.iter_mut().enumerate() {
                *acc += pr * g.row(l).iter().zip(&eligible).filter(|(_, &t)| t).map(|(x, _)| x.norm_sqr()).sum::<f64>();
            }
            fwd = Some(Forwarded { gains });
        }

        let heard = match role.listener {
            Some(rx) => {
                let range = rx.range(n);
                let h = chan.h.rows(range.start, half).into_owned();
                let hr = match role.transmitter {
                    Some(_) => {
                        let stored = chan.hr.as_ref().ok_or_else(|| {
                            Error::InvalidConfig(format!("frame {} lacks inter-relay channel", role.frame))
                        })?;
                        Some(match rx {
                            RelayGroup::G2 => stored.clone(),
                            RelayGroup::G1 => stored.transpose(),
                        })
                    }
                    None => None,
                };
                let mut power: Vec<f64> = h.row_iter().map(|row| ps / m as f64 * row.norm_squared() + 1.0).collect();
                if let (Some(hr), Some(fw), Some(prev)) =
                    (&hr, &fwd, k.checked_sub(1).and_then(|j| listened[j].as_ref()))
                {
                    let tx_power: Vec<f64> =
                        fw.gains.iter().zip(&prev.power).map(|(d, rp)| d.norm_sqr() * rp).collect();
                    for (i, rp) in power.iter_mut().enumerate() {
                        *rp += hr.row(i).iter().zip(&tx_power).map(|(x, tp)| x.norm_sqr() * tp).sum::<f64>();
                    }
                }
                Some(Listened { group: rx, h, interfered: hr.is_some(), hr, power })
            }
            None => None,
        };
        listened.push(heard);
        forwarded.push(fwd);
    }

    for acc in &mut out.interference {
        *acc /= schedule.l as f64;
    }
    Ok(out)
}

/// `a · diag(d)`.
fn scale_columns(a: &CMatrix, d: &[Complex64]) -> CMatrix {
    let mut out = a.clone();
    for (mut col, &s) in out.column_iter_mut().zip(d) {
        col *= s;
    }
    out
}
