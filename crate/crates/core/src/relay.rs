//! Distributed relay control: eligibility, power budgets, clustering and
//! phase rotation.
//!
//! Every per-relay decision here looks only at that relay's own channels,
//! so the outcome for relay `i` never depends on any other relay's gains.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::channel::{CMatrix, ChannelRealization};
use crate::config::{ClusteringMode, NetworkConfig};
use crate::error::{Error, Result};

fn check_threshold(alpha: f64, sigma_p2: f64) -> Result<()> {
    if alpha.is_nan() || alpha < 0.0 {
        return Err(Error::Domain(format!("threshold must be >= 0, got {alpha}")));
    }
    if !(sigma_p2.is_finite() && sigma_p2 > 0.0) {
        return Err(Error::Domain(format!("variance must be > 0, got {sigma_p2}")));
    }
    Ok(())
}

/// Truncated mean `∫₀^α x e^{−x/σ²}/σ² dx = σ² − e^{−α/σ²}(α + σ²)` of an
/// exponential cross-link gain with mean `sigma_p2`.
pub fn f_alpha(alpha: f64, sigma_p2: f64) -> Result<f64> {
    check_threshold(alpha, sigma_p2)?;
    if alpha.is_infinite() {
        return Ok(sigma_p2);
    }
    let x = alpha / sigma_p2;
    // 1 − e^{−x}(1 + x) loses everything to cancellation for tiny x.
    let unit = if x < 1e-4 { x * x * (0.5 - x / 3.0 + x * x / 8.0) } else { -(-x).exp_m1() - x * (-x).exp() };
    Ok(sigma_p2 * unit)
}

/// Probability `(1 − e^{−α/σ_p²})^{N_p}` that a relay is eligible.
pub fn eligibility_probability(alpha: f64, sigma_p2: f64, n_p: usize) -> Result<f64> {
    check_threshold(alpha, sigma_p2)?;
    if n_p == 0 {
        return Err(Error::Domain("at least one primary node is required".into()));
    }
    if alpha.is_infinite() {
        return Ok(1.0);
    }
    let single = -(-alpha / sigma_p2).exp_m1();
    Ok(single.powi(n_p as i32))
}

/// Relay `i` is eligible iff every gain in column `i` of `g` satisfies
/// `|g_{ℓi}|² ≤ α`.
pub fn select_eligible(g: &CMatrix, alpha: f64) -> Vec<bool> {
    g.column_iter().map(|col| col.iter().all(|x| x.norm_sqr() <= alpha)).collect()
}

/// Outcome of the relay power budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetStatus {
    Ok,
    /// γ_r ≤ 0: the source alone exhausts the interference budget.
    SourceSaturated,
    /// f(α) = 0: no relay can ever be eligible.
    NoEligibleRelays,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RelayBudget {
    /// Average per-relay transmit power.
    pub pr: f64,
    /// The residual budget γ_r that was spread over the relays.
    pub gamma_r: f64,
    pub status: BudgetStatus,
}

impl RelayBudget {
    pub fn is_zero_rate(&self) -> bool {
        self.status != BudgetStatus::Ok
    }
}

fn budget_from(gamma_r: f64, n: usize, f: f64) -> RelayBudget {
    if gamma_r <= 0.0 {
        return RelayBudget { pr: 0.0, gamma_r, status: BudgetStatus::SourceSaturated };
    }
    if f <= 0.0 {
        return RelayBudget { pr: 0.0, gamma_r, status: BudgetStatus::NoEligibleRelays };
    }
    RelayBudget { pr: gamma_r / (n as f64 * f), gamma_r, status: BudgetStatus::Ok }
}

/// Largest common relay power with `n·Pr·f(α) ≤ max(γ_r, 0)`, where
/// `γ_r = 2γ − σ_sp²·Ps`.
pub fn relay_power_budget(
    alpha: f64,
    ps: f64,
    gamma: f64,
    sigma_sp2: f64,
    n: usize,
    sigma_p2: f64,
) -> Result<RelayBudget> {
    robust_relay_power(alpha, 0.0, ps, gamma, sigma_sp2, n, sigma_p2)
}

/// Relay power budget when the true cross-link gain may exceed the estimate
/// by `epsilon`: the threshold in f is widened to `α + ε`.
pub fn robust_relay_power(
    alpha: f64,
    epsilon: f64,
    ps: f64,
    gamma: f64,
    sigma_sp2: f64,
    n: usize,
    sigma_p2: f64,
) -> Result<RelayBudget> {
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(Error::Domain(format!("uncertainty must be >= 0, got {epsilon}")));
    }
    if n == 0 {
        return Err(Error::Domain("relay count must be >= 1".into()));
    }
    let f = f_alpha(alpha + epsilon, sigma_p2)?;
    Ok(budget_from(2.0 * gamma - sigma_sp2 * ps, n, f))
}

/// `E[T_i |g_{ℓi}|²] = f(α)·(1 − e^{−α/σ_p²})^{N_p−1}`.
pub fn expected_gated_gain(alpha: f64, sigma_p2: f64, n_p: usize) -> Result<f64> {
    let others = if n_p > 1 { eligibility_probability(alpha, sigma_p2, n_p - 1)? } else { 1.0 };
    Ok(f_alpha(alpha, sigma_p2)? * others)
}

/// Per-relay power coefficient ξ (with `Pr = ξ/n`) under which the
/// instantaneous relay interference concentrates at `gamma_r`.
pub fn peak_power_scale(alpha: f64, sigma_p2: f64, n_p: usize, gamma_r: f64) -> Result<f64> {
    if !(gamma_r > 0.0) {
        return Err(Error::Domain(format!("peak budget must be > 0, got {gamma_r}")));
    }
    let mean = expected_gated_gain(alpha, sigma_p2, n_p)?;
    if mean <= 0.0 {
        return Err(Error::Infeasible("E[T|g|²] = 0, peak budget undefined".into()));
    }
    Ok(gamma_r / mean)
}

/// Contiguous blocks; the first `n mod M` groups get one extra relay.
pub fn assign_clusters_fixed(n: usize, m: usize) -> Result<Vec<usize>> {
    if m == 0 || n < m {
        return Err(Error::InvalidConfig(format!("fixed clustering needs n >= M >= 1, got n = {n}, M = {m}")));
    }
    let base = n / m;
    let extra = n % m;
    let mut out = Vec::with_capacity(n);
    for group in 0..m {
        let size = base + usize::from(group < extra);
        out.extend(std::iter::repeat_n(group, size));
    }
    Ok(out)
}

/// Each relay joins the antenna with the largest `|h_{im}|`; ties go to the
/// smallest antenna index.
pub fn assign_clusters_gain(h: &CMatrix) -> Vec<usize> {
    h.row_iter()
        .map(|row| {
            let mut best = 0;
            let mut best_gain = f64::NEG_INFINITY;
            for (m, x) in row.iter().enumerate() {
                let gain = x.norm_sqr();
                if gain > best_gain {
                    best = m;
                    best_gain = gain;
                }
            }
            best
        })
        .collect()
}

/// Wraps an angle into [0, 2π).
fn wrap_phase(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// θ_i with `e^{jθ_i} f_{mi} h_{im} = |f_{mi}||h_{im}|`, m the relay's group.
/// A zero product gets θ_i = 0.
pub fn rotation_phases(f: &CMatrix, h: &CMatrix, group_of: &[usize]) -> Vec<f64> {
    group_of
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let prod = f[(m, i)] * h[(i, m)];
            if prod.norm_sqr() == 0.0 {
                0.0
            } else {
                wrap_phase(-prod.arg())
            }
        })
        .collect()
}

/// Per-realization relay processing: who transmits, in which pipe, with what
/// rotation and gain.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelayPlan {
    pub eligible: Vec<bool>,
    pub group_of: Vec<usize>,
    pub theta: Vec<f64>,
    /// |c_i|, the common amplitude scaling.
    pub c_mag: f64,
    pub pr: f64,
    pub ps: f64,
    pub p_eligible: f64,
    pub status: BudgetStatus,
}

impl RelayPlan {
    /// `T_i c_i`, i.e. the diagonal of the relay processing matrix.
    pub fn gains(&self) -> impl Iterator<Item = crate::Complex64> + '_ {
        self.eligible.iter().zip(&self.theta).map(move |(&t, &theta)| {
            if t {
                crate::Complex64::from_polar(self.c_mag, theta)
            } else {
                crate::Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn is_zero_rate(&self) -> bool {
        self.status != BudgetStatus::Ok || self.c_mag == 0.0
    }
}

/// Clusters relays according to `mode` from the source-relay matrix `h`.
pub fn assign_clusters(mode: ClusteringMode, h: &CMatrix) -> Result<Vec<usize>> {
    match mode {
        ClusteringMode::Fixed => assign_clusters_fixed(h.nrows(), h.ncols()),
        ClusteringMode::Gain => Ok(assign_clusters_gain(h)),
    }
}

/// Builds the plan with a caller-chosen relay power. `c_mag` is
/// `sqrt(Pr / (p (Ps σ_s² + 1)))`; with `p = 0` the relays stay silent.
pub fn plan_with_power(
    config: &NetworkConfig,
    realization: &ChannelRealization,
    mode: ClusteringMode,
    ps: f64,
    pr: f64,
    status: BudgetStatus,
) -> Result<RelayPlan> {
    let eligible = select_eligible(&realization.g, config.alpha);
    let group_of = assign_clusters(mode, &realization.h)?;
    let theta = rotation_phases(&realization.f, &realization.h, &group_of);
    let p = eligibility_probability(config.alpha, config.sigma_p2, config.n_p)?;
    let (pr, status) = if p > 0.0 { (pr, status) } else { (0.0, BudgetStatus::NoEligibleRelays) };
    let c_mag = if pr > 0.0 { (pr / (p * (ps * config.sigma_s2 + 1.0))).sqrt() } else { 0.0 };
    Ok(RelayPlan { eligible, group_of, theta, c_mag, pr, ps, p_eligible: p, status })
}

/// Full plan with the relay power taken from the interference budget.
pub fn build_relay_plan(
    config: &NetworkConfig,
    realization: &ChannelRealization,
    mode: ClusteringMode,
    ps: f64,
) -> Result<RelayPlan> {
    config.check_source_power(ps)?;
    let budget = relay_power_budget(config.alpha, ps, config.gamma, config.sigma_sp2, config.n, config.sigma_p2)?;
    plan_with_power(config, realization, mode, ps, budget.pr, budget.status)
}
