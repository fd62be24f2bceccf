//! Instantaneous rate of a realization and the closed-form large-n rates.

use std::f64::consts::PI;

use nalgebra::Cholesky;
use serde::Serialize;

use crate::channel::{CMatrix, ChannelRealization};
use crate::config::{ClusteringMode, LogBase, NetworkConfig};
use crate::error::{Error, Result};
use crate::relay::{eligibility_probability, f_alpha, RelayPlan};
use crate::Complex64;

/// Equivalent source-to-destination channel and its noise autocorrelation.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivalentLink {
    /// `F D H`, M × M.
    pub h_tilde: CMatrix,
    /// `I + F D D† F†`, M × M.
    pub w: CMatrix,
}

impl EquivalentLink {
    pub fn new(realization: &ChannelRealization, plan: &RelayPlan) -> Self {
        let gains: Vec<Complex64> = plan.gains().collect();
        Self {
            h_tilde: equivalent_channel_from(&realization.f, &gains, &realization.h),
            w: noise_covariance_from(&realization.f, &gains),
        }
    }
}

/// `F diag(gains) H` for F of shape M × k and H of shape k × M'.
pub fn equivalent_channel_from(f: &CMatrix, gains: &[Complex64], h: &CMatrix) -> CMatrix {
    assert_eq!(f.ncols(), gains.len());
    assert_eq!(h.nrows(), gains.len());
    let (rows, cols) = (f.nrows(), h.ncols());
    let mut out = CMatrix::zeros(rows, cols);
    for (i, &d) in gains.iter().enumerate() {
        if d.norm_sqr() == 0.0 {
            continue;
        }
        for m in 0..rows {
            let fd = f[(m, i)] * d;
            for q in 0..cols {
                out[(m, q)] += fd * h[(i, q)];
            }
        }
    }
    out
}

/// `I + F diag(gains) diag(gains)† F†`.
pub fn noise_covariance_from(f: &CMatrix, gains: &[Complex64]) -> CMatrix {
    assert_eq!(f.ncols(), gains.len());
    let m = f.nrows();
    let mut out = CMatrix::identity(m, m);
    for (i, &d) in gains.iter().enumerate() {
        let power = d.norm_sqr();
        if power == 0.0 {
            continue;
        }
        for r in 0..m {
            out[(r, r)].re += power * f[(r, i)].norm_sqr();
            let fr = f[(r, i)] * power;
            for c in r + 1..m {
                let v = fr * f[(c, i)].conj();
                out[(r, c)] += v;
                out[(c, r)] += v.conj();
            }
        }
    }
    out
}

/// `[H̃]_{mq} = Σ_i T_i c_i f_{mi} h_{iq}`.
pub fn equivalent_channel(realization: &ChannelRealization, plan: &RelayPlan) -> CMatrix {
    let gains: Vec<Complex64> = plan.gains().collect();
    equivalent_channel_from(&realization.f, &gains, &realization.h)
}

/// `W = I + F D D† F†` with `D = diag(T_i c_i)`.
pub fn noise_covariance(realization: &ChannelRealization, plan: &RelayPlan) -> CMatrix {
    let gains: Vec<Complex64> = plan.gains().collect();
    noise_covariance_from(&realization.f, &gains)
}

/// `log det` of a Hermitian positive-definite matrix, in nats.
pub fn log_det_hpd(a: &CMatrix) -> Result<f64> {
    let chol =
        Cholesky::new(a.clone()).ok_or_else(|| Error::NumericDegeneracy("matrix is not positive definite".into()))?;
    let l = chol.l_dirty();
    // complex square roots never fail, so a negative pivot shows up as an
    // imaginary diagonal entry
    let diag: Vec<Complex64> = (0..a.nrows()).map(|i| l[(i, i)]).collect();
    if diag.iter().any(|d| !(d.re > 0.0) || d.im.abs() > 1e-8 * d.re) {
        return Err(Error::NumericDegeneracy("matrix is not positive definite".into()));
    }
    Ok(2.0 * diag.iter().map(|d| d.re.ln()).sum::<f64>())
}

/// `log det(I + (Ps/M) H̃ H̃† W⁻¹)` in nats, without the half-duplex factor.
///
/// Evaluated as `log det(W + (Ps/M) H̃ H̃†) − log det W`, both by Cholesky.
pub fn log_det_gain(ps: f64, m: usize, h_tilde: &CMatrix, w: &CMatrix) -> Result<f64> {
    let base = log_det_hpd(w)?;
    let signal = h_tilde * h_tilde.adjoint() * Complex64::new(ps / m as f64, 0.0);
    let total = log_det_hpd(&(w + signal))?;
    Ok((total - base).max(0.0))
}

/// Half-duplex secondary rate `½ log det(I + (Ps/M) H̃ H̃† W⁻¹)`.
pub fn instantaneous_rate(ps: f64, m: usize, link: &EquivalentLink, base: LogBase) -> Result<f64> {
    Ok(base.from_nats(0.5 * log_det_gain(ps, m, &link.h_tilde, &link.w)?))
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Mean of the largest of `m` i.i.d. Rayleigh magnitudes with `E|h|² = sigma_s2`.
pub fn mu_h(m: usize, sigma_s2: f64) -> f64 {
    assert!(m >= 1, "at least one antenna");
    // Γ(3/2) = √π / 2
    let gamma_3_2 = PI.sqrt() / 2.0;
    let scale = sigma_s2.sqrt() * m as f64 * gamma_3_2;
    (0..m)
        .map(|k| {
            let sign = if (m - k - 1).is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * binomial(m - 1, k) * scale / ((m - k) as f64).powf(1.5)
        })
        .sum()
}

/// Per-pipe channel coefficient and noise variance of the diagonalized
/// large-n channel.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticCoefficients {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

pub fn asymptotic_coefficients(
    config: &NetworkConfig,
    pr: f64,
    ps: f64,
    mode: ClusteringMode,
) -> Result<AsymptoticCoefficients> {
    let p = eligibility_probability(config.alpha, config.sigma_p2, config.n_p)?;
    let m = config.m as f64;
    let load = config.sigma_s2 * ps + 1.0;
    let a = match mode {
        ClusteringMode::Fixed => {
            PI * config.sigma_s2.sqrt() * config.sigma_d2.sqrt() / (4.0 * m) * (p * pr / load).sqrt()
        }
        ClusteringMode::Gain => {
            config.sigma_d2.sqrt() * mu_h(config.m, config.sigma_s2) / (2.0 * m) * (p * PI * pr / load).sqrt()
        }
    };
    let b = config.sigma_d2 * pr / load + 1.0 / config.n as f64;
    Ok(AsymptoticCoefficients { a: vec![a; config.m], b: vec![b; config.m] })
}

/// Capacity `½ Σ_m log(1 + n Ps a_m² / (M b_m))` of the parallel channel.
pub fn parallel_channel_rate(n: usize, ps: f64, coeffs: &AsymptoticCoefficients, base: LogBase) -> f64 {
    let m = coeffs.a.len() as f64;
    let nats: f64 = coeffs.a.iter().zip(&coeffs.b).map(|(a, b)| (n as f64 * ps * a * a / (m * b)).ln_1p()).sum();
    base.from_nats(0.5 * nats)
}

fn closed_form(config: &NetworkConfig, pr: f64, ps: f64, gain_numerator: f64) -> Result<f64> {
    if pr <= 0.0 {
        return Ok(0.0);
    }
    let p = eligibility_probability(config.alpha, config.sigma_p2, config.n_p)?;
    let n = config.n as f64;
    let m = config.m as f64;
    let snr = n * p * gain_numerator * config.sigma_d2 * pr * ps
        / (m.powi(3) * (config.sigma_d2 * pr + (config.sigma_s2 * ps + 1.0) / n));
    Ok(config.log_base.from_nats(m / 2.0 * snr.ln_1p()))
}

/// Large-n rate under fixed clustering.
pub fn rate_fixed_clustering(config: &NetworkConfig, pr: f64, ps: f64) -> Result<f64> {
    closed_form(config, pr, ps, PI * PI * config.sigma_s2 / 16.0)
}

/// Large-n rate under gain clustering.
pub fn rate_gain_clustering(config: &NetworkConfig, pr: f64, ps: f64) -> Result<f64> {
    let mu = mu_h(config.m, config.sigma_s2);
    closed_form(config, pr, ps, PI * mu * mu / 4.0)
}

pub fn closed_form_rate(config: &NetworkConfig, pr: f64, ps: f64, mode: ClusteringMode) -> Result<f64> {
    match mode {
        ClusteringMode::Fixed => rate_fixed_clustering(config, pr, ps),
        ClusteringMode::Gain => rate_gain_clustering(config, pr, ps),
    }
}

/// Constants of `R^(f) ≈ (M/2) log n + C_1` and the gain-clustering bonus
/// `C_2`, for `Pr = γ_r / (n f(α))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GrowthConstants {
    pub c1: f64,
    pub c2: f64,
}

pub fn growth_constants(config: &NetworkConfig, ps: f64, alpha: f64) -> Result<GrowthConstants> {
    let gamma_r = config.residual_budget(ps);
    if gamma_r <= 0.0 {
        return Err(Error::Infeasible(format!("residual budget γ_r = {gamma_r} <= 0")));
    }
    let f = f_alpha(alpha, config.sigma_p2)?;
    let p = eligibility_probability(alpha, config.sigma_p2, config.n_p)?;
    let m = config.m as f64;
    let base = config.log_base;
    let inner = p * PI * PI * config.sigma_s2 * config.sigma_d2 * gamma_r * ps
        / (16.0 * m.powi(3) * (config.sigma_d2 * gamma_r + f * (config.sigma_s2 * ps + 1.0)));
    let mu = mu_h(config.m, config.sigma_s2);
    Ok(GrowthConstants { c1: m / 2.0 * base.log(inner), c2: base.log(4.0 * mu * mu / (PI * config.sigma_s2)) })
}
