//! Seeded Rayleigh-fading channel draws.
//!
//! Every entry is circularly-symmetric complex Gaussian with `E|x|² = σ²`
//! (real and imaginary parts each `N(0, σ²/2)`). Each link type of each
//! (trial, frame) pair reads from its own ChaCha8 stream, so draws can be
//! replayed bit-exactly in any order and on any thread.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::Complex64;

/// Complex matrix used throughout the crate.
pub type CMatrix = DMatrix<Complex64>;

const FRAME_BITS: u32 = 5;
const LINK_BITS: u32 = 3;
/// Largest frame index a [`SeedPath`] can address.
pub const MAX_FRAME: u32 = (1 << FRAME_BITS) - 1;
/// Largest trial index a [`SeedPath`] can address.
pub const MAX_TRIAL: u64 = (1 << (64 - FRAME_BITS - LINK_BITS)) - 1;

/// Identifies the random stream a realization is drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SeedPath {
    pub master: u64,
    pub trial: u64,
    pub frame: u32,
}

impl SeedPath {
    pub fn new(master: u64, trial: u64) -> Self {
        Self { master, trial, frame: 0 }
    }

    pub fn with_frame(self, frame: u32) -> Self {
        Self { frame, ..self }
    }

    fn stream(self, link: Link) -> u64 {
        debug_assert!(self.trial <= MAX_TRIAL && self.frame <= MAX_FRAME);
        (self.trial << (FRAME_BITS + LINK_BITS)) | (u64::from(self.frame) << LINK_BITS) | link as u64
    }

    /// RNG dedicated to one link type of this path.
    pub fn rng(self, link: Link) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(self.stream(link));
        rng
    }
}

/// Link types, each with an independent substream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum Link {
    SourceRelay = 0,
    RelayDestination = 1,
    RelayPrimary = 2,
    SourcePrimary = 3,
    RelayRelay = 4,
}

/// One draw of all channel matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    /// Source to relays, n × M; entry (i, m) is the gain from antenna m to relay i.
    pub h: CMatrix,
    /// Relays to destination, M × n; entry (m, i) is the gain from relay i to antenna m.
    pub f: CMatrix,
    /// Relays to primaries, N_p × n.
    pub g: CMatrix,
    /// Source to primaries, M × N_p; column ℓ is h_{p,ℓ}.
    pub hp: CMatrix,
    /// Relay group 1 to relay group 2, (n/2) × (n/2); row = receiving relay
    /// of group 2, column = transmitting relay of group 1.
    pub hr: Option<CMatrix>,
    pub seed_path: SeedPath,
}

/// Fills a `rows × cols` matrix in row-major order with CN(0, variance) draws.
pub fn complex_gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, variance: f64) -> CMatrix {
    let scale = (variance / 2.0).sqrt();
    let mut out = CMatrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            out[(r, c)] = Complex64::new(re * scale, im * scale);
        }
    }
    out
}

/// Draws a single link's matrix with the dimensions and variance `config`
/// implies. Identical to the corresponding field of [`sample_channels`].
pub fn sample_link(config: &NetworkConfig, seed_path: SeedPath, link: Link) -> CMatrix {
    let mut rng = seed_path.rng(link);
    let (rows, cols, var) = match link {
        Link::SourceRelay => (config.n, config.m, config.sigma_s2),
        Link::RelayDestination => (config.m, config.n, config.sigma_d2),
        Link::RelayPrimary => (config.n_p, config.n, config.sigma_p2),
        Link::SourcePrimary => (config.m, config.n_p, config.sigma_sp2),
        Link::RelayRelay => (config.n / 2, config.n / 2, config.sigma_r2),
    };
    complex_gaussian_matrix(&mut rng, rows, cols, var)
}

/// Draws a full realization. `with_arp_links` adds the inter-group matrix
/// and requires an even relay count.
pub fn sample_channels(
    config: &NetworkConfig,
    seed_path: SeedPath,
    with_arp_links: bool,
) -> Result<ChannelRealization> {
    config.validate()?;
    if with_arp_links && !config.n.is_multiple_of(2) {
        return Err(Error::InvalidConfig(format!(
            "alternating relay protocol needs an even relay count, got n = {}",
            config.n
        )));
    }
    let hr = with_arp_links.then(|| sample_link(config, seed_path, Link::RelayRelay));
    Ok(ChannelRealization {
        h: sample_link(config, seed_path, Link::SourceRelay),
        f: sample_link(config, seed_path, Link::RelayDestination),
        g: sample_link(config, seed_path, Link::RelayPrimary),
        hp: sample_link(config, seed_path, Link::SourcePrimary),
        hr,
        seed_path,
    })
}
