//! Channel realizations, ambient-source and noise generators, and the
//! received sample model of a three-node ambient backscatter link.
//!
//! The reader sees `y[n] = h0 s[n] + w[n]` while the tag is in its
//! non-backscatter state and `y[n] = h1 s[n] + w[n]` while it reflects,
//! with `h0 = h_sr` and `h1 = h_sr + eta * h_tr * h_st`.
//!
//! The reflection coefficient is called `eta` throughout. Field-trial style
//! setups sometimes call the same quantity the tag coefficient `alpha`; the
//! default of 0.5 applies to both names.

use crate::error::{param, Error, Result};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

/// Default reflection coefficient used by the Rayleigh channel draw.
pub const DEFAULT_ETA: f64 = 0.5;
/// Variance of the source-tag and source-reader gains in the Rayleigh draw.
pub const DEFAULT_SOURCE_LINK_VARIANCE: f64 = 1.0;
/// Variance of the tag-reader gain in the Rayleigh draw.
pub const DEFAULT_TAG_READER_VARIANCE: f64 = 10.0;
/// Default constellation size of the constant-modulus source.
pub const DEFAULT_PSK_ORDER: u32 = 8;

/// Draws one sample of `CN(0, variance)`.
#[inline]
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let scale = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(scale * re, scale * im)
}

/// Channel gains of one coherence block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelState {
    h_st: Complex64,
    h_sr: Complex64,
    h_tr: Complex64,
    eta: f64,
    h0: Complex64,
    h1: Complex64,
}

impl ChannelState {
    pub fn new(h_st: Complex64, h_sr: Complex64, h_tr: Complex64, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(param("eta", format!("must lie in (0, 1], got {eta}")));
        }
        Ok(ChannelState {
            h_st,
            h_sr,
            h_tr,
            eta,
            h0: h_sr,
            h1: h_sr + eta * h_tr * h_st,
        })
    }

    pub fn h_st(&self) -> Complex64 {
        self.h_st
    }

    pub fn h_sr(&self) -> Complex64 {
        self.h_sr
    }

    pub fn h_tr(&self) -> Complex64 {
        self.h_tr
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Effective channel in the non-backscatter state.
    pub fn h0(&self) -> Complex64 {
        self.h0
    }

    /// Effective channel in the backscatter state.
    pub fn h1(&self) -> Complex64 {
        self.h1
    }

    /// Effective channel seen while the given chip is on the air.
    pub fn gain(&self, chip: u8) -> Complex64 {
        if chip == 0 {
            self.h0
        } else {
            self.h1
        }
    }

    pub fn h0_sq(&self) -> f64 {
        self.h0.norm_sqr()
    }

    pub fn h1_sq(&self) -> f64 {
        self.h1.norm_sqr()
    }

    /// Relative channel difference of this realization.
    pub fn rcd(&self) -> Result<f64> {
        rcd(self.h0, self.h1)
    }
}

/// How [`draw_channel`] produces a realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelDraw {
    /// `h_st, h_sr ~ CN(0,1)`, `h_tr ~ CN(0,10)`, `eta = 0.5`.
    RayleighDefault,
    /// Use the given gains verbatim.
    Fixed {
        h_st: Complex64,
        h_sr: Complex64,
        h_tr: Complex64,
        eta: f64,
    },
}

pub fn draw_channel<R: Rng + ?Sized>(rng: &mut R, mode: &ChannelDraw) -> Result<ChannelState> {
    match *mode {
        ChannelDraw::RayleighDefault => {
            let h_st = complex_gaussian(rng, DEFAULT_SOURCE_LINK_VARIANCE);
            let h_sr = complex_gaussian(rng, DEFAULT_SOURCE_LINK_VARIANCE);
            let h_tr = complex_gaussian(rng, DEFAULT_TAG_READER_VARIANCE);
            ChannelState::new(h_st, h_sr, h_tr, DEFAULT_ETA)
        }
        ChannelDraw::Fixed {
            h_st,
            h_sr,
            h_tr,
            eta,
        } => ChannelState::new(h_st, h_sr, h_tr, eta),
    }
}

/// Which root of the RCD equation to take when synthesizing a channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RcdBranch {
    #[default]
    H1Stronger,
    H0Stronger,
}

/// Relative channel difference `||h1|^2 - |h0|^2| / sqrt(|h0|^4 + |h1|^4)`.
///
/// Lies in `[0, 1]` for any pair of gains, reaching 1 only when one of them
/// vanishes.
pub fn rcd(h0: Complex64, h1: Complex64) -> Result<f64> {
    rcd_from_powers(h0.norm_sqr(), h1.norm_sqr())
}

/// [`rcd`] from the squared magnitudes.
pub fn rcd_from_powers(h0_sq: f64, h1_sq: f64) -> Result<f64> {
    if h0_sq == 0.0 && h1_sq == 0.0 {
        return Err(Error::Domain("rcd undefined for h0 = h1 = 0".into()));
    }
    Ok((h1_sq - h0_sq).abs() / h0_sq.hypot(h1_sq))
}

/// Builds a channel with `|h0|^2 = 1` and zero phases whose RCD equals `rcd`.
///
/// With `x = |h1|^2` the RCD equation reduces to
/// `(1 - r^2) x^2 - 2x + (1 - r^2) = 0`, whose two roots are reciprocal;
/// `branch` picks the larger (`H1Stronger`) or the smaller one. The remaining
/// gains are back-filled as `h_sr = h_st = 1`, `eta = 0.5`,
/// `h_tr = (h1 - h0) / eta`.
///
/// The reachable range is `[0, 1)`; `rcd = 1` is accepted only on the
/// `H0Stronger` branch, where it means `h1 = 0`.
pub fn synthesize_channel_with_rcd(rcd: f64, branch: RcdBranch) -> Result<ChannelState> {
    let in_range = match branch {
        RcdBranch::H1Stronger => (0.0..1.0).contains(&rcd),
        RcdBranch::H0Stronger => (0.0..=1.0).contains(&rcd),
    };
    if !in_range {
        return Err(param(
            "rcd",
            format!("{rcd} is not reachable on branch {branch:?} (range is [0, 1))"),
        ));
    }
    let a = 1.0 - rcd * rcd;
    let h1_sq = if a == 0.0 {
        0.0
    } else {
        let disc = (1.0 - a * a).max(0.0).sqrt();
        match branch {
            // (1 + d)/a and its reciprocal a/(1 + d) avoid the cancellation in (1 - d)/a.
            RcdBranch::H1Stronger => (1.0 + disc) / a,
            RcdBranch::H0Stronger => a / (1.0 + disc),
        }
    };
    let h0 = Complex64::new(1.0, 0.0);
    let h1 = Complex64::new(h1_sq.sqrt(), 0.0);
    let h_st = Complex64::new(1.0, 0.0);
    ChannelState::new(h_st, h0, (h1 - h0) / DEFAULT_ETA, DEFAULT_ETA)
}

/// Ambient waveform families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    /// Zero-mean circularly symmetric complex Gaussian samples.
    ComplexGaussian,
    /// Uniform draws from an M-PSK constellation.
    ConstantModulus { order: u32 },
}

/// Generator of the ambient samples `s[n]` with average power `power`.
///
/// The constant-modulus model only matters through `|s[n]|^2 = Ps`, since
/// every detector here is energy based; any other unit-modulus waveform is a
/// drop-in replacement.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientSource {
    kind: SourceKind,
    power: f64,
    constellation: Vec<Complex64>,
}

impl AmbientSource {
    pub fn complex_gaussian(power: f64) -> Result<Self> {
        Self::new(SourceKind::ComplexGaussian, power)
    }

    pub fn psk(order: u32, power: f64) -> Result<Self> {
        Self::new(SourceKind::ConstantModulus { order }, power)
    }

    pub fn new(kind: SourceKind, power: f64) -> Result<Self> {
        if !(power > 0.0 && power.is_finite()) {
            return Err(param("Ps", format!("must be positive and finite, got {power}")));
        }
        let constellation = match kind {
            SourceKind::ComplexGaussian => Vec::new(),
            SourceKind::ConstantModulus { order } => {
                if order < 2 {
                    return Err(param("modulation_order", format!("must be >= 2, got {order}")));
                }
                let amp = power.sqrt();
                (0..order)
                    .map(|k| Complex64::from_polar(amp, 2.0 * PI * k as f64 / order as f64))
                    .collect()
            }
        };
        Ok(AmbientSource {
            kind,
            power,
            constellation,
        })
    }

    pub fn kind(&self) -> SourceKind {
        self.kind
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self.kind, SourceKind::ConstantModulus { .. })
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        match self.kind {
            SourceKind::ComplexGaussian => complex_gaussian(rng, self.power),
            SourceKind::ConstantModulus { .. } => {
                self.constellation[rng.random_range(0..self.constellation.len())]
            }
        }
    }
}

/// Additive white complex Gaussian noise of power `power`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    power: f64,
}

impl NoiseModel {
    pub fn new(power: f64) -> Result<Self> {
        if !(power > 0.0 && power.is_finite()) {
            return Err(param("Nw", format!("must be positive and finite, got {power}")));
        }
        Ok(NoiseModel { power })
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        complex_gaussian(rng, self.power)
    }
}

/// Link-level parameters shared by every detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    /// Samples per coded half-interval (`N`).
    pub samples_per_half: usize,
    /// Linear SNR `Ps / Nw`.
    pub gamma: f64,
    /// Probability that an original information bit is 1.
    pub prior_of_one: f64,
    /// Data symbols per coherence block (`K`).
    pub block_len: usize,
    /// Training symbols per coherence block (`T`).
    pub training_len: usize,
}

impl Default for LinkParams {
    fn default() -> Self {
        LinkParams {
            samples_per_half: 20,
            gamma: 10f64.powf(0.5),
            prior_of_one: 0.5,
            block_len: 30,
            training_len: 2,
        }
    }
}

impl LinkParams {
    pub fn validate(&self) -> Result<()> {
        if self.samples_per_half < 1 {
            return Err(param("N", "must be >= 1"));
        }
        if self.block_len < 1 {
            return Err(param("K", "must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.prior_of_one) {
            return Err(param(
                "prior_of_one",
                format!("must lie in [0, 1], got {}", self.prior_of_one),
            ));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(param("gamma", format!("must be positive, got {}", self.gamma)));
        }
        Ok(())
    }
}

/// Received samples of one coded chip: `y[n] = h_chip s[n] + w[n]`.
pub fn receive_chip<R: Rng + ?Sized>(
    chip: u8,
    ch: &ChannelState,
    src: &AmbientSource,
    noise: &NoiseModel,
    n: usize,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    if n < 1 {
        return Err(param("N", "must be >= 1"));
    }
    let h = ch.gain(chip);
    Ok((0..n)
        .map(|_| {
            let s = src.sample(rng);
            h * s + noise.sample(rng)
        })
        .collect())
}

/// Energy `sum |y[n]|^2` of one chip, drawn exactly as [`receive_chip`] draws
/// its samples but without materializing them.
#[inline]
pub fn chip_energy<R: Rng + ?Sized>(
    chip: u8,
    ch: &ChannelState,
    src: &AmbientSource,
    noise: &NoiseModel,
    n: usize,
    rng: &mut R,
) -> f64 {
    let h = ch.gain(chip);
    let mut acc = 0.0;
    for _ in 0..n {
        let s = src.sample(rng);
        acc += (h * s + noise.sample(rng)).norm_sqr();
    }
    acc
}

/// Per-sample received variance `|h|^2 Ps + Nw`.
pub fn sigma_sq(h: Complex64, ps: f64, nw: f64) -> Result<f64> {
    if !(ps > 0.0) {
        return Err(param("Ps", format!("must be positive, got {ps}")));
    }
    if !(nw > 0.0) {
        return Err(param("Nw", format!("must be positive, got {nw}")));
    }
    Ok(h.norm_sqr() * ps + nw)
}
