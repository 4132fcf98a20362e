//! Block-level link simulation and BER estimation.
//!
//! A run is a sequence of independent coherence blocks. Block `b` draws all
//! of its randomness from ChaCha8 streams keyed by the run seed, with the
//! stream number derived from `(b, purpose)`, so results do not depend on how
//! blocks are spread over worker threads. Per-block error counts are integers
//! and the reduction is plain addition.

use crate::analysis::{self, ChannelPowers, VarPair};
use crate::coding::{diff_manchester_encode, manchester_encode, ChipPair};
use crate::detectors::{
    nocomc_decode, BaselineState, EnergyPair, SeCoMCState,
};
use crate::error::{Error, Result};
use crate::signal_model::{
    chip_energy, draw_channel, synthesize_channel_with_rcd, AmbientSource, ChannelDraw,
    ChannelState, LinkParams, NoiseModel, RcdBranch, SourceKind,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const STREAMS_PER_BLOCK: u64 = 8;
const STREAM_SHARED: u64 = 0;
// Training draws sit on their own streams so changing T leaves the data
// samples untouched.
const STREAM_SECOMC_TRAINING: u64 = 5;
const STREAM_BASELINE_PILOTS: u64 = 6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelMode {
    /// A fresh Rayleigh draw per block.
    RayleighRandom,
    /// One synthetic channel with the requested RCD, reused by every block.
    FixedRcd { rcd: f64, branch: RcdBranch },
    FixedChannels(ChannelState),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DetectorKind {
    Secomc,
    SecomcGenie,
    Nocomc,
    Baseline,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 4] = [
        DetectorKind::Secomc,
        DetectorKind::SecomcGenie,
        DetectorKind::Nocomc,
        DetectorKind::Baseline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DetectorKind::Secomc => "secomc",
            DetectorKind::SecomcGenie => "secomc_genie",
            DetectorKind::Nocomc => "nocomc",
            DetectorKind::Baseline => "baseline",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|d| d.name() == s)
    }

    fn index(self) -> usize {
        self as usize
    }

    fn stream(self) -> u64 {
        1 + self as u64
    }
}

/// How the baseline threshold is set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BaselineTraining {
    /// Midpoint of the labeled pilot means.
    PilotMidpoint,
    /// Mean of the block's data energies, which presumes equiprobable bits.
    #[default]
    DataMean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub link: LinkParams,
    pub source_kind: SourceKind,
    /// `Nw`; the source power follows as `gamma * Nw`.
    pub noise_power: f64,
    pub channel_mode: ChannelMode,
    pub detectors: Vec<DetectorKind>,
    pub blocks: u64,
    pub seed: u64,
    pub baseline_training: BaselineTraining,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            link: LinkParams::default(),
            source_kind: SourceKind::ComplexGaussian,
            noise_power: 1.0,
            channel_mode: ChannelMode::RayleighRandom,
            detectors: DetectorKind::ALL.to_vec(),
            blocks: 1000,
            seed: 0,
            baseline_training: BaselineTraining::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn source(&self) -> Result<AmbientSource> {
        AmbientSource::new(self.source_kind, self.link.gamma * self.noise_power)
    }

    pub fn noise(&self) -> Result<NoiseModel> {
        NoiseModel::new(self.noise_power)
    }

    /// Sets `blocks` so that each detector sees at least `bits` data bits.
    pub fn with_bits(mut self, bits: u64) -> Self {
        let k = self.link.block_len.max(1) as u64;
        self.blocks = bits.div_ceil(k).max(1);
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.link.validate()?;
        self.noise()?;
        self.source()?;
        if self.blocks < 1 {
            return Err(Error::Config("blocks must be >= 1".into()));
        }
        if self.detectors.is_empty() {
            return Err(Error::Config("no detectors selected".into()));
        }
        let needs_training = self
            .detectors
            .iter()
            .any(|d| matches!(d, DetectorKind::Secomc | DetectorKind::Baseline));
        if needs_training && self.link.training_len < 1 {
            return Err(Error::Config(
                "training_len must be >= 1 for secomc and baseline".into(),
            ));
        }
        if let ChannelMode::FixedRcd { rcd, branch } = self.channel_mode {
            synthesize_channel_with_rcd(rcd, branch)?;
        }
        Ok(())
    }

    fn active(&self) -> [bool; 4] {
        let mut on = [false; 4];
        for d in &self.detectors {
            on[d.index()] = true;
        }
        on
    }
}

/// Error and trial counts for one detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counts {
    pub errors: u64,
    pub trials: u64,
}

impl Counts {
    fn add(self, o: Counts) -> Counts {
        Counts {
            errors: self.errors + o.errors,
            trials: self.trials + o.trials,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockOutcome {
    pub channel: ChannelState,
    counts: [Counts; 4],
}

impl BlockOutcome {
    pub fn counts(&self, d: DetectorKind) -> Counts {
        self.counts[d.index()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerEstimate {
    pub errors: u64,
    pub trials: u64,
    pub ber: f64,
    pub half_width_95: f64,
}

impl BerEstimate {
    pub fn new(errors: u64, trials: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::Config("zero trials".into()));
        }
        if errors > trials {
            return Err(Error::Config(format!("{errors} errors in {trials} trials")));
        }
        let ber = errors as f64 / trials as f64;
        Ok(BerEstimate {
            errors,
            trials,
            ber,
            half_width_95: 1.96 * (ber * (1.0 - ber) / trials as f64).sqrt(),
        })
    }

    /// Half-width evaluated at a reference probability instead of the
    /// estimate, for runs that may observe no errors at all.
    pub fn half_width_at(&self, p: f64) -> f64 {
        1.96 * (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

/// `sqrt(a^2 + b^2)` of two half-widths.
pub fn combined_half_width(a: &BerEstimate, b: &BerEstimate) -> f64 {
    a.half_width_95.hypot(b.half_width_95)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerReport {
    pub entries: Vec<(DetectorKind, BerEstimate)>,
}

impl BerReport {
    pub fn get(&self, d: DetectorKind) -> Option<&BerEstimate> {
        self.entries.iter().find(|(k, _)| *k == d).map(|(_, e)| e)
    }
}

/// Random generator for one `(block, purpose)` pair of a run.
fn stream(seed: u64, block: u64, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block.wrapping_mul(STREAMS_PER_BLOCK).wrapping_add(purpose));
    rng
}

struct Prepared<'a> {
    cfg: &'a ExperimentConfig,
    source: AmbientSource,
    noise: NoiseModel,
    fixed: Option<ChannelState>,
    active: [bool; 4],
}

impl<'a> Prepared<'a> {
    fn new(cfg: &'a ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let fixed = match cfg.channel_mode {
            ChannelMode::RayleighRandom => None,
            ChannelMode::FixedRcd { rcd, branch } => Some(synthesize_channel_with_rcd(rcd, branch)?),
            ChannelMode::FixedChannels(ch) => Some(ch),
        };
        Ok(Prepared {
            cfg,
            source: cfg.source()?,
            noise: cfg.noise()?,
            fixed,
            active: cfg.active(),
        })
    }

    fn energy(&self, chip: u8, ch: &ChannelState, n: usize, rng: &mut ChaCha8Rng) -> f64 {
        chip_energy(chip, ch, &self.source, &self.noise, n, rng)
    }

    fn pair(&self, pair: [u8; 2], ch: &ChannelState, rng: &mut ChaCha8Rng) -> EnergyPair {
        let n = self.cfg.link.samples_per_half;
        EnergyPair {
            za: self.energy(pair[0], ch, n, rng),
            zb: self.energy(pair[1], ch, n, rng),
        }
    }

    fn channel(&self, rng: &mut ChaCha8Rng) -> Result<ChannelState> {
        match self.fixed {
            Some(ch) => Ok(ch),
            None => draw_channel(rng, &ChannelDraw::RayleighDefault),
        }
    }

    fn run(&self, block: u64) -> Result<BlockOutcome> {
        let cfg = self.cfg;
        let k = cfg.link.block_len;
        let t = cfg.link.training_len;
        let mut shared = stream(cfg.seed, block, STREAM_SHARED);
        let ch = self.channel(&mut shared)?;
        let bits: Vec<u8> = (0..k)
            .map(|_| u8::from(shared.random_bool(cfg.link.prior_of_one)))
            .collect();
        let mut counts = [Counts::default(); 4];
        let count = |decoded: &[u8]| Counts {
            errors: decoded.iter().zip(&bits).filter(|(a, b)| a != b).count() as u64,
            trials: k as u64,
        };

        let manchester = manchester_encode(&bits);
        for d in [DetectorKind::Secomc, DetectorKind::SecomcGenie] {
            if !self.active[d.index()] {
                continue;
            }
            let mut rng = stream(cfg.seed, block, d.stream());
            let state = if d == DetectorKind::Secomc {
                let mut trng = stream(cfg.seed, block, STREAM_SECOMC_TRAINING);
                let training: Vec<EnergyPair> = (0..t)
                    .map(|_| self.pair(ChipPair::ZeroOne.chips(), &ch, &mut trng))
                    .collect();
                SeCoMCState::train(&training, cfg.link.samples_per_half)?
            } else {
                let ps = self.source.power();
                let nw = self.noise.power();
                SeCoMCState::genie_from_variances(ch.h0_sq() * ps + nw, ch.h1_sq() * ps + nw)
            };
            let decoded: Vec<u8> = manchester
                .chips()
                .chunks_exact(2)
                .map(|p| state.detect(self.pair([p[0], p[1]], &ch, &mut rng)))
                .collect();
            counts[d.index()] = count(&decoded);
        }

        if self.active[DetectorKind::Nocomc.index()] {
            let mut rng = stream(cfg.seed, block, DetectorKind::Nocomc.stream());
            let seq = diff_manchester_encode(&bits, ChipPair::OneZero);
            let pairs: Vec<EnergyPair> = seq
                .chips()
                .chunks_exact(2)
                .map(|p| self.pair([p[0], p[1]], &ch, &mut rng))
                .collect();
            counts[DetectorKind::Nocomc.index()] = count(&nocomc_decode(&pairs)?);
        }

        if self.active[DetectorKind::Baseline.index()] {
            let mut rng = stream(cfg.seed, block, DetectorKind::Baseline.stream());
            // on-off keying over the whole bit interval, 2N samples
            let n2 = 2 * cfg.link.samples_per_half;
            let mut prng = stream(cfg.seed, block, STREAM_BASELINE_PILOTS);
            let p0: Vec<f64> = (0..t).map(|_| self.energy(0, &ch, n2, &mut prng)).collect();
            let p1: Vec<f64> = (0..t).map(|_| self.energy(1, &ch, n2, &mut prng)).collect();
            let data: Vec<f64> = bits
                .iter()
                .map(|&b| self.energy(b, &ch, n2, &mut rng))
                .collect();
            let state = match cfg.baseline_training {
                BaselineTraining::PilotMidpoint => BaselineState::train(&p0, &p1)?,
                BaselineTraining::DataMean => BaselineState::train_equal_prior(&p0, &p1, &data)?,
            };
            let decoded: Vec<u8> = data.iter().map(|&e| state.detect(e)).collect();
            counts[DetectorKind::Baseline.index()] = count(&decoded);
        }

        Ok(BlockOutcome {
            channel: ch,
            counts,
        })
    }
}

/// Simulates coherence block `block` of the run described by `cfg`.
pub fn run_block(cfg: &ExperimentConfig, block: u64) -> Result<BlockOutcome> {
    Prepared::new(cfg)?.run(block)
}

/// Channel realization used by block `block`.
pub fn block_channel(cfg: &ExperimentConfig, block: u64) -> Result<ChannelState> {
    Prepared::new(cfg)?.channel(&mut stream(cfg.seed, block, STREAM_SHARED))
}

/// Runs all blocks in parallel on the current rayon pool.
pub fn estimate_ber(cfg: &ExperimentConfig) -> Result<BerReport> {
    let prep = Prepared::new(cfg)?;
    let totals = (0..cfg.blocks)
        .into_par_iter()
        .map(|b| prep.run(b).map(|o| o.counts))
        .try_reduce(
            || [Counts::default(); 4],
            |a, b| Ok(std::array::from_fn(|i| a[i].add(b[i]))),
        )?;
    let mut seen = [false; 4];
    let mut entries = Vec::new();
    for &d in &cfg.detectors {
        if std::mem::replace(&mut seen[d.index()], true) {
            continue;
        }
        let c = totals[d.index()];
        entries.push((d, BerEstimate::new(c.errors, c.trials)?));
    }
    Ok(BerReport { entries })
}

/// Closed-form values attached to a sweep row. `None` marks a column with
/// no applicable formula.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AnalyticBer {
    pub exact: Option<f64>,
    pub approx: Option<f64>,
    pub floor: Option<f64>,
}

/// Analytic BER of detector `d` on one channel.
pub fn analytic_for_channel(
    cfg: &ExperimentConfig,
    d: DetectorKind,
    ch: &ChannelState,
) -> Result<AnalyticBer> {
    let n = cfg.link.samples_per_half;
    let gamma = cfg.link.gamma;
    let p = ChannelPowers::from(ch);
    let (h0, h1) = (p.h0_sq, p.h1_sq);
    let gaussian = cfg.source_kind == SourceKind::ComplexGaussian;
    let secomc = if gaussian {
        let v = VarPair::from_powers(p, gamma * cfg.noise_power, cfg.noise_power)?;
        AnalyticBer {
            exact: Some(analysis::ber_secomc_gaussian_exact(v, n)?),
            approx: Some(analysis::ber_secomc_gaussian_approx(h0, h1, gamma, n)),
            floor: Some(analysis::ber_secomc_gaussian_floor(h0, h1, n)),
        }
    } else {
        AnalyticBer {
            exact: None,
            approx: Some(analysis::ber_secomc_deterministic_approx(h0, h1, gamma, n)),
            floor: Some(analysis::ber_secomc_deterministic_highsnr(h0, h1, gamma, n)),
        }
    };
    Ok(match d {
        DetectorKind::Secomc | DetectorKind::SecomcGenie => secomc,
        DetectorKind::Nocomc => AnalyticBer {
            exact: secomc.exact.map(analysis::ber_nocomc_from_secomc),
            approx: secomc.approx.map(analysis::ber_nocomc_from_secomc),
            floor: secomc.floor.map(analysis::ber_nocomc_from_secomc),
        },
        DetectorKind::Baseline if gaussian => AnalyticBer {
            approx: Some(analysis::ber_baseline_gaussian_approx(h0, h1, gamma, n)),
            ..AnalyticBer::default()
        },
        DetectorKind::Baseline => AnalyticBer::default(),
    })
}

/// Analytic BER averaged over the channels the run actually uses.
pub fn analytic_ber(cfg: &ExperimentConfig, d: DetectorKind) -> Result<AnalyticBer> {
    let prep = Prepared::new(cfg)?;
    if let Some(ch) = prep.fixed {
        return analytic_for_channel(cfg, d, &ch);
    }
    let per_block: Vec<AnalyticBer> = (0..cfg.blocks)
        .into_par_iter()
        .map(|b| {
            let ch = prep.channel(&mut stream(cfg.seed, b, STREAM_SHARED))?;
            analytic_for_channel(cfg, d, &ch)
        })
        .collect::<Result<_>>()?;
    let m = cfg.blocks as f64;
    let avg = |f: fn(&AnalyticBer) -> Option<f64>| -> Option<f64> {
        per_block
            .iter()
            .map(f)
            .sum::<Option<f64>>()
            .map(|s| s / m)
    };
    Ok(AnalyticBer {
        exact: avg(|a| a.exact),
        approx: avg(|a| a.approx),
        floor: avg(|a| a.floor),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    N,
    T,
    GammaDb,
    Rcd,
    Prior,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::N => "N",
            SweepAxis::T => "T",
            SweepAxis::GammaDb => "gamma_db",
            SweepAxis::Rcd => "rcd",
            SweepAxis::Prior => "prior",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [Self::N, Self::T, Self::GammaDb, Self::Rcd, Self::Prior]
            .into_iter()
            .find(|a| a.name() == s)
    }

    /// Copy of `base` with this axis set to `value`.
    pub fn apply(self, base: &ExperimentConfig, value: f64) -> Result<ExperimentConfig> {
        let mut cfg = base.clone();
        let count = |what: &str| -> Result<usize> {
            if value >= 0.0 && value.fract() == 0.0 && value <= u32::MAX as f64 {
                Ok(value as usize)
            } else {
                Err(Error::Config(format!("{what} sweep value {value} is not a whole number")))
            }
        };
        match self {
            SweepAxis::N => cfg.link.samples_per_half = count("N")?,
            SweepAxis::T => cfg.link.training_len = count("T")?,
            SweepAxis::GammaDb => cfg.link.gamma = crate::cli::db_to_linear(value),
            SweepAxis::Rcd => {
                let branch = match base.channel_mode {
                    ChannelMode::FixedRcd { branch, .. } => branch,
                    _ => RcdBranch::default(),
                };
                cfg.channel_mode = ChannelMode::FixedRcd { rcd: value, branch };
            }
            SweepAxis::Prior => cfg.link.prior_of_one = value,
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub axis_value: f64,
    pub detector: DetectorKind,
    pub estimate: BerEstimate,
    pub analytic: AnalyticBer,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn series(&self, d: DetectorKind) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.detector == d)
    }
}

/// One simulation per axis value; every point reuses the base seed.
pub fn sweep(base: &ExperimentConfig, axis: SweepAxis, values: &[f64]) -> Result<SweepTable> {
    if values.is_empty() {
        return Err(Error::Config("sweep needs at least one value".into()));
    }
    let configs = values
        .iter()
        .map(|&v| axis.apply(base, v))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for (cfg, &v) in configs.iter().zip(values) {
        let report = estimate_ber(cfg)?;
        for (d, est) in report.entries {
            rows.push(SweepRow {
                axis_value: v,
                detector: d,
                estimate: est,
                analytic: analytic_ber(cfg, d)?,
            });
        }
    }
    Ok(SweepTable { axis, rows })
}
