//! Energy detectors operating on half-interval energies.
//!
//! * [`SeCoMCState`]: semi-coherent Manchester detection. Compares the two
//!   half energies of one Manchester symbol, oriented by a short training
//!   phase that learns whether `sigma0^2` or `sigma1^2` is larger.
//! * [`NoCoMCState`]: non-coherent detection of differential Manchester.
//!   Decides each bit from the sign product of the half-energy differences of
//!   two adjacent symbols; no training at all.
//! * [`BaselineState`]: a threshold detector on full-symbol energies of
//!   uncoded on-off keyed bits, used as the prior-art comparator.
//!
//! Exact energy ties follow the literal comparison operators of the
//! reference algorithms; each method documents its tie rule.

use crate::error::{param, Error, Result};
use num_complex::Complex64;

/// Received energies of the first (`za`) and second (`zb`) half of a symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyPair {
    pub za: f64,
    pub zb: f64,
}

impl EnergyPair {
    pub fn new(za: f64, zb: f64) -> Result<Self> {
        if !(za >= 0.0 && zb >= 0.0) {
            return Err(param("energy", format!("energies must be >= 0, got ({za}, {zb})")));
        }
        Ok(EnergyPair { za, zb })
    }

    /// `za - zb`.
    pub fn diff(&self) -> f64 {
        self.za - self.zb
    }

    pub fn total(&self) -> f64 {
        self.za + self.zb
    }

    pub fn scaled(&self, factor: f64) -> EnergyPair {
        EnergyPair {
            za: self.za * factor,
            zb: self.zb * factor,
        }
    }
}

/// Splits `2N` samples into halves and returns their energies.
pub fn half_energies(samples: &[Complex64]) -> Result<EnergyPair> {
    if samples.len() % 2 != 0 {
        return Err(Error::Framing(format!(
            "symbol has odd sample count {}",
            samples.len()
        )));
    }
    let (a, b) = samples.split_at(samples.len() / 2);
    let energy = |v: &[Complex64]| v.iter().map(|s| s.norm_sqr()).sum::<f64>();
    Ok(EnergyPair {
        za: energy(a),
        zb: energy(b),
    })
}

/// Ordering of the two hypothesis variances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarianceRelation {
    Sigma0Greater,
    Sigma1Greater,
}

impl VarianceRelation {
    /// Mirrors the training rule: `Sigma0Greater` iff `sigma0_sq > sigma1_sq`.
    pub fn from_variances(sigma0_sq: f64, sigma1_sq: f64) -> Self {
        if sigma0_sq > sigma1_sq {
            VarianceRelation::Sigma0Greater
        } else {
            VarianceRelation::Sigma1Greater
        }
    }
}

/// Training averages `At` and `Bt` (per-sample energy of each half).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingAverages {
    pub at: f64,
    pub bt: f64,
}

/// State of the semi-coherent Manchester detector for one coherence block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeCoMCState {
    relation: VarianceRelation,
    training: Option<TrainingAverages>,
    degenerate: bool,
}

impl SeCoMCState {
    /// Learns the variance ordering from `T` Manchester-coded '1' symbols.
    ///
    /// A '1' is sent as `(0,1)`, so the first half of every training symbol
    /// rides `h0` and the second rides `h1`; `At` and `Bt` therefore estimate
    /// `sigma0^2` and `sigma1^2`.
    pub fn train(training_pairs: &[EnergyPair], n: usize) -> Result<Self> {
        if training_pairs.is_empty() {
            return Err(Error::Training(
                "SeCoMC needs at least one training symbol; use SeCoMCState::genie instead".into(),
            ));
        }
        if n == 0 {
            return Err(param("N", "must be >= 1"));
        }
        let norm = (training_pairs.len() * n) as f64;
        let at = training_pairs.iter().map(|e| e.za).sum::<f64>() / norm;
        let bt = training_pairs.iter().map(|e| e.zb).sum::<f64>() / norm;
        Ok(SeCoMCState {
            relation: VarianceRelation::from_variances(at, bt),
            training: Some(TrainingAverages { at, bt }),
            degenerate: at == bt,
        })
    }

    /// Detector told the true ordering, with no training.
    pub fn genie(relation: VarianceRelation) -> Self {
        SeCoMCState {
            relation,
            training: None,
            degenerate: false,
        }
    }

    /// Genie state from the true hypothesis variances. Equal variances are
    /// flagged as degenerate; decisions are still produced.
    pub fn genie_from_variances(sigma0_sq: f64, sigma1_sq: f64) -> Self {
        SeCoMCState {
            relation: VarianceRelation::from_variances(sigma0_sq, sigma1_sq),
            training: None,
            degenerate: sigma0_sq == sigma1_sq,
        }
    }

    pub fn relation(&self) -> VarianceRelation {
        self.relation
    }

    pub fn training(&self) -> Option<TrainingAverages> {
        self.training
    }

    /// True when the two variances (or their estimates) coincide, in which
    /// case the detector cannot separate the hypotheses.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Bit decision for one symbol.
    ///
    /// `Sigma0Greater`: 1 iff `za > zb`. `Sigma1Greater`: 1 iff `za <= zb`.
    #[inline]
    pub fn detect(&self, e: EnergyPair) -> u8 {
        let one = match self.relation {
            VarianceRelation::Sigma0Greater => e.za > e.zb,
            VarianceRelation::Sigma1Greater => e.za <= e.zb,
        };
        u8::from(one)
    }
}

/// Sign of a half-energy difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffSign {
    Negative,
    /// Exact tie; only reachable with exactly equal energies.
    Zero,
    Positive,
}

impl DiffSign {
    pub fn of(x: f64) -> Self {
        if x > 0.0 {
            DiffSign::Positive
        } else if x < 0.0 {
            DiffSign::Negative
        } else {
            DiffSign::Zero
        }
    }

    pub fn is_positive(self) -> bool {
        self == DiffSign::Positive
    }
}

/// One symbol of memory for the non-coherent detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoCoMCState {
    prev: DiffSign,
}

impl NoCoMCState {
    /// Initializes from the preamble symbol's energies.
    pub fn from_preamble(e: EnergyPair) -> Self {
        NoCoMCState {
            prev: DiffSign::of(e.diff()),
        }
    }

    pub fn with_sign(prev: DiffSign) -> Self {
        NoCoMCState { prev }
    }

    pub fn prev_sign(&self) -> DiffSign {
        self.prev
    }

    /// Returns 1 iff the product of the previous and current differences is
    /// strictly negative, and the state carrying the current sign.
    ///
    /// Regions: previous `<= 0` and current `> 0` is 1, previous `> 0` and
    /// current `<= 0` is 1, the two same-sign regions are 0. A product of
    /// exactly zero decides 0.
    #[inline]
    pub fn detect(self, e: EnergyPair) -> (u8, NoCoMCState) {
        let cur = DiffSign::of(e.diff());
        let bit = matches!(
            (self.prev, cur),
            (DiffSign::Negative, DiffSign::Positive) | (DiffSign::Positive, DiffSign::Negative)
        );
        (u8::from(bit), NoCoMCState { prev: cur })
    }
}

/// Decodes a differential Manchester frame: `pairs[0]` is the preamble.
pub fn nocomc_decode(pairs: &[EnergyPair]) -> Result<Vec<u8>> {
    let (first, rest) = pairs
        .split_first()
        .ok_or_else(|| Error::Framing("missing preamble symbol".into()))?;
    let mut state = NoCoMCState::from_preamble(*first);
    Ok(rest
        .iter()
        .map(|&e| {
            let (bit, next) = state.detect(e);
            state = next;
            bit
        })
        .collect())
}

/// Threshold detector on full-symbol energies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineState {
    threshold: f64,
    mu0_hat: f64,
    mu1_hat: f64,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

impl BaselineState {
    /// Midpoint of the labeled pilot means.
    pub fn train(symbol_energies_h0: &[f64], symbol_energies_h1: &[f64]) -> Result<Self> {
        let (mu0_hat, mu1_hat) = pilot_means(symbol_energies_h0, symbol_energies_h1)?;
        Ok(BaselineState {
            threshold: 0.5 * (mu0_hat + mu1_hat),
            mu0_hat,
            mu1_hat,
        })
    }

    /// Threshold estimated from the block's own data under the assumption
    /// that 0 and 1 are equally likely.
    ///
    /// With equiprobable bits the mean of the received symbol energies is the
    /// midpoint of the two hypothesis means, so the data mean is used as the
    /// threshold. The labeled pilots only fix the orientation and the
    /// hypothesis means; the threshold is clamped between those means. When
    /// the real bit prior is not 1/2 the data mean drifts toward the dominant
    /// hypothesis, which is the prior mismatch this detector suffers from.
    pub fn train_equal_prior(
        symbol_energies_h0: &[f64],
        symbol_energies_h1: &[f64],
        data_energies: &[f64],
    ) -> Result<Self> {
        let (mu0_hat, mu1_hat) = pilot_means(symbol_energies_h0, symbol_energies_h1)?;
        if data_energies.is_empty() {
            return Err(Error::Training("no data energies to estimate a threshold".into()));
        }
        let lo = mu0_hat.min(mu1_hat);
        let hi = mu0_hat.max(mu1_hat);
        Ok(BaselineState {
            threshold: mean(data_energies).clamp(lo, hi),
            mu0_hat,
            mu1_hat,
        })
    }

    /// State with known means, e.g. the exact hypothesis means.
    pub fn from_means(mu0: f64, mu1: f64) -> Result<Self> {
        if !(mu0 >= 0.0 && mu1 >= 0.0) {
            return Err(param("mu", "hypothesis means must be >= 0"));
        }
        Ok(BaselineState {
            threshold: 0.5 * (mu0 + mu1),
            mu0_hat: mu0,
            mu1_hat: mu1,
        })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn mu0_hat(&self) -> f64 {
        self.mu0_hat
    }

    pub fn mu1_hat(&self) -> f64 {
        self.mu1_hat
    }

    /// Declares the hypothesis whose mean lies on the observed side of the
    /// threshold. Energies equal to the threshold decide 0.
    #[inline]
    pub fn detect(&self, symbol_energy: f64) -> u8 {
        let one = if self.mu1_hat >= self.mu0_hat {
            symbol_energy > self.threshold
        } else {
            symbol_energy < self.threshold
        };
        u8::from(one)
    }
}

fn pilot_means(h0: &[f64], h1: &[f64]) -> Result<(f64, f64)> {
    if h0.is_empty() || h1.is_empty() {
        return Err(Error::Training(
            "baseline needs at least one pilot energy per hypothesis".into(),
        ));
    }
    let (mu0, mu1) = (mean(h0), mean(h1));
    if !(mu0 >= 0.0 && mu1 >= 0.0) {
        return Err(Error::Training("pilot energies must be >= 0".into()));
    }
    Ok((mu0, mu1))
}
