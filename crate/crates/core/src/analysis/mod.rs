//! Closed-form and large-`N` BER of the Manchester detectors.
//!
//! Everything here depends on the channels only through `|h0|^2` and
//! `|h1|^2`, and takes the SNR `gamma = Ps / Nw` in linear units.
//!
//! The exact Gaussian-source SeCoMC BER is the probability that one scaled
//! `chi^2_{2N}` energy exceeds another, which is the regularized incomplete
//! beta `I_{s_n/(s_n+s_m)}(N, N)`. That is the production route; the
//! equivalent Gamma-ratio times `2F1` expression overflows naive evaluation
//! near `N = 85` and only exists as a test oracle (see
//! [`crate::selftest::oracles`]).
//!
//! All large-`N` forms are `(1/2) erfc(x)` for some argument `x`; the
//! `*_tail` functions return that argument wrapped in [`HalfErfc`] so callers
//! can work in log space when the linear value underflows.

pub mod special;

use crate::error::{param, Result};
use crate::signal_model::ChannelState;
use std::f64::consts::{LN_2, SQRT_2};

pub use special::{erf, erfc, ln_erfc, ln_gamma, reg_inc_beta};

/// Hypothesis variances `sigma_i^2 = |h_i|^2 Ps + Nw`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarPair {
    pub sigma0_sq: f64,
    pub sigma1_sq: f64,
}

impl VarPair {
    pub fn new(sigma0_sq: f64, sigma1_sq: f64) -> Result<Self> {
        if !(sigma0_sq > 0.0 && sigma0_sq.is_finite()) {
            return Err(param("sigma0_sq", format!("must be positive, got {sigma0_sq}")));
        }
        if !(sigma1_sq > 0.0 && sigma1_sq.is_finite()) {
            return Err(param("sigma1_sq", format!("must be positive, got {sigma1_sq}")));
        }
        Ok(VarPair {
            sigma0_sq,
            sigma1_sq,
        })
    }

    pub fn from_powers(p: ChannelPowers, ps: f64, nw: f64) -> Result<Self> {
        Self::new(p.h0_sq * ps + nw, p.h1_sq * ps + nw)
    }

    pub fn from_channel(ch: &ChannelState, ps: f64, nw: f64) -> Result<Self> {
        Self::from_powers(ChannelPowers::from(ch), ps, nw)
    }

    pub fn sigma_n_sq(&self) -> f64 {
        self.sigma0_sq.min(self.sigma1_sq)
    }

    pub fn sigma_m_sq(&self) -> f64 {
        self.sigma0_sq.max(self.sigma1_sq)
    }
}

/// Squared effective channel magnitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelPowers {
    pub h0_sq: f64,
    pub h1_sq: f64,
}

impl ChannelPowers {
    pub fn new(h0_sq: f64, h1_sq: f64) -> Self {
        ChannelPowers { h0_sq, h1_sq }
    }

    pub fn swapped(self) -> Self {
        ChannelPowers {
            h0_sq: self.h1_sq,
            h1_sq: self.h0_sq,
        }
    }

    fn gap(&self) -> f64 {
        (self.h1_sq - self.h0_sq).abs()
    }
}

impl From<&ChannelState> for ChannelPowers {
    fn from(ch: &ChannelState) -> Self {
        ChannelPowers::new(ch.h0_sq(), ch.h1_sq())
    }
}

/// Mean and variance of a half energy under each hypothesis for a complex
/// Gaussian source: `mu = N sigma^2`, `var = N sigma^4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianMoments {
    pub mu_g0: f64,
    pub mu_g1: f64,
    pub var_g0: f64,
    pub var_g1: f64,
}

impl GaussianMoments {
    pub fn new(v: VarPair, n: usize) -> Self {
        let n = n as f64;
        GaussianMoments {
            mu_g0: n * v.sigma0_sq,
            mu_g1: n * v.sigma1_sq,
            var_g0: n * v.sigma0_sq * v.sigma0_sq,
            var_g1: n * v.sigma1_sq * v.sigma1_sq,
        }
    }

    pub fn ber(&self) -> f64 {
        clt_ber(self.mu_g0, self.var_g0, self.mu_g1, self.var_g1)
    }
}

/// Half-energy moments for a constant-modulus source, from the noncentral
/// chi-square: `mu = N (|h|^2 Ps + Nw)`, `var = N (2 |h|^2 Ps Nw + Nw^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeterministicMoments {
    pub mu_p0: f64,
    pub mu_p1: f64,
    pub var_p0: f64,
    pub var_p1: f64,
}

impl DeterministicMoments {
    pub fn new(p: ChannelPowers, ps: f64, nw: f64, n: usize) -> Self {
        let n = n as f64;
        let mu = |h: f64| n * (h * ps + nw);
        let var = |h: f64| n * (2.0 * h * ps * nw + nw * nw);
        DeterministicMoments {
            mu_p0: mu(p.h0_sq),
            mu_p1: mu(p.h1_sq),
            var_p0: var(p.h0_sq),
            var_p1: var(p.h1_sq),
        }
    }

    pub fn ber(&self) -> f64 {
        clt_ber(self.mu_p0, self.var_p0, self.mu_p1, self.var_p1)
    }
}

/// `P(X0 - X1 < 0)`-type error for two independent normal energies:
/// `(1/2) erfc(|mu1 - mu0| / sqrt(2 (var0 + var1)))`.
pub fn clt_ber(mu0: f64, var0: f64, mu1: f64, var1: f64) -> f64 {
    HalfErfc::new((mu1 - mu0).abs() / (2.0 * (var0 + var1)).sqrt()).value()
}

/// The quantity `(1/2) erfc(arg)`, kept symbolic for log-space evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfErfc {
    arg: f64,
}

impl HalfErfc {
    pub fn new(arg: f64) -> Self {
        HalfErfc { arg }
    }

    pub fn arg(&self) -> f64 {
        self.arg
    }

    /// Linear value; 0 once it underflows.
    pub fn value(&self) -> f64 {
        0.5 * erfc(self.arg)
    }

    pub fn ln(&self) -> f64 {
        ln_erfc(self.arg) - LN_2
    }

    /// True when [`HalfErfc::value`] has lost the result to underflow.
    pub fn underflows(&self) -> bool {
        self.value() < f64::MIN_POSITIVE
    }

    /// `2p(1 - p)` of this value, the matching NoCoMC BER.
    pub fn nocomc_value(&self) -> f64 {
        ber_nocomc_from_secomc(self.value())
    }

    /// `ln(2p(1 - p))`.
    pub fn nocomc_ln(&self) -> f64 {
        let ln_p = self.ln();
        LN_2 + ln_p + (-ln_p.exp()).ln_1p()
    }

    /// The `1/2 - erf^2(arg)/2` form of the NoCoMC BER.
    pub fn nocomc_erf_form(&self) -> f64 {
        let e = erf(self.arg);
        0.5 - 0.5 * e * e
    }
}

/// Exact SeCoMC BER with a complex Gaussian source and a known variance
/// ordering: `I_{s_n/(s_n+s_m)}(N, N)`.
pub fn ber_secomc_gaussian_exact(v: VarPair, n: usize) -> Result<f64> {
    if n < 1 {
        return Err(param("N", "must be >= 1"));
    }
    let (sn, sm) = (v.sigma_n_sq(), v.sigma_m_sq());
    if sn == sm {
        // I_{1/2}(N, N) = 1/2 by symmetry; skip the rounding of the fraction
        return Ok(0.5);
    }
    let n = n as f64;
    reg_inc_beta(sn / (sn + sm), n, n)
}

/// Exact NoCoMC BER with a complex Gaussian source.
pub fn ber_nocomc_gaussian_exact(v: VarPair, n: usize) -> Result<f64> {
    ber_secomc_gaussian_exact(v, n).map(ber_nocomc_from_secomc)
}

pub fn secomc_gaussian_approx_tail(h0_sq: f64, h1_sq: f64, gamma: f64, n: usize) -> HalfErfc {
    let p = ChannelPowers::new(h0_sq, h1_sq);
    let inv = 1.0 / gamma;
    let den = SQRT_2 * (h0_sq + inv).hypot(h1_sq + inv);
    HalfErfc::new((n as f64).sqrt() * p.gap() / den)
}

/// Large-`N` SeCoMC BER, complex Gaussian source.
pub fn ber_secomc_gaussian_approx(h0_sq: f64, h1_sq: f64, gamma: f64, n: usize) -> f64 {
    secomc_gaussian_approx_tail(h0_sq, h1_sq, gamma, n).value()
}

pub fn secomc_gaussian_floor_tail(h0_sq: f64, h1_sq: f64, n: usize) -> HalfErfc {
    let p = ChannelPowers::new(h0_sq, h1_sq);
    HalfErfc::new((n as f64).sqrt() * p.gap() / (SQRT_2 * h0_sq.hypot(h1_sq)))
}

/// High-SNR limit of [`ber_secomc_gaussian_approx`]: `(1/2) erfc(sqrt(N/2) RCD)`.
pub fn ber_secomc_gaussian_floor(h0_sq: f64, h1_sq: f64, n: usize) -> f64 {
    secomc_gaussian_floor_tail(h0_sq, h1_sq, n).value()
}

pub fn baseline_gaussian_approx_tail(h0_sq: f64, h1_sq: f64, gamma: f64, n: usize) -> HalfErfc {
    let p = ChannelPowers::new(h0_sq, h1_sq);
    HalfErfc::new((n as f64).sqrt() * p.gap() / (h0_sq + h1_sq + 2.0 / gamma))
}

/// Large-`N` BER of the threshold detector with a perfect threshold and
/// `2N` samples per bit.
pub fn ber_baseline_gaussian_approx(h0_sq: f64, h1_sq: f64, gamma: f64, n: usize) -> f64 {
    baseline_gaussian_approx_tail(h0_sq, h1_sq, gamma, n).value()
}

pub fn secomc_deterministic_approx_tail(h0_sq: f64, h1_sq: f64, gamma: f64, n: usize) -> HalfErfc {
    let p = ChannelPowers::new(h0_sq, h1_sq);
    let den = 2.0 * ((h0_sq + h1_sq) / gamma + 1.0 / (gamma * gamma)).sqrt();
    HalfErfc::new((n as f64).sqrt() * p.gap() / den)
}

/// Large-`N` SeCoMC BER, constant-modulus source. No error floor.
pub fn ber_secomc_deterministic_approx(h0_sq: f64, h1_sq: f64, gamma: f64, n: usize) -> f64 {
    secomc_deterministic_approx_tail(h0_sq, h1_sq, gamma, n).value()
}

pub fn secomc_deterministic_highsnr_tail(
    h0_sq: f64,
    h1_sq: f64,
    gamma: f64,
    n: usize,
) -> HalfErfc {
    let p = ChannelPowers::new(h0_sq, h1_sq);
    HalfErfc::new((n as f64 * gamma).sqrt() * p.gap() / (2.0 * (h0_sq + h1_sq).sqrt()))
}

/// High-SNR asymptote of [`ber_secomc_deterministic_approx`].
pub fn ber_secomc_deterministic_highsnr(h0_sq: f64, h1_sq: f64, gamma: f64, n: usize) -> f64 {
    secomc_deterministic_highsnr_tail(h0_sq, h1_sq, gamma, n).value()
}

/// NoCoMC BER from the per-symbol SeCoMC error `p`: an error needs exactly
/// one of two adjacent difference signs to be wrong, so `2p(1 - p)`.
pub fn ber_nocomc_from_secomc(p: f64) -> f64 {
    2.0 * p * (1.0 - p)
}

pub fn ber_nocomc_gaussian_approx(h0_sq: f64, h1_sq: f64, gamma: f64, n: usize) -> f64 {
    secomc_gaussian_approx_tail(h0_sq, h1_sq, gamma, n).nocomc_value()
}

pub fn ber_nocomc_gaussian_floor(h0_sq: f64, h1_sq: f64, n: usize) -> f64 {
    secomc_gaussian_floor_tail(h0_sq, h1_sq, n).nocomc_value()
}

pub fn ber_nocomc_deterministic_approx(h0_sq: f64, h1_sq: f64, gamma: f64, n: usize) -> f64 {
    secomc_deterministic_approx_tail(h0_sq, h1_sq, gamma, n).nocomc_value()
}

pub fn ber_nocomc_deterministic_highsnr(h0_sq: f64, h1_sq: f64, gamma: f64, n: usize) -> f64 {
    secomc_deterministic_highsnr_tail(h0_sq, h1_sq, gamma, n).nocomc_value()
}
