//! Fast built-in consistency checks, run by `backscatter-sim selftest`.
//!
//! The special-function kernel is injectable so a deliberately broken erfc
//! can be shown to trip the report.

use crate::analysis::{self, HalfErfc, VarPair};
use crate::coding::{
    diff_manchester_decode, diff_manchester_encode, manchester_decode, manchester_encode,
    ChipPair,
};
use crate::montecarlo::{estimate_ber, ChannelMode, DetectorKind, ExperimentConfig};
use crate::signal_model::{LinkParams, RcdBranch, SourceKind};
use std::fmt;

/// Independent evaluations used as oracles by the checks and the test suite.
pub mod oracles {
    /// Direct Gauss series `sum (a)_k (b)_k / ((c)_k k!) z^k`, summed until
    /// the terms stop mattering. Only sensible well inside `|z| < 1`.
    pub fn hyp2f1_series(a: f64, b: f64, c: f64, z: f64, max_terms: usize) -> f64 {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 0..max_terms {
            let k = k as f64;
            term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        sum
    }

    /// `Gamma(2N) / Gamma(N)^2` by exact factorial products.
    fn central_gamma_ratio(n: u32) -> f64 {
        let mut r = 1.0;
        for k in 1..n {
            // (2N-1)! / ((N-1)!)^2 = prod_{k=1}^{N-1} (N-1+k)/k * (2N-1)
            r *= (n - 1 + k) as f64 / k as f64;
        }
        r * (2 * n - 1) as f64
    }

    /// SeCoMC BER as a Gamma ratio times a Gauss hypergeometric function:
    /// `r^N Gamma(2N) / (N Gamma(N)^2) 2F1(N, 2N; N+1; -r)` with
    /// `r = sigma_n^2 / sigma_m^2`.
    ///
    /// The series in `-r` does not converge at `r = 1`, so the `2F1` is
    /// evaluated after the Pfaff transformation
    /// `2F1(N, 2N; N+1; -r) = (1+r)^{-2N} 2F1(1, 2N; N+1; r/(1+r))`,
    /// whose terms are all positive.
    pub fn gamma_hypergeometric_form(sigma_n_sq: f64, sigma_m_sq: f64, n: u32) -> f64 {
        assert!(n >= 1 && sigma_n_sq > 0.0 && sigma_m_sq > 0.0);
        let r = (sigma_n_sq / sigma_m_sq).min(sigma_m_sq / sigma_n_sq);
        let w = r / (1.0 + r);
        let nf = n as f64;
        let f = (1.0 + r).powf(-2.0 * nf) * hyp2f1_series(1.0, 2.0 * nf, nf + 1.0, w, 100_000);
        r.powf(nf) * central_gamma_ratio(n) / nf * f
    }
}

/// Special-function kernels the checks run against.
#[derive(Clone, Copy)]
pub struct Kernels {
    pub erfc: fn(f64) -> f64,
}

impl Default for Kernels {
    fn default() -> Self {
        Kernels {
            erfc: analysis::erfc,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SelftestReport {
    pub checks: Vec<CheckResult>,
}

impl SelftestReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// 0 when everything passed, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.all_passed() {
            0
        } else {
            3
        }
    }
}

impl fmt::Display for SelftestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            writeln!(f, "{tag}  {}  ({})", c.name, c.detail)?;
        }
        let n_fail = self.failed().count();
        write!(f, "{} checks, {} failed", self.checks.len(), n_fail)
    }
}

fn check(name: &'static str, worst: f64, tol: f64) -> CheckResult {
    CheckResult {
        name,
        passed: worst <= tol,
        detail: format!("worst deviation {worst:.3e}, tolerance {tol:.0e}"),
    }
}

fn erfc_reference(k: &Kernels) -> CheckResult {
    let refs = [
        (0.5, 0.479_500_122_186_953_46),
        (1.0, 0.157_299_207_050_285_13),
        (2.0, 0.004_677_734_981_047_265_8),
        (3.0, 2.209_049_699_858_544_1e-5),
        (5.0, 1.537_459_794_428_034_9e-12),
        (10.0, 2.088_487_583_762_544_8e-45),
    ];
    let worst = refs
        .iter()
        .map(|&(x, v)| ((k.erfc)(x) - v).abs() / v)
        .fold(0.0, f64::max);
    check("erfc reference values", worst, 1e-12)
}

fn erfc_reflection(k: &Kernels) -> CheckResult {
    let worst = (0..=80)
        .map(|i| {
            let x = i as f64 * 0.05;
            ((k.erfc)(x) + (k.erfc)(-x) - 2.0).abs()
        })
        .fold(0.0, f64::max);
    check("erfc reflection erfc(x) + erfc(-x) = 2", worst, 1e-14)
}

fn hypergeometric_vs_beta() -> CheckResult {
    let mut worst: f64 = 0.0;
    for n in 1..=10u32 {
        for ratio in [1.0, 1.5, 2.0, 4.0] {
            let v = VarPair::new(1.0, ratio).expect("positive variances");
            let beta = analysis::ber_secomc_gaussian_exact(v, n as usize).unwrap_or(f64::NAN);
            let hyp = oracles::gamma_hypergeometric_form(1.0, ratio, n);
            worst = worst.max((beta - hyp).abs());
        }
    }
    check("hypergeometric-vs-beta identity (hypergeometric form = I_x(N,N))", worst, 1e-8)
}

fn exact_small_cases() -> CheckResult {
    let v = VarPair::new(1.0, 2.0).expect("positive variances");
    let e1 = (analysis::ber_secomc_gaussian_exact(v, 1).unwrap_or(f64::NAN) - 1.0 / 3.0).abs();
    let eq = VarPair::new(3.0, 3.0).expect("positive variances");
    let e2 = (analysis::ber_secomc_gaussian_exact(eq, 20).unwrap_or(f64::NAN) - 0.5).abs();
    check("exact BER: N=1 gives 1/3, equal variances give 1/2", e1.max(e2), 1e-14)
}

/// Large-`N` formulas rebuilt from hypothesis moments with the given kernel.
fn clt_forms(k: &Kernels) -> CheckResult {
    let mut worst: f64 = 0.0;
    for &(h0, h1, gamma, n) in &[
        (1.0f64, 2.215_250_437_021_530_2f64, 3.162_277_660_168_379_5f64, 20usize),
        (0.3, 1.7, 10.0, 50),
        (2.0, 0.5, 100.0, 7),
    ] {
        let nf = n as f64;
        let (s0, s1) = (h0 * gamma + 1.0, h1 * gamma + 1.0);
        let g = 0.5 * (k.erfc)(nf * (s1 - s0).abs() / (2.0 * nf * (s0 * s0 + s1 * s1)).sqrt());
        let a = analysis::ber_secomc_gaussian_approx(h0, h1, gamma, n);
        let (v0, v1) = (nf * (2.0 * h0 * gamma + 1.0), nf * (2.0 * h1 * gamma + 1.0));
        let d = 0.5 * (k.erfc)(nf * (s1 - s0).abs() / (2.0 * (v0 + v1)).sqrt());
        let b = analysis::ber_secomc_deterministic_approx(h0, h1, gamma, n);
        worst = worst.max((g - a).abs() / a).max((d - b).abs() / b);
    }
    check("large-N forms equal moment-matched Gaussian tails", worst, 1e-12)
}

fn nocomc_composition(k: &Kernels) -> CheckResult {
    let mut worst: f64 = 0.0;
    for i in 1..40 {
        let x = i as f64 * 0.1;
        let p = 0.5 * (k.erfc)(x);
        let erf = 1.0 - (k.erfc)(x);
        worst = worst.max((2.0 * p * (1.0 - p) - (0.5 - 0.5 * erf * erf)).abs());
        worst = worst.max((HalfErfc::new(x).nocomc_value() - 2.0 * p * (1.0 - p)).abs());
    }
    check("NoCoMC 2p(1-p) = (1 - erf^2)/2", worst, 1e-12)
}

fn coding_round_trips() -> CheckResult {
    let mut failures = 0usize;
    for len in 0..=10usize {
        for word in 0u32..(1 << len) {
            let bits: Vec<u8> = (0..len).map(|i| ((word >> i) & 1) as u8).collect();
            if manchester_decode(manchester_encode(&bits).chips()).ok() != Some(bits.clone()) {
                failures += 1;
            }
            for r in [ChipPair::OneZero, ChipPair::ZeroOne] {
                let seq = diff_manchester_encode(&bits, r);
                if diff_manchester_decode(seq.chips()).ok() != Some(bits.clone()) {
                    failures += 1;
                }
            }
        }
    }
    CheckResult {
        name: "coding round-trips, all payloads up to 10 bits",
        passed: failures == 0,
        detail: format!("{failures} mismatches"),
    }
}

fn genie_simulation_vs_exact() -> CheckResult {
    let cfg = ExperimentConfig {
        link: LinkParams {
            samples_per_half: 20,
            gamma: 10f64.powf(0.5),
            ..LinkParams::default()
        },
        channel_mode: ChannelMode::FixedRcd {
            rcd: 0.5,
            branch: RcdBranch::H1Stronger,
        },
        detectors: vec![DetectorKind::SecomcGenie],
        seed: 0x5e1f,
        ..ExperimentConfig::default()
    }
    .with_bits(100_000);
    let result = estimate_ber(&cfg).and_then(|r| {
        let exact = crate::montecarlo::analytic_ber(&cfg, DetectorKind::SecomcGenie)?.exact;
        Ok((r.get(DetectorKind::SecomcGenie).copied(), exact))
    });
    match result {
        Ok((Some(est), Some(exact))) => {
            let dev = (est.ber - exact).abs();
            let tol = 3.0 * est.half_width_at(exact);
            CheckResult {
                name: "genie SeCoMC simulation matches exact BER",
                passed: dev <= tol,
                detail: format!("sim {:.4e}, exact {exact:.4e}, |diff| {dev:.2e} vs {tol:.2e}", est.ber),
            }
        }
        other => CheckResult {
            name: "genie SeCoMC simulation matches exact BER",
            passed: false,
            detail: format!("{other:?}"),
        },
    }
}

fn noiseless_link() -> CheckResult {
    let cfg = ExperimentConfig {
        link: LinkParams {
            gamma: 1e12,
            ..LinkParams::default()
        },
        source_kind: SourceKind::ConstantModulus { order: 8 },
        noise_power: 1e-12,
        channel_mode: ChannelMode::FixedRcd {
            rcd: 0.5,
            branch: RcdBranch::H1Stronger,
        },
        seed: 1,
        ..ExperimentConfig::default()
    }
    .with_bits(10_000);
    let errors = estimate_ber(&cfg)
        .map(|r| r.entries.iter().map(|(_, e)| e.errors).sum::<u64>())
        .map_err(|e| e.to_string());
    CheckResult {
        name: "noiseless constant-modulus link is error free",
        passed: errors == Ok(0),
        detail: format!("{errors:?} errors"),
    }
}

pub fn run_with(k: &Kernels) -> SelftestReport {
    SelftestReport {
        checks: vec![
            erfc_reference(k),
            erfc_reflection(k),
            hypergeometric_vs_beta(),
            exact_small_cases(),
            clt_forms(k),
            nocomc_composition(k),
            coding_round_trips(),
            genie_simulation_vs_exact(),
            noiseless_link(),
        ],
    }
}

pub fn run() -> SelftestReport {
    run_with(&Kernels::default())
}
