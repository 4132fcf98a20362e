//! Acceptance gate. Every test prints one `[PASS]` or `[FAIL]` line and then
//! asserts it, so `cargo test --test acceptance -- --nocapture` doubles as a
//! report.

use backscatter_sim::analysis::{self, VarPair};
use backscatter_sim::coding::{
    diff_manchester_decode, diff_manchester_encode, manchester_decode, manchester_encode,
    ChipPair,
};
use backscatter_sim::montecarlo::{
    combined_half_width, estimate_ber, BerEstimate, ChannelMode, DetectorKind,
    ExperimentConfig,
};
use backscatter_sim::selftest::oracles::gamma_hypergeometric_form;
use backscatter_sim::signal_model::{
    draw_channel, synthesize_channel_with_rcd, ChannelDraw, LinkParams, RcdBranch, SourceKind,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use std::time::Instant;

const BITS: u64 = 1_000_000;

fn verdict(id: u32, title: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("[{tag}] acceptance {id:>2}: {title} | {detail}");
    assert!(pass, "acceptance {id} failed: {title} | {detail}");
}

fn db(x: f64) -> f64 {
    backscatter_sim::cli::db_to_linear(x)
}

fn rcd_half() -> ChannelMode {
    ChannelMode::FixedRcd {
        rcd: 0.5,
        branch: RcdBranch::H1Stronger,
    }
}

fn config(n: usize, gamma_db: f64, detectors: &[DetectorKind], seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        link: LinkParams {
            samples_per_half: n,
            gamma: db(gamma_db),
            ..LinkParams::default()
        },
        channel_mode: rcd_half(),
        detectors: detectors.to_vec(),
        seed,
        ..ExperimentConfig::default()
    }
    .with_bits(BITS)
}

fn est(cfg: &ExperimentConfig, d: DetectorKind) -> BerEstimate {
    *estimate_ber(cfg).unwrap().get(d).unwrap()
}

#[test]
fn a01_exact_ber_matches_chi_square_draws() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xa01);
    let draws = 1_000_000u32;
    let mut worst_z: f64 = 0.0;
    let mut lines = Vec::new();
    for n in [1usize, 5, 20] {
        let g = Gamma::new(n as f64, 1.0).unwrap();
        for (sn, sm) in [(1.0, 2.0), (1.0, 4.0), (1.0, 1.1)] {
            let p = analysis::ber_secomc_gaussian_exact(VarPair::new(sn, sm).unwrap(), n).unwrap();
            // error: the half with the smaller variance carries more energy
            let errors = (0..draws)
                .filter(|_| sn * g.sample(&mut rng) > sm * g.sample(&mut rng))
                .count();
            let phat = errors as f64 / draws as f64;
            let se = (p * (1.0 - p) / draws as f64).sqrt();
            let z = (phat - p).abs() / se;
            worst_z = worst_z.max(z);
            lines.push(format!("N={n} ({sn},{sm}): {z:.2} SE"));
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    verdict(
        1,
        "exact Gaussian BER vs 1e6 chi-square pair draws, 9 cases within 3 SE, < 30 s",
        worst_z < 3.0 && secs < 30.0,
        &format!("worst {worst_z:.2} SE, {secs:.1} s; {}", lines.join(", ")),
    );
}

#[test]
fn a02_hypergeometric_identity() {
    let mut worst: f64 = 0.0;
    for n in 1..=10u32 {
        for ratio in [1.0, 1.5, 2.0, 4.0] {
            let beta =
                analysis::ber_secomc_gaussian_exact(VarPair::new(1.0, ratio).unwrap(), n as usize)
                    .unwrap();
            worst = worst.max((beta - gamma_hypergeometric_form(1.0, ratio, n)).abs());
        }
    }
    verdict(
        2,
        "incomplete-beta BER equals truncated Gamma-ratio x 2F1 series, N <= 10",
        worst <= 1e-8,
        &format!("max |diff| {worst:.2e} (tol 1e-8)"),
    );
}

#[test]
fn a03_large_n_approximations() {
    let ch = synthesize_channel_with_rcd(0.5, RcdBranch::H1Stronger).unwrap();
    let (h0, h1) = (ch.h0_sq(), ch.h1_sq());
    let n = 100;
    let mut gaussian_ok = true;
    let mut parts = Vec::new();
    for gdb in [0.0, 5.0, 10.0] {
        let g = db(gdb);
        let exact = analysis::ber_secomc_gaussian_exact(
            VarPair::new(h0 * g + 1.0, h1 * g + 1.0).unwrap(),
            n,
        )
        .unwrap();
        let approx = analysis::ber_secomc_gaussian_approx(h0, h1, g, n);
        let rel = (approx - exact) / exact;
        gaussian_ok &= rel.abs() < 0.10;
        parts.push(format!("gauss {gdb} dB: exact {exact:.3e} approx {approx:.3e} rel {:+.0}%", 100.0 * rel));
    }
    let mut det_ok = true;
    for gdb in [0.0, 5.0, 10.0] {
        let mut cfg = config(n, gdb, &[DetectorKind::SecomcGenie], 0xa03 + gdb as u64);
        cfg.source_kind = SourceKind::ConstantModulus { order: 8 };
        let e = est(&cfg, DetectorKind::SecomcGenie);
        let approx = analysis::ber_secomc_deterministic_approx(h0, h1, db(gdb), n);
        // with no observed errors the interval is taken at the reference value
        let hw = if e.errors == 0 { e.half_width_at(approx) } else { e.half_width_95 };
        let dev = (e.ber - approx).abs();
        det_ok &= dev <= 3.0 * hw;
        parts.push(format!(
            "8-PSK {gdb} dB: sim {:.3e} ({} err) approx {approx:.3e} dev {:.1} hw",
            e.ber,
            e.errors,
            dev / hw
        ));
    }
    println!("  gaussian part {}, deterministic part {}", ok(gaussian_ok), ok(det_ok));
    verdict(
        3,
        "N=100, RCD 0.5: Gaussian approx within 10% of exact; 8-PSK approx within 3 CI of simulation",
        gaussian_ok && det_ok,
        &parts.join("; "),
    );
}

fn ok(b: bool) -> &'static str {
    if b {
        "pass"
    } else {
        "fail"
    }
}

#[test]
fn a04_nocomc_composition() {
    let cfg = config(20, 5.0, &[DetectorKind::SecomcGenie, DetectorKind::Nocomc], 0xa04);
    let r = estimate_ber(&cfg).unwrap();
    let p = *r.get(DetectorKind::SecomcGenie).unwrap();
    let q = *r.get(DetectorKind::Nocomc).unwrap();
    let composed = 2.0 * p.ber * (1.0 - p.ber);
    let hw_composed = (2.0 - 4.0 * p.ber).abs() * p.half_width_95;
    let combined = q.half_width_95.hypot(hw_composed);
    let dev = (q.ber - composed).abs();
    verdict(
        4,
        "simulated NoCoMC = 2p(1-p) of simulated genie SeCoMC within 3 combined CI",
        dev <= 3.0 * combined,
        &format!(
            "p {:.5e}, nocomc {:.5e}, 2p(1-p) {composed:.5e}, dev {:.2} combined CI",
            p.ber,
            q.ber,
            dev / combined
        ),
    );
}

#[test]
fn a05_error_floor() {
    let ch = synthesize_channel_with_rcd(0.5, RcdBranch::H1Stronger).unwrap();
    let (h0, h1) = (ch.h0_sq(), ch.h1_sq());
    let n = 20;
    let dets = [DetectorKind::SecomcGenie, DetectorKind::Nocomc];
    let mut pass = true;
    let mut parts = Vec::new();
    let run = |gdb: f64, src: SourceKind, seed: u64| {
        let mut cfg = config(n, gdb, &dets, seed);
        cfg.source_kind = src;
        estimate_ber(&cfg).unwrap()
    };
    let g30 = run(30.0, SourceKind::ComplexGaussian, 0xa05);
    let g50 = run(50.0, SourceKind::ComplexGaussian, 0xa05 + 1);
    let exact_floor =
        analysis::ber_secomc_gaussian_exact(VarPair::new(h0, h1).unwrap(), n).unwrap();
    for d in dets {
        let floor = match d {
            DetectorKind::Nocomc => analysis::ber_nocomc_gaussian_floor(h0, h1, n),
            _ => analysis::ber_secomc_gaussian_floor(h0, h1, n),
        };
        let (a, b) = (g30.get(d).unwrap(), g50.get(d).unwrap());
        let flat = (a.ber - b.ber).abs() / b.ber < 0.05;
        let near30 = (a.ber - floor).abs() <= 3.0 * a.half_width_95;
        let near50 = (b.ber - floor).abs() <= 3.0 * b.half_width_95;
        pass &= flat && near30 && near50;
        parts.push(format!(
            "{} gauss: 30 dB {:.4e}, 50 dB {:.4e}, floor formula {floor:.4e} (flat {}, at floor {}/{})",
            d.name(),
            a.ber,
            b.ber,
            ok(flat),
            ok(near30),
            ok(near50)
        ));
    }
    let psk = SourceKind::ConstantModulus { order: 8 };
    let p30 = run(30.0, psk, 0xa05 + 2);
    let p50 = run(50.0, psk, 0xa05 + 3);
    for d in dets {
        let (a, b) = (p30.get(d).unwrap(), p50.get(d).unwrap());
        let lower = a.ber - b.ber > 5.0 * combined_half_width(a, b);
        pass &= lower;
        parts.push(format!(
            "{} 8-PSK: 30 dB {:.3e} ({} err), 50 dB {:.3e} ({} err), drop beyond 5 CI {}",
            d.name(),
            a.ber,
            a.errors,
            b.ber,
            b.errors,
            ok(lower)
        ));
    }
    parts.push(format!(
        "exact high-SNR limit of the genie BER is {exact_floor:.4e} (NoCoMC {:.4e})",
        analysis::ber_nocomc_from_secomc(exact_floor)
    ));
    verdict(
        5,
        "Gaussian BER flat at the floor formula between 30 and 50 dB; 8-PSK BER keeps falling",
        pass,
        &parts.join("; "),
    );
}

#[test]
fn a06_orderings_over_random_channels() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xa06);
    let channels: Vec<_> = (0..20)
        .map(|_| draw_channel(&mut rng, &ChannelDraw::RayleighDefault).unwrap())
        .collect();

    let mut analytic_ok = true;
    for ch in &channels {
        for n in [10, 20, 50, 100] {
            for gdb in [0.0, 5.0, 10.0, 15.0, 20.0, 30.0] {
                let g = db(gdb);
                let base = analysis::ber_baseline_gaussian_approx(ch.h0_sq(), ch.h1_sq(), g, n);
                let sec = analysis::ber_secomc_gaussian_approx(ch.h0_sq(), ch.h1_sq(), g, n);
                analytic_ok &= base <= sec;
            }
        }
    }

    let per_channel = BITS / channels.len() as u64;
    let sum = |src: SourceKind, dets: &[DetectorKind], d: DetectorKind, seed: u64| {
        let (mut e, mut t) = (0, 0);
        for (i, ch) in channels.iter().enumerate() {
            let cfg = ExperimentConfig {
                link: LinkParams {
                    samples_per_half: 20,
                    gamma: db(5.0),
                    training_len: 2,
                    ..LinkParams::default()
                },
                source_kind: src,
                channel_mode: ChannelMode::FixedChannels(*ch),
                detectors: dets.to_vec(),
                seed: seed + i as u64,
                ..ExperimentConfig::default()
            }
            .with_bits(per_channel);
            let r = est(&cfg, d);
            e += r.errors;
            t += r.trials;
        }
        BerEstimate::new(e, t).unwrap()
    };
    let both = [DetectorKind::Secomc, DetectorKind::Nocomc];
    let sec = sum(SourceKind::ComplexGaussian, &both, DetectorKind::Secomc, 0xa060);
    let noc = sum(SourceKind::ComplexGaussian, &both, DetectorKind::Nocomc, 0xa060);
    let psk = sum(
        SourceKind::ConstantModulus { order: 8 },
        &[DetectorKind::Secomc],
        DetectorKind::Secomc,
        0xa160,
    );
    let b_ok = noc.ber - sec.ber > combined_half_width(&sec, &noc);
    let c_ok = sec.ber - psk.ber > combined_half_width(&sec, &psk);
    verdict(
        6,
        "20 random channels: baseline approx <= SeCoMC approx; SeCoMC(T=2) < NoCoMC; 8-PSK < Gaussian",
        analytic_ok && b_ok && c_ok,
        &format!(
            "analytic {}, secomc {:.4e} vs nocomc {:.4e} ({}), 8-PSK {:.4e} vs gaussian {:.4e} ({})",
            ok(analytic_ok),
            sec.ber,
            noc.ber,
            ok(b_ok),
            psk.ber,
            sec.ber,
            ok(c_ok)
        ),
    );
}

#[test]
fn a07_training_length_plateau() {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [20usize, 50] {
        let run = |t: usize| {
            let mut cfg = config(n, 10.0, &[DetectorKind::Secomc], 0xa07 + n as u64);
            cfg.link.training_len = t;
            est(&cfg, DetectorKind::Secomc)
        };
        let (b2, b20) = (run(2), run(20));
        let rel = (b2.ber - b20.ber).abs() / b20.ber;
        pass &= rel < 0.10;
        parts.push(format!(
            "N={n}: T=2 {:.4e} ({} err), T=20 {:.4e} ({} err), rel {:.1}%",
            b2.ber,
            b2.errors,
            b20.ber,
            b20.errors,
            100.0 * rel
        ));
    }
    verdict(
        7,
        "gamma 10 dB, RCD 0.5: SeCoMC BER at T=2 within 10% of T=20",
        pass,
        &parts.join("; "),
    );
}

#[test]
fn a08_prior_robustness() {
    let dets = [DetectorKind::Secomc, DetectorKind::Nocomc, DetectorKind::Baseline];
    let reports: Vec<_> = [0.2, 0.5, 0.8]
        .iter()
        .map(|&prior| {
            let mut cfg = config(20, 15.0, &dets, 0xa08);
            cfg.link.prior_of_one = prior;
            (prior, estimate_ber(&cfg).unwrap())
        })
        .collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for d in [DetectorKind::Secomc, DetectorKind::Nocomc] {
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in i + 1..3 {
                let (a, b) = (reports[i].1.get(d).unwrap(), reports[j].1.get(d).unwrap());
                worst = worst.max((a.ber - b.ber).abs() / combined_half_width(a, b));
            }
        }
        pass &= worst <= 3.0;
        let bers: Vec<String> = reports
            .iter()
            .map(|(p, r)| format!("{p}: {:.4e}", r.get(d).unwrap().ber))
            .collect();
        parts.push(format!("{} [{}] worst {worst:.2} CI", d.name(), bers.join(", ")));
    }
    let b02 = reports[0].1.get(DetectorKind::Baseline).unwrap();
    let b05 = reports[1].1.get(DetectorKind::Baseline).unwrap();
    let gap = (b02.ber - b05.ber) / combined_half_width(b02, b05);
    pass &= gap > 3.0;
    parts.push(format!(
        "baseline prior 0.2 {:.4e} vs 0.5 {:.4e} (+{gap:.1} CI), 0.8 {:.4e}",
        b02.ber,
        b05.ber,
        reports[2].1.get(DetectorKind::Baseline).unwrap().ber
    ));
    verdict(
        8,
        "N=20, RCD 0.5, 15 dB: SeCoMC and NoCoMC insensitive to the bit prior; baseline degrades at 0.2",
        pass,
        &parts.join("; "),
    );
}

#[test]
fn a09_degenerate_links() {
    let mut cfg = config(20, 5.0, &DetectorKind::ALL, 0xa09);
    cfg.channel_mode = ChannelMode::FixedRcd {
        rcd: 0.0,
        branch: RcdBranch::H1Stronger,
    };
    let cfg = cfg.with_bits(100_000);
    let r = estimate_ber(&cfg).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for (d, e) in &r.entries {
        pass &= (0.48..=0.52).contains(&e.ber);
        parts.push(format!("{} {:.4}", d.name(), e.ber));
    }
    let noiseless = ExperimentConfig {
        link: LinkParams {
            gamma: 1e12,
            ..LinkParams::default()
        },
        source_kind: SourceKind::ConstantModulus { order: 8 },
        noise_power: 1e-12,
        channel_mode: rcd_half(),
        seed: 0xa19,
        ..ExperimentConfig::default()
    }
    .with_bits(10_000);
    let r = estimate_ber(&noiseless).unwrap();
    let errors: u64 = r.entries.iter().map(|(_, e)| e.errors).sum();
    pass &= errors == 0;
    parts.push(format!("noiseless 8-PSK errors {errors}"));
    verdict(
        9,
        "RCD 0 gives BER in [0.48, 0.52] for every detector; noiseless constant-modulus link is error free",
        pass,
        &parts.join(", "),
    );
}

#[test]
fn a10_coding_round_trips() {
    let t0 = Instant::now();
    let mut failures = 0u64;
    let mut cases = 0u64;
    for len in 0..=12usize {
        for word in 0u32..(1 << len) {
            let bits: Vec<u8> = (0..len).map(|i| ((word >> i) & 1) as u8).collect();
            cases += 1;
            failures += u64::from(manchester_decode(manchester_encode(&bits).chips()).unwrap() != bits);
            for r in [ChipPair::OneZero, ChipPair::ZeroOne] {
                let seq = diff_manchester_encode(&bits, r);
                failures += u64::from(diff_manchester_decode(seq.chips()).unwrap() != bits);
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    verdict(
        10,
        "exhaustive encode/decode identity, payloads up to 12 bits, both schemes and references, < 5 s",
        failures == 0 && secs < 5.0,
        &format!("{cases} payloads, {failures} failures, {secs:.2} s"),
    );
}
