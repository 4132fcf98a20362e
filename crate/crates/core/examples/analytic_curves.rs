// Closed-form BER against SNR at RCD 0.5, N = 20.

use backscatter_sim::analysis::{self, VarPair};
use backscatter_sim::cli::db_to_linear;
use backscatter_sim::signal_model::{synthesize_channel_with_rcd, RcdBranch};
use std::error::Error;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let ch = synthesize_channel_with_rcd(0.5, RcdBranch::H1Stronger)?;
    let (h0, h1) = (ch.h0_sq(), ch.h1_sq());
    let n = 20;
    println!(
        "{:>5} {:>11} {:>11} {:>11} {:>11} {:>11} {:>11}",
        "dB", "exact", "approx", "floor", "8psk", "nocomc", "baseline"
    );
    for db in (0..=30).step_by(5) {
        let g = db_to_linear(db as f64);
        let exact = analysis::ber_secomc_gaussian_exact(VarPair::new(h0 * g + 1.0, h1 * g + 1.0)?, n)?;
        println!(
            "{db:>5} {exact:>11.4e} {:>11.4e} {:>11.4e} {:>11.4e} {:>11.4e} {:>11.4e}",
            analysis::ber_secomc_gaussian_approx(h0, h1, g, n),
            analysis::ber_secomc_gaussian_floor(h0, h1, n),
            analysis::ber_secomc_deterministic_approx(h0, h1, g, n),
            analysis::ber_nocomc_from_secomc(exact),
            analysis::ber_baseline_gaussian_approx(h0, h1, g, n),
        );
    }
    // log-space value where the linear one underflows
    let t = analysis::secomc_deterministic_highsnr_tail(h0, h1, db_to_linear(60.0), n);
    println!("8-PSK at 60 dB: ln BER = {:.1} (linear {:e})", t.ln(), t.value());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
