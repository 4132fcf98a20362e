// Monte Carlo SNR sweep with analytic columns, printed as CSV.

use backscatter_sim::cli::output::csv;
use backscatter_sim::montecarlo::{sweep, ChannelMode, ExperimentConfig, SweepAxis};
use backscatter_sim::signal_model::RcdBranch;
use std::error::Error;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let cfg = ExperimentConfig {
        channel_mode: ChannelMode::FixedRcd {
            rcd: 0.5,
            branch: RcdBranch::H1Stronger,
        },
        seed: 42,
        ..ExperimentConfig::default()
    }
    .with_bits(30_000);
    let table = sweep(&cfg, SweepAxis::GammaDb, &[0.0, 10.0, 20.0, 30.0])?;
    print!("{}", csv(&table));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
