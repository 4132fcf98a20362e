// Unequal bit priors: the threshold baseline drifts, the Manchester
// detectors do not.

use backscatter_sim::montecarlo::{
    sweep, ChannelMode, DetectorKind, ExperimentConfig, SweepAxis,
};
use backscatter_sim::signal_model::{LinkParams, RcdBranch};
use std::error::Error;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let cfg = ExperimentConfig {
        link: LinkParams {
            gamma: 10f64.powf(1.5),
            ..LinkParams::default()
        },
        channel_mode: ChannelMode::FixedRcd {
            rcd: 0.5,
            branch: RcdBranch::H1Stronger,
        },
        detectors: vec![DetectorKind::Secomc, DetectorKind::Nocomc, DetectorKind::Baseline],
        seed: 3,
        ..ExperimentConfig::default()
    }
    .with_bits(60_000);
    let table = sweep(&cfg, SweepAxis::Prior, &[0.1, 0.2, 0.5, 0.8])?;
    println!("{:>6} {:>10} {:>12} {:>10}", "prior", "detector", "BER", "+/-");
    for r in &table.rows {
        println!(
            "{:>6} {:>10} {:>12.4e} {:>10.1e}",
            r.axis_value,
            r.detector.name(),
            r.estimate.ber,
            r.estimate.half_width_95
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
