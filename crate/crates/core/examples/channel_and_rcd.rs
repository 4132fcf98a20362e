// Channel draws, effective channels and the relative channel difference.

use backscatter_sim::signal_model::{
    draw_channel, synthesize_channel_with_rcd, ChannelDraw, RcdBranch,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::error::Error;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    println!("{:>8} {:>8} {:>8}", "|h0|^2", "|h1|^2", "RCD");
    for _ in 0..5 {
        let ch = draw_channel(&mut rng, &ChannelDraw::RayleighDefault)?;
        println!("{:>8.3} {:>8.3} {:>8.3}", ch.h0_sq(), ch.h1_sq(), ch.rcd()?);
    }

    for branch in [RcdBranch::H1Stronger, RcdBranch::H0Stronger] {
        let ch = synthesize_channel_with_rcd(0.5, branch)?;
        println!(
            "{branch:?}: |h0|^2 = {:.4}, |h1|^2 = {:.4}, RCD = {:.4}",
            ch.h0_sq(),
            ch.h1_sq(),
            ch.rcd()?
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
