// Sample-level SeCoMC link: train on two '1' symbols, then detect.

use backscatter_sim::coding::{manchester_encode, ChipPair};
use backscatter_sim::detectors::{half_energies, EnergyPair, SeCoMCState};
use backscatter_sim::signal_model::{
    receive_chip, synthesize_channel_with_rcd, AmbientSource, ChannelState, NoiseModel, RcdBranch,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::error::Error;

const N: usize = 20;

fn symbol(
    pair: [u8; 2],
    ch: &ChannelState,
    src: &AmbientSource,
    noise: &NoiseModel,
    rng: &mut ChaCha8Rng,
) -> Result<EnergyPair, Box<dyn Error>> {
    let mut y = receive_chip(pair[0], ch, src, noise, N, rng)?;
    y.extend(receive_chip(pair[1], ch, src, noise, N, rng)?);
    Ok(half_energies(&y)?)
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let ch = synthesize_channel_with_rcd(0.5, RcdBranch::H1Stronger)?;
    let gamma = 10f64.powf(1.0);
    let src = AmbientSource::complex_gaussian(gamma)?;
    let noise = NoiseModel::new(1.0)?;

    let training = (0..2)
        .map(|_| symbol(ChipPair::ZeroOne.chips(), &ch, &src, &noise, &mut rng))
        .collect::<Result<Vec<_>, _>>()?;
    let state = SeCoMCState::train(&training, N)?;
    println!("trained relation: {:?} {:?}", state.relation(), state.training());

    let bits: Vec<u8> = (0..20_000).map(|_| u8::from(rng.random_bool(0.5))).collect();
    let chips = manchester_encode(&bits);
    let mut errors = 0;
    for (pair, &bit) in chips.chips().chunks_exact(2).zip(&bits) {
        let e = symbol([pair[0], pair[1]], &ch, &src, &noise, &mut rng)?;
        errors += usize::from(state.detect(e) != bit);
    }
    println!("SeCoMC: {errors} errors in {} bits", bits.len());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
