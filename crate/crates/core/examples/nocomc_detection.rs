// Sample-level NoCoMC link: no training, decisions from adjacent symbols.

use backscatter_sim::coding::{diff_manchester_encode, ChipPair};
use backscatter_sim::detectors::{half_energies, NoCoMCState};
use backscatter_sim::signal_model::{
    receive_chip, synthesize_channel_with_rcd, AmbientSource, NoiseModel, RcdBranch,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::error::Error;

const N: usize = 20;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let ch = synthesize_channel_with_rcd(0.5, RcdBranch::H0Stronger)?;
    let src = AmbientSource::psk(8, 10.0)?;
    let noise = NoiseModel::new(1.0)?;

    let bits: Vec<u8> = (0..20_000).map(|_| u8::from(rng.random_bool(0.3))).collect();
    let seq = diff_manchester_encode(&bits, ChipPair::OneZero);
    let mut energies = Vec::with_capacity(bits.len() + 1);
    for pair in seq.chips().chunks_exact(2) {
        let mut y = receive_chip(pair[0], &ch, &src, &noise, N, &mut rng)?;
        y.extend(receive_chip(pair[1], &ch, &src, &noise, N, &mut rng)?);
        energies.push(half_energies(&y)?);
    }

    // streaming form: one state carried from symbol to symbol
    let mut state = NoCoMCState::from_preamble(energies[0]);
    let mut errors = 0;
    for (e, &bit) in energies[1..].iter().zip(&bits) {
        let (decided, next) = state.detect(*e);
        errors += usize::from(decided != bit);
        state = next;
    }
    println!("NoCoMC, 8-PSK source, prior 0.3: {errors} errors in {} bits", bits.len());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
