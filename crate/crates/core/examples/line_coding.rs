// Manchester and differential Manchester encode/decode.

use backscatter_sim::coding::{
    diff_manchester_decode, diff_manchester_encode, manchester_decode, manchester_encode,
    ChipPair,
};
use std::error::Error;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let bits = [0u8, 1, 1, 0, 1];

    let m = manchester_encode(&bits);
    println!("bits        {bits:?}");
    println!("manchester  {:?}", m.chips());
    assert_eq!(manchester_decode(m.chips())?, bits);

    for reference in [ChipPair::OneZero, ChipPair::ZeroOne] {
        let d = diff_manchester_encode(&bits, reference);
        println!("diff {reference:?}  {:?}", d.chips());
        assert_eq!(diff_manchester_decode(d.chips())?, bits);
    }

    // invalid pairs are rejected with their position
    match manchester_decode(&[1, 0, 1, 1]) {
        Err(e) => println!("rejected: {e}"),
        Ok(b) => return Err(format!("accepted {b:?}").into()),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
