//! Manchester and differential Manchester line codes.
//!
//! Chips are tag states: 1 reflects the ambient signal, 0 does not. Every
//! original bit occupies two chips, and every emitted pair carries exactly one
//! level transition.

use crate::error::{Error, Result};

/// One coded symbol, written as (first half, second half).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ChipPair {
    /// `(1, 0)`: the Manchester image of bit 0.
    #[default]
    OneZero,
    /// `(0, 1)`: the Manchester image of bit 1.
    ZeroOne,
}

impl ChipPair {
    pub fn chips(self) -> [u8; 2] {
        match self {
            ChipPair::OneZero => [1, 0],
            ChipPair::ZeroOne => [0, 1],
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            ChipPair::OneZero => ChipPair::ZeroOne,
            ChipPair::ZeroOne => ChipPair::OneZero,
        }
    }

    /// Parses a raw pair; `index` is only used for the error message.
    pub fn from_chips(a: u8, b: u8, index: usize) -> Result<Self> {
        match (a, b) {
            (1, 0) => Ok(ChipPair::OneZero),
            (0, 1) => Ok(ChipPair::ZeroOne),
            _ => Err(Error::InvalidCode(a, b, index)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Manchester,
    /// Differential Manchester; the reference pair is transmitted first.
    DiffManchester { reference: ChipPair },
}

/// A validated chip stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChipSequence {
    chips: Vec<u8>,
    scheme: Scheme,
}

impl ChipSequence {
    /// Validates framing and pair shape of a raw chip stream.
    pub fn new(chips: Vec<u8>, scheme: Scheme) -> Result<Self> {
        let pairs = split_pairs(&chips)?;
        if let Scheme::DiffManchester { reference } = scheme {
            match pairs.first() {
                Some(&first) if first == reference => {}
                Some(_) => {
                    return Err(Error::Framing(
                        "first pair differs from the declared reference".into(),
                    ))
                }
                None => return Err(Error::Framing("missing preamble pair".into())),
            }
        }
        Ok(ChipSequence { chips, scheme })
    }

    pub fn chips(&self) -> &[u8] {
        &self.chips
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn pairs(&self) -> impl Iterator<Item = ChipPair> + '_ {
        self.chips.chunks_exact(2).map(|p| match p {
            [1, 0] => ChipPair::OneZero,
            _ => ChipPair::ZeroOne,
        })
    }

    pub fn len(&self) -> usize {
        self.chips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chips.is_empty()
    }

    pub fn into_chips(self) -> Vec<u8> {
        self.chips
    }
}

fn split_pairs(chips: &[u8]) -> Result<Vec<ChipPair>> {
    if chips.len() % 2 != 0 {
        return Err(Error::Framing(format!(
            "chip stream has odd length {}",
            chips.len()
        )));
    }
    chips
        .chunks_exact(2)
        .enumerate()
        .map(|(i, p)| ChipPair::from_chips(p[0], p[1], i))
        .collect()
}

fn pair_of_bit(bit: u8) -> ChipPair {
    if bit == 0 {
        ChipPair::OneZero
    } else {
        ChipPair::ZeroOne
    }
}

/// Bit 0 becomes `(1,0)`, bit 1 becomes `(0,1)`. Nonzero input counts as 1.
pub fn manchester_encode(bits: &[u8]) -> ChipSequence {
    let chips = bits.iter().flat_map(|&b| pair_of_bit(b).chips()).collect();
    ChipSequence {
        chips,
        scheme: Scheme::Manchester,
    }
}

pub fn manchester_decode(chips: &[u8]) -> Result<Vec<u8>> {
    Ok(split_pairs(chips)?
        .into_iter()
        .map(|p| match p {
            ChipPair::OneZero => 0,
            ChipPair::ZeroOne => 1,
        })
        .collect())
}

/// Differential Manchester: bit 0 repeats the previous pair, bit 1 flips it.
///
/// The output starts with `reference` as a preamble symbol, so a payload of
/// `K` bits yields `K + 1` pairs.
pub fn diff_manchester_encode(bits: &[u8], reference: ChipPair) -> ChipSequence {
    let mut chips = Vec::with_capacity(2 * (bits.len() + 1));
    let mut current = reference;
    chips.extend_from_slice(&current.chips());
    for &b in bits {
        if b != 0 {
            current = current.flipped();
        }
        chips.extend_from_slice(&current.chips());
    }
    ChipSequence {
        chips,
        scheme: Scheme::DiffManchester { reference },
    }
}

/// Inverse of [`diff_manchester_encode`] for either reference pair.
pub fn diff_manchester_decode(chips: &[u8]) -> Result<Vec<u8>> {
    let pairs = split_pairs(chips)?;
    if pairs.is_empty() {
        return Err(Error::Framing("missing preamble pair".into()));
    }
    Ok(pairs.windows(2).map(|w| u8::from(w[0] != w[1])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn manchester_examples() {
        assert!(manchester_encode(&[]).is_empty());
        assert_eq!(manchester_encode(&[0]).chips(), &[1, 0]);
        assert_eq!(manchester_encode(&[0, 1, 1]).chips(), &[1, 0, 0, 1, 0, 1]);
        assert_eq!(manchester_decode(&[1, 0]).unwrap(), vec![0]);
        assert_eq!(manchester_decode(&[0, 1, 1, 0]).unwrap(), vec![1, 0]);
    }

    #[test]
    fn manchester_decode_errors() {
        assert_eq!(manchester_decode(&[1, 1]), Err(Error::InvalidCode(1, 1, 0)));
        assert_eq!(manchester_decode(&[1, 0, 0, 0]), Err(Error::InvalidCode(0, 0, 1)));
        assert!(matches!(manchester_decode(&[1, 0, 1]), Err(Error::Framing(_))));
    }

    #[test]
    fn diff_manchester_examples() {
        assert_eq!(diff_manchester_encode(&[], ChipPair::OneZero).chips(), &[1, 0]);
        assert_eq!(
            diff_manchester_encode(&[0, 1], ChipPair::OneZero).chips(),
            &[1, 0, 1, 0, 0, 1]
        );
        let seq = diff_manchester_encode(&[1, 1, 1], ChipPair::ZeroOne);
        assert_eq!(seq.chips(), &[0, 1, 1, 0, 0, 1, 1, 0]);
        assert_eq!(diff_manchester_decode(seq.chips()).unwrap(), vec![1, 1, 1]);
        assert_eq!(diff_manchester_decode(&[1, 0, 1, 0]).unwrap(), vec![0]);
        assert_eq!(diff_manchester_decode(&[1, 0, 0, 1]).unwrap(), vec![1]);
    }

    #[test]
    fn diff_manchester_decode_errors() {
        assert!(matches!(diff_manchester_decode(&[1, 0, 0, 0]), Err(Error::InvalidCode(0, 0, 1))));
        assert!(matches!(diff_manchester_decode(&[]), Err(Error::Framing(_))));
        assert!(matches!(diff_manchester_decode(&[1]), Err(Error::Framing(_))));
    }

    #[test]
    fn chip_sequence_validation() {
        assert!(ChipSequence::new(vec![1, 0, 0, 1], Scheme::Manchester).is_ok());
        assert!(ChipSequence::new(vec![1, 1], Scheme::Manchester).is_err());
        let diff = Scheme::DiffManchester {
            reference: ChipPair::ZeroOne,
        };
        assert!(ChipSequence::new(vec![0, 1, 1, 0], diff).is_ok());
        assert!(ChipSequence::new(vec![1, 0, 1, 0], diff).is_err());
        assert!(ChipSequence::new(vec![], diff).is_err());
    }

    fn bits() -> impl Strategy<Value = Vec<u8>> {
        prop::collection::vec(0u8..=1, 0..64)
    }

    proptest! {
        #[test]
        fn manchester_round_trip(b in bits()) {
            let seq = manchester_encode(&b);
            prop_assert_eq!(seq.len(), 2 * b.len());
            prop_assert!(seq.pairs().count() == b.len());
            prop_assert_eq!(manchester_decode(seq.chips()).unwrap(), b);
        }

        #[test]
        fn diff_manchester_round_trip(b in bits(), zero_one in any::<bool>()) {
            let reference = if zero_one { ChipPair::ZeroOne } else { ChipPair::OneZero };
            let seq = diff_manchester_encode(&b, reference);
            prop_assert_eq!(seq.pairs().count(), b.len() + 1);
            prop_assert_eq!(seq.pairs().next(), Some(reference));
            // every pair has exactly one 1
            prop_assert!(seq.chips().chunks(2).all(|p| p[0] + p[1] == 1));
            prop_assert!(ChipSequence::new(seq.chips().to_vec(), seq.scheme()).is_ok());
            prop_assert_eq!(diff_manchester_decode(seq.chips()).unwrap(), b);
        }
    }
}
