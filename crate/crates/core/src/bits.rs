use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum bit-string length supported anywhere in the crate.
///
/// Keeps statevectors (2^n amplitudes) and encoded-input tables at desk scale.
pub const MAX_BITS: usize = 24;

/// A fixed-width bit string, the common currency between the encoder, the
/// model, and the dynamics code.
///
/// Bit `i` of `value` corresponds to qubit `i` (qubit 0 = least-significant
/// bit). The textual form is written most-significant bit first, so `"10"`
/// with `len = 2` means bit 1 set, bit 0 clear (`value = 2`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BitString {
    value: u64,
    len: usize,
}

impl BitString {
    pub fn new(value: u64, len: usize) -> Result<Self> {
        if len == 0 || len > MAX_BITS {
            return Err(Error::invalid(format!(
                "bit string length must be in 1..={MAX_BITS}, got {len}"
            )));
        }
        if value >> len != 0 {
            return Err(Error::invalid(format!(
                "value {value} does not fit in {len} bits"
            )));
        }
        Ok(BitString { value, len })
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Bit at position `i` (0 = least significant).
    pub fn bit(&self, i: usize) -> u64 {
        debug_assert!(i < self.len);
        (self.value >> i) & 1
    }

    /// Parse from the textual convention (most-significant bit first).
    pub fn parse(s: &str) -> Result<Self> {
        if s.is_empty() || s.len() > MAX_BITS {
            return Err(Error::invalid(format!(
                "bit string must have 1..={MAX_BITS} characters, got {:?}",
                s
            )));
        }
        let mut value = 0u64;
        for c in s.chars() {
            value <<= 1;
            match c {
                '0' => {}
                '1' => value |= 1,
                other => {
                    return Err(Error::invalid(format!(
                        "bit string may only contain 0 and 1, found {other:?}"
                    )))
                }
            }
        }
        Ok(BitString {
            value,
            len: s.len(),
        })
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in (0..self.len).rev() {
            write!(f, "{}", self.bit(i))?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BitString::parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_uses_msb_first_convention() {
        let z = BitString::parse("10").unwrap();
        assert_eq!(z.value(), 2);
        assert_eq!(z.len(), 2);
        assert_eq!(z.bit(0), 0);
        assert_eq!(z.bit(1), 1);
        assert_eq!(z.to_string(), "10");
    }

    #[test]
    fn round_trips_all_three_bit_strings() {
        for v in 0..8u64 {
            let z = BitString::new(v, 3).unwrap();
            assert_eq!(BitString::parse(&z.to_string()).unwrap(), z);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(BitString::parse("").is_err());
        assert!(BitString::parse("012").is_err());
        assert!(BitString::new(4, 2).is_err());
        assert!(BitString::new(0, 0).is_err());
        assert!(BitString::new(0, MAX_BITS + 1).is_err());
    }
}
