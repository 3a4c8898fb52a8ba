//! Bit-string parsing and formatting helpers shared by the generator
//! pipelines and the command-line front end.

use crate::error::{Error, Result};

/// Parses a string of `0`/`1` characters into bits.
pub fn parse_bits(s: &str) -> Result<Vec<bool>> {
    if s.is_empty() {
        return Err(Error::EmptyBitString);
    }
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::InvalidBitChar(other)),
        })
        .collect()
}

/// Renders bits as a `0`/`1` string in the given order.
pub fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Packs bits into hex, 8 bits per byte, first bit in the most
/// significant position. A final partial byte is zero-padded in its
/// low-order bits.
pub fn bits_to_hex(bits: &[bool]) -> String {
    let mut out = String::with_capacity(bits.len().div_ceil(8) * 2);
    for chunk in bits.chunks(8) {
        let mut byte = 0u8;
        for (i, &b) in chunk.iter().enumerate() {
            if b {
                byte |= 1 << (7 - i);
            }
        }
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trip() {
        let bits = parse_bits("10101111000100110").unwrap();
        assert_eq!(bits.len(), 17);
        assert_eq!(bits_to_string(&bits), "10101111000100110");
    }

    #[test]
    fn parse_rejects_garbage() {
        assert_eq!(parse_bits("10102"), Err(Error::InvalidBitChar('2')));
        assert_eq!(parse_bits(""), Err(Error::EmptyBitString));
    }

    #[test]
    fn hex_packs_msb_first() {
        // 1010_1111 0001_0011 0_0000000
        let bits = parse_bits("10101111000100110").unwrap();
        assert_eq!(bits_to_hex(&bits), "af1300");
        assert_eq!(bits_to_hex(&[true]), "80");
        assert_eq!(bits_to_hex(&[]), "");
    }
}
