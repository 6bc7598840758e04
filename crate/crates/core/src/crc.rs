//! CRC-16/X.25 as used by the MAVLink frame checksum.
//!
//! Parameters: reflected polynomial 0x1021 (0x8408 in reflected form),
//! initial accumulator 0xFFFF, no final XOR. Two implementations are kept:
//! a bit-serial reference and the table-driven path used everywhere else.

/// Initial accumulator value.
pub const CRC_INIT: u16 = 0xFFFF;

const POLY_REFLECTED: u16 = 0x8408;

const TABLE: [u16; 256] = build_table();

const fn build_table() -> [u16; 256] {
    let mut table = [0u16; 256];
    let mut i = 0;
    while i < 256 {
        let mut crc = i as u16;
        let mut bit = 0;
        while bit < 8 {
            crc = if crc & 1 != 0 {
                (crc >> 1) ^ POLY_REFLECTED
            } else {
                crc >> 1
            };
            bit += 1;
        }
        table[i] = crc;
        i += 1;
    }
    table
}

/// Running X.25 checksum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Crc16 {
    acc: u16,
}

impl Default for Crc16 {
    fn default() -> Self {
        Self::new()
    }
}

impl Crc16 {
    pub const fn new() -> Self {
        Self { acc: CRC_INIT }
    }

    #[inline]
    pub fn update_byte(&mut self, byte: u8) {
        let idx = (self.acc ^ u16::from(byte)) & 0xFF;
        self.acc = (self.acc >> 8) ^ TABLE[idx as usize];
    }

    pub fn update(&mut self, data: &[u8]) {
        for &b in data {
            self.update_byte(b);
        }
    }

    pub const fn value(self) -> u16 {
        self.acc
    }
}

/// Table-driven X.25 checksum over `data`.
pub fn crc_x25(data: &[u8]) -> u16 {
    let mut crc = Crc16::new();
    crc.update(data);
    crc.value()
}

/// Bit-serial reference implementation. Slow; used as the oracle for the
/// table-driven path.
pub fn crc_x25_bitwise(data: &[u8]) -> u16 {
    let mut crc = CRC_INIT;
    for &byte in data {
        crc ^= u16::from(byte);
        for _ in 0..8 {
            if crc & 1 != 0 {
                crc = (crc >> 1) ^ POLY_REFLECTED;
            } else {
                crc >>= 1;
            }
        }
    }
    crc
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_input_is_initial_value() {
        assert_eq!(crc_x25(&[]), CRC_INIT);
        assert_eq!(crc_x25_bitwise(&[]), CRC_INIT);
    }

    #[test]
    fn deterministic() {
        let d = b"HEARTBEAT";
        assert_eq!(crc_x25(d), crc_x25(d));
    }

    #[test]
    fn incremental_matches_one_shot() {
        let data: Vec<u8> = (0..=255u8).collect();
        let mut crc = Crc16::new();
        crc.update(&data[..100]);
        crc.update(&data[100..]);
        assert_eq!(crc.value(), crc_x25(&data));
    }

    #[test]
    fn table_matches_bitwise_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x25);
        for _ in 0..10_000 {
            let len = rng.random_range(0..=300);
            let data: Vec<u8> = (0..len).map(|_| rng.random()).collect();
            assert_eq!(crc_x25(&data), crc_x25_bitwise(&data));
        }
    }
}
