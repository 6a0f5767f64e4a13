//! MSB-first fixed-width bit packing.

use crate::error::{Error, Result};

#[derive(Debug, Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    acc: u64,
    filled: u32,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends the low `width` bits of `value`, most significant first.
    pub fn put(&mut self, value: u32, width: u32) {
        debug_assert!(width <= 32);
        debug_assert!(width == 32 || value >> width == 0);
        if width == 0 {
            return;
        }
        self.acc = (self.acc << width) | value as u64;
        self.filled += width;
        while self.filled >= 8 {
            self.filled -= 8;
            self.bytes.push((self.acc >> self.filled) as u8);
        }
        self.acc &= (1u64 << self.filled) - 1;
    }

    /// Zero-pads to the next byte boundary and returns the bytes.
    pub fn finish(mut self) -> Vec<u8> {
        if self.filled > 0 {
            self.bytes.push((self.acc << (8 - self.filled)) as u8);
        }
        self.bytes
    }
}

pub struct BitReader<'a> {
    bytes: &'a [u8],
    bit: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, bit: 0 }
    }

    pub fn get(&mut self, width: u32) -> Result<u32> {
        let end = self.bit + width as usize;
        if end > self.bytes.len() * 8 {
            return Err(Error::Truncated(format!(
                "needed {width} more bits at bit offset {}",
                self.bit
            )));
        }
        let mut v: u32 = 0;
        for b in self.bit..end {
            let byte = self.bytes[b / 8];
            v = (v << 1) | ((byte >> (7 - b % 8)) & 1) as u32;
        }
        self.bit = end;
        Ok(v)
    }

    /// Bytes consumed, counting a partially read byte as whole.
    pub fn consumed_bytes(&self) -> usize {
        self.bit.div_ceil(8)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_bit_fields_by_hand() {
        // 3, 0, 1 as 2-bit fields: 11 00 01 00 -> 0b1100_0100
        let mut w = BitWriter::new();
        for v in [3, 0, 1] {
            w.put(v, 2);
        }
        assert_eq!(w.finish(), vec![0b1100_0100]);
        let bytes = [0b1100_0100];
        let mut r = BitReader::new(&bytes);
        assert_eq!(
            [r.get(2).unwrap(), r.get(2).unwrap(), r.get(2).unwrap()],
            [3, 0, 1]
        );
        assert_eq!(r.consumed_bytes(), 1);
    }

    #[test]
    fn reading_past_end_is_truncation() {
        let mut r = BitReader::new(&[0xff]);
        assert!(r.get(6).is_ok());
        assert!(matches!(r.get(3), Err(Error::Truncated(_))));
    }

    proptest! {
        #[test]
        fn roundtrip(fields in prop::collection::vec((0u32..=32, any::<u32>()), 0..64)) {
            let fields: Vec<(u32, u32)> = fields
                .into_iter()
                .map(|(w, v)| (w, if w == 32 { v } else { v & ((1u32 << w) - 1) }))
                .collect();
            let mut wr = BitWriter::new();
            for &(w, v) in &fields {
                wr.put(v, w);
            }
            let total: u32 = fields.iter().map(|f| f.0).sum();
            let bytes = wr.finish();
            prop_assert_eq!(bytes.len(), total.div_ceil(8) as usize);
            let mut rd = BitReader::new(&bytes);
            for &(w, v) in &fields {
                prop_assert_eq!(rd.get(w).unwrap(), v);
            }
        }
    }
}
