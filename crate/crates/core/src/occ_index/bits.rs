use std::io::Cursor;

use bitstream_io::{BigEndian, BitRead, BitReader, BitWrite, BitWriter};

use crate::error::{Error, Result};

/// Bits needed to write any value `< bound` in fixed width (at least 1).
pub fn width_for(bound: u64) -> u32 {
    (u64::BITS - bound.saturating_sub(1).leading_zeros()).max(1)
}

/// Bit-level writer with Elias-gamma integers.
pub struct BitSink {
    w: BitWriter<Vec<u8>, BigEndian>,
    bits: u64,
}

impl Default for BitSink {
    fn default() -> Self {
        Self::new()
    }
}

impl BitSink {
    pub fn new() -> Self {
        BitSink { w: BitWriter::endian(Vec::new(), BigEndian), bits: 0 }
    }

    /// Bits written so far.
    pub fn bit_len(&self) -> u64 {
        self.bits
    }

    pub fn bit(&mut self, b: bool) {
        self.w.write_bit(b).expect("writing to memory");
        self.bits += 1;
    }

    pub fn fixed(&mut self, width: u32, v: u64) {
        debug_assert!(width == 64 || v >> width == 0, "{v} does not fit in {width} bits");
        if width > 0 {
            self.w.write(width, v).expect("writing to memory");
            self.bits += width as u64;
        }
    }

    /// Elias-gamma code of `v + 1`.
    pub fn gamma(&mut self, v: u64) {
        let x = v as u128 + 1;
        let nbits = 128 - x.leading_zeros();
        for _ in 1..nbits {
            self.bit(false);
        }
        for i in (0..nbits).rev() {
            self.bit((x >> i) & 1 == 1);
        }
    }

    pub fn bytes(&mut self, b: &[u8]) {
        for &x in b {
            self.fixed(8, x as u64);
        }
    }

    /// Pads to a byte boundary and returns the buffer.
    pub fn finish(mut self) -> Vec<u8> {
        self.w.byte_align().expect("writing to memory");
        self.w.into_writer()
    }
}

/// Reader matching [`BitSink`].
pub struct BitSource<'a> {
    r: BitReader<Cursor<&'a [u8]>, BigEndian>,
}

fn truncated<E>(_: E) -> Error {
    Error::Decode("truncated bit stream".into())
}

impl<'a> BitSource<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        BitSource { r: BitReader::endian(Cursor::new(data), BigEndian) }
    }

    pub fn bit(&mut self) -> Result<bool> {
        self.r.read_bit().map_err(truncated)
    }

    pub fn fixed(&mut self, width: u32) -> Result<u64> {
        if width == 0 {
            return Ok(0);
        }
        self.r.read::<u64>(width).map_err(truncated)
    }

    pub fn gamma(&mut self) -> Result<u64> {
        let mut zeros = 0u32;
        while !self.bit()? {
            zeros += 1;
            if zeros > 64 {
                return Err(Error::Decode("gamma code too long".into()));
            }
        }
        let mut x: u128 = 1;
        for _ in 0..zeros {
            x = (x << 1) | self.bit()? as u128;
        }
        u64::try_from(x - 1).map_err(|_| Error::Decode("gamma value overflows".into()))
    }

    /// Gamma value that must not exceed `max`.
    pub fn gamma_max(&mut self, max: u64, what: &str) -> Result<u64> {
        let v = self.gamma()?;
        if v > max {
            return Err(Error::Decode(format!("{what} = {v} exceeds {max}")));
        }
        Ok(v)
    }

    pub fn bytes(&mut self, n: usize) -> Result<Vec<u8>> {
        (0..n).map(|_| self.fixed(8).map(|b| b as u8)).collect()
    }
}
