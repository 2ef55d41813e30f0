use std::fmt;

/// Fixed-length packed bit vector, LSB-first within 64-bit words.
///
/// Bits past `len` in the last word are kept at zero so word-level XOR,
/// AND and popcount never see stale data.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BitRow {
    len: usize,
    words: Vec<u64>,
}

impl BitRow {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut row = Self::zeros(0);
        for b in bits {
            if row.len % 64 == 0 {
                row.words.push(0);
            }
            if b {
                row.words[row.len / 64] |= 1 << (row.len % 64);
            }
            row.len += 1;
        }
        row
    }

    pub fn from_indices(len: usize, ones: &[usize]) -> Self {
        let mut row = Self::zeros(len);
        for &i in ones {
            row.set(i, true);
        }
        row
    }

    /// Row with only bit `k` set.
    pub fn unit(len: usize, k: usize) -> Self {
        Self::from_indices(len, &[k])
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / 64] ^= 1 << (i % 64);
    }

    /// In-place XOR. Panics if lengths differ.
    #[inline]
    pub fn xor_assign(&mut self, other: &BitRow) {
        assert_eq!(self.len, other.len, "bit row length mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    /// Parity of the bitwise AND with `other`.
    #[inline]
    pub fn and_parity(&self, other: &BitRow) -> bool {
        assert_eq!(self.len, other.len, "bit row length mismatch");
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones & 1 == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let tz = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    Some(wi * 64 + tz)
                }
            })
        })
    }

    /// Bits `start..start + width` as an integer, bit `start` least significant.
    pub fn field(&self, start: usize, width: usize) -> u64 {
        assert!(width <= 64 && start + width <= self.len);
        (0..width).fold(0u64, |acc, b| acc | (u64::from(self.get(start + b)) << b))
    }

    pub fn set_field(&mut self, start: usize, width: usize, value: u64) {
        for b in 0..width {
            self.set(start + b, (value >> b) & 1 == 1);
        }
    }

    /// Little-endian bit order: bit `i` lives in byte `i / 8` at position `i % 8`.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        let n = self.len.div_ceil(8);
        (0..n)
            .map(|b| (self.words[b / 8] >> ((b % 8) * 8)) as u8)
            .collect()
    }

    pub fn from_le_bytes(len: usize, bytes: &[u8]) -> Self {
        assert!(bytes.len() >= len.div_ceil(8));
        let mut row = Self::zeros(len);
        for i in 0..len {
            if (bytes[i / 8] >> (i % 8)) & 1 == 1 {
                row.set(i, true);
            }
        }
        row
    }
}

impl fmt::Debug for BitRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}
