//! Hybrid-compressed matrix rows.
//!
//! A row is stored either run-length encoded (`[first_bit] r1 r2 ... rk`,
//! runs summing to the logical width) or as the list of 1-based set-bit
//! positions, whichever takes fewer integers. Ties go to run-length. The
//! all-zero row compresses to `[0] width`.

use crate::bits::BitArray;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowEncoding {
    RunLength,
    SetPositions,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitRow {
    pub width: u32,
    pub encoding: RowEncoding,
    pub payload: Vec<u32>,
}

/// Number of integers the pure run-length form would take for a row given as
/// sorted set positions.
fn run_length_ints(width: u32, positions: &[u32]) -> u32 {
    if positions.is_empty() {
        return 2; // [0] width
    }
    let mut runs = 0u32;
    if positions[0] > 1 {
        runs += 1; // leading zero run
    }
    let mut i = 0;
    while i < positions.len() {
        // maximal block of consecutive set positions
        let mut j = i;
        while j + 1 < positions.len() && positions[j + 1] == positions[j] + 1 {
            j += 1;
        }
        runs += 1; // the ones-run
        if j + 1 < positions.len() {
            runs += 1; // zero gap to the next block
        }
        i = j + 1;
    }
    if *positions.last().unwrap() < width {
        runs += 1; // trailing zero run
    }
    1 + runs
}

/// Compresses a row given as sorted, strictly increasing 1-based positions.
pub fn compress_positions(width: u32, positions: &[u32]) -> BitRow {
    debug_assert!(positions.windows(2).all(|w| w[0] < w[1]));
    if positions.is_empty() {
        return BitRow { width, encoding: RowEncoding::RunLength, payload: vec![0, width] };
    }
    let popcount = positions.len() as u32;
    let rle_ints = run_length_ints(width, positions);
    if popcount < rle_ints {
        BitRow { width, encoding: RowEncoding::SetPositions, payload: positions.to_vec() }
    } else {
        let mut payload = Vec::new();
        let first_bit = u32::from(positions[0] == 1);
        payload.push(first_bit);
        let mut pos = 1u32;
        let mut i = 0usize;
        while pos <= width {
            if i < positions.len() && positions[i] == pos {
                let start = pos;
                while i < positions.len() && positions[i] == pos {
                    i += 1;
                    pos += 1;
                }
                payload.push(pos - start);
            } else {
                let start = pos;
                let next = if i < positions.len() { positions[i] } else { width + 1 };
                pos = next;
                payload.push(pos - start);
            }
        }
        BitRow { width, encoding: RowEncoding::RunLength, payload }
    }
}

/// Compresses a plain boolean row under the hybrid rule.
pub fn compress_row(bits: &[bool]) -> BitRow {
    let positions: Vec<u32> = bits
        .iter()
        .enumerate()
        .filter_map(|(i, b)| b.then_some(i as u32 + 1))
        .collect();
    compress_positions(bits.len() as u32, &positions)
}

impl BitRow {
    pub fn validate(&self) -> Result<()> {
        match self.encoding {
            RowEncoding::RunLength => {
                if self.payload.len() < 2 {
                    return Err(Error::CorruptRow("run-length payload too short".into()));
                }
                if self.payload[0] > 1 {
                    return Err(Error::CorruptRow("first-bit marker must be 0 or 1".into()));
                }
                let runs = &self.payload[1..];
                if runs.contains(&0) {
                    return Err(Error::CorruptRow("zero-length run".into()));
                }
                let total: u64 = runs.iter().map(|r| *r as u64).sum();
                if total != self.width as u64 {
                    return Err(Error::CorruptRow(format!(
                        "runs sum to {total}, logical width is {}",
                        self.width
                    )));
                }
            }
            RowEncoding::SetPositions => {
                let p = &self.payload;
                if p.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::CorruptRow("positions not strictly increasing".into()));
                }
                if p.first().is_some_and(|f| *f == 0) || p.last().is_some_and(|l| *l > self.width) {
                    return Err(Error::CorruptRow("position out of range".into()));
                }
            }
        }
        Ok(())
    }

    pub fn popcount(&self) -> u64 {
        match self.encoding {
            RowEncoding::SetPositions => self.payload.len() as u64,
            RowEncoding::RunLength => {
                let mut bit = self.payload[0] == 1;
                let mut n = 0u64;
                for r in &self.payload[1..] {
                    if bit {
                        n += *r as u64;
                    }
                    bit = !bit;
                }
                n
            }
        }
    }

    pub fn positions(&self) -> Vec<u32> {
        match self.encoding {
            RowEncoding::SetPositions => self.payload.clone(),
            RowEncoding::RunLength => {
                let mut out = Vec::new();
                let mut bit = self.payload[0] == 1;
                let mut pos = 1u32;
                for r in &self.payload[1..] {
                    if bit {
                        out.extend(pos..pos + *r);
                    }
                    pos += *r;
                    bit = !bit;
                }
                out
            }
        }
    }

    pub fn contains(&self, pos: u32) -> bool {
        if pos == 0 || pos > self.width {
            return false;
        }
        match self.encoding {
            RowEncoding::SetPositions => self.payload.binary_search(&pos).is_ok(),
            RowEncoding::RunLength => {
                let mut bit = self.payload[0] == 1;
                let mut cur = 1u32;
                for r in &self.payload[1..] {
                    if pos < cur + *r {
                        return bit;
                    }
                    cur += *r;
                    bit = !bit;
                }
                false
            }
        }
    }

    /// Validating decompression to plain booleans.
    pub fn decompress(&self) -> Result<Vec<bool>> {
        self.validate()?;
        let mut bits = vec![false; self.width as usize];
        for p in self.positions() {
            bits[(p - 1) as usize] = true;
        }
        Ok(bits)
    }

    /// Intersects the row with a mask, returning the re-compressed result,
    /// or `None` when nothing survives.
    pub fn and_mask(&self, mask: &BitArray) -> Option<BitRow> {
        let kept: Vec<u32> = self.positions().into_iter().filter(|p| mask.get(*p)).collect();
        if kept.is_empty() {
            None
        } else {
            Some(compress_positions(self.width, &kept))
        }
    }

    pub fn or_into(&self, acc: &mut BitArray) {
        for p in self.positions() {
            acc.set(p);
        }
    }

    pub fn payload_ints(&self) -> usize {
        self.payload.len()
    }
}
