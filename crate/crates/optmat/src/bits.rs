//! Plain bit arrays used as fold results and unfold masks. Positions are
//! 1-based throughout, matching the coordinate spaces.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitArray {
    width: u32,
    blocks: Vec<u64>,
}

impl BitArray {
    pub fn zeros(width: u32) -> BitArray {
        BitArray { width, blocks: vec![0; width.div_ceil(64) as usize] }
    }

    pub fn ones(width: u32) -> BitArray {
        let mut b = BitArray::zeros(width);
        for i in 0..width {
            b.set(i + 1);
        }
        b
    }

    pub fn from_positions<I: IntoIterator<Item = u32>>(width: u32, positions: I) -> BitArray {
        let mut b = BitArray::zeros(width);
        for p in positions {
            b.set(p);
        }
        b
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn set(&mut self, pos: u32) {
        debug_assert!(pos >= 1 && pos <= self.width);
        let i = (pos - 1) as usize;
        self.blocks[i / 64] |= 1u64 << (i % 64);
    }

    pub fn get(&self, pos: u32) -> bool {
        if pos == 0 || pos > self.width {
            return false;
        }
        let i = (pos - 1) as usize;
        self.blocks[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn and_assign(&mut self, other: &BitArray) {
        debug_assert_eq!(self.width, other.width);
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a &= *b;
        }
    }

    pub fn count_ones(&self) -> u64 {
        self.blocks.iter().map(|b| b.count_ones() as u64).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().all(|b| *b == 0)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = u32> + '_ {
        let width = self.width;
        self.blocks.iter().enumerate().flat_map(move |(bi, block)| {
            let mut b = *block;
            let mut out = Vec::new();
            while b != 0 {
                let tz = b.trailing_zeros();
                let pos = bi as u32 * 64 + tz + 1;
                if pos <= width {
                    out.push(pos);
                }
                b &= b - 1;
            }
            out
        })
    }

    /// Keeps only the first `keep` positions, clearing everything above.
    /// Used when a binding set crosses from the subject space to the object
    /// space or back: only the shared low range survives.
    pub fn truncate_to(&mut self, keep: u32) {
        for i in (keep + 1)..=self.width {
            let idx = (i - 1) as usize;
            self.blocks[idx / 64] &= !(1u64 << (idx % 64));
        }
    }

    /// Copies this mask into a (possibly differently sized) space, keeping
    /// only the first `shared` positions.
    pub fn reproject(&self, new_width: u32, shared: u32) -> BitArray {
        let mut out = BitArray::zeros(new_width);
        for p in self.iter_ones() {
            if p <= shared && p <= new_width {
                out.set(p);
            }
        }
        out
    }
}
