//! Compressed 2D bitmatrices with `fold` (project one dimension to a bit
//! array) and `unfold` (mask one dimension) as the only data primitives.

use std::collections::BTreeMap;

use crate::bits::BitArray;
use crate::bitrow::{compress_positions, BitRow};
use crate::error::{Error, Result};

/// Index family a matrix belongs to: which bitcube dimension was sliced and
/// what the row/column dimensions hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    /// rows = subjects, columns = objects, sliced on one predicate
    So,
    /// rows = objects, columns = subjects (transpose of `So`)
    Os,
    /// rows = predicates, columns = subjects, sliced on one object
    Ps,
    /// rows = predicates, columns = objects, sliced on one subject
    Po,
}

impl Family {
    pub fn tag(self) -> u32 {
        match self {
            Family::So => 0,
            Family::Os => 1,
            Family::Ps => 2,
            Family::Po => 3,
        }
    }

    pub fn from_tag(tag: u32) -> Option<Family> {
        Some(match tag {
            0 => Family::So,
            1 => Family::Os,
            2 => Family::Ps,
            3 => Family::Po,
            _ => return None,
        })
    }

    pub fn dir_name(self) -> &'static str {
        match self {
            Family::So => "so",
            Family::Os => "os",
            Family::Ps => "ps",
            Family::Po => "po",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    Row,
    Col,
}

impl Dim {
    pub fn other(self) -> Dim {
        match self {
            Dim::Row => Dim::Col,
            Dim::Col => Dim::Row,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMat {
    pub family: Family,
    /// Id of the fixed dimension value this slice belongs to.
    pub slice: u32,
    pub row_dim: u32,
    pub col_dim: u32,
    /// Non-empty rows only; an absent row decompresses to all zeros.
    pub rows: BTreeMap<u32, BitRow>,
    pub row_mask: BitArray,
    pub col_mask: BitArray,
    pub triple_count: u64,
}

impl BitMat {
    pub fn empty(family: Family, slice: u32, row_dim: u32, col_dim: u32) -> BitMat {
        BitMat {
            family,
            slice,
            row_dim,
            col_dim,
            rows: BTreeMap::new(),
            row_mask: BitArray::zeros(row_dim),
            col_mask: BitArray::zeros(col_dim),
            triple_count: 0,
        }
    }

    /// Builds a matrix from (row, col) cells. Cells must be grouped by row
    /// in ascending order with strictly increasing columns inside a row.
    pub fn from_sorted_cells(
        family: Family,
        slice: u32,
        row_dim: u32,
        col_dim: u32,
        cells: &[(u32, u32)],
    ) -> BitMat {
        let mut bm = BitMat::empty(family, slice, row_dim, col_dim);
        let mut i = 0;
        while i < cells.len() {
            let r = cells[i].0;
            let mut cols = Vec::new();
            while i < cells.len() && cells[i].0 == r {
                cols.push(cells[i].1);
                i += 1;
            }
            bm.insert_row(r, compress_positions(col_dim, &cols));
        }
        bm
    }

    fn insert_row(&mut self, r: u32, row: BitRow) {
        self.triple_count += row.popcount();
        self.row_mask.set(r);
        row.or_into(&mut self.col_mask);
        self.rows.insert(r, row);
    }

    pub fn dim_width(&self, dim: Dim) -> u32 {
        match dim {
            Dim::Row => self.row_dim,
            Dim::Col => self.col_dim,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.triple_count == 0
    }

    /// Projection of the retained dimension: bit k is set iff some cell has
    /// coordinate k there. Masks are maintained exactly, so this is a copy.
    pub fn fold(&self, retain: Dim) -> BitArray {
        match retain {
            Dim::Row => self.row_mask.clone(),
            Dim::Col => self.col_mask.clone(),
        }
    }

    /// Keeps only cells whose coordinate on `retain` is set in `mask`;
    /// counts and masks are updated and rows stay hybrid-compressed.
    pub fn unfold(&mut self, mask: &BitArray, retain: Dim) -> Result<()> {
        if mask.width() != self.dim_width(retain) {
            return Err(Error::WidthMismatch { mask: mask.width(), dim: self.dim_width(retain) });
        }
        match retain {
            Dim::Row => {
                let drop: Vec<u32> =
                    self.rows.keys().copied().filter(|r| !mask.get(*r)).collect();
                if drop.is_empty() {
                    return Ok(());
                }
                for r in drop {
                    self.rows.remove(&r);
                }
                self.row_mask.and_assign(mask);
                // removing rows can empty columns: rebuild the column mask
                let mut cols = BitArray::zeros(self.col_dim);
                let mut count = 0u64;
                for row in self.rows.values() {
                    row.or_into(&mut cols);
                    count += row.popcount();
                }
                self.col_mask = cols;
                self.triple_count = count;
            }
            Dim::Col => {
                let mut next = BTreeMap::new();
                let mut row_mask = BitArray::zeros(self.row_dim);
                let mut count = 0u64;
                for (r, row) in &self.rows {
                    if let Some(kept) = row.and_mask(mask) {
                        count += kept.popcount();
                        row_mask.set(*r);
                        next.insert(*r, kept);
                    }
                }
                self.rows = next;
                self.row_mask = row_mask;
                self.col_mask.and_assign(mask);
                self.triple_count = count;
            }
        }
        Ok(())
    }

    pub fn contains(&self, r: u32, c: u32) -> bool {
        self.rows.get(&r).is_some_and(|row| row.contains(c))
    }

    pub fn iter_cells(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.rows.iter().flat_map(|(r, row)| row.positions().into_iter().map(move |c| (*r, c)))
    }

    pub fn row(&self, r: u32) -> Option<&BitRow> {
        self.rows.get(&r)
    }

    /// Positions set in one row (empty for an absent row).
    pub fn row_positions(&self, r: u32) -> Vec<u32> {
        self.rows.get(&r).map(|row| row.positions()).unwrap_or_default()
    }

    /// Rows having a set bit in column `c`.
    pub fn col_positions(&self, c: u32) -> Vec<u32> {
        self.rows
            .iter()
            .filter_map(|(r, row)| row.contains(c).then_some(*r))
            .collect()
    }
}
