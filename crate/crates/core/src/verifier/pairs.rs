use crate::construction::BlockSink;
use crate::gf2m::FieldElement;

/// Co-occurrence counts for every unordered pair of field elements, stored
/// as a dense lower triangle keyed by bitmask, plus per-element counts.
///
/// Counts for same-group pairs are kept too (they must stay zero); callers
/// filter them when reading balance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairCountMatrix {
    dim: u32,
    counts: Vec<u64>,
    element_counts: Vec<u64>,
    blocks: u64,
}

#[inline]
fn tri_index(a: u32, b: u32) -> usize {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    hi as usize * (hi as usize - 1) / 2 + lo as usize
}

impl PairCountMatrix {
    /// A matrix for elements with bitmask below `dim`.
    pub fn new(dim: u32) -> Self {
        let d = dim as usize;
        PairCountMatrix {
            dim,
            counts: vec![0; d * d.saturating_sub(1) / 2],
            element_counts: vec![0; d],
            blocks: 0,
        }
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn blocks(&self) -> u64 {
        self.blocks
    }

    /// Number of blocks containing both `a` and `b` (`a != b`).
    pub fn get(&self, a: FieldElement, b: FieldElement) -> u64 {
        debug_assert_ne!(a, b);
        self.counts[tri_index(a.0, b.0)]
    }

    /// Number of blocks containing `a`.
    pub fn element_count(&self, a: FieldElement) -> u64 {
        self.element_counts[a.0 as usize]
    }

    pub fn add_block(&mut self, block: &[FieldElement]) {
        self.blocks += 1;
        for (i, &a) in block.iter().enumerate() {
            self.element_counts[a.0 as usize] += 1;
            for &b in &block[i + 1..] {
                self.counts[tri_index(a.0, b.0)] += 1;
            }
        }
    }

    /// Pointwise sum. Both matrices must have the same dimension.
    pub fn merge_from(&mut self, other: &PairCountMatrix) {
        assert_eq!(self.dim, other.dim, "merging matrices of different size");
        self.blocks += other.blocks;
        for (x, y) in self.counts.iter_mut().zip(&other.counts) {
            *x += y;
        }
        for (x, y) in self.element_counts.iter_mut().zip(&other.element_counts) {
            *x += y;
        }
    }
}

impl BlockSink for PairCountMatrix {
    fn accept(&mut self, block: &[FieldElement]) {
        self.add_block(block);
    }

    fn merge(&mut self, other: Self) {
        self.merge_from(&other);
    }
}
