//! Depth-first search over blocks that contain a fixed set of elements.
//!
//! A k-subset of X summing to 1 has no nonempty proper subset summing to 1
//! exactly when 1 together with any k-1 of its elements is linearly
//! independent over GF(2): a proper subset summing to 1 or 0 is a linear
//! dependency, and a subset summing to 0 forces its complement to sum to 1.
//! The walker keeps the span of {1} ∪ fixed ∪ picks as a bitset; a candidate
//! is admissible iff it lies outside that span, so every branch of the
//! search ends in valid blocks and the last element is forced.
//!
//! Blocks are emitted once each: picks ascend, and the forced element must
//! exceed the last pick.

use rayon::prelude::*;

use crate::gf2m::{FieldContext, FieldElement};

/// The span of a set of vectors in GF(2)^m, as a membership bitset plus the
/// list of members in insertion order (so it can be rolled back).
#[derive(Clone)]
pub(crate) struct SpanSet {
    bits: Vec<u64>,
    members: Vec<u32>,
}

impl SpanSet {
    pub(crate) fn new(order: u32) -> Self {
        let mut bits = vec![0u64; words_for(order)];
        bits[0] = 1;
        SpanSet {
            bits,
            members: vec![0],
        }
    }

    #[inline]
    pub(crate) fn contains(&self, x: u32) -> bool {
        self.bits[(x >> 6) as usize] >> (x & 63) & 1 == 1
    }

    /// Adds `x` to the generating set; returns the previous size for rollback.
    #[inline]
    pub(crate) fn extend(&mut self, x: u32) -> usize {
        let len = self.members.len();
        self.members.reserve(len);
        for i in 0..len {
            let y = self.members[i] ^ x;
            self.bits[(y >> 6) as usize] |= 1 << (y & 63);
            self.members.push(y);
        }
        len
    }

    #[inline]
    pub(crate) fn truncate(&mut self, len: usize) {
        for &y in &self.members[len..] {
            self.bits[(y >> 6) as usize] &= !(1 << (y & 63));
        }
        self.members.truncate(len);
    }

    #[inline]
    fn word(&self, w: usize) -> u64 {
        self.bits[w]
    }
}

/// Moves bit `i` of `word` to bit `i ^ c` (for `c < 64`).
#[inline]
fn xor_permute(mut word: u64, c: u32) -> u64 {
    const MASKS: [u64; 6] = [
        0x5555_5555_5555_5555,
        0x3333_3333_3333_3333,
        0x0F0F_0F0F_0F0F_0F0F,
        0x00FF_00FF_00FF_00FF,
        0x0000_FFFF_0000_FFFF,
        0x0000_0000_FFFF_FFFF,
    ];
    for (i, &mask) in MASKS.iter().enumerate() {
        if c >> i & 1 == 1 {
            let shift = 1 << i;
            word = ((word & mask) << shift) | ((word >> shift) & mask);
        }
    }
    word
}

fn words_for(order: u32) -> usize {
    (order as usize).div_ceil(64)
}

/// Immutable description of one search: which elements every block must
/// contain and how many more to choose.
pub(crate) struct Search {
    order: u32,
    fixed: Vec<FieldElement>,
    /// Elements chosen freely; one more is forced by the sum condition.
    free: usize,
    /// 1 + sum(fixed): the sum the free and forced elements must reach.
    target: u32,
    base: SpanSet,
    /// `bit_clear[h]`: field elements below `order` whose bit `h` is zero.
    bit_clear: Vec<Vec<u64>>,
}

impl Search {
    /// Returns `None` when {1} ∪ fixed is linearly dependent, i.e. no block
    /// of W_k can contain `fixed`.
    pub(crate) fn new(ctx: &FieldContext, k: usize, fixed: &[FieldElement]) -> Option<Search> {
        debug_assert!(fixed.len() < k);
        let order = ctx.order();
        let mut base = SpanSet::new(order);
        base.extend(1);
        for &f in fixed {
            if base.contains(f.0) {
                return None;
            }
            base.extend(f.0);
        }
        let words = words_for(order);
        let bit_clear = (0..ctx.m())
            .map(|h| {
                let mut bs = vec![0u64; words];
                for x in (0..order).filter(|x| x >> h & 1 == 0) {
                    bs[(x >> 6) as usize] |= 1 << (x & 63);
                }
                bs
            })
            .collect();
        let mut fixed = fixed.to_vec();
        fixed.sort_unstable();
        let target = 1 ^ fixed.iter().fold(0, |acc, f| acc ^ f.0);
        Some(Search {
            order,
            free: k - 1 - fixed.len(),
            fixed,
            target,
            base,
            bit_clear,
        })
    }

    fn walker(&self) -> Walker<'_> {
        Walker {
            search: self,
            span: self.base.clone(),
            picks: Vec::with_capacity(self.free),
            block: Vec::with_capacity(self.fixed.len() + self.free + 1),
        }
    }

    /// Candidates for the smallest free element; the unit of parallel work.
    fn first_picks(&self) -> Vec<u32> {
        (2..self.order)
            .filter(|&x| !self.base.contains(x))
            .collect()
    }

    /// Sequential walk in canonical order (lexicographic when nothing is fixed).
    pub(crate) fn for_each(&self, mut visit: impl FnMut(&[FieldElement])) {
        let mut w = self.walker();
        if self.free == 0 {
            w.emit(self.target, &mut visit);
            return;
        }
        w.walk(2, 0, &mut visit);
    }

    pub(crate) fn count(&self) -> u64 {
        if self.free == 0 {
            return 1;
        }
        self.first_picks()
            .into_par_iter()
            .map_init(|| self.walker(), |w, x| w.count_from_first(x))
            .sum()
    }

    pub(crate) fn count_sequential(&self) -> u64 {
        if self.free == 0 {
            return 1;
        }
        let mut w = self.walker();
        self.first_picks()
            .into_iter()
            .map(|x| w.count_from_first(x))
            .sum()
    }

    /// Parallel walk partitioned by the smallest free element. Each worker
    /// folds into its own accumulator; accumulators are merged at the end.
    pub(crate) fn fold<A, I, F, M>(&self, init: I, accept: F, merge: M) -> A
    where
        A: Send,
        I: Fn() -> A + Sync + Send,
        F: Fn(&mut A, &[FieldElement]) + Sync + Send,
        M: Fn(A, A) -> A + Sync + Send,
    {
        if self.free == 0 {
            let mut acc = init();
            let mut w = self.walker();
            w.emit(self.target, &mut |b: &[FieldElement]| accept(&mut acc, b));
            return acc;
        }
        self.first_picks()
            .into_par_iter()
            .fold(
                || (self.walker(), init()),
                |(mut w, mut acc), x| {
                    w.walk_from_first(x, &mut |b: &[FieldElement]| accept(&mut acc, b));
                    (w, acc)
                },
            )
            .map(|(_, acc)| acc)
            .reduce(&init, &merge)
    }
}

struct Walker<'s> {
    search: &'s Search,
    span: SpanSet,
    picks: Vec<u32>,
    block: Vec<FieldElement>,
}

impl Walker<'_> {
    /// Assembles fixed ∪ picks ∪ {forced} in ascending order.
    #[inline]
    fn emit(&mut self, forced: u32, visit: &mut impl FnMut(&[FieldElement])) {
        let s = self.search;
        self.block.clear();
        self.block.extend_from_slice(&s.fixed);
        self.block
            .extend(self.picks.iter().map(|&x| FieldElement(x)));
        self.block.push(FieldElement(forced));
        if !s.fixed.is_empty() {
            self.block.sort_unstable();
        }
        visit(&self.block);
    }

    /// Elements `x >= start` outside the span whose pairing `t ^ x` exceeds `x`,
    /// i.e. whose bit at the top set position of `t` is clear.
    #[inline]
    fn leaf_word(&self, w: usize, start: u32, t: u32) -> u64 {
        let h = 31 - t.leading_zeros();
        let mut word = !self.span.word(w) & self.search.bit_clear[h as usize][w];
        let base = (w as u32) << 6;
        if start > base {
            let shift = start - base;
            word &= if shift >= 64 { 0 } else { !0u64 << shift };
        }
        word
    }

    fn count_leaves(&self, start: u32, t: u32) -> u64 {
        let words = words_for(self.search.order);
        let first = (start >> 6) as usize;
        (first..words)
            .map(|w| self.leaf_word(w, start, t).count_ones() as u64)
            .sum()
    }

    fn walk(&mut self, start: u32, partial: u32, visit: &mut impl FnMut(&[FieldElement])) {
        let s = self.search;
        let remaining = s.free - self.picks.len();
        let t = s.target ^ partial;
        if remaining == 1 {
            let words = words_for(s.order);
            for w in (start >> 6) as usize..words {
                let mut word = self.leaf_word(w, start, t);
                while word != 0 {
                    let x = ((w as u32) << 6) | word.trailing_zeros();
                    word &= word - 1;
                    self.picks.push(x);
                    self.emit(t ^ x, visit);
                    self.picks.pop();
                }
            }
            return;
        }
        for x in start..s.order {
            if self.span.contains(x) {
                continue;
            }
            let len = self.span.extend(x);
            self.picks.push(x);
            self.walk(x + 1, partial ^ x, visit);
            self.picks.pop();
            self.span.truncate(len);
        }
    }

    fn walk_from_first(&mut self, x: u32, visit: &mut impl FnMut(&[FieldElement])) {
        let s = self.search;
        if s.free == 1 {
            let forced = s.target ^ x;
            if forced > x {
                self.picks.push(x);
                self.emit(forced, visit);
                self.picks.pop();
            }
            return;
        }
        let len = self.span.extend(x);
        self.picks.push(x);
        self.walk(x + 1, x, visit);
        self.picks.pop();
        self.span.truncate(len);
    }

    /// Leaves below the pick `x` when exactly one free pick follows it,
    /// without inserting `x` into the span: the extended span is
    /// S ∪ (S + x), and S + x is built word by word.
    fn count_after_penultimate(&self, x: u32, partial: u32) -> u64 {
        let s = self.search;
        let t = s.target ^ partial ^ x;
        let h = 31 - t.leading_zeros();
        let clear = &s.bit_clear[h as usize];
        let start = x + 1;
        let (xh, xl) = ((x >> 6) as usize, x & 63);
        let words = words_for(s.order);
        let mut total = 0u64;
        for (w, &mask) in clear
            .iter()
            .enumerate()
            .take(words)
            .skip((start >> 6) as usize)
        {
            let shifted = xor_permute(self.span.word(w ^ xh), xl);
            let mut word = !self.span.word(w) & !shifted & mask;
            let base = (w as u32) << 6;
            if start > base {
                word &= !0u64 << (start - base);
            }
            total += word.count_ones() as u64;
        }
        total
    }

    fn count_walk(&mut self, start: u32, partial: u32) -> u64 {
        let s = self.search;
        let remaining = s.free - self.picks.len();
        if remaining == 1 {
            return self.count_leaves(start, s.target ^ partial);
        }
        if remaining == 2 {
            return (start..s.order)
                .filter(|&x| !self.span.contains(x))
                .map(|x| self.count_after_penultimate(x, partial))
                .sum();
        }
        let mut total = 0;
        for x in start..s.order {
            if self.span.contains(x) {
                continue;
            }
            let len = self.span.extend(x);
            self.picks.push(x);
            total += self.count_walk(x + 1, partial ^ x);
            self.picks.pop();
            self.span.truncate(len);
        }
        total
    }

    fn count_from_first(&mut self, x: u32) -> u64 {
        let s = self.search;
        if s.free == 1 {
            return u64::from(s.target ^ x > x);
        }
        if s.free == 2 {
            return self.count_after_penultimate(x, 0);
        }
        let len = self.span.extend(x);
        self.picks.push(x);
        let n = self.count_walk(x + 1, x);
        self.picks.pop();
        self.span.truncate(len);
        n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn span_extend_and_rollback() {
        let mut s = SpanSet::new(16);
        s.extend(1);
        let len = s.extend(6);
        assert!(s.contains(7) && s.contains(6) && s.contains(1) && s.contains(0));
        assert!(!s.contains(2));
        s.truncate(len);
        assert!(!s.contains(6) && !s.contains(7));
        assert!(s.contains(1));
    }

    #[test]
    fn xor_permute_moves_bits() {
        for c in 0..64u32 {
            for i in 0..64u32 {
                assert_eq!(xor_permute(1u64 << i, c), 1u64 << (i ^ c));
            }
        }
    }

    #[test]
    fn dependent_fixed_set_has_no_search() {
        let ctx = FieldContext::new(4).unwrap();
        // {a, a+1} sums to 1
        assert!(Search::new(&ctx, 4, &[FieldElement(6), FieldElement(7)]).is_none());
        assert!(Search::new(
            &ctx,
            4,
            &[FieldElement(6), FieldElement(5), FieldElement(3)]
        )
        .is_none());
    }

    #[test]
    fn sequential_parallel_and_fast_counts_agree() {
        let ctx = FieldContext::new(6).unwrap();
        for k in 3..=5 {
            let search = Search::new(&ctx, k, &[]).unwrap();
            let mut n = 0u64;
            search.for_each(|_| n += 1);
            assert_eq!(search.count(), n);
            assert_eq!(search.count_sequential(), n);
            let folded = search.fold(|| 0u64, |acc, _| *acc += 1, |a, b| a + b);
            assert_eq!(folded, n);
        }
    }
}
