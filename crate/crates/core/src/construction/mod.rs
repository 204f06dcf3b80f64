//! The group set W_2, the block sets W_k and the Ω/ω/τ families.
//!
//! A block of W_k is a k-subset of X = GF(2^m) \ {0, 1} whose elements sum
//! to 1 while no nonempty proper subset does. Blocks are canonical: elements
//! strictly ascending by bitmask.

mod omega;
pub(crate) mod search;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{GddError, Result};
use crate::gf2m::{FieldContext, FieldElement, Notation};
use search::Search;

pub use omega::{count_omega_tau, partition_omega_tau, OmegaTauCounts, OmegaTauDecomposition};

/// Largest block size for which [`is_valid_block`] scans every proper subset.
pub const MAX_SCAN_BLOCK: usize = 20;

/// A canonical block: strictly ascending, distinct elements of X.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Block(Vec<FieldElement>);

impl Block {
    /// Builds a block from any arrangement of elements, sorting them.
    /// Does not check the sum conditions; see [`is_valid_block`].
    pub fn from_elements(mut elements: Vec<FieldElement>) -> Self {
        elements.sort_unstable();
        elements.dedup();
        Block(elements)
    }

    pub(crate) fn from_sorted(elements: &[FieldElement]) -> Self {
        debug_assert!(elements.windows(2).all(|w| w[0] < w[1]));
        Block(elements.to_vec())
    }

    pub fn elements(&self) -> &[FieldElement] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, a: FieldElement) -> bool {
        self.0.binary_search(&a).is_ok()
    }

    pub fn sum(&self) -> FieldElement {
        self.0.iter().copied().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = FieldElement> + '_ {
        self.0.iter().copied()
    }

    pub fn format(&self, ctx: &FieldContext, style: Notation) -> Result<String> {
        Ok(format!("{{{}}}", ctx.format_all(&self.0, style, ", ")?))
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|a| a.to_string()).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// A group {a, a+1}. Adding 1 flips bit 0, so `low` is always even.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Group {
    pub low: FieldElement,
    pub high: FieldElement,
}

impl Group {
    pub fn of(a: FieldElement) -> Group {
        let low = FieldElement(a.0 & !1);
        Group {
            low,
            high: FieldElement(low.0 | 1),
        }
    }

    pub fn contains(&self, a: FieldElement) -> bool {
        a == self.low || a == self.high
    }

    pub fn elements(&self) -> [FieldElement; 2] {
        [self.low, self.high]
    }
}

/// W_2: the pairs {a, a+1} partitioning X.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSet {
    groups: Vec<Group>,
}

impl GroupSet {
    /// Takes arbitrary pairs; used when re-importing exported designs.
    pub fn from_groups(mut groups: Vec<Group>) -> Self {
        groups.sort_unstable();
        GroupSet { groups }
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// `true` when `a` and `b` lie in the same group.
    pub fn same_group(&self, a: FieldElement, b: FieldElement) -> bool {
        a != b && self.groups.iter().any(|g| g.contains(a) && g.contains(b))
    }
}

pub fn group_set(ctx: &FieldContext) -> GroupSet {
    let groups = ctx.point_set().step_by(2).map(Group::of).collect();
    GroupSet { groups }
}

pub(crate) fn check_block_size(ctx: &FieldContext, k: usize, min: usize) -> Result<()> {
    let m = ctx.m();
    if k < min {
        return Err(GddError::BlockSizeOutOfRange {
            k,
            m,
            reason: if min == 3 {
                "blocks need k >= 3"
            } else {
                "k is below the minimum for this operation"
            },
        });
    }
    if k > m as usize {
        return Err(GddError::BlockSizeOutOfRange {
            k,
            m,
            reason: "k must not exceed m",
        });
    }
    Ok(())
}

/// The block predicate: `|candidate| = k`, every element in X, total sum 1,
/// and no nonempty proper subset summing to 1.
///
/// Scans all `2^k - 2` proper subset sums in Gray-code order.
pub fn is_valid_block(ctx: &FieldContext, candidate: &[FieldElement], k: usize) -> Result<bool> {
    check_block_size(ctx, k, 2)?;
    for &a in candidate {
        ctx.check(a)?;
    }
    if candidate.len() != k || k > MAX_SCAN_BLOCK {
        return Ok(false);
    }
    if candidate.iter().any(|&a| !ctx.in_point_set(a)) {
        return Ok(false);
    }
    let total: FieldElement = candidate.iter().copied().sum();
    if total != FieldElement::ONE {
        return Ok(false);
    }
    let full = (1u32 << k) - 1;
    let mut sum = 0u32;
    for i in 1..=full {
        // Gray code step: toggle the element at the lowest set bit of i.
        sum ^= candidate[i.trailing_zeros() as usize].0;
        let mask = i ^ (i >> 1);
        if sum == 1 && mask != full {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Receives canonical blocks. Parallel producers give each worker its own
/// sink and merge them afterwards, so a sink must not depend on arrival order.
pub trait BlockSink: Send {
    fn accept(&mut self, block: &[FieldElement]);
    fn merge(&mut self, other: Self)
    where
        Self: Sized;
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CountSink(pub u64);

impl BlockSink for CountSink {
    fn accept(&mut self, _block: &[FieldElement]) {
        self.0 += 1;
    }

    fn merge(&mut self, other: Self) {
        self.0 += other.0;
    }
}

/// Materializes blocks. Arrival order is arbitrary; call
/// [`CollectSink::into_sorted`] for the canonical listing.
#[derive(Clone, Debug, Default)]
pub struct CollectSink(pub Vec<Block>);

impl CollectSink {
    pub fn into_sorted(mut self) -> Vec<Block> {
        self.0.sort_unstable();
        self.0
    }
}

impl BlockSink for CollectSink {
    fn accept(&mut self, block: &[FieldElement]) {
        self.0.push(Block::from_sorted(block));
    }

    fn merge(&mut self, mut other: Self) {
        self.0.append(&mut other.0);
    }
}

fn wk_search(ctx: &FieldContext, k: usize) -> Result<Search> {
    check_block_size(ctx, k, 3)?;
    Ok(Search::new(ctx, k, &[]).expect("{1} is independent"))
}

/// Streams every block of W_k once, in canonical (lexicographic) order, on
/// the calling thread. Returns the number of blocks.
pub fn enumerate_wk<S: BlockSink>(ctx: &FieldContext, k: usize, sink: &mut S) -> Result<u64> {
    let search = wk_search(ctx, k)?;
    let mut n = 0u64;
    search.for_each(|b| {
        n += 1;
        sink.accept(b);
    });
    Ok(n)
}

/// Parallel enumeration of W_k partitioned by the smallest block element.
/// Every worker gets a sink from `make`; the merged sink is returned.
pub fn par_enumerate_wk<S, F>(ctx: &FieldContext, k: usize, make: F) -> Result<S>
where
    S: BlockSink,
    F: Fn() -> S + Sync + Send,
{
    let search = wk_search(ctx, k)?;
    Ok(search.fold(
        make,
        |s, b| s.accept(b),
        |mut a, b| {
            a.merge(b);
            a
        },
    ))
}

/// `|W_k|` without visiting individual blocks.
pub fn count_wk(ctx: &FieldContext, k: usize) -> Result<u64> {
    Ok(wk_search(ctx, k)?.count())
}

/// W_k in canonical order.
pub fn collect_wk(ctx: &FieldContext, k: usize) -> Result<Vec<Block>> {
    Ok(par_enumerate_wk(ctx, k, CollectSink::default)?.into_sorted())
}

/// Two points u ≠ v of X from different groups, with z = u + v and
/// S = {u, v, u+1, v+1}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PairContext {
    pub u: FieldElement,
    pub v: FieldElement,
    pub z: FieldElement,
}

impl PairContext {
    pub fn new(ctx: &FieldContext, u: FieldElement, v: FieldElement) -> Result<Self> {
        ctx.check(u)?;
        ctx.check(v)?;
        let invalid = |reason| GddError::InvalidPair { u, v, reason };
        if !ctx.in_point_set(u) || !ctx.in_point_set(v) {
            return Err(invalid("both elements must lie in X"));
        }
        if u == v {
            return Err(invalid("elements must be distinct"));
        }
        if u + v == FieldElement::ONE {
            return Err(invalid("the pair is a group"));
        }
        Ok(PairContext { u, v, z: u + v })
    }

    /// S = [u, v, u+1, v+1], in that order.
    pub fn s_set(&self) -> [FieldElement; 4] {
        [
            self.u,
            self.v,
            self.u + FieldElement::ONE,
            self.v + FieldElement::ONE,
        ]
    }

    /// The partner of α in the relations of the form X_α = X_{α+u+v+1}.
    pub fn partner(&self, alpha: FieldElement) -> FieldElement {
        alpha + self.z + FieldElement::ONE
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairMode {
    Count,
    Collect,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PairBlocks {
    Count(u64),
    Blocks(BTreeSet<Block>),
}

impl PairBlocks {
    pub fn count(&self) -> u64 {
        match self {
            PairBlocks::Count(n) => *n,
            PairBlocks::Blocks(b) => b.len() as u64,
        }
    }
}

fn pair_search(ctx: &FieldContext, k: usize, pc: &PairContext) -> Result<Search> {
    check_block_size(ctx, k, 3)?;
    let pc = PairContext::new(ctx, pc.u, pc.v)?;
    Ok(Search::new(ctx, k, &[pc.u, pc.v]).expect("valid pair is independent of 1"))
}

/// Blocks of W_k containing both u and v. Enumerates the k-3 remaining free
/// elements directly; W_k is never materialized.
pub fn blocks_through_pair(
    ctx: &FieldContext,
    k: usize,
    pc: &PairContext,
    mode: PairMode,
) -> Result<PairBlocks> {
    let search = pair_search(ctx, k, pc)?;
    Ok(match mode {
        PairMode::Count => PairBlocks::Count(search.count()),
        PairMode::Collect => {
            let all = search.fold(
                CollectSink::default,
                |s, b| s.accept(b),
                |mut a, b| {
                    a.merge(b);
                    a
                },
            );
            PairBlocks::Blocks(all.0.into_iter().collect())
        }
    })
}

/// λ(u, v) for one pair, counted on the calling thread only.
pub fn count_blocks_through_pair_sequential(
    ctx: &FieldContext,
    k: usize,
    pc: &PairContext,
) -> Result<u64> {
    Ok(pair_search(ctx, k, pc)?.count_sequential())
}

pub fn count_blocks_through_pair(ctx: &FieldContext, k: usize, pc: &PairContext) -> Result<u64> {
    Ok(pair_search(ctx, k, pc)?.count())
}

/// Blocks of W_k containing `z`, folded in parallel.
pub(crate) fn fold_blocks_through_element<A, I, F, M>(
    ctx: &FieldContext,
    k: usize,
    z: FieldElement,
    init: I,
    accept: F,
    merge: M,
) -> Result<A>
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    F: Fn(&mut A, &[FieldElement]) + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    check_block_size(ctx, k, 3)?;
    if !ctx.in_point_set(z) {
        return Err(GddError::UniverseMismatch(format!(
            "{z} is not a point of X"
        )));
    }
    let search = Search::new(ctx, k, &[z]).expect("a point of X is independent of 1");
    Ok(search.fold(init, accept, merge))
}

/// Number of blocks of W_k containing `z` (the repetition number at `z`).
pub fn count_blocks_through_element(ctx: &FieldContext, k: usize, z: FieldElement) -> Result<u64> {
    check_block_size(ctx, k, 3)?;
    if !ctx.in_point_set(z) {
        return Err(GddError::UniverseMismatch(format!(
            "{z} is not a point of X"
        )));
    }
    Ok(Search::new(ctx, k, &[z]).expect("independent").count())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(ctx: &FieldContext, i: u64) -> FieldElement {
        ctx.exp(i)
    }

    fn block(ctx: &FieldContext, exps: &[u64]) -> Block {
        Block::from_elements(exps.iter().map(|&i| g(ctx, i)).collect())
    }

    #[test]
    fn group_set_m3_golden() {
        let ctx = FieldContext::new(3).unwrap();
        let gs = group_set(&ctx);
        let got: BTreeSet<BTreeSet<FieldElement>> = gs
            .groups()
            .iter()
            .map(|grp| grp.elements().into_iter().collect())
            .collect();
        let want: BTreeSet<BTreeSet<FieldElement>> = [[1, 3], [2, 6], [4, 5]]
            .iter()
            .map(|p| p.iter().map(|&i| g(&ctx, i)).collect())
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn group_set_sizes_and_partition() {
        for m in 3..=10 {
            let ctx = FieldContext::new(m).unwrap();
            let gs = group_set(&ctx);
            assert_eq!(gs.len(), ((1usize << m) - 2) / 2);
            let mut seen = BTreeSet::new();
            for grp in gs.groups() {
                assert_eq!(grp.low + grp.high, FieldElement::ONE);
                assert!(seen.insert(grp.low) && seen.insert(grp.high));
            }
            assert!(seen.iter().copied().eq(ctx.point_set()));
        }
        let f4 = FieldContext::new(4).unwrap();
        assert!(group_set(&f4).same_group(g(&f4, 1), g(&f4, 4)));
        assert!(!group_set(&f4).same_group(g(&f4, 1), g(&f4, 2)));
    }

    #[test]
    fn predicate_examples() {
        let f3 = FieldContext::new(3).unwrap();
        assert!(is_valid_block(&f3, block(&f3, &[1, 2, 5]).elements(), 3).unwrap());
        assert!(!is_valid_block(&f3, block(&f3, &[1, 3, 2]).elements(), 3).unwrap());
        let f4 = FieldContext::new(4).unwrap();
        assert!(is_valid_block(&f4, block(&f4, &[5, 1, 3, 13]).elements(), 4).unwrap());
        // contains the group {γ, γ^4}
        assert!(!is_valid_block(&f4, block(&f4, &[1, 4, 2, 8]).elements(), 4).unwrap());
        assert!(is_valid_block(&f4, &[g(&f4, 1)], 5).is_err());
        assert!(is_valid_block(&f4, &[FieldElement(16)], 3).is_err());
        assert!(
            !is_valid_block(&f4, &[FieldElement(1), FieldElement(2), FieldElement(2)], 3).unwrap()
        );
        // wrong size
        assert!(!is_valid_block(&f4, block(&f4, &[1, 2]).elements(), 3).unwrap());
        // groups are valid 2-blocks
        assert!(is_valid_block(&f4, &[FieldElement(6), FieldElement(7)], 2).unwrap());
    }

    #[test]
    fn wk_m3_golden() {
        let ctx = FieldContext::new(3).unwrap();
        let got: BTreeSet<Block> = collect_wk(&ctx, 3).unwrap().into_iter().collect();
        let want: BTreeSet<Block> = [[1, 2, 5], [1, 6, 4], [3, 2, 4], [3, 6, 5]]
            .iter()
            .map(|e| block(&ctx, e))
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn sequential_stream_is_canonical_and_valid() {
        let ctx = FieldContext::new(5).unwrap();
        for k in 3..=5 {
            let mut all = CollectSink::default();
            let n = enumerate_wk(&ctx, k, &mut all).unwrap();
            assert_eq!(n as usize, all.0.len());
            assert!(all.0.windows(2).all(|w| w[0] < w[1]), "strictly increasing");
            for b in &all.0 {
                assert!(is_valid_block(&ctx, b.elements(), k).unwrap());
            }
        }
    }

    #[test]
    fn counts_small_cases() {
        let f4 = FieldContext::new(4).unwrap();
        assert_eq!(count_wk(&f4, 4).unwrap(), 56);
        let f5 = FieldContext::new(5).unwrap();
        assert_eq!(count_wk(&f5, 3).unwrap(), 140);
        assert!(count_wk(&f4, 5).is_err());
        assert!(count_wk(&f4, 2).is_err());
    }

    #[test]
    fn through_pair_examples() {
        let f3 = FieldContext::new(3).unwrap();
        let pc = PairContext::new(&f3, g(&f3, 1), g(&f3, 2)).unwrap();
        let PairBlocks::Blocks(b) = blocks_through_pair(&f3, 3, &pc, PairMode::Collect).unwrap()
        else {
            panic!()
        };
        assert_eq!(
            b.into_iter().collect::<Vec<_>>(),
            vec![block(&f3, &[1, 2, 5])]
        );

        let f4 = FieldContext::new(4).unwrap();
        let pc = PairContext::new(&f4, g(&f4, 1), g(&f4, 2)).unwrap();
        assert_eq!(count_blocks_through_pair(&f4, 4, &pc).unwrap(), 4);

        let f5 = FieldContext::new(5).unwrap();
        let pc = PairContext::new(&f5, g(&f5, 3), g(&f5, 17)).unwrap();
        assert_eq!(count_blocks_through_pair(&f5, 5, &pc).unwrap(), 64);
        assert_eq!(
            count_blocks_through_pair_sequential(&f5, 5, &pc).unwrap(),
            64
        );
    }

    #[test]
    fn invalid_pairs() {
        let f4 = FieldContext::new(4).unwrap();
        let a = g(&f4, 1);
        assert!(PairContext::new(&f4, a, a).is_err());
        assert!(PairContext::new(&f4, a, a + FieldElement::ONE).is_err());
        assert!(PairContext::new(&f4, a, FieldElement::ONE).is_err());
        assert!(PairContext::new(&f4, a, FieldElement(99)).is_err());
        let bogus = PairContext {
            u: a,
            v: a,
            z: FieldElement::ZERO,
        };
        assert!(count_blocks_through_pair(&f4, 4, &bogus).is_err());
    }
}
