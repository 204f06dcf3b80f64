use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{fold_blocks_through_element, Block, PairContext};
use crate::error::Result;
use crate::gf2m::{FieldContext, FieldElement};

/// Ω_{z,k} and its ω/τ subfamilies for one pair context.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OmegaTauDecomposition {
    pub pair: PairContext,
    pub k: usize,
    /// Ω_{z,k}: blocks of W_k containing z.
    pub omega_big: BTreeSet<Block>,
    /// ω_{α,k}: blocks of Ω_{z,k} that also contain α.
    pub omega: BTreeMap<FieldElement, BTreeSet<Block>>,
    /// τ_{α,k}: blocks of Ω_{z,k} with two elements other than z summing to α.
    pub tau: BTreeMap<FieldElement, BTreeSet<Block>>,
}

impl OmegaTauDecomposition {
    pub fn omega_of(&self, alpha: FieldElement) -> &BTreeSet<Block> {
        &self.omega[&alpha]
    }

    pub fn tau_of(&self, alpha: FieldElement) -> &BTreeSet<Block> {
        &self.tau[&alpha]
    }

    /// Blocks of Ω_{z,k} in no ω or τ set.
    pub fn remainder(&self) -> BTreeSet<Block> {
        self.omega_big
            .iter()
            .filter(|b| {
                !self.omega.values().any(|s| s.contains(*b))
                    && !self.tau.values().any(|s| s.contains(*b))
            })
            .cloned()
            .collect()
    }
}

/// Membership of one Ω block in the ω and τ sets, as bitmasks over the
/// positions of S = [u, v, u+1, v+1].
#[inline]
fn classify(block: &[FieldElement], pc: &PairContext) -> (u8, u8) {
    let s = pc.s_set();
    let mut in_omega = 0u8;
    let mut in_tau = 0u8;
    let rest = block.iter().copied().filter(|&a| a != pc.z);
    for (i, &alpha) in s.iter().enumerate() {
        if block.contains(&alpha) {
            in_omega |= 1 << i;
        }
    }
    let rest: Vec<FieldElement> = rest.collect();
    for (i, &a) in rest.iter().enumerate() {
        for &b in &rest[i + 1..] {
            let sum = a + b;
            for (j, &alpha) in s.iter().enumerate() {
                if sum == alpha {
                    in_tau |= 1 << j;
                }
            }
        }
    }
    (in_omega, in_tau)
}

/// Materializes Ω_{z,k}, ω_{α,k} and τ_{α,k} for every α in S.
pub fn partition_omega_tau(
    ctx: &FieldContext,
    k: usize,
    pc: &PairContext,
) -> Result<OmegaTauDecomposition> {
    let pc = PairContext::new(ctx, pc.u, pc.v)?;
    let blocks = fold_blocks_through_element(
        ctx,
        k,
        pc.z,
        Vec::new,
        |acc: &mut Vec<Block>, b| acc.push(Block::from_sorted(b)),
        |mut a, mut b| {
            a.append(&mut b);
            a
        },
    )?;
    let s = pc.s_set();
    let mut omega: BTreeMap<FieldElement, BTreeSet<Block>> =
        s.iter().map(|&a| (a, BTreeSet::new())).collect();
    let mut tau = omega.clone();
    for b in &blocks {
        let (in_omega, in_tau) = classify(b.elements(), &pc);
        for (i, alpha) in s.iter().enumerate() {
            if in_omega >> i & 1 == 1 {
                omega.get_mut(alpha).unwrap().insert(b.clone());
            }
            if in_tau >> i & 1 == 1 {
                tau.get_mut(alpha).unwrap().insert(b.clone());
            }
        }
    }
    Ok(OmegaTauDecomposition {
        pair: pc,
        k,
        omega_big: blocks.into_iter().collect(),
        omega,
        tau,
    })
}

/// Cardinalities of the Ω/ω/τ families, indexed like [`PairContext::s_set`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OmegaTauCounts {
    pub omega_big: u64,
    pub omega: [u64; 4],
    pub tau: [u64; 4],
    /// Blocks in no ω or τ set.
    pub remainder: u64,
    /// Blocks lying in two or more of the eight ω/τ sets.
    pub overlapping: u64,
}

impl OmegaTauCounts {
    fn merge(mut self, other: Self) -> Self {
        self.omega_big += other.omega_big;
        self.remainder += other.remainder;
        self.overlapping += other.overlapping;
        for i in 0..4 {
            self.omega[i] += other.omega[i];
            self.tau[i] += other.tau[i];
        }
        self
    }
}

/// Streaming version of [`partition_omega_tau`] that only keeps counts.
pub fn count_omega_tau(ctx: &FieldContext, k: usize, pc: &PairContext) -> Result<OmegaTauCounts> {
    let pc = PairContext::new(ctx, pc.u, pc.v)?;
    fold_blocks_through_element(
        ctx,
        k,
        pc.z,
        OmegaTauCounts::default,
        |acc: &mut OmegaTauCounts, b| {
            let (in_omega, in_tau) = classify(b, &pc);
            acc.omega_big += 1;
            for i in 0..4 {
                acc.omega[i] += u64::from(in_omega >> i & 1);
                acc.tau[i] += u64::from(in_tau >> i & 1);
            }
            match in_omega.count_ones() + in_tau.count_ones() {
                0 => acc.remainder += 1,
                1 => {}
                _ => acc.overlapping += 1,
            }
        },
        OmegaTauCounts::merge,
    )
}
