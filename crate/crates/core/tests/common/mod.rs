//! Reference implementations that share no code with the library: naive
//! polynomial arithmetic, literal subset scans and u128 closed forms.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

/// Least irreducible modulus of degree m with x primitive, found by trial.
pub fn naive_modulus(m: u32) -> u32 {
    (1u32 << m | 1..1 << (m + 1))
        .step_by(2)
        .find(|&f| x_is_primitive(f, m))
        .expect("a primitive polynomial exists")
}

fn x_is_primitive(f: u32, m: u32) -> bool {
    let order = (1u32 << m) - 1;
    let mut a = 1u32;
    for i in 1..=order {
        a = naive_mul(a, 2, f, m);
        if a == 1 {
            return i == order;
        }
    }
    false
}

/// Shift-and-add multiplication modulo `f`.
pub fn naive_mul(mut a: u32, mut b: u32, f: u32, m: u32) -> u32 {
    let mut acc = 0;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a >> m & 1 == 1 {
            a ^= f;
        }
    }
    acc
}

/// Bitmask of x^i for i in 0..2^m-1.
pub fn naive_powers(m: u32, f: u32) -> Vec<u32> {
    let mut out = vec![1u32];
    for _ in 1..(1u32 << m) - 1 {
        out.push(naive_mul(*out.last().unwrap(), 2, f, m));
    }
    out
}

/// Maps "g^i" listings to bitmasks for the field with modulus `f`.
pub fn from_powers(m: u32, f: u32, exps: &[u32]) -> Vec<u32> {
    let pw = naive_powers(m, f);
    let mut v: Vec<u32> = exps.iter().map(|&i| pw[i as usize]).collect();
    v.sort_unstable();
    v
}

pub fn combinations(n: &[u32], k: usize) -> Vec<Vec<u32>> {
    fn go(n: &[u32], k: usize, start: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n.len() {
            if n.len() - i < k - cur.len() {
                break;
            }
            cur.push(n[i]);
            go(n, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, k, 0, &mut Vec::new(), &mut out);
    out
}

/// No nonempty proper subset sums to 1, and the whole block does.
pub fn all_subsets_valid(block: &[u32]) -> bool {
    let k = block.len();
    let sum_of = |mask: u32| {
        (0..k)
            .filter(|i| mask >> i & 1 == 1)
            .fold(0, |s, i| s ^ block[i])
    };
    let full = (1u32 << k) - 1;
    sum_of(full) == 1 && (1..full).all(|mask| sum_of(mask) != 1)
}

/// Literal recursive membership in W_k: the block sums to 1 and no
/// ℓ-subset with 2 <= ℓ <= k-3 belongs to W_ℓ.
pub struct RecursiveWk {
    memo: HashMap<Vec<u32>, bool>,
}

impl RecursiveWk {
    pub fn new() -> Self {
        RecursiveWk {
            memo: HashMap::new(),
        }
    }

    pub fn member(&mut self, block: &[u32]) -> bool {
        let mut key = block.to_vec();
        key.sort_unstable();
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let sum = key.iter().fold(0, |s, a| s ^ a);
        let distinct = key.windows(2).all(|w| w[0] != w[1]);
        let k = key.len();
        let mut ok = sum == 1 && distinct && key.iter().all(|&a| a >= 2);
        if ok && k >= 5 {
            'outer: for l in 2..=k - 3 {
                for sub in combinations(&key, l) {
                    if self.member(&sub) {
                        ok = false;
                        break 'outer;
                    }
                }
            }
        }
        self.memo.insert(key, ok);
        ok
    }
}

/// W_k by scanning every k-subset of X with the literal definition.
pub fn brute_wk(m: u32, k: usize) -> BTreeSet<Vec<u32>> {
    let x: Vec<u32> = (2..1u32 << m).collect();
    let mut def = RecursiveWk::new();
    combinations(&x, k)
        .into_iter()
        .filter(|b| def.member(b))
        .collect()
}

fn prod_range(m: u32, lo: u32, hi: u32) -> u128 {
    (lo..=hi).map(|i| (1u128 << m) - (1u128 << i)).product()
}

fn fact(n: u32) -> u128 {
    (1..=n as u128).product()
}

/// λ_k = Π_{i=3}^{k-1}(2^m - 2^i) / (k-2)!
pub fn lambda(m: u32, k: u32) -> u128 {
    prod_range(m, 3, k - 1) / fact(k - 2)
}

pub fn r(m: u32, k: u32) -> u128 {
    prod_range(m, 2, k - 1) / fact(k - 1)
}

pub fn b(m: u32, k: u32) -> u128 {
    prod_range(m, 1, k - 1) / fact(k)
}

pub fn tau(m: u32, k: u32) -> u128 {
    let den = match k {
        4 => 2,
        5 => 4,
        6 => 12,
        _ => panic!("tau only for k in 4..=6"),
    };
    prod_range(m, 3, k - 1) / den
}

/// Number of cross-group pairs of X.
pub fn cross_pairs(m: u32) -> u64 {
    let v = (1u64 << m) - 2;
    v * (v - 1) / 2 - v / 2
}

/// Path of the built CLI.
pub fn gdd_bin() -> &'static str {
    env!("CARGO_BIN_EXE_gdd")
}
