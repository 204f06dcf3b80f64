//! Exact closed forms for λ_k, r_k, b_k and |τ_{α,k}|, and the identities
//! that tie them together.
//!
//! Everything here is arbitrary precision: b_7 at m = 20 already exceeds
//! 64 bits.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{GddError, Result};

/// Block sizes with a proved balance parameter; larger k are conjectured.
pub const PROVED_MAX_K: usize = 7;
/// Upper bound on m accepted by the closed forms (no tables involved).
pub const MAX_CLOSED_FORM_DEGREE: u32 = 1024;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClosedFormParams {
    pub m: u32,
    pub k: usize,
    #[serde(serialize_with = "as_decimal")]
    pub lambda: BigUint,
    #[serde(serialize_with = "as_decimal")]
    pub r: BigUint,
    #[serde(serialize_with = "as_decimal")]
    pub b: BigUint,
    /// Set for k > 7, where the values rest on the open conjecture.
    pub conjectured: bool,
}

pub(crate) fn as_decimal<S: serde::Serializer>(
    n: &BigUint,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(n)
}

fn check_range(m: u32, k: usize) -> Result<()> {
    if k < 3 {
        return Err(GddError::BlockSizeOutOfRange {
            k,
            m,
            reason: "blocks need k >= 3",
        });
    }
    if k > m as usize {
        return Err(GddError::BlockSizeOutOfRange {
            k,
            m,
            reason: "k must not exceed m",
        });
    }
    if m > MAX_CLOSED_FORM_DEGREE {
        return Err(GddError::DegreeOutOfRange {
            m,
            min: 3,
            max: MAX_CLOSED_FORM_DEGREE,
        });
    }
    Ok(())
}

fn pow2(e: u32) -> BigUint {
    BigUint::one() << e as usize
}

/// ∏_{i=lo}^{hi} (2^m - 2^i); empty products are 1. Requires hi <= m.
fn product(m: u32, lo: u32, hi: u32) -> BigUint {
    debug_assert!(hi <= m || lo > hi);
    (lo..=hi).fold(BigUint::one(), |acc, i| acc * (pow2(m) - pow2(i)))
}

fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

fn exact_div(num: BigUint, den: BigUint, what: &str) -> BigUint {
    let (q, r) = num.div_rem(&den);
    assert!(r.is_zero(), "{what} is not an integer");
    q
}

/// λ_k as the product ∏_{i=3}^{k-1}(2^m - 2^i) / (k-2)!, without range checks.
/// Valid for k <= m + 1, where k = m + 1 gives zero.
pub(crate) fn lambda_product(m: u32, k: usize) -> BigUint {
    exact_div(product(m, 3, k as u32 - 1), factorial(k - 2), "lambda")
}

/// Balance parameter λ_k = ∏_{i=3}^{k-1}(2^m - 2^i) / (k-2)!.
pub fn lambda_closed(m: u32, k: usize) -> Result<BigUint> {
    check_range(m, k)?;
    Ok(lambda_product(m, k))
}

/// Repetition number r_k = ∏_{i=2}^{k-1}(2^m - 2^i) / (k-1)!.
pub fn r_closed(m: u32, k: usize) -> Result<BigUint> {
    check_range(m, k)?;
    Ok(exact_div(
        product(m, 2, k as u32 - 1),
        factorial(k - 1),
        "r",
    ))
}

/// Block count b_k = ∏_{i=1}^{k-1}(2^m - 2^i) / k!.
pub fn b_closed(m: u32, k: usize) -> Result<BigUint> {
    check_range(m, k)?;
    Ok(exact_div(product(m, 1, k as u32 - 1), factorial(k), "b"))
}

/// |τ_{α,k}| for k in {4, 5, 6}.
pub fn tau_closed(m: u32, k: usize) -> Result<BigUint> {
    check_range(m, k)?;
    let (num, den) = match k {
        4 => (product(m, 3, 3), 2u32),
        5 => (product(m, 3, 4), 4),
        6 => (product(m, 3, 5), 12),
        _ => {
            return Err(GddError::BlockSizeOutOfRange {
                k,
                m,
                reason: "tau cardinalities are known only for k in 4..=6",
            })
        }
    };
    Ok(exact_div(num, BigUint::from(den), "tau"))
}

pub fn params(m: u32, k: usize) -> Result<ClosedFormParams> {
    Ok(ClosedFormParams {
        m,
        k,
        lambda: lambda_closed(m, k)?,
        r: r_closed(m, k)?,
        b: b_closed(m, k)?,
        conjectured: k > PROVED_MAX_K,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    #[serde(serialize_with = "signed_decimal")]
    pub lhs: BigInt,
    #[serde(serialize_with = "signed_decimal")]
    pub rhs: BigInt,
    pub holds: bool,
}

fn signed_decimal<S: serde::Serializer>(n: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(n)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    pub m: u32,
    pub k: usize,
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

/// Checks, in exact arithmetic and for every j in 3..=k:
/// λ_j (2^m-4) = r_j (j-1) and (2^m-2) r_j = b_j j, plus the
/// inclusion–exclusion recurrences for λ_4..λ_7 that apply at this k.
pub fn consistency_identities(m: u32, k: usize) -> Result<IdentityReport> {
    check_range(m, k)?;
    let big = |n: BigUint| BigInt::from(n);
    let v = BigInt::from(pow2(m)) - 2;
    let mut checks = Vec::new();
    let mut push = |name: String, lhs: BigInt, rhs: BigInt| {
        let holds = lhs == rhs;
        checks.push(IdentityCheck {
            name,
            lhs,
            rhs,
            holds,
        });
    };

    let lam = |j| lambda_closed(m, j).map(big);
    let r = |j| r_closed(m, j).map(big);
    let b = |j| b_closed(m, j).map(big);
    let tau = |j| tau_closed(m, j).map(big);

    for j in 3..=k {
        push(
            format!("lambda_{j}*(2^m-4) = r_{j}*({j}-1)"),
            lam(j)? * (&v - 2),
            r(j)? * (j - 1),
        );
        push(format!("r_{j}*(2^m-2) = b_{j}*{j}"), r(j)? * &v, b(j)? * j);
    }
    let upper = k.min(PROVED_MAX_K);
    if upper >= 4 {
        push(
            "lambda_4 = r_3 - 2 lambda_3".into(),
            lam(4)?,
            r(3)? - 2 * lam(3)?,
        );
    }
    if upper >= 5 {
        push(
            "lambda_5 = r_4 - 4 lambda_4".into(),
            lam(5)?,
            r(4)? - 4 * lam(4)?,
        );
    }
    if upper >= 6 {
        push(
            "lambda_6 = r_5 - 4 lambda_5 - 2 |tau_5|".into(),
            lam(6)?,
            r(5)? - 4 * lam(5)? - 2 * tau(5)?,
        );
    }
    if upper >= 7 {
        push(
            "lambda_7 = r_6 - 4 lambda_6 - 4 |tau_6|".into(),
            lam(7)?,
            r(6)? - 4 * lam(6)? - 4 * tau(6)?,
        );
    }
    Ok(IdentityReport { m, k, checks })
}
