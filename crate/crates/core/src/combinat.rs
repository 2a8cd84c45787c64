//! Weak compositions and multinomial coefficients.
//!
//! Row `w` of a power `A^k` collects the weak compositions
//! `(p_1, ..., p_n)` of `k` whose *weight* `p_2 + 2 p_3 + ... + (n-1) p_n`
//! equals `w`. The enumerators here produce exactly those index sets.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};

/// An ordered tuple of nonnegative integers with a prescribed sum.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WeakComposition {
    parts: Vec<u64>,
}

impl WeakComposition {
    pub fn new(parts: Vec<u64>) -> Self {
        WeakComposition { parts }
    }

    pub fn parts(&self) -> &[u64] {
        &self.parts
    }

    pub fn total(&self) -> u64 {
        self.parts.iter().sum()
    }

    /// Shift degree contributed by the composition: `sum_j j * parts[j]` (0-based `j`).
    pub fn weight(&self) -> u64 {
        self.parts
            .iter()
            .enumerate()
            .map(|(j, &p)| j as u64 * p)
            .sum()
    }
}

/// Lexicographically ordered stream of the weak compositions of `k` into `n` parts.
#[derive(Debug, Clone)]
pub struct WeakCompositions {
    current: Option<Vec<u64>>,
}

impl Iterator for WeakCompositions {
    type Item = WeakComposition;

    fn next(&mut self) -> Option<WeakComposition> {
        let parts = self.current.take()?;
        let n = parts.len();
        // advance: bump the rightmost position that still has mass to its right
        let mut suffix = 0u64;
        let mut next = None;
        for i in (0..n.saturating_sub(1)).rev() {
            suffix += parts[i + 1];
            if suffix > 0 {
                let mut p = parts.clone();
                p[i] += 1;
                for slot in p.iter_mut().take(n - 1).skip(i + 1) {
                    *slot = 0;
                }
                p[n - 1] = suffix - 1;
                next = Some(p);
                break;
            }
        }
        self.current = next;
        Some(WeakComposition { parts })
    }
}

/// Every weak composition of `k` into `n >= 1` parts, in lexicographic order.
pub fn weak_compositions(k: u64, n: usize) -> WeakCompositions {
    if n == 0 {
        return WeakCompositions { current: None };
    }
    let mut first = vec![0; n];
    first[n - 1] = k;
    WeakCompositions {
        current: Some(first),
    }
}

/// Weak compositions of `k` into `n` parts of weight exactly `w`, in lexicographic order.
///
/// Only the tail `parts[1..]` is searched (it forms a partition of `w` with
/// part sizes `1..n`), so the cost depends on `w` and `n` but not on `k`.
pub fn compositions_with_weight(k: u64, n: usize, w: u64) -> Vec<WeakComposition> {
    if n == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut tail = vec![0u64; n];
    fill_tail(n - 1, w, k, &mut tail, &mut out);
    out.sort();
    out
}

fn fill_tail(j: usize, remaining: u64, budget: u64, tail: &mut [u64], out: &mut Vec<WeakComposition>) {
    if j == 0 {
        if remaining == 0 {
            let mut parts = tail.to_vec();
            parts[0] = budget;
            out.push(WeakComposition { parts });
        }
        return;
    }
    let max = (remaining / j as u64).min(budget);
    for p in 0..=max {
        tail[j] = p;
        fill_tail(j - 1, remaining - p * j as u64, budget - p, tail, out);
    }
    tail[j] = 0;
}

/// Binomial coefficient as a big integer.
pub fn binomial(n: u64, r: u64) -> BigUint {
    if r > n {
        return BigUint::default();
    }
    let r = r.min(n - r);
    let mut acc = BigUint::one();
    for i in 0..r {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// A multinomial coefficient with a cached natural logarithm.
#[derive(Debug, Clone, PartialEq)]
pub struct Multinomial {
    value: BigUint,
    ln: f64,
}

impl Multinomial {
    pub fn new(value: BigUint) -> Self {
        let ln = ln_biguint(&value);
        Multinomial { value, ln }
    }

    pub fn one() -> Self {
        Multinomial {
            value: BigUint::one(),
            ln: 0.0,
        }
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    /// Natural log of the value; finite even when the value overflows `f64`.
    pub fn ln(&self) -> f64 {
        self.ln
    }

    /// Product of two coefficients (used by the m-fold product expansion).
    pub fn product(&self, other: &Multinomial) -> Multinomial {
        Multinomial {
            value: &self.value * &other.value,
            ln: self.ln + other.ln,
        }
    }
}

fn ln_biguint(v: &BigUint) -> f64 {
    let bits = v.bits();
    if bits < 1000 {
        return v.to_f64().map_or(f64::INFINITY, f64::ln);
    }
    let shift = bits - 64;
    let top = (v >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `k! / prod(parts[i]!)`.
pub fn multinomial(k: u64, parts: &[u64]) -> Result<Multinomial> {
    let sum: u64 = parts.iter().sum();
    if sum != k {
        return Err(Error::PartsSumMismatch { total: k, sum });
    }
    // product of binomials C(p_1, p_1) C(p_1 + p_2, p_2) ...
    let mut acc = BigUint::one();
    let mut running = 0u64;
    for &p in parts {
        running += p;
        acc *= binomial(running, p);
    }
    Ok(Multinomial::new(acc))
}
