//! Entries of `A^k` and of `A_1^{k_1} ... A_m^{k_m}`.
//!
//! Since every member is a polynomial in the shift `U_1`, the product is
//! again upper triangular Toeplitz and is fixed by its first row
//! `(c_1(k), ..., c_n(k))`. Expanding each power with the multinomial
//! theorem, entry `w` (0-based) collects the terms whose total shift
//! degree is exactly `w`:
//!
//! ```text
//! c_{w+1}(k) = sum over per-member weak compositions (p_{j,1..n}) of k_j
//!              with sum_j weight(p_j) = w  of
//!              prod_j  multinomial(k_j; p_j) * prod_i a_{j,i}^{p_{j,i}}
//! ```
//!
//! Three independent routes are provided:
//!
//! * [`product_entries`]: the literal multinomial sum above;
//! * [`product_entries_oracle`]: repeated squaring folded with Toeplitz products;
//! * [`lemma_forms`]: hand-derived closed forms for `n <= 4`, in both the
//!   combinatorial ("raw") layout and the logarithmic ("regrouped") layout.
//!
//! [`product_entries_incremental`] is the `O(n^2)`-per-step recurrence used
//! for long orbits.

use crate::combinat::{compositions_with_weight, multinomial, Multinomial, WeakComposition};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::toeplitz::ToeplitzCoeffs;
use crate::tuple::{MultiIndex, TupleSpec};

/// First row `(c_1(k), ..., c_n(k))` of a product of Toeplitz powers.
pub type ProductEntries<S> = ToeplitzCoeffs<S>;

struct WeightedTerms {
    // by_weight[w] = compositions of weight w with their multinomial coefficient
    by_weight: Vec<Vec<(WeakComposition, Multinomial)>>,
}

impl WeightedTerms {
    fn new(k: u64, n: usize) -> Self {
        let by_weight = (0..n as u64)
            .map(|w| {
                compositions_with_weight(k, n, w)
                    .into_iter()
                    .map(|c| {
                        let m = multinomial(k, c.parts()).expect("composition sums to k");
                        (c, m)
                    })
                    .collect()
            })
            .collect();
        WeightedTerms { by_weight }
    }
}

/// Entries of `A^k` from the multinomial expansion of `(sum_j a_j U_{j-1})^k`.
pub fn pow_entries_multinomial<S: Scalar>(a: &ToeplitzCoeffs<S>, k: u64) -> ProductEntries<S> {
    let n = a.dim();
    let terms = WeightedTerms::new(k, n);
    let coeffs = terms
        .by_weight
        .iter()
        .map(|comps| {
            comps.iter().fold(S::zero(), |acc, (c, count)| {
                let factors: Vec<(&S, u64)> = a.coeffs().iter().zip(c.parts().iter().copied()).collect();
                acc + S::multinomial_term(count, &factors)
            })
        })
        .collect();
    ToeplitzCoeffs::new(coeffs).expect("dimension of input")
}

/// Entries of `A_1^{k_1} ... A_m^{k_m}` by the m-fold multinomial sum.
///
/// Iterates over the Cartesian product of per-member compositions whose
/// weights add up to each entry offset. Leading coefficients may vanish.
pub fn product_entries<S: Scalar>(tuple: &TupleSpec<S>, k: &MultiIndex) -> Result<ProductEntries<S>> {
    tuple.check_index(k)?;
    let n = tuple.dim();
    let per_member: Vec<WeightedTerms> = k
        .as_slice()
        .iter()
        .map(|&kj| WeightedTerms::new(kj, n))
        .collect();
    let mut coeffs = Vec::with_capacity(n);
    for w in 0..n {
        let mut acc = S::zero();
        let mut factors = Vec::with_capacity(n * tuple.len());
        accumulate(
            tuple,
            &per_member,
            0,
            w,
            &Multinomial::one(),
            &mut factors,
            &mut acc,
        );
        coeffs.push(acc);
    }
    ToeplitzCoeffs::new(coeffs)
}

fn accumulate<'a, S: Scalar>(
    tuple: &'a TupleSpec<S>,
    per_member: &[WeightedTerms],
    j: usize,
    remaining: usize,
    count: &Multinomial,
    factors: &mut Vec<(&'a S, u64)>,
    acc: &mut S,
) {
    if j == tuple.len() {
        if remaining == 0 {
            *acc = acc.clone() + S::multinomial_term(count, factors);
        }
        return;
    }
    let member = &tuple.members()[j];
    for w in 0..=remaining {
        for (comp, c) in &per_member[j].by_weight[w] {
            let before = factors.len();
            factors.extend(member.coeffs().iter().zip(comp.parts().iter().copied()));
            accumulate(tuple, per_member, j + 1, remaining - w, &count.product(c), factors, acc);
            factors.truncate(before);
        }
    }
}

/// Oracle route: `pow_binary` per member folded with Toeplitz multiplication.
pub fn product_entries_oracle<S: Scalar>(tuple: &TupleSpec<S>, k: &MultiIndex) -> Result<ProductEntries<S>> {
    tuple.check_index(k)?;
    let mut acc = ToeplitzCoeffs::identity(tuple.dim())?;
    for (a, &kj) in tuple.members().iter().zip(k.as_slice()) {
        acc = acc.mul(&a.pow_binary(kj))?;
    }
    Ok(acc)
}

/// Recurrence route: one Toeplitz multiplication per unit step of `k`.
pub fn product_entries_incremental<S: Scalar>(
    tuple: &TupleSpec<S>,
    k: &MultiIndex,
) -> Result<ProductEntries<S>> {
    tuple.check_index(k)?;
    let mut acc = ToeplitzCoeffs::identity(tuple.dim())?;
    for (a, &kj) in tuple.members().iter().zip(k.as_slice()) {
        for _ in 0..kj {
            acc = acc.mul_unchecked(a);
        }
    }
    Ok(acc)
}

/// The closed forms for `n in {2, 3, 4}` evaluated three ways.
///
/// With `x_j = a_{j,2}/a_{j,1}`, `y_j = a_{j,3}/a_{j,1}`, `z_j = a_{j,4}/a_{j,1}`:
///
/// * `raw`: direct configuration counts, e.g.
///   `c_3 = c_1 (sum k_j y_j + sum_{l>j} k_l k_j x_l x_j + sum C(k_j,2) x_j^2)`
///   and the six-sum expression for `c_4`;
/// * `regrouped`: in terms of the additive forms
///   `s_1 = sum k_j x_j`, `s_2 = sum k_j (y_j - x_j^2/2)`,
///   `s_3 = sum k_j (z_j - x_j y_j + x_j^3/3)`, giving
///   `c_3 = c_1 (s_2 + s_1^2/2)` and `c_4 = c_1 (s_3 + s_1 s_2 + s_1^3/6)`;
/// * `ratio`: the regrouped forms rewritten through the ratios `c_2/c_1` and `c_3/c_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaForms<S> {
    pub raw: ProductEntries<S>,
    pub regrouped: ProductEntries<S>,
    pub ratio: ProductEntries<S>,
}

pub fn lemma_forms<S: Scalar>(tuple: &TupleSpec<S>, k: &MultiIndex) -> Result<LemmaForms<S>> {
    tuple.check_index(k)?;
    let n = tuple.dim();
    if !(2..=4).contains(&n) {
        return Err(Error::UnsupportedDimension { n });
    }
    if let Some(index) = tuple.zero_leading() {
        return Err(Error::ZeroLeadingCoefficient { index });
    }
    let m = tuple.len();
    let int = |v: u64| S::from_u64(v);
    let half = S::one() / int(2);
    let third = S::one() / int(3);
    let sixth = S::one() / int(6);

    let lead: Vec<&S> = tuple.members().iter().map(|a| a.leading()).collect();
    let ratio_at = |i: usize| -> Vec<S> {
        tuple
            .members()
            .iter()
            .map(|a| a.coeffs()[i].clone() / a.leading().clone())
            .collect()
    };
    let kk: Vec<S> = k.as_slice().iter().map(|&v| int(v)).collect();
    let x = ratio_at(1);

    let c1 = lead
        .iter()
        .zip(k.as_slice())
        .fold(S::one(), |acc, (a, &kj)| acc * a.pow_u64(kj));
    let s1 = dot(&kk, &x);
    let c2 = c1.clone() * s1.clone();

    let mut raw = vec![c1.clone(), c2.clone()];
    let mut regrouped = raw.clone();
    let mut ratio = raw.clone();

    if n >= 3 {
        let y = ratio_at(2);
        let mut pairs = S::zero();
        for j in 0..m {
            for l in j + 1..m {
                pairs = pairs + kk[l].clone() * kk[j].clone() * x[l].clone() * x[j].clone();
            }
        }
        let mut same = S::zero();
        for j in 0..m {
            same = same
                + kk[j].clone() * (kk[j].clone() - S::one()) * half.clone() * x[j].clone() * x[j].clone();
        }
        raw.push(c1.clone() * (dot(&kk, &y) + pairs + same));

        let s2 = (0..m).fold(S::zero(), |acc, j| {
            acc + kk[j].clone() * (y[j].clone() - half.clone() * x[j].clone() * x[j].clone())
        });
        regrouped.push(c1.clone() * (s2.clone() + half.clone() * s1.clone() * s1.clone()));
        let r2 = c2.clone() / c1.clone();
        let c3_ratio = c1.clone() * (s2.clone() + half.clone() * r2.clone() * r2.clone());
        ratio.push(c3_ratio.clone());

        if n == 4 {
            let z = ratio_at(3);
            let mut t = dot(&kk, &z);
            for j in 0..m {
                t = t + kk[j].clone() * (kk[j].clone() - S::one()) * x[j].clone() * y[j].clone();
            }
            for j in 0..m {
                for l in 0..m {
                    if l != j {
                        t = t + kk[l].clone() * kk[j].clone() * x[j].clone() * y[l].clone();
                    }
                }
            }
            // one U_1 from each of three distinct members: unordered triples
            for j in 0..m {
                for l in j + 1..m {
                    for p in l + 1..m {
                        t = t + kk[j].clone()
                            * kk[l].clone()
                            * kk[p].clone()
                            * x[j].clone()
                            * x[l].clone()
                            * x[p].clone();
                    }
                }
            }
            for j in 0..m {
                t = t + kk[j].clone()
                    * (kk[j].clone() - S::one())
                    * (kk[j].clone() - int(2))
                    * sixth.clone()
                    * x[j].clone().pow_u64(3);
            }
            for j in 0..m {
                for l in 0..m {
                    if l != j {
                        t = t + kk[j].clone()
                            * (kk[j].clone() - S::one())
                            * kk[l].clone()
                            * half.clone()
                            * x[j].clone()
                            * x[j].clone()
                            * x[l].clone();
                    }
                }
            }
            raw.push(c1.clone() * t);

            let s3 = (0..m).fold(S::zero(), |acc, j| {
                acc + kk[j].clone()
                    * (z[j].clone() - x[j].clone() * y[j].clone() + third.clone() * x[j].clone().pow_u64(3))
            });
            regrouped.push(
                c1.clone()
                    * (s3.clone() + s1.clone() * s2.clone() + sixth.clone() * s1.clone().pow_u64(3)),
            );
            let r3 = c3_ratio / c1.clone();
            ratio.push(
                c1.clone()
                    * (s3
                        + r2.clone() * (r3 - half.clone() * r2.clone() * r2.clone())
                        + sixth * r2.pow_u64(3)),
            );
        }
    }

    Ok(LemmaForms {
        raw: ToeplitzCoeffs::new(raw)?,
        regrouped: ToeplitzCoeffs::new(regrouped)?,
        ratio: ToeplitzCoeffs::new(ratio)?,
    })
}

/// The regrouped closed form of [`lemma_forms`].
pub fn lemma_entries<S: Scalar>(tuple: &TupleSpec<S>, k: &MultiIndex) -> Result<ProductEntries<S>> {
    Ok(lemma_forms(tuple, k)?.regrouped)
}

fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}
