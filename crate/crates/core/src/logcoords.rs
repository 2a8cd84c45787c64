//! Linearizing coordinates for products of Toeplitz powers.
//!
//! Write a Toeplitz matrix with `a_1 != 0` as `A = a_1 (I + N)` with `N`
//! strictly upper triangular, and set `log A = log a_1 + L` with
//! `L = log(I + N) = N - N^2/2 + ... ± N^{n-1}/(n-1)` (the series stops
//! because `N^n = 0`). Since Toeplitz matrices commute, `L` is additive:
//!
//! ```text
//! L(A_1^{k_1} ... A_m^{k_m}) = k_1 L(A_1) + ... + k_m L(A_m)
//! ```
//!
//! The coefficients `(lam_2, ..., lam_n)` of `L` in `U_1, ..., U_{n-1}`
//! are therefore linear in `k`, while the leading coefficient multiplies.
//! For small `n` they read
//!
//! ```text
//! lam_2 = a_2/a_1
//! lam_3 = a_3/a_1 - (1/2)(a_2/a_1)^2
//! lam_4 = a_4/a_1 - a_2 a_3/a_1^2 + (1/3)(a_2/a_1)^3
//! ```
//!
//! The *equivalence point* of a tuple at `k` stacks these linear forms
//! (highest order first) above the product of leading coefficients, and the
//! *diagonal surrogate* replaces each member by the diagonal matrix of the
//! exponentials of its forms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Scalar, C64};
use crate::toeplitz::ToeplitzCoeffs;
use crate::tuple::{MultiIndex, TupleSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct LogCoordinates<S = C64> {
    /// The leading coefficient `a_1`.
    pub base: S,
    /// `lam[p - 2]` is the coefficient of `U_{p-1}` in `log(I + N)`, for `p = 2..=n`.
    pub lam: Vec<S>,
}

impl<S: Scalar> LogCoordinates<S> {
    pub fn dim(&self) -> usize {
        self.lam.len() + 1
    }

    /// The nilpotent logarithm `L` as Toeplitz coefficients (zero diagonal).
    pub fn log_part(&self) -> ToeplitzCoeffs<S> {
        let mut coeffs = Vec::with_capacity(self.dim());
        coeffs.push(S::zero());
        coeffs.extend(self.lam.iter().cloned());
        ToeplitzCoeffs::new(coeffs).expect("dimension bounded by construction")
    }
}

impl LogCoordinates<C64> {
    pub fn to_serde(&self) -> LogCoordinatesFile {
        LogCoordinatesFile {
            base: [self.base.re, self.base.im],
            lam: self.lam.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

/// Serialized form: complex numbers as `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogCoordinatesFile {
    pub base: [f64; 2],
    pub lam: Vec<[f64; 2]>,
}

impl LogCoordinatesFile {
    pub fn to_coords(&self) -> Result<LogCoordinates<C64>> {
        let z = |p: &[f64; 2]| C64::new(p[0], p[1]);
        if self.lam.len() >= crate::toeplitz::MAX_DIM {
            return Err(Error::InvalidDimension {
                n: self.lam.len() + 1,
                max: crate::toeplitz::MAX_DIM,
            });
        }
        Ok(LogCoordinates {
            base: z(&self.base),
            lam: self.lam.iter().map(z).collect(),
        })
    }
}

pub fn nilpotent_log<S: Scalar>(a: &ToeplitzCoeffs<S>) -> Result<LogCoordinates<S>> {
    let lead = a.leading().clone();
    if lead.is_zero() {
        return Err(Error::ZeroLeadingCoefficient { index: 0 });
    }
    let n = a.dim();
    let mut nil = a.scale(&(S::one() / lead.clone()));
    let mut coeffs = nil.coeffs().to_vec();
    coeffs[0] = S::zero();
    nil = ToeplitzCoeffs::new(coeffs)?;

    let mut acc = vec![S::zero(); n];
    let mut power = nil.clone();
    for i in 1..n {
        let weight = S::one() / S::from_u64(i as u64);
        let signed = if i % 2 == 1 { weight } else { -weight };
        for (slot, c) in acc.iter_mut().zip(power.coeffs()) {
            *slot = slot.clone() + signed.clone() * c.clone();
        }
        power = power.mul_unchecked(&nil);
    }
    Ok(LogCoordinates {
        base: lead,
        lam: acc.into_iter().skip(1).collect(),
    })
}

/// `base * exp(L)` by the truncated exponential series.
pub fn nilpotent_exp<S: Scalar>(coords: &LogCoordinates<S>) -> ToeplitzCoeffs<S> {
    let n = coords.dim();
    let l = coords.log_part();
    let mut acc = ToeplitzCoeffs::identity(n).expect("dimension bounded");
    let mut term = acc.clone();
    for i in 1..n {
        term = term.mul_unchecked(&l).scale(&(S::one() / S::from_u64(i as u64)));
        acc = acc.add(&term).expect("same dimension");
    }
    acc.scale(&coords.base)
}

/// The explicit lemma forms `lam_2, lam_3, lam_4` (as far as `n` allows), for `n <= 4`.
pub fn explicit_log_forms<S: Scalar>(a: &ToeplitzCoeffs<S>) -> Result<Vec<S>> {
    let n = a.dim();
    if !(2..=4).contains(&n) {
        return Err(Error::UnsupportedDimension { n });
    }
    let c = a.coeffs();
    if c[0].is_zero() {
        return Err(Error::ZeroLeadingCoefficient { index: 0 });
    }
    let a1 = c[0].clone();
    let x = c[1].clone() / a1.clone();
    let mut out = vec![x.clone()];
    if n >= 3 {
        let half = S::one() / S::from_u64(2);
        out.push(c[2].clone() / a1.clone() - half * x.clone() * x.clone());
    }
    if n == 4 {
        let third = S::one() / S::from_u64(3);
        out.push(
            c[3].clone() / a1.clone() - c[1].clone() * c[2].clone() / (a1.clone() * a1.clone())
                + third * x.pow_u64(3),
        );
    }
    Ok(out)
}

/// A point `(sum_j k_j lam_n(A_j), ..., sum_j k_j lam_2(A_j), prod_j a_{j,1}^{k_j})`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalencePoint<S = C64> {
    pub coords: Vec<S>,
}

impl<S: Scalar> EquivalencePoint<S> {
    /// The linear forms in increasing order `(lam_2, ..., lam_n)`.
    pub fn linear_ascending(&self) -> Vec<S> {
        let n = self.coords.len();
        self.coords[..n - 1].iter().rev().cloned().collect()
    }

    pub fn product(&self) -> &S {
        self.coords.last().expect("nonempty")
    }

    /// Reassembles the product matrix `prod * exp(sum lam)` from the point.
    pub fn to_entries(&self) -> ToeplitzCoeffs<S> {
        nilpotent_exp(&LogCoordinates {
            base: self.product().clone(),
            lam: self.linear_ascending(),
        })
    }
}

pub fn tuple_logs<S: Scalar>(tuple: &TupleSpec<S>) -> Result<Vec<LogCoordinates<S>>> {
    tuple
        .members()
        .iter()
        .enumerate()
        .map(|(index, a)| {
            nilpotent_log(a).map_err(|e| match e {
                Error::ZeroLeadingCoefficient { .. } => Error::ZeroLeadingCoefficient { index },
                other => other,
            })
        })
        .collect()
}

pub fn equivalence_point<S: Scalar>(tuple: &TupleSpec<S>, k: &MultiIndex) -> Result<EquivalencePoint<S>> {
    tuple.check_index(k)?;
    let logs = tuple_logs(tuple)?;
    Ok(equivalence_point_from_logs(&logs, k.as_slice()))
}

pub(crate) fn equivalence_point_from_logs<S: Scalar>(logs: &[LogCoordinates<S>], k: &[u64]) -> EquivalencePoint<S> {
    let n = logs[0].dim();
    let mut coords = Vec::with_capacity(n);
    for p in (0..n - 1).rev() {
        coords.push(
            logs.iter()
                .zip(k)
                .fold(S::zero(), |acc, (l, &kj)| acc + S::from_u64(kj) * l.lam[p].clone()),
        );
    }
    coords.push(
        logs.iter()
            .zip(k)
            .fold(S::one(), |acc, (l, &kj)| acc * l.base.pow_u64(kj)),
    );
    EquivalencePoint { coords }
}

/// Diagonal matrices `diag(e^{lam_n(A_j)}, ..., e^{lam_2(A_j)}, a_{j,1})`, one per member.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalTuple {
    pub diagonals: Vec<Vec<C64>>,
}

impl DiagonalTuple {
    pub fn dim(&self) -> usize {
        self.diagonals[0].len()
    }

    /// Orbit point `prod_j D_j^{k_j} v`, powers taken entrywise.
    pub fn orbit_point(&self, k: &[u64], v: &[C64]) -> Vec<C64> {
        (0..self.dim())
            .map(|i| {
                self.diagonals
                    .iter()
                    .zip(k)
                    .fold(v[i], |acc, (d, &kj)| acc * Scalar::pow_u64(&d[i], kj))
            })
            .collect()
    }
}

pub fn diagonal_surrogate<S: Scalar>(tuple: &TupleSpec<S>) -> Result<DiagonalTuple> {
    let logs = tuple_logs(tuple)?;
    Ok(DiagonalTuple {
        diagonals: logs
            .iter()
            .map(|l| {
                let mut d: Vec<C64> = l.lam.iter().rev().map(|z| z.to_c64().exp()).collect();
                d.push(l.base.to_c64());
                d
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{gaussian_rational, relative_deviation, Exact};
    use num_traits::{One, Zero};

    #[test]
    fn identity_has_zero_logs() {
        let l = nilpotent_log(&ToeplitzCoeffs::<Exact>::identity(4).unwrap()).unwrap();
        assert_eq!(l.base, Exact::one());
        assert!(l.lam.iter().all(Zero::is_zero));
    }

    #[test]
    fn unit_leading_three_by_three() {
        let a2 = gaussian_rational(2, 3, -1, 2);
        let a3 = gaussian_rational(5, 1, 1, 7);
        let a = ToeplitzCoeffs::new(vec![Exact::one(), a2.clone(), a3.clone()]).unwrap();
        let l = nilpotent_log(&a).unwrap();
        assert_eq!(l.lam[0], a2);
        assert_eq!(l.lam[1], a3 - a2.clone() * a2 / Exact::from_u64(2));
    }

    #[test]
    fn explicit_forms_match_series_exactly() {
        let a = ToeplitzCoeffs::new(vec![
            gaussian_rational(3, 2, 1, 4),
            gaussian_rational(-1, 5, 2, 1),
            gaussian_rational(7, 3, 0, 1),
            gaussian_rational(1, 9, -4, 3),
        ])
        .unwrap();
        assert_eq!(explicit_log_forms(&a).unwrap(), nilpotent_log(&a).unwrap().lam);
    }

    #[test]
    fn exp_of_log_is_exact_inverse() {
        let a = ToeplitzCoeffs::new(vec![
            gaussian_rational(-2, 3, 1, 1),
            gaussian_rational(1, 1, 1, 2),
            gaussian_rational(0, 1, 3, 4),
            gaussian_rational(5, 6, 0, 1),
            gaussian_rational(-1, 1, -1, 1),
        ])
        .unwrap();
        assert_eq!(nilpotent_exp(&nilpotent_log(&a).unwrap()), a);
    }

    #[test]
    fn exp_cases() {
        let c = C64::new(2.5, -1.0);
        let l = LogCoordinates {
            base: c,
            lam: vec![C64::zero(); 3],
        };
        assert_eq!(nilpotent_exp(&l), ToeplitzCoeffs::scalar(4, c).unwrap());
        let t = C64::new(0.3, 0.7);
        let l = LogCoordinates {
            base: C64::one(),
            lam: vec![t],
        };
        assert_eq!(nilpotent_exp(&l).coeffs(), &[C64::one(), t]);
    }

    #[test]
    fn zero_leading_rejected() {
        let a = ToeplitzCoeffs::new(vec![C64::zero(), C64::one()]).unwrap();
        assert_eq!(nilpotent_log(&a), Err(Error::ZeroLeadingCoefficient { index: 0 }));
        let t = TupleSpec::new(vec![ToeplitzCoeffs::identity(2).unwrap(), a]).unwrap();
        assert_eq!(
            equivalence_point(&t, &MultiIndex::zeros(2)),
            Err(Error::ZeroLeadingCoefficient { index: 1 })
        );
        assert!(diagonal_surrogate(&t).is_err());
    }

    #[test]
    fn equivalence_point_two_by_two() {
        let a = ToeplitzCoeffs::new(vec![C64::new(0.8, 0.6), C64::new(1.5, -0.2)]).unwrap();
        let b = ToeplitzCoeffs::new(vec![C64::new(-1.1, 0.1), C64::new(0.3, 0.9)]).unwrap();
        let t = TupleSpec::new(vec![a.clone(), b.clone()]).unwrap();
        let p = equivalence_point(&t, &MultiIndex::zeros(2)).unwrap();
        assert_eq!(p.coords, vec![C64::zero(), C64::one()]);
        let p = equivalence_point(&t, &MultiIndex::new(vec![3, 4]).unwrap()).unwrap();
        let expected = [
            3.0 * a.coeffs()[1] / a.coeffs()[0] + 4.0 * b.coeffs()[1] / b.coeffs()[0],
            a.coeffs()[0].pow_u64(3) * b.coeffs()[0].pow_u64(4),
        ];
        assert!(relative_deviation(&p.coords, &expected) < 1e-14);
    }

    #[test]
    fn surrogate_of_scalars_and_shears() {
        let t = TupleSpec::new(vec![
            ToeplitzCoeffs::scalar(3, C64::new(2.0, 0.0)).unwrap(),
            ToeplitzCoeffs::scalar(3, C64::new(0.0, 1.0)).unwrap(),
        ])
        .unwrap();
        let d = diagonal_surrogate(&t).unwrap();
        assert_eq!(d.diagonals[0], vec![C64::one(), C64::one(), C64::new(2.0, 0.0)]);
        assert_eq!(d.diagonals[1], vec![C64::one(), C64::one(), C64::new(0.0, 1.0)]);

        let a = ToeplitzCoeffs::new(vec![C64::new(0.5, 0.5), C64::new(1.0, -2.0)]).unwrap();
        let d = diagonal_surrogate(&TupleSpec::new(vec![a.clone()]).unwrap()).unwrap();
        let e = (a.coeffs()[1] / a.coeffs()[0]).exp();
        assert!((d.diagonals[0][0] - e).norm() < 1e-15);
        assert_eq!(d.diagonals[0][1], a.coeffs()[0]);
    }
}
