//! Upper triangular Toeplitz matrices in the nilpotent-shift basis.
//!
//! An `n x n` upper triangular Toeplitz matrix is determined by its first
//! row `(a_1, ..., a_n)` and equals `a_1 U_0 + a_2 U_1 + ... + a_n U_{n-1}`
//! where `U_p` has ones on the `p`-th superdiagonal. Because
//! `U_p U_q = U_{p+q}` (and `U_p = 0` for `p >= n`) these matrices form a
//! commutative algebra isomorphic to polynomials truncated at degree `n`.
//! Products are truncated convolutions of first rows.
//!
//! Coefficients are stored 0-based: `coeffs()[p]` multiplies `U_p`.

use crate::dense::Dense;
use crate::error::{Error, Result};
use crate::scalar::{Scalar, C64};

/// Largest supported dimension.
pub const MAX_DIM: usize = 16;

/// Relative structural tolerance used by [`ToeplitzCoeffs::from_dense`].
pub const STRUCT_TOL: f64 = 1e-10;

fn check_dim(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DIM {
        return Err(Error::InvalidDimension { n, max: MAX_DIM });
    }
    Ok(())
}

/// The nilpotent shift `U_p` of size `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShiftPower {
    pub n: usize,
    pub p: usize,
}

impl ShiftPower {
    pub fn to_dense<S: Scalar>(&self) -> Dense<S> {
        shift_dense(self.n, self.p)
    }

    pub fn is_zero(&self) -> bool {
        self.p >= self.n
    }
}

/// Dense `U_p`: entry `(i, j)` is one exactly when `j = i + p`.
pub fn shift_dense<S: Scalar>(n: usize, p: usize) -> Dense<S> {
    Dense::from_fn(n, |i, j| if j == i + p { S::one() } else { S::zero() })
}

/// First-row coefficients of an upper triangular Toeplitz matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzCoeffs<S = C64> {
    coeffs: Vec<S>,
}

impl<S: Scalar> ToeplitzCoeffs<S> {
    pub fn new(coeffs: Vec<S>) -> Result<Self> {
        check_dim(coeffs.len())?;
        if coeffs.iter().any(|c| !c.is_finite_value()) {
            return Err(Error::NonFinite);
        }
        Ok(ToeplitzCoeffs { coeffs })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::scalar(n, S::one())
    }

    pub fn scalar(n: usize, c: S) -> Result<Self> {
        check_dim(n)?;
        let mut coeffs = vec![S::zero(); n];
        coeffs[0] = c;
        Self::new(coeffs)
    }

    /// `U_p` as coefficients (the zero matrix when `p >= n`).
    pub fn shift(n: usize, p: usize) -> Result<Self> {
        check_dim(n)?;
        let mut coeffs = vec![S::zero(); n];
        if p < n {
            coeffs[p] = S::one();
        }
        Self::new(coeffs)
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.coeffs
    }

    pub fn leading(&self) -> &S {
        &self.coeffs[0]
    }

    pub fn to_dense(&self) -> Dense<S> {
        Dense::from_fn(self.dim(), |i, j| {
            if j >= i {
                self.coeffs[j - i].clone()
            } else {
                S::zero()
            }
        })
    }

    /// Reads the first row of `m`, rejecting input whose diagonals are not
    /// constant or whose strictly lower part is nonzero beyond
    /// `STRUCT_TOL * max|m_ij|` (exact equality for the exact backend).
    pub fn from_dense(m: &Dense<S>) -> Result<Self> {
        let tol = if S::EXACT { 0.0 } else { STRUCT_TOL };
        Self::from_dense_with_tol(m, tol)
    }

    pub fn from_dense_with_tol(m: &Dense<S>, rel_tol: f64) -> Result<Self> {
        check_dim(m.dim())?;
        let coeffs: Vec<S> = (0..m.dim()).map(|j| m.get(0, j).clone()).collect();
        let candidate = ToeplitzCoeffs::new(coeffs)?;
        let deviation = candidate.structural_deviation(m);
        let tolerance = rel_tol * m.max_modulus();
        if deviation > tolerance || (S::EXACT && rel_tol == 0.0 && candidate.to_dense() != *m) {
            return Err(Error::NotUpperToeplitz {
                deviation,
                tolerance,
            });
        }
        Ok(candidate)
    }

    /// Largest entrywise distance between `m` and this matrix's dense form.
    pub fn structural_deviation(&self, m: &Dense<S>) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let expected = if j >= i {
                    self.coeffs[j - i].clone()
                } else {
                    S::zero()
                };
                worst = worst.max((m.get(i, j).clone() - expected).modulus());
            }
        }
        worst
    }

    /// Toeplitz projection: averages each superdiagonal, discards the lower part.
    /// Returns the projection and the Frobenius norm of what was discarded.
    pub fn project_dense(m: &Dense<S>) -> Result<(Self, f64)> {
        let n = m.dim();
        check_dim(n)?;
        let coeffs: Vec<S> = (0..n)
            .map(|p| {
                let sum = (0..n - p).fold(S::zero(), |acc, i| acc + m.get(i, i + p).clone());
                sum / S::from_u64((n - p) as u64)
            })
            .collect();
        let t = ToeplitzCoeffs::new(coeffs)?;
        let residual = m.sub(&t.to_dense())?.frobenius();
        Ok((t, residual))
    }

    /// Truncated convolution `c_r = sum_{i+j=r} a_i b_j`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        let n = self.dim();
        let mut out = vec![S::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs[..n - i].iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        ToeplitzCoeffs { coeffs: out }
    }

    /// `A^k` by repeated squaring.
    pub fn pow_binary(&self, mut k: u64) -> Self {
        let mut acc = Self::identity(self.dim()).expect("dimension already validated");
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul_unchecked(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul_unchecked(&base);
            }
        }
        acc
    }

    /// Matrix-vector product `A x`.
    pub fn apply(&self, x: &[S]) -> Result<Vec<S>> {
        let n = self.dim();
        if x.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: x.len(),
            });
        }
        Ok((0..n)
            .map(|i| {
                (i..n).fold(S::zero(), |acc, j| {
                    acc + self.coeffs[j - i].clone() * x[j].clone()
                })
            })
            .collect())
    }

    pub fn scale(&self, c: &S) -> Self {
        ToeplitzCoeffs {
            coeffs: self.coeffs.iter().map(|a| a.clone() * c.clone()).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(ToeplitzCoeffs {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        })
    }

    pub fn to_c64(&self) -> ToeplitzCoeffs<C64> {
        ToeplitzCoeffs {
            coeffs: self.coeffs.iter().map(Scalar::to_c64).collect(),
        }
    }
}

impl ToeplitzCoeffs<C64> {
    pub fn to_exact(&self) -> Result<ToeplitzCoeffs<crate::scalar::Exact>> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|&z| crate::scalar::Exact::from_c64(z).ok_or(Error::NonFinite))
            .collect::<Result<Vec<_>>>()?;
        Ok(ToeplitzCoeffs { coeffs })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{gaussian_rational, relative_deviation, Exact};
    use num_traits::{One, Zero};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn shift_cases() {
        assert_eq!(shift_dense::<C64>(3, 0), Dense::identity(3));
        assert_eq!(shift_dense::<C64>(3, 3), Dense::zeros(3));
        let u1 = shift_dense::<C64>(3, 1);
        for i in 0..3 {
            for j in 0..3 {
                let expected = if j == i + 1 { 1.0 } else { 0.0 };
                assert_eq!(u1.get(i, j).re, expected);
            }
        }
        assert!(ShiftPower { n: 3, p: 5 }.is_zero());
    }

    #[test]
    fn shift_algebra() {
        for n in 1..=5 {
            for p in 0..2 * n {
                for q in 0..2 * n {
                    let lhs = shift_dense::<Exact>(n, p).mul(&shift_dense(n, q)).unwrap();
                    assert_eq!(lhs, shift_dense(n, p + q), "n={n} p={p} q={q}");
                }
            }
        }
    }

    #[test]
    fn dense_round_trip() {
        let a = ToeplitzCoeffs::new(vec![c(5.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(
            a.to_dense(),
            Dense::from_rows(vec![vec![c(5.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(5.0, 0.0)]])
                .unwrap()
        );
        let m = Dense::from_rows(vec![vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]])
            .unwrap();
        let t = ToeplitzCoeffs::from_dense(&m).unwrap();
        assert_eq!(t.coeffs(), &[c(1.0, 0.0), c(2.0, 0.0)]);
        assert_eq!(ToeplitzCoeffs::from_dense(&t.to_dense()).unwrap(), t);
    }

    #[test]
    fn rejects_lower_entries() {
        let m = Dense::from_rows(vec![vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(3.0, 0.0), c(1.0, 0.0)]])
            .unwrap();
        assert!(matches!(
            ToeplitzCoeffs::from_dense(&m),
            Err(Error::NotUpperToeplitz { .. })
        ));
        let mut e = ToeplitzCoeffs::<Exact>::identity(3).unwrap().to_dense();
        e.set(1, 1, gaussian_rational(2, 1, 0, 1));
        assert!(ToeplitzCoeffs::from_dense(&e).is_err());
    }

    #[test]
    fn tolerance_admits_rounding() {
        let a = ToeplitzCoeffs::new(vec![c(1.0, 1.0), c(2.0, 0.0), c(-1.0, 0.5)]).unwrap();
        let mut m = a.to_dense();
        m.set(2, 2, c(1.0 + 1e-13, 1.0));
        m.set(2, 0, c(1e-13, 0.0));
        assert_eq!(ToeplitzCoeffs::from_dense(&m).unwrap(), a);
        m.set(2, 0, c(1e-6, 0.0));
        assert!(ToeplitzCoeffs::from_dense(&m).is_err());
    }

    #[test]
    fn dimension_cap() {
        assert!(ToeplitzCoeffs::<C64>::identity(16).is_ok());
        assert_eq!(
            ToeplitzCoeffs::<C64>::identity(17),
            Err(Error::InvalidDimension { n: 17, max: MAX_DIM })
        );
        assert!(ToeplitzCoeffs::<C64>::new(vec![]).is_err());
        assert_eq!(
            ToeplitzCoeffs::new(vec![c(f64::NAN, 0.0)]),
            Err(Error::NonFinite)
        );
    }

    #[test]
    fn mul_unit_and_shift() {
        let a = ToeplitzCoeffs::new(vec![c(2.0, 1.0), c(-1.0, 0.0), c(0.5, 3.0)]).unwrap();
        let id = ToeplitzCoeffs::identity(3).unwrap();
        assert_eq!(a.mul(&id).unwrap(), a);
        let u1 = ToeplitzCoeffs::<C64>::shift(3, 1).unwrap();
        assert_eq!(u1.mul(&u1).unwrap(), ToeplitzCoeffs::shift(3, 2).unwrap());
        assert!(matches!(
            a.mul(&ToeplitzCoeffs::identity(2).unwrap()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn mul_matches_dense_product() {
        let a = ToeplitzCoeffs::new(vec![
            c(0.3, -1.2),
            c(1.7, 0.4),
            c(-0.8, 0.9),
            c(2.2, -0.1),
            c(0.05, 0.6),
        ])
        .unwrap();
        let b = ToeplitzCoeffs::new(vec![
            c(-1.1, 0.2),
            c(0.0, 1.3),
            c(0.7, 0.7),
            c(-2.0, 0.25),
            c(1.5, -0.9),
        ])
        .unwrap();
        let fast = a.mul(&b).unwrap().to_dense();
        let slow = a.to_dense().mul(&b.to_dense()).unwrap();
        assert!(relative_deviation(fast.entries(), slow.entries()) < 1e-12);
    }

    #[test]
    fn pow_cases() {
        let a = ToeplitzCoeffs::new(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(a.pow_binary(0), ToeplitzCoeffs::identity(2).unwrap());
        assert_eq!(a.pow_binary(3).coeffs(), &[c(1.0, 0.0), c(3.0, 0.0)]);
        let r = ToeplitzCoeffs::new(vec![c(0.9, 0.2), c(-0.4, 0.3), c(0.1, 0.8), c(0.6, -0.5)])
            .unwrap();
        let fast = r.pow_binary(17).to_dense();
        let slow = r.to_dense().pow(17);
        assert!(relative_deviation(fast.entries(), slow.entries()) < 1e-12);
    }

    #[test]
    fn exact_nilpotency() {
        let a = ToeplitzCoeffs::new(vec![
            Exact::zero(),
            gaussian_rational(3, 2, 1, 1),
            gaussian_rational(-1, 3, 0, 1),
            Exact::one(),
        ])
        .unwrap();
        let p = a.pow_binary(4);
        assert!(p.coeffs().iter().all(Zero::is_zero));
        assert!(!a.pow_binary(3).coeffs().iter().all(Zero::is_zero));
    }

    #[test]
    fn projection_reports_discarded_part() {
        let a = ToeplitzCoeffs::new(vec![c(1.0, 0.0), c(2.0, 0.0)]).unwrap();
        let mut m = a.to_dense();
        m.set(1, 0, c(0.5, 0.0));
        let (t, r) = ToeplitzCoeffs::project_dense(&m).unwrap();
        assert_eq!(t, a);
        assert!((r - 0.5).abs() < 1e-15);
    }
}
