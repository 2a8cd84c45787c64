//! Scalar backends.
//!
//! Everything in the Toeplitz algebra is generic over [`Scalar`]. Two
//! implementations ship: [`C64`] (IEEE double complex, the default) and
//! [`Exact`] (Gaussian rationals backed by big integers). The exact backend
//! carries no rounding at all, so identities between closed forms can be
//! checked with `==`.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::combinat::Multinomial;

pub type C64 = Complex<f64>;
pub type Exact = Complex<BigRational>;

/// Above this log-magnitude a float monomial is evaluated in log space.
const LOG_SPACE_THRESHOLD: f64 = 600.0;

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
{
    /// Whether arithmetic in this backend is free of rounding.
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;
    fn from_u64(v: u64) -> Self;
    fn from_biguint(v: &BigUint) -> Self;
    /// Lossless for the exact backend (every finite double is a dyadic rational).
    fn from_c64(z: C64) -> Option<Self>;
    fn to_c64(&self) -> C64;
    fn is_finite_value(&self) -> bool;

    fn modulus(&self) -> f64 {
        self.to_c64().norm()
    }

    fn pow_u64(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }

    /// `count * prod(base^exp)` for one term of a multinomial expansion.
    fn multinomial_term(count: &Multinomial, factors: &[(&Self, u64)]) -> Self;
}

impl Scalar for C64 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        C64::new(v as f64, 0.0)
    }

    fn from_u64(v: u64) -> Self {
        C64::new(v as f64, 0.0)
    }

    fn from_biguint(v: &BigUint) -> Self {
        C64::new(v.to_f64().unwrap_or(f64::INFINITY), 0.0)
    }

    fn from_c64(z: C64) -> Option<Self> {
        Some(z)
    }

    fn to_c64(&self) -> C64 {
        *self
    }

    fn is_finite_value(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    fn pow_u64(&self, e: u64) -> Self {
        match u32::try_from(e) {
            Ok(e) => Complex::powu(self, e),
            Err(_) => {
                let (r, theta) = self.to_polar();
                C64::from_polar((e as f64 * r.ln()).exp(), e as f64 * theta)
            }
        }
    }

    fn multinomial_term(count: &Multinomial, factors: &[(&Self, u64)]) -> Self {
        let mut ln_mag = count.ln();
        let mut arg = 0.0;
        let mut direct_ok = ln_mag < LOG_SPACE_THRESHOLD;
        for &(base, e) in factors {
            if e == 0 {
                continue;
            }
            let r = base.norm();
            if r == 0.0 {
                return C64::zero();
            }
            let part = e as f64 * r.ln();
            direct_ok &= part.abs() < LOG_SPACE_THRESHOLD;
            ln_mag += part;
            arg += e as f64 * base.arg();
        }
        if direct_ok && ln_mag.abs() < LOG_SPACE_THRESHOLD {
            if let Some(c) = count.value().to_f64().filter(|c| c.is_finite()) {
                let mut acc = C64::new(c, 0.0);
                for &(base, e) in factors {
                    if e > 0 {
                        acc *= Scalar::pow_u64(base, e);
                    }
                }
                return acc;
            }
        }
        C64::from_polar(ln_mag.exp(), arg)
    }
}

impl Scalar for Exact {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        Complex::new(BigRational::from_integer(BigInt::from(v)), BigRational::zero())
    }

    fn from_u64(v: u64) -> Self {
        Complex::new(BigRational::from_integer(BigInt::from(v)), BigRational::zero())
    }

    fn from_biguint(v: &BigUint) -> Self {
        Complex::new(
            BigRational::from_integer(BigInt::from(v.clone())),
            BigRational::zero(),
        )
    }

    fn from_c64(z: C64) -> Option<Self> {
        Some(Complex::new(
            BigRational::from_float(z.re)?,
            BigRational::from_float(z.im)?,
        ))
    }

    fn to_c64(&self) -> C64 {
        C64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    fn is_finite_value(&self) -> bool {
        true
    }

    fn multinomial_term(count: &Multinomial, factors: &[(&Self, u64)]) -> Self {
        let mut acc = Self::from_biguint(count.value());
        for &(base, e) in factors {
            if e > 0 {
                acc = acc * base.pow_u64(e);
            }
        }
        acc
    }
}

/// Gaussian rational `(re_num/re_den) + (im_num/im_den) i`.
pub fn gaussian_rational(re_num: i64, re_den: i64, im_num: i64, im_den: i64) -> Exact {
    Complex::new(
        BigRational::new(re_num.into(), re_den.into()),
        BigRational::new(im_num.into(), im_den.into()),
    )
}

/// Largest modulus among `values`, 0 for an empty slice.
pub fn max_modulus<S: Scalar>(values: &[S]) -> f64 {
    values.iter().map(Scalar::modulus).fold(0.0, f64::max)
}

/// `max |a_i - b_i| / max(max |b_i|, floor)`: the relative error measure
/// used throughout the crate for comparing coefficient vectors.
pub fn relative_deviation(a: &[C64], b: &[C64]) -> f64 {
    let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let diff = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_conversion_is_lossless() {
        let z = C64::new(0.1, -3.75);
        let e = Exact::from_c64(z).unwrap();
        assert_eq!(e.to_c64(), z);
        assert!(Exact::from_c64(C64::new(f64::NAN, 0.0)).is_none());
    }

    #[test]
    fn powu_matches_repeated_product() {
        let z = gaussian_rational(3, 2, -1, 3);
        let mut acc = Exact::one();
        for _ in 0..7 {
            acc = acc * z.clone();
        }
        assert_eq!(z.pow_u64(7), acc);
        assert_eq!(z.pow_u64(0), Exact::one());
    }

    #[test]
    fn log_space_term_agrees_with_direct() {
        let count = Multinomial::new(30u32.into());
        let a = C64::new(0.9, 0.3);
        let direct = 30.0 * a.powu(5);
        let t = C64::multinomial_term(&count, &[(&a, 5)]);
        assert!((t - direct).norm() < 1e-13 * direct.norm());
        // far beyond f64 range for the count alone
        let big = Multinomial::new(BigUint::from(10u32).pow(400));
        let small = C64::new(1e-3, 0.0);
        let t = C64::multinomial_term(&big, &[(&small, 130)]);
        assert!((t.re - 1e10).abs() < 1e-3, "{t}");
    }
}
