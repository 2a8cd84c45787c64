use crate::error::{Error, Result};
use crate::scalar::{Scalar, C64};
use crate::toeplitz::ToeplitzCoeffs;

/// A tuple `(A_1, ..., A_m)` of Toeplitz matrices sharing one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct TupleSpec<S = C64> {
    members: Vec<ToeplitzCoeffs<S>>,
}

impl<S: Scalar> TupleSpec<S> {
    pub fn new(members: Vec<ToeplitzCoeffs<S>>) -> Result<Self> {
        let n = members
            .first()
            .ok_or_else(|| Error::InvalidArgument("tuple must have at least one member".into()))?
            .dim();
        for m in &members {
            if m.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: m.dim(),
                });
            }
        }
        Ok(TupleSpec { members })
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[ToeplitzCoeffs<S>] {
        &self.members
    }

    pub fn member(&self, i: usize) -> Result<&ToeplitzCoeffs<S>> {
        self.members.get(i).ok_or_else(|| {
            Error::InvalidArgument(format!("member index {i} out of range 0..{}", self.len()))
        })
    }

    pub fn check_index(&self, k: &MultiIndex) -> Result<()> {
        if k.len() != self.len() {
            return Err(Error::ExponentArityMismatch {
                expected: self.len(),
                found: k.len(),
            });
        }
        Ok(())
    }

    /// Index of the first member whose leading coefficient vanishes.
    pub fn zero_leading(&self) -> Option<usize> {
        self.members.iter().position(|m| m.leading().is_zero())
    }

    pub fn to_c64(&self) -> TupleSpec<C64> {
        TupleSpec {
            members: self.members.iter().map(ToeplitzCoeffs::to_c64).collect(),
        }
    }
}

impl TupleSpec<C64> {
    pub fn to_exact(&self) -> Result<TupleSpec<crate::scalar::Exact>> {
        Ok(TupleSpec {
            members: self
                .members
                .iter()
                .map(ToeplitzCoeffs::to_exact)
                .collect::<Result<_>>()?,
        })
    }
}

/// Exponent vector `k = (k_1, ..., k_m)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u64>);

impl MultiIndex {
    pub fn new(k: Vec<u64>) -> Result<Self> {
        k.iter()
            .try_fold(0u64, |acc, &x| acc.checked_add(x))
            .ok_or_else(|| Error::InvalidArgument("total degree overflows u64".into()))?;
        Ok(MultiIndex(k))
    }

    pub fn zeros(m: usize) -> Self {
        MultiIndex(vec![0; m])
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total_degree(&self) -> u64 {
        self.0.iter().sum()
    }

    /// Componentwise sum.
    pub fn add(&self, other: &MultiIndex) -> Result<MultiIndex> {
        if self.len() != other.len() {
            return Err(Error::ExponentArityMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        MultiIndex::new(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl From<Vec<u64>> for MultiIndex {
    fn from(k: Vec<u64>) -> Self {
        MultiIndex(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn members_share_dimension() {
        let a = ToeplitzCoeffs::<C64>::identity(2).unwrap();
        let b = ToeplitzCoeffs::<C64>::identity(3).unwrap();
        assert!(TupleSpec::new(vec![a.clone(), a.clone()]).is_ok());
        assert_eq!(
            TupleSpec::new(vec![a, b]),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        );
        assert!(TupleSpec::<C64>::new(vec![]).is_err());
    }

    #[test]
    fn toeplitz_members_commute() {
        let a = ToeplitzCoeffs::new(vec![C64::new(1.0, 2.0), C64::new(-3.0, 0.5), C64::new(0.2, 0.0)])
            .unwrap()
            .to_exact()
            .unwrap();
        let b = ToeplitzCoeffs::new(vec![C64::new(0.0, -1.0), C64::new(4.0, 1.0), C64::new(7.0, 2.0)])
            .unwrap()
            .to_exact()
            .unwrap();
        let ab = a.to_dense().mul(&b.to_dense()).unwrap();
        let ba = b.to_dense().mul(&a.to_dense()).unwrap();
        assert_eq!(ab, ba);
        assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
    }

    #[test]
    fn multi_index_overflow() {
        assert!(MultiIndex::new(vec![u64::MAX, 1]).is_err());
        assert_eq!(MultiIndex::new(vec![2, 3]).unwrap().total_degree(), 5);
    }
}
