//! JSON tuple files and CSV point clouds.
//!
//! Complex numbers are always `[re, im]` pairs. A tuple file looks like
//!
//! ```json
//! { "n": 2, "matrices": [ {"toeplitz": [[1,0],[1,0]]},
//!                         {"dense": [[[2,0],[0,0]],[[0,0],[2,0]]]} ] }
//! ```
//!
//! Point clouds are CSV with columns `k1..km, re1, im1, ..., ren, imn`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::dense::Dense;
use crate::error::{Error, Result};
use crate::scalar::{Exact, Scalar, C64};
use crate::toeplitz::{ToeplitzCoeffs, STRUCT_TOL};
use crate::tuple::TupleSpec;

pub type Pair = [f64; 2];

pub fn pair(z: C64) -> Pair {
    [z.re, z.im]
}

pub fn from_pair(p: Pair) -> C64 {
    C64::new(p[0], p[1])
}

pub fn pairs(v: &[C64]) -> Vec<Pair> {
    v.iter().copied().map(pair).collect()
}

pub fn from_pairs(v: &[Pair]) -> Vec<C64> {
    v.iter().copied().map(from_pair).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MatrixEntry {
    #[serde(rename = "toeplitz")]
    Toeplitz(Vec<Pair>),
    #[serde(rename = "dense")]
    Dense(Vec<Vec<Pair>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TupleFile {
    pub n: usize,
    pub matrices: Vec<MatrixEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<bool>,
}

impl TupleFile {
    pub fn from_json(s: &str) -> Result<Self> {
        let f: TupleFile = serde_json::from_str(s)?;
        f.validate()?;
        Ok(f)
    }

    pub fn read(r: impl Read) -> Result<Self> {
        let f: TupleFile = serde_json::from_reader(r)?;
        f.validate()?;
        Ok(f)
    }

    pub fn from_tuple(tuple: &TupleSpec<C64>) -> Self {
        TupleFile {
            n: tuple.dim(),
            matrices: tuple
                .members()
                .iter()
                .map(|a| MatrixEntry::Toeplitz(pairs(a.coeffs())))
                .collect(),
            exact: None,
        }
    }

    pub fn from_dense(members: &[Dense<C64>]) -> Self {
        TupleFile {
            n: members.first().map_or(0, |m| m.dim()),
            matrices: members
                .iter()
                .map(|m| MatrixEntry::Dense(m.rows().map(pairs).collect()))
                .collect(),
            exact: None,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.exact.unwrap_or(false)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > crate::toeplitz::MAX_DIM {
            return Err(Error::InvalidDimension {
                n: self.n,
                max: crate::toeplitz::MAX_DIM,
            });
        }
        if self.matrices.is_empty() {
            return Err(Error::InvalidArgument("tuple file lists no matrices".into()));
        }
        for m in &self.matrices {
            match m {
                MatrixEntry::Toeplitz(c) if c.len() != self.n => {
                    return Err(Error::DimensionMismatch {
                        expected: self.n,
                        found: c.len(),
                    })
                }
                MatrixEntry::Dense(rows) => {
                    if rows.len() != self.n {
                        return Err(Error::DimensionMismatch {
                            expected: self.n,
                            found: rows.len(),
                        });
                    }
                    if let Some(r) = rows.iter().find(|r| r.len() != self.n) {
                        return Err(Error::NotSquare {
                            rows: self.n,
                            cols: r.len(),
                        });
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Every member as a dense matrix.
    pub fn dense_members(&self) -> Result<Vec<Dense<C64>>> {
        self.matrices
            .iter()
            .map(|m| match m {
                MatrixEntry::Toeplitz(c) => Ok(ToeplitzCoeffs::new(from_pairs(c))?.to_dense()),
                MatrixEntry::Dense(rows) => Dense::from_rows(rows.iter().map(|r| from_pairs(r)).collect()),
            })
            .collect()
    }

    /// The members as Toeplitz coefficients; dense members must be
    /// upper triangular Toeplitz to within the structural tolerance.
    pub fn toeplitz_tuple(&self) -> Result<TupleSpec<C64>> {
        let members = self
            .matrices
            .iter()
            .map(|m| match m {
                MatrixEntry::Toeplitz(c) => ToeplitzCoeffs::new(from_pairs(c)),
                MatrixEntry::Dense(rows) => {
                    let d = Dense::from_rows(rows.iter().map(|r| from_pairs(r)).collect())?;
                    ToeplitzCoeffs::from_dense_with_tol(&d, STRUCT_TOL)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        TupleSpec::new(members)
    }

    /// The members in the exact backend. Each `f64` is read as the dyadic
    /// rational it represents; dense members must be exactly Toeplitz.
    pub fn exact_tuple(&self) -> Result<TupleSpec<Exact>> {
        let members = self
            .matrices
            .iter()
            .map(|m| match m {
                MatrixEntry::Toeplitz(c) => ToeplitzCoeffs::new(exact_vec(c)?),
                MatrixEntry::Dense(rows) => {
                    let d = Dense::from_rows(rows.iter().map(|r| exact_vec(r)).collect::<Result<Vec<_>>>()?)?;
                    ToeplitzCoeffs::from_dense(&d)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        TupleSpec::new(members)
    }
}

fn exact_vec(v: &[Pair]) -> Result<Vec<Exact>> {
    v.iter()
        .map(|&p| Exact::from_c64(from_pair(p)).ok_or(Error::NonFinite))
        .collect()
}

/// One CSV row: exponents and the orbit point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointRow {
    pub k: Vec<u64>,
    pub point: Vec<C64>,
}

pub fn csv_header(m: usize, n: usize) -> Vec<String> {
    let mut h: Vec<String> = (1..=m).map(|j| format!("k{j}")).collect();
    for i in 1..=n {
        h.push(format!("re{i}"));
        h.push(format!("im{i}"));
    }
    h
}

/// Streaming CSV writer for orbit points.
pub struct PointWriter<W: Write> {
    inner: csv::Writer<W>,
    m: usize,
    n: usize,
    record: Vec<String>,
}

impl<W: Write> PointWriter<W> {
    pub fn new(w: W, m: usize, n: usize) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(w);
        inner.write_record(csv_header(m, n))?;
        Ok(PointWriter {
            inner,
            m,
            n,
            record: Vec::with_capacity(m + 2 * n),
        })
    }

    pub fn write(&mut self, k: &[u64], point: &[C64]) -> Result<()> {
        if k.len() != self.m || point.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.m + self.n,
                found: k.len() + point.len(),
            });
        }
        self.record.clear();
        self.record.extend(k.iter().map(|v| v.to_string()));
        for z in point {
            self.record.push(z.re.to_string());
            self.record.push(z.im.to_string());
        }
        self.inner.write_record(&self.record)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.inner.flush()?;
        self.inner.into_inner().map_err(|e| Error::Io(e.to_string()))
    }
}

/// A parsed point cloud with `m` exponent columns and `n` complex coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub m: usize,
    pub n: usize,
    pub rows: Vec<PointRow>,
}

pub fn read_points_csv(r: impl Read) -> Result<PointCloud> {
    let mut reader = csv::Reader::from_reader(r);
    let headers = reader.headers()?.clone();
    let m = headers.iter().take_while(|h| h.starts_with('k')).count();
    let rest = headers.len() - m;
    if rest % 2 != 0 || rest == 0 {
        return Err(Error::Parse(format!("unexpected CSV header {:?}", headers)));
    }
    let n = rest / 2;
    if headers.iter().collect::<Vec<_>>() != csv_header(m, n) {
        return Err(Error::Parse(format!("unexpected CSV header {:?}", headers)));
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("row {}: {e}", rows.len() + 1)))
        };
        let k = (0..m)
            .map(|i| {
                rec[i]
                    .trim()
                    .parse::<u64>()
                    .map_err(|e| Error::Parse(format!("row {}: {e}", rows.len() + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        let point = (0..n)
            .map(|i| Ok(C64::new(num(m + 2 * i)?, num(m + 2 * i + 1)?)))
            .collect::<Result<Vec<_>>>()?;
        rows.push(PointRow { k, point });
    }
    Ok(PointCloud { m, n, rows })
}
