//! Simultaneous block-Toeplitz form of a commuting tuple with a cyclic member.
//!
//! If `B` is cyclic with Jordan form `J = J_{n_1}(l_1) + ... + J_{n_r}(l_r)`
//! (distinct `l_i`) and `B = P J P^{-1}`, every matrix commuting with `B` is
//! carried by `P^{-1} . P` to a block-diagonal matrix whose blocks are upper
//! triangular Toeplitz. [`toeplitzize`] computes `P` and the blocks, and
//! reports how far the conjugated matrices are from that structure.
//!
//! Chains are built top-down: with `Pi` the spectral projector of `l` and
//! `N = (B - l I) Pi`, the top vector `v_m` is chosen in the range of `Pi`
//! to maximize `|N^{m-1} v_m|`, and `v_{i} = N v_{i+1}`.

use nalgebra::DMatrix;
use num_traits::One;

use super::eigen::{certified_clusters, EigenCluster, EigenMethod};
use crate::dense::Dense;
use crate::error::{Error, Result};
use crate::scalar::C64;
use crate::toeplitz::ToeplitzCoeffs;
use crate::tolerances::Tolerances;

/// Jordan blocks `(eigenvalue, size)` in the order they appear in `J`.
#[derive(Debug, Clone, PartialEq)]
pub struct JordanStructure {
    pub blocks: Vec<(C64, usize)>,
}

impl JordanStructure {
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.1).sum()
    }

    /// `(start, size)` of each diagonal block.
    pub fn ranges(&self) -> Vec<(usize, usize)> {
        let mut start = 0;
        self.blocks
            .iter()
            .map(|&(_, size)| {
                let r = (start, size);
                start += size;
                r
            })
            .collect()
    }

    pub fn to_dense(&self) -> Dense<C64> {
        let n = self.dim();
        let mut j = Dense::zeros(n);
        for (&(lambda, _), (start, size)) in self.blocks.iter().zip(self.ranges()) {
            for i in start..start + size {
                j.set(i, i, lambda);
                if i + 1 < start + size {
                    j.set(i, i + 1, C64::one());
                }
            }
        }
        j
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JordanForm {
    pub p: Dense<C64>,
    pub p_inv: Dense<C64>,
    pub j: Dense<C64>,
    pub structure: JordanStructure,
    /// `||MP - PJ||_F / ||M||_F`.
    pub residual: f64,
    /// `||P P^{-1} - I||_F`.
    pub inverse_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionResult {
    pub p: Dense<C64>,
    pub p_inv: Dense<C64>,
    pub j: Dense<C64>,
    pub structure: JordanStructure,
    pub residual: f64,
    pub inverse_residual: f64,
    /// `block_toeplitz[member][block]`.
    pub block_toeplitz: Vec<Vec<ToeplitzCoeffs<C64>>>,
    /// Largest relative distance of a conjugated member from block-Toeplitz form.
    pub structure_residual: f64,
    /// Frobenius norm outside the diagonal blocks, per member, relative to the member.
    pub off_block_energy: Vec<f64>,
}

/// Rank and geometric multiplicity of `M - lambda I` for one eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenRank {
    pub value: C64,
    pub algebraic: usize,
    pub rank: usize,
    pub geometric: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CyclicityReport {
    pub cyclic: bool,
    pub eigenvalues: Vec<EigenRank>,
}

fn frob(a: &DMatrix<C64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn sigma_max(a: &DMatrix<C64>) -> f64 {
    a.clone().svd(false, false).singular_values.iter().copied().fold(0.0, f64::max)
}

/// Singular values of `a` above `tau_rank * scale`, where `scale` is the
/// largest singular value of the unshifted matrix.
fn numerical_rank(a: &DMatrix<C64>, tau_rank: f64, scale: f64) -> usize {
    if scale == 0.0 {
        return 0;
    }
    let sv = a.clone().svd(false, false).singular_values;
    sv.iter().filter(|&&s| s > tau_rank * scale).count()
}

fn shifted(a: &DMatrix<C64>, z: C64) -> DMatrix<C64> {
    let n = a.nrows();
    a - DMatrix::<C64>::identity(n, n) * z
}

/// `||AB - BA||_F <= tau (||A||_F ||B||_F)`.
pub fn commutes(a: &Dense<C64>, b: &Dense<C64>, tau: f64) -> Result<bool> {
    Ok(relative_commutator(a, b)? <= tau)
}

/// `||AB - BA||_F / (||A||_F ||B||_F)`, zero when either factor vanishes.
pub fn relative_commutator(a: &Dense<C64>, b: &Dense<C64>) -> Result<f64> {
    let ab = a.mul(b)?;
    let ba = b.mul(a)?;
    let denom = a.frobenius() * b.frobenius();
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok(ab.sub(&ba)?.frobenius() / denom)
}

pub fn is_cyclic(m: &Dense<C64>, tol: &Tolerances) -> Result<CyclicityReport> {
    let clusters = certified_clusters(m, tol, EigenMethod::Schur)?;
    let a = m.to_nalgebra();
    let n = m.dim();
    let smax = sigma_max(&a);
    let eigenvalues: Vec<EigenRank> = clusters
        .iter()
        .map(|c| {
            let rank = numerical_rank(&shifted(&a, c.cluster.value), tol.tau_rank, smax);
            EigenRank {
                value: c.cluster.value,
                algebraic: c.cluster.multiplicity,
                rank,
                geometric: n - rank,
            }
        })
        .collect();
    Ok(CyclicityReport {
        cyclic: eigenvalues.iter().all(|e| e.geometric == 1),
        eigenvalues,
    })
}

fn top_right_singular_vector(w: &DMatrix<C64>) -> nalgebra::DVector<C64> {
    let svd = w.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let (best, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, -1.0), |acc, (i, &s)| if s > acc.1 { (i, s) } else { acc });
    v_t.row(best).adjoint()
}

pub fn jordan_form(m: &Dense<C64>, tol: &Tolerances) -> Result<JordanForm> {
    let n = m.dim();
    let clusters = certified_clusters(m, tol, EigenMethod::Schur)?;
    let a = m.to_nalgebra();
    let smax = sigma_max(&a);
    for c in &clusters {
        let rank = numerical_rank(&shifted(&a, c.cluster.value), tol.tau_rank, smax);
        if n - rank != 1 {
            let EigenCluster { value, .. } = c.cluster;
            return Err(Error::NotCyclic {
                re: value.re,
                im: value.im,
                geometric: n - rank,
            });
        }
    }

    let norm = m.frobenius();
    let scale = if norm > 0.0 { norm } else { 1.0 };
    let mut p = DMatrix::<C64>::zeros(n, n);
    let mut col = 0;
    let mut blocks = Vec::with_capacity(clusters.len());
    for c in &clusters {
        let lambda = c.cluster.value;
        let size = c.cluster.multiplicity;
        let nil = shifted(&a, lambda) * &c.projector;
        let mut w = c.projector.clone();
        for _ in 1..size {
            w = &nil * w;
        }
        let top = &c.projector * top_right_singular_vector(&w);
        let mut chain = vec![top];
        for _ in 1..size {
            let next = &nil * chain.last().expect("nonempty");
            chain.push(next);
        }
        chain.reverse();
        let biggest = chain.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if !(biggest > 0.0) {
            return Err(Error::IllConditionedChain { residual: f64::INFINITY });
        }
        let bottom = &chain[0] / C64::new(biggest, 0.0);
        let defect = (shifted(&a, lambda) * &bottom).norm() / (scale * bottom.norm().max(f64::MIN_POSITIVE));
        if defect > tol.tau_chain {
            return Err(Error::IllConditionedChain { residual: defect });
        }
        for v in &chain {
            p.set_column(col, &(v / C64::new(biggest, 0.0)));
            col += 1;
        }
        blocks.push((lambda, size));
    }

    let structure = JordanStructure { blocks };
    let j = structure.to_dense().to_nalgebra();
    let p_inv = p
        .clone()
        .try_inverse()
        .ok_or(Error::IllConditionedChain { residual: f64::INFINITY })?;
    let inverse_residual = frob(&(&p * &p_inv - DMatrix::<C64>::identity(n, n)));
    if !(inverse_residual <= tol.tau_inv) {
        return Err(Error::IllConditionedChain {
            residual: inverse_residual,
        });
    }
    let residual = frob(&(&a * &p - &p * &j)) / scale;
    if !(residual <= tol.tau_jordan) {
        return Err(Error::IllConditionedChain { residual });
    }
    Ok(JordanForm {
        p: Dense::from_nalgebra(&p)?,
        p_inv: Dense::from_nalgebra(&p_inv)?,
        j: Dense::from_nalgebra(&j)?,
        structure,
        residual,
        inverse_residual,
    })
}

fn block(m: &Dense<C64>, start: usize, size: usize) -> Dense<C64> {
    Dense::from_fn(size, |i, j| *m.get(start + i, start + j))
}

/// Conjugates every member by the Jordan basis of `members[cyclic_index]`
/// and reads off the diagonal Toeplitz blocks.
pub fn toeplitzize(members: &[Dense<C64>], cyclic_index: usize, tol: &Tolerances) -> Result<ReductionResult> {
    let first = members
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty tuple".into()))?;
    let n = first.dim();
    for m in members {
        if m.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: m.dim(),
            });
        }
    }
    if cyclic_index >= members.len() {
        return Err(Error::InvalidArgument(format!(
            "cyclic index {cyclic_index} out of range 0..{}",
            members.len()
        )));
    }
    for i in 0..members.len() {
        for j in i + 1..members.len() {
            let commutator = relative_commutator(&members[i], &members[j])?;
            if !(commutator <= tol.tau_commute) {
                return Err(Error::NotCommuting { i, j, commutator });
            }
        }
    }

    let jf = jordan_form(&members[cyclic_index], tol)?;
    let ranges = jf.structure.ranges();
    let mut block_toeplitz = Vec::with_capacity(members.len());
    let mut off_block_energy = Vec::with_capacity(members.len());
    let mut structure_residual = 0.0f64;
    for b in members {
        let conj = jf.p_inv.mul(b)?.mul(&jf.p)?;
        let total = conj.frobenius();
        let mut blocks = Vec::with_capacity(ranges.len());
        let mut discarded_sq = 0.0;
        let mut inside_sq = 0.0;
        for &(start, size) in &ranges {
            let d = block(&conj, start, size);
            inside_sq += d.frobenius().powi(2);
            let (t, r) = ToeplitzCoeffs::project_dense(&d)?;
            discarded_sq += r * r;
            blocks.push(t);
        }
        let off = (total * total - inside_sq).max(0.0).sqrt();
        let rel = |v: f64| if total > 0.0 { v / total } else { 0.0 };
        off_block_energy.push(rel(off));
        structure_residual = structure_residual.max(rel((discarded_sq + off * off).sqrt()));
        block_toeplitz.push(blocks);
    }
    if !(structure_residual <= tol.tau_block) {
        return Err(Error::NotUpperToeplitz {
            deviation: structure_residual,
            tolerance: tol.tau_block,
        });
    }
    Ok(ReductionResult {
        p: jf.p,
        p_inv: jf.p_inv,
        j: jf.j,
        structure: jf.structure,
        residual: jf.residual,
        inverse_residual: jf.inverse_residual,
        block_toeplitz,
        structure_residual,
        off_block_energy,
    })
}

impl ReductionResult {
    /// `prod_j C_j^{k_j} y` for the block-Toeplitz members, with powers
    /// taken blockwise.
    pub fn block_orbit_point(&self, k: &[u64], y: &[C64]) -> Result<Vec<C64>> {
        if k.len() != self.block_toeplitz.len() {
            return Err(Error::ExponentArityMismatch {
                expected: self.block_toeplitz.len(),
                found: k.len(),
            });
        }
        let n = self.structure.dim();
        if y.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: y.len(),
            });
        }
        let mut out = Vec::with_capacity(n);
        for (b, (start, size)) in self.structure.ranges().into_iter().enumerate() {
            let mut acc = ToeplitzCoeffs::identity(size)?;
            for (member, &kj) in self.block_toeplitz.iter().zip(k) {
                acc = acc.mul(&member[b].pow_binary(kj))?;
            }
            out.extend(acc.apply(&y[start..start + size])?);
        }
        Ok(out)
    }

    /// Relative distance between `P (prod C_j^{k_j}) P^{-1} x` and
    /// `(prod B_j^{k_j}) x` computed densely from the original members.
    pub fn similarity_deviation(&self, members: &[Dense<C64>], k: &[u64], x: &[C64]) -> Result<f64> {
        let y = self.p_inv.mul_vec(x)?;
        let back = self.p.mul_vec(&self.block_orbit_point(k, &y)?)?;
        let direct = dense_orbit_point(members, k, x)?;
        let scale = direct.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let diff = back
            .iter()
            .zip(&direct)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        Ok(if scale > 0.0 { diff / scale } else { diff })
    }
}

/// `(prod_j B_j^{k_j}) x` by dense repeated multiplication.
pub fn dense_orbit_point(members: &[Dense<C64>], k: &[u64], x: &[C64]) -> Result<Vec<C64>> {
    if k.len() != members.len() {
        return Err(Error::ExponentArityMismatch {
            expected: members.len(),
            found: k.len(),
        });
    }
    let mut v = x.to_vec();
    // apply the rightmost factor first
    for (b, &kj) in members.iter().zip(k).rev() {
        for _ in 0..kj {
            v = b.mul_vec(&v)?;
        }
    }
    Ok(v)
}

impl From<&JordanForm> for JordanStructure {
    fn from(j: &JordanForm) -> Self {
        j.structure.clone()
    }
}
