//! Eigenvalues with multiplicities for small dense matrices.
//!
//! Raw estimates come from a complex Schur form (or, on request, from the
//! roots of the characteristic polynomial). A defective eigenvalue of
//! multiplicity `m` is returned by any backward-stable method as a ring of
//! `m` nearby values of radius roughly `eps^(1/m)`, so grouping by plain
//! distance does not work. Two estimates are linked when they are within
//! `tau_cluster ||M||_F` of each other, or when the segment joining them lies
//! in the `tau_pseudo ||M||_F` pseudospectrum of `M`. Each group is then
//! certified with its spectral projector, computed by trapezoidal quadrature
//! of the resolvent on a circle around the group: the trace of the projector
//! must equal the group size, and the eigenvalue is refined to
//! `tr(M P) / m`.

use nalgebra::DMatrix;
use num_traits::{One, Zero};

use crate::dense::Dense;
use crate::error::{Error, Result};
use crate::scalar::{Scalar, C64};
use crate::tolerances::Tolerances;

const CONTOUR_NODES: usize = 128;
const SEGMENT_SAMPLES: usize = 9;

/// Source of the raw eigenvalue estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EigenMethod {
    #[default]
    Schur,
    /// Aberth iteration on the characteristic polynomial.
    Aberth,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenCluster {
    pub value: C64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct CertifiedCluster {
    pub cluster: EigenCluster,
    pub projector: DMatrix<C64>,
}

/// Characteristic polynomial `det(zI - M)` by the Faddeev-LeVerrier
/// recurrence, ascending coefficients (the last is 1). Exact for the exact backend.
pub fn char_poly<S: Scalar>(m: &Dense<S>) -> Vec<S> {
    let n = m.dim();
    let mut coeffs = vec![S::zero(); n + 1];
    coeffs[n] = S::one();
    let mut mk = Dense::<S>::zeros(n);
    for k in 1..=n {
        // M_k = M M_{k-1} + c_{n-k+1} I
        let mut next = m.mul(&mk).expect("square");
        for i in 0..n {
            let v = next.get(i, i).clone() + coeffs[n - k + 1].clone();
            next.set(i, i, v);
        }
        let trace = m
            .mul(&next)
            .expect("square")
            .entries()
            .iter()
            .step_by(n + 1)
            .fold(S::zero(), |acc, v| acc + v.clone());
        coeffs[n - k] = -(trace / S::from_u64(k as u64));
        mk = next;
    }
    coeffs
}

fn horner(coeffs: &[C64], z: C64) -> (C64, C64) {
    // value and derivative
    let mut p = C64::zero();
    let mut dp = C64::zero();
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// All roots of a polynomial (ascending coefficients) by Aberth-Ehrlich iteration.
pub fn aberth_roots(coeffs: &[C64]) -> Vec<C64> {
    let mut coeffs = coeffs.to_vec();
    while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
        coeffs.pop();
    }
    let deg = coeffs.len().saturating_sub(1);
    if deg == 0 {
        return Vec::new();
    }
    let lead = coeffs[deg];
    let monic: Vec<C64> = coeffs.iter().map(|c| c / lead).collect();
    // Cauchy bound on root moduli
    let bound = 1.0 + monic[..deg].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let radius = bound * 0.5;
    let mut z: Vec<C64> = (0..deg)
        .map(|i| {
            let theta = 2.0 * std::f64::consts::PI * (i as f64 + 0.25) / deg as f64 + 0.4;
            C64::from_polar(radius, theta)
        })
        .collect();
    for _ in 0..1000 {
        let mut worst = 0.0f64;
        for i in 0..deg {
            let (p, dp) = horner(&monic, z[i]);
            if p.is_zero() {
                continue;
            }
            let ratio = p / dp;
            let repulsion: C64 = (0..deg)
                .filter(|&j| j != i)
                .map(|j| {
                    let d = z[i] - z[j];
                    if d.is_zero() {
                        C64::zero()
                    } else {
                        C64::one() / d
                    }
                })
                .sum();
            let step = ratio / (C64::one() - ratio * repulsion);
            if step.is_finite() {
                z[i] -= step;
                worst = worst.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        if worst < 1e-15 {
            break;
        }
    }
    z
}

/// Raw (unclustered) eigenvalue estimates.
pub fn eigen_estimates(m: &Dense<C64>, method: EigenMethod) -> Vec<C64> {
    match method {
        EigenMethod::Aberth => aberth_roots(&char_poly(m)),
        EigenMethod::Schur => {
            let a = m.to_nalgebra();
            match nalgebra::Schur::try_new(a.clone(), f64::EPSILON, 100_000) {
                Some(s) => {
                    let (_, t) = s.unpack();
                    (0..t.nrows()).map(|i| t[(i, i)]).collect()
                }
                None => aberth_roots(&char_poly(m)),
            }
        }
    }
}

pub(crate) fn sigma_min(a: &DMatrix<C64>) -> f64 {
    a.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

fn shifted(m: &DMatrix<C64>, z: C64) -> DMatrix<C64> {
    let n = m.nrows();
    m - DMatrix::<C64>::identity(n, n) * z
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut i = i;
        while self.0[i] != r {
            let next = self.0[i];
            self.0[i] = r;
            i = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Eigenvalues with algebraic multiplicities, grouped and refined as described
/// in the module docs. Clusters are sorted by real then imaginary part.
pub fn eigenvalues_clustered(m: &Dense<C64>, tol: &Tolerances) -> Result<Vec<EigenCluster>> {
    Ok(certified_clusters(m, tol, EigenMethod::Schur)?
        .into_iter()
        .map(|c| c.cluster)
        .collect())
}

pub fn eigenvalues_clustered_with(
    m: &Dense<C64>,
    tol: &Tolerances,
    method: EigenMethod,
) -> Result<Vec<EigenCluster>> {
    Ok(certified_clusters(m, tol, method)?
        .into_iter()
        .map(|c| c.cluster)
        .collect())
}

pub(crate) fn certified_clusters(
    m: &Dense<C64>,
    tol: &Tolerances,
    method: EigenMethod,
) -> Result<Vec<CertifiedCluster>> {
    let n = m.dim();
    if n == 0 {
        return Err(Error::InvalidDimension { n, max: crate::MAX_DIM });
    }
    if m.entries().iter().any(|z| !z.is_finite_value()) {
        return Err(Error::NonFinite);
    }
    let a = m.to_nalgebra();
    let norm = m.frobenius();
    let scale = if norm > 0.0 { norm } else { 1.0 };
    let roots = eigen_estimates(m, method);
    let link_radius = tol.tau_cluster * scale;
    let pseudo_level = tol.tau_pseudo * scale;

    let mut uf = UnionFind((0..n).collect());
    for i in 0..n {
        for j in i + 1..n {
            if uf.find(i) == uf.find(j) {
                continue;
            }
            let d = (roots[i] - roots[j]).norm();
            let linked = d <= link_radius
                || (1..=SEGMENT_SAMPLES).all(|s| {
                    let t = s as f64 / (SEGMENT_SAMPLES + 1) as f64;
                    let z = roots[i] + (roots[j] - roots[i]) * t;
                    sigma_min(&shifted(&a, z)) <= pseudo_level
                });
            if linked {
                uf.union(i, j);
            }
        }
    }

    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut label = vec![usize::MAX; n];
    for i in 0..n {
        let r = uf.find(i);
        if label[r] == usize::MAX {
            label[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[label[r]].push(i);
    }

    let centroids: Vec<C64> = groups
        .iter()
        .map(|g| g.iter().map(|&i| roots[i]).sum::<C64>() / g.len() as f64)
        .collect();
    for i in 0..groups.len() {
        for j in i + 1..groups.len() {
            let separation = (centroids[i] - centroids[j]).norm();
            if separation < 10.0 * link_radius {
                return Err(Error::ClusterAmbiguity {
                    separation,
                    tolerance: link_radius,
                });
            }
        }
    }

    let mut out = Vec::with_capacity(groups.len());
    for (gi, g) in groups.iter().enumerate() {
        let c = centroids[gi];
        let spread = g.iter().map(|&i| (roots[i] - c).norm()).fold(0.0, f64::max);
        let nearest = (0..n)
            .filter(|i| !g.contains(i))
            .map(|i| (roots[i] - c).norm())
            .fold(f64::INFINITY, f64::min);
        let radius = if nearest.is_finite() {
            if nearest < 2.0 * spread {
                return Err(Error::ClusterAmbiguity {
                    separation: nearest,
                    tolerance: spread,
                });
            }
            0.5 * (spread + nearest)
        } else {
            2.0 * spread + 0.1 * (scale + c.norm())
        };
        let projector = spectral_projector(&a, c, radius)?;
        let trace: C64 = projector.diagonal().iter().sum();
        let mult = g.len();
        if (trace - C64::new(mult as f64, 0.0)).norm() > 0.25 {
            return Err(Error::ClusterAmbiguity {
                separation: nearest,
                tolerance: spread,
            });
        }
        let value = (&a * &projector).diagonal().iter().sum::<C64>() / mult as f64;
        out.push(CertifiedCluster {
            cluster: EigenCluster {
                value,
                multiplicity: mult,
            },
            projector,
        });
    }
    out.sort_by(|x, y| {
        let (a, b) = (x.cluster.value, y.cluster.value);
        a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
    });
    Ok(out)
}

/// `(1 / 2 pi i) \oint (zI - M)^{-1} dz` over the circle `|z - center| = radius`.
fn spectral_projector(a: &DMatrix<C64>, center: C64, radius: f64) -> Result<DMatrix<C64>> {
    let n = a.nrows();
    let mut acc = DMatrix::<C64>::zeros(n, n);
    let offset = 0.5 * std::f64::consts::PI / CONTOUR_NODES as f64;
    for k in 0..CONTOUR_NODES {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / CONTOUR_NODES as f64 + offset;
        let w = C64::from_polar(radius, theta);
        let z = center + w;
        let resolvent = (DMatrix::<C64>::identity(n, n) * z - a)
            .try_inverse()
            .ok_or(Error::ClusterAmbiguity {
                separation: radius,
                tolerance: 0.0,
            })?;
        acc += resolvent * w;
    }
    Ok(acc / C64::new(CONTOUR_NODES as f64, 0.0))
}
