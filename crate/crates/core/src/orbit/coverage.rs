//! Grid coverage of a point cloud inside a box.
//!
//! The box `[-R, R]` on every real axis is cut into cells of side `h`; a
//! cell is hit when some point falls in it. Grids over the same geometry
//! merge by bitset union.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::C64;

/// Largest number of cells a grid may have.
pub const MAX_CELLS: u64 = 1_000_000_000;

/// Which real coordinates of a point are binned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    /// Real parts only (`n` axes).
    Real,
    /// Real and imaginary parts (`2n` axes).
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry {
    pub radius: f64,
    pub step: f64,
    pub field: Field,
}

impl GridGeometry {
    pub fn complex(radius: f64, step: f64) -> Self {
        GridGeometry {
            radius,
            step,
            field: Field::Complex,
        }
    }

    pub fn real(radius: f64, step: f64) -> Self {
        GridGeometry {
            radius,
            step,
            field: Field::Real,
        }
    }

    /// Cells along one axis; `2R/h` rounded up, ignoring rounding noise.
    pub fn cells_per_axis(&self) -> usize {
        let q = 2.0 * self.radius / self.step;
        if (q - q.round()).abs() <= 1e-9 * q {
            q.round() as usize
        } else {
            q.ceil() as usize
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub radius: f64,
    pub step: f64,
    pub cells_total: u64,
    pub cells_hit: u64,
    pub coverage: f64,
    pub points_generated: u64,
    pub points_clipped: u64,
    /// `(budget, coverage)` after the first `budget` points.
    pub curve: Vec<(u64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageGrid {
    geometry: GridGeometry,
    n: usize,
    per_axis: usize,
    axes: usize,
    cells: u64,
    bits: Vec<u64>,
    hit: u64,
    generated: u64,
    clipped: u64,
}

impl CoverageGrid {
    pub fn new(n: usize, geometry: GridGeometry) -> Result<Self> {
        let GridGeometry { radius, step, field } = geometry;
        if !(radius > 0.0 && radius.is_finite() && step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "grid needs positive radius and step, got R = {radius}, h = {step}"
            )));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("grid needs at least one coordinate".into()));
        }
        let per_axis = geometry.cells_per_axis();
        let axes = match field {
            Field::Real => n,
            Field::Complex => 2 * n,
        };
        let cells_f = (per_axis as f64).powi(axes as i32);
        if cells_f > MAX_CELLS as f64 {
            return Err(Error::GridTooLarge {
                cells: cells_f,
                limit: MAX_CELLS,
            });
        }
        let cells = (per_axis as u64).pow(axes as u32);
        Ok(CoverageGrid {
            geometry,
            n,
            per_axis,
            axes,
            cells,
            bits: vec![0; cells.div_ceil(64) as usize],
            hit: 0,
            generated: 0,
            clipped: 0,
        })
    }

    pub fn geometry(&self) -> GridGeometry {
        self.geometry
    }

    pub fn cells_total(&self) -> u64 {
        self.cells
    }

    pub fn cells_hit(&self) -> u64 {
        self.hit
    }

    pub fn coverage(&self) -> f64 {
        self.hit as f64 / self.cells as f64
    }

    fn axis_index(&self, v: f64) -> Option<usize> {
        let r = self.geometry.radius;
        if !(v.abs() <= r) {
            return None;
        }
        let i = ((v + r) / self.geometry.step).floor() as usize;
        Some(i.min(self.per_axis - 1))
    }

    fn cell(&self, point: &[C64]) -> Option<u64> {
        let mut index = 0u64;
        let per = self.per_axis as u64;
        for z in point {
            index = index * per + self.axis_index(z.re)? as u64;
            if self.geometry.field == Field::Complex {
                index = index * per + self.axis_index(z.im)? as u64;
            }
        }
        Some(index)
    }

    /// Records one generated point; `None` or a point outside the box counts as clipped.
    pub fn add(&mut self, point: Option<&[C64]>) -> Result<bool> {
        self.generated += 1;
        let Some(p) = point else {
            self.clipped += 1;
            return Ok(false);
        };
        if p.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: p.len(),
            });
        }
        match self.cell(p) {
            Some(c) => {
                let (w, b) = ((c / 64) as usize, c % 64);
                if self.bits[w] & (1 << b) == 0 {
                    self.bits[w] |= 1 << b;
                    self.hit += 1;
                }
                Ok(true)
            }
            None => {
                self.clipped += 1;
                Ok(false)
            }
        }
    }

    /// Bitset union; counters add.
    pub fn merge(&mut self, other: &CoverageGrid) -> Result<()> {
        if self.n != other.n || self.geometry != other.geometry {
            return Err(Error::InvalidArgument("cannot merge grids with different geometry".into()));
        }
        let mut hit = 0;
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
            hit += a.count_ones() as u64;
        }
        self.hit = hit;
        self.generated += other.generated;
        self.clipped += other.clipped;
        Ok(())
    }

    pub fn report(&self) -> CoverageReport {
        CoverageReport {
            radius: self.geometry.radius,
            step: self.geometry.step,
            cells_total: self.cells,
            cells_hit: self.hit,
            coverage: self.coverage(),
            points_generated: self.generated,
            points_clipped: self.clipped,
            curve: Vec::new(),
        }
    }

    pub fn axes(&self) -> usize {
        self.axes
    }
}

/// Coverage of a finite point set, with the curve sampled at `budgets`
/// (prefix lengths, increasing).
pub fn coverage<'a>(
    n: usize,
    points: impl IntoIterator<Item = &'a [C64]>,
    geometry: GridGeometry,
    budgets: &[u64],
) -> Result<CoverageReport> {
    check_budgets(budgets)?;
    let mut grid = CoverageGrid::new(n, geometry)?;
    let mut curve = Vec::with_capacity(budgets.len());
    let mut next = budgets.iter().peekable();
    for p in points {
        grid.add(Some(p))?;
        while next.peek().is_some_and(|&&b| b == grid.generated) {
            curve.push((*next.next().expect("peeked"), grid.coverage()));
        }
    }
    for &b in next {
        curve.push((b, grid.coverage()));
    }
    let mut r = grid.report();
    r.curve = curve;
    Ok(r)
}

pub(crate) fn check_budgets(budgets: &[u64]) -> Result<()> {
    if budgets.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("budgets must be strictly increasing".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn empty_and_single_point() {
        let g = GridGeometry::complex(2.0, 0.05);
        let r = coverage(1, std::iter::empty(), g, &[]).unwrap();
        assert_eq!(r.coverage, 0.0);
        assert_eq!(r.cells_total, 6400);
        let origin = [c(0.0, 0.0)];
        let r = coverage(1, [&origin[..]], g, &[]).unwrap();
        assert_eq!(r.cells_hit, 1);
        assert_eq!(r.coverage, 1.0 / 6400.0);
    }

    #[test]
    fn cell_centers_saturate() {
        let g = GridGeometry::complex(1.0, 0.25);
        let per = g.cells_per_axis();
        assert_eq!(per, 8);
        let centers: Vec<[C64; 1]> = (0..per)
            .flat_map(|i| (0..per).map(move |j| [c(-1.0 + 0.25 * (i as f64 + 0.5), -1.0 + 0.25 * (j as f64 + 0.5))]))
            .collect();
        let r = coverage(1, centers.iter().map(|p| &p[..]), g, &[]).unwrap();
        assert_eq!(r.coverage, 1.0);
    }

    #[test]
    fn boundary_and_outside() {
        let mut grid = CoverageGrid::new(1, GridGeometry::real(1.0, 0.5)).unwrap();
        assert!(grid.add(Some(&[c(1.0, 9.0)])).unwrap());
        assert!(grid.add(Some(&[c(-1.0, 0.0)])).unwrap());
        assert!(!grid.add(Some(&[c(1.0 + 1e-12, 0.0)])).unwrap());
        assert!(!grid.add(Some(&[c(f64::NAN, 0.0)])).unwrap());
        assert!(!grid.add(None).unwrap());
        let r = grid.report();
        assert_eq!((r.cells_total, r.cells_hit, r.points_generated, r.points_clipped), (4, 2, 5, 3));
    }

    #[test]
    fn too_large() {
        assert!(matches!(
            CoverageGrid::new(3, GridGeometry::complex(2.0, 0.05)),
            Err(Error::GridTooLarge { .. })
        ));
        assert!(CoverageGrid::new(1, GridGeometry::complex(2.0, 0.0)).is_err());
    }

    #[test]
    fn curve_samples_prefixes() {
        let pts: Vec<[C64; 1]> = (0..10).map(|i| [c(-0.95 + 0.2 * i as f64, 0.0)]).collect();
        let r = coverage(1, pts.iter().map(|p| &p[..]), GridGeometry::real(1.0, 0.2), &[1, 5, 10, 20]).unwrap();
        assert_eq!(r.curve, vec![(1, 0.1), (5, 0.5), (10, 1.0), (20, 1.0)]);
        assert!(coverage(1, std::iter::empty(), GridGeometry::real(1.0, 0.2), &[5, 5]).is_err());
    }
}
