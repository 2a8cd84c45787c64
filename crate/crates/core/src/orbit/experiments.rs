//! Coverage experiments built on orbit enumeration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::coverage::{check_budgets, CoverageGrid, CoverageReport, Field, GridGeometry};
use super::{OrbitConfig, OrbitConfigEcho, OrbitMode};
use crate::closed_form::product_entries_oracle;
use crate::error::{Error, Result};
use crate::io::TupleFile;
use crate::logcoords::{diagonal_surrogate, equivalence_point_from_logs, tuple_logs};
use crate::scalar::C64;
use crate::toeplitz::ToeplitzCoeffs;
use crate::tuple::{MultiIndex, TupleSpec};

/// Coverage of a whole orbit. Grid mode is split along the first axis and
/// the parts are walked in parallel; the merged report does not depend on
/// the number of workers.
pub fn coverage_of(config: &OrbitConfig, geometry: GridGeometry) -> Result<CoverageReport> {
    config.validate()?;
    let n = config.tuple.dim();
    let grid = if config.mode == OrbitMode::Grid {
        config.check_budget()?;
        let parts = config.grid_partitions(4 * rayon::current_num_threads());
        let grids = parts
            .par_iter()
            .map(|ranges| {
                let mut g = CoverageGrid::new(n, geometry)?;
                let mut err = None;
                config.visit_box(ranges, |_, p| {
                    if let Err(e) = g.add(p) {
                        err.get_or_insert(e);
                    }
                })?;
                err.map_or(Ok(g), Err)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut total = CoverageGrid::new(n, geometry)?;
        for g in &grids {
            total.merge(g)?;
        }
        total
    } else {
        let mut g = CoverageGrid::new(n, geometry)?;
        let mut err = None;
        config.visit(|_, p| {
            if let Err(e) = g.add(p) {
                err.get_or_insert(e);
            }
        })?;
        if let Some(e) = err {
            return Err(e);
        }
        g
    };
    Ok(grid.report())
}

/// Coverage after each budget prefix of the enumeration order. Budgets
/// beyond the number of points are sampled at the end.
pub fn saturation_curve(config: &OrbitConfig, geometry: GridGeometry, budgets: &[u64]) -> Result<CoverageReport> {
    check_budgets(budgets)?;
    let mut grid = CoverageGrid::new(config.tuple.dim(), geometry)?;
    let mut curve = Vec::with_capacity(budgets.len());
    let mut next = 0;
    let mut err = None;
    let mut generated = 0u64;
    config.visit(|_, p| {
        if let Err(e) = grid.add(p) {
            err.get_or_insert(e);
        }
        generated += 1;
        while next < budgets.len() && budgets[next] == generated {
            curve.push((budgets[next], grid.coverage()));
            next += 1;
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    curve.extend(budgets[next..].iter().map(|&b| (b, grid.coverage())));
    let mut r = grid.report();
    r.curve = curve;
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurrogateReport {
    pub n: usize,
    pub m: usize,
    pub samples: u64,
    pub seed: u64,
    pub caps: Vec<u64>,
    /// Orbit point against the point rebuilt from the equivalence point.
    pub orbit_vs_equivalence: f64,
    /// Diagonal surrogate coordinates against exponentials of the equivalence point.
    pub surrogate_vs_equivalence: f64,
    /// Last surrogate coordinate against the last orbit coordinate.
    pub surrogate_vs_orbit: f64,
    pub max_deviation: f64,
    pub worst_k: Vec<u64>,
}

fn rel_dev(a: &[C64], b: &[C64]) -> f64 {
    let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

/// Checks, at sampled exponents, that the orbit point `T x`, the point
/// rebuilt from the equivalence point, and the orbit of `(1, ..., 1, x_n)`
/// under the diagonal surrogate describe the same data.
pub fn surrogate_consistency(
    tuple: &TupleSpec<C64>,
    x: &[C64],
    caps: &[u64],
    samples: u64,
    seed: u64,
) -> Result<SurrogateReport> {
    let n = tuple.dim();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x.len(),
        });
    }
    if caps.len() != tuple.len() {
        return Err(Error::ExponentArityMismatch {
            expected: tuple.len(),
            found: caps.len(),
        });
    }
    if let Some(index) = tuple.zero_leading() {
        return Err(Error::ZeroLeadingCoefficient { index });
    }
    if x[n - 1] == C64::new(0.0, 0.0) {
        return Err(Error::ZeroLastCoordinate);
    }
    let logs = tuple_logs(tuple)?;
    let surrogate = diagonal_surrogate(tuple)?;
    let mut v = vec![C64::new(1.0, 0.0); n];
    v[n - 1] = x[n - 1];

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SurrogateReport {
        n,
        m: tuple.len(),
        samples,
        seed,
        caps: caps.to_vec(),
        orbit_vs_equivalence: 0.0,
        surrogate_vs_equivalence: 0.0,
        surrogate_vs_orbit: 0.0,
        max_deviation: 0.0,
        worst_k: vec![0; caps.len()],
    };
    for _ in 0..samples {
        let k: Vec<u64> = caps.iter().map(|&c| rng.random_range(0..=c)).collect();
        let orbit = product_entries_oracle(tuple, &MultiIndex::from(k.clone()))?.apply(x)?;
        let eq = equivalence_point_from_logs(&logs, &k);
        let rebuilt = eq.to_entries().apply(x)?;
        let s = surrogate.orbit_point(&k, &v);
        let expected: Vec<C64> = eq.coords[..n - 1].iter().map(|z| z.exp()).collect();

        let d1 = rel_dev(&orbit, &rebuilt);
        let d2 = if n > 1 { rel_dev(&s[..n - 1], &expected) } else { 0.0 };
        let d3 = (s[n - 1] - orbit[n - 1]).norm() / orbit[n - 1].norm().max(f64::MIN_POSITIVE);
        report.orbit_vs_equivalence = report.orbit_vs_equivalence.max(d1);
        report.surrogate_vs_equivalence = report.surrogate_vs_equivalence.max(d2);
        report.surrogate_vs_orbit = report.surrogate_vs_orbit.max(d3);
        let d = d1.max(d2).max(d3);
        if !(d <= report.max_deviation) {
            report.max_deviation = d;
            report.worst_k = k;
        }
    }
    Ok(report)
}

fn default_true() -> bool {
    true
}

fn default_one() -> usize {
    1
}

fn default_keep() -> usize {
    10
}

fn default_entry_scale() -> f64 {
    1.0
}

/// A parameter space of tuples to sample and score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchFamily {
    pub n: usize,
    pub m: usize,
    /// Complex entries and vectors; otherwise everything is real and only
    /// real parts are binned.
    #[serde(default = "default_true")]
    pub complex: bool,
    /// Leading coefficient moduli are log-uniform in this range.
    pub leading_modulus: [f64; 2],
    /// Other coefficients are uniform in `[-s, s]` (per real part).
    #[serde(default = "default_entry_scale")]
    pub entry_scale: f64,
    /// Per-generator exponent cap.
    pub caps: u64,
    /// Random exponents per orbit; the full cap grid when absent.
    #[serde(default)]
    pub samples: Option<u64>,
    pub radius: f64,
    pub step: f64,
    /// Score is the minimum coverage over this many random initial vectors.
    #[serde(default = "default_one")]
    pub initial_vectors: usize,
    /// Number of top candidates reported.
    #[serde(default = "default_keep")]
    pub keep: usize,
}

impl SearchFamily {
    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.leading_modulus;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "leading modulus range [{lo}, {hi}] must be positive and ordered"
            )));
        }
        if self.m == 0 || self.initial_vectors == 0 {
            return Err(Error::InvalidArgument("family needs m >= 1 and at least one initial vector".into()));
        }
        if !(self.entry_scale >= 0.0) {
            return Err(Error::InvalidArgument("entry scale must be nonnegative".into()));
        }
        CoverageGrid::new(self.n, self.geometry())?;
        Ok(())
    }

    pub fn geometry(&self) -> GridGeometry {
        GridGeometry {
            radius: self.radius,
            step: self.step,
            field: if self.complex { Field::Complex } else { Field::Real },
        }
    }

    fn scalar(&self, rng: &mut ChaCha8Rng, scale: f64) -> C64 {
        if self.complex {
            C64::new(rng.random_range(-scale..=scale), rng.random_range(-scale..=scale))
        } else {
            C64::new(rng.random_range(-scale..=scale), 0.0)
        }
    }

    fn sample_tuple(&self, rng: &mut ChaCha8Rng) -> Result<TupleSpec<C64>> {
        let [lo, hi] = self.leading_modulus;
        let members = (0..self.m)
            .map(|_| {
                let r = (rng.random_range(lo.ln()..=hi.ln())).exp();
                let lead = if self.complex {
                    C64::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU))
                } else if rng.random_bool(0.5) {
                    C64::new(r, 0.0)
                } else {
                    C64::new(-r, 0.0)
                };
                let mut c = vec![lead];
                c.extend((1..self.n).map(|_| self.scalar(rng, self.entry_scale)));
                ToeplitzCoeffs::new(c)
            })
            .collect::<Result<Vec<_>>>()?;
        TupleSpec::new(members)
    }

    fn sample_vector(&self, rng: &mut ChaCha8Rng) -> Vec<C64> {
        let mut x: Vec<C64> = (0..self.n).map(|_| self.scalar(rng, 1.0)).collect();
        if x[self.n - 1].norm() < 1e-3 {
            x[self.n - 1] = C64::new(1.0, 0.0);
        }
        x
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub index: u64,
    pub seed: u64,
    pub tuple: TupleFile,
    pub vectors: Vec<Vec<[f64; 2]>>,
    pub coverages: Vec<f64>,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchReport {
    pub family: SearchFamily,
    pub budget: u64,
    pub seed: u64,
    pub candidates: Vec<Candidate>,
}

fn score_candidate(family: &SearchFamily, index: u64, seed: u64) -> Result<Candidate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tuple = family.sample_tuple(&mut rng)?;
    let mode = match family.samples {
        Some(samples) => OrbitMode::Random {
            samples,
            seed: rng.random(),
        },
        None => OrbitMode::Grid,
    };
    let mut vectors = Vec::with_capacity(family.initial_vectors);
    let mut coverages = Vec::with_capacity(family.initial_vectors);
    for _ in 0..family.initial_vectors {
        let x = family.sample_vector(&mut rng);
        let config = OrbitConfig::new(tuple.clone(), x.clone(), vec![family.caps; family.m])?.with_mode(mode);
        let mut grid = CoverageGrid::new(family.n, family.geometry())?;
        let mut err = None;
        config.visit(|_, p| {
            if let Err(e) = grid.add(p) {
                err.get_or_insert(e);
            }
        })?;
        if let Some(e) = err {
            return Err(e);
        }
        coverages.push(grid.coverage());
        vectors.push(crate::io::pairs(&x));
    }
    let score = coverages.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(Candidate {
        index,
        seed,
        tuple: TupleFile::from_tuple(&tuple),
        vectors,
        coverages,
        score,
    })
}

/// Samples `budget` tuples from the family, scores each by orbit coverage
/// (minimum over the initial vectors) and returns the best `keep`.
/// Candidates are scored in parallel from per-candidate seeds, so the
/// result depends only on the family, the budget and the seed.
pub fn search_random(family: &SearchFamily, budget: u64, seed: u64) -> Result<SearchReport> {
    family.validate()?;
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..budget).map(|_| master.random()).collect();
    let mut scored = seeds
        .par_iter()
        .enumerate()
        .map(|(i, &s)| score_candidate(family, i as u64, s))
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.index.cmp(&b.index)));
    scored.truncate(family.keep);
    Ok(SearchReport {
        family: family.clone(),
        budget,
        seed,
        candidates: scored,
    })
}

/// Configuration echo plus report, the shape written by the command line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageRun {
    pub config: OrbitConfigEcho,
    pub geometry: GridGeometry,
    pub report: CoverageReport,
}
