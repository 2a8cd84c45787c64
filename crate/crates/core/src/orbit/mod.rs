//! Orbits `{A_1^{k_1} ... A_m^{k_m} x}` of Toeplitz tuples.
//!
//! Points are generated from per-axis power tables. Each table entry stores
//! a power `A_j^k` as normalized coefficients times a power of two, so
//! leading coefficients far from the unit circle do not overflow the
//! tables; a point whose norm exceeds [`OVERFLOW_GUARD`] is discarded and
//! counted as clipped.

pub mod coverage;
pub mod experiments;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{pairs, PointRow, TupleFile};
use crate::scalar::C64;
use crate::tuple::TupleSpec;

pub use coverage::{CoverageGrid, CoverageReport, Field, GridGeometry, MAX_CELLS};
pub use experiments::{
    coverage_of, saturation_curve, search_random, surrogate_consistency, Candidate, CoverageRun, SearchFamily, SearchReport,
    SurrogateReport,
};

/// Points with a larger Euclidean norm are discarded as overflow.
pub const OVERFLOW_GUARD: f64 = 1e12;

/// Default hard cap on the number of enumerated exponents.
pub const DEFAULT_MAX_POINTS: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum OrbitMode {
    /// Lexicographic order over the cap box, last exponent fastest.
    Grid,
    /// Graded by `max_j k_j`; the first `(s + 1)^m` points form the cap-`s` grid.
    Shell,
    /// `samples` exponents drawn uniformly from the cap box.
    Random { samples: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitConfig {
    pub tuple: TupleSpec<C64>,
    pub x: Vec<C64>,
    pub caps: Vec<u64>,
    pub mode: OrbitMode,
    /// Discard points with a coordinate of modulus above this radius.
    pub clip: Option<f64>,
    /// Exponents start at 1 instead of 0.
    pub positive_only: bool,
    pub max_points: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitConfigEcho {
    pub tuple: TupleFile,
    pub x: Vec<[f64; 2]>,
    pub caps: Vec<u64>,
    #[serde(flatten)]
    pub mode: OrbitMode,
    pub clip: Option<f64>,
    pub positive_only: bool,
    pub max_points: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct OrbitStats {
    pub generated: u64,
    pub clipped: u64,
}

impl OrbitConfig {
    pub fn new(tuple: TupleSpec<C64>, x: Vec<C64>, caps: Vec<u64>) -> Result<Self> {
        let c = OrbitConfig {
            tuple,
            x,
            caps,
            mode: OrbitMode::Grid,
            clip: None,
            positive_only: false,
            max_points: DEFAULT_MAX_POINTS,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn with_mode(mut self, mode: OrbitMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_clip(mut self, radius: f64) -> Self {
        self.clip = Some(radius);
        self
    }

    pub fn positive_only(mut self, yes: bool) -> Self {
        self.positive_only = yes;
        self
    }

    pub fn with_max_points(mut self, max: u64) -> Self {
        self.max_points = max;
        self
    }

    pub fn echo(&self) -> OrbitConfigEcho {
        OrbitConfigEcho {
            tuple: TupleFile::from_tuple(&self.tuple),
            x: pairs(&self.x),
            caps: self.caps.clone(),
            mode: self.mode,
            clip: self.clip,
            positive_only: self.positive_only,
            max_points: self.max_points,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.x.len() != self.tuple.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.tuple.dim(),
                found: self.x.len(),
            });
        }
        if self.x.iter().any(|z| !z.is_finite()) {
            return Err(Error::NonFinite);
        }
        if self.caps.len() != self.tuple.len() {
            return Err(Error::ExponentArityMismatch {
                expected: self.tuple.len(),
                found: self.caps.len(),
            });
        }
        if let Some(r) = self.clip {
            if !(r > 0.0) || !r.is_finite() {
                return Err(Error::InvalidArgument(format!("clip radius must be positive, got {r}")));
            }
        }
        if self.positive_only && self.caps.contains(&0) {
            return Err(Error::InvalidArgument("positive exponents need every cap >= 1".into()));
        }
        Ok(())
    }

    fn lower(&self) -> u64 {
        u64::from(self.positive_only)
    }

    /// Number of exponents the configuration enumerates.
    pub fn point_count(&self) -> u128 {
        match self.mode {
            OrbitMode::Random { samples, .. } => samples as u128,
            _ => self
                .caps
                .iter()
                .map(|&k| (k + 1 - self.lower()) as u128)
                .product(),
        }
    }

    fn check_budget(&self) -> Result<()> {
        let count = self.point_count();
        if count > self.max_points as u128 {
            return Err(Error::BudgetExceeded {
                requested: count.min(u64::MAX as u128) as u64,
                limit: self.max_points,
            });
        }
        Ok(())
    }

    /// Calls `f(k, point)` for every enumerated exponent in mode order;
    /// `point` is `None` when the point was clipped or overflowed.
    pub fn visit(&self, mut f: impl FnMut(&[u64], Option<&[C64]>)) -> Result<OrbitStats> {
        self.validate()?;
        self.check_budget()?;
        let walker = Walker::new(self)?;
        let lo = self.lower();
        let mut stats = OrbitStats::default();
        let mut emit = |k: &[u64], p: Option<&[C64]>| {
            stats.generated += 1;
            if p.is_none() {
                stats.clipped += 1;
            }
            f(k, p)
        };
        match self.mode {
            OrbitMode::Grid => {
                let ranges: Vec<(u64, u64)> = self.caps.iter().map(|&k| (lo, k)).collect();
                walker.walk_box(&ranges, &mut emit);
            }
            OrbitMode::Shell => {
                let top = self.caps.iter().copied().max().unwrap_or(0);
                for s in lo..=top {
                    for ranges in shell_boxes(&self.caps, lo, s) {
                        walker.walk_box(&ranges, &mut emit);
                    }
                }
            }
            OrbitMode::Random { samples, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut k = vec![0u64; self.caps.len()];
                let mut buf = vec![C64::new(0.0, 0.0); self.x.len()];
                for _ in 0..samples {
                    for (kj, &cap) in k.iter_mut().zip(&self.caps) {
                        *kj = rng.random_range(lo..=cap);
                    }
                    let ok = walker.point_at(&k, &mut buf);
                    emit(&k, ok.then_some(&buf[..]));
                }
            }
        }
        Ok(stats)
    }

    /// Partitions grid mode along the first axis into at most `parts`
    /// disjoint sub-boxes.
    pub(crate) fn grid_partitions(&self, parts: usize) -> Vec<Vec<(u64, u64)>> {
        let lo = self.lower();
        let first = self.caps[0];
        let len = first + 1 - lo;
        let parts = (parts.max(1) as u64).min(len);
        let mut out = Vec::with_capacity(parts as usize);
        let mut start = lo;
        for p in 0..parts {
            let size = len / parts + u64::from(p < len % parts);
            let mut ranges: Vec<(u64, u64)> = self.caps.iter().map(|&k| (lo, k)).collect();
            ranges[0] = (start, start + size - 1);
            out.push(ranges);
            start += size;
        }
        out
    }

    /// Walks one sub-box of the grid.
    pub(crate) fn visit_box(&self, ranges: &[(u64, u64)], mut f: impl FnMut(&[u64], Option<&[C64]>)) -> Result<()> {
        self.validate()?;
        Walker::new(self)?.walk_box(ranges, &mut f);
        Ok(())
    }
}

/// Sub-boxes whose union is `{k : max_j k_j = s}` inside the caps, split by
/// the first axis attaining the maximum.
fn shell_boxes(caps: &[u64], lo: u64, s: u64) -> Vec<Vec<(u64, u64)>> {
    let mut out = Vec::new();
    for i in 0..caps.len() {
        if caps[i] < s {
            continue;
        }
        let mut ranges = Vec::with_capacity(caps.len());
        let mut empty = false;
        for (j, &cap) in caps.iter().enumerate() {
            let hi = if j < i {
                if s == 0 {
                    empty = true;
                    0
                } else {
                    cap.min(s - 1)
                }
            } else if j == i {
                s
            } else {
                cap.min(s)
            };
            let lo_j = if j == i { s } else { lo };
            if hi < lo_j {
                empty = true;
            }
            ranges.push((lo_j, hi));
        }
        if !empty {
            out.push(ranges);
        }
    }
    out
}

/// Coefficients times `2^exp`, normalized so the largest modulus lies in `[1, 2)`.
#[derive(Debug, Clone)]
struct Scaled {
    mant: Vec<C64>,
    exp: i64,
}

fn pow2(e: i64) -> f64 {
    // two steps keep intermediate factors representable
    let e = e.clamp(-2200, 2200) as i32;
    2f64.powi(e / 2) * 2f64.powi(e - e / 2)
}

impl Scaled {
    fn identity(n: usize) -> Self {
        let mut mant = vec![C64::new(0.0, 0.0); n];
        mant[0] = C64::new(1.0, 0.0);
        Scaled { mant, exp: 0 }
    }

    fn normalized(mut mant: Vec<C64>, mut exp: i64) -> Self {
        let big = mant.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if big > 0.0 && big.is_finite() {
            let e = big.log2().floor() as i64;
            let f = pow2(-e);
            for z in &mut mant {
                *z *= f;
            }
            exp += e;
        }
        Scaled { mant, exp }
    }

    fn mul(&self, other: &Scaled) -> Scaled {
        let n = self.mant.len();
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (i, a) in self.mant.iter().enumerate() {
            for (o, b) in out[i..].iter_mut().zip(&other.mant) {
                *o += a * b;
            }
        }
        Scaled::normalized(out, self.exp + other.exp)
    }

    /// Writes `2^exp * T(mant) x` into `out`; false on overflow.
    fn apply(&self, x: &[C64], out: &mut [C64]) -> bool {
        let n = x.len();
        for i in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for (c, xv) in self.mant.iter().zip(&x[i..]) {
                acc += c * xv;
            }
            out[i] = acc;
        }
        if out.iter().all(|z| *z == C64::new(0.0, 0.0)) {
            return true;
        }
        if self.exp > 1100 {
            return false;
        }
        let f = pow2(self.exp);
        for z in out.iter_mut() {
            *z *= f;
        }
        let norm = out.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        norm.is_finite() && norm <= OVERFLOW_GUARD
    }
}

struct Walker<'a> {
    tables: Vec<Vec<Scaled>>,
    x: &'a [C64],
    clip: Option<f64>,
    n: usize,
}

impl<'a> Walker<'a> {
    fn new(config: &'a OrbitConfig) -> Result<Self> {
        let n = config.tuple.dim();
        let tables = config
            .tuple
            .members()
            .iter()
            .zip(&config.caps)
            .map(|(a, &cap)| {
                let base = Scaled::normalized(a.coeffs().to_vec(), 0);
                let mut t = Vec::with_capacity(cap as usize + 1);
                t.push(Scaled::identity(n));
                for k in 1..=cap as usize {
                    let next = t[k - 1].mul(&base);
                    t.push(next);
                }
                t
            })
            .collect();
        Ok(Walker {
            tables,
            x: &config.x,
            clip: config.clip,
            n,
        })
    }

    fn finish(&self, ok: bool, out: &[C64]) -> bool {
        ok && self.clip.is_none_or(|r| out.iter().all(|z| z.norm() <= r))
    }

    fn point_at(&self, k: &[u64], out: &mut [C64]) -> bool {
        let mut acc = Scaled::identity(self.n);
        for (t, &kj) in self.tables.iter().zip(k) {
            acc = acc.mul(&t[kj as usize]);
        }
        let ok = acc.apply(self.x, out);
        self.finish(ok, out)
    }

    /// Lexicographic walk over a box with prefix products cached per axis.
    fn walk_box(&self, ranges: &[(u64, u64)], f: &mut impl FnMut(&[u64], Option<&[C64]>)) {
        let m = ranges.len();
        if ranges.iter().any(|&(lo, hi)| hi < lo) {
            return;
        }
        let mut k: Vec<u64> = ranges.iter().map(|r| r.0).collect();
        // prefix[j] = prod_{i < j} A_i^{k_i}
        let mut prefix: Vec<Scaled> = Vec::with_capacity(m);
        prefix.push(Scaled::identity(self.n));
        for j in 1..m {
            let p = prefix[j - 1].mul(&self.tables[j - 1][k[j - 1] as usize]);
            prefix.push(p);
        }
        let mut out = vec![C64::new(0.0, 0.0); self.n];
        loop {
            let last = m - 1;
            let full = prefix[last].mul(&self.tables[last][k[last] as usize]);
            let ok = full.apply(self.x, &mut out);
            let ok = self.finish(ok, &out);
            f(&k, ok.then_some(&out[..]));

            // advance the odometer
            let mut j = last;
            loop {
                if k[j] < ranges[j].1 {
                    k[j] += 1;
                    break;
                }
                k[j] = ranges[j].0;
                if j == 0 {
                    return;
                }
                j -= 1;
            }
            for i in j + 1..m {
                prefix[i] = prefix[i - 1].mul(&self.tables[i - 1][k[i - 1] as usize]);
            }
        }
    }
}

/// Every enumerated point that survived clipping, with the run statistics.
pub fn orbit_points(config: &OrbitConfig) -> Result<(Vec<PointRow>, OrbitStats)> {
    let mut rows = Vec::new();
    let stats = config.visit(|k, p| {
        if let Some(p) = p {
            rows.push(PointRow {
                k: k.to_vec(),
                point: p.to_vec(),
            });
        }
    })?;
    Ok((rows, stats))
}
