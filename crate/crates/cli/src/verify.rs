//! `tdyn verify`: cross-checks of closed forms, logarithms, reductions and
//! orbit experiments against independent computations.

use std::collections::BTreeSet;
use std::path::Path;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use toeplitz_dynamics::io::{pairs, TupleFile};
use toeplitz_dynamics::jordan::{toeplitzize, JordanStructure};
use toeplitz_dynamics::orbit::{search_random, surrogate_consistency, SearchFamily};
use toeplitz_dynamics::scalar::{gaussian_rational, relative_deviation};
use toeplitz_dynamics::{
    compositions_with_weight, diagonal_surrogate, equivalence_point, lemma_forms, nilpotent_exp, nilpotent_log,
    pow_entries_multinomial, product_entries, product_entries_oracle, shift_dense, Dense, Error, Exact, MultiIndex,
    Scalar, ToeplitzCoeffs, Tolerances, TupleSpec, C64,
};

use crate::{CliError, CliResult};

pub const BUNDLED_FIXTURE: &str = include_str!("../fixtures/closed_form_n4.json");

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClosedFormFixture {
    pub tuple: TupleFile,
    pub checks: Vec<FixtureCheck>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureCheck {
    pub exponents: Vec<u64>,
    pub entries: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn row(name: &str, result: Result<String, String>) -> CheckRow {
    match result {
        Ok(detail) => CheckRow {
            name: name.into(),
            pass: true,
            detail,
        },
        Err(detail) => CheckRow {
            name: name.into(),
            pass: false,
            detail,
        },
    }
}

type Check = Result<String, String>;

fn lib<T>(r: Result<T, Error>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn small_rational(rng: &mut ChaCha8Rng) -> Exact {
    gaussian_rational(
        rng.random_range(-9..=9),
        rng.random_range(1..=6),
        rng.random_range(-9..=9),
        rng.random_range(1..=6),
    )
}

fn nonzero_rational(rng: &mut ChaCha8Rng) -> Exact {
    loop {
        let z = small_rational(rng);
        if !z.is_zero() {
            return z;
        }
    }
}

fn exact_tuple(rng: &mut ChaCha8Rng, n: usize, m: usize) -> TupleSpec<Exact> {
    let members = (0..m)
        .map(|_| {
            let mut c = vec![nonzero_rational(rng)];
            c.extend((1..n).map(|_| small_rational(rng)));
            ToeplitzCoeffs::new(c).expect("valid dimension")
        })
        .collect();
    TupleSpec::new(members).expect("same dimension")
}

fn random_c64(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn float_tuple(rng: &mut ChaCha8Rng, n: usize, m: usize) -> TupleSpec<C64> {
    let members = (0..m)
        .map(|_| {
            let lead = C64::from_polar(rng.random_range(0.8..1.25), rng.random_range(0.0..std::f64::consts::TAU));
            let mut c = vec![lead];
            c.extend((1..n).map(|_| random_c64(rng)));
            ToeplitzCoeffs::new(c).expect("valid dimension")
        })
        .collect();
    TupleSpec::new(members).expect("same dimension")
}

fn check_shift() -> Check {
    let u: Dense<C64> = shift_dense(3, 3);
    if u.entries().iter().any(|z| !z.is_zero()) {
        return Err("U_3 of size 3 is not zero".into());
    }
    for p in 0..5 {
        for q in 0..5 {
            let lhs = shift_dense::<Exact>(4, p).mul(&shift_dense(4, q)).map_err(|e| e.to_string())?;
            if lhs != shift_dense(4, p + q) {
                return Err(format!("U_{p} U_{q} != U_{}", p + q));
            }
        }
    }
    Ok("U_p = 0 for p >= n; U_p U_q = U_{p+q} for p, q < 5".into())
}

fn check_weight_zero() -> Check {
    for k in 0..=8u64 {
        let got: Vec<Vec<u64>> = compositions_with_weight(k, 3, 0).iter().map(|c| c.parts().to_vec()).collect();
        if got != vec![vec![k, 0, 0]] {
            return Err(format!("k = {k}: {got:?}"));
        }
    }
    Ok("only (k, 0, 0) for k <= 8".into())
}

fn check_weight_two() -> Check {
    for k in 2..=8u64 {
        let got: BTreeSet<Vec<u64>> = compositions_with_weight(k, 3, 2)
            .iter()
            .map(|c| c.parts().to_vec())
            .collect();
        let want: BTreeSet<Vec<u64>> = [vec![k - 1, 0, 1], vec![k - 2, 2, 0]].into_iter().collect();
        if got != want {
            return Err(format!("k = {k}: {got:?}"));
        }
    }
    Ok("(k-1, 0, 1) and (k-2, 2, 0) for 2 <= k <= 8".into())
}

fn check_worked_entries(rng: &mut ChaCha8Rng) -> Check {
    for case in 0..20 {
        let a = exact_tuple(rng, 3, 1).members()[0].clone();
        let k: u64 = rng.random_range(2..=8);
        let got = pow_entries_multinomial(&a, k);
        let c = a.coeffs();
        let kk = Exact::from_u64(k);
        let c11 = c[0].pow_u64(k);
        let c12 = kk.clone() * c[0].pow_u64(k - 1) * c[1].clone();
        let c13 = kk.clone() * c[0].pow_u64(k - 1) * c[2].clone()
            + kk.clone() * (kk - Exact::one()) / Exact::from_u64(2) * c[0].pow_u64(k - 2) * c[1].clone() * c[1].clone();
        if got.coeffs() != [c11, c12, c13] {
            return Err(format!("case {case}, k = {k}"));
        }
    }
    Ok("c_11, c_12, c_13 exact on 20 rational inputs, k <= 8".into())
}

fn check_lemma_three(rng: &mut ChaCha8Rng) -> Check {
    let t = exact_tuple(rng, 3, 3);
    let k = MultiIndex::from(vec![2, 3, 4]);
    let want = lib(product_entries(&t, &k))?;
    // b_1 (sum_j k_j (a3/a1 - a2^2/(2 a1^2)) + (1/2)(sum_j k_j a2/a1)^2)
    let mut s1 = Exact::zero();
    let mut s2 = Exact::zero();
    let half = Exact::one() / Exact::from_u64(2);
    for (a, &kj) in t.members().iter().zip(k.as_slice()) {
        let c = a.coeffs();
        let x = c[1].clone() / c[0].clone();
        s1 = s1 + Exact::from_u64(kj) * x.clone();
        s2 = s2 + Exact::from_u64(kj) * (c[2].clone() / c[0].clone() - half.clone() * x.clone() * x);
    }
    let b1 = want.coeffs()[0].clone();
    let b3 = b1.clone() * (s2 + half * s1.clone() * s1);
    if b3 != want.coeffs()[2] {
        return Err("b_3 differs from the product".into());
    }
    let forms = lib(lemma_forms(&t, &k))?;
    if forms.raw != want || forms.regrouped != want || forms.ratio != want {
        return Err("explicit forms differ from the product".into());
    }
    Ok("b_3 with the (1/2)(sum)^2 term, k = (2, 3, 4), exact".into())
}

fn check_log_three(rng: &mut ChaCha8Rng) -> Check {
    for _ in 0..20 {
        let a2 = small_rational(rng);
        let a3 = small_rational(rng);
        let a = ToeplitzCoeffs::new(vec![Exact::one(), a2.clone(), a3.clone()]).expect("n = 3");
        let l = lib(nilpotent_log(&a))?;
        let want = vec![a2.clone(), a3 - a2.clone() * a2 / Exact::from_u64(2)];
        if l.lam != want {
            return Err(format!("lam = {:?}", l.lam));
        }
    }
    Ok("lam_2 = a_2, lam_3 = a_3 - a_2^2/2 on 20 rational inputs".into())
}

fn check_equivalence_two(rng: &mut ChaCha8Rng) -> Check {
    for _ in 0..20 {
        let t = exact_tuple(rng, 2, 2);
        let k = [rng.random_range(0..=9u64), rng.random_range(0..=9u64)];
        let p = lib(equivalence_point(&t, &MultiIndex::from(k.to_vec())))?;
        let [a, b] = [&t.members()[0], &t.members()[1]].map(|m| m.coeffs().to_vec());
        let first = Exact::from_u64(k[0]) * a[1].clone() / a[0].clone() + Exact::from_u64(k[1]) * b[1].clone() / b[0].clone();
        let second = a[0].pow_u64(k[0]) * b[0].pow_u64(k[1]);
        if p.coords != vec![first, second] {
            return Err(format!("k = {k:?}"));
        }
    }
    Ok("(k_1 a_12/a_11 + k_2 a_22/a_21, a_11^k_1 a_21^k_2) on 20 rational tuples".into())
}

fn check_surrogate_two(rng: &mut ChaCha8Rng) -> Check {
    let t = float_tuple(rng, 2, 2);
    let d = lib(diagonal_surrogate(&t))?;
    for (m, diag) in t.members().iter().zip(&d.diagonals) {
        let c = m.coeffs();
        let want = [(c[1] / c[0]).exp(), c[0]];
        if relative_deviation(diag, &want) > 1e-15 {
            return Err(format!("{diag:?} vs {want:?}"));
        }
    }
    Ok("diag(e^{a_2/a_1}, a_1) per member".into())
}

fn check_fixture(fixture: &ClosedFormFixture) -> Check {
    let t = lib(fixture.tuple.exact_tuple())?;
    if t.dim() != 4 {
        return Err(format!("fixture has n = {}", t.dim()));
    }
    let mut worst = 0.0f64;
    for c in &fixture.checks {
        let k = lib(MultiIndex::new(c.exponents.clone()))?;
        let want = lib(product_entries(&t, &k))?;
        let forms = lib(lemma_forms(&t, &k))?;
        for (name, f) in [("raw", &forms.raw), ("regrouped", &forms.regrouped), ("ratio", &forms.ratio)] {
            if f != &want {
                return Err(format!("{name} form differs at k = {:?}", c.exponents));
            }
        }
        let stored: Vec<C64> = c.entries.iter().map(|p| C64::new(p[0], p[1])).collect();
        let d = relative_deviation(&want.to_c64().coeffs().to_vec(), &stored);
        worst = worst.max(d);
        if d > 1e-14 {
            return Err(format!("stored entries differ at k = {:?} ({d:e})", c.exponents));
        }
    }
    Ok(format!(
        "{} exponents, all explicit forms exact, stored entries within {worst:e}",
        fixture.checks.len()
    ))
}

fn check_closed_form_float(rng: &mut ChaCha8Rng) -> Check {
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(2..=6);
        let m = rng.random_range(1..=4);
        let t = float_tuple(rng, n, m);
        let k = MultiIndex::from((0..m).map(|_| rng.random_range(0..=20)).collect::<Vec<u64>>());
        let a = lib(product_entries(&t, &k))?;
        let b = lib(product_entries_oracle(&t, &k))?;
        worst = worst.max(relative_deviation(a.coeffs(), b.coeffs()));
    }
    if worst > 1e-9 {
        return Err(format!("max relative deviation {worst:e}"));
    }
    Ok(format!("50 random instances, max relative deviation {worst:e}"))
}

fn check_log_round_trip(rng: &mut ChaCha8Rng) -> Check {
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(1..=8);
        let a = float_tuple(rng, n, 1).members()[0].clone();
        let back = nilpotent_exp(&lib(nilpotent_log(&a))?);
        worst = worst.max(relative_deviation(back.coeffs(), a.coeffs()));
    }
    if worst > 1e-12 {
        return Err(format!("max relative deviation {worst:e}"));
    }
    Ok(format!("50 random members, n <= 8, max deviation {worst:e}"))
}

fn block_diag(blocks: &[Dense<C64>]) -> Dense<C64> {
    let n = blocks.iter().map(|b| b.dim()).sum();
    let mut out = Dense::zeros(n);
    let mut s = 0;
    for b in blocks {
        for i in 0..b.dim() {
            for j in 0..b.dim() {
                out.set(s + i, s + j, *b.get(i, j));
            }
        }
        s += b.dim();
    }
    out
}

fn check_reduction(rng: &mut ChaCha8Rng, tol: &Tolerances) -> Check {
    let mut worst = [0.0f64; 3];
    for case in 0..20 {
        let n = rng.random_range(2..=5);
        let mut sizes = Vec::new();
        let mut left = n;
        while left > 0 {
            let s = rng.random_range(1..=left);
            sizes.push(s);
            left -= s;
        }
        let mut values: Vec<C64> = Vec::new();
        while values.len() < sizes.len() {
            let z = C64::from_polar(rng.random_range(0.7..1.3), rng.random_range(0.0..std::f64::consts::TAU));
            if values.iter().all(|w| (w - z).norm() > 0.3) {
                values.push(z);
            }
        }
        let structure = JordanStructure {
            blocks: values.into_iter().zip(sizes.iter().copied()).collect(),
        };
        let partner = block_diag(
            &sizes
                .iter()
                .map(|&s| float_tuple(rng, s, 1).members()[0].to_dense())
                .collect::<Vec<_>>(),
        );
        let (q, q_inv) = loop {
            let q = Dense::from_fn(n, |_, _| random_c64(rng));
            let sv = q.to_nalgebra().svd(false, false).singular_values;
            let cond = sv.max() / sv.min();
            if cond <= 1e3 {
                let inv = q.to_nalgebra().try_inverse().ok_or("singular Q")?;
                break (q, lib(Dense::from_nalgebra(&inv))?);
            }
        };
        let conj = |b: &Dense<C64>| lib(q.mul(b).and_then(|m| m.mul(&q_inv)));
        let members = vec![conj(&structure.to_dense())?, conj(&partner)?];
        let r = toeplitzize(&members, 0, tol).map_err(|e| format!("case {case}: {e}"))?;
        let k = [rng.random_range(0..=6u64), rng.random_range(0..=6u64)];
        let x: Vec<C64> = (0..n).map(|_| random_c64(rng)).collect();
        let dev = lib(r.similarity_deviation(&members, &k, &x))?;
        worst[0] = worst[0].max(r.residual);
        worst[1] = worst[1].max(r.structure_residual);
        worst[2] = worst[2].max(dev);
    }
    if worst[0] > 1e-7 || worst[1] > 1e-6 || worst[2] > 1e-8 {
        return Err(format!("residuals {:e}, {:e}, {:e}", worst[0], worst[1], worst[2]));
    }
    Ok(format!(
        "20 conjugates: jordan {:e}, structure {:e}, similarity {:e}",
        worst[0], worst[1], worst[2]
    ))
}

fn check_rejections(tol: &Tolerances) -> Check {
    let s = lib(Dense::from_rows(vec![
        vec![C64::zero(), C64::one()],
        vec![C64::zero(), C64::zero()],
    ]))?;
    let t = lib(Dense::from_rows(vec![
        vec![C64::zero(), C64::zero()],
        vec![C64::one(), C64::zero()],
    ]))?;
    match toeplitzize(&[s, t], 0, tol) {
        Err(Error::NotCommuting { .. }) => {}
        other => return Err(format!("shift and transpose: {other:?}")),
    }
    let id = Dense::<C64>::identity(2);
    match toeplitzize(&[id.clone(), id], 0, tol) {
        Err(Error::NotCyclic { .. }) => {}
        other => return Err(format!("identity: {other:?}")),
    }
    Ok("non-commuting pair and identity rejected".into())
}

fn check_shear() -> Check {
    let a = ToeplitzCoeffs::new(vec![Exact::one(), Exact::one()]).expect("n = 2");
    let t = TupleSpec::new(vec![a.clone()]).expect("one member");
    let k = MultiIndex::from(vec![3]);
    let all = [
        pow_entries_multinomial(&a, 3),
        a.pow_binary(3),
        lib(lemma_forms(&t, &k))?.regrouped,
    ];
    let want = vec![Exact::one(), Exact::from_u64(3)];
    if all.iter().any(|e| e.coeffs() != want) {
        return Err("methods disagree".into());
    }
    Ok("(1, 1)^3 = (1, 3) by every method".into())
}

fn check_surrogate(rng: &mut ChaCha8Rng) -> Check {
    let mut worst = 0.0f64;
    for n in 2..=4 {
        let t = float_tuple(rng, n, 2);
        let x: Vec<C64> = (0..n).map(|_| random_c64(rng)).collect();
        let r = lib(surrogate_consistency(&t, &x, &[20, 20], 200, rng.random()))?;
        worst = worst.max(r.max_deviation);
    }
    if worst > 1e-8 {
        return Err(format!("max deviation {worst:e}"));
    }
    Ok(format!("n = 2, 3, 4, 200 exponents each, max deviation {worst:e}"))
}

fn family(m: usize, complex: bool, caps: u64, step: f64) -> SearchFamily {
    SearchFamily {
        n: 2,
        m,
        complex,
        leading_modulus: [0.5, 2.0],
        entry_scale: 1.0,
        caps,
        samples: Some(20_000),
        radius: 2.0,
        step,
        initial_vectors: 2,
        keep: 3,
    }
}

/// Best score of a many-generator family against the single-generator
/// family at the same number of orbit points.
fn check_search(many: usize, complex: bool, step: f64) -> Check {
    let best = |f: &SearchFamily| -> Result<f64, String> {
        Ok(lib(search_random(f, 16, 11))?.candidates[0].score)
    };
    let multi = best(&family(many, complex, 30, step))?;
    let single = best(&family(1, complex, 20_000, step))?;
    let line = format!("best coverage m = {many}: {multi}, m = 1: {single}");
    if multi >= 3.0 * single && multi > 0.0 {
        Ok(line)
    } else {
        Err(line)
    }
}

pub fn fixture_from_tuple(tuple: &TupleSpec<Exact>, exponents: &[Vec<u64>]) -> CliResult<ClosedFormFixture> {
    let checks = exponents
        .iter()
        .map(|k| {
            let e = product_entries(tuple, &MultiIndex::new(k.clone())?)?;
            Ok(FixtureCheck {
                exponents: k.clone(),
                entries: pairs(e.to_c64().coeffs()),
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let mut tf = TupleFile::from_tuple(&tuple.to_c64());
    tf.exact = Some(true);
    Ok(ClosedFormFixture { tuple: tf, checks })
}

pub fn checks(fixture: &ClosedFormFixture, tol: &Tolerances) -> Vec<CheckRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    vec![
        row("shift powers vanish beyond n", check_shift()),
        row("weight-0 compositions", check_weight_zero()),
        row("weight-2 compositions", check_weight_two()),
        row("worked 3x3 power entries", check_worked_entries(&mut rng)),
        row("3x3 triple product third entry", check_lemma_three(&mut rng)),
        row("3x3 logarithm forms", check_log_three(&mut rng)),
        row("2x2 equivalence point", check_equivalence_two(&mut rng)),
        row("2x2 diagonal surrogate", check_surrogate_two(&mut rng)),
        row("4x4 closed-form fixture", check_fixture(fixture)),
        row("multinomial vs repeated squaring", check_closed_form_float(&mut rng)),
        row("logarithm round trip", check_log_round_trip(&mut rng)),
        row("reduction of random conjugates", check_reduction(&mut rng, tol)),
        row("reduction rejections", check_rejections(tol)),
        row("shear power", check_shear()),
        row("surrogate consistency", check_surrogate(&mut rng)),
        row("complex 2x2: eight generators vs one", check_search(8, true, 0.4)),
        row("real 2x2: three generators vs one", check_search(3, false, 0.1)),
    ]
}

pub fn run(fixture: Option<&Path>, json: bool, tol: &Tolerances) -> CliResult<()> {
    let text = match fixture {
        Some(p) => std::fs::read_to_string(p)?,
        None => BUNDLED_FIXTURE.to_string(),
    };
    let fixture: ClosedFormFixture = serde_json::from_str(&text)?;
    fixture.tuple.validate()?;
    let rows = checks(&fixture, tol);
    if json {
        crate::commands::emit(&rows)?;
    } else {
        let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0);
        for r in &rows {
            println!(
                "{}  {:width$}  {}",
                if r.pass { "PASS" } else { "FAIL" },
                r.name,
                r.detail
            );
        }
    }
    let failed = rows.iter().filter(|r| !r.pass).count();
    if failed > 0 {
        return Err(CliError::Mismatch(format!("{failed} of {} checks failed", rows.len())));
    }
    Ok(())
}

/// Writes the bundled fixture from its exact tuple.
pub fn write_bundled(path: &Path) -> CliResult<()> {
    let tuple = TupleSpec::new(
        [
            [(1.5, 0.25), (0.5, -1.0), (-0.75, 0.125), (2.0, 0.5)],
            [(-0.5, 1.0), (0.25, 0.25), (1.0, -0.5), (-0.375, 0.0)],
            [(0.75, -0.75), (-1.25, 0.0), (0.0, 0.625), (0.5, 1.5)],
        ]
        .iter()
        .map(|row| {
            ToeplitzCoeffs::new(
                row.iter()
                    .map(|&(re, im)| Exact::from_c64(C64::new(re, im)).expect("finite"))
                    .collect(),
            )
        })
        .collect::<Result<Vec<_>, Error>>()?,
    )?;
    let exponents = vec![
        vec![0, 0, 0],
        vec![1, 0, 0],
        vec![1, 2, 3],
        vec![4, 0, 2],
        vec![2, 6, 1],
        vec![5, 5, 5],
        vec![6, 1, 3],
        vec![0, 3, 6],
    ];
    let fixture = fixture_from_tuple(&tuple, &exponents)?;
    std::fs::write(path, serde_json::to_string_pretty(&fixture)? + "\n")?;
    Ok(())
}
