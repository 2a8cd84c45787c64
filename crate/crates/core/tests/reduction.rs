use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use toeplitz_dynamics::jordan::{toeplitzize, JordanStructure};
use toeplitz_dynamics::{Dense, Error, Tolerances, ToeplitzCoeffs, C64};

fn rc(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
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

fn condition(q: &Dense<C64>) -> f64 {
    let sv = q.to_nalgebra().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}

/// Random `Q` with a bounded condition number, and its inverse.
fn random_q(rng: &mut ChaCha8Rng, n: usize) -> (Dense<C64>, Dense<C64>) {
    loop {
        let q = Dense::from_fn(n, |_, _| rc(rng));
        if condition(&q) <= 1e3 {
            let inv = q.to_nalgebra().try_inverse().unwrap();
            return (q, Dense::from_nalgebra(&inv).unwrap());
        }
    }
}

/// Sizes summing to `n` and well-separated eigenvalues.
fn random_structure(rng: &mut ChaCha8Rng, n: usize) -> JordanStructure {
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
    JordanStructure {
        blocks: values.into_iter().zip(sizes).collect(),
    }
}

#[test]
fn random_conjugates_reduce() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let tol = Tolerances::default();
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for case in 0..100 {
        let n = rng.random_range(1..=5);
        let m = rng.random_range(1..=3);
        let structure = random_structure(&mut rng, n);
        let mut tuple = vec![structure.to_dense()];
        for _ in 1..m {
            let blocks: Vec<Dense<C64>> = structure
                .blocks
                .iter()
                .map(|&(_, size)| {
                    let mut c: Vec<C64> = (0..size).map(|_| rc(&mut rng)).collect();
                    c[0] = C64::from_polar(rng.random_range(0.8..1.2), rng.random_range(0.0..6.28));
                    ToeplitzCoeffs::new(c).unwrap().to_dense()
                })
                .collect();
            tuple.push(block_diag(&blocks));
        }
        let (q, q_inv) = random_q(&mut rng, n);
        let conj: Vec<Dense<C64>> = tuple.iter().map(|b| q.mul(b).unwrap().mul(&q_inv).unwrap()).collect();
        let r = toeplitzize(&conj, 0, &tol).unwrap_or_else(|e| panic!("case {case}: {e}"));
        let k: Vec<u64> = (0..m).map(|_| rng.random_range(0..=6)).collect();
        let x: Vec<C64> = (0..n).map(|_| rc(&mut rng)).collect();
        let dev = r.similarity_deviation(&conj, &k, &x).unwrap();
        worst.0 = worst.0.max(r.residual);
        worst.1 = worst.1.max(r.structure_residual);
        worst.2 = worst.2.max(dev);
        assert!(r.residual <= 1e-7 && r.structure_residual <= 1e-6 && dev <= 1e-8, "case {case}: {worst:?}");
    }
    eprintln!("worst residuals {worst:?}");
}

#[test]
fn rejections() {
    let tol = Tolerances::default();
    let id = Dense::<C64>::identity(3);
    assert!(matches!(toeplitzize(&[id.clone(), id], 0, &tol), Err(Error::NotCyclic { .. })));
}
