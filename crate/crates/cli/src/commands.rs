use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use toeplitz_dynamics::io::{pair, pairs, read_points_csv, PointWriter, TupleFile};
use toeplitz_dynamics::jordan::toeplitzize;
use toeplitz_dynamics::logcoords::LogCoordinatesFile;
use toeplitz_dynamics::orbit::{
    coverage::coverage as cloud_coverage, coverage_of, saturation_curve, search_random, surrogate_consistency,
    GridGeometry, OrbitConfig, OrbitMode, SearchFamily,
};
use toeplitz_dynamics::scalar::relative_deviation;
use toeplitz_dynamics::{
    lemma_entries, nilpotent_exp, nilpotent_log, product_entries, product_entries_oracle, Error, MultiIndex, Scalar,
    Tolerances, TupleSpec, C64,
};

use crate::{CliError, CliResult, FieldArg, Method, ModeArg, OrbitArgs};

/// Methods must agree to this relative deviation in floating point (and exactly otherwise).
pub const METHOD_AGREEMENT: f64 = 1e-9;

pub fn emit(value: &impl Serialize) -> CliResult<()> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

pub fn read_tuple_file(path: &Path) -> CliResult<TupleFile> {
    Ok(TupleFile::read(BufReader::new(File::open(path)?))?)
}

pub fn parse_vector(s: &str) -> CliResult<Vec<C64>> {
    let v: Vec<[f64; 2]> =
        serde_json::from_str(s).map_err(|e| CliError::Usage(format!("vector must be a JSON list of [re, im]: {e}")))?;
    Ok(v.into_iter().map(|p| C64::new(p[0], p[1])).collect())
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Multinomial => "multinomial",
        Method::Binary => "binary",
        Method::Lemma => "lemma",
        Method::All => "all",
    }
}

struct MethodRun {
    names: Vec<&'static str>,
    entries: Vec<Option<Vec<C64>>>,
    max_deviation: f64,
    agree: bool,
}

fn run_methods<S: Scalar>(tuple: &TupleSpec<S>, k: &MultiIndex, method: Method) -> CliResult<MethodRun> {
    let one = |m: Method| -> Result<Vec<S>, Error> {
        Ok(match m {
            Method::Multinomial => product_entries(tuple, k)?,
            Method::Binary => product_entries_oracle(tuple, k)?,
            Method::Lemma => lemma_entries(tuple, k)?,
            Method::All => unreachable!("expanded by caller"),
        }
        .into_coeffs())
    };
    let methods = match method {
        Method::All => vec![Method::Multinomial, Method::Binary, Method::Lemma],
        m => vec![m],
    };
    let mut raw: Vec<Option<Vec<S>>> = Vec::new();
    for &m in &methods {
        match one(m) {
            Ok(v) => raw.push(Some(v)),
            Err(Error::UnsupportedDimension { .. }) if method == Method::All => raw.push(None),
            Err(e) => return Err(e.into()),
        }
    }
    let reference = raw[0].clone().expect("multinomial always applies");
    let to_c64 = |v: &[S]| v.iter().map(|z| z.to_c64()).collect::<Vec<C64>>();
    let reference_c64 = to_c64(&reference);
    let mut max_deviation = 0.0f64;
    let mut agree = true;
    for v in raw.iter().flatten() {
        let d = relative_deviation(&to_c64(v), &reference_c64);
        if S::EXACT {
            if v != &reference {
                agree = false;
                max_deviation = max_deviation.max(d);
            }
        } else {
            max_deviation = max_deviation.max(d);
            if !(d <= METHOD_AGREEMENT) {
                agree = false;
            }
        }
    }
    Ok(MethodRun {
        names: methods.into_iter().map(method_name).collect(),
        entries: raw.iter().map(|v| v.as_deref().map(to_c64)).collect(),
        max_deviation,
        agree,
    })
}

fn entries_command(command: &str, file: &Path, tf: &TupleFile, input: Value, method: Method, k: &MultiIndex, pick: Option<usize>) -> CliResult<()> {
    let run = if tf.is_exact() {
        let mut t = tf.exact_tuple()?;
        if let Some(i) = pick {
            t = TupleSpec::new(vec![t.member(i)?.clone()])?;
        }
        run_methods(&t, k, method)?
    } else {
        let mut t = tf.toeplitz_tuple()?;
        if let Some(i) = pick {
            t = TupleSpec::new(vec![t.member(i)?.clone()])?;
        }
        run_methods(&t, k, method)?
    };
    let methods: serde_json::Map<String, Value> = run
        .names
        .iter()
        .zip(&run.entries)
        .map(|(n, e)| (n.to_string(), json!(e.as_ref().map(|v| pairs(v)))))
        .collect();
    let first = run.entries[0].as_ref().expect("first method applies");
    emit(&json!({
        "command": command,
        "input": {"file": file, "tuple": tf, "method": method_name(method), "args": input},
        "backend": if tf.is_exact() { "exact" } else { "float" },
        "entries": pairs(first),
        "methods": methods,
        "max_deviation": run.max_deviation,
        "agree": run.agree,
    }))?;
    if !run.agree {
        return Err(CliError::Mismatch(format!(
            "methods disagree (max relative deviation {:e})",
            run.max_deviation
        )));
    }
    Ok(())
}

pub fn pow(file: &Path, index: usize, k: u64, method: Method) -> CliResult<()> {
    let tf = read_tuple_file(file)?;
    let ki = MultiIndex::new(vec![k])?;
    entries_command("pow", file, &tf, json!({"index": index, "k": k}), method, &ki, Some(index))
}

pub fn prod(file: &Path, exponents: &[u64], method: Method) -> CliResult<()> {
    let tf = read_tuple_file(file)?;
    let k = MultiIndex::new(exponents.to_vec())?;
    entries_command("prod", file, &tf, json!({"exponents": exponents}), method, &k, None)
}

pub fn log(file: &Path, index: usize, check: bool) -> CliResult<()> {
    let tf = read_tuple_file(file)?;
    let (coords, round_trip) = if tf.is_exact() {
        let a = tf.exact_tuple()?.member(index)?.clone();
        let l = nilpotent_log(&a).map_err(|e| reindex(e, index))?;
        let back = nilpotent_exp(&l);
        let rt = if back == a {
            0.0
        } else {
            relative_deviation(back.to_c64().coeffs(), a.to_c64().coeffs())
        };
        (
            LogCoordinatesFile {
                base: pair(l.base.to_c64()),
                lam: l.lam.iter().map(|z| pair(z.to_c64())).collect(),
            },
            rt,
        )
    } else {
        let a = tf.toeplitz_tuple()?.member(index)?.clone();
        let l = nilpotent_log(&a).map_err(|e| reindex(e, index))?;
        let back = nilpotent_exp(&l);
        (l.to_serde(), relative_deviation(back.coeffs(), a.coeffs()))
    };
    emit(&json!({
        "command": "log",
        "input": {"file": file, "tuple": tf, "index": index},
        "coordinates": coords,
        "round_trip_error": if check { json!(round_trip) } else { Value::Null },
    }))
}

fn reindex(e: Error, index: usize) -> Error {
    match e {
        Error::ZeroLeadingCoefficient { .. } => Error::ZeroLeadingCoefficient { index },
        other => other,
    }
}

pub fn exp(file: &Path, check: bool) -> CliResult<()> {
    let f: LogCoordinatesFile = serde_json::from_reader(BufReader::new(File::open(file)?))?;
    let coords = f.to_coords()?;
    let a = nilpotent_exp(&coords);
    let round_trip = if check {
        let back = nilpotent_log(&a)?;
        let mut before = vec![coords.base];
        before.extend(&coords.lam);
        let mut after = vec![back.base];
        after.extend(&back.lam);
        json!(relative_deviation(&after, &before))
    } else {
        Value::Null
    };
    emit(&json!({
        "command": "exp",
        "input": {"file": file, "coordinates": f},
        "entries": pairs(a.coeffs()),
        "round_trip_error": round_trip,
    }))
}

fn dense_json(m: &toeplitz_dynamics::Dense<C64>) -> Value {
    json!(m.rows().map(pairs).collect::<Vec<_>>())
}

pub fn reduce(file: &Path, cyclic_index: usize, tol: &Tolerances) -> CliResult<()> {
    let tf = read_tuple_file(file)?;
    let members = tf.dense_members()?;
    let r = toeplitzize(&members, cyclic_index, tol)?;
    emit(&json!({
        "command": "reduce",
        "input": {"file": file, "tuple": tf, "cyclic_index": cyclic_index, "tolerances": tol},
        "result": {
            "structure": r.structure.blocks.iter().map(|&(v, s)| json!({"value": pair(v), "size": s})).collect::<Vec<_>>(),
            "residual": r.residual,
            "inverse_residual": r.inverse_residual,
            "structure_residual": r.structure_residual,
            "off_block_energy": r.off_block_energy,
            "block_toeplitz": r.block_toeplitz.iter()
                .map(|blocks| blocks.iter().map(|b| pairs(b.coeffs())).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
            "P": dense_json(&r.p),
            "P_inv": dense_json(&r.p_inv),
            "J": dense_json(&r.j),
        },
    }))
}

fn orbit_config(args: &OrbitArgs) -> CliResult<OrbitConfig> {
    let tf = read_tuple_file(&args.file)?;
    let x = parse_vector(&args.x)?;
    let mode = match args.mode {
        ModeArg::Grid => OrbitMode::Grid,
        ModeArg::Shell => OrbitMode::Shell,
        ModeArg::Random => OrbitMode::Random {
            samples: args.samples,
            seed: args.seed,
        },
    };
    let mut config = OrbitConfig::new(tf.toeplitz_tuple()?, x, args.caps.clone())?
        .with_mode(mode)
        .positive_only(args.positive_only)
        .with_max_points(args.max_points);
    config.clip = args.clip;
    config.validate()?;
    Ok(config)
}

pub fn orbit(args: &OrbitArgs, out: Option<&Path>) -> CliResult<()> {
    let config = orbit_config(args)?;
    let (m, n) = (config.tuple.len(), config.tuple.dim());
    let sink: Box<dyn Write> = match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    };
    let mut writer = PointWriter::new(sink, m, n)?;
    let mut err = None;
    let stats = config.visit(|k, p| {
        if let Some(p) = p {
            if let Err(e) = writer.write(k, p) {
                err.get_or_insert(e);
            }
        }
    })?;
    if let Some(e) = err {
        return Err(e.into());
    }
    writer.finish()?.flush()?;
    eprintln!("{}", serde_json::to_string(&json!({"config": config.echo(), "stats": stats}))?);
    Ok(())
}

pub fn coverage(
    points: Option<&Path>,
    orbit: Option<&OrbitArgs>,
    radius: f64,
    step: f64,
    field: FieldArg,
    budgets: &[u64],
) -> CliResult<()> {
    let geometry = match field {
        FieldArg::Real => GridGeometry::real(radius, step),
        FieldArg::Complex => GridGeometry::complex(radius, step),
    };
    if let Some(path) = points {
        let cloud = read_points_csv(BufReader::new(File::open(path)?))?;
        let report = cloud_coverage(cloud.n, cloud.rows.iter().map(|r| &r.point[..]), geometry, budgets)?;
        return emit(&json!({
            "command": "coverage",
            "input": {"points": path, "geometry": geometry, "budgets": budgets},
            "report": report,
        }));
    }
    let args = orbit.expect("caller checked");
    let config = orbit_config(args)?;
    let report = if budgets.is_empty() {
        coverage_of(&config, geometry)?
    } else {
        saturation_curve(&config, geometry, budgets)?
    };
    emit(&json!({
        "command": "coverage",
        "input": {"file": args.file, "config": config.echo(), "geometry": geometry, "budgets": budgets},
        "report": report,
    }))
}

pub fn surrogate_check(file: &Path, x: &str, caps: &[u64], samples: u64, seed: u64) -> CliResult<()> {
    let tf = read_tuple_file(file)?;
    let tuple = tf.toeplitz_tuple()?;
    let x = parse_vector(x)?;
    let caps = if caps.is_empty() { vec![20; tuple.len()] } else { caps.to_vec() };
    let report = surrogate_consistency(&tuple, &x, &caps, samples, seed)?;
    emit(&json!({
        "command": "surrogate-check",
        "input": {"file": file, "tuple": tf, "x": pairs(&x), "caps": caps, "samples": samples, "seed": seed},
        "report": report,
    }))
}

pub fn search(family: &Path, budget: u64, seed: u64) -> CliResult<()> {
    let fam: SearchFamily = serde_json::from_reader(BufReader::new(File::open(family)?))?;
    let report = search_random(&fam, budget, seed)?;
    emit(&json!({
        "command": "search",
        "input": {"file": family},
        "report": report,
    }))
}
