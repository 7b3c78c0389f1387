use std::fmt::Display;
use std::path::PathBuf;
use std::str::FromStr;

use clap::ValueEnum;
use hardy_rellich::coefficients::{export_csv, export_rows};
use hardy_rellich::families::TestFunction;
use hardy_rellich::oracle::{cross_validate, OracleRow, ORACLE_TOL};
use hardy_rellich::profile::ProfileExpr;
use hardy_rellich::sharp::{
    estimate_e, estimate_rellich, window_study, RadialGrid, SharpEstimate, StudyRow, Target, DEFAULT_ELL_MAX,
    DEFAULT_NODES, DEFAULT_WINDOW,
};
use hardy_rellich::sweep::{self, Suite, SweepConfig, DEFAULT_SEED};
use serde::Serialize;

use crate::config::FileConfig;
use crate::{CoefficientArgs, Format, OracleArgs, Output, SharpArgs, Space, TargetArg, VerifyArgs};

pub enum CliError {
    /// Bad flags or config: exit code 2.
    Usage(String),
    /// Evaluation or I/O failure: exit code 1.
    Runtime(String),
}

fn usage(e: impl Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn runtime(e: impl Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn load(output: &Output, section: &str) -> Result<FileConfig, CliError> {
    match &output.config {
        Some(path) => FileConfig::load(path, section).map_err(usage),
        None => Ok(FileConfig::default()),
    }
}

fn pick<T: FromStr>(flag: Option<T>, file: &FileConfig, key: &str) -> Result<Option<T>, CliError>
where
    T::Err: Display,
{
    match flag {
        Some(v) => Ok(Some(v)),
        None => file.value(key).map_err(usage),
    }
}

fn pick_list<T: FromStr>(flag: Option<Vec<T>>, file: &FileConfig, key: &str) -> Result<Option<Vec<T>>, CliError>
where
    T::Err: Display,
{
    match flag {
        Some(v) => Ok(Some(v)),
        None => file.list(key).map_err(usage),
    }
}

fn pick_enum<T: ValueEnum>(flag: Option<T>, file: &FileConfig, key: &str) -> Result<Option<T>, CliError> {
    match (flag, file.get(key)) {
        (Some(v), _) => Ok(Some(v)),
        (None, Some(text)) => <T as ValueEnum>::from_str(text.trim(), true)
            .map(Some)
            .map_err(|e| usage(format!("config key `{key}`: {e}"))),
        (None, None) => Ok(None),
    }
}

struct Sink {
    out: Option<PathBuf>,
    format: Format,
    jobs: Option<usize>,
}

fn sink(output: &Output, file: &FileConfig) -> Result<Sink, CliError> {
    Ok(Sink {
        out: pick(output.out.clone(), file, "out")?,
        format: pick_enum(output.format, file, "format")?.unwrap_or(Format::Json),
        jobs: pick(output.jobs, file, "jobs")?,
    })
}

impl Sink {
    fn write(&self, text: &str) -> Result<(), CliError> {
        match &self.out {
            Some(path) => std::fs::write(path, text).map_err(|e| runtime(format!("cannot write {}: {e}", path.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    /// Summary lines go to stdout unless the report itself does.
    fn say(&self, line: &str) {
        if self.out.is_some() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    }

    fn pool(&self) -> Result<rayon::ThreadPool, CliError> {
        rayon::ThreadPoolBuilder::new().num_threads(self.jobs.unwrap_or(0)).build().map_err(runtime)
    }
}

/// Parses `a:b:k` into a bump family.
fn parse_family(text: &str) -> Result<TestFunction, String> {
    let parts: Vec<&str> = text.trim().split(':').collect();
    let bad = || format!("family `{text}` is not of the form a:b:k");
    let [a, b, k] = parts[..] else { return Err(bad()) };
    let a: f64 = a.parse().map_err(|_| bad())?;
    let b: f64 = b.parse().map_err(|_| bad())?;
    let k: u32 = k.parse().map_err(|_| bad())?;
    if !(a > 0.0 && a < b && b.is_finite()) || k == 0 {
        return Err(format!("family `{text}` needs 0 < a < b and k ≥ 1"));
    }
    Ok(TestFunction::bump(a, b, k))
}

pub fn verify(args: VerifyArgs, forced: Option<Suite>) -> Result<bool, CliError> {
    let section = if forced.is_some() { "hyperbolic" } else { "verify" };
    let file = load(&args.output, section)?;
    let suites = match forced {
        Some(s) => vec![s],
        None => pick_list(args.suite, &file, "suite")?.unwrap_or_else(|| vec![Suite::Euclid]),
    };
    if suites.is_empty() {
        return Err(usage("no suite selected"));
    }
    let mut cfg = SweepConfig::new(suites);
    cfg.n = pick_list(args.n, &file, "n")?;
    cfg.alpha = pick_list(args.alpha, &file, "alpha")?;
    cfg.m = pick_list(args.m, &file, "m")?;
    cfg.k = pick_list(args.k, &file, "k")?;
    cfg.ell = pick_list(args.ell, &file, "ell")?;
    cfg.b = pick_list(args.b, &file, "b")?;
    if let Some(fams) = pick_list::<String>(args.family, &file, "family")? {
        cfg.families = Some(fams.iter().map(|f| parse_family(f)).collect::<Result<_, _>>().map_err(usage)?);
    }
    if let Some(t) = pick(args.tol, &file, "tol")? {
        cfg.tolerances.identity = t;
    }
    if let Some(t) = pick(args.quad_tol, &file, "quad_tol")? {
        cfg.tolerances.quadrature = t;
    }
    if let Some(t) = pick(args.ineq_tol, &file, "ineq_tol")? {
        cfg.tolerances.inequality = t;
    }
    let tols = [cfg.tolerances.identity, cfg.tolerances.quadrature, cfg.tolerances.inequality];
    if tols.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(usage("tolerances must be finite and nonnegative"));
    }
    cfg.samples = pick(args.samples, &file, "samples")?.unwrap_or(cfg.samples);
    cfg.seed = pick(args.seed, &file, "seed")?.unwrap_or(DEFAULT_SEED);
    cfg.weight = pick::<ProfileExpr>(args.weight, &file, "V")?;
    cfg.profile = pick::<ProfileExpr>(args.profile, &file, "f")?;
    cfg.hyperbolic_space = pick_enum(args.space, &file, "space")? == Some(Space::Hyperbolic);
    let sink = sink(&args.output, &file)?;

    let doc = sweep::run(&cfg, sink.jobs).map_err(runtime)?;
    let text = match sink.format {
        Format::Json => doc.to_json() + "\n",
        Format::Csv => doc.to_csv().map_err(runtime)?,
    };
    sink.write(&text)?;
    let s = doc.summary();
    sink.say(&format!("cases run {} / passed {} / skipped {} / failed {}", s.run, s.passed, s.skipped, s.failed));
    Ok(s.failed == 0)
}

pub fn coefficients(args: CoefficientArgs) -> Result<bool, CliError> {
    let file = load(&args.output, "coefficients")?;
    let ns = pick_list(args.n, &file, "n")?.unwrap_or_else(|| vec![5]);
    let alphas = pick_list(args.alpha, &file, "alpha")?.unwrap_or_else(|| vec![0.0]);
    let m = pick(args.m, &file, "m")?.unwrap_or(3);
    if m == 0 || m > 12 {
        return Err(usage("--m must lie in 1..=12"));
    }
    if alphas.iter().any(|a| !a.is_finite()) {
        return Err(usage("--alpha values must be finite"));
    }
    let sink = sink(&args.output, &file)?;
    let rows: Vec<_> = ns.iter().flat_map(|&n| alphas.iter().flat_map(move |&a| export_rows(n, a, m))).collect();
    let text = match sink.format {
        Format::Json => serde_json::to_string_pretty(&rows).map_err(runtime)? + "\n",
        Format::Csv => export_csv(&rows).map_err(runtime)?,
    };
    sink.write(&text)?;
    sink.say(&format!("{} coefficient rows", rows.len()));
    Ok(true)
}

#[derive(Serialize)]
struct SharpMeta {
    window: f64,
    nodes: usize,
    ell_max: u32,
    version: &'static str,
}

#[derive(Serialize)]
struct Study {
    n: u32,
    alpha: f64,
    target: Target,
    rows: Vec<StudyRow>,
}

#[derive(Serialize)]
struct SharpDocument {
    meta: SharpMeta,
    estimates: Vec<SharpEstimate>,
    studies: Vec<Study>,
}

#[derive(Serialize)]
struct SharpCsvRow {
    kind: &'static str,
    n: u32,
    alpha: f64,
    target: Target,
    ell: Option<u32>,
    window: f64,
    nodes: usize,
    value: f64,
    residual: Option<f64>,
    iterations: Option<usize>,
    converged: Option<bool>,
}

pub fn sharp(args: SharpArgs) -> Result<bool, CliError> {
    let file = load(&args.output, "sharp")?;
    let ns = pick_list(args.n, &file, "n")?.unwrap_or_else(|| vec![3, 4, 5]);
    let alphas = pick_list(args.alpha, &file, "alpha")?.unwrap_or_else(|| vec![0.0]);
    let targets = match pick_enum(args.target, &file, "target")?.unwrap_or(TargetArg::Both) {
        TargetArg::Grad => vec![Target::Grad],
        TargetArg::Rellich => vec![Target::Rellich],
        TargetArg::Both => vec![Target::Grad, Target::Rellich],
    };
    let window = pick(args.window, &file, "window")?.unwrap_or(DEFAULT_WINDOW);
    let nodes = pick(args.nodes, &file, "nodes")?.unwrap_or(DEFAULT_NODES);
    let ell_max = pick(args.ell_max, &file, "ell_max")?.unwrap_or(DEFAULT_ELL_MAX);
    let study = pick_list(args.study, &file, "study")?.unwrap_or_default();
    let grid = RadialGrid::symmetric(window, nodes).map_err(usage)?;
    if ns.contains(&0) {
        return Err(usage("--n values must be positive"));
    }
    if study.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(usage("--study windows must be positive"));
    }
    let sink = sink(&args.output, &file)?;
    let mut jobs = Vec::new();
    for &n in &ns {
        for &alpha in &alphas {
            for &target in &targets {
                jobs.push((n, alpha, target));
            }
        }
    }
    let pool = sink.pool()?;
    let results = pool.install(|| {
        use rayon::prelude::*;
        jobs.par_iter()
            .map(|&(n, alpha, target)| {
                let e = match target {
                    Target::Grad => estimate_e(n, alpha, ell_max, grid),
                    Target::Rellich => estimate_rellich(n, alpha, ell_max, grid),
                }?;
                let rows = if study.is_empty() { Vec::new() } else { window_study(n, alpha, target, &study, nodes)? };
                Ok((e, Study { n, alpha, target, rows }))
            })
            .collect::<Result<Vec<_>, hardy_rellich::sharp::SharpError>>()
    });
    let results = results.map_err(runtime)?;
    let (estimates, studies): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let converged = estimates.iter().all(|e| e.per_mode.iter().all(|(_, m)| m.converged));
    for e in &estimates {
        sink.say(&format!("{:?} n={} alpha={}: {:.6} (mode {})", e.target, e.n, e.alpha, e.value, e.argmin_ell));
    }
    let text = match sink.format {
        Format::Json => {
            let meta = SharpMeta { window, nodes, ell_max, version: env!("CARGO_PKG_VERSION") };
            let studies = studies.into_iter().filter(|s| !s.rows.is_empty()).collect();
            serde_json::to_string_pretty(&SharpDocument { meta, estimates, studies }).map_err(runtime)? + "\n"
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for e in &estimates {
                for (ell, m) in &e.per_mode {
                    w.serialize(SharpCsvRow {
                        kind: "mode",
                        n: e.n,
                        alpha: e.alpha,
                        target: e.target,
                        ell: Some(*ell),
                        window,
                        nodes,
                        value: m.value,
                        residual: Some(m.residual),
                        iterations: Some(m.iterations),
                        converged: Some(m.converged),
                    })
                    .map_err(runtime)?;
                }
            }
            for s in &studies {
                for r in &s.rows {
                    w.serialize(SharpCsvRow {
                        kind: "window_study",
                        n: s.n,
                        alpha: s.alpha,
                        target: s.target,
                        ell: Some(r.argmin_ell),
                        window: r.window,
                        nodes: r.nodes,
                        value: r.value,
                        residual: None,
                        iterations: None,
                        converged: None,
                    })
                    .map_err(runtime)?;
                }
            }
            String::from_utf8(w.into_inner().map_err(runtime)?).map_err(runtime)?
        }
    };
    sink.write(&text)?;
    Ok(converged)
}

#[derive(Serialize)]
struct OracleMeta {
    seed: u64,
    count: usize,
    tolerance: f64,
    version: &'static str,
}

#[derive(Serialize)]
struct OracleDocument {
    meta: OracleMeta,
    rows: Vec<OracleRow>,
}

pub fn oracle(args: OracleArgs) -> Result<bool, CliError> {
    let file = load(&args.output, "oracle")?;
    let count = pick(args.count, &file, "count")?.unwrap_or(200);
    let seed = pick(args.seed, &file, "seed")?.unwrap_or(DEFAULT_SEED);
    let sink = sink(&args.output, &file)?;
    let rows = cross_validate(count, seed);
    let failed = rows.iter().filter(|r| !r.pass).count();
    let worst = rows.iter().map(|r| r.rel_gap).fold(0.0, f64::max);
    let text = match sink.format {
        Format::Json => {
            let meta = OracleMeta { seed, count, tolerance: ORACLE_TOL, version: env!("CARGO_PKG_VERSION") };
            serde_json::to_string_pretty(&OracleDocument { meta, rows }).map_err(runtime)? + "\n"
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in &rows {
                w.serialize(r).map_err(runtime)?;
            }
            String::from_utf8(w.into_inner().map_err(runtime)?).map_err(runtime)?
        }
    };
    sink.write(&text)?;
    sink.say(&format!("compared {count} / failed {failed} / worst relative gap {worst:e}"));
    Ok(failed == 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_parse() {
        assert_eq!(parse_family("1:2:14").unwrap(), TestFunction::bump(1.0, 2.0, 14));
        assert!(parse_family("2:1:4").is_err());
        assert!(parse_family("1:2").is_err());
        assert!(parse_family("1:2:0").is_err());
    }
}
