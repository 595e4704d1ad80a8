use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use class_sieve::arith::{primes_up_to, Rational};
use class_sieve::classgroup::torsion_csv;
use class_sieve::cubic::{
    count_cubic_with_conditions, cubic_main_term, density_prediction_cubic, enumerate_cubic,
    CubicCensus,
};
use class_sieve::densities::{density_csv, density_table, SplittingType};
use class_sieve::quadratic::{
    count_with_conditions_sieve, density_prediction_quadratic, enumerate_quadratic,
    predicted_main_term, DiscSign, QuadraticCensus, SplittingCondition,
};
use class_sieve::sieve::{
    certify_with_stats, compute_stats, family_instance, mean_identity, sieve_level,
    synthetic_instance, variance_identity, Family, SieveInstance,
};
use class_sieve::torsion::{fit_window, mean_window, run_experiment, ExperimentParams};

const CACHE_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "class-sieve",
    version,
    about = "Field censuses, class-group torsion and an exact Chebyshev sieve"
)]
struct Cli {
    /// Directory for census caches.
    #[arg(
        long,
        env = "CLASS_SIEVE_CACHE",
        default_value = ".class-sieve-cache",
        global = true
    )]
    cache_dir: PathBuf,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0, global = true)]
    threads: usize,
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Build (or refresh) the census of degree-2 or degree-3 fields.
    Enumerate {
        degree: u32,
        #[arg(long)]
        x: u64,
        #[arg(long, default_value = "both")]
        sign: DiscSign,
        /// Also write the census as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Count fields with local conditions against the density prediction.
    Count {
        degree: u32,
        #[arg(long)]
        x: u64,
        #[arg(long, default_value = "both")]
        sign: DiscSign,
        #[command(flatten)]
        conditions: ConditionArgs,
    },
    /// Certify the second moment bound on a family.
    Sieve {
        #[command(subcommand)]
        source: SieveSource,
    },
    /// Averaged ℓ-torsion, bad-set trend and bound-constant scan.
    Torsion {
        #[arg(long)]
        x: u64,
        #[arg(long, default_value_t = 3)]
        ell: u64,
        #[arg(long, default_value = "imaginary")]
        sign: DiscSign,
        /// Comma-separated scales; defaults to the powers of ten from 10^4
        /// below X, then X.
        #[arg(long, value_delimiter = ',')]
        scales: Vec<u64>,
        /// Split-prime level exponent for the bound-constant scan.
        #[arg(long, default_value = "3/25")]
        delta: Rational,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        /// Per-field CSV (D,h,ell,torsion_count).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Dump density tables.
    Densities {
        #[arg(long, value_delimiter = ',', default_values_t = vec![2u32, 3, 4, 5])]
        degrees: Vec<u32>,
        #[arg(long, default_value_t = 50)]
        primes_up_to: u64,
    },
    /// Re-render a JSON report in long CSV format (section,X,metric,value).
    Report { input: PathBuf },
}

#[derive(Args)]
struct ConditionArgs {
    /// Primes required to split completely.
    #[arg(long, value_delimiter = ',')]
    split: Vec<u64>,
    /// Primes required to be inert.
    #[arg(long, value_delimiter = ',')]
    inert: Vec<u64>,
    #[arg(long, value_delimiter = ',')]
    ramified: Vec<u64>,
    /// Conditions as p:type, e.g. 5:(12).
    #[arg(long = "cond")]
    cond: Vec<String>,
}

impl ConditionArgs {
    fn parse(&self, d: u32) -> Result<Vec<SplittingCondition>> {
        let mut out = Vec::new();
        for &p in &self.split {
            out.push(SplittingCondition::new(p, SplittingType::totally_split(d)));
        }
        for &p in &self.inert {
            out.push(SplittingCondition::new(
                p,
                SplittingType::parse("inert", d)?,
            ));
        }
        for &p in &self.ramified {
            out.push(SplittingCondition::new(p, SplittingType::Ramified));
        }
        for c in &self.cond {
            let (p, t) = c
                .split_once(':')
                .with_context(|| format!("condition {c:?} is not p:type"))?;
            out.push(SplittingCondition::new(
                p.trim().parse()?,
                SplittingType::parse(t, d)?,
            ));
        }
        Ok(out)
    }
}

#[derive(Subcommand)]
enum SieveSource {
    Synthetic {
        #[arg(long, default_value_t = 1000)]
        items: usize,
        #[arg(long, default_value_t = 50)]
        zmax: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of consecutive seeds to certify.
        #[arg(long, default_value_t = 1)]
        instances: u64,
    },
    Quadratic {
        #[arg(long)]
        x: u64,
        #[arg(long, default_value = "1/6")]
        delta: Rational,
        #[arg(long, default_value = "both")]
        sign: DiscSign,
    },
    Cubic {
        #[arg(long)]
        x: u64,
        #[arg(long, default_value = "2/25")]
        delta: Rational,
        #[arg(long, default_value = "both")]
        sign: DiscSign,
    },
}

fn cache_path(dir: &Path, degree: u32, x: u64, sign: DiscSign) -> PathBuf {
    dir.join(format!(
        "deg{degree}-{}-{x}-v{CACHE_VERSION}.bin",
        sign.as_str()
    ))
}

fn quadratic_census(dir: &Path, x: u64, sign: DiscSign) -> Result<QuadraticCensus> {
    let path = cache_path(dir, 2, x, sign);
    if path.exists() {
        if let Ok(c) = QuadraticCensus::read_cache(&path) {
            if c.x == x && c.sign == sign {
                return Ok(c);
            }
        }
    }
    eprintln!("building quadratic census to {x} ({sign}) ...");
    let c = enumerate_quadratic(x, sign)?;
    fs::create_dir_all(dir)?;
    c.write_cache(&path)?;
    Ok(c)
}

fn cubic_census(dir: &Path, x: u64, sign: DiscSign) -> Result<CubicCensus> {
    let path = cache_path(dir, 3, x, sign);
    if path.exists() {
        if let Ok(c) = CubicCensus::read_cache(&path, sign) {
            if c.x == x {
                return Ok(c);
            }
        }
    }
    eprintln!("building cubic census to {x} ({sign}) ...");
    let c = enumerate_cubic(x, sign)?;
    fs::create_dir_all(dir)?;
    c.write_cache(&path)?;
    Ok(c)
}

fn check_degree(degree: u32) -> Result<()> {
    match degree {
        2 | 3 => Ok(()),
        4 => bail!("quartic enumeration out of scope: quartic fields need Bhargava's parametrization by pairs of ternary quadratic forms"),
        5 => bail!("quintic enumeration out of scope: quintic fields need Bhargava's parametrization by quadruples of alternating forms"),
        d => bail!("no fields of degree {d} are supported"),
    }
}

/// Command output and whether every exact check passed.
struct Outcome {
    value: Value,
    ok: bool,
}

fn emit(format: Format, out: &Outcome, csv: Option<String>) -> Result<()> {
    let text = match (format, csv) {
        (Format::Csv, Some(s)) => s,
        _ => serde_json::to_string_pretty(&out.value)? + "\n",
    };
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        // a closed pipe (e.g. `| head`) is not an error
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn cmd_enumerate(
    cli: &Cli,
    degree: u32,
    x: u64,
    sign: DiscSign,
    csv: &Option<PathBuf>,
) -> Result<Outcome> {
    check_degree(degree)?;
    let start = Instant::now();
    let path = cache_path(&cli.cache_dir, degree, x, sign);
    let _ = fs::remove_file(&path);
    let (n, real, body) = if degree == 2 {
        let c = quadratic_census(&cli.cache_dir, x, sign)?;
        let real = c.discriminants.iter().filter(|&&d| d > 0).count();
        (c.len(), real, c.to_csv())
    } else {
        let c = cubic_census(&cli.cache_dir, x, sign)?;
        let real = c.fields.iter().filter(|f| f.disc > 0).count();
        (c.len(), real, c.to_csv())
    };
    if let Some(p) = csv {
        fs::write(p, body)?;
    }
    let secs = start.elapsed().as_secs_f64();
    eprintln!(
        "N={n} (real {real}, imaginary {}) in {secs:.2}s -> {}",
        n - real,
        path.display()
    );
    Ok(Outcome {
        value: json!({"degree": degree, "X": x, "sign": sign, "N": n, "real": real, "imaginary": n - real,
                      "cache": path}),
        ok: true,
    })
}

fn cmd_count(
    cli: &Cli,
    degree: u32,
    x: u64,
    sign: DiscSign,
    args: &ConditionArgs,
) -> Result<Outcome> {
    if !(2..=3).contains(&degree) {
        bail!("conditions on degree {degree} fields are unsupported (no census)");
    }
    let conds = args.parse(degree)?;
    let labels: Vec<String> = conds.iter().map(|c| c.to_string()).collect();
    if degree == 2 {
        let census = quadratic_census(&cli.cache_dir, x, sign)?;
        let direct = census.count_with(x, sign, &conds);
        let sieve = count_with_conditions_sieve(x, sign, &conds)?;
        let density = density_prediction_quadratic(&conds)?;
        let main = predicted_main_term(x, sign, &conds)?;
        let ok = direct == sieve;
        Ok(Outcome {
            value: json!({"degree": 2, "X": x, "sign": sign, "conditions": labels, "count": direct,
                          "sieve_count": sieve, "counts_agree": ok, "delta": density,
                          "prediction": main, "deviation": direct as f64 - main}),
            ok,
        })
    } else {
        let census = cubic_census(&cli.cache_dir, x, sign)?;
        let count = count_cubic_with_conditions(&census, x, &conds)?;
        let density = density_prediction_cubic(&conds)?;
        let main = density.to_f64() * cubic_main_term(x, sign);
        Ok(Outcome {
            value: json!({"degree": 3, "X": x, "sign": sign, "conditions": labels, "count": count,
                          "census_size": census.len(), "fraction": count as f64 / census.len().max(1) as f64,
                          "delta": density, "prediction": main, "deviation": count as f64 - main}),
            ok: true,
        })
    }
}

fn certify(inst: &SieveInstance) -> Result<Outcome> {
    let stats = compute_stats(inst)?;
    let cert = certify_with_stats(inst, &stats)?;
    let var = variance_identity(&stats);
    let mean = mean_identity(&stats);
    let ok = cert.holds && var.holds && mean.holds;
    Ok(Outcome {
        value: json!({"certificate": cert, "variance_identity": var, "mean_identity": mean}),
        ok,
    })
}

fn family_sieve(inst_family: Family<'_>, x: u64, delta: &Rational) -> Result<Outcome> {
    let z = sieve_level(x, delta)?;
    let inst = family_instance(inst_family, x, z)?;
    let mut out = certify(&inst)?;
    let window = mean_window(inst_family, x, delta)?;
    let fit = fit_window(window.into_iter().collect());
    out.value["delta"] = json!(delta);
    out.value["mean_window"] = json!(fit);
    Ok(out)
}

fn cmd_sieve(cli: &Cli, source: &SieveSource) -> Result<Outcome> {
    match source {
        SieveSource::Synthetic {
            items,
            zmax,
            seed,
            instances,
        } => {
            let mut certs = Vec::new();
            let mut ok = true;
            for s in *seed..seed + instances {
                let inst = synthetic_instance(*items, *zmax, s)?;
                match certify(&inst) {
                    Ok(mut o) => {
                        ok &= o.ok;
                        o.value["seed"] = json!(s);
                        certs.push(o.value);
                    }
                    // every set may come out empty, leaving M = 0
                    Err(e) => certs.push(json!({"seed": s, "skipped": e.to_string()})),
                }
            }
            let value = if certs.len() == 1 {
                certs.pop().unwrap()
            } else {
                Value::Array(certs)
            };
            Ok(Outcome { value, ok })
        }
        SieveSource::Quadratic { x, delta, sign } => {
            let c = quadratic_census(&cli.cache_dir, *x, *sign)?;
            family_sieve(Family::Quadratic(&c), *x, delta)
        }
        SieveSource::Cubic { x, delta, sign } => {
            let c = cubic_census(&cli.cache_dir, *x, *sign)?;
            family_sieve(Family::Cubic(&c), *x, delta)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_torsion(
    cli: &Cli,
    x: u64,
    ell: u64,
    sign: DiscSign,
    scales: &[u64],
    delta: &Rational,
    epsilon: f64,
    csv: &Option<PathBuf>,
) -> Result<Outcome> {
    if sign.includes(1) && ell.is_multiple_of(2) {
        bail!("even ell = {ell} is unsupported for real quadratic fields (narrow and wide class groups differ at 2)");
    }
    let scales = if scales.is_empty() {
        let mut s: Vec<u64> = (4..19)
            .map(|k| 10u64.pow(k))
            .take_while(|&p| p < x)
            .collect();
        s.push(x);
        s
    } else {
        scales.to_vec()
    };
    if scales.iter().any(|&s| s > x) {
        bail!("scales may not exceed --x {x}");
    }
    let census = quadratic_census(&cli.cache_dir, x, sign)?;
    let params = ExperimentParams {
        scales,
        ell,
        sign,
        scan_delta: delta.clone(),
        epsilon,
    };
    let (report, rows) = run_experiment(&census, &params)?;
    if let Some(p) = csv {
        fs::write(p, torsion_csv(&rows))?;
    }
    let bounded = rows.iter().all(|r| r.torsion <= r.h && r.torsion >= 1);
    let ok = bounded && report.bad_sets.fit.as_ref().is_none_or(|f| f.m_inside);
    let mut value = serde_json::to_value(&report)?;
    value["checks"] = json!({"torsion_at_most_h": bounded});
    Ok(Outcome { value, ok })
}

fn cmd_densities(degrees: &[u32], limit: u64) -> Result<(Outcome, String)> {
    let primes: Vec<u64> = primes_up_to(limit).iter().collect();
    let mut ok = true;
    let mut tables = Vec::new();
    for &d in degrees {
        for &p in &primes {
            let t = density_table(d, p)?;
            ok &= t.total() == Rational::one();
            tables.push(json!({"d": d, "p": p, "total": t.total(),
                "entries": t.entries.iter().map(|(st, v)| json!({"type": st, "delta": v})).collect::<Vec<_>>()}));
        }
    }
    Ok((
        Outcome {
            value: Value::Array(tables),
            ok,
        },
        density_csv(degrees, &primes)?,
    ))
}

/// Flattens a report into (section, X, metric, value) rows: every array of
/// objects carrying an `X` field contributes one row per numeric member, all
/// other scalars one row with an empty X.
fn long_format(v: &Value) -> String {
    fn walk(path: &str, v: &Value, out: &mut Vec<String>) {
        match v {
            Value::Object(m) => {
                for (k, val) in m {
                    let p = if path.is_empty() {
                        k.clone()
                    } else {
                        format!("{path}.{k}")
                    };
                    walk(&p, val, out);
                }
            }
            Value::Array(items)
                if items.iter().all(|i| i.get("X").is_some()) && !items.is_empty() =>
            {
                for item in items {
                    let x = &item["X"];
                    for (k, val) in item.as_object().into_iter().flatten() {
                        if k == "X" {
                            continue;
                        }
                        match val {
                            Value::Number(_) | Value::String(_) | Value::Bool(_) => {
                                out.push(format!("{path},{x},{k},{}", scalar(val)))
                            }
                            _ => walk(&format!("{path}.{k}[X={x}]"), val, out),
                        }
                    }
                }
            }
            Value::Array(items) => {
                for (i, item) in items.iter().enumerate() {
                    walk(&format!("{path}[{i}]"), item, out);
                }
            }
            Value::Null => {}
            _ => out.push(format!("{path},,value,{}", scalar(v))),
        }
    }
    fn scalar(v: &Value) -> String {
        match v {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        }
    }
    let mut rows = vec!["section,X,metric,value".to_string()];
    walk("", v, &mut rows);
    rows.join("\n") + "\n"
}

fn run(cli: &Cli) -> Result<bool> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()?;
    }
    let (out, csv) = match &cli.command {
        Command::Enumerate {
            degree,
            x,
            sign,
            csv,
        } => (cmd_enumerate(cli, *degree, *x, *sign, csv)?, None),
        Command::Count {
            degree,
            x,
            sign,
            conditions,
        } => (cmd_count(cli, *degree, *x, *sign, conditions)?, None),
        Command::Sieve { source } => (cmd_sieve(cli, source)?, None),
        Command::Torsion {
            x,
            ell,
            sign,
            scales,
            delta,
            epsilon,
            csv,
        } => (
            cmd_torsion(cli, *x, *ell, *sign, scales, delta, *epsilon, csv)?,
            None,
        ),
        Command::Densities {
            degrees,
            primes_up_to,
        } => {
            let (o, csv) = cmd_densities(degrees, *primes_up_to)?;
            (o, Some(csv))
        }
        Command::Report { input } => {
            let text = fs::read_to_string(input)
                .with_context(|| format!("reading {}", input.display()))?;
            let v: Value = serde_json::from_str(&text)?;
            let csv = long_format(&v);
            (Outcome { value: v, ok: true }, Some(csv))
        }
    };
    let format = if matches!(cli.command, Command::Report { .. }) {
        Format::Csv
    } else {
        cli.format
    };
    emit(format, &out, csv)?;
    Ok(out.ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: an exact identity or invariant failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
