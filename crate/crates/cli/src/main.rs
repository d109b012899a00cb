//! `biasmoments`: moment and bias diagnostics for families of L-function
//! coefficients. Every subcommand emits the fixed row schema (see report.rs)
//! as CSV or JSON; progress goes to stderr, data to stdout unless --out is
//! given. Exit codes: 0 all checks pass, 1 at least one identity mismatch,
//! 2 usage or I/O error.

mod report;

use bias_moments::constant_j::{constant_j_moment, ConstantJTables};
use bias_moments::dirichlet::{m2_convolution, m2_decomposed, m2_direct, m2_torsion, race_e_with};
use bias_moments::elliptic::{
    best_moment, evaluate_record, rank_sum, FamilyId, FamilySpec, MomentRecord,
};
use bias_moments::modular::{
    gauss_decomp_j0, gauss_decomp_j1728, for_each_prime, GaussKind, PrimeModulus, PrimeTable,
    DEFAULT_SIEVE_CAP,
};
use bias_moments::petersson::{
    avg_bessel_check, avg_kloosterman_empirical, petersson_rhs, sym_lift_identity_check, HeckeSeq,
};
use clap::{Parser, Subcommand};
use num_rational::Ratio;
use rayon::prelude::*;
use report::{Cell, ConfigEcho, Format, Report, ReportRow, Summary};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "biasmoments",
    version,
    about = "Moment and bias diagnostics for elliptic-curve families, Dirichlet characters, and Petersson averages",
    after_help = "Row schema is fixed across subcommands: prime,k,brute,semi_analytic,closed_form,residual,skipped,reason.\n\
Columns that do not apply are left empty; `reason` carries the row label for grid scans.\n\
A key=value config file supplies defaults for any long flag; explicit flags win."
)]
struct Cli {
    /// key=value defaults file; explicit flags always win
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// output format: csv or json
    #[arg(long, global = true, value_name = "FMT")]
    format: Option<String>,
    /// write the report here instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// worker threads for prime sweeps
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep one family's moments over primes, comparing every evaluation route
    #[command(after_help = "Columns: brute / semi_analytic / closed_form are the three \
evaluation routes (empty when a route does not apply); residual is their max pairwise spread \
and must be 0.")]
    SweepElliptic {
        /// family id: fam1..fam4 or row1..row9
        #[arg(long)]
        family: Option<String>,
        /// comma-separated coefficients for fam1..fam4 (row families take none)
        #[arg(long, allow_hyphen_values = true)]
        params: Option<String>,
        /// lower prime bound (floor 5)
        #[arg(long)]
        pmin: Option<u64>,
        /// upper prime bound
        #[arg(long)]
        pmax: Option<u64>,
        /// comma-separated moment orders
        #[arg(long)]
        k: Option<String>,
        /// lift the brute-force size guards
        #[arg(long)]
        force: bool,
    },
    /// Verify the closed-form second and first moments of every registry family
    #[command(after_help = "Runs a built-in suite of coefficient tuples for fam1..fam4 plus \
all nine row families; `reason` labels the family and tuple.")]
    VerifyClosedForms {
        /// upper prime bound
        #[arg(long)]
        pmax: Option<u64>,
    },
    /// Verify constant-j moment predictions against brute force
    #[command(after_help = "Grid scan over both constant-j kinds, twist coefficients, twist \
powers r, and moment orders k; `reason` labels the grid point. semi_analytic holds the \
resolved predicted value.")]
    VerifyConstantJ {
        /// upper prime bound
        #[arg(long)]
        pmax: Option<u64>,
        /// largest moment order
        #[arg(long)]
        kmax: Option<u32>,
        /// largest twist power
        #[arg(long)]
        rmax: Option<u32>,
        /// comma-separated twist coefficients
        #[arg(long, allow_hyphen_values = true)]
        coeffs: Option<String>,
    },
    /// Second moment of Dirichlet coefficients: direct sum vs decomposition
    #[command(after_help = "brute = direct second moment, semi_analytic = race-term \
decomposition, closed_form = main term. With --ell, the row compares the torsion-family \
direct and decomposed moments (k column holds ell).")]
    DirichletBias {
        /// odd prime modulus
        #[arg(long)]
        q: Option<u64>,
        /// prime sweep bound
        #[arg(long)]
        x: Option<u64>,
        /// torsion order (odd prime dividing q−1) for the torsion-family moment
        #[arg(long)]
        ell: Option<u64>,
    },
    /// Convolved second moment for a pair of Dirichlet moduli
    ConvolutionBias {
        /// first odd prime modulus
        #[arg(long)]
        q1: Option<u64>,
        /// second odd prime modulus
        #[arg(long)]
        q2: Option<u64>,
        /// prime sweep bound
        #[arg(long)]
        x: Option<u64>,
    },
    /// Print the quadratic-form decompositions of a prime
    GaussDecomp {
        /// prime to decompose
        #[arg(long)]
        p: Option<u64>,
    },
    /// Prime-race statistics E(x; q, a) per residue class
    #[command(after_help = "One row per residue class: brute = prime count in the class, \
semi_analytic = normalized race statistic E, closed_form = the class's bias constant.")]
    Race {
        /// modulus (composite allowed)
        #[arg(long)]
        q: Option<u64>,
        /// prime sweep bound
        #[arg(long)]
        x: Option<u64>,
        /// comma-separated residue classes (default: all coprime classes)
        #[arg(long)]
        a: Option<String>,
    },
    /// First-moment rank sum of a family over primes up to X
    #[command(after_help = "One row per prime: brute = first moment, semi_analytic = its \
weighted rank-sum increment. The rank sum itself lands in summary.main_term_avg (JSON) and \
on stderr.")]
    RankSum {
        /// family id: fam1..fam4 or row1..row9
        #[arg(long)]
        family: Option<String>,
        /// comma-separated coefficients for fam1..fam4
        #[arg(long, allow_hyphen_values = true)]
        params: Option<String>,
        /// prime sweep bound
        #[arg(long)]
        x: Option<u64>,
    },
    /// Petersson-side diagnostics: Bessel averages, Kloosterman averages, Hecke identities
    #[command(after_help = "Row groups, labeled via `reason`: avg-bessel (prime column = Y), \
avg-kloosterman (prime = modulus c; ratio in closed_form, reported only), sym-lift (prime = p, \
k = r; asserted), petersson-w12 (prime = n; weight-12 geometric side vs its eigenvalue \
prediction, reported only).")]
    PeterssonCheck {
        /// Bessel average cutoff Y
        #[arg(long)]
        y: Option<u32>,
        /// Bessel argument t
        #[arg(long)]
        t: Option<f64>,
        /// Kloosterman average prime bound
        #[arg(long)]
        kloosterman_y: Option<u64>,
        /// coefficient table length for the Hecke checks
        #[arg(long)]
        n: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => {
            eprintln!("result: identity mismatch detected");
            ExitCode::from(1)
        }
        Ok(false) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

type Overrides = BTreeMap<String, String>;

fn load_overrides(path: Option<&std::path::Path>) -> Result<Overrides, String> {
    let mut map = Overrides::new();
    let Some(path) = path else {
        return Ok(map);
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!(
                "config {} line {}: expected key=value, got {line:?}",
                path.display(),
                idx + 1
            ));
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// Flag wins; otherwise the config file; otherwise the default.
fn pick<T: std::str::FromStr>(
    flag: Option<T>,
    over: &Overrides,
    key: &str,
    default: T,
) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    if let Some(v) = flag {
        return Ok(v);
    }
    match over.get(key) {
        Some(raw) => raw
            .parse::<T>()
            .map_err(|e| format!("config {key}={raw}: {e}")),
        None => Ok(default),
    }
}

fn pick_required<T: std::str::FromStr>(
    flag: Option<T>,
    over: &Overrides,
    key: &str,
) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    if let Some(v) = flag {
        return Ok(v);
    }
    match over.get(key) {
        Some(raw) => raw
            .parse::<T>()
            .map_err(|e| format!("config {key}={raw}: {e}")),
        None => Err(format!("missing required option --{key}")),
    }
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<T>()
                .map_err(|e| format!("bad {what} entry {part:?}: {e}"))
        })
        .collect()
}

fn ratio_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn primes_in(pmin: u64, pmax: u64) -> Vec<u64> {
    let mut out = Vec::new();
    for_each_prime(pmax, |p| {
        if p >= pmin.max(5) {
            out.push(p);
        }
    });
    out
}

fn family_spec(
    family: Option<String>,
    params: Option<String>,
    over: &Overrides,
) -> Result<(FamilySpec, String, Vec<i64>), String> {
    let name: String = pick_required(family, over, "family")?;
    let id: FamilyId = name.parse().map_err(|e| format!("{e}"))?;
    let raw = match params {
        Some(s) => Some(s),
        None => over.get("params").cloned(),
    };
    let params: Vec<i64> = match raw {
        Some(s) => parse_list(&s, "params")?,
        None => Vec::new(),
    };
    let spec = FamilySpec::registry(id, params.clone()).map_err(|e| format!("{e}"))?;
    Ok((spec, name, params))
}

fn json_num_i64(v: i64) -> serde_json::Value {
    serde_json::Value::from(v)
}

fn run(cli: Cli) -> Result<bool, String> {
    let over = load_overrides(cli.config.as_deref())?;
    let format: Format = pick(
        cli.format
            .map(|s| s.parse::<Format>())
            .transpose()?,
        &over,
        "format",
        Format::Csv,
    )?;
    let out: Option<PathBuf> = cli.out.or_else(|| over.get("out").map(PathBuf::from));
    let workers: usize = pick(cli.workers, &over, "workers", 1)?;
    if workers == 0 {
        return Err("worker count must be at least 1".into());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| format!("cannot build worker pool: {e}"))?;

    let (report, mismatch) = match cli.command {
        Command::SweepElliptic {
            family,
            params,
            pmin,
            pmax,
            k,
            force,
        } => sweep_elliptic(family, params, pmin, pmax, k, force, &over, &pool, workers)?,
        Command::VerifyClosedForms { pmax } => verify_closed_forms(pmax, &over, &pool, workers)?,
        Command::VerifyConstantJ {
            pmax,
            kmax,
            rmax,
            coeffs,
        } => verify_constant_j(pmax, kmax, rmax, coeffs, &over, &pool, workers)?,
        Command::DirichletBias { q, x, ell } => dirichlet_bias(q, x, ell, &over)?,
        Command::ConvolutionBias { q1, q2, x } => convolution_bias(q1, q2, x, &over)?,
        Command::GaussDecomp { p } => {
            gauss_decomp(p, &over)?;
            return Ok(false);
        }
        Command::Race { q, x, a } => race(q, x, a, &over)?,
        Command::RankSum { family, params, x } => rank_sum_cmd(family, params, x, &over)?,
        Command::PeterssonCheck {
            y,
            t,
            kloosterman_y,
            n,
        } => petersson_check(y, t, kloosterman_y, n, &over)?,
    };

    report
        .write(format, out.as_deref())
        .map_err(|e| format!("cannot write output: {e}"))?;
    Ok(mismatch)
}

fn moment_row(rec: &MomentRecord, label: Option<&str>) -> ReportRow {
    let cell = |v: Option<i128>| v.map(Cell::Int).unwrap_or(Cell::Empty);
    let reason = match (label, rec.reason.as_deref()) {
        (Some(l), Some(r)) => Some(format!("{l}: {r}")),
        (Some(l), None) => Some(l.to_string()),
        (None, Some(r)) => Some(r.to_string()),
        (None, None) => None,
    };
    ReportRow {
        prime: rec.p,
        k: rec.k,
        brute: cell(rec.brute),
        semi_analytic: cell(rec.semi_analytic),
        closed_form: cell(rec.closed_form),
        residual: if rec.skipped {
            Cell::Empty
        } else {
            Cell::Int(rec.residual())
        },
        skipped: rec.skipped,
        reason,
    }
}

/// Second-moment summary over unskipped k = 2 rows: averaged A₂/p², averaged
/// (A₂ − p²)/p, and the signs of the latter.
fn moment_summary(records: &[MomentRecord]) -> Summary {
    let mut summary = Summary::default();
    let mut main = 0.0f64;
    let mut lower = 0.0f64;
    let mut n = 0u64;
    for rec in records {
        if rec.skipped || rec.k != 2 {
            continue;
        }
        let Some(a2) = rec.brute.or(rec.closed_form).or(rec.semi_analytic) else {
            continue;
        };
        let pf = rec.p as f64;
        let r = (a2 as f64 - pf * pf) / pf;
        main += a2 as f64 / (pf * pf);
        lower += r;
        summary.sign_counts.push(r);
        n += 1;
    }
    if n > 0 {
        summary.main_term_avg = Some(main / n as f64);
        summary.lower_term_avg = Some(lower / n as f64);
    }
    summary
}

#[allow(clippy::too_many_arguments)]
fn sweep_elliptic(
    family: Option<String>,
    params: Option<String>,
    pmin: Option<u64>,
    pmax: Option<u64>,
    k: Option<String>,
    force: bool,
    over: &Overrides,
    pool: &rayon::ThreadPool,
    workers: usize,
) -> Result<(Report, bool), String> {
    let (spec, name, params) = family_spec(family, params, over)?;
    let pmin: u64 = pick(pmin, over, "pmin", 5)?;
    let pmax: u64 = pick_required(pmax, over, "pmax")?;
    if pmax < pmin || pmax > DEFAULT_SIEVE_CAP {
        return Err(format!(
            "prime range [{pmin}, {pmax}] must be nonempty and below the sieve cap {DEFAULT_SIEVE_CAP}"
        ));
    }
    let force = force || over.get("force").map(|v| v == "true").unwrap_or(false);
    let ks: Vec<u32> = parse_list(
        &pick(k, over, "k", String::from("1,2"))?,
        "moment order",
    )?;
    if ks.is_empty() {
        return Err("need at least one moment order".into());
    }
    let primes = primes_in(pmin, pmax);
    if primes.is_empty() {
        return Err(format!("no valid primes in [{pmin}, {pmax}]"));
    }
    eprintln!(
        "sweep-elliptic: family {name} over {} primes in [{pmin}, {pmax}], k = {ks:?}, {workers} worker(s)",
        primes.len()
    );
    let records: Vec<MomentRecord> = pool.install(|| {
        primes
            .par_iter()
            .map(|&p| {
                let pm = PrimeModulus::new(p).expect("sieve yields odd primes");
                ks.iter()
                    .map(|&k| evaluate_record(&spec, k, pm, force))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<Vec<_>>, _>>()
    })
    .map_err(|e| format!("{e}"))?
    .into_iter()
    .flatten()
    .collect();
    let mismatch = records.iter().any(|r| !r.skipped && !r.consistent());
    let rows: Vec<ReportRow> = records.iter().map(|r| moment_row(r, None)).collect();
    let summary = moment_summary(&records);
    let mut config = ConfigEcho::new();
    config.insert("subcommand", "sweep-elliptic".into());
    config.insert("family", name.into());
    config.insert(
        "params",
        serde_json::Value::Array(params.iter().map(|&v| json_num_i64(v)).collect()),
    );
    config.insert("pmin", pmin.into());
    config.insert("pmax", pmax.into());
    config.insert(
        "k",
        serde_json::Value::Array(ks.iter().map(|&v| serde_json::Value::from(v)).collect()),
    );
    config.insert("force", force.into());
    eprintln!(
        "sweep-elliptic: {} rows, {} skipped, mismatch = {mismatch}",
        rows.len(),
        rows.iter().filter(|r| r.skipped).count()
    );
    Ok((
        Report {
            config,
            rows,
            summary,
        },
        mismatch,
    ))
}

fn builtin_suite() -> Vec<(FamilySpec, String)> {
    let mut suite = Vec::new();
    let tuples: [(FamilyId, &[i64]); 8] = [
        (FamilyId::Fam1, &[1, 0, 1, 1, 0]),
        (FamilyId::Fam1, &[2, 3, 1, 5, 7]),
        (FamilyId::Fam2, &[1, 1, 1, 1, 1]),
        (FamilyId::Fam2, &[1, 2, 3, 4, 5]),
        (FamilyId::Fam3, &[1, 1, 1, 1]),
        (FamilyId::Fam3, &[2, 0, 3, 5]),
        (FamilyId::Fam4, &[1, 1, 1, 1]),
        (FamilyId::Fam4, &[3, 2, 5, 1]),
    ];
    for (id, params) in tuples {
        let label = format!(
            "{id} {}",
            params
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
        suite.push((
            FamilySpec::registry(id, params.to_vec()).expect("built-in tuples have right arity"),
            label,
        ));
    }
    for id in FamilyId::ALL {
        if id.param_count() == 0 {
            suite.push((
                FamilySpec::registry(id, Vec::new()).expect("row families take no params"),
                id.name().to_string(),
            ));
        }
    }
    suite
}

fn verify_closed_forms(
    pmax: Option<u64>,
    over: &Overrides,
    pool: &rayon::ThreadPool,
    workers: usize,
) -> Result<(Report, bool), String> {
    let pmax: u64 = pick(pmax, over, "pmax", 300)?;
    let suite = builtin_suite();
    let primes = primes_in(5, pmax);
    if primes.is_empty() {
        return Err(format!("no valid primes up to {pmax}"));
    }
    eprintln!(
        "verify-closed-forms: {} families x {} primes x k in {{1,2}}, {workers} worker(s)",
        suite.len(),
        primes.len()
    );
    let jobs: Vec<(usize, u64)> = suite
        .iter()
        .enumerate()
        .flat_map(|(i, _)| primes.iter().map(move |&p| (i, p)))
        .collect();
    let per_job: Vec<Vec<MomentRecord>> = pool
        .install(|| {
            jobs.par_iter()
                .map(|&(i, p)| {
                    let pm = PrimeModulus::new(p).expect("sieve yields odd primes");
                    [1u32, 2]
                        .iter()
                        .map(|&k| evaluate_record(&suite[i].0, k, pm, false))
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .map_err(|e| format!("{e}"))?;
    let mut rows = Vec::new();
    let mut mismatch = false;
    for (&(i, _), recs) in jobs.iter().zip(&per_job) {
        for rec in recs {
            mismatch |= !rec.skipped && !rec.consistent();
            rows.push(moment_row(rec, Some(&suite[i].1)));
        }
    }
    let summary = moment_summary(&per_job.concat());
    let mut config = ConfigEcho::new();
    config.insert("subcommand", "verify-closed-forms".into());
    config.insert("pmax", pmax.into());
    config.insert(
        "families",
        serde_json::Value::Array(
            suite
                .iter()
                .map(|(_, label)| serde_json::Value::from(label.as_str()))
                .collect(),
        ),
    );
    eprintln!(
        "verify-closed-forms: {} rows, mismatch = {mismatch}",
        rows.len()
    );
    Ok((
        Report {
            config,
            rows,
            summary,
        },
        mismatch,
    ))
}

fn verify_constant_j(
    pmax: Option<u64>,
    kmax: Option<u32>,
    rmax: Option<u32>,
    coeffs: Option<String>,
    over: &Overrides,
    pool: &rayon::ThreadPool,
    workers: usize,
) -> Result<(Report, bool), String> {
    let pmax: u64 = pick(pmax, over, "pmax", 100)?;
    let kmax: u32 = pick(kmax, over, "kmax", 4)?;
    let rmax: u32 = pick(rmax, over, "rmax", 4)?;
    let coeffs: Vec<i64> = parse_list(
        &pick(coeffs, over, "coeffs", String::from("1,2,3"))?,
        "coefficient",
    )?;
    if coeffs.iter().any(|&c| c == 0) {
        return Err("twist coefficients must be nonzero".into());
    }
    let primes = primes_in(5, pmax);
    if primes.is_empty() {
        return Err(format!("no valid primes up to {pmax}"));
    }
    eprintln!(
        "verify-constant-j: {} primes, coeffs {coeffs:?}, r <= {rmax}, k <= {kmax}, {workers} worker(s)",
        primes.len()
    );
    struct Checked {
        p: u64,
        k: u32,
        label: String,
        actual: i128,
        resolved: Option<i128>,
    }
    let per_prime: Vec<Vec<Checked>> = pool
        .install(|| {
            primes
                .par_iter()
                .map(|&p| {
                    let pm = PrimeModulus::new(p).expect("sieve yields odd primes");
                    let tables = ConstantJTables::build(pm)?;
                    let mut out = Vec::new();
                    for kind in [GaussKind::J0, GaussKind::J1728] {
                        let kind_name = match kind {
                            GaussKind::J0 => "j0",
                            GaussKind::J1728 => "j1728",
                        };
                        for &coeff in &coeffs {
                            for r in 0..=rmax {
                                for k in 0..=kmax {
                                    let predicted = constant_j_moment(kind, coeff, r, k, pm)?;
                                    let actual = tables.moment_brute(kind, coeff, r, k)?;
                                    let resolved = predicted
                                        .matching_branch(actual)
                                        .map(|_| actual)
                                        .or(predicted.candidates().first().copied());
                                    out.push(Checked {
                                        p,
                                        k,
                                        label: format!("{kind_name} coeff={coeff} r={r}"),
                                        actual,
                                        resolved: if predicted.matches(actual) {
                                            Some(actual)
                                        } else {
                                            resolved
                                        },
                                    });
                                }
                            }
                        }
                    }
                    Ok::<_, bias_moments::Error>(out)
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .map_err(|e| format!("{e}"))?;
    let mut rows = Vec::new();
    let mut mismatch = false;
    let mut summary = Summary::default();
    for checked in per_prime.iter().flatten() {
        let resolved = checked.resolved.unwrap_or(checked.actual);
        let residual = (checked.actual - resolved).abs();
        mismatch |= residual != 0;
        summary.sign_counts.push(residual as f64);
        rows.push(ReportRow {
            prime: checked.p,
            k: checked.k,
            brute: Cell::Int(checked.actual),
            semi_analytic: Cell::Int(resolved),
            closed_form: Cell::Empty,
            residual: Cell::Int(residual),
            skipped: false,
            reason: Some(checked.label.clone()),
        });
    }
    let mut config = ConfigEcho::new();
    config.insert("subcommand", "verify-constant-j".into());
    config.insert("pmax", pmax.into());
    config.insert("kmax", kmax.into());
    config.insert("rmax", rmax.into());
    config.insert(
        "coeffs",
        serde_json::Value::Array(coeffs.iter().map(|&v| json_num_i64(v)).collect()),
    );
    eprintln!(
        "verify-constant-j: {} rows, mismatch = {mismatch}",
        rows.len()
    );
    Ok((
        Report {
            config,
            rows,
            summary,
        },
        mismatch,
    ))
}

fn dirichlet_bias(
    q: Option<u64>,
    x: Option<u64>,
    ell: Option<u64>,
    over: &Overrides,
) -> Result<(Report, bool), String> {
    let q: u64 = pick_required(q, over, "q")?;
    let x: u64 = pick_required(x, over, "x")?;
    let ell: Option<u64> = match ell {
        Some(v) => Some(v),
        None => over
            .get("ell")
            .map(|raw| raw.parse::<u64>().map_err(|e| format!("config ell: {e}")))
            .transpose()?,
    };
    let mut config = ConfigEcho::new();
    config.insert("subcommand", "dirichlet-bias".into());
    config.insert("q", q.into());
    config.insert("x", x.into());
    let mut summary = Summary::default();
    let (row, mismatch) = match ell {
        None => {
            eprintln!("dirichlet-bias: q = {q}, X = {x}");
            let direct = m2_direct(q, x).map_err(|e| format!("{e}"))?;
            let dec = m2_decomposed(q, x).map_err(|e| format!("{e}"))?;
            let direct_f = ratio_f64(direct);
            let residual = (direct_f - dec.total).abs();
            let mismatch = dec.exact != direct || residual > 1e-12;
            summary.main_term_avg = Some(dec.main_term);
            summary.lower_term_avg = Some(direct_f - dec.main_term);
            summary.sign_counts.push(direct_f - dec.main_term);
            eprintln!(
                "dirichlet-bias: m2 = {direct_f}, main term = {}, race term = {}, residual = {residual:e}",
                dec.main_term, dec.race_term
            );
            (
                ReportRow {
                    prime: q,
                    k: 2,
                    brute: Cell::Float(direct_f),
                    semi_analytic: Cell::Float(dec.total),
                    closed_form: Cell::Float(dec.main_term),
                    residual: Cell::Float(residual),
                    skipped: false,
                    reason: None,
                },
                mismatch,
            )
        }
        Some(ell) => {
            eprintln!("dirichlet-bias: torsion q = {q}, ell = {ell}, X = {x}");
            config.insert("ell", ell.into());
            let t = m2_torsion(q, ell, x).map_err(|e| format!("{e}"))?;
            let direct_f = ratio_f64(t.direct);
            let dec_f = ratio_f64(t.decomposed);
            let mismatch = t.direct != t.decomposed;
            let main = ratio_f64(t.main_term_coefficient);
            summary.main_term_avg = Some(main);
            summary.lower_term_avg = Some(direct_f - main);
            summary.sign_counts.push(direct_f - main);
            eprintln!(
                "dirichlet-bias: torsion m2 = {direct_f}, decomposed = {dec_f}, main-term coefficient = {main}"
            );
            (
                ReportRow {
                    prime: q,
                    k: u32::try_from(ell).map_err(|_| "ell too large".to_string())?,
                    brute: Cell::Float(direct_f),
                    semi_analytic: Cell::Float(dec_f),
                    closed_form: Cell::Float(main),
                    residual: Cell::Float((direct_f - dec_f).abs()),
                    skipped: false,
                    reason: Some(format!("torsion ell={ell}")),
                },
                mismatch,
            )
        }
    };
    Ok((
        Report {
            config,
            rows: vec![row],
            summary,
        },
        mismatch,
    ))
}

fn convolution_bias(
    q1: Option<u64>,
    q2: Option<u64>,
    x: Option<u64>,
    over: &Overrides,
) -> Result<(Report, bool), String> {
    let q1: u64 = pick_required(q1, over, "q1")?;
    let q2: u64 = pick_required(q2, over, "q2")?;
    let x: u64 = pick_required(x, over, "x")?;
    eprintln!("convolution-bias: q1 = {q1}, q2 = {q2}, X = {x}");
    let c = m2_convolution(q1, q2, x).map_err(|e| format!("{e}"))?;
    let direct_f = ratio_f64(c.direct);
    let exact_f = ratio_f64(c.decomposed_exact);
    let float_residual = (direct_f - c.decomposed).abs();
    let mismatch = c.direct != c.decomposed_exact || float_residual > 1e-12;
    eprintln!(
        "convolution-bias: m2 = {direct_f}, float path = {}, residual = {float_residual:e}, r3 = {}, r4 = {}",
        c.decomposed, c.r3, c.r4
    );
    let mut summary = Summary::default();
    summary.lower_term_avg = Some(direct_f);
    summary.sign_counts.push(direct_f);
    let mut config = ConfigEcho::new();
    config.insert("subcommand", "convolution-bias".into());
    config.insert("q1", q1.into());
    config.insert("q2", q2.into());
    config.insert("x", x.into());
    let rows = vec![ReportRow {
        prime: q1 * q2,
        k: 2,
        brute: Cell::Float(direct_f),
        semi_analytic: Cell::Float(exact_f),
        closed_form: Cell::Float(c.decomposed),
        residual: Cell::Float(float_residual),
        skipped: false,
        reason: Some(format!("q1={q1} q2={q2} r3={} r4={}", c.r3, c.r4)),
    }];
    Ok((
        Report {
            config,
            rows,
            summary,
        },
        mismatch,
    ))
}

fn gauss_decomp(p: Option<u64>, over: &Overrides) -> Result<(), String> {
    let p: u64 = pick_required(p, over, "p")?;
    let pm = PrimeModulus::new(p).map_err(|e| format!("{e}"))?;
    println!("p = {p}");
    match gauss_decomp_j0(pm) {
        Ok(d) => println!("j0: p = a^2 + 3b^2 at (a, b) = ({}, {})", d.a, d.b),
        Err(e) => println!("j0: none ({e})"),
    }
    match gauss_decomp_j1728(pm) {
        Ok(d) => println!("j1728: p = a^2 + b^2 at (a, b) = ({}, {})", d.a, d.b),
        Err(e) => println!("j1728: none ({e})"),
    }
    Ok(())
}

fn race(
    q: Option<u64>,
    x: Option<u64>,
    a: Option<String>,
    over: &Overrides,
) -> Result<(Report, bool), String> {
    let q: u64 = pick_required(q, over, "q")?;
    let x: u64 = pick_required(x, over, "x")?;
    if q < 3 {
        return Err(format!("modulus must be at least 3, got {q}"));
    }
    let residues: Vec<u64> = match a.or_else(|| over.get("a").cloned()) {
        Some(s) => parse_list(&s, "residue")?,
        None => (1..q).filter(|&a| gcd(a, q) == 1).collect(),
    };
    if residues.is_empty() {
        return Err("no residue classes to race".into());
    }
    eprintln!(
        "race: q = {q}, X = {x}, {} residue class(es)",
        residues.len()
    );
    let table = PrimeTable::build(x).map_err(|e| format!("{e}"))?;
    let mut rows = Vec::new();
    let mut summary = Summary::default();
    for &a in &residues {
        match race_e_with(&table, x, q, a) {
            Ok(stat) => {
                summary.sign_counts.push(stat.e_value);
                rows.push(ReportRow {
                    prime: q,
                    k: 1,
                    brute: Cell::Int(stat.count_in_class as i128),
                    semi_analytic: Cell::Float(stat.e_value),
                    closed_form: Cell::Int(stat.bias_constant as i128),
                    residual: Cell::Empty,
                    skipped: false,
                    reason: Some(format!("a={a}")),
                });
            }
            Err(e) => rows.push(ReportRow {
                prime: q,
                k: 1,
                brute: Cell::Empty,
                semi_analytic: Cell::Empty,
                closed_form: Cell::Empty,
                residual: Cell::Empty,
                skipped: true,
                reason: Some(format!("a={a}: {e}")),
            }),
        }
    }
    let mut config = ConfigEcho::new();
    config.insert("subcommand", "race".into());
    config.insert("q", q.into());
    config.insert("x", x.into());
    config.insert(
        "a",
        serde_json::Value::Array(residues.iter().map(|&v| serde_json::Value::from(v)).collect()),
    );
    Ok((
        Report {
            config,
            rows,
            summary,
        },
        false,
    ))
}

fn rank_sum_cmd(
    family: Option<String>,
    params: Option<String>,
    x: Option<u64>,
    over: &Overrides,
) -> Result<(Report, bool), String> {
    let (spec, name, params) = family_spec(family, params, over)?;
    let x: u64 = pick_required(x, over, "x")?;
    eprintln!("rank-sum: family {name}, X = {x}");
    let value = rank_sum(&spec, x).map_err(|e| format!("{e}"))?;
    let mut rows = Vec::new();
    let mut summary = Summary::default();
    for p in primes_in(5, x) {
        let pm = PrimeModulus::new(p).expect("sieve yields odd primes");
        if spec.hypothesis_check(pm).is_err() {
            continue;
        }
        let a1 = best_moment(&spec, 1, pm, false).map_err(|e| format!("{e}"))?;
        let increment = (-(a1 as f64) / p as f64) * (p as f64).ln();
        summary.sign_counts.push(increment);
        rows.push(ReportRow {
            prime: p,
            k: 1,
            brute: Cell::Int(a1),
            semi_analytic: Cell::Float(increment),
            closed_form: Cell::Empty,
            residual: Cell::Empty,
            skipped: false,
            reason: None,
        });
    }
    summary.main_term_avg = Some(value);
    eprintln!("rank-sum: value = {value}");
    let mut config = ConfigEcho::new();
    config.insert("subcommand", "rank-sum".into());
    config.insert("family", name.into());
    config.insert(
        "params",
        serde_json::Value::Array(params.iter().map(|&v| json_num_i64(v)).collect()),
    );
    config.insert("x", x.into());
    Ok((
        Report {
            config,
            rows,
            summary,
        },
        false,
    ))
}

fn petersson_check(
    y: Option<u32>,
    t: Option<f64>,
    kloosterman_y: Option<u64>,
    n: Option<usize>,
    over: &Overrides,
) -> Result<(Report, bool), String> {
    let y: u32 = pick(y, over, "y", 100)?;
    let t: f64 = pick(t, over, "t", 10.0)?;
    let kloosterman_y: u64 = pick(kloosterman_y, over, "kloosterman-y", 100_000)?;
    let n: usize = pick(n, over, "n", 10_000)?;
    eprintln!(
        "petersson-check: Y = {y}, t = {t}, Kloosterman bound = {kloosterman_y}, table = {n}"
    );
    let mut rows = Vec::new();
    let mut mismatch = false;
    let mut summary = Summary::default();

    let chk = avg_bessel_check(y, t).map_err(|e| format!("{e}"))?;
    rows.push(ReportRow {
        prime: y as u64,
        k: 0,
        brute: Cell::Float(chk.lhs),
        semi_analytic: Cell::Float(chk.two_term),
        closed_form: Cell::Float(chk.one_term),
        residual: Cell::Float(chk.residual_two),
        skipped: false,
        reason: Some(format!("avg-bessel t={t}")),
    });

    for c in [1u64, 2, 3, 4, 5, 6] {
        match avg_kloosterman_empirical(1, 1, c, kloosterman_y) {
            Ok(avg) => rows.push(ReportRow {
                prime: c,
                k: 0,
                brute: Cell::Float(avg.lhs),
                semi_analytic: Cell::Float(avg.main_term),
                closed_form: Cell::Float(avg.ratio),
                residual: Cell::Empty,
                skipped: false,
                reason: Some("avg-kloosterman".into()),
            }),
            Err(e) => rows.push(ReportRow {
                prime: c,
                k: 0,
                brute: Cell::Empty,
                semi_analytic: Cell::Empty,
                closed_form: Cell::Empty,
                residual: Cell::Empty,
                skipped: true,
                reason: Some(format!("avg-kloosterman: {e}")),
            }),
        }
    }

    let seq = HeckeSeq::new(n).map_err(|e| format!("{e}"))?;
    for p in [2u64, 3, 5, 7, 11, 13] {
        for r in 1..=4u32 {
            if (p as u128).pow(2 * r) > n as u128 {
                break;
            }
            let chk = sym_lift_identity_check(&seq, r, p).map_err(|e| format!("{e}"))?;
            let bad = chk.residual > 1e-9 * (1.0 + chk.lhs.abs());
            mismatch |= bad;
            summary.sign_counts.push(chk.lhs - chk.rhs);
            rows.push(ReportRow {
                prime: p,
                k: r,
                brute: Cell::Float(chk.lhs),
                semi_analytic: Cell::Float(chk.rhs),
                closed_form: Cell::Empty,
                residual: Cell::Float(chk.residual),
                skipped: false,
                reason: Some("sym-lift".into()),
            });
        }
    }

    let base = petersson_rhs(12, 1, 1).map_err(|e| format!("{e}"))?;
    for m in [1u64, 2, 3, 4] {
        let side = petersson_rhs(12, 1, m).map_err(|e| format!("{e}"))?;
        let lam = seq
            .lambda(m as usize)
            .map_err(|e| format!("{e}"))?;
        let predicted = base.total * lam;
        rows.push(ReportRow {
            prime: m,
            k: 12,
            brute: Cell::Float(side.total),
            semi_analytic: Cell::Float(predicted),
            closed_form: Cell::Empty,
            residual: Cell::Float((side.total - predicted).abs()),
            skipped: false,
            reason: Some("petersson-w12".into()),
        });
    }

    let mut config = ConfigEcho::new();
    config.insert("subcommand", "petersson-check".into());
    config.insert("y", y.into());
    config.insert("t", t.into());
    config.insert("kloosterman-y", kloosterman_y.into());
    config.insert("n", (n as u64).into());
    eprintln!(
        "petersson-check: {} rows, mismatch = {mismatch}",
        rows.len()
    );
    Ok((
        Report {
            config,
            rows,
            summary,
        },
        mismatch,
    ))
}
