//! `cfx`: command-line front end for the Rosen and Veech map library.
//!
//! Exit codes: 0 on success, 1 on a parameter error, 2 on a failed verification.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cfx_core::analysis::{
    beta, compare_first_returns, random_starts, slow_return_experiment, AGREEMENT_TOL, DEFAULT_MAX_ITERS,
};
use cfx_core::discovery::verify_invariance;
use cfx_core::domains::{area_closed_form, build_domain, DomainKind};
use cfx_core::exec::Execution;
use cfx_core::maps::{self, MapKind};
use cfx_core::moebius::GroupContext;
use cfx_core::output::{fmt_f64, CsvWriter};
use cfx_core::planar::{planar_step, PlanarPoint};
use cfx_core::Error;

/// Escape fraction above which `domain --verify` reports a failure.
const ESCAPE_LIMIT: f64 = 1e-4;
/// Agreement rate below which `compare` reports a failure.
const AGREEMENT_LIMIT: f64 = 0.999;

#[derive(Parser)]
#[command(name = "cfx", version, about = "Rosen and Veech continued-fraction maps and their natural extensions")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the constants of the group for one q.
    Ctx {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        csv: bool,
    },
    /// Iterate a map from one start and write the orbit as CSV.
    Orbit(OrbitArgs),
    /// Print a domain's arcs and optionally check its invariance.
    Domain(DomainArgs),
    /// Compare analytic and closed-form areas.
    Areas {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        csv: bool,
    },
    /// Compare first returns of the doubled Rosen and Veech maps to the intersection domain.
    Compare {
        #[arg(long)]
        q: u32,
        #[arg(long, default_value_t = 1000)]
        starts: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
        max_iters: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Slow-return table of the Veech map for q divisible by 4.
    Induction {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
        max_iters: usize,
    },
}

#[derive(Args)]
struct OrbitArgs {
    /// One of f, h, k, r, a, v.
    #[arg(long)]
    map: String,
    #[arg(long, default_value_t = 8)]
    q: u32,
    #[arg(long, allow_negative_numbers = true)]
    x: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    y: f64,
    #[arg(long)]
    n: usize,
    /// Iterate the planar extension instead of the interval map.
    #[arg(long)]
    planar: bool,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DomainArgs {
    /// One of E, omega_a, omega_v, omega_r, omega_bar.
    #[arg(long)]
    which: String,
    #[arg(long)]
    q: u32,
    #[arg(long)]
    arcs: bool,
    #[arg(long)]
    verify: bool,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

enum Failure {
    /// The reader closed the pipe; not an error for a CLI.
    Closed,
    Param(String),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_)
            | Error::UnsupportedQ { .. }
            | Error::OutOfInterval { .. }
            | Error::OrientationReversing => Failure::Param(e.to_string()),
            _ => Failure::Verification(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        if e.kind() == io::ErrorKind::BrokenPipe {
            return Failure::Closed;
        }
        Failure::Param(e.to_string())
    }
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli.cmd) {
        Ok(()) | Err(Failure::Closed) => ExitCode::SUCCESS,
        Err(Failure::Param(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Verification(m)) => {
            eprintln!("verification failed: {m}");
            ExitCode::from(2)
        }
    }
}

/// `CFX_SEED` wins over `--seed`.
fn seed(flag: u64) -> Result<u64, Failure> {
    match std::env::var("CFX_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Failure::Param(format!("CFX_SEED must be an unsigned integer, got '{s}'"))),
        Err(_) => Ok(flag),
    }
}

fn output(path: Option<&PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cmd: Cmd) -> CliResult {
    match cmd {
        Cmd::Ctx { q, csv } => ctx_table(q, csv),
        Cmd::Orbit(a) => orbit(&a),
        Cmd::Domain(a) => domain(&a),
        Cmd::Areas { q, csv } => areas(q, csv),
        Cmd::Compare {
            q,
            starts,
            seed: s,
            max_iters,
            out,
        } => compare(q, starts, seed(s)?, max_iters, out.as_ref()),
        Cmd::Induction {
            q,
            k,
            samples,
            seed: s,
            max_iters,
        } => induction(q, k, samples, seed(s)?, max_iters),
    }
}

/// Prints `rows` either as CSV or as aligned columns.
fn table(header: &[&str], rows: &[Vec<String>], csv: bool) -> CliResult {
    let mut out = io::stdout().lock();
    if csv {
        let mut w = CsvWriter::new(&mut out, header)?;
        for r in rows {
            w.row(r)?;
        }
        return Ok(());
    }
    let widths: Vec<usize> = (0..header.len())
        .map(|i| {
            rows.iter()
                .map(|r| r[i].len())
                .chain([header[i].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    writeln!(out, "{}", line(header.to_vec()))?;
    for r in rows {
        writeln!(out, "{}", line(r.iter().map(String::as_str).collect()))?;
    }
    Ok(())
}

fn ctx_table(q: u32, csv: bool) -> CliResult {
    let ctx = GroupContext::new(q)?;
    let mut rows: Vec<Vec<String>> = [
        ("q", f64::from(ctx.q)),
        ("n", f64::from(ctx.n)),
        ("theta", ctx.theta),
        ("lambda", ctx.lambda),
        ("mu", ctx.mu),
        ("alpha", ctx.alpha),
        ("gamma", ctx.gamma),
        ("Q.1", ctx.q1),
        ("rho", ctx.rho),
    ]
    .iter()
    .map(|(k, v)| vec![k.to_string(), fmt_f64(*v)])
    .collect();
    for (j, v) in ctx.phis().iter().enumerate() {
        rows.push(vec![format!("phi_{j}"), fmt_f64(*v)]);
    }
    for (j, v) in ctx.deltas().iter().enumerate() {
        rows.push(vec![format!("delta_{j}"), fmt_f64(*v)]);
    }
    table(&["name", "value"], &rows, csv)
}

fn orbit(a: &OrbitArgs) -> CliResult {
    let map: MapKind = a.map.parse()?;
    let ctx = GroupContext::new(a.q)?;
    if a.planar && !map.is_orientation_preserving() {
        return Err(Error::OrientationReversing.into());
    }
    let (lo, hi) = map.interval(&ctx);
    if !(a.x >= lo && a.x <= hi) {
        return Err(Error::OutOfInterval { x: a.x, lo, hi }.into());
    }
    let header: &[&str] = if a.planar {
        &["step", "x", "y", "digit", "tau"]
    } else {
        &["step", "x", "digit", "tau"]
    };
    let mut w = CsvWriter::new(output(a.out.as_ref())?, header)?;
    let row = |i: usize, p: PlanarPoint, digit: String, tau: String| {
        let mut r = vec![i.to_string(), fmt_f64(p.x)];
        if a.planar {
            r.push(fmt_f64(p.y));
        }
        r.extend([digit, tau]);
        r
    };
    let mut p = PlanarPoint::new(a.x, a.y);
    w.row(&row(0, p, String::new(), String::new()))?;
    for i in 1..=a.n {
        let s = match maps::step(&ctx, map, p.x) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("orbit terminated after {} steps: {e}", i - 1);
                break;
            }
        };
        p = if a.planar {
            planar_step(&ctx, map, p)?
        } else {
            PlanarPoint::new(s.image, 0.0)
        };
        w.row(&row(i, p, s.digit.to_string(), fmt_f64(s.tau)))?;
    }
    w.into_inner().flush()?;
    Ok(())
}

fn domain(a: &DomainArgs) -> CliResult {
    let which: DomainKind = a.which.parse()?;
    let ctx = GroupContext::new(a.q)?;
    let d = build_domain(&ctx, which)?;
    let mut out = io::stdout().lock();
    if a.arcs || !a.verify {
        write!(out, "{}", d.to_arc_list())?;
    }
    if !a.verify {
        return Ok(());
    }
    let map = which.natural_map().ok_or_else(|| {
        Failure::Param(format!("{which} is not the domain of a planar extension"))
    })?;
    let s = seed(a.seed)?;
    let r = verify_invariance(&ctx, &d, map, a.samples, a.tol, s, Execution::default())?;
    let rows = [
        ("domain", which.to_string()),
        ("map", map.symbol().to_string()),
        ("q", a.q.to_string()),
        ("seed", s.to_string()),
        ("tol", fmt_f64(r.tol)),
        ("samples", r.samples.to_string()),
        ("shell", r.shell.to_string()),
        ("step_errors", r.step_errors.to_string()),
        ("forward_escapes", r.forward_escapes.to_string()),
        ("backward_escapes", r.backward_escapes.to_string()),
        ("multiple_preimages", r.multiple_preimages.to_string()),
        ("collisions", r.collisions.to_string()),
        ("unresolved", r.unresolved.to_string()),
    ];
    writeln!(out, "# invariance")?;
    for (k, v) in rows {
        writeln!(out, "{k},{v}")?;
    }
    out.flush()?;
    if r.forward_escape_fraction() >= ESCAPE_LIMIT
        || r.backward_escape_fraction() >= ESCAPE_LIMIT
        || r.injectivity_violations() > 0
    {
        return Err(Failure::Verification(format!(
            "{which} is not invariant under {}",
            map.symbol()
        )));
    }
    Ok(())
}

fn areas(q: u32, csv: bool) -> CliResult {
    let ctx = GroupContext::new(q)?;
    let mut rows = Vec::new();
    let mut analytic = |k: DomainKind| -> Result<f64, Failure> {
        let a = build_domain(&ctx, k)?.area_analytic()?;
        let c = area_closed_form(&ctx, k)?;
        rows.push(vec![k.to_string(), fmt_f64(c), fmt_f64(a), fmt_f64((a - c).abs())]);
        Ok(a)
    };
    let cv = analytic(DomainKind::OmegaVeech)?;
    let cr = analytic(DomainKind::OmegaR)?;
    let bar = analytic(DomainKind::OmegaBar)?;
    rows.push(vec!["omega_bar/omega_v".into(), String::new(), fmt_f64(bar / cv), String::new()]);
    rows.push(vec!["omega_bar/omega_r".into(), String::new(), fmt_f64(bar / cr), String::new()]);
    table(&["domain", "closed_form", "analytic", "abs_diff"], &rows, csv)
}

fn compare(q: u32, n: usize, seed: u64, max_iters: usize, out: Option<&PathBuf>) -> CliResult {
    let ctx = GroupContext::new(q)?;
    let starts = random_starts(&ctx, n, seed)?;
    let rep = compare_first_returns(&ctx, &starts, max_iters, Execution::default())?;
    let mut w = CsvWriter::new(
        output(out)?,
        &[
            "start_x", "start_y", "r_x", "r_y", "r_steps", "v_x", "v_y", "v_steps", "agree", "same_element",
            "shell",
        ],
    )?;
    let cells = |r: &Result<(PlanarPoint, usize), Error>| match r {
        Ok((p, n)) => [fmt_f64(p.x), fmt_f64(p.y), n.to_string()],
        Err(_) => [String::new(), String::new(), String::new()],
    };
    for r in &rep.records {
        let mut row = vec![fmt_f64(r.start.x), fmt_f64(r.start.y)];
        row.extend(cells(&r.r_return));
        row.extend(cells(&r.v_return));
        row.extend([r.agree.to_string(), r.same_element.to_string(), r.shell.to_string()]);
        w.row(&row)?;
    }
    w.into_inner().flush()?;
    let rate = rep.agreement_rate();
    eprintln!(
        "q={q} seed={seed} beta={} tol={} agreement={}",
        fmt_f64(beta(&ctx)),
        fmt_f64(AGREEMENT_TOL),
        fmt_f64(rate)
    );
    if rate < AGREEMENT_LIMIT {
        return Err(Failure::Verification(format!("agreement rate {rate} below {AGREEMENT_LIMIT}")));
    }
    Ok(())
}

fn induction(q: u32, k: u32, samples: usize, seed: u64, max_iters: usize) -> CliResult {
    let ctx = GroupContext::new(q)?;
    let rows = slow_return_experiment(&ctx, k, samples, seed, max_iters)?;
    let mut w = CsvWriter::new(
        io::stdout().lock(),
        &["k", "lo", "hi", "sampled", "min_index", "no_return", "holds"],
    )?;
    for r in &rows {
        w.row(&[
            r.k.to_string(),
            fmt_f64(r.interval.0),
            fmt_f64(r.interval.1),
            r.sampled.to_string(),
            r.min_index.map_or(String::new(), |m| m.to_string()),
            r.no_return.to_string(),
            r.holds().to_string(),
        ])?;
    }
    w.into_inner().flush()?;
    if let Some(r) = rows.iter().find(|r| !r.holds()) {
        return Err(Failure::Verification(format!(
            "min index {:?} below k = {}",
            r.min_index, r.k
        )));
    }
    Ok(())
}
