use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use multcrit_core::critfind::{self, CodedOptions, OutsideOptions, Rect, Sector};
use multcrit_core::{boettcher, equidist, seqb, Itinerary};

mod parse;
mod plot;
mod report;

use parse::{parse_complex, parse_range, parse_region};
use report::Table;

#[derive(Debug, Parser)]
#[command(name = "multcrit", version, about = "Critical points of multipliers of periodic orbits of z^2 + c")]
struct Cli {
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, env = "MULTCRIT_THREADS", default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Critical points of the period-n multipliers, sigma = s.
    Find(FindArgs),
    /// Fraction of words with g_w(lambda) within delta of 2 lambda.
    Frequency(FrequencyArgs),
    /// Normalized sum of log|sigma_w - s| against log 2 + G_M/2.
    Potential(PotentialArgs),
    /// Critical points accumulating at a critical point of g_w outside M.
    Theoremb(TheorembArgs),
    /// Green function of M and a distance bound at c.
    Green(GreenArgs),
    /// nu(n) and the degree formulas.
    Count(CountArgs),
    /// SVG scatter of the c column of a find CSV over the silhouette of M.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Global,
    Outside,
}

#[derive(Debug, Args)]
struct FindArgs {
    #[arg(long)]
    period: usize,
    #[arg(long, default_value = "0,0", value_parser = parse_complex, allow_hyphen_values = true)]
    s: Complex64,
    #[arg(long, value_enum, default_value_t = Mode::Global)]
    mode: Mode,
    /// X0,X1,Y0,Y1 for the global mode.
    #[arg(long, default_value = "-3,2,-2,2", value_parser = parse_region, allow_hyphen_values = true)]
    region: Rect,
    /// Outside mode: search 1 + margin <= |lambda| <= rmax.
    #[arg(long, default_value_t = boettcher::DEFAULT_LAMBDA_MARGIN)]
    margin: f64,
    #[arg(long, default_value_t = 2.0)]
    rmax: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FrequencyArgs {
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    lambda: Complex64,
    /// A..B, inclusive.
    #[arg(long, value_parser = parse_range)]
    periods: (usize, usize),
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value_t = boettcher::DEFAULT_LAMBDA_MARGIN)]
    margin: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PotentialArgs {
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    lambda: Complex64,
    #[arg(long, value_parser = parse_range)]
    periods: (usize, usize),
    #[arg(long, default_value = "0,0", value_parser = parse_complex, allow_hyphen_values = true)]
    s: Complex64,
    #[arg(long, default_value_t = boettcher::DEFAULT_LAMBDA_MARGIN)]
    margin: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TheorembArgs {
    #[arg(long)]
    base: String,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    lambda: Complex64,
    #[arg(long)]
    jmax: usize,
    #[arg(long, default_value = "0,0", value_parser = parse_complex, allow_hyphen_values = true)]
    s: Complex64,
    #[arg(long, default_value_t = seqb::DEFAULT_MARGIN)]
    margin: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GreenArgs {
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    c: Complex64,
}

#[derive(Debug, Args)]
struct CountArgs {
    #[arg(long)]
    n: usize,
}

#[derive(Debug, Args)]
struct PlotArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Grid cells per side for the silhouette of M.
    #[arg(long, default_value_t = 512)]
    grid: usize,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Compute(#[from] multcrit_core::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
        eprintln!("error: thread pool: {e}");
        return ExitCode::from(1);
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let threads = cli.threads;
    match &cli.command {
        Command::Find(a) => find(a, threads),
        Command::Frequency(a) => frequency(a, threads),
        Command::Potential(a) => potential(a, threads),
        Command::Theoremb(a) => theoremb(a, threads),
        Command::Green(a) => green(a),
        Command::Count(a) => count(a),
        Command::Plot(a) => plot::run(&a.input, &a.out, a.grid),
    }
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn check_periods((a, b): (usize, usize), max: usize) -> Result<Vec<usize>, CliError> {
    if a == 0 || a > b || b > max {
        return Err(config(format!("--periods {a}..{b} must satisfy 1 <= A <= B <= {max}")));
    }
    Ok((a..=b).collect())
}

fn check_lambda(lambda: Complex64, margin: f64) -> Result<(), CliError> {
    if !(margin >= boettcher::LAMBDA_FLOOR) {
        return Err(config(format!("--margin {margin} below {}", boettcher::LAMBDA_FLOOR)));
    }
    if !(lambda.norm() >= 1.0 + margin) {
        return Err(config(format!("--lambda {lambda} needs |lambda| >= 1 + {margin}")));
    }
    Ok(())
}

/// Warns when `(1/n) log|s| > log 2`, outside the range where the potentials converge.
fn warn_large_s(s: Complex64, n: usize) {
    if s.norm().ln() / n as f64 > 2f64.ln() {
        eprintln!("warning: (1/n) log|s| = {:.4} exceeds log 2 at n = {n}", s.norm().ln() / n as f64);
    }
}

fn find(a: &FindArgs, threads: usize) -> Result<(), CliError> {
    if a.period == 0 || a.period > multcrit_core::orbits::MAX_PERIOD {
        return Err(config(format!("--period must be in 1..={}", multcrit_core::orbits::MAX_PERIOD)));
    }
    warn_large_s(a.s, a.period);
    let mut cfg = vec![
        ("command", "find".to_string()),
        ("period", a.period.to_string()),
        ("s", report::complex(a.s)),
        ("mode", format!("{:?}", a.mode).to_lowercase()),
        ("threads", threads.to_string()),
    ];
    let points = match a.mode {
        Mode::Global => {
            let r = a.region;
            cfg.push(("region", format!("{},{},{},{}", r.x0, r.x1, r.y0, r.y1)));
            let rep = critfind::find_global(a.period, a.s, r)?;
            eprintln!(
                "global: {} points, zero-minus-pole count {}, {} parabolic suspects, {} unresolved boxes",
                rep.points.len(),
                rep.total_count,
                rep.parabolic_suspects.len(),
                rep.unresolved.len()
            );
            rep.points
        }
        Mode::Outside => {
            if !(a.margin >= boettcher::LAMBDA_FLOOR && a.rmax > 1.0 + a.margin) {
                return Err(config(format!("need margin >= {} and rmax > 1 + margin", boettcher::LAMBDA_FLOOR)));
            }
            cfg.push(("margin", a.margin.to_string()));
            cfg.push(("rmax", a.rmax.to_string()));
            let opts = OutsideOptions { coded: CodedOptions { margin: a.margin, ..CodedOptions::default() }, ..OutsideOptions::default() };
            let rep = critfind::find_outside_with(a.period, a.s, Sector::half_annulus(a.margin, a.rmax), &opts)?;
            eprintln!("outside: {} points from {} seeds", rep.points.len(), rep.seeds);
            rep.points
        }
    };
    let mut t = Table::new(
        &cfg,
        &["n", "c_re", "c_im", "s_re", "s_im", "lambda_re", "lambda_im", "word", "residual", "multiplicity", "method"],
    );
    for p in &points {
        let (lr, li) = report::opt_complex(p.lambda);
        t.row(vec![
            p.period.to_string(),
            report::float(p.c.re),
            report::float(p.c.im),
            report::float(p.s.re),
            report::float(p.s.im),
            lr,
            li,
            p.word.map(|w| w.to_string()).unwrap_or_default(),
            report::float(p.residual),
            p.multiplicity.to_string(),
            p.method.as_str().to_string(),
        ]);
    }
    t.write(open_out(&a.out)?)
}

fn frequency(a: &FrequencyArgs, threads: usize) -> Result<(), CliError> {
    let periods = check_periods(a.periods, equidist::MAX_EXPERIMENT_PERIOD)?;
    check_lambda(a.lambda, a.margin)?;
    if !(a.delta >= 0.0) {
        return Err(config("--delta must be >= 0"));
    }
    let cfg = [
        ("command", "frequency".to_string()),
        ("lambda", report::complex(a.lambda)),
        ("periods", format!("{}..{}", a.periods.0, a.periods.1)),
        ("delta", a.delta.to_string()),
        ("margin", a.margin.to_string()),
        ("threads", threads.to_string()),
    ];
    let rows = equidist::frequency_experiment_with(a.lambda, &periods, a.delta, a.margin)?;
    let mut t = Table::new(&cfg, &["n", "lambda_re", "lambda_im", "delta", "fraction", "omega_n"]);
    for r in &rows {
        t.row(vec![
            r.n.to_string(),
            report::float(r.lambda.re),
            report::float(r.lambda.im),
            report::float(r.delta),
            report::float(r.fraction),
            r.omega_n_size.to_string(),
        ]);
    }
    t.write(open_out(&a.out)?)
}

fn potential(a: &PotentialArgs, threads: usize) -> Result<(), CliError> {
    let periods = check_periods(a.periods, equidist::MAX_EXPERIMENT_PERIOD)?;
    check_lambda(a.lambda, a.margin)?;
    for n in &periods {
        warn_large_s(a.s, *n);
    }
    let cfg = [
        ("command", "potential".to_string()),
        ("lambda", report::complex(a.lambda)),
        ("periods", format!("{}..{}", a.periods.0, a.periods.1)),
        ("s", report::complex(a.s)),
        ("margin", a.margin.to_string()),
        ("threads", threads.to_string()),
    ];
    let mut t = Table::new(&cfg, &["n", "c_re", "c_im", "s_re", "s_im", "sum_potential", "target", "error"]);
    for n in periods {
        let r = equidist::sum_potential_with(a.lambda, n, a.s, a.margin)?;
        t.row(vec![
            r.n.to_string(),
            report::float(r.c.re),
            report::float(r.c.im),
            report::float(r.s.re),
            report::float(r.s.im),
            report::float(r.sum_potential),
            report::float(r.target),
            report::float(r.error),
        ]);
    }
    t.write(open_out(&a.out)?)
}

fn theoremb(a: &TheorembArgs, threads: usize) -> Result<(), CliError> {
    let base: Itinerary = a.base.parse().map_err(|e| config(format!("--base: {e}")))?;
    if a.jmax > seqb::MAX_J || a.jmax < base.len() {
        return Err(config(format!("--jmax must be in {}..={}", base.len(), seqb::MAX_J)));
    }
    check_lambda(a.lambda, a.margin)?;
    let cfg = [
        ("command", "theoremb".to_string()),
        ("base", base.to_string()),
        ("lambda", report::complex(a.lambda)),
        ("jmax", a.jmax.to_string()),
        ("s", report::complex(a.s)),
        ("margin", a.margin.to_string()),
        ("threads", threads.to_string()),
    ];
    let seq = seqb::track_sequence_with(base, a.lambda, a.jmax, a.s, a.margin).map_err(|e| match e {
        multcrit_core::Error::Precondition(m) => config(m),
        e => e.into(),
    })?;
    for (j, e) in &seq.failures {
        eprintln!("j = {j}: {e}");
    }
    let mut t = Table::new(&cfg, &["j", "word", "lambda_re", "lambda_im", "c_re", "c_im", "distance", "residual"]);
    for r in &seq.rows {
        let (lr, li) = report::opt_complex(r.lambda_j);
        t.row(vec![
            r.j.to_string(),
            r.word_j.to_string(),
            lr,
            li,
            report::float(r.c_j.re),
            report::float(r.c_j.im),
            report::float(r.distance),
            report::float(r.residual),
        ]);
    }
    if let Some(closer) = seq.eventually_closer(a.jmax) {
        eprintln!("distance trend: last four lengths {} than j = 4..7", if closer { "closer" } else { "not closer" });
    }
    t.write(open_out(&a.out)?)
}

fn green(a: &GreenArgs) -> Result<(), CliError> {
    let g = boettcher::green_m(a.c);
    let mut out = io::stdout().lock();
    writeln!(out, "c={}", report::complex(a.c))?;
    writeln!(out, "green={}", report::float(g))?;
    writeln!(out, "distance_lower_bound={}", report::float(boettcher::distance_lower_bound(a.c)))?;
    if let Ok(ep) = boettcher::lambda_of_c(a.c) {
        writeln!(out, "lambda={}", report::complex(ep.lambda))?;
    }
    Ok(())
}

fn count(a: &CountArgs) -> Result<(), CliError> {
    if a.n == 0 || a.n > equidist::MAX_NU_PERIOD {
        return Err(config(format!("--n must be in 1..={}", equidist::MAX_NU_PERIOD)));
    }
    let mut out = io::stdout().lock();
    writeln!(out, "nu={}", equidist::nu(a.n))?;
    if a.n >= 3 {
        writeln!(out, "deg_c_Sn={}", equidist::deg_c_sn(a.n)?)?;
        writeln!(out, "M_n={}", equidist::m_n(a.n)?)?;
        writeln!(out, "deg_c_Sn_halved={}", equidist::deg_c_sn_halved(a.n)?)?;
    }
    Ok(())
}
