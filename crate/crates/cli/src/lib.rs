//! The `congrusum` command line: compute `S_k(n, m)`, run the checkers,
//! sweep them over ranges and compare the evaluation routes.

pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::ops::RangeInclusive;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use congrusum::arith::{self, gcd, SigmaValue};
use congrusum::sk_engine::{self, CharacterExpansion, Method, ResidueTable};
use congrusum::verify::{
    format_real, sweep, CheckId, LemmaId, LemmaParams, SweepReport, SweepSpec,
};
use num_rational::Ratio;

pub use output::{Format, Table};

pub const THREADS_ENV: &str = "CONGRUSUM_THREADS";

const ARITH_COLUMNS: [&str; 10] = [
    "n",
    "factorization",
    "mobius",
    "phi",
    "tau",
    "lambda",
    "sigma",
    "sigma_half",
    "c_n",
    "divisors",
];
const COMPUTE_COLUMNS: [&str; 5] = ["n", "k", "m", "method", "value"];
const TABLE_COLUMNS: [&str; 6] = ["n", "k", "m", "method", "value", "error"];
const BENCH_COLUMNS: [&str; 8] = [
    "n",
    "k",
    "m",
    "method",
    "value",
    "repetitions",
    "best_seconds",
    "mean_seconds",
];

const RECORD_HELP: &str = "CSV columns: check_id,params,kind,lhs,rhs,ratio,deviation,tolerance,pass,note\n\
params are `name=value` pairs joined by `;`. Skipped units come last with kind `skipped` and the reason in `note`.\n\
Exit status: 0 all checks pass, 1 at least one failure, 2 usage or guard error.";

#[derive(Debug, Parser)]
#[command(
    name = "congrusum",
    version,
    about = "Congruence product sums S_k(n, m): exact evaluation and numerical verification"
)]
struct Cli {
    /// Output format (default: CSV; `sk compute` prints the bare value).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads (overrides CONGRUSUM_THREADS). Never changes the output.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Arithmetic functions of n.
    #[command(
        after_help = "CSV columns: n,factorization,mobius,phi,tau,lambda,sigma,sigma_half,c_n,divisors\n\
c_n is empty unless n is odd and at least 3; divisors are separated by spaces."
    )]
    Arith(ArithArgs),
    /// Evaluate S_k(n, m).
    #[command(subcommand)]
    Sk(SkCommand),
    /// Run one checker.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Run a checker over a range of moduli.
    #[command(after_help = RECORD_HELP)]
    Sweep(SweepArgs),
    /// Time the evaluation routes against each other.
    #[command(
        after_help = "CSV columns: n,k,m,method,value,repetitions,best_seconds,mean_seconds\n\
Values are compared across methods before any timing is printed; a mismatch exits with status 1."
    )]
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct ArithArgs {
    #[arg(long, conflicts_with = "n_range", required_unless_present = "n_range")]
    n: Option<u64>,
    /// Inclusive range `A..B`.
    #[arg(long, value_parser = parse_range)]
    n_range: Option<RangeInclusive<u64>>,
    /// Order of sigma: an integer or 1/2.
    #[arg(long, default_value = "1")]
    lambda: Ratio<i64>,
}

#[derive(Debug, Subcommand)]
enum SkCommand {
    /// One value S_k(n, m).
    #[command(after_help = "CSV columns: n,k,m,method,value")]
    Compute {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long)]
        m: u64,
        #[arg(long, value_enum, default_value_t = MethodChoice::Auto)]
        method: MethodChoice,
    },
    /// S_k(n, m) and its error term for every reduced m.
    #[command(after_help = "CSV columns: n,k,m,method,value,error\n\
error is S_k(n, m) - n^k phi(n)^(k-1) / 2^k as an exact fraction.")]
    Table {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, value_enum, default_value_t = MethodChoice::Auto)]
        method: MethodChoice,
    },
}

#[derive(Debug, Subcommand)]
enum VerifyCommand {
    /// A theorem-level checker at one n (or a range).
    #[command(after_help = RECORD_HELP)]
    Theorem {
        /// theorem_k2, theorem_ksup3, ratio_ksup4, mean_square, xu_moment,
        /// row_sum, even_vanishing, r22 or sharpness.
        #[arg(long, value_parser = parse_fixed_check)]
        id: CheckId,
        #[arg(long, conflicts_with = "n_range", required_unless_present = "n_range")]
        n: Option<u64>,
        #[arg(long, value_parser = parse_range)]
        n_range: Option<RangeInclusive<u64>>,
        /// k (or l for xu_moment); repeatable.
        #[arg(long)]
        k: Vec<u32>,
    },
    /// A lemma checker over every modulus up to a maximum.
    #[command(after_help = RECORD_HELP)]
    Lemma {
        /// kloos, alk11, sum_tech, partition, recip, gcd_dist, abel_pv or incomplete.
        #[arg(long)]
        id: LemmaId,
        #[arg(long = "n-max", visible_alias = "q-max", default_value_t = 100)]
        max: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Random functions per modulus (partition only).
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// The mean-square identity at odd n (or every odd n in a range).
    #[command(after_help = RECORD_HELP)]
    MeanSquare {
        #[arg(long, conflicts_with = "n_range", required_unless_present = "n_range")]
        n: Option<u64>,
        #[arg(long, value_parser = parse_range)]
        n_range: Option<RangeInclusive<u64>>,
    },
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Checker name, e.g. theorem_k2 or lemma_kloos.
    #[arg(long)]
    check: CheckId,
    #[arg(long, value_parser = parse_range)]
    n_range: RangeInclusive<u64>,
    /// k (or l for xu_moment); repeatable.
    #[arg(long, conflicts_with = "k_range")]
    k: Vec<u32>,
    #[arg(long, value_parser = parse_range)]
    k_range: Option<RangeInclusive<u64>>,
    #[arg(long)]
    odd_only: bool,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 2)]
    k: u32,
    #[arg(long, default_value_t = 1)]
    m: u64,
    /// `all` or a comma-separated list of methods.
    #[arg(long, default_value = "all")]
    methods: String,
    #[arg(long, default_value_t = 3)]
    repetitions: u32,
}

fn parse_range(s: &str) -> Result<RangeInclusive<u64>, String> {
    let (a, b) = s
        .split_once("..=")
        .or_else(|| s.split_once(".."))
        .ok_or_else(|| format!("expected A..B, got `{s}`"))?;
    let a: u64 = a
        .trim()
        .parse()
        .map_err(|e| format!("bad range start: {e}"))?;
    let b: u64 = b
        .trim()
        .parse()
        .map_err(|e| format!("bad range end: {e}"))?;
    if a > b {
        return Err(format!("empty range {a}..{b}"));
    }
    Ok(a..=b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodChoice {
    Auto,
    Bruteforce,
    Direct2,
    Convolution,
    Characters,
}

impl MethodChoice {
    fn method(self) -> Option<Method> {
        match self {
            MethodChoice::Auto => None,
            MethodChoice::Bruteforce => Some(Method::BruteForce),
            MethodChoice::Direct2 => Some(Method::Direct2),
            MethodChoice::Convolution => Some(Method::Convolution),
            MethodChoice::Characters => Some(Method::Characters),
        }
    }
}

fn parse_fixed_check(s: &str) -> Result<CheckId, String> {
    match s.parse::<CheckId>()? {
        CheckId::Lemma(_) => Err(format!("`{s}` is a lemma; use `verify lemma`")),
        c => Ok(c),
    }
}

enum Failure {
    Usage(String),
    Verification(Output),
}

impl From<congrusum::Error> for Failure {
    fn from(e: congrusum::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

struct Output {
    stdout: String,
    stderr: String,
}

impl Output {
    fn data(stdout: String) -> Output {
        Output {
            stdout,
            stderr: String::new(),
        }
    }

    fn diagnostic(stderr: String) -> Output {
        Output {
            stdout: String::new(),
            stderr,
        }
    }
}

/// Parses `argv` (including the program name), runs the command and returns
/// the exit status: 0 success, 1 verification failure, 2 usage or guard error.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                2
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    let threads = match resolve_threads(cli.threads) {
        Ok(t) => t,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            return 2;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start {threads} threads: {e}");
            return 2;
        }
    };
    let result = pool.install(|| execute(&cli, threads));
    match result {
        Ok(o) => {
            let _ = out.write_all(o.stdout.as_bytes());
            let _ = err.write_all(o.stderr.as_bytes());
            0
        }
        Err(Failure::Verification(o)) => {
            let _ = out.write_all(o.stdout.as_bytes());
            let _ = err.write_all(o.stderr.as_bytes());
            1
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
    }
}

fn resolve_threads(flag: Option<usize>) -> Result<usize, String> {
    let t = match flag {
        Some(t) => t,
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| format!("{THREADS_ENV} must be a positive integer (got `{v}`)"))?,
            Err(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
        },
    };
    if t == 0 {
        return Err("thread count must be at least 1".into());
    }
    Ok(t)
}

fn execute(cli: &Cli, threads: usize) -> Result<Output, Failure> {
    let format = cli.format.unwrap_or(Format::Csv);
    match &cli.command {
        Command::Arith(a) => arith_cmd(a, format),
        Command::Sk(SkCommand::Compute { n, k, m, method }) => {
            let r = match method.method() {
                None => sk_engine::sk_exact(*n, *k, *m)?,
                Some(method) => sk_engine::sk_with_method(*n, *k, *m, method)?,
            };
            match cli.format {
                None => Ok(Output::data(format!("{}\n", r.value))),
                Some(f) => {
                    let mut t = Table::new(&COMPUTE_COLUMNS);
                    t.push(vec![
                        n.to_string(),
                        k.to_string(),
                        m.to_string(),
                        r.method.name().to_string(),
                        r.value.to_string(),
                    ]);
                    Ok(Output::data(t.render(f)))
                }
            }
        }
        Command::Sk(SkCommand::Table { n, k, method }) => {
            sk_table_cmd(*n, *k, method.method(), format)
        }
        Command::Verify(VerifyCommand::Theorem { id, n, n_range, k }) => {
            let range = n_range.clone().unwrap_or_else(|| n.unwrap()..=n.unwrap());
            let mut spec = SweepSpec::new(*id, *range.start(), *range.end());
            if !k.is_empty() {
                spec.ks = k.clone();
            } else if matches!(id, CheckId::TheoremKsup3 | CheckId::RatioKsup4) {
                spec.ks = vec![3];
            } else if *id == CheckId::XuMoment {
                spec.ks = vec![0];
            }
            spec.threads = threads;
            finish_report(sweep(&spec), format, n.is_some())
        }
        Command::Verify(VerifyCommand::Lemma {
            id,
            max,
            seed,
            samples,
        }) => {
            let params = LemmaParams {
                max: *max,
                seed: *seed,
                samples: *samples,
                threads,
            };
            finish_report(congrusum::verify::check_lemma(*id, &params)?, format, false)
        }
        Command::Verify(VerifyCommand::MeanSquare { n, n_range }) => {
            let range = n_range.clone().unwrap_or_else(|| n.unwrap()..=n.unwrap());
            let mut spec = SweepSpec::new(CheckId::MeanSquare, *range.start(), *range.end());
            spec.odd_only = n_range.is_some();
            spec.threads = threads;
            finish_report(sweep(&spec), format, n.is_some())
        }
        Command::Sweep(s) => {
            let mut spec = SweepSpec::new(s.check, *s.n_range.start(), *s.n_range.end());
            if let Some(r) = &s.k_range {
                spec.ks = r
                    .clone()
                    .map(|k| {
                        u32::try_from(k).map_err(|_| Failure::Usage(format!("k = {k} too large")))
                    })
                    .collect::<Result<_, _>>()?;
            } else if !s.k.is_empty() {
                spec.ks = s.k.clone();
            }
            spec.odd_only = s.odd_only;
            spec.seed = s.seed;
            spec.samples = s.samples;
            spec.threads = threads;
            finish_report(sweep(&spec), format, false)
        }
        Command::Bench(b) => bench_cmd(b, format),
    }
}

/// A single-point request whose only unit was skipped is a usage error.
fn finish_report(report: SweepReport, format: Format, single: bool) -> Result<Output, Failure> {
    if single && report.records.is_empty() {
        if let Some(s) = report.skipped.first() {
            return Err(Failure::Usage(s.reason.clone()));
        }
    }
    let stdout = output::report_table(&report).render(format);
    let mut stderr = output::report_summary(&report);
    stderr.push('\n');
    if report.passed() {
        Ok(Output { stdout, stderr })
    } else {
        for r in report.failing().take(10) {
            stderr.push_str(&format!(
                "FAIL {} {}: lhs {} rhs {}\n",
                r.check_id,
                output::format_params(&r.params),
                r.lhs,
                r.rhs
            ));
        }
        Err(Failure::Verification(Output { stdout, stderr }))
    }
}

fn arith_cmd(a: &ArithArgs, format: Format) -> Result<Output, Failure> {
    let range = a
        .n_range
        .clone()
        .unwrap_or_else(|| a.n.unwrap()..=a.n.unwrap());
    if *range.start() == 0 {
        return Err(Failure::Usage("n must be at least 1".into()));
    }
    let mut t = Table::new(&ARITH_COLUMNS);
    for n in range {
        let f = arith::factorize(n);
        let sigma = match arith::sigma(n, a.lambda)? {
            SigmaValue::Exact(r) => r.to_string(),
            SigmaValue::Real(x) => format_real(x),
        };
        let c_n = arith::c_constant(n)
            .map(|c| c.to_string())
            .unwrap_or_default();
        let divisors = f
            .divisors()
            .iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        t.push(vec![
            n.to_string(),
            f.to_string(),
            f.mobius().to_string(),
            f.euler_phi().to_string(),
            f.tau().to_string(),
            a.lambda.to_string(),
            sigma,
            format_real(arith::sigma_half(n)),
            c_n,
            divisors,
        ]);
    }
    Ok(Output::data(t.render(format)))
}

fn sk_table_cmd(n: u64, k: u32, method: Option<Method>, format: Format) -> Result<Output, Failure> {
    let residues: Vec<u64> = (1..=n).filter(|&m| gcd(m, n) == 1).collect();
    let (name, values): (&str, Vec<_>) = match method {
        None | Some(Method::Convolution) | Some(Method::Direct2) => {
            let table: ResidueTable = match method {
                None => sk_engine::sk_table(n, k)?,
                Some(Method::Convolution) => sk_engine::sk_convolution_table(n, k)?,
                _ => {
                    if k != 2 {
                        return Err(Failure::Usage(format!(
                            "direct2 evaluates k = 2 only (got k = {k})"
                        )));
                    }
                    sk_engine::s2_table(n)?
                }
            };
            let name = match method {
                None if k == 2 => "direct2",
                None => "convolution",
                Some(m) => m.name(),
            };
            (
                name,
                residues.iter().map(|&m| table.get(m).clone()).collect(),
            )
        }
        Some(Method::BruteForce) => (
            "bruteforce",
            residues
                .iter()
                .map(|&m| sk_engine::sk_bruteforce(n, k, m).map(|r| r.value))
                .collect::<Result<_, _>>()?,
        ),
        Some(Method::Characters) => {
            if n < 2 || k < 2 {
                sk_engine::sk_characters(n, k, 1)?;
            }
            let exp = CharacterExpansion::new(n);
            (
                "characters",
                residues
                    .iter()
                    .map(|&m| exp.sk(k, m).map(|r| r.value))
                    .collect::<Result<_, _>>()?,
            )
        }
    };
    let main = sk_engine::main_term(n, k);
    let mut t = Table::new(&TABLE_COLUMNS);
    for (m, v) in residues.iter().zip(values) {
        let error = congrusum::ExactRational::from_integer(v.clone().into()) - &main;
        t.push(vec![
            n.to_string(),
            k.to_string(),
            m.to_string(),
            name.to_string(),
            v.to_string(),
            error.to_string(),
        ]);
    }
    Ok(Output::data(t.render(format)))
}

fn bench_methods(spec: &str, k: u32) -> Result<Vec<Method>, Failure> {
    if spec == "all" {
        return Ok(Method::ALL
            .into_iter()
            .filter(|&m| k == 2 || m != Method::Direct2)
            .collect());
    }
    let mut methods = Vec::new();
    for name in spec.split(',') {
        let m: Method = name.trim().parse().map_err(Failure::Usage)?;
        if !methods.contains(&m) {
            methods.push(m);
        }
    }
    Ok(methods)
}

fn bench_cmd(b: &BenchArgs, format: Format) -> Result<Output, Failure> {
    if b.repetitions == 0 {
        return Err(Failure::Usage("repetitions must be at least 1".into()));
    }
    let methods = bench_methods(&b.methods, b.k)?;
    let mut results = Vec::new();
    for &method in &methods {
        let mut times = Vec::new();
        let mut value = None;
        for _ in 0..b.repetitions {
            let start = Instant::now();
            let r = sk_engine::sk_with_method(b.n, b.k, b.m, method)?;
            times.push(start.elapsed().as_secs_f64());
            match &value {
                None => value = Some(r.value),
                Some(v) if *v != r.value => {
                    return Err(Failure::Verification(Output::diagnostic(format!(
                        "{method} is not repeatable: {v} then {}\n",
                        r.value
                    ))))
                }
                Some(_) => {}
            }
        }
        results.push((method, value.expect("at least one repetition"), times));
    }
    if let Some((first, v0, _)) = results.first() {
        if let Some((other, v, _)) = results.iter().find(|(_, v, _)| v != v0) {
            return Err(Failure::Verification(Output::diagnostic(format!(
                "methods disagree on S_{}({}, {}): {first} = {v0}, {other} = {v}\n",
                b.k, b.n, b.m
            ))));
        }
    }
    let mut t = Table::new(&BENCH_COLUMNS);
    for (method, value, times) in results {
        let best = times.iter().copied().fold(f64::INFINITY, f64::min);
        let mean = times.iter().sum::<f64>() / times.len() as f64;
        t.push(vec![
            b.n.to_string(),
            b.k.to_string(),
            b.m.to_string(),
            method.name().to_string(),
            value.to_string(),
            b.repetitions.to_string(),
            format_real(best),
            format_real(mean),
        ]);
    }
    Ok(Output::data(t.render(format)))
}

/// Runs with captured output; returns `(status, stdout, stderr)`.
pub fn run_captured<I, T>(argv: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8_lossy(&out).into_owned(),
        String::from_utf8_lossy(&err).into_owned(),
    )
}
