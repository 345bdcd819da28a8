//! The `coset` command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or input format
//! error, 3 Grassmannian size cap exceeded.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{
    choi_state, dualize, p_win, p_win_extended, p_win_monte_carlo, random_strategy,
    theorem1_bound, unentangled_value, winning_rate_envelope, GameReport, McEstimate,
    RandomStrategyShape, Strategy, StrategyFile,
};
use crate::gf2::{
    check_grassmannian_size, enumerate_grassmannian, gaussian_binomial, intersection_count,
    DEFAULT_CAP, MAX_DIM,
};
use crate::perms::{full_family, orthogonal_family, verify_family, IntersectionTable, PermutationFamily};
use crate::qstate::{OperatorDump, Tolerances};
use crate::verify::{run_suite, Faults, Level, VerifyReport};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_CAP: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "coset", version, about = "Coset monogamy game toolkit over GF(2)")]
pub struct Cli {
    /// Ambient dimension.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Subspace dimension.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Intersection dimension (perms only).
    #[arg(long, global = true)]
    pub m: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Largest Grassmannian the tool will enumerate.
    #[arg(long, global = true, env = "COSET_CAP", default_value_t = DEFAULT_CAP)]
    pub cap: u64,
    /// Output format; `bounds` defaults to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub tolerance_spectral: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub tolerance_amplitude: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Number of subspaces and the intersection-dimension histogram.
    Count {
        /// Also enumerate Gr(n, k) and compare every histogram.
        #[arg(long)]
        enumerate: bool,
    },
    /// Build (or re-check) a family of mutually orthogonal permutations.
    Perms {
        /// Verify the family and exit 1 on failure.
        #[arg(long)]
        verify: bool,
        /// Read the family from this file instead of building it.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Table of the entangled bound, the unentangled optimum and the rate
    /// envelope.
    Bounds {
        #[arg(long, default_value_t = 1)]
        n_min: usize,
        #[arg(long, default_value_t = 12)]
        n_max: usize,
        /// `all`, or `rate:R` for `k = floor(n R)`. `--k` fixes k instead.
        #[arg(long, default_value = "all")]
        k_rule: String,
    },
    /// Evaluate a strategy file.
    Eval {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "exact")]
        mode: EvalMode,
        /// Rounds for `--mode mc`.
        #[arg(long, default_value_t = 100_000)]
        shots: u64,
        /// Write the Choi state of the channel here.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Write a strategy file.
    Strategy {
        #[arg(long, value_enum, default_value = "random")]
        kind: StrategyKind,
        /// Emit the equivalent `(n, n-k)` strategy instead.
        #[arg(long)]
        dualize: bool,
    },
    /// Run the verification suite.
    Verify {
        #[arg(long, value_enum, default_value = "fast")]
        level: LevelArg,
        /// Break a check on purpose, to confirm the suite notices.
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<FaultArg>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EvalMode {
    Exact,
    Extended,
    Mc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyKind {
    /// Seeded random isometry channel with random projective measurements.
    Random,
    /// Discard the state, guess uniformly.
    Discard,
    /// Bob keeps every qubit.
    Bob,
    /// Charlie keeps every qubit.
    Charlie,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    Fast,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FaultArg {
    InnerProductSign,
}

/// Maps an error to its exit code.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::CapExceeded { .. } => EXIT_CAP,
        Error::InvariantViolation(_) | Error::NoConvergence { .. } => EXIT_FAILED,
        _ => EXIT_USAGE,
    }
}

impl Cli {
    fn nk(&self) -> Result<(usize, usize)> {
        let (Some(n), Some(k)) = (self.n, self.k) else {
            return Err(Error::InvalidParameters("--n and --k are required".into()));
        };
        if k > n {
            return Err(Error::InvalidParameters(format!("k = {k} exceeds n = {n}")));
        }
        if n > MAX_DIM {
            return Err(Error::DimensionTooLarge { n, max: MAX_DIM });
        }
        Ok((n, k))
    }

    fn tolerances(&self) -> Result<Tolerances> {
        let mut tol = Tolerances::default();
        for (value, slot) in [
            (self.tolerance_spectral, &mut tol.spectral),
            (self.tolerance_amplitude, &mut tol.amplitude),
        ] {
            if let Some(v) = value {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::InvalidParameters(format!("tolerance {v} must be positive")));
                }
                *slot = v;
            }
        }
        Ok(tol)
    }

    fn format(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    fn emit(&self, body: &str) -> Result<()> {
        match &self.output {
            Some(path) => fs::write(path, body)?,
            None => print!("{body}"),
        }
        Ok(())
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Format {
        pointer: "/".into(),
        reason: format!("cannot read {}: {e}", path.display()),
    })
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return EXIT_USAGE;
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    }
    if cli.cap == 0 {
        eprintln!("error: --cap must be at least 1");
        return EXIT_USAGE;
    }
    match run(&cli) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_FAILED,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Runs one command. `Ok(false)` means a verification failure.
pub fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Count { enumerate } => cmd_count(cli, *enumerate),
        Command::Perms { verify, input } => cmd_perms(cli, *verify, input.as_deref()),
        Command::Bounds { n_min, n_max, k_rule } => cmd_bounds(cli, *n_min, *n_max, k_rule),
        Command::Eval {
            file,
            mode,
            shots,
            dump,
        } => cmd_eval(cli, file, *mode, *shots, dump.as_deref()),
        Command::Strategy { kind, dualize } => cmd_strategy(cli, *kind, *dualize),
        Command::Verify { level, inject_fault } => cmd_verify(cli, *level, *inject_fault),
    }
}

#[derive(Serialize)]
struct CountRow {
    m: usize,
    count: String,
}

#[derive(Serialize)]
struct CountReport {
    n: usize,
    k: usize,
    subspaces: String,
    rows: Vec<CountRow>,
    sum: String,
    sum_matches: bool,
    /// Present when `--enumerate` was given.
    enumeration_matches: Option<bool>,
}

fn cmd_count(cli: &Cli, enumerate: bool) -> Result<bool> {
    let (n, k) = cli.nk()?;
    let total = gaussian_binomial(n, k);
    let counts: Vec<_> = (0..=k).map(|m| intersection_count(n, k, m)).collect();
    let sum: num_bigint::BigUint = counts.iter().sum();
    let enumeration_matches = if enumerate {
        let grass = enumerate_grassmannian(n, k, cli.cap)?;
        let table = IntersectionTable::new(&grass);
        let expected: Vec<usize> = counts.iter().map(|c| c.try_into().unwrap_or(usize::MAX)).collect();
        Some(grass.len() == check_grassmannian_size(n, k, cli.cap)? && (0..grass.len()).all(|v| table.histogram(v, k) == expected))
    } else {
        None
    };
    let report = CountReport {
        n,
        k,
        subspaces: total.to_string(),
        rows: counts
            .iter()
            .enumerate()
            .map(|(m, c)| CountRow { m, count: c.to_string() })
            .collect(),
        sum: sum.to_string(),
        sum_matches: sum == total,
        enumeration_matches,
    };
    let body = match cli.format(Format::Json) {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut s = String::from("n,k,m,count,subspaces\n");
            for r in &report.rows {
                let _ = writeln!(s, "{n},{k},{},{},{}", r.m, r.count, report.subspaces);
            }
            s
        }
        Format::Text => {
            let mut s = format!("N = {}\n", report.subspaces);
            for r in &report.rows {
                let _ = writeln!(s, "m = {}: {}", r.m, r.count);
            }
            let _ = writeln!(s, "sum = {} ({})", report.sum, if report.sum_matches { "matches" } else { "MISMATCH" });
            if let Some(ok) = enumeration_matches {
                let _ = writeln!(s, "enumeration {}", if ok { "matches" } else { "MISMATCH" });
            }
            s
        }
    };
    cli.emit(&body)?;
    Ok(report.sum_matches && enumeration_matches.unwrap_or(true))
}

fn parse_family(text: &str) -> Result<PermutationFamily> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Format {
        pointer: crate::game::json_pointer(e.path()),
        reason: e.inner().to_string(),
    })
}

fn cmd_perms(cli: &Cli, verify: bool, input: Option<&Path>) -> Result<bool> {
    if cli.format(Format::Json) != Format::Json {
        return Err(Error::InvalidParameters("permutation families are written as JSON".into()));
    }
    if let Some(path) = input {
        let fam = parse_family(&read_file(path)?)?;
        check_grassmannian_size(fam.n, fam.k, cli.cap)?;
        let report = verify_family(&fam, cli.cap)?;
        cli.emit(&to_json(&report))?;
        return Ok(report.passed);
    }
    let (n, k) = cli.nk()?;
    let fam = match cli.m {
        Some(m) => orthogonal_family(n, k, m, cli.cap)?,
        None => full_family(n, k, cli.cap)?,
    };
    cli.emit(&to_json(&fam))?;
    if verify {
        let report = verify_family(&fam, cli.cap)?;
        eprint!("{}", to_json(&report));
        return Ok(report.passed);
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
struct BoundsRow {
    n: usize,
    k: usize,
    rate: f64,
    bound: f64,
    unentangled: f64,
    envelope: f64,
    bound_root: f64,
    unentangled_root: f64,
}

/// Column order of the `bounds` CSV.
pub const BOUNDS_COLUMNS: &str = "n,k,rate,bound,unentangled,envelope,bound_root,unentangled_root";

fn k_values(cli: &Cli, n: usize, rule: &str) -> Result<Vec<usize>> {
    if let Some(k) = cli.k {
        return Ok(if k <= n { vec![k] } else { Vec::new() });
    }
    if rule == "all" {
        return Ok((0..=n).collect());
    }
    if let Some(r) = rule.strip_prefix("rate:") {
        let r: f64 = r
            .parse()
            .map_err(|_| Error::InvalidParameters(format!("bad rate in k-rule {rule:?}")))?;
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::InvalidParameters(format!("rate {r} outside [0, 1]")));
        }
        return Ok(vec![(n as f64 * r).floor() as usize]);
    }
    Err(Error::InvalidParameters(format!("unknown k-rule {rule:?}")))
}

fn cmd_bounds(cli: &Cli, n_min: usize, n_max: usize, rule: &str) -> Result<bool> {
    let (lo, hi) = match cli.n {
        Some(n) => (n, n),
        None => (n_min, n_max),
    };
    if lo > hi {
        return Err(Error::InvalidParameters(format!("empty range {lo}..={hi}")));
    }
    if hi > 64 {
        return Err(Error::InvalidParameters(format!("n = {hi} is beyond the table range 64")));
    }
    let mut rows = Vec::new();
    for n in lo..=hi {
        for k in k_values(cli, n, rule)? {
            let rate = if n == 0 { 0.0 } else { k as f64 / n as f64 };
            let bound = theorem1_bound(n, k)?;
            let unentangled = unentangled_value(n, k)?;
            let root = |v: f64| if n == 0 { 1.0 } else { v.powf(1.0 / n as f64) };
            rows.push(BoundsRow {
                n,
                k,
                rate,
                bound,
                unentangled,
                envelope: winning_rate_envelope(rate)?,
                bound_root: root(bound),
                unentangled_root: root(unentangled),
            });
        }
    }
    let body = match cli.format(Format::Csv) {
        Format::Json => to_json(&rows),
        Format::Csv => {
            let mut s = format!("{BOUNDS_COLUMNS}\n");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{}",
                    r.n, r.k, r.rate, r.bound, r.unentangled, r.envelope, r.bound_root, r.unentangled_root
                );
            }
            s
        }
        Format::Text => {
            let mut s = format!(
                "{:>3} {:>3} {:>8} {:>10} {:>11} {:>10}\n",
                "n", "k", "rate", "bound", "unentangled", "envelope"
            );
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{:>3} {:>3} {:>8.4} {:>10.6} {:>11.6} {:>10.6}",
                    r.n, r.k, r.rate, r.bound, r.unentangled, r.envelope
                );
            }
            s
        }
    };
    cli.emit(&body)?;
    Ok(true)
}

#[derive(Serialize)]
struct McSection {
    #[serde(flatten)]
    estimate: McEstimate,
    exact: f64,
    /// `|mean - exact| / std_error`; `null` when the standard error is 0.
    deviation_in_se: Option<f64>,
    flagged: bool,
}

#[derive(Serialize)]
struct EvalReport {
    mode: &'static str,
    #[serde(flatten)]
    report: GameReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    monte_carlo: Option<McSection>,
}

fn cmd_eval(cli: &Cli, file: &Path, mode: EvalMode, shots: u64, dump: Option<&Path>) -> Result<bool> {
    let tol = cli.tolerances()?;
    let parsed = StrategyFile::parse(&read_file(file)?)?;
    check_grassmannian_size(parsed.n, parsed.k, cli.cap)?;
    let s = parsed.into_strategy(&tol)?;
    if let Some(path) = dump {
        let rho = choi_state(s.channel())?;
        fs::write(path, to_json(&OperatorDump::from_matrix(rho.matrix())))?;
    }
    let (mode_name, value, seed, mc) = match mode {
        EvalMode::Exact => ("exact", p_win(&s)?, None, None),
        EvalMode::Extended => ("extended", p_win_extended(&s)?, None, None),
        EvalMode::Mc => {
            let est = p_win_monte_carlo(&s, shots, cli.seed)?;
            let exact = p_win(&s)?;
            let diff = (est.mean - exact).abs();
            let (deviation_in_se, flagged) = if est.std_error > 0.0 {
                let d = diff / est.std_error;
                (Some(d), d > 4.0)
            } else {
                (None, diff > tol.spectral)
            };
            let mean = est.mean;
            let section = McSection {
                estimate: est,
                exact,
                deviation_in_se,
                flagged,
            };
            ("mc", mean, Some(cli.seed), Some(section))
        }
    };
    let report = GameReport::new(value, s.n(), s.k(), seed, tol)?;
    let ok = report.passed && !mc.as_ref().is_some_and(|m| m.flagged);
    let out = EvalReport {
        mode: mode_name,
        report,
        monte_carlo: mc,
    };
    let body = match cli.format(Format::Json) {
        Format::Json => to_json(&out),
        Format::Csv => {
            let r = &out.report;
            format!(
                "mode,value,bound,slack,passed\n{},{},{},{},{}\n",
                out.mode, r.value, r.bound, r.slack, r.passed
            )
        }
        Format::Text => {
            let r = &out.report;
            let mut s = format!(
                "{} p_win = {:.9}\nbound = {:.9}\nslack = {:.3e}\n{}\n",
                out.mode,
                r.value,
                r.bound,
                r.slack,
                if r.passed { "within bound" } else { "EXCEEDS BOUND" }
            );
            if let Some(m) = &out.monte_carlo {
                let _ = writeln!(
                    s,
                    "shots = {}, standard error = {:.3e}, exact = {:.9}{}",
                    m.estimate.shots,
                    m.estimate.std_error,
                    m.exact,
                    if m.flagged { " (FLAGGED: more than 4 standard errors off)" } else { "" }
                );
            }
            s
        }
    };
    cli.emit(&body)?;
    Ok(ok)
}

fn cmd_strategy(cli: &Cli, kind: StrategyKind, dual: bool) -> Result<bool> {
    let (n, k) = cli.nk()?;
    if n > crate::qstate::MAX_QUBITS {
        return Err(Error::DimensionTooLarge {
            n,
            max: crate::qstate::MAX_QUBITS,
        });
    }
    check_grassmannian_size(n, k, cli.cap)?;
    let s = match kind {
        StrategyKind::Random => random_strategy(n, k, cli.seed, RandomStrategyShape::natural(n, k))?,
        StrategyKind::Discard => Strategy::discard_and_guess(n, k)?,
        StrategyKind::Bob => Strategy::bob_takes_all(n, k)?,
        StrategyKind::Charlie => Strategy::charlie_takes_all(n, k)?,
    };
    let s = if dual { dualize(&s)? } else { s };
    let mut body = StrategyFile::from_strategy(&s).to_json();
    body.push('\n');
    cli.emit(&body)?;
    Ok(true)
}

fn verify_csv(report: &VerifyReport) -> String {
    let mut s = String::from("name,passed,instances,slack\n");
    for c in &report.checks {
        let slack = c.slack.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(s, "{},{},{},{}", c.name, c.passed, c.instances, slack);
    }
    s
}

fn cmd_verify(cli: &Cli, level: LevelArg, fault: Option<FaultArg>) -> Result<bool> {
    let tol = cli.tolerances()?;
    let level = match level {
        LevelArg::Fast => Level::Fast,
        LevelArg::Full => Level::Full,
    };
    let faults = Faults {
        inner_product_sign: fault == Some(FaultArg::InnerProductSign),
    };
    let report = run_suite(level, cli.seed, &tol, faults)?;
    let body = match cli.format(Format::Json) {
        Format::Json => to_json(&report),
        Format::Csv => verify_csv(&report),
        Format::Text => {
            let mut s = String::new();
            for c in &report.checks {
                let _ = write!(s, "{} {}", if c.passed { "PASS" } else { "FAIL" }, c.name);
                if let Some(v) = c.slack {
                    let _ = write!(s, " slack={v:.3e}");
                }
                if let Some(d) = c.detail.as_ref().filter(|_| !c.passed) {
                    let _ = write!(s, " ({d})");
                }
                s.push('\n');
            }
            s
        }
    };
    cli.emit(&body)?;
    for c in report.failures() {
        eprintln!("check failed: {}", c.name);
    }
    Ok(report.passed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("coset").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn global_flags_after_subcommand() {
        let cli = parse(&["count", "--n", "4", "--k", "2", "--format", "csv"]);
        assert_eq!(cli.nk().unwrap(), (4, 2));
        assert_eq!(cli.format(Format::Json), Format::Csv);
    }

    #[test]
    fn bad_ranges() {
        assert!(parse(&["count", "--n", "2", "--k", "3"]).nk().is_err());
        assert!(parse(&["count", "--n", "21", "--k", "3"]).nk().is_err());
        assert!(parse(&["count"]).nk().is_err());
        assert!(parse(&["verify", "--tolerance-spectral", "-1"]).tolerances().is_err());
    }

    #[test]
    fn k_rules() {
        let cli = parse(&["bounds"]);
        assert_eq!(k_values(&cli, 4, "all").unwrap(), vec![0, 1, 2, 3, 4]);
        assert_eq!(k_values(&cli, 5, "rate:0.5").unwrap(), vec![2]);
        assert!(k_values(&cli, 5, "rate:2").is_err());
        assert!(k_values(&cli, 5, "half").is_err());
        let cli = parse(&["bounds", "--k", "3"]);
        assert_eq!(k_values(&cli, 2, "all").unwrap(), Vec::<usize>::new());
    }

    #[test]
    fn exit_codes() {
        let cap = Error::CapExceeded {
            required: 10u32.into(),
            cap: 1,
        };
        assert_eq!(exit_code(&cap), EXIT_CAP);
        assert_eq!(exit_code(&Error::InvalidParameters(String::new())), EXIT_USAGE);
    }
}
