//! `mixfactor <gen|factor|solve|exp>`: matrix generation, factorization,
//! least-squares solves and the named experiments, with CSV output.
//!
//! Exit codes: 0 success, 2 usage, 3 numerical failure, 4 I/O.

pub mod config;
pub mod experiments;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::linalg::{house_qr, house_qrcp};
use crate::lstsq::Method;
use crate::matgen::gaussian_vector;
use crate::matrix::RealMatrix;
use crate::mmio::read_matrix_market_file;
use crate::rng::stream;
use crate::rurv::{rurv_haar, rurv_ros_partial, rurv_ros_with, rvlu_ros, RosOptions};

use config::FamilyArgs;
use experiments::{default_methods, ls_cells, solve_all, ExpContext, ExpName};
use output::{num, write_matrix, write_table, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Mm,
    Csv,
}

/// A full invocation. Parsing `to_args()` reproduces it exactly.
#[derive(Clone, Debug, PartialEq, Parser)]
#[command(name = "mixfactor", version, about = "Randomized URV factorizations and experiments")]
pub struct ExperimentConfig {
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Number of F D factors in each ROS mixing.
    #[arg(long, global = true, default_value_t = 1)]
    pub mixes: usize,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Omit the wall-clock comment and timing columns.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    /// Skip the decreasing-norm column sort after ROS mixing.
    #[arg(long, global = true)]
    pub no_presort: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, PartialEq, Subcommand)]
pub enum Command {
    /// Generate a test matrix (Matrix Market, or CSV rows).
    Gen(GenArgs),
    /// Factor a Matrix Market matrix and write its triangular factor.
    Factor(FactorArgs),
    /// Solve a least-squares problem with one or more methods.
    Solve(SolveArgs),
    /// Run a named experiment.
    Exp(ExpArgs),
}

#[derive(Clone, Debug, PartialEq, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FactorMethod {
    Qr,
    Qrcp,
    RurvHaar,
    RurvRos,
    RvluRos,
}

#[derive(Clone, Debug, PartialEq, Args)]
pub struct FactorArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = FactorMethod::RurvRos)]
    pub method: FactorMethod,
    /// Stop after this many Householder steps (rurv-ros only).
    #[arg(long)]
    pub rank: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Args)]
pub struct SolveArgs {
    /// Coefficient matrix (Matrix Market).
    #[arg(long)]
    pub a: PathBuf,
    /// Right-hand side as an m x 1 Matrix Market file; standard normal from the seed when absent.
    #[arg(long)]
    pub b: Option<PathBuf>,
    /// Comma-separated methods; defaults depend on the shape of A.
    #[arg(long, value_delimiter = ',', value_parser = parse_method)]
    pub methods: Vec<Method>,
}

#[derive(Clone, Debug, PartialEq, Args)]
pub struct ExpArgs {
    #[arg(value_enum)]
    pub name: ExpName,
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Sweep sizes: `a:b[:step]` or a comma list.
    #[arg(long)]
    pub sizes: Option<String>,
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    /// Comma-separated factorizations (or solver methods for ls-bench).
    #[arg(long, value_delimiter = ',')]
    pub backends: Vec<String>,
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse::<Method>().map_err(|_| {
        let names: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

fn value_name<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value().expect("no skipped variants").get_name().to_string()
}

impl ExperimentConfig {
    /// Arguments (without the program name) that parse back to `self`.
    pub fn to_args(&self) -> Vec<String> {
        let mut out = vec![format!("--seed={}", self.seed), format!("--mixes={}", self.mixes)];
        if let Some(p) = &self.out {
            out.push(format!("--out={}", p.display()));
        }
        if let Some(f) = &self.format {
            out.push(format!("--format={}", value_name(f)));
        }
        if self.no_timestamp {
            out.push("--no-timestamp".into());
        }
        if self.no_presort {
            out.push("--no-presort".into());
        }
        match &self.command {
            Command::Gen(g) => {
                out.push("gen".into());
                out.extend(g.family.to_cli_args());
            }
            Command::Factor(f) => {
                out.push("factor".into());
                out.push(format!("--input={}", f.input.display()));
                out.push(format!("--method={}", value_name(&f.method)));
                if let Some(k) = f.rank {
                    out.push(format!("--rank={k}"));
                }
            }
            Command::Solve(s) => {
                out.push("solve".into());
                out.push(format!("--a={}", s.a.display()));
                if let Some(b) = &s.b {
                    out.push(format!("--b={}", b.display()));
                }
                if !s.methods.is_empty() {
                    let names: Vec<&str> = s.methods.iter().map(|m| m.name()).collect();
                    out.push(format!("--methods={}", names.join(",")));
                }
            }
            Command::Exp(e) => {
                out.push("exp".into());
                out.push(value_name(&e.name));
                out.extend(e.family.to_cli_args());
                if let Some(s) = &e.sizes {
                    out.push(format!("--sizes={s}"));
                }
                out.push(format!("--reps={}", e.reps));
                if !e.backends.is_empty() {
                    out.push(format!("--backends={}", e.backends.join(",")));
                }
            }
        }
        out
    }

    pub fn command_line(&self) -> String {
        std::iter::once("mixfactor".to_string())
            .chain(self.to_args().into_iter().map(|a| {
                if a.chars().any(char::is_whitespace) {
                    format!("'{a}'")
                } else {
                    a
                }
            }))
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn ros_options(&self) -> RosOptions {
        RosOptions {
            num_mixes: self.mixes,
            presort: !self.no_presort,
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        _ if e.is_numerical() => EXIT_NUMERICAL,
        Error::Io { .. } | Error::Parse { .. } => EXIT_IO,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match ExperimentConfig::try_parse_from(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cfg) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("mixfactor: {e}");
            exit_code(&e)
        }
    }
}

/// Runs a parsed command. `Ok` carries a non-zero code when some records
/// were written despite numerical failures.
pub fn execute(cfg: &ExperimentConfig) -> Result<i32> {
    if cfg.mixes == 0 {
        return Err(Error::invalid("--mixes must be at least 1"));
    }
    match &cfg.command {
        Command::Gen(g) => cmd_gen(cfg, g).map(|()| EXIT_OK),
        Command::Factor(f) => cmd_factor(cfg, f).map(|()| EXIT_OK),
        Command::Solve(s) => cmd_solve(cfg, s),
        Command::Exp(e) => cmd_exp(cfg, e).map(|()| EXIT_OK),
    }
}

fn require_csv(cfg: &ExperimentConfig, what: &str) -> Result<()> {
    if cfg.format == Some(Format::Mm) {
        return Err(Error::invalid(format!("{what} writes CSV only")));
    }
    Ok(())
}

fn matrix_table(a: &RealMatrix) -> Table {
    let header: Vec<String> = (1..=a.cols()).map(|j| format!("c{j}")).collect();
    let rows = (0..a.rows())
        .map(|i| a.row(i).into_iter().map(num).collect())
        .collect();
    Table { header, rows }
}

fn cmd_gen(cfg: &ExperimentConfig, g: &GenArgs) -> Result<()> {
    let family = g.family.family()?;
    let generated = family.generate_with(&mut stream(cfg.seed, 0))?;
    match cfg.format.unwrap_or(Format::Mm) {
        Format::Mm => {
            let mut extra = vec![format!("family: {}", family.name())];
            if let Some(s) = &generated.sigma {
                let vals: Vec<String> = s.iter().map(|v| num(*v)).collect();
                extra.push(format!("sigma: {}", vals.join(" ")));
            }
            write_matrix(cfg, &generated.a, &extra)
        }
        Format::Csv => write_table(cfg, &matrix_table(&generated.a)),
    }
}

fn cmd_factor(cfg: &ExperimentConfig, f: &FactorArgs) -> Result<()> {
    let a = read_matrix_market_file(&f.input)?;
    let mut rng = stream(cfg.seed, 0);
    if f.rank.is_some() && f.method != FactorMethod::RurvRos {
        return Err(Error::invalid("--rank is only supported with --method rurv-ros"));
    }
    let (factor, label) = match f.method {
        FactorMethod::Qr => (house_qr(&a)?.r(), "R"),
        FactorMethod::Qrcp => (house_qrcp(&a)?.r(), "R"),
        FactorMethod::RurvHaar => (rurv_haar(&a, &mut rng)?.r, "R"),
        FactorMethod::RurvRos => match f.rank {
            Some(k) => {
                if cfg.no_presort {
                    return Err(Error::invalid("--rank always pre-sorts; drop --no-presort"));
                }
                (rurv_ros_partial(&a, k, cfg.mixes, &mut rng)?.r, "R")
            }
            None => (rurv_ros_with(&a, cfg.ros_options(), &mut rng)?.r, "R"),
        },
        FactorMethod::RvluRos => (rvlu_ros(&a, cfg.mixes, &mut rng)?.l, "L"),
    };
    match cfg.format.unwrap_or(Format::Mm) {
        Format::Mm => write_matrix(cfg, &factor, &[format!("factor: {label}")]),
        Format::Csv => {
            let mut t = Table::new(&["index", "abs_diag"]);
            for (i, d) in factor.diag().iter().enumerate() {
                t.push(vec![(i + 1).to_string(), num(d.abs())]);
            }
            write_table(cfg, &t)
        }
    }
}

fn cmd_solve(cfg: &ExperimentConfig, s: &SolveArgs) -> Result<i32> {
    require_csv(cfg, "solve")?;
    let a = read_matrix_market_file(&s.a)?;
    let (m, n) = a.shape();
    let b = match &s.b {
        Some(path) => {
            let b = read_matrix_market_file(path)?;
            if b.cols() != 1 || b.rows() != m {
                return Err(Error::shape("solve", format!("{m}x1 right-hand side"), format!("{}x{}", b.rows(), b.cols())));
            }
            b.into_vec()
        }
        None => gaussian_vector(m, &mut stream(cfg.seed, 1)),
    };
    let methods = if s.methods.is_empty() {
        default_methods(m, n)
    } else {
        s.methods.clone()
    };
    let records = solve_all(&a, &b, &methods, cfg.ros_options(), cfg.seed, 0)?;
    let mut t = Table::new(&["method", "m", "n", "residual", "norm", "elapsed", "mix", "factor", "solve", "status"]);
    for rec in &records {
        let mut row = vec![rec.method.name().to_string(), m.to_string(), n.to_string()];
        row.extend(ls_cells(rec, !cfg.no_timestamp));
        t.push(row);
    }
    write_table(cfg, &t)?;
    let failures: Vec<&str> = records
        .iter()
        .filter_map(|r| r.outcome.as_ref().err().map(|_| r.method.name()))
        .collect();
    if failures.is_empty() {
        Ok(EXIT_OK)
    } else {
        eprintln!("mixfactor: numerical failure in {}", failures.join(", "));
        Ok(EXIT_NUMERICAL)
    }
}

fn cmd_exp(cfg: &ExperimentConfig, e: &ExpArgs) -> Result<()> {
    require_csv(cfg, "exp")?;
    let ctx = ExpContext {
        seed: cfg.seed,
        mixes: cfg.mixes,
        presort: !cfg.no_presort,
        timings: !cfg.no_timestamp,
        family: &e.family,
        sizes: e.sizes.as_deref(),
        reps: e.reps,
        backends: &e.backends,
    };
    let table = experiments::run(e.name, &ctx)?;
    write_table(cfg, &table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> ExperimentConfig {
        ExperimentConfig::try_parse_from(std::iter::once("mixfactor").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn args_round_trip() {
        let cases: &[&[&str]] = &[
            &["gen", "--family", "kahan", "--m", "4", "--c", "0.1", "--tau", "0"],
            &["--seed", "7", "--mixes", "2", "--no-timestamp", "exp", "rr-scaling", "--sizes", "20:40", "--backends", "qrcp,rurv-ros"],
            &["solve", "--a", "a b.mtx", "--methods", "qr-basic,rvlu-minnorm", "--out", "x.csv", "--format", "csv"],
            &["factor", "--input", "a.mtx", "--method", "rurv-ros", "--rank", "3", "--no-presort"],
            &["exp", "qlp", "--family", "prescribed-sigma", "--sigma", "3,2,1e-5"],
        ];
        for args in cases {
            let cfg = parse(args);
            let again = ExperimentConfig::try_parse_from(std::iter::once("mixfactor".to_string()).chain(cfg.to_args())).unwrap();
            assert_eq!(cfg, again, "{args:?}");
        }
    }

    #[test]
    fn usage_errors() {
        for args in [
            vec!["mixfactor"],
            vec!["mixfactor", "exp", "nonsense"],
            vec!["mixfactor", "solve", "--a", "x", "--methods", "bogus"],
            vec!["mixfactor", "--format", "xml", "gen"],
        ] {
            assert_eq!(run(args.clone()), EXIT_USAGE, "{args:?}");
        }
        assert_eq!(run(["mixfactor", "--mixes", "0", "gen", "--family", "kahan"]), EXIT_USAGE);
        assert_eq!(run(["mixfactor", "gen"]), EXIT_USAGE);
    }

    #[test]
    fn exit_code_classes() {
        assert_eq!(exit_code(&Error::Singular { index: 0 }), EXIT_NUMERICAL);
        assert_eq!(exit_code(&Error::invalid("x")), EXIT_USAGE);
        let io = Error::Io {
            path: "p".into(),
            source: std::io::Error::other("x"),
        };
        assert_eq!(exit_code(&io), EXIT_IO);
    }
}
