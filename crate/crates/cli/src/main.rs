//! `cbs`: generate HBS matrices, compute single-mode marginals, regenerate the
//! reference tables, cross-check against brute force, time the recurrence and
//! score threshold-detector click data.
//!
//! Exit codes: 0 pass, 1 usage or input error, 2 numerical warning under
//! `--strict`, 3 verification failure.

mod bench;
mod verify;

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use cbs_core::hbs::build_matrix;
use cbs_core::marginals::{marginal, MarginalDistribution, Model};
use cbs_core::matrix::{MatrixFile, ModSquaredGrid};
use cbs_core::numerics::{Rational, ToRepr};
use cbs_core::oracle::{OracleLimits, DEFAULT_COMPOSITION_BUDGET, DEFAULT_PERMANENT_CAP};
use cbs_core::pgf::{extract_coeffs_via_interpolation, pgf_series};
use cbs_core::tables;
use cbs_core::validation::{evaluate_clicks, no_click_probabilities, read_clicks_csv, synthetic_clicks, write_clicks_csv};
use cbs_core::Scalar;

#[derive(Parser)]
#[command(name = "cbs", version, about = "Exact single-mode marginals for boson sampling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the banded HBS transition matrix as JSON.
    Hbs(HbsArgs),
    /// Marginal photon-count distribution of one mode.
    Marginal(MarginalArgs),
    /// Regenerate reference table 1 or 2.
    Tables(TablesArgs),
    /// Brute-force cross-check of marginals, sum rules, normalization and periodicity.
    Verify(verify::VerifyArgs),
    /// Time the recurrence against PGF interpolation.
    Bench(bench::BenchArgs),
    /// Score click records against both models.
    Validate(ValidateArgs),
    /// Write synthetic click records drawn from one model (a test fixture).
    Clicks(ClicksArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Exact,
    Float,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Quantum,
    Distinguishable,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Model {
        match m {
            ModelArg::Quantum => Model::Quantum,
            ModelArg::Distinguishable => Model::Distinguishable,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Direct,
    Interpolation,
}

#[derive(Args, Clone, Debug)]
pub struct Output {
    /// Write here instead of stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// CSV instead of JSON.
    #[arg(long)]
    csv: bool,
}

#[derive(Args, Clone, Debug)]
pub struct Budgets {
    /// Largest permanent the oracle will evaluate.
    #[arg(long, env = "CBS_PERMANENT_CAP", default_value_t = DEFAULT_PERMANENT_CAP)]
    permanent_cap: usize,
    /// Largest number of configurations the oracle will enumerate.
    #[arg(long, env = "CBS_COMPOSITION_BUDGET", default_value_t = DEFAULT_COMPOSITION_BUDGET)]
    budget: u128,
}

impl Budgets {
    pub fn limits(&self) -> OracleLimits {
        OracleLimits { permanent_cap: self.permanent_cap, composition_budget: self.budget }
    }
}

#[derive(Args)]
struct HbsArgs {
    /// Beam-splitter layers T.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    layers: u32,
    /// Photons R (rows).
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    photons: u32,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MarginalArgs {
    #[arg(long)]
    matrix: PathBuf,
    /// 1-based output mode.
    #[arg(long)]
    mode: usize,
    #[arg(long, value_enum, default_value_t = ModelArg::Quantum)]
    model: ModelArg,
    #[arg(long, value_enum, default_value_t = BackendArg::Exact)]
    backend: BackendArg,
    #[arg(long, value_enum, default_value_t = MethodArg::Direct)]
    method: MethodArg,
    /// Exit 2 if the float path raised a conditioning warning.
    #[arg(long)]
    strict: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct TablesArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    which: u8,
    /// Photons for table 1 (any R >= 3 gives the same table).
    #[arg(long, default_value_t = 3)]
    photons: usize,
    /// Aligned plain-text rendering instead of JSON.
    #[arg(long, conflicts_with = "csv")]
    text: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ValidateArgs {
    /// Click CSV with header shot,mode_1,...,mode_M.
    #[arg(long)]
    clicks: PathBuf,
    #[arg(long)]
    matrix: PathBuf,
    /// Modes to score: `all`, a list `5,6,9` or ranges `5-16`.
    #[arg(long, default_value = "all")]
    modes: String,
    #[arg(long, value_enum, default_value_t = BackendArg::Exact)]
    backend: BackendArg,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ClicksArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long, default_value_t = 100_000)]
    shots: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

/// Non-error outcomes that still need a nonzero status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Warning,
    Failed,
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> ExitCode {
        ExitCode::from(match s {
            Status::Pass => 0,
            Status::Warning => 2,
            Status::Failed => 3,
        })
    }
}

pub fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

fn read_matrix(path: &Path) -> anyhow::Result<MatrixFile> {
    MatrixFile::read(path).with_context(|| format!("reading matrix {}", path.display()))
}

/// `all`, `5`, `5,7,9`, `5-16` or a mix of these, 1-based.
pub fn parse_modes(text: &str, cols: usize) -> anyhow::Result<Vec<usize>> {
    if text.trim() == "all" {
        return Ok((1..=cols).collect());
    }
    let mut modes = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (usize, usize) = (a.trim().parse()?, b.trim().parse()?);
                if a > b {
                    bail!("empty mode range {part}");
                }
                modes.extend(a..=b);
            }
            None => modes.push(part.parse()?),
        }
    }
    if let Some(&bad) = modes.iter().find(|&&k| k == 0 || k > cols) {
        bail!("mode {bad} out of range 1..={cols}");
    }
    if modes.is_empty() {
        bail!("no modes selected");
    }
    Ok(modes)
}

fn cmd_hbs(args: HbsArgs) -> anyhow::Result<Status> {
    let h = build_matrix(args.layers as usize, args.photons as usize)?;
    emit(args.out.as_deref(), &h.matrix_file().to_json()?)?;
    Ok(Status::Pass)
}

fn render_marginal<S>(dist: &MarginalDistribution<S>, output: &Output, strict: bool) -> anyhow::Result<Status>
where
    S: Scalar + ToRepr + serde::Serialize,
{
    let text = if output.csv { dist.to_csv() } else { dist.to_json()? };
    emit(output.out.as_deref(), &text)?;
    for w in &dist.warnings {
        eprintln!("warning: {w}");
    }
    Ok(if strict && dist.has_warnings() { Status::Warning } else { Status::Pass })
}

fn compute_marginal<S>(grid: &ModSquaredGrid<S>, args: &MarginalArgs) -> anyhow::Result<MarginalDistribution<S>>
where
    S: cbs_core::marginals::SeriesScalar,
{
    let col = grid.column(args.mode)?;
    Ok(match args.method {
        MethodArg::Direct => marginal(&col, args.model.into()),
        MethodArg::Interpolation => extract_coeffs_via_interpolation(&pgf_series(&col, args.model.into())),
    })
}

fn cmd_marginal(args: MarginalArgs) -> anyhow::Result<Status> {
    let file = read_matrix(&args.matrix)?;
    match args.backend {
        BackendArg::Exact => {
            let grid: ModSquaredGrid<Rational> = file.exact_mod_squared()?;
            render_marginal(&compute_marginal(&grid, &args)?, &args.output, args.strict)
        }
        BackendArg::Float => {
            let grid = file.float_mod_squared()?;
            render_marginal(&compute_marginal(&grid, &args)?, &args.output, args.strict)
        }
    }
}

fn cmd_tables(args: TablesArgs) -> anyhow::Result<Status> {
    let text = match args.which {
        1 => {
            let t = tables::table1(args.photons)?;
            if args.text {
                t.render()
            } else if args.output.csv {
                t.to_csv()
            } else {
                serde_json::to_string_pretty(&t)?
            }
        }
        _ => {
            let rows = tables::table2(&tables::TABLE2_LAYERS)?;
            if args.text {
                tables::render_table2(&rows)
            } else if args.output.csv {
                tables::table2_csv(&rows)
            } else {
                serde_json::to_string_pretty(&rows)?
            }
        }
    };
    emit(args.output.out.as_deref(), &text)?;
    Ok(Status::Pass)
}

fn cmd_validate(args: ValidateArgs) -> anyhow::Result<Status> {
    let file = read_matrix(&args.matrix)?;
    let modes = parse_modes(&args.modes, file.cols)?;
    let reader = BufReader::new(
        File::open(&args.clicks).with_context(|| format!("opening clicks {}", args.clicks.display()))?,
    );
    let records = read_clicks_csv(reader).with_context(|| format!("parsing {}", args.clicks.display()))?;
    let report = match args.backend {
        BackendArg::Exact => evaluate_clicks(records.into_iter().map(Ok), &file.exact_mod_squared()?, &modes)?,
        BackendArg::Float => evaluate_clicks(records.into_iter().map(Ok), &file.float_mod_squared()?, &modes)?,
    };
    let text = if args.output.csv { report.to_csv() } else { report.to_json()? };
    emit(args.output.out.as_deref(), &text)?;
    Ok(Status::Pass)
}

fn cmd_clicks(args: ClicksArgs) -> anyhow::Result<Status> {
    let file = read_matrix(&args.matrix)?;
    let quantum = args.model == ModelArg::Quantum;
    let p0 = if file.has_exact_data() {
        no_click_probabilities(&file.exact_mod_squared()?, quantum)?
    } else {
        no_click_probabilities(&file.float_mod_squared()?, quantum)?
    };
    let records = synthetic_clicks(&p0, args.shots, args.seed);
    let mut buf = Vec::new();
    write_clicks_csv(&mut buf, &records)?;
    emit(args.out.as_deref(), &String::from_utf8(buf)?)?;
    Ok(Status::Pass)
}

fn run(cli: Cli) -> anyhow::Result<Status> {
    match cli.command {
        Command::Hbs(a) => cmd_hbs(a),
        Command::Marginal(a) => cmd_marginal(a),
        Command::Tables(a) => cmd_tables(a),
        Command::Verify(a) => verify::run(a),
        Command::Bench(a) => bench::run(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Clicks(a) => cmd_clicks(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(status) => status.into(),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
