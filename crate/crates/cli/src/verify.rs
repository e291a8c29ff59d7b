use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::Args;
use serde::Serialize;

use cbs_core::hbs::{build_matrix, check_periodicity, PeriodicityReport};
use cbs_core::marginals::{all_modes, normalization_check, Model, SeriesScalar};
use cbs_core::matrix::{MatrixFile, TransitionMatrix};
use cbs_core::oracle::{distinguishable_oracle_table, joint_distribution, OracleLimits};
use cbs_core::par;
use cbs_core::Scalar;

use crate::{emit, BackendArg, Budgets, Status};

/// Largest deviation tolerated by the float backend.
const FLOAT_TOLERANCE: f64 = 1e-10;

#[derive(Args)]
pub struct VerifyArgs {
    /// Check this matrix file instead of an HBS grid.
    #[arg(long, conflicts_with_all = ["layers", "photons"])]
    matrix: Option<PathBuf>,
    /// HBS depths, e.g. `3-5` or `4`.
    #[arg(long, default_value = "3-5")]
    layers: String,
    /// HBS photon counts, e.g. `3-5`.
    #[arg(long, default_value = "3-5")]
    photons: String,
    #[arg(long, value_enum, default_value_t = BackendArg::Exact)]
    backend: BackendArg,
    #[command(flatten)]
    budgets: Budgets,
    /// Write here instead of stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn parse_range(text: &str) -> anyhow::Result<RangeInclusive<usize>> {
    let (a, b) = match text.split_once('-') {
        Some((a, b)) => (a.trim().parse()?, b.trim().parse()?),
        None => {
            let x = text.trim().parse()?;
            (x, x)
        }
    };
    if a == 0 || a > b {
        bail!("bad range {text:?}");
    }
    Ok(a..=b)
}

#[derive(Debug, Serialize)]
pub struct PointReport {
    pub layers: Option<usize>,
    pub photons: usize,
    pub modes: usize,
    pub backend: &'static str,
    pub configurations: usize,
    pub quantum_max_deviation: f64,
    pub distinguishable_max_deviation: f64,
    pub sum_rule_max_deviation: f64,
    pub sum_rules_checked: usize,
    pub normalization_max_deviation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub periodicity: Option<PeriodicityReport>,
    pub pass: bool,
    pub wall_time_s: f64,
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    points: Vec<PointReport>,
    pass: bool,
}

fn max_dev<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x.clone() - y.clone()).abs())
        .fold(S::zero(), |m, d| if d > m { d } else { m })
}

fn max_of<S: Scalar>(xs: impl IntoIterator<Item = S>) -> S {
    xs.into_iter().fold(S::zero(), |m, d| if d > m { d } else { m })
}

/// Every closed form against brute force on one matrix. `tol` is zero for
/// the exact backend.
pub fn check_matrix<S: SeriesScalar>(v: &TransitionMatrix<S>, limits: &OracleLimits, tol: &S) -> anyhow::Result<PointReport> {
    let start = Instant::now();
    let (r, m) = (v.rows(), v.cols());
    let grid = v.mod_squared_grid();
    let joint = joint_distribution(v, limits)?;
    let brute = joint.marginal_table()?;
    let brute_d = distinguishable_oracle_table(v, limits)?;
    let quantum = all_modes(&grid, Model::Quantum)?;
    let dist = all_modes(&grid, Model::Distinguishable)?;

    let q_dev = max_of((0..m).map(|k| max_dev(&brute[k], &quantum[k].p)));
    let d_dev = max_of((0..m).map(|k| max_dev(&brute_d[k], &dist[k].p)));
    let pairs: Vec<(usize, usize)> = (1..=m).flat_map(|k| (0..=r).map(move |n| (k, n))).collect();
    let rules = par::map_slice(&pairs, |&(k, n)| joint.sum_rule(k, n).map(|s| s.deviation));
    let mut rule_devs = rules.into_iter().collect::<Result<Vec<S>, _>>()?;
    rule_devs.push(joint.full_sum_rule()?.deviation);
    let s_dev = max_of(rule_devs.iter().cloned());
    let n_dev = max_of(
        quantum.iter().chain(&dist).map(normalization_check).collect::<Result<Vec<S>, _>>()?,
    );
    let pass = [&q_dev, &d_dev, &s_dev, &n_dev].iter().all(|d| *d <= tol);
    Ok(PointReport {
        layers: None,
        photons: r,
        modes: m,
        backend: if S::BACKEND == cbs_core::Backend::Exact { "exact" } else { "float" },
        configurations: joint.len(),
        quantum_max_deviation: q_dev.to_f64(),
        distinguishable_max_deviation: d_dev.to_f64(),
        sum_rule_max_deviation: s_dev.to_f64(),
        sum_rules_checked: rule_devs.len(),
        normalization_max_deviation: n_dev.to_f64(),
        periodicity: None,
        pass,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

fn check_hbs(layers: usize, photons: usize, backend: BackendArg, limits: &OracleLimits) -> anyhow::Result<PointReport> {
    let h = build_matrix(layers, photons)?;
    let mut rep = match backend {
        BackendArg::Exact => check_matrix(h.exact(), limits, &cbs_core::Rational::zero())?,
        BackendArg::Float => check_matrix(&h.to_float(), limits, &FLOAT_TOLERANCE)?,
    }
    .with_layers(layers);
    let periodic = check_periodicity(&h);
    rep.pass &= periodic.pass;
    rep.periodicity = Some(periodic);
    Ok(rep)
}

impl PointReport {
    fn with_layers(mut self, layers: usize) -> Self {
        self.layers = Some(layers);
        self
    }
}

pub fn run(args: VerifyArgs) -> anyhow::Result<Status> {
    let limits = args.budgets.limits();
    let points = match &args.matrix {
        Some(path) => {
            let file = MatrixFile::read(path).with_context(|| format!("reading matrix {}", path.display()))?;
            vec![match args.backend {
                BackendArg::Exact => check_matrix(&file.to_exact_matrix()?, &limits, &cbs_core::Rational::zero())?,
                BackendArg::Float => check_matrix(&file.to_float_matrix()?, &limits, &FLOAT_TOLERANCE)?,
            }]
        }
        None => {
            let layers = parse_range(&args.layers)?;
            let photons = parse_range(&args.photons)?;
            let mut points = Vec::new();
            for t in layers {
                for r in photons.clone() {
                    points.push(check_hbs(t, r, args.backend, &limits)?);
                }
            }
            points
        }
    };
    let pass = points.iter().all(|p| p.pass);
    let report = VerifyReport { points, pass };
    emit(args.out.as_deref(), &serde_json::to_string_pretty(&report)?)?;
    Ok(if pass { Status::Pass } else { Status::Failed })
}
