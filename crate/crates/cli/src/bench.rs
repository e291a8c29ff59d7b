use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use cbs_core::marginals::{normalization_check, quantum_marginal, MarginalDistribution, Model};
use cbs_core::pgf::{extract_coeffs_via_interpolation, pgf_series};
use cbs_core::{ModeColumn, Rational};

use crate::{emit, Status};

#[derive(Args)]
pub struct BenchArgs {
    /// Photon counts to time.
    #[arg(long, value_delimiter = ',', default_value = "1,64,512,1024,2048,4096")]
    photons: Vec<usize>,
    /// Column sum of the random test columns.
    #[arg(long, default_value_t = 0.5)]
    sum: f64,
    /// Timing repetitions; the minimum is reported.
    #[arg(long, default_value_t = 3)]
    reps: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Largest R for which an exact reference is computed.
    #[arg(long, default_value_t = 64)]
    exact_max: usize,
    /// Skip interpolation above this R.
    #[arg(long, default_value_t = 4096)]
    interpolation_max: usize,
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long)]
    csv: bool,
}

#[derive(Debug, Serialize)]
struct BenchRow {
    photons: usize,
    method: &'static str,
    wall_time_s: f64,
    condition: Option<f64>,
    ill_conditioned: bool,
    normalization_error: f64,
    /// Against the exact rational result, when computed.
    max_abs_error: Option<f64>,
}

#[derive(Debug, Serialize)]
struct Doubling {
    from: usize,
    to: usize,
    direct_time_ratio: f64,
}

#[derive(Debug, Serialize)]
struct BenchReport {
    sum: f64,
    seed: u64,
    rows: Vec<BenchRow>,
    doubling: Vec<Doubling>,
}

/// Uniform random column rescaled to the requested sum.
pub fn random_column(r: usize, sum: f64, seed: u64) -> ModeColumn<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ r as u64);
    let raw: Vec<f64> = (0..r).map(|_| rng.gen::<f64>()).collect();
    let s: f64 = raw.iter().sum();
    ModeColumn::from_probs(raw.into_iter().map(|x| x * sum / s).collect()).expect("valid column")
}

fn timed<T>(reps: usize, mut f: impl FnMut() -> T) -> (T, f64) {
    let mut best = f64::INFINITY;
    let mut out = None;
    for _ in 0..reps.max(1) {
        let start = Instant::now();
        let v = f();
        best = best.min(start.elapsed().as_secs_f64());
        out = Some(v);
    }
    (out.expect("at least one repetition"), best)
}

fn row(method: &'static str, d: &MarginalDistribution<f64>, t: f64, exact: Option<&[f64]>) -> BenchRow {
    BenchRow {
        photons: d.photons,
        method,
        wall_time_s: t,
        condition: d.condition,
        ill_conditioned: d.is_ill_conditioned(),
        normalization_error: normalization_check(d).unwrap_or(f64::INFINITY),
        max_abs_error: exact.map(|e| e.iter().zip(&d.p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)),
    }
}

pub fn run(args: BenchArgs) -> anyhow::Result<Status> {
    let mut rows = Vec::new();
    let mut direct_times = Vec::new();
    for &r in &args.photons {
        let col = random_column(r, args.sum, args.seed);
        let exact: Option<Vec<f64>> = (r <= args.exact_max).then(|| {
            let q: Vec<Rational> =
                col.probs().iter().map(|&p| Rational::from_f64_exact(p).expect("finite")).collect();
            let d = quantum_marginal(&ModeColumn::from_probs(q).expect("valid column"));
            d.p.iter().map(cbs_core::Scalar::to_f64).collect()
        });
        let (direct, t) = timed(args.reps, || quantum_marginal(&col));
        direct_times.push((r, t));
        rows.push(row("direct", &direct, t, exact.as_deref()));
        if r <= args.interpolation_max {
            let series = pgf_series(&col, Model::Quantum);
            let (interp, t) = timed(args.reps, || extract_coeffs_via_interpolation(&series));
            rows.push(row("interpolation", &interp, t, exact.as_deref()));
        }
    }
    let doubling = direct_times
        .iter()
        .filter_map(|&(r, t)| {
            direct_times
                .iter()
                .find(|&&(r2, _)| r2 == 2 * r)
                .map(|&(r2, t2)| Doubling { from: r, to: r2, direct_time_ratio: t2 / t })
        })
        .collect();
    let report = BenchReport { sum: args.sum, seed: args.seed, rows, doubling };
    let text = if args.csv {
        let mut s = String::from("R,method,wall_time_s,condition,ill_conditioned,normalization_error,max_abs_error\n");
        for r in &report.rows {
            let opt = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
            s.push_str(&format!(
                "{},{},{:e},{},{},{:e},{}\n",
                r.photons,
                r.method,
                r.wall_time_s,
                opt(r.condition),
                r.ill_conditioned,
                r.normalization_error,
                opt(r.max_abs_error)
            ));
        }
        s
    } else {
        serde_json::to_string_pretty(&report)?
    };
    emit(args.out.as_deref(), &text)?;
    Ok(Status::Pass)
}
