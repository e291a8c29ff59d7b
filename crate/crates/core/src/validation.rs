//! Bunching witness and threshold-detector click statistics.
//!
//! Only the vacuum probability of each mode is testable with click/no-click
//! detectors, so every comparison here is per mode. z-scores are positive
//! when the empirical no-click frequency exceeds the model's `P(0)`.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::marginals::{distinguishable_marginal, quantum_marginal, SeriesScalar};
use crate::matrix::ModSquaredGrid;
use crate::numerics::Backend;
use crate::par;

/// One shot: `true` means the detector clicked (at least one photon).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClickRecord {
    pub shot: u64,
    pub bits: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BunchingWitness<S> {
    pub p0: S,
    pub pd0: S,
    /// `P(0) - P_d(0)`.
    pub witness: S,
}

pub fn bunching_witness<S: SeriesScalar>(grid: &ModSquaredGrid<S>, mode: usize) -> Result<BunchingWitness<S>> {
    let col = grid.column(mode)?;
    let p0 = quantum_marginal(&col).p[0].clone();
    let pd0 = distinguishable_marginal(&col).p[0].clone();
    Ok(BunchingWitness { witness: p0.clone() - pd0.clone(), p0, pd0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct InversionFlags {
    /// Quantum `P(1) < P(0)`.
    pub inversion: bool,
    /// Quantum `P(1) < P_d(1)`.
    pub below_distinguishable: bool,
}

pub fn inversion_flag<S: SeriesScalar>(grid: &ModSquaredGrid<S>, mode: usize) -> Result<InversionFlags> {
    let col = grid.column(mode)?;
    let q = quantum_marginal(&col).p;
    let d = distinguishable_marginal(&col).p;
    let one = |p: &[S]| p.get(1).cloned().unwrap_or_else(S::zero);
    Ok(InversionFlags { inversion: one(&q) < q[0], below_distinguishable: one(&q) < one(&d) })
}

/// No-click tallies per detector. Merging is commutative, so shards of a
/// record stream can be counted independently.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClickCounts {
    pub shots: u64,
    pub no_clicks: Vec<u64>,
}

impl ClickCounts {
    pub fn new(modes: usize) -> Self {
        ClickCounts { shots: 0, no_clicks: vec![0; modes] }
    }

    pub fn add(&mut self, record: &ClickRecord) -> Result<()> {
        if record.bits.len() != self.no_clicks.len() {
            return Err(Error::WidthMismatch {
                shot: record.shot,
                got: record.bits.len(),
                expected: self.no_clicks.len(),
            });
        }
        self.shots += 1;
        for (n, &b) in self.no_clicks.iter_mut().zip(&record.bits) {
            *n += u64::from(!b);
        }
        Ok(())
    }

    pub fn merge(mut self, other: &ClickCounts) -> Self {
        self.shots += other.shots;
        for (a, b) in self.no_clicks.iter_mut().zip(&other.no_clicks) {
            *a += b;
        }
        self
    }

    /// Fold a stream of records.
    pub fn from_stream<I: IntoIterator<Item = Result<ClickRecord>>>(records: I, modes: usize) -> Result<Self> {
        let mut counts = ClickCounts::new(modes);
        for r in records {
            counts.add(&r?)?;
        }
        Ok(counts)
    }

    /// Count an in-memory batch in shards.
    pub fn from_records(records: &[ClickRecord], modes: usize) -> Result<Self> {
        const SHARD: usize = 8192;
        let shards: Vec<&[ClickRecord]> = records.chunks(SHARD).collect();
        let parts = par::map_slice(&shards, |chunk| {
            let mut c = ClickCounts::new(modes);
            chunk.iter().try_for_each(|r| c.add(r)).map(|_| c)
        });
        parts.into_iter().try_fold(ClickCounts::new(modes), |acc, c| Ok(acc.merge(&c?)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Quantum,
    Distinguishable,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeWitness {
    pub mode: usize,
    pub p0: f64,
    pub pd0: f64,
    pub witness: f64,
    /// Exact `P(0) - P_d(0)` when the grid is exact.
    pub witness_exact: Option<String>,
    pub no_clicks: u64,
    pub f0: f64,
    pub z_quantum: f64,
    pub z_distinguishable: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessReport {
    pub shots: u64,
    pub modes: Vec<ModeWitness>,
    /// `sum_k log L_quantum - log L_distinguishable` of the binomial
    /// no-click counts, treating modes as independent.
    pub log_likelihood_ratio: f64,
    pub aggregate_verdict: Verdict,
    pub aggregate_note: String,
}

impl WitnessReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("mode,p0,pd0,witness,no_clicks,f0,z_quantum,z_distinguishable,verdict\n");
        for m in &self.modes {
            let v = serde_json::to_value(m.verdict).expect("verdict serializes");
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                m.mode,
                m.p0,
                m.pd0,
                m.witness,
                m.no_clicks,
                m.f0,
                m.z_quantum,
                m.z_distinguishable,
                v.as_str().unwrap_or_default()
            ));
        }
        out
    }

    /// Fraction of listed modes whose verdict is `want`.
    pub fn agreement(&self, want: Verdict) -> f64 {
        if self.modes.is_empty() {
            return 0.0;
        }
        self.modes.iter().filter(|m| m.verdict == want).count() as f64 / self.modes.len() as f64
    }
}

/// `(f0 - p) / sqrt(p (1 - p) / N)`; infinite when the model forbids what was seen.
pub fn z_score(f0: f64, p: f64, shots: u64) -> f64 {
    let var = p * (1.0 - p) / shots as f64;
    let diff = f0 - p;
    if var > 0.0 {
        diff / var.sqrt()
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

/// Binomial log-likelihood of `k` successes in `n` with rate `p`, without
/// the combinatorial constant. `0 * log 0` is taken as 0.
fn binomial_loglik(k: u64, n: u64, p: f64) -> f64 {
    let term = |count: u64, prob: f64| if count == 0 { 0.0 } else { count as f64 * prob.ln() };
    term(k, p) + term(n - k, 1.0 - p)
}

const ADVISORY: &str = "advisory: modes treated as independent, which they are not physically";

/// Compare no-click counts against both models for the selected 1-based modes.
pub fn evaluate_counts<S: SeriesScalar>(
    counts: &ClickCounts,
    grid: &ModSquaredGrid<S>,
    modes: &[usize],
) -> Result<WitnessReport> {
    if counts.shots == 0 {
        return Err(Error::NoShots);
    }
    if counts.no_clicks.len() != grid.cols() {
        return Err(Error::WidthMismatch { shot: 0, got: counts.no_clicks.len(), expected: grid.cols() });
    }
    let witnesses = par::map_slice(modes, |&k| bunching_witness(grid, k));
    let n = counts.shots;
    let mut llr = 0.0;
    let mut rows = Vec::with_capacity(modes.len());
    for (&k, w) in modes.iter().zip(witnesses) {
        let w = w?;
        let (p0, pd0) = (w.p0.to_f64(), w.pd0.to_f64());
        let no_clicks = counts.no_clicks[k - 1];
        let f0 = no_clicks as f64 / n as f64;
        let z_quantum = z_score(f0, p0, n);
        let z_distinguishable = z_score(f0, pd0, n);
        let verdict = if w.witness.is_zero() || z_quantum.abs() == z_distinguishable.abs() {
            Verdict::Undecided
        } else if z_quantum.abs() < z_distinguishable.abs() {
            Verdict::Quantum
        } else {
            Verdict::Distinguishable
        };
        llr += binomial_loglik(no_clicks, n, p0) - binomial_loglik(no_clicks, n, pd0);
        rows.push(ModeWitness {
            mode: k,
            p0,
            pd0,
            witness: w.witness.to_f64(),
            witness_exact: (S::BACKEND == Backend::Exact).then(|| w.witness.to_string()),
            no_clicks,
            f0,
            z_quantum,
            z_distinguishable,
            verdict,
        });
    }
    let aggregate_verdict = if llr.is_nan() || llr == 0.0 {
        Verdict::Undecided
    } else if llr > 0.0 {
        Verdict::Quantum
    } else {
        Verdict::Distinguishable
    };
    Ok(WitnessReport {
        shots: n,
        modes: rows,
        log_likelihood_ratio: llr,
        aggregate_verdict,
        aggregate_note: ADVISORY.into(),
    })
}

/// Stream records, count, and compare.
pub fn evaluate_clicks<S, I>(records: I, grid: &ModSquaredGrid<S>, modes: &[usize]) -> Result<WitnessReport>
where
    S: SeriesScalar,
    I: IntoIterator<Item = Result<ClickRecord>>,
{
    check_modes(grid.cols(), modes)?;
    let counts = ClickCounts::from_stream(records, grid.cols())?;
    evaluate_counts(&counts, grid, modes)
}

fn check_modes(cols: usize, modes: &[usize]) -> Result<()> {
    match modes.iter().find(|&&k| k == 0 || k > cols) {
        Some(&mode) => Err(Error::ModeOutOfRange { mode, modes: cols }),
        None => Ok(()),
    }
}

/// Click CSV reader: header `shot,mode_1,...,mode_M`, bits `0`/`1`.
/// Errors carry 1-based file line numbers.
pub fn read_clicks_csv<R: Read>(reader: R) -> Result<Vec<ClickRecord>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(reader);
    let header = rdr.headers().map_err(|e| Error::Parse { line: 1, message: e.to_string() })?.clone();
    let modes = header.len().saturating_sub(1);
    let bad_header = header.get(0).map(str::trim) != Some("shot")
        || header.iter().skip(1).enumerate().any(|(i, h)| h.trim() != format!("mode_{}", i + 1));
    if bad_header || modes == 0 {
        return Err(Error::Parse { line: 1, message: "expected header shot,mode_1,...,mode_M".into() });
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let err = |message: String| Error::Parse { line, message };
        if rec.len() != modes + 1 {
            return Err(err(format!("{} fields, expected {}", rec.len(), modes + 1)));
        }
        let shot = rec[0].trim().parse::<u64>().map_err(|e| err(format!("shot id: {e}")))?;
        let bits = rec
            .iter()
            .skip(1)
            .map(|b| match b.trim() {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(err(format!("bit {other:?} is not 0 or 1"))),
            })
            .collect::<Result<Vec<bool>>>()?;
        out.push(ClickRecord { shot, bits });
    }
    Ok(out)
}

pub fn write_clicks_csv<W: Write>(writer: W, records: &[ClickRecord]) -> Result<()> {
    let modes = records.first().map(|r| r.bits.len()).unwrap_or(0);
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["shot".to_string()];
    header.extend((1..=modes).map(|k| format!("mode_{k}")));
    w.write_record(&header).map_err(csv_io)?;
    for r in records {
        let mut row = vec![r.shot.to_string()];
        row.extend(r.bits.iter().map(|&b| if b { "1" } else { "0" }.to_string()));
        w.write_record(&row).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Test fixture: each detector clicks independently with probability
/// `1 - no_click[k]`. Not a physical simulator.
pub fn synthetic_clicks(no_click: &[f64], shots: u64, seed: u64) -> Vec<ClickRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..shots)
        .map(|shot| ClickRecord { shot, bits: no_click.iter().map(|&p| rng.gen::<f64>() >= p).collect() })
        .collect()
}

/// Per-mode `P(0)` of every mode under `model`, as floats for the generator.
pub fn no_click_probabilities<S: SeriesScalar>(grid: &ModSquaredGrid<S>, quantum: bool) -> Result<Vec<f64>> {
    let all: Vec<Result<f64>> = par::map_range(grid.cols(), |i| {
        let col = grid.column(i + 1)?;
        let d = if quantum { quantum_marginal(&col) } else { distinguishable_marginal(&col) };
        Ok(d.p[0].to_f64())
    });
    all.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hbs::build_matrix;
    use crate::numerics::{Rational, Scalar};

    fn q(n: i64, d: u64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn t3_grid() -> ModSquaredGrid<Rational> {
        build_matrix(3, 8).unwrap().mod_squared_grid()
    }

    #[test]
    fn witness_values() {
        let g = t3_grid();
        assert_eq!(bunching_witness(&g, 6).unwrap().witness, q(13, 128));
        let w = bunching_witness(&g, 1).unwrap();
        assert_eq!((w.p0, w.pd0, w.witness), (q(7, 8), q(7, 8), q(0, 1)));
        assert!(bunching_witness(&g, 21).is_err());
    }

    #[test]
    fn witness_t5_even() {
        let h = build_matrix(5, 5).unwrap();
        let w = bunching_witness(&h.mod_squared_grid(), 10).unwrap();
        assert_eq!(w.p0.to_fixed(2), "0.50");
        assert_eq!(w.pd0.to_fixed(2), "0.47");
    }

    #[test]
    fn inversion_examples() {
        let g = t3_grid();
        assert_eq!(inversion_flag(&g, 6).unwrap(), InversionFlags { inversion: true, below_distinguishable: true });
        assert!(inversion_flag(&g, 4).unwrap().inversion);
        let single = ModSquaredGrid::new(1, 2, vec![q(9, 10), q(1, 10)]).unwrap();
        assert!(!inversion_flag(&single, 1).unwrap().inversion);
    }

    #[test]
    fn all_clicks() {
        let g = t3_grid();
        let recs: Vec<_> = (0..50).map(|s| Ok(ClickRecord { shot: s, bits: vec![true; 20] })).collect();
        let rep = evaluate_clicks(recs, &g, &[5, 6]).unwrap();
        for m in &rep.modes {
            assert_eq!(m.f0, 0.0);
            assert!(m.z_quantum < -5.0 && m.z_distinguishable < -5.0);
        }
    }

    #[test]
    fn zero_shots_and_width() {
        let g = t3_grid();
        assert!(matches!(evaluate_clicks(Vec::new(), &g, &[5]), Err(Error::NoShots)));
        let bad = vec![Ok(ClickRecord { shot: 7, bits: vec![false; 19] })];
        assert!(matches!(
            evaluate_clicks(bad, &g, &[5]),
            Err(Error::WidthMismatch { shot: 7, got: 19, expected: 20 })
        ));
        assert!(evaluate_clicks(Vec::new(), &g, &[0]).is_err());
    }

    #[test]
    fn z_sign_convention() {
        assert!(z_score(0.6, 0.5, 100) > 0.0);
        assert!(z_score(0.4, 0.5, 100) < 0.0);
        assert_eq!(z_score(1.0, 1.0, 10), 0.0);
        assert_eq!(z_score(0.5, 1.0, 10), f64::NEG_INFINITY);
    }

    #[test]
    fn synthetic_quantum_and_distinguishable() {
        let g = t3_grid();
        let bulk: Vec<usize> = (5..=16).collect();
        for (quantum, want) in [(true, Verdict::Quantum), (false, Verdict::Distinguishable)] {
            let p = no_click_probabilities(&g, quantum).unwrap();
            let recs = synthetic_clicks(&p, 20_000, 42);
            let counts = ClickCounts::from_records(&recs, 20).unwrap();
            let rep = evaluate_counts(&counts, &g, &bulk).unwrap();
            assert!(rep.agreement(want) > 0.9, "{:?}", rep.modes);
            assert_eq!(rep.aggregate_verdict, want);
        }
    }

    #[test]
    fn reorder_invariance_and_sharding() {
        let g = t3_grid();
        let p = no_click_probabilities(&g, true).unwrap();
        let recs = synthetic_clicks(&p, 20_000, 3);
        let mut rev = recs.clone();
        rev.reverse();
        let a = ClickCounts::from_records(&recs, 20).unwrap();
        let b = ClickCounts::from_stream(rev.into_iter().map(Ok), 20).unwrap();
        assert_eq!(a, b);
        let modes: Vec<usize> = (1..=20).collect();
        assert_eq!(evaluate_counts(&a, &g, &modes).unwrap(), evaluate_counts(&b, &g, &modes).unwrap());
    }

    #[test]
    fn csv_round_trip() {
        let recs = synthetic_clicks(&[0.5, 0.9, 0.1], 25, 1);
        let mut buf = Vec::new();
        write_clicks_csv(&mut buf, &recs).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("shot,mode_1,mode_2,mode_3\n"));
        assert_eq!(read_clicks_csv(&buf[..]).unwrap(), recs);
    }

    #[test]
    fn csv_errors_have_line_numbers() {
        let bad = "shot,mode_1,mode_2\n0,1,0\n1,1,x\n";
        match read_clicks_csv(bad.as_bytes()) {
            Err(Error::Parse { line: 3, message }) => assert!(message.contains("\"x\"")),
            other => panic!("{other:?}"),
        }
        let short = "shot,mode_1,mode_2\n0,1\n";
        assert!(matches!(read_clicks_csv(short.as_bytes()), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(read_clicks_csv("id,a\n".as_bytes()), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn float_grid_works() {
        let g = build_matrix(3, 5).unwrap().to_float().mod_squared_grid();
        let w = bunching_witness(&g, 6).unwrap();
        assert!((w.witness - 13.0 / 128.0).abs() < 1e-12);
    }
}
