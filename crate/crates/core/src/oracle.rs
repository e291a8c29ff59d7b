//! Brute-force ground truth from permanents.
//!
//! Everything here is exponential and only meant for desk-scale matrices:
//! the joint probability of a configuration is `|Perm(A)|^2 / prod n_i!`
//! where `A` repeats column `j` of `V` `n_j` times, and marginals are sums of
//! joint probabilities over all configurations of the unobserved modes.
//!
//! Enumeration order is fixed (see [`Compositions`]). Work is split into
//! contiguous blocks of that order, evaluated concurrently and reduced in
//! block order, so float results are bit-reproducible.

use std::collections::HashMap;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::marginals::{quantum_marginal, MarginalDistribution, Method, Model, SeriesScalar};
use crate::matrix::TransitionMatrix;
use crate::numerics::{Complex, Rational, Scalar};
use crate::par;

pub const DEFAULT_PERMANENT_CAP: usize = 16;
pub const DEFAULT_COMPOSITION_BUDGET: u128 = 10_000_000;
/// Largest side for the Laplace-expansion cross-check.
pub const LAPLACE_MAX: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub permanent_cap: usize,
    pub composition_budget: u128,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            permanent_cap: DEFAULT_PERMANENT_CAP,
            composition_budget: DEFAULT_COMPOSITION_BUDGET,
        }
    }
}

impl OracleLimits {
    fn check_budget(&self, required: u128) -> Result<()> {
        if required > self.composition_budget {
            return Err(Error::BudgetExceeded { required, budget: self.composition_budget });
        }
        Ok(())
    }

    fn check_cap(&self, size: usize) -> Result<()> {
        if size > self.permanent_cap {
            return Err(Error::PermanentCap { size, cap: self.permanent_cap });
        }
        Ok(())
    }
}

/// Photon counts per output mode.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Configuration {
    pub counts: Vec<usize>,
}

impl Configuration {
    pub fn new(counts: Vec<usize>) -> Self {
        Configuration { counts }
    }

    pub fn photons(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Same configuration with one more photon in 0-based `mode`.
    pub fn plus_one(&self, mode: usize) -> Self {
        let mut counts = self.counts.clone();
        counts[mode] += 1;
        Configuration { counts }
    }
}

/// Weak compositions of `total` into `parts` nonnegative integers, in
/// lexicographically decreasing order: `(2,0,0), (1,1,0), (1,0,1), (0,2,0), ...`.
#[derive(Debug, Clone)]
pub struct Compositions {
    current: Option<Vec<usize>>,
}

impl Compositions {
    pub fn new(total: usize, parts: usize) -> Self {
        let current = match parts {
            0 if total > 0 => None,
            0 => Some(Vec::new()),
            _ => {
                let mut v = vec![0; parts];
                v[0] = total;
                Some(v)
            }
        };
        Compositions { current }
    }

    /// Compositions beginning with `prefix`, filling the remaining parts.
    fn with_prefix(prefix: &[usize], total: usize, parts: usize) -> impl Iterator<Item = Vec<usize>> {
        let used: usize = prefix.iter().sum();
        let prefix = prefix.to_vec();
        Compositions::new(total - used, parts - prefix.len()).map(move |tail| {
            let mut v = prefix.clone();
            v.extend(tail);
            v
        })
    }
}

impl Iterator for Compositions {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.take()?;
        let n = out.len();
        if n > 1 {
            if let Some(i) = (0..n - 1).rev().find(|&i| out[i] > 0) {
                let mut next = out.clone();
                let tail: usize = next[i + 1..].iter().sum();
                next[i] -= 1;
                next[i + 1..].iter_mut().for_each(|x| *x = 0);
                next[i + 1] = tail + 1;
                self.current = Some(next);
            }
        }
        Some(out)
    }
}

/// `C(total + parts - 1, parts - 1)`, saturating.
pub fn composition_count(total: usize, parts: usize) -> u128 {
    if parts == 0 {
        return u128::from(total == 0);
    }
    let k = (parts - 1).min(total) as u128;
    let n = (total + parts - 1) as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Contiguous blocks of the enumeration order, keyed by the first `depth` parts.
fn composition_blocks(total: usize, parts: usize, depth: usize) -> Vec<Vec<usize>> {
    let depth = depth.min(parts.saturating_sub(1));
    let mut blocks = vec![Vec::new()];
    for _ in 0..depth {
        blocks = blocks
            .into_iter()
            .flat_map(|prefix: Vec<usize>| {
                let left = total - prefix.iter().sum::<usize>();
                (0..=left).rev().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    blocks
}

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix<S> {
    n: usize,
    entries: Vec<Complex<S>>,
}

impl<S: Scalar> SquareMatrix<S> {
    pub fn new(n: usize, entries: Vec<Complex<S>>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::InvalidMatrix(format!("{} entries for {n}x{n}", entries.len())));
        }
        Ok(SquareMatrix { n, entries })
    }

    pub fn from_real_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMatrix("matrix is not square".into()));
        }
        Self::new(n, rows.into_iter().flatten().map(Complex::real).collect())
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Complex<S> {
        &self.entries[i * self.n + j]
    }
}

/// The `R x R` matrix whose columns are column `j` of `V` repeated `n_j` times.
/// Entries are the stored ones, i.e. without the `sqrt(scale)` factor.
pub fn amplitude_matrix<S: Scalar>(v: &TransitionMatrix<S>, config: &Configuration) -> Result<SquareMatrix<S>> {
    if config.counts.len() != v.cols() {
        return Err(Error::InvalidMatrix(format!(
            "configuration has {} modes, matrix has {}",
            config.counts.len(),
            v.cols()
        )));
    }
    if config.photons() != v.rows() {
        return Err(Error::PhotonCount { got: config.photons(), expected: v.rows() });
    }
    let cols: Vec<usize> = config
        .counts
        .iter()
        .enumerate()
        .flat_map(|(j, &n)| std::iter::repeat_n(j, n))
        .collect();
    let r = v.rows();
    let entries = (0..r)
        .flat_map(|i| cols.iter().map(move |&j| (i, j)))
        .map(|(i, j)| v.entry(i, j).clone())
        .collect();
    SquareMatrix::new(r, entries)
}

/// Ryser's formula with Gray-code updates of the row sums, `O(2^n n)`.
pub fn permanent<S: Scalar>(a: &SquareMatrix<S>, cap: usize) -> Result<Complex<S>> {
    let n = a.n;
    if n > cap {
        return Err(Error::PermanentCap { size: n, cap });
    }
    if n == 0 {
        return Ok(Complex::one());
    }
    let mut row_sums = vec![Complex::<S>::zero(); n];
    let mut total = Complex::<S>::zero();
    let mut gray: u64 = 0;
    for k in 1u64..(1u64 << n) {
        let j = k.trailing_zeros() as usize;
        gray ^= 1 << j;
        let adding = gray >> j & 1 == 1;
        for (i, s) in row_sums.iter_mut().enumerate() {
            let x = a.get(i, j).clone();
            *s = if adding { s.clone() + x } else { s.clone() - x };
        }
        let prod = row_sums
            .iter()
            .skip(1)
            .fold(row_sums[0].clone(), |acc, s| acc * s.clone());
        if gray.count_ones().is_multiple_of(2) {
            total = total + prod;
        } else {
            total = total - prod;
        }
    }
    Ok(if n.is_multiple_of(2) { total } else { -total })
}

/// Laplace expansion along the first row, for cross-checking `permanent`.
pub fn permanent_laplace<S: Scalar>(a: &SquareMatrix<S>) -> Result<Complex<S>> {
    if a.n > LAPLACE_MAX {
        return Err(Error::PermanentCap { size: a.n, cap: LAPLACE_MAX });
    }
    fn rec<S: Scalar>(a: &SquareMatrix<S>, row: usize, used: u32) -> Complex<S> {
        if row == a.n {
            return Complex::one();
        }
        let mut acc = Complex::<S>::zero();
        for j in 0..a.n {
            if used >> j & 1 == 0 {
                let x = a.get(row, j);
                if !x.is_zero() {
                    acc = acc + x.clone() * rec(a, row + 1, used | 1 << j);
                }
            }
        }
        acc
    }
    Ok(rec(a, 0, 0))
}

fn factorial_product<S: Scalar>(counts: &[usize]) -> S {
    counts
        .iter()
        .fold(S::one(), |acc, &n| acc * S::factorial(n as u64).expect("oracle counts are small"))
}

/// `|Perm(A(N))|^2 / prod n_i!` for a full configuration.
pub fn joint_probability<S: Scalar>(
    v: &TransitionMatrix<S>,
    config: &Configuration,
    limits: &OracleLimits,
) -> Result<S> {
    limits.check_cap(v.rows())?;
    let a = amplitude_matrix(v, config)?;
    let perm = permanent(&a, limits.permanent_cap)?;
    let mut scale = S::one();
    for _ in 0..v.rows() {
        scale = scale * v.scale().clone();
    }
    Ok(perm.norm_sqr() * scale / factorial_product::<S>(&config.counts))
}

/// Value of an enumeration plus how many terms it summed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleValue<S> {
    pub value: S,
    pub terms: u128,
}

fn insert_at(mut others: Vec<usize>, index: usize, value: usize) -> Vec<usize> {
    others.insert(index, value);
    others
}

/// Sum `f` over all configurations of `total` photons in `parts` modes,
/// block-parallel and reduced in enumeration order.
fn sum_over_compositions<S, F>(total: usize, parts: usize, f: F) -> Result<S>
where
    S: Scalar,
    F: Fn(Vec<usize>) -> Result<S> + Sync + Send,
{
    let blocks = composition_blocks(total, parts, 2);
    let partials = par::map_slice(&blocks, |prefix| {
        let terms = Compositions::with_prefix(prefix, total, parts).map(&f).collect::<Result<Vec<S>>>()?;
        S::sum_compensated(terms).map_err(Error::from)
    });
    let partials = partials.into_iter().collect::<Result<Vec<S>>>()?;
    Ok(S::sum_compensated(partials)?)
}

/// `P(n_k)` by summing joint probabilities over every configuration of the
/// other `M - 1` modes. `mode` is 1-based.
pub fn brute_marginal<S: Scalar>(
    v: &TransitionMatrix<S>,
    mode: usize,
    count: usize,
    limits: &OracleLimits,
) -> Result<OracleValue<S>> {
    if mode == 0 || mode > v.cols() {
        return Err(Error::ModeOutOfRange { mode, modes: v.cols() });
    }
    let r = v.rows();
    if count > r {
        return Ok(OracleValue { value: S::zero(), terms: 0 });
    }
    let parts = v.cols() - 1;
    let terms = composition_count(r - count, parts);
    limits.check_budget(terms)?;
    limits.check_cap(r)?;
    let value = sum_over_compositions(r - count, parts, |others| {
        joint_probability(v, &Configuration::new(insert_at(others, mode - 1, count)), limits)
    })?;
    Ok(OracleValue { value, terms })
}

/// Every configuration of `R` photons in `M` modes with its probability, in
/// enumeration order. Computed once, then shared by the marginal table and
/// both sum rules, which only need lookups.
#[derive(Debug, Clone)]
pub struct JointDistribution<S> {
    modes: usize,
    photons: usize,
    entries: Vec<(Vec<usize>, S)>,
    index: HashMap<Vec<usize>, usize>,
}

pub fn joint_distribution<S: Scalar>(v: &TransitionMatrix<S>, limits: &OracleLimits) -> Result<JointDistribution<S>> {
    let (r, m) = (v.rows(), v.cols());
    limits.check_budget(composition_count(r, m))?;
    limits.check_cap(r)?;
    let blocks = composition_blocks(r, m, 2);
    let parts = par::map_slice(&blocks, |prefix| {
        Compositions::with_prefix(prefix, r, m)
            .map(|counts| {
                let p = joint_probability(v, &Configuration::new(counts.clone()), limits)?;
                Ok((counts, p))
            })
            .collect::<Result<Vec<_>>>()
    });
    let mut entries = Vec::new();
    for part in parts {
        entries.extend(part?);
    }
    let index = entries.iter().enumerate().map(|(i, (c, _))| (c.clone(), i)).collect();
    Ok(JointDistribution { modes: m, photons: r, entries, index })
}

impl<S: Scalar> JointDistribution<S> {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(Vec<usize>, S)] {
        &self.entries
    }

    pub fn get(&self, counts: &[usize]) -> Option<&S> {
        self.index.get(counts).map(|&i| &self.entries[i].1)
    }

    pub fn total(&self) -> Result<S> {
        Ok(S::sum_compensated(self.entries.iter().map(|(_, p)| p.clone()))?)
    }

    /// `table[k-1][n] = P(n_k = n)`, each summed in enumeration order.
    pub fn marginal_table(&self) -> Result<Vec<Vec<S>>> {
        let r = self.photons;
        par::map_range(self.modes, |k| {
            let mut bins: Vec<Vec<S>> = vec![Vec::new(); r + 1];
            for (counts, p) in &self.entries {
                bins[counts[k]].push(p.clone());
            }
            bins.into_iter().map(|b| S::sum_compensated(b).map_err(Error::from)).collect()
        })
        .into_iter()
        .collect()
    }

    /// The fixed-count sum rule for 1-based `mode`, by lookup.
    pub fn sum_rule(&self, mode: usize, count: usize) -> Result<SumRuleReport<S>> {
        if mode == 0 || mode > self.modes {
            return Err(Error::ModeOutOfRange { mode, modes: self.modes });
        }
        let (r, k) = (self.photons, mode - 1);
        let lhs_terms: Vec<S> = self.entries.iter().filter(|(c, _)| c[k] == count).map(|(_, p)| p.clone()).collect();
        let n_lhs = lhs_terms.len() as u128;
        let lhs = S::sum_compensated(lhs_terms)?;
        if count >= r {
            return Ok(SumRuleReport { rhs: lhs.clone(), lhs, deviation: S::zero(), terms: n_lhs });
        }
        let denom = S::from_u64((r - count) as u64);
        let mut rhs_terms = Vec::new();
        for others in Compositions::new(r - 1 - count, self.modes - 1) {
            let base = insert_at(others, k, count);
            for i in (0..self.modes).filter(|&i| i != k) {
                let mut target = base.clone();
                target[i] += 1;
                let p = self.get(&target).expect("every configuration of R photons is enumerated");
                if !p.is_zero() {
                    rhs_terms.push(S::from_u64(base[i] as u64 + 1) / denom.clone() * p.clone());
                }
            }
        }
        let n_rhs = rhs_terms.len() as u128;
        let rhs = S::sum_compensated(rhs_terms)?;
        let deviation = (lhs.clone() - rhs.clone()).abs();
        Ok(SumRuleReport { lhs, rhs, deviation, terms: n_lhs + n_rhs })
    }

    /// The unrestricted rule, `sum P(N_R) = sum_{N_{R-1}} sum_k (n_k+1)/R P(N_{R-1} + 1_k)`.
    pub fn full_sum_rule(&self) -> Result<SumRuleReport<S>> {
        let lhs = self.total()?;
        let r = S::from_u64(self.photons as u64);
        let terms = sum_rule_terms(self.modes, self.photons);
        let rhs = S::sum_compensated(terms.iter().map(|t| {
            let p = self.get(&t.target.counts).expect("every configuration of R photons is enumerated");
            S::from_u64(t.source.counts[t.mode - 1] as u64 + 1) / r.clone() * p.clone()
        }))?;
        let deviation = (lhs.clone() - rhs.clone()).abs();
        Ok(SumRuleReport { lhs, rhs, deviation, terms: self.entries.len() as u128 + terms.len() as u128 })
    }
}

/// All single-mode marginals at once from one pass over the full joint
/// distribution. Returns `table[k-1][n]` and the number of configurations.
pub fn brute_marginal_table<S: Scalar>(v: &TransitionMatrix<S>, limits: &OracleLimits) -> Result<(Vec<Vec<S>>, u128)> {
    let joint = joint_distribution(v, limits)?;
    Ok((joint.marginal_table()?, joint.len() as u128))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SumRuleReport<S> {
    pub lhs: S,
    pub rhs: S,
    pub deviation: S,
    pub terms: u128,
}

/// Check the sum rule for one fixed count in `mode`:
///
/// ```text
/// sum_{N_{R;n_k}} P(N) = sum_{N_{R-1;n_k}} sum_{i != k} (n_i + 1)/(R - n_k) P(N + 1_i)
/// ```
///
/// When `count == R` there is nothing to add and the deviation is zero.
pub fn verify_sum_rule<S: Scalar>(
    v: &TransitionMatrix<S>,
    mode: usize,
    count: usize,
    limits: &OracleLimits,
) -> Result<SumRuleReport<S>> {
    let lhs = brute_marginal(v, mode, count, limits)?;
    let r = v.rows();
    if count >= r {
        return Ok(SumRuleReport { rhs: lhs.value.clone(), lhs: lhs.value, deviation: S::zero(), terms: lhs.terms });
    }
    let parts = v.cols() - 1;
    let smaller = composition_count(r - 1 - count, parts);
    limits.check_budget(smaller.saturating_mul(parts as u128))?;
    let denom = S::from_u64((r - count) as u64);
    let rhs = sum_over_compositions(r - 1 - count, parts, |others| {
        let base = Configuration::new(insert_at(others, mode - 1, count));
        let terms = (0..v.cols())
            .filter(|&i| i != mode - 1)
            .map(|i| {
                let w = S::from_u64(base.counts[i] as u64 + 1) / denom.clone();
                Ok(w * joint_probability(v, &base.plus_one(i), limits)?)
            })
            .collect::<Result<Vec<S>>>()?;
        S::sum_compensated(terms).map_err(Error::from)
    })?;
    let deviation = (lhs.value.clone() - rhs.clone()).abs();
    Ok(SumRuleReport { lhs: lhs.value, rhs, deviation, terms: lhs.terms + smaller * parts as u128 })
}

/// One term of the unrestricted sum rule: a photon added to `mode` of
/// `source` gives `target`, weighted by `(n_mode + 1) / R`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SumRuleTerm {
    pub source: Configuration,
    pub mode: usize,
    pub target: Configuration,
    pub weight: Rational,
}

/// All terms of `sum_{N_{R-1}} sum_k (n_k + 1)/R P(N_{R-1} + 1_k)` in
/// enumeration order. `mode` in the result is 1-based.
pub fn sum_rule_terms(modes: usize, photons: usize) -> Vec<SumRuleTerm> {
    assert!(photons >= 1, "sum rule needs at least one photon");
    Compositions::new(photons - 1, modes)
        .flat_map(|counts| {
            let source = Configuration::new(counts);
            (0..modes).map(move |k| SumRuleTerm {
                target: source.plus_one(k),
                weight: Rational::from_ratio(source.counts[k] as i64 + 1, photons as u64),
                mode: k + 1,
                source: source.clone(),
            })
        })
        .collect()
}

/// Both sides of the unrestricted sum rule for the full joint distribution.
pub fn verify_full_sum_rule<S: Scalar>(v: &TransitionMatrix<S>, limits: &OracleLimits) -> Result<SumRuleReport<S>> {
    let (r, m) = (v.rows(), v.cols());
    let lhs_terms = composition_count(r, m);
    limits.check_budget(lhs_terms)?;
    let lhs = sum_over_compositions(r, m, |counts| joint_probability(v, &Configuration::new(counts), limits))?;
    let rhs_terms = sum_rule_terms(m, r);
    limits.check_budget(rhs_terms.len() as u128)?;
    let rhs = S::sum_compensated(
        rhs_terms
            .iter()
            .map(|t| {
                let w = S::from_u64(t.source.counts[t.mode - 1] as u64 + 1) / S::from_u64(r as u64);
                Ok(w * joint_probability(v, &t.target, limits)?)
            })
            .collect::<Result<Vec<S>>>()?,
    )?;
    let deviation = (lhs.clone() - rhs.clone()).abs();
    Ok(SumRuleReport { lhs, rhs, deviation, terms: lhs_terms + rhs_terms.len() as u128 })
}

/// Distinguishable-photon marginals of every mode by enumerating the
/// independent source-to-mode assignments. Assignments through a zero entry
/// carry no weight and are skipped, so the work is the product of the row
/// support sizes rather than `M^R`. Returns `table[k-1][n]`.
pub fn distinguishable_oracle_table<S: Scalar>(v: &TransitionMatrix<S>, limits: &OracleLimits) -> Result<Vec<Vec<S>>> {
    let (r, m) = (v.rows(), v.cols());
    let grid = v.mod_squared_grid();
    let supports: Vec<Vec<(usize, S)>> = (0..r)
        .map(|row| (0..m).map(|c| (c, grid.get(row, c).clone())).filter(|(_, p)| !p.is_zero()).collect())
        .collect();
    let required = supports.iter().fold(1u128, |acc, s| acc.saturating_mul(s.len() as u128));
    limits.check_budget(required)?;
    if r == 0 || required == 0 {
        let mut table = vec![vec![S::zero(); r + 1]; m];
        if r == 0 {
            table.iter_mut().for_each(|row| row[0] = S::one());
        }
        return Ok(table);
    }
    // block on the first source's choice; odometer over the remaining sources
    let partials = par::map_slice(&supports[0], |first| -> Result<(Vec<Vec<Vec<S>>>, Vec<S>)> {
        let mut bins: Vec<Vec<Vec<S>>> = vec![vec![Vec::new(); r + 1]; m];
        let mut totals = Vec::new();
        let mut idx = vec![0usize; r];
        let mut hits = vec![0usize; m];
        loop {
            let mut weight = first.1.clone();
            hits[first.0] += 1;
            for src in 1..r {
                let (c, p) = &supports[src][idx[src]];
                weight = weight * p.clone();
                hits[*c] += 1;
            }
            let mut touched = vec![first.0];
            touched.extend((1..r).map(|src| supports[src][idx[src]].0));
            touched.sort_unstable();
            touched.dedup();
            for c in touched {
                bins[c][hits[c]].push(weight.clone());
                hits[c] = 0;
            }
            totals.push(weight);
            let mut i = r;
            loop {
                if i <= 1 {
                    return Ok((bins, totals));
                }
                i -= 1;
                idx[i] += 1;
                if idx[i] < supports[i].len() {
                    break;
                }
                idx[i] = 0;
            }
        }
    });
    let mut bins: Vec<Vec<Vec<S>>> = vec![vec![Vec::new(); r + 1]; m];
    let mut totals = Vec::new();
    for part in partials {
        let (b, t) = part?;
        totals.push(S::sum_compensated(t)?);
        for (k, row) in b.into_iter().enumerate() {
            for (n, terms) in row.into_iter().enumerate() {
                bins[k][n].push(S::sum_compensated(terms)?);
            }
        }
    }
    let total = S::sum_compensated(totals)?;
    bins.into_iter()
        .map(|row| {
            let mut p = row.into_iter().map(|t| S::sum_compensated(t).map_err(Error::from)).collect::<Result<Vec<S>>>()?;
            // no source landed in this mode
            let hit = S::sum_compensated(p[1..].iter().cloned())?;
            p[0] = total.clone() - hit;
            Ok(p)
        })
        .collect()
}

/// Distinguishable-photon marginal of one 1-based mode, by enumeration.
pub fn distinguishable_oracle<S: Scalar>(
    v: &TransitionMatrix<S>,
    mode: usize,
    limits: &OracleLimits,
) -> Result<MarginalDistribution<S>> {
    if mode == 0 || mode > v.cols() {
        return Err(Error::ModeOutOfRange { mode, modes: v.cols() });
    }
    let p = distinguishable_oracle_table(v, limits)?.swap_remove(mode - 1);
    Ok(MarginalDistribution {
        mode,
        photons: v.rows(),
        model: Model::Distinguishable,
        backend: S::BACKEND,
        method: Method::Direct,
        p,
        condition: None,
        warnings: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleEntry<S> {
    pub mode: usize,
    pub count: usize,
    pub oracle: S,
    pub closed_form: S,
    pub abs_diff: S,
}

/// Brute-force versus closed-form comparison for every mode and count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport<S> {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<OracleEntry<S>>,
    pub max_abs_diff: S,
    pub terms: u128,
    pub wall_time_s: f64,
}

pub fn oracle_report<S: SeriesScalar>(v: &TransitionMatrix<S>, limits: &OracleLimits) -> Result<OracleReport<S>> {
    let start = Instant::now();
    let (table, terms) = brute_marginal_table(v, limits)?;
    let mut entries = Vec::new();
    let mut max_abs_diff = S::zero();
    for (k, brute) in table.into_iter().enumerate() {
        let closed = quantum_marginal(&v.extract_mode_column(k + 1)?);
        for (n, (oracle, closed_form)) in brute.into_iter().zip(closed.p).enumerate() {
            let abs_diff = (oracle.clone() - closed_form.clone()).abs();
            if abs_diff > max_abs_diff {
                max_abs_diff = abs_diff.clone();
            }
            entries.push(OracleEntry { mode: k + 1, count: n, oracle, closed_form, abs_diff });
        }
    }
    Ok(OracleReport {
        rows: v.rows(),
        cols: v.cols(),
        entries,
        max_abs_diff,
        terms,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}
