//! Closed-form single-mode marginals for indistinguishable and
//! distinguishable photons.
//!
//! Both models are binomial transforms of a symmetric-polynomial table:
//!
//! ```text
//! P(n)   = sum_{m>=n} (-1)^(m-n) C(m,n) m! S[m]     (quantum)
//! P_d(n) = sum_{m>=n} (-1)^(m-n) C(m,n)    S[m]     (distinguishable)
//! ```
//!
//! The quantum series is evaluated from the factorial-scaled table
//! `T[m] = m! S[m]`, so `m!` is never materialised.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::esp::{esp_all, esp_scaled_all};
use crate::matrix::{ModSquaredGrid, ModeColumn};
use crate::numerics::{Backend, CompensatedSum, Rational, Scalar, ToRepr};
use crate::par;

/// Condition numbers above this attach [`Warning::IllConditioned`].
pub const CONDITION_WARNING: f64 = 1e12;
/// A single series term above this attaches [`Warning::LargeTerm`].
pub const LARGE_TERM_WARNING: f64 = 1e15;
/// Float results in `(-CLAMP_FLOOR, 0)` are clamped to zero.
pub const CLAMP_FLOOR: f64 = 1e-12;
/// Probabilities below this are treated as noise level when forming the
/// condition number `max|term| / max(|P(n)|, floor)`.
pub const CONDITION_FLOOR: f64 = 1e-12;
/// Largest `R` for the exponential product-form cross-check.
pub const PRODUCT_FORM_MAX: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Quantum,
    Distinguishable,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Quantum => "quantum",
            Model::Distinguishable => "distinguishable",
        })
    }
}

/// How the coefficients were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Direct,
    Interpolation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    IllConditioned { condition: f64 },
    LargeTerm { n: usize, magnitude: f64 },
    Clamped { n: usize, value: f64 },
    NegativeProbability { n: usize, value: f64 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::IllConditioned { condition } => {
                write!(f, "alternating sum condition {condition:.3e} exceeds {CONDITION_WARNING:e}; rerun with the exact backend")
            }
            Warning::LargeTerm { n, magnitude } => {
                write!(f, "series for n={n} has a term of magnitude {magnitude:.3e}")
            }
            Warning::Clamped { n, value } => write!(f, "P({n}) = {value:e} clamped to 0"),
            Warning::NegativeProbability { n, value } => write!(f, "P({n}) = {value:e} is negative"),
        }
    }
}

/// Photon-count distribution `p[0..=R]` for one output mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginalDistribution<S> {
    pub mode: usize,
    #[serde(rename = "R")]
    pub photons: usize,
    pub model: Model,
    pub backend: Backend,
    pub method: Method,
    pub p: Vec<S>,
    /// Worst `max|term| / |result|` over the alternating sums (float only).
    pub condition: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<Warning>,
}

impl<S: Scalar + ToRepr + Serialize> MarginalDistribution<S> {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Two-column CSV `n,p`; rationals are written as `a/b`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,p\n");
        for (n, p) in self.p.iter().enumerate() {
            out.push_str(&format!("{n},{p}\n"));
        }
        out
    }
}

impl<S: Scalar> MarginalDistribution<S> {
    pub fn has_warnings(&self) -> bool {
        !self.warnings.is_empty()
    }

    pub fn is_ill_conditioned(&self) -> bool {
        self.warnings
            .iter()
            .any(|w| matches!(w, Warning::IllConditioned { .. } | Warning::LargeTerm { .. }))
    }
}

/// One evaluated alternating sum.
#[derive(Debug, Clone)]
pub struct SeriesSum<S> {
    pub value: S,
    /// Largest `|C(m,n) a[m]|` seen (as `f64`, may be infinite).
    pub max_term: f64,
}

/// Backends able to evaluate the binomial transform
/// `b[n] = sum_{m>=n} (-1)^(m-n) C(m,n) a[m]`.
pub trait SeriesScalar: Scalar {
    fn binomial_transform(coeffs: &[Self]) -> Vec<SeriesSum<Self>>;
}

impl SeriesScalar for Rational {
    /// Summed as integers over the lcm `L` of the coefficient denominators,
    /// then divided by `L` once per output.
    fn binomial_transform(coeffs: &[Self]) -> Vec<SeriesSum<Self>> {
        let r = coeffs.len();
        let l = coeffs.iter().fold(BigInt::one(), |acc, a| acc.lcm(a.denom()));
        let ints: Vec<BigInt> = coeffs.iter().map(|a| a.numer() * (&l / a.denom())).collect();
        par::map_range(r, |n| {
            let mut binom = BigInt::one();
            let mut acc = BigInt::zero();
            for m in n..r {
                if m > n {
                    binom = binom * m / (m - n);
                }
                if ints[m].is_zero() {
                    continue;
                }
                let term = &ints[m] * &binom;
                if (m - n) % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            SeriesSum { value: Rational::new(acc, l.clone()), max_term: f64::NAN }
        })
    }
}

/// `2^RENORM`: the binomial mantissa is pulled back by this factor whenever it grows past it.
const RENORM: i32 = 512;

impl SeriesScalar for f64 {
    /// Binomial coefficients are carried as `mantissa * 2^(RENORM*k)` so they
    /// never overflow on their own; the product with `a[m]` (which is at most
    /// one for a valid column) is formed before the power of two is applied.
    fn binomial_transform(coeffs: &[Self]) -> Vec<SeriesSum<Self>> {
        let r = coeffs.len();
        let up = 2f64.powi(RENORM);
        let down = 2f64.powi(-RENORM);
        par::map_range(r, |n| {
            let mut mant = 1.0f64;
            let mut chunks = 0i32;
            let mut acc = CompensatedSum::new();
            let mut max_term = 0.0f64;
            for m in n..r {
                if m > n {
                    mant *= m as f64 / (m - n) as f64;
                    if mant > up {
                        mant *= down;
                        chunks += 1;
                    }
                }
                let a = coeffs[m];
                if a == 0.0 {
                    continue;
                }
                let mut term = mant * a;
                for _ in 0..chunks {
                    if term == 0.0 || term.is_infinite() {
                        break;
                    }
                    term *= up;
                }
                max_term = max_term.max(term.abs());
                if (m - n) % 2 == 0 {
                    acc.add(term);
                } else {
                    acc.add(-term);
                }
            }
            SeriesSum { value: acc.value(), max_term }
        })
    }
}

fn assemble<S: Scalar>(
    col: &ModeColumn<S>,
    model: Model,
    sums: Vec<SeriesSum<S>>,
) -> MarginalDistribution<S> {
    let mut warnings = Vec::new();
    let mut p = Vec::with_capacity(sums.len());
    let mut condition = None;
    if S::BACKEND == Backend::Float {
        let mut worst = 1.0f64;
        for (n, s) in sums.iter().enumerate() {
            let value = s.value.to_f64();
            let k = s.max_term / value.abs().max(CONDITION_FLOOR);
            if k.is_nan() || k > worst {
                worst = if k.is_nan() { f64::INFINITY } else { k };
            }
            if s.max_term > LARGE_TERM_WARNING {
                warnings.push(Warning::LargeTerm { n, magnitude: s.max_term });
            }
        }
        if worst > CONDITION_WARNING {
            warnings.insert(0, Warning::IllConditioned { condition: worst });
        }
        condition = Some(worst);
    }
    for (n, s) in sums.into_iter().enumerate() {
        let mut value = s.value;
        if S::BACKEND == Backend::Float && value < S::zero() {
            let v = value.to_f64();
            if v > -CLAMP_FLOOR {
                warnings.push(Warning::Clamped { n, value: v });
                value = S::zero();
            } else {
                warnings.push(Warning::NegativeProbability { n, value: v });
            }
        }
        p.push(value);
    }
    MarginalDistribution {
        mode: col.mode(),
        photons: col.photons(),
        model,
        backend: S::BACKEND,
        method: Method::Direct,
        p,
        condition,
        warnings,
    }
}

/// Indistinguishable-photon marginal of one mode.
pub fn quantum_marginal<S: SeriesScalar>(col: &ModeColumn<S>) -> MarginalDistribution<S> {
    let table = esp_scaled_all(col);
    let scaled = table.scaled.expect("scaled table");
    assemble(col, Model::Quantum, S::binomial_transform(&scaled))
}

/// Distinguishable-photon marginal: the same series without the `m!` weight.
pub fn distinguishable_marginal<S: SeriesScalar>(col: &ModeColumn<S>) -> MarginalDistribution<S> {
    let table = esp_all(col);
    assemble(col, Model::Distinguishable, S::binomial_transform(&table.values))
}

pub fn marginal<S: SeriesScalar>(col: &ModeColumn<S>, model: Model) -> MarginalDistribution<S> {
    match model {
        Model::Quantum => quantum_marginal(col),
        Model::Distinguishable => distinguishable_marginal(col),
    }
}

/// Marginals of every mode of a grid, computed concurrently, in mode order.
pub fn all_modes<S: SeriesScalar>(
    grid: &ModSquaredGrid<S>,
    model: Model,
) -> Result<Vec<MarginalDistribution<S>>> {
    let cols = (1..=grid.cols()).map(|k| grid.column(k)).collect::<Result<Vec<_>>>()?;
    Ok(par::map_slice(&cols, |c| marginal(c, model)))
}

/// Distinguishable marginal from the product form: for each `n`-subset,
/// the product of its probabilities times `prod (1 - p)` over the rest.
/// Exponential in `R`; limited to `R <= 20`.
pub fn distinguishable_by_products<S: Scalar>(col: &ModeColumn<S>) -> Result<Vec<S>> {
    let r = col.photons();
    if r > PRODUCT_FORM_MAX {
        return Err(Error::BudgetExceeded {
            required: 1u128 << r,
            budget: 1u128 << PRODUCT_FORM_MAX,
        });
    }
    let p = col.probs();
    let q: Vec<S> = p.iter().map(|x| S::one() - x.clone()).collect();
    let mut buckets: Vec<Vec<S>> = vec![Vec::new(); r + 1];
    for mask in 0u32..(1u32 << r) {
        let term = (0..r).fold(S::one(), |acc, i| {
            if mask >> i & 1 == 1 {
                acc * p[i].clone()
            } else {
                acc * q[i].clone()
            }
        });
        buckets[mask.count_ones() as usize].push(term);
    }
    buckets
        .into_iter()
        .map(|b| S::sum_compensated(b).map_err(Error::from))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailRatio<S> {
    /// `P(R)`
    pub quantum: S,
    /// `P_d(R)`
    pub distinguishable: S,
    /// `P(R) / P_d(R)`; `None` when both tails vanish.
    pub ratio: Option<S>,
}

impl TailRatio<Rational> {
    /// Whether the ratio equals `R!` exactly.
    pub fn is_factorial(&self, photons: u64) -> bool {
        self.ratio.as_ref() == Some(&Rational::factorial(photons).expect("exact factorial"))
    }
}

/// Both all-photons-bunched tails and their ratio, which equals `R!`.
pub fn tail_ratio_check<S: SeriesScalar>(col: &ModeColumn<S>) -> Result<TailRatio<S>> {
    let r = col.photons();
    if r == 0 {
        return Err(Error::InvalidMatrix("tail ratio needs at least one photon".into()));
    }
    let quantum = quantum_marginal(col).p[r].clone();
    let distinguishable = distinguishable_marginal(col).p[r].clone();
    let ratio = if distinguishable.is_zero() {
        None
    } else {
        Some(quantum.clone() / distinguishable.clone())
    };
    Ok(TailRatio { quantum, distinguishable, ratio })
}

/// `|sum_n p[n] - 1|`.
pub fn normalization_check<S: Scalar>(dist: &MarginalDistribution<S>) -> Result<S> {
    let total = S::sum_compensated(dist.p.iter().cloned())?;
    Ok((total - S::one()).abs())
}

/// Probability mass of a float distribution that is negative beyond rounding.
pub fn min_probability(dist: &MarginalDistribution<f64>) -> f64 {
    dist.p.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Exact distributions as decimals, for display.
pub fn to_f64_vec<S: Scalar>(p: &[S]) -> Vec<f64> {
    p.iter().map(Scalar::to_f64).collect()
}
