//! Elementary symmetric polynomials of a mode column.
//!
//! `S[m]` is the sum over all `m`-subsets of the column of the product of
//! their transition probabilities. Both tables are built from a single row of
//! length `R + 1` updated in place from high to low index, so memory is `O(R)`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::matrix::ModeColumn;
use crate::numerics::{Rational, Scalar};

/// Nontrivial arithmetic performed by a DP pass. Products with the seed
/// `S[0] = 1` and sums with a structural zero are not counted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DpWork {
    pub multiplies: u64,
    pub additions: u64,
}

impl DpWork {
    pub fn total(&self) -> u64 {
        self.multiplies + self.additions
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EspTable<S> {
    /// `S[0..=R]`, with `S[0] = 1`.
    pub values: Vec<S>,
    /// `T[m] = m! * S[m]`, when built by [`esp_scaled_all`].
    pub scaled: Option<Vec<S>>,
    pub work: DpWork,
}

impl<S: Scalar> EspTable<S> {
    pub fn photons(&self) -> usize {
        self.values.len() - 1
    }
}

/// Shared DP skeleton. `weight(j)` multiplies the incoming product term, so
/// `weight = 1` gives `S` and `weight = j` gives the factorial-scaled `T`.
fn run_dp<S: Scalar>(probs: &[S], weighted: bool) -> (Vec<S>, DpWork) {
    if let Some(out) = S::esp_row(probs, weighted) {
        return out;
    }
    let r = probs.len();
    let mut row = vec![S::zero(); r + 1];
    row[0] = S::one();
    let mut work = DpWork::default();
    for (i, p) in probs.iter().enumerate() {
        let i = i + 1;
        // row holds S_{i-1; .}; descend so row[j-1] is still from pass i-1.
        for j in (1..=i).rev() {
            let factor = if weighted { p.clone() * S::from_u64(j as u64) } else { p.clone() };
            let product = if j == 1 {
                factor
            } else {
                work.multiplies += 1;
                factor * row[j - 1].clone()
            };
            row[j] = if j == i {
                product
            } else {
                work.additions += 1;
                product + row[j].clone()
            };
        }
    }
    (row, work)
}

/// Rational DP carried out on integers. With `L` the lcm of the
/// denominators and `c_i = L p_i`, the row holds `L^m S[m]` (or `L^m T[m]`),
/// so no gcd is taken until the final division.
pub(crate) fn integer_dp(probs: &[Rational], weighted: bool) -> (Vec<Rational>, DpWork) {
    let r = probs.len();
    let l = probs.iter().fold(BigInt::one(), |acc, p| acc.lcm(p.denom()));
    let c: Vec<BigInt> = probs.iter().map(|p| p.numer() * (&l / p.denom())).collect();
    let mut row = vec![BigInt::zero(); r + 1];
    row[0] = BigInt::one();
    let mut work = DpWork::default();
    for (i, p) in c.iter().enumerate() {
        let i = i + 1;
        for j in (1..=i).rev() {
            let factor = if weighted { p * j } else { p.clone() };
            let product = if j == 1 {
                factor
            } else {
                work.multiplies += 1;
                factor * &row[j - 1]
            };
            row[j] = if j == i {
                product
            } else {
                work.additions += 1;
                product + &row[j]
            };
        }
    }
    let mut scale = BigInt::one();
    let values = row
        .into_iter()
        .enumerate()
        .map(|(m, x)| {
            if m > 0 {
                scale *= &l;
            }
            Rational::new(x, scale.clone())
        })
        .collect();
    (values, work)
}

/// `S_{R;m}` for `m = 0..=R` by `S_{i;j} = p_i S_{i-1;j-1} + S_{i-1;j}`.
pub fn esp_all<S: Scalar>(col: &ModeColumn<S>) -> EspTable<S> {
    let (values, work) = run_dp(col.probs(), false);
    EspTable { values, scaled: None, work }
}

/// Factorial-scaled table `T[m] = m! S_{R;m}` via
/// `T_{i;j} = j p_i T_{i-1;j-1} + T_{i-1;j}`.
///
/// `m!` is never formed, and `0 <= T[m] <= (sum p)^m <= 1` for a valid
/// column, so this is the float path for large `R`. The unscaled `values`
/// are only filled in for the exact backend.
pub fn esp_scaled_all<S: Scalar>(col: &ModeColumn<S>) -> EspTable<S> {
    let (scaled, work) = run_dp(col.probs(), true);
    let values = match S::BACKEND {
        crate::numerics::Backend::Exact => {
            let mut fact = S::one();
            scaled
                .iter()
                .enumerate()
                .map(|(m, t)| {
                    if m > 1 {
                        fact = fact.clone() * S::from_u64(m as u64);
                    }
                    t.clone() / fact.clone()
                })
                .collect()
        }
        crate::numerics::Backend::Float => esp_all(col).values,
    };
    EspTable { values, scaled: Some(scaled), work }
}
