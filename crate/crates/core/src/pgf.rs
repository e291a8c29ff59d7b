//! Probability generating function of the photon count in one mode.
//!
//! The quantum PGF is `sum_m a[m] (x-1)^m` with `a[m] = m! S[m]`; the
//! distinguishable one drops the `m!`. Each `m! prod p_i` is the permanent of
//! a rank-one principal block, which is how `a[m]` is assembled on the
//! exponential reference path.
//!
//! [`extract_coeffs_via_interpolation`] is the generating-function baseline:
//! sample the PGF at `R + 1` nodes and solve the Vandermonde system for the
//! probabilities. It exists for cross-checks (exact backend) and for the
//! benchmark (float backend), where it becomes ill-conditioned quickly.

use crate::error::{Error, Result};
use crate::esp::{esp_all, esp_scaled_all};
use crate::marginals::{MarginalDistribution, Method, Model, Warning, CONDITION_WARNING};
use crate::matrix::ModeColumn;
use crate::numerics::{Backend, Scalar};
use crate::par;

/// Largest `R` accepted by the subset-expansion path.
pub const SUBSET_EXPANSION_MAX: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct PgfSeries<S> {
    pub mode: usize,
    pub photons: usize,
    /// Coefficients in the `(x - 1)` basis.
    pub coeffs_basis: Vec<S>,
    pub model: Model,
}

/// Evaluate the PGF at `x` by Horner's rule in `x - 1`.
pub fn pgf_eval<S: Scalar>(series: &PgfSeries<S>, x: &S) -> S {
    let y = x.clone() - S::one();
    series
        .coeffs_basis
        .iter()
        .rev()
        .fold(S::zero(), |acc, a| acc * y.clone() + a.clone())
}

/// Permanent of the rank-one matrix with the given diagonal:
/// `m! * prod diag`.
pub fn rank1_permanent<S: Scalar>(diag: &[S]) -> S {
    let mut acc = S::one();
    for (i, d) in diag.iter().enumerate() {
        acc = acc * d.clone() * S::from_u64(i as u64 + 1);
    }
    acc
}

/// Series built from the symmetric-polynomial DP.
pub fn pgf_series<S: Scalar>(col: &ModeColumn<S>, model: Model) -> PgfSeries<S> {
    let coeffs_basis = match model {
        Model::Quantum => esp_scaled_all(col).scaled.expect("scaled table"),
        Model::Distinguishable => esp_all(col).values,
    };
    PgfSeries { mode: col.mode(), photons: col.photons(), coeffs_basis, model }
}

/// Series built by summing rank-one principal-block permanents over every
/// subset of sources. Exponential; `R <= 12`.
pub fn pgf_from_subsets<S: Scalar>(col: &ModeColumn<S>, model: Model) -> Result<PgfSeries<S>> {
    let r = col.photons();
    if r > SUBSET_EXPANSION_MAX {
        return Err(Error::BudgetExceeded {
            required: 1u128 << r,
            budget: 1u128 << SUBSET_EXPANSION_MAX,
        });
    }
    let p = col.probs();
    let mut buckets: Vec<Vec<S>> = vec![Vec::new(); r + 1];
    let mut diag = Vec::with_capacity(r);
    for mask in 0u32..(1u32 << r) {
        diag.clear();
        diag.extend((0..r).filter(|i| mask >> i & 1 == 1).map(|i| p[i].clone()));
        let term = match model {
            Model::Quantum => rank1_permanent(&diag),
            Model::Distinguishable => diag.iter().fold(S::one(), |a, d| a * d.clone()),
        };
        buckets[diag.len()].push(term);
    }
    let coeffs_basis = buckets
        .into_iter()
        .map(|b| S::sum_compensated(b).map_err(Error::from))
        .collect::<Result<Vec<_>>>()?;
    Ok(PgfSeries { mode: col.mode(), photons: r, coeffs_basis, model })
}

/// Subset expansion for small `R`, the DP otherwise.
pub fn pgf_from_expansion<S: Scalar>(col: &ModeColumn<S>, model: Model) -> Result<PgfSeries<S>> {
    if col.photons() <= SUBSET_EXPANSION_MAX {
        pgf_from_subsets(col, model)
    } else {
        Ok(pgf_series(col, model))
    }
}

/// Rewrite `sum_m a[m] (x-1)^m` in the monomial basis `sum_n c[n] x^n`.
pub fn expand_to_monomials<S: Scalar>(coeffs_basis: &[S]) -> Vec<S> {
    let mut poly: Vec<S> = Vec::with_capacity(coeffs_basis.len());
    for a in coeffs_basis.iter().rev() {
        // poly <- poly * (x - 1) + a
        poly.push(S::zero());
        for i in (1..poly.len()).rev() {
            poly[i] = poly[i - 1].clone() - poly[i].clone();
        }
        poly[0] = a.clone() - poly[0].clone();
    }
    poly
}

/// Interpolation nodes: the integers `0..=R` for exact arithmetic,
/// Chebyshev points mapped to `[0, 1]` for floats.
pub fn interpolation_nodes<S: Scalar>(photons: usize) -> Vec<S> {
    match S::BACKEND {
        Backend::Exact => (0..=photons as u64).map(S::from_u64).collect(),
        Backend::Float => {
            let n = photons + 1;
            (0..n)
                .map(|j| {
                    let theta = std::f64::consts::PI * (2 * j + 1) as f64 / (2 * n) as f64;
                    S::from_f64(0.5 * (1.0 - theta.cos()))
                })
                .collect()
        }
    }
}

/// Upper bound on the infinity-norm condition number of the Vandermonde
/// matrix on `nodes`, via the closed form for `||V^-1||_inf`.
pub fn vandermonde_condition(nodes: &[f64]) -> f64 {
    let n = nodes.len();
    if n <= 1 {
        return 1.0;
    }
    let norm_v = nodes
        .iter()
        .map(|x| (0..n).map(|k| x.abs().powi(k as i32)).sum::<f64>())
        .fold(0.0, f64::max);
    let log_inv = (0..n)
        .map(|j| {
            (0..n)
                .filter(|&k| k != j)
                .map(|k| ((1.0 + nodes[k].abs()) / (nodes[j] - nodes[k]).abs()).ln())
                .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max);
    (norm_v.ln() + log_inv).exp()
}

/// Solve the Vandermonde system `sum_n c[n] x_j^n = y_j` by Newton divided
/// differences followed by expansion into monomials. `O(n^2)`.
pub fn solve_vandermonde<S: Scalar>(nodes: &[S], values: &[S]) -> Vec<S> {
    let n = nodes.len();
    assert_eq!(n, values.len());
    let mut c = values.to_vec();
    for j in 1..n {
        for i in (j..n).rev() {
            c[i] = (c[i].clone() - c[i - 1].clone()) / (nodes[i].clone() - nodes[i - j].clone());
        }
    }
    let mut poly: Vec<S> = Vec::with_capacity(n);
    for k in (0..n).rev() {
        // poly <- poly * (x - x_k) + c[k]
        poly.push(S::zero());
        for i in (1..poly.len()).rev() {
            poly[i] = poly[i - 1].clone() - nodes[k].clone() * poly[i].clone();
        }
        poly[0] = c[k].clone() - nodes[k].clone() * poly[0].clone();
    }
    poly
}

/// Recover `P(0..=R)` by sampling the PGF at `R + 1` nodes and solving the
/// Vandermonde system. Node evaluations run concurrently.
pub fn extract_coeffs_via_interpolation<S: Scalar>(series: &PgfSeries<S>) -> MarginalDistribution<S> {
    let nodes = interpolation_nodes::<S>(series.photons);
    let values = par::map_slice(&nodes, |x| pgf_eval(series, x));
    let p = solve_vandermonde(&nodes, &values);
    let mut warnings = Vec::new();
    let condition = match S::BACKEND {
        Backend::Exact => None,
        Backend::Float => {
            let xs: Vec<f64> = nodes.iter().map(Scalar::to_f64).collect();
            let k = vandermonde_condition(&xs);
            if !(k <= CONDITION_WARNING) {
                warnings.push(Warning::IllConditioned { condition: k });
            }
            Some(k)
        }
    };
    MarginalDistribution {
        mode: series.mode,
        photons: series.photons,
        model: series.model,
        backend: S::BACKEND,
        method: Method::Interpolation,
        p,
        condition,
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marginals::{distinguishable_marginal, quantum_marginal};
    use crate::numerics::Rational;

    fn q(n: i64, d: u64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn col(p: Vec<Rational>) -> ModeColumn<Rational> {
        ModeColumn::from_probs(p).unwrap()
    }

    #[test]
    fn pgf_at_one_is_one() {
        let c = col(vec![q(1, 8), q(1, 2), q(1, 8)]);
        for model in [Model::Quantum, Model::Distinguishable] {
            assert_eq!(pgf_eval(&pgf_series(&c, model), &q(1, 1)), q(1, 1));
        }
    }

    #[test]
    fn pgf_at_zero_is_vacuum_probability() {
        let s = pgf_series(&col(vec![q(1, 2), q(1, 8)]), Model::Quantum);
        assert_eq!(pgf_eval(&s, &q(0, 1)), q(8, 16));
    }

    #[test]
    fn single_photon_pgf() {
        let s = pgf_series(&col(vec![q(1, 3)]), Model::Quantum);
        for x in [q(0, 1), q(1, 2), q(5, 1)] {
            assert_eq!(pgf_eval(&s, &x), q(1, 1) + (x.clone() - q(1, 1)) * q(1, 3));
        }
    }

    #[test]
    fn rank1_permanents() {
        assert_eq!(rank1_permanent(&[q(3, 7)]), q(3, 7));
        let (a, b) = (q(2, 3), q(5, 11));
        assert_eq!(rank1_permanent(&[a.clone(), b.clone()]), q(2, 1) * a * b);
        // diag ((x-1)/2, (x-1)/8) at x = 0
        assert_eq!(rank1_permanent(&[q(-1, 2), q(-1, 8)]), q(1, 8));
        assert_eq!(rank1_permanent::<Rational>(&[]), q(1, 1));
    }

    #[test]
    fn expansion_examples() {
        let s = pgf_from_expansion(&col(vec![q(1, 2), q(1, 8)]), Model::Quantum).unwrap();
        assert_eq!(s.coeffs_basis, vec![q(1, 1), q(5, 8), q(1, 8)]);
        let s = pgf_from_expansion(&col(vec![]), Model::Quantum).unwrap();
        assert_eq!(s.coeffs_basis, vec![q(1, 1)]);
        let s = pgf_from_expansion(&col(vec![q(1, 8), q(1, 2), q(1, 8)]), Model::Quantum).unwrap();
        assert_eq!(s.coeffs_basis[3], q(6, 128));
    }

    #[test]
    fn subset_path_matches_dp() {
        let p: Vec<Rational> = (1..=12).map(|i| q(i, 200)).collect();
        let c = col(p);
        for model in [Model::Quantum, Model::Distinguishable] {
            assert_eq!(pgf_from_subsets(&c, model).unwrap(), pgf_series(&c, model));
        }
        let big = col((0..13).map(|_| q(1, 20)).collect());
        assert!(pgf_from_subsets(&big, Model::Quantum).is_err());
        assert_eq!(pgf_from_expansion(&big, Model::Quantum).unwrap(), pgf_series(&big, Model::Quantum));
    }

    #[test]
    fn interpolation_table_one() {
        let s = pgf_series(&col(vec![q(1, 2), q(1, 8)]), Model::Quantum);
        let d = extract_coeffs_via_interpolation(&s);
        assert_eq!(d.p, vec![q(8, 16), q(6, 16), q(2, 16)]);
        assert_eq!(d.method, Method::Interpolation);
    }

    #[test]
    fn interpolation_empty() {
        let d = extract_coeffs_via_interpolation(&pgf_series(&col(vec![]), Model::Quantum));
        assert_eq!(d.p, vec![q(1, 1)]);
    }

    #[test]
    fn interpolation_matches_direct() {
        let c = col(vec![q(1, 8), q(1, 2), q(1, 8)]);
        let d = extract_coeffs_via_interpolation(&pgf_series(&c, Model::Quantum));
        assert_eq!(d.p, quantum_marginal(&c).p);
        let d = extract_coeffs_via_interpolation(&pgf_series(&c, Model::Distinguishable));
        assert_eq!(d.p, distinguishable_marginal(&c).p);
    }

    #[test]
    fn monomial_expansion_matches_direct() {
        let c = col((1..=10).map(|i| q(i, 60)).collect());
        let s = pgf_series(&c, Model::Quantum);
        assert_eq!(expand_to_monomials(&s.coeffs_basis), quantum_marginal(&c).p);
    }

    #[test]
    fn float_pgf_in_unit_interval() {
        let c = ModeColumn::from_probs(vec![0.2, 0.1, 0.3, 0.05]).unwrap();
        let s = pgf_series(&c, Model::Quantum);
        for i in 0..=20 {
            let v = pgf_eval(&s, &(i as f64 / 20.0));
            assert!((0.0..=1.0 + 1e-15).contains(&v));
        }
    }

    #[test]
    fn float_interpolation_small_is_accurate_large_is_flagged() {
        let c = ModeColumn::from_probs(vec![0.1, 0.2, 0.15]).unwrap();
        let d = extract_coeffs_via_interpolation(&pgf_series(&c, Model::Quantum));
        let direct = quantum_marginal(&c);
        for (a, b) in d.p.iter().zip(&direct.p) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(d.warnings.is_empty());

        let c = ModeColumn::from_probs(vec![0.5 / 64.0; 64]).unwrap();
        let d = extract_coeffs_via_interpolation(&pgf_series(&c, Model::Quantum));
        assert!(d.condition.unwrap() > CONDITION_WARNING);
        assert!(!d.warnings.is_empty());
    }

    #[test]
    fn vandermonde_condition_known_values() {
        // nodes {0, 1}: V = [[1,0],[1,1]], ||V||=2, ||V^-1||=2
        assert!((vandermonde_condition(&[0.0, 1.0]) - 4.0).abs() < 1e-12);
    }
}
