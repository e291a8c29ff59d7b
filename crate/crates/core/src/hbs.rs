//! Hadamard Boson Sampling: a `T`-layer lattice of balanced beam splitters.
//!
//! Node `(t, j)` maps `(U_i, D_i)` to `((U_i - D_i)/sqrt2, (U_i + D_i)/sqrt2)`.
//! U-out of `(t, j)` feeds D-in of `(t+1, j)`, D-out feeds U-in of
//! `(t+1, j+1)`, missing neighbours are vacuum. The final layer is read top
//! to bottom as `(U-out, D-out)` per node, giving `2T` output wires.
//!
//! Every amplitude after `T` layers is an integer times `2^{-T/2}`, so the
//! integers are kept and `|v|^2` is exact.

use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::marginals::{all_modes, Model};
use crate::matrix::{MatrixFile, ModSquaredGrid, TransitionMatrix};
use crate::numerics::{Complex, Rational, Scalar};

/// Output vector of a single photon entering the top of the lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkAmplitudes {
    layers: usize,
    /// `v_j = coeffs[j] * 2^{-T/2}`.
    coeffs: Vec<BigInt>,
}

impl WalkAmplitudes {
    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// `|v_j|^2` for 0-based `j`.
    pub fn mod_squared(&self, j: usize) -> Rational {
        let c = &self.coeffs[j];
        Rational::new(c * c, BigInt::from(1) << self.layers)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        let norm = 2f64.powf(-(self.layers as f64) / 2.0);
        self.coeffs.iter().map(|c| Rational::from_integer(c.clone()).to_f64() * norm).collect()
    }

    /// `sum |v_j|^2`, exactly.
    pub fn norm_squared(&self) -> Rational {
        let total: BigInt = self.coeffs.iter().map(|c| c * c).sum();
        Rational::new(total, BigInt::from(1) << self.layers)
    }
}

pub fn walk_amplitudes(layers: usize) -> Result<WalkAmplitudes> {
    if layers == 0 {
        return Err(Error::NoLayers);
    }
    // (U-out, D-out) of each node of the current layer
    let mut outs: Vec<(BigInt, BigInt)> = vec![(BigInt::from(1), BigInt::from(1))];
    for t in 2..=layers {
        outs = (0..t)
            .map(|j| {
                let u_in = if j == 0 { BigInt::zero() } else { outs[j - 1].1.clone() };
                let d_in = outs.get(j).map(|o| o.0.clone()).unwrap_or_default();
                (&u_in - &d_in, u_in + d_in)
            })
            .collect();
    }
    let coeffs = outs.into_iter().flat_map(|(u, d)| [u, d]).collect();
    Ok(WalkAmplitudes { layers, coeffs })
}

/// Banded `R x 2(R+T-1)` transition matrix: row `r` is `v_T` shifted right
/// by `2r` columns.
#[derive(Debug, Clone)]
pub struct HbsMatrix {
    layers: usize,
    walk: WalkAmplitudes,
    /// Integer entries with scale `2^{-T}`.
    matrix: TransitionMatrix<Rational>,
}

pub fn modes_for(layers: usize, photons: usize) -> usize {
    2 * (photons + layers - 1)
}

pub fn build_matrix(layers: usize, photons: usize) -> Result<HbsMatrix> {
    if photons == 0 {
        return Err(Error::InvalidMatrix("at least one photon is required".into()));
    }
    let walk = walk_amplitudes(layers)?;
    let cols = modes_for(layers, photons);
    let mut entries = vec![Complex::<Rational>::zero(); photons * cols];
    for r in 0..photons {
        for (j, c) in walk.coeffs.iter().enumerate() {
            entries[r * cols + 2 * r + j] = Complex::real(Rational::from_integer(c.clone()));
        }
    }
    let scale = Rational::pow2_neg(layers as u32);
    let matrix = TransitionMatrix::with_scale(photons, cols, entries, scale)?;
    Ok(HbsMatrix { layers, walk, matrix })
}

impl HbsMatrix {
    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn photons(&self) -> usize {
        self.matrix.rows()
    }

    pub fn modes(&self) -> usize {
        self.matrix.cols()
    }

    pub fn walk(&self) -> &WalkAmplitudes {
        &self.walk
    }

    pub fn exact(&self) -> &TransitionMatrix<Rational> {
        &self.matrix
    }

    /// Amplitudes `c * 2^{-T/2}` as plain floats.
    pub fn to_float(&self) -> TransitionMatrix<f64> {
        let v = self.walk.to_f64();
        let cols = self.modes();
        let mut entries = vec![Complex::<f64>::zero(); self.photons() * cols];
        for r in 0..self.photons() {
            for (j, &x) in v.iter().enumerate() {
                entries[r * cols + 2 * r + j] = Complex::real(x);
            }
        }
        TransitionMatrix::new(self.photons(), cols, entries).expect("banded layout fits")
    }

    pub fn mod_squared_grid(&self) -> ModSquaredGrid<Rational> {
        self.matrix.mod_squared_grid()
    }

    /// Float amplitudes plus the exact `|v|^2` grid.
    pub fn matrix_file(&self) -> MatrixFile {
        MatrixFile::from_exact(&self.matrix)
    }

    /// Modes whose column sees every entry of `v_T`.
    pub fn bulk_modes(&self) -> RangeInclusive<usize> {
        bulk_modes(self.layers, self.photons())
    }
}

/// Full-bandwidth modes `2T-1 ..= 2R` (1-based). Empty when `R < T`.
pub fn bulk_modes(layers: usize, photons: usize) -> RangeInclusive<usize> {
    (2 * layers - 1)..=(2 * photons)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicityPair {
    pub mode: usize,
    pub partner: usize,
    pub quantum_equal: bool,
    pub distinguishable_equal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicityReport {
    pub layers: usize,
    pub photons: usize,
    /// First and last bulk mode compared, `None` when there are none.
    pub bulk: Option<(usize, usize)>,
    pub pairs: Vec<PeriodicityPair>,
    pub pass: bool,
    pub note: Option<String>,
}

/// Exact lag-2 comparison `P(n_i) = P(n_{i+2})` for `2T-2 < i < i+2 < 2R+1`,
/// under both models.
pub fn check_periodicity(hbs: &HbsMatrix) -> PeriodicityReport {
    let (t, r) = (hbs.layers, hbs.photons());
    let lo = 2 * t - 1;
    let hi = 2 * r; // last mode allowed as the partner
    if lo + 2 > hi {
        return PeriodicityReport {
            layers: t,
            photons: r,
            bulk: None,
            pairs: Vec::new(),
            pass: true,
            note: Some("no bulk modes".into()),
        };
    }
    let grid = hbs.mod_squared_grid();
    let quantum = all_modes(&grid, Model::Quantum).expect("modes in range");
    let dist = all_modes(&grid, Model::Distinguishable).expect("modes in range");
    let pairs: Vec<PeriodicityPair> = (lo..=hi - 2)
        .map(|i| PeriodicityPair {
            mode: i,
            partner: i + 2,
            quantum_equal: quantum[i - 1].p == quantum[i + 1].p,
            distinguishable_equal: dist[i - 1].p == dist[i + 1].p,
        })
        .collect();
    let pass = pairs.iter().all(|p| p.quantum_equal && p.distinguishable_equal);
    PeriodicityReport { layers: t, photons: r, bulk: Some((lo, hi)), pairs, pass, note: None }
}

/// Column `k` of the unshifted vector: every entry of `v` whose index has
/// the parity of `k`, i.e. the full-bandwidth column for that parity.
pub fn bulk_column(walk: &WalkAmplitudes, odd: bool) -> Vec<Rational> {
    let start = if odd { 0 } else { 1 };
    (start..walk.coeffs.len())
        .step_by(2)
        .map(|j| walk.mod_squared(j))
        .filter(|p| !p.is_zero())
        .collect()
}

/// Sign pattern check used by tests and the CLI: `v_j` is zero.
pub fn has_interference_zero(walk: &WalkAmplitudes) -> bool {
    walk.coeffs.iter().any(|c| c.is_zero())
}
