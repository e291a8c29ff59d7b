//! Transition matrices, orthonormality checks and per-mode column extraction.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Complex, Rational, Scalar, ScalarRepr, ToRepr};

/// An `R x M` amplitude matrix with orthonormal rows.
///
/// Entries are stored up to a common factor: the physical amplitude is
/// `sqrt(scale) * entry`. This lets matrices such as the Hadamard lattice,
/// whose amplitudes are integers times `2^(-T/2)`, stay exact in the rational
/// backend. For an ordinary matrix `scale` is one.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix<S> {
    rows: usize,
    cols: usize,
    entries: Vec<Complex<S>>,
    scale: S,
}

impl<S: Scalar> TransitionMatrix<S> {
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex<S>>) -> Result<Self> {
        Self::with_scale(rows, cols, entries, S::one())
    }

    pub fn with_scale(rows: usize, cols: usize, entries: Vec<Complex<S>>, scale: S) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidMatrix("empty matrix".into()));
        }
        if rows > cols {
            return Err(Error::InvalidMatrix(format!(
                "{rows} sources exceed {cols} modes"
            )));
        }
        if entries.len() != rows * cols {
            return Err(Error::InvalidMatrix(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if scale <= S::zero() {
            return Err(Error::InvalidMatrix("scale must be positive".into()));
        }
        Ok(TransitionMatrix { rows, cols, entries, scale })
    }

    /// Real-valued matrix from nested rows.
    pub fn from_real_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let r = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != m) {
            return Err(Error::InvalidMatrix("ragged rows".into()));
        }
        let entries = rows.into_iter().flatten().map(Complex::real).collect();
        Self::new(r, m, entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn scale(&self) -> &S {
        &self.scale
    }

    /// Stored entry at 0-based `(row, col)`; multiply by `sqrt(scale)` for the amplitude.
    pub fn entry(&self, row: usize, col: usize) -> &Complex<S> {
        &self.entries[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[Complex<S>] {
        &self.entries[row * self.cols..(row + 1) * self.cols]
    }

    /// `|v_{row,col}|^2`, exact in the rational backend.
    pub fn mod_squared(&self, row: usize, col: usize) -> S {
        self.entry(row, col).norm_sqr() * self.scale.clone()
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode == 0 || mode > self.cols {
            return Err(Error::ModeOutOfRange { mode, modes: self.cols });
        }
        Ok(())
    }

    /// Gram-matrix check of row orthonormality. The deviation of a pair is
    /// `max(|Re d|, |Im d|)` with `d = <row_a, row_b> - delta_ab`.
    pub fn validate_orthonormality(&self, tol: &S) -> OrthonormalityReport<S> {
        let mut max_deviation = S::zero();
        let mut worst_pair = None;
        for a in 0..self.rows {
            for b in a..self.rows {
                let mut acc = Complex::<S>::zero();
                for (x, y) in self.row(a).iter().zip(self.row(b)) {
                    acc = acc + x.clone() * y.conj();
                }
                let mut d = acc.scale(&self.scale);
                if a == b {
                    d.re = d.re - S::one();
                }
                let dev = if d.re.abs() >= d.im.abs() { d.re.abs() } else { d.im.abs() };
                if worst_pair.is_none() || dev > max_deviation {
                    max_deviation = dev;
                    worst_pair = Some((a + 1, b + 1));
                }
            }
        }
        OrthonormalityReport {
            pass: max_deviation <= *tol,
            max_deviation,
            worst_pair: worst_pair.unwrap_or((1, 1)),
        }
    }

    /// Squared moduli of one column (1-based `mode`), zeros retained.
    pub fn extract_mode_column(&self, mode: usize) -> Result<ModeColumn<S>> {
        self.check_mode(mode)?;
        let probs = (0..self.rows).map(|r| self.mod_squared(r, mode - 1)).collect();
        ModeColumn::new(mode, probs)
    }

    pub fn mod_squared_grid(&self) -> ModSquaredGrid<S> {
        let values = (0..self.rows)
            .flat_map(|r| (0..self.cols).map(move |c| (r, c)))
            .map(|(r, c)| self.mod_squared(r, c))
            .collect();
        ModSquaredGrid { rows: self.rows, cols: self.cols, values }
    }
}

impl TransitionMatrix<Rational> {
    /// Floating-point copy with the scale folded into the entries.
    pub fn to_float(&self) -> TransitionMatrix<f64> {
        let root = self.scale.to_f64().sqrt();
        let entries = self
            .entries
            .iter()
            .map(|z| Complex::new(z.re.to_f64() * root, z.im.to_f64() * root))
            .collect();
        TransitionMatrix { rows: self.rows, cols: self.cols, entries, scale: 1.0 }
    }
}

/// Default orthonormality tolerance: exact for rationals, `1e-10` for floats.
pub fn default_tolerance<S: Scalar>() -> S {
    match S::BACKEND {
        crate::numerics::Backend::Exact => S::zero(),
        crate::numerics::Backend::Float => S::from_ratio(1, 10_000_000_000),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalityReport<S> {
    pub pass: bool,
    pub max_deviation: S,
    /// 1-based row pair attaining the maximum.
    pub worst_pair: (usize, usize),
}

/// Transition probabilities `|v_{r,k}|^2` into one observed mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeColumn<S> {
    mode: usize,
    probs: Vec<S>,
    sum: S,
}

impl<S: Scalar> ModeColumn<S> {
    /// Rejects entries outside `[0, 1]` and columns whose total exceeds one
    /// (beyond `1e-9` for floats).
    pub fn new(mode: usize, probs: Vec<S>) -> Result<Self> {
        if let Some(bad) = probs.iter().find(|p| **p < S::zero() || **p > S::one()) {
            return Err(Error::InvalidMatrix(format!(
                "transition probability {bad} outside [0, 1]"
            )));
        }
        let sum = S::sum_compensated(probs.iter().cloned())?;
        let limit = S::one() + super::matrix::default_tolerance::<S>() * S::from_u64(10);
        if sum > limit {
            return Err(Error::InvalidMatrix(format!("column {mode} sums to {sum} > 1")));
        }
        Ok(ModeColumn { mode, probs, sum })
    }

    /// Column not attached to a particular matrix (reported as mode 1).
    pub fn from_probs(probs: Vec<S>) -> Result<Self> {
        Self::new(1, probs)
    }

    pub fn mode(&self) -> usize {
        self.mode
    }

    pub fn probs(&self) -> &[S] {
        &self.probs
    }

    pub fn sum(&self) -> &S {
        &self.sum
    }

    /// Number of photon sources `R`.
    pub fn photons(&self) -> usize {
        self.probs.len()
    }
}

/// `R x M` grid of squared moduli, the only input the closed-form marginals need.
#[derive(Debug, Clone, PartialEq)]
pub struct ModSquaredGrid<S> {
    rows: usize,
    cols: usize,
    values: Vec<S>,
}

impl<S: Scalar> ModSquaredGrid<S> {
    pub fn new(rows: usize, cols: usize, values: Vec<S>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::InvalidMatrix("mod_squared grid has wrong size".into()));
        }
        Ok(ModSquaredGrid { rows, cols, values })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> &S {
        &self.values[row * self.cols + col]
    }

    pub fn column(&self, mode: usize) -> Result<ModeColumn<S>> {
        if mode == 0 || mode > self.cols {
            return Err(Error::ModeOutOfRange { mode, modes: self.cols });
        }
        let probs = (0..self.rows).map(|r| self.get(r, mode - 1).clone()).collect();
        ModeColumn::new(mode, probs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FileBackend {
    Float,
    Rational,
}

/// On-disk matrix format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub backend: FileBackend,
    pub entries: Vec<Vec<Complex<ScalarRepr>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mod_squared: Option<Vec<Vec<Rational>>>,
}

fn repr_rows<S: Scalar + ToRepr>(m: &TransitionMatrix<S>) -> Vec<Vec<Complex<ScalarRepr>>> {
    (0..m.rows)
        .map(|r| {
            m.row(r)
                .iter()
                .map(|z| Complex { re: z.re.to_repr(), im: z.im.to_repr() })
                .collect()
        })
        .collect()
}

impl MatrixFile {
    pub fn from_float(m: &TransitionMatrix<f64>) -> Self {
        let folded = if m.scale == 1.0 {
            m.clone()
        } else {
            let root = m.scale.sqrt();
            let entries = m.entries.iter().map(|z| z.scale(&root)).collect();
            TransitionMatrix { rows: m.rows, cols: m.cols, entries, scale: 1.0 }
        };
        MatrixFile {
            rows: m.rows,
            cols: m.cols,
            backend: FileBackend::Float,
            entries: repr_rows(&folded),
            mod_squared: None,
        }
    }

    /// Exact matrices with unit scale are written as rationals; scaled ones
    /// (irrational amplitudes) as floats plus the exact `mod_squared` grid.
    pub fn from_exact(m: &TransitionMatrix<Rational>) -> Self {
        let grid = m.mod_squared_grid();
        let mod_squared = Some(
            (0..grid.rows)
                .map(|r| (0..grid.cols).map(|c| grid.get(r, c).clone()).collect())
                .collect(),
        );
        if m.scale == Rational::one() {
            MatrixFile {
                rows: m.rows,
                cols: m.cols,
                backend: FileBackend::Rational,
                entries: repr_rows(m),
                mod_squared,
            }
        } else {
            MatrixFile { mod_squared, ..MatrixFile::from_float(&m.to_float()) }
        }
    }

    fn check_shape(&self) -> Result<()> {
        if self.entries.len() != self.rows || self.entries.iter().any(|r| r.len() != self.cols) {
            return Err(Error::InvalidMatrix(format!(
                "entries do not form a {}x{} grid",
                self.rows, self.cols
            )));
        }
        if let Some(g) = &self.mod_squared {
            if g.len() != self.rows || g.iter().any(|r| r.len() != self.cols) {
                return Err(Error::InvalidMatrix("mod_squared grid has wrong shape".into()));
            }
        }
        Ok(())
    }

    pub fn to_float_matrix(&self) -> Result<TransitionMatrix<f64>> {
        self.check_shape()?;
        let entries = self
            .entries
            .iter()
            .flatten()
            .map(|z| Complex::new(z.re.to_f64(), z.im.to_f64()))
            .collect();
        TransitionMatrix::new(self.rows, self.cols, entries)
    }

    /// Exact amplitudes; only available for `backend: "rational"` files.
    pub fn to_exact_matrix(&self) -> Result<TransitionMatrix<Rational>> {
        self.check_shape()?;
        if self.backend != FileBackend::Rational {
            return Err(Error::InvalidMatrix("file carries float amplitudes".into()));
        }
        let entries = self
            .entries
            .iter()
            .flatten()
            .map(|z| match (z.re.to_rational(), z.im.to_rational()) {
                (Some(re), Some(im)) => Ok(Complex::new(re, im)),
                _ => Err(Error::InvalidMatrix("float entry in a rational matrix".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        TransitionMatrix::new(self.rows, self.cols, entries)
    }

    pub fn has_exact_data(&self) -> bool {
        self.mod_squared.is_some() || self.backend == FileBackend::Rational
    }

    /// Exact squared moduli from the `mod_squared` grid or rational entries.
    pub fn exact_mod_squared(&self) -> Result<ModSquaredGrid<Rational>> {
        self.check_shape()?;
        if let Some(g) = &self.mod_squared {
            return ModSquaredGrid::new(self.rows, self.cols, g.iter().flatten().cloned().collect());
        }
        if self.backend == FileBackend::Rational {
            return Ok(self.to_exact_matrix()?.mod_squared_grid());
        }
        Err(Error::InvalidMatrix(
            "exact backend needs rational entries or a mod_squared grid".into(),
        ))
    }

    pub fn float_mod_squared(&self) -> Result<ModSquaredGrid<f64>> {
        Ok(self.to_float_matrix()?.mod_squared_grid())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: MatrixFile = serde_json::from_str(&text)?;
        file.check_shape()?;
        Ok(file)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
