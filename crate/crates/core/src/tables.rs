//! Regeneration of the HBS reference tables from scratch.
//!
//! Table 1: full distributions for `T = 3`, grouped by mode class.
//! Table 2: `P(0), P(1)` under both models for the odd and even
//! full-bandwidth modes, rounded to two decimals, for a range of depths.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hbs::{build_matrix, bulk_column, walk_amplitudes};
use crate::marginals::{all_modes, distinguishable_marginal, quantum_marginal, Model};
use crate::matrix::ModeColumn;
use crate::numerics::{Rational, Scalar};
use crate::par;

pub const TABLE1_LAYERS: usize = 3;
pub const TABLE1_COUNTS: usize = 4;
pub const TABLE2_LAYERS: [usize; 13] = [3, 4, 5, 6, 7, 8, 9, 10, 20, 30, 50, 100, 150];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Column {
    pub label: String,
    /// Every mode in the class, 1-based. All share one distribution.
    pub modes: Vec<usize>,
    pub quantum: Vec<Rational>,
    pub distinguishable: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1 {
    pub layers: usize,
    pub photons: usize,
    pub modes: usize,
    pub columns: Vec<Table1Column>,
}

fn padded(p: &[Rational], len: usize) -> Vec<Rational> {
    (0..len).map(|n| p.get(n).cloned().unwrap_or_else(Rational::zero)).collect()
}

/// Table 1 at `T = 3` for a given `R >= 3`. Fails if any mode in a class
/// disagrees with the others.
pub fn table1(photons: usize) -> Result<Table1> {
    let t = TABLE1_LAYERS;
    if photons < t {
        return Err(Error::InvalidMatrix(format!("table 1 needs R >= {t}, got {photons}")));
    }
    let hbs = build_matrix(t, photons)?;
    let m = hbs.modes();
    let grid = hbs.mod_squared_grid();
    let quantum = all_modes(&grid, Model::Quantum)?;
    let dist = all_modes(&grid, Model::Distinguishable)?;
    let classes: Vec<(&str, Vec<usize>)> = vec![
        ("k in {1,2,3}", vec![1, 2, 3]),
        ("k = 4", vec![4]),
        ("k = 2i-1", (5..=2 * photons).step_by(2).collect()),
        ("k = 2i", (6..=2 * photons).step_by(2).collect()),
        ("k = M-3", vec![m - 3]),
        ("k = M-2", vec![m - 2]),
        ("k in {M-1,M}", vec![m - 1, m]),
    ];
    let columns = classes
        .into_iter()
        .map(|(label, modes)| {
            let first = modes[0] - 1;
            let q = padded(&quantum[first].p, TABLE1_COUNTS);
            let d = padded(&dist[first].p, TABLE1_COUNTS);
            for &k in &modes[1..] {
                if quantum[k - 1].p != quantum[first].p || dist[k - 1].p != dist[first].p {
                    return Err(Error::InvalidMatrix(format!("mode {k} differs from mode {} in class {label}", first + 1)));
                }
            }
            Ok(Table1Column { label: label.to_string(), modes, quantum: q, distinguishable: d })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table1 { layers: t, photons, modes: m, columns })
}

impl Table1 {
    /// Plain text, one row per count, cells `P (P_d)`.
    pub fn render(&self) -> String {
        let mut out = format!("T = {}, R = {}, M = {}\n", self.layers, self.photons, self.modes);
        let mut header = vec!["n".to_string()];
        header.extend(self.columns.iter().map(|c| c.label.clone()));
        let rows: Vec<Vec<String>> = (0..TABLE1_COUNTS)
            .map(|n| {
                let mut row = vec![n.to_string()];
                row.extend(self.columns.iter().map(|c| format!("{} ({})", c.quantum[n], c.distinguishable[n])));
                row
            })
            .collect();
        let widths: Vec<usize> = (0..header.len())
            .map(|i| rows.iter().map(|r| r[i].len()).chain([header[i].len()]).max().unwrap_or(0))
            .collect();
        for line in std::iter::once(&header).chain(&rows) {
            let cells: Vec<String> = line.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            let _ = writeln!(out, "{}", cells.join("  ").trim_end());
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("column,n,quantum,distinguishable\n");
        for c in &self.columns {
            for n in 0..TABLE1_COUNTS {
                let _ = writeln!(out, "\"{}\",{},{},{}", c.label, n, c.quantum[n], c.distinguishable[n]);
            }
        }
        out
    }
}

/// `[P(0), P(1), P_d(0), P_d(1)]` for one mode class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table2Cells {
    pub exact: [Rational; 4],
    pub rounded: [String; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table2Row {
    pub layers: usize,
    pub odd: Table2Cells,
    pub even: Table2Cells,
}

fn cells(probs: Vec<Rational>) -> Result<Table2Cells> {
    let col = ModeColumn::from_probs(probs)?;
    let q = padded(&quantum_marginal(&col).p, 2);
    let d = padded(&distinguishable_marginal(&col).p, 2);
    let exact = [q[0].clone(), q[1].clone(), d[0].clone(), d[1].clone()];
    let rounded = exact.clone().map(|x| x.to_fixed(2));
    Ok(Table2Cells { exact, rounded })
}

/// One row of Table 2. A full-bandwidth column holds the entries of `v_T`
/// of one index parity, whatever `R >= T` is.
pub fn table2_row(layers: usize) -> Result<Table2Row> {
    let walk = walk_amplitudes(layers)?;
    Ok(Table2Row { layers, odd: cells(bulk_column(&walk, true))?, even: cells(bulk_column(&walk, false))? })
}

pub fn table2(layers: &[usize]) -> Result<Vec<Table2Row>> {
    par::map_slice(layers, |&t| table2_row(t)).into_iter().collect()
}

pub fn render_table2(rows: &[Table2Row]) -> String {
    let mut out = String::from("        k = 2i-1                   | k = 2i\n");
    out.push_str("  T     P(0)  P(1)  Pd(0) Pd(1)  | P(0)  P(1)  Pd(0) Pd(1)\n");
    for r in rows {
        let _ = writeln!(out, "{:>3}     {}  | {}", r.layers, r.odd.rounded.join("  "), r.even.rounded.join("  "));
    }
    out
}

pub fn table2_csv(rows: &[Table2Row]) -> String {
    let mut out = String::from("T,odd_P0,odd_P1,odd_Pd0,odd_Pd1,even_P0,even_P1,even_Pd0,even_Pd1\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r.layers, r.odd.rounded.join(","), r.even.rounded.join(","));
    }
    out
}
