//! Rectangular numeric data with an explicit response mask.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;

/// Value stored in cells whose mask entry is false. The mask is authoritative.
pub const MISSING: f64 = f64::NAN;

pub const DEFAULT_NA_TOKEN: &str = "NA";

/// Role of a column in the imputation problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColumnRole {
    /// Part of the analysis model (the `T` block in simulations).
    AnalysisTarget,
    /// Drives the missingness mechanism (the `M` block).
    MarPredictor,
    /// Potential auxiliary variable (the `A` block).
    Auxiliary,
}

impl fmt::Display for ColumnRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ColumnRole::AnalysisTarget => "analysis",
            ColumnRole::MarPredictor => "mar",
            ColumnRole::Auxiliary => "auxiliary",
        };
        f.write_str(s)
    }
}

/// Ordered, duplicate-free list of column indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnSubset(Vec<usize>);

impl ColumnSubset {
    pub fn new(indices: Vec<usize>, ncols: usize) -> Result<Self> {
        let mut seen = vec![false; ncols];
        for &i in &indices {
            if i >= ncols {
                return Err(Error::invalid(format!(
                    "column index {i} out of range for {ncols} columns"
                )));
            }
            if seen[i] {
                return Err(Error::invalid(format!("duplicate column index {i}")));
            }
            seen[i] = true;
        }
        Ok(ColumnSubset(indices))
    }

    /// All columns except `excluded`.
    pub fn complement(excluded: &[usize], ncols: usize) -> Self {
        ColumnSubset((0..ncols).filter(|j| !excluded.contains(j)).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Copies the selected columns of `m` into a new matrix.
    pub fn select(&self, m: &Matrix) -> Matrix {
        select_columns(m, &self.0)
    }
}

pub(crate) fn select_columns(m: &Matrix, cols: &[usize]) -> Matrix {
    Matrix::from_fn(m.nrows(), cols.len(), |i, k| m[(i, cols[k])])
}

pub(crate) fn select_rows(m: &Matrix, rows: &[usize]) -> Matrix {
    Matrix::from_fn(rows.len(), m.ncols(), |i, k| m[(rows[i], k)])
}

/// An n x p dataset with missing cells.
#[derive(Debug, Clone, PartialEq)]
pub struct IncompleteData {
    values: Matrix,
    mask: DMatrix<bool>,
    column_names: Vec<String>,
    roles: Vec<ColumnRole>,
}

impl IncompleteData {
    /// Builds a dataset from raw values and a response mask (true = observed).
    /// Values under a false mask entry are replaced by [`MISSING`].
    pub fn new(
        mut values: Matrix,
        mask: DMatrix<bool>,
        column_names: Vec<String>,
        roles: Vec<ColumnRole>,
    ) -> Result<Self> {
        let (n, p) = values.shape();
        if mask.shape() != (n, p) {
            return Err(Error::shape(format!(
                "mask is {:?} but values are {:?}",
                mask.shape(),
                (n, p)
            )));
        }
        if n < 1 || p < 2 {
            return Err(Error::shape(format!(
                "need at least 1 row and 2 columns, got {n}x{p}"
            )));
        }
        if column_names.len() != p || roles.len() != p {
            return Err(Error::shape(format!(
                "{} names and {} roles for {p} columns",
                column_names.len(),
                roles.len()
            )));
        }
        for j in 0..p {
            let mut any = false;
            for i in 0..n {
                if mask[(i, j)] {
                    any = true;
                    if !values[(i, j)].is_finite() {
                        return Err(Error::NonFinite(format!(
                            "observed cell ({i}, {}) of column {:?}",
                            j, column_names[j]
                        )));
                    }
                } else {
                    values[(i, j)] = MISSING;
                }
            }
            if !any {
                return Err(Error::AllMissingColumn(column_names[j].clone()));
            }
        }
        Ok(IncompleteData {
            values,
            mask,
            column_names,
            roles,
        })
    }

    /// Fully observed dataset with default names `x1..xp` and auxiliary roles.
    pub fn from_complete(values: Matrix) -> Result<Self> {
        let (n, p) = values.shape();
        IncompleteData::new(
            values,
            DMatrix::from_element(n, p, true),
            default_names(p),
            vec![ColumnRole::Auxiliary; p],
        )
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn mask(&self) -> &DMatrix<bool> {
        &self.mask
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn roles(&self) -> &[ColumnRole] {
        &self.roles
    }

    pub fn is_observed(&self, row: usize, col: usize) -> bool {
        self.mask[(row, col)]
    }

    pub fn with_roles(mut self, roles: Vec<ColumnRole>) -> Result<Self> {
        if roles.len() != self.ncols() {
            return Err(Error::shape(format!(
                "{} roles for {} columns",
                roles.len(),
                self.ncols()
            )));
        }
        self.roles = roles;
        Ok(self)
    }

    pub fn with_column_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.ncols() {
            return Err(Error::shape(format!(
                "{} names for {} columns",
                names.len(),
                self.ncols()
            )));
        }
        self.column_names = names;
        Ok(self)
    }

    /// Same mask, names and roles over a different set of underlying values.
    /// Used to swap in a coarsened copy of data that was amputed in continuous form.
    pub fn with_values(&self, values: Matrix) -> Result<Self> {
        IncompleteData::new(
            values,
            self.mask.clone(),
            self.column_names.clone(),
            self.roles.clone(),
        )
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    pub fn columns_with_role(&self, role: ColumnRole) -> Vec<usize> {
        (0..self.ncols()).filter(|&j| self.roles[j] == role).collect()
    }

    pub fn observed_rows(&self, col: usize) -> Vec<usize> {
        (0..self.nrows()).filter(|&i| self.mask[(i, col)]).collect()
    }

    pub fn missing_rows(&self, col: usize) -> Vec<usize> {
        (0..self.nrows()).filter(|&i| !self.mask[(i, col)]).collect()
    }

    pub fn missing_count(&self, col: usize) -> usize {
        self.mask.column(col).iter().filter(|&&m| !m).count()
    }

    /// Columns with at least one missing cell, ascending.
    pub fn incomplete_columns(&self) -> Vec<usize> {
        (0..self.ncols())
            .filter(|&j| self.missing_count(j) > 0)
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.mask.iter().all(|&m| m)
    }

    /// Fraction of observed cells per column.
    pub fn response_proportions(&self) -> Vec<f64> {
        let n = self.nrows() as f64;
        (0..self.ncols())
            .map(|j| (self.nrows() - self.missing_count(j)) as f64 / n)
            .collect()
    }

    /// Rows with no missing cells, in original order.
    pub fn complete_case_rows(&self) -> Vec<usize> {
        (0..self.nrows())
            .filter(|&i| self.mask.row(i).iter().all(|&m| m))
            .collect()
    }

    /// Restricts the dataset to `cols`, keeping names and roles.
    pub fn select_columns(&self, cols: &ColumnSubset) -> Result<Self> {
        let idx = cols.indices();
        IncompleteData::new(
            select_columns(&self.values, idx),
            DMatrix::from_fn(self.nrows(), idx.len(), |i, k| self.mask[(i, idx[k])]),
            idx.iter().map(|&j| self.column_names[j].clone()).collect(),
            idx.iter().map(|&j| self.roles[j]).collect(),
        )
    }

    /// Checks that `completion` is finite everywhere and equals the observed
    /// values of this dataset cell for cell.
    pub fn agrees_with(&self, completion: &Matrix) -> bool {
        completion.shape() == self.values.shape()
            && completion.iter().all(|v| v.is_finite())
            && self
                .mask
                .iter()
                .zip(self.values.iter().zip(completion.iter()))
                .all(|(&obs, (a, b))| !obs || a.to_bits() == b.to_bits())
    }

    pub fn load_csv(path: impl AsRef<Path>, na_token: &str) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::read_csv(file, na_token)
    }

    pub fn read_csv<R: Read>(reader: R, na_token: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(reader);
        let header = rdr.headers().map_err(|e| Error::Csv(e.to_string()))?.clone();
        let names: Vec<String> = header.iter().map(|s| s.trim().to_string()).collect();
        if names.is_empty() || (names.len() == 1 && names[0].is_empty()) {
            return Err(Error::EmptyInput("no header row".into()));
        }
        let p = names.len();
        let mut cells: Vec<f64> = Vec::new();
        let mut mask: Vec<bool> = Vec::new();
        let mut n = 0usize;
        for (r, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::Csv(e.to_string()))?;
            let row = r + 1;
            if record.len() != p {
                return Err(Error::RaggedRow {
                    row,
                    expected: p,
                    found: record.len(),
                });
            }
            for (c, field) in record.iter().enumerate() {
                if field == na_token {
                    cells.push(MISSING);
                    mask.push(false);
                    continue;
                }
                let v: f64 = field.trim().parse().map_err(|_| Error::ParseCell {
                    row,
                    col: c + 1,
                    text: field.to_string(),
                })?;
                if !v.is_finite() {
                    return Err(Error::ParseCell {
                        row,
                        col: c + 1,
                        text: field.to_string(),
                    });
                }
                cells.push(v);
                mask.push(true);
            }
            n += 1;
        }
        if n == 0 {
            return Err(Error::EmptyInput("no data rows".into()));
        }
        let values = Matrix::from_row_slice(n, p, &cells);
        let mask = DMatrix::from_row_slice(n, p, &mask);
        IncompleteData::new(values, mask, names, vec![ColumnRole::Auxiliary; p])
    }

    pub fn write_csv<W: Write>(&self, writer: W, na_token: &str) -> Result<()> {
        write_matrix_csv(writer, &self.column_names, &self.values, Some(&self.mask), na_token)
    }

    pub fn save_csv(&self, path: impl AsRef<Path>, na_token: &str) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.write_csv(std::io::BufWriter::new(file), na_token)
    }
}

pub fn default_names(p: usize) -> Vec<String> {
    (1..=p).map(|j| format!("x{j}")).collect()
}

/// Writes a matrix with a header row. `{}` formatting of f64 is the shortest
/// representation that parses back to the same bits.
pub fn write_matrix_csv<W: Write>(
    writer: W,
    names: &[String],
    values: &Matrix,
    mask: Option<&DMatrix<bool>>,
    na_token: &str,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(names).map_err(|e| Error::Csv(e.to_string()))?;
    let mut row = Vec::with_capacity(values.ncols());
    for i in 0..values.nrows() {
        row.clear();
        for j in 0..values.ncols() {
            let observed = mask.map_or(true, |m| m[(i, j)]);
            if observed {
                row.push(format!("{}", values[(i, j)]));
            } else {
                row.push(na_token.to_string());
            }
        }
        w.write_record(&row).map_err(|e| Error::Csv(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(())
}
