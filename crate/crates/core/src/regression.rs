//! Data ingestion and least-squares fits of intercept-augmented submodels.
//!
//! Every Bayes factor in this crate depends on the data only through the
//! ratio of residual sums of squares
//!
//! ```text
//! b_j0 = y'(I - H_j) y / y'(I - 11'/n) y
//! ```
//!
//! where `H_j` is the hat matrix of `[1 | X_j]`. Residuals are obtained from
//! Householder reflections; hat matrices are never formed.

use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Columns whose Householder pivot falls below this multiple of the largest
/// centered column norm in the fitted subset are treated as linearly
/// dependent.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Lower clamp applied to `b_j0` so that logarithms stay finite on perfect fits.
pub const MIN_BJ0: f64 = 1e-300;

/// A model `M_j`: the set of regressors (1-based, strictly increasing) that
/// enter alongside the always-present intercept. The empty set is `M_0`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct ModelSubset(Vec<usize>);

impl TryFrom<Vec<usize>> for ModelSubset {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        ModelSubset::new(v)
    }
}

impl From<ModelSubset> for Vec<usize> {
    fn from(s: ModelSubset) -> Self {
        s.0
    }
}

impl ModelSubset {
    /// Builds a subset from strictly increasing 1-based indices.
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.contains(&0) {
            return Err(Error::InvalidSubset("regressor indices are 1-based".into()));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSubset(format!(
                "indices must be strictly increasing, got {indices:?}"
            )));
        }
        Ok(Self(indices))
    }

    /// Sorts the indices first; duplicates are still rejected.
    pub fn from_unsorted(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        Self::new(indices)
    }

    pub fn null() -> Self {
        Self(Vec::new())
    }

    /// Bit `i` of `mask` selects regressor `i + 1`.
    pub fn from_mask(mask: u64) -> Self {
        Self((0..64).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect())
    }

    /// Inverse of [`ModelSubset::from_mask`]. Panics if an index exceeds 64.
    pub fn mask(&self) -> u64 {
        self.0.iter().fold(0u64, |m, &i| {
            assert!(i <= 64, "regressor index {i} does not fit in a 64-bit mask");
            m | 1 << (i - 1)
        })
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    /// Model dimension `j`: the number of non-intercept regressors.
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_null(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_subset_of(&self, other: &ModelSubset) -> bool {
        self.0.iter().all(|i| other.0.binary_search(i).is_ok())
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.binary_search(&index).is_ok()
    }

    /// Fails unless every index lies in `1..=k`.
    pub fn check_within(&self, k: usize) -> Result<()> {
        match self.0.last() {
            Some(&max) if max > k => Err(Error::DimensionMismatch(format!(
                "subset {self} refers to regressor {max} but only {k} exist"
            ))),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ModelSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (pos, i) in self.0.iter().enumerate() {
            if pos > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

/// Parses `"1,3,4"`; the empty string (or `"{}"`) is the null model.
impl FromStr for ModelSubset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().trim_start_matches('{').trim_end_matches('}').trim();
        if s.is_empty() {
            return Ok(Self::null());
        }
        let indices = s
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidSubset(format!("`{tok}` is not an index")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_unsorted(indices)
    }
}

/// Response vector and regressor columns. The intercept is implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    y: Vec<f64>,
    columns: Vec<Vec<f64>>,
    names: Vec<String>,
    centered_norms: Vec<f64>,
}

impl Dataset {
    /// Validates and assembles a dataset from column vectors.
    pub fn new(y: Vec<f64>, columns: Vec<Vec<f64>>, names: Vec<String>) -> Result<Self> {
        let n = y.len();
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        if names.len() != columns.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} names for {} regressor columns",
                names.len(),
                columns.len()
            )));
        }
        if let Some(row) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { row: row + 1, col: "y".into() });
        }
        for (col, name) in columns.iter().zip(&names) {
            if col.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "column `{name}` has {} rows, response has {n}",
                    col.len()
                )));
            }
            if let Some(row) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteValue { row: row + 1, col: name.clone() });
            }
            if col.iter().all(|&v| v == col[0]) {
                return Err(Error::ConstantRegressor(name.clone()));
            }
        }
        if n < 3 {
            return Err(Error::InsufficientDegreesOfFreedom { n, j: 0 });
        }
        let centered_norms = columns
            .iter()
            .map(|c| centered(c).iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect();
        Ok(Self { y, columns, names, centered_norms })
    }

    /// Like [`Dataset::new`] with names `x1..xk`.
    pub fn from_columns(y: Vec<f64>, columns: Vec<Vec<f64>>) -> Result<Self> {
        let names = (1..=columns.len()).map(|i| format!("x{i}")).collect();
        Self::new(y, columns, names)
    }

    /// Returns a copy with a different response and the same design.
    pub fn with_response(&self, y: Vec<f64>) -> Result<Self> {
        if y.len() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "response of length {} for a design with {} rows",
                y.len(),
                self.n()
            )));
        }
        if let Some(row) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { row: row + 1, col: "y".into() });
        }
        Ok(Self { y, ..self.clone() })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn k(&self) -> usize {
        self.columns.len()
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Regressor column by 1-based index.
    pub fn column(&self, index: usize) -> &[f64] {
        &self.columns[index - 1]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// `y'(I - 11'/n)y`, the residual sum of squares of `M_0`.
    pub fn null_sse(&self) -> f64 {
        centered(&self.y).iter().map(|v| v * v).sum()
    }

    fn pivot_tolerance(&self, subset: &ModelSubset) -> f64 {
        let largest = subset
            .indices()
            .iter()
            .map(|&i| self.centered_norms[i - 1])
            .fold(0.0, f64::max);
        RANK_TOLERANCE * largest
    }
}

/// Reads a comma-separated file with a header row. The column named `y` is
/// the response; every other column is a regressor, in file order.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let file = std::fs::File::open(path.as_ref())?;
    read_dataset(file)
}

/// [`load_dataset`] over any reader.
pub fn read_dataset<R: Read>(reader: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Malformed(e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    let y_pos = headers
        .iter()
        .position(|h| h == "y")
        .ok_or(Error::MissingResponseColumn)?;

    let mut values: Vec<Vec<f64>> = vec![Vec::new(); headers.len()];
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Malformed(e.to_string()))?;
        for (col, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::InvalidNumber {
                row: row + 1,
                col: headers[col].clone(),
                text: cell.to_owned(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFiniteValue { row: row + 1, col: headers[col].clone() });
            }
            values[col].push(v);
        }
    }
    let y = values[y_pos].clone();
    let mut names = Vec::with_capacity(headers.len() - 1);
    let mut columns = Vec::with_capacity(headers.len() - 1);
    for (col, (name, v)) in headers.into_iter().zip(values).enumerate() {
        if col != y_pos {
            names.push(name);
            columns.push(v);
        }
    }
    Dataset::new(y, columns, names)
}

/// Writes `y` then the regressors, with a header row, in a form
/// [`read_dataset`] reads back exactly.
pub fn write_dataset<W: std::io::Write>(dataset: &Dataset, writer: W) -> Result<()> {
    let io = |e: csv::Error| Error::Io(e.to_string());
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(std::iter::once("y").chain(dataset.names().iter().map(String::as_str))).map_err(io)?;
    for i in 0..dataset.n() {
        let row = std::iter::once(dataset.y()[i]).chain(dataset.columns().iter().map(|c| c[i]));
        w.write_record(row.map(|v| format!("{v:e}"))).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Residual sum of squares and its ratio to the null model's.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitSummary {
    pub sse: f64,
    pub sse0: f64,
    pub b_j0: f64,
}

/// `y'(I - H_j)y` for the intercept-augmented design `[1 | X_subset]`.
pub fn residual_sum(dataset: &Dataset, subset: &ModelSubset) -> Result<f64> {
    residual_of(dataset, dataset.y(), subset)
}

/// Residual sum of squares of an arbitrary response vector regressed on
/// `[1 | X_subset]` of `dataset`.
pub(crate) fn residual_of(dataset: &Dataset, response: &[f64], subset: &ModelSubset) -> Result<f64> {
    subset.check_within(dataset.k())?;
    let n = dataset.n();
    let j = subset.dim();
    if n <= j + 1 {
        return Err(Error::InsufficientDegreesOfFreedom { n, j });
    }
    let mut cols = Vec::with_capacity(j + 1);
    cols.push(vec![1.0; n]);
    cols.extend(subset.indices().iter().map(|&i| dataset.column(i).to_vec()));
    let mut rhs = response.to_vec();
    let diag = householder(&mut cols, &mut rhs);
    let tol = dataset.pivot_tolerance(subset);
    if diag[1..].iter().any(|&d| d <= tol) {
        return Err(Error::RankDeficient(subset.to_string()));
    }
    Ok(rhs[j + 1..].iter().map(|v| v * v).sum())
}

/// Computes `b_j0` for `subset`, clamped to `[MIN_BJ0, 1]`.
pub fn compute_bj0(dataset: &Dataset, subset: &ModelSubset) -> Result<FitSummary> {
    let sse0 = dataset.null_sse();
    check_response(dataset, sse0)?;
    if subset.is_null() {
        return Ok(FitSummary { sse: sse0, sse0, b_j0: 1.0 });
    }
    let sse = residual_sum(dataset, subset)?;
    Ok(FitSummary { sse, sse0, b_j0: (sse / sse0).clamp(MIN_BJ0, 1.0) })
}

fn check_response(dataset: &Dataset, sse0: f64) -> Result<()> {
    let scale: f64 = dataset.y().iter().map(|v| v * v).sum();
    if sse0 <= 1e-28 * scale || sse0 == 0.0 {
        return Err(Error::ConstantResponse);
    }
    Ok(())
}

/// Repeated fits of many subsets of one dataset.
///
/// The centered design is triangularised once (`Xc = QR`, `z = Q'yc`); a
/// subset `S` is then fitted by reducing the small matrix `R[:, S]` against
/// `z`, which costs `O(k j^2)` instead of `O(n j^2)`. Results agree with
/// [`residual_sum`] to rounding.
#[derive(Debug, Clone)]
pub struct SubsetFitter {
    n: usize,
    r_cols: Vec<Vec<f64>>,
    z: Vec<f64>,
    outside: f64,
    sse0: f64,
    centered_norms: Vec<f64>,
}

impl SubsetFitter {
    pub fn new(dataset: &Dataset) -> Result<Self> {
        let sse0 = dataset.null_sse();
        check_response(dataset, sse0)?;
        let mut cols: Vec<Vec<f64>> = dataset.columns().iter().map(|c| centered(c)).collect();
        let mut yc = centered(dataset.y());
        let steps = householder(&mut cols, &mut yc).len();
        let r_cols = cols.into_iter().map(|mut c| {
            c.truncate(steps);
            c
        });
        Ok(Self {
            n: dataset.n(),
            r_cols: r_cols.collect(),
            z: yc[..steps].to_vec(),
            outside: yc[steps..].iter().map(|v| v * v).sum(),
            sse0,
            centered_norms: dataset.centered_norms.clone(),
        })
    }

    pub fn k(&self) -> usize {
        self.r_cols.len()
    }

    pub fn sse0(&self) -> f64 {
        self.sse0
    }

    pub fn residual_sum(&self, subset: &ModelSubset) -> Result<f64> {
        subset.check_within(self.k())?;
        let j = subset.dim();
        if self.n <= j + 1 {
            return Err(Error::InsufficientDegreesOfFreedom { n: self.n, j });
        }
        if j == 0 {
            return Ok(self.sse0);
        }
        let rows = self.z.len();
        let mut cols: Vec<Vec<f64>> = subset.indices().iter().map(|&i| self.r_cols[i - 1].clone()).collect();
        let mut rhs = self.z.clone();
        let diag = householder(&mut cols, &mut rhs);
        let largest = subset
            .indices()
            .iter()
            .map(|&i| self.centered_norms[i - 1])
            .fold(0.0, f64::max);
        if diag.len() < j || diag.iter().any(|&d| d <= RANK_TOLERANCE * largest) {
            return Err(Error::RankDeficient(subset.to_string()));
        }
        let inside: f64 = rhs[j.min(rows)..].iter().map(|v| v * v).sum();
        Ok(self.outside + inside)
    }

    pub fn bj0(&self, subset: &ModelSubset) -> Result<FitSummary> {
        let sse = self.residual_sum(subset)?;
        let b_j0 = if subset.is_null() { 1.0 } else { (sse / self.sse0).clamp(MIN_BJ0, 1.0) };
        Ok(FitSummary { sse, sse0: self.sse0, b_j0 })
    }
}

/// Coefficients and noise level of the model that generated the data.
#[derive(Debug, Clone, PartialEq)]
pub struct TrueModel {
    pub subset: ModelSubset,
    /// Intercept first, then one coefficient per index of `subset`.
    pub beta: Vec<f64>,
    pub sigma: f64,
}

impl TrueModel {
    pub fn new(subset: ModelSubset, beta: Vec<f64>, sigma: f64) -> Result<Self> {
        if beta.len() != subset.dim() + 1 {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for a model of dimension {} (intercept first)",
                beta.len(),
                subset.dim()
            )));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::domain(format!("sigma must be positive, got {sigma}")));
        }
        Ok(Self { subset, beta, sigma })
    }

    /// `X_t beta_t` on the rows of `design`.
    pub fn mean(&self, design: &Dataset) -> Result<Vec<f64>> {
        self.subset.check_within(design.k())?;
        let mut mu = vec![self.beta[0]; design.n()];
        for (&idx, &coef) in self.subset.indices().iter().zip(&self.beta[1..]) {
            for (m, x) in mu.iter_mut().zip(design.column(idx)) {
                *m += coef * x;
            }
        }
        Ok(mu)
    }
}

/// Finite-sample pseudo-distance
/// `delta_n = beta_t' X_t'(I - H_j) X_t beta_t / (2 n sigma_t^2)`
/// between the true model and `other`, evaluated on the regressors of `design`.
pub fn pseudo_distance(design: &Dataset, truth: &TrueModel, other: &ModelSubset) -> Result<f64> {
    other.check_within(design.k())?;
    if *other == truth.subset {
        return Ok(0.0);
    }
    let mu = truth.mean(design)?;
    let rss = residual_of(design, &mu, other)?;
    Ok(rss / (2.0 * design.n() as f64 * truth.sigma * truth.sigma))
}

pub(crate) fn centered(v: &[f64]) -> Vec<f64> {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| x - mean).collect()
}

/// In-place Householder triangularisation of the column-major matrix `cols`
/// (every column of the same length `m`), applying the same reflections to
/// `rhs`. Returns `|R_ii|` for the `min(m, p)` processed columns; the upper
/// triangle of `R` is left in `cols[c][..=c]`.
fn householder(cols: &mut [Vec<f64>], rhs: &mut [f64]) -> Vec<f64> {
    let m = rhs.len();
    let steps = cols.len().min(m);
    let mut diag = Vec::with_capacity(steps);
    for c in 0..steps {
        let (head, tail) = cols.split_at_mut(c + 1);
        let col = &mut head[c];
        let alpha = col[c..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if alpha == 0.0 {
            diag.push(0.0);
            continue;
        }
        let beta = if col[c] >= 0.0 { -alpha } else { alpha };
        col[c] -= beta;
        let vnorm2: f64 = col[c..].iter().map(|v| v * v).sum();
        let v = &col[c..];
        let reflect = |target: &mut [f64]| {
            let dot: f64 = v.iter().zip(target.iter()).map(|(a, b)| a * b).sum();
            let s = 2.0 * dot / vnorm2;
            for (t, a) in target.iter_mut().zip(v) {
                *t -= s * a;
            }
        };
        for other in tail.iter_mut() {
            reflect(&mut other[c..]);
        }
        reflect(&mut rhs[c..]);
        col[c] = beta;
        for x in col[c + 1..].iter_mut() {
            *x = 0.0;
        }
        diag.push(alpha);
    }
    diag
}
