//! Rate-matrix ingestion and validation.
//!
//! A matrix file is read in two steps. [`read_matrix_draft`] resolves the
//! structure (header, row codes) and fails hard on anything it cannot map onto
//! the registry. Cell-level problems are collected by [`validate`] into a
//! [`ValidationReport`]; [`MatrixDraft::finish`] turns a clean draft into a
//! [`RateMatrix`]. [`parse_rate_matrix`] runs all three.

use std::fmt;
use std::io::Read;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::rate::{IncomeType, Rate, RateParseError};
use crate::registry::JurisdictionRegistry;

/// Header token of the first matrix column.
pub const MATRIX_CORNER: &str = "source\\dest";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("write: {0}")]
    Write(#[from] std::io::Error),
    #[error("empty registry")]
    EmptyRegistry,
    #[error("duplicate code `{code}` on lines {first_line} and {second_line}")]
    DuplicateCode { code: String, first_line: u64, second_line: u64 },
    #[error("line {line}: invalid code `{code}` (must be non-empty ASCII without whitespace)")]
    InvalidCode { code: String, line: u64 },
    #[error("line {line}: expected header `{expected}`, found `{found}`")]
    BadHeader { line: u64, expected: String, found: String },
    #[error("line {line}: expected {expected} fields, found {found}")]
    RowLength { line: u64, expected: usize, found: usize },
    #[error("line {line}, column {column}: unknown code `{code}`")]
    UnknownCode { code: String, line: u64, column: u64 },
    #[error("empty matrix file")]
    EmptyMatrix,
    #[error("matrix has {matrix} vertices but registry has {registry}")]
    SizeMismatch { matrix: usize, registry: usize },
    #[error("rate matrix rejected: {0}")]
    Rejected(ValidationReport),
    #[error("({row}, {column}): rate {rate} outside 0..=100")]
    OutOfRange { row: usize, column: usize, rate: Rate },
    #[error("synthetic matrices need n >= 2, got {0}")]
    TooSmall(usize),
}

impl IngestError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        IngestError::Io { path: path.to_path_buf(), source }
    }
}

/// Complete off-diagonal rate matrix for one income type.
///
/// Diagonal cells are not stored; [`RateMatrix::get`] returns `None` for them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateMatrix {
    income: IncomeType,
    n: usize,
    // row-major, diagonal skipped: n * (n - 1) cells
    rates: Vec<Rate>,
}

impl RateMatrix {
    /// Builds a matrix from a cell function evaluated for every `i != j`.
    pub fn from_fn<F>(n: usize, income: IncomeType, mut f: F) -> Result<Self, IngestError>
    where
        F: FnMut(usize, usize) -> Rate,
    {
        let mut rates = Vec::with_capacity(n * n.saturating_sub(1));
        for i in 0..n {
            for j in (0..n).filter(|&j| j != i) {
                let rate = f(i, j);
                if !rate.is_cell_rate() {
                    return Err(IngestError::OutOfRange { row: i, column: j, rate });
                }
                rates.push(rate);
            }
        }
        Ok(Self { income, n, rates })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn income(&self) -> IncomeType {
        self.income
    }

    pub fn with_income(mut self, income: IncomeType) -> Self {
        self.income = income;
        self
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        i * (self.n - 1) + if j < i { j } else { j - 1 }
    }

    pub fn get(&self, i: usize, j: usize) -> Option<Rate> {
        (i != j && i < self.n && j < self.n).then(|| self.rates[self.slot(i, j)])
    }

    /// Rate for an off-diagonal cell. Panics on the diagonal.
    pub fn rate(&self, i: usize, j: usize) -> Rate {
        assert_ne!(i, j, "diagonal cells are not part of a rate matrix");
        self.rates[self.slot(i, j)]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, self.income, |i, j| self.rate(j, i)).expect("cells already in range")
    }

    /// Iterates `(source, dest, rate)` over every off-diagonal cell, row-major.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, Rate)> + '_ {
        (0..self.n).flat_map(move |i| (0..self.n).filter(move |&j| j != i).map(move |j| (i, j, self.rate(i, j))))
    }

    /// Writes the matrix in registry order with empty diagonal cells.
    pub fn write_csv<W: std::io::Write>(&self, registry: &JurisdictionRegistry, writer: W) -> Result<(), IngestError> {
        if registry.len() != self.n {
            return Err(IngestError::SizeMismatch { matrix: self.n, registry: registry.len() });
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
        let mut header = vec![MATRIX_CORNER.to_string()];
        header.extend(registry.codes().map(str::to_string));
        w.write_record(&header)?;
        for i in 0..self.n {
            let mut row = vec![registry.code(i).to_string()];
            row.extend((0..self.n).map(|j| self.get(i, j).map(|r| r.to_string()).unwrap_or_default()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Position of a problem in the source file, 1-based. Either part may be
/// unknown when the row or column is missing from the file altogether.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Location {
    pub line: Option<u64>,
    pub column: Option<u64>,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "line {l}, column {c}"),
            (Some(l), None) => write!(f, "line {l}"),
            (None, Some(c)) => write!(f, "column {c}"),
            (None, None) => f.write_str("file"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub location: Location,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

/// Problems found in a matrix draft. Empty `errors` means the matrix is accepted.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub errors: Vec<Issue>,
    pub warnings: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_accepted(&self) -> bool {
        self.errors.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.errors.first() {
            Some(first) if self.errors.len() == 1 => write!(f, "{first}"),
            Some(first) => write!(f, "{first} (and {} more errors)", self.errors.len() - 1),
            None => write!(f, "no errors, {} warnings", self.warnings.len()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum CellEntry {
    /// The row or column never appeared in the file, or the row was short.
    Absent,
    Empty,
    Value(Rate),
    Invalid { raw: String, reason: String },
}

/// A matrix as read from disk, before cell-level validation.
#[derive(Debug, Clone)]
pub struct MatrixDraft {
    income: IncomeType,
    n: usize,
    cells: Vec<CellEntry>,
    row_lines: Vec<Option<u64>>,
    col_numbers: Vec<Option<u64>>,
}

impl MatrixDraft {
    /// Draft view of an already complete matrix; validating it only yields warnings.
    pub fn from_matrix(matrix: &RateMatrix) -> Self {
        let n = matrix.n();
        let cells = (0..n * n)
            .map(|k| match matrix.get(k / n, k % n) {
                Some(r) => CellEntry::Value(r),
                None => CellEntry::Empty,
            })
            .collect();
        Self {
            income: matrix.income(),
            n,
            cells,
            row_lines: (0..n).map(|i| Some(i as u64 + 2)).collect(),
            col_numbers: (0..n).map(|j| Some(j as u64 + 2)).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Drops the cell at `(i, j)` as if it had been left out of the file.
    pub fn clear_cell(&mut self, i: usize, j: usize) {
        self.cells[i * self.n + j] = CellEntry::Absent;
    }

    fn loc(&self, i: usize, j: usize) -> Location {
        Location { line: self.row_lines[i], column: self.col_numbers[j] }
    }

    /// Converts into a matrix if the draft validates cleanly.
    pub fn finish(self, registry: &JurisdictionRegistry) -> Result<RateMatrix, IngestError> {
        let report = validate(&self, registry);
        if !report.is_accepted() {
            return Err(IngestError::Rejected(report));
        }
        let n = self.n;
        RateMatrix::from_fn(n, self.income, |i, j| match self.cells[i * n + j] {
            CellEntry::Value(r) => r,
            _ => unreachable!("validated draft has every off-diagonal value"),
        })
    }
}

/// Reads the structure of a matrix CSV and maps rows/columns onto registry ids.
pub fn read_matrix_draft<R: Read>(
    reader: R,
    registry: &JurisdictionRegistry,
    income: IncomeType,
) -> Result<MatrixDraft, IngestError> {
    let n = registry.len();
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(reader);
    let mut records = rdr.records();

    let header = loop {
        match records.next() {
            None => return Err(IngestError::EmptyMatrix),
            Some(rec) => {
                let rec = rec?;
                if !rec.iter().all(|f| f.trim().is_empty()) {
                    break rec;
                }
            }
        }
    };
    let header_line = header.position().map_or(1, |p| p.line());
    let corner = header.get(0).unwrap_or("").trim().trim_start_matches('\u{feff}');
    if corner != MATRIX_CORNER {
        return Err(IngestError::BadHeader {
            line: header_line,
            expected: format!("{MATRIX_CORNER},<code>,..."),
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }

    // file column index (0-based, excluding corner) -> registry id
    let mut col_ids = Vec::with_capacity(header.len().saturating_sub(1));
    let mut col_numbers = vec![None; n];
    for (k, code) in header.iter().enumerate().skip(1) {
        let code = code.trim();
        let column = k as u64 + 1;
        let id = registry.id(code).ok_or_else(|| IngestError::UnknownCode {
            code: code.to_string(),
            line: header_line,
            column,
        })?;
        if let Some(first) = col_numbers[id] {
            return Err(IngestError::BadHeader {
                line: header_line,
                expected: "each code once".into(),
                found: format!("`{code}` in columns {first} and {column}"),
            });
        }
        col_numbers[id] = Some(column);
        col_ids.push(id);
    }

    let mut cells = vec![CellEntry::Absent; n * n];
    let mut row_lines = vec![None; n];
    for rec in records {
        let rec = rec?;
        if rec.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() > col_ids.len() + 1 {
            return Err(IngestError::RowLength { line, expected: col_ids.len() + 1, found: rec.len() });
        }
        let code = rec[0].trim();
        let row = registry.id(code).ok_or_else(|| IngestError::UnknownCode {
            code: code.to_string(),
            line,
            column: 1,
        })?;
        if let Some(first_line) = row_lines[row] {
            return Err(IngestError::DuplicateCode { code: code.to_string(), first_line, second_line: line });
        }
        row_lines[row] = Some(line);
        for (k, field) in rec.iter().enumerate().skip(1) {
            let col = col_ids[k - 1];
            let field = field.trim();
            cells[row * n + col] = if field.is_empty() {
                CellEntry::Empty
            } else {
                match field.parse::<Rate>() {
                    Ok(r) if r.is_cell_rate() => CellEntry::Value(r),
                    Ok(_) => CellEntry::Invalid { raw: field.to_string(), reason: "rate above 100".into() },
                    Err(RateParseError::Negative(_)) => {
                        CellEntry::Invalid { raw: field.to_string(), reason: "negative rate".into() }
                    }
                    Err(e) => CellEntry::Invalid { raw: field.to_string(), reason: e.to_string() },
                }
            };
        }
    }

    Ok(MatrixDraft { income, n, cells, row_lines, col_numbers })
}

/// Collects every cell-level error and data-quality warning in a draft.
pub fn validate(draft: &MatrixDraft, registry: &JurisdictionRegistry) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = draft.n;
    if registry.len() != n {
        report.errors.push(Issue {
            location: Location::default(),
            message: format!("matrix has {n} vertices but registry has {}", registry.len()),
        });
        return report;
    }
    for (id, line) in draft.row_lines.iter().enumerate() {
        if line.is_none() {
            report.errors.push(Issue {
                location: Location::default(),
                message: format!("row for `{}` missing", registry.code(id)),
            });
        }
    }
    for (id, col) in draft.col_numbers.iter().enumerate() {
        if col.is_none() {
            report.errors.push(Issue {
                location: Location::default(),
                message: format!("column for `{}` missing", registry.code(id)),
            });
        }
    }
    for i in 0..n {
        if draft.row_lines[i].is_none() {
            continue;
        }
        let mut all_zero = true;
        for j in 0..n {
            let cell = &draft.cells[i * n + j];
            let location = draft.loc(i, j);
            let cell_name = || format!("{}->{}", registry.code(i), registry.code(j));
            if i == j {
                if !matches!(cell, CellEntry::Empty | CellEntry::Absent) {
                    report.errors.push(Issue {
                        location,
                        message: format!("diagonal cell {} must be empty", cell_name()),
                    });
                }
                continue;
            }
            match cell {
                CellEntry::Value(r) => all_zero &= *r == Rate::ZERO,
                CellEntry::Absent if draft.col_numbers[j].is_none() => all_zero = false,
                CellEntry::Absent | CellEntry::Empty => {
                    all_zero = false;
                    report.errors.push(Issue { location, message: format!("missing rate for {}", cell_name()) });
                }
                CellEntry::Invalid { raw, reason } => {
                    all_zero = false;
                    report.errors.push(Issue {
                        location,
                        message: format!("invalid rate `{raw}` for {}: {reason}", cell_name()),
                    });
                }
            }
        }
        if all_zero && n > 1 {
            report.warnings.push(Issue {
                location: Location { line: draft.row_lines[i], column: None },
                message: format!("all rates zero for source {} (possible zero-tax jurisdiction)", registry.code(i)),
            });
        }
    }
    report
}

pub fn parse_rate_matrix_from_reader<R: Read>(
    reader: R,
    registry: &JurisdictionRegistry,
    income: IncomeType,
) -> Result<RateMatrix, IngestError> {
    read_matrix_draft(reader, registry, income)?.finish(registry)
}

/// Reads, validates and converts a matrix CSV.
pub fn parse_rate_matrix(
    path: impl AsRef<Path>,
    registry: &JurisdictionRegistry,
    income: IncomeType,
) -> Result<RateMatrix, IngestError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| IngestError::io(path, e))?;
    parse_rate_matrix_from_reader(file, registry, income)
}
