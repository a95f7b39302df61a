//! Jurisdiction registry: the ordered list of codes every matrix is keyed by.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use crate::ingest::IngestError;

/// Registry CSV shipped with the crate (165 jurisdictions).
pub const BUILTIN_REGISTRY_CSV: &str = include_str!("../data/jurisdictions.csv");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Jurisdiction {
    pub code: String,
    pub name: String,
}

/// Ordered set of jurisdictions. The id of entry `k` is `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JurisdictionRegistry {
    entries: Vec<Jurisdiction>,
    index: HashMap<String, usize>,
}

impl JurisdictionRegistry {
    /// Builds a registry from `(code, name)` pairs, rejecting duplicates and bad codes.
    pub fn from_entries<I>(entries: I) -> Result<Self, IngestError>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut out = Vec::new();
        let mut index = HashMap::new();
        for (k, (code, name)) in entries.into_iter().enumerate() {
            // header is line 1
            let line = k as u64 + 2;
            check_code(&code, line)?;
            if let Some(&first) = index.get(&code) {
                return Err(IngestError::DuplicateCode {
                    code,
                    first_line: first as u64 + 2,
                    second_line: line,
                });
            }
            index.insert(code.clone(), k);
            out.push(Jurisdiction { code, name });
        }
        if out.is_empty() {
            return Err(IngestError::EmptyRegistry);
        }
        Ok(Self { entries: out, index })
    }

    /// Codes `J000`, `J001`, ... for synthetic runs.
    pub fn synthetic(n: usize) -> Self {
        let width = n.saturating_sub(1).to_string().len().max(2);
        Self::from_entries((0..n).map(|i| (format!("J{i:0width$}"), format!("Synthetic {i}"))))
            .expect("synthetic codes are unique")
    }

    pub fn builtin() -> Self {
        parse_registry(BUILTIN_REGISTRY_CSV.as_bytes()).expect("shipped registry is valid")
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn id(&self, code: &str) -> Option<usize> {
        self.index.get(code).copied()
    }

    pub fn code(&self, id: usize) -> &str {
        &self.entries[id].code
    }

    pub fn name(&self, id: usize) -> &str {
        &self.entries[id].name
    }

    pub fn entries(&self) -> &[Jurisdiction] {
        &self.entries
    }

    pub fn codes(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.code.as_str())
    }

    /// Writes the registry back out in its CSV form.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<(), IngestError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
        w.write_record(["code", "name"])?;
        for e in &self.entries {
            w.write_record([e.code.as_str(), e.name.as_str()])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_code(code: &str, line: u64) -> Result<(), IngestError> {
    if code.is_empty() || code.chars().any(char::is_whitespace) || !code.is_ascii() {
        return Err(IngestError::InvalidCode { code: code.to_string(), line });
    }
    Ok(())
}

/// Reads a `code,name` registry CSV from disk.
pub fn load_registry(path: impl AsRef<Path>) -> Result<JurisdictionRegistry, IngestError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| IngestError::io(path, e))?;
    parse_registry(file)
}

pub fn parse_registry<R: Read>(reader: R) -> Result<JurisdictionRegistry, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(reader);
    let mut rows = Vec::new();
    let mut saw_header = false;
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        if !saw_header {
            let header: Vec<&str> = rec.iter().map(str::trim).collect();
            let header_ok = header.len() == 2
                && header[0].trim_start_matches('\u{feff}') == "code"
                && header[1] == "name";
            if !header_ok {
                return Err(IngestError::BadHeader {
                    line,
                    expected: "code,name".into(),
                    found: header.join(","),
                });
            }
            saw_header = true;
            continue;
        }
        if rec.len() != 2 {
            return Err(IngestError::RowLength { line, expected: 2, found: rec.len() });
        }
        rows.push((line, rec[0].trim().to_string(), rec[1].trim().to_string()));
    }
    // keep original line numbers in duplicate errors even when blank lines were skipped
    let mut index: HashMap<&str, u64> = HashMap::new();
    for (line, code, _) in &rows {
        check_code(code, *line)?;
        if let Some(&first_line) = index.get(code.as_str()) {
            return Err(IngestError::DuplicateCode { code: code.clone(), first_line, second_line: *line });
        }
        index.insert(code, *line);
    }
    JurisdictionRegistry::from_entries(rows.into_iter().map(|(_, c, n)| (c, n)))
}
