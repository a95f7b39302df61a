use std::path::{Path, PathBuf};

use conduit_core::centrality::normalize_thresholds;
use conduit_core::ingest::{read_matrix_draft, MatrixDraft};
use conduit_core::registry::parse_registry;
use conduit_core::{AffinityMode, IncomeType, JurisdictionRegistry, LouvainConfig, Rate, RateMatrix};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Settings shared by every subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub registry: Option<PathBuf>,
    pub dividends: Option<PathBuf>,
    pub interest: Option<PathBuf>,
    pub royalties: Option<PathBuf>,
    /// Highest first, no duplicates.
    pub thresholds: Vec<Rate>,
    pub show_sanction: bool,
    pub mode: AffinityMode,
    pub seed: u64,
    // the output directory is left out of the manifest so that runs into
    // different directories stay byte-identical
    #[serde(skip)]
    pub out: PathBuf,
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    All,
    Csv,
    Json,
    Graphml,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::All | Format::Csv)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::All | Format::Json)
    }

    pub fn graphml(self) -> bool {
        matches!(self, Format::All | Format::Graphml)
    }
}

pub fn parse_thresholds(s: &str) -> Result<Vec<Rate>, String> {
    let ts = s
        .split(',')
        .map(|t| t.trim().parse::<Rate>().map_err(|e| format!("threshold `{}`: {e}", t.trim())))
        .collect::<Result<Vec<_>, _>>()?;
    if ts.is_empty() {
        return Err("empty threshold list".into());
    }
    Ok(normalize_thresholds(&ts))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// An input file's identity as recorded in the manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputRecord {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

fn read(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::io(path, e))
}

/// Registry and matrices read for one invocation.
pub struct Inputs {
    pub registry: JurisdictionRegistry,
    pub records: Vec<InputRecord>,
    raw: Vec<(IncomeType, PathBuf, Vec<u8>)>,
}

impl Inputs {
    pub fn load(config: &RunConfig) -> CliResult<Self> {
        let mut records = Vec::new();
        let registry = match &config.registry {
            Some(path) => {
                let bytes = read(path)?;
                records.push(InputRecord {
                    role: "registry".into(),
                    path: path.display().to_string(),
                    sha256: sha256_hex(&bytes),
                });
                parse_registry(bytes.as_slice()).map_err(|e| CliError::ingest(path, e))?
            }
            None => JurisdictionRegistry::builtin(),
        };
        let mut raw = Vec::new();
        for income in IncomeType::ALL {
            if let Some(path) = config.matrix_path(income) {
                let bytes = read(path)?;
                records.push(InputRecord {
                    role: format!("matrix-{income}"),
                    path: path.display().to_string(),
                    sha256: sha256_hex(&bytes),
                });
                raw.push((income, path.clone(), bytes));
            }
        }
        Ok(Inputs { registry, records, raw })
    }

    /// Income types to process: the one asked for, or every supplied matrix.
    pub fn incomes(&self, only: Option<IncomeType>) -> CliResult<Vec<IncomeType>> {
        let supplied: Vec<IncomeType> = self.raw.iter().map(|(i, _, _)| *i).collect();
        match only {
            Some(i) if supplied.contains(&i) => Ok(vec![i]),
            Some(i) => Err(CliError::Input(format!("no {i} matrix given; pass --matrix-{i}"))),
            None if supplied.is_empty() => Err(CliError::Input(
                "no rate matrix given; pass --matrix-dividends, --matrix-interest or --matrix-royalties".into(),
            )),
            None => Ok(supplied),
        }
    }

    pub fn path(&self, income: IncomeType) -> &Path {
        &self.raw.iter().find(|(i, _, _)| *i == income).expect("income was checked").1
    }

    pub fn draft(&self, income: IncomeType) -> CliResult<MatrixDraft> {
        let (_, path, bytes) = self.raw.iter().find(|(i, _, _)| *i == income).expect("income was checked");
        read_matrix_draft(bytes.as_slice(), &self.registry, income).map_err(|e| CliError::ingest(path, e))
    }

    pub fn matrix(&self, income: IncomeType) -> CliResult<RateMatrix> {
        let draft = self.draft(income)?;
        draft.finish(&self.registry).map_err(|e| CliError::ingest(self.path(income), e))
    }
}

impl RunConfig {
    pub fn matrix_path(&self, income: IncomeType) -> Option<&PathBuf> {
        match income {
            IncomeType::Dividends => self.dividends.as_ref(),
            IncomeType::Interest => self.interest.as_ref(),
            IncomeType::Royalties => self.royalties.as_ref(),
        }
    }

    pub fn louvain(&self) -> LouvainConfig {
        LouvainConfig::with_seed(self.seed)
    }
}
