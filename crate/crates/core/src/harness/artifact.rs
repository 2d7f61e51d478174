use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

use super::config::OutputFormat;

/// Bumped on any change to the serialized shape of artifacts or summaries.
pub const SCHEMA_VERSION: u32 = 1;

/// Value of a cell whose sector cannot occur for that chain length.
pub const FORBIDDEN: &str = "/";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TableId {
    #[serde(rename = "xxx-decomp")]
    XxxDecomp,
    #[serde(rename = "xxz-decomp")]
    XxzDecomp,
    #[serde(rename = "xxx-recovery")]
    XxxRecovery,
    #[serde(rename = "xxz-recovery")]
    XxzRecovery,
    #[serde(rename = "accidental-predict")]
    AccidentalPredict,
    #[serde(rename = "accidental-ranks")]
    AccidentalRanks,
    #[serde(rename = "accidental-verdicts")]
    AccidentalVerdicts,
}

impl TableId {
    pub const ALL: [TableId; 7] = [
        TableId::XxxDecomp,
        TableId::XxzDecomp,
        TableId::XxxRecovery,
        TableId::XxzRecovery,
        TableId::AccidentalPredict,
        TableId::AccidentalRanks,
        TableId::AccidentalVerdicts,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TableId::XxxDecomp => "xxx-decomp",
            TableId::XxzDecomp => "xxz-decomp",
            TableId::XxxRecovery => "xxx-recovery",
            TableId::XxzRecovery => "xxz-recovery",
            TableId::AccidentalPredict => "accidental-predict",
            TableId::AccidentalRanks => "accidental-ranks",
            TableId::AccidentalVerdicts => "accidental-verdicts",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            TableId::XxxDecomp => "Irreducible subspaces of the XXX symmetry group (ν_S per total spin S)",
            TableId::XxzDecomp => "Irreducible subspaces of the XXZ symmetry group (ν_p per irrep)",
            TableId::XxxRecovery => "XXX recovery from one eigenstate, by total spin S",
            TableId::XxzRecovery => "XXZ recovery from one eigenstate, by |S^z|",
            TableId::AccidentalPredict => "Necessary condition for recovering an XXX instance with the XXZ ansatz",
            TableId::AccidentalRanks => "Observed ranks of Q for XXX instances under the XXZ ansatz",
            TableId::AccidentalVerdicts => "Observed recovery of XXX instances under the XXZ ansatz",
        }
    }

    /// Header of the column axis.
    pub fn axis(self) -> &'static str {
        match self {
            TableId::XxzDecomp => "irrep",
            TableId::XxzRecovery => "|S^z|",
            _ => "S",
        }
    }

    /// Smallest chain length with a row in the table.
    pub fn min_sites(self) -> usize {
        match self {
            TableId::XxxRecovery => 3,
            _ => 2,
        }
    }

    pub fn is_decomposition(self) -> bool {
        matches!(self, TableId::XxxDecomp | TableId::XxzDecomp)
    }
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TableId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TableId::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Parse {
                kind: "table id",
                value: s.to_string(),
            })
    }
}

/// What is needed to regenerate any cell of an artifact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub trials: usize,
    pub tolerances: Tolerances,
    pub version: String,
}

impl Provenance {
    pub fn new(seed: u64, trials: usize, tolerances: Tolerances) -> Self {
        Self {
            seed,
            trials,
            tolerances,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub sites: usize,
    pub sector: String,
    pub value: String,
}

/// A regenerated table: one row per chain length, one column per sector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableArtifact {
    pub schema_version: u32,
    pub id: TableId,
    pub title: String,
    pub axis: String,
    pub columns: Vec<String>,
    pub rows: Vec<usize>,
    /// Row-major, `rows × columns`.
    pub cells: Vec<Cell>,
    /// Direct-sum expression per row (decomposition tables only).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub expressions: BTreeMap<usize, String>,
    pub provenance: Provenance,
}

impl TableArtifact {
    pub fn new(id: TableId, columns: Vec<String>, provenance: Provenance) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            id,
            title: id.title().to_string(),
            axis: id.axis().to_string(),
            columns,
            rows: Vec::new(),
            cells: Vec::new(),
            expressions: BTreeMap::new(),
            provenance,
        }
    }

    /// Appends a row; `value` is called once per column and may return
    /// `None` for a forbidden cell.
    pub fn push_row(&mut self, sites: usize, mut value: impl FnMut(&str) -> Option<String>) {
        self.rows.push(sites);
        for col in &self.columns {
            self.cells.push(Cell {
                sites,
                sector: col.clone(),
                value: value(col).unwrap_or_else(|| FORBIDDEN.to_string()),
            });
        }
    }

    pub fn cell(&self, sites: usize, sector: &str) -> Option<&Cell> {
        self.cells.iter().find(|c| c.sites == sites && c.sector == sector)
    }

    pub fn row(&self, sites: usize) -> Vec<&Cell> {
        self.cells.iter().filter(|c| c.sites == sites).collect()
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Json => to_json(self),
            OutputFormat::Csv => cells_to_csv(std::iter::once(self)),
            OutputFormat::Md => Ok(self.to_markdown()),
        }
    }

    /// GitHub-flavored markdown table in the layout `L × sector`.
    pub fn to_markdown(&self) -> String {
        let decomp = !self.expressions.is_empty();
        let mut header = format!("| L \\ {} |", self.axis);
        let mut rule = String::from("|---|");
        for c in &self.columns {
            header.push_str(&format!(" {c} |"));
            rule.push_str("---|");
        }
        if decomp {
            header.push_str(" decomposition |");
            rule.push_str("---|");
        }
        let mut out = format!("**{}** — {}\n\n{header}\n{rule}\n", self.id, self.title);
        for &l in &self.rows {
            let mut line = format!("| {l} |");
            for c in self.row(l) {
                line.push_str(&format!(" {} |", c.value));
            }
            if decomp {
                let e = self.expressions.get(&l).map(String::as_str).unwrap_or("");
                line.push_str(&format!(" 2^⊗{l} = {e} |"));
            }
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}

/// Pretty JSON with a trailing newline; stable for identical inputs.
pub fn to_json<S: Serialize>(value: &S) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// RFC 4180 CSV with one record per cell: `table,L,sector,value`.
pub fn cells_to_csv<'a>(tables: impl IntoIterator<Item = &'a TableArtifact>) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new());
    w.write_record(["table", "L", "sector", "value"])?;
    for t in tables {
        for c in &t.cells {
            w.write_record([t.id.name(), &c.sites.to_string(), &c.sector, &c.value])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}
