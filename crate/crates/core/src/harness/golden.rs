//! Reference tables for chain lengths 2 through 7. Columns run over
//! `S` (or `|S^z|`) = 0, 1/2, …, 7/2, except for the XXZ decomposition whose
//! columns are [`XXZ_DECOMP_COLUMNS`].

use super::artifact::TableId;

pub const SPIN_COLUMNS: [&str; 8] = ["0", "1/2", "1", "3/2", "2", "5/2", "3", "7/2"];

pub const XXZ_DECOMP_COLUMNS: [&str; 9] = [
    "1^{0,+}", "1^{0,-}", "2^{1/2}", "2^{1}", "2^{3/2}", "2^{2}", "2^{5/2}", "2^{3}", "2^{7/2}",
];

pub const MAX_GOLDEN_SITES: usize = 7;

const XXX_DECOMP: [(usize, &str); 6] = [
    (2, "1 / 1 / / / / /"),
    (3, "/ 2 / 1 / / / /"),
    (4, "2 / 3 / 1 / / /"),
    (5, "/ 5 / 4 / 1 / /"),
    (6, "5 / 9 / 5 / 1 /"),
    (7, "/ 14 / 14 / 6 / 1"),
];

const XXZ_DECOMP: [(usize, &str); 6] = [
    (2, "1 1 / 1 / / / / /"),
    (3, "/ / 3 / 1 / / / /"),
    (4, "3 3 / 4 / 1 / / /"),
    (5, "/ / 10 / 5 / 1 / /"),
    (6, "10 10 / 15 / 6 / 1 /"),
    (7, "/ / 35 / 21 / 7 / 1"),
];

const XXX_RECOVERY: [(usize, &str); 5] = [
    (3, "/ O / X / / / /"),
    (4, "X / O / X / / /"),
    (5, "/ O / O / X / /"),
    (6, "O / O / O / X /"),
    (7, "/ O / O / O / X"),
];

const XXZ_RECOVERY: [(usize, &str); 6] = [
    (2, "X / X / / / / /"),
    (3, "/ X / X / / / /"),
    (4, "X / X / X / / /"),
    (5, "/ O / X / X / /"),
    (6, "O / O / X / X /"),
    (7, "/ O / O / X / X"),
];

const ACCIDENTAL_PREDICT: [(usize, &str); 6] = [
    (2, "X / O / / / / /"),
    (3, "/ X / O / / / /"),
    (4, "X / O / O / / /"),
    (5, "/ O / O / O / /"),
    (6, "O / O / O / O /"),
    (7, "/ O / O / O / O"),
];

const ACCIDENTAL_RANKS: [(usize, &str); 6] = [
    (2, "1 / 1 / / / / /"),
    (3, "/ 3 / 1,3 / / / /"),
    (4, "3 / 3,4,6 / 1,3,4 / / /"),
    (5, "/ 8 / 5,8 / 1,5 / /"),
    (6, "10 / 10 / 6,10 / 1,5,6 /"),
    (7, "/ 12 / 12 / 7,12 / 1,7"),
];

const ACCIDENTAL_VERDICTS: [(usize, &str); 6] = [
    (2, "X / X / / / / /"),
    (3, "/ X / X / / / /"),
    (4, "X / OX / X / / /"),
    (5, "/ O / OX / X / /"),
    (6, "O / O / OX / X /"),
    (7, "/ O / O / OX / X"),
];

fn rows(id: TableId) -> &'static [(usize, &'static str)] {
    match id {
        TableId::XxxDecomp => &XXX_DECOMP,
        TableId::XxzDecomp => &XXZ_DECOMP,
        TableId::XxxRecovery => &XXX_RECOVERY,
        TableId::XxzRecovery => &XXZ_RECOVERY,
        TableId::AccidentalPredict => &ACCIDENTAL_PREDICT,
        TableId::AccidentalRanks => &ACCIDENTAL_RANKS,
        TableId::AccidentalVerdicts => &ACCIDENTAL_VERDICTS,
    }
}

fn columns(id: TableId) -> &'static [&'static str] {
    match id {
        TableId::XxzDecomp => &XXZ_DECOMP_COLUMNS,
        _ => &SPIN_COLUMNS,
    }
}

/// Reference value of one cell, or `None` when the table has no such cell.
pub fn golden_cell(id: TableId, sites: usize, sector: &str) -> Option<&'static str> {
    let col = columns(id).iter().position(|c| *c == sector)?;
    let (_, row) = rows(id).iter().find(|(l, _)| *l == sites)?;
    row.split_whitespace().nth(col)
}

/// Whether the table has a reference row for this chain length.
pub fn has_golden_row(id: TableId, sites: usize) -> bool {
    rows(id).iter().any(|(l, _)| *l == sites)
}
