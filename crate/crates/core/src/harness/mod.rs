//! Table regeneration, golden comparison and report rendering behind the
//! command-line tool.

pub mod artifact;
pub mod commands;
pub mod config;
pub mod golden;

pub use artifact::{cells_to_csv, to_json, Cell, Provenance, TableArtifact, TableId, FORBIDDEN, SCHEMA_VERSION};
pub use commands::{
    binomial_multiplicities, cmd_decompose, cmd_recover, cmd_table, cmd_verify_all, render_instance, Check, Mismatch,
    VerifyReport,
};
pub use config::{OutputFormat, RunConfig, DEFAULT_SEED, DEFAULT_SITES, DEFAULT_TRIALS};
