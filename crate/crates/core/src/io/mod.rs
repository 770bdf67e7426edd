//! Persistence: binary trace files, scenario configuration documents and
//! CSV/JSON tables.

pub mod config;
pub mod table;
pub mod trace;

pub use config::{parse_config, ConfigError};
pub use table::{parse_csv, Table, TableError};
pub use trace::{read_trace, write_trace, StoredTrace, TraceFileError, TraceHeader};
