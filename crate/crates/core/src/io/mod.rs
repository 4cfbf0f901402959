pub mod config;
pub mod plots;
pub mod snapshot;

pub use config::{OutflowMode, RunConfig};
pub use snapshot::{decode, encode, read_snapshot, write_snapshot, Snapshot};
