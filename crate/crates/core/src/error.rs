// SPDX-License-Identifier: Apache-2.0

use std::fmt;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Storage node index inside a pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "node{}", self.0)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("corrupt file: {0}")]
    CorruptFile(String),

    #[error("corrupt metadata: {0}")]
    CorruptMetadata(String),

    #[error("unsupported format version {found} (supported: {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },

    #[error("not found: {0}")]
    NotFound(String),

    #[error("conflict: {0}")]
    Conflict(String),

    #[error("unknown object class method '{0}'")]
    UnknownMethod(String),

    #[error("class method failed on {node}: {source}")]
    Handler {
        node: NodeId,
        #[source]
        source: Box<Error>,
    },

    #[error("layout infeasible: row group {group} needs {needed} bytes but stripe unit is {stripe_unit}")]
    LayoutInfeasible {
        group: usize,
        needed: u64,
        stripe_unit: u64,
    },

    #[error("corrupt layout: {0}")]
    CorruptLayout(String),

    #[error("broken dataset: row group {ordinal} references missing data file '{path}'")]
    BrokenDataset { ordinal: usize, path: String },

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("scan of fragment {ordinal} on {node} failed: {source}")]
    Fragment {
        ordinal: usize,
        node: NodeId,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("experiment cell {cell} failed: {source}")]
    Cell {
        cell: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn corrupt(msg: impl Into<String>) -> Self {
        Error::CorruptFile(msg.into())
    }

    pub(crate) fn metadata(msg: impl Into<String>) -> Self {
        Error::CorruptMetadata(msg.into())
    }

    pub(crate) fn protocol(msg: impl Into<String>) -> Self {
        Error::Protocol(msg.into())
    }
}
