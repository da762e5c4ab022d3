//! Std companion to `horizon-core`: knowledge-base files, analysis sessions,
//! the HTTP service, the synthetic benchmark and the command line.

pub mod api;
pub mod bench;
pub mod cli;
pub mod engine;
pub mod kb;
pub mod wire;

pub use engine::{EngineError, LineageNode, LogRecord, NodeId, NodeOp, Session};
pub use kb::{KbError, KnowledgeBase};
