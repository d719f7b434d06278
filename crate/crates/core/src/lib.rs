pub mod builder;
pub mod codec;
pub mod error;
pub mod exit;
pub mod infotheory;
pub mod jobs;
pub mod lift;
pub mod lp;
pub mod optimizer;
pub mod proto_de;
pub mod protograph;
pub mod report;
pub mod sim;
pub mod structure;

pub use error::{Error, Result};
