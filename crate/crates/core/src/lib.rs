//! Statevector simulation of quantum bipartite correlators: distributed
//! inner-product estimation by quantum counting, with blind-server,
//! blind-client and multiparty variants, plus the adversary models used to
//! measure how much each party learns.

pub mod adversary;
pub mod counting;
pub mod error;
pub mod experiment;
pub mod oracle;
pub mod protocol;
pub mod sim;

pub use error::{Error, Result};
