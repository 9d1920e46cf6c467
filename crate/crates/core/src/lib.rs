//! Perfect secret-key generation on hypergraphical sources.
//!
//! A hypergraphical source attaches an independent uniform bit to every
//! hyperedge; each party sees the bits of the edges it belongs to. This
//! crate builds one-shot linear broadcast schemes that let all parties agree
//! on a key that is exactly uniform and exactly independent of the public
//! communication, and audits those claims with GF(2) rank certificates,
//! exhaustive enumeration or sampling.
//!
//! ```
//! use hyperkey::{audit, capacity, protocol};
//!
//! let run = protocol::run_kmt_pipeline(4, 3).unwrap();
//! let report = audit::rank_audit(&run.scheme, &run.key).unwrap();
//! assert!(report.passed());
//! assert_eq!(run.key.rate(), capacity::capacity_kmt(4, 3).unwrap());
//! ```

pub mod audit;
pub mod capacity;
pub mod error;
pub mod gf2;
pub mod hypergraph;
pub mod packing;
pub mod protocol;
pub mod rate;
pub mod report;
pub mod source;

pub use error::{Error, Result};
pub use rate::Rate;
