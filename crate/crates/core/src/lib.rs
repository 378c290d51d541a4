//! Hard-decision iterative decoding of product codes and generalized
//! product codes over the binary symmetric channel.
//!
//! The crate provides BCH component codes ([`bch`]), code layouts
//! ([`layout`]), three frame decoders ([`engine`]): conventional iterative
//! bounded-distance decoding, a genie-aided miscorrection-free reference,
//! and anchor-based decoding, post-processing for stalled frames
//! ([`postprocess`]), closed-form performance predictions ([`analysis`]) and
//! a reproducible Monte Carlo harness ([`sim`]).

pub mod analysis;
pub mod bch;
pub mod engine;
pub mod error;
pub mod galois;
pub mod layout;
pub mod postprocess;
pub mod sim;

pub use bch::{BchCode, DecodeOutcome, Syndrome};
pub use engine::{DecodeParams, DecoderKind, DecoderState, FrameStats, Status};
pub use error::{Error, Result};
pub use galois::FieldTable;
pub use layout::{CodewordId, GpcLayout};
pub use postprocess::{FailureReport, PpVariant};
pub use sim::{BerRecord, TrialConfig};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
