//! Streaming anomaly detection built on a sparse sequence memory.
//!
//! Each record is encoded as a sparse code, mapped onto columns and fed to
//! a temporal memory that predicts the next input. The fraction of the
//! input that was not predicted is the raw anomaly score; an online
//! estimate of the recent score distribution turns it into a likelihood,
//! and a record is flagged when that likelihood is extreme.
//!
//! ```
//! use htmad_core::ingest::{detect_all, PipelineConfig};
//! use htmad_core::synth::{generate, Generator};
//!
//! let stream = generate(Generator::Cyclic, 1, None).unwrap();
//! let out = detect_all(&stream.records, &PipelineConfig::default()).unwrap();
//! assert_eq!(out.len(), stream.records.len());
//! ```

pub mod anomaly;
pub mod bench;
pub mod encoder;
pub mod error;
pub mod ingest;
pub mod multi;
pub mod sdr;
pub mod synth;
pub mod tm;

pub use error::{Error, Result};
pub use sdr::Sdr;
