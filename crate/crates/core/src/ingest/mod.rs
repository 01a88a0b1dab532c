//! Streaming records through the detection pipeline, strictly in arrival
//! order, one output row per record.

mod config;
mod detector;
mod multi_run;
mod record;

pub use config::{EncoderSettings, PipelineConfig};
pub use detector::{
    detect_all, detect_with_length, run_stream, AnomalyOutput, Detector, StreamSummary,
    OUTPUT_HEADER,
};
pub use multi_run::{run_multi, CombinedRow};
pub use record::{
    format_timestamp, parse_timestamp, read_records, write_records, Record, RecordReader,
    RowPolicy,
};
