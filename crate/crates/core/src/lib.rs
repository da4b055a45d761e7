//! Offline packet-capture analysis.
//!
//! The crate reads classic PCAP files, dissects each frame into a protocol
//! layer stack, and derives the usual analyzer views from the result:
//! capture summary, resolved addresses, protocol hierarchy, conversations,
//! I/O and flow graphs, per-stream TCP analysis (RTT, throughput, tcptrace
//! series), and severity-classified expert events. Everything is
//! deterministic: the same input bytes always produce the same output bytes.
//!
//! The pipeline is file → [`capture::Capture`] → [`dissect::DissectedCapture`]
//! → one of the view builders in [`stats`], [`tcp`], or [`timeseries`].
//! [`render`] turns the resulting tables and series into CSV, JSON, ASCII
//! charts, or SVG.

pub mod capture;
pub mod dissect;
pub mod filter;
pub mod fixture;
pub mod flow;
pub mod render;
pub mod stats;
pub mod tcp;
pub mod timeseries;
pub mod wire;

pub use capture::{Capture, CaptureError, CaptureHeader, PacketRecord, TsResolution};
pub use dissect::{DissectedCapture, Layer, LayerBody, LayerName, LayerStack};
pub use filter::FilterExpr;
pub use fixture::FixtureScenario;
pub use timeseries::TimeSeries;

/// Nanoseconds in one second, the internal time resolution.
pub const NANOS_PER_SEC: u64 = 1_000_000_000;

/// Converts an internal nanosecond timestamp difference to seconds.
pub fn nanos_to_secs(nanos: u64) -> f64 {
    nanos as f64 / NANOS_PER_SEC as f64
}

/// Converts seconds to the nearest internal nanosecond count.
pub fn secs_to_nanos(secs: f64) -> u64 {
    (secs * NANOS_PER_SEC as f64).round() as u64
}
