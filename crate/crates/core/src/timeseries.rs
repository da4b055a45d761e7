//! Time-binned series for the I/O graph family.
//!
//! Bins are anchored at the first packet's timestamp and computed in integer
//! nanoseconds, so re-binning a tick-0.1 series by groups of ten reproduces
//! the tick-1 series exactly. Series are dense: zero bins are emitted.

use crate::dissect::DissectedCapture;
use crate::filter::{match_filter, FilterExpr};
use crate::NANOS_PER_SEC;

pub const MIN_TICK: f64 = 0.001;
pub const MAX_TICK: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesUnit {
    Packets,
    Bytes,
    Bits,
    /// Used by sample series (RTT) that bypass binning.
    Seconds,
}

impl SeriesUnit {
    pub fn as_str(self) -> &'static str {
        match self {
            SeriesUnit::Packets => "packets",
            SeriesUnit::Bytes => "bytes",
            SeriesUnit::Bits => "bits",
            SeriesUnit::Seconds => "seconds",
        }
    }
}

impl std::str::FromStr for SeriesUnit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "packets" => Ok(SeriesUnit::Packets),
            "bytes" => Ok(SeriesUnit::Bytes),
            "bits" => Ok(SeriesUnit::Bits),
            other => Err(format!("unknown unit {other:?} (packets, bytes or bits)")),
        }
    }
}

/// Points are (seconds from capture start, value). Binned series carry
/// their tick; sample series (RTT) have none.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub label: String,
    pub tick: Option<f64>,
    pub unit: SeriesUnit,
    pub points: Vec<(f64, f64)>,
}

impl TimeSeries {
    pub fn sum(&self) -> f64 {
        self.points.iter().map(|(_, v)| v).sum()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("tick {tick} is outside the valid range {MIN_TICK}-{MAX_TICK} seconds")]
pub struct InvalidTick {
    pub tick: f64,
}

/// Tick in integer nanoseconds; the binning unit everywhere.
pub(crate) fn tick_nanos(tick: f64) -> u64 {
    (tick * NANOS_PER_SEC as f64).round() as u64
}

pub(crate) fn check_tick(tick: f64) -> Result<u64, InvalidTick> {
    if !(MIN_TICK..=MAX_TICK).contains(&tick) {
        return Err(InvalidTick { tick });
    }
    Ok(tick_nanos(tick))
}

/// One dense series per filter (one unfiltered series labeled `all` when
/// `filters` is empty), binned at `tick` seconds from the first packet.
pub fn io_graph(
    dc: &DissectedCapture,
    filters: &[FilterExpr],
    tick: f64,
    unit: SeriesUnit,
) -> Result<Vec<TimeSeries>, InvalidTick> {
    let tick_ns = check_tick(tick)?;
    let labels: Vec<String> = if filters.is_empty() {
        vec!["all".to_owned()]
    } else {
        filters.iter().map(|f| f.to_string()).collect()
    };

    let records = &dc.capture.records;
    if records.is_empty() {
        return Ok(labels
            .into_iter()
            .map(|label| TimeSeries {
                label,
                tick: Some(tick),
                unit,
                points: Vec::new(),
            })
            .collect());
    }

    let t0 = dc.start_nanos();
    let last_bin = ((records.last().expect("non-empty").ts_nanos - t0) / tick_ns) as usize;
    let mut values = vec![vec![0.0f64; last_bin + 1]; labels.len()];

    for (record, stack) in dc.iter() {
        let bin = ((record.ts_nanos - t0) / tick_ns) as usize;
        let weight = match unit {
            SeriesUnit::Packets => 1.0,
            SeriesUnit::Bytes => record.captured_len() as f64,
            SeriesUnit::Bits => record.captured_len() as f64 * 8.0,
            SeriesUnit::Seconds => 1.0, // not reachable from the CLI
        };
        if filters.is_empty() {
            values[0][bin] += weight;
        } else {
            for (series, filter) in values.iter_mut().zip(filters) {
                if match_filter(filter, stack) {
                    series[bin] += weight;
                }
            }
        }
    }

    Ok(labels
        .into_iter()
        .zip(values)
        .map(|(label, series)| TimeSeries {
            label,
            tick: Some(tick),
            unit,
            points: series
                .into_iter()
                .enumerate()
                .map(|(k, v)| (bin_start_secs(k, tick_ns), v))
                .collect(),
        })
        .collect())
}

pub(crate) fn bin_start_secs(bin: usize, tick_ns: u64) -> f64 {
    (bin as u64 * tick_ns) as f64 / NANOS_PER_SEC as f64
}
