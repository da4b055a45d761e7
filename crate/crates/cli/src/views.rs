//! Adapters from analysis results to tables and chart specs.

use std::collections::HashMap;
use std::net::IpAddr;

use pcapscope_core::nanos_to_secs;
use pcapscope_core::render::{Cell, ChartSeries, ChartSpec, SeriesStyle, Table};
use pcapscope_core::stats::{
    AddressMap, CaptureSummary, ConvLayer, Conversation, Endpoint, HierarchyNode,
};
use pcapscope_core::tcp::{Dir, ExpertSummary, Severity, TcpStream, TcpTraceData};
use pcapscope_core::timeseries::{SeriesUnit, TimeSeries};
use pcapscope_core::flow::FlowGraph;

pub fn summary_table(summary: &CaptureSummary) -> Table {
    let mut table = Table::new(&["field", "value"]);
    let mut push = |field: &str, value: Cell| {
        table.push(vec![Cell::Text(field.to_owned()), value]);
    };
    push("file", Cell::Text(summary.file_name.clone()));
    push("packets", Cell::Int(summary.packet_count as u64));
    push("bytes", Cell::Int(summary.byte_total));
    push("first_packet", Cell::Float(nanos_to_secs(summary.start_nanos)));
    push("last_packet", Cell::Float(nanos_to_secs(summary.end_nanos)));
    push("duration", Cell::Float(summary.duration_secs));
    push("avg_packets_per_s", Cell::Float(summary.avg_packets_per_s));
    push("avg_bytes_per_s", Cell::Float(summary.avg_bytes_per_s));
    push("drops", Cell::Text(summary.drop_info.to_owned()));
    table
}

/// `indent`: nest protocol names for human tables; otherwise print the
/// full path (`frame/ethernet/ipv4/tcp`).
pub fn hierarchy_table(root: &HierarchyNode, indent: bool) -> Table {
    let mut table = Table::new(&["protocol", "packets", "bytes", "percent"]);
    let mut path: Vec<&str> = Vec::new();
    root.walk(&mut |depth, node| {
        path.truncate(depth);
        path.push(node.name);
        let name = if indent {
            format!("{}{}", "  ".repeat(depth), node.name)
        } else {
            path.join("/")
        };
        table.push(vec![
            Cell::Text(name),
            Cell::Int(node.packets as u64),
            Cell::Int(node.bytes),
            Cell::Float(node.percent_packets * 100.0),
        ]);
    });
    table
}

fn endpoint_cell(endpoint: &Endpoint) -> Cell {
    Cell::Text(endpoint.to_string())
}

fn transport_pair(endpoint: &Endpoint) -> Option<(IpAddr, u16)> {
    match endpoint {
        Endpoint::Transport(addr, port) => Some((*addr, *port)),
        _ => None,
    }
}

type EndpointPair = ((IpAddr, u16), (IpAddr, u16));

fn canonical(a: (IpAddr, u16), b: (IpAddr, u16)) -> EndpointPair {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Maps canonical endpoint pairs to stream indices for the tcp layer.
pub fn stream_index_map(streams: &[TcpStream]) -> HashMap<EndpointPair, usize> {
    streams
        .iter()
        .map(|s| {
            let k = &s.key;
            (
                canonical((k.addr_a, k.port_a), (k.addr_b, k.port_b)),
                k.stream_index,
            )
        })
        .collect()
}

pub fn conv_table(
    conversations: &[Conversation],
    layer: ConvLayer,
    streams: &HashMap<EndpointPair, usize>,
) -> Table {
    let mut columns = vec![];
    if layer == ConvLayer::Tcp {
        columns.push("stream");
    }
    columns.extend([
        "endpoint_a",
        "endpoint_b",
        "packets_ab",
        "bytes_ab",
        "packets_ba",
        "bytes_ba",
        "total_packets",
        "total_bytes",
        "rel_start",
        "duration",
        "bps_ab",
        "bps_ba",
    ]);
    let mut table = Table::new(&columns);
    for conv in conversations {
        let mut row = vec![];
        if layer == ConvLayer::Tcp {
            let index = transport_pair(&conv.endpoint_a)
                .zip(transport_pair(&conv.endpoint_b))
                .and_then(|(a, b)| streams.get(&canonical(a, b)));
            row.push(match index {
                Some(i) => Cell::Int(*i as u64),
                None => Cell::Text(String::new()),
            });
        }
        row.extend([
            endpoint_cell(&conv.endpoint_a),
            endpoint_cell(&conv.endpoint_b),
            Cell::Int(conv.packets_ab),
            Cell::Int(conv.bytes_ab),
            Cell::Int(conv.packets_ba),
            Cell::Int(conv.bytes_ba),
            Cell::Int(conv.total_packets()),
            Cell::Int(conv.total_bytes()),
            Cell::Float(conv.rel_start_secs),
            Cell::Float(conv.duration_secs),
            Cell::Float(conv.bps_ab),
            Cell::Float(conv.bps_ba),
        ]);
        table.push(row);
    }
    table
}

pub fn resolve_table(addresses: &AddressMap) -> Table {
    let mut table = Table::new(&["address", "name", "packet"]);
    for (addr, resolved) in addresses {
        table.push(vec![
            Cell::Text(addr.to_string()),
            Cell::Text(resolved.name.clone()),
            Cell::Int(resolved.packet_index as u64),
        ]);
    }
    table
}

/// Binned series side by side: one `bin_start` column plus one column per
/// series. Missing trailing bins are zero (the series are dense from 0).
pub fn series_table(series: &[TimeSeries]) -> Table {
    let mut columns = vec!["bin_start".to_owned()];
    columns.extend(series.iter().map(|s| s.label.clone()));
    let mut table = Table::new(&columns);
    let bins = series.iter().map(|s| s.points.len()).max().unwrap_or(0);
    for bin in 0..bins {
        let start = series
            .iter()
            .find_map(|s| s.points.get(bin).map(|p| p.0))
            .unwrap_or(0.0);
        let mut row = vec![Cell::Float(start)];
        for s in series {
            row.push(Cell::Number(s.points.get(bin).map_or(0.0, |p| p.1)));
        }
        table.push(row);
    }
    table
}

/// Sample series (one point per measurement, no binning).
pub fn samples_table(series: &TimeSeries, value_column: &str) -> Table {
    let mut table = Table::new(&["time", value_column]);
    for &(t, v) in &series.points {
        table.push(vec![Cell::Float(t), Cell::Float(v)]);
    }
    table
}

pub fn tcptrace_table(trace: &TcpTraceData) -> Table {
    let mut table = Table::new(&["kind", "time", "seq_lo", "seq_hi"]);
    let mut push = |kind: &str, t: f64, lo: u64, hi: u64| {
        table.push(vec![
            Cell::Text(kind.to_owned()),
            Cell::Float(t),
            Cell::Int(lo),
            Cell::Int(hi),
        ]);
    };
    for &(t, lo, hi) in &trace.segments {
        push("segment", t, lo, hi);
    }
    for &(t, ack) in &trace.acks {
        push("ack", t, ack, ack);
    }
    for &(t, edge) in &trace.windows {
        push("window", t, edge, edge);
    }
    for &(t, lo, hi) in &trace.retransmissions {
        push("retransmission", t, lo, hi);
    }
    table
}

pub fn expert_table(summary: &ExpertSummary) -> Table {
    let mut table = Table::new(&["severity", "kind", "packet", "stream", "message"]);
    for event in &summary.events {
        table.push(vec![
            Cell::Text(event.severity.as_str().to_owned()),
            Cell::Text(event.kind.as_str().to_owned()),
            Cell::Int(event.packet_index as u64),
            Cell::Text(event.stream_index.map_or(String::new(), |i| i.to_string())),
            Cell::Text(event.message.clone()),
        ]);
    }
    table
}

pub fn expert_counts_line(summary: &ExpertSummary) -> String {
    format!(
        "errors: {}  warnings: {}  notes: {}  chats: {}\n",
        summary.count(Severity::Error),
        summary.count(Severity::Warning),
        summary.count(Severity::Note),
        summary.count(Severity::Chat),
    )
}

pub fn flow_table(graph: &FlowGraph) -> Table {
    let mut table = Table::new(&["time", "from", "to", "info"]);
    for row in &graph.rows {
        table.push(vec![
            Cell::Float(row.time_secs),
            Cell::Text(graph.endpoints[row.from].clone()),
            Cell::Text(graph.endpoints[row.to].clone()),
            Cell::Text(row.label.clone()),
        ]);
    }
    table
}

pub fn iograph_chart(series: &[TimeSeries], tick: f64, unit: SeriesUnit) -> ChartSpec {
    ChartSpec::new(
        &format!("I/O graph ({} per {tick} s)", unit.as_str()),
        "time (s)",
        unit.as_str(),
        series
            .iter()
            .map(|s| ChartSeries {
                label: s.label.clone(),
                style: SeriesStyle::Step,
                points: s.points.clone(),
            })
            .collect(),
    )
}

pub fn rtt_chart(series: &TimeSeries, stream: usize, dir: Dir) -> ChartSpec {
    ChartSpec::new(
        &format!("round-trip time (stream {stream}, {dir})"),
        "time (s)",
        "rtt (s)",
        vec![ChartSeries {
            label: series.label.clone(),
            style: SeriesStyle::Marks,
            points: series.points.clone(),
        }],
    )
}

pub fn throughput_chart(series: &TimeSeries, stream: usize, dir: Dir, tick: f64) -> ChartSpec {
    ChartSpec::new(
        &format!("throughput (stream {stream}, {dir}, tick {tick} s)"),
        "time (s)",
        "bits/s",
        vec![ChartSeries {
            label: series.label.clone(),
            style: SeriesStyle::Step,
            points: series.points.clone(),
        }],
    )
}

pub fn tcptrace_chart(trace: &TcpTraceData) -> ChartSpec {
    let marks = |points: &[(f64, u64, u64)]| -> Vec<(f64, f64)> {
        points.iter().map(|&(t, _, hi)| (t, hi as f64)).collect()
    };
    let line = |points: &[(f64, u64)]| -> Vec<(f64, f64)> {
        points.iter().map(|&(t, v)| (t, v as f64)).collect()
    };
    ChartSpec::new(
        &format!("tcptrace (stream {}, {})", trace.stream_index, trace.dir),
        "time (s)",
        "relative sequence",
        vec![
            ChartSeries {
                label: "segments".to_owned(),
                style: SeriesStyle::Marks,
                points: marks(&trace.segments),
            },
            ChartSeries {
                label: "acks".to_owned(),
                style: SeriesStyle::Step,
                points: line(&trace.acks),
            },
            ChartSeries {
                label: "window".to_owned(),
                style: SeriesStyle::Step,
                points: line(&trace.windows),
            },
            ChartSeries {
                label: "retransmissions".to_owned(),
                style: SeriesStyle::Marks,
                points: marks(&trace.retransmissions),
            },
        ],
    )
}
