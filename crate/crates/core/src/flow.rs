//! Endpoint flow graph: one labeled arrow per packet between endpoint
//! columns, plus the fixed-width text renderer.

use std::collections::HashMap;

use crate::dissect::{format_mac, DissectedCapture, LayerBody, LayerStack};
use crate::filter::{match_filter, FilterExpr};
use crate::nanos_to_secs;

/// Rows reference endpoints by index into `endpoints` (first-seen order).
#[derive(Debug, Clone, PartialEq)]
pub struct FlowGraph {
    pub endpoints: Vec<String>,
    pub rows: Vec<FlowRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowRow {
    pub time_secs: f64,
    pub from: usize,
    pub to: usize,
    pub label: String,
}

/// Per-direction initial sequence numbers, for relative seq/ack labels.
#[derive(Default)]
struct SeqBase {
    bases: HashMap<(std::net::IpAddr, u16, std::net::IpAddr, u16), u32>,
}

impl SeqBase {
    fn relative(&mut self, stack: &LayerStack) -> Option<(u32, Option<u32>)> {
        let tcp = stack.tcp()?;
        let (src, dst) = stack.ip_pair()?;
        let fwd = (src, tcp.src_port, dst, tcp.dst_port);
        let base = *self.bases.entry(fwd).or_insert(tcp.seq);
        let rel_seq = tcp.seq.wrapping_sub(base);
        let rel_ack = if tcp.flags.ack() {
            let rev = (dst, tcp.dst_port, src, tcp.src_port);
            // an ACK before any reverse traffic keeps its absolute value
            Some(match self.bases.get(&rev) {
                Some(peer_base) => tcp.ack.wrapping_sub(*peer_base),
                None => tcp.ack,
            })
        } else {
            None
        };
        Some((rel_seq, rel_ack))
    }
}

fn transport_label(stack: &LayerStack, seq_base: &mut SeqBase) -> String {
    if let Some(tcp) = stack.tcp() {
        let (rel_seq, rel_ack) = seq_base
            .relative(stack)
            .expect("tcp layer implies ip layer");
        let mut label = format!(
            "TCP {}\u{2192}{} [{}] seq={}",
            tcp.src_port, tcp.dst_port, tcp.flags, rel_seq
        );
        if let Some(ack) = rel_ack {
            label.push_str(&format!(" ack={ack}"));
        }
        if tcp.payload_len > 0 {
            label.push_str(&format!(" len={}", tcp.payload_len));
        }
        return label;
    }
    if let Some(udp) = stack.udp() {
        return format!("UDP {}\u{2192}{}", udp.src_port, udp.dst_port);
    }
    for layer in &stack.layers {
        match &layer.body {
            LayerBody::Icmp { icmp_type, code } => {
                return format!("ICMP type={icmp_type} code={code}")
            }
            LayerBody::Ipv4(_) => return "IPv4".to_owned(),
            LayerBody::Ipv6(_) => return "IPv6".to_owned(),
            _ => {}
        }
    }
    "IP".to_owned()
}

/// One row per IP packet passing the filter; ARP exchanges appear with MAC
/// endpoints in the same column space. Other frames produce no row.
pub fn flow_graph(dc: &DissectedCapture, filter: Option<&FilterExpr>) -> FlowGraph {
    let mut graph = FlowGraph {
        endpoints: Vec::new(),
        rows: Vec::new(),
    };
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut intern = |graph: &mut FlowGraph, name: String| -> usize {
        if let Some(&idx) = index.get(&name) {
            return idx;
        }
        graph.endpoints.push(name.clone());
        index.insert(name, graph.endpoints.len() - 1);
        graph.endpoints.len() - 1
    };

    let start = dc.start_nanos();
    let mut seq_base = SeqBase::default();
    for (record, stack) in dc.iter() {
        if let Some(f) = filter {
            if !match_filter(f, stack) {
                continue;
            }
        }
        let (from_name, to_name, label) = if let Some((src, dst)) = stack.ip_pair() {
            let label = transport_label(stack, &mut seq_base);
            (src.to_string(), dst.to_string(), label)
        } else if let Some(arp) = stack.layers.iter().find_map(|l| match &l.body {
            LayerBody::Arp(arp) => Some(arp),
            _ => None,
        }) {
            let label = if arp.opcode == 1 {
                format!("ARP who-has {}", arp.target_ip)
            } else {
                format!("ARP {} is-at {}", arp.sender_ip, format_mac(&arp.sender_mac))
            };
            let eth = stack.ethernet().expect("arp implies ethernet");
            (format_mac(&eth.src), format_mac(&eth.dst), label)
        } else {
            continue;
        };
        let from = intern(&mut graph, from_name);
        let to = intern(&mut graph, to_name);
        graph.rows.push(FlowRow {
            time_secs: nanos_to_secs(record.ts_nanos.saturating_sub(start)),
            from,
            to,
            label,
        });
    }
    graph
}

/// Fixed-width sequence-diagram rendering: a header naming each endpoint
/// column, one lifeline per endpoint, one arrow line per row.
pub fn render_flow_text(graph: &FlowGraph) -> String {
    const TIME_W: usize = 9;
    let n = graph.endpoints.len();

    // column pitch: widest endpoint name or arrow label, plus arrow room
    let max_name = graph.endpoints.iter().map(|e| e.len()).max().unwrap_or(0);
    let max_label = graph.rows.iter().map(|r| r.label.len()).max().unwrap_or(0);
    let pitch = (max_name.max(max_label + 6)).max(12) + 2;

    let center = |i: usize| TIME_W + 2 + i * pitch + pitch / 2;
    let width = TIME_W + 2 + n * pitch;

    let mut out = String::new();
    // header
    let mut header = vec![b' '; width];
    header[..4].copy_from_slice(b"Time");
    for (i, name) in graph.endpoints.iter().enumerate() {
        let c = center(i);
        let start = c.saturating_sub(name.len() / 2);
        header[start..start + name.len()].copy_from_slice(name.as_bytes());
    }
    out.push_str(String::from_utf8_lossy(&header).trim_end());
    out.push('\n');

    for row in &graph.rows {
        let mut line = vec![' '; width];
        let time = format!("{:>TIME_W$.6}", row.time_secs);
        for (i, ch) in time.chars().enumerate().take(TIME_W) {
            line[i] = ch;
        }
        for i in 0..n {
            line[center(i)] = '|';
        }
        let (cf, ct) = (center(row.from), center(row.to));
        if row.from == row.to {
            let text = format!("[self] {}", row.label);
            if cf + 2 + text.len() > line.len() {
                line.resize(cf + 2 + text.len(), ' ');
            }
            for (k, ch) in text.chars().enumerate() {
                line[cf + 2 + k] = ch;
            }
        } else {
            let (lo, hi) = (cf.min(ct), cf.max(ct));
            for cell in line.iter_mut().take(hi).skip(lo + 1) {
                *cell = '-';
            }
            if ct > cf {
                line[hi - 1] = '>';
            } else {
                line[lo + 1] = '<';
            }
            let span = hi - lo - 3; // room between pipes and the arrow head
            let start = lo + 2 + span.saturating_sub(row.label.len()) / 2;
            for (k, ch) in row.label.chars().enumerate().take(span) {
                line[start + k] = ch;
            }
        }
        let text: String = line.into_iter().collect();
        out.push_str(text.trim_end());
        out.push('\n');
    }
    out
}
