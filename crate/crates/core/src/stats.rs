//! Capture-wide statistics: summary, protocol hierarchy, conversations,
//! and DNS-derived address resolution.

use std::collections::{BTreeMap, HashMap};
use std::net::IpAddr;

use crate::dissect::{format_mac, protocol_path, DissectedCapture, LayerName};
use crate::nanos_to_secs;

/// Whole-file overview. Classic PCAP carries no drop counter, so
/// `drop_info` is always the "unavailable" marker.
#[derive(Debug, Clone, PartialEq)]
pub struct CaptureSummary {
    pub file_name: String,
    pub packet_count: usize,
    pub byte_total: u64,
    pub start_nanos: u64,
    pub end_nanos: u64,
    pub duration_secs: f64,
    pub avg_packets_per_s: f64,
    pub avg_bytes_per_s: f64,
    pub drop_info: &'static str,
}

pub fn summarize(dc: &DissectedCapture, file_name: &str) -> CaptureSummary {
    let records = &dc.capture.records;
    let packet_count = records.len();
    let byte_total: u64 = records.iter().map(|r| u64::from(r.captured_len())).sum();
    let start_nanos = records.first().map_or(0, |r| r.ts_nanos);
    let end_nanos = records.last().map_or(0, |r| r.ts_nanos);
    let duration_secs = nanos_to_secs(end_nanos.saturating_sub(start_nanos));
    let (avg_packets_per_s, avg_bytes_per_s) = if duration_secs > 0.0 {
        (
            packet_count as f64 / duration_secs,
            byte_total as f64 / duration_secs,
        )
    } else {
        (0.0, 0.0)
    };
    CaptureSummary {
        file_name: file_name.to_owned(),
        packet_count,
        byte_total,
        start_nanos,
        end_nanos,
        duration_secs,
        avg_packets_per_s,
        avg_bytes_per_s,
        drop_info: "unavailable",
    }
}

/// One protocol in the encapsulation tree. Bytes attribute the full frame
/// to every layer on its path; children keep first-seen order.
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyNode {
    pub name: &'static str,
    pub packets: usize,
    pub bytes: u64,
    /// Fraction of the capture's packets (0..=1).
    pub percent_packets: f64,
    pub children: Vec<HierarchyNode>,
}

impl HierarchyNode {
    fn new(name: &'static str) -> Self {
        HierarchyNode {
            name,
            packets: 0,
            bytes: 0,
            percent_packets: 0.0,
            children: Vec::new(),
        }
    }

    fn child_mut(&mut self, name: &'static str) -> &mut HierarchyNode {
        let idx = match self.children.iter().position(|c| c.name == name) {
            Some(idx) => idx,
            None => {
                self.children.push(HierarchyNode::new(name));
                self.children.len() - 1
            }
        };
        &mut self.children[idx]
    }

    fn fill_percent(&mut self, total: usize) {
        self.percent_packets = if total == 0 {
            0.0
        } else {
            self.packets as f64 / total as f64
        };
        for child in &mut self.children {
            child.fill_percent(total);
        }
    }

    /// Depth-first walk in display order.
    pub fn walk(&self, visit: &mut impl FnMut(usize, &HierarchyNode)) {
        fn rec(node: &HierarchyNode, depth: usize, visit: &mut impl FnMut(usize, &HierarchyNode)) {
            visit(depth, node);
            for child in &node.children {
                rec(child, depth + 1, visit);
            }
        }
        rec(self, 0, visit);
    }
}

pub fn protocol_hierarchy(dc: &DissectedCapture) -> HierarchyNode {
    let mut root = HierarchyNode::new("frame");
    for (record, stack) in dc.iter() {
        let bytes = u64::from(record.captured_len());
        let mut node = &mut root;
        node.packets += 1;
        node.bytes += bytes;
        for name in protocol_path(stack).into_iter().skip(1) {
            node = node.child_mut(name);
            node.packets += 1;
            node.bytes += bytes;
        }
    }
    let total = dc.capture.records.len();
    root.fill_percent(total);
    root
}

/// A conversation endpoint at the requested layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Endpoint {
    Mac([u8; 6]),
    Ip(IpAddr),
    Transport(IpAddr, u16),
}

impl std::fmt::Display for Endpoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Endpoint::Mac(mac) => f.write_str(&format_mac(mac)),
            Endpoint::Ip(addr) => write!(f, "{addr}"),
            Endpoint::Transport(addr, port) => write!(f, "{addr}:{port}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvLayer {
    Ethernet,
    Ip,
    Tcp,
    Udp,
}

impl ConvLayer {
    pub fn as_str(self) -> &'static str {
        match self {
            ConvLayer::Ethernet => "eth",
            ConvLayer::Ip => "ip",
            ConvLayer::Tcp => "tcp",
            ConvLayer::Udp => "udp",
        }
    }

    fn endpoints(self, stack: &crate::dissect::LayerStack) -> Option<(Endpoint, Endpoint)> {
        match self {
            ConvLayer::Ethernet => stack
                .ethernet()
                .map(|e| (Endpoint::Mac(e.src), Endpoint::Mac(e.dst))),
            ConvLayer::Ip => stack
                .ip_pair()
                .map(|(s, d)| (Endpoint::Ip(s), Endpoint::Ip(d))),
            ConvLayer::Tcp => {
                if !stack.has(LayerName::Tcp) {
                    return None;
                }
                let (src, dst) = stack.ip_pair()?;
                let tcp = stack.tcp()?;
                Some((
                    Endpoint::Transport(src, tcp.src_port),
                    Endpoint::Transport(dst, tcp.dst_port),
                ))
            }
            ConvLayer::Udp => {
                let (src, dst) = stack.ip_pair()?;
                let udp = stack.udp()?;
                Some((
                    Endpoint::Transport(src, udp.src_port),
                    Endpoint::Transport(dst, udp.dst_port),
                ))
            }
        }
    }
}

impl std::str::FromStr for ConvLayer {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "eth" => Ok(ConvLayer::Ethernet),
            "ip" => Ok(ConvLayer::Ip),
            "tcp" => Ok(ConvLayer::Tcp),
            "udp" => Ok(ConvLayer::Udp),
            other => Err(format!("unknown layer {other:?} (eth, ip, tcp or udp)")),
        }
    }
}

/// Bidirectional aggregate between one endpoint pair. A→B is the direction
/// of the conversation's first packet.
#[derive(Debug, Clone, PartialEq)]
pub struct Conversation {
    pub endpoint_a: Endpoint,
    pub endpoint_b: Endpoint,
    pub packets_ab: u64,
    pub packets_ba: u64,
    pub bytes_ab: u64,
    pub bytes_ba: u64,
    pub abs_start_nanos: u64,
    pub rel_start_secs: f64,
    pub duration_secs: f64,
    pub bps_ab: f64,
    pub bps_ba: f64,
}

impl Conversation {
    pub fn total_bytes(&self) -> u64 {
        self.bytes_ab + self.bytes_ba
    }

    pub fn total_packets(&self) -> u64 {
        self.packets_ab + self.packets_ba
    }
}

pub fn conversations(dc: &DissectedCapture, layer: ConvLayer) -> Vec<Conversation> {
    struct Acc {
        a: Endpoint,
        b: Endpoint,
        packets: [u64; 2],
        bytes: [u64; 2],
        first_nanos: u64,
        last_nanos: u64,
    }

    let mut order: Vec<Acc> = Vec::new();
    let mut index: HashMap<(Endpoint, Endpoint), usize> = HashMap::new();
    for (record, stack) in dc.iter() {
        let Some((src, dst)) = layer.endpoints(stack) else {
            continue;
        };
        let pair = if src <= dst { (src, dst) } else { (dst, src) };
        let slot = *index.entry(pair).or_insert_with(|| {
            order.push(Acc {
                a: src,
                b: dst,
                packets: [0, 0],
                bytes: [0, 0],
                first_nanos: record.ts_nanos,
                last_nanos: record.ts_nanos,
            });
            order.len() - 1
        });
        let acc = &mut order[slot];
        let dir = usize::from(src != acc.a);
        acc.packets[dir] += 1;
        acc.bytes[dir] += u64::from(record.captured_len());
        acc.last_nanos = record.ts_nanos;
    }

    let capture_start = dc.start_nanos();
    let mut out: Vec<Conversation> = order
        .into_iter()
        .map(|acc| {
            let duration_secs = nanos_to_secs(acc.last_nanos - acc.first_nanos);
            let bps = |bytes: u64| {
                if duration_secs > 0.0 {
                    bytes as f64 * 8.0 / duration_secs
                } else {
                    0.0
                }
            };
            Conversation {
                endpoint_a: acc.a,
                endpoint_b: acc.b,
                packets_ab: acc.packets[0],
                packets_ba: acc.packets[1],
                bytes_ab: acc.bytes[0],
                bytes_ba: acc.bytes[1],
                abs_start_nanos: acc.first_nanos,
                rel_start_secs: nanos_to_secs(acc.first_nanos.saturating_sub(capture_start)),
                duration_secs,
                bps_ab: bps(acc.bytes[0]),
                bps_ba: bps(acc.bytes[1]),
            }
        })
        .collect();
    out.sort_by_key(|c| std::cmp::Reverse(c.total_bytes()));
    out
}

/// One name learned from an in-capture DNS answer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedName {
    pub name: String,
    /// The packet whose answer established (or last overwrote) the entry.
    pub packet_index: usize,
}

/// Address → name map; iteration order is by address for determinism.
pub type AddressMap = BTreeMap<IpAddr, ResolvedName>;

pub fn resolved_addresses(dc: &DissectedCapture) -> AddressMap {
    let mut map = AddressMap::new();
    for (record, stack) in dc.iter() {
        let Some(dns) = stack.dns() else { continue };
        if !dns.is_response {
            continue;
        }
        for answer in &dns.answers {
            map.insert(
                answer.addr,
                ResolvedName {
                    name: answer.name.clone(),
                    packet_index: record.index,
                },
            );
        }
    }
    map
}
