//! Layered frame dissection.
//!
//! [`dissect_packet`] is total: any byte sequence produces a [`LayerStack`].
//! Decoding walks ethernet → {arp | ipv4 | ipv6} → {tcp | udp | icmp} →
//! {dns | data}; a failure at any depth records a `malformed` mark and keeps
//! the outer layers already decoded. Checksums are read where present but
//! never validated.

use std::net::{IpAddr, Ipv4Addr, Ipv6Addr};
use std::ops::Range;

use crate::capture::{Capture, PacketRecord, LINKTYPE_ETHERNET};
use crate::wire::{self, TcpFlags};

/// Protocols the dissector can name. `Data` is any undecoded payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LayerName {
    Ethernet,
    Arp,
    Ipv4,
    Ipv6,
    Icmp,
    Tcp,
    Udp,
    Dns,
    Data,
}

impl LayerName {
    pub fn as_str(self) -> &'static str {
        match self {
            LayerName::Ethernet => "ethernet",
            LayerName::Arp => "arp",
            LayerName::Ipv4 => "ipv4",
            LayerName::Ipv6 => "ipv6",
            LayerName::Icmp => "icmp",
            LayerName::Tcp => "tcp",
            LayerName::Udp => "udp",
            LayerName::Dns => "dns",
            LayerName::Data => "data",
        }
    }
}

impl std::fmt::Display for LayerName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EthernetInfo {
    pub src: [u8; 6],
    pub dst: [u8; 6],
    /// Inner ethertype after any VLAN tags were skipped.
    pub ethertype: u16,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArpInfo {
    pub opcode: u16,
    pub sender_mac: [u8; 6],
    pub sender_ip: Ipv4Addr,
    pub target_mac: [u8; 6],
    pub target_ip: Ipv4Addr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ipv4Info {
    pub src: Ipv4Addr,
    pub dst: Ipv4Addr,
    pub protocol: u8,
    pub total_len: u16,
    pub header_len: u8,
    pub flags: u8,
    pub frag_offset: u16,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ipv6Info {
    pub src: Ipv6Addr,
    pub dst: Ipv6Addr,
    pub next_header: u8,
    pub payload_len: u16,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TcpInfo {
    pub src_port: u16,
    pub dst_port: u16,
    pub seq: u32,
    pub ack: u32,
    pub flags: TcpFlags,
    pub window: u16,
    pub header_len: u8,
    /// Captured payload bytes past the TCP header, clipped at the snap
    /// length; `truncated` marks the clip.
    pub payload_len: u32,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UdpInfo {
    pub src_port: u16,
    pub dst_port: u16,
    pub length: u16,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DnsAnswer {
    pub name: String,
    pub rtype: u16,
    pub addr: IpAddr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DnsInfo {
    pub id: u16,
    pub is_response: bool,
    /// A and AAAA answers only.
    pub answers: Vec<DnsAnswer>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LayerBody {
    Ethernet(EthernetInfo),
    Arp(ArpInfo),
    Ipv4(Ipv4Info),
    Ipv6(Ipv6Info),
    Icmp { icmp_type: u8, code: u8 },
    Tcp(TcpInfo),
    Udp(UdpInfo),
    Dns(DnsInfo),
    Data { len: usize },
}

impl LayerBody {
    pub fn name(&self) -> LayerName {
        match self {
            LayerBody::Ethernet(_) => LayerName::Ethernet,
            LayerBody::Arp(_) => LayerName::Arp,
            LayerBody::Ipv4(_) => LayerName::Ipv4,
            LayerBody::Ipv6(_) => LayerName::Ipv6,
            LayerBody::Icmp { .. } => LayerName::Icmp,
            LayerBody::Tcp(_) => LayerName::Tcp,
            LayerBody::Udp(_) => LayerName::Udp,
            LayerBody::Dns(_) => LayerName::Dns,
            LayerBody::Data { .. } => LayerName::Data,
        }
    }
}

/// One decoded protocol layer and the frame bytes it claims.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layer {
    pub body: LayerBody,
    /// Header bytes within the captured frame (payload bytes for `Data`).
    pub range: Range<usize>,
}

impl Layer {
    pub fn name(&self) -> LayerName {
        self.body.name()
    }
}

/// Where and why decoding stopped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Malformed {
    pub layer: LayerName,
    pub reason: String,
}

/// Ordered dissection result for one frame.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LayerStack {
    pub layers: Vec<Layer>,
    pub malformed: Option<Malformed>,
}

impl LayerStack {
    pub fn has(&self, name: LayerName) -> bool {
        self.layers.iter().any(|l| l.name() == name)
    }

    pub fn layer(&self, name: LayerName) -> Option<&Layer> {
        self.layers.iter().find(|l| l.name() == name)
    }

    pub fn ethernet(&self) -> Option<&EthernetInfo> {
        self.layers.iter().find_map(|l| match &l.body {
            LayerBody::Ethernet(e) => Some(e),
            _ => None,
        })
    }

    pub fn tcp(&self) -> Option<&TcpInfo> {
        self.layers.iter().find_map(|l| match &l.body {
            LayerBody::Tcp(t) => Some(t),
            _ => None,
        })
    }

    pub fn udp(&self) -> Option<&UdpInfo> {
        self.layers.iter().find_map(|l| match &l.body {
            LayerBody::Udp(u) => Some(u),
            _ => None,
        })
    }

    pub fn dns(&self) -> Option<&DnsInfo> {
        self.layers.iter().find_map(|l| match &l.body {
            LayerBody::Dns(d) => Some(d),
            _ => None,
        })
    }

    /// Source and destination network addresses, for ipv4 or ipv6 frames.
    pub fn ip_pair(&self) -> Option<(IpAddr, IpAddr)> {
        self.layers.iter().find_map(|l| match &l.body {
            LayerBody::Ipv4(ip) => Some((IpAddr::V4(ip.src), IpAddr::V4(ip.dst))),
            LayerBody::Ipv6(ip) => Some((IpAddr::V6(ip.src), IpAddr::V6(ip.dst))),
            _ => None,
        })
    }

    /// Transport ports regardless of protocol.
    pub fn ports(&self) -> Option<(u16, u16)> {
        if let Some(tcp) = self.tcp() {
            return Some((tcp.src_port, tcp.dst_port));
        }
        self.udp().map(|u| (u.src_port, u.dst_port))
    }
}

/// Encapsulation path with the synthetic `frame` root, the hierarchy key.
pub fn protocol_path(stack: &LayerStack) -> Vec<&'static str> {
    let mut path = Vec::with_capacity(stack.layers.len() + 1);
    path.push("frame");
    path.extend(stack.layers.iter().map(|l| l.name().as_str()));
    path
}

/// A capture with every record dissected, the input to all analysis views.
#[derive(Debug, Clone)]
pub struct DissectedCapture {
    pub capture: Capture,
    pub stacks: Vec<LayerStack>,
}

impl DissectedCapture {
    pub fn dissect(capture: Capture) -> Self {
        let linktype = capture.header.linktype;
        let stacks = capture
            .records
            .iter()
            .map(|r| dissect_packet(r, linktype))
            .collect();
        DissectedCapture { capture, stacks }
    }

    /// Capture start time; zero for an empty capture.
    pub fn start_nanos(&self) -> u64 {
        self.capture.start_nanos().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PacketRecord, &LayerStack)> {
        self.capture.records.iter().zip(self.stacks.iter())
    }
}

struct Dissector<'a> {
    data: &'a [u8],
    stack: LayerStack,
}

impl<'a> Dissector<'a> {
    fn push(&mut self, body: LayerBody, range: Range<usize>) {
        self.stack.layers.push(Layer { body, range });
    }

    fn fail(&mut self, layer: LayerName, reason: impl Into<String>) {
        self.stack.malformed = Some(Malformed {
            layer,
            reason: reason.into(),
        });
    }

    fn data_layer(&mut self, range: Range<usize>) {
        if !range.is_empty() {
            self.push(LayerBody::Data { len: range.len() }, range);
        }
    }

    fn ethernet(&mut self) {
        let data = self.data;
        if data.len() < 14 {
            self.fail(LayerName::Ethernet, "frame shorter than 14 bytes");
            return;
        }
        let dst = mac(&data[0..6]);
        let src = mac(&data[6..12]);
        let mut ethertype = u16::from_be_bytes([data[12], data[13]]);
        let mut offset = 14;
        // 802.1Q tags are skipped transparently, bounded against tag loops.
        let mut tags = 0;
        while ethertype == wire::ETHERTYPE_VLAN && tags < 4 {
            if data.len() < offset + 4 {
                self.fail(LayerName::Ethernet, "vlan tag truncated");
                return;
            }
            ethertype = u16::from_be_bytes([data[offset + 2], data[offset + 3]]);
            offset += 4;
            tags += 1;
        }
        self.push(
            LayerBody::Ethernet(EthernetInfo {
                src,
                dst,
                ethertype,
            }),
            0..offset,
        );
        match ethertype {
            wire::ETHERTYPE_ARP => self.arp(offset),
            wire::ETHERTYPE_IPV4 => self.ipv4(offset),
            wire::ETHERTYPE_IPV6 => self.ipv6(offset),
            _ => self.data_layer(offset..data.len()),
        }
    }

    fn arp(&mut self, start: usize) {
        let data = self.data;
        if data.len() < start + 28 {
            self.fail(LayerName::Arp, "arp body shorter than 28 bytes");
            return;
        }
        let b = &data[start..start + 28];
        let info = ArpInfo {
            opcode: u16::from_be_bytes([b[6], b[7]]),
            sender_mac: mac(&b[8..14]),
            sender_ip: Ipv4Addr::new(b[14], b[15], b[16], b[17]),
            target_mac: mac(&b[18..24]),
            target_ip: Ipv4Addr::new(b[24], b[25], b[26], b[27]),
        };
        self.push(LayerBody::Arp(info), start..start + 28);
    }

    fn ipv4(&mut self, start: usize) {
        let data = self.data;
        if data.len() < start + 20 {
            self.fail(LayerName::Ipv4, "header shorter than 20 bytes");
            return;
        }
        let version = data[start] >> 4;
        if version != 4 {
            self.fail(LayerName::Ipv4, format!("version {version} in ipv4 slot"));
            return;
        }
        let header_len = usize::from(data[start] & 0x0f) * 4;
        if header_len < 20 {
            self.fail(LayerName::Ipv4, format!("header length {header_len} below 20"));
            return;
        }
        if data.len() < start + header_len {
            self.fail(LayerName::Ipv4, "options truncated");
            return;
        }
        let total_len = u16::from_be_bytes([data[start + 2], data[start + 3]]);
        if usize::from(total_len) < header_len {
            self.fail(
                LayerName::Ipv4,
                format!("total length {total_len} below header length {header_len}"),
            );
            return;
        }
        let flags_frag = u16::from_be_bytes([data[start + 6], data[start + 7]]);
        let info = Ipv4Info {
            src: Ipv4Addr::new(
                data[start + 12],
                data[start + 13],
                data[start + 14],
                data[start + 15],
            ),
            dst: Ipv4Addr::new(
                data[start + 16],
                data[start + 17],
                data[start + 18],
                data[start + 19],
            ),
            protocol: data[start + 9],
            total_len,
            header_len: header_len as u8,
            flags: (flags_frag >> 13) as u8,
            frag_offset: flags_frag & 0x1fff,
        };
        let payload_start = start + header_len;
        // Stated payload, clipped to what was captured; the stated side also
        // drops ethernet trailer padding.
        let stated = usize::from(total_len) - header_len;
        let available = data.len() - payload_start;
        let effective = stated.min(available);
        let truncated = stated > available;
        let protocol = info.protocol;
        let frag_offset = info.frag_offset;
        self.push(LayerBody::Ipv4(info), start..payload_start);
        if frag_offset > 0 {
            // non-first fragment: no transport header present
            return;
        }
        self.transport(protocol, payload_start, effective, truncated);
    }

    fn ipv6(&mut self, start: usize) {
        let data = self.data;
        if data.len() < start + 40 {
            self.fail(LayerName::Ipv6, "header shorter than 40 bytes");
            return;
        }
        let b = &data[start..start + 40];
        let version = b[0] >> 4;
        if version != 6 {
            self.fail(LayerName::Ipv6, format!("version {version} in ipv6 slot"));
            return;
        }
        let payload_len = u16::from_be_bytes([b[4], b[5]]);
        let next_header = b[6];
        let mut src = [0u8; 16];
        src.copy_from_slice(&b[8..24]);
        let mut dst = [0u8; 16];
        dst.copy_from_slice(&b[24..40]);
        let info = Ipv6Info {
            src: Ipv6Addr::from(src),
            dst: Ipv6Addr::from(dst),
            next_header,
            payload_len,
        };
        let payload_start = start + 40;
        let stated = usize::from(payload_len);
        let available = data.len() - payload_start;
        let effective = stated.min(available);
        let truncated = stated > available;
        self.push(LayerBody::Ipv6(info), start..payload_start);
        self.transport(next_header, payload_start, effective, truncated);
    }

    fn transport(&mut self, protocol: u8, start: usize, len: usize, truncated: bool) {
        match protocol {
            wire::IPPROTO_TCP => self.tcp(start, len, truncated),
            wire::IPPROTO_UDP => self.udp(start, len),
            // 58 is ICMPv6; both variants decode to type/code only
            wire::IPPROTO_ICMP | 58 => self.icmp(start, len),
            _ => self.data_layer(start..start + len),
        }
    }

    fn tcp(&mut self, start: usize, len: usize, truncated: bool) {
        let data = self.data;
        if len < 20 {
            self.fail(LayerName::Tcp, "header shorter than 20 bytes");
            return;
        }
        let b = &data[start..start + len];
        let header_len = usize::from(b[12] >> 4) * 4;
        if header_len < 20 {
            self.fail(LayerName::Tcp, format!("data offset {header_len} below 20"));
            return;
        }
        if header_len > len {
            self.fail(LayerName::Tcp, "options truncated");
            return;
        }
        let payload_len = (len - header_len) as u32;
        let info = TcpInfo {
            src_port: u16::from_be_bytes([b[0], b[1]]),
            dst_port: u16::from_be_bytes([b[2], b[3]]),
            seq: u32::from_be_bytes([b[4], b[5], b[6], b[7]]),
            ack: u32::from_be_bytes([b[8], b[9], b[10], b[11]]),
            flags: TcpFlags(b[13] & 0x3f),
            window: u16::from_be_bytes([b[14], b[15]]),
            header_len: header_len as u8,
            payload_len,
            truncated,
        };
        self.push(LayerBody::Tcp(info), start..start + header_len);
        self.data_layer(start + header_len..start + len);
    }

    fn udp(&mut self, start: usize, len: usize) {
        let data = self.data;
        if len < 8 {
            self.fail(LayerName::Udp, "header shorter than 8 bytes");
            return;
        }
        let b = &data[start..start + len];
        let src_port = u16::from_be_bytes([b[0], b[1]]);
        let dst_port = u16::from_be_bytes([b[2], b[3]]);
        let length = u16::from_be_bytes([b[4], b[5]]);
        if length < 8 {
            self.fail(LayerName::Udp, format!("length field {length} below 8"));
            return;
        }
        self.push(
            LayerBody::Udp(UdpInfo {
                src_port,
                dst_port,
                length,
            }),
            start..start + 8,
        );
        let app_len = (len - 8).min(usize::from(length) - 8);
        let app_start = start + 8;
        if src_port == 53 || dst_port == 53 {
            self.dns(app_start, app_len);
        } else {
            self.data_layer(app_start..app_start + app_len);
        }
    }

    fn icmp(&mut self, start: usize, len: usize) {
        let data = self.data;
        if len < 4 {
            self.fail(LayerName::Icmp, "header shorter than 4 bytes");
            return;
        }
        self.push(
            LayerBody::Icmp {
                icmp_type: data[start],
                code: data[start + 1],
            },
            start..start + 4,
        );
        self.data_layer(start + 4..start + len);
    }

    fn dns(&mut self, start: usize, len: usize) {
        match parse_dns(&self.data[start..start + len]) {
            Ok(info) => self.push(LayerBody::Dns(info), start..start + len),
            Err(reason) => self.fail(LayerName::Dns, reason),
        }
    }
}

fn mac(b: &[u8]) -> [u8; 6] {
    let mut out = [0u8; 6];
    out.copy_from_slice(b);
    out
}

/// Renders a MAC address in the conventional colon form.
pub fn format_mac(mac: &[u8; 6]) -> String {
    mac.iter()
        .map(|b| format!("{b:02x}"))
        .collect::<Vec<_>>()
        .join(":")
}

fn parse_dns(msg: &[u8]) -> Result<DnsInfo, String> {
    if msg.len() < 12 {
        return Err("message shorter than 12 bytes".into());
    }
    let id = u16::from_be_bytes([msg[0], msg[1]]);
    let flags = u16::from_be_bytes([msg[2], msg[3]]);
    let is_response = flags & 0x8000 != 0;
    let qdcount = u16::from_be_bytes([msg[4], msg[5]]);
    let ancount = u16::from_be_bytes([msg[6], msg[7]]);

    let mut pos = 12;
    for _ in 0..qdcount {
        let (_, next) = read_name(msg, pos)?;
        pos = next + 4; // qtype + qclass
        if pos > msg.len() {
            return Err("question section truncated".into());
        }
    }
    let mut answers = Vec::new();
    for _ in 0..ancount {
        let (name, next) = read_name(msg, pos)?;
        pos = next;
        if pos + 10 > msg.len() {
            return Err("answer record truncated".into());
        }
        let rtype = u16::from_be_bytes([msg[pos], msg[pos + 1]]);
        let rdlength = usize::from(u16::from_be_bytes([msg[pos + 8], msg[pos + 9]]));
        pos += 10;
        if pos + rdlength > msg.len() {
            return Err("rdata truncated".into());
        }
        let rdata = &msg[pos..pos + rdlength];
        pos += rdlength;
        match (rtype, rdlength) {
            (1, 4) => answers.push(DnsAnswer {
                name,
                rtype,
                addr: IpAddr::V4(Ipv4Addr::new(rdata[0], rdata[1], rdata[2], rdata[3])),
            }),
            (28, 16) => {
                let mut octets = [0u8; 16];
                octets.copy_from_slice(rdata);
                answers.push(DnsAnswer {
                    name,
                    rtype,
                    addr: IpAddr::V6(Ipv6Addr::from(octets)),
                });
            }
            _ => {} // other record types are skipped
        }
    }
    Ok(DnsInfo {
        id,
        is_response,
        answers,
    })
}

/// Decodes a possibly compressed DNS name starting at `pos`. Returns the
/// name and the offset just past it in the original (unjumped) stream.
fn read_name(msg: &[u8], start: usize) -> Result<(String, usize), String> {
    let mut labels: Vec<String> = Vec::new();
    let mut pos = start;
    let mut after = None;
    let mut jumps = 0;
    loop {
        if pos >= msg.len() {
            return Err("name runs past message end".into());
        }
        let len = msg[pos];
        if len == 0 {
            let end = after.unwrap_or(pos + 1);
            return Ok((labels.join("."), end));
        }
        if len & 0xc0 == 0xc0 {
            if pos + 1 >= msg.len() {
                return Err("compression pointer truncated".into());
            }
            jumps += 1;
            if jumps > 32 {
                return Err("compression pointer loop".into());
            }
            let target = usize::from(u16::from_be_bytes([msg[pos] & 0x3f, msg[pos + 1]]));
            after.get_or_insert(pos + 2);
            pos = target;
            continue;
        }
        if len & 0xc0 != 0 {
            return Err(format!("unsupported label type 0x{:02x}", len & 0xc0));
        }
        let len = usize::from(len);
        if pos + 1 + len > msg.len() {
            return Err("label runs past message end".into());
        }
        labels.push(String::from_utf8_lossy(&msg[pos + 1..pos + 1 + len]).into_owned());
        pos += 1 + len;
        if labels.len() > 128 {
            return Err("name has too many labels".into());
        }
    }
}

/// Decodes one frame. Total: never fails, failures land in `malformed`.
pub fn dissect_packet(record: &PacketRecord, linktype: u32) -> LayerStack {
    let mut d = Dissector {
        data: &record.data,
        stack: LayerStack::default(),
    };
    if linktype == LINKTYPE_ETHERNET {
        d.ethernet();
    } else {
        let len = record.data.len();
        d.data_layer(0..len);
    }
    d.stack
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capture::PacketRecord;
    use crate::wire;

    fn record(data: Vec<u8>) -> PacketRecord {
        PacketRecord::new(1, 0, data)
    }

    fn names(stack: &LayerStack) -> Vec<LayerName> {
        stack.layers.iter().map(|l| l.name()).collect()
    }

    #[test]
    fn arp_request_dissects_to_two_layers() {
        let frame = wire::arp_frame(
            [2, 0, 0, 0, 0, 15],
            [0xff; 6],
            [2, 0, 0, 0, 0, 15],
            Ipv4Addr::new(192, 168, 100, 15),
            [0; 6],
            Ipv4Addr::new(192, 168, 100, 1),
            false,
        );
        assert_eq!(frame.len(), 42);
        let stack = dissect_packet(&record(frame), 1);
        assert_eq!(names(&stack), vec![LayerName::Ethernet, LayerName::Arp]);
        assert!(stack.malformed.is_none());
        match &stack.layers[1].body {
            LayerBody::Arp(arp) => {
                assert_eq!(arp.opcode, 1);
                assert_eq!(arp.sender_ip, Ipv4Addr::new(192, 168, 100, 15));
                assert_eq!(arp.target_ip, Ipv4Addr::new(192, 168, 100, 1));
            }
            other => panic!("expected arp, got {other:?}"),
        }
    }

    #[test]
    fn tcp_syn_dissects_with_zero_payload() {
        let frame = wire::tcp_frame(
            [2, 0, 0, 0, 0, 15],
            [2, 0, 0, 0, 0, 1],
            Ipv4Addr::new(192, 168, 100, 15),
            Ipv4Addr::new(192, 168, 100, 1),
            54321,
            80,
            12345,
            0,
            TcpFlags::SYN,
            65535,
            &[],
        );
        let stack = dissect_packet(&record(frame), 1);
        assert_eq!(
            names(&stack),
            vec![LayerName::Ethernet, LayerName::Ipv4, LayerName::Tcp]
        );
        let tcp = stack.tcp().unwrap();
        assert!(tcp.flags.syn() && !tcp.flags.ack());
        assert_eq!(tcp.payload_len, 0);
        assert_eq!(tcp.seq, 12345);
        assert_eq!(tcp.header_len, 20);
    }

    #[test]
    fn short_frame_is_malformed_at_ethernet() {
        let stack = dissect_packet(&record(vec![0u8; 10]), 1);
        assert!(stack.layers.is_empty());
        let m = stack.malformed.unwrap();
        assert_eq!(m.layer, LayerName::Ethernet);
        assert_eq!(m.reason, "frame shorter than 14 bytes");
    }

    #[test]
    fn non_ethernet_linktype_yields_data_layer() {
        let stack = dissect_packet(&record(vec![1, 2, 3, 4]), 101);
        assert_eq!(names(&stack), vec![LayerName::Data]);
        assert!(stack.malformed.is_none());
    }

    #[test]
    fn tcp_payload_becomes_data_layer() {
        let frame = wire::tcp_frame(
            [2, 0, 0, 0, 0, 15],
            [2, 0, 0, 0, 0, 1],
            Ipv4Addr::new(10, 0, 0, 1),
            Ipv4Addr::new(10, 0, 0, 2),
            1000,
            2000,
            1,
            1,
            TcpFlags::ACK.with(TcpFlags::PSH),
            4096,
            &[0xab; 100],
        );
        let stack = dissect_packet(&record(frame), 1);
        assert_eq!(
            names(&stack),
            vec![
                LayerName::Ethernet,
                LayerName::Ipv4,
                LayerName::Tcp,
                LayerName::Data
            ]
        );
        assert_eq!(stack.tcp().unwrap().payload_len, 100);
    }

    #[test]
    fn dns_response_parses_answer() {
        let frame = wire::dns_response_frame(
            [2, 0, 0, 0, 0, 1],
            [2, 0, 0, 0, 0, 15],
            Ipv4Addr::new(192, 168, 100, 1),
            Ipv4Addr::new(192, 168, 100, 15),
            40000,
            7,
            "example.test",
            Ipv4Addr::new(93, 184, 216, 34),
        );
        let stack = dissect_packet(&record(frame), 1);
        assert_eq!(
            names(&stack),
            vec![
                LayerName::Ethernet,
                LayerName::Ipv4,
                LayerName::Udp,
                LayerName::Dns
            ]
        );
        let dns = stack.dns().unwrap();
        assert!(dns.is_response);
        assert_eq!(dns.id, 7);
        assert_eq!(dns.answers.len(), 1);
        assert_eq!(dns.answers[0].name, "example.test");
        assert_eq!(
            dns.answers[0].addr,
            IpAddr::V4(Ipv4Addr::new(93, 184, 216, 34))
        );
    }

    #[test]
    fn vlan_tag_is_skipped() {
        let inner = wire::tcp_frame(
            [2, 0, 0, 0, 0, 15],
            [2, 0, 0, 0, 0, 1],
            Ipv4Addr::new(10, 0, 0, 1),
            Ipv4Addr::new(10, 0, 0, 2),
            1000,
            2000,
            1,
            0,
            TcpFlags::SYN,
            4096,
            &[],
        );
        // splice a vlan tag between the MACs and the ethertype
        let mut frame = inner[..12].to_vec();
        frame.extend_from_slice(&wire::ETHERTYPE_VLAN.to_be_bytes());
        frame.extend_from_slice(&[0x00, 0x64]); // vlan id 100
        frame.extend_from_slice(&inner[12..]);
        let stack = dissect_packet(&record(frame), 1);
        assert_eq!(
            names(&stack),
            vec![LayerName::Ethernet, LayerName::Ipv4, LayerName::Tcp]
        );
        assert_eq!(stack.ethernet().unwrap().ethertype, wire::ETHERTYPE_IPV4);
        assert_eq!(stack.layers[0].range, 0..18);
    }

    #[test]
    fn ipv4_fragment_stops_at_ip_layer() {
        let mut frame = wire::udp_frame(
            [2, 0, 0, 0, 0, 15],
            [2, 0, 0, 0, 0, 1],
            Ipv4Addr::new(10, 0, 0, 1),
            Ipv4Addr::new(10, 0, 0, 2),
            1000,
            2000,
            &[1, 2, 3, 4],
        );
        // fragment offset 8 (one unit), keep checksum stale: not validated
        frame[20] = 0x00;
        frame[21] = 0x01;
        let stack = dissect_packet(&record(frame), 1);
        assert_eq!(names(&stack), vec![LayerName::Ethernet, LayerName::Ipv4]);
        assert!(stack.malformed.is_none());
    }

    #[test]
    fn truncated_tcp_header_keeps_outer_layers() {
        let frame = wire::tcp_frame(
            [2, 0, 0, 0, 0, 15],
            [2, 0, 0, 0, 0, 1],
            Ipv4Addr::new(10, 0, 0, 1),
            Ipv4Addr::new(10, 0, 0, 2),
            1000,
            2000,
            1,
            0,
            TcpFlags::SYN,
            4096,
            &[],
        );
        let cut = frame[..frame.len() - 10].to_vec(); // 10 bytes into the tcp header
        let stack = dissect_packet(&record(cut), 1);
        assert_eq!(names(&stack), vec![LayerName::Ethernet, LayerName::Ipv4]);
        let m = stack.malformed.unwrap();
        assert_eq!(m.layer, LayerName::Tcp);
    }

    #[test]
    fn protocol_path_prefixes_frame() {
        let frame = wire::udp_frame(
            [2, 0, 0, 0, 0, 15],
            [2, 0, 0, 0, 0, 1],
            Ipv4Addr::new(10, 0, 0, 1),
            Ipv4Addr::new(10, 0, 0, 2),
            1000,
            2000,
            &[],
        );
        let stack = dissect_packet(&record(frame), 1);
        assert_eq!(protocol_path(&stack), vec!["frame", "ethernet", "ipv4", "udp"]);

        let empty = dissect_packet(&record(vec![]), 1);
        assert_eq!(protocol_path(&empty), vec!["frame"]);
    }

    #[test]
    fn layer_ranges_stay_inside_frame_and_ordered() {
        let frame = wire::dns_query_frame(
            [2, 0, 0, 0, 0, 15],
            [2, 0, 0, 0, 0, 1],
            Ipv4Addr::new(10, 0, 0, 1),
            Ipv4Addr::new(10, 0, 0, 2),
            40000,
            3,
            "example.test",
        );
        let len = frame.len();
        let stack = dissect_packet(&record(frame), 1);
        let mut prev_end = 0;
        for layer in &stack.layers {
            assert!(layer.range.start >= prev_end);
            assert!(layer.range.end <= len);
            prev_end = layer.range.end;
        }
    }

    #[test]
    fn ethernet_padding_is_not_counted_as_payload() {
        let mut frame = wire::tcp_frame(
            [2, 0, 0, 0, 0, 15],
            [2, 0, 0, 0, 0, 1],
            Ipv4Addr::new(10, 0, 0, 1),
            Ipv4Addr::new(10, 0, 0, 2),
            1000,
            2000,
            1,
            1,
            TcpFlags::ACK,
            4096,
            &[],
        );
        frame.resize(60, 0); // pad to the classic minimum frame size
        let stack = dissect_packet(&record(frame), 1);
        assert_eq!(stack.tcp().unwrap().payload_len, 0);
        assert!(!stack.has(LayerName::Data));
    }
}
