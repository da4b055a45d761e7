//! Frame builders for synthetic captures.
//!
//! Each function returns complete frame bytes starting at the Ethernet
//! header. IPv4, TCP, and UDP checksums are computed so the output loads
//! cleanly in other analyzers. Frames are not padded to the 60-byte
//! Ethernet minimum; captures of synthetic traffic keep exact sizes.

use std::net::Ipv4Addr;

pub const ETHERTYPE_IPV4: u16 = 0x0800;
pub const ETHERTYPE_ARP: u16 = 0x0806;
pub const ETHERTYPE_VLAN: u16 = 0x8100;
pub const ETHERTYPE_IPV6: u16 = 0x86dd;

pub const IPPROTO_ICMP: u8 = 1;
pub const IPPROTO_TCP: u8 = 6;
pub const IPPROTO_UDP: u8 = 17;

/// TCP flag bits as transmitted, low byte of the flags field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TcpFlags(pub u8);

impl TcpFlags {
    pub const FIN: TcpFlags = TcpFlags(0x01);
    pub const SYN: TcpFlags = TcpFlags(0x02);
    pub const RST: TcpFlags = TcpFlags(0x04);
    pub const PSH: TcpFlags = TcpFlags(0x08);
    pub const ACK: TcpFlags = TcpFlags(0x10);
    pub const URG: TcpFlags = TcpFlags(0x20);

    pub fn with(self, other: TcpFlags) -> TcpFlags {
        TcpFlags(self.0 | other.0)
    }

    pub fn contains(self, other: TcpFlags) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn syn(self) -> bool {
        self.contains(TcpFlags::SYN)
    }
    pub fn ack(self) -> bool {
        self.contains(TcpFlags::ACK)
    }
    pub fn fin(self) -> bool {
        self.contains(TcpFlags::FIN)
    }
    pub fn rst(self) -> bool {
        self.contains(TcpFlags::RST)
    }
    pub fn psh(self) -> bool {
        self.contains(TcpFlags::PSH)
    }
    pub fn urg(self) -> bool {
        self.contains(TcpFlags::URG)
    }

    /// Names of the set flags in display order, e.g. `["SYN", "ACK"]`.
    pub fn names(self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.syn() {
            out.push("SYN");
        }
        if self.fin() {
            out.push("FIN");
        }
        if self.rst() {
            out.push("RST");
        }
        if self.psh() {
            out.push("PSH");
        }
        if self.ack() {
            out.push("ACK");
        }
        if self.urg() {
            out.push("URG");
        }
        out
    }
}

impl std::fmt::Display for TcpFlags {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.names().join(", "))
    }
}

fn ethernet_header(dst: [u8; 6], src: [u8; 6], ethertype: u16) -> Vec<u8> {
    let mut out = Vec::with_capacity(14);
    out.extend_from_slice(&dst);
    out.extend_from_slice(&src);
    out.extend_from_slice(&ethertype.to_be_bytes());
    out
}

/// RFC 1071 ones'-complement checksum over `data`, seeded with `initial`.
fn inet_checksum(initial: u32, data: &[u8]) -> u16 {
    let mut sum = initial;
    let mut chunks = data.chunks_exact(2);
    for pair in &mut chunks {
        sum += u32::from(u16::from_be_bytes([pair[0], pair[1]]));
    }
    if let [last] = chunks.remainder() {
        sum += u32::from(u16::from_be_bytes([*last, 0]));
    }
    while sum > 0xffff {
        sum = (sum & 0xffff) + (sum >> 16);
    }
    !(sum as u16)
}

fn ipv4_header(src: Ipv4Addr, dst: Ipv4Addr, protocol: u8, payload_len: usize) -> Vec<u8> {
    let total_len = (20 + payload_len) as u16;
    let mut h = vec![0u8; 20];
    h[0] = 0x45; // version 4, ihl 5
    h[2..4].copy_from_slice(&total_len.to_be_bytes());
    h[6] = 0x40; // don't fragment
    h[8] = 64; // ttl
    h[9] = protocol;
    h[12..16].copy_from_slice(&src.octets());
    h[16..20].copy_from_slice(&dst.octets());
    let csum = inet_checksum(0, &h);
    h[10..12].copy_from_slice(&csum.to_be_bytes());
    h
}

fn pseudo_header_sum(src: Ipv4Addr, dst: Ipv4Addr, protocol: u8, len: usize) -> u32 {
    let mut sum = 0u32;
    for pair in src.octets().chunks(2).chain(dst.octets().chunks(2)) {
        sum += u32::from(u16::from_be_bytes([pair[0], pair[1]]));
    }
    sum += u32::from(protocol);
    sum += len as u32;
    sum
}

/// Ethernet + IPv4 + TCP frame.
#[allow(clippy::too_many_arguments)]
pub fn tcp_frame(
    src_mac: [u8; 6],
    dst_mac: [u8; 6],
    src_ip: Ipv4Addr,
    dst_ip: Ipv4Addr,
    src_port: u16,
    dst_port: u16,
    seq: u32,
    ack: u32,
    flags: TcpFlags,
    window: u16,
    payload: &[u8],
) -> Vec<u8> {
    let mut tcp = vec![0u8; 20];
    tcp[0..2].copy_from_slice(&src_port.to_be_bytes());
    tcp[2..4].copy_from_slice(&dst_port.to_be_bytes());
    tcp[4..8].copy_from_slice(&seq.to_be_bytes());
    tcp[8..12].copy_from_slice(&ack.to_be_bytes());
    tcp[12] = 5 << 4; // data offset 5 words
    tcp[13] = flags.0;
    tcp[14..16].copy_from_slice(&window.to_be_bytes());
    tcp.extend_from_slice(payload);
    let seed = pseudo_header_sum(src_ip, dst_ip, IPPROTO_TCP, tcp.len());
    let csum = inet_checksum(seed, &tcp);
    tcp[16..18].copy_from_slice(&csum.to_be_bytes());

    let mut frame = ethernet_header(dst_mac, src_mac, ETHERTYPE_IPV4);
    frame.extend_from_slice(&ipv4_header(src_ip, dst_ip, IPPROTO_TCP, tcp.len()));
    frame.extend_from_slice(&tcp);
    frame
}

/// Ethernet + IPv4 + UDP frame.
pub fn udp_frame(
    src_mac: [u8; 6],
    dst_mac: [u8; 6],
    src_ip: Ipv4Addr,
    dst_ip: Ipv4Addr,
    src_port: u16,
    dst_port: u16,
    payload: &[u8],
) -> Vec<u8> {
    let udp_len = (8 + payload.len()) as u16;
    let mut udp = vec![0u8; 8];
    udp[0..2].copy_from_slice(&src_port.to_be_bytes());
    udp[2..4].copy_from_slice(&dst_port.to_be_bytes());
    udp[4..6].copy_from_slice(&udp_len.to_be_bytes());
    udp.extend_from_slice(payload);
    let seed = pseudo_header_sum(src_ip, dst_ip, IPPROTO_UDP, udp.len());
    let csum = inet_checksum(seed, &udp);
    let csum = if csum == 0 { 0xffff } else { csum };
    udp[6..8].copy_from_slice(&csum.to_be_bytes());

    let mut frame = ethernet_header(dst_mac, src_mac, ETHERTYPE_IPV4);
    frame.extend_from_slice(&ipv4_header(src_ip, dst_ip, IPPROTO_UDP, udp.len()));
    frame.extend_from_slice(&udp);
    frame
}

/// Ethernet ARP request (`reply = false`) or reply.
pub fn arp_frame(
    src_mac: [u8; 6],
    dst_mac: [u8; 6],
    sender_mac: [u8; 6],
    sender_ip: Ipv4Addr,
    target_mac: [u8; 6],
    target_ip: Ipv4Addr,
    reply: bool,
) -> Vec<u8> {
    let mut arp = Vec::with_capacity(28);
    arp.extend_from_slice(&1u16.to_be_bytes()); // hardware type: ethernet
    arp.extend_from_slice(&ETHERTYPE_IPV4.to_be_bytes());
    arp.push(6); // hardware size
    arp.push(4); // protocol size
    arp.extend_from_slice(&(if reply { 2u16 } else { 1u16 }).to_be_bytes());
    arp.extend_from_slice(&sender_mac);
    arp.extend_from_slice(&sender_ip.octets());
    arp.extend_from_slice(&target_mac);
    arp.extend_from_slice(&target_ip.octets());

    let mut frame = ethernet_header(dst_mac, src_mac, ETHERTYPE_ARP);
    frame.extend_from_slice(&arp);
    frame
}

fn dns_name(name: &str) -> Vec<u8> {
    let mut out = Vec::new();
    for label in name.split('.').filter(|l| !l.is_empty()) {
        out.push(label.len() as u8);
        out.extend_from_slice(label.as_bytes());
    }
    out.push(0);
    out
}

fn dns_message(id: u16, name: &str, answer: Option<Ipv4Addr>) -> Vec<u8> {
    let mut msg = Vec::new();
    msg.extend_from_slice(&id.to_be_bytes());
    let flags: u16 = if answer.is_some() { 0x8180 } else { 0x0100 };
    msg.extend_from_slice(&flags.to_be_bytes());
    msg.extend_from_slice(&1u16.to_be_bytes()); // questions
    msg.extend_from_slice(&(if answer.is_some() { 1u16 } else { 0 }).to_be_bytes());
    msg.extend_from_slice(&0u16.to_be_bytes()); // authority
    msg.extend_from_slice(&0u16.to_be_bytes()); // additional
    msg.extend_from_slice(&dns_name(name));
    msg.extend_from_slice(&1u16.to_be_bytes()); // type A
    msg.extend_from_slice(&1u16.to_be_bytes()); // class IN
    if let Some(addr) = answer {
        msg.extend_from_slice(&[0xc0, 0x0c]); // compressed pointer to the question name
        msg.extend_from_slice(&1u16.to_be_bytes());
        msg.extend_from_slice(&1u16.to_be_bytes());
        msg.extend_from_slice(&300u32.to_be_bytes()); // ttl
        msg.extend_from_slice(&4u16.to_be_bytes());
        msg.extend_from_slice(&addr.octets());
    }
    msg
}

/// UDP DNS A query for `name`.
#[allow(clippy::too_many_arguments)]
pub fn dns_query_frame(
    src_mac: [u8; 6],
    dst_mac: [u8; 6],
    src_ip: Ipv4Addr,
    dst_ip: Ipv4Addr,
    src_port: u16,
    id: u16,
    name: &str,
) -> Vec<u8> {
    let msg = dns_message(id, name, None);
    udp_frame(src_mac, dst_mac, src_ip, dst_ip, src_port, 53, &msg)
}

/// UDP DNS response carrying one A answer `name -> addr`.
#[allow(clippy::too_many_arguments)]
pub fn dns_response_frame(
    src_mac: [u8; 6],
    dst_mac: [u8; 6],
    src_ip: Ipv4Addr,
    dst_ip: Ipv4Addr,
    dst_port: u16,
    id: u16,
    name: &str,
    addr: Ipv4Addr,
) -> Vec<u8> {
    let msg = dns_message(id, name, Some(addr));
    udp_frame(src_mac, dst_mac, src_ip, dst_ip, 53, dst_port, &msg)
}
