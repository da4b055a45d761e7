//! Deterministic synthetic capture generation.
//!
//! A [`FixtureScenario`] declares devices and a timeline of traffic events;
//! [`generate_fixture`] expands it into fully formed Ethernet frames with
//! consistent TCP sequence arithmetic. The same scenario always produces
//! byte-identical records.

use std::collections::HashMap;
use std::net::Ipv4Addr;

use crate::capture::{Capture, CaptureHeader, PacketRecord};
use crate::tcp::Dir;
use crate::wire::{self, TcpFlags};

/// Default receive window advertised by generated endpoints.
pub const DEFAULT_WINDOW: u16 = 64_240;

const BROADCAST_MAC: [u8; 6] = [0xff; 6];
const ZERO_MAC: [u8; 6] = [0; 6];

/// Locally administered MAC derived from the IP's last octet.
pub fn derive_mac(ip: Ipv4Addr) -> [u8; 6] {
    [0x02, 0, 0, 0, 0, ip.octets()[3]]
}

/// Deterministic printable payload of the given length.
pub fn payload_bytes(len: u32) -> Vec<u8> {
    (0..len).map(|i| b'a' + (i % 26) as u8).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Device {
    pub label: String,
    pub ip: Ipv4Addr,
    pub mac: [u8; 6],
}

impl Device {
    pub fn new(label: &str, ip: Ipv4Addr) -> Device {
        Device {
            label: label.to_owned(),
            ip,
            mac: derive_mac(ip),
        }
    }
}

/// One traffic event. TCP events reference a stream declared by a prior
/// [`Event::Handshake`]; `dir` is relative to that handshake's initiator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Event {
    /// SYN / SYN-ACK / ACK exchange declaring `stream`.
    Handshake {
        stream: String,
        client: String,
        server: String,
        client_port: u16,
        server_port: u16,
        rtt_nanos: u64,
    },
    /// Data segments in one direction, `gap_nanos` apart; each is answered
    /// by a pure ACK `ack_delay_nanos` later when `acked` is set.
    Transfer {
        stream: String,
        dir: Dir,
        sizes: Vec<u32>,
        gap_nanos: u64,
        ack_delay_nanos: u64,
        acked: bool,
    },
    /// FIN from `dir`, FIN from the peer, final ACK.
    Fin {
        stream: String,
        dir: Dir,
        rtt_nanos: u64,
    },
    /// Connection abort from `dir`.
    Rst { stream: String, dir: Dir },
    /// Explicit pure ACK from `dir` reflecting current stream state.
    PureAck { stream: String, dir: Dir },
    /// Re-send of the stream's most recent data segment, byte-identical.
    Retransmit { stream: String },
    /// Pure ACK from `dir` advertising a zero receive window.
    ZeroWindow { stream: String, dir: Dir },
    /// `count` byte-identical repeats of `dir`'s last pure ACK.
    DupAck {
        stream: String,
        dir: Dir,
        count: u32,
    },
    /// UDP datagram and optional reply `delay_nanos` later.
    Udp {
        from: String,
        to: String,
        src_port: u16,
        dst_port: u16,
        payload_len: u32,
        reply_len: Option<u32>,
        delay_nanos: u64,
    },
    /// DNS A query and its response carrying `answer`.
    Dns {
        client: String,
        server: String,
        client_port: u16,
        name: String,
        answer: Ipv4Addr,
        delay_nanos: u64,
    },
    /// ARP who-has broadcast and its reply.
    Arp {
        requester: String,
        responder: String,
        delay_nanos: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimedEvent {
    pub at_nanos: u64,
    pub event: Event,
}

impl TimedEvent {
    pub fn at(secs: f64, event: Event) -> TimedEvent {
        TimedEvent {
            at_nanos: crate::secs_to_nanos(secs),
            event,
        }
    }
}

/// Scenario: devices plus a timeline of events with nondecreasing
/// timestamps. `strict` rejects traffic the stream state cannot carry
/// (transfer after FIN/RST, injections without a reference frame).
#[derive(Debug, Clone, PartialEq)]
pub struct FixtureScenario {
    pub devices: Vec<Device>,
    pub events: Vec<TimedEvent>,
    pub strict: bool,
}

impl FixtureScenario {
    pub fn new() -> FixtureScenario {
        FixtureScenario {
            devices: Vec::new(),
            events: Vec::new(),
            strict: true,
        }
    }

    pub fn device(&self, label: &str) -> Option<&Device> {
        self.devices.iter().find(|d| d.label == label)
    }
}

impl Default for FixtureScenario {
    fn default() -> Self {
        FixtureScenario::new()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("inconsistent scenario: {message}")]
pub struct InconsistentScenario {
    pub message: String,
}

/// Per-stream generator state. Index 0 is the handshake initiator.
struct StreamState {
    macs: [[u8; 6]; 2],
    ips: [Ipv4Addr; 2],
    ports: [u16; 2],
    next_seq: [u32; 2],
    window: [u16; 2],
    fin: [bool; 2],
    reset: bool,
    last_payload: Option<StoredSegment>,
    last_pure_ack: [Option<(u32, u16)>; 2],
}

/// Fields of an emitted data segment, kept for byte-identical re-sends.
struct StoredSegment {
    dir: usize,
    seq: u32,
    ack: u32,
    flags: TcpFlags,
    window: u16,
    payload: Vec<u8>,
}

impl StreamState {
    fn frame(&self, dir: usize, seq: u32, ack: u32, flags: TcpFlags, window: u16, payload: &[u8]) -> Vec<u8> {
        let peer = 1 - dir;
        wire::tcp_frame(
            self.macs[dir],
            self.macs[peer],
            self.ips[dir],
            self.ips[peer],
            self.ports[dir],
            self.ports[peer],
            seq,
            ack,
            flags,
            window,
            payload,
        )
    }

    /// Pure ACK reflecting current state; records it for dup-ack tracking.
    fn pure_ack(&mut self, dir: usize, window: u16) -> Vec<u8> {
        let ack = self.next_seq[1 - dir];
        self.last_pure_ack[dir] = Some((ack, window));
        self.frame(dir, self.next_seq[dir], ack, TcpFlags::ACK, window, &[])
    }
}

struct Generator<'a> {
    scenario: &'a FixtureScenario,
    streams: HashMap<&'a str, StreamState>,
    frames: Vec<(u64, Vec<u8>)>,
    handshakes: u32,
    dns_queries: u16,
}

impl<'a> Generator<'a> {
    fn device(&self, label: &str) -> Result<&'a Device, String> {
        self.scenario
            .device(label)
            .ok_or_else(|| format!("unknown device \"{label}\""))
    }

    fn stream(&mut self, name: &str) -> Result<&mut StreamState, String> {
        self.streams
            .get_mut(name)
            .ok_or_else(|| format!("stream \"{name}\" has no handshake"))
    }

    fn push(&mut self, at: u64, frame: Vec<u8>) {
        self.frames.push((at, frame));
    }

    fn run_event(&mut self, at: u64, event: &'a Event) -> Result<(), String> {
        let strict = self.scenario.strict;
        match event {
            Event::Handshake {
                stream,
                client,
                server,
                client_port,
                server_port,
                rtt_nanos,
            } => {
                if self.streams.contains_key(stream.as_str()) {
                    return Err(format!("stream \"{stream}\" declared twice"));
                }
                let c = self.device(client)?;
                let s = self.device(server)?;
                let isn_a = 1_000_000u32 + 200_000 * self.handshakes;
                let isn_b = isn_a + 100_000;
                self.handshakes += 1;
                let mut st = StreamState {
                    macs: [c.mac, s.mac],
                    ips: [c.ip, s.ip],
                    ports: [*client_port, *server_port],
                    next_seq: [isn_a.wrapping_add(1), isn_b.wrapping_add(1)],
                    window: [DEFAULT_WINDOW; 2],
                    fin: [false; 2],
                    reset: false,
                    last_payload: None,
                    last_pure_ack: [None; 2],
                };
                let w = DEFAULT_WINDOW;
                let syn = st.frame(0, isn_a, 0, TcpFlags::SYN, w, &[]);
                let syn_ack = st.frame(
                    1,
                    isn_b,
                    isn_a.wrapping_add(1),
                    TcpFlags::SYN.with(TcpFlags::ACK),
                    w,
                    &[],
                );
                let ack = st.pure_ack(0, w);
                self.push(at, syn);
                self.push(at + rtt_nanos / 2, syn_ack);
                self.push(at + rtt_nanos, ack);
                self.streams.insert(stream.as_str(), st);
                Ok(())
            }
            Event::Transfer {
                stream,
                dir,
                sizes,
                gap_nanos,
                ack_delay_nanos,
                acked,
            } => {
                if sizes.is_empty() {
                    return Err("transfer needs at least one size".to_owned());
                }
                if sizes.contains(&0) {
                    return Err("transfer sizes must be positive".to_owned());
                }
                let d = dir.index();
                let st = self.stream(stream)?;
                if strict && (st.fin[d] || st.reset) {
                    return Err(format!("stream \"{stream}\" is closed in direction {dir}"));
                }
                let mut out = Vec::new();
                for (i, &size) in sizes.iter().enumerate() {
                    let t = at + gap_nanos * i as u64;
                    let payload = payload_bytes(size);
                    let seq = st.next_seq[d];
                    let ack = st.next_seq[1 - d];
                    let flags = TcpFlags::PSH.with(TcpFlags::ACK);
                    out.push((t, st.frame(d, seq, ack, flags, st.window[d], &payload)));
                    st.last_payload = Some(StoredSegment {
                        dir: d,
                        seq,
                        ack,
                        flags,
                        window: st.window[d],
                        payload,
                    });
                    st.next_seq[d] = seq.wrapping_add(size);
                    if *acked {
                        let frame = st.pure_ack(1 - d, st.window[1 - d]);
                        out.push((t + ack_delay_nanos, frame));
                    }
                }
                for (t, frame) in out {
                    self.push(t, frame);
                }
                Ok(())
            }
            Event::Fin {
                stream,
                dir,
                rtt_nanos,
            } => {
                let d = dir.index();
                let st = self.stream(stream)?;
                if strict && (st.fin[d] || st.reset) {
                    return Err(format!("stream \"{stream}\" already closed in direction {dir}"));
                }
                let fin_flags = TcpFlags::FIN.with(TcpFlags::ACK);
                let first = st.frame(d, st.next_seq[d], st.next_seq[1 - d], fin_flags, st.window[d], &[]);
                st.next_seq[d] = st.next_seq[d].wrapping_add(1);
                st.fin[d] = true;
                let second = st.frame(
                    1 - d,
                    st.next_seq[1 - d],
                    st.next_seq[d],
                    fin_flags,
                    st.window[1 - d],
                    &[],
                );
                st.next_seq[1 - d] = st.next_seq[1 - d].wrapping_add(1);
                st.fin[1 - d] = true;
                let last = st.pure_ack(d, st.window[d]);
                self.push(at, first);
                self.push(at + rtt_nanos / 2, second);
                self.push(at + rtt_nanos, last);
                Ok(())
            }
            Event::Rst { stream, dir } => {
                let d = dir.index();
                let st = self.stream(stream)?;
                let frame = st.frame(
                    d,
                    st.next_seq[d],
                    st.next_seq[1 - d],
                    TcpFlags::RST.with(TcpFlags::ACK),
                    st.window[d],
                    &[],
                );
                st.reset = true;
                self.push(at, frame);
                Ok(())
            }
            Event::PureAck { stream, dir } => {
                let d = dir.index();
                let st = self.stream(stream)?;
                let frame = st.pure_ack(d, st.window[d]);
                self.push(at, frame);
                Ok(())
            }
            Event::Retransmit { stream } => {
                let st = self.stream(stream)?;
                let seg = st
                    .last_payload
                    .as_ref()
                    .ok_or("no data segment to retransmit")?;
                let frame = st.frame(seg.dir, seg.seq, seg.ack, seg.flags, seg.window, &seg.payload);
                self.push(at, frame);
                Ok(())
            }
            Event::ZeroWindow { stream, dir } => {
                let d = dir.index();
                let st = self.stream(stream)?;
                let frame = st.pure_ack(d, 0);
                self.push(at, frame);
                Ok(())
            }
            Event::DupAck { stream, dir, count } => {
                if *count == 0 {
                    return Err("dup-ack count must be positive".to_owned());
                }
                let d = dir.index();
                let st = self.stream(stream)?;
                let (ack, window) = match st.last_pure_ack[d] {
                    Some(pair) => pair,
                    None if strict => {
                        return Err(format!("stream \"{stream}\" has no pure ACK to duplicate"))
                    }
                    None => (st.next_seq[1 - d], st.window[d]),
                };
                st.last_pure_ack[d] = Some((ack, window));
                let frame = st.frame(d, st.next_seq[d], ack, TcpFlags::ACK, window, &[]);
                for _ in 0..*count {
                    self.push(at, frame.clone());
                }
                Ok(())
            }
            Event::Udp {
                from,
                to,
                src_port,
                dst_port,
                payload_len,
                reply_len,
                delay_nanos,
            } => {
                let a = self.device(from)?;
                let b = self.device(to)?;
                let query = wire::udp_frame(
                    a.mac,
                    b.mac,
                    a.ip,
                    b.ip,
                    *src_port,
                    *dst_port,
                    &payload_bytes(*payload_len),
                );
                self.push(at, query);
                if let Some(len) = reply_len {
                    let reply = wire::udp_frame(
                        b.mac,
                        a.mac,
                        b.ip,
                        a.ip,
                        *dst_port,
                        *src_port,
                        &payload_bytes(*len),
                    );
                    self.push(at + delay_nanos, reply);
                }
                Ok(())
            }
            Event::Dns {
                client,
                server,
                client_port,
                name,
                answer,
                delay_nanos,
            } => {
                let c = self.device(client)?;
                let s = self.device(server)?;
                let id = 0x1000u16.wrapping_add(self.dns_queries);
                self.dns_queries = self.dns_queries.wrapping_add(1);
                let query = wire::dns_query_frame(c.mac, s.mac, c.ip, s.ip, *client_port, id, name);
                let response =
                    wire::dns_response_frame(s.mac, c.mac, s.ip, c.ip, *client_port, id, name, *answer);
                self.push(at, query);
                self.push(at + delay_nanos, response);
                Ok(())
            }
            Event::Arp {
                requester,
                responder,
                delay_nanos,
            } => {
                let r = self.device(requester)?;
                let s = self.device(responder)?;
                let request = wire::arp_frame(r.mac, BROADCAST_MAC, r.mac, r.ip, ZERO_MAC, s.ip, false);
                let reply = wire::arp_frame(s.mac, r.mac, s.mac, s.ip, r.mac, r.ip, true);
                self.push(at, request);
                self.push(at + delay_nanos, reply);
                Ok(())
            }
        }
    }
}

/// Expands a scenario into timestamp-ordered packet records. Pure: the
/// same scenario always yields byte-identical records.
pub fn generate_fixture(scenario: &FixtureScenario) -> Result<Vec<PacketRecord>, InconsistentScenario> {
    let fail = |message: String| InconsistentScenario { message };
    let mut seen = HashMap::new();
    for device in &scenario.devices {
        if seen.insert(device.label.as_str(), ()).is_some() {
            return Err(fail(format!("device \"{}\" declared twice", device.label)));
        }
    }

    let mut generator = Generator {
        scenario,
        streams: HashMap::new(),
        frames: Vec::new(),
        handshakes: 0,
        dns_queries: 0,
    };
    let mut previous = 0u64;
    for (i, timed) in scenario.events.iter().enumerate() {
        let ordinal = i + 1;
        if timed.at_nanos < previous {
            return Err(fail(format!("event {ordinal}: timestamp precedes event {i}")));
        }
        previous = timed.at_nanos;
        generator
            .run_event(timed.at_nanos, &timed.event)
            .map_err(|message| fail(format!("event {ordinal}: {message}")))?;
    }

    let mut frames = generator.frames;
    frames.sort_by_key(|&(at, _)| at);
    Ok(frames
        .into_iter()
        .enumerate()
        .map(|(i, (at, data))| PacketRecord::new(i + 1, at, data))
        .collect())
}

/// Generates and wraps the records in an in-memory capture.
pub fn generate_capture(scenario: &FixtureScenario) -> Result<Capture, InconsistentScenario> {
    Ok(Capture {
        header: CaptureHeader::new(65_535),
        records: generate_fixture(scenario)?,
        truncated: None,
    })
}

/// Home-network scenario modeled on a small WLAN: a router and six client
/// devices exchanging web, streaming, gaming, DNS, NTP, and ARP traffic.
/// `dedup` renumbers the second 192.168.100.47 device, which otherwise
/// keeps its conflicting address on purpose.
pub fn home_network_scenario(dedup: bool) -> FixtureScenario {
    let ip = |last| Ipv4Addr::new(192, 168, 100, last);
    let mut scenario = FixtureScenario::new();
    scenario.devices = vec![
        Device::new("router", ip(1)),
        Device::new("laptop1", ip(15)),
        Device::new("laptop2", ip(47)),
        Device::new("phone1", ip(62)),
        Device::new("phone2", ip(23)),
        Device::new("tv", ip(35)),
        Device::new("ps5", if dedup { ip(48) } else { ip(47) }),
    ];
    let tcp = |stream: &str, client: &str, client_port, server_port, rtt_nanos| Event::Handshake {
        stream: stream.to_owned(),
        client: client.to_owned(),
        server: "router".to_owned(),
        client_port,
        server_port,
        rtt_nanos,
    };
    let transfer = |stream: &str, dir, sizes: &[u32], gap, delay| Event::Transfer {
        stream: stream.to_owned(),
        dir,
        sizes: sizes.to_vec(),
        gap_nanos: gap,
        ack_delay_nanos: delay,
        acked: true,
    };
    const MS: u64 = 1_000_000;
    scenario.events = vec![
        TimedEvent::at(0.0, Event::Arp {
            requester: "laptop1".to_owned(),
            responder: "router".to_owned(),
            delay_nanos: 2 * MS,
        }),
        TimedEvent::at(0.1, Event::Dns {
            client: "laptop1".to_owned(),
            server: "router".to_owned(),
            client_port: 35_001,
            name: "media.example.test".to_owned(),
            answer: Ipv4Addr::new(203, 0, 113, 10),
            delay_nanos: 20 * MS,
        }),
        TimedEvent::at(0.2, tcp("web", "laptop1", 40_001, 443, 30 * MS)),
        TimedEvent::at(0.3, transfer("web", Dir::AToB, &[250], 0, 30 * MS)),
        TimedEvent::at(0.4, transfer("web", Dir::BToA, &[1200, 1200, 800], 50 * MS, 20 * MS)),
        TimedEvent::at(0.5, tcp("stream", "tv", 41_000, 8_080, 40 * MS)),
        TimedEvent::at(0.6, transfer("stream", Dir::BToA, &[1400, 1400, 1400, 1400, 1400], 100 * MS, 20 * MS)),
        TimedEvent::at(0.8, Event::Dns {
            client: "phone1".to_owned(),
            server: "router".to_owned(),
            client_port: 36_000,
            name: "game.example.test".to_owned(),
            answer: Ipv4Addr::new(198, 51, 100, 7),
            delay_nanos: 15 * MS,
        }),
        TimedEvent::at(1.0, Event::Fin {
            stream: "web".to_owned(),
            dir: Dir::AToB,
            rtt_nanos: 30 * MS,
        }),
        TimedEvent::at(1.2, tcp("game", "ps5", 42_000, 3_074, 20 * MS)),
        TimedEvent::at(1.3, transfer("game", Dir::AToB, &[100, 100, 100, 100], 50 * MS, 20 * MS)),
        TimedEvent::at(1.5, Event::Udp {
            from: "phone2".to_owned(),
            to: "router".to_owned(),
            src_port: 37_000,
            dst_port: 123,
            payload_len: 48,
            reply_len: Some(48),
            delay_nanos: 10 * MS,
        }),
        TimedEvent::at(1.6, Event::Arp {
            requester: "laptop2".to_owned(),
            responder: "router".to_owned(),
            delay_nanos: 2 * MS,
        }),
        TimedEvent::at(1.7, transfer("game", Dir::BToA, &[300, 300], 50 * MS, 20 * MS)),
        TimedEvent::at(2.2, Event::Rst {
            stream: "game".to_owned(),
            dir: Dir::AToB,
        }),
        TimedEvent::at(2.5, Event::Fin {
            stream: "stream".to_owned(),
            dir: Dir::AToB,
            rtt_nanos: 40 * MS,
        }),
    ];
    scenario
}
