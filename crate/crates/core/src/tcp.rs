//! Per-stream TCP sequence analysis: segment classification, RTT sampling
//! under Karn's rule, bytes in flight, and the derived graph series.
//!
//! All sequence arithmetic runs in an unwrapped 64-bit space (serial
//! arithmetic mod 2³², window ±2³¹), so wraparound never produces negative
//! spans.

use std::collections::HashMap;
use std::net::IpAddr;

use crate::capture::PacketRecord;
use crate::dissect::DissectedCapture;
use crate::timeseries::{tick_nanos, SeriesUnit, TimeSeries};
use crate::wire::TcpFlags;
use crate::{nanos_to_secs, NANOS_PER_SEC};

/// Segments arriving at most this long after the direction's previous
/// segment classify as out-of-order rather than retransmission.
pub const DEFAULT_OUT_OF_ORDER_WINDOW_NANOS: u64 = 3_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dir {
    AToB,
    BToA,
}

impl Dir {
    pub fn flip(self) -> Dir {
        match self {
            Dir::AToB => Dir::BToA,
            Dir::BToA => Dir::AToB,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Dir::AToB => 0,
            Dir::BToA => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Dir::AToB => "ab",
            Dir::BToA => "ba",
        }
    }
}

impl std::fmt::Display for Dir {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Dir {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ab" => Ok(Dir::AToB),
            "ba" => Ok(Dir::BToA),
            other => Err(format!("unknown direction {other:?} (ab or ba)")),
        }
    }
}

/// Canonical connection identity. A is the first-seen packet's source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamKey {
    pub addr_a: IpAddr,
    pub port_a: u16,
    pub addr_b: IpAddr,
    pub port_b: u16,
    pub stream_index: usize,
}

impl std::fmt::Display for StreamKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}:{} <-> {}:{}",
            self.addr_a, self.port_a, self.addr_b, self.port_b
        )
    }
}

/// One stream's packets, as 0-based positions into the capture.
#[derive(Debug, Clone)]
pub struct TcpStream {
    pub key: StreamKey,
    pub packets: Vec<usize>,
}

type EndpointPair = ((IpAddr, u16), (IpAddr, u16));

/// Groups TCP packets into streams; stream_index follows first appearance.
pub fn assign_streams(dc: &DissectedCapture) -> Vec<TcpStream> {
    let mut streams: Vec<TcpStream> = Vec::new();
    let mut by_pair: HashMap<EndpointPair, usize> = HashMap::new();
    for (pos, stack) in dc.stacks.iter().enumerate() {
        let (Some(tcp), Some((src, dst))) = (stack.tcp(), stack.ip_pair()) else {
            continue;
        };
        let a = (src, tcp.src_port);
        let b = (dst, tcp.dst_port);
        let pair = if a <= b { (a, b) } else { (b, a) };
        let slot = *by_pair.entry(pair).or_insert_with(|| {
            streams.push(TcpStream {
                key: StreamKey {
                    addr_a: src,
                    port_a: tcp.src_port,
                    addr_b: dst,
                    port_b: tcp.dst_port,
                    stream_index: streams.len(),
                },
                packets: Vec::new(),
            });
            streams.len() - 1
        });
        streams[slot].packets.push(pos);
    }
    streams
}

/// The per-segment facts analysis consumes, decoupled from dissection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentInput {
    /// 1-based position in the capture file.
    pub packet_index: usize,
    pub ts_nanos: u64,
    pub dir: Dir,
    pub seq: u32,
    pub ack: u32,
    pub flags: TcpFlags,
    pub window: u16,
    pub payload_len: u32,
}

/// Projects a stream's packets onto [`SegmentInput`]s.
pub fn segment_inputs(dc: &DissectedCapture, stream: &TcpStream) -> Vec<SegmentInput> {
    stream
        .packets
        .iter()
        .filter_map(|&pos| {
            let record: &PacketRecord = &dc.capture.records[pos];
            let stack = &dc.stacks[pos];
            let tcp = stack.tcp()?;
            let (src, _) = stack.ip_pair()?;
            let dir = if src == stream.key.addr_a && tcp.src_port == stream.key.port_a {
                Dir::AToB
            } else {
                Dir::BToA
            };
            Some(SegmentInput {
                packet_index: record.index,
                ts_nanos: record.ts_nanos,
                dir,
                seq: tcp.seq,
                ack: tcp.ack,
                flags: tcp.flags,
                window: tcp.window,
                payload_len: tcp.payload_len,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentFlag {
    Retransmission,
    /// Count of consecutive duplicates, starting at 1.
    DuplicateAck(u32),
    ZeroWindow,
    KeepAlive,
    WindowFull,
    OutOfOrder,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentMeta {
    pub input: SegmentInput,
    /// Sequence number unwrapped into the direction's 64-bit space.
    pub seq64: u64,
    /// Ack unwrapped into the opposite direction's space, when resolvable.
    pub ack64: Option<u64>,
    pub flags_out: Vec<SegmentFlag>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RttSample {
    /// Timestamp of the acknowledging packet.
    pub ts_nanos: u64,
    pub rtt_nanos: u64,
}

#[derive(Debug, Clone)]
pub struct TcpStreamAnalysis {
    pub key: StreamKey,
    pub segments: Vec<SegmentMeta>,
    /// Indexed by the direction that sent the sampled data.
    pub rtt_samples: [Vec<RttSample>; 2],
    /// (timestamp, unacknowledged bytes); one point per packet for both
    /// directions, so a clean close visibly returns to zero.
    pub bytes_in_flight: [Vec<(u64, u64)>; 2],
    /// Unwrapped initial sequence number per direction.
    pub isn: [Option<u64>; 2],
    pub seq_high: [u64; 2],
    pub acked_high: [u64; 2],
}

impl TcpStreamAnalysis {
    pub fn rtt(&self, dir: Dir) -> &[RttSample] {
        &self.rtt_samples[dir.index()]
    }

    /// Total captured payload bytes sent in `dir`, retransmissions included.
    pub fn payload_bytes(&self, dir: Dir) -> u64 {
        self.segments
            .iter()
            .filter(|s| s.input.dir == dir)
            .map(|s| u64::from(s.input.payload_len))
            .sum()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TcpConfig {
    pub out_of_order_window_nanos: u64,
}

impl Default for TcpConfig {
    fn default() -> Self {
        TcpConfig {
            out_of_order_window_nanos: DEFAULT_OUT_OF_ORDER_WINDOW_NANOS,
        }
    }
}

/// A sent-but-unacknowledged range awaiting its RTT sample.
struct Outstanding {
    start: u64,
    end: u64,
    sent_nanos: u64,
    /// Cleared when the range is retransmitted (Karn's rule).
    valid: bool,
}

struct DirState {
    isn: u64,
    /// Reference point for 32→64 bit unwrapping; follows the stream.
    unwrap_ref: u64,
    /// Highest seq + occupied length sent (next expected sequence).
    seq_high: u64,
    /// Highest ack received from the peer for this direction's data.
    acked_high: u64,
    /// Merged intervals of sequence space observed from this direction.
    seen: Vec<(u64, u64)>,
    outstanding: Vec<Outstanding>,
    last_seg_nanos: Option<u64>,
    /// (ack, window) of this direction's previous pure ACK.
    last_pure_ack: Option<(u32, u16)>,
    dup_ack_run: u32,
    /// Peer's last advertised edge (ack + window) bounding this direction.
    send_edge: Option<u64>,
}

impl DirState {
    fn new(first_seq: u32) -> Self {
        // offset keeps the unwrapped space clear of zero underflow
        let isn = (1u64 << 32) + u64::from(first_seq);
        DirState {
            isn,
            unwrap_ref: isn,
            seq_high: isn,
            acked_high: isn,
            seen: Vec::new(),
            outstanding: Vec::new(),
            last_seg_nanos: None,
            last_pure_ack: None,
            dup_ack_run: 0,
            send_edge: None,
        }
    }

    /// Unwraps a 32-bit value to the closest point in this direction's
    /// 64-bit space (window ±2³¹ around the last unwrapped value).
    fn unwrap(&mut self, value: u32) -> u64 {
        let delta = i64::from(value.wrapping_sub(self.unwrap_ref as u32) as i32);
        let unwrapped = self.unwrap_ref.wrapping_add(delta as u64);
        self.unwrap_ref = unwrapped;
        unwrapped
    }

    fn in_flight(&self) -> u64 {
        self.seq_high.saturating_sub(self.acked_high)
    }
}

/// Inserts [start, end) into a sorted, disjoint interval list, merging.
fn insert_interval(intervals: &mut Vec<(u64, u64)>, start: u64, end: u64) {
    let lo = intervals.partition_point(|&(_, e)| e < start);
    let mut hi = lo;
    let mut start = start;
    let mut end = end;
    while hi < intervals.len() && intervals[hi].0 <= end {
        start = start.min(intervals[hi].0);
        end = end.max(intervals[hi].1);
        hi += 1;
    }
    intervals.splice(lo..hi, [(start, end)]);
}

/// True when [start, end) is fully inside one recorded interval.
fn covers(intervals: &[(u64, u64)], start: u64, end: u64) -> bool {
    let idx = intervals.partition_point(|&(s, _)| s <= start);
    idx > 0 && intervals[idx - 1].1 >= end
}

pub fn analyze_stream(key: StreamKey, segments: &[SegmentInput]) -> TcpStreamAnalysis {
    analyze_stream_with(key, segments, &TcpConfig::default())
}

pub fn analyze_stream_with(
    key: StreamKey,
    segments: &[SegmentInput],
    config: &TcpConfig,
) -> TcpStreamAnalysis {
    let mut dirs: [Option<DirState>; 2] = [None, None];
    let mut metas: Vec<SegmentMeta> = Vec::with_capacity(segments.len());
    let mut rtt_samples: [Vec<RttSample>; 2] = [Vec::new(), Vec::new()];
    let mut bif: [Vec<(u64, u64)>; 2] = [Vec::new(), Vec::new()];

    for input in segments {
        let d = input.dir.index();
        let p = input.dir.flip().index();
        if dirs[d].is_none() {
            dirs[d] = Some(DirState::new(input.seq));
        }

        let flags = input.flags;
        let space_len = u64::from(input.payload_len)
            + u64::from(flags.syn())
            + u64::from(flags.fin());
        let (seq64, end64) = {
            let state = dirs[d].as_mut().expect("initialized above");
            let seq64 = state.unwrap(input.seq);
            (seq64, seq64 + space_len)
        };

        // classification against this direction's pre-segment state
        let mut flags_out = Vec::new();
        {
            let state = dirs[d].as_ref().expect("initialized above");
            let keep_alive = input.payload_len <= 1
                && !flags.syn()
                && !flags.fin()
                && !flags.rst()
                && state.seq_high > state.isn
                && seq64 + 1 == state.seq_high;
            if keep_alive {
                flags_out.push(SegmentFlag::KeepAlive);
            } else if space_len > 0 {
                if end64 <= state.seq_high && covers(&state.seen, seq64, end64) {
                    flags_out.push(SegmentFlag::Retransmission);
                } else if seq64 < state.seq_high {
                    // a hole below the high-water mark: late original or lost
                    // original's retransmission, split on arrival spacing
                    let recent = state.last_seg_nanos.is_some_and(|prev| {
                        input.ts_nanos.saturating_sub(prev)
                            <= config.out_of_order_window_nanos
                    });
                    flags_out.push(if recent {
                        SegmentFlag::OutOfOrder
                    } else {
                        SegmentFlag::Retransmission
                    });
                }
            }
            if input.window == 0 && !flags.rst() && !flags.syn() && !flags.fin() {
                flags_out.push(SegmentFlag::ZeroWindow);
            }
            if input.payload_len > 0 && state.send_edge == Some(end64) {
                flags_out.push(SegmentFlag::WindowFull);
            }
        }

        // duplicate-ACK run tracking
        let pure_ack = input.payload_len == 0
            && flags.ack()
            && !flags.syn()
            && !flags.fin()
            && !flags.rst();
        if pure_ack {
            let state = dirs[d].as_mut().expect("initialized above");
            if state.last_pure_ack == Some((input.ack, input.window)) {
                state.dup_ack_run += 1;
                flags_out.push(SegmentFlag::DuplicateAck(state.dup_ack_run));
            } else {
                state.last_pure_ack = Some((input.ack, input.window));
                state.dup_ack_run = 0;
            }
        }

        // ack processing updates the peer direction: acked_high, RTT, edge
        let mut ack64 = None;
        if flags.ack() {
            if let Some(peer) = dirs[p].as_mut() {
                let ack = peer.unwrap(input.ack);
                ack64 = Some(ack);
                if ack > peer.acked_high {
                    if let Some(entry) = peer
                        .outstanding
                        .iter()
                        .find(|o| o.valid && o.end <= ack)
                    {
                        rtt_samples[p].push(RttSample {
                            ts_nanos: input.ts_nanos,
                            rtt_nanos: input.ts_nanos.saturating_sub(entry.sent_nanos),
                        });
                    }
                    peer.outstanding.retain(|o| o.end > ack);
                    peer.acked_high = ack;
                }
                peer.send_edge = Some(ack + u64::from(input.window));
            }
        }

        // sequence-space bookkeeping for the sending direction
        {
            let state = dirs[d].as_mut().expect("initialized above");
            if space_len > 0 {
                if flags_out.contains(&SegmentFlag::Retransmission) {
                    for o in &mut state.outstanding {
                        if o.start < end64 && o.end > seq64 {
                            o.valid = false; // Karn: ambiguous attribution
                        }
                    }
                } else if end64 > state.seq_high
                    && !flags_out.contains(&SegmentFlag::OutOfOrder)
                    && !flags_out.contains(&SegmentFlag::KeepAlive)
                {
                    state.outstanding.push(Outstanding {
                        start: seq64,
                        end: end64,
                        sent_nanos: input.ts_nanos,
                        valid: true,
                    });
                }
                insert_interval(&mut state.seen, seq64, end64);
                state.seq_high = state.seq_high.max(end64);
            }
            state.last_seg_nanos = Some(input.ts_nanos);
        }

        for (idx, slot) in dirs.iter().enumerate() {
            let value = slot.as_ref().map_or(0, DirState::in_flight);
            bif[idx].push((input.ts_nanos, value));
        }

        metas.push(SegmentMeta {
            input: *input,
            seq64,
            ack64,
            flags_out,
        });
    }

    let final_state = |slot: &Option<DirState>| -> (Option<u64>, u64, u64) {
        match slot {
            Some(s) => (Some(s.isn), s.seq_high, s.acked_high),
            None => (None, 0, 0),
        }
    };
    let (isn_a, seq_high_a, acked_a) = final_state(&dirs[0]);
    let (isn_b, seq_high_b, acked_b) = final_state(&dirs[1]);

    TcpStreamAnalysis {
        key,
        segments: metas,
        rtt_samples,
        bytes_in_flight: bif,
        isn: [isn_a, isn_b],
        seq_high: [seq_high_a, seq_high_b],
        acked_high: [acked_a, acked_b],
    }
}

/// Assigns streams and analyzes each with default settings.
pub fn analyze_capture(dc: &DissectedCapture) -> Vec<TcpStreamAnalysis> {
    assign_streams(dc)
        .into_iter()
        .map(|stream| {
            let inputs = segment_inputs(dc, &stream);
            analyze_stream(stream.key, &inputs)
        })
        .collect()
}

/// RTT samples of one direction as (ack time from capture start, seconds).
pub fn rtt_series(analysis: &TcpStreamAnalysis, dir: Dir, capture_start_nanos: u64) -> TimeSeries {
    TimeSeries {
        label: format!("rtt {}", dir.as_str()),
        tick: None,
        unit: SeriesUnit::Seconds,
        points: analysis.rtt_samples[dir.index()]
            .iter()
            .map(|s| {
                (
                    nanos_to_secs(s.ts_nanos.saturating_sub(capture_start_nanos)),
                    s.rtt_nanos as f64 / NANOS_PER_SEC as f64,
                )
            })
            .collect(),
    }
}

/// Unidirectional payload throughput in bits per second, dense bins spanning
/// the stream's lifetime, anchored at the capture start.
pub fn throughput_series(
    analysis: &TcpStreamAnalysis,
    dir: Dir,
    tick: f64,
    capture_start_nanos: u64,
) -> TimeSeries {
    assert!(tick > 0.0, "tick must be positive");
    let tick_ns = tick_nanos(tick);
    let mut points = Vec::new();
    if let (Some(first), Some(last)) = (analysis.segments.first(), analysis.segments.last()) {
        let bin_of = |ts: u64| (ts.saturating_sub(capture_start_nanos)) / tick_ns;
        let first_bin = bin_of(first.input.ts_nanos);
        let last_bin = bin_of(last.input.ts_nanos);
        let mut bytes = vec![0u64; (last_bin - first_bin + 1) as usize];
        for seg in &analysis.segments {
            if seg.input.dir == dir && seg.input.payload_len > 0 {
                bytes[(bin_of(seg.input.ts_nanos) - first_bin) as usize] +=
                    u64::from(seg.input.payload_len);
            }
        }
        points = bytes
            .into_iter()
            .enumerate()
            .map(|(i, b)| {
                let bin = first_bin + i as u64;
                ((bin * tick_ns) as f64 / NANOS_PER_SEC as f64, b as f64 * 8.0 / tick)
            })
            .collect();
    }
    TimeSeries {
        label: format!("throughput {}", dir.as_str()),
        tick: Some(tick),
        unit: SeriesUnit::Bits,
        points,
    }
}

/// tcptrace-style plot data: relative-sequence segment marks, the opposite
/// direction's ack line and advertised-window line, retransmission marks.
#[derive(Debug, Clone, PartialEq)]
pub struct TcpTraceData {
    pub stream_index: usize,
    pub dir: Dir,
    /// (time, relative seq start, relative seq end) per payload segment.
    pub segments: Vec<(f64, u64, u64)>,
    pub acks: Vec<(f64, u64)>,
    pub windows: Vec<(f64, u64)>,
    pub retransmissions: Vec<(f64, u64, u64)>,
}

pub fn tcptrace_series(
    analysis: &TcpStreamAnalysis,
    dir: Dir,
    capture_start_nanos: u64,
) -> TcpTraceData {
    let mut data = TcpTraceData {
        stream_index: analysis.key.stream_index,
        dir,
        segments: Vec::new(),
        acks: Vec::new(),
        windows: Vec::new(),
        retransmissions: Vec::new(),
    };
    let Some(isn) = analysis.isn[dir.index()] else {
        return data;
    };
    let rel_time = |ts: u64| nanos_to_secs(ts.saturating_sub(capture_start_nanos));
    for seg in &analysis.segments {
        let input = &seg.input;
        if input.dir == dir {
            if input.payload_len > 0 {
                let lo = seg.seq64 - isn;
                let hi = lo + u64::from(input.payload_len);
                let mark = (rel_time(input.ts_nanos), lo, hi);
                data.segments.push(mark);
                if seg.flags_out.contains(&SegmentFlag::Retransmission) {
                    data.retransmissions.push(mark);
                }
            }
        } else {
            let pure_ack = input.payload_len == 0
                && input.flags.ack()
                && !input.flags.syn()
                && !input.flags.fin()
                && !input.flags.rst();
            if pure_ack {
                if let Some(ack64) = seg.ack64 {
                    let t = rel_time(input.ts_nanos);
                    let ack_rel = ack64.saturating_sub(isn);
                    data.acks.push((t, ack_rel));
                    data.windows.push((t, ack_rel + u64::from(input.window)));
                }
            }
        }
    }
    data
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
    Note,
    Chat,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
            Severity::Note => "note",
            Severity::Chat => "chat",
        }
    }
}

impl std::fmt::Display for Severity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Malformed,
    ZeroWindow,
    WindowFull,
    OutOfOrder,
    Retransmission,
    DuplicateAck,
    KeepAlive,
    ConnectionStart,
    ConnectionFin,
    ConnectionReset,
}

impl EventKind {
    /// Severity is a total function of kind.
    pub fn severity(self) -> Severity {
        match self {
            EventKind::Malformed => Severity::Error,
            EventKind::ZeroWindow | EventKind::WindowFull | EventKind::OutOfOrder => {
                Severity::Warning
            }
            EventKind::Retransmission | EventKind::DuplicateAck | EventKind::KeepAlive => {
                Severity::Note
            }
            EventKind::ConnectionStart | EventKind::ConnectionFin | EventKind::ConnectionReset => {
                Severity::Chat
            }
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Malformed => "malformed",
            EventKind::ZeroWindow => "zero-window",
            EventKind::WindowFull => "window-full",
            EventKind::OutOfOrder => "out-of-order",
            EventKind::Retransmission => "retransmission",
            EventKind::DuplicateAck => "duplicate-ack",
            EventKind::KeepAlive => "keep-alive",
            EventKind::ConnectionStart => "connection-start",
            EventKind::ConnectionFin => "connection-fin",
            EventKind::ConnectionReset => "connection-reset",
        }
    }

    pub const ALL: [EventKind; 10] = [
        EventKind::Malformed,
        EventKind::ZeroWindow,
        EventKind::WindowFull,
        EventKind::OutOfOrder,
        EventKind::Retransmission,
        EventKind::DuplicateAck,
        EventKind::KeepAlive,
        EventKind::ConnectionStart,
        EventKind::ConnectionFin,
        EventKind::ConnectionReset,
    ];
}

impl std::fmt::Display for EventKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpertEvent {
    pub severity: Severity,
    pub kind: EventKind,
    pub packet_index: usize,
    pub stream_index: Option<usize>,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct ExpertSummary {
    pub events: Vec<ExpertEvent>,
    pub errors: usize,
    pub warnings: usize,
    pub notes: usize,
    pub chats: usize,
}

impl ExpertSummary {
    pub fn count(&self, severity: Severity) -> usize {
        match severity {
            Severity::Error => self.errors,
            Severity::Warning => self.warnings,
            Severity::Note => self.notes,
            Severity::Chat => self.chats,
        }
    }
}

/// Collects malformed-frame errors, per-segment anomaly events, and
/// connection lifecycle chats, ordered by packet index.
pub fn expert_events(dc: &DissectedCapture, analyses: &[TcpStreamAnalysis]) -> ExpertSummary {
    let mut events: Vec<ExpertEvent> = Vec::new();
    let mut push = |kind: EventKind, packet: usize, stream: Option<usize>, message: String| {
        events.push(ExpertEvent {
            severity: kind.severity(),
            kind,
            packet_index: packet,
            stream_index: stream,
            message,
        });
    };

    for (record, stack) in dc.iter() {
        if let Some(m) = &stack.malformed {
            push(
                EventKind::Malformed,
                record.index,
                None,
                format!("{}: {}", m.layer, m.reason),
            );
        }
    }

    for analysis in analyses {
        let stream = Some(analysis.key.stream_index);
        for seg in &analysis.segments {
            let packet = seg.input.packet_index;
            let isn = analysis.isn[seg.input.dir.index()].unwrap_or(seg.seq64);
            let rel_seq = seg.seq64.saturating_sub(isn);
            for flag in &seg.flags_out {
                match flag {
                    SegmentFlag::Retransmission => push(
                        EventKind::Retransmission,
                        packet,
                        stream,
                        format!(
                            "retransmission (seq {rel_seq}, len {})",
                            seg.input.payload_len
                        ),
                    ),
                    SegmentFlag::DuplicateAck(n) => push(
                        EventKind::DuplicateAck,
                        packet,
                        stream,
                        format!("duplicate ACK #{n} (ack {})", seg.input.ack),
                    ),
                    SegmentFlag::ZeroWindow => push(
                        EventKind::ZeroWindow,
                        packet,
                        stream,
                        "zero window advertised".to_owned(),
                    ),
                    SegmentFlag::KeepAlive => {
                        push(EventKind::KeepAlive, packet, stream, "keep-alive".to_owned())
                    }
                    SegmentFlag::WindowFull => push(
                        EventKind::WindowFull,
                        packet,
                        stream,
                        "send window full".to_owned(),
                    ),
                    SegmentFlag::OutOfOrder => push(
                        EventKind::OutOfOrder,
                        packet,
                        stream,
                        format!(
                            "out-of-order segment (seq {rel_seq}, len {})",
                            seg.input.payload_len
                        ),
                    ),
                }
            }
            let flags = seg.input.flags;
            if flags.syn() {
                push(
                    EventKind::ConnectionStart,
                    packet,
                    stream,
                    format!("connection start ({flags})"),
                );
            }
            if flags.fin() {
                push(
                    EventKind::ConnectionFin,
                    packet,
                    stream,
                    format!("connection finish ({flags})"),
                );
            }
            if flags.rst() {
                push(
                    EventKind::ConnectionReset,
                    packet,
                    stream,
                    format!("connection reset ({flags})"),
                );
            }
        }
    }

    events.sort_by_key(|e| e.packet_index);
    let mut summary = ExpertSummary {
        events,
        ..ExpertSummary::default()
    };
    for event in &summary.events {
        match event.severity {
            Severity::Error => summary.errors += 1,
            Severity::Warning => summary.warnings += 1,
            Severity::Note => summary.notes += 1,
            Severity::Chat => summary.chats += 1,
        }
    }
    summary
}
