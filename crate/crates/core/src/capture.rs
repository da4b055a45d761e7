//! Classic PCAP reading and writing.
//!
//! Layout is the libpcap one: a 24-byte global header (magic, version,
//! thiszone, sigfigs, snaplen, linktype) followed by 16-byte record headers
//! (ts_sec, ts_frac, incl_len, orig_len) and raw frame bytes. Both byte
//! orders and both timestamp magics (microsecond `0xa1b2c3d4`, nanosecond
//! `0xa1b23c4d`) are accepted on read; writes use native byte order.
//! Timestamps are normalized to nanoseconds internally.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::NANOS_PER_SEC;

/// Microsecond-resolution magic number.
pub const MAGIC_MICRO: u32 = 0xa1b2_c3d4;
/// Nanosecond-resolution magic number.
pub const MAGIC_NANO: u32 = 0xa1b2_3c4d;
/// First four bytes of a pcapng section header block, same in either order.
const PCAPNG_MAGIC: u32 = 0x0a0d_0d0a;

/// Link type for Ethernet frames, the only one dissected further.
pub const LINKTYPE_ETHERNET: u32 = 1;

/// Timestamp resolution carried by the capture magic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TsResolution {
    Micro,
    Nano,
}

impl TsResolution {
    fn frac_to_nanos(self, frac: u32) -> u64 {
        match self {
            TsResolution::Micro => u64::from(frac) * 1_000,
            TsResolution::Nano => u64::from(frac),
        }
    }
}

/// Decoded global header of a capture file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaptureHeader {
    pub resolution: TsResolution,
    pub version_major: u16,
    pub version_minor: u16,
    pub snaplen: u32,
    pub linktype: u32,
}

impl CaptureHeader {
    /// Ethernet header with the given snap length, microsecond resolution,
    /// version 2.4.
    pub fn new(snaplen: u32) -> Self {
        CaptureHeader {
            resolution: TsResolution::Micro,
            version_major: 2,
            version_minor: 4,
            snaplen,
            linktype: LINKTYPE_ETHERNET,
        }
    }

    /// The magic value this header encodes to.
    pub fn magic(&self) -> u32 {
        match self.resolution {
            TsResolution::Micro => MAGIC_MICRO,
            TsResolution::Nano => MAGIC_NANO,
        }
    }
}

/// One captured frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PacketRecord {
    /// 1-based position in the capture.
    pub index: usize,
    /// Capture timestamp in nanoseconds since the epoch.
    pub ts_nanos: u64,
    /// Original on-wire length; at least `data.len()`.
    pub original_len: u32,
    /// Captured bytes, possibly cut short at the snap length.
    pub data: Vec<u8>,
}

impl PacketRecord {
    /// Record whose captured and original lengths coincide.
    pub fn new(index: usize, ts_nanos: u64, data: Vec<u8>) -> Self {
        let original_len = data.len() as u32;
        PacketRecord {
            index,
            ts_nanos,
            original_len,
            data,
        }
    }

    pub fn captured_len(&self) -> u32 {
        self.data.len() as u32
    }
}

/// Marks the point where a capture file ended mid-record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Truncation {
    /// 1-based index the cut record would have had.
    pub index: usize,
    /// Byte offset of the incomplete record header.
    pub offset: u64,
}

/// A fully loaded capture. `truncated` is set when the trailing record was
/// cut short; all complete records before the cut are retained.
#[derive(Debug, Clone)]
pub struct Capture {
    pub header: CaptureHeader,
    pub records: Vec<PacketRecord>,
    pub truncated: Option<Truncation>,
}

impl Capture {
    /// Timestamp of the first record, the origin for relative times.
    pub fn start_nanos(&self) -> Option<u64> {
        self.records.first().map(|r| r.ts_nanos)
    }
}

#[derive(Debug, Error)]
pub enum CaptureError {
    #[error("malformed global header: {0}")]
    MalformedGlobalHeader(String),
    #[error("pcapng capture detected; only classic pcap is supported")]
    PcapngNotSupported,
    #[error("truncated record {index} at byte offset {offset}")]
    TruncatedRecord { index: usize, offset: u64 },
    #[error("invalid record {index}: {reason}")]
    InvalidRecord { index: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ByteOrder {
    Native,
    Swapped,
}

impl ByteOrder {
    fn u32(self, bytes: [u8; 4]) -> u32 {
        match self {
            ByteOrder::Native => u32::from_ne_bytes(bytes),
            ByteOrder::Swapped => u32::from_ne_bytes(bytes).swap_bytes(),
        }
    }

    fn u16(self, bytes: [u8; 2]) -> u16 {
        match self {
            ByteOrder::Native => u16::from_ne_bytes(bytes),
            ByteOrder::Swapped => u16::from_ne_bytes(bytes).swap_bytes(),
        }
    }
}

/// Streaming reader over the records of one capture file.
///
/// Iteration yields records in file order with 1-based indices. A file that
/// ends mid-record yields all complete records followed by one
/// `TruncatedRecord` error, after which iteration stops.
pub struct CaptureReader<R: Read> {
    header: CaptureHeader,
    order: ByteOrder,
    reader: R,
    next_index: usize,
    offset: u64,
    finished: bool,
}

impl CaptureReader<BufReader<File>> {
    pub fn open(path: &Path) -> Result<Self, CaptureError> {
        let file = File::open(path)?;
        CaptureReader::from_reader(BufReader::new(file))
    }
}

impl<R: Read> CaptureReader<R> {
    pub fn from_reader(mut reader: R) -> Result<Self, CaptureError> {
        let mut raw = [0u8; 24];
        let got = read_up_to(&mut reader, &mut raw)?;
        if got < 24 {
            if got >= 4 && u32::from_ne_bytes([raw[0], raw[1], raw[2], raw[3]]) == PCAPNG_MAGIC {
                return Err(CaptureError::PcapngNotSupported);
            }
            return Err(CaptureError::MalformedGlobalHeader(format!(
                "file is {got} bytes, need at least 24"
            )));
        }
        let raw_magic = u32::from_ne_bytes([raw[0], raw[1], raw[2], raw[3]]);
        if raw_magic == PCAPNG_MAGIC {
            return Err(CaptureError::PcapngNotSupported);
        }
        let (order, resolution) = match raw_magic {
            MAGIC_MICRO => (ByteOrder::Native, TsResolution::Micro),
            MAGIC_NANO => (ByteOrder::Native, TsResolution::Nano),
            m if m.swap_bytes() == MAGIC_MICRO => (ByteOrder::Swapped, TsResolution::Micro),
            m if m.swap_bytes() == MAGIC_NANO => (ByteOrder::Swapped, TsResolution::Nano),
            m => {
                return Err(CaptureError::MalformedGlobalHeader(format!(
                    "unknown magic 0x{m:08x}"
                )))
            }
        };
        let header = CaptureHeader {
            resolution,
            version_major: order.u16([raw[4], raw[5]]),
            version_minor: order.u16([raw[6], raw[7]]),
            snaplen: order.u32([raw[16], raw[17], raw[18], raw[19]]),
            linktype: order.u32([raw[20], raw[21], raw[22], raw[23]]),
        };
        Ok(CaptureReader {
            header,
            order,
            reader,
            next_index: 1,
            offset: 24,
            finished: false,
        })
    }

    pub fn header(&self) -> &CaptureHeader {
        &self.header
    }

    fn read_record(&mut self) -> Option<Result<PacketRecord, CaptureError>> {
        if self.finished {
            return None;
        }
        let mut head = [0u8; 16];
        let got = match read_up_to(&mut self.reader, &mut head) {
            Ok(n) => n,
            Err(e) => {
                self.finished = true;
                return Some(Err(e.into()));
            }
        };
        if got == 0 {
            self.finished = true;
            return None;
        }
        if got < 16 {
            self.finished = true;
            return Some(Err(CaptureError::TruncatedRecord {
                index: self.next_index,
                offset: self.offset,
            }));
        }
        let ts_sec = self.order.u32([head[0], head[1], head[2], head[3]]);
        let ts_frac = self.order.u32([head[4], head[5], head[6], head[7]]);
        let incl_len = self.order.u32([head[8], head[9], head[10], head[11]]);
        let orig_len = self.order.u32([head[12], head[13], head[14], head[15]]);

        let mut data = Vec::new();
        if let Err(e) = (&mut self.reader)
            .take(u64::from(incl_len))
            .read_to_end(&mut data)
        {
            self.finished = true;
            return Some(Err(e.into()));
        }
        if data.len() < incl_len as usize {
            self.finished = true;
            return Some(Err(CaptureError::TruncatedRecord {
                index: self.next_index,
                offset: self.offset,
            }));
        }
        let ts_nanos = u64::from(ts_sec) * NANOS_PER_SEC
            + self.header.resolution.frac_to_nanos(ts_frac);
        let record = PacketRecord {
            index: self.next_index,
            ts_nanos,
            original_len: orig_len,
            data,
        };
        self.next_index += 1;
        self.offset += 16 + u64::from(incl_len);
        Some(Ok(record))
    }
}

impl<R: Read> Iterator for CaptureReader<R> {
    type Item = Result<PacketRecord, CaptureError>;

    fn next(&mut self) -> Option<Self::Item> {
        self.read_record()
    }
}

fn read_up_to<R: Read>(reader: &mut R, buf: &mut [u8]) -> std::io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match reader.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

/// Opens a capture file for streaming record access.
pub fn open_capture(path: &Path) -> Result<CaptureReader<BufReader<File>>, CaptureError> {
    CaptureReader::open(path)
}

/// Loads a whole capture, salvaging complete records from a file whose
/// trailing record was cut short.
pub fn read_capture(path: &Path) -> Result<Capture, CaptureError> {
    let reader = CaptureReader::open(path)?;
    collect_capture(reader)
}

/// Like [`read_capture`] over an in-memory byte slice.
pub fn read_capture_bytes(bytes: &[u8]) -> Result<Capture, CaptureError> {
    let reader = CaptureReader::from_reader(bytes)?;
    collect_capture(reader)
}

fn collect_capture<R: Read>(mut reader: CaptureReader<R>) -> Result<Capture, CaptureError> {
    let header = reader.header().clone();
    let mut records = Vec::new();
    let mut truncated = None;
    for item in &mut reader {
        match item {
            Ok(record) => records.push(record),
            Err(CaptureError::TruncatedRecord { index, offset }) => {
                truncated = Some(Truncation { index, offset });
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Capture {
        header,
        records,
        truncated,
    })
}

/// Writes a capture file; the result re-opens to an identical header and
/// record list.
pub fn write_capture(
    path: &Path,
    header: &CaptureHeader,
    records: &[PacketRecord],
) -> Result<(), CaptureError> {
    let file = File::create(path)?;
    let mut writer = BufWriter::new(file);
    write_capture_to(&mut writer, header, records)?;
    writer.flush()?;
    Ok(())
}

/// Serializes a capture into `writer`, validating each record against the
/// header first.
pub fn write_capture_to<W: Write>(
    writer: &mut W,
    header: &CaptureHeader,
    records: &[PacketRecord],
) -> Result<(), CaptureError> {
    writer.write_all(&header.magic().to_ne_bytes())?;
    writer.write_all(&header.version_major.to_ne_bytes())?;
    writer.write_all(&header.version_minor.to_ne_bytes())?;
    writer.write_all(&0i32.to_ne_bytes())?; // thiszone
    writer.write_all(&0u32.to_ne_bytes())?; // sigfigs
    writer.write_all(&header.snaplen.to_ne_bytes())?;
    writer.write_all(&header.linktype.to_ne_bytes())?;

    for record in records {
        let (ts_sec, ts_frac) = encode_timestamp(record, header)?;
        let incl_len = validate_record(record, header)?;
        writer.write_all(&ts_sec.to_ne_bytes())?;
        writer.write_all(&ts_frac.to_ne_bytes())?;
        writer.write_all(&incl_len.to_ne_bytes())?;
        writer.write_all(&record.original_len.to_ne_bytes())?;
        writer.write_all(&record.data)?;
    }
    Ok(())
}

fn validate_record(record: &PacketRecord, header: &CaptureHeader) -> Result<u32, CaptureError> {
    let invalid = |reason: String| CaptureError::InvalidRecord {
        index: record.index,
        reason,
    };
    let len = record.data.len();
    let incl_len = u32::try_from(len)
        .map_err(|_| invalid(format!("captured length {len} exceeds u32 range")))?;
    if incl_len > header.snaplen {
        return Err(invalid(format!(
            "captured length {incl_len} exceeds snaplen {}",
            header.snaplen
        )));
    }
    if incl_len > record.original_len {
        return Err(invalid(format!(
            "captured length {incl_len} exceeds original length {}",
            record.original_len
        )));
    }
    Ok(incl_len)
}

fn encode_timestamp(
    record: &PacketRecord,
    header: &CaptureHeader,
) -> Result<(u32, u32), CaptureError> {
    let invalid = |reason: String| CaptureError::InvalidRecord {
        index: record.index,
        reason,
    };
    let secs = record.ts_nanos / NANOS_PER_SEC;
    let sub_nanos = record.ts_nanos % NANOS_PER_SEC;
    let ts_sec = u32::try_from(secs)
        .map_err(|_| invalid(format!("timestamp {} outside pcap range", record.ts_nanos)))?;
    let ts_frac = match header.resolution {
        TsResolution::Micro => {
            if !sub_nanos.is_multiple_of(1_000) {
                return Err(invalid(format!(
                    "timestamp {} not representable at microsecond resolution",
                    record.ts_nanos
                )));
            }
            (sub_nanos / 1_000) as u32
        }
        TsResolution::Nano => sub_nanos as u32,
    };
    Ok((ts_sec, ts_frac))
}
