//! Classic libpcap file reader (both byte orders, micro- and nanosecond
//! timestamps). Only Ethernet captures are accepted.

use std::fs::File;
use std::io::{self, BufReader, Read};
use std::path::Path;

use thiserror::Error;

const MAGIC_MICROS: u32 = 0xA1B2_C3D4;
const MAGIC_NANOS: u32 = 0xA1B2_3C4D;
pub const LINKTYPE_ETHERNET: u32 = 1;
const MAX_RECORD_LEN: u32 = 256 * 1024 * 1024;

#[derive(Debug, Error)]
pub enum CaptureError {
    #[error("not a pcap file (magic {0:#010x})")]
    BadMagic(u32),
    #[error("capture header is truncated")]
    TruncatedHeader,
    #[error("unsupported link type {0} (only Ethernet is supported)")]
    UnsupportedLinkType(u32),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// One captured frame. `timestamp` is in seconds since the first packet of
/// the capture; `index` is the 0-based position in the file.
#[derive(Clone, Debug, PartialEq)]
pub struct RawPacket {
    pub index: usize,
    pub timestamp: f64,
    pub data: Vec<u8>,
    pub orig_len: u32,
}

#[derive(Clone, Copy, Debug)]
struct Format {
    big_endian: bool,
    nanos: bool,
}

impl Format {
    fn u32(self, b: &[u8]) -> u32 {
        let a = [b[0], b[1], b[2], b[3]];
        if self.big_endian {
            u32::from_be_bytes(a)
        } else {
            u32::from_le_bytes(a)
        }
    }
}

pub struct PcapReader<R> {
    inner: R,
    format: Format,
    snaplen: u32,
    next_index: usize,
    origin_ns: Option<i128>,
    truncated: bool,
    done: bool,
}

impl PcapReader<BufReader<File>> {
    pub fn open(path: &Path) -> Result<Self, CaptureError> {
        Self::new(BufReader::new(File::open(path)?))
    }
}

impl<R: Read> PcapReader<R> {
    pub fn new(mut inner: R) -> Result<Self, CaptureError> {
        let mut header = [0u8; 24];
        read_full(&mut inner, &mut header).map_err(|e| match e {
            ReadFail::Eof(_) => CaptureError::TruncatedHeader,
            ReadFail::Io(e) => CaptureError::Io(e),
        })?;
        let le = u32::from_le_bytes([header[0], header[1], header[2], header[3]]);
        let format = match le {
            MAGIC_MICROS => Format { big_endian: false, nanos: false },
            MAGIC_NANOS => Format { big_endian: false, nanos: true },
            m if m.swap_bytes() == MAGIC_MICROS => Format { big_endian: true, nanos: false },
            m if m.swap_bytes() == MAGIC_NANOS => Format { big_endian: true, nanos: true },
            other => return Err(CaptureError::BadMagic(other)),
        };
        let snaplen = format.u32(&header[16..20]);
        let link = format.u32(&header[20..24]);
        if link != LINKTYPE_ETHERNET {
            return Err(CaptureError::UnsupportedLinkType(link));
        }
        Ok(PcapReader { inner, format, snaplen, next_index: 0, origin_ns: None, truncated: false, done: false })
    }

    pub fn nanosecond_resolution(&self) -> bool {
        self.format.nanos
    }

    pub fn snaplen(&self) -> u32 {
        self.snaplen
    }

    /// True when reading stopped at a partial record.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    fn stop_truncated(&mut self, what: &str) {
        log::warn!("capture truncated in {what} of packet {}; stopping", self.next_index);
        self.truncated = true;
        self.done = true;
    }
}

impl<R: Read> Iterator for PcapReader<R> {
    type Item = Result<RawPacket, CaptureError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let mut rec = [0u8; 16];
        match read_full(&mut self.inner, &mut rec) {
            Ok(()) => {}
            Err(ReadFail::Eof(0)) => {
                self.done = true;
                return None;
            }
            Err(ReadFail::Eof(_)) => {
                self.stop_truncated("record header");
                return None;
            }
            Err(ReadFail::Io(e)) => {
                self.done = true;
                return Some(Err(e.into()));
            }
        }
        let f = self.format;
        let (sec, frac, incl_len, orig_len) =
            (f.u32(&rec[0..4]), f.u32(&rec[4..8]), f.u32(&rec[8..12]), f.u32(&rec[12..16]));
        if incl_len > MAX_RECORD_LEN {
            self.stop_truncated("record length");
            return None;
        }
        let mut data = vec![0u8; incl_len as usize];
        match read_full(&mut self.inner, &mut data) {
            Ok(()) => {}
            Err(ReadFail::Eof(_)) => {
                self.stop_truncated("record body");
                return None;
            }
            Err(ReadFail::Io(e)) => {
                self.done = true;
                return Some(Err(e.into()));
            }
        }
        let ns = i128::from(sec) * 1_000_000_000 + if f.nanos { i128::from(frac) } else { i128::from(frac) * 1000 };
        let origin = *self.origin_ns.get_or_insert(ns);
        let index = self.next_index;
        self.next_index += 1;
        Some(Ok(RawPacket { index, timestamp: (ns - origin) as f64 / 1e9, data, orig_len }))
    }
}

enum ReadFail {
    /// End of input after this many bytes.
    Eof(usize),
    Io(io::Error),
}

fn read_full<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<(), ReadFail> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => return Err(ReadFail::Eof(filled)),
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(ReadFail::Io(e)),
        }
    }
    Ok(())
}

/// Serializes packets as a little-endian microsecond pcap; used to build
/// fixtures.
pub fn write_pcap<W: io::Write>(mut out: W, packets: &[(u32, u32, Vec<u8>)]) -> io::Result<()> {
    out.write_all(&MAGIC_MICROS.to_le_bytes())?;
    out.write_all(&2u16.to_le_bytes())?;
    out.write_all(&4u16.to_le_bytes())?;
    out.write_all(&0i32.to_le_bytes())?;
    out.write_all(&0u32.to_le_bytes())?;
    out.write_all(&65535u32.to_le_bytes())?;
    out.write_all(&LINKTYPE_ETHERNET.to_le_bytes())?;
    for (sec, usec, data) in packets {
        out.write_all(&sec.to_le_bytes())?;
        out.write_all(&usec.to_le_bytes())?;
        out.write_all(&(data.len() as u32).to_le_bytes())?;
        out.write_all(&(data.len() as u32).to_le_bytes())?;
        out.write_all(data)?;
    }
    Ok(())
}
