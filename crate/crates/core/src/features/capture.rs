use std::fs::File;
use std::io::{BufReader, Read};
use std::net::Ipv4Addr;
use std::path::Path;

use crate::error::Result;

use super::decode::decode_packet;
use super::flow::FlowTable;
use super::labels::LabelSource;
use super::pcap::PcapReader;
use super::{col, ExtractedRecord};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CaptureStats {
    pub packets: usize,
    pub decoded: usize,
    pub skipped: usize,
    pub truncated: bool,
}

/// Decodes a capture lazily, in file order, with its own flow table.
pub struct CaptureStream<R> {
    reader: PcapReader<R>,
    flows: FlowTable,
    labels: Option<LabelSource>,
    stats: CaptureStats,
}

/// Opens `path` and yields one record per decodable packet. Corrupt packets
/// are skipped and counted in [`CaptureStream::stats`].
pub fn read_capture(path: &Path, label_source: Option<&Path>) -> Result<CaptureStream<BufReader<File>>> {
    let reader = PcapReader::open(path)?;
    let labels = label_source.map(LabelSource::load).transpose()?;
    Ok(CaptureStream::new(reader, labels))
}

impl<R: Read> CaptureStream<R> {
    pub fn new(reader: PcapReader<R>, labels: Option<LabelSource>) -> Self {
        CaptureStream { reader, flows: FlowTable::new(), labels, stats: CaptureStats::default() }
    }

    pub fn stats(&self) -> CaptureStats {
        CaptureStats { truncated: self.reader.truncated(), ..self.stats }
    }
}

impl<R: Read> Iterator for CaptureStream<R> {
    type Item = Result<ExtractedRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let pkt = match self.reader.next()? {
                Ok(p) => p,
                Err(e) => return Some(Err(e.into())),
            };
            self.stats.packets += 1;
            match decode_packet(&pkt, &mut self.flows) {
                Ok(mut rec) => {
                    self.stats.decoded += 1;
                    if let Some(labels) = &self.labels {
                        let endpoints = endpoints(&rec.features);
                        rec.label = Some(labels.label_for(pkt.index, endpoints, pkt.timestamp));
                    }
                    return Some(Ok(rec));
                }
                Err(e) => {
                    log::debug!("skipping packet {}: {e}", pkt.index);
                    self.stats.skipped += 1;
                }
            }
        }
    }
}

fn endpoints(f: &[f64]) -> Option<(Ipv4Addr, Ipv4Addr, u8)> {
    if f[col::IP_HDR_LEN] == 0.0 {
        return None;
    }
    let addr = |at: usize| Ipv4Addr::new(f[at] as u8, f[at + 1] as u8, f[at + 2] as u8, f[at + 3] as u8);
    Some((addr(col::IP_SRC), addr(col::IP_DST), f[col::IP_PROTO] as u8))
}
