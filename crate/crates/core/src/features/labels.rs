use std::collections::HashMap;
use std::net::Ipv4Addr;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::Label;

/// Row of the 5-tuple/time-range label layout.
#[derive(Clone, Debug, PartialEq)]
pub struct RangeRule {
    pub src: Ipv4Addr,
    pub dst: Ipv4Addr,
    pub protocol: u8,
    pub t_start: f64,
    pub t_end: f64,
    pub label: Label,
}

/// Ground truth supplied next to a capture.
///
/// Two CSV layouts are accepted, recognised by their header:
/// `packet_index,label` (0-based index into the capture) or
/// `ip_src,ip_dst,proto,t_start,t_end,label` with times in seconds since the
/// capture start (inclusive bounds, first matching row wins). Packets not
/// covered by any row are labeled normal.
#[derive(Clone, Debug, PartialEq)]
pub enum LabelSource {
    ByIndex(HashMap<usize, Label>),
    ByRange(Vec<RangeRule>),
}

fn parse_label(s: &str, line: usize) -> Result<Label> {
    let v: i64 = s.trim().parse().map_err(|_| Error::LabelFile(format!("line {line}: bad label {s:?}")))?;
    Label::from_external(v).map_err(|e| Error::LabelFile(format!("line {line}: {e}")))
}

fn field<T: std::str::FromStr>(s: &str, what: &str, line: usize) -> Result<T> {
    s.trim().parse().map_err(|_| Error::LabelFile(format!("line {line}: bad {what} {s:?}")))
}

impl LabelSource {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        match header.as_slice() {
            ["packet_index", "label"] => {
                let mut map = HashMap::new();
                for (i, row) in rdr.records().enumerate() {
                    let row = row?;
                    let line = i + 2;
                    map.insert(field(&row[0], "packet index", line)?, parse_label(&row[1], line)?);
                }
                Ok(LabelSource::ByIndex(map))
            }
            ["ip_src", "ip_dst", "proto", "t_start", "t_end", "label"] => {
                let mut rules = Vec::new();
                for (i, row) in rdr.records().enumerate() {
                    let row = row?;
                    let line = i + 2;
                    rules.push(RangeRule {
                        src: field(&row[0], "ip_src", line)?,
                        dst: field(&row[1], "ip_dst", line)?,
                        protocol: field(&row[2], "proto", line)?,
                        t_start: field(&row[3], "t_start", line)?,
                        t_end: field(&row[4], "t_end", line)?,
                        label: parse_label(&row[5], line)?,
                    });
                }
                Ok(LabelSource::ByRange(rules))
            }
            other => Err(Error::LabelFile(format!("unrecognised header {other:?}"))),
        }
    }

    /// Label for a packet, given its capture index, addresses and time.
    pub fn label_for(&self, index: usize, endpoints: Option<(Ipv4Addr, Ipv4Addr, u8)>, timestamp: f64) -> Label {
        match self {
            LabelSource::ByIndex(map) => map.get(&index).copied().unwrap_or(Label::Normal),
            LabelSource::ByRange(rules) => endpoints
                .and_then(|(src, dst, proto)| {
                    rules.iter().find(|r| {
                        r.src == src
                            && r.dst == dst
                            && r.protocol == proto
                            && r.t_start <= timestamp
                            && timestamp <= r.t_end
                    })
                })
                .map_or(Label::Normal, |r| r.label),
        }
    }
}
