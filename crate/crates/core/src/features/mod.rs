//! Packet feature extraction: classic pcap reading, Ethernet/IPv4/TCP/UDP/ICMP
//! dissection, per-flow state and the 43-column feature CSV.
//!
//! Column layout (0-based index in brackets):
//!
//! | cols | feature |
//! |------|---------|
//! | f01 [0] | EtherType |
//! | f02-f07 [1-6] | source MAC octets |
//! | f08-f13 [7-12] | destination MAC octets |
//! | f14 [13] | IPv4 header length in bytes |
//! | f15 [14] | type of service octet |
//! | f16 [15] | IPv4 total length |
//! | f17 [16] | TTL |
//! | f18 [17] | IP protocol number |
//! | f19-f22 [18-21] | IPv4 source octets |
//! | f23-f26 [22-25] | IPv4 destination octets |
//! | f27/f28 [26/27] | TCP source / destination port |
//! | f29/f30 [28/29] | UDP source / destination port |
//! | f31 [30] | TCP payload length, or the UDP length field |
//! | f32/f33 [31/32] | ICMP type / code |
//! | f34 [33] | seconds since the flow's first packet |
//! | f35 [34] | flow start, seconds since capture start |
//! | f36 [35] | fragment (MF set or offset > 0) |
//! | f37 [36] | fragment overlaps an earlier fragment of the same datagram |
//! | f38 [37] | ACK |
//! | f39 [38] | TCP payload overlaps bytes already seen in the flow |
//! | f40-f43 [39-42] | PSH, SYN, FIN, URG |
//!
//! Layers absent from a packet leave their columns at exactly zero.

mod capture;
mod csv_io;
mod decode;
mod flow;
mod labels;
pub mod pcap;

pub use capture::{read_capture, CaptureStats, CaptureStream};
pub use csv_io::{read_feature_csv, write_feature_csv, FeatureTable};
pub use decode::{decode_packet, dissect, DecodeError, Dissection, Ipv4Header, Transport};
pub use flow::{FlowKey, FlowState, FlowTable, IntervalSet, FLOW_IDLE_TIMEOUT};
pub use labels::{LabelSource, RangeRule};
pub use pcap::{PcapReader, RawPacket};

use crate::model::Label;

pub const FEATURE_COUNT: usize = 43;

/// Descriptive names, in column order.
#[rustfmt::skip]
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "eth_type",
    "eth_src_1", "eth_src_2", "eth_src_3", "eth_src_4", "eth_src_5", "eth_src_6",
    "eth_dst_1", "eth_dst_2", "eth_dst_3", "eth_dst_4", "eth_dst_5", "eth_dst_6",
    "ip_hdr_len",
    "ip_tos",
    "ip_len",
    "ip_ttl",
    "ip_proto",
    "ip_src_1", "ip_src_2", "ip_src_3", "ip_src_4",
    "ip_dst_1", "ip_dst_2", "ip_dst_3", "ip_dst_4",
    "tcp_srcport",
    "tcp_dstport",
    "udp_srcport",
    "udp_dstport",
    "l4_len",
    "icmp_type",
    "icmp_code",
    "flow_duration",
    "flow_start",
    "fragmented",
    "frag_overlap",
    "tcp_ack",
    "tcp_retransmission",
    "tcp_psh",
    "tcp_syn",
    "tcp_fin",
    "tcp_urg",
];

pub(crate) mod col {
    pub const ETH_TYPE: usize = 0;
    pub const ETH_SRC: usize = 1;
    pub const ETH_DST: usize = 7;
    pub const IP_HDR_LEN: usize = 13;
    pub const IP_TOS: usize = 14;
    pub const IP_LEN: usize = 15;
    pub const IP_TTL: usize = 16;
    pub const IP_PROTO: usize = 17;
    pub const IP_SRC: usize = 18;
    pub const IP_DST: usize = 22;
    pub const TCP_SPORT: usize = 26;
    pub const TCP_DPORT: usize = 27;
    pub const UDP_SPORT: usize = 28;
    pub const UDP_DPORT: usize = 29;
    pub const L4_LEN: usize = 30;
    pub const ICMP_TYPE: usize = 31;
    pub const ICMP_CODE: usize = 32;
    pub const DURATION: usize = 33;
    pub const FLOW_START: usize = 34;
    pub const FRAGMENTED: usize = 35;
    pub const OVERLAP: usize = 36;
    pub const ACK: usize = 37;
    pub const RETRANSMISSION: usize = 38;
    pub const PSH: usize = 39;
    pub const SYN: usize = 40;
    pub const FIN: usize = 41;
    pub const URG: usize = 42;
}

/// Descriptive feature names as owned strings.
pub fn feature_names() -> Vec<String> {
    FEATURE_NAMES.iter().map(|s| s.to_string()).collect()
}

/// CSV header names `f01` .. `f43`.
pub fn column_names() -> Vec<String> {
    (1..=FEATURE_COUNT).map(|i| format!("f{i:02}")).collect()
}

/// One extracted packet (or one CSV row).
#[derive(Clone, Debug, PartialEq)]
pub struct ExtractedRecord {
    /// Raw feature values in column order.
    pub features: Vec<f64>,
    /// Seconds since capture start; `None` for rows loaded from CSV.
    pub timestamp: Option<f64>,
    pub label: Option<Label>,
}

impl ExtractedRecord {
    pub fn new(features: Vec<f64>, label: Option<Label>) -> Self {
        ExtractedRecord { features, timestamp: None, label }
    }
}
