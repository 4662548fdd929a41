use std::net::Ipv4Addr;

use thiserror::Error;

use super::flow::{FlowKey, FlowTable};
use super::{col, ExtractedRecord, RawPacket, FEATURE_COUNT};

const ETHERTYPE_IPV4: u16 = 0x0800;
const PROTO_ICMP: u8 = 1;
const PROTO_TCP: u8 = 6;
const PROTO_UDP: u8 = 17;

/// Recoverable per-packet failure; the packet is skipped.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecodeError {
    #[error("{layer} header truncated ({have} of {need} bytes)")]
    Truncated { layer: &'static str, need: usize, have: usize },
    #[error("malformed {layer} header: {reason}")]
    Malformed { layer: &'static str, reason: String },
}

fn need(layer: &'static str, buf: &[u8], n: usize) -> Result<(), DecodeError> {
    if buf.len() < n {
        return Err(DecodeError::Truncated { layer, need: n, have: buf.len() });
    }
    Ok(())
}

fn be16(b: &[u8]) -> u16 {
    u16::from_be_bytes([b[0], b[1]])
}

fn be32(b: &[u8]) -> u32 {
    u32::from_be_bytes([b[0], b[1], b[2], b[3]])
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ipv4Header {
    pub header_len: usize,
    pub tos: u8,
    pub total_len: u16,
    pub id: u16,
    pub more_fragments: bool,
    /// Fragment offset in bytes.
    pub frag_offset: u32,
    pub ttl: u8,
    pub protocol: u8,
    pub src: Ipv4Addr,
    pub dst: Ipv4Addr,
}

impl Ipv4Header {
    pub fn is_fragment(&self) -> bool {
        self.more_fragments || self.frag_offset > 0
    }

    pub fn payload_len(&self) -> usize {
        usize::from(self.total_len).saturating_sub(self.header_len)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Transport {
    Tcp {
        src_port: u16,
        dst_port: u16,
        seq: u32,
        flags: u8,
        payload_len: u32,
    },
    Udp {
        src_port: u16,
        dst_port: u16,
        length: u16,
    },
    Icmp {
        icmp_type: u8,
        code: u8,
    },
    /// Non-first fragment or an unsupported protocol.
    Absent,
}

/// Parsed header stack of one Ethernet frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Dissection {
    pub eth_dst: [u8; 6],
    pub eth_src: [u8; 6],
    pub ethertype: u16,
    pub ipv4: Option<Ipv4Header>,
    pub transport: Transport,
}

pub mod tcp_flags {
    pub const FIN: u8 = 0x01;
    pub const SYN: u8 = 0x02;
    pub const PSH: u8 = 0x08;
    pub const ACK: u8 = 0x10;
    pub const URG: u8 = 0x20;
}

/// Parses the Ethernet, IPv4 and transport headers of a frame.
pub fn dissect(frame: &[u8]) -> Result<Dissection, DecodeError> {
    need("ethernet", frame, 14)?;
    let mut eth_dst = [0u8; 6];
    let mut eth_src = [0u8; 6];
    eth_dst.copy_from_slice(&frame[0..6]);
    eth_src.copy_from_slice(&frame[6..12]);
    let ethertype = be16(&frame[12..14]);
    let mut out = Dissection { eth_dst, eth_src, ethertype, ipv4: None, transport: Transport::Absent };
    if ethertype != ETHERTYPE_IPV4 {
        return Ok(out);
    }

    let ip = &frame[14..];
    need("ipv4", ip, 20)?;
    let version = ip[0] >> 4;
    if version != 4 {
        return Err(DecodeError::Malformed { layer: "ipv4", reason: format!("version {version}") });
    }
    let header_len = usize::from(ip[0] & 0x0f) * 4;
    if header_len < 20 {
        return Err(DecodeError::Malformed { layer: "ipv4", reason: format!("header length {header_len}") });
    }
    need("ipv4", ip, header_len)?;
    let total_len = be16(&ip[2..4]);
    if usize::from(total_len) < header_len {
        return Err(DecodeError::Malformed {
            layer: "ipv4",
            reason: format!("total length {total_len} below header length {header_len}"),
        });
    }
    let frag = be16(&ip[6..8]);
    let hdr = Ipv4Header {
        header_len,
        tos: ip[1],
        total_len,
        id: be16(&ip[4..6]),
        more_fragments: frag & 0x2000 != 0,
        frag_offset: u32::from(frag & 0x1fff) * 8,
        ttl: ip[8],
        protocol: ip[9],
        src: Ipv4Addr::new(ip[12], ip[13], ip[14], ip[15]),
        dst: Ipv4Addr::new(ip[16], ip[17], ip[18], ip[19]),
    };

    if hdr.frag_offset == 0 {
        let l4 = &ip[header_len..];
        out.transport = match hdr.protocol {
            PROTO_TCP => {
                need("tcp", l4, 20)?;
                let data_offset = usize::from(l4[12] >> 4) * 4;
                if data_offset < 20 {
                    return Err(DecodeError::Malformed { layer: "tcp", reason: format!("data offset {data_offset}") });
                }
                need("tcp", l4, data_offset)?;
                let segment = hdr.payload_len();
                if segment < data_offset {
                    return Err(DecodeError::Malformed {
                        layer: "tcp",
                        reason: format!("segment of {segment} bytes shorter than header {data_offset}"),
                    });
                }
                Transport::Tcp {
                    src_port: be16(&l4[0..2]),
                    dst_port: be16(&l4[2..4]),
                    seq: be32(&l4[4..8]),
                    flags: l4[13],
                    payload_len: (segment - data_offset) as u32,
                }
            }
            PROTO_UDP => {
                need("udp", l4, 8)?;
                Transport::Udp { src_port: be16(&l4[0..2]), dst_port: be16(&l4[2..4]), length: be16(&l4[4..6]) }
            }
            PROTO_ICMP => {
                need("icmp", l4, 2)?;
                Transport::Icmp { icmp_type: l4[0], code: l4[1] }
            }
            _ => Transport::Absent,
        };
    }
    out.ipv4 = Some(hdr);
    Ok(out)
}

/// Decodes one frame into its 43 features, updating the flow table.
pub fn decode_packet(pkt: &RawPacket, flows: &mut FlowTable) -> Result<ExtractedRecord, DecodeError> {
    let d = dissect(&pkt.data)?;
    let now = pkt.timestamp;
    let mut f = vec![0.0f64; FEATURE_COUNT];
    let flag = |b: bool| if b { 1.0 } else { 0.0 };

    f[col::ETH_TYPE] = f64::from(d.ethertype);
    for i in 0..6 {
        f[col::ETH_SRC + i] = f64::from(d.eth_src[i]);
        f[col::ETH_DST + i] = f64::from(d.eth_dst[i]);
    }

    if let Some(ip) = &d.ipv4 {
        f[col::IP_HDR_LEN] = ip.header_len as f64;
        f[col::IP_TOS] = f64::from(ip.tos);
        f[col::IP_LEN] = f64::from(ip.total_len);
        f[col::IP_TTL] = f64::from(ip.ttl);
        f[col::IP_PROTO] = f64::from(ip.protocol);
        for (i, (s, t)) in ip.src.octets().into_iter().zip(ip.dst.octets()).enumerate() {
            f[col::IP_SRC + i] = f64::from(s);
            f[col::IP_DST + i] = f64::from(t);
        }

        let (port_src, port_dst) = match d.transport {
            Transport::Tcp { src_port, dst_port, .. } | Transport::Udp { src_port, dst_port, .. } => {
                (src_port, dst_port)
            }
            _ => (0, 0),
        };
        let key = FlowKey { ip_src: ip.src, ip_dst: ip.dst, port_src, port_dst, protocol: ip.protocol };

        match d.transport {
            Transport::Tcp { src_port, dst_port, seq, flags, payload_len } => {
                f[col::TCP_SPORT] = f64::from(src_port);
                f[col::TCP_DPORT] = f64::from(dst_port);
                f[col::L4_LEN] = f64::from(payload_len);
                f[col::ACK] = flag(flags & tcp_flags::ACK != 0);
                f[col::PSH] = flag(flags & tcp_flags::PSH != 0);
                f[col::SYN] = flag(flags & tcp_flags::SYN != 0);
                f[col::FIN] = flag(flags & tcp_flags::FIN != 0);
                f[col::URG] = flag(flags & tcp_flags::URG != 0);
                f[col::RETRANSMISSION] = flag(flows.tcp_payload_seen(key, now, seq, payload_len));
            }
            Transport::Udp { src_port, dst_port, length } => {
                f[col::UDP_SPORT] = f64::from(src_port);
                f[col::UDP_DPORT] = f64::from(dst_port);
                f[col::L4_LEN] = f64::from(length);
            }
            Transport::Icmp { icmp_type, code } => {
                f[col::ICMP_TYPE] = f64::from(icmp_type);
                f[col::ICMP_CODE] = f64::from(code);
            }
            Transport::Absent => {}
        }

        let flow = flows.touch(key, now);
        f[col::FLOW_START] = flow.start_time;
        f[col::DURATION] = (now - flow.start_time).max(0.0);

        if ip.is_fragment() {
            f[col::FRAGMENTED] = 1.0;
            let start = u64::from(ip.frag_offset);
            let end = start + ip.payload_len() as u64;
            f[col::OVERLAP] = flag(flows.fragment_seen(ip.src, ip.dst, ip.id, ip.protocol, now, start, end));
        }
    }

    Ok(ExtractedRecord { features: f, timestamp: Some(now), label: None })
}
