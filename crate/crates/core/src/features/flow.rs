use std::collections::{BTreeMap, HashMap};
use std::net::Ipv4Addr;

/// Flows (and fragment reassembly state) idle longer than this many seconds
/// are forgotten.
pub const FLOW_IDLE_TIMEOUT: f64 = 300.0;
const SWEEP_INTERVAL: f64 = 60.0;

/// Direction-sensitive 5-tuple. Ports are 0 for protocols without them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FlowKey {
    pub ip_src: Ipv4Addr,
    pub ip_dst: Ipv4Addr,
    pub port_src: u16,
    pub port_dst: u16,
    pub protocol: u8,
}

/// Set of disjoint half-open `[start, end)` ranges; touching ranges are merged.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IntervalSet {
    ranges: BTreeMap<u64, u64>,
}

impl IntervalSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.ranges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    /// Whether `[start, end)` shares at least one point with the set.
    pub fn intersects(&self, start: u64, end: u64) -> bool {
        if start >= end {
            return false;
        }
        self.ranges.range(..end).next_back().is_some_and(|(_, &e)| e > start)
    }

    pub fn insert(&mut self, start: u64, end: u64) {
        if start >= end {
            return;
        }
        let (mut lo, mut hi) = (start, end);
        let touching: Vec<u64> =
            self.ranges.range(..=end).rev().take_while(|(_, &e)| e >= start).map(|(&s, _)| s).collect();
        for s in touching {
            let e = self.ranges.remove(&s).unwrap_or(s);
            lo = lo.min(s);
            hi = hi.max(e);
        }
        self.ranges.insert(lo, hi);
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.ranges.iter().map(|(&s, &e)| (s, e))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowState {
    pub start_time: f64,
    pub last_seen: f64,
    /// Sequence number of the first TCP segment; payload ranges are stored
    /// relative to it so a single wrap of the 32-bit space is harmless.
    pub tcp_base: Option<u32>,
    pub seen_tcp_ranges: IntervalSet,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct DatagramKey {
    src: Ipv4Addr,
    dst: Ipv4Addr,
    id: u16,
    protocol: u8,
}

#[derive(Clone, Debug)]
struct DatagramState {
    last_seen: f64,
    ranges: IntervalSet,
}

/// Per-capture flow table; owned by one decoder.
#[derive(Debug)]
pub struct FlowTable {
    flows: HashMap<FlowKey, FlowState>,
    datagrams: HashMap<DatagramKey, DatagramState>,
    idle_timeout: f64,
    next_sweep: f64,
}

impl Default for FlowTable {
    fn default() -> Self {
        Self::with_timeout(FLOW_IDLE_TIMEOUT)
    }
}

impl FlowTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_timeout(idle_timeout: f64) -> Self {
        FlowTable { flows: HashMap::new(), datagrams: HashMap::new(), idle_timeout, next_sweep: SWEEP_INTERVAL }
    }

    pub fn len(&self) -> usize {
        self.flows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flows.is_empty()
    }

    pub fn get(&self, key: &FlowKey) -> Option<&FlowState> {
        self.flows.get(key)
    }

    /// Records a packet of `key` at time `now` and returns the flow state.
    /// A flow idle beyond the timeout restarts.
    pub fn touch(&mut self, key: FlowKey, now: f64) -> &mut FlowState {
        self.sweep(now);
        let timeout = self.idle_timeout;
        let state = self.flows.entry(key).or_insert_with(|| FlowState {
            start_time: now,
            last_seen: now,
            tcp_base: None,
            seen_tcp_ranges: IntervalSet::new(),
        });
        if now - state.last_seen > timeout {
            *state = FlowState { start_time: now, last_seen: now, tcp_base: None, seen_tcp_ranges: IntervalSet::new() };
        }
        state.last_seen = state.last_seen.max(now);
        state
    }

    /// Marks the payload `[seq, seq + len)` as seen for the flow and reports
    /// whether any of it had been seen before. Empty payloads never count.
    pub fn tcp_payload_seen(&mut self, key: FlowKey, now: f64, seq: u32, len: u32) -> bool {
        let state = self.touch(key, now);
        let base = *state.tcp_base.get_or_insert(seq);
        if len == 0 {
            return false;
        }
        let start = u64::from(seq.wrapping_sub(base));
        let end = start + u64::from(len);
        let seen = state.seen_tcp_ranges.intersects(start, end);
        state.seen_tcp_ranges.insert(start, end);
        seen
    }

    /// Marks a fragment's byte range of datagram `(src, dst, id, protocol)`
    /// and reports whether it overlaps an earlier fragment.
    #[allow(clippy::too_many_arguments)]
    pub fn fragment_seen(
        &mut self,
        src: Ipv4Addr,
        dst: Ipv4Addr,
        id: u16,
        protocol: u8,
        now: f64,
        start: u64,
        end: u64,
    ) -> bool {
        self.sweep(now);
        let timeout = self.idle_timeout;
        let st = self
            .datagrams
            .entry(DatagramKey { src, dst, id, protocol })
            .or_insert_with(|| DatagramState { last_seen: now, ranges: IntervalSet::new() });
        if now - st.last_seen > timeout {
            st.ranges = IntervalSet::new();
        }
        st.last_seen = st.last_seen.max(now);
        let seen = st.ranges.intersects(start, end);
        st.ranges.insert(start, end);
        seen
    }

    fn sweep(&mut self, now: f64) {
        if now < self.next_sweep {
            return;
        }
        let timeout = self.idle_timeout;
        self.flows.retain(|_, f| now - f.last_seen <= timeout);
        self.datagrams.retain(|_, d| now - d.last_seen <= timeout);
        self.next_sweep = now + SWEEP_INTERVAL;
    }
}
