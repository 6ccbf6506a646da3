//! In-process simulation of the two communication models — s sites plus a
//! coordinator (message passing) or a shared blackboard — with a bit-exact
//! communication ledger.
//!
//! Costs are charged per message from a fixed [`CostModel`]: vertex ids cost
//! ⌈log₂ n⌉ bits, reals and integer counts 64. A site's post to the
//! blackboard is charged once regardless of how many sites read it.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{Edge, WeightedGraph};
use crate::hashing;

/// Index of a site in [0, s).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SiteId(pub usize);

/// The slice of the input held by one site: a local edge list over the
/// shared global vertex set.
#[derive(Debug, Clone)]
pub struct EdgeShard {
    pub site: usize,
    pub n: usize,
    pub edges: Vec<Edge>,
}

/// How edges are spread across sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionStrategy {
    /// Independent uniform site per edge.
    Random,
    /// Edge i goes to site i mod s.
    RoundRobin,
    /// Edges grouped by a hash of the lower endpoint — an adversarial
    /// locality pattern.
    ByVertex,
}

impl FromStr for PartitionStrategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Self::Random),
            "round_robin" => Ok(Self::RoundRobin),
            "by_vertex" => Ok(Self::ByVertex),
            other => Err(Error::Config(format!("unknown partition strategy `{other}`"))),
        }
    }
}

impl PartitionStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Random => "random",
            Self::RoundRobin => "round_robin",
            Self::ByVertex => "by_vertex",
        }
    }
}

/// Deterministically split a graph's edges into s shards.
pub fn partition_edges(
    g: &WeightedGraph,
    s: usize,
    strategy: PartitionStrategy,
    seed: u64,
) -> Result<Vec<EdgeShard>> {
    if s == 0 {
        return Err(Error::Config("need at least one site".into()));
    }
    let mut shards: Vec<EdgeShard> = (0..s)
        .map(|site| EdgeShard {
            site,
            n: g.n(),
            edges: Vec::new(),
        })
        .collect();
    for (idx, e) in g.edges().iter().enumerate() {
        let site = match strategy {
            PartitionStrategy::Random => (hashing::coin(seed, idx as u64) * s as f64) as usize,
            PartitionStrategy::RoundRobin => idx % s,
            PartitionStrategy::ByVertex => (hashing::mix(seed, e.u as u64) % s as u64) as usize,
        };
        shards[site.min(s - 1)].edges.push(*e);
    }
    Ok(shards)
}

/// Message sizes in bits, fixed per run.
#[derive(Debug, Clone, Copy)]
pub struct CostModel {
    pub n: usize,
}

impl CostModel {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    /// ⌈log₂ n⌉ bits per vertex id.
    pub fn vertex_bits(&self) -> u64 {
        ceil_log2(self.n as u64)
    }

    /// One edge message: two vertex ids plus a 64-bit weight.
    pub fn edge_bits(&self) -> u64 {
        2 * self.vertex_bits() + 64
    }

    /// One real or integer count.
    pub fn scalar_bits(&self) -> u64 {
        64
    }

    /// A full k-way partition of the vertex set: n labels of ⌈log₂ k⌉ bits.
    pub fn partition_bits(&self, k: usize) -> u64 {
        self.n as u64 * ceil_log2(k as u64)
    }

    /// A point in R^d with all coordinates as 64-bit reals.
    pub fn point_bits(&self, dim: usize) -> u64 {
        64 * dim as u64
    }
}

fn ceil_log2(x: u64) -> u64 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Uplink,
    Downlink,
}

/// One monotone charge against the ledger, kept for conservation audits.
#[derive(Debug, Clone)]
pub struct ChargeEvent {
    pub site: Option<usize>,
    pub kind: &'static str,
    pub count: u64,
    pub bits: u64,
}

/// Per-channel bit counts: per-site uplink and downlink plus broadcast bits
/// (board or coordinator announcements, counted once per posting).
#[derive(Debug, Clone)]
pub struct CommLedger {
    uplink: Vec<u64>,
    downlink: Vec<u64>,
    broadcast: u64,
    rounds: u64,
    events: Vec<ChargeEvent>,
}

impl CommLedger {
    pub fn new(s: usize) -> Self {
        Self {
            uplink: vec![0; s],
            downlink: vec![0; s],
            broadcast: 0,
            rounds: 0,
            events: Vec::new(),
        }
    }

    pub fn sites(&self) -> usize {
        self.uplink.len()
    }

    fn charge(&mut self, site: Option<usize>, kind: &'static str, count: u64, bits: u64, dir: Direction) {
        if bits == 0 && count == 0 {
            return;
        }
        match (site, dir) {
            (Some(i), Direction::Uplink) => self.uplink[i] += bits,
            (Some(i), Direction::Downlink) => self.downlink[i] += bits,
            (None, _) => self.broadcast += bits,
        }
        self.events.push(ChargeEvent {
            site,
            kind,
            count,
            bits,
        });
    }

    /// Charge `count` edge messages on a site channel.
    pub fn charge_edges(&mut self, cost: &CostModel, site: usize, count: u64, dir: Direction) {
        self.charge(Some(site), "edges", count, count * cost.edge_bits(), dir);
    }

    /// Charge `count` scalar messages on a site channel.
    pub fn charge_scalars(&mut self, cost: &CostModel, site: usize, count: u64, dir: Direction) {
        self.charge(Some(site), "scalars", count, count * cost.scalar_bits(), dir);
    }

    /// Charge an arbitrary payload on a site channel.
    pub fn charge_bits(&mut self, site: usize, kind: &'static str, bits: u64, dir: Direction) {
        self.charge(Some(site), kind, 1, bits, dir);
    }

    /// A board/coordinator announcement, charged once for all readers.
    pub fn post_broadcast(&mut self, kind: &'static str, bits: u64) {
        self.charge(None, kind, 1, bits, Direction::Uplink);
    }

    pub fn next_round(&mut self) {
        self.rounds += 1;
    }

    pub fn set_rounds(&mut self, rounds: u64) {
        self.rounds = rounds;
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    pub fn uplink_bits(&self) -> u64 {
        self.uplink.iter().sum()
    }

    pub fn downlink_bits(&self) -> u64 {
        self.downlink.iter().sum()
    }

    pub fn broadcast_bits(&self) -> u64 {
        self.broadcast
    }

    pub fn site_uplink(&self, site: usize) -> u64 {
        self.uplink[site]
    }

    pub fn total_bits(&self) -> u64 {
        self.uplink_bits() + self.downlink_bits() + self.broadcast_bits()
    }

    pub fn events(&self) -> &[ChargeEvent] {
        &self.events
    }

    /// Conservation audit: the reported total must equal the event log sum.
    pub fn audit(&self) -> bool {
        self.events.iter().map(|e| e.bits).sum::<u64>() == self.total_bits()
    }

    pub fn csv_header() -> &'static str {
        "protocol,s,seed,uplink_bits,downlink_bits,broadcast_bits,total_bits,rounds"
    }

    pub fn csv_row(&self, protocol: &str, seed: u64) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            protocol,
            self.sites(),
            seed,
            self.uplink_bits(),
            self.downlink_bits(),
            self.broadcast_bits(),
            self.total_bits(),
            self.rounds
        )
    }
}
