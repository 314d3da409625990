//! Problem-instance data model: worker nodes, instances, communication
//! plans, instance file I/O, and seeded instance generation.
//!
//! An instance is a total divisible workload plus one entry per worker
//! node: its computation rate and the delays of its forward (input) and
//! backward (result) communications on the shared channel. A
//! [`CommPlan`] fixes which nodes participate and the order in which
//! their forward and backward communications occupy the channel.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from instance parsing, validation, and plan construction.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("malformed instance document: {0}")]
    Syntax(String),
    #[error("missing field {0}")]
    MissingField(&'static str),
    #[error("node {node}: missing field {field}")]
    MissingNodeField { node: usize, field: &'static str },
    #[error("node {node}: {field} {reason}")]
    InvalidNodeField {
        node: usize,
        field: &'static str,
        reason: &'static str,
    },
    #[error("workload {reason}")]
    InvalidWorkload { reason: &'static str },
    #[error("instance must have at least one node")]
    NoNodes,
    #[error("node ids must be exactly 0..{expected}, got {got} at position {position}")]
    SparseIds {
        expected: usize,
        got: usize,
        position: usize,
    },
    #[error("communication plan: {0}")]
    InvalidPlan(String),
    #[error("unknown profile {0:?} (expected UMUC, UMDC, DMUC, or DMDC)")]
    UnknownProfile(String),
}

/// A single worker node: computation rate plus forward/backward
/// communication delays.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NodeSpec {
    /// Dense 0-based identifier (the node's index in the instance).
    pub id: usize,
    /// Computation rate in workload units per second, > 0.
    pub rate: f64,
    /// Delay of the node's forward communication in seconds, >= 0.
    pub fwd_delay: f64,
    /// Delay of the node's backward communication in seconds, >= 0.
    pub bwd_delay: f64,
}

impl NodeSpec {
    fn validate(&self) -> Result<(), ModelError> {
        let bad = |field, reason| ModelError::InvalidNodeField {
            node: self.id,
            field,
            reason,
        };
        if !self.rate.is_finite() {
            return Err(bad("rate", "must be finite"));
        }
        if self.rate <= 0.0 {
            return Err(bad("rate", "must be > 0"));
        }
        if !self.fwd_delay.is_finite() {
            return Err(bad("fwd_delay", "must be finite"));
        }
        if self.fwd_delay < 0.0 {
            return Err(bad("fwd_delay", "must be >= 0"));
        }
        if !self.bwd_delay.is_finite() {
            return Err(bad("bwd_delay", "must be finite"));
        }
        if self.bwd_delay < 0.0 {
            return Err(bad("bwd_delay", "must be >= 0"));
        }
        Ok(())
    }
}

/// A complete problem input: the total divisible workload and the
/// ordered list of worker nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    workload: f64,
    nodes: Vec<NodeSpec>,
}

impl Instance {
    /// Build a validated instance. Node ids must be exactly `0..N-1`
    /// in order, the workload non-negative and finite, and every node
    /// must satisfy its field invariants.
    pub fn new(workload: f64, nodes: Vec<NodeSpec>) -> Result<Self, ModelError> {
        if nodes.is_empty() {
            return Err(ModelError::NoNodes);
        }
        if !workload.is_finite() {
            return Err(ModelError::InvalidWorkload {
                reason: "must be finite",
            });
        }
        if workload < 0.0 {
            return Err(ModelError::InvalidWorkload {
                reason: "must be >= 0",
            });
        }
        for (position, node) in nodes.iter().enumerate() {
            if node.id != position {
                return Err(ModelError::SparseIds {
                    expected: nodes.len(),
                    got: node.id,
                    position,
                });
            }
            node.validate()?;
        }
        Ok(Self { workload, nodes })
    }

    /// Build an instance from `(rate, fwd_delay, bwd_delay)` triples,
    /// assigning dense ids in order.
    pub fn from_parts(
        workload: f64,
        parts: impl IntoIterator<Item = (f64, f64, f64)>,
    ) -> Result<Self, ModelError> {
        let nodes = parts
            .into_iter()
            .enumerate()
            .map(|(id, (rate, fwd_delay, bwd_delay))| NodeSpec {
                id,
                rate,
                fwd_delay,
                bwd_delay,
            })
            .collect();
        Self::new(workload, nodes)
    }

    /// An instance of `n` identical unit nodes (rate 1, delays 1).
    pub fn uniform_unit(n: usize, workload: f64) -> Result<Self, ModelError> {
        Self::from_parts(workload, (0..n).map(|_| (1.0, 1.0, 1.0)))
    }

    /// The same instance with a different total workload.
    pub fn with_workload(&self, workload: f64) -> Result<Self, ModelError> {
        Self::new(workload, self.nodes.clone())
    }

    pub fn workload(&self) -> f64 {
        self.workload
    }

    pub fn nodes(&self) -> &[NodeSpec] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees at least one node
    }

    /// Node by id. Panics on an out-of-range id.
    pub fn node(&self, id: usize) -> &NodeSpec {
        &self.nodes[id]
    }

    /// True when all computation rates are equal.
    pub fn rates_uniform(&self) -> bool {
        self.nodes.iter().all(|n| n.rate == self.nodes[0].rate)
    }

    /// True when all forward delays are equal and all backward delays
    /// are equal.
    pub fn delays_uniform(&self) -> bool {
        self.nodes
            .iter()
            .all(|n| n.fwd_delay == self.nodes[0].fwd_delay && n.bwd_delay == self.nodes[0].bwd_delay)
    }
}

/// Which nodes participate and in what order their communications are
/// scheduled. `fwd_order` / `bwd_order` are permutations of `selected`:
/// position `p` holds the node whose communication is scheduled p-th.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommPlan {
    selected: Vec<usize>,
    fwd_order: Vec<usize>,
    bwd_order: Vec<usize>,
}

impl CommPlan {
    /// Build a plan, checking that both orders are bijections on the
    /// selected set.
    pub fn new(
        selected: Vec<usize>,
        fwd_order: Vec<usize>,
        bwd_order: Vec<usize>,
    ) -> Result<Self, ModelError> {
        if selected.is_empty() {
            return Err(ModelError::InvalidPlan("selected set is empty".into()));
        }
        let mut sorted = selected;
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(ModelError::InvalidPlan("selected set has duplicate ids".into()));
        }
        for (name, order) in [("fwd_order", &fwd_order), ("bwd_order", &bwd_order)] {
            let mut check = order.clone();
            check.sort_unstable();
            if check != sorted {
                return Err(ModelError::InvalidPlan(format!(
                    "{name} is not a bijection on the selected set"
                )));
            }
        }
        Ok(Self {
            selected: sorted,
            fwd_order,
            bwd_order,
        })
    }

    /// Plan with ascending-id orders in both directions.
    pub fn identity(selected: Vec<usize>) -> Result<Self, ModelError> {
        let mut sorted = selected;
        sorted.sort_unstable();
        Self::new(sorted.clone(), sorted.clone(), sorted)
    }

    /// Identity plan over every node of the instance.
    pub fn all_nodes(instance: &Instance) -> Self {
        Self::identity((0..instance.len()).collect()).expect("instance has at least one node")
    }

    /// Selected ids in ascending order.
    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn fwd_order(&self) -> &[usize] {
        &self.fwd_order
    }

    pub fn bwd_order(&self) -> &[usize] {
        &self.bwd_order
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees a non-empty selection
    }

    /// Index of `node` within the sorted selected set.
    pub fn index_of(&self, node: usize) -> Option<usize> {
        self.selected.binary_search(&node).ok()
    }

    /// Check every selected id exists in the instance.
    pub fn validate_for(&self, instance: &Instance) -> Result<(), ModelError> {
        match self.selected.iter().find(|&&id| id >= instance.len()) {
            Some(&id) => Err(ModelError::InvalidPlan(format!(
                "selected node {id} does not exist (instance has {} nodes)",
                instance.len()
            ))),
            None => Ok(()),
        }
    }
}

// The on-disk schema: node id = array index, so `NodeSpec::id` is not
// serialized. Options let missing fields be reported with the node id.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    workload: Option<f64>,
    nodes: Option<Vec<RawNode>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    rate: Option<f64>,
    fwd_delay: Option<f64>,
    bwd_delay: Option<f64>,
}

/// Parse an instance document (UTF-8 JSON). Syntax problems and
/// semantic violations are reported separately; semantic errors carry
/// the node id and field name.
pub fn parse_instance(text: &str) -> Result<Instance, ModelError> {
    let raw: RawInstance =
        serde_json::from_str(text).map_err(|e| ModelError::Syntax(e.to_string()))?;
    let workload = raw.workload.ok_or(ModelError::MissingField("workload"))?;
    let raw_nodes = raw.nodes.ok_or(ModelError::MissingField("nodes"))?;
    let mut nodes = Vec::with_capacity(raw_nodes.len());
    for (id, raw_node) in raw_nodes.into_iter().enumerate() {
        let missing = |field| ModelError::MissingNodeField { node: id, field };
        nodes.push(NodeSpec {
            id,
            rate: raw_node.rate.ok_or_else(|| missing("rate"))?,
            fwd_delay: raw_node.fwd_delay.ok_or_else(|| missing("fwd_delay"))?,
            bwd_delay: raw_node.bwd_delay.ok_or_else(|| missing("bwd_delay"))?,
        });
    }
    Instance::new(workload, nodes)
}

/// Render an instance to its JSON file form. Numbers use the shortest
/// decimal representation that round-trips, so `parse(render(x)) == x`
/// bit-exactly.
pub fn render_instance(instance: &Instance) -> String {
    #[derive(Serialize)]
    struct Out<'a> {
        workload: f64,
        nodes: Vec<&'a RawNodeOut>,
    }
    #[derive(Serialize)]
    struct RawNodeOut {
        rate: f64,
        fwd_delay: f64,
        bwd_delay: f64,
    }
    let nodes: Vec<RawNodeOut> = instance
        .nodes()
        .iter()
        .map(|n| RawNodeOut {
            rate: n.rate,
            fwd_delay: n.fwd_delay,
            bwd_delay: n.bwd_delay,
        })
        .collect();
    let out = Out {
        workload: instance.workload(),
        nodes: nodes.iter().collect(),
    };
    serde_json::to_string(&out).expect("instance serialization cannot fail")
}

/// Instance generation profile: which of the two parameter dimensions
/// (communication delays, computation rates) vary across nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Profile {
    /// Uniform communication delays, uniform computation rates.
    #[serde(rename = "UMUC")]
    Umuc,
    /// Uniform communication delays, diverse computation rates.
    #[serde(rename = "UMDC")]
    Umdc,
    /// Diverse communication delays, uniform computation rates.
    #[serde(rename = "DMUC")]
    Dmuc,
    /// Diverse communication delays, diverse computation rates.
    #[serde(rename = "DMDC")]
    Dmdc,
}

impl Profile {
    pub const ALL: [Profile; 4] = [Profile::Umuc, Profile::Umdc, Profile::Dmuc, Profile::Dmdc];

    pub fn diverse_delays(self) -> bool {
        matches!(self, Profile::Dmuc | Profile::Dmdc)
    }

    pub fn diverse_rates(self) -> bool {
        matches!(self, Profile::Umdc | Profile::Dmdc)
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Profile::Umuc => "UMUC",
            Profile::Umdc => "UMDC",
            Profile::Dmuc => "DMUC",
            Profile::Dmdc => "DMDC",
        };
        f.write_str(name)
    }
}

impl FromStr for Profile {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "UMUC" => Ok(Profile::Umuc),
            "UMDC" => Ok(Profile::Umdc),
            "DMUC" => Ok(Profile::Dmuc),
            "DMDC" => Ok(Profile::Dmdc),
            _ => Err(ModelError::UnknownProfile(s.to_string())),
        }
    }
}

/// Range for the diverse parameter dimensions, roughly a 10x spread.
const DIVERSE_RANGE: (f64, f64) = (0.5, 5.0);

/// Workload of generated instances (callers override per experiment).
const GENERATED_WORKLOAD: f64 = 10.0;

/// Deterministically generate an `n`-node instance. Uniform dimensions
/// are fixed at 1.0; diverse dimensions are drawn uniformly from
/// [0.5, 5.0]. Candidate draws are consumed for every dimension
/// regardless of profile, so profiles are paired at equal seed.
pub fn generate_instance(n: usize, seed: u64, profile: Profile) -> Result<Instance, ModelError> {
    if n == 0 {
        return Err(ModelError::NoNodes);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = DIVERSE_RANGE;
    let mut draw = |diverse: bool| {
        let candidate = rng.random_range(lo..=hi);
        if diverse {
            candidate
        } else {
            1.0
        }
    };
    let parts: Vec<(f64, f64, f64)> = (0..n)
        .map(|_| {
            let rate = draw(profile.diverse_rates());
            let fwd = draw(profile.diverse_delays());
            let bwd = draw(profile.diverse_delays());
            (rate, fwd, bwd)
        })
        .collect();
    Instance::from_parts(GENERATED_WORKLOAD, parts)
}
