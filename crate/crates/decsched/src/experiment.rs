//! The solve pipeline and the experiment harness.
//!
//! A policy names a full pipeline configuration evaluated to a single
//! delay. Each baseline degrades exactly one axis from the fully
//! optimized design point, so every comparison isolates one factor and
//! the documented orderings hold row by row:
//!
//! * `OCA`, `OCO`, `OCA-OCO` — optimal allocation under optimized
//!   orders (the fully optimized delay; three names, one pipeline).
//! * `ECA`  — equal split w/n per node under the same optimized
//!   orders (so OCA <= ECA is the pure allocation effect).
//! * `ACO`  — identity orders with optimal allocation (so OCO <= ACO
//!   is the pure ordering effect).
//! * `LINEAR`, `GREEDY`, `EXHAUSTIVE` — node-selection searches with
//!   optimized orders on the chosen subset.
//!
//! Experiments sweep the workload (`ALLOC_VS_W`, `ORDER_VS_W`) or the
//! number of selected nodes (`DELAY_VS_N`) over seeded instances and
//! emit one CSV row per (sweep value, seed, policy).

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::allocation::{allocate, delay_of_fixed_allocation, min_delay, AllocError, Allocation};
use crate::guard::EnumGuard;
use crate::model::{generate_instance, CommPlan, Instance, ModelError, Profile};
use crate::ordering::{optimized_plan, OrderError, OrderPolicy, SuffixFill};
use crate::selection::{
    ranked_ids, select_exhaustive, select_greedy, select_linear, RankBy, SelectError,
};
use crate::timeline::{build_canonical, Timeline, TimelineError};
use crate::tol::approx_eq;

/// How the node subset is chosen by the solve pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectPolicy {
    /// Use every node.
    All,
    /// Linear prefix search over ranked nodes.
    Linear(RankBy),
    /// Greedy accretion.
    Greedy,
    /// Exhaustive subset search (guarded).
    Exhaustive,
}

/// A complete answer: the plan, the three-phase allocation, the
/// predicted delay, and the canonical timeline realizing it.
#[derive(Debug, Clone)]
pub struct Solution {
    pub plan: CommPlan,
    pub allocation: Allocation,
    pub delay: f64,
    pub timeline: Timeline,
}

impl Solution {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "selected": self.plan.selected(),
            "fwd_order": self.plan.fwd_order(),
            "bwd_order": self.plan.bwd_order(),
            "allocation": self.allocation.report(self.delay),
            "delay": self.delay,
            "timeline": self.timeline,
        })
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Select(#[from] SelectError),
    #[error(transparent)]
    Timeline(#[from] TimelineError),
    #[error("internal invariant failed: {0}")]
    Internal(String),
}

/// Selection, ordering, allocation, and timeline in one pass. The
/// timeline horizon is cross-checked against the predicted delay.
pub fn solve(
    instance: &Instance,
    select: SelectPolicy,
    order: OrderPolicy,
    guard: &EnumGuard,
) -> Result<Solution, SolveError> {
    let (plan, delay) = match select {
        SelectPolicy::All => {
            let ids: Vec<usize> = (0..instance.len()).collect();
            let plan = optimized_plan(instance, &ids, order, guard).map_err(SelectError::from)?;
            let delay = min_delay(instance, &plan).map_err(SelectError::from)?;
            (plan, delay)
        }
        SelectPolicy::Linear(rank) => {
            let result = select_linear(instance, rank)?;
            (result.plan, result.delay)
        }
        SelectPolicy::Greedy => {
            let result = select_greedy(instance, order, guard)?;
            (result.plan, result.delay)
        }
        SelectPolicy::Exhaustive => {
            let result = select_exhaustive(instance, order, guard)?;
            (result.plan, result.delay)
        }
    };
    let allocation = allocate(instance, &plan).map_err(SelectError::from)?;
    let timeline = build_canonical(instance, &plan, allocation.totals())?;
    if !approx_eq(timeline.horizon, delay) {
        return Err(SolveError::Internal(format!(
            "timeline horizon {} disagrees with predicted delay {delay}",
            timeline.horizon
        )));
    }
    Ok(Solution {
        plan,
        allocation,
        delay,
        timeline,
    })
}

/// Experiment families, mirroring the three simulation figures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExperimentKind {
    #[serde(rename = "ALLOC_VS_W")]
    AllocVsW,
    #[serde(rename = "ORDER_VS_W")]
    OrderVsW,
    #[serde(rename = "DELAY_VS_N")]
    DelayVsN,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExperimentKind::AllocVsW => "ALLOC_VS_W",
            ExperimentKind::OrderVsW => "ORDER_VS_W",
            ExperimentKind::DelayVsN => "DELAY_VS_N",
        })
    }
}

impl FromStr for ExperimentKind {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "ALLOC_VS_W" => Ok(ExperimentKind::AllocVsW),
            "ORDER_VS_W" => Ok(ExperimentKind::OrderVsW),
            "DELAY_VS_N" => Ok(ExperimentKind::DelayVsN),
            _ => Err(ExperimentError::InvalidSpec(format!(
                "unknown experiment kind {s:?}"
            ))),
        }
    }
}

/// Registered policy names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PolicyName {
    #[serde(rename = "OCA")]
    Oca,
    #[serde(rename = "ECA")]
    Eca,
    #[serde(rename = "OCO")]
    Oco,
    #[serde(rename = "ACO")]
    Aco,
    #[serde(rename = "OCA-OCO")]
    OcaOco,
    #[serde(rename = "LINEAR")]
    Linear,
    #[serde(rename = "GREEDY")]
    Greedy,
    #[serde(rename = "EXHAUSTIVE")]
    Exhaustive,
}

impl PolicyName {
    fn is_selection(self) -> bool {
        matches!(
            self,
            PolicyName::Linear | PolicyName::Greedy | PolicyName::Exhaustive
        )
    }
}

impl fmt::Display for PolicyName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolicyName::Oca => "OCA",
            PolicyName::Eca => "ECA",
            PolicyName::Oco => "OCO",
            PolicyName::Aco => "ACO",
            PolicyName::OcaOco => "OCA-OCO",
            PolicyName::Linear => "LINEAR",
            PolicyName::Greedy => "GREEDY",
            PolicyName::Exhaustive => "EXHAUSTIVE",
        })
    }
}

impl FromStr for PolicyName {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "OCA" => Ok(PolicyName::Oca),
            "ECA" => Ok(PolicyName::Eca),
            "OCO" => Ok(PolicyName::Oco),
            "ACO" => Ok(PolicyName::Aco),
            "OCA-OCO" => Ok(PolicyName::OcaOco),
            "LINEAR" => Ok(PolicyName::Linear),
            "GREEDY" => Ok(PolicyName::Greedy),
            "EXHAUSTIVE" => Ok(PolicyName::Exhaustive),
            _ => Err(ExperimentError::InvalidSpec(format!(
                "unknown policy name {s:?}"
            ))),
        }
    }
}

/// A sweep description: what to vary, over which instances, under
/// which policies.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub profile: Profile,
    /// Workload values (w sweeps) or node counts (DELAY_VS_N).
    pub sweep: Vec<f64>,
    pub seeds: Vec<u64>,
    pub policies: Vec<PolicyName>,
    /// Instance size for workload sweeps.
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    /// Workload for DELAY_VS_N sweeps.
    #[serde(default = "default_workload")]
    pub workload: f64,
}

fn default_nodes() -> usize {
    3
}

fn default_workload() -> f64 {
    10.0
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error(transparent)]
    Alloc(#[from] AllocError),
    #[error(transparent)]
    Select(#[from] SelectError),
    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),
    #[error("policy {policy} is not valid for {kind} sweeps (the sweep fixes the subset)")]
    PolicyKindMismatch {
        policy: PolicyName,
        kind: ExperimentKind,
    },
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let invalid = |msg: String| Err(ExperimentError::InvalidSpec(msg));
        if self.sweep.is_empty() {
            return invalid("sweep is empty".into());
        }
        if self.seeds.is_empty() {
            return invalid("seeds are empty".into());
        }
        if self.policies.is_empty() {
            return invalid("policies are empty".into());
        }
        if self.nodes == 0 {
            return invalid("nodes must be >= 1".into());
        }
        if !self.workload.is_finite() || self.workload < 0.0 {
            return invalid(format!("workload {} must be finite and >= 0", self.workload));
        }
        for &value in &self.sweep {
            if !value.is_finite() || value < 0.0 {
                return invalid(format!("sweep value {value} must be finite and >= 0"));
            }
            if self.kind == ExperimentKind::DelayVsN && (value.fract() != 0.0 || value < 1.0) {
                return invalid(format!("DELAY_VS_N sweep value {value} must be an integer >= 1"));
            }
        }
        if self.kind == ExperimentKind::DelayVsN {
            if let Some(&policy) = self.policies.iter().find(|p| p.is_selection()) {
                return Err(ExperimentError::PolicyKindMismatch {
                    policy,
                    kind: self.kind,
                });
            }
        }
        Ok(())
    }
}

/// One measured grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub kind: ExperimentKind,
    pub profile: Profile,
    pub seed: u64,
    pub sweep_value: f64,
    pub policy: PolicyName,
    pub delay: f64,
}

fn auto_order_policy(subset_len: usize, guard: &EnumGuard) -> OrderPolicy {
    if subset_len <= guard.max_permutation_nodes {
        OrderPolicy::Exhaustive
    } else {
        OrderPolicy::GreedyPrefix {
            k: 3,
            fill: SuffixFill::AscendingId,
        }
    }
}

fn auto_rank(instance: &Instance) -> RankBy {
    if instance.rates_uniform() {
        RankBy::CommDelay
    } else if instance.delays_uniform() {
        RankBy::Rate
    } else {
        RankBy::CommDelay
    }
}

/// Evaluate one policy on a node subset of `instance`.
pub fn eval_policy(
    instance: &Instance,
    selected: &[usize],
    policy: PolicyName,
    guard: &EnumGuard,
) -> Result<f64, ExperimentError> {
    match policy {
        PolicyName::Eca => {
            let order = auto_order_policy(selected.len(), guard);
            let plan = optimized_plan(instance, selected, order, guard)?;
            let share = instance.workload() / selected.len() as f64;
            let loads = vec![share; selected.len()];
            Ok(delay_of_fixed_allocation(instance, &plan, &loads)?)
        }
        PolicyName::Aco => {
            let plan = CommPlan::identity(selected.to_vec())?;
            Ok(min_delay(instance, &plan)?)
        }
        PolicyName::Oca | PolicyName::Oco | PolicyName::OcaOco => {
            let order = auto_order_policy(selected.len(), guard);
            let plan = optimized_plan(instance, selected, order, guard)?;
            Ok(min_delay(instance, &plan)?)
        }
        PolicyName::Linear => Ok(select_linear(instance, auto_rank(instance))?.delay),
        PolicyName::Greedy => {
            let order = auto_order_policy(instance.len(), guard);
            Ok(select_greedy(instance, order, guard)?.delay)
        }
        PolicyName::Exhaustive => {
            let order = auto_order_policy(instance.len(), guard);
            Ok(select_exhaustive(instance, order, guard)?.delay)
        }
    }
}

// Nested prefixes for DELAY_VS_N: the profile's natural ranking.
fn delay_vs_n_ranking(instance: &Instance, profile: Profile) -> Vec<usize> {
    match (profile.diverse_delays(), profile.diverse_rates()) {
        (false, false) => (0..instance.len()).collect(),
        (true, false) => ranked_ids(instance, RankBy::CommDelay),
        (false, true) => ranked_ids(instance, RankBy::Rate),
        (true, true) => ranked_ids(instance, RankBy::CommDelay),
    }
}

/// Run the sweep and return rows sorted by (seed, sweep value, policy).
pub fn run_experiment(
    spec: &ExperimentSpec,
    guard: &EnumGuard,
) -> Result<Vec<ExperimentRow>, ExperimentError> {
    spec.validate()?;
    let mut rows = Vec::new();
    match spec.kind {
        ExperimentKind::AllocVsW | ExperimentKind::OrderVsW => {
            for &seed in &spec.seeds {
                let base = generate_instance(spec.nodes, seed, spec.profile)?;
                let selected: Vec<usize> = (0..base.len()).collect();
                for &w in &spec.sweep {
                    let inst = base.with_workload(w)?;
                    for &policy in &spec.policies {
                        let delay = eval_policy(&inst, &selected, policy, guard)?;
                        rows.push(ExperimentRow {
                            kind: spec.kind,
                            profile: spec.profile,
                            seed,
                            sweep_value: w,
                            policy,
                            delay,
                        });
                    }
                }
            }
        }
        ExperimentKind::DelayVsN => {
            let max_n = spec.sweep.iter().fold(1.0f64, |a, &b| a.max(b)) as usize;
            for &seed in &spec.seeds {
                let base = generate_instance(max_n, seed, spec.profile)?
                    .with_workload(spec.workload)?;
                let ranking = delay_vs_n_ranking(&base, spec.profile);
                for &value in &spec.sweep {
                    let mut subset = ranking[..value as usize].to_vec();
                    subset.sort_unstable();
                    for &policy in &spec.policies {
                        let delay = eval_policy(&base, &subset, policy, guard)?;
                        rows.push(ExperimentRow {
                            kind: spec.kind,
                            profile: spec.profile,
                            seed,
                            sweep_value: value,
                            policy,
                            delay,
                        });
                    }
                }
            }
        }
    }
    rows.sort_by(|a, b| {
        a.seed
            .cmp(&b.seed)
            .then(a.sweep_value.total_cmp(&b.sweep_value))
            .then(a.policy.cmp(&b.policy))
    });
    Ok(rows)
}

/// CSV with the fixed column set
/// `kind,profile,seed,sweep_value,policy,delay`.
pub fn write_csv<W: Write>(rows: &[ExperimentRow], out: &mut W) -> io::Result<()> {
    writeln!(out, "kind,profile,seed,sweep_value,policy,delay")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            row.kind, row.profile, row.seed, row.sweep_value, row.policy, row.delay
        )?;
    }
    Ok(())
}
