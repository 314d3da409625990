//! Optimal computation allocation for a fixed communication plan.
//!
//! The canonical schedule puts all forward communications back-to-back
//! from time 0 and all backward communications back-to-back ending at
//! the algorithm delay. Between its own two communications each node is
//! free to compute. That geometry gives every node two gap windows:
//!
//! * `pre_gap`: from the end of its own forward communication to the
//!   end of the last forward communication (time t1),
//! * `post_gap`: from the start of the first backward communication
//!   (time t2) to the start of its own backward communication.
//!
//! Workload placed inside those windows is free — the delay stays at
//! the communication total S + B. Whatever does not fit stretches the
//! shared t1→t2 window equally for all nodes, which yields the closed
//! form `D = S + B + max(0, (w - cap0) / R)` with
//! `cap0 = Σ r_i (pre_gap_i + post_gap_i)`.
//!
//! The three-phase allocator fills pre-gaps in ascending forward
//! position, then post-gaps in descending backward position, then
//! splits the remainder across nodes in proportion to their rates.

use serde::Serialize;
use thiserror::Error;

use crate::model::{CommPlan, Instance, ModelError};
use crate::tol::{approx_le, tol_for};

/// Errors from allocation and delay evaluation.
#[derive(Debug, Error)]
pub enum AllocError {
    #[error(transparent)]
    Plan(#[from] ModelError),
    #[error("allocation has {actual} entries for {expected} selected nodes")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("node {node}: negative workload share {value}")]
    NegativeLoad { node: usize, value: f64 },
    #[error("allocated workload {actual} does not match instance workload {expected}")]
    LoadSumMismatch { expected: f64, actual: f64 },
}

/// Per-node gap windows of the canonical schedule, plus the plan-wide
/// totals S (forward delays), B (backward delays), and R (rates).
/// All per-node vectors are aligned with the plan's sorted selected set.
#[derive(Debug, Clone)]
pub struct GapProfile {
    selected: Vec<usize>,
    rates: Vec<f64>,
    fwd_end: Vec<f64>,
    pre_gap: Vec<f64>,
    post_gap: Vec<f64>,
    total_fwd: f64,
    total_bwd: f64,
    total_rate: f64,
    cap0: f64,
}

impl GapProfile {
    /// Selected ids in ascending order; indexes the per-node slices.
    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    /// End time of each node's forward communication.
    pub fn fwd_end(&self) -> &[f64] {
        &self.fwd_end
    }

    /// Seconds each node can compute before t1.
    pub fn pre_gap(&self) -> &[f64] {
        &self.pre_gap
    }

    /// Seconds each node can compute after t2 before its own backward
    /// communication starts.
    pub fn post_gap(&self) -> &[f64] {
        &self.post_gap
    }

    /// S: total forward communication delay over the selected set.
    pub fn total_fwd_delay(&self) -> f64 {
        self.total_fwd
    }

    /// B: total backward communication delay over the selected set.
    pub fn total_bwd_delay(&self) -> f64 {
        self.total_bwd
    }

    /// R: total computation rate over the selected set.
    pub fn total_rate(&self) -> f64 {
        self.total_rate
    }

    /// Workload completable at delay S + B: `Σ r_i (pre_i + post_i)`.
    pub fn cap0(&self) -> f64 {
        self.cap0
    }

    /// S + B, the communication lower bound on the delay.
    pub fn comm_delay(&self) -> f64 {
        self.total_fwd + self.total_bwd
    }
}

/// Compute the gap windows of `plan` on `instance`.
pub fn gap_profile(instance: &Instance, plan: &CommPlan) -> Result<GapProfile, AllocError> {
    plan.validate_for(instance)?;
    let n = plan.len();
    let selected = plan.selected().to_vec();
    let rates: Vec<f64> = selected.iter().map(|&id| instance.node(id).rate).collect();

    // Forward: prefix sums give each node's forward end; suffix sums
    // give the pre-gap directly so the last position is exactly 0.
    let mut fwd_end = vec![0.0; n];
    let mut pre_gap = vec![0.0; n];
    let mut acc = 0.0;
    for &node in plan.fwd_order() {
        acc += instance.node(node).fwd_delay;
        fwd_end[plan.index_of(node).expect("node is selected")] = acc;
    }
    let total_fwd = acc;
    acc = 0.0;
    for &node in plan.fwd_order().iter().rev() {
        pre_gap[plan.index_of(node).expect("node is selected")] = acc;
        acc += instance.node(node).fwd_delay;
    }

    // Backward: prefix sums of earlier-scheduled delays, so the first
    // position is exactly 0.
    let mut post_gap = vec![0.0; n];
    acc = 0.0;
    for &node in plan.bwd_order() {
        post_gap[plan.index_of(node).expect("node is selected")] = acc;
        acc += instance.node(node).bwd_delay;
    }
    let total_bwd = acc;

    let total_rate: f64 = rates.iter().sum();
    let cap0 = (0..n).map(|i| rates[i] * (pre_gap[i] + post_gap[i])).sum();

    Ok(GapProfile {
        selected,
        rates,
        fwd_end,
        pre_gap,
        post_gap,
        total_fwd,
        total_bwd,
        total_rate,
        cap0,
    })
}

/// Minimum algorithm delay achievable under `plan` with the optimal
/// allocation: `S + B + max(0, (w - cap0) / R)`.
pub fn min_delay(instance: &Instance, plan: &CommPlan) -> Result<f64, AllocError> {
    let g = gap_profile(instance, plan)?;
    Ok(min_delay_from(&g, instance.workload()))
}

/// Same closed form evaluated on a precomputed gap profile.
pub fn min_delay_from(gaps: &GapProfile, workload: f64) -> f64 {
    gaps.comm_delay() + ((workload - gaps.cap0()) / gaps.total_rate()).max(0.0)
}

/// Three-phase optimal workload split. Per-node vectors are aligned
/// with the plan's sorted selected set.
#[derive(Debug, Clone, Serialize)]
pub struct Allocation {
    selected: Vec<usize>,
    phase1: Vec<f64>,
    phase2: Vec<f64>,
    phase3: Vec<f64>,
    totals: Vec<f64>,
}

impl Allocation {
    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    /// Workload each node computes before t1.
    pub fn phase1(&self) -> &[f64] {
        &self.phase1
    }

    /// Workload each node computes after t2.
    pub fn phase2(&self) -> &[f64] {
        &self.phase2
    }

    /// Rate-proportional remainder computed between t1 and t2.
    pub fn phase3(&self) -> &[f64] {
        &self.phase3
    }

    /// Total workload per node (`w*_i`).
    pub fn totals(&self) -> &[f64] {
        &self.totals
    }

    pub fn total_workload(&self) -> f64 {
        self.totals.iter().sum()
    }

    /// JSON report per the external allocation schema.
    pub fn report(&self, delay: f64) -> AllocationReport {
        AllocationReport {
            per_node: self
                .selected
                .iter()
                .enumerate()
                .map(|(i, &id)| NodeAllocation {
                    id,
                    w1: self.phase1[i],
                    w2: self.phase2[i],
                    w3: self.phase3[i],
                    total: self.totals[i],
                })
                .collect(),
            delay,
        }
    }
}

/// Serializable allocation rendering: `{"per_node":[...],"delay":..}`.
#[derive(Debug, Clone, Serialize)]
pub struct AllocationReport {
    pub per_node: Vec<NodeAllocation>,
    pub delay: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NodeAllocation {
    pub id: usize,
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub total: f64,
}

/// Run the three-phase allocator on `plan`. The resulting allocation
/// achieves exactly `min_delay(instance, plan)`.
pub fn allocate(instance: &Instance, plan: &CommPlan) -> Result<Allocation, AllocError> {
    let g = gap_profile(instance, plan)?;
    let n = plan.len();
    let mut phase1 = vec![0.0; n];
    let mut phase2 = vec![0.0; n];
    let mut phase3 = vec![0.0; n];
    let mut remaining = instance.workload();

    // Phase 1: pre-gaps in ascending forward position. The last
    // forward position has pre_gap 0 and is skipped.
    for &node in plan.fwd_order().iter().take(n.saturating_sub(1)) {
        if remaining <= 0.0 {
            break;
        }
        let i = plan.index_of(node).expect("node is selected");
        let take = (g.rates[i] * g.pre_gap[i]).min(remaining);
        phase1[i] = take;
        remaining -= take;
    }

    // Phase 2: post-gaps in descending backward position. The first
    // backward position has post_gap 0 and is skipped.
    for &node in plan.bwd_order().iter().skip(1).rev() {
        if remaining <= 0.0 {
            break;
        }
        let i = plan.index_of(node).expect("node is selected");
        let take = (g.rates[i] * g.post_gap[i]).min(remaining);
        phase2[i] = take;
        remaining -= take;
    }

    // Phase 3: split the remainder in proportion to rates.
    if remaining > 0.0 {
        for i in 0..n {
            phase3[i] = remaining * g.rates[i] / g.total_rate;
        }
    }

    let totals: Vec<f64> = (0..n).map(|i| phase1[i] + phase2[i] + phase3[i]).collect();
    Ok(Allocation {
        selected: plan.selected().to_vec(),
        phase1,
        phase2,
        phase3,
        totals,
    })
}

/// Check a raw per-node workload split against the plan and instance.
pub(crate) fn validate_loads(
    instance: &Instance,
    plan: &CommPlan,
    loads: &[f64],
) -> Result<(), AllocError> {
    if loads.len() != plan.len() {
        return Err(AllocError::LengthMismatch {
            expected: plan.len(),
            actual: loads.len(),
        });
    }
    for (i, &load) in loads.iter().enumerate() {
        if !(load >= 0.0) {
            return Err(AllocError::NegativeLoad {
                node: plan.selected()[i],
                value: load,
            });
        }
    }
    let total: f64 = loads.iter().sum();
    let expected = instance.workload();
    if (total - expected).abs() > tol_for(total.abs().max(expected.abs())) {
        return Err(AllocError::LoadSumMismatch {
            expected,
            actual: total,
        });
    }
    Ok(())
}

/// Minimum delay of `plan` with a *fixed* per-node workload split
/// (aligned with the plan's sorted selected set), over all schedules
/// that are non-preemptive, forward-before-backward, and non-idle
/// within each phase:
/// `B + max(S, max_i(fwd_end_i + w_i / r_i - post_gap_i))`.
pub fn delay_of_fixed_allocation(
    instance: &Instance,
    plan: &CommPlan,
    loads: &[f64],
) -> Result<f64, AllocError> {
    validate_loads(instance, plan, loads)?;
    let g = gap_profile(instance, plan)?;
    let mut bound = g.total_fwd;
    for i in 0..plan.len() {
        let ready = g.fwd_end[i] + loads[i] / g.rates[i];
        bound = bound.max(ready - g.post_gap[i]);
    }
    Ok(g.total_bwd + bound)
}

/// True when the split fits entirely inside the gap windows, i.e. the
/// delay stays at S + B.
pub fn fits_gaps(gaps: &GapProfile, loads: &[f64]) -> bool {
    loads
        .iter()
        .enumerate()
        .all(|(i, &w)| approx_le(w, gaps.rates[i] * (gaps.pre_gap[i] + gaps.post_gap[i])))
}
