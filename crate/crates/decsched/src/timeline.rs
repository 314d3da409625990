//! Explicit schedules: channel intervals plus per-node compute
//! intervals. A timeline is valid when no two channel intervals
//! overlap (one transmitter at a time), each node's channel time
//! matches its delays, computing starts only after the node's forward
//! communication completes, the backward communication starts only
//! after computing completes, and every node covers its allocated
//! workload.
//!
//! `build_canonical` materializes the minimum-delay schedule for a
//! fixed allocation (non-preemptive, forward before backward, non-idle
//! within each phase). `sample_adversarial` produces *valid but
//! deliberately non-canonical* schedules — preempted communications,
//! inserted idle, forward/backward interleavings — used to test that
//! no valid schedule beats the canonical optimum.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::allocation::{gap_profile, validate_loads, AllocError, GapProfile};
use crate::model::{CommPlan, Instance};
use crate::ordering::Direction;
use crate::tol::tol_for;

/// One channel occupation: `node` transmitting in `direction` over
/// `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelInterval {
    pub node: usize,
    pub direction: Direction,
    pub start: f64,
    pub end: f64,
}

/// One computing stretch on a node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComputeInterval {
    pub start: f64,
    pub end: f64,
}

/// A complete schedule. `horizon` is the latest end time — the
/// algorithm delay this schedule realizes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timeline {
    pub channel: Vec<ChannelInterval>,
    pub compute: BTreeMap<usize, Vec<ComputeInterval>>,
    pub horizon: f64,
}

#[derive(Debug, Error)]
pub enum TimelineError {
    #[error(transparent)]
    Alloc(#[from] AllocError),
    #[error("interleaving requires at least 2 selected nodes")]
    InterleaveNeedsTwo,
    #[error("interleaving requires a positive backward delay and another node's positive forward delay")]
    InterleaveInfeasible,
    #[error("preemption requires a communication with positive delay")]
    NothingToPreempt,
}

/// A structural constraint violation found by [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Violation {
    /// Two channel intervals overlap (indices into `channel`).
    Overlap { first: usize, second: usize },
    /// Two compute intervals of one node overlap (indices into its
    /// interval list).
    ComputeOverlap { node: usize, first: usize, second: usize },
    /// Something started before its prerequisite finished.
    Precedence {
        node: usize,
        kind: PrecedenceKind,
        start: f64,
        required: f64,
    },
    /// A node's total channel time in one direction does not match its
    /// delay.
    Budget {
        node: usize,
        direction: Direction,
        scheduled: f64,
        expected: f64,
    },
    /// A node's compute intervals cannot cover its allocated workload.
    Workload {
        node: usize,
        completed: f64,
        allocated: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PrecedenceKind {
    ComputeBeforeForwardDone,
    BackwardBeforeComputeDone,
}

impl Violation {
    /// Machine-readable violation class.
    pub fn code(&self) -> &'static str {
        match self {
            Violation::Overlap { .. } | Violation::ComputeOverlap { .. } => "OVERLAP",
            Violation::Precedence { .. } => "PRECEDENCE",
            Violation::Budget { .. } => "BUDGET",
            Violation::Workload { .. } => "WORKLOAD",
        }
    }
}

/// The canonical minimum-delay schedule for `loads` under `plan`:
/// forward communications back-to-back from time 0, each node
/// computing contiguously from its forward end, backward
/// communications back-to-back ending at the realized delay.
pub fn build_canonical(
    instance: &Instance,
    plan: &CommPlan,
    loads: &[f64],
) -> Result<Timeline, TimelineError> {
    validate_loads(instance, plan, loads)?;
    let g = gap_profile(instance, plan)?;
    let n = plan.len();

    let mut channel = Vec::with_capacity(2 * n);
    let mut cursor = 0.0;
    for &node in plan.fwd_order() {
        let delay = instance.node(node).fwd_delay;
        channel.push(ChannelInterval {
            node,
            direction: Direction::Forward,
            start: cursor,
            end: cursor + delay,
        });
        cursor += delay;
    }

    // The backward chain is pinned to end at the realized delay; the
    // earliest feasible end is B + max(S, max_i(ready_i - post_gap_i)).
    let mut bound = g.total_fwd_delay();
    let mut compute = BTreeMap::new();
    for (i, &node) in plan.selected().iter().enumerate() {
        if loads[i] > 0.0 {
            let start = g.fwd_end()[i];
            let end = start + loads[i] / g.rates()[i];
            compute.insert(node, vec![ComputeInterval { start, end }]);
            bound = bound.max(end - g.post_gap()[i]);
        }
    }
    let horizon = g.total_bwd_delay() + bound;

    let mut backward = Vec::with_capacity(n);
    cursor = horizon;
    for &node in plan.bwd_order().iter().rev() {
        let delay = instance.node(node).bwd_delay;
        backward.push(ChannelInterval {
            node,
            direction: Direction::Backward,
            start: cursor - delay,
            end: cursor,
        });
        cursor -= delay;
    }
    channel.extend(backward.into_iter().rev());

    Ok(Timeline {
        channel,
        compute,
        horizon,
    })
}

/// Check a timeline against the structural constraints. Violations are
/// data, not errors: an empty list means the schedule is valid.
/// `loads` is the per-node workload split aligned with the plan's
/// sorted selected set.
pub fn validate(
    timeline: &Timeline,
    instance: &Instance,
    plan: &CommPlan,
    loads: &[f64],
) -> Vec<Violation> {
    assert_eq!(
        loads.len(),
        plan.len(),
        "loads must align with the plan's selected set"
    );
    let mut violations = Vec::new();

    // Channel intervals must not overlap: sweep by start time against
    // the furthest end seen so far.
    let mut order: Vec<usize> = (0..timeline.channel.len()).collect();
    order.sort_by(|&a, &b| {
        timeline.channel[a]
            .start
            .total_cmp(&timeline.channel[b].start)
    });
    let mut reach: Option<usize> = None;
    for &idx in &order {
        let iv = &timeline.channel[idx];
        if let Some(prev) = reach {
            let prev_end = timeline.channel[prev].end;
            if iv.start < prev_end - tol_for(prev_end.abs().max(iv.start.abs())) {
                violations.push(Violation::Overlap {
                    first: prev,
                    second: idx,
                });
            }
            if iv.end > prev_end {
                reach = Some(idx);
            }
        } else {
            reach = Some(idx);
        }
    }

    // Per-node channel budgets. Nodes outside the plan must not
    // transmit at all.
    let mut budgets: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
    for iv in &timeline.channel {
        let entry = budgets.entry(iv.node).or_insert((0.0, 0.0));
        match iv.direction {
            Direction::Forward => entry.0 += iv.end - iv.start,
            Direction::Backward => entry.1 += iv.end - iv.start,
        }
    }
    let mut nodes: Vec<usize> = budgets.keys().copied().collect();
    for &node in plan.selected() {
        if !budgets.contains_key(&node) {
            nodes.push(node);
        }
    }
    nodes.sort_unstable();
    for node in nodes {
        let (fwd, bwd) = budgets.get(&node).copied().unwrap_or((0.0, 0.0));
        let (exp_fwd, exp_bwd) = if plan.index_of(node).is_some() && node < instance.len() {
            (instance.node(node).fwd_delay, instance.node(node).bwd_delay)
        } else {
            (0.0, 0.0)
        };
        for (direction, scheduled, expected) in [
            (Direction::Forward, fwd, exp_fwd),
            (Direction::Backward, bwd, exp_bwd),
        ] {
            if (scheduled - expected).abs() > tol_for(scheduled.abs().max(expected.abs())) {
                violations.push(Violation::Budget {
                    node,
                    direction,
                    scheduled,
                    expected,
                });
            }
        }
    }

    // Precedence and per-node compute overlap.
    for (i, &node) in plan.selected().iter().enumerate() {
        let fwd_done = timeline
            .channel
            .iter()
            .filter(|iv| iv.node == node && iv.direction == Direction::Forward)
            .map(|iv| iv.end)
            .fold(0.0, f64::max);
        let computes = timeline.compute.get(&node).map(Vec::as_slice).unwrap_or(&[]);
        let mut compute_done = fwd_done;
        let mut sorted: Vec<usize> = (0..computes.len()).collect();
        sorted.sort_by(|&a, &b| computes[a].start.total_cmp(&computes[b].start));
        let mut prev: Option<usize> = None;
        for &ci in &sorted {
            let iv = &computes[ci];
            if iv.start < fwd_done - tol_for(fwd_done.abs().max(iv.start.abs())) {
                violations.push(Violation::Precedence {
                    node,
                    kind: PrecedenceKind::ComputeBeforeForwardDone,
                    start: iv.start,
                    required: fwd_done,
                });
            }
            if let Some(p) = prev {
                let prev_end = computes[p].end;
                if iv.start < prev_end - tol_for(prev_end.abs().max(iv.start.abs())) {
                    violations.push(Violation::ComputeOverlap {
                        node,
                        first: p,
                        second: ci,
                    });
                }
            }
            prev = Some(ci);
            compute_done = compute_done.max(iv.end);
        }
        for iv in timeline
            .channel
            .iter()
            .filter(|iv| iv.node == node && iv.direction == Direction::Backward)
        {
            if iv.start < compute_done - tol_for(compute_done.abs().max(iv.start.abs())) {
                violations.push(Violation::Precedence {
                    node,
                    kind: PrecedenceKind::BackwardBeforeComputeDone,
                    start: iv.start,
                    required: compute_done,
                });
                break;
            }
        }

        let completed: f64 = computes
            .iter()
            .map(|iv| (iv.end - iv.start).max(0.0) * instance.node(node).rate)
            .sum();
        if completed < loads[i] - tol_for(completed.abs().max(loads[i].abs())) {
            violations.push(Violation::Workload {
                node,
                completed,
                allocated: loads[i],
            });
        }
    }

    violations
}

/// Non-canonical schedule features the adversarial sampler can
/// exhibit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Features {
    /// Split communications into multiple channel intervals.
    pub preempt: bool,
    /// Insert idle periods on the channel.
    pub idle: bool,
    /// Schedule some backward communication before a forward one.
    pub interleave: bool,
}

impl Features {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn all() -> Self {
        Self {
            preempt: true,
            idle: true,
            interleave: true,
        }
    }

    pub fn is_empty(&self) -> bool {
        !(self.preempt || self.idle || self.interleave)
    }
}

// Per-comm piece splitting: up to 3 preemption splits (4 pieces).
fn split_pieces(rng: &mut ChaCha8Rng, total: f64, allow_split: bool) -> Vec<f64> {
    if total <= 0.0 {
        return Vec::new();
    }
    if allow_split && rng.random_bool(0.7) {
        let count = rng.random_range(2..=4usize);
        let mut cuts: Vec<f64> = (0..count - 1).map(|_| rng.random_range(0.0..1.0)).collect();
        cuts.sort_by(f64::total_cmp);
        let mut pieces = Vec::with_capacity(count);
        let mut prev = 0.0;
        for cut in cuts {
            pieces.push((cut - prev) * total);
            prev = cut;
        }
        pieces.push((1.0 - prev) * total);
        pieces
    } else {
        vec![total]
    }
}

struct Sampler<'a> {
    plan: &'a CommPlan,
    features: Features,
    rng: ChaCha8Rng,
    t: f64,
    idle_left: f64,
    total_comm: f64,
    channel: Vec<ChannelInterval>,
    fwd_pieces: Vec<Vec<f64>>,
    bwd_pieces: Vec<Vec<f64>>,
    fwd_next: Vec<usize>,
    bwd_next: Vec<usize>,
    fwd_done: Vec<Option<f64>>,
    compute_end: Vec<Option<f64>>,
    compute_time: Vec<f64>,
}

impl<'a> Sampler<'a> {
    fn maybe_gap(&mut self) {
        if self.features.idle && self.idle_left > 0.0 && self.rng.random_bool(0.35) {
            let gap = self.rng.random_range(0.0..=self.idle_left * 0.25);
            self.t += gap;
            self.idle_left -= gap;
        }
    }

    fn force_gap(&mut self) {
        if self.total_comm > 0.0 {
            let gap = (self.rng.random_range(0.05..=0.25) * self.total_comm).min(self.idle_left);
            self.t += gap;
            self.idle_left -= gap;
        }
    }

    fn emit_fwd(&mut self, i: usize) {
        self.maybe_gap();
        let node = self.plan.selected()[i];
        let duration = self.fwd_pieces[i][self.fwd_next[i]];
        self.fwd_next[i] += 1;
        self.channel.push(ChannelInterval {
            node,
            direction: Direction::Forward,
            start: self.t,
            end: self.t + duration,
        });
        self.t += duration;
        if self.fwd_next[i] == self.fwd_pieces[i].len() {
            self.finish_fwd(i, self.t);
        }
    }

    fn finish_fwd(&mut self, i: usize, at: f64) {
        self.fwd_done[i] = Some(at);
        self.compute_end[i] = Some(at + self.compute_time[i]);
    }

    fn emit_bwd(&mut self, i: usize) {
        self.maybe_gap();
        let node = self.plan.selected()[i];
        let duration = self.bwd_pieces[i][self.bwd_next[i]];
        if self.bwd_next[i] == 0 {
            // First piece must wait for the node's computation.
            let ready = self.compute_end[i].expect("forward communication finished");
            self.t = self.t.max(ready);
        }
        self.bwd_next[i] += 1;
        self.channel.push(ChannelInterval {
            node,
            direction: Direction::Backward,
            start: self.t,
            end: self.t + duration,
        });
        self.t += duration;
    }

    fn emit_all_fwd(&mut self, i: usize) {
        while self.fwd_next[i] < self.fwd_pieces[i].len() {
            self.emit_fwd(i);
        }
    }

    fn emit_all_bwd(&mut self, i: usize) {
        while self.bwd_next[i] < self.bwd_pieces[i].len() {
            self.emit_bwd(i);
        }
    }
}

/// Produce a *valid* timeline that exhibits the requested features,
/// deterministically per seed. An empty feature set yields the
/// canonical schedule.
pub fn sample_adversarial(
    instance: &Instance,
    plan: &CommPlan,
    loads: &[f64],
    seed: u64,
    features: Features,
) -> Result<Timeline, TimelineError> {
    validate_loads(instance, plan, loads)?;
    if features.is_empty() {
        return build_canonical(instance, plan, loads);
    }
    let gaps = gap_profile(instance, plan)?;
    let n = plan.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut fwd_pieces = Vec::with_capacity(n);
    let mut bwd_pieces = Vec::with_capacity(n);
    let mut any_split = false;
    for &node in plan.selected() {
        let spec = instance.node(node);
        let fwd = split_pieces(&mut rng, spec.fwd_delay, features.preempt);
        let bwd = split_pieces(&mut rng, spec.bwd_delay, features.preempt);
        any_split |= fwd.len() > 1 || bwd.len() > 1;
        fwd_pieces.push(fwd);
        bwd_pieces.push(bwd);
    }
    if features.preempt && !any_split {
        // Force one split on the longest communication.
        let mut longest: Option<(bool, usize, f64)> = None;
        for i in 0..n {
            let spec = instance.node(plan.selected()[i]);
            for (is_fwd, delay) in [(true, spec.fwd_delay), (false, spec.bwd_delay)] {
                if delay > 0.0 && longest.is_none_or(|(_, _, d)| delay > d) {
                    longest = Some((is_fwd, i, delay));
                }
            }
        }
        let Some((is_fwd, i, delay)) = longest else {
            return Err(TimelineError::NothingToPreempt);
        };
        let cut = rng.random_range(0.2..0.8) * delay;
        let pieces = vec![cut, delay - cut];
        if is_fwd {
            fwd_pieces[i] = pieces;
        } else {
            bwd_pieces[i] = pieces;
        }
    }

    let total_comm = gaps.total_fwd_delay() + gaps.total_bwd_delay();
    let compute_time: Vec<f64> = (0..n).map(|i| loads[i] / gaps.rates()[i]).collect();
    let mut sampler = Sampler {
        plan,
        features,
        rng,
        t: 0.0,
        idle_left: if features.idle { 2.0 * total_comm } else { 0.0 },
        total_comm,
        channel: Vec::new(),
        fwd_next: vec![0; n],
        bwd_next: vec![0; n],
        fwd_done: vec![None; n],
        compute_end: vec![None; n],
        compute_time,
        fwd_pieces,
        bwd_pieces,
    };
    for i in 0..n {
        if sampler.fwd_pieces[i].is_empty() {
            // Zero-delay forward communication completes immediately.
            sampler.finish_fwd(i, 0.0);
        }
    }
    if features.idle {
        sampler.force_gap();
    }

    let fwd_order_idx: Vec<usize> = sampler
        .plan
        .fwd_order()
        .iter()
        .map(|&id| sampler.plan.index_of(id).expect("node is selected"))
        .collect();
    let bwd_order_idx: Vec<usize> = sampler
        .plan
        .bwd_order()
        .iter()
        .map(|&id| sampler.plan.index_of(id).expect("node is selected"))
        .collect();

    if features.interleave {
        if n < 2 {
            return Err(TimelineError::InterleaveNeedsTwo);
        }
        let xs: Vec<usize> = (0..n).filter(|&i| !sampler.bwd_pieces[i].is_empty()).collect();
        let pair = xs.iter().copied().find_map(|x| {
            let ys: Vec<usize> = (0..n)
                .filter(|&y| y != x && !sampler.fwd_pieces[y].is_empty())
                .collect();
            if ys.is_empty() {
                None
            } else {
                Some((x, ys))
            }
        });
        let Some((_, _)) = pair else {
            return Err(TimelineError::InterleaveInfeasible);
        };
        let x = xs[sampler.rng.random_range(0..xs.len())];
        let ys: Vec<usize> = (0..n)
            .filter(|&y| y != x && !sampler.fwd_pieces[y].is_empty())
            .collect();
        if ys.is_empty() {
            return Err(TimelineError::InterleaveInfeasible);
        }
        let y = ys[sampler.rng.random_range(0..ys.len())];

        sampler.emit_all_fwd(x);
        for &i in &fwd_order_idx {
            if i == x {
                continue;
            }
            let held = if i == y { 1 } else { 0 };
            while sampler.fwd_next[i] + held < sampler.fwd_pieces[i].len() {
                sampler.emit_fwd(i);
            }
        }
        // A backward piece ahead of y's remaining forward piece.
        sampler.emit_bwd(x);
        sampler.emit_all_fwd(y);
        for &i in &bwd_order_idx {
            sampler.emit_all_bwd(i);
        }
    } else {
        for &i in &fwd_order_idx {
            sampler.emit_all_fwd(i);
        }
        for &i in &bwd_order_idx {
            sampler.emit_all_bwd(i);
        }
    }

    let mut compute = BTreeMap::new();
    let mut horizon: f64 = sampler.t;
    for i in 0..n {
        if loads[i] > 0.0 {
            let start = sampler.fwd_done[i].expect("all forward pieces emitted");
            let end = sampler.compute_end[i].expect("all forward pieces emitted");
            compute.insert(plan.selected()[i], vec![ComputeInterval { start, end }]);
            horizon = horizon.max(end);
        }
    }
    for iv in &sampler.channel {
        horizon = horizon.max(iv.end);
    }

    Ok(Timeline {
        channel: sampler.channel,
        compute,
        horizon,
    })
}

/// Plain-text Gantt rendering: one channel row plus one row per
/// computing node. Forward intervals paint `F`, backward `B`, compute
/// `#`.
pub fn render_gantt(timeline: &Timeline) -> String {
    const COLS: usize = 72;
    let horizon = timeline.horizon.max(f64::MIN_POSITIVE);
    let paint = |row: &mut [u8], start: f64, end: f64, ch: u8| {
        if end <= start {
            return;
        }
        let lo = ((start / horizon) * COLS as f64).floor() as usize;
        let hi = (((end / horizon) * COLS as f64).ceil() as usize).clamp(lo + 1, COLS);
        row[lo.min(COLS - 1)..hi].fill(ch);
    };

    let mut out = format!("horizon {:.6}s, {} channel intervals\n", timeline.horizon, timeline.channel.len());
    let mut row = vec![b'.'; COLS];
    for iv in &timeline.channel {
        let ch = match iv.direction {
            Direction::Forward => b'F',
            Direction::Backward => b'B',
        };
        paint(&mut row, iv.start, iv.end, ch);
    }
    out.push_str(&format!("channel |{}|\n", String::from_utf8_lossy(&row)));
    for (node, intervals) in &timeline.compute {
        let mut row = vec![b'.'; COLS];
        for iv in intervals {
            paint(&mut row, iv.start, iv.end, b'#');
        }
        out.push_str(&format!("node {:>3} |{}|\n", node, String::from_utf8_lossy(&row)));
    }
    out
}
