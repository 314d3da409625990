//! Communication-order objectives and optimizers.
//!
//! Orders are scored by the dual objective `v`: the total workload the
//! other nodes can complete while a direction's communications occupy
//! the channel. For backward communications the node scheduled at
//! position p contributes `d_p * (sum of rates scheduled after p)`;
//! maximizing `v` maximizes the post-gap capacity and therefore
//! minimizes the algorithm delay. The forward direction is the exact
//! time reversal: a forward delay is weighted by the rates of nodes
//! scheduled *before* it.
//!
//! Provided optimizers:
//! * closed forms for the uniform cases (descending delay for uniform
//!   rates, ascending rate for uniform delays, with forward mirrors),
//! * a greedy prefix search that enumerates ordered k-tuples and
//!   guarantees a k/N fraction of the optimal objective,
//! * an exhaustive oracle over all permutations (guarded),
//! * generators for the two instances on which the closed-form
//!   heuristics are arbitrarily worse than optimal.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::guard::EnumGuard;
use crate::model::{CommPlan, Instance, ModelError, NodeSpec};
use crate::tol::REL_TOL;

/// Which communication phase an order applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "FWD")]
    Forward,
    #[serde(rename = "BWD")]
    Backward,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::Forward, Direction::Backward];

    /// The node's communication delay in this direction.
    pub fn delay_of(self, node: &NodeSpec) -> f64 {
        match self {
            Direction::Forward => node.fwd_delay,
            Direction::Backward => node.bwd_delay,
        }
    }
}

/// Errors from order optimization.
#[derive(Debug, Error)]
pub enum OrderError {
    #[error(transparent)]
    Plan(#[from] ModelError),
    #[error("order is not a permutation of the selected set")]
    NotBijective,
    #[error("enumeration over {nodes} nodes exceeds the guard limit {limit}")]
    GuardExceeded { nodes: usize, limit: usize },
    #[error("prefix length {k} out of range 1..={n}")]
    PrefixOutOfRange { k: usize, n: usize },
    #[error("counterexample requires at least 2 nodes (got {0})")]
    CounterexampleTooSmall(usize),
    #[error("counterexample scale must be finite and >= 1 (got {0})")]
    InvalidScale(f64),
}

/// A validated subset of an instance, with the direction's delays and
/// the rates laid out by index. Index order equals ascending id order.
struct SubsetView {
    ids: Vec<usize>,
    delays: Vec<f64>,
    rates: Vec<f64>,
    total_rate: f64,
}

impl SubsetView {
    fn new(instance: &Instance, selected: &[usize], direction: Direction) -> Result<Self, OrderError> {
        if selected.is_empty() {
            return Err(ModelError::InvalidPlan("selected set is empty".into()).into());
        }
        let mut ids = selected.to_vec();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(ModelError::InvalidPlan("selected set has duplicate ids".into()).into());
        }
        if let Some(&id) = ids.iter().find(|&&id| id >= instance.len()) {
            return Err(ModelError::InvalidPlan(format!(
                "selected node {id} does not exist (instance has {} nodes)",
                instance.len()
            ))
            .into());
        }
        let delays = ids.iter().map(|&id| direction.delay_of(instance.node(id))).collect();
        let rates: Vec<f64> = ids.iter().map(|&id| instance.node(id).rate).collect();
        let total_rate = rates.iter().sum();
        Ok(Self {
            ids,
            delays,
            rates,
            total_rate,
        })
    }

    fn len(&self) -> usize {
        self.ids.len()
    }

    fn index_of(&self, id: usize) -> Option<usize> {
        self.ids.binary_search(&id).ok()
    }

    fn to_ids(&self, indices: &[usize]) -> Vec<usize> {
        indices.iter().map(|&i| self.ids[i]).collect()
    }
}

/// The per-position terms of an order's objective and their sum.
#[derive(Debug, Clone, Serialize)]
pub struct ObjectiveValue {
    pub value: f64,
    pub terms: Vec<f64>,
}

fn objective_terms(view: &SubsetView, order: &[usize]) -> Vec<f64> {
    // `order` is in index space. Backward weights a delay by the rates
    // scheduled after it, forward by the rates scheduled before it.
    order
        .iter()
        .scan(view.total_rate, |rem, &idx| {
            *rem -= view.rates[idx];
            Some(view.delays[idx] * *rem)
        })
        .collect()
}

fn eval_forward_terms(view: &SubsetView, order: &[usize]) -> Vec<f64> {
    let mut used = 0.0;
    order
        .iter()
        .map(|&idx| {
            let term = view.delays[idx] * used;
            used += view.rates[idx];
            term
        })
        .collect()
}

fn terms_for(view: &SubsetView, order: &[usize], direction: Direction) -> Vec<f64> {
    match direction {
        Direction::Backward => objective_terms(view, order),
        Direction::Forward => eval_forward_terms(view, order),
    }
}

/// Evaluate the dual objective of `order` on the selected set. Also
/// returns the per-position terms.
pub fn objective_v(
    instance: &Instance,
    selected: &[usize],
    order: &[usize],
    direction: Direction,
) -> Result<ObjectiveValue, OrderError> {
    let view = SubsetView::new(instance, selected, direction)?;
    let mut check: Vec<usize> = order.to_vec();
    check.sort_unstable();
    if check != view.ids {
        return Err(OrderError::NotBijective);
    }
    let order_idx: Vec<usize> = order
        .iter()
        .map(|&id| view.index_of(id).expect("order id is selected"))
        .collect();
    let terms = terms_for(&view, &order_idx, direction);
    Ok(ObjectiveValue {
        value: terms.iter().sum(),
        terms,
    })
}

/// Uniform-rate closed form: schedule the largest delay first
/// (backward); the forward mirror schedules the smallest delay first.
/// Ties break toward the ascending node id.
pub fn order_descending_delay(
    instance: &Instance,
    selected: &[usize],
    direction: Direction,
) -> Result<Vec<usize>, OrderError> {
    let view = SubsetView::new(instance, selected, direction)?;
    let mut ids = view.ids.clone();
    match direction {
        Direction::Backward => {
            ids.sort_by(|&a, &b| {
                let (da, db) = (direction.delay_of(instance.node(a)), direction.delay_of(instance.node(b)));
                db.total_cmp(&da).then(a.cmp(&b))
            });
        }
        Direction::Forward => {
            ids.sort_by(|&a, &b| {
                let (da, db) = (direction.delay_of(instance.node(a)), direction.delay_of(instance.node(b)));
                da.total_cmp(&db).then(a.cmp(&b))
            });
        }
    }
    Ok(ids)
}

/// Uniform-delay closed form: schedule the slowest node first so the
/// fastest computes longest (backward); the forward mirror schedules
/// the fastest first. Ties break toward the ascending node id.
pub fn order_by_rate(
    instance: &Instance,
    selected: &[usize],
    direction: Direction,
) -> Result<Vec<usize>, OrderError> {
    let view = SubsetView::new(instance, selected, direction)?;
    let mut ids = view.ids.clone();
    match direction {
        Direction::Backward => {
            ids.sort_by(|&a, &b| {
                instance.node(a).rate.total_cmp(&instance.node(b).rate).then(a.cmp(&b))
            });
        }
        Direction::Forward => {
            ids.sort_by(|&a, &b| {
                instance.node(b).rate.total_cmp(&instance.node(a).rate).then(a.cmp(&b))
            });
        }
    }
    Ok(ids)
}

/// How the positions outside the optimized tuple are filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SuffixFill {
    /// Unused ids in ascending order (deterministic default).
    #[default]
    AscendingId,
    /// Unused ids by the direction's uniform-rate closed form.
    DescendingDelay,
}

/// Result of the greedy prefix search: the full order, the value of
/// the k guarantee-bearing terms, and the full objective value.
#[derive(Debug, Clone, Serialize)]
pub struct GreedyOrder {
    pub order: Vec<usize>,
    /// Sum of the k optimized terms; at least (k/N) of the optimum.
    pub prefix_value: f64,
    /// Full objective of the returned order (>= `prefix_value`).
    pub value: f64,
}

/// Result of the exhaustive search.
#[derive(Debug, Clone, Serialize)]
pub struct ExhaustiveOrder {
    pub order: Vec<usize>,
    pub value: f64,
}

// Enumerates ordered tuples of `k` distinct indices with an
// incrementally maintained objective. Both directions reduce to the
// same recursion: choosing index x while `rem` is the unchosen rate
// sum contributes `delay[x] * (rem - rate[x])`. Backward tuples are
// read in choice order from the front of the permutation; forward
// tuples are chosen back-to-front and occupy the rear.
struct TupleSearch<'v> {
    view: &'v SubsetView,
    direction: Direction,
    fill: SuffixFill,
    k: usize,
    used: Vec<bool>,
    chosen: Vec<usize>,
    best_value: f64,
    best_perm: Vec<usize>,
}

impl<'v> TupleSearch<'v> {
    fn run(view: &'v SubsetView, direction: Direction, fill: SuffixFill, k: usize) -> (f64, Vec<usize>) {
        let mut search = TupleSearch {
            view,
            direction,
            fill,
            k,
            used: vec![false; view.len()],
            chosen: Vec::with_capacity(k),
            best_value: f64::NEG_INFINITY,
            best_perm: Vec::new(),
        };
        search.descend(view.total_rate, 0.0);
        (search.best_value, search.best_perm)
    }

    fn descend(&mut self, rem_rate: f64, acc: f64) {
        if self.chosen.len() == self.k {
            self.offer(acc);
            return;
        }
        for idx in 0..self.view.len() {
            if self.used[idx] {
                continue;
            }
            let term = self.view.delays[idx] * (rem_rate - self.view.rates[idx]);
            self.used[idx] = true;
            self.chosen.push(idx);
            self.descend(rem_rate - self.view.rates[idx], acc + term);
            self.chosen.pop();
            self.used[idx] = false;
        }
    }

    fn offer(&mut self, value: f64) {
        if value > self.best_value {
            self.best_value = value;
            self.best_perm = self.assemble();
        } else if value == self.best_value {
            let candidate = self.assemble();
            if self.best_perm.is_empty() || candidate < self.best_perm {
                self.best_perm = candidate;
            }
        }
    }

    // Full permutation (index space) for the current tuple, applying
    // the fill rule to the unused positions. Ties between equal-value
    // tuples resolve to the lexicographically smallest permutation.
    fn assemble(&self) -> Vec<usize> {
        let mut unused: Vec<usize> = (0..self.view.len()).filter(|&i| !self.used[i]).collect();
        if self.fill == SuffixFill::DescendingDelay {
            match self.direction {
                Direction::Backward => unused.sort_by(|&a, &b| {
                    self.view.delays[b].total_cmp(&self.view.delays[a]).then(a.cmp(&b))
                }),
                Direction::Forward => unused.sort_by(|&a, &b| {
                    self.view.delays[a].total_cmp(&self.view.delays[b]).then(a.cmp(&b))
                }),
            }
        }
        match self.direction {
            Direction::Backward => {
                let mut perm = self.chosen.clone();
                perm.extend(unused);
                perm
            }
            Direction::Forward => {
                // Chosen back-to-front: reverse into reading order and
                // append after the fill.
                let mut perm = unused;
                perm.extend(self.chosen.iter().rev());
                perm
            }
        }
    }
}

fn tuple_work(n: usize, k: usize) -> f64 {
    (0..k).map(|j| (n - j) as f64).product()
}

/// Greedy prefix search over all ordered k-tuples of distinct selected
/// nodes. The returned `prefix_value` carries the k/N approximation
/// guarantee against the exhaustive optimum; for the forward direction
/// the optimized tuple occupies the last k positions (the time-reversal
/// mirror of the backward search).
pub fn order_greedy_prefix(
    instance: &Instance,
    selected: &[usize],
    direction: Direction,
    k: usize,
    fill: SuffixFill,
    guard: &EnumGuard,
) -> Result<GreedyOrder, OrderError> {
    let view = SubsetView::new(instance, selected, direction)?;
    let n = view.len();
    if k == 0 || k > n {
        return Err(OrderError::PrefixOutOfRange { k, n });
    }
    if tuple_work(n, k) > guard.tuple_work_limit() {
        return Err(OrderError::GuardExceeded {
            nodes: n,
            limit: guard.max_permutation_nodes,
        });
    }
    let (prefix_value, perm) = TupleSearch::run(&view, direction, fill, k);
    let value = terms_for(&view, &perm, direction).iter().sum();
    Ok(GreedyOrder {
        order: view.to_ids(&perm),
        prefix_value,
        value,
    })
}

/// Exhaustive search over all permutations of the selected set.
/// Refuses sets larger than the guard's permutation limit.
pub fn order_exhaustive(
    instance: &Instance,
    selected: &[usize],
    direction: Direction,
    guard: &EnumGuard,
) -> Result<ExhaustiveOrder, OrderError> {
    let view = SubsetView::new(instance, selected, direction)?;
    let n = view.len();
    if n > guard.max_permutation_nodes {
        return Err(OrderError::GuardExceeded {
            nodes: n,
            limit: guard.max_permutation_nodes,
        });
    }
    let (value, perm) = TupleSearch::run(&view, direction, SuffixFill::AscendingId, n);
    Ok(ExhaustiveOrder {
        order: view.to_ids(&perm),
        value,
    })
}

/// The two heuristic-defeating constructions: LDF schedules a huge-rate
/// node's long communication first, FCL leaves a huge delay for last.
/// As `scale` grows the heuristic's objective stays bounded while the
/// optimum grows without bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CounterexampleKind {
    /// Largest delay first: backward delays (n, n-1, ..., 1), rates
    /// (scale, 1, ..., 1).
    Ldf,
    /// Fastest computing node last: rates (1, 2, ..., n), backward
    /// delays (1, ..., 1, scale).
    Fcl,
}

/// Build a counterexample instance. Forward delays are 1.0 and the
/// workload is large enough that order quality shows up in the delay.
pub fn counterexample(
    kind: CounterexampleKind,
    n: usize,
    scale: f64,
) -> Result<Instance, OrderError> {
    if n < 2 {
        return Err(OrderError::CounterexampleTooSmall(n));
    }
    if !scale.is_finite() || scale < 1.0 {
        return Err(OrderError::InvalidScale(scale));
    }
    let parts: Vec<(f64, f64, f64)> = (0..n)
        .map(|i| match kind {
            CounterexampleKind::Ldf => {
                let rate = if i == 0 { scale } else { 1.0 };
                (rate, 1.0, (n - i) as f64)
            }
            CounterexampleKind::Fcl => {
                let bwd = if i == n - 1 { scale } else { 1.0 };
                ((i + 1) as f64, 1.0, bwd)
            }
        })
        .collect();
    let workload = 2.0 * (n * n) as f64 * scale;
    Instance::from_parts(workload, parts).map_err(OrderError::from)
}

/// The order each counterexample's losing heuristic produces.
pub fn heuristic_order(
    kind: CounterexampleKind,
    instance: &Instance,
    selected: &[usize],
    direction: Direction,
) -> Result<Vec<usize>, OrderError> {
    match kind {
        CounterexampleKind::Ldf => order_descending_delay(instance, selected, direction),
        CounterexampleKind::Fcl => order_by_rate(instance, selected, direction),
    }
}

/// Outcome of checking the greedy's k/N guarantee against the
/// exhaustive optimum.
#[derive(Debug, Clone, Serialize)]
pub struct RatioCheck {
    pub prefix_value: f64,
    pub optimum: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Verify `prefix_value >= (k/N) * v*` (with 1e-9 relative slack on
/// the optimum).
pub fn verify_ratio(
    instance: &Instance,
    selected: &[usize],
    direction: Direction,
    k: usize,
    guard: &EnumGuard,
) -> Result<RatioCheck, OrderError> {
    let greedy = order_greedy_prefix(instance, selected, direction, k, SuffixFill::AscendingId, guard)?;
    let best = order_exhaustive(instance, selected, direction, guard)?;
    let bound = (k as f64 / selected.len() as f64) * best.value;
    Ok(RatioCheck {
        prefix_value: greedy.prefix_value,
        optimum: best.value,
        bound,
        holds: greedy.prefix_value >= bound - REL_TOL * best.value,
    })
}

/// How an order is chosen for a node subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderPolicy {
    /// Exhaustive optimum (guarded).
    Exhaustive,
    /// Greedy prefix with the given length; clamped to the subset size.
    GreedyPrefix { k: usize, fill: SuffixFill },
    /// Uniform-rate closed form (descending delay, forward mirror).
    DescendingDelay,
    /// Uniform-delay closed form (ascending rate, forward mirror).
    ByRate,
    /// Ascending node ids; the arbitrary-order baseline.
    Identity,
}

/// The order `policy` produces for one direction.
pub fn order_for(
    instance: &Instance,
    selected: &[usize],
    direction: Direction,
    policy: OrderPolicy,
    guard: &EnumGuard,
) -> Result<Vec<usize>, OrderError> {
    match policy {
        OrderPolicy::Exhaustive => {
            Ok(order_exhaustive(instance, selected, direction, guard)?.order)
        }
        OrderPolicy::GreedyPrefix { k, fill } => {
            let k = k.clamp(1, selected.len());
            Ok(order_greedy_prefix(instance, selected, direction, k, fill, guard)?.order)
        }
        OrderPolicy::DescendingDelay => order_descending_delay(instance, selected, direction),
        OrderPolicy::ByRate => order_by_rate(instance, selected, direction),
        OrderPolicy::Identity => {
            let mut ids = selected.to_vec();
            ids.sort_unstable();
            Ok(ids)
        }
    }
}

/// A plan for `selected` with both directions ordered by `policy`.
pub fn optimized_plan(
    instance: &Instance,
    selected: &[usize],
    policy: OrderPolicy,
    guard: &EnumGuard,
) -> Result<CommPlan, OrderError> {
    let fwd = order_for(instance, selected, Direction::Forward, policy, guard)?;
    let bwd = order_for(instance, selected, Direction::Backward, policy, guard)?;
    CommPlan::new(selected.to_vec(), fwd, bwd).map_err(OrderError::from)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::generate_instance;
    use crate::model::Profile;
    use crate::tol::approx_eq;

    fn guard() -> EnumGuard {
        EnumGuard::default()
    }

    fn delays_instance(delays: &[f64], rates: &[f64]) -> Instance {
        // Backward delays carry the objective; forward delays 1.0.
        Instance::from_parts(
            1.0,
            delays.iter().zip(rates).map(|(&d, &r)| (r, 1.0, d)),
        )
        .unwrap()
    }

    #[test]
    fn objective_matches_hand_sums() {
        let inst = delays_instance(&[3.0, 2.0, 1.0], &[1.0, 1.0, 1.0]);
        let sel = [0, 1, 2];
        let desc = objective_v(&inst, &sel, &[0, 1, 2], Direction::Backward).unwrap();
        assert_eq!(desc.value, 8.0);
        assert_eq!(desc.terms, vec![6.0, 2.0, 0.0]);
        let asc = objective_v(&inst, &sel, &[2, 1, 0], Direction::Backward).unwrap();
        assert_eq!(asc.value, 4.0);
    }

    #[test]
    fn objective_single_node_is_zero() {
        let inst = delays_instance(&[3.0], &[2.0]);
        for direction in Direction::BOTH {
            let v = objective_v(&inst, &[0], &[0], direction).unwrap();
            assert_eq!(v.value, 0.0);
        }
    }

    #[test]
    fn objective_rejects_non_bijective_order() {
        let inst = delays_instance(&[1.0, 2.0], &[1.0, 1.0]);
        assert!(matches!(
            objective_v(&inst, &[0, 1], &[0, 0], Direction::Backward).unwrap_err(),
            OrderError::NotBijective
        ));
    }

    #[test]
    fn forward_objective_weights_by_earlier_rates() {
        // Unit instance, identity order: terms s_p * (p earlier rates).
        let inst = Instance::uniform_unit(3, 10.0).unwrap();
        let v = objective_v(&inst, &[0, 1, 2], &[0, 1, 2], Direction::Forward).unwrap();
        assert_eq!(v.terms, vec![0.0, 1.0, 2.0]);
        assert_eq!(v.value, 3.0);
    }

    #[test]
    fn descending_delay_sorts_backward() {
        let inst = delays_instance(&[1.0, 3.0, 2.0], &[1.0, 1.0, 1.0]);
        let order = order_descending_delay(&inst, &[0, 1, 2], Direction::Backward).unwrap();
        assert_eq!(order, vec![1, 2, 0]);
    }

    #[test]
    fn descending_delay_forward_mirror_sorts_ascending() {
        let inst =
            Instance::from_parts(1.0, [(1.0, 3.0, 1.0), (1.0, 1.0, 1.0), (1.0, 2.0, 1.0)]).unwrap();
        let order = order_descending_delay(&inst, &[0, 1, 2], Direction::Forward).unwrap();
        assert_eq!(order, vec![1, 2, 0]);
    }

    #[test]
    fn uniform_delays_tie_break_to_identity() {
        let inst = Instance::uniform_unit(4, 1.0).unwrap();
        for direction in Direction::BOTH {
            assert_eq!(
                order_descending_delay(&inst, &[0, 1, 2, 3], direction).unwrap(),
                vec![0, 1, 2, 3]
            );
            assert_eq!(
                order_by_rate(&inst, &[0, 1, 2, 3], direction).unwrap(),
                vec![0, 1, 2, 3]
            );
        }
    }

    #[test]
    fn by_rate_sorts_backward_ascending_and_forward_descending() {
        let inst = delays_instance(&[1.0, 1.0, 1.0], &[2.0, 1.0, 3.0]);
        assert_eq!(
            order_by_rate(&inst, &[0, 1, 2], Direction::Backward).unwrap(),
            vec![1, 0, 2]
        );
        assert_eq!(
            order_by_rate(&inst, &[0, 1, 2], Direction::Forward).unwrap(),
            vec![2, 0, 1]
        );
    }

    #[test]
    fn exhaustive_finds_the_appendix_optimum() {
        let inst = delays_instance(&[3.0, 2.0, 1.0], &[100.0, 1.0, 1.0]);
        let best = order_exhaustive(&inst, &[0, 1, 2], Direction::Backward, &guard()).unwrap();
        assert_eq!(best.order, vec![1, 2, 0]);
        assert_eq!(best.value, 302.0);
    }

    #[test]
    fn exhaustive_single_node() {
        let inst = delays_instance(&[3.0], &[2.0]);
        let best = order_exhaustive(&inst, &[0], Direction::Backward, &guard()).unwrap();
        assert_eq!(best.order, vec![0]);
        assert_eq!(best.value, 0.0);
    }

    #[test]
    fn exhaustive_respects_guard() {
        let inst = Instance::uniform_unit(10, 1.0).unwrap();
        let sel: Vec<usize> = (0..10).collect();
        assert!(matches!(
            order_exhaustive(&inst, &sel, Direction::Backward, &guard()).unwrap_err(),
            OrderError::GuardExceeded { nodes: 10, limit: 9 }
        ));
        let open = EnumGuard::unlimited();
        assert!(order_exhaustive(&inst, &sel, Direction::Backward, &open).is_ok());
    }

    #[test]
    fn exhaustive_agrees_with_closed_form_on_uniform_rates() {
        for seed in 0..20 {
            let inst = generate_instance(5, seed, Profile::Dmuc).unwrap();
            let sel: Vec<usize> = (0..5).collect();
            for direction in Direction::BOTH {
                let closed = order_descending_delay(&inst, &sel, direction).unwrap();
                let v = objective_v(&inst, &sel, &closed, direction).unwrap().value;
                let best = order_exhaustive(&inst, &sel, direction, &guard()).unwrap();
                assert!(approx_eq(v, best.value), "seed {seed}: {v} vs {}", best.value);
            }
        }
    }

    #[test]
    fn exhaustive_agrees_with_closed_form_on_uniform_delays() {
        for seed in 0..20 {
            let inst = generate_instance(5, seed, Profile::Umdc).unwrap();
            let sel: Vec<usize> = (0..5).collect();
            for direction in Direction::BOTH {
                let closed = order_by_rate(&inst, &sel, direction).unwrap();
                let v = objective_v(&inst, &sel, &closed, direction).unwrap().value;
                let best = order_exhaustive(&inst, &sel, direction, &guard()).unwrap();
                assert!(approx_eq(v, best.value), "seed {seed}: {v} vs {}", best.value);
            }
        }
    }

    #[test]
    fn greedy_k1_picks_the_high_rate_release() {
        let inst = delays_instance(&[3.0, 2.0, 1.0], &[100.0, 1.0, 1.0]);
        let g = order_greedy_prefix(
            &inst,
            &[0, 1, 2],
            Direction::Backward,
            1,
            SuffixFill::AscendingId,
            &guard(),
        )
        .unwrap();
        assert_eq!(g.order, vec![1, 0, 2]);
        assert_eq!(g.prefix_value, 202.0);
        assert_eq!(g.value, 205.0);
    }

    #[test]
    fn greedy_full_length_equals_exhaustive() {
        let inst = delays_instance(&[3.0, 2.0, 1.0], &[100.0, 1.0, 1.0]);
        for direction in Direction::BOTH {
            let g = order_greedy_prefix(
                &inst,
                &[0, 1, 2],
                direction,
                3,
                SuffixFill::AscendingId,
                &guard(),
            )
            .unwrap();
            let best = order_exhaustive(&inst, &[0, 1, 2], direction, &guard()).unwrap();
            assert_eq!(g.order, best.order);
            assert_eq!(g.value, best.value);
            assert_eq!(g.prefix_value, g.value);
        }
    }

    #[test]
    fn greedy_uniform_instance_ties_to_identity() {
        let inst = Instance::uniform_unit(5, 1.0).unwrap();
        let sel: Vec<usize> = (0..5).collect();
        for direction in Direction::BOTH {
            for k in 1..=5 {
                let g = order_greedy_prefix(&inst, &sel, direction, k, SuffixFill::AscendingId, &guard())
                    .unwrap();
                assert_eq!(g.order, sel, "direction {direction:?}, k {k}");
            }
        }
    }

    #[test]
    fn greedy_rejects_out_of_range_prefix() {
        let inst = Instance::uniform_unit(3, 1.0).unwrap();
        for k in [0, 4] {
            assert!(matches!(
                order_greedy_prefix(
                    &inst,
                    &[0, 1, 2],
                    Direction::Backward,
                    k,
                    SuffixFill::AscendingId,
                    &guard()
                )
                .unwrap_err(),
                OrderError::PrefixOutOfRange { .. }
            ));
        }
    }

    #[test]
    fn heuristic_suffix_fill_orders_remainder_by_delay() {
        let inst = delays_instance(&[1.0, 3.0, 2.0, 4.0], &[100.0, 1.0, 1.0, 1.0]);
        let g = order_greedy_prefix(
            &inst,
            &[0, 1, 2, 3],
            Direction::Backward,
            1,
            SuffixFill::DescendingDelay,
            &guard(),
        )
        .unwrap();
        // Suffix is the unused ids in descending backward delay.
        let suffix = &g.order[1..];
        let delays: Vec<f64> = suffix.iter().map(|&id| inst.node(id).bwd_delay).collect();
        assert!(delays.windows(2).all(|w| w[0] >= w[1]), "{delays:?}");
    }

    #[test]
    fn ldf_counterexample_matches_appendix_values() {
        let inst = counterexample(CounterexampleKind::Ldf, 3, 100.0).unwrap();
        let sel = [0, 1, 2];
        let ldf = heuristic_order(CounterexampleKind::Ldf, &inst, &sel, Direction::Backward).unwrap();
        let v = objective_v(&inst, &sel, &ldf, Direction::Backward).unwrap().value;
        assert_eq!(v, 8.0);
        let best = order_exhaustive(&inst, &sel, Direction::Backward, &guard()).unwrap();
        assert_eq!(best.value, 302.0);
        assert!(approx_eq(v / best.value, 8.0 / 302.0));
    }

    #[test]
    fn ldf_counterexample_at_scale_one_is_optimal() {
        let inst = counterexample(CounterexampleKind::Ldf, 3, 1.0).unwrap();
        let sel = [0, 1, 2];
        let ldf = heuristic_order(CounterexampleKind::Ldf, &inst, &sel, Direction::Backward).unwrap();
        let v = objective_v(&inst, &sel, &ldf, Direction::Backward).unwrap().value;
        let best = order_exhaustive(&inst, &sel, Direction::Backward, &guard()).unwrap();
        assert_eq!(v, best.value);
    }

    #[test]
    fn fcl_counterexample_ratio_collapses() {
        let inst = counterexample(CounterexampleKind::Fcl, 3, 1e6).unwrap();
        let sel = [0, 1, 2];
        let fcl = heuristic_order(CounterexampleKind::Fcl, &inst, &sel, Direction::Backward).unwrap();
        let v = objective_v(&inst, &sel, &fcl, Direction::Backward).unwrap().value;
        let best = order_exhaustive(&inst, &sel, Direction::Backward, &guard()).unwrap();
        assert!(v / best.value < 1e-4, "{}", v / best.value);
    }

    #[test]
    fn counterexample_rejects_bad_arguments() {
        assert!(counterexample(CounterexampleKind::Ldf, 1, 10.0).is_err());
        assert!(counterexample(CounterexampleKind::Ldf, 3, 0.5).is_err());
        assert!(counterexample(CounterexampleKind::Fcl, 3, f64::NAN).is_err());
    }

    #[test]
    fn ratio_bound_holds_on_the_ldf_instance() {
        let inst = counterexample(CounterexampleKind::Ldf, 3, 100.0).unwrap();
        let check = verify_ratio(&inst, &[0, 1, 2], Direction::Backward, 1, &guard()).unwrap();
        assert_eq!(check.prefix_value, 202.0);
        assert_eq!(check.optimum, 302.0);
        assert!(check.holds);
    }

    #[test]
    fn ratio_is_exact_at_full_prefix() {
        let inst = generate_instance(5, 3, Profile::Dmdc).unwrap();
        for direction in Direction::BOTH {
            let check = verify_ratio(&inst, &[0, 1, 2, 3, 4], direction, 5, &guard()).unwrap();
            assert!(approx_eq(check.prefix_value, check.optimum));
            assert!(check.holds);
        }
    }

    #[test]
    fn identity_policy_builds_identity_plan() {
        let inst = Instance::uniform_unit(3, 1.0).unwrap();
        let plan = optimized_plan(&inst, &[2, 0, 1], OrderPolicy::Identity, &guard()).unwrap();
        assert_eq!(plan.fwd_order(), &[0, 1, 2]);
        assert_eq!(plan.bwd_order(), &[0, 1, 2]);
    }
}
