//! Node selection: which nodes should execute the workload at all.
//! Every extra node adds its communications to the channel, so beyond
//! some point more nodes cost more than their computing contributes.
//!
//! Three searches are provided: the linear prefix search over ranked
//! nodes (exact for uniform rates or uniform delays), greedy accretion
//! for the general case, and the exhaustive subset oracle.

use serde::Serialize;
use thiserror::Error;

use crate::allocation::{min_delay, AllocError};
use crate::guard::EnumGuard;
use crate::model::{CommPlan, Instance, ModelError};
use crate::ordering::{optimized_plan, OrderError, OrderPolicy};
use crate::tol::tol_for;

#[derive(Debug, Error)]
pub enum SelectError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error(transparent)]
    Alloc(#[from] AllocError),
    #[error("subset enumeration over {nodes} nodes exceeds the guard limit {limit}")]
    GuardExceeded { nodes: usize, limit: usize },
}

/// Ranking key for the linear prefix search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankBy {
    /// Ascending total communication delay s_i + d_i (for uniform
    /// rates).
    CommDelay,
    /// Descending computation rate (for uniform delays).
    Rate,
}

/// Which search produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SelectionMethod {
    LinearUniform,
    Greedy,
    Exhaustive,
}

/// One explored point: the prefix size / candidate considered and the
/// delay it evaluated to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceEntry {
    pub key: TraceKey,
    pub delay: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKey {
    /// Prefix size (linear search) or subset cardinality (exhaustive).
    SubsetSize(usize),
    /// Candidate node id evaluated by the greedy search.
    Candidate(usize),
}

/// A selection outcome: the chosen plan, its minimum delay, and the
/// search trace for delay-vs-k curves.
#[derive(Debug, Clone, Serialize)]
pub struct SelectionResult {
    pub plan: CommPlan,
    pub delay: f64,
    pub method: SelectionMethod,
    pub trace: Vec<TraceEntry>,
}

/// Node ids ranked by the given key, ties broken by ascending id.
pub fn ranked_ids(instance: &Instance, rank_by: RankBy) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..instance.len()).collect();
    match rank_by {
        RankBy::CommDelay => ids.sort_by(|&a, &b| {
            let ka = instance.node(a).fwd_delay + instance.node(a).bwd_delay;
            let kb = instance.node(b).fwd_delay + instance.node(b).bwd_delay;
            ka.total_cmp(&kb).then(a.cmp(&b))
        }),
        RankBy::Rate => ids.sort_by(|&a, &b| {
            instance
                .node(b)
                .rate
                .total_cmp(&instance.node(a).rate)
                .then(a.cmp(&b))
        }),
    }
    ids
}

fn closed_form_policy(rank_by: RankBy) -> OrderPolicy {
    match rank_by {
        RankBy::CommDelay => OrderPolicy::DescendingDelay,
        RankBy::Rate => OrderPolicy::ByRate,
    }
}

/// Linear prefix search: rank the nodes, evaluate every prefix size
/// with the matching uniform-case optimal orders, return the best
/// (ties toward the smaller prefix). O(N) delay evaluations.
pub fn select_linear(instance: &Instance, rank_by: RankBy) -> Result<SelectionResult, SelectError> {
    let ranking = ranked_ids(instance, rank_by);
    let policy = closed_form_policy(rank_by);
    let guard = EnumGuard::unlimited(); // closed forms never enumerate
    let mut best: Option<(CommPlan, f64)> = None;
    let mut trace = Vec::with_capacity(instance.len());
    for k in 1..=instance.len() {
        let plan = optimized_plan(instance, &ranking[..k], policy, &guard)?;
        let delay = min_delay(instance, &plan)?;
        trace.push(TraceEntry {
            key: TraceKey::SubsetSize(k),
            delay,
        });
        if best.as_ref().is_none_or(|(_, d)| delay < *d) {
            best = Some((plan, delay));
        }
    }
    let (plan, delay) = best.expect("instance has at least one node");
    Ok(SelectionResult {
        plan,
        delay,
        method: SelectionMethod::LinearUniform,
        trace,
    })
}

/// Greedy accretion: start from the best single node, then repeatedly
/// add the candidate that reduces the delay the most (strict relative
/// improvement required; ties toward the smaller id).
pub fn select_greedy(
    instance: &Instance,
    order_policy: OrderPolicy,
    guard: &EnumGuard,
) -> Result<SelectionResult, SelectError> {
    let mut trace = Vec::new();
    let evaluate = |subset: &[usize]| -> Result<(CommPlan, f64), SelectError> {
        let plan = optimized_plan(instance, subset, order_policy, guard)?;
        let delay = min_delay(instance, &plan)?;
        Ok((plan, delay))
    };

    let mut current: Option<(Vec<usize>, CommPlan, f64)> = None;
    for id in 0..instance.len() {
        let (plan, delay) = evaluate(&[id])?;
        trace.push(TraceEntry {
            key: TraceKey::Candidate(id),
            delay,
        });
        if current.as_ref().is_none_or(|(_, _, d)| delay < *d) {
            current = Some((vec![id], plan, delay));
        }
    }
    let (mut selected, mut plan, mut delay) = current.expect("instance has at least one node");

    loop {
        let mut improvement: Option<(Vec<usize>, CommPlan, f64)> = None;
        for candidate in 0..instance.len() {
            if selected.binary_search(&candidate).is_ok() {
                continue;
            }
            let mut subset = selected.clone();
            subset.push(candidate);
            subset.sort_unstable();
            let (cand_plan, cand_delay) = evaluate(&subset)?;
            trace.push(TraceEntry {
                key: TraceKey::Candidate(candidate),
                delay: cand_delay,
            });
            if cand_delay < delay - tol_for(delay)
                && improvement.as_ref().is_none_or(|(_, _, d)| cand_delay < *d)
            {
                improvement = Some((subset, cand_plan, cand_delay));
            }
        }
        match improvement {
            Some((subset, new_plan, new_delay)) => {
                selected = subset;
                plan = new_plan;
                delay = new_delay;
            }
            None => break,
        }
    }

    Ok(SelectionResult {
        plan,
        delay,
        method: SelectionMethod::Greedy,
        trace,
    })
}

// Non-empty subsets of 0..n of cardinality k in lexicographic order.
fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize]) -> Result<(), SelectError>) -> Result<(), SelectError> {
    let mut subset: Vec<usize> = (0..k).collect();
    loop {
        f(&subset)?;
        // Advance to the next k-combination.
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(());
            }
            i -= 1;
            if subset[i] != i + n - k {
                break;
            }
        }
        if subset[i] == i + n - k {
            return Ok(());
        }
        subset[i] += 1;
        for j in i + 1..k {
            subset[j] = subset[j - 1] + 1;
        }
    }
}

/// Exhaustive subset oracle: evaluate every non-empty subset (ties
/// toward smaller cardinality, then lexicographic ids). The trace
/// records the best delay per cardinality.
pub fn select_exhaustive(
    instance: &Instance,
    order_policy: OrderPolicy,
    guard: &EnumGuard,
) -> Result<SelectionResult, SelectError> {
    let n = instance.len();
    if n > guard.max_subset_nodes {
        return Err(SelectError::GuardExceeded {
            nodes: n,
            limit: guard.max_subset_nodes,
        });
    }
    let mut best: Option<(CommPlan, f64)> = None;
    let mut trace = Vec::with_capacity(n);
    for k in 1..=n {
        let mut best_of_k: Option<f64> = None;
        for_each_subset(n, k, |subset| {
            let plan = optimized_plan(instance, subset, order_policy, guard)?;
            let delay = min_delay(instance, &plan)?;
            if best_of_k.is_none_or(|d| delay < d) {
                best_of_k = Some(delay);
            }
            // Strict comparison plus size-then-lex enumeration order
            // realizes the tie-break rule.
            if best.as_ref().is_none_or(|(_, d)| delay < *d) {
                best = Some((plan, delay));
            }
            Ok(())
        })?;
        trace.push(TraceEntry {
            key: TraceKey::SubsetSize(k),
            delay: best_of_k.expect("cardinality has at least one subset"),
        });
    }
    let (plan, delay) = best.expect("instance has at least one node");
    Ok(SelectionResult {
        plan,
        delay,
        method: SelectionMethod::Exhaustive,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate_instance, Profile};
    use crate::ordering::{counterexample, CounterexampleKind};
    use crate::tol::{approx_eq, approx_ge};

    fn uniform_instance() -> Instance {
        Instance::uniform_unit(5, 4.0).unwrap()
    }

    #[test]
    fn linear_search_traces_the_uniform_curve() {
        let result = select_linear(&uniform_instance(), RankBy::CommDelay).unwrap();
        let delays: Vec<f64> = result.trace.iter().map(|t| t.delay).collect();
        assert_eq!(delays, vec![6.0, 5.0, 6.0, 8.0, 10.0]);
        assert_eq!(result.plan.selected(), &[0, 1]);
        assert_eq!(result.delay, 5.0);
    }

    #[test]
    fn linear_search_zero_work_takes_one_node() {
        let inst = Instance::from_parts(0.0, [(1.0, 2.0, 2.0), (1.0, 0.5, 0.5), (1.0, 1.0, 1.0)])
            .unwrap();
        let result = select_linear(&inst, RankBy::CommDelay).unwrap();
        assert_eq!(result.plan.selected(), &[1]);
        assert_eq!(result.delay, 1.0);
    }

    #[test]
    fn two_nodes_beat_three_on_the_uniform_instance() {
        // Selecting all nodes is strictly worse here.
        let inst = uniform_instance();
        let all_three = min_delay(
            &inst,
            &CommPlan::identity(vec![0, 1, 2]).unwrap(),
        )
        .unwrap();
        let result = select_linear(&inst, RankBy::CommDelay).unwrap();
        assert!(result.delay < all_three);
    }

    #[test]
    fn greedy_matches_linear_on_the_uniform_instance() {
        let result = select_greedy(&uniform_instance(), OrderPolicy::Exhaustive, &EnumGuard::default())
            .unwrap();
        assert_eq!(result.plan.selected().len(), 2);
        assert_eq!(result.delay, 5.0);
        assert_eq!(result.method, SelectionMethod::Greedy);
    }

    #[test]
    fn greedy_single_node_is_forced() {
        let inst = Instance::from_parts(6.0, [(2.0, 1.5, 0.5)]).unwrap();
        let result = select_greedy(&inst, OrderPolicy::Exhaustive, &EnumGuard::default()).unwrap();
        assert_eq!(result.plan.selected(), &[0]);
        assert!(approx_eq(result.delay, 1.5 + 3.0 + 0.5));
    }

    #[test]
    fn greedy_keeps_the_fast_node_on_the_ldf_instance() {
        let inst = counterexample(CounterexampleKind::Ldf, 3, 100.0).unwrap();
        let result = select_greedy(&inst, OrderPolicy::Exhaustive, &EnumGuard::default()).unwrap();
        assert!(result.plan.selected().contains(&0));
    }

    #[test]
    fn exhaustive_matches_linear_on_the_uniform_instance() {
        let result = select_exhaustive(
            &uniform_instance(),
            OrderPolicy::Exhaustive,
            &EnumGuard::default(),
        )
        .unwrap();
        assert_eq!(result.plan.selected(), &[0, 1]);
        assert_eq!(result.delay, 5.0);
        let delays: Vec<f64> = result.trace.iter().map(|t| t.delay).collect();
        assert_eq!(delays, vec![6.0, 5.0, 6.0, 8.0, 10.0]);
    }

    #[test]
    fn exhaustive_zero_work_takes_the_cheapest_singleton() {
        let inst = Instance::from_parts(0.0, [(1.0, 2.0, 2.0), (1.0, 0.5, 0.5), (5.0, 1.0, 1.0)])
            .unwrap();
        let result =
            select_exhaustive(&inst, OrderPolicy::Exhaustive, &EnumGuard::default()).unwrap();
        assert_eq!(result.plan.selected(), &[1]);
    }

    #[test]
    fn exhaustive_never_loses_to_greedy() {
        for seed in 0..15 {
            let inst = generate_instance(6, seed, Profile::Dmdc).unwrap();
            let guard = EnumGuard::default();
            let greedy = select_greedy(&inst, OrderPolicy::Exhaustive, &guard).unwrap();
            let exhaustive = select_exhaustive(&inst, OrderPolicy::Exhaustive, &guard).unwrap();
            assert!(
                approx_ge(greedy.delay, exhaustive.delay),
                "seed {seed}: greedy {} < exhaustive {}",
                greedy.delay,
                exhaustive.delay
            );
        }
    }

    #[test]
    fn exhaustive_respects_subset_guard() {
        let inst = Instance::uniform_unit(13, 1.0).unwrap();
        assert!(matches!(
            select_exhaustive(&inst, OrderPolicy::DescendingDelay, &EnumGuard::default())
                .unwrap_err(),
            SelectError::GuardExceeded { nodes: 13, limit: 12 }
        ));
    }

    #[test]
    fn uniform_trace_is_unimodal() {
        for w in [0.0, 1.0, 4.0, 9.0, 25.0] {
            let inst = Instance::uniform_unit(8, w).unwrap();
            let result = select_linear(&inst, RankBy::CommDelay).unwrap();
            let delays: Vec<f64> = result.trace.iter().map(|t| t.delay).collect();
            let mut increasing = false;
            for pair in delays.windows(2) {
                if pair[1] > pair[0] + tol_for(pair[0]) {
                    increasing = true;
                }
                if increasing {
                    assert!(
                        approx_ge(pair[1], pair[0]),
                        "w={w}: trace {delays:?} dips after rising"
                    );
                }
            }
        }
    }

    #[test]
    fn subset_enumeration_is_size_then_lex() {
        let mut seen = Vec::new();
        for k in 1..=3 {
            for_each_subset(3, k, |s| {
                seen.push(s.to_vec());
                Ok(())
            })
            .unwrap();
        }
        assert_eq!(
            seen,
            vec![
                vec![0],
                vec![1],
                vec![2],
                vec![0, 1],
                vec![0, 2],
                vec![1, 2],
                vec![0, 1, 2],
            ]
        );
    }
}
