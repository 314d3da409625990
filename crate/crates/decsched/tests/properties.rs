//! Property tests: the structural invariants that must hold on any
//! valid instance, checked over generated inputs.

use proptest::collection::vec;
use proptest::prelude::*;

use decsched::allocation::{
    allocate, delay_of_fixed_allocation, gap_profile, min_delay, min_delay_from,
};
use decsched::model::{parse_instance, render_instance, CommPlan, Instance};
use decsched::ordering::{
    objective_v, order_exhaustive, order_greedy_prefix, verify_ratio, Direction, SuffixFill,
};
use decsched::timeline::{build_canonical, sample_adversarial, validate, Features};
use decsched::tol::{approx_eq, approx_ge, tol_for};
use decsched::EnumGuard;

fn node_triple() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.01f64..100.0, 0.0f64..20.0, 0.0f64..20.0)
}

fn instances(max_nodes: usize) -> impl Strategy<Value = Instance> {
    (vec(node_triple(), 1..=max_nodes), 0.0f64..200.0)
        .prop_map(|(parts, w)| Instance::from_parts(w, parts).expect("strategy emits valid parts"))
}

fn shuffled(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<usize>>()).prop_shuffle()
}

fn plans(max_nodes: usize) -> impl Strategy<Value = (Instance, CommPlan)> {
    instances(max_nodes).prop_flat_map(|inst| {
        let n = inst.len();
        (Just(inst), shuffled(n), shuffled(n)).prop_map(|(inst, fwd, bwd)| {
            let plan = CommPlan::new((0..inst.len()).collect(), fwd, bwd).unwrap();
            (inst, plan)
        })
    })
}

// Random feasible split of the instance workload over n nodes.
fn loads_for(n: usize) -> impl Strategy<Value = Vec<f64>> {
    vec(0.0f64..1.0, n)
}

fn scale_loads(raw: &[f64], workload: f64) -> Vec<f64> {
    let total: f64 = raw.iter().sum();
    if total == 0.0 {
        let mut loads = vec![0.0; raw.len()];
        loads[0] = workload;
        return loads;
    }
    raw.iter().map(|&x| x * workload / total).collect()
}

proptest! {
    #[test]
    fn parse_render_roundtrip(inst in instances(8)) {
        let text = render_instance(&inst);
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(back, inst);
    }

    #[test]
    fn min_delay_dominates_comm_total_and_matches_cap0((inst, plan) in plans(6)) {
        let g = gap_profile(&inst, &plan).unwrap();
        let d = min_delay(&inst, &plan).unwrap();
        prop_assert!(approx_ge(d, g.comm_delay()));
        let at_floor = approx_eq(d, g.comm_delay());
        let fits = inst.workload() <= g.cap0() + tol_for(g.cap0());
        prop_assert_eq!(at_floor, fits, "delay {} comm {} w {} cap0 {}", d, g.comm_delay(), inst.workload(), g.cap0());
    }

    #[test]
    fn allocation_is_consistent_and_feasible((inst, plan) in plans(6)) {
        let alloc = allocate(&inst, &plan).unwrap();
        for phase in [alloc.phase1(), alloc.phase2(), alloc.phase3()] {
            prop_assert!(phase.iter().all(|&x| x >= 0.0));
        }
        prop_assert!(approx_eq(alloc.total_workload(), inst.workload()));
        let d = delay_of_fixed_allocation(&inst, &plan, alloc.totals()).unwrap();
        let optimum = min_delay(&inst, &plan).unwrap();
        prop_assert!(approx_eq(d, optimum), "{} vs {}", d, optimum);
        // The last forward / first backward node gets no gap fill.
        let last_fwd = *plan.fwd_order().last().unwrap();
        let first_bwd = plan.bwd_order()[0];
        prop_assert_eq!(alloc.phase1()[plan.index_of(last_fwd).unwrap()], 0.0);
        prop_assert_eq!(alloc.phase2()[plan.index_of(first_bwd).unwrap()], 0.0);
    }

    #[test]
    fn sampled_allocations_never_beat_the_optimum(
        (inst, plan) in plans(5),
        raw in loads_for(5),
    ) {
        let loads = scale_loads(&raw[..plan.len()], inst.workload());
        let d = delay_of_fixed_allocation(&inst, &plan, &loads).unwrap();
        let optimum = min_delay(&inst, &plan).unwrap();
        prop_assert!(approx_ge(d, optimum), "{} < {}", d, optimum);
    }

    #[test]
    fn min_delay_is_monotone_in_workload((inst, plan) in plans(6), w2 in 0.0f64..400.0) {
        let d1 = min_delay(&inst, &plan).unwrap();
        let bigger = inst.workload().max(w2);
        let d2 = min_delay(&inst.with_workload(bigger).unwrap(), &plan).unwrap();
        prop_assert!(approx_ge(d2, d1));
    }

    #[test]
    fn objective_decomposition_matches_min_delay((inst, plan) in plans(5)) {
        // cap0 splits into the two directions' objectives.
        let g = gap_profile(&inst, &plan).unwrap();
        let sel = plan.selected();
        let v_fwd = objective_v(&inst, sel, plan.fwd_order(), Direction::Forward).unwrap().value;
        let v_bwd = objective_v(&inst, sel, plan.bwd_order(), Direction::Backward).unwrap().value;
        prop_assert!(approx_eq(g.cap0(), v_fwd + v_bwd));
        // Optimizing each direction independently minimizes the delay.
        let guard = EnumGuard::default();
        let fwd = order_exhaustive(&inst, sel, Direction::Forward, &guard).unwrap();
        let bwd = order_exhaustive(&inst, sel, Direction::Backward, &guard).unwrap();
        let best_plan = CommPlan::new(sel.to_vec(), fwd.order, bwd.order).unwrap();
        let direct = min_delay(&inst, &best_plan).unwrap();
        let composed = g.comm_delay()
            + ((inst.workload() - fwd.value - bwd.value) / g.total_rate()).max(0.0);
        prop_assert!(approx_eq(direct, composed), "{} vs {}", direct, composed);
    }

    #[test]
    fn greedy_prefix_is_bounded_and_monotone(inst in instances(5), k in 1usize..=5) {
        let sel: Vec<usize> = (0..inst.len()).collect();
        let k = k.min(sel.len());
        let guard = EnumGuard::default();
        for direction in Direction::BOTH {
            let check = verify_ratio(&inst, &sel, direction, k, &guard).unwrap();
            prop_assert!(check.holds, "k={} {:?}: {} < {}", k, direction, check.prefix_value, check.bound);
            if k < sel.len() {
                let a = order_greedy_prefix(&inst, &sel, direction, k, SuffixFill::AscendingId, &guard).unwrap();
                let b = order_greedy_prefix(&inst, &sel, direction, k + 1, SuffixFill::AscendingId, &guard).unwrap();
                prop_assert!(approx_ge(b.prefix_value, a.prefix_value));
                prop_assert!(approx_ge(a.value, a.prefix_value));
            }
        }
    }

    #[test]
    fn canonical_timeline_is_valid_and_exact((inst, plan) in plans(6)) {
        let alloc = allocate(&inst, &plan).unwrap();
        let timeline = build_canonical(&inst, &plan, alloc.totals()).unwrap();
        prop_assert!(validate(&timeline, &inst, &plan, alloc.totals()).is_empty());
        let evaluated = delay_of_fixed_allocation(&inst, &plan, alloc.totals()).unwrap();
        prop_assert_eq!(timeline.horizon, evaluated);
    }

    #[test]
    fn adversarial_timelines_are_valid_and_dominated(
        (inst, plan) in plans(4),
        raw in loads_for(4),
        seed in 0u64..1_000_000,
        preempt in any::<bool>(),
        idle in any::<bool>(),
        interleave in any::<bool>(),
    ) {
        let loads = scale_loads(&raw[..plan.len()], inst.workload());
        let features = Features { preempt, idle, interleave };
        let Ok(timeline) = sample_adversarial(&inst, &plan, &loads, seed, features) else {
            // Feature set infeasible for this instance; nothing to check.
            return Ok(());
        };
        prop_assert!(validate(&timeline, &inst, &plan, &loads).is_empty());
        // No valid schedule beats the optimum over both orders.
        let guard = EnumGuard::default();
        let sel = plan.selected();
        let fwd = order_exhaustive(&inst, sel, Direction::Forward, &guard).unwrap();
        let bwd = order_exhaustive(&inst, sel, Direction::Backward, &guard).unwrap();
        let best = CommPlan::new(sel.to_vec(), fwd.order, bwd.order).unwrap();
        let optimum = min_delay(&inst, &best).unwrap();
        prop_assert!(approx_ge(timeline.horizon, optimum), "{} < {}", timeline.horizon, optimum);
    }

    #[test]
    fn returned_orders_are_permutations(inst in instances(6)) {
        let sel: Vec<usize> = (0..inst.len()).collect();
        let guard = EnumGuard::default();
        for direction in Direction::BOTH {
            let best = order_exhaustive(&inst, &sel, direction, &guard).unwrap();
            let mut sorted = best.order.clone();
            sorted.sort_unstable();
            prop_assert_eq!(&sorted, &sel);
            let again = order_exhaustive(&inst, &sel, direction, &guard).unwrap();
            prop_assert_eq!(best.order, again.order);
        }
    }

    #[test]
    fn closed_form_delay_matches_min_delay_from((inst, plan) in plans(6)) {
        let g = gap_profile(&inst, &plan).unwrap();
        prop_assert_eq!(min_delay_from(&g, inst.workload()), min_delay(&inst, &plan).unwrap());
    }
}
