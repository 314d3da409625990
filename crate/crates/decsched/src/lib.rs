//! Delay-minimal scheduling for distributed edge computing over a
//! single shared wireless channel.
//!
//! A divisible workload is offloaded to worker nodes. Each node first
//! receives its input (forward communication), computes, and returns
//! its result (backward communication); at most one node can use the
//! channel at a time. The library answers three coupled questions and
//! ships the oracles that certify the answers at desk scale:
//!
//! 1. **Allocation** ([`allocation`]): how much workload each node
//!    gets. The three-phase allocator is optimal for any fixed
//!    communication order, with the closed-form minimum delay
//!    `S + B + max(0, (w - cap0)/R)`.
//! 2. **Ordering** ([`ordering`]): in what order communications use
//!    the channel. Closed forms for uniform rates/delays, a greedy
//!    prefix search with a k/N approximation guarantee, and an
//!    exhaustive oracle.
//! 3. **Selection** ([`selection`]): which nodes to use at all —
//!    linear ranking search, greedy accretion, and the exhaustive
//!    subset oracle.
//!
//! [`timeline`] materializes explicit schedules, validates the channel
//! and precedence constraints, and samples adversarial valid schedules
//! (preemption, idle, interleaving) to confirm no valid schedule beats
//! the canonical optimum. [`experiment`] wraps everything in a policy
//! harness that reproduces the simulation study as CSV.

pub mod allocation;
pub mod experiment;
pub mod guard;
pub mod model;
pub mod ordering;
pub mod selection;
pub mod timeline;
pub mod tol;

pub use guard::EnumGuard;
pub use model::{CommPlan, Instance, NodeSpec, Profile};
pub use ordering::Direction;
