//! Simple random walks for every mobile participant.
//!
//! On a regular graph a step moves to a uniformly chosen neighbour. On a
//! complete mobility graph a step lands on a uniformly chosen vertex among
//! all `v`, the current one included, so every step hits a set of `r`
//! vertices with probability exactly `r/v`.

use rand::Rng;
use thiserror::Error;

use crate::graph::Graph;

/// Guard against scenarios in which a target can never be reached.
pub const STEP_BUDGET: u64 = 1_000_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WalkError {
    #[error("no meeting within {0} steps")]
    BudgetExceeded(u64),
    #[error("target set is empty")]
    NoTargets,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkerState {
    pub position: usize,
    pub steps_taken: u64,
}

impl WalkerState {
    pub fn at(position: usize) -> Self {
        Self { position, steps_taken: 0 }
    }

    /// Starts on a uniformly chosen vertex.
    pub fn uniform<R: Rng + ?Sized>(graph: &Graph, rng: &mut R) -> Self {
        Self::at(rng.random_range(0..graph.vertex_count()))
    }
}

pub fn step<R: Rng + ?Sized>(walker: WalkerState, graph: &Graph, rng: &mut R) -> WalkerState {
    let position = if graph.is_complete() {
        rng.random_range(0..graph.vertex_count())
    } else {
        let nb = graph.neighbors(walker.position);
        nb[rng.random_range(0..nb.len())] as usize
    };
    WalkerState { position, steps_taken: walker.steps_taken + 1 }
}

/// Advances every walker by exactly one step, in slice order.
pub fn step_all<R: Rng + ?Sized>(walkers: &mut [WalkerState], graph: &Graph, rng: &mut R) {
    for w in walkers.iter_mut() {
        *w = step(*w, graph, rng);
    }
}

/// Walks until the walker arrives at a vertex accepted by `is_target`.
///
/// The starting vertex never counts; at least one step is always taken.
/// Returns the number of steps taken and the vertex reached, and leaves the
/// walker on that vertex. `on_step` sees every step before the target test.
pub fn walk_until<R, F, S>(
    walker: &mut WalkerState,
    graph: &Graph,
    rng: &mut R,
    mut is_target: F,
    mut on_step: S,
) -> Result<(u64, usize), WalkError>
where
    R: Rng + ?Sized,
    F: FnMut(usize) -> bool,
    S: FnMut(),
{
    let mut taken = 0u64;
    loop {
        if taken == STEP_BUDGET {
            return Err(WalkError::BudgetExceeded(STEP_BUDGET));
        }
        *walker = step(*walker, graph, rng);
        taken += 1;
        on_step();
        if is_target(walker.position) {
            return Ok((taken, walker.position));
        }
    }
}

/// Steps from `walker` until it arrives at one of `targets`.
pub fn steps_to_next_meeting<R: Rng + ?Sized>(
    walker: &mut WalkerState,
    graph: &Graph,
    targets: &[usize],
    rng: &mut R,
) -> Result<(u64, usize), WalkError> {
    if targets.is_empty() {
        return Err(WalkError::NoTargets);
    }
    let mut mask = vec![false; graph.vertex_count()];
    for &t in targets {
        mask[t] = true;
    }
    walk_until(walker, graph, rng, |v| mask[v], || {})
}
