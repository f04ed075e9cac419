//! Deterministic maximum Nash welfare with lexicographic tie-breaking.
//!
//! An initial MNW allocation comes from path local search (an allocation
//! that is Pareto optimal and has no path from `i` to `j` with
//! `u_j > u_i + 1` is MNW). The tie-breaking pass then walks agents in
//! priority order and, whenever agent `i` reaches some later agent `j` with
//! exactly one more good, passes one good back along that path.

use crate::error::{Error, Result};
use crate::graph::{build_graph, find_path, pass_back};
use crate::model::{check_permutation, utility_vector, Allocation, Instance};

/// Every valued good to its lowest-indexed liker; non-valued goods stay out.
fn greedy_po(instance: &Instance) -> Allocation {
    let owners = (0..instance.num_goods()).map(|g| instance.likers(g).next()).collect();
    Allocation::new(instance.num_agents(), owners).expect("likers are valid agents")
}

fn potential(u: &[u32]) -> u64 {
    u.iter().map(|&x| u64::from(x) * u64::from(x)).sum()
}

/// A minimally complete MNW allocation.
pub fn initial_mnw(instance: &Instance) -> Allocation {
    let mut alloc = greedy_po(instance);
    let n = instance.num_agents();
    loop {
        let u = utility_vector(instance, &alloc);
        let graph = build_graph(instance, &alloc).expect("shape matches");
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| (u[i], i));
        let improving = order
            .into_iter()
            .find_map(|i| find_path(&graph, i, |j| u[j] > u[i] + 1));
        let Some(path) = improving else {
            return alloc;
        };
        let next = pass_back(instance, &alloc, &path).expect("greedy start and pass-backs stay PO");
        let before = potential(&u);
        let after = potential(&utility_vector(instance, &next));
        assert!(
            after + 2 <= before,
            "local search potential must drop by at least 2 ({before} -> {after})"
        );
        alloc = next;
    }
}

/// One iteration of the tie-breaking loop, for inspection in tests.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TieStep {
    pub agent: usize,
    /// Utilities before the iteration.
    pub utilities_before: Vec<u32>,
    /// The path passed back along, if any.
    pub path: Option<Vec<usize>>,
}

/// The deterministic rule: a minimally complete MNW allocation whose utility
/// vector is lexicographically greatest in agent-index order.
pub fn mnw_tie(instance: &Instance) -> Allocation {
    mnw_tie_traced(instance).0
}

/// [`mnw_tie`] together with the per-agent iteration log.
pub fn mnw_tie_traced(instance: &Instance) -> (Allocation, Vec<TieStep>) {
    let mut alloc = initial_mnw(instance);
    let mut steps = Vec::with_capacity(instance.num_agents());
    for i in 0..instance.num_agents() {
        let u = utility_vector(instance, &alloc);
        let graph = build_graph(instance, &alloc).expect("shape matches");
        let path = find_path(&graph, i, |j| j > i && u[j] == u[i] + 1);
        if let Some(p) = &path {
            alloc = pass_back(instance, &alloc, p).expect("MNW allocations are PO");
        }
        steps.push(TieStep { agent: i, utilities_before: u.0, path });
    }
    (alloc, steps)
}

/// [`mnw_tie`] with ties broken by `priority` instead of agent index:
/// `priority[0]` is favoured first, then `priority[1]`, and so on.
pub fn mnw_tie_with_priority(instance: &Instance, priority: &[usize]) -> Result<Allocation> {
    check_permutation(priority, instance.num_agents())?;
    let relabeled = instance.permute_agents(priority)?;
    let solved = mnw_tie(&relabeled);
    let owners = solved.owners().iter().map(|o| o.map(|k| priority[k])).collect();
    Allocation::new(instance.num_agents(), owners).map_err(|e| Error::logic(e.to_string()))
}
