//! The allocation graph: agent `i` points at agent `j` when `j` holds a good
//! that `i` likes. Paths in it drive every improvement step of the solvers.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::model::{utility_vector, Allocation, Instance};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AllocationGraph {
    adjacency: Vec<Vec<usize>>,
}

impl AllocationGraph {
    pub fn from_adjacency(adjacency: Vec<Vec<usize>>) -> Self {
        let mut adjacency = adjacency;
        for out in &mut adjacency {
            out.sort_unstable();
            out.dedup();
        }
        AllocationGraph { adjacency }
    }

    pub fn num_agents(&self) -> usize {
        self.adjacency.len()
    }

    /// Out-neighbours, ascending.
    pub fn neighbors(&self, agent: usize) -> &[usize] {
        &self.adjacency[agent]
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.adjacency[from].binary_search(&to).is_ok()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, out)| out.iter().map(move |&j| (i, j)))
            .collect()
    }
}

/// Builds `G(A)`. Self-loops are never added.
pub fn build_graph(instance: &Instance, alloc: &Allocation) -> Result<AllocationGraph> {
    alloc.check_shape(instance)?;
    let n = instance.num_agents();
    let mut adjacency = vec![Vec::new(); n];
    for (g, owner) in alloc.owners().iter().enumerate() {
        if let Some(j) = *owner {
            for i in instance.likers(g).filter(|&i| i != j) {
                adjacency[i].push(j);
            }
        }
    }
    Ok(AllocationGraph::from_adjacency(adjacency))
}

/// Breadth-first search from `from` for the nearest agent (other than `from`)
/// satisfying `is_target`. Neighbours are expanded in ascending index order,
/// so among equally short paths the one discovered first wins.
pub fn find_path<F>(graph: &AllocationGraph, from: usize, mut is_target: F) -> Option<Vec<usize>>
where
    F: FnMut(usize) -> bool,
{
    let n = graph.num_agents();
    let mut parent = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([from]);
    seen[from] = true;
    while let Some(u) = queue.pop_front() {
        if u != from && is_target(u) {
            let mut path = vec![u];
            let mut cur = u;
            while cur != from {
                cur = parent[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for &v in graph.neighbors(u) {
            if !seen[v] {
                seen[v] = true;
                parent[v] = u;
                queue.push_back(v);
            }
        }
    }
    None
}

/// Passes goods back along `path`: each agent on the path takes one liked
/// good from its successor. Goods are chosen from the input bundles, lowest
/// index first.
///
/// The input must be Pareto optimal (every valued good held by someone who
/// likes it); otherwise the utility bookkeeping would be wrong and a
/// [`Error::Logic`] is returned.
pub fn pass_back(instance: &Instance, alloc: &Allocation, path: &[usize]) -> Result<Allocation> {
    alloc.check_shape(instance)?;
    let n = instance.num_agents();
    if path.is_empty() {
        return Err(Error::logic("pass-back along an empty path"));
    }
    let mut on_path = vec![false; n];
    for &a in path {
        if a >= n || std::mem::replace(&mut on_path[a], true) {
            return Err(Error::logic(format!("{path:?} is not a simple path over {n} agents")));
        }
    }
    if let Some(g) = (0..instance.num_goods())
        .find(|&g| instance.is_valued(g) && !alloc.owner(g).is_some_and(|o| instance.likes(o, g)))
    {
        return Err(Error::logic(format!(
            "pass-back needs a Pareto optimal allocation, but valued good {g} is not held by a liker"
        )));
    }
    let mut next = alloc.clone();
    for pair in path.windows(2).rev() {
        let (taker, giver) = (pair[0], pair[1]);
        let g = alloc
            .held_by(giver)
            .find(|&g| instance.likes(taker, g))
            .ok_or_else(|| {
                Error::logic(format!("no edge ({taker}, {giver}) in the allocation graph"))
            })?;
        next.set_owner(g, Some(taker));
    }
    Ok(next)
}

/// Agents reachable in `G(A)` from `{agent}` together with every agent whose
/// utility is strictly below `agent`'s. Ascending.
pub fn reachable_set(instance: &Instance, alloc: &Allocation, agent: usize) -> Result<Vec<usize>> {
    let graph = build_graph(instance, alloc)?;
    if agent >= instance.num_agents() {
        return Err(Error::input(format!("agent {agent} out of range")));
    }
    let u = utility_vector(instance, alloc);
    let seeds = (0..instance.num_agents()).filter(|&j| j == agent || u[j] < u[agent]);
    Ok(closure(&graph, seeds))
}

pub(crate) fn closure(graph: &AllocationGraph, seeds: impl IntoIterator<Item = usize>) -> Vec<usize> {
    let mut seen = vec![false; graph.num_agents()];
    let mut stack: Vec<usize> = Vec::new();
    for s in seeds {
        if !seen[s] {
            seen[s] = true;
            stack.push(s);
        }
    }
    while let Some(u) = stack.pop() {
        for &v in graph.neighbors(u) {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    (0..seen.len()).filter(|&i| seen[i]).collect()
}
