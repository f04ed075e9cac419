//! Decidable certificates for fairness and efficiency properties of
//! deterministic allocations. Every failing check carries a witness.

use serde::Serialize;

use crate::error::Result;
use crate::graph::{build_graph, closure, find_path};
use crate::model::{utility_vector, Allocation, Instance};

/// Counterexample attached to a failed check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// `envier` strictly prefers `envied`'s bundle.
    Envy { envier: usize, envied: usize },
    /// Envy survives the removal of any single good.
    EnvyBeyondOneGood { envier: usize, envied: usize },
    /// Envy survives removing `good`, which `envier` values.
    EnvyBeyondAnyGood { envier: usize, envied: usize, good: usize },
    ValuedGoodUnallocated { good: usize },
    HeldByNonLiker { good: usize, holder: usize },
    NonValuedGoodAllocated { good: usize, holder: usize },
    /// A path from `path[0]` to its last agent whose end holds at least two
    /// more liked goods than its start.
    ImprovingPath { path: Vec<usize> },
    /// The agents reachable from `agent` do not hold exactly the goods they like.
    ReachableSetNotSaturated { agent: usize, good: usize },
    /// `other` is reachable from `agent` but has too much utility.
    ReachableUtilityTooHigh { agent: usize, other: usize },
    /// Fraction of `good` held by `holder` while `liker` likes it and has
    /// strictly less utility.
    FractionalTransfer { good: usize, holder: usize, liker: usize },
    /// Positive share of `good` held by an agent who does not like it.
    FractionalNonLiker { good: usize, holder: usize },
    /// Column total of `good` is wrong for a minimally complete allocation.
    FractionalColumn { good: usize },
    /// `agent`'s utility is outside the floor/ceiling window.
    RoundingWindow { agent: usize },
    /// Agents whose fractional utilities share this floor do not sum up.
    RoundingGroupSum { floor: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", content = "witness", rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated(Witness),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Holds => None,
            Verdict::Violated(w) => Some(w),
        }
    }

    pub(crate) fn from_witness(w: Option<Witness>) -> Verdict {
        w.map_or(Verdict::Holds, Verdict::Violated)
    }
}

/// `v_i(A_j)` for every ordered pair, as a dense matrix.
fn cross_values(instance: &Instance, alloc: &Allocation) -> Vec<Vec<u32>> {
    let n = instance.num_agents();
    let mut vals = vec![vec![0u32; n]; n];
    for (g, owner) in alloc.owners().iter().enumerate() {
        if let Some(j) = *owner {
            for i in instance.likers(g) {
                vals[i][j] += 1;
            }
        }
    }
    vals
}

fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
}

pub fn is_envy_free(instance: &Instance, alloc: &Allocation) -> Result<Verdict> {
    alloc.check_shape(instance)?;
    let vals = cross_values(instance, alloc);
    Ok(Verdict::from_witness(
        pairs(instance.num_agents())
            .find(|&(i, j)| vals[i][i] < vals[i][j])
            .map(|(envier, envied)| Witness::Envy { envier, envied }),
    ))
}

/// Envy-freeness up to one good, checked literally: for every nonempty
/// `A_j` some single removal must clear `i`'s envy.
pub fn is_ef1(instance: &Instance, alloc: &Allocation) -> Result<Verdict> {
    alloc.check_shape(instance)?;
    let vals = cross_values(instance, alloc);
    let violation = pairs(instance.num_agents()).find(|&(i, j)| {
        let own = vals[i][i];
        let mut bundle = alloc.held_by(j).peekable();
        if bundle.peek().is_none() {
            return false;
        }
        !bundle.any(|g| own >= vals[i][j] - instance.value(i, g))
    });
    Ok(Verdict::from_witness(
        violation.map(|(envier, envied)| Witness::EnvyBeyondOneGood { envier, envied }),
    ))
}

/// Envy-freeness up to any positively valued good: removing any good of
/// `A_j` that `i` likes must clear the envy.
pub fn is_efx(instance: &Instance, alloc: &Allocation) -> Result<Verdict> {
    alloc.check_shape(instance)?;
    let vals = cross_values(instance, alloc);
    for (i, j) in pairs(instance.num_agents()) {
        let own = vals[i][i];
        if let Some(good) = alloc
            .held_by(j)
            .filter(|&g| instance.likes(i, g))
            .find(|&g| own < vals[i][j] - instance.value(i, g))
        {
            return Ok(Verdict::Violated(Witness::EnvyBeyondAnyGood { envier: i, envied: j, good }));
        }
    }
    Ok(Verdict::Holds)
}

/// Under binary valuations Pareto optimality is exactly "every valued good
/// sits with an agent who likes it".
pub fn is_pareto_optimal(instance: &Instance, alloc: &Allocation) -> Result<Verdict> {
    alloc.check_shape(instance)?;
    Ok(Verdict::from_witness(po_violation(instance, alloc)))
}

pub(crate) fn po_violation(instance: &Instance, alloc: &Allocation) -> Option<Witness> {
    instance.valued_goods().find_map(|g| match alloc.owner(g) {
        None => Some(Witness::ValuedGoodUnallocated { good: g }),
        Some(o) if !instance.likes(o, g) => Some(Witness::HeldByNonLiker { good: g, holder: o }),
        Some(_) => None,
    })
}

/// The allocated goods are exactly the valued goods.
pub fn is_minimally_complete(instance: &Instance, alloc: &Allocation) -> Result<Verdict> {
    alloc.check_shape(instance)?;
    let w = (0..instance.num_goods()).find_map(|g| match (instance.is_valued(g), alloc.owner(g)) {
        (true, None) => Some(Witness::ValuedGoodUnallocated { good: g }),
        (false, Some(holder)) => Some(Witness::NonValuedGoodAllocated { good: g, holder }),
        _ => None,
    });
    Ok(Verdict::from_witness(w))
}

/// Maximum Nash welfare certificate: Pareto optimal, and no path in the
/// allocation graph from `i` to `j` with `u_j > u_i + 1`.
pub fn is_mnw(instance: &Instance, alloc: &Allocation) -> Result<Verdict> {
    alloc.check_shape(instance)?;
    if let Some(w) = po_violation(instance, alloc) {
        return Ok(Verdict::Violated(w));
    }
    let graph = build_graph(instance, alloc)?;
    let u = utility_vector(instance, alloc);
    for i in 0..instance.num_agents() {
        if let Some(path) = find_path(&graph, i, |j| u[j] > u[i] + 1) {
            return Ok(Verdict::Violated(Witness::ImprovingPath { path }));
        }
    }
    Ok(Verdict::Holds)
}

/// Structural invariants of the lexicographic tie-breaking output. For every
/// agent `i`, with `S` the agents reachable from `i` and from everyone
/// poorer than `i`:
/// - `S` holds exactly the goods its members like,
/// - nobody in `S` has more than `u_i + 1`,
/// - nobody in `S` with index `>= i` has more than `u_i`.
///
/// Minimal completeness and [`is_mnw`] are checked first.
pub fn check_mnw_tie_invariants(instance: &Instance, alloc: &Allocation) -> Result<Verdict> {
    let mc = is_minimally_complete(instance, alloc)?;
    if !mc.holds() {
        return Ok(mc);
    }
    let mnw = is_mnw(instance, alloc)?;
    if !mnw.holds() {
        return Ok(mnw);
    }
    let graph = build_graph(instance, alloc)?;
    let u = utility_vector(instance, alloc);
    let n = instance.num_agents();
    for i in 0..n {
        let s = closure(&graph, (0..n).filter(|&j| j == i || u[j] < u[i]));
        let mut in_s = vec![false; n];
        for &j in &s {
            in_s[j] = true;
        }
        for g in 0..instance.num_goods() {
            let liked_by_s = s.iter().any(|&j| instance.likes(j, g));
            let held_by_s = alloc.owner(g).is_some_and(|o| in_s[o]);
            if liked_by_s != held_by_s {
                return Ok(Verdict::Violated(Witness::ReachableSetNotSaturated { agent: i, good: g }));
            }
        }
        if let Some(&j) = s.iter().find(|&&j| u[j] > u[i] + 1 || (j >= i && u[j] > u[i])) {
            return Ok(Verdict::Violated(Witness::ReachableUtilityTooHigh { agent: i, other: j }));
        }
    }
    Ok(Verdict::Holds)
}
