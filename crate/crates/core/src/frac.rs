//! Fractional maximum Nash welfare (equivalently fractional leximin) by
//! exact water-filling.
//!
//! Each round finds the bottleneck ratio `min |Γ(S)| / |S|` over sets `S` of
//! still-active agents, where `Γ(S)` is the set of remaining goods liked by
//! someone in `S`. The largest set attaining it is frozen at exactly that
//! utility, receives all of `Γ(S)`, and leaves the problem together with
//! those goods.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::fairness::{Verdict, Witness};
use crate::flow::{FlowNetwork, INF};
use crate::model::{rat, FractionalAllocation, Instance, Rational, UtilityVector};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FractionalSolution {
    pub allocation: FractionalAllocation,
    pub utilities: UtilityVector<Rational>,
}

/// Bipartite network for "every active agent gets `p / q`", scaled by `q`:
/// source -> agent with capacity `p`, agent -> liked good unbounded,
/// good -> sink with capacity `q`.
struct RoundNetwork {
    net: FlowNetwork,
    /// `(agent, good, edge id)` for every liking pair.
    pairs: Vec<(usize, usize, usize)>,
    agent_nodes: Vec<usize>,
    sink: usize,
    flow: i64,
}

fn build_round(instance: &Instance, active: &[usize], goods: &[usize], p: i64, q: i64) -> RoundNetwork {
    let source = 0;
    let sink = 1 + active.len() + goods.len();
    let mut net = FlowNetwork::new(sink + 1);
    let agent_nodes: Vec<usize> = (0..active.len()).map(|k| 1 + k).collect();
    let good_node = |k: usize| 1 + active.len() + k;
    let mut pairs = Vec::new();
    for (k, &i) in active.iter().enumerate() {
        net.add_edge(source, agent_nodes[k], p);
        for (h, &g) in goods.iter().enumerate() {
            if instance.likes(i, g) {
                let e = net.add_edge(agent_nodes[k], good_node(h), INF);
                pairs.push((i, g, e));
            }
        }
    }
    for h in 0..goods.len() {
        net.add_edge(good_node(h), sink, q);
    }
    let flow = net.max_flow(source, sink);
    RoundNetwork { net, pairs, agent_nodes, sink, flow }
}

/// Computes the minimally complete fractional MNW allocation. Agents who like
/// nothing get an all-zero row.
pub fn fractional_mnw(instance: &Instance) -> FractionalSolution {
    let n = instance.num_agents();
    let mut frac = FractionalAllocation::zeros(n, instance.num_goods());
    let mut utilities = vec![Rational::zero(); n];
    let mut active: Vec<usize> = (0..n).filter(|&i| instance.likes_anything(i)).collect();
    let mut remaining: Vec<usize> = instance.valued_goods().collect();

    while !active.is_empty() {
        let a = active.len() as i64;
        let r = remaining.len() as i64;
        let mut candidates: Vec<(i64, i64)> = (1..=a)
            .flat_map(|q| (0..=r).map(move |p| (p, q)))
            .filter(|&(p, q)| num_integer::gcd(p, q) == 1)
            .collect();
        candidates.sort_by(|x, y| (x.0 * y.1).cmp(&(y.0 * x.1)));

        let feasible = |&(p, q): &(i64, i64)| build_round(instance, &active, &remaining, p, q).flow == p * a;
        // candidates[0] = 0 is always feasible; find the last feasible one
        let (mut lo, mut hi) = (0usize, candidates.len());
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if feasible(&candidates[mid]) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (p, q) = candidates[lo];
        let round = build_round(instance, &active, &remaining, p, q);
        let reaches_sink = round.net.can_reach(round.sink);
        let tight: Vec<usize> = active
            .iter()
            .enumerate()
            .filter(|&(k, _)| !reaches_sink[round.agent_nodes[k]])
            .map(|(_, &i)| i)
            .collect();
        assert!(!tight.is_empty(), "a bottleneck round must freeze at least one agent");

        let level = rat(p, q);
        for &(i, g, e) in &round.pairs {
            let f = round.net.flow_on(e);
            if f > 0 && tight.contains(&i) {
                *frac.share_mut(i, g) = rat(f, q);
            }
        }
        for &i in &tight {
            utilities[i] = level.clone();
        }
        remaining.retain(|&g| !tight.iter().any(|&i| instance.likes(i, g)));
        active.retain(|i| !tight.contains(i));
    }

    FractionalSolution { allocation: frac, utilities: UtilityVector(utilities) }
}

/// First-order optimality certificate for the fractional MNW program:
/// minimally complete, shares only on liking pairs, and whoever holds part of
/// a good has the least utility among that good's likers.
pub fn verify_fractional_mnw(instance: &Instance, frac: &FractionalAllocation) -> Result<Verdict> {
    frac.check_shape(instance)?;
    let n = instance.num_agents();
    for g in 0..instance.num_goods() {
        for i in 0..n {
            if frac.share(i, g).is_positive() && !instance.likes(i, g) {
                return Ok(Verdict::Violated(Witness::FractionalNonLiker { good: g, holder: i }));
            }
        }
        if instance.is_valued(g) && frac.column_total(g) != Rational::one() {
            return Ok(Verdict::Violated(Witness::FractionalColumn { good: g }));
        }
    }
    let u: Vec<Rational> = (0..n).map(|i| frac.utility_of(instance, i)).collect();
    for g in 0..instance.num_goods() {
        let Some(poorest) = instance.likers(g).min_by(|&x, &y| u[x].cmp(&u[y])) else {
            continue;
        };
        for holder in 0..n {
            if frac.share(holder, g).is_positive() && u[holder] > u[poorest] {
                return Ok(Verdict::Violated(Witness::FractionalTransfer { good: g, holder, liker: poorest }));
            }
        }
    }
    Ok(Verdict::Holds)
}

/// Errors with the certificate witness unless `frac` passes
/// [`verify_fractional_mnw`].
pub(crate) fn require_fractional_mnw(instance: &Instance, frac: &FractionalAllocation) -> Result<()> {
    match verify_fractional_mnw(instance, frac)? {
        Verdict::Holds => Ok(()),
        Verdict::Violated(w) => Err(Error::input(format!(
            "not a minimally complete fractional MNW allocation: {}",
            serde_json::to_string(&w).unwrap_or_default()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(rows: &[&[u8]]) -> Instance {
        Instance::from_rows(rows).unwrap()
    }

    #[test]
    fn one_good_two_likers() {
        let s = fractional_mnw(&inst(&[&[1], &[1]]));
        assert_eq!(s.utilities.0, vec![rat(1, 2), rat(1, 2)]);
        assert_eq!(s.allocation.share(0, 0), &rat(1, 2));
        assert_eq!(s.allocation.share(1, 0), &rat(1, 2));
    }

    #[test]
    fn boundary_optimum() {
        let i = inst(&[&[1, 1], &[1, 0]]);
        let s = fractional_mnw(&i);
        assert_eq!(s.utilities.0, vec![rat(1, 1), rat(1, 1)]);
        assert_eq!(s.allocation.share(0, 1), &rat(1, 1));
        assert_eq!(s.allocation.share(1, 0), &rat(1, 1));
        assert_eq!(s.allocation.share(0, 0), &rat(0, 1));
    }

    #[test]
    fn three_agents_two_goods() {
        let s = fractional_mnw(&inst(&[&[1, 1], &[1, 1], &[1, 1]]));
        assert_eq!(s.utilities.0, vec![rat(2, 3); 3]);
    }

    #[test]
    fn agent_liking_nothing_gets_zero_row() {
        let i = inst(&[&[0, 0], &[1, 1]]);
        let s = fractional_mnw(&i);
        assert_eq!(s.utilities.0, vec![rat(0, 1), rat(2, 1)]);
        assert_eq!(s.allocation.row_total(0), rat(0, 1));
    }

    #[test]
    fn multi_round() {
        // agent 2 alone likes g2, g3; agents 0, 1 share g0, g1 with 2
        let i = inst(&[&[1, 0, 0, 0], &[1, 1, 0, 0], &[0, 1, 1, 1]]);
        let s = fractional_mnw(&i);
        assert_eq!(s.utilities.0, vec![rat(1, 1), rat(1, 1), rat(2, 1)]);
        assert!(verify_fractional_mnw(&i, &s.allocation).unwrap().holds());
    }

    #[test]
    fn verify_examples() {
        let i = inst(&[&[1], &[1]]);
        assert!(verify_fractional_mnw(&i, &fractional_mnw(&i).allocation).unwrap().holds());

        let lopsided = FractionalAllocation::new(2, 1, vec![vec![rat(1, 1)], vec![rat(0, 1)]]).unwrap();
        assert_eq!(
            verify_fractional_mnw(&i, &lopsided).unwrap(),
            Verdict::Violated(Witness::FractionalTransfer { good: 0, holder: 0, liker: 1 })
        );

        let zero = inst(&[&[0, 0]]);
        assert!(verify_fractional_mnw(&zero, &FractionalAllocation::zeros(1, 2)).unwrap().holds());

        let half = FractionalAllocation::new(2, 1, vec![vec![rat(1, 2)], vec![rat(0, 1)]]).unwrap();
        assert_eq!(
            verify_fractional_mnw(&i, &half).unwrap(),
            Verdict::Violated(Witness::FractionalColumn { good: 0 })
        );
    }
}
