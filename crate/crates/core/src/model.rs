//! Domain types: instances with binary valuations, deterministic, fractional
//! and randomized allocations, utility vectors and the two vector orders.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Deref;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Exact arbitrary-precision rational used for every fractional quantity.
pub type Rational = BigRational;

/// `n / d` as an exact rational.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

pub fn rat_int(n: usize) -> Rational {
    Rational::from_integer((n as u64).into())
}

/// A profile of binary additive valuations over `num_agents` agents and
/// `num_goods` goods. Agents and goods are 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Instance {
    num_agents: usize,
    num_goods: usize,
    likes: Vec<bool>,
}

impl Instance {
    /// Builds an instance from an explicit `num_agents x num_goods` matrix of
    /// 0/1 entries.
    pub fn new(num_agents: usize, num_goods: usize, valuations: &[Vec<u8>]) -> Result<Self> {
        if num_agents == 0 {
            return Err(Error::input("an instance needs at least one agent"));
        }
        if valuations.len() != num_agents {
            return Err(Error::input(format!(
                "valuations: expected {num_agents} rows, found {}",
                valuations.len()
            )));
        }
        let mut likes = Vec::with_capacity(num_agents * num_goods);
        for (i, row) in valuations.iter().enumerate() {
            if row.len() != num_goods {
                return Err(Error::input(format!(
                    "valuations[{i}]: expected {num_goods} entries, found {}",
                    row.len()
                )));
            }
            for (g, &v) in row.iter().enumerate() {
                match v {
                    0 => likes.push(false),
                    1 => likes.push(true),
                    other => {
                        return Err(Error::input(format!(
                            "valuations[{i}][{g}]: entry {other} is not 0 or 1"
                        )))
                    }
                }
            }
        }
        Ok(Instance { num_agents, num_goods, likes })
    }

    /// Shorthand taking the matrix rows; the number of goods is read from the
    /// first row.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let num_goods = rows.first().map_or(0, |r| r.as_ref().len());
        let owned: Vec<Vec<u8>> = rows.iter().map(|r| r.as_ref().to_vec()).collect();
        Instance::new(rows.len(), num_goods, &owned)
    }

    /// Builds an instance from a bitmask where bit `i * num_goods + g` is set
    /// when agent `i` likes good `g`. Used by exhaustive sweeps.
    pub fn from_bits(num_agents: usize, num_goods: usize, bits: u64) -> Result<Self> {
        if num_agents == 0 {
            return Err(Error::input("an instance needs at least one agent"));
        }
        if num_agents * num_goods > 64 {
            return Err(Error::input("bitmask encoding supports at most 64 entries"));
        }
        let likes = (0..num_agents * num_goods).map(|k| bits >> k & 1 == 1).collect();
        Ok(Instance { num_agents, num_goods, likes })
    }

    pub fn num_agents(&self) -> usize {
        self.num_agents
    }

    pub fn num_goods(&self) -> usize {
        self.num_goods
    }

    /// `v_i(g) = 1`
    #[inline]
    pub fn likes(&self, agent: usize, good: usize) -> bool {
        self.likes[agent * self.num_goods + good]
    }

    pub fn value(&self, agent: usize, good: usize) -> u32 {
        u32::from(self.likes(agent, good))
    }

    /// Goods the agent likes, ascending.
    pub fn liked_goods(&self, agent: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_goods).filter(move |&g| self.likes(agent, g))
    }

    /// Agents who like the good, ascending.
    pub fn likers(&self, good: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_agents).filter(move |&i| self.likes(i, good))
    }

    pub fn likes_anything(&self, agent: usize) -> bool {
        self.liked_goods(agent).next().is_some()
    }

    /// A good is valued when at least one agent likes it.
    pub fn is_valued(&self, good: usize) -> bool {
        self.likers(good).next().is_some()
    }

    pub fn valued_goods(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_goods).filter(move |&g| self.is_valued(g))
    }

    pub fn num_valued_goods(&self) -> usize {
        self.valued_goods().count()
    }

    pub fn row(&self, agent: usize) -> Vec<u8> {
        (0..self.num_goods).map(|g| self.value(agent, g) as u8).collect()
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        (0..self.num_agents).map(|i| self.row(i)).collect()
    }

    /// Copy of the instance where `agent` reports `liked` instead.
    pub fn with_report(&self, agent: usize, liked: &[bool]) -> Instance {
        assert_eq!(liked.len(), self.num_goods, "report length must match num_goods");
        let mut next = self.clone();
        let start = agent * self.num_goods;
        next.likes[start..start + self.num_goods].copy_from_slice(liked);
        next
    }

    pub(crate) fn liked_row(&self, agent: usize) -> &[bool] {
        let start = agent * self.num_goods;
        &self.likes[start..start + self.num_goods]
    }

    /// Relabels agents so that new agent `k` is old agent `order[k]`.
    pub fn permute_agents(&self, order: &[usize]) -> Result<Instance> {
        check_permutation(order, self.num_agents)?;
        let mut likes = Vec::with_capacity(self.likes.len());
        for &old in order {
            likes.extend_from_slice(self.liked_row(old));
        }
        Ok(Instance { num_agents: self.num_agents, num_goods: self.num_goods, likes })
    }
}

pub(crate) fn check_permutation(order: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(Error::input(format!("priority must list all {n} agents")));
    }
    for &a in order {
        if a >= n || std::mem::replace(&mut seen[a], true) {
            return Err(Error::input(format!("priority {order:?} is not a permutation of 0..{n}")));
        }
    }
    Ok(())
}

/// A deterministic allocation: every good is held by at most one agent, and
/// goods may stay unassigned.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Allocation {
    num_agents: usize,
    owners: Vec<Option<usize>>,
}

impl Allocation {
    pub fn new(num_agents: usize, owners: Vec<Option<usize>>) -> Result<Self> {
        if let Some((g, a)) = owners
            .iter()
            .enumerate()
            .find_map(|(g, o)| o.filter(|&a| a >= num_agents).map(|a| (g, a)))
        {
            return Err(Error::input(format!(
                "good {g} assigned to agent {a}, but there are only {num_agents} agents"
            )));
        }
        Ok(Allocation { num_agents, owners })
    }

    /// Nothing allocated.
    pub fn empty(num_agents: usize, num_goods: usize) -> Self {
        Allocation { num_agents, owners: vec![None; num_goods] }
    }

    /// Builds an allocation from explicit bundles.
    pub fn from_bundles(num_goods: usize, bundles: &[Vec<usize>]) -> Result<Self> {
        let mut owners = vec![None; num_goods];
        for (i, bundle) in bundles.iter().enumerate() {
            for &g in bundle {
                let slot = owners
                    .get_mut(g)
                    .ok_or_else(|| Error::input(format!("good {g} out of range")))?;
                if let Some(prev) = slot.replace(i) {
                    return Err(Error::input(format!("good {g} given to agents {prev} and {i}")));
                }
            }
        }
        Ok(Allocation { num_agents: bundles.len(), owners })
    }

    pub fn num_agents(&self) -> usize {
        self.num_agents
    }

    pub fn num_goods(&self) -> usize {
        self.owners.len()
    }

    pub fn owner(&self, good: usize) -> Option<usize> {
        self.owners[good]
    }

    pub fn owners(&self) -> &[Option<usize>] {
        &self.owners
    }

    pub(crate) fn set_owner(&mut self, good: usize, owner: Option<usize>) {
        self.owners[good] = owner;
    }

    /// Goods held by `agent`, ascending.
    pub fn bundle(&self, agent: usize) -> Vec<usize> {
        self.held_by(agent).collect()
    }

    pub(crate) fn held_by(&self, agent: usize) -> impl Iterator<Item = usize> + '_ {
        self.owners
            .iter()
            .enumerate()
            .filter(move |(_, o)| **o == Some(agent))
            .map(|(g, _)| g)
    }

    pub fn bundle_size(&self, agent: usize) -> usize {
        self.held_by(agent).count()
    }

    pub fn allocated_goods(&self) -> impl Iterator<Item = usize> + '_ {
        self.owners.iter().enumerate().filter(|(_, o)| o.is_some()).map(|(g, _)| g)
    }

    /// Errors unless the shape matches the instance.
    pub fn check_shape(&self, instance: &Instance) -> Result<()> {
        if self.num_agents != instance.num_agents() || self.owners.len() != instance.num_goods() {
            return Err(Error::input(format!(
                "allocation is {}x{} but the instance is {}x{}",
                self.num_agents,
                self.owners.len(),
                instance.num_agents(),
                instance.num_goods()
            )));
        }
        Ok(())
    }
}

/// `v_i(A_i)`: the number of goods in the agent's bundle that it likes.
pub fn utility(instance: &Instance, alloc: &Allocation, agent: usize) -> Result<u32> {
    alloc.check_shape(instance)?;
    if agent >= instance.num_agents() {
        return Err(Error::input(format!(
            "agent {agent} out of range for {} agents",
            instance.num_agents()
        )));
    }
    Ok(alloc.held_by(agent).filter(|&g| instance.likes(agent, g)).count() as u32)
}

/// Utility vector of a deterministic allocation.
pub fn utilities(instance: &Instance, alloc: &Allocation) -> Result<UtilityVector<u32>> {
    alloc.check_shape(instance)?;
    Ok(utility_vector(instance, alloc))
}

pub(crate) fn utility_vector(instance: &Instance, alloc: &Allocation) -> UtilityVector<u32> {
    let mut u = vec![0u32; instance.num_agents()];
    for (g, owner) in alloc.owners().iter().enumerate() {
        if let Some(i) = *owner {
            if instance.likes(i, g) {
                u[i] += 1;
            }
        }
    }
    UtilityVector(u)
}

/// Per-agent utilities in agent-index order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UtilityVector<T>(pub Vec<T>);

impl<T: Ord + Clone> UtilityVector<T> {
    /// The utility profile: the same values sorted non-descending.
    pub fn profile(&self) -> Vec<T> {
        let mut p = self.0.clone();
        p.sort();
        p
    }
}

impl<T> Deref for UtilityVector<T> {
    type Target = [T];
    fn deref(&self) -> &[T] {
        &self.0
    }
}

impl<T> From<Vec<T>> for UtilityVector<T> {
    fn from(v: Vec<T>) -> Self {
        UtilityVector(v)
    }
}

impl<T: fmt::Display> fmt::Display for UtilityVector<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, v) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Outcome of a leximin comparison of two utility vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeximinOrdering {
    Dominates,
    Dominated,
    Equivalent,
}

/// Compares the sorted profiles lexicographically.
pub fn leximin_compare<T: Ord + Clone>(a: &[T], b: &[T]) -> Result<LeximinOrdering> {
    same_length(a.len(), b.len())?;
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort();
    sb.sort();
    Ok(match sa.cmp(&sb) {
        Ordering::Greater => LeximinOrdering::Dominates,
        Ordering::Less => LeximinOrdering::Dominated,
        Ordering::Equal => LeximinOrdering::Equivalent,
    })
}

/// Plain lexicographic comparison in agent-index order (no sorting).
pub fn lex_vector_compare<T: Ord>(a: &[T], b: &[T]) -> Result<Ordering> {
    same_length(a.len(), b.len())?;
    Ok(a.cmp(b))
}

fn same_length(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::input(format!("utility vectors have lengths {a} and {b}")));
    }
    Ok(())
}

/// `shares(i, g)` is the fraction of good `g` given to agent `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FractionalAllocation {
    num_agents: usize,
    num_goods: usize,
    shares: Vec<Rational>,
}

impl FractionalAllocation {
    /// Takes the matrix row by row; every entry must lie in `[0, 1]` and every
    /// column must sum to at most one.
    pub fn new(num_agents: usize, num_goods: usize, rows: Vec<Vec<Rational>>) -> Result<Self> {
        if rows.len() != num_agents {
            return Err(Error::input(format!("expected {num_agents} share rows, found {}", rows.len())));
        }
        let mut shares = Vec::with_capacity(num_agents * num_goods);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != num_goods {
                return Err(Error::input(format!(
                    "shares[{i}]: expected {num_goods} entries, found {}",
                    row.len()
                )));
            }
            for (g, s) in row.into_iter().enumerate() {
                if s < Rational::zero() || s > Rational::one() {
                    return Err(Error::input(format!("shares[{i}][g{g}] = {s} is outside [0, 1]")));
                }
                shares.push(s);
            }
        }
        let frac = FractionalAllocation { num_agents, num_goods, shares };
        for g in 0..num_goods {
            let total = frac.column_total(g);
            if total > Rational::one() {
                return Err(Error::input(format!("good g{g} is allocated {total} > 1 in total")));
            }
        }
        Ok(frac)
    }

    pub fn zeros(num_agents: usize, num_goods: usize) -> Self {
        FractionalAllocation {
            num_agents,
            num_goods,
            shares: vec![Rational::zero(); num_agents * num_goods],
        }
    }

    /// The 0/1 matrix of a deterministic allocation.
    pub fn from_allocation(alloc: &Allocation) -> Self {
        let mut frac = FractionalAllocation::zeros(alloc.num_agents(), alloc.num_goods());
        for (g, owner) in alloc.owners().iter().enumerate() {
            if let Some(i) = *owner {
                frac.shares[i * alloc.num_goods() + g] = Rational::one();
            }
        }
        frac
    }

    pub fn num_agents(&self) -> usize {
        self.num_agents
    }

    pub fn num_goods(&self) -> usize {
        self.num_goods
    }

    pub fn share(&self, agent: usize, good: usize) -> &Rational {
        &self.shares[agent * self.num_goods + good]
    }

    pub(crate) fn share_mut(&mut self, agent: usize, good: usize) -> &mut Rational {
        &mut self.shares[agent * self.num_goods + good]
    }

    pub fn rows(&self) -> Vec<Vec<Rational>> {
        (0..self.num_agents)
            .map(|i| (0..self.num_goods).map(|g| self.share(i, g).clone()).collect())
            .collect()
    }

    pub fn column_total(&self, good: usize) -> Rational {
        (0..self.num_agents).map(|i| self.share(i, good)).sum()
    }

    pub fn row_total(&self, agent: usize) -> Rational {
        (0..self.num_goods).map(|g| self.share(agent, g)).sum()
    }

    pub fn is_integral(&self) -> bool {
        self.shares.iter().all(|s| s.is_integer())
    }

    pub fn fractional_entries(&self) -> usize {
        self.shares.iter().filter(|s| !s.is_integer()).count()
    }

    /// Expected utility `sum_g shares(i, g) * v_i(g)` of `agent`.
    pub fn utility_of(&self, instance: &Instance, agent: usize) -> Rational {
        instance.liked_goods(agent).map(|g| self.share(agent, g)).sum()
    }

    /// What `agent` would get, by its own valuation, from `other`'s shares.
    pub fn utility_for_bundle_of(&self, instance: &Instance, agent: usize, other: usize) -> Rational {
        instance.liked_goods(agent).map(|g| self.share(other, g)).sum()
    }

    pub fn utilities(&self, instance: &Instance) -> Result<UtilityVector<Rational>> {
        self.check_shape(instance)?;
        Ok(UtilityVector((0..self.num_agents).map(|i| self.utility_of(instance, i)).collect()))
    }

    pub fn check_shape(&self, instance: &Instance) -> Result<()> {
        if self.num_agents != instance.num_agents() || self.num_goods != instance.num_goods() {
            return Err(Error::input(format!(
                "fractional allocation is {}x{} but the instance is {}x{}",
                self.num_agents,
                self.num_goods,
                instance.num_agents(),
                instance.num_goods()
            )));
        }
        Ok(())
    }
}

/// A finite probability distribution over deterministic allocations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lottery {
    support: Vec<(Rational, Allocation)>,
}

impl Lottery {
    /// Merges duplicate allocations (summing their probabilities, first
    /// occurrence keeps its position) and checks that the probabilities are
    /// positive and sum to exactly one.
    pub fn new(entries: Vec<(Rational, Allocation)>) -> Result<Self> {
        let mut support: Vec<(Rational, Allocation)> = Vec::with_capacity(entries.len());
        for (p, alloc) in entries {
            if p <= Rational::zero() {
                return Err(Error::input(format!("lottery probability {p} is not positive")));
            }
            if let Some(first) = support.first() {
                if first.1.num_agents() != alloc.num_agents() || first.1.num_goods() != alloc.num_goods() {
                    return Err(Error::input("lottery allocations have different shapes"));
                }
            }
            match support.iter_mut().find(|(_, a)| *a == alloc) {
                Some((q, _)) => *q += p,
                None => support.push((p, alloc)),
            }
        }
        let total: Rational = support.iter().map(|(p, _)| p).sum();
        if total != Rational::one() {
            return Err(Error::input(format!("lottery probabilities sum to {total}, not 1")));
        }
        Ok(Lottery { support })
    }

    pub fn point_mass(alloc: Allocation) -> Self {
        Lottery { support: vec![(Rational::one(), alloc)] }
    }

    pub fn support(&self) -> &[(Rational, Allocation)] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }
}

/// The fractional allocation a lottery implements: `shares(i, g)` is the
/// probability that `g` ends up with `i`.
pub fn induced_fractional(lottery: &Lottery, instance: &Instance) -> Result<FractionalAllocation> {
    let mut frac = FractionalAllocation::zeros(instance.num_agents(), instance.num_goods());
    for (p, alloc) in lottery.support() {
        alloc.check_shape(instance)?;
        for (g, owner) in alloc.owners().iter().enumerate() {
            if let Some(i) = *owner {
                *frac.share_mut(i, g) += p;
            }
        }
    }
    Ok(frac)
}

/// Expected utility of every agent under the lottery.
pub fn expected_utilities(lottery: &Lottery, instance: &Instance) -> Result<UtilityVector<Rational>> {
    let mut u = vec![Rational::zero(); instance.num_agents()];
    for (p, alloc) in lottery.support() {
        let ui = utilities(instance, alloc)?;
        for (acc, &x) in u.iter_mut().zip(ui.iter()) {
            *acc += p * rat_int(x as usize);
        }
    }
    Ok(UtilityVector(u))
}
