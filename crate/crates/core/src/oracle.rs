//! Brute-force ground truth for tiny instances and strategyproofness fuzzing.
//!
//! Nothing here calls into the solvers' search routines except the rules
//! being fuzzed; the enumeration and subset-based computations are
//! independent of the graph and flow machinery they check.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::det::mnw_tie;
use crate::error::{Error, Result};
use crate::exec::{map_ordered, Execution};
use crate::frac::fractional_mnw;
use crate::model::{rat_int, utility_vector, Allocation, Instance, Rational};

/// Default refusal threshold for `(n + 1)^m` enumeration.
pub const DEFAULT_ENUMERATION_BOUND: u64 = 10_000_000;

/// Every allocation of the instance (each good to one agent or to nobody),
/// in mixed-radix order with good 0 varying fastest. The first allocation
/// yielded is the empty one.
#[derive(Debug)]
pub struct Allocations {
    num_agents: usize,
    digits: Vec<usize>,
    done: bool,
}

impl Iterator for Allocations {
    type Item = Allocation;

    fn next(&mut self) -> Option<Allocation> {
        if self.done {
            return None;
        }
        let owners = self.digits.iter().map(|&d| d.checked_sub(1)).collect();
        let current = Allocation::new(self.num_agents, owners).expect("digits stay in range");
        // increment
        self.done = true;
        for d in &mut self.digits {
            if *d < self.num_agents {
                *d += 1;
                self.done = false;
                break;
            }
            *d = 0;
        }
        Some(current)
    }
}

fn enumeration_size(instance: &Instance) -> Option<u64> {
    (instance.num_agents() as u64 + 1).checked_pow(instance.num_goods() as u32)
}

pub fn enumerate_allocations(instance: &Instance) -> Result<Allocations> {
    enumerate_allocations_bounded(instance, DEFAULT_ENUMERATION_BOUND)
}

pub fn enumerate_allocations_bounded(instance: &Instance, bound: u64) -> Result<Allocations> {
    match enumeration_size(instance) {
        Some(size) if size <= bound => Ok(Allocations {
            num_agents: instance.num_agents(),
            digits: vec![0; instance.num_goods()],
            done: false,
        }),
        _ => Err(Error::input(format!(
            "enumerating ({} + 1)^{} allocations exceeds the bound {bound}",
            instance.num_agents(),
            instance.num_goods()
        ))),
    }
}

/// Maximum Nash welfare set straight from the definition: maximise the number
/// of agents with positive utility, then the product of positive utilities.
///
/// When no good is valued every allocation ties; the set is canonicalised to
/// the empty allocation.
pub fn brute_mnw_set(instance: &Instance) -> Result<Vec<Allocation>> {
    if instance.num_valued_goods() == 0 {
        enumerate_allocations(instance)?;
        return Ok(vec![Allocation::empty(instance.num_agents(), instance.num_goods())]);
    }
    let mut best: Option<(usize, u128)> = None;
    let mut set = Vec::new();
    for alloc in enumerate_allocations(instance)? {
        let u = utility_vector(instance, &alloc);
        let positive = u.iter().filter(|&&x| x > 0).count();
        let product: u128 = u.iter().filter(|&&x| x > 0).map(|&x| u128::from(x)).product();
        let key = (positive, product);
        match best {
            Some(b) if key < b => {}
            Some(b) if key == b => set.push(alloc),
            _ => {
                best = Some(key);
                set = vec![alloc];
            }
        }
    }
    Ok(set)
}

/// Allocations whose sorted utility profile is lexicographically greatest.
pub fn brute_leximin_set(instance: &Instance) -> Result<Vec<Allocation>> {
    let mut best: Option<Vec<u32>> = None;
    let mut set = Vec::new();
    for alloc in enumerate_allocations(instance)? {
        let profile = utility_vector(instance, &alloc).profile();
        match &best {
            Some(b) if profile < *b => {}
            Some(b) if profile == *b => set.push(alloc),
            _ => {
                best = Some(profile);
                set = vec![alloc];
            }
        }
    }
    Ok(set)
}

/// Lexicographically greatest utility vector (agent-index order) over the
/// brute-force MNW set.
pub fn brute_lex_greatest_mnw_utilities(instance: &Instance) -> Result<Vec<u32>> {
    Ok(brute_mnw_set(instance)?
        .iter()
        .map(|a| utility_vector(instance, a).0)
        .max()
        .unwrap_or_default())
}

fn liked_union_size(instance: &Instance, members: &[usize]) -> usize {
    (0..instance.num_goods())
        .filter(|&g| members.iter().any(|&i| instance.likes(i, g)))
        .count()
}

fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (1u32..1 << n).map(move |mask| (0..n).filter(|&i| mask >> i & 1 == 1).collect())
}

/// A utility vector is achievable by some fractional allocation iff every
/// group of agents asks for no more than the number of goods it likes.
pub fn fractional_utilities_feasible(instance: &Instance, u: &[Rational]) -> bool {
    u.len() == instance.num_agents()
        && u.iter().all(|x| *x >= Rational::zero())
        && subsets(instance.num_agents()).all(|s| {
            let asked: Rational = s.iter().map(|&i| &u[i]).sum();
            asked <= rat_int(liked_union_size(instance, &s))
        })
}

/// Fractional leximin utilities by progressive filling over explicit
/// subset constraints: raise every unfrozen agent's level together, freeze
/// everyone in a set whose constraint becomes tight, repeat.
pub fn fractional_leximin_by_subsets(instance: &Instance) -> Vec<Rational> {
    let n = instance.num_agents();
    assert!(n <= 16, "subset enumeration is for tiny instances");
    let all: Vec<Vec<usize>> = subsets(n).collect();
    let capacity: Vec<Rational> = all.iter().map(|s| rat_int(liked_union_size(instance, s))).collect();
    let mut level: Vec<Option<Rational>> = vec![None; n];
    while level.iter().any(Option::is_none) {
        let mut best: Option<Rational> = None;
        let mut tight: Vec<usize> = Vec::new();
        for (s, cap) in all.iter().zip(&capacity) {
            let open = s.iter().filter(|&&i| level[i].is_none()).count();
            if open == 0 {
                continue;
            }
            let fixed: Rational = s.iter().filter_map(|&i| level[i].as_ref()).sum();
            let t = (cap - fixed) / rat_int(open);
            match &best {
                Some(b) if t > *b => {}
                Some(b) if t == *b => tight.extend(s.iter().copied()),
                _ => {
                    best = Some(t);
                    tight = s.clone();
                }
            }
        }
        let t = best.expect("some agent is unfrozen");
        for i in tight {
            if level[i].is_none() {
                level[i] = Some(t.clone());
            }
        }
    }
    level.into_iter().map(Option::unwrap).collect()
}

/// Allocation rules that can be fuzzed for manipulability.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    /// Deterministic MNW with lexicographic tie-breaking.
    MnwTie,
    /// Fractional MNW, compared on expected utility.
    FracMnw,
    /// MNW that also hands every non-valued good to agent 0. Manipulable;
    /// kept as a positive control for the fuzzer.
    FullAllocationMnw,
}

impl Rule {
    /// Utilities, measured with `truth`, of the outcome the rule picks for
    /// the `reported` profile.
    pub fn outcome_utilities(self, reported: &Instance, truth: &Instance) -> Vec<Rational> {
        let n = truth.num_agents();
        match self {
            Rule::MnwTie | Rule::FullAllocationMnw => {
                let mut a = mnw_tie(reported);
                if self == Rule::FullAllocationMnw {
                    for g in 0..reported.num_goods() {
                        if a.owner(g).is_none() {
                            a.set_owner(g, Some(0));
                        }
                    }
                }
                utility_vector(truth, &a).iter().map(|&x| rat_int(x as usize)).collect()
            }
            Rule::FracMnw => {
                let s = fractional_mnw(reported);
                (0..n).map(|i| s.allocation.utility_of(truth, i)).collect()
            }
        }
    }
}

/// A profile, a coalition and a joint misreport under which every coalition
/// member is strictly better off.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Manipulation {
    pub truthful: Vec<Vec<u8>>,
    pub coalition: Vec<usize>,
    pub reported: Vec<Vec<u8>>,
    pub truthful_utilities: Vec<String>,
    pub manipulated_utilities: Vec<String>,
}

fn strings(v: &[Rational]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

fn rows_of(mask: u64, m: usize) -> Vec<bool> {
    (0..m).map(|g| mask >> g & 1 == 1).collect()
}

fn check_deviation(
    rule: Rule,
    truth: &Instance,
    base: &[Rational],
    coalition: &[usize],
    reports: &[u64],
) -> Option<Manipulation> {
    let m = truth.num_goods();
    let mut reported = truth.clone();
    for (&agent, &mask) in coalition.iter().zip(reports) {
        reported = reported.with_report(agent, &rows_of(mask, m));
    }
    if reported == *truth {
        return None;
    }
    let after = rule.outcome_utilities(&reported, truth);
    coalition.iter().all(|&j| after[j] > base[j]).then(|| Manipulation {
        truthful: truth.rows(),
        coalition: coalition.to_vec(),
        reported: reported.rows(),
        truthful_utilities: strings(base),
        manipulated_utilities: strings(&after),
    })
}

/// Checks every coalition of size at most `coalition_max` and every joint
/// misreport at one profile. Returns the number of deviations examined and
/// the first manipulation found.
pub fn find_manipulation(rule: Rule, truth: &Instance, coalition_max: usize) -> (u64, Option<Manipulation>) {
    let n = truth.num_agents();
    let m = truth.num_goods();
    let base = rule.outcome_utilities(truth, truth);
    let mut checked = 0u64;
    for coalition in subsets(n).filter(|s| s.len() <= coalition_max) {
        let combos = 1u64 << (m * coalition.len());
        for joint in 0..combos {
            let reports: Vec<u64> = (0..coalition.len())
                .map(|k| joint >> (k * m) & ((1u64 << m) - 1))
                .collect();
            checked += 1;
            if let Some(w) = check_deviation(rule, truth, &base, &coalition, &reports) {
                return (checked, Some(w));
            }
        }
    }
    (checked, None)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum FuzzMode {
    /// Every profile, every coalition up to the size cap, every joint misreport.
    Exhaustive,
    /// `profiles` random profiles with `misreports` random coalition
    /// deviations each.
    Random { profiles: u64, misreports: u64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FuzzConfig {
    pub rule: Rule,
    pub num_agents: usize,
    pub num_goods: usize,
    pub mode: FuzzMode,
    pub coalition_max: usize,
    /// Refusal threshold on the number of deviations an exhaustive run would
    /// examine.
    pub bound: u64,
    pub execution: Execution,
}

impl FuzzConfig {
    pub fn new(rule: Rule, num_agents: usize, num_goods: usize, mode: FuzzMode, coalition_max: usize) -> Self {
        FuzzConfig {
            rule,
            num_agents,
            num_goods,
            mode,
            coalition_max,
            bound: DEFAULT_ENUMERATION_BOUND,
            execution: Execution::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FuzzReport {
    pub rule: Rule,
    pub agents: usize,
    pub goods: usize,
    #[serde(flatten)]
    pub mode: FuzzMode,
    pub coalition_max: usize,
    pub profiles_checked: u64,
    pub deviations_checked: u64,
    pub witness: Option<Manipulation>,
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

fn exhaustive_cost(n: usize, m: usize, cmax: usize) -> Option<u64> {
    let profiles = 1u64.checked_shl((n * m) as u32)?;
    let mut per_profile = 0u64;
    for size in 1..=cmax.min(n) {
        let misreports = 1u64.checked_shl((m * size) as u32)?;
        per_profile = per_profile.checked_add(binomial(n as u64, size as u64).checked_mul(misreports)?)?;
    }
    profiles.checked_mul(per_profile)
}

/// Searches for a group manipulation of `config.rule`.
pub fn fuzz_strategyproofness(config: &FuzzConfig) -> Result<FuzzReport> {
    let (n, m, cmax) = (config.num_agents, config.num_goods, config.coalition_max);
    if n == 0 {
        return Err(Error::input("fuzzing needs at least one agent"));
    }
    if cmax == 0 {
        return Err(Error::input("coalition size cap must be at least 1"));
    }
    if m > 16 || n * m > 62 {
        return Err(Error::input(format!("{n} agents x {m} goods is too large to fuzz")));
    }
    let results: Vec<(u64, Option<Manipulation>)> = match config.mode {
        FuzzMode::Exhaustive => {
            match exhaustive_cost(n, m, cmax) {
                Some(c) if c <= config.bound => {}
                _ => {
                    return Err(Error::input(format!(
                        "exhaustive search over {n} agents x {m} goods exceeds the bound {}",
                        config.bound
                    )))
                }
            }
            let masks: Vec<u64> = (0..1u64 << (n * m)).collect();
            map_ordered(config.execution, masks, |bits| {
                let truth = Instance::from_bits(n, m, bits).expect("dimensions checked");
                find_manipulation(config.rule, &truth, cmax)
            })
        }
        FuzzMode::Random { profiles, misreports, seed } => {
            let indices: Vec<u64> = (0..profiles).collect();
            map_ordered(config.execution, indices, |k| {
                random_profile_check(config.rule, n, m, cmax, misreports, seed, k)
            })
        }
    };
    let profiles_checked = results.len() as u64;
    let deviations_checked = results.iter().map(|(c, _)| c).sum();
    let witness = results.into_iter().find_map(|(_, w)| w);
    Ok(FuzzReport {
        rule: config.rule,
        agents: n,
        goods: m,
        mode: config.mode,
        coalition_max: cmax,
        profiles_checked,
        deviations_checked,
        witness,
    })
}

/// One random profile; the stream index makes each profile's draws
/// independent of scheduling.
fn random_profile_check(
    rule: Rule,
    n: usize,
    m: usize,
    cmax: usize,
    misreports: u64,
    seed: u64,
    index: u64,
) -> (u64, Option<Manipulation>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let bits: u64 = rng.gen::<u64>() & mask_bits(n * m);
    let truth = Instance::from_bits(n, m, bits).expect("dimensions checked");
    let base = rule.outcome_utilities(&truth, &truth);
    let mut checked = 0;
    for _ in 0..misreports {
        let size = rng.gen_range(1..=cmax.min(n));
        let mut agents: Vec<usize> = (0..n).collect();
        for k in 0..size {
            let pick = rng.gen_range(k..n);
            agents.swap(k, pick);
        }
        let mut coalition = agents[..size].to_vec();
        coalition.sort_unstable();
        let reports: Vec<u64> = (0..size).map(|_| rng.gen::<u64>() & mask_bits(m)).collect();
        checked += 1;
        if let Some(w) = check_deviation(rule, &truth, &base, &coalition, &reports) {
            return (checked, Some(w));
        }
    }
    (checked, None)
}

fn mask_bits(k: usize) -> u64 {
    if k >= 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}
