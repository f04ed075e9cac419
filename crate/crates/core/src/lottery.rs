//! Implementing a fractional MNW allocation as a lottery over deterministic
//! MNW allocations.
//!
//! Support allocations keep every good's total allocation (column totals) and
//! keep each agent's utility at the floor or ceiling of its fractional
//! utility. The decomposition repeatedly rounds the current residual matrix
//! to an integral point on its minimal face, peels off as much of that point
//! as the constraints allow, and rescales the rest. Each peel makes at least
//! one more constraint tight, so there are at most `#fractional entries + 1`
//! support allocations.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fairness::{Verdict, Witness};
use crate::frac::require_fractional_mnw;
use crate::model::{utility_vector, Allocation, FractionalAllocation, Instance, Lottery, Rational};

/// Per-good allocation totals and per-agent utility windows a support
/// allocation must respect.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BihierarchyConstraints {
    pub column_totals: Vec<Rational>,
    pub row_floor: Vec<BigInt>,
    pub row_ceil: Vec<BigInt>,
}

impl BihierarchyConstraints {
    pub fn from_fractional(instance: &Instance, frac: &FractionalAllocation) -> Result<Self> {
        frac.check_shape(instance)?;
        let column_totals = (0..instance.num_goods()).map(|g| frac.column_total(g)).collect();
        let u: Vec<Rational> = (0..instance.num_agents()).map(|i| frac.utility_of(instance, i)).collect();
        Ok(BihierarchyConstraints {
            column_totals,
            row_floor: u.iter().map(|x| x.floor().to_integer()).collect(),
            row_ceil: u.iter().map(|x| x.ceil().to_integer()).collect(),
        })
    }

    /// Whether a deterministic allocation allocates every good exactly as
    /// often as the totals say and keeps every utility inside its window.
    pub fn admits(&self, instance: &Instance, alloc: &Allocation) -> bool {
        let totals_match = alloc.owners().iter().zip(&self.column_totals).all(|(o, t)| {
            let got = if o.is_some() { Rational::one() } else { Rational::zero() };
            got == *t
        });
        let u = utility_vector(instance, alloc);
        totals_match
            && u.iter().enumerate().all(|(i, &x)| {
                let x = BigInt::from(x);
                self.row_floor[i] <= x && x <= self.row_ceil[i]
            })
    }
}

/// Rounding test on utility vectors: every `u_i` at the floor or ceiling of
/// `u_star_i`, and within each group of agents sharing a floor the sums of
/// `u` and `u_star` agree.
pub fn check_rounded_utilities(u_star: &[Rational], u: &[Rational]) -> Result<Verdict> {
    if u_star.len() != u.len() {
        return Err(Error::input("utility vectors have different lengths"));
    }
    for (i, (s, x)) in u_star.iter().zip(u).enumerate() {
        if *x < s.floor() || *x > s.ceil() {
            return Ok(Verdict::Violated(Witness::RoundingWindow { agent: i }));
        }
    }
    let mut floors: Vec<Rational> = u_star.iter().map(|s| s.floor()).collect();
    floors.sort();
    floors.dedup();
    for f in floors {
        let members = (0..u.len()).filter(|&i| u_star[i].floor() == f);
        let (got, want) = members.fold((Rational::zero(), Rational::zero()), |(a, b), i| {
            (a + &u[i], b + &u_star[i])
        });
        if got != want {
            return Ok(Verdict::Violated(Witness::RoundingGroupSum { floor: f.to_string() }));
        }
    }
    Ok(Verdict::Holds)
}

/// Whether `alloc` is a rounding of the fractional allocation's utilities.
pub fn check_rounded(instance: &Instance, frac: &FractionalAllocation, alloc: &Allocation) -> Result<Verdict> {
    alloc.check_shape(instance)?;
    let u_star = frac.utilities(instance)?;
    let u: Vec<Rational> = utility_vector(instance, alloc)
        .iter()
        .map(|&x| Rational::from_integer(x.into()))
        .collect();
    check_rounded_utilities(&u_star, &u)
}

/// Row-major working matrix.
#[derive(Clone)]
struct Matrix {
    n: usize,
    m: usize,
    cells: Vec<Rational>,
}

impl Matrix {
    fn at(&self, i: usize, g: usize) -> &Rational {
        &self.cells[i * self.m + g]
    }

    fn at_mut(&mut self, i: usize, g: usize) -> &mut Rational {
        &mut self.cells[i * self.m + g]
    }

    fn row_sum(&self, i: usize) -> Rational {
        self.cells[i * self.m..(i + 1) * self.m].iter().sum()
    }

    fn is_integral(&self) -> bool {
        self.cells.iter().all(Rational::is_integer)
    }
}

/// Vertices: agents `0..n`, goods `n..n+m`, dummy `n+m`.
fn find_cycle(w: &Matrix) -> Option<Vec<usize>> {
    let (n, m) = (w.n, w.m);
    let dummy = n + m;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n + m + 1];
    for i in 0..n {
        for g in 0..m {
            if !w.at(i, g).is_integer() {
                adj[i].push(n + g);
                adj[n + g].push(i);
            }
        }
        if !w.row_sum(i).is_integer() {
            adj[i].push(dummy);
            adj[dummy].push(i);
        }
    }
    let start = (0..adj.len()).find(|&v| !adj[v].is_empty())?;
    let mut position = vec![usize::MAX; adj.len()];
    let mut walk = vec![start];
    position[start] = 0;
    let mut prev = usize::MAX;
    let mut cur = start;
    loop {
        let next = *adj[cur].iter().find(|&&x| x != prev).expect("every vertex has degree >= 2");
        if position[next] != usize::MAX {
            return Some(walk[position[next]..].to_vec());
        }
        position[next] = walk.len();
        walk.push(next);
        prev = cur;
        cur = next;
    }
}

/// Pushes the fractional entries along cycles until the matrix is integral.
/// Integral entries, integral row sums and column sums never move, and
/// fractional row sums stay within their floor/ceiling.
fn round_to_integral(mut w: Matrix) -> Result<Matrix> {
    let (n, m) = (w.n, w.m);
    let dummy = n + m;
    let mut guard = w.cells.len() + n + 2;
    while !w.is_integral() {
        if guard == 0 {
            return Err(Error::logic("cycle rounding failed to make progress"));
        }
        guard -= 1;
        let cycle = find_cycle(&w).ok_or_else(|| Error::logic("fractional matrix without a cycle"))?;
        let k = cycle.len();
        // (agent, good, sign) for real edges; (agent, sign of its real edge) at the dummy
        let mut real: Vec<(usize, usize, bool)> = Vec::new();
        let mut slack: Vec<(usize, bool)> = Vec::new();
        for t in 0..k {
            let (a, b) = (cycle[t], cycle[(t + 1) % k]);
            let plus = t % 2 == 0;
            if a == dummy || b == dummy {
                // the agent's other cycle edge has the opposite sign of this one
                let agent = if a == dummy { b } else { a };
                slack.push((agent, !plus));
            } else {
                let (i, g) = if a < n { (a, b - n) } else { (b, a - n) };
                real.push((i, g, plus));
            }
        }
        let mut delta: Option<Rational> = None;
        let mut tighten = |bound: Rational| {
            if delta.as_ref().is_none_or(|d| bound < *d) {
                delta = Some(bound);
            }
        };
        for &(i, g, plus) in &real {
            let x = w.at(i, g);
            tighten(if plus { Rational::one() - x } else { x.clone() });
        }
        for &(i, plus) in &slack {
            let r = w.row_sum(i);
            tighten(if plus { r.ceil() - &r } else { &r - r.floor() });
        }
        let delta = delta.ok_or_else(|| Error::logic("empty cycle"))?;
        for &(i, g, plus) in &real {
            if plus {
                *w.at_mut(i, g) += &delta;
            } else {
                *w.at_mut(i, g) -= &delta;
            }
        }
    }
    Ok(w)
}

fn to_allocation(z: &Matrix) -> Result<Allocation> {
    let owners = (0..z.m)
        .map(|g| {
            let holders: Vec<usize> = (0..z.n).filter(|&i| z.at(i, g).is_one()).collect();
            match holders.as_slice() {
                [] => Ok(None),
                [i] => Ok(Some(*i)),
                _ => Err(Error::logic(format!("good {g} rounded to several agents"))),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Allocation::new(z.n, owners)
}

/// Decomposes a minimally complete fractional MNW allocation into a lottery
/// over deterministic MNW allocations with exactly the given marginals.
pub fn decompose(instance: &Instance, frac: &FractionalAllocation) -> Result<Lottery> {
    require_fractional_mnw(instance, frac)?;
    decompose_unchecked(frac)
}

pub(crate) fn decompose_unchecked(frac: &FractionalAllocation) -> Result<Lottery> {
    let (n, m) = (frac.num_agents(), frac.num_goods());
    let mut y = Matrix { n, m, cells: frac.rows().into_iter().flatten().collect() };
    for g in 0..m {
        let total: Rational = (0..n).map(|i| y.at(i, g)).sum();
        if !total.is_integer() {
            return Err(Error::input(format!("column total of good {g} is {total}, not an integer")));
        }
    }
    let mut mass = Rational::one();
    let mut entries: Vec<(Rational, Allocation)> = Vec::new();
    let budget = frac.fractional_entries() + 1;
    for _ in 0..budget {
        if y.is_integral() {
            entries.push((mass, to_allocation(&y)?));
            return Lottery::new(entries);
        }
        let z = round_to_integral(y.clone())?;
        let mut theta: Option<Rational> = None;
        let mut tighten = |bound: Rational| {
            if theta.as_ref().is_none_or(|t| bound < *t) {
                theta = Some(bound);
            }
        };
        for (yv, zv) in y.cells.iter().zip(&z.cells) {
            if !yv.is_integer() {
                tighten(if zv.is_one() { yv.clone() } else { Rational::one() - yv });
            }
        }
        for i in 0..n {
            let r = y.row_sum(i);
            if !r.is_integer() {
                let zr = z.row_sum(i);
                tighten(if zr == r.ceil() { &r - r.floor() } else { r.ceil() - &r });
            }
        }
        let theta = theta.ok_or_else(|| Error::logic("no fractional constraint to peel"))?;
        entries.push((&mass * &theta, to_allocation(&z)?));
        let rest = Rational::one() - &theta;
        for (yv, zv) in y.cells.iter_mut().zip(&z.cells) {
            *yv = (&*yv - &theta * zv) / &rest;
        }
        mass *= rest;
    }
    Err(Error::logic("decomposition exceeded its support bound"))
}

fn lcm_of_denominators(lottery: &Lottery) -> BigInt {
    lottery.support().iter().fold(BigInt::one(), |acc, (p, _)| acc.lcm(p.denom()))
}

/// Uniform integer in `[0, bound)` by rejection on fresh random bits.
fn uniform_below(rng: &mut ChaCha8Rng, bound: &BigUint) -> BigUint {
    let bits = bound.bits();
    let words = bits.div_ceil(32) as usize;
    let top_mask = if bits.is_multiple_of(32) { u32::MAX } else { (1u32 << (bits % 32)) - 1 };
    loop {
        let mut digits: Vec<u32> = (0..words).map(|_| rng.next_u32()).collect();
        if let Some(top) = digits.last_mut() {
            *top &= top_mask;
        }
        let x = BigUint::from_slice(&digits);
        if x < *bound {
            return x;
        }
    }
}

/// Draws one support allocation. The probabilities are realised exactly by
/// inverse CDF over a uniform integer below the common denominator.
pub fn sample(lottery: &Lottery, seed: u64) -> Allocation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let denom = lcm_of_denominators(lottery);
    let bound = denom.to_biguint().expect("denominators are positive");
    let draw = BigInt::from_biguint(Sign::Plus, uniform_below(&mut rng, &bound));
    let mut cumulative = BigInt::zero();
    for (p, alloc) in lottery.support() {
        cumulative += p.numer() * (&denom / p.denom());
        if draw < cumulative {
            return alloc.clone();
        }
    }
    unreachable!("probabilities sum to one")
}

/// Probability of each support entry as `f64`, for reporting only.
pub fn approx_probabilities(lottery: &Lottery) -> Vec<f64> {
    lottery
        .support()
        .iter()
        .map(|(p, _)| p.numer().to_f64().unwrap_or(0.0) / p.denom().to_f64().unwrap_or(1.0))
        .collect()
}
