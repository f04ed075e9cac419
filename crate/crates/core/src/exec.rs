//! Sequential or data-parallel evaluation of independent checks.
//!
//! With the `parallel` feature (on by default) `Execution::Parallel` fans work
//! out over rayon's pool; without it every mode runs sequentially.

use serde::Serialize;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

/// Maps `f` over `items`, preserving order.
pub fn map_ordered<T, R, F>(exec: Execution, items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.into_par_iter().map(f).collect()
        }
        _ => items.into_iter().map(f).collect(),
    }
}

/// Runs `f` on every binary profile with `num_agents` agents and `num_goods`
/// goods (profiles in bitmask order).
pub fn sweep_profiles<R, F>(exec: Execution, num_agents: usize, num_goods: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(crate::model::Instance) -> R + Sync + Send,
{
    let entries = num_agents * num_goods;
    assert!(entries < 32, "exhaustive sweep over 2^{entries} profiles is out of range");
    let masks: Vec<u64> = (0..1u64 << entries).collect();
    map_ordered(exec, masks, |bits| {
        f(crate::model::Instance::from_bits(num_agents, num_goods, bits).expect("valid dimensions"))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let seq = sweep_profiles(Execution::Sequential, 2, 2, |i| i.num_valued_goods());
        let par = sweep_profiles(Execution::Parallel, 2, 2, |i| i.num_valued_goods());
        assert_eq!(seq.len(), 16);
        assert_eq!(seq, par);
    }
}
