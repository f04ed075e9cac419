//! The tie-broken deterministic rule against brute force, iteration by
//! iteration, and under custom priorities.

use mnw_core::exec::sweep_profiles;
use mnw_core::oracle::{brute_lex_greatest_mnw_utilities, brute_mnw_set, fuzz_strategyproofness, FuzzConfig, FuzzMode, Rule};
use mnw_core::{mnw_tie_traced, mnw_tie_with_priority, utilities, Execution, Instance};

const SHAPES: [(usize, usize); 10] = [(1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (3, 3), (2, 4)];

fn mnw_profile(inst: &Instance) -> Vec<u32> {
    let set = brute_mnw_set(inst).unwrap();
    utilities(inst, &set[0]).unwrap().profile()
}

#[test]
fn loop_invariant_holds_every_iteration() {
    for (n, m) in SHAPES {
        sweep_profiles(Execution::Parallel, n, m, |inst| {
            let target = brute_lex_greatest_mnw_utilities(&inst).unwrap();
            let profile = mnw_profile(&inst);
            let (alloc, steps) = mnw_tie_traced(&inst);
            assert_eq!(steps.len(), n);
            for step in &steps {
                let i = step.agent;
                let u = &step.utilities_before;
                let mut sorted = u.clone();
                sorted.sort_unstable();
                assert_eq!(sorted, profile, "{:?}: iteration {i} not MNW", inst.rows());
                assert_eq!(u[..i], target[..i], "{:?}: prefix before iteration {i}", inst.rows());
                match &step.path {
                    Some(path) => {
                        let end = *path.last().unwrap();
                        assert_eq!(path[0], i);
                        assert_eq!(target[i], u[i] + 1);
                        assert_eq!(u[end], u[i] + 1);
                        assert!(end > i);
                    }
                    None => assert_eq!(target[i], u[i], "{:?}: iteration {i}", inst.rows()),
                }
            }
            assert_eq!(utilities(&inst, &alloc).unwrap().0, target);
        });
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..=p.len() {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

#[test]
fn priority_order_picks_lex_greatest_in_that_order() {
    for (n, m) in [(2, 2), (2, 3), (3, 2), (3, 3)] {
        sweep_profiles(Execution::Parallel, n, m, |inst| {
            let set = brute_mnw_set(&inst).unwrap();
            for priority in permutations(n) {
                let a = mnw_tie_with_priority(&inst, &priority).unwrap();
                let u = utilities(&inst, &a).unwrap().0;
                let reorder = |v: &[u32]| priority.iter().map(|&k| v[k]).collect::<Vec<_>>();
                let best = set.iter().map(|b| reorder(&utilities(&inst, b).unwrap().0)).max().unwrap();
                assert_eq!(reorder(&u), best, "{:?} under {priority:?}", inst.rows());
            }
        });
    }
}

#[test]
fn priority_must_be_a_permutation() {
    let inst = Instance::from_rows(&[[1], [1]]).unwrap();
    assert!(mnw_tie_with_priority(&inst, &[0, 0]).unwrap_err().is_input());
    assert!(mnw_tie_with_priority(&inst, &[0]).unwrap_err().is_input());
}

#[test]
fn group_strategyproof_three_by_three() {
    let cfg = FuzzConfig::new(Rule::MnwTie, 3, 3, FuzzMode::Exhaustive, 3);
    let report = fuzz_strategyproofness(&cfg).unwrap();
    assert!(report.witness.is_none(), "{:?}", report.witness);
    assert_eq!(report.profiles_checked, 512);
}
