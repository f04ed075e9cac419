//! Certificates checked against brute-force enumeration on every small
//! profile.

use mnw_core::exec::sweep_profiles;
use mnw_core::fairness::is_mnw;
use mnw_core::lottery::check_rounded;
use mnw_core::oracle::{brute_mnw_set, enumerate_allocations};
use mnw_core::{fractional_mnw, utilities, Execution};

const SHAPES: [(usize, usize); 8] = [(1, 1), (1, 3), (2, 1), (2, 2), (2, 3), (3, 2), (3, 3), (2, 4)];

#[test]
fn mnw_certificate_matches_definition() {
    for (n, m) in SHAPES {
        sweep_profiles(Execution::Parallel, n, m, |inst| {
            if inst.num_valued_goods() == 0 {
                return;
            }
            let set = brute_mnw_set(&inst).unwrap();
            let profile = utilities(&inst, &set[0]).unwrap().profile();
            for a in enumerate_allocations(&inst).unwrap() {
                let member = set.contains(&a);
                let certified = is_mnw(&inst, &a).unwrap().holds();
                assert_eq!(member, certified, "{:?} / {:?}", inst.rows(), a.owners());
                let same_profile = utilities(&inst, &a).unwrap().profile() == profile;
                assert_eq!(member, same_profile, "{:?} / {:?}", inst.rows(), a.owners());
            }
        });
    }
}

#[test]
fn rounded_allocations_are_exactly_the_mnw_set() {
    for (n, m) in SHAPES {
        sweep_profiles(Execution::Parallel, n, m, |inst| {
            let frac = fractional_mnw(&inst).allocation;
            let mut rounded: Vec<_> = enumerate_allocations(&inst)
                .unwrap()
                .filter(|a| check_rounded(&inst, &frac, a).unwrap().holds())
                .collect();
            let profiles: Vec<_> = rounded.iter().map(|a| utilities(&inst, a).unwrap().profile()).collect();
            assert!(profiles.windows(2).all(|w| w[0] == w[1]), "{:?}", inst.rows());
            if inst.num_valued_goods() > 0 {
                let mut set = brute_mnw_set(&inst).unwrap();
                set.sort();
                rounded.sort();
                assert_eq!(rounded, set, "{:?}", inst.rows());
            }
        });
    }
}
