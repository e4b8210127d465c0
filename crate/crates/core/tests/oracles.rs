use std::collections::{BTreeMap, HashMap};

use arrowwalk::couplings::{sample_system, CookieEnvironment, StreamTag, UniformField};
use arrowwalk::{
    forced_stacks, paths_admit_preceq, run_walk, stack_counts, zero_right_transform, Arrow, ArrowSystem,
    ExplicitSystem,
};
use proptest::prelude::*;

fn all_paths(steps: usize) -> Vec<Vec<i64>> {
    (0u32..1 << steps)
        .map(|mask| {
            let mut p = vec![0i64];
            for i in 0..steps {
                let last = *p.last().unwrap();
                p.push(if mask >> i & 1 == 1 { last + 1 } else { last - 1 });
            }
            p
        })
        .collect()
}

/// Is there any completion of the two forced prefixes up to `height` with
/// the prefix left-count inequality at every level?
fn site_admits(left: &[Arrow], right: &[Arrow], height: usize) -> bool {
    let free_l = height - left.len();
    let free_r = height - right.len();
    for ml in 0u32..1 << free_l {
        for mr in 0u32..1 << free_r {
            let fill = |forced: &[Arrow], mask: u32| -> Vec<Arrow> {
                let mut s = forced.to_vec();
                s.extend((0..height - forced.len()).map(|i| if mask >> i & 1 == 1 { Arrow::Right } else { Arrow::Left }));
                s
            };
            let (a, b) = (fill(left, ml), fill(right, mr));
            let (mut la, mut lb) = (0, 0);
            let ok = a.iter().zip(&b).all(|(x, y)| {
                la += x.is_left() as u32;
                lb += y.is_left() as u32;
                la >= lb
            });
            if ok {
                return true;
            }
        }
    }
    false
}

fn brute_force(left: &[i64], right: &[i64], height: usize) -> bool {
    let fl = forced_stacks(left).unwrap();
    let fr = forced_stacks(right).unwrap();
    let sites: std::collections::BTreeSet<i64> = fl.keys().chain(fr.keys()).copied().collect();
    let empty = Vec::new();
    sites.into_iter().all(|x| site_admits(fl.get(&x).unwrap_or(&empty), fr.get(&x).unwrap_or(&empty), height))
}

#[test]
fn path_order_matches_exhaustive_completion() {
    for steps in 0..=6 {
        let paths = all_paths(steps);
        for l in &paths {
            for r in &paths {
                let fast = paths_admit_preceq(l, r).unwrap().admits;
                assert_eq!(fast, brute_force(l, r, steps.max(1)), "{l:?} {r:?}");
            }
        }
    }
}

#[test]
fn path_order_matches_on_length_eight() {
    let paths = all_paths(8);
    // every 7th left path against every 5th right path keeps the run short
    for l in paths.iter().step_by(7) {
        for r in paths.iter().step_by(5) {
            assert_eq!(paths_admit_preceq(l, r).unwrap().admits, brute_force(l, r, 8), "{l:?} {r:?}");
        }
    }
}

#[test]
fn sampled_stack_counts_match_recount() {
    let env = CookieEnvironment::homogeneous(&[0.9, 0.2, 0.7]).unwrap();
    let sys = sample_system(&env, UniformField::new(7), StreamTag(0));
    let counts = stack_counts(&sys, 0, 100);
    let left = (1..=100).filter(|&k| sys.arrow(0, k) == Arrow::Left).count() as u64;
    assert_eq!((counts.left, counts.right), (left, 100 - left));
}

// replay with a hash map of visit counts, independent of the library walker
#[test]
fn walk_matches_replay() {
    let env = CookieEnvironment::homogeneous(&[0.8, 0.75]).unwrap();
    let sys = sample_system(&env, UniformField::new(99), StreamTag(2));
    let traj = run_walk(&sys, 1000);
    let mut visits: HashMap<i64, u64> = HashMap::new();
    let mut x = 0i64;
    *visits.entry(0).or_default() += 1;
    for n in 0..1000 {
        assert_eq!(traj.position(n), x);
        let k = visits[&x];
        let u = UniformField::new(99).value(StreamTag(2), x, k);
        x += if u < env.prob(x, k) { 1 } else { -1 };
        *visits.entry(x).or_default() += 1;
    }
    assert_eq!(traj.last(), x);
    assert_eq!(run_walk(&sys, 1000), traj);
}

fn arb_system() -> impl Strategy<Value = ExplicitSystem> {
    (
        proptest::collection::btree_map(-10i64..=10, proptest::collection::vec(any::<bool>(), 0..30), 0..21),
        any::<bool>(),
    )
        .prop_map(|(stacks, fill): (BTreeMap<i64, Vec<bool>>, bool)| {
            let fill = if fill { Arrow::Right } else { Arrow::Left };
            stacks.into_iter().fold(ExplicitSystem::new(fill), |s, (x, bits)| {
                s.with_stack(x, bits.into_iter().map(|b| if b { Arrow::Right } else { Arrow::Left }))
            })
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn zero_right_walk_stays_nonnegative(sys in arb_system()) {
        let traj = run_walk(&zero_right_transform(&sys), 1000);
        prop_assert!(traj.positions().iter().all(|&x| x >= 0));
    }
}
