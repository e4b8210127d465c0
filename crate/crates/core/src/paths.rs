use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::walk::validate_path;
use crate::{Arrow, ExplicitSystem, Result};

/// Arrows a path forces at each site: the `k`-th departure from `x`
/// fixes the arrow at level `k` of `x`.
pub fn forced_stacks(path: &[i64]) -> Result<BTreeMap<i64, Vec<Arrow>>> {
    validate_path(path)?;
    let mut stacks: BTreeMap<i64, Vec<Arrow>> = BTreeMap::new();
    for w in path.windows(2) {
        let arrow = if w[1] > w[0] { Arrow::Right } else { Arrow::Left };
        stacks.entry(w[0]).or_default().push(arrow);
    }
    Ok(stacks)
}

/// Outcome of [`paths_admit_preceq`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathOrder {
    pub admits: bool,
    /// First `(site, level)` where the maximal-slack completion breaks the
    /// prefix inequality.
    pub witness: Option<(i64, u64)>,
    /// Left system: forced prefix, then left arrows.
    pub left: ExplicitSystem,
    /// Right system: forced prefix, then right arrows.
    pub right: ExplicitSystem,
}

/// Decides whether systems `L ⪯ R` exist whose walks begin with the given paths.
///
/// Each path forces a prefix at every site it departs from. Filling the left
/// system with left arrows and the right system with right arrows above those
/// prefixes maximizes the slack of the prefix inequality at every level, so
/// the pair exists iff this completion satisfies it. Beyond the taller forced
/// prefix the fills only widen the gap, so levels up to that height decide.
pub fn paths_admit_preceq(left_path: &[i64], right_path: &[i64]) -> Result<PathOrder> {
    let left_forced = forced_stacks(left_path)?;
    let right_forced = forced_stacks(right_path)?;

    let left = left_forced
        .iter()
        .fold(ExplicitSystem::new(Arrow::Left), |s, (&x, a)| s.with_stack(x, a.iter().copied()));
    let right = right_forced
        .iter()
        .fold(ExplicitSystem::new(Arrow::Right), |s, (&x, a)| s.with_stack(x, a.iter().copied()));

    let sites: BTreeSet<i64> = left_forced.keys().chain(right_forced.keys()).copied().collect();
    let mut witness = None;
    'sites: for &x in &sites {
        let height = left.stack(x).len().max(right.stack(x).len()) as u64;
        let (mut l_lefts, mut r_lefts) = (0u64, 0u64);
        for level in 1..=height {
            use crate::ArrowSystem;
            l_lefts += left.arrow(x, level).is_left() as u64;
            r_lefts += right.arrow(x, level).is_left() as u64;
            if l_lefts < r_lefts {
                witness = Some((x, level));
                break 'sites;
            }
        }
    }
    Ok(PathOrder { admits: witness.is_none(), witness, left, right })
}
