use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Window};

fn half() -> f64 {
    0.5
}

/// Right-step probabilities `ω(x, k)` for the `k`-th visit to `x`.
///
/// Sites listed in `sites` use their own list, all others use `default`;
/// levels beyond the list read `tail`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CookieEnvironment {
    #[serde(default)]
    pub sites: BTreeMap<i64, Vec<f64>>,
    #[serde(default)]
    pub default: Vec<f64>,
    #[serde(default = "half")]
    pub tail: f64,
}

impl CookieEnvironment {
    pub fn new(sites: BTreeMap<i64, Vec<f64>>, default: Vec<f64>, tail: f64) -> Result<Self> {
        let env = CookieEnvironment { sites, default, tail };
        env.validate()?;
        Ok(env)
    }

    /// `ω ≡ p`.
    pub fn constant(p: f64) -> Result<Self> {
        Self::new(BTreeMap::new(), Vec::new(), p)
    }

    /// `M` cookies of strength `p` at every site, then `1/2`.
    pub fn homogeneous(cookies: &[f64]) -> Result<Self> {
        Self::new(BTreeMap::new(), cookies.to_vec(), 0.5)
    }

    pub fn with_site(mut self, site: i64, probs: Vec<f64>) -> Result<Self> {
        self.sites.insert(site, probs);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |v: f64| !(0.0..=1.0).contains(&v);
        if bad(self.tail) {
            return Err(Error::InvalidProbability { site: i64::MIN, level: u64::MAX, value: self.tail });
        }
        if let Some(i) = self.default.iter().position(|&v| bad(v)) {
            return Err(Error::InvalidProbability { site: i64::MIN, level: i as u64 + 1, value: self.default[i] });
        }
        for (&site, probs) in &self.sites {
            if let Some(i) = probs.iter().position(|&v| bad(v)) {
                return Err(Error::InvalidProbability { site, level: i as u64 + 1, value: probs[i] });
            }
        }
        Ok(())
    }

    pub fn list(&self, site: i64) -> &[f64] {
        self.sites.get(&site).unwrap_or(&self.default)
    }

    pub fn prob(&self, site: i64, level: u64) -> f64 {
        debug_assert!(level >= 1);
        self.list(site).get(level as usize - 1).copied().unwrap_or(self.tail)
    }

    /// Largest explicit list length over all sites.
    pub fn depth(&self) -> u64 {
        self.sites.values().map(Vec::len).chain([self.default.len()]).max().unwrap_or(0) as u64
    }
}

/// Raw form of [`BlockPartition`], as read from files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionSpec {
    pub cap: usize,
    #[serde(default)]
    pub blocks: Vec<Vec<u64>>,
    #[serde(default)]
    pub overrides: BTreeMap<i64, Vec<Vec<u64>>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Layout {
    blocks: Vec<Vec<u64>>,
    /// level -> index into `blocks`
    index: BTreeMap<u64, usize>,
}

impl Layout {
    fn new(mut blocks: Vec<Vec<u64>>, cap: usize, site: Option<i64>) -> Result<Self> {
        let at = |site: Option<i64>| site.map_or_else(|| "default blocks".into(), |s| format!("site {s}"));
        let mut index = BTreeMap::new();
        for (i, block) in blocks.iter_mut().enumerate() {
            block.sort_unstable();
            if block.is_empty() || block.len() > cap {
                return Err(Error::PartitionMismatch(format!("{}: block of size {} with cap {cap}", at(site), block.len())));
            }
            for &level in block.iter() {
                if level == 0 || index.insert(level, i).is_some() {
                    return Err(Error::PartitionMismatch(format!("{}: level {level} repeated or zero", at(site))));
                }
            }
        }
        Ok(Layout { blocks, index })
    }
}

/// Per-site partition of the levels into finite blocks.
///
/// Levels not covered by any listed block form singleton blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PartitionSpec", into = "PartitionSpec")]
pub struct BlockPartition {
    cap: usize,
    default: Layout,
    overrides: BTreeMap<i64, Layout>,
}

impl TryFrom<PartitionSpec> for BlockPartition {
    type Error = Error;

    fn try_from(spec: PartitionSpec) -> Result<Self> {
        if spec.cap == 0 {
            return Err(Error::PartitionMismatch("cap must be positive".into()));
        }
        let default = Layout::new(spec.blocks, spec.cap, None)?;
        let overrides = spec
            .overrides
            .into_iter()
            .map(|(site, blocks)| Ok((site, Layout::new(blocks, spec.cap, Some(site))?)))
            .collect::<Result<_>>()?;
        Ok(BlockPartition { cap: spec.cap, default, overrides })
    }
}

impl From<BlockPartition> for PartitionSpec {
    fn from(p: BlockPartition) -> Self {
        PartitionSpec {
            cap: p.cap,
            blocks: p.default.blocks,
            overrides: p.overrides.into_iter().map(|(s, l)| (s, l.blocks)).collect(),
        }
    }
}

impl BlockPartition {
    pub fn new(cap: usize, blocks: Vec<Vec<u64>>) -> Result<Self> {
        PartitionSpec { cap, blocks, overrides: BTreeMap::new() }.try_into()
    }

    /// Every level its own block.
    pub fn singletons() -> Self {
        Self::new(1, Vec::new()).expect("empty partition is valid")
    }

    /// Consecutive blocks of `size` covering levels `1..=depth` (the last
    /// one possibly shorter).
    pub fn consecutive(size: usize, depth: u64) -> Result<Self> {
        let size = size.max(1);
        let levels: Vec<u64> = (1..=depth).collect();
        Self::new(size, levels.chunks(size).map(<[u64]>::to_vec).collect())
    }

    pub fn with_override(mut self, site: i64, blocks: Vec<Vec<u64>>) -> Result<Self> {
        self.overrides.insert(site, Layout::new(blocks, self.cap, Some(site))?);
        Ok(self)
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    fn layout(&self, site: i64) -> &Layout {
        self.overrides.get(&site).unwrap_or(&self.default)
    }

    /// Listed blocks at `site`, each sorted.
    pub fn blocks(&self, site: i64) -> &[Vec<u64>] {
        &self.layout(site).blocks
    }

    pub fn default_blocks(&self) -> &[Vec<u64>] {
        &self.default.blocks
    }

    /// Block containing `level` at `site`; `None` means a singleton.
    pub fn block_of(&self, site: i64, level: u64) -> Option<&[u64]> {
        let layout = self.layout(site);
        layout.index.get(&level).map(|&i| layout.blocks[i].as_slice())
    }

    pub fn override_sites(&self) -> impl Iterator<Item = i64> + '_ {
        self.overrides.keys().copied()
    }

    /// Largest level covered by a listed block.
    pub fn depth(&self) -> u64 {
        self.overrides
            .values()
            .chain([&self.default])
            .filter_map(|l| l.index.keys().next_back().copied())
            .max()
            .unwrap_or(0)
    }
}

/// Sites whose law differs from the generic site, plus one generic
/// representative that stands for every other site.
pub(crate) fn support_sites(envs: &[&CookieEnvironment], partition: &BlockPartition) -> (Vec<i64>, i64) {
    let special: BTreeSet<i64> =
        envs.iter().flat_map(|e| e.sites.keys().copied()).chain(partition.override_sites()).collect();
    let generic = special.last().map_or(0, |&m| m.saturating_add(1));
    (special.into_iter().collect(), generic)
}

/// Within every block, the probabilities sorted into nondecreasing order.
pub fn sorted_env(env: &CookieEnvironment, partition: &BlockPartition) -> CookieEnvironment {
    let sort_list = |list: &[f64], blocks: &[Vec<u64>]| {
        let depth = blocks.iter().flatten().copied().max().unwrap_or(0).max(list.len() as u64);
        let mut out: Vec<f64> = (1..=depth).map(|k| list.get(k as usize - 1).copied().unwrap_or(env.tail)).collect();
        for block in blocks {
            let mut vals: Vec<f64> = block.iter().map(|&k| out[k as usize - 1]).collect();
            vals.sort_by(f64::total_cmp);
            for (&k, v) in block.iter().zip(vals) {
                out[k as usize - 1] = v;
            }
        }
        out
    };
    let (special, _) = support_sites(&[env], partition);
    let sites = special.into_iter().map(|x| (x, sort_list(env.list(x), partition.blocks(x)))).collect();
    CookieEnvironment { sites, default: sort_list(&env.default, partition.default_blocks()), tail: env.tail }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OrderReport {
    /// `ω_A ≤ ω_B` at every `(site, level)` of the window.
    pub pointwise_leq: bool,
    /// `ω_B` permutes `ω_A` within every block of the window.
    pub is_a_permutation: bool,
    /// `ω_B` is reachable from `ω_A` by favourable swaps within every block.
    pub preceq_a: bool,
}

/// Favourable swaps `(j, k)` (positions within a block, `j < k`) turning
/// `from` into `to`, found by breadth-first search. A swap is favourable
/// when `v[j] < v[k]`: the larger probability moves to the lower level.
pub fn favourable_swap_plan(from: &[f64], to: &[f64]) -> Option<Vec<(usize, usize)>> {
    let key = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<u64>>();
    let target = key(to);
    let mut sorted_from = key(from);
    let mut sorted_to = target.clone();
    sorted_from.sort_unstable();
    sorted_to.sort_unstable();
    if sorted_from != sorted_to {
        return None;
    }
    let mut parent: BTreeMap<Vec<u64>, Option<(Vec<u64>, (usize, usize))>> = BTreeMap::new();
    let start = key(from);
    parent.insert(start.clone(), None);
    let mut queue = VecDeque::from([start]);
    while let Some(state) = queue.pop_front() {
        if state == target {
            let mut plan = Vec::new();
            let mut cur = state;
            while let Some(Some((prev, swap))) = parent.get(&cur).cloned() {
                plan.push(swap);
                cur = prev;
            }
            plan.reverse();
            return Some(plan);
        }
        for j in 0..state.len() {
            for k in j + 1..state.len() {
                if f64::from_bits(state[j]) < f64::from_bits(state[k]) {
                    let mut next = state.clone();
                    next.swap(j, k);
                    if !parent.contains_key(&next) {
                        parent.insert(next.clone(), Some((state.clone(), (j, k))));
                        queue.push_back(next);
                    }
                }
            }
        }
    }
    None
}

/// Largest block handled by the swap search.
pub const MAX_SWAP_BLOCK: usize = 8;

/// Compares two environments on `window` under `partition`.
///
/// Blocks must lie entirely inside or entirely above `window.max_level`.
pub fn env_order(
    a: &CookieEnvironment,
    b: &CookieEnvironment,
    partition: &BlockPartition,
    window: &Window,
) -> Result<OrderReport> {
    let mut report = OrderReport { pointwise_leq: true, is_a_permutation: true, preceq_a: true };
    for x in window.sites.clone() {
        for k in 1..=window.max_level {
            if a.prob(x, k) > b.prob(x, k) {
                report.pointwise_leq = false;
            }
        }
        let mut covered = BTreeSet::new();
        for block in partition.blocks(x) {
            let inside = block.iter().filter(|&&k| k <= window.max_level).count();
            if inside == 0 {
                continue;
            }
            if inside < block.len() {
                return Err(Error::PartitionMismatch(format!(
                    "site {x}: block {block:?} crosses level {}",
                    window.max_level
                )));
            }
            if block.len() > MAX_SWAP_BLOCK {
                return Err(Error::Unsupported(format!("blocks larger than {MAX_SWAP_BLOCK} levels")));
            }
            covered.extend(block.iter().copied());
            let va: Vec<f64> = block.iter().map(|&k| a.prob(x, k)).collect();
            let vb: Vec<f64> = block.iter().map(|&k| b.prob(x, k)).collect();
            let mut sa = va.clone();
            let mut sb = vb.clone();
            sa.sort_by(f64::total_cmp);
            sb.sort_by(f64::total_cmp);
            if sa != sb {
                report.is_a_permutation = false;
                report.preceq_a = false;
            } else if favourable_swap_plan(&va, &vb).is_none() {
                report.preceq_a = false;
            }
        }
        for k in (1..=window.max_level).filter(|k| !covered.contains(k)) {
            if a.prob(x, k) != b.prob(x, k) {
                report.is_a_permutation = false;
                report.preceq_a = false;
            }
        }
    }
    Ok(report)
}

/// Window covering every site and level on which `envs` or `partition`
/// differ from the generic law, plus one generic site and one tail level.
pub fn support_window(envs: &[&CookieEnvironment], partition: &BlockPartition) -> Window {
    let (special, generic) = support_sites(envs, partition);
    let lo = special.first().copied().unwrap_or(generic).min(generic);
    let depth = envs.iter().map(|e| e.depth()).max().unwrap_or(0).max(partition.depth());
    Window::new(lo..=generic, depth + 1)
}

/// Probabilities of one block, in level order.
pub(crate) fn block_probs(env: &CookieEnvironment, site: i64, block: &[u64]) -> Vec<f64> {
    block.iter().map(|&k| env.prob(site, k)).collect()
}

/// Positions of the levels of a block, or a singleton.
pub(crate) fn block_or_single(partition: &BlockPartition, site: i64, level: u64) -> Vec<u64> {
    partition.block_of(site, level).map_or_else(|| vec![level], <[u64]>::to_vec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lookup_and_tail() {
        let env = CookieEnvironment::homogeneous(&[0.9, 0.8]).unwrap().with_site(3, vec![0.1]).unwrap();
        assert_eq!(env.prob(0, 1), 0.9);
        assert_eq!(env.prob(0, 3), 0.5);
        assert_eq!(env.prob(3, 1), 0.1);
        assert_eq!(env.prob(3, 2), 0.5);
        assert!(CookieEnvironment::constant(1.5).is_err());
        assert!(CookieEnvironment::homogeneous(&[0.2, -0.1]).is_err());
    }

    #[test]
    fn partition_validation() {
        assert!(BlockPartition::new(2, vec![vec![1, 2], vec![3]]).is_ok());
        assert!(BlockPartition::new(2, vec![vec![1, 2, 3]]).is_err());
        assert!(BlockPartition::new(3, vec![vec![1, 2], vec![2, 3]]).is_err());
        assert!(BlockPartition::new(3, vec![vec![0]]).is_err());
        let p = BlockPartition::new(3, vec![vec![4, 1]]).unwrap();
        assert_eq!(p.block_of(7, 4), Some(&[1u64, 4][..]));
        assert_eq!(p.block_of(7, 2), None);
    }

    #[test]
    fn sorting_a_block() {
        let env = CookieEnvironment::homogeneous(&[0.7, 0.2, 0.5]).unwrap();
        let p = BlockPartition::new(3, vec![vec![1, 2, 3]]).unwrap();
        assert_eq!(sorted_env(&env, &p).default, vec![0.2, 0.5, 0.7]);
        let sorted = sorted_env(&env, &p);
        assert_eq!(sorted_env(&sorted, &p), sorted);
    }

    #[test]
    fn sorting_materializes_tail_and_overrides() {
        let env = CookieEnvironment::homogeneous(&[0.9]).unwrap();
        let p = BlockPartition::new(2, vec![vec![1, 2]]).unwrap().with_override(4, vec![vec![1], vec![2, 3]]).unwrap();
        let s = sorted_env(&env, &p);
        assert_eq!(s.default, vec![0.5, 0.9]);
        assert_eq!(s.sites[&4], vec![0.9, 0.5, 0.5]);
    }

    #[test]
    fn swap_order_on_a_pair() {
        let p = BlockPartition::new(2, vec![vec![1, 2]]).unwrap();
        let a = CookieEnvironment::homogeneous(&[0.3, 0.8]).unwrap();
        let b = CookieEnvironment::homogeneous(&[0.8, 0.3]).unwrap();
        let w = Window::new(-2..=2, 3);
        let ab = env_order(&a, &b, &p, &w).unwrap();
        assert!(ab.is_a_permutation && ab.preceq_a && !ab.pointwise_leq);
        let ba = env_order(&b, &a, &p, &w).unwrap();
        assert!(ba.is_a_permutation && !ba.preceq_a);
        let aa = env_order(&a, &a, &p, &w).unwrap();
        assert!(aa.pointwise_leq && aa.is_a_permutation && aa.preceq_a);
    }

    #[test]
    fn straddling_block_rejected() {
        let p = BlockPartition::new(2, vec![vec![1, 2]]).unwrap();
        let a = CookieEnvironment::constant(0.5).unwrap();
        assert!(matches!(env_order(&a, &a, &p, &Window::new(0..=0, 1)), Err(Error::PartitionMismatch(_))));
    }

    #[test]
    fn swap_plans() {
        assert_eq!(favourable_swap_plan(&[0.2, 0.5, 0.7], &[0.7, 0.5, 0.2]).unwrap().len(), 1);
        assert_eq!(favourable_swap_plan(&[0.2, 0.5, 0.7], &[0.2, 0.5, 0.7]).unwrap().len(), 0);
        assert!(favourable_swap_plan(&[0.7, 0.5, 0.2], &[0.2, 0.5, 0.7]).is_none());
        assert!(favourable_swap_plan(&[0.7, 0.5], &[0.7, 0.6]).is_none());
        let plan = favourable_swap_plan(&[0.1, 0.2, 0.3, 0.4], &[0.3, 0.4, 0.1, 0.2]).unwrap();
        let mut v = [0.1, 0.2, 0.3, 0.4];
        for (j, k) in plan {
            assert!(v[j] < v[k]);
            v.swap(j, k);
        }
        assert_eq!(v, [0.3, 0.4, 0.1, 0.2]);
    }

    proptest! {
        #[test]
        fn sorted_env_is_below_every_permutation(
            probs in proptest::collection::vec(0.0f64..=1.0, 1..9),
            size in 1usize..4,
        ) {
            let env = CookieEnvironment::homogeneous(&probs).unwrap();
            let p = BlockPartition::consecutive(size, probs.len() as u64).unwrap();
            let s = sorted_env(&env, &p);
            let report = env_order(&s, &env, &p, &support_window(&[&env, &s], &p)).unwrap();
            prop_assert!(report.is_a_permutation && report.preceq_a);
            for block in p.blocks(0) {
                let v = block_probs(&s, 0, block);
                prop_assert!(v.windows(2).all(|w| w[0] <= w[1]));
            }
        }
    }
}
