use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::block::{pair_swap_block, pair_swap_interval};
use super::env::{
    block_or_single, block_probs, favourable_swap_plan, support_sites, support_window, BlockPartition,
    CookieEnvironment, MAX_SWAP_BLOCK,
};
use super::field::{StreamTag, UniformField};
use crate::verifier::{CoupledPair, Provenance};
use crate::{run_walk, Arrow, ArrowSystem, Error, RelationMode, Result};

/// Swaps, as positions within the block, leading from the first to the
/// second environment.
type Plan = Vec<(usize, usize)>;

#[derive(Debug)]
struct Inner {
    env: CookieEnvironment,
    partition: BlockPartition,
    field: UniformField,
    stream: StreamTag,
    /// Plans per listed block, for sites with their own law.
    special: BTreeMap<i64, Vec<Plan>>,
    /// Plans for every other site.
    generic: Vec<Plan>,
}

/// Couples the excited walks in `ω` and `ω'` where `ω'` is reached from
/// `ω` by favourable swaps within blocks.
///
/// Along the swap sequence `ω = ω_0, ω_1, ..., ω_K = ω'` every adjacent pair
/// differs by one swap and is coupled by [`pair_swap_block`]. The links are
/// glued one after another: given the arrows of `ω_i`, the uniform of link
/// `i` is redrawn on the interval that produced them, from its own stream,
/// and read under `ω_{i+1}`. Each end has the product law of its
/// environment and the ends are `⪯`-ordered surely.
#[derive(Debug, Clone)]
pub struct SwapChainCoupling {
    inner: Arc<Inner>,
}

/// One end of a [`SwapChainCoupling`].
#[derive(Debug, Clone)]
pub struct ChainEnd {
    inner: Arc<Inner>,
    last: bool,
}

pub fn chain_glue(
    env: &CookieEnvironment,
    env2: &CookieEnvironment,
    partition: &BlockPartition,
    field: UniformField,
    stream: StreamTag,
) -> Result<SwapChainCoupling> {
    env.validate()?;
    env2.validate()?;
    let window = support_window(&[env, env2], partition);
    let (special_sites, generic_site) = support_sites(&[env, env2], partition);
    let plans_at = |x: i64| -> Result<Vec<Plan>> {
        let mut plans = Vec::new();
        for block in partition.blocks(x) {
            if block.len() > MAX_SWAP_BLOCK {
                return Err(Error::Unsupported(alloc::format!("blocks larger than {MAX_SWAP_BLOCK} levels")));
            }
            let plan = favourable_swap_plan(&block_probs(env, x, block), &block_probs(env2, x, block))
                .ok_or(Error::NotSwapRelated { site: x, level: block[0] })?;
            plans.push(plan);
        }
        for k in 1..=window.max_level {
            if partition.block_of(x, k).is_none() && env.prob(x, k) != env2.prob(x, k) {
                return Err(Error::NotSwapRelated { site: x, level: k });
            }
        }
        Ok(plans)
    };
    let special = special_sites.iter().map(|&x| Ok((x, plans_at(x)?))).collect::<Result<_>>()?;
    let generic = plans_at(generic_site)?;
    Ok(SwapChainCoupling {
        inner: Arc::new(Inner { env: env.clone(), partition: partition.clone(), field, stream, special, generic }),
    })
}

impl Inner {
    fn plan(&self, site: i64, level: u64) -> Option<(&[u64], &Plan)> {
        let block = self.partition.block_of(site, level)?;
        let idx = self.partition.blocks(site).iter().position(|b| b.as_slice() == block).expect("listed block");
        let plans = self.special.get(&site).unwrap_or(&self.generic);
        Some((block, &plans[idx]))
    }

    /// Arrows of the block containing `level`, at the first and last
    /// environment of the chain.
    fn block_arrows(&self, site: i64, level: u64) -> (Vec<u64>, Vec<Arrow>, Vec<Arrow>) {
        let levels = block_or_single(&self.partition, site, level);
        let mut probs = block_probs(&self.env, site, &levels);
        let mut arrows: Vec<Arrow> = levels
            .iter()
            .zip(&probs)
            .map(|(&k, &p)| if self.field.value(self.stream, site, k) < p { Arrow::Right } else { Arrow::Left })
            .collect();
        let first = arrows.clone();
        if let Some((_, plan)) = self.plan(site, level) {
            for (i, &(j, k)) in plan.iter().enumerate() {
                let (a, b) = (probs[j], probs[k]);
                let (lo, hi) = pair_swap_interval(a, b, (arrows[j], arrows[k]));
                let v = self.field.value(self.stream.derive(i as u64 + 1), site, levels[0]);
                let u = lo + (hi - lo) * v;
                let (x, y) = pair_swap_block(b, a, u);
                arrows[j] = x;
                arrows[k] = y;
                probs.swap(j, k);
            }
        }
        (levels, first, arrows)
    }
}

impl SwapChainCoupling {
    pub fn left(&self) -> ChainEnd {
        ChainEnd { inner: self.inner.clone(), last: false }
    }

    pub fn right(&self) -> ChainEnd {
        ChainEnd { inner: self.inner.clone(), last: true }
    }

    /// Number of swaps in the block containing `level` at `site`.
    pub fn links(&self, site: i64, level: u64) -> usize {
        self.inner.plan(site, level).map_or(0, |(_, p)| p.len())
    }

    /// Arrows at the block containing `level` at `site`: levels, first end, last end.
    pub fn block_arrows(&self, site: i64, level: u64) -> (Vec<u64>, Vec<Arrow>, Vec<Arrow>) {
        self.inner.block_arrows(site, level)
    }

    pub fn walk_pair(&self, horizon: usize) -> CoupledPair {
        CoupledPair::new(
            run_walk(&self.left(), horizon),
            run_walk(&self.right(), horizon),
            RelationMode::Preceq,
            Provenance::SwapChain,
        )
        .expect("equal horizons")
    }
}

impl ArrowSystem for ChainEnd {
    fn arrow(&self, site: i64, level: u64) -> Arrow {
        let (levels, first, last) = self.inner.block_arrows(site, level);
        let pos = levels.iter().position(|&l| l == level).expect("level in its block");
        if self.last {
            last[pos]
        } else {
            first[pos]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::couplings::sample_system;
    use crate::{check_relation, Window};
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn equal_environments_give_identical_systems() {
        let env = CookieEnvironment::homogeneous(&[0.3, 0.9, 0.6]).unwrap();
        let p = BlockPartition::new(3, vec![vec![1, 2, 3]]).unwrap();
        let c = chain_glue(&env, &env, &p, UniformField::new(2), StreamTag(0)).unwrap();
        let direct = sample_system(&env, UniformField::new(2), StreamTag(0));
        for x in -5..5 {
            for k in 1..6 {
                assert_eq!(c.left().arrow(x, k), c.right().arrow(x, k));
                assert_eq!(c.left().arrow(x, k), direct.arrow(x, k));
            }
        }
    }

    #[test]
    fn unrelated_environments_rejected() {
        let p = BlockPartition::new(2, vec![vec![1, 2]]).unwrap();
        let a = CookieEnvironment::homogeneous(&[0.8, 0.3]).unwrap();
        let b = CookieEnvironment::homogeneous(&[0.3, 0.8]).unwrap();
        assert!(matches!(chain_glue(&a, &b, &p, UniformField::new(1), StreamTag(0)), Err(Error::NotSwapRelated { .. })));
        let c = CookieEnvironment::homogeneous(&[0.8, 0.3, 0.6]).unwrap();
        assert!(chain_glue(&a, &c, &p, UniformField::new(1), StreamTag(0)).is_err());
    }

    // joint law of (first end, last end) on a 2-block equals the single-uniform table
    #[test]
    fn two_block_law_matches_pair_table() {
        let (a, b) = (0.3, 0.8);
        let env = CookieEnvironment::homogeneous(&[a, b]).unwrap();
        let env2 = CookieEnvironment::homogeneous(&[b, a]).unwrap();
        let p = BlockPartition::new(2, vec![vec![1, 2]]).unwrap();
        let c = chain_glue(&env, &env2, &p, UniformField::new(8), StreamTag(0)).unwrap();
        let code = |v: &[Arrow]| v.iter().fold(0usize, |acc, x| 2 * acc + x.is_right() as usize);
        let n = 100_000i64;
        let mut chain_counts = [[0u32; 4]; 4];
        for x in 0..n {
            let (_, first, last) = c.block_arrows(x, 1);
            chain_counts[code(&first)][code(&last)] += 1;
        }
        // exact cell probabilities from interval overlaps
        let grid = 1_000_000;
        let mut exact = [[0f64; 4]; 4];
        for i in 0..grid {
            let u = (i as f64 + 0.5) / grid as f64;
            let (p, q) = (pair_swap_block(a, b, u), pair_swap_block(b, a, u));
            exact[code(&[p.0, p.1])][code(&[q.0, q.1])] += 1.0 / grid as f64;
        }
        for i in 0..4 {
            for j in 0..4 {
                let freq = chain_counts[i][j] as f64 / n as f64;
                let sd = (exact[i][j] * (1.0 - exact[i][j]) / n as f64).sqrt();
                assert!((freq - exact[i][j]).abs() <= 5.0 * sd + 1e-6, "cell {i},{j}: {freq} vs {}", exact[i][j]);
            }
        }
    }

    proptest! {
        #[test]
        fn ends_are_ordered(seed in any::<u64>(), probs in proptest::collection::vec(0.0f64..=1.0, 4)) {
            let mut sorted = probs.clone();
            sorted.sort_by(f64::total_cmp);
            let mut desc = sorted.clone();
            desc.reverse();
            let p = BlockPartition::new(4, vec![vec![1, 2, 3, 4]]).unwrap();
            let c = chain_glue(
                &CookieEnvironment::homogeneous(&sorted).unwrap(),
                &CookieEnvironment::homogeneous(&desc).unwrap(),
                &p,
                UniformField::new(seed),
                StreamTag(0),
            ).unwrap();
            prop_assert!(check_relation(&c.left(), &c.right(), &Window::new(-20..=20, 6), RelationMode::Preceq).holds);
            for x in -20..=20 {
                let (_, first, last) = c.block_arrows(x, 1);
                prop_assert_eq!(first.iter().filter(|a| a.is_right()).count(), last.iter().filter(|a| a.is_right()).count());
            }
        }
    }
}
