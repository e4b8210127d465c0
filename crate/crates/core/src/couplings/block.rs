use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::env::{block_or_single, block_probs, sorted_env, support_window, BlockPartition, CookieEnvironment};
use super::field::{StreamTag, UniformField};
use super::stacks::{conditional_stack_pmf, inverse_cdf, poisson_binomial, stack_chain, MAX_STACK};
use crate::{Arrow, ArrowSystem, Error, Result};

/// Arrow system with `ℰ(x, n) = →` iff `U(x, n) < ω(x, n)`.
///
/// Its walk is the excited random walk in `ω`. Systems sampled from
/// pointwise ordered environments with the same field and stream are
/// `⊴`-ordered.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSystem {
    env: CookieEnvironment,
    field: UniformField,
    stream: StreamTag,
}

pub fn sample_system(env: &CookieEnvironment, field: UniformField, stream: StreamTag) -> SampledSystem {
    SampledSystem { env: env.clone(), field, stream }
}

impl SampledSystem {
    pub fn env(&self) -> &CookieEnvironment {
        &self.env
    }
}

impl ArrowSystem for SampledSystem {
    fn arrow(&self, site: i64, level: u64) -> Arrow {
        if self.field.value(self.stream, site, level) < self.env.prob(site, level) {
            Arrow::Right
        } else {
            Arrow::Left
        }
    }
}

#[derive(Debug)]
struct Shared {
    sorted: CookieEnvironment,
    partition: BlockPartition,
    field: UniformField,
    stream: StreamTag,
}

/// One member of a block-stack coupled family; see [`couple_block_stacks`].
#[derive(Debug, Clone)]
pub struct BlockStackSystem {
    shared: Arc<Shared>,
    env: CookieEnvironment,
}

/// Where a block's arrows came from: the shared right-arrow count and the
/// stack chosen for one environment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockDraw {
    pub levels: Vec<u64>,
    pub rights: usize,
    pub stack: Vec<Arrow>,
}

impl BlockStackSystem {
    pub fn env(&self) -> &CookieEnvironment {
        &self.env
    }

    /// The draw for the block containing `level` at `site`.
    pub fn block_draw(&self, site: i64, level: u64) -> BlockDraw {
        let s = &self.shared;
        let levels = block_or_single(&s.partition, site, level);
        let head = levels[0];
        let pmf = poisson_binomial(&block_probs(&s.sorted, site, &levels)).expect("validated block");
        // descending, so a singleton block reads `U < ω` like `sample_system`
        let v = s.field.value(s.stream, site, head);
        let rights = inverse_cdf((0..pmf.len()).rev().map(|y| (y, pmf[y])), v);
        let stack = draw_stack(&block_probs(&self.env, site, &levels), rights, s.field.value(s.stream.derive(1), site, head));
        BlockDraw { levels, rights, stack }
    }
}

/// Stack with `y` right arrows chosen through the conditional law's inverse CDF.
pub fn draw_stack(probs: &[f64], y: usize, u: f64) -> Vec<Arrow> {
    let chain = stack_chain(probs.len(), y).expect("block size checked");
    let pmf = conditional_stack_pmf(probs, y).expect("count drawn with positive probability");
    chain[inverse_cdf(pmf.into_iter().enumerate(), u)].0.clone()
}

impl ArrowSystem for BlockStackSystem {
    fn arrow(&self, site: i64, level: u64) -> Arrow {
        let draw = self.block_draw(site, level);
        let pos = draw.levels.iter().position(|&l| l == level).expect("level in its block");
        draw.stack[pos]
    }
}

/// Checks that `b` permutes `a` within every block of `window`.
pub(crate) fn check_permutation(
    a: &CookieEnvironment,
    b: &CookieEnvironment,
    partition: &BlockPartition,
    window: &crate::Window,
) -> Result<()> {
    for x in window.sites.clone() {
        for k in 1..=window.max_level {
            let block = block_or_single(partition, x, k);
            if block[0] != k {
                continue;
            }
            let mut va = block_probs(a, x, &block);
            let mut vb = block_probs(b, x, &block);
            va.sort_by(f64::total_cmp);
            vb.sort_by(f64::total_cmp);
            if va != vb {
                return Err(Error::NotPermutation { site: x, level: k });
            }
        }
    }
    Ok(())
}

/// Couples excited walks in every environment of `perms`, each a block
/// permutation of `base`.
///
/// Per block, the number of right arrows is drawn once, from the law shared
/// by all permutations. Each environment then picks its stack among those
/// with that count by the inverse of its conditional law over the
/// `⪯`-ordered chain, driven by one shared uniform. When one environment is
/// reachable from another by favourable swaps, its conditional law puts more
/// mass on the upper end of the chain, so the systems are `⪯`-ordered surely.
/// Each system has the product law of its environment.
pub fn couple_block_stacks(
    base: &CookieEnvironment,
    partition: &BlockPartition,
    perms: &[CookieEnvironment],
    field: UniformField,
    stream: StreamTag,
) -> Result<Vec<BlockStackSystem>> {
    if partition.cap() > MAX_STACK {
        return Err(Error::Unsupported(format!("block cap {} above {MAX_STACK}", partition.cap())));
    }
    let sorted = sorted_env(base, partition);
    let mut envs: Vec<&CookieEnvironment> = perms.iter().collect();
    envs.push(base);
    let window = support_window(&envs, partition);
    for perm in perms {
        perm.validate()?;
        check_permutation(&sorted, perm, partition, &window)?;
    }
    let shared = Arc::new(Shared { sorted, partition: partition.clone(), field, stream });
    Ok(perms.iter().map(|env| BlockStackSystem { shared: shared.clone(), env: env.clone() }).collect())
}

/// Joint arrows at levels `(j, k)` from one uniform `u`, with `P(→)` equal
/// to `pj` at `j` and `pk` at `k`:
///
/// | `u` | arrows |
/// |---|---|
/// | `[0, pj pk)` | `→→` |
/// | `[pj pk, pj)` | `→←` |
/// | `[pj, pj + pk - pj pk)` | `←→` |
/// | rest | `←←` |
///
/// With `pj ≤ pk`, the outcome under `(pk, pj)` is `⪰` the outcome under
/// `(pj, pk)` for every `u`.
pub fn pair_swap_block(pj: f64, pk: f64, u: f64) -> (Arrow, Arrow) {
    use Arrow::{Left as L, Right as R};
    let both = pj * pk;
    if u < both {
        (R, R)
    } else if u < pj {
        (R, L)
    } else if u < pj + pk - both {
        (L, R)
    } else {
        (L, L)
    }
}

/// The interval of `u` on which [`pair_swap_block`] yields `outcome`.
pub fn pair_swap_interval(pj: f64, pk: f64, outcome: (Arrow, Arrow)) -> (f64, f64) {
    let both = pj * pk;
    let third = pj + pk - both;
    match (outcome.0.is_right(), outcome.1.is_right()) {
        (true, true) => (0.0, both),
        (true, false) => (both, pj),
        (false, true) => (pj, third),
        (false, false) => (third, 1.0),
    }
}
