//! Random arrow systems built from shared uniforms so that chosen pairs are
//! ordered surely.
//!
//! * [`sample_system`]: one uniform per arrow; pointwise ordered
//!   environments give `⊴`-ordered systems.
//! * [`couple_block_stacks`]: block permutations of one environment, ordered
//!   by favourable swaps, give `⪯`-ordered systems.
//! * [`chain_glue`]: the same for blocks of any size up to
//!   [`MAX_SWAP_BLOCK`], by chaining single swaps.
//! * [`envelope_walk`]: a self-interacting walk dominated arrow by arrow by
//!   an excited walk.

mod block;
mod chain;
mod env;
mod envelope;
mod field;
mod stacks;

pub use block::{
    couple_block_stacks, draw_stack, pair_swap_block, pair_swap_interval, sample_system, BlockDraw,
    BlockStackSystem, SampledSystem,
};
pub use chain::{chain_glue, ChainEnd, SwapChainCoupling};
pub use env::{
    env_order, favourable_swap_plan, sorted_env, support_window, BlockPartition, CookieEnvironment, OrderReport,
    PartitionSpec, MAX_SWAP_BLOCK,
};
pub use envelope::{
    envelope_walk, Classification, Clamped, DriftContext, DriftLaw, Envelope, EnvelopeRun, EnvelopeSystem, Orrw,
};
pub use field::{StreamTag, UniformField};
pub use stacks::{conditional_stack_pmf, poisson_binomial, stack_chain, Stack, MAX_STACK};
