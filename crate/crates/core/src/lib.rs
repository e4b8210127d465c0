//! Arrow systems on `Z x N` and the walks they generate.
//!
//! An arrow system places an infinite stack of left/right arrows above every
//! integer site. Its walk starts at 0 and, on its `k`-th visit to a site,
//! steps in the direction of the `k`-th arrow of that site's stack. Two
//! systems can be compared by prefix counts of left arrows ([`RelationMode::Preceq`])
//! or arrow by arrow ([`RelationMode::Trileq`]); the comparison forces a family
//! of finite-time relations between the two walks, which [`verifier`] checks.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, campaigns and the
//! command-line driver live in the `arrowwalk-lab` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod arrow;
pub mod counterexamples;
pub mod couplings;
mod error;
pub mod identities;
mod occupation;
mod paths;
mod system;
pub mod verifier;
mod walk;

pub use arrow::Arrow;
pub use error::Error;
pub use occupation::{occupation, LocalTimeTable};
pub use paths::{forced_stacks, paths_admit_preceq, PathOrder};
pub use system::{
    check_relation, mirror_system, stack_counts, zero_right_transform, ArrowSystem,
    ConstantSystem, ExplicitSystem, Mirrored, RelationCheck, RelationMode, RuleSystem,
    StackCounts, Window, ZeroRight,
};
pub use walk::{run_walk, SiteCounts, Trajectory};

pub type Result<T, E = Error> = core::result::Result<T, E>;
