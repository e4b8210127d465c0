use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::{Arrow, Error, Result};

/// A deterministic source of arrows indexed by `(site, level)`, levels
/// starting at 1.
///
/// Implementations must be pure: querying the same `(site, level)` twice
/// yields the same arrow. Every level `>= 1` at every site must be defined.
pub trait ArrowSystem {
    fn arrow(&self, site: i64, level: u64) -> Arrow;
}

impl<S: ArrowSystem + ?Sized> ArrowSystem for &S {
    fn arrow(&self, site: i64, level: u64) -> Arrow {
        (**self).arrow(site, level)
    }
}

impl<S: ArrowSystem + ?Sized> ArrowSystem for Box<S> {
    fn arrow(&self, site: i64, level: u64) -> Arrow {
        (**self).arrow(site, level)
    }
}

impl<S: ArrowSystem + ?Sized> ArrowSystem for alloc::sync::Arc<S> {
    fn arrow(&self, site: i64, level: u64) -> Arrow {
        (**self).arrow(site, level)
    }
}

/// The same arrow everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstantSystem(pub Arrow);

impl ConstantSystem {
    pub fn all_right() -> Self {
        ConstantSystem(Arrow::Right)
    }

    pub fn all_left() -> Self {
        ConstantSystem(Arrow::Left)
    }
}

impl ArrowSystem for ConstantSystem {
    fn arrow(&self, _site: i64, _level: u64) -> Arrow {
        self.0
    }
}

/// Arrows given by a closure of `(site, level)`.
#[derive(Clone)]
pub struct RuleSystem<F>(pub F);

impl<F: Fn(i64, u64) -> Arrow> ArrowSystem for RuleSystem<F> {
    fn arrow(&self, site: i64, level: u64) -> Arrow {
        (self.0)(site, level)
    }
}

/// Finite stacks per site, continued above their tops by a fill arrow.
///
/// The fill is the per-site override when one is set, otherwise
/// `default_fill`. Sites without a stack consist of fill only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplicitSystem {
    stacks: BTreeMap<i64, Vec<Arrow>>,
    site_fill: BTreeMap<i64, Arrow>,
    default_fill: Arrow,
}

impl ExplicitSystem {
    pub fn new(default_fill: Arrow) -> Self {
        ExplicitSystem { stacks: BTreeMap::new(), site_fill: BTreeMap::new(), default_fill }
    }

    pub fn with_stack(mut self, site: i64, arrows: impl IntoIterator<Item = Arrow>) -> Self {
        self.stacks.insert(site, arrows.into_iter().collect());
        self
    }

    /// Stack given as a bottom-to-top string of `L`/`R`.
    pub fn with_stack_str(self, site: i64, stack: &str) -> Result<Self> {
        let arrows = parse_stack(stack)?;
        Ok(self.with_stack(site, arrows))
    }

    pub fn with_site_fill(mut self, site: i64, fill: Arrow) -> Self {
        self.site_fill.insert(site, fill);
        self
    }

    /// Sets the arrow at `(site, level)`, padding the explicit stack with the
    /// site's fill where needed.
    pub fn set(&mut self, site: i64, level: u64, arrow: Arrow) {
        assert!(level >= 1, "levels start at 1");
        let fill = self.fill(site);
        let stack = self.stacks.entry(site).or_default();
        let idx = (level - 1) as usize;
        if stack.len() <= idx {
            stack.resize(idx + 1, fill);
        }
        stack[idx] = arrow;
    }

    /// Appends one arrow to the top of the explicit part at `site`.
    pub fn push(&mut self, site: i64, arrow: Arrow) {
        self.stacks.entry(site).or_default().push(arrow);
    }

    pub fn fill(&self, site: i64) -> Arrow {
        self.site_fill.get(&site).copied().unwrap_or(self.default_fill)
    }

    pub fn default_fill(&self) -> Arrow {
        self.default_fill
    }

    pub fn stacks(&self) -> &BTreeMap<i64, Vec<Arrow>> {
        &self.stacks
    }

    pub fn stack(&self, site: i64) -> &[Arrow] {
        self.stacks.get(&site).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Largest explicit stack height.
    pub fn explicit_height(&self) -> u64 {
        self.stacks.values().map(|s| s.len() as u64).max().unwrap_or(0)
    }
}

impl ArrowSystem for ExplicitSystem {
    fn arrow(&self, site: i64, level: u64) -> Arrow {
        debug_assert!(level >= 1);
        self.stacks
            .get(&site)
            .and_then(|s| s.get(level as usize - 1))
            .copied()
            .unwrap_or_else(|| self.fill(site))
    }
}

pub(crate) fn parse_stack(stack: &str) -> Result<Vec<Arrow>> {
    stack
        .chars()
        .enumerate()
        .map(|(i, c)| {
            Arrow::from_char(c).ok_or_else(|| {
                Error::Parameter(alloc::format!("stack character {c:?} at position {i} is not L or R"))
            })
        })
        .collect()
}

/// Reflection about 0: `mirrored(j, r) = flip(inner(-j, r))`.
#[derive(Debug, Clone, Copy)]
pub struct Mirrored<S>(pub S);

impl<S: ArrowSystem> ArrowSystem for Mirrored<S> {
    fn arrow(&self, site: i64, level: u64) -> Arrow {
        self.0.arrow(-site, level).flip()
    }
}

pub fn mirror_system<S: ArrowSystem>(system: S) -> Mirrored<S> {
    Mirrored(system)
}

/// The system with every arrow at the origin replaced by a right arrow.
///
/// Arrows at negative sites are kept; the transformed walk never reaches them.
#[derive(Debug, Clone, Copy)]
pub struct ZeroRight<S>(pub S);

impl<S: ArrowSystem> ArrowSystem for ZeroRight<S> {
    fn arrow(&self, site: i64, level: u64) -> Arrow {
        if site == 0 {
            Arrow::Right
        } else {
            self.0.arrow(site, level)
        }
    }
}

pub fn zero_right_transform<S: ArrowSystem>(system: S) -> ZeroRight<S> {
    ZeroRight(system)
}

/// Left/right counts among the first `r` arrows of one stack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StackCounts {
    pub left: u64,
    pub right: u64,
}

pub fn stack_counts<S: ArrowSystem + ?Sized>(system: &S, site: i64, r: u64) -> StackCounts {
    let left = (1..=r).filter(|&level| system.arrow(site, level).is_left()).count() as u64;
    StackCounts { left, right: r - left }
}

/// Finite region of `Z x N` over which relations are checked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    pub sites: RangeInclusive<i64>,
    pub max_level: u64,
}

impl Window {
    pub fn new(sites: RangeInclusive<i64>, max_level: u64) -> Self {
        Window { sites, max_level }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationMode {
    /// Every prefix of every stack of the left system holds at least as many
    /// left arrows as the same prefix of the right system.
    Preceq,
    /// Every right arrow of the left system is a right arrow of the right system.
    Trileq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RelationCheck {
    pub holds: bool,
    /// First violating `(site, level)` in site-major order.
    pub witness: Option<(i64, u64)>,
}

/// Decides `left ⪯ right` or `left ⊴ right` restricted to `window`.
pub fn check_relation<L, R>(left: &L, right: &R, window: &Window, mode: RelationMode) -> RelationCheck
where
    L: ArrowSystem + ?Sized,
    R: ArrowSystem + ?Sized,
{
    for site in window.sites.clone() {
        let (mut left_lefts, mut right_lefts) = (0u64, 0u64);
        for level in 1..=window.max_level {
            let (a, b) = (left.arrow(site, level), right.arrow(site, level));
            let violated = match mode {
                RelationMode::Trileq => a.is_right() && b.is_left(),
                RelationMode::Preceq => {
                    left_lefts += a.is_left() as u64;
                    right_lefts += b.is_left() as u64;
                    left_lefts < right_lefts
                }
            };
            if violated {
                return RelationCheck { holds: false, witness: Some((site, level)) };
            }
        }
    }
    RelationCheck { holds: true, witness: None }
}
