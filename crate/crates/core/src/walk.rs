use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Arrow, ArrowSystem, Error, Result};

/// Per-site counters over a contiguous, growable range of sites.
///
/// Sites outside the stored range read as 0.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SiteCounts {
    /// Site stored at index 0.
    lo: i64,
    counts: Vec<u64>,
}

impl SiteCounts {
    pub fn new() -> Self {
        Self::default()
    }

    /// Preallocates the range `-radius..=radius`.
    pub fn with_radius(radius: usize) -> Self {
        SiteCounts { lo: -(radius as i64), counts: vec![0; 2 * radius + 1] }
    }

    pub fn get(&self, site: i64) -> u64 {
        let idx = site - self.lo;
        if idx < 0 {
            return 0;
        }
        self.counts.get(idx as usize).copied().unwrap_or(0)
    }

    fn slot(&mut self, site: i64) -> &mut u64 {
        if self.counts.is_empty() {
            self.lo = site;
        }
        if site < self.lo {
            let grow = (self.lo - site) as usize;
            let mut counts = vec![0; grow + self.counts.len()];
            counts[grow..].copy_from_slice(&self.counts);
            self.counts = counts;
            self.lo = site;
        }
        let idx = (site - self.lo) as usize;
        if idx >= self.counts.len() {
            self.counts.resize(idx + 1, 0);
        }
        &mut self.counts[idx]
    }

    /// Increments the counter at `site` and returns the new value.
    pub fn bump(&mut self, site: i64) -> u64 {
        let c = self.slot(site);
        *c += 1;
        *c
    }

    pub fn set(&mut self, site: i64, value: u64) {
        *self.slot(site) = value;
    }

    /// Nonzero entries in increasing site order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        let lo = self.lo;
        self.counts.iter().enumerate().filter(|(_, c)| **c > 0).map(move |(i, c)| (lo + i as i64, *c))
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// A walk path `E_0, ..., E_T` together with its final visit counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    positions: Vec<i64>,
    visits: SiteCounts,
}

impl Trajectory {
    /// Builds a trajectory from raw positions, requiring `E_0 = 0` and unit steps.
    pub fn from_positions(positions: Vec<i64>) -> Result<Self> {
        validate_path(&positions)?;
        Ok(Self::from_positions_unchecked(positions))
    }

    /// Builds a trajectory without validating the path. Used for negative
    /// controls of the checkers; `positions` must still be nonempty.
    pub fn from_positions_unchecked(positions: Vec<i64>) -> Self {
        assert!(!positions.is_empty(), "a trajectory holds at least E_0");
        let mut visits = SiteCounts::new();
        for &x in &positions {
            visits.bump(x);
        }
        Trajectory { positions, visits }
    }

    pub fn positions(&self) -> &[i64] {
        &self.positions
    }

    pub fn horizon(&self) -> usize {
        self.positions.len() - 1
    }

    pub fn position(&self, n: usize) -> i64 {
        self.positions[n]
    }

    pub fn last(&self) -> i64 {
        *self.positions.last().expect("nonempty")
    }

    /// Visits to `site` over the whole horizon.
    pub fn visits(&self, site: i64) -> u64 {
        self.visits.get(site)
    }

    pub fn visit_counts(&self) -> &SiteCounts {
        &self.visits
    }

    /// Arrows consumed by the walk, one per step: `(site, level, arrow)`.
    ///
    /// Steps that are not `±1` (only possible for unchecked paths) are skipped.
    pub fn consumed(&self) -> impl Iterator<Item = (i64, u64, Arrow)> + '_ {
        let mut seen = SiteCounts::new();
        self.positions.windows(2).filter_map(move |w| {
            let level = seen.bump(w[0]);
            match w[1] - w[0] {
                1 => Some((w[0], level, Arrow::Right)),
                -1 => Some((w[0], level, Arrow::Left)),
                _ => None,
            }
        })
    }

    /// Time of the `k`-th visit to `site`, if it happens within the horizon.
    pub fn visit_time(&self, site: i64, k: u64) -> Option<usize> {
        if k == 0 {
            return Some(0);
        }
        self.positions.iter().enumerate().filter(|(_, &x)| x == site).nth(k as usize - 1).map(|(t, _)| t)
    }

    pub fn first_hit(&self, site: i64) -> Option<usize> {
        self.visit_time(site, 1)
    }

    /// Last time within the horizon at which the walk sits at `site`.
    pub fn last_visit(&self, site: i64) -> Option<usize> {
        self.positions.iter().rposition(|&x| x == site)
    }

    /// Prefix of the path up to time `t`.
    pub fn truncate(&self, t: usize) -> Result<Trajectory> {
        if t > self.horizon() {
            return Err(Error::OutOfRange { t, horizon: self.horizon() });
        }
        Ok(Self::from_positions_unchecked(self.positions[..=t].to_vec()))
    }
}

pub(crate) fn validate_path(positions: &[i64]) -> Result<()> {
    match positions.first() {
        None => return Err(Error::MalformedPath { index: 0, detail: "empty path".into() }),
        Some(&p) if p != 0 => {
            return Err(Error::MalformedPath { index: 0, detail: format!("starts at {p}, not 0") })
        }
        _ => {}
    }
    for (i, w) in positions.windows(2).enumerate() {
        if (w[1] - w[0]).abs() != 1 {
            return Err(Error::MalformedPath { index: i + 1, detail: format!("step {} -> {}", w[0], w[1]) });
        }
    }
    Ok(())
}

/// Runs the walk of `system` for `horizon` steps.
///
/// On its `k`-th visit to a site the walk reads the arrow at level `k` there.
pub fn run_walk<S: ArrowSystem + ?Sized>(system: &S, horizon: usize) -> Trajectory {
    let mut positions = Vec::with_capacity(horizon + 1);
    let mut visits = SiteCounts::with_radius(horizon.min(1 << 16));
    let mut x = 0i64;
    positions.push(x);
    let mut k = visits.bump(x);
    for _ in 0..horizon {
        x += system.arrow(x, k).step();
        positions.push(x);
        k = visits.bump(x);
    }
    Trajectory { positions, visits }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counterexamples::Ce1Left;
    use crate::ConstantSystem;

    #[test]
    fn all_right_walk() {
        assert_eq!(run_walk(&ConstantSystem::all_right(), 5).positions(), &[0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn ce1_left_walk_pattern() {
        let t = run_walk(&Ce1Left, 10);
        assert_eq!(t.positions(), &[0, 1, 0, 1, 0, 1, 2, 1, 2, 1, 2]);
        assert_eq!((t.visits(0), t.visits(1), t.visits(2)), (3, 5, 3));
    }

    #[test]
    fn visit_counts_match_path() {
        let t = run_walk(&Ce1Left, 200);
        for x in -2..50 {
            let n = t.positions().iter().filter(|&&p| p == x).count() as u64;
            assert_eq!(t.visits(x), n);
        }
        assert_eq!(t.visit_counts().total(), 201);
    }

    #[test]
    fn consumed_levels_follow_visits() {
        let t = run_walk(&Ce1Left, 30);
        for (site, level, arrow) in t.consumed() {
            use crate::ArrowSystem;
            assert_eq!(Ce1Left.arrow(site, level), arrow);
        }
        assert_eq!(t.consumed().count(), 30);
    }

    #[test]
    fn path_validation() {
        assert!(Trajectory::from_positions(vec![0, 1, 0, -1]).is_ok());
        assert!(matches!(Trajectory::from_positions(vec![1, 2]), Err(Error::MalformedPath { index: 0, .. })));
        assert!(matches!(Trajectory::from_positions(vec![0, 1, 1]), Err(Error::MalformedPath { index: 2, .. })));
    }

    #[test]
    fn site_counts_grow_both_ways() {
        let mut c = SiteCounts::new();
        c.bump(3);
        c.bump(-4);
        c.bump(3);
        assert_eq!(c.get(3), 2);
        assert_eq!(c.get(-4), 1);
        assert_eq!(c.get(0), 0);
        assert_eq!(c.get(100), 0);
        assert_eq!(c.iter().collect::<Vec<_>>(), vec![(-4, 1), (3, 2)]);
    }

    #[test]
    fn visit_times() {
        let t = Trajectory::from_positions(vec![0, 1, 0, 1, 2]).unwrap();
        assert_eq!(t.visit_time(1, 2), Some(3));
        assert_eq!(t.first_hit(2), Some(4));
        assert_eq!(t.first_hit(-1), None);
        assert_eq!(t.last_visit(0), Some(2));
    }
}
