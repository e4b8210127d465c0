//! Bookkeeping identities satisfied by every walk generated from an arrow
//! system, checked exactly at one time or at every time of a trajectory.
//!
//! With `n(x)` the visits to `x` up to time `t` and `n(x, y)` the steps
//! `x -> y` up to time `t`:
//!
//! * arrivals: `n(x) = [x = 0] + n(x-1, x) + n(x+1, x)`
//! * departures: `n(x) = [E_t = x] + n(x, x+1) + n(x, x-1)`
//! * total: `sum_x n(x) = t + 1`
//! * used right / used left arrows: `n(x, x±1)` equals the number of right
//!   (left) arrows among the first `n(x) - [E_t = x]` arrows at `x`
//! * edge balance: `n(x, x+1) + [x+1 <= 0][E_t <= x] = n(x+1, x) + [x >= 0][E_t >= x+1]`
//!
//! A unit-step check (`E_0 = 0`, `|E_{t+1} - E_t| = 1`) rides along so that
//! malformed paths are reported rather than silently tabulated.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use serde::Serialize;

use crate::occupation::LocalTimeTable;
use crate::{ArrowSystem, Error, ExplicitSystem, Result, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Identity {
    UnitStep,
    Arrivals,
    Departures,
    Total,
    UsedRight,
    UsedLeft,
    EdgeBalance,
}

impl Identity {
    pub const ALL: [Identity; 7] = [
        Identity::UnitStep,
        Identity::Arrivals,
        Identity::Departures,
        Identity::Total,
        Identity::UsedRight,
        Identity::UsedLeft,
        Identity::EdgeBalance,
    ];

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IdentityFailure {
    pub t: usize,
    pub site: i64,
    pub identity: Identity,
    pub lhs: i64,
    pub rhs: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct IdentityReport {
    /// Number of times at which the full sweep ran.
    pub times_checked: usize,
    failures: [u64; 7],
    pub first_failure: Option<IdentityFailure>,
}

impl IdentityReport {
    pub fn passed(&self, identity: Identity) -> bool {
        self.failures[identity.index()] == 0
    }

    pub fn failure_count(&self, identity: Identity) -> u64 {
        self.failures[identity.index()]
    }

    pub fn all_passed(&self) -> bool {
        self.failures.iter().all(|&f| f == 0)
    }

    fn record(&mut self, t: usize, site: i64, identity: Identity, lhs: i64, rhs: i64) {
        if lhs != rhs {
            self.failures[identity.index()] += 1;
            self.first_failure.get_or_insert(IdentityFailure { t, site, identity, lhs, rhs });
        }
    }
}

/// Cumulative right-arrow counts per site, extended on demand.
struct PrefixRights<'a> {
    system: &'a dyn ArrowSystem,
    cache: BTreeMap<i64, Vec<u64>>,
}

impl PrefixRights<'_> {
    /// Right arrows among the first `r` arrows at `site`.
    fn rights(&mut self, site: i64, r: u64) -> u64 {
        let prefix = self.cache.entry(site).or_insert_with(|| vec![0]);
        while (prefix.len() as u64) <= r {
            let level = prefix.len() as u64;
            let last = *prefix.last().expect("seeded with 0");
            prefix.push(last + self.system.arrow(site, level).is_right() as u64);
        }
        prefix[r as usize]
    }
}

struct Sweep<'a> {
    table: LocalTimeTable,
    prefix: PrefixRights<'a>,
    report: IdentityReport,
}

impl Sweep<'_> {
    fn check_now(&mut self) {
        let t = self.table.time();
        let pos = self.table.position();
        let (lo, hi) = self.table.range();
        let table = &self.table;
        let report = &mut self.report;
        let n = |x: i64| table.node(x) as i64;
        let e = |x: i64, y: i64| table.edge(x, y) as i64;
        let ind = |b: bool| b as i64;

        report.record(t, 0, Identity::Total, table.total() as i64, t as i64 + 1);
        for x in lo - 1..=hi + 1 {
            report.record(t, x, Identity::Arrivals, n(x), ind(x == 0) + e(x - 1, x) + e(x + 1, x));
            report.record(t, x, Identity::Departures, n(x), ind(pos == x) + e(x, x + 1) + e(x, x - 1));

            let used = (n(x) - ind(pos == x)).max(0) as u64;
            let rights = self.prefix.rights(x, used) as i64;
            report.record(t, x, Identity::UsedRight, e(x, x + 1), rights);
            report.record(t, x, Identity::UsedLeft, e(x, x - 1), used as i64 - rights);

            report.record(
                t,
                x,
                Identity::EdgeBalance,
                e(x, x + 1) + ind(x + 1 <= 0) * ind(pos <= x),
                e(x + 1, x) + ind(x >= 0) * ind(pos >= x + 1),
            );
        }
        report.times_checked += 1;
    }
}

fn run(traj: &Trajectory, system: Option<&dyn ArrowSystem>, until: usize, every_time: bool) -> IdentityReport {
    let ledger;
    let system: &dyn ArrowSystem = match system {
        Some(s) => s,
        None => {
            let mut derived = ExplicitSystem::new(crate::Arrow::Left);
            for (site, level, arrow) in traj.consumed() {
                derived.set(site, level, arrow);
            }
            ledger = derived;
            &ledger
        }
    };
    let p = traj.positions();
    let mut sweep = Sweep {
        table: LocalTimeTable::start(p[0]),
        prefix: PrefixRights { system, cache: BTreeMap::new() },
        report: IdentityReport::default(),
    };
    sweep.report.record(0, p[0], Identity::UnitStep, p[0], 0);
    if every_time || until == 0 {
        sweep.check_now();
    }
    for t in 1..=until {
        let step = (p[t] - p[t - 1]).abs();
        sweep.report.record(t, p[t - 1], Identity::UnitStep, step, 1);
        sweep.table.advance(p[t]);
        if every_time || t == until {
            sweep.check_now();
        }
    }
    sweep.report
}

/// Checks every identity at time `t`.
///
/// With `system = None` the used-arrow identities are checked against the
/// arrows the path itself consumed.
pub fn check_identities(traj: &Trajectory, system: Option<&dyn ArrowSystem>, t: usize) -> Result<IdentityReport> {
    if t > traj.horizon() {
        return Err(Error::OutOfRange { t, horizon: traj.horizon() });
    }
    Ok(run(traj, system, t, false))
}

/// Checks every identity at every time `0..=T`.
pub fn check_identities_through(traj: &Trajectory, system: Option<&dyn ArrowSystem>) -> IdentityReport {
    run(traj, system, traj.horizon(), true)
}
