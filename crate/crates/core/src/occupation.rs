use crate::{Error, Result, SiteCounts, Trajectory};

/// Occupation counts `n(x)` and directed edge counts `n(x, x±1)` of a walk
/// at a fixed time `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalTimeTable {
    t: usize,
    position: i64,
    min: i64,
    max: i64,
    nodes: SiteCounts,
    /// `n(x, x+1)` keyed by `x`.
    up: SiteCounts,
    /// `n(x, x-1)` keyed by `x`.
    down: SiteCounts,
}

impl LocalTimeTable {
    /// Table at time 0 for a walk started at `start`.
    pub(crate) fn start(start: i64) -> Self {
        let mut nodes = SiteCounts::new();
        nodes.bump(start);
        LocalTimeTable {
            t: 0,
            position: start,
            min: start,
            max: start,
            nodes,
            up: SiteCounts::new(),
            down: SiteCounts::new(),
        }
    }

    /// Moves the table from time `t` to `t + 1`.
    pub(crate) fn advance(&mut self, next: i64) {
        match next - self.position {
            1 => {
                self.up.bump(self.position);
            }
            -1 => {
                self.down.bump(self.position);
            }
            _ => {}
        }
        self.nodes.bump(next);
        self.position = next;
        self.min = self.min.min(next);
        self.max = self.max.max(next);
        self.t += 1;
    }

    pub fn time(&self) -> usize {
        self.t
    }

    /// `E_t`.
    pub fn position(&self) -> i64 {
        self.position
    }

    /// Smallest and largest site visited up to time `t`.
    pub fn range(&self) -> (i64, i64) {
        (self.min, self.max)
    }

    pub fn node(&self, x: i64) -> u64 {
        self.nodes.get(x)
    }

    /// `n(x, y)`; zero unless `|x - y| = 1`.
    pub fn edge(&self, x: i64, y: i64) -> u64 {
        match y - x {
            1 => self.up.get(x),
            -1 => self.down.get(x),
            _ => 0,
        }
    }

    pub fn total(&self) -> u64 {
        self.nodes.total()
    }
}

/// Occupation table of `traj` at time `t`.
pub fn occupation(traj: &Trajectory, t: usize) -> Result<LocalTimeTable> {
    if t > traj.horizon() {
        return Err(Error::OutOfRange { t, horizon: traj.horizon() });
    }
    let p = traj.positions();
    let mut table = LocalTimeTable::start(p[0]);
    for &x in &p[1..=t] {
        table.advance(x);
    }
    Ok(table)
}
