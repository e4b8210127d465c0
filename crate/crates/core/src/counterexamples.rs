//! Two explicit constructions showing what `L ⪯ R` does not imply.
//!
//! The first pair has `L ⊴ R` but `R` has a smaller lower speed than `L`:
//! `L` moves at speed exactly 1/5, while `R` alternates between long right
//! runs and long backtracks so that `R_n / n` has lim sup `N/(N+2)` and
//! lim inf `1/(2N+1) < 1/5`.
//!
//! The second pair is a fixed 28-step loop in which `L` leads `R` more often
//! than the reverse, despite `L ⪯ R`. Repeating the loop makes the lead
//! deficit grow linearly.

use alloc::vec::Vec;

use serde::Serialize;

use crate::verifier::{CoupledPair, Provenance};
use crate::{Arrow, ArrowSystem, Error, RelationMode, Result, Trajectory};

/// The slow walker: at every positive site two left arrows then right
/// arrows; right arrows at the origin and on the negative half-line.
///
/// Its walk is the 5-step block `→←→←→` repeated, so `L_{5k} = k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Ce1Left;

impl ArrowSystem for Ce1Left {
    fn arrow(&self, site: i64, level: u64) -> Arrow {
        if site > 0 && level <= 2 {
            Arrow::Left
        } else {
            Arrow::Right
        }
    }
}

/// The oscillating walker for parameter `N`: at the milestone sites `x_k`
/// the stack starts `←→→`, at every other positive site `→←→`; everything
/// else is `→`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ce1Right {
    n: u64,
    /// Milestone sites `x_1 < x_2 < ...`, as many as fit in `i64`.
    sites: Vec<i64>,
}

impl Ce1Right {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn milestone_sites(&self) -> &[i64] {
        &self.sites
    }
}

impl ArrowSystem for Ce1Right {
    fn arrow(&self, site: i64, level: u64) -> Arrow {
        if site <= 0 || level > 3 {
            return Arrow::Right;
        }
        let milestone = self.sites.binary_search(&site).is_ok();
        match (milestone, level) {
            (true, 1) | (false, 2) => Arrow::Left,
            _ => Arrow::Right,
        }
    }
}

/// Builds the pair for `N >= 3`.
pub fn build_ce1(n: u64) -> Result<(Ce1Left, Ce1Right)> {
    if n < 3 {
        return Err(Error::Parameter(alloc::format!(
            "N = {n}: the lower speed of R exceeds 1/5 unless N >= 3 (use build_ce1_unchecked)"
        )));
    }
    build_ce1_unchecked(n)
}

/// Builds the pair for any `N >= 2`; for `N = 2` the systems are still
/// `⊴`-ordered but the speed inversion is lost.
pub fn build_ce1_unchecked(n: u64) -> Result<(Ce1Left, Ce1Right)> {
    if n < 2 {
        return Err(Error::Parameter(alloc::format!("N = {n}: milestone sites are not increasing")));
    }
    Ok((Ce1Left, Ce1Right { n, sites: ce1_sites(n, i64::MAX as i128) }))
}

/// `c_m = sum_{r=0}^m (-1)^{m-r} N^r = (N^{m+1} + (-1)^m) / (N + 1)`.
fn alternating_sum(n: i128, m: u32) -> Option<i128> {
    let sign = if m % 2 == 0 { 1 } else { -1 };
    Some((n.checked_pow(m + 1)? + sign) / (n + 1))
}

/// Milestone sites `x_1, x_2, ...` not exceeding `limit`.
///
/// `x_k = sum_{m=1}^k N^m - sum_{m=1}^{k-1} c_m`.
pub fn ce1_sites(n: u64, limit: i128) -> Vec<i64> {
    let n = n as i128;
    let mut sites = Vec::new();
    let mut x = 0i128;
    for k in 1u32.. {
        let next = n.checked_pow(k).and_then(|p| {
            let c = if k == 1 { 0 } else { alternating_sum(n, k - 1)? };
            x.checked_add(p)?.checked_sub(c)
        });
        match next {
            Some(v) if v <= limit && v <= i64::MAX as i128 => {
                x = v;
                sites.push(v as i64);
            }
            _ => break,
        }
    }
    sites
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ce1Milestone {
    pub k: u32,
    /// `x_k`.
    pub site: i64,
    /// `t_k`, first visit of `R` to `x_k`.
    pub first_hit: u64,
    /// `s_k`, last visit of `R` to `x_{k-1}` (with `x_0 = 0`).
    pub last_exit: u64,
    /// `x_k / t_k`.
    pub ratio_hi: f64,
    /// `x_{k-1} / s_k`.
    pub ratio_lo: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ce1Milestones {
    pub n: u64,
    pub rows: Vec<Ce1Milestone>,
}

impl Ce1Milestones {
    pub fn limit_hi(&self) -> f64 {
        self.n as f64 / (self.n as f64 + 2.0)
    }

    pub fn limit_lo(&self) -> f64 {
        1.0 / (2.0 * self.n as f64 + 1.0)
    }
}

/// Closed-form milestones for `k = 1..=kmax`.
///
/// The walk of `R` reaches `x_k` for the first time at `t_k = x_k + 2 x_{k-1}`
/// and, after backtracking over the second arrows of `(x_{k-1}, x_k)`, sits at
/// `x_{k-1}` for the last time at `s_k = 2 x_k + x_{k-1}`.
pub fn ce1_milestones(n: u64, kmax: u32) -> Result<Ce1Milestones> {
    if n < 2 {
        return Err(Error::Parameter(alloc::format!("N = {n} < 2")));
    }
    if kmax == 0 {
        return Err(Error::Parameter("kmax must be at least 1".into()));
    }
    let sites = ce1_sites(n, i64::MAX as i128 / 3);
    if sites.len() < kmax as usize {
        return Err(Error::Overflow("N^kmax: milestone times exceed 64-bit range"));
    }
    let rows = (1..=kmax)
        .map(|k| {
            let x = sites[k as usize - 1];
            let prev = if k == 1 { 0 } else { sites[k as usize - 2] };
            let t = (x + 2 * prev) as u64;
            let s = (2 * x + prev) as u64;
            Ce1Milestone {
                k,
                site: x,
                first_hit: t,
                last_exit: s,
                ratio_hi: x as f64 / t as f64,
                ratio_lo: prev as f64 / s as f64,
            }
        })
        .collect();
    Ok(Ce1Milestones { n, rows })
}

/// `R′` of the 28-step leader pair.
pub const CE2_RIGHT: [i64; 29] = [
    0, 1, 2, 1, 0, -1, -2, -3, -4, -5, -6, -5, -4, -3, -4, -5, -4, -3, -2, -3, -4, -3, -2, -1, -2, -3, -2, -1, 0,
];

/// `L′` of the 28-step leader pair.
pub const CE2_LEFT: [i64; 29] = [
    0, -1, -2, -3, -4, -5, -6, -5, -4, -3, -4, -5, -4, -3, -2, -3, -4, -3, -2, -1, -2, -3, -2, -1, 0, 1, 2, 1, 0,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ce2Variant {
    /// The 28-step pair itself.
    Primed,
    /// The pair repeated `cycles` times; both paths return to 0 after each loop.
    Periodic { cycles: usize },
}

fn repeat_loop(block: &[i64; 29], cycles: usize) -> Vec<i64> {
    let mut path = Vec::with_capacity(28 * cycles + 1);
    path.push(0);
    for _ in 0..cycles {
        path.extend_from_slice(&block[1..]);
    }
    path
}

pub fn build_ce2(variant: Ce2Variant) -> Result<CoupledPair> {
    let cycles = match variant {
        Ce2Variant::Primed => 1,
        Ce2Variant::Periodic { cycles: 0 } => return Err(Error::Parameter("periodic variant needs at least one cycle".into())),
        Ce2Variant::Periodic { cycles } => cycles,
    };
    CoupledPair::new(
        Trajectory::from_positions(repeat_loop(&CE2_LEFT, cycles))?,
        Trajectory::from_positions(repeat_loop(&CE2_RIGHT, cycles))?,
        RelationMode::Preceq,
        Provenance::Counterexample,
    )
}

/// `|A_{R,t}| = #{n <= t : R_n > L_n}` and `|A_{L,t}| = #{n <= t : R_n < L_n}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LeadSets {
    pub ahead_right: u64,
    pub ahead_left: u64,
}

impl LeadSets {
    /// `|A_L| - |A_R|`.
    pub fn deficit(&self) -> i64 {
        self.ahead_left as i64 - self.ahead_right as i64
    }
}

pub fn lead_sets(pair: &CoupledPair, t: usize) -> Result<LeadSets> {
    if t > pair.horizon() {
        return Err(Error::OutOfRange { t, horizon: pair.horizon() });
    }
    let (l, r) = (pair.left.positions(), pair.right.positions());
    let mut sets = LeadSets { ahead_right: 0, ahead_left: 0 };
    for n in 0..=t {
        match r[n].cmp(&l[n]) {
            core::cmp::Ordering::Greater => sets.ahead_right += 1,
            core::cmp::Ordering::Less => sets.ahead_left += 1,
            core::cmp::Ordering::Equal => {}
        }
    }
    Ok(sets)
}
