//! Exact finite-time checks of the relations that `L ⪯ R` forces between
//! the walks `L` and `R`.
//!
//! Every check scans the pair once, in time order, with amortized constant
//! work per step. A check whose hypothesis never held within the horizon is
//! reported as passed and flagged `vacuous`.
//!
//! Writing `n_L(x)`, `n_R(x)` for local times at the current time `t` and
//! `d(x) = n_R(x) - n_L(x)`:
//!
//! | statement | checked at every `t` |
//! |---|---|
//! | `envelopes` | `max R ≥ max L` and `min R ≥ min L` over `[0, t]` |
//! | `hitting_order` | `R` reaches each `x > 0` no later than `L`; `L` reaches each `x < 0` no later than `R` |
//! | `local_time_order` | `d(x) > 0` implies `d(y) ≥ 0` for all `y > x` |
//! | `max_visits` | `n_R(max R) ≥ n_L(max R)` and `n_L(min L) ≥ n_R(min L)` |
//! | `neighbour_plus_minus` | `d(x-1) > 0 ⇒ d(x) ≥ 0`; and if `R_t ≤ y < L_t` with `d(y) > 0` then `d ≥ 0` on `[y, L_t]` |
//! | `kth_visit_neighbour` | at the `k`-th visits to `x`, `R` has visited `x-1` no more often than `L` had |
//! | `record_lead` | `R_t ≥ L_t` whenever `R` sets a new maximum or `L` a new minimum |

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, RelationMode, Result, SiteCounts, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statement {
    Envelopes,
    HittingOrder,
    LocalTimeOrder,
    MaxVisits,
    NeighbourPlusMinus,
    KthVisitNeighbour,
    RecordLead,
}

impl Statement {
    pub const ALL: [Statement; 7] = [
        Statement::Envelopes,
        Statement::HittingOrder,
        Statement::LocalTimeOrder,
        Statement::MaxVisits,
        Statement::NeighbourPlusMinus,
        Statement::KthVisitNeighbour,
        Statement::RecordLead,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Statement::Envelopes => "envelopes",
            Statement::HittingOrder => "hitting_order",
            Statement::LocalTimeOrder => "local_time_order",
            Statement::MaxVisits => "max_visits",
            Statement::NeighbourPlusMinus => "neighbour_plus_minus",
            Statement::KthVisitNeighbour => "kth_visit_neighbour",
            Statement::RecordLead => "record_lead",
        }
    }

    pub fn from_name(name: &str) -> Option<Statement> {
        Statement::ALL.into_iter().find(|s| s.name() == name)
    }
}

/// How a pair of trajectories was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    SharedUniform,
    BlockStack,
    SwapChain,
    Envelope,
    Explicit,
    Counterexample,
    Independent,
    Adversarial,
}

/// Two walks over a common horizon, `left` playing `L` and `right` playing `R`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoupledPair {
    pub left: Trajectory,
    pub right: Trajectory,
    pub mode: RelationMode,
    pub provenance: Provenance,
}

impl CoupledPair {
    pub fn new(left: Trajectory, right: Trajectory, mode: RelationMode, provenance: Provenance) -> Result<Self> {
        if left.horizon() != right.horizon() {
            return Err(Error::HorizonMismatch { left: left.horizon(), right: right.horizon() });
        }
        for (traj, _) in [(&left, "left"), (&right, "right")] {
            if traj.position(0) != 0 {
                return Err(Error::MalformedPath { index: 0, detail: "pair walks must start at 0".into() });
            }
        }
        Ok(CoupledPair { left, right, mode, provenance })
    }

    pub fn horizon(&self) -> usize {
        self.left.horizon()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub t: usize,
    pub x: i64,
    pub k: Option<u64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyResult {
    pub statement: Statement,
    pub passed: bool,
    pub vacuous: bool,
    pub witness: Option<Witness>,
}

impl VerifyResult {
    fn pass(statement: Statement, vacuous: bool) -> Self {
        VerifyResult { statement, passed: true, vacuous, witness: None }
    }

    fn fail(statement: Statement, t: usize, x: i64, k: Option<u64>, detail: String) -> Self {
        VerifyResult { statement, passed: false, vacuous: false, witness: Some(Witness { t, x, k, detail }) }
    }
}

pub fn verify(pair: &CoupledPair, statement: Statement) -> VerifyResult {
    match statement {
        Statement::Envelopes => verify_envelopes(pair),
        Statement::HittingOrder => verify_hitting_order(pair),
        Statement::LocalTimeOrder => verify_local_time_order(pair),
        Statement::MaxVisits => verify_max_visits(pair),
        Statement::NeighbourPlusMinus => verify_neighbour_and_plusminus(pair),
        Statement::KthVisitNeighbour => verify_kth_visit_neighbour(pair),
        Statement::RecordLead => verify_record_lead(pair),
    }
}

pub fn verify_all(pair: &CoupledPair) -> Vec<VerifyResult> {
    Statement::ALL.iter().map(|&s| verify(pair, s)).collect()
}

pub fn verify_envelopes(pair: &CoupledPair) -> VerifyResult {
    let (l, r) = (pair.left.positions(), pair.right.positions());
    let (mut l_max, mut l_min, mut r_max, mut r_min) = (0i64, 0i64, 0i64, 0i64);
    for t in 0..=pair.horizon() {
        l_max = l_max.max(l[t]);
        l_min = l_min.min(l[t]);
        r_max = r_max.max(r[t]);
        r_min = r_min.min(r[t]);
        if r_max < l_max {
            return VerifyResult::fail(Statement::Envelopes, t, l_max, None, format!("max R = {r_max} < max L = {l_max}"));
        }
        if r_min < l_min {
            return VerifyResult::fail(Statement::Envelopes, t, r_min, None, format!("min R = {r_min} < min L = {l_min}"));
        }
    }
    VerifyResult::pass(Statement::Envelopes, false)
}

/// First-hit times of `1, 2, ...` (or `-1, -2, ...` when `sign = -1`).
fn first_hits(path: &[i64], sign: i64) -> Vec<usize> {
    let mut hits = Vec::new();
    for (t, &x) in path.iter().enumerate() {
        if sign * x > hits.len() as i64 {
            hits.push(t);
        }
    }
    hits
}

pub fn verify_hitting_order(pair: &CoupledPair) -> VerifyResult {
    let (l, r) = (pair.left.positions(), pair.right.positions());
    let mut earliest: Option<(usize, i64, String)> = None;
    let mut consider = |t: usize, x: i64, detail: String| {
        if earliest.as_ref().is_none_or(|(t0, _, _)| t < *t0) {
            earliest = Some((t, x, detail));
        }
    };
    // leader must reach the site no later than the follower did
    for (sign, follower, leader) in [(1i64, l, r), (-1, r, l)] {
        let f_hits = first_hits(follower, sign);
        let lead_hits = first_hits(leader, sign);
        for (i, &tf) in f_hits.iter().enumerate() {
            let x = sign * (i as i64 + 1);
            let (who_f, who_l) = if sign > 0 { ("L", "R") } else { ("R", "L") };
            match lead_hits.get(i) {
                Some(&tl) if tl <= tf => {}
                Some(&tl) => consider(tl, x, format!("{who_l} first hits {x} at {tl}, after {who_f} at {tf}")),
                None => consider(tf, x, format!("{who_f} hits {x} at {tf}; {who_l} never does")),
            }
        }
    }
    let vacuous = first_hits(l, 1).is_empty() && first_hits(r, -1).is_empty();
    match earliest {
        Some((t, x, detail)) => VerifyResult::fail(Statement::HittingOrder, t, x, None, detail),
        None => VerifyResult::pass(Statement::HittingOrder, vacuous),
    }
}

/// Incremental signs of `d(x) = n_R(x) - n_L(x)`.
struct Differences {
    left: SiteCounts,
    right: SiteCounts,
    ahead: BTreeSet<i64>,
    behind: BTreeSet<i64>,
}

impl Differences {
    fn new() -> Self {
        let mut d = Differences {
            left: SiteCounts::new(),
            right: SiteCounts::new(),
            ahead: BTreeSet::new(),
            behind: BTreeSet::new(),
        };
        d.left.bump(0);
        d.right.bump(0);
        d
    }

    fn diff(&self, x: i64) -> i64 {
        self.right.get(x) as i64 - self.left.get(x) as i64
    }

    fn step(&mut self, l: i64, r: i64) {
        self.left.bump(l);
        self.right.bump(r);
        for x in [l, r] {
            self.ahead.remove(&x);
            self.behind.remove(&x);
            match self.diff(x) {
                d if d > 0 => self.ahead.insert(x),
                d if d < 0 => self.behind.insert(x),
                _ => false,
            };
        }
    }
}

pub fn verify_local_time_order(pair: &CoupledPair) -> VerifyResult {
    let (l, r) = (pair.left.positions(), pair.right.positions());
    let mut d = Differences::new();
    let mut hypothesis = false;
    for t in 1..=pair.horizon() {
        d.step(l[t], r[t]);
        if let Some(&x) = d.ahead.first() {
            hypothesis = true;
            if let Some(&y) = d.behind.last() {
                if x < y {
                    return VerifyResult::fail(
                        Statement::LocalTimeOrder,
                        t,
                        x,
                        None,
                        format!("d({x}) = {} > 0 but d({y}) = {} < 0", d.diff(x), d.diff(y)),
                    );
                }
            }
        }
    }
    VerifyResult::pass(Statement::LocalTimeOrder, !hypothesis)
}

pub fn verify_max_visits(pair: &CoupledPair) -> VerifyResult {
    let (l, r) = (pair.left.positions(), pair.right.positions());
    let (mut nl, mut nr) = (SiteCounts::new(), SiteCounts::new());
    let (mut r_max, mut l_min) = (0i64, 0i64);
    for t in 0..=pair.horizon() {
        nl.bump(l[t]);
        nr.bump(r[t]);
        r_max = r_max.max(r[t]);
        l_min = l_min.min(l[t]);
        if nr.get(r_max) < nl.get(r_max) {
            return VerifyResult::fail(
                Statement::MaxVisits,
                t,
                r_max,
                None,
                format!("at max R = {r_max}: n_R = {} < n_L = {}", nr.get(r_max), nl.get(r_max)),
            );
        }
        if nl.get(l_min) < nr.get(l_min) {
            return VerifyResult::fail(
                Statement::MaxVisits,
                t,
                l_min,
                None,
                format!("at min L = {l_min}: n_L = {} < n_R = {}", nl.get(l_min), nr.get(l_min)),
            );
        }
    }
    VerifyResult::pass(Statement::MaxVisits, false)
}

pub fn verify_neighbour_and_plusminus(pair: &CoupledPair) -> VerifyResult {
    let (l, r) = (pair.left.positions(), pair.right.positions());
    let mut d = Differences::new();
    let mut hypothesis = false;
    for t in 1..=pair.horizon() {
        d.step(l[t], r[t]);
        hypothesis |= !d.ahead.is_empty();
        // only pairs touching a changed site can have changed status
        for c in [l[t], r[t]] {
            for x in [c, c + 1] {
                if d.diff(x - 1) > 0 && d.diff(x) < 0 {
                    return VerifyResult::fail(
                        Statement::NeighbourPlusMinus,
                        t,
                        x,
                        None,
                        format!("d({}) = {} > 0 but d({x}) = {} < 0", x - 1, d.diff(x - 1), d.diff(x)),
                    );
                }
            }
        }
        let (rt, lt) = (r[t], l[t]);
        if rt < lt {
            if let Some(&y) = d.ahead.range(rt..lt).next() {
                hypothesis = true;
                if let Some(&x) = d.behind.range(y..=lt).next() {
                    return VerifyResult::fail(
                        Statement::NeighbourPlusMinus,
                        t,
                        x,
                        None,
                        format!("R_t = {rt} <= {y} < L_t = {lt}, d({y}) > 0 but d({x}) = {} < 0", d.diff(x)),
                    );
                }
            }
        }
    }
    VerifyResult::pass(Statement::NeighbourPlusMinus, !hypothesis)
}

/// For every site, `(time, visits to x-1)` at each successive visit.
fn visit_records(path: &[i64]) -> BTreeMap<i64, Vec<(usize, u64)>> {
    let mut counts = SiteCounts::new();
    let mut records: BTreeMap<i64, Vec<(usize, u64)>> = BTreeMap::new();
    for (t, &x) in path.iter().enumerate() {
        counts.bump(x);
        records.entry(x).or_default().push((t, counts.get(x - 1)));
    }
    records
}

pub fn verify_kth_visit_neighbour(pair: &CoupledPair) -> VerifyResult {
    let left = visit_records(pair.left.positions());
    let right = visit_records(pair.right.positions());
    let mut worst: Option<(usize, i64, u64, String)> = None;
    let mut compared = false;
    for (&x, r_visits) in &right {
        let Some(l_visits) = left.get(&x) else { continue };
        for (i, (&(tr, nr), &(tl, nl))) in r_visits.iter().zip(l_visits).enumerate() {
            compared = true;
            if nr > nl {
                let t = tr.max(tl);
                if worst.as_ref().is_none_or(|w| t < w.0) {
                    let k = i as u64 + 1;
                    worst = Some((t, x, k, format!("visit {k} to {x}: R has {nr} visits to {} (t={tr}), L had {nl} (t={tl})", x - 1)));
                }
            }
        }
    }
    match worst {
        Some((t, x, k, detail)) => VerifyResult::fail(Statement::KthVisitNeighbour, t, x, Some(k), detail),
        None => VerifyResult::pass(Statement::KthVisitNeighbour, !compared),
    }
}

pub fn verify_record_lead(pair: &CoupledPair) -> VerifyResult {
    let (l, r) = (pair.left.positions(), pair.right.positions());
    let (mut r_max, mut l_min) = (0i64, 0i64);
    let mut records = false;
    for t in 1..=pair.horizon() {
        if r[t] > r_max {
            r_max = r[t];
            records = true;
            if r[t] < l[t] {
                return VerifyResult::fail(Statement::RecordLead, t, r[t], None, format!("R sets maximum {} below L = {}", r[t], l[t]));
            }
        }
        if l[t] < l_min {
            l_min = l[t];
            records = true;
            if l[t] > r[t] {
                return VerifyResult::fail(Statement::RecordLead, t, l[t], None, format!("L sets minimum {} above R = {}", l[t], r[t]));
            }
        }
    }
    VerifyResult::pass(Statement::RecordLead, !records)
}

/// Pair that no coupling can produce, used to show each check can fail.
///
/// Both systems are all-right except the first arrow at the origin, which is
/// right for `L` and left for `R`. Every statement fails on it within six
/// steps.
pub fn negative_control(_statement: Statement) -> CoupledPair {
    use crate::{run_walk, Arrow, ExplicitSystem};
    let left = ExplicitSystem::new(Arrow::Right);
    let right = ExplicitSystem::new(Arrow::Right).with_stack(0, [Arrow::Left]);
    CoupledPair::new(run_walk(&left, 6), run_walk(&right, 6), RelationMode::Preceq, Provenance::Adversarial)
        .expect("equal horizons")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counterexamples::{build_ce1, build_ce2, Ce2Variant};
    use crate::{check_relation, run_walk, Arrow, ExplicitSystem, RuleSystem, Window};
    use proptest::prelude::*;

    fn same(path: Vec<i64>) -> CoupledPair {
        let t = Trajectory::from_positions(path).unwrap();
        CoupledPair::new(t.clone(), t, RelationMode::Trileq, Provenance::Explicit).unwrap()
    }

    #[test]
    fn identical_trajectories_pass_everything() {
        let pair = same(vec![0, 1, 0, -1, -2, -1, 0, 1, 2, 3, 2]);
        for res in verify_all(&pair) {
            assert!(res.passed, "{res:?}");
            assert!(res.witness.is_none());
        }
    }

    #[test]
    fn vacuity_is_flagged() {
        let res = verify_local_time_order(&same(vec![0, 1, 2]));
        assert!(res.passed && res.vacuous);
        let res = verify_envelopes(&same(vec![0, 1, 2]));
        assert!(res.passed && !res.vacuous);
    }

    #[test]
    fn every_statement_fails_its_negative_control() {
        for s in Statement::ALL {
            let res = verify(&negative_control(s), s);
            assert!(!res.passed, "{s:?} passed its control");
            assert!(res.witness.is_some());
        }
        assert_eq!(verify_envelopes(&negative_control(Statement::Envelopes)).witness.unwrap().t, 1);
    }

    #[test]
    fn ce1_pair_hitting_order_and_kth_visit() {
        let (l, r) = build_ce1(3).unwrap();
        let pair = CoupledPair::new(run_walk(&l, 1000), run_walk(&r, 1000), RelationMode::Trileq, Provenance::Counterexample).unwrap();
        assert_eq!(pair.left.first_hit(3), Some(11));
        assert_eq!(pair.right.first_hit(3), Some(3));
        // at the first visits to 3: R has seen 2 once, L had seen it three times
        let tl = pair.left.first_hit(3).unwrap();
        let tr = pair.right.first_hit(3).unwrap();
        let count = |t: &Trajectory, upto: usize| t.positions()[..=upto].iter().filter(|&&x| x == 2).count();
        assert_eq!((count(&pair.right, tr), count(&pair.left, tl)), (1, 3));
        for res in verify_all(&pair) {
            assert!(res.passed, "{res:?}");
        }
    }

    #[test]
    fn primed_counterexample_passes_everything() {
        let pair = build_ce2(Ce2Variant::Primed).unwrap();
        for res in verify_all(&pair) {
            assert!(res.passed, "{res:?}");
        }
    }

    #[test]
    fn mismatched_horizons_rejected() {
        let a = Trajectory::from_positions(vec![0, 1]).unwrap();
        let b = Trajectory::from_positions(vec![0, 1, 2]).unwrap();
        assert!(CoupledPair::new(a, b, RelationMode::Preceq, Provenance::Explicit).is_err());
    }

    #[test]
    fn statement_names_round_trip() {
        for s in Statement::ALL {
            assert_eq!(Statement::from_name(s.name()), Some(s));
        }
    }

    fn bits_to_arrow(b: bool) -> Arrow {
        if b { Arrow::Right } else { Arrow::Left }
    }

    proptest! {
        // random ⊴ pairs: R is L with some left arrows switched to right
        #[test]
        fn coupled_explicit_pairs_pass(
            stacks in proptest::collection::btree_map(-10i64..=10, proptest::collection::vec((any::<bool>(), any::<bool>()), 0..24), 0..21),
            horizon in 1usize..300,
        ) {
            let mut l = ExplicitSystem::new(Arrow::Left);
            let mut r = ExplicitSystem::new(Arrow::Right);
            for (site, bits) in stacks {
                l = l.with_stack(site, bits.iter().map(|&(a, _)| bits_to_arrow(a)));
                r = r.with_stack(site, bits.iter().map(|&(a, b)| bits_to_arrow(a || b)));
            }
            prop_assert!(check_relation(&l, &r, &Window::new(-12..=12, 30), RelationMode::Trileq).holds);
            let pair = CoupledPair::new(run_walk(&l, horizon), run_walk(&r, horizon), RelationMode::Trileq, Provenance::Explicit).unwrap();
            for res in verify_all(&pair) {
                prop_assert!(res.passed, "{:?}", res);
            }
        }

        // ⪯ pairs that are not ⊴: R's stacks are L's with a left arrow moved up
        #[test]
        fn preceq_pairs_pass(seed in any::<u64>(), horizon in 1usize..300) {
            let arrow_l = move |x: i64, k: u64| {
                let h = (seed ^ (x as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ k.wrapping_mul(0xBF58_476D_1CE4_E5B9)).wrapping_mul(0x94D0_49BB_1331_11EB);
                bits_to_arrow((h >> 61) & 1 == 1)
            };
            // swap a left-right adjacent pair at every odd level into right-left
            let arrow_r = move |x: i64, k: u64| {
                let (a, b) = if k % 2 == 1 { (k, k + 1) } else { (k - 1, k) };
                let (p, q) = (arrow_l(x, a), arrow_l(x, b));
                let (p, q) = if p.is_left() && q.is_right() { (q, p) } else { (p, q) };
                if k == a { p } else { q }
            };
            let (l, r) = (RuleSystem(arrow_l), RuleSystem(arrow_r));
            prop_assert!(check_relation(&l, &r, &Window::new(-12..=12, 40), RelationMode::Preceq).holds);
            let pair = CoupledPair::new(run_walk(&l, horizon), run_walk(&r, horizon), RelationMode::Preceq, Provenance::Explicit).unwrap();
            for res in verify_all(&pair) {
                prop_assert!(res.passed, "{:?}", res);
            }
        }
    }
}
