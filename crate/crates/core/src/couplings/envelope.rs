use alloc::vec::Vec;

use serde::Serialize;

use super::field::{StreamTag, UniformField};
use crate::verifier::{CoupledPair, Provenance};
use crate::{Arrow, ArrowSystem, Error, ExplicitSystem, RelationMode, Result, SiteCounts, Trajectory};

/// What a drift law may look at before step `step`.
pub struct DriftContext<'a> {
    /// `X_0, ..., X_step`.
    pub history: &'a [i64],
    /// Visits to every site up to and including the current time.
    pub visits: &'a SiteCounts,
    /// Visits to the current site, including this one.
    pub visit_count: u64,
    pub step: usize,
}

impl DriftContext<'_> {
    pub fn position(&self) -> i64 {
        *self.history.last().expect("history holds X_0")
    }
}

/// Probability that a self-interacting walk steps right, given its past.
pub trait DriftLaw {
    fn prob(&self, ctx: &DriftContext<'_>) -> f64;
}

impl<F: Fn(&DriftContext<'_>) -> f64> DriftLaw for F {
    fn prob(&self, ctx: &DriftContext<'_>) -> f64 {
        self(ctx)
    }
}

/// Once-reinforced walk: an edge already crossed has weight `1 + beta`,
/// an uncrossed edge weight 1.
///
/// The walk is nearest-neighbour, so an edge has been crossed iff both of
/// its endpoints have been visited.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Orrw {
    pub beta: f64,
}

impl DriftLaw for Orrw {
    fn prob(&self, ctx: &DriftContext<'_>) -> f64 {
        let x = ctx.position();
        let weight = |y: i64| if ctx.visits.get(y) > 0 { 1.0 + self.beta } else { 1.0 };
        let (left, right) = (weight(x - 1), weight(x + 1));
        right / (left + right)
    }
}

/// A drift law capped by an envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct Clamped<D> {
    pub law: D,
    pub envelope: Envelope,
}

impl<D: DriftLaw> DriftLaw for Clamped<D> {
    fn prob(&self, ctx: &DriftContext<'_>) -> f64 {
        self.law.prob(ctx).min(self.envelope.bound(ctx.visit_count))
    }
}

/// Cookie strengths `η_1, ..., η_M` followed by `1/2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Envelope {
    eta: Vec<f64>,
}

/// Behaviour of the excited walk in an envelope, as predicted from `α`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Classification {
    /// `α ≤ 1`
    pub not_right_transient: bool,
    /// `α ≤ 2`
    pub zero_upper_speed: bool,
    /// `α < -1`
    pub left_transient: bool,
    /// `α < -2`
    pub negative_lower_speed: bool,
}

impl Envelope {
    pub fn new(eta: Vec<f64>) -> Result<Self> {
        if let Some(i) = eta.iter().position(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidProbability { site: 0, level: i as u64 + 1, value: eta[i] });
        }
        Ok(Envelope { eta })
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    /// `η_k`, or `1/2` for `k > M`.
    pub fn bound(&self, k: u64) -> f64 {
        self.eta.get(k as usize - 1).copied().unwrap_or(0.5)
    }

    /// `α = Σ (2 η_k - 1)`.
    pub fn alpha(&self) -> f64 {
        self.eta.iter().map(|e| 2.0 * e - 1.0).sum()
    }

    pub fn classify(&self) -> Classification {
        let a = self.alpha();
        Classification {
            not_right_transient: a <= 1.0,
            zero_upper_speed: a <= 2.0,
            left_transient: a < -1.0,
            negative_lower_speed: a < -2.0,
        }
    }
}

/// The dominating system: `→` at `(x, k)` iff `U(x, k) ≤ η_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeSystem {
    pub envelope: Envelope,
    pub field: UniformField,
    pub stream: StreamTag,
}

impl ArrowSystem for EnvelopeSystem {
    fn arrow(&self, site: i64, level: u64) -> Arrow {
        if self.field.value(self.stream, site, level) <= self.envelope.bound(level) {
            Arrow::Right
        } else {
            Arrow::Left
        }
    }
}

#[derive(Debug, Clone)]
pub struct EnvelopeRun {
    /// `left` is the self-interacting walk, `right` the excited walk in the envelope.
    pub pair: CoupledPair,
    pub alpha: f64,
    /// Arrows consumed by the self-interacting walk, left above them.
    pub left_system: ExplicitSystem,
    pub right_system: EnvelopeSystem,
}

/// Runs a self-interacting walk and the excited walk in `envelope` from the
/// same uniforms `U(x, k)`.
///
/// The self-interacting walk steps right on its `k`-th visit to `x` iff
/// `U(x, k) ≤ P`, where `P` is its drift law's value; the excited walk iff
/// `U(x, k) ≤ η_k`. When `P ≤ η_k` at every step the consumed arrows of the
/// first are `⊴` those of the second, which is asserted at every step.
pub fn envelope_walk<D: DriftLaw + ?Sized>(
    drift: &D,
    envelope: &Envelope,
    field: UniformField,
    stream: StreamTag,
    horizon: usize,
) -> Result<EnvelopeRun> {
    let right_system = EnvelopeSystem { envelope: envelope.clone(), field, stream };
    let right = crate::run_walk(&right_system, horizon);

    let mut history = Vec::with_capacity(horizon + 1);
    history.push(0i64);
    let mut visits = SiteCounts::with_radius(horizon.min(1 << 16));
    visits.bump(0);
    let mut consumed = ExplicitSystem::new(Arrow::Left);
    for step in 0..horizon {
        let x = *history.last().expect("nonempty");
        let k = visits.get(x);
        let ctx = DriftContext { history: &history, visits: &visits, visit_count: k, step };
        let p = drift.prob(&ctx);
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability { site: x, level: k, value: p });
        }
        let bound = envelope.bound(k);
        if p > bound {
            return Err(Error::ContractViolation { step, visit: k, value: p, bound });
        }
        let arrow = if field.value(stream, x, k) <= p { Arrow::Right } else { Arrow::Left };
        if arrow.is_right() && right_system.arrow(x, k).is_left() {
            return Err(Error::CouplingBroken { site: x, level: k });
        }
        consumed.set(x, k, arrow);
        let next = x + arrow.step();
        history.push(next);
        visits.bump(next);
    }
    let left = Trajectory::from_positions(history)?;
    Ok(EnvelopeRun {
        pair: CoupledPair::new(left, right, RelationMode::Trileq, Provenance::Envelope)?,
        alpha: envelope.alpha(),
        left_system: consumed,
        right_system,
    })
}
