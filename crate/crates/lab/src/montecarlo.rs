//! Campaigns: many coupled pairs from one family, every selected check run
//! on each, results aggregated into a deterministic report.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use arrowwalk::counterexamples::{build_ce1, build_ce2, ce1_milestones, lead_sets, Ce1Milestones, Ce2Variant, LeadSets};
use arrowwalk::couplings::{
    chain_glue, couple_block_stacks, env_order, envelope_walk, sample_system, support_window, BlockPartition,
    Clamped, CookieEnvironment, Envelope, Orrw, StreamTag, UniformField,
};
use arrowwalk::verifier::{verify, CoupledPair, Provenance, Statement, Witness};
use arrowwalk::{paths_admit_preceq, run_walk, zero_right_transform, ArrowSystem, RelationMode};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// One uniform per arrow, `env ≤ env2` pointwise.
    SharedUniform,
    /// Block stacks drawn from a shared count and uniform; `env2` reachable from `env` by favourable swaps.
    BlockStack,
    /// Chained single swaps, blocks up to eight levels.
    SwapChain,
    /// Clamped once-reinforced walk under an excited-walk envelope.
    Envelope,
    /// The speed counterexample (deterministic, one trial).
    Ce1,
    /// The lead counterexample (deterministic, one trial).
    Ce2,
    /// Independent walks in `env` and `env2`; checks are expected to fail.
    IndependentControl,
}

impl Family {
    pub fn deterministic(self) -> bool {
        matches!(self, Family::Ce1 | Family::Ce2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub family: Family,
    pub trials: usize,
    pub horizon: usize,
    pub seed: u64,
    pub env: CookieEnvironment,
    pub env2: CookieEnvironment,
    pub partition: BlockPartition,
    pub eta: Vec<f64>,
    pub beta: f64,
    pub ce1_n: u64,
    pub checks: Vec<Statement>,
    /// Also walk the zero-right transforms and count returns to 0.
    pub recurrence: bool,
    pub timestamp: bool,
}

fn homogeneous(p: &[f64]) -> CookieEnvironment {
    CookieEnvironment::homogeneous(p).expect("valid defaults")
}

impl CampaignConfig {
    /// Configuration with the family's default environments.
    pub fn new(family: Family) -> Self {
        let (env, env2, partition) = match family {
            Family::BlockStack => (
                homogeneous(&[0.2, 0.5, 0.7]),
                homogeneous(&[0.7, 0.5, 0.2]),
                BlockPartition::consecutive(3, 3).expect("valid"),
            ),
            Family::SwapChain => (
                homogeneous(&[0.2, 0.5, 0.7, 0.9]),
                homogeneous(&[0.9, 0.7, 0.5, 0.2]),
                BlockPartition::consecutive(4, 4).expect("valid"),
            ),
            Family::IndependentControl => {
                (homogeneous(&[0.6, 0.6]), homogeneous(&[0.6, 0.6]), BlockPartition::singletons())
            }
            _ => (homogeneous(&[0.6, 0.6]), homogeneous(&[0.9, 0.9]), BlockPartition::singletons()),
        };
        CampaignConfig {
            family,
            trials: 100,
            horizon: 1000,
            seed: 0,
            env,
            env2,
            partition,
            eta: vec![0.9, 0.9],
            beta: -0.5,
            ce1_n: 3,
            checks: Statement::ALL.to_vec(),
            recurrence: true,
            timestamp: true,
        }
    }

    pub fn effective_trials(&self) -> usize {
        if self.family.deterministic() {
            1
        } else {
            self.trials
        }
    }

    /// Rejects configurations for which the family's ordering guarantee does
    /// not apply.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 || self.horizon == 0 {
            return Err(LabError::Config("trials and horizon must be at least 1".into()));
        }
        if self.checks.is_empty() {
            return Err(LabError::Config("no checks selected".into()));
        }
        self.env.validate()?;
        self.env2.validate()?;
        let window = support_window(&[&self.env, &self.env2], &self.partition);
        match self.family {
            Family::SharedUniform => {
                let report = env_order(&self.env, &self.env2, &BlockPartition::singletons(), &window)?;
                if !report.pointwise_leq {
                    return Err(LabError::Config("shared-uniform needs env <= env2 at every site and level".into()));
                }
            }
            Family::BlockStack | Family::SwapChain => {
                let report = env_order(&self.env, &self.env2, &self.partition, &window)?;
                if !report.preceq_a {
                    return Err(LabError::Config(
                        "env2 must be reachable from env by favourable swaps within blocks".into(),
                    ));
                }
            }
            Family::Envelope => {
                Envelope::new(self.eta.clone())?;
            }
            Family::Ce1 => {
                build_ce1(self.ce1_n)?;
            }
            Family::Ce2 | Family::IndependentControl => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Vacuous,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureRecord {
    pub trial: usize,
    pub witness: Option<Witness>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckTally {
    pub statement: Statement,
    pub pass: u64,
    pub vacuous: u64,
    pub fail: u64,
    pub first_failure: Option<FailureRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub std_err: f64,
    pub min: f64,
    pub q10: f64,
    pub median: f64,
    pub q90: f64,
    pub max: f64,
}

impl Summary {
    /// Summary of `values` in the given order; quantiles by nearest rank.
    pub fn of(values: &[f64]) -> Option<Summary> {
        if values.is_empty() {
            return None;
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = if n > 1 { values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let rank = |q: f64| sorted[((q * n as f64).ceil() as usize).clamp(1, n) - 1];
        Some(Summary {
            count: n,
            mean,
            std_err: (var / n as f64).sqrt(),
            min: sorted[0],
            q10: rank(0.1),
            median: rank(0.5),
            q90: rank(0.9),
            max: sorted[n - 1],
        })
    }
}

/// Trials in which the zero-right transform of `L` returned to 0 at least as
/// often as that of `R`, and the rest. Measured, not claimed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ReturnsOrder {
    pub left_at_least_right: u64,
    pub left_below_right: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignReport {
    pub family: Family,
    pub trials: usize,
    pub horizon: usize,
    pub seed: u64,
    pub checks: Vec<CheckTally>,
    pub errored_trials: u64,
    pub left_speed: Option<Summary>,
    pub right_speed: Option<Summary>,
    pub right_max: Option<Summary>,
    pub left_plus_returns: Option<Summary>,
    pub right_plus_returns: Option<Summary>,
    pub returns_order: Option<ReturnsOrder>,
    pub milestones: Option<Ce1Milestones>,
    pub lead_sets: Option<LeadSets>,
    pub wall_clock_seconds: Option<f64>,
}

impl CampaignReport {
    pub fn total_failures(&self) -> u64 {
        self.checks.iter().map(|c| c.fail).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub statuses: Vec<(Statement, Status)>,
    pub witnesses: Vec<Option<Witness>>,
    pub error: Option<String>,
    left_final: Option<i64>,
    right_final: Option<i64>,
    right_max: Option<i64>,
    returns: Option<(u64, u64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Campaign {
    pub report: CampaignReport,
    pub trials: Vec<TrialRecord>,
}

impl Campaign {
    /// Per-trial `trial,check,status` rows.
    pub fn write_trial_dump<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(["trial", "check", "status"])?;
        for t in &self.trials {
            for (s, status) in &t.statuses {
                let status = match status {
                    Status::Pass => "pass",
                    Status::Vacuous => "vacuous",
                    Status::Fail => "fail",
                };
                w.write_record([t.trial.to_string().as_str(), s.name(), status])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

type Systems = (Box<dyn ArrowSystem + Send>, Box<dyn ArrowSystem + Send>);

fn returns_to_zero<S: ArrowSystem + ?Sized>(sys: &S, horizon: usize, after: usize) -> u64 {
    let traj = run_walk(&zero_right_transform(sys), horizon);
    traj.positions().iter().skip(after + 1).filter(|&&x| x == 0).count() as u64
}

fn build_pair(cfg: &CampaignConfig, trial: usize) -> arrowwalk::Result<(CoupledPair, Option<Systems>)> {
    let field = UniformField::new(cfg.seed);
    let stream = StreamTag(trial as u64);
    let h = cfg.horizon;
    let walk = |l: Box<dyn ArrowSystem + Send>, r: Box<dyn ArrowSystem + Send>, mode, prov| {
        let pair = CoupledPair::new(run_walk(&*l, h), run_walk(&*r, h), mode, prov)?;
        Ok((pair, Some((l, r))))
    };
    match cfg.family {
        Family::SharedUniform => walk(
            Box::new(sample_system(&cfg.env, field, stream)),
            Box::new(sample_system(&cfg.env2, field, stream)),
            RelationMode::Trileq,
            Provenance::SharedUniform,
        ),
        Family::IndependentControl => walk(
            Box::new(sample_system(&cfg.env, field, stream)),
            Box::new(sample_system(&cfg.env2, field, stream.derive(0xC0))),
            RelationMode::Preceq,
            Provenance::Independent,
        ),
        Family::BlockStack => {
            let mut sys =
                couple_block_stacks(&cfg.env, &cfg.partition, &[cfg.env.clone(), cfg.env2.clone()], field, stream)?;
            let r = sys.pop().expect("two systems");
            let l = sys.pop().expect("two systems");
            walk(Box::new(l), Box::new(r), RelationMode::Preceq, Provenance::BlockStack)
        }
        Family::SwapChain => {
            let c = chain_glue(&cfg.env, &cfg.env2, &cfg.partition, field, stream)?;
            walk(Box::new(c.left()), Box::new(c.right()), RelationMode::Preceq, Provenance::SwapChain)
        }
        Family::Envelope => {
            let envelope = Envelope::new(cfg.eta.clone())?;
            let law = Clamped { law: Orrw { beta: cfg.beta }, envelope: envelope.clone() };
            let run = envelope_walk(&law, &envelope, field, stream, h)?;
            Ok((run.pair, None))
        }
        Family::Ce1 => {
            let (l, r) = build_ce1(cfg.ce1_n)?;
            walk(Box::new(l), Box::new(r), RelationMode::Trileq, Provenance::Counterexample)
        }
        Family::Ce2 => {
            let pair = build_ce2(Ce2Variant::Periodic { cycles: (h / 28).max(1) })?;
            let order = paths_admit_preceq(pair.left.positions(), pair.right.positions())?;
            Ok((pair, Some((Box::new(order.left), Box::new(order.right)))))
        }
    }
}

fn run_trial(cfg: &CampaignConfig, trial: usize) -> TrialRecord {
    let mut record = TrialRecord {
        trial,
        statuses: Vec::new(),
        witnesses: Vec::new(),
        error: None,
        left_final: None,
        right_final: None,
        right_max: None,
        returns: None,
    };
    match build_pair(cfg, trial) {
        Err(e) => {
            record.error = Some(e.to_string());
            record.statuses = cfg.checks.iter().map(|&s| (s, Status::Fail)).collect();
            record.witnesses = vec![None; cfg.checks.len()];
        }
        Ok((pair, systems)) => {
            for &s in &cfg.checks {
                let res = verify(&pair, s);
                let status = match (res.passed, res.vacuous) {
                    (false, _) => Status::Fail,
                    (true, true) => Status::Vacuous,
                    (true, false) => Status::Pass,
                };
                record.statuses.push((s, status));
                record.witnesses.push(res.witness);
            }
            record.left_final = Some(pair.left.last());
            record.right_final = Some(pair.right.last());
            record.right_max = pair.right.positions().iter().copied().max();
            if let (true, Some((l, r))) = (cfg.recurrence, systems) {
                let h = pair.horizon();
                record.returns = Some((returns_to_zero(&*l, h, 0), returns_to_zero(&*r, h, 0)));
            }
        }
    }
    record
}

pub fn run_campaign(cfg: &CampaignConfig) -> Result<Campaign> {
    cfg.validate()?;
    let start = Instant::now();
    let trials: Vec<TrialRecord> = (0..cfg.effective_trials()).into_par_iter().map(|i| run_trial(cfg, i)).collect();

    let mut checks: Vec<CheckTally> = cfg
        .checks
        .iter()
        .map(|&statement| CheckTally { statement, pass: 0, vacuous: 0, fail: 0, first_failure: None })
        .collect();
    for t in &trials {
        for (i, (_, status)) in t.statuses.iter().enumerate() {
            let tally = &mut checks[i];
            match status {
                Status::Pass => tally.pass += 1,
                Status::Vacuous => tally.vacuous += 1,
                Status::Fail => {
                    tally.fail += 1;
                    tally.first_failure.get_or_insert_with(|| FailureRecord {
                        trial: t.trial,
                        witness: t.witnesses[i].clone(),
                        error: t.error.clone(),
                    });
                }
            }
        }
    }

    let per_step = |f: &dyn Fn(&TrialRecord) -> Option<i64>| {
        let v: Vec<f64> = trials.iter().filter_map(f).map(|x| x as f64 / cfg.horizon as f64).collect();
        Summary::of(&v)
    };
    let returns: Vec<(u64, u64)> = trials.iter().filter_map(|t| t.returns).collect();
    let left_returns: Vec<f64> = returns.iter().map(|r| r.0 as f64).collect();
    let right_returns: Vec<f64> = returns.iter().map(|r| r.1 as f64).collect();
    let returns_order = (!returns.is_empty()).then(|| {
        let ge = returns.iter().filter(|r| r.0 >= r.1).count() as u64;
        ReturnsOrder { left_at_least_right: ge, left_below_right: returns.len() as u64 - ge }
    });

    let milestones = match cfg.family {
        Family::Ce1 => {
            let all = ce1_milestones(cfg.ce1_n, 30)?;
            let kmax = all.rows.iter().take_while(|m| m.last_exit as usize <= cfg.horizon).count().max(1);
            Some(ce1_milestones(cfg.ce1_n, kmax as u32)?)
        }
        _ => None,
    };
    let lead = match cfg.family {
        Family::Ce2 => {
            let pair = build_ce2(Ce2Variant::Periodic { cycles: (cfg.horizon / 28).max(1) })?;
            Some(lead_sets(&pair, pair.horizon())?)
        }
        _ => None,
    };

    let report = CampaignReport {
        family: cfg.family,
        trials: trials.len(),
        horizon: cfg.horizon,
        seed: cfg.seed,
        checks,
        errored_trials: trials.iter().filter(|t| t.error.is_some()).count() as u64,
        left_speed: per_step(&|t| t.left_final),
        right_speed: per_step(&|t| t.right_final),
        right_max: per_step(&|t| t.right_max),
        left_plus_returns: Summary::of(&left_returns),
        right_plus_returns: Summary::of(&right_returns),
        returns_order,
        milestones,
        lead_sets: lead,
        wall_clock_seconds: cfg.timestamp.then(|| start.elapsed().as_secs_f64()),
    };
    Ok(Campaign { report, trials })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
}

impl Estimate {
    fn of(values: &[f64]) -> Estimate {
        let s = Summary::of(values).expect("at least one trial");
        Estimate { mean: s.mean, std_err: s.std_err }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecurrenceStats {
    pub trials: usize,
    pub horizon: usize,
    pub after: usize,
    /// `X_T / T`.
    pub speed: Estimate,
    /// `max_{n <= T} X_n / T`.
    pub max_speed: Estimate,
    /// Returns to 0 of the zero-right transform at times `n > after`.
    pub returns_after: Estimate,
    /// Fraction of trials with at least one such return.
    pub returning_fraction: f64,
    /// Number of trials by total returns to 0 of the zero-right transform.
    pub returns_histogram: BTreeMap<u64, u64>,
}

/// Speed and zero-right recurrence statistics of the excited walk in `env`.
pub fn speed_and_recurrence_stats(
    env: &CookieEnvironment,
    trials: usize,
    horizon: usize,
    seed: u64,
    after: usize,
) -> Result<RecurrenceStats> {
    env.validate()?;
    if trials == 0 || horizon == 0 {
        return Err(LabError::Config("trials and horizon must be at least 1".into()));
    }
    let field = UniformField::new(seed);
    let per_trial: Vec<(f64, f64, u64, u64)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let sys = sample_system(env, field, StreamTag(i as u64));
            let traj = run_walk(&sys, horizon);
            let max = traj.positions().iter().copied().max().unwrap_or(0);
            let plus = run_walk(&zero_right_transform(&sys), horizon);
            let zeros: Vec<usize> = plus.positions().iter().enumerate().skip(1).filter(|p| *p.1 == 0).map(|p| p.0).collect();
            let late = zeros.iter().filter(|&&n| n > after).count() as u64;
            (traj.last() as f64 / horizon as f64, max as f64 / horizon as f64, zeros.len() as u64, late)
        })
        .collect();
    let mut histogram = BTreeMap::new();
    for t in &per_trial {
        *histogram.entry(t.2).or_insert(0) += 1;
    }
    let late: Vec<f64> = per_trial.iter().map(|t| t.3 as f64).collect();
    Ok(RecurrenceStats {
        trials,
        horizon,
        after,
        speed: Estimate::of(&per_trial.iter().map(|t| t.0).collect::<Vec<_>>()),
        max_speed: Estimate::of(&per_trial.iter().map(|t| t.1).collect::<Vec<_>>()),
        returns_after: Estimate::of(&late),
        returning_fraction: late.iter().filter(|&&r| r > 0.0).count() as f64 / trials as f64,
        returns_histogram: histogram,
    })
}
