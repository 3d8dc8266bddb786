//! The likelihood ascent search detector family.
//!
//! A detector is fixed by a periodic schedule of candidate sets `L(n)`. At
//! each step every candidate `k ∈ L(n)` is flipped iff its gradient component
//! exceeds the threshold `t_k(n) = Σ_{j∈L(n)} |H_kj|` in the ascent direction
//! (strict inequality), all decisions taken on the pre-step gradient. The
//! gradient is then updated incrementally with one column of `H` per flipped
//! bit. A full period without flips means a fixed point was reached.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::baseline;
use crate::channel::{BitVector, Channel, Observation};
use crate::{Error, Result};

/// Default cap on schedule periods, `64·K`.
pub fn default_max_periods(k: usize) -> usize {
    64 * k.max(1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    SlasCircular,
    SlasOrdered,
    Wslas,
    Gplas,
    Plas,
    Custom,
}

impl ScheduleKind {
    pub fn label(self) -> &'static str {
        match self {
            Self::SlasCircular => "slas-circular",
            Self::SlasOrdered => "slas-ordered",
            Self::Wslas => "wslas",
            Self::Gplas => "gplas",
            Self::Plas => "plas",
            Self::Custom => "custom",
        }
    }

    /// True for the kinds whose candidate sets are all singletons.
    pub fn is_sequential(self) -> bool {
        matches!(self, Self::SlasCircular | Self::SlasOrdered | Self::Wslas)
    }
}

/// A periodic sequence of candidate sets over users `0..K` (0-based).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    kind: ScheduleKind,
    k: usize,
    period: Vec<Vec<usize>>,
}

impl Schedule {
    /// `({1}, {2}, …, {K})`.
    pub fn slas_circular(k: usize) -> Self {
        Self {
            kind: ScheduleKind::SlasCircular,
            k,
            period: (0..k).map(|i| vec![i]).collect(),
        }
    }

    /// One user per step, in the given order (a permutation of `0..K`).
    pub fn slas_ordered(order: &[usize]) -> Result<Self> {
        let k = order.len();
        let mut seen = vec![false; k];
        for &i in order {
            if i >= k || std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidSchedule(format!(
                    "order {:?} is not a permutation of 1..{k}",
                    one_based(order)
                )));
            }
        }
        Ok(Self {
            kind: ScheduleKind::SlasOrdered,
            k,
            period: order.iter().map(|&i| vec![i]).collect(),
        })
    }

    /// An arbitrary periodic sequence of single users that covers all users.
    pub fn wslas(k: usize, sequence: &[usize]) -> Result<Self> {
        Self::validated(ScheduleKind::Wslas, k, sequence.iter().map(|&i| vec![i]).collect())
    }

    /// Groups forming a partition of `0..K`, updated in the given order.
    pub fn gplas(k: usize, groups: Vec<Vec<usize>>) -> Result<Self> {
        Self::validated(ScheduleKind::Gplas, k, groups)
    }

    /// Consecutive groups of `size` users; the last group may be smaller.
    pub fn gplas_uniform(k: usize, size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidSchedule("group size must be positive".into()));
        }
        let groups = (0..k)
            .collect::<Vec<_>>()
            .chunks(size)
            .map(<[usize]>::to_vec)
            .collect();
        Self::gplas(k, groups)
    }

    /// `L(n) = {1..K}` for all `n`.
    pub fn plas(k: usize) -> Self {
        Self {
            kind: ScheduleKind::Plas,
            k,
            period: vec![(0..k).collect()],
        }
    }

    /// Any periodic sequence of nonempty sets covering every user.
    pub fn custom(k: usize, period: Vec<Vec<usize>>) -> Result<Self> {
        Self::validated(ScheduleKind::Custom, k, period)
    }

    fn validated(kind: ScheduleKind, k: usize, period: Vec<Vec<usize>>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidSchedule("K must be positive".into()));
        }
        if period.is_empty() {
            return Err(Error::InvalidSchedule("empty period".into()));
        }
        let mut count = vec![0usize; k];
        for set in &period {
            if set.is_empty() {
                return Err(Error::InvalidSchedule("empty candidate set".into()));
            }
            let mut local = vec![false; k];
            for &i in set {
                if i >= k {
                    return Err(Error::InvalidSchedule(format!("user {} out of range 1..{k}", i + 1)));
                }
                if std::mem::replace(&mut local[i], true) {
                    return Err(Error::InvalidSchedule(format!("user {} repeated within a set", i + 1)));
                }
                count[i] += 1;
            }
        }
        if let Some(missing) = count.iter().position(|&c| c == 0) {
            return Err(Error::InvalidSchedule(format!(
                "user {} is never updated in a period",
                missing + 1
            )));
        }
        match kind {
            ScheduleKind::SlasCircular | ScheduleKind::SlasOrdered | ScheduleKind::Wslas => {
                if period.iter().any(|s| s.len() != 1) {
                    return Err(Error::InvalidSchedule(format!(
                        "{} requires singleton candidate sets",
                        kind.label()
                    )));
                }
            }
            ScheduleKind::Gplas => {
                if count.iter().any(|&c| c != 1) {
                    return Err(Error::InvalidSchedule("GPLAS groups must partition the users".into()));
                }
            }
            ScheduleKind::Plas => {
                if period.len() != 1 || period[0].len() != k {
                    return Err(Error::InvalidSchedule("PLAS uses the single set {1..K}".into()));
                }
            }
            ScheduleKind::Custom => {}
        }
        Ok(Self { kind, k, period })
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn period(&self) -> &[Vec<usize>] {
        &self.period
    }

    pub fn len(&self) -> usize {
        self.period.len()
    }

    pub fn is_empty(&self) -> bool {
        self.period.is_empty()
    }

    /// Each user appears in only one distinct candidate set over the period.
    pub fn is_time_invariant(&self) -> bool {
        (0..self.k).all(|user| {
            let mut sets = self.period.iter().filter(|s| s.contains(&user)).map(|s| {
                let mut s = s.clone();
                s.sort_unstable();
                s
            });
            let first = sets.next();
            sets.all(|s| Some(&s) == first.as_ref())
        })
    }

    pub fn to_doc(&self) -> ScheduleDoc {
        let groups = match self.kind {
            ScheduleKind::Gplas | ScheduleKind::Custom | ScheduleKind::Wslas => {
                Some(self.period.iter().map(|s| one_based(s)).collect())
            }
            _ => None,
        };
        let order = match self.kind {
            ScheduleKind::SlasOrdered => Some(self.period.iter().map(|s| s[0] + 1).collect()),
            _ => None,
        };
        ScheduleDoc {
            kind: self.kind,
            groups,
            order,
        }
    }
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|i| i + 1).collect()
}

/// JSON form of a schedule with 1-based user indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleDoc {
    pub kind: ScheduleKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<usize>>,
}

impl ScheduleDoc {
    pub fn into_schedule(self, k: usize) -> Result<Schedule> {
        let zero_based = |v: &[usize]| -> Result<Vec<usize>> {
            v.iter()
                .map(|&i| {
                    i.checked_sub(1)
                        .ok_or_else(|| Error::InvalidSchedule("user indices are 1-based".into()))
                })
                .collect()
        };
        let groups = || -> Result<Vec<Vec<usize>>> {
            self.groups
                .as_deref()
                .ok_or_else(|| Error::InvalidSchedule(format!("{} needs `groups`", self.kind.label())))?
                .iter()
                .map(|g| zero_based(g))
                .collect()
        };
        match self.kind {
            ScheduleKind::SlasCircular => Ok(Schedule::slas_circular(k)),
            ScheduleKind::Plas => Ok(Schedule::plas(k)),
            ScheduleKind::SlasOrdered => {
                let order = self
                    .order
                    .as_deref()
                    .ok_or_else(|| Error::InvalidSchedule("slas-ordered needs `order`".into()))?;
                let s = Schedule::slas_ordered(&zero_based(order)?)?;
                if s.k() != k {
                    return Err(Error::InvalidSchedule(format!("order covers {} users, K = {k}", s.k())));
                }
                Ok(s)
            }
            ScheduleKind::Gplas => Schedule::gplas(k, groups()?),
            ScheduleKind::Custom => Schedule::custom(k, groups()?),
            ScheduleKind::Wslas => {
                let seq = groups()?
                    .into_iter()
                    .map(|g| {
                        if g.len() == 1 {
                            Ok(g[0])
                        } else {
                            Err(Error::InvalidSchedule("wslas groups must be singletons".into()))
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                Schedule::wslas(k, &seq)
            }
        }
    }
}

/// Parameters for [`make_schedule`].
#[derive(Clone, Debug, Default)]
pub struct ScheduleParams {
    pub groups: Option<Vec<Vec<usize>>>,
    pub order: Option<Vec<usize>>,
}

/// Constructor dispatch by kind. Indices in `params` are 0-based.
pub fn make_schedule(kind: ScheduleKind, k: usize, params: ScheduleParams) -> Result<Schedule> {
    let need_groups = || {
        params
            .groups
            .clone()
            .ok_or_else(|| Error::InvalidSchedule(format!("{} needs groups", kind.label())))
    };
    match kind {
        ScheduleKind::SlasCircular => Ok(Schedule::slas_circular(k)),
        ScheduleKind::Plas => Ok(Schedule::plas(k)),
        ScheduleKind::SlasOrdered => {
            let order = params
                .order
                .as_deref()
                .ok_or_else(|| Error::InvalidSchedule("slas-ordered needs an order".into()))?;
            if order.len() != k {
                return Err(Error::InvalidSchedule("order must list every user once".into()));
            }
            Schedule::slas_ordered(order)
        }
        ScheduleKind::Gplas => Schedule::gplas(k, need_groups()?),
        ScheduleKind::Custom => Schedule::custom(k, need_groups()?),
        ScheduleKind::Wslas => {
            let seq: Vec<usize> = need_groups()?.into_iter().flatten().collect();
            Schedule::wslas(k, &seq)
        }
    }
}

/// `t_k = Σ_{j∈L} |H_kj|` for every `k ∈ L`, in the order of `set`.
pub fn thresholds_for_set(ch: &Channel, set: &[usize]) -> Vec<f64> {
    let h = ch.h();
    set.iter()
        .map(|&k| set.iter().map(|&j| h[(k, j)].abs()).sum())
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdRegime {
    /// Exact thresholds of a time-invariant schedule.
    ExactTimeInvariant,
    /// Per-user maximum over the period; a conservative stand-in.
    ConservativePeriodMax,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdVector {
    pub values: Vec<f64>,
    pub regime: ThresholdRegime,
}

impl ThresholdVector {
    /// `t_k = A_k²`, the sequential (and LML) thresholds.
    pub fn sequential(ch: &Channel) -> Self {
        Self {
            values: ch.amplitudes().iter().map(|a| a * a).collect(),
            regime: ThresholdRegime::ExactTimeInvariant,
        }
    }

    /// Caller-supplied thresholds, taken as exact.
    pub fn exact(values: Vec<f64>) -> Self {
        Self {
            values,
            regime: ThresholdRegime::ExactTimeInvariant,
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

/// Effective per-user thresholds of a schedule's fixed-point region.
///
/// Time-invariant schedules get their exact thresholds. For other schedules
/// each user gets the largest threshold it sees over a period, which yields
/// a superset of the true region.
pub fn effective_thresholds(ch: &Channel, sched: &Schedule) -> ThresholdVector {
    let mut t = vec![0.0f64; ch.k()];
    for set in sched.period() {
        for (&k, tk) in set.iter().zip(thresholds_for_set(ch, set)) {
            t[k] = t[k].max(tk);
        }
    }
    let regime = if sched.is_time_invariant() {
        ThresholdRegime::ExactTimeInvariant
    } else {
        ThresholdRegime::ConservativePeriodMax
    };
    ThresholdVector { values: t, regime }
}

/// Iteration state: current bits, maintained gradient, counters.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectorState {
    pub b: BitVector,
    pub g: Vec<f64>,
    pub step: usize,
    pub flips: usize,
}

impl DetectorState {
    pub fn new(ch: &Channel, y: &[f64], b0: BitVector) -> Self {
        let g = ch.gradient(y, &b0);
        Self {
            b: b0,
            g,
            step: 0,
            flips: 0,
        }
    }

    /// Largest deviation between the maintained gradient and `-Hb + Ay`.
    pub fn gradient_drift(&self, ch: &Channel, y: &[f64]) -> f64 {
        ch.gradient(y, &self.b)
            .iter()
            .zip(&self.g)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Which candidates of `set` would flip under `thresholds`, judged on the
/// current gradient.
fn flip_decisions(state: &DetectorState, set: &[usize], thresholds: &[f64], out: &mut Vec<usize>) {
    out.clear();
    for (&k, &t) in set.iter().zip(thresholds) {
        let g = state.g[k];
        let fire = if state.b[k] < 0 { g > t } else { g < -t };
        if fire {
            out.push(k);
        }
    }
}

/// Applies flips and the batched gradient update `g += 2 Σ b_i(n) H_i`.
fn apply_flips(state: &mut DetectorState, ch: &Channel, flipped: &[usize]) {
    let h = ch.h();
    for &i in flipped {
        let bi = f64::from(state.b[i]);
        for (gk, hki) in state.g.iter_mut().zip(h.column(i).iter()) {
            *gk += 2.0 * bi * hki;
        }
    }
    for &i in flipped {
        state.b.flip(i);
    }
    state.flips += flipped.len();
    state.step += 1;
}

/// One update over candidate set `set`; returns the flipped users.
pub fn las_step(state: &mut DetectorState, ch: &Channel, set: &[usize]) -> Vec<usize> {
    let t = thresholds_for_set(ch, set);
    let mut flipped = Vec::new();
    flip_decisions(state, set, &t, &mut flipped);
    apply_flips(state, ch, &flipped);
    flipped
}

/// Likelihood change of flipping `flipped` from `state`, computed from the
/// pre-flip gradient as `Δbᵀ(g + ½z)` with `z = -HΔb`.
pub fn likelihood_delta(ch: &Channel, state: &DetectorState, flipped: &[usize]) -> f64 {
    if flipped.is_empty() {
        return 0.0;
    }
    let h = ch.h();
    let k = ch.k();
    let mut db = vec![0.0; k];
    for &i in flipped {
        db[i] = -2.0 * f64::from(state.b[i]);
    }
    let mut z = vec![0.0; k];
    for &i in flipped {
        for (zk, hki) in z.iter_mut().zip(h.column(i).iter()) {
            *zk -= hki * db[i];
        }
    }
    flipped
        .iter()
        .map(|&i| db[i] * (state.g[i] + 0.5 * z[i]))
        .sum()
}

/// Per-step information handed to run observers.
pub struct StepRecord<'a> {
    /// Index of the candidate set within the period.
    pub set_index: usize,
    pub flipped: &'a [usize],
    /// Likelihood change predicted from the pre-step gradient.
    pub predicted_delta: f64,
    /// State after the step.
    pub state: &'a DetectorState,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub fixed_point: BitVector,
    /// Steps executed, including the final flip-free period.
    pub steps: usize,
    /// Total number of bit flips `M`.
    pub flips: usize,
    /// Step index of the last flip, if any.
    pub last_flip_step: Option<usize>,
    /// `f` at the initial vector followed by `f` after every step.
    pub likelihood_trace: Option<Vec<f64>>,
    pub converged: bool,
}

impl DetectionResult {
    /// This run's contribution `M/K` to the bit flip rate.
    pub fn bfr_contribution(&self) -> f64 {
        self.flips as f64 / self.fixed_point.len() as f64
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub max_periods: Option<usize>,
    pub keep_trace: bool,
}


/// A schedule bound to a channel with the per-step thresholds precomputed.
#[derive(Clone, Debug)]
pub struct LasDetector {
    schedule: Schedule,
    step_thresholds: Vec<Vec<f64>>,
    effective: ThresholdVector,
}

impl LasDetector {
    pub fn new(ch: &Channel, schedule: Schedule) -> Result<Self> {
        if schedule.k() != ch.k() {
            return Err(Error::Dimension {
                what: "schedule users",
                expected: ch.k(),
                got: schedule.k(),
            });
        }
        let step_thresholds = schedule.period().iter().map(|s| thresholds_for_set(ch, s)).collect();
        let effective = effective_thresholds(ch, &schedule);
        Ok(Self {
            schedule,
            step_thresholds,
            effective,
        })
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn thresholds(&self) -> &ThresholdVector {
        &self.effective
    }

    pub fn run(&self, ch: &Channel, y: &[f64], b0: BitVector, opts: RunOptions) -> DetectionResult {
        self.run_observed(ch, y, b0, opts, |_| {})
    }

    /// Runs to a fixed point, calling `observe` after every step.
    pub fn run_observed<F>(
        &self,
        ch: &Channel,
        y: &[f64],
        b0: BitVector,
        opts: RunOptions,
        mut observe: F,
    ) -> DetectionResult
    where
        F: FnMut(&StepRecord<'_>),
    {
        assert_eq!(b0.len(), ch.k(), "initial vector length must equal K");
        let period = self.schedule.period();
        let p = period.len();
        let max_steps = opts.max_periods.unwrap_or_else(|| default_max_periods(ch.k())) * p;
        let mut state = DetectorState::new(ch, y, b0);
        let mut trace = opts.keep_trace.then(|| vec![ch.likelihood(y, &state.b)]);
        let mut quiet = 0usize;
        let mut last_flip_step = None;
        let mut converged = false;
        let mut flipped = Vec::with_capacity(ch.k());

        while state.step < max_steps {
            let idx = state.step % p;
            flip_decisions(&state, &period[idx], &self.step_thresholds[idx], &mut flipped);
            let predicted_delta = likelihood_delta(ch, &state, &flipped);
            let step = state.step;
            apply_flips(&mut state, ch, &flipped);
            if let Some(trace) = trace.as_mut() {
                trace.push(ch.likelihood(y, &state.b));
            }
            observe(&StepRecord {
                set_index: idx,
                flipped: &flipped,
                predicted_delta,
                state: &state,
            });
            if flipped.is_empty() {
                quiet += 1;
                if quiet >= p {
                    converged = true;
                    break;
                }
            } else {
                quiet = 0;
                last_flip_step = Some(step);
            }
        }

        DetectionResult {
            fixed_point: state.b,
            steps: state.step,
            flips: state.flips,
            last_flip_step,
            likelihood_trace: trace,
            converged,
        }
    }
}

/// Runs schedule `sched` from `b0` on observation `y`.
pub fn run_las(
    ch: &Channel,
    y: &Observation,
    sched: &Schedule,
    b0: BitVector,
    max_periods: usize,
) -> Result<DetectionResult> {
    let det = LasDetector::new(ch, sched.clone())?;
    Ok(det.run(
        ch,
        &y.y,
        b0,
        RunOptions {
            max_periods: Some(max_periods),
            keep_trace: true,
        },
    ))
}

/// `b ⊗ (Ay − Hb) ≥ −t` elementwise.
pub fn fixed_point_region_check(ch: &Channel, y: &[f64], b: &BitVector, t: &[f64]) -> bool {
    ch.gradient(y, b)
        .iter()
        .zip(t)
        .enumerate()
        .all(|(k, (g, t))| f64::from(b[k]) * g >= -t)
}

/// `b ⊗ (y − (R − I)Ab) ≥ 0`, the sequential / LML region.
pub fn wslas_region_check(ch: &Channel, y: &[f64], b: &BitVector) -> bool {
    let k = ch.k();
    let r = ch.r();
    (0..k).all(|i| {
        let interference: f64 = (0..k)
            .filter(|&j| j != i)
            .map(|j| r[(i, j)] * ch.amplitude(j) * f64::from(b[j]))
            .sum();
        f64::from(b[i]) * (y[i] - interference) >= 0.0
    })
}

/// `|A_k y_k| > Σ_j |H_kj| + t_k − 2H_kk` for every user. When it holds the
/// maximum likelihood point `sgn(y)` is the only fixed point.
pub fn unique_fixed_point_check(ch: &Channel, y: &[f64], t: &[f64]) -> bool {
    let h = ch.h();
    (0..ch.k()).all(|k| {
        let row: f64 = (0..ch.k()).map(|j| h[(k, j)].abs()).sum();
        (ch.amplitude(k) * y[k]).abs() > row + t[k] - 2.0 * h[(k, k)]
    })
}

/// Starting points for the detectors.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialDetector {
    AllPlus,
    Random,
    #[default]
    Mf,
    Decorrelator,
    Mmse,
    Given(BitVector),
}

impl InitialDetector {
    pub fn label(&self) -> &'static str {
        match self {
            Self::AllPlus => "all-plus",
            Self::Random => "random",
            Self::Mf => "mf",
            Self::Decorrelator => "decorrelator",
            Self::Mmse => "mmse",
            Self::Given(_) => "given",
        }
    }

    pub fn initial<R: Rng + ?Sized>(&self, ch: &Channel, obs: &Observation, rng: &mut R) -> Result<BitVector> {
        match self {
            Self::AllPlus => Ok(BitVector::all_plus(ch.k())),
            Self::Random => Ok(BitVector::random(ch.k(), rng)),
            Self::Mf => Ok(baseline::mf_detect(obs)),
            Self::Decorrelator => baseline::decorrelator_detect(ch, obs),
            Self::Mmse => baseline::mmse_detect(ch, obs),
            Self::Given(b) => {
                if b.len() != ch.k() {
                    return Err(Error::Dimension {
                        what: "initial vector",
                        expected: ch.k(),
                        got: b.len(),
                    });
                }
                Ok(b.clone())
            }
        }
    }
}
