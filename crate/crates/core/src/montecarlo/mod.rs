//! Reproducible Monte Carlo estimation of BER, VER and bit flip rate.
//!
//! Each trial draws its bits and noise from a stream keyed by
//! `(seed, sweep point, trial)`. Trials are evaluated in batches (in parallel
//! with the `parallel` feature) and folded strictly in trial order, so the
//! result is bit-identical for any number of worker threads.

pub mod audit;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::baseline;
use crate::channel::{BitVector, Channel, Observation};
use crate::las::{InitialDetector, LasDetector, RunOptions, ScheduleDoc};
use crate::rng::{self, domain};
use crate::{Error, Result};

pub const DEFAULT_BATCH: u64 = 2048;
pub const DEFAULT_MAX_TRIALS: u64 = 50_000_000;

/// Binomial standard error `√(p(1−p)/n)`.
pub fn binomial_se(p: f64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Noise level giving `snr_db` for a user of amplitude `amp`.
pub fn sigma_for_snr(amp: f64, snr_db: f64) -> f64 {
    amp / 10f64.powf(snr_db / 20.0)
}

/// A detector under test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum DetectorSpec {
    Las {
        schedule: ScheduleDoc,
        #[serde(default)]
        initial: InitialDetector,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_periods: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
    Mf,
    Decorrelator,
    Mmse,
    Gml,
    /// Uniformly random guess; the random initial on its own.
    Random,
}

impl DetectorSpec {
    pub fn las(schedule: ScheduleDoc, initial: InitialDetector) -> Self {
        Self::Las {
            schedule,
            initial,
            max_periods: None,
            label: None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Las {
                label: Some(l), ..
            } => l.clone(),
            Self::Las {
                schedule, initial, ..
            } => format!("{}/{}", schedule.kind.label(), initial.label()),
            Self::Mf => "mf".into(),
            Self::Decorrelator => "decorrelator".into(),
            Self::Mmse => "mmse".into(),
            Self::Gml => "gml".into(),
            Self::Random => "random".into(),
        }
    }

    pub fn is_las(&self) -> bool {
        matches!(self, Self::Las { .. })
    }
}

enum Prepared {
    Las {
        det: Box<LasDetector>,
        initial: InitialDetector,
        max_periods: Option<usize>,
    },
    Mf,
    Decorrelator,
    Mmse,
    Gml,
    Random,
}

impl Prepared {
    fn new(ch: &Channel, spec: &DetectorSpec) -> Result<Self> {
        Ok(match spec {
            DetectorSpec::Las {
                schedule,
                initial,
                max_periods,
                ..
            } => Self::Las {
                det: Box::new(LasDetector::new(ch, schedule.clone().into_schedule(ch.k())?)?),
                initial: initial.clone(),
                max_periods: *max_periods,
            },
            DetectorSpec::Mf => Self::Mf,
            DetectorSpec::Decorrelator => Self::Decorrelator,
            DetectorSpec::Mmse => Self::Mmse,
            DetectorSpec::Gml => Self::Gml,
            DetectorSpec::Random => Self::Random,
        })
    }

    fn detect<R: Rng + ?Sized>(&self, ch: &Channel, obs: &Observation, init_rng: &mut R) -> Result<Outcome> {
        Ok(match self {
            Self::Las {
                det,
                initial,
                max_periods,
            } => {
                let b0 = initial.initial(ch, obs, init_rng)?;
                let r = det.run(
                    ch,
                    &obs.y,
                    b0,
                    RunOptions {
                        max_periods: *max_periods,
                        keep_trace: false,
                    },
                );
                Outcome {
                    b: r.fixed_point,
                    flips: r.flips as u64,
                    steps: r.steps as u64,
                    converged: r.converged,
                }
            }
            Self::Mf => Outcome::plain(baseline::mf_detect(obs)),
            Self::Decorrelator => Outcome::plain(baseline::decorrelator_detect(ch, obs)?),
            Self::Mmse => Outcome::plain(baseline::mmse_detect(ch, obs)?),
            Self::Gml => Outcome::plain(baseline::gml_bruteforce(ch, obs, baseline::GML_MAX_K)?),
            Self::Random => Outcome::plain(BitVector::random(ch.k(), init_rng)),
        })
    }
}

struct Outcome {
    b: BitVector,
    flips: u64,
    steps: u64,
    converged: bool,
}

impl Outcome {
    fn plain(b: BitVector) -> Self {
        Self {
            b,
            flips: 0,
            steps: 0,
            converged: true,
        }
    }
}

/// Simulation settings. Exactly one of `trials` and `target_errors` is set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    /// Stop each detector after this many vector errors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_errors: Option<u64>,
    /// Safety cap on trials in `target_errors` mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_trials: Option<u64>,
    pub seed: u64,
    /// Sweep points in dB, referenced to `reference_user`.
    pub snr_db: Vec<f64>,
    /// 1-based user whose amplitude sets `σ` at each sweep point.
    #[serde(default = "default_reference_user")]
    pub reference_user: usize,
    pub detectors: Vec<DetectorSpec>,
    #[serde(default = "default_true")]
    pub common_randomness: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<u64>,
}

fn default_reference_user() -> usize {
    1
}

fn default_true() -> bool {
    true
}

impl SimConfig {
    pub fn with_trials(seed: u64, trials: u64, snr_db: Vec<f64>, detectors: Vec<DetectorSpec>) -> Self {
        Self {
            trials: Some(trials),
            target_errors: None,
            max_trials: None,
            seed,
            snr_db,
            reference_user: 1,
            detectors,
            common_randomness: true,
            batch_size: None,
        }
    }

    pub fn with_target_errors(seed: u64, target: u64, snr_db: Vec<f64>, detectors: Vec<DetectorSpec>) -> Self {
        Self {
            trials: None,
            target_errors: Some(target),
            ..Self::with_trials(seed, 0, snr_db, detectors)
        }
    }

    pub fn validate(&self, ch: &Channel) -> Result<()> {
        match (self.trials, self.target_errors) {
            (Some(_), Some(_)) | (None, None) => {
                return Err(Error::Config("exactly one of trials and target_errors must be set".into()))
            }
            (Some(0), _) | (_, Some(0)) => return Err(Error::Config("trial or error target must be positive".into())),
            _ => {}
        }
        if self.detectors.is_empty() {
            return Err(Error::Config("no detectors configured".into()));
        }
        if self.detectors.len() >= 1024 {
            return Err(Error::Config("at most 1023 detectors per run".into()));
        }
        if self.reference_user == 0 || self.reference_user > ch.k() {
            return Err(Error::Config(format!(
                "reference_user must be in 1..={}, got {}",
                ch.k(),
                self.reference_user
            )));
        }
        if self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("snr_db values must be finite".into()));
        }
        if self.batch_size == Some(0) {
            return Err(Error::Config("batch_size must be positive".into()));
        }
        Ok(())
    }

    pub fn sigma_at(&self, ch: &Channel, snr_db: f64) -> f64 {
        sigma_for_snr(ch.amplitude(self.reference_user - 1), snr_db)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    fn binomial(count: u64, n: u64) -> Self {
        let p = if n == 0 { 0.0 } else { count as f64 / n as f64 };
        Self {
            value: p,
            se: binomial_se(p, n),
        }
    }
}

/// One detector at one sweep point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimPoint {
    pub detector: String,
    pub snr_db: f64,
    pub sigma: f64,
    pub trials: u64,
    pub vector_errors: u64,
    pub per_user_ber: Vec<Estimate>,
    pub ver: Estimate,
    /// Mean flips per bit `c = E(M)/K`; zero for non-LAS detectors.
    pub bfr: f64,
    pub mean_steps: f64,
    pub convergence_failures: u64,
    /// In `target_errors` mode, whether the target was met before the cap.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_reached: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub points: Vec<SimPoint>,
}

impl SimResult {
    pub fn convergence_failures(&self) -> u64 {
        self.points.iter().map(|p| p.convergence_failures).sum()
    }

    pub fn point(&self, detector: &str, snr_db: f64) -> Option<&SimPoint> {
        self.points.iter().find(|p| p.detector == detector && p.snr_db == snr_db)
    }
}

/// Per-detector result of one trial, judged against that trial's truth.
struct Scored {
    wrong_bits: Vec<usize>,
    flips: u64,
    steps: u64,
    converged: bool,
}

impl Scored {
    fn new(truth: &BitVector, o: Outcome) -> Self {
        Self {
            wrong_bits: (0..truth.len()).filter(|&k| truth[k] != o.b[k]).collect(),
            flips: o.flips,
            steps: o.steps,
            converged: o.converged,
        }
    }
}

#[derive(Clone, Debug)]
struct Accum {
    trials: u64,
    bit_errors: Vec<u64>,
    vector_errors: u64,
    flips: u64,
    steps: u64,
    failures: u64,
    done: bool,
}

impl Accum {
    fn new(k: usize) -> Self {
        Self {
            trials: 0,
            bit_errors: vec![0; k],
            vector_errors: 0,
            flips: 0,
            steps: 0,
            failures: 0,
            done: false,
        }
    }

    fn add(&mut self, s: &Scored) {
        self.trials += 1;
        for &k in &s.wrong_bits {
            self.bit_errors[k] += 1;
        }
        self.vector_errors += u64::from(!s.wrong_bits.is_empty());
        self.flips += s.flips;
        self.steps += s.steps;
        self.failures += u64::from(!s.converged);
    }
}

/// Stream ids: the sweep point and detector go in the high bits.
fn stream_hi(point: usize, detector: Option<usize>) -> u64 {
    (point as u64) * 1024 + detector.map_or(0, |d| d as u64 + 1)
}

struct Sweep<'a> {
    ch: &'a Channel,
    cfg: &'a SimConfig,
    prepared: &'a [Prepared],
    point: usize,
    sigma: f64,
}

impl Sweep<'_> {
    /// Draws `(b, y)` and the initial-vector stream for `detector`; under
    /// common randomness every detector gets the same draws.
    fn draws(&self, index: u64, detector: usize) -> (BitVector, Observation, rng::StreamRng) {
        let hi = if self.cfg.common_randomness {
            stream_hi(self.point, None)
        } else {
            stream_hi(self.point, Some(detector))
        };
        let mut trng = rng::stream(self.cfg.seed, domain::TRIAL, rng::pack(hi, index));
        let b = BitVector::random(self.ch.k(), &mut trng);
        let obs = self.ch.transmit_with(&b, self.sigma, &mut trng);
        (b, obs, rng::stream(self.cfg.seed, domain::INITIAL, rng::pack(hi, index)))
    }

    fn run_trial(&self, index: u64, active: &[bool]) -> Result<Vec<Option<Scored>>> {
        let mut shared = None;
        let mut out = Vec::with_capacity(self.prepared.len());
        for (d, det) in self.prepared.iter().enumerate() {
            if !active[d] {
                out.push(None);
                continue;
            }
            let (b, obs, mut irng) = if self.cfg.common_randomness {
                shared.get_or_insert_with(|| self.draws(index, d)).clone()
            } else {
                self.draws(index, d)
            };
            let o = det.detect(self.ch, &obs, &mut irng)?;
            out.push(Some(Scored::new(&b, o)));
        }
        Ok(out)
    }
}

fn run_batch(sweep: &Sweep<'_>, start: u64, len: u64, active: &[bool]) -> Result<Vec<Vec<Option<Scored>>>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (start..start + len)
            .into_par_iter()
            .map(|i| sweep.run_trial(i, active))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (start..start + len).map(|i| sweep.run_trial(i, active)).collect()
    }
}

/// Runs every configured detector at every sweep point.
pub fn estimate(ch: &Channel, cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate(ch)?;
    let prepared = cfg
        .detectors
        .iter()
        .map(|d| Prepared::new(ch, d))
        .collect::<Result<Vec<_>>>()?;
    let k = ch.k();
    let batch = cfg.batch_size.unwrap_or(DEFAULT_BATCH);
    let limit = cfg.trials.unwrap_or(cfg.max_trials.unwrap_or(DEFAULT_MAX_TRIALS));
    let mut points = Vec::new();

    for (pi, &snr) in cfg.snr_db.iter().enumerate() {
        let sigma = cfg.sigma_at(ch, snr);
        let sweep = Sweep {
            ch,
            cfg,
            prepared: &prepared,
            point: pi,
            sigma,
        };
        let mut acc: Vec<Accum> = (0..prepared.len()).map(|_| Accum::new(k)).collect();
        let mut next = 0u64;
        while next < limit && acc.iter().any(|a| !a.done) {
            let len = batch.min(limit - next);
            let active: Vec<bool> = acc.iter().map(|a| !a.done).collect();
            let trials = run_batch(&sweep, next, len, &active)?;
            for trial in &trials {
                for (a, s) in acc.iter_mut().zip(trial) {
                    if a.done {
                        continue;
                    }
                    if let Some(s) = s {
                        a.add(s);
                    }
                    if cfg.target_errors.is_some_and(|t| a.vector_errors >= t) {
                        a.done = true;
                    }
                }
            }
            next += len;
        }

        for (spec, a) in cfg.detectors.iter().zip(acc) {
            let n = a.trials;
            points.push(SimPoint {
                detector: spec.label(),
                snr_db: snr,
                sigma,
                trials: n,
                vector_errors: a.vector_errors,
                per_user_ber: a.bit_errors.iter().map(|&e| Estimate::binomial(e, n)).collect(),
                ver: Estimate::binomial(a.vector_errors, n),
                bfr: if n == 0 { 0.0 } else { a.flips as f64 / (n as f64 * k as f64) },
                mean_steps: if n == 0 { 0.0 } else { a.steps as f64 / n as f64 },
                convergence_failures: a.failures,
                target_reached: cfg.target_errors.map(|t| a.vector_errors >= t),
            });
        }
    }
    Ok(SimResult { points })
}

/// Random channel for property sweeps: either equicorrelated or random
/// spreading, with amplitudes in `[0.3, 2]`.
pub fn random_channel<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Channel {
    let amps: Vec<f64> = (0..k).map(|_| rng.random_range(0.3..2.0)).collect();
    if k >= 2 && rng.random_bool(0.4) {
        let lo = -1.0 / (k as f64 - 1.0);
        let rho = rng.random_range(0.8 * lo..0.85);
        Channel::equicorrelated(k, rho, &amps).expect("rho drawn inside the valid range")
    } else {
        let n = rng.random_range(k.div_ceil(2).max(1)..=2 * k + 2);
        let s = crate::channel::make_random_spreading(k, n, rng.random());
        Channel::from_spreading(s, &amps).expect("random spreading channel")
    }
}
