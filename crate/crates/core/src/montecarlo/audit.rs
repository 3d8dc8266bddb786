//! Property audits: likelihood ascent, fixed-point region dualities,
//! half-space containment, and error-probability monotonicity.
//!
//! Every audit returns a report whose `violations()` must be zero.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::baseline::{gml_bruteforce, lml_check, mf_detect, GML_MAX_K};
use crate::bounds::halfspace_margin;
use crate::channel::{BitVector, Channel, Observation};
use crate::error_analysis::{enumerate_indecomposable, is_admissible, ErrorVector};
use crate::las::{
    effective_thresholds, fixed_point_region_check, unique_fixed_point_check, wslas_region_check, InitialDetector,
    LasDetector, RunOptions, Schedule,
};
use crate::montecarlo::{estimate, random_channel, DetectorSpec, SimConfig};
use crate::rng::{self, domain};
use crate::{Error, Result};

/// Absolute tolerance on gradient drift.
pub const GRADIENT_TOL: f64 = 1e-9;
/// Relative tolerance for likelihood descent and delta agreement.
pub const ASCENT_RTOL: f64 = 1e-9;
/// Relative slack on half-space margins.
pub const HALFSPACE_RTOL: f64 = 1e-9;

fn par_fold<T, F, M>(n: u64, f: F, merge: M) -> T
where
    T: Default + Send,
    F: Fn(u64) -> T + Sync + Send,
    M: Fn(T, T) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(&f).reduce(T::default, &merge)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).fold(T::default(), merge)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AscentConfig {
    pub runs: u64,
    pub seed: u64,
    /// User counts for randomly drawn channels (inclusive).
    pub k_min: usize,
    pub k_max: usize,
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// Gradient recomputation every this many steps and on flip-free steps.
    pub check_every: usize,
}

impl Default for AscentConfig {
    fn default() -> Self {
        Self {
            runs: 10_000,
            seed: 1,
            k_min: 2,
            k_max: 16,
            sigma_min: 0.05,
            sigma_max: 2.0,
            check_every: 3,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AscentReport {
    pub runs: u64,
    pub steps: u64,
    pub flip_steps: u64,
    pub descent_events: u64,
    /// Flip steps whose predicted likelihood gain was not positive.
    pub nonstrict_flip_steps: u64,
    /// Steps where the gradient-based `Δf` disagreed with recomputed `f`.
    pub delta_mismatches: u64,
    pub convergence_failures: u64,
    pub gradient_checks: u64,
    pub gradient_drift_violations: u64,
    pub max_gradient_drift: f64,
    /// Fixed points outside their own region.
    pub region_failures: u64,
}

impl AscentReport {
    pub fn violations(&self) -> u64 {
        self.descent_events
            + self.nonstrict_flip_steps
            + self.delta_mismatches
            + self.convergence_failures
            + self.gradient_drift_violations
            + self.region_failures
    }

    fn merge(mut self, o: Self) -> Self {
        self.runs += o.runs;
        self.steps += o.steps;
        self.flip_steps += o.flip_steps;
        self.descent_events += o.descent_events;
        self.nonstrict_flip_steps += o.nonstrict_flip_steps;
        self.delta_mismatches += o.delta_mismatches;
        self.convergence_failures += o.convergence_failures;
        self.gradient_checks += o.gradient_checks;
        self.gradient_drift_violations += o.gradient_drift_violations;
        self.max_gradient_drift = self.max_gradient_drift.max(o.max_gradient_drift);
        self.region_failures += o.region_failures;
        self
    }
}

/// The three schedule shapes the ascent audit rotates through.
fn audit_schedule<R: Rng + ?Sized>(rng: &mut R, k: usize, which: u64) -> Schedule {
    match which % 3 {
        0 => {
            let mut order: Vec<usize> = (0..k).collect();
            order.shuffle(rng);
            if rng.random_bool(0.5) {
                Schedule::slas_circular(k)
            } else {
                Schedule::slas_ordered(&order).expect("permutation")
            }
        }
        1 => Schedule::gplas_uniform(k, rng.random_range(1..=k.max(1))).expect("uniform groups"),
        _ => Schedule::plas(k),
    }
}

fn ascent_run(ch: &Channel, det: &LasDetector, obs: &Observation, b0: BitVector, check_every: usize) -> AscentReport {
    let y = &obs.y;
    let mut rep = AscentReport {
        runs: 1,
        ..Default::default()
    };
    let mut predicted = Vec::new();
    let res = det.run_observed(
        ch,
        y,
        b0,
        RunOptions {
            max_periods: None,
            keep_trace: true,
        },
        |rec| {
            predicted.push((rec.predicted_delta, !rec.flipped.is_empty()));
            if rec.state.step % check_every.max(1) == 0 || rec.flipped.is_empty() {
                let d = rec.state.gradient_drift(ch, y);
                rep.gradient_checks += 1;
                rep.max_gradient_drift = rep.max_gradient_drift.max(d);
                rep.gradient_drift_violations += u64::from(d > GRADIENT_TOL);
            }
        },
    );
    let trace = res.likelihood_trace.as_deref().unwrap_or(&[]);
    for (w, &(pred, flipped)) in trace.windows(2).zip(&predicted) {
        let scale = w[0].abs().max(w[1].abs()).max(1.0);
        let df = w[1] - w[0];
        rep.steps += 1;
        rep.descent_events += u64::from(df < -ASCENT_RTOL * scale);
        rep.delta_mismatches += u64::from((pred - df).abs() > ASCENT_RTOL * scale);
        if flipped {
            rep.flip_steps += 1;
            rep.nonstrict_flip_steps += u64::from(pred <= 0.0);
        } else {
            rep.delta_mismatches += u64::from(df != 0.0);
        }
    }
    rep.convergence_failures += u64::from(!res.converged);
    if res.converged && !fixed_point_region_check(ch, y, &res.fixed_point, det.thresholds().as_slice()) {
        rep.region_failures += 1;
    }
    rep
}

fn ascent_instance(ch: &Channel, cfg: &AscentConfig, i: u64) -> AscentReport {
    let mut r = rng::stream(cfg.seed, domain::AUDIT, rng::pack(1, i));
    let k = ch.k();
    let sched = audit_schedule(&mut r, k, i);
    let det = LasDetector::new(ch, sched).expect("schedule sized for channel");
    let sigma = r.random_range(cfg.sigma_min..=cfg.sigma_max);
    let b = BitVector::random(k, &mut r);
    let obs = ch.transmit_with(&b, sigma, &mut r);
    let b0 = if (i / 3).is_multiple_of(2) {
        mf_detect(&obs)
    } else {
        BitVector::random(k, &mut r)
    };
    ascent_run(ch, &det, &obs, b0, cfg.check_every)
}

/// Ascent audit on one channel.
pub fn audit_ascent(ch: &Channel, cfg: &AscentConfig) -> AscentReport {
    par_fold(cfg.runs, |i| ascent_instance(ch, cfg, i), AscentReport::merge)
}

/// Ascent audit drawing a fresh random channel with
/// `K ∈ [k_min, k_max]` for every run.
pub fn audit_ascent_random(cfg: &AscentConfig) -> AscentReport {
    par_fold(
        cfg.runs,
        |i| {
            let mut r = rng::stream(cfg.seed, domain::CHANNEL, i);
            let k = r.random_range(cfg.k_min.max(1)..=cfg.k_max.max(cfg.k_min));
            let ch = random_channel(&mut r, k);
            ascent_instance(&ch, cfg, i)
        },
        AscentReport::merge,
    )
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegionConfig {
    pub samples: u64,
    pub seed: u64,
    pub sigma_min: f64,
    pub sigma_max: f64,
}

impl Default for RegionConfig {
    fn default() -> Self {
        Self {
            samples: 10_000,
            seed: 1,
            sigma_min: 0.05,
            sigma_max: 1.5,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub samples: u64,
    pub gml_not_in_slas: u64,
    pub slas_outside_plas_region: u64,
    pub own_region_failures: u64,
    pub gml_outside_wslas_region: u64,
    pub slas_not_lml: u64,
    pub unique_fired: u64,
    pub unique_violations: u64,
    pub convergence_failures: u64,
    pub max_slas_fixed_points: usize,
    pub max_plas_fixed_points: usize,
}

impl RegionReport {
    pub fn violations(&self) -> u64 {
        self.gml_not_in_slas
            + self.slas_outside_plas_region
            + self.own_region_failures
            + self.gml_outside_wslas_region
            + self.slas_not_lml
            + self.unique_violations
            + self.convergence_failures
    }

    fn merge(mut self, o: Self) -> Self {
        self.samples += o.samples;
        self.gml_not_in_slas += o.gml_not_in_slas;
        self.slas_outside_plas_region += o.slas_outside_plas_region;
        self.own_region_failures += o.own_region_failures;
        self.gml_outside_wslas_region += o.gml_outside_wslas_region;
        self.slas_not_lml += o.slas_not_lml;
        self.unique_fired += o.unique_fired;
        self.unique_violations += o.unique_violations;
        self.convergence_failures += o.convergence_failures;
        self.max_slas_fixed_points = self.max_slas_fixed_points.max(o.max_slas_fixed_points);
        self.max_plas_fixed_points = self.max_plas_fixed_points.max(o.max_plas_fixed_points);
        self
    }
}

/// Largest `K` for which the region audit enumerates all initial vectors.
pub const REGION_MAX_K: usize = 8;

/// Fixed points reached from every one of the `2^K` initial vectors.
pub fn fixed_point_set(ch: &Channel, det: &LasDetector, y: &[f64]) -> (Vec<BitVector>, u64) {
    let k = ch.k();
    let mut set = HashSet::new();
    let mut failures = 0;
    for idx in 0..(1u64 << k) {
        let r = det.run(ch, y, BitVector::from_index(k, idx), RunOptions::default());
        failures += u64::from(!r.converged);
        set.insert(r.fixed_point);
    }
    let mut v: Vec<BitVector> = set.into_iter().collect();
    v.sort_by(|a, b| a.as_slice().cmp(b.as_slice()));
    (v, failures)
}

/// Duality audit between GML, SLAS and PLAS fixed-point sets for small `K`.
pub fn audit_regions(ch: &Channel, cfg: &RegionConfig) -> Result<RegionReport> {
    let k = ch.k();
    if k > REGION_MAX_K {
        return Err(Error::TooLarge {
            what: "region audit",
            k,
            max: REGION_MAX_K,
            cost: 2f64.powi(k as i32),
        });
    }
    let slas = LasDetector::new(ch, Schedule::slas_circular(k))?;
    let plas = LasDetector::new(ch, Schedule::plas(k))?;
    let t_slas = slas.thresholds().as_slice().to_vec();
    let t_plas = plas.thresholds().as_slice().to_vec();

    Ok(par_fold(
        cfg.samples,
        |i| {
            let mut r = rng::stream(cfg.seed, domain::AUDIT, rng::pack(2, i));
            let sigma = r.random_range(cfg.sigma_min..=cfg.sigma_max);
            let b = BitVector::random(k, &mut r);
            let obs = ch.transmit_with(&b, sigma, &mut r);
            let y = &obs.y;
            let mut rep = RegionReport {
                samples: 1,
                ..Default::default()
            };
            let gml = gml_bruteforce(ch, &obs, GML_MAX_K).expect("K within the region audit limit");
            let (psi_s, fs) = fixed_point_set(ch, &slas, y);
            let (psi_p, fp) = fixed_point_set(ch, &plas, y);
            rep.convergence_failures += fs + fp;
            rep.max_slas_fixed_points = psi_s.len();
            rep.max_plas_fixed_points = psi_p.len();
            rep.gml_not_in_slas += u64::from(!psi_s.contains(&gml));
            rep.gml_outside_wslas_region += u64::from(!wslas_region_check(ch, y, &gml));
            for p in &psi_s {
                rep.slas_outside_plas_region += u64::from(!fixed_point_region_check(ch, y, p, &t_plas));
                rep.own_region_failures += u64::from(!fixed_point_region_check(ch, y, p, &t_slas));
                rep.slas_not_lml += u64::from(!lml_check(ch, &obs, p));
            }
            for p in &psi_p {
                rep.own_region_failures += u64::from(!fixed_point_region_check(ch, y, p, &t_plas));
            }
            let sgn = mf_detect(&obs);
            for (t, psi) in [(&t_slas, &psi_s), (&t_plas, &psi_p)] {
                if unique_fixed_point_check(ch, y, t) {
                    rep.unique_fired += 1;
                    rep.unique_violations += u64::from(psi.len() != 1 || psi[0] != sgn);
                }
            }
            rep
        },
        RegionReport::merge,
    ))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContainmentConfig {
    pub instances: u64,
    pub seed: u64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// Rejection-sampling attempts before falling back to the region's
    /// interior point `RA(b − 2ε)`.
    pub max_attempts: usize,
}

impl Default for ContainmentConfig {
    fn default() -> Self {
        Self {
            instances: 10_000,
            seed: 1,
            sigma_min: 0.05,
            sigma_max: 1.5,
            max_attempts: 200,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ContainmentReport {
    pub instances: u64,
    /// Instances that used the interior fallback point.
    pub sampling_fallbacks: u64,
    pub lemma3_violations: u64,
    pub decomposable: u64,
    /// Decomposable instances settled by a split with `ε′ᵀHε* ≥ 0`.
    pub lemma4_structured: u64,
    /// Decomposable instances settled by search over sub-vectors in `F_k`.
    pub lemma4_fallback: u64,
    /// A structured split whose half-space did not contain `y`.
    pub lemma4_structured_failures: u64,
    pub lemma4_violations: u64,
    pub min_lemma3_margin: f64,
}

impl ContainmentReport {
    pub fn violations(&self) -> u64 {
        self.lemma3_violations + self.lemma4_structured_failures + self.lemma4_violations
    }

    fn merge(mut self, o: Self) -> Self {
        if self.instances == 0 {
            return o;
        }
        if o.instances == 0 {
            return self;
        }
        self.instances += o.instances;
        self.sampling_fallbacks += o.sampling_fallbacks;
        self.lemma3_violations += o.lemma3_violations;
        self.decomposable += o.decomposable;
        self.lemma4_structured += o.lemma4_structured;
        self.lemma4_fallback += o.lemma4_fallback;
        self.lemma4_structured_failures += o.lemma4_structured_failures;
        self.lemma4_violations += o.lemma4_violations;
        self.min_lemma3_margin = self.min_lemma3_margin.min(o.min_lemma3_margin);
        self
    }
}

/// Largest `K` for the containment audit (needs the full `F`).
pub const CONTAINMENT_MAX_K: usize = 10;

fn margin_ok(ch: &Channel, y: &[f64], b: &BitVector, eps: &ErrorVector, t: &[f64]) -> (bool, f64) {
    let m = halfspace_margin(ch, y, b, eps, t);
    let lhs: f64 = eps
        .support()
        .iter()
        .map(|&j| (y[j] * ch.amplitude(j)).abs())
        .sum();
    (m >= -HALFSPACE_RTOL * (1.0 + lhs), m)
}

fn cross(ch: &Channel, a: &[i8], b: &[i8]) -> f64 {
    let h = ch.h();
    let mut acc = 0.0;
    for (i, &ai) in a.iter().enumerate().filter(|(_, &v)| v != 0) {
        for (j, &bj) in b.iter().enumerate().filter(|(_, &v)| v != 0) {
            acc += f64::from(ai) * h[(i, j)] * f64::from(bj);
        }
    }
    acc
}

/// Half-space containment audit: `y` is sampled inside the fixed-point
/// region of `b − 2ε` and must lie in the half-space of `ε` and, for
/// decomposable `ε`, in that of some indecomposable part `ε* ∈ F_k`.
pub fn audit_containment(ch: &Channel, cfg: &ContainmentConfig) -> Result<ContainmentReport> {
    let k = ch.k();
    if k > CONTAINMENT_MAX_K {
        return Err(Error::TooLarge {
            what: "containment audit",
            k,
            max: CONTAINMENT_MAX_K,
            cost: 3f64.powi(k as i32),
        });
    }
    let f = enumerate_indecomposable(ch, CONTAINMENT_MAX_K)?;
    let members: HashSet<Vec<i8>> = f.vectors().iter().map(|v| v.as_slice().to_vec()).collect();
    let mut schedules = vec![Schedule::slas_circular(k), Schedule::plas(k)];
    if k >= 3 {
        schedules.push(Schedule::gplas_uniform(k, 2)?);
    }
    let thresholds: Vec<Vec<f64>> = schedules
        .iter()
        .map(|s| effective_thresholds(ch, s).values)
        .collect();

    Ok(par_fold(
        cfg.instances,
        |i| containment_instance(ch, cfg, i, &members, &thresholds),
        ContainmentReport::merge,
    ))
}

fn containment_instance(
    ch: &Channel,
    cfg: &ContainmentConfig,
    i: u64,
    members: &HashSet<Vec<i8>>,
    thresholds: &[Vec<f64>],
) -> ContainmentReport {
    let k = ch.k();
    let mut r = rng::stream(cfg.seed, domain::AUDIT, rng::pack(3, i));
    let t = &thresholds[(i as usize) % thresholds.len()];
    let b = BitVector::random(k, &mut r);
    let user = r.random_range(0..k);
    let e: Vec<i8> = (0..k)
        .map(|j| if j == user || r.random_bool(0.5) { b[j] } else { 0 })
        .collect();
    let eps = ErrorVector::new(e).expect("nonzero at user");
    debug_assert!(is_admissible(&eps, &b));
    let c = BitVector::new(eps.apply_to(&b)).expect("admissible");

    let mut rep = ContainmentReport {
        instances: 1,
        min_lemma3_margin: f64::INFINITY,
        ..Default::default()
    };
    let interior = ch.noiseless(&c);
    let mut y = None;
    for _ in 0..cfg.max_attempts {
        let sigma = r.random_range(cfg.sigma_min..=cfg.sigma_max);
        let centre = if r.random_bool(0.5) { c.clone() } else { b.clone() };
        let cand = ch.transmit_with(&centre, sigma, &mut r).y;
        if fixed_point_region_check(ch, &cand, &c, t) {
            y = Some(cand);
            break;
        }
    }
    let y = y.unwrap_or_else(|| {
        rep.sampling_fallbacks += 1;
        interior
    });

    let (ok, m) = margin_ok(ch, &y, &b, &eps, t);
    rep.min_lemma3_margin = m;
    rep.lemma3_violations += u64::from(!ok);

    if !members.contains(eps.as_slice()) {
        rep.decomposable += 1;
        // Sub-vectors of ε that affect the user and are indecomposable.
        let support: Vec<usize> = eps.support().into_iter().filter(|&j| j != user).collect();
        let mut structured = None;
        let mut any_pass = false;
        for mask in 0..(1u64 << support.len()) {
            let mut sub = vec![0i8; k];
            sub[user] = eps[user];
            for (bit, &j) in support.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    sub[j] = eps[j];
                }
            }
            if sub == eps.as_slice() || !members.contains(&sub) {
                continue;
            }
            let rest: Vec<i8> = eps.as_slice().iter().zip(&sub).map(|(a, s)| a - s).collect();
            let star = ErrorVector::new(sub).expect("nonzero");
            let (pass, _) = margin_ok(ch, &y, &b, &star, t);
            any_pass |= pass;
            let tol = 1e-12 * ch.h().amax();
            if structured.is_none() && cross(ch, &rest, star.as_slice()) >= -tol {
                structured = Some(pass);
            }
        }
        match structured {
            Some(true) => rep.lemma4_structured += 1,
            Some(false) => rep.lemma4_structured_failures += 1,
            None if any_pass => rep.lemma4_fallback += 1,
            None => {}
        }
        rep.lemma4_violations += u64::from(!any_pass);
    }
    rep
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonotonicityConfig {
    pub snr_db: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub initials: Vec<InitialDetector>,
}

impl Default for MonotonicityConfig {
    fn default() -> Self {
        Self {
            snr_db: vec![6.0, 8.0],
            trials: 100_000,
            seed: 1,
            initials: vec![InitialDetector::Mf, InitialDetector::Decorrelator, InitialDetector::Random],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityRow {
    pub initial: String,
    pub snr_db: f64,
    pub trials: u64,
    pub ver_las: f64,
    pub ver_initial: f64,
    pub pooled_se: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub rows: Vec<MonotonicityRow>,
    pub convergence_failures: u64,
}

impl MonotonicityReport {
    pub fn violations(&self) -> u64 {
        self.rows.iter().filter(|r| !r.pass).count() as u64 + self.convergence_failures
    }
}

fn initial_as_detector(init: &InitialDetector) -> Result<DetectorSpec> {
    Ok(match init {
        InitialDetector::Mf => DetectorSpec::Mf,
        InitialDetector::Decorrelator => DetectorSpec::Decorrelator,
        InitialDetector::Mmse => DetectorSpec::Mmse,
        InitialDetector::Random => DetectorSpec::Random,
        other => {
            return Err(Error::Config(format!(
                "initial '{}' has no stand-alone detector to compare against",
                other.label()
            )))
        }
    })
}

/// `VER(SLAS from I) ≤ VER(I) + 3·pooled SE` under common randomness.
pub fn audit_error_monotonicity(ch: &Channel, cfg: &MonotonicityConfig) -> Result<MonotonicityReport> {
    let mut detectors = Vec::new();
    for init in &cfg.initials {
        detectors.push(DetectorSpec::las(Schedule::slas_circular(ch.k()).to_doc(), init.clone()));
        detectors.push(initial_as_detector(init)?);
    }
    let sim = SimConfig::with_trials(cfg.seed, cfg.trials, cfg.snr_db.clone(), detectors);
    let res = estimate(ch, &sim)?;
    let mut rep = MonotonicityReport {
        convergence_failures: res.convergence_failures(),
        ..Default::default()
    };
    let per_point = 2 * cfg.initials.len();
    for chunk in res.points.chunks(per_point) {
        for (pair, init) in chunk.chunks(2).zip(&cfg.initials) {
            let (las, base) = (&pair[0], &pair[1]);
            let pooled = (las.ver.se.powi(2) + base.ver.se.powi(2)).sqrt();
            rep.rows.push(MonotonicityRow {
                initial: init.label().into(),
                snr_db: las.snr_db,
                trials: las.trials,
                ver_las: las.ver.value,
                ver_initial: base.ver.value,
                pooled_se: pooled,
                pass: las.ver.value <= base.ver.value + 3.0 * pooled,
            });
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::two_user_example;

    #[test]
    fn ascent_on_small_sweeps() {
        let rep = audit_ascent_random(&AscentConfig {
            runs: 600,
            k_max: 8,
            ..Default::default()
        });
        assert_eq!(rep.runs, 600);
        assert_eq!(rep.violations(), 0, "{rep:?}");
        assert!(rep.flip_steps > 0 && rep.gradient_checks > 0);

        let ch = Channel::orthogonal(&[1.0, 0.4, 2.0]).unwrap();
        assert_eq!(audit_ascent(&ch, &AscentConfig { runs: 300, ..Default::default() }).violations(), 0);
    }

    #[test]
    fn regions_two_user() {
        let rep = audit_regions(&two_user_example(), &RegionConfig { samples: 500, ..Default::default() }).unwrap();
        assert_eq!(rep.violations(), 0, "{rep:?}");
        assert!(rep.unique_fired > 0);
    }

    #[test]
    fn regions_orthogonal_singleton() {
        let ch = Channel::orthogonal(&[1.0, 0.5, 1.5]).unwrap();
        let rep = audit_regions(&ch, &RegionConfig { samples: 200, ..Default::default() }).unwrap();
        assert_eq!(rep.violations(), 0);
        assert_eq!(rep.max_slas_fixed_points, 1);
        assert_eq!(rep.max_plas_fixed_points, 1);
    }

    #[test]
    fn containment_small() {
        let ch = Channel::equicorrelated(4, 0.45, &[1.0, 0.8, 1.2, 0.6]).unwrap();
        let rep = audit_containment(&ch, &ContainmentConfig { instances: 600, ..Default::default() }).unwrap();
        assert_eq!(rep.violations(), 0, "{rep:?}");
        assert!(rep.decomposable > 0);
    }

    #[test]
    fn monotonicity_two_user() {
        let rep = audit_error_monotonicity(
            &two_user_example(),
            &MonotonicityConfig {
                snr_db: vec![6.0],
                trials: 20_000,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(rep.violations(), 0, "{rep:?}");
        assert_eq!(rep.rows.len(), 3);
    }
}
