//! The five commands. Each turns a resolved spec into an [`Outcome`].

use las_mud::bounds::{
    baseline_ame, ber_bound_report, equicorr_ame_gplas, equicorr_ame_gplas_exact, equicorr_ame_lml,
    BaselineDetector, BoundVariant,
};
use las_mud::channel::{two_user_example, Channel};
use las_mud::error_analysis::{enumerate_indecomposable, enumerate_indecomposable_truncated, IndecomposableSet};
use las_mud::las::{effective_thresholds, Schedule};
use las_mud::montecarlo::audit::{
    audit_ascent, audit_ascent_random, audit_containment, audit_error_monotonicity, audit_regions,
    AscentConfig, ContainmentConfig, MonotonicityConfig, RegionConfig,
};
use las_mud::montecarlo::{estimate, sigma_for_snr, DetectorSpec, SimConfig, SimResult};
use las_mud::ThresholdVector;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::output::{sci, Outcome, Table};
use crate::spec::{CommandName, ExperimentSpec, Grid};
use crate::CliError;

pub fn run(command: CommandName, spec: &ExperimentSpec) -> Result<Outcome, CliError> {
    match command {
        CommandName::AmeSweep => cmd_ame_sweep(spec),
        CommandName::Bounds => cmd_bounds(spec),
        CommandName::Simulate => cmd_simulate(spec),
        CommandName::EnumerateErrors => cmd_enumerate_errors(spec),
        CommandName::Audit => cmd_audit(spec),
    }
}

fn params<T: DeserializeOwned>(command: CommandName, v: Value) -> Result<T, CliError> {
    serde_json::from_value(v).map_err(|e| CliError::Usage(format!("{} params: {e}", command.as_str())))
}

fn require_channel(spec: &ExperimentSpec, command: CommandName) -> Result<Channel, CliError> {
    spec.channel
        .as_ref()
        .ok_or_else(|| CliError::Usage(format!("{} needs a channel", command.as_str())))?
        .build()
}

fn error_set(ch: &Channel, max_weight: Option<usize>) -> Result<IndecomposableSet, CliError> {
    Ok(match max_weight {
        Some(w) => enumerate_indecomposable_truncated(ch, w)?,
        None => enumerate_indecomposable(ch, las_mud::error_analysis::ENUMERATION_MAX_K)?,
    })
}

// ame-sweep

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AmeSweepParams {
    #[serde(rename = "K")]
    pub k: usize,
    pub rho: Grid,
    #[serde(rename = "M")]
    pub m: Vec<usize>,
    /// Adds columns of the bound with the single-error term kept.
    pub singleton_term: bool,
}

impl Default for AmeSweepParams {
    fn default() -> Self {
        Self {
            k: 40,
            rho: Grid::Range {
                start: 0.0,
                stop: 0.5,
                step: 0.01,
            },
            m: vec![1, 2, 4],
            singleton_term: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AmeSweepRow {
    pub rho: f64,
    pub gml: f64,
    pub lml_bound: f64,
    pub gplas: Vec<(usize, f64)>,
    pub gplas_exact: Option<Vec<(usize, f64)>>,
    pub mf: f64,
    pub decmmse: f64,
}

pub fn ame_sweep_rows(p: &AmeSweepParams) -> Result<Vec<AmeSweepRow>, CliError> {
    if p.k < 2 {
        return Err(CliError::Usage("ame-sweep needs K ≥ 2".into()));
    }
    if p.m.iter().any(|&m| m == 0 || m > p.k) {
        return Err(CliError::Usage(format!("group sizes must lie in 1..={}", p.k)));
    }
    let lo = -1.0 / (p.k as f64 - 1.0);
    let rhos = p.rho.values()?;
    if let Some(bad) = rhos.iter().find(|&&r| !(r > lo && r < 1.0)) {
        return Err(CliError::Usage(format!("rho = {bad} outside ({lo}, 1)")));
    }
    Ok(rhos
        .into_iter()
        .map(|rho| AmeSweepRow {
            rho,
            gml: baseline_ame(BaselineDetector::GmlEquicorr, p.k, rho),
            lml_bound: equicorr_ame_lml(rho),
            gplas: p.m.iter().map(|&m| (m, equicorr_ame_gplas(m, rho))).collect(),
            gplas_exact: p
                .singleton_term
                .then(|| p.m.iter().map(|&m| (m, equicorr_ame_gplas_exact(m, rho))).collect()),
            mf: baseline_ame(BaselineDetector::Mf, p.k, rho),
            decmmse: baseline_ame(BaselineDetector::DecMmse, p.k, rho),
        })
        .collect())
}

fn cmd_ame_sweep(spec: &ExperimentSpec) -> Result<Outcome, CliError> {
    let p: AmeSweepParams = params(CommandName::AmeSweep, spec.params_or_empty())?;
    let rows = ame_sweep_rows(&p)?;
    let mut header = vec!["rho".to_string(), "gml".into(), "lml_bound".into()];
    header.extend(p.m.iter().map(|m| format!("gplas_M{m}")));
    if p.singleton_term {
        header.extend(p.m.iter().map(|m| format!("gplas_exact_M{m}")));
    }
    header.push(format!("mf_K{}", p.k));
    header.push(format!("decmmse_K{}", p.k));
    let mut table = Table::new(header.clone());
    let mut records = Vec::with_capacity(rows.len());
    for r in &rows {
        let mut vals = vec![r.rho, r.gml, r.lml_bound];
        vals.extend(r.gplas.iter().map(|&(_, v)| v));
        if let Some(ex) = &r.gplas_exact {
            vals.extend(ex.iter().map(|&(_, v)| v));
        }
        vals.push(r.mf);
        vals.push(r.decmmse);
        table.push(vals.iter().map(|&v| sci(v)).collect());
        records.push(Value::Object(header.iter().cloned().zip(vals.into_iter().map(Value::from)).collect()));
    }
    Ok(Outcome::ok(table, json!({ "K": p.k, "M": p.m, "rows": records })))
}

// bounds

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsParams {
    pub sigma: Option<Grid>,
    pub snr_db: Option<Grid>,
    pub reference_user: usize,
    /// Tags: `gml`, `lml`, `slas`, `wslas`, `plas`, `gplas:M`, or `las`
    /// together with `thresholds`.
    pub detectors: Vec<String>,
    pub thresholds: Option<Vec<f64>>,
    /// Truncated enumeration; marks the bounds as partial.
    pub max_weight: Option<usize>,
    /// Include every term in the JSON output.
    pub terms: bool,
}

impl Default for BoundsParams {
    fn default() -> Self {
        Self {
            sigma: None,
            snr_db: None,
            reference_user: 1,
            detectors: vec!["gml".into(), "lml".into()],
            thresholds: None,
            max_weight: None,
            terms: false,
        }
    }
}

/// Maps a bound tag to its variant.
pub fn bound_variant(ch: &Channel, tag: &str, custom: Option<&[f64]>) -> Result<BoundVariant, CliError> {
    let k = ch.k();
    let sched = |s: las_mud::Result<Schedule>| -> Result<BoundVariant, CliError> {
        Ok(BoundVariant::Las(effective_thresholds(ch, &s?)))
    };
    match tag {
        "gml" => Ok(BoundVariant::Gml),
        "lml" | "wslas" => Ok(BoundVariant::Lml),
        "slas" => sched(Ok(Schedule::slas_circular(k))),
        "plas" => sched(Ok(Schedule::plas(k))),
        "las" => {
            let t = custom.ok_or_else(|| CliError::Usage("tag 'las' needs thresholds".into()))?;
            if t.len() != k {
                return Err(CliError::Usage(format!("thresholds need {k} entries")));
            }
            Ok(BoundVariant::Las(ThresholdVector::exact(t.to_vec())))
        }
        _ => match tag.strip_prefix("gplas:").map(str::parse::<usize>) {
            Some(Ok(m)) => sched(Schedule::gplas_uniform(k, m)),
            _ => Err(CliError::Usage(format!("unknown bound tag '{tag}'"))),
        },
    }
}

fn sigma_grid(sigma: &Option<Grid>, snr_db: &Option<Grid>, ch: &Channel, reference_user: usize) -> Result<Vec<f64>, CliError> {
    if reference_user == 0 || reference_user > ch.k() {
        return Err(CliError::Usage(format!("reference_user must be in 1..={}", ch.k())));
    }
    let sigmas = match (sigma, snr_db) {
        (Some(s), None) => s.values()?,
        (None, Some(snr)) => snr
            .values()?
            .into_iter()
            .map(|s| sigma_for_snr(ch.amplitude(reference_user - 1), s))
            .collect(),
        _ => return Err(CliError::Usage("give exactly one of sigma and snr_db".into())),
    };
    if sigmas.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(CliError::Usage("sigma values must be positive".into()));
    }
    Ok(sigmas)
}

fn cmd_bounds(spec: &ExperimentSpec) -> Result<Outcome, CliError> {
    let p: BoundsParams = params(CommandName::Bounds, spec.params_or_empty())?;
    let ch = require_channel(spec, CommandName::Bounds)?;
    let sigmas = sigma_grid(&p.sigma, &p.snr_db, &ch, p.reference_user)?;
    if p.detectors.is_empty() {
        return Err(CliError::Usage("no bound tags given".into()));
    }
    let variants = p
        .detectors
        .iter()
        .map(|t| Ok((t.clone(), bound_variant(&ch, t, p.thresholds.as_deref())?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let f = error_set(&ch, p.max_weight)?;

    let mut table = Table::new([
        "sigma",
        "user",
        "detector",
        "bound",
        "terms",
        "negative_arg_terms",
        "min_q_argument",
        "partial",
    ]);
    let mut reports = Vec::new();
    for &sigma in &sigmas {
        for (tag, variant) in &variants {
            let rep = ber_bound_report(&ch, &f, variant, sigma)?;
            for u in &rep.per_user {
                let min_arg = u.terms.iter().map(|t| t.q_argument).fold(f64::INFINITY, f64::min);
                table.push(vec![
                    sci(sigma),
                    u.user.to_string(),
                    tag.clone(),
                    sci(u.bound),
                    u.terms.len().to_string(),
                    u.negative_arg_terms.to_string(),
                    sci(min_arg),
                    rep.partial.to_string(),
                ]);
            }
            let mut v = serde_json::to_value(&rep)?;
            v["detector"] = Value::from(tag.clone());
            if !p.terms {
                for u in v["per_user"].as_array_mut().into_iter().flatten() {
                    u.as_object_mut().map(|o| o.remove("terms"));
                }
            }
            reports.push(v);
        }
    }
    let mut out = Outcome::ok(table, json!({ "channel_fingerprint": ch.fingerprint(), "reports": reports }));
    if !f.is_complete() {
        out.notes.push(format!("error set truncated at weight {:?}; bounds are partial", f.max_weight()));
    }
    Ok(out)
}

// simulate

/// Analytic bound matching a simulated detector, where one exists.
fn overlay_variant(ch: &Channel, det: &DetectorSpec) -> Result<Option<BoundVariant>, CliError> {
    Ok(match det {
        DetectorSpec::Las { schedule, .. } => {
            let s = schedule.clone().into_schedule(ch.k())?;
            Some(BoundVariant::Las(effective_thresholds(ch, &s)))
        }
        DetectorSpec::Gml => Some(BoundVariant::Gml),
        _ => None,
    })
}

pub fn sim_config(spec: &ExperimentSpec) -> Result<(SimConfig, bool), CliError> {
    let mut v = spec.params_or_empty();
    let obj = v
        .as_object_mut()
        .ok_or_else(|| CliError::Usage("simulate params must be an object".into()))?;
    let overlay = match obj.remove("overlay_bound") {
        None => false,
        Some(Value::Bool(b)) => b,
        Some(other) => return Err(CliError::Usage(format!("overlay_bound must be a bool, got {other}"))),
    };
    if let Some(seed) = spec.seed {
        obj.insert("seed".into(), Value::from(seed));
    }
    if !obj.contains_key("seed") {
        obj.insert("seed".into(), Value::from(1u64));
    }
    Ok((params(CommandName::Simulate, v)?, overlay))
}

pub fn simulate_table(ch: &Channel, cfg: &SimConfig, res: &SimResult, overlay: bool) -> Result<Table, CliError> {
    let mut header = vec![
        "detector", "snr_db", "user", "ber", "se", "ver", "ver_se", "bfr", "mean_steps", "trials",
    ];
    if overlay {
        header.push("bound");
    }
    let mut table = Table::new(header);
    let f = if overlay { Some(error_set(ch, None)?) } else { None };
    let variants = cfg
        .detectors
        .iter()
        .map(|d| Ok((d.label(), overlay_variant(ch, d)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    for pt in &res.points {
        let variant = variants.iter().find(|(l, _)| *l == pt.detector).and_then(|(_, v)| v.as_ref());
        for (user, ber) in pt.per_user_ber.iter().enumerate() {
            let mut row = vec![
                pt.detector.clone(),
                sci(pt.snr_db),
                (user + 1).to_string(),
                sci(ber.value),
                sci(ber.se),
                sci(pt.ver.value),
                sci(pt.ver.se),
                sci(pt.bfr),
                sci(pt.mean_steps),
                pt.trials.to_string(),
            ];
            if let Some(f) = &f {
                row.push(match variant {
                    Some(v) => sci(las_mud::bounds::ber_bound(ch, f, v, pt.sigma, user)?.bound),
                    None => String::new(),
                });
            }
            table.push(row);
        }
    }
    Ok(table)
}

fn cmd_simulate(spec: &ExperimentSpec) -> Result<Outcome, CliError> {
    let ch = require_channel(spec, CommandName::Simulate)?;
    let (cfg, overlay) = sim_config(spec)?;
    cfg.validate(&ch)?;
    let res = estimate(&ch, &cfg)?;
    let table = simulate_table(&ch, &cfg, &res, overlay)?;
    let failures = res.convergence_failures();
    let mut out = Outcome::ok(table, json!({ "config": cfg, "points": res.points }));
    if failures > 0 {
        out.exit_code = 3;
        out.notes.push(format!("{failures} LAS runs hit the period cap without converging"));
    }
    for p in res.points.iter().filter(|p| p.target_reached == Some(false)) {
        out.notes.push(format!(
            "{} at {} dB stopped at the trial cap before the error target",
            p.detector, p.snr_db
        ));
    }
    Ok(out)
}

// enumerate-errors

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnumerateParams {
    pub max_weight: Option<usize>,
}

fn cmd_enumerate_errors(spec: &ExperimentSpec) -> Result<Outcome, CliError> {
    let p: EnumerateParams = params(CommandName::EnumerateErrors, spec.params_or_empty())?;
    let ch = require_channel(spec, CommandName::EnumerateErrors)?;
    let f = error_set(&ch, p.max_weight)?;
    let k = ch.k();
    let mut table = Table::new(["index", "weight", "users", "eps"]);
    let sorted = f.sorted_vectors();
    for (i, e) in sorted.iter().enumerate() {
        let users: Vec<String> = e.support().iter().map(|u| (u + 1).to_string()).collect();
        let eps: Vec<String> = e.as_slice().iter().map(i8::to_string).collect();
        table.push(vec![i.to_string(), e.weight().to_string(), users.join(" "), eps.join(" ")]);
    }
    let per_user: Vec<Value> = (0..k)
        .map(|u| json!({ "user": u + 1, "count": f.user_indices(u).len() }))
        .collect();
    let limit = 2u128 * ((1u128 << k) - 1);
    Ok(Outcome::ok(
        table,
        json!({
            "K": k,
            "size": f.len(),
            "size_limit": limit.to_string(),
            "complete": f.is_complete(),
            "per_user": per_user,
            "set": f.to_doc(),
        }),
    ))
}

// audit

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Ascent,
    Regions,
    Containment,
    Monotonicity,
    #[default]
    All,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuditParams {
    pub suite: Suite,
    pub ascent: AscentConfig,
    pub regions: RegionConfig,
    pub containment: ContainmentConfig,
    pub monotonicity: MonotonicityConfig,
}

/// Flattens nested JSON into `(dotted key, value)` pairs.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, v) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        Value::Array(a) => {
            for (i, v) in a.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), v, out);
            }
        }
        Value::Number(n) if n.is_f64() => out.push((prefix.into(), sci(n.as_f64().unwrap_or(f64::NAN)))),
        Value::Number(n) => out.push((prefix.into(), n.to_string())),
        Value::String(s) => out.push((prefix.into(), s.clone())),
        Value::Bool(b) => out.push((prefix.into(), b.to_string())),
        Value::Null => out.push((prefix.into(), String::new())),
    }
}

fn cmd_audit(spec: &ExperimentSpec) -> Result<Outcome, CliError> {
    let mut p: AuditParams = params(CommandName::Audit, spec.params_or_empty())?;
    if let Some(seed) = spec.seed {
        p.ascent.seed = seed;
        p.regions.seed = seed;
        p.containment.seed = seed;
        p.monotonicity.seed = seed;
    }
    let explicit = spec.channel.as_ref().map(|c| c.build()).transpose()?;
    let ch = explicit.clone().unwrap_or_else(two_user_example);
    let want = |s: Suite| p.suite == Suite::All || p.suite == s;

    let mut results = Map::new();
    let mut total = 0u64;
    let mut record = |name: &str, violations: u64, report: Value| {
        total += violations;
        results.insert(name.into(), json!({ "violations": violations, "report": report }));
    };
    if want(Suite::Ascent) {
        let rep = match &explicit {
            Some(ch) => audit_ascent(ch, &p.ascent),
            None => audit_ascent_random(&p.ascent),
        };
        record("ascent", rep.violations(), serde_json::to_value(&rep)?);
    }
    if want(Suite::Regions) {
        let rep = audit_regions(&ch, &p.regions)?;
        record("regions", rep.violations(), serde_json::to_value(&rep)?);
    }
    if want(Suite::Containment) {
        let rep = audit_containment(&ch, &p.containment)?;
        record("containment", rep.violations(), serde_json::to_value(&rep)?);
    }
    if want(Suite::Monotonicity) {
        let rep = audit_error_monotonicity(&ch, &p.monotonicity)?;
        record("monotonicity", rep.violations(), serde_json::to_value(&rep)?);
    }

    let mut table = Table::new(["suite", "metric", "value"]);
    for (suite, v) in &results {
        let mut pairs = Vec::new();
        flatten("", v, &mut pairs);
        for (metric, value) in pairs {
            table.push(vec![suite.clone(), metric, value]);
        }
    }
    let mut out = Outcome::ok(table, json!({ "total_violations": total, "suites": results }));
    if total > 0 {
        out.exit_code = 2;
        out.notes.push(format!("{total} audit violations"));
    }
    Ok(out)
}
