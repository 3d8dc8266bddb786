//! Browser demo: AME curves, two-user fixed-point regions and BER bound
//! curves. Every export takes plain numbers and returns a JSON string.

use las_mud::bounds::{
    baseline_ame, ber_bound, equicorr_ame_gplas, equicorr_ame_lml, BaselineDetector, BoundVariant,
};
use las_mud::channel::{BitVector, Channel};
use las_mud::error_analysis::enumerate_indecomposable;
use las_mud::las::{effective_thresholds, fixed_point_region_check, Schedule};
use las_mud::montecarlo::sigma_for_snr;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest user count the bound curves enumerate in the browser.
pub const WEB_MAX_K: usize = 12;

fn grid(start: f64, stop: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        n => (0..n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Serialize)]
struct GplasCurve {
    m: usize,
    values: Vec<f64>,
}

#[derive(Serialize)]
struct AmeCurves {
    rho: Vec<f64>,
    gml: Vec<f64>,
    lml: Vec<f64>,
    gplas: Vec<GplasCurve>,
    mf: Vec<f64>,
    decmmse: Vec<f64>,
}

/// Equal-power equicorrelated AME curves for `K` users over `ρ ∈ [0, rho_max]`.
pub fn ame_curves_json(k: usize, groups: &[usize], rho_max: f64, points: usize) -> Result<String, String> {
    if k < 2 {
        return Err("K must be at least 2".into());
    }
    if !(0.0..1.0).contains(&rho_max) {
        return Err("rho_max must lie in [0, 1)".into());
    }
    if groups.iter().any(|&m| m == 0 || m > k) {
        return Err(format!("group sizes must lie in 1..={k}"));
    }
    let rho = grid(0.0, rho_max, points.clamp(2, 2001));
    let map = |f: &dyn Fn(f64) -> f64| rho.iter().map(|&r| f(r)).collect::<Vec<_>>();
    let curves = AmeCurves {
        gml: map(&|r| baseline_ame(BaselineDetector::GmlEquicorr, k, r)),
        lml: map(&|r| equicorr_ame_lml(r)),
        gplas: groups
            .iter()
            .map(|&m| GplasCurve {
                m,
                values: map(&|r| equicorr_ame_gplas(m, r)),
            })
            .collect(),
        mf: map(&|r| baseline_ame(BaselineDetector::Mf, k, r)),
        decmmse: map(&|r| baseline_ame(BaselineDetector::DecMmse, k, r)),
        rho,
    };
    serde_json::to_string(&curves).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Regions {
    n: usize,
    extent: f64,
    /// Row-major, `y_2` descending; bit `i` set when the `i`-th bit vector
    /// (in the order of `vectors`) is a fixed point at that `y`.
    masks: Vec<u8>,
    /// Index of the maximum-likelihood vector at each `y`.
    gml: Vec<u8>,
    vectors: Vec<[i8; 2]>,
    thresholds: Vec<f64>,
}

fn schedule_for(k: usize, name: &str) -> Result<Schedule, String> {
    match name {
        "slas" => Ok(Schedule::slas_circular(k)),
        "plas" => Ok(Schedule::plas(k)),
        _ => match name.strip_prefix("gplas:").map(str::parse::<usize>) {
            Some(Ok(m)) => Schedule::gplas_uniform(k, m).map_err(|e| e.to_string()),
            _ => Err(format!("unknown schedule '{name}'")),
        },
    }
}

/// Fixed points of a two-user schedule over the square `|y_i| ≤ extent`.
pub fn fixed_point_regions_json(rho: f64, a1: f64, a2: f64, schedule: &str, extent: f64, n: usize) -> Result<String, String> {
    let ch = Channel::equicorrelated(2, rho, &[a1, a2]).map_err(|e| e.to_string())?;
    let sched = schedule_for(2, schedule)?;
    let t = effective_thresholds(&ch, &sched);
    if !(extent > 0.0 && extent.is_finite()) {
        return Err("extent must be positive".into());
    }
    let n = n.clamp(8, 512);
    let vectors: Vec<BitVector> = [[1, 1], [1, -1], [-1, 1], [-1, -1]]
        .iter()
        .map(|b| BitVector::new(b.to_vec()).expect("valid bits"))
        .collect();
    let coords = grid(-extent, extent, n);
    let mut masks = Vec::with_capacity(n * n);
    let mut gml = Vec::with_capacity(n * n);
    for &y2 in coords.iter().rev() {
        for &y1 in &coords {
            let y = [y1, y2];
            let mut mask = 0u8;
            let mut best = (f64::NEG_INFINITY, 0u8);
            for (i, b) in vectors.iter().enumerate() {
                if fixed_point_region_check(&ch, &y, b, t.as_slice()) {
                    mask |= 1 << i;
                }
                let f = ch.likelihood(&y, b);
                if f > best.0 {
                    best = (f, i as u8);
                }
            }
            masks.push(mask);
            gml.push(best.1);
        }
    }
    let out = Regions {
        n,
        extent,
        masks,
        gml,
        vectors: vec![[1, 1], [1, -1], [-1, 1], [-1, -1]],
        thresholds: t.as_slice().to_vec(),
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct BoundCurve {
    detector: String,
    user: usize,
    values: Vec<f64>,
}

#[derive(Serialize)]
struct BerCurves {
    snr_db: Vec<f64>,
    curves: Vec<BoundCurve>,
    error_set_size: usize,
}

/// Union-bound BER curves for an equicorrelated channel, SNR referenced to
/// user 1. `amplitudes` has one entry per user.
pub fn ber_curves_json(rho: f64, amplitudes: &[f64], snr_min: f64, snr_max: f64, points: usize, detectors: &[String]) -> Result<String, String> {
    let k = amplitudes.len();
    if k == 0 || k > WEB_MAX_K {
        return Err(format!("between 1 and {WEB_MAX_K} users"));
    }
    let ch = Channel::equicorrelated(k, rho, amplitudes).map_err(|e| e.to_string())?;
    let f = enumerate_indecomposable(&ch, WEB_MAX_K).map_err(|e| e.to_string())?;
    let snr = grid(snr_min, snr_max, points.clamp(2, 401));
    let mut curves = Vec::new();
    for tag in detectors {
        let variant = match tag.as_str() {
            "gml" => BoundVariant::Gml,
            "lml" => BoundVariant::Lml,
            other => BoundVariant::Las(effective_thresholds(&ch, &schedule_for(k, other)?)),
        };
        for user in 0..k {
            let values = snr
                .iter()
                .map(|&s| {
                    ber_bound(&ch, &f, &variant, sigma_for_snr(amplitudes[0], s), user)
                        .map(|b| b.bound)
                        .map_err(|e| e.to_string())
                })
                .collect::<Result<Vec<_>, _>>()?;
            curves.push(BoundCurve {
                detector: tag.clone(),
                user: user + 1,
                values,
            });
        }
    }
    serde_json::to_string(&BerCurves {
        snr_db: snr,
        curves,
        error_set_size: f.len(),
    })
    .map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn ame_curves(k: usize, groups: Vec<usize>, rho_max: f64, points: usize) -> Result<String, JsError> {
    ame_curves_json(k, &groups, rho_max, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn fixed_point_regions(rho: f64, a1: f64, a2: f64, schedule: &str, extent: f64, n: usize) -> Result<String, JsError> {
    fixed_point_regions_json(rho, a1, a2, schedule, extent, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn ber_curves(
    rho: f64,
    amplitudes: Vec<f64>,
    snr_min: f64,
    snr_max: f64,
    points: usize,
    detectors: Vec<String>,
) -> Result<String, JsError> {
    ber_curves_json(rho, &amplitudes, snr_min, snr_max, points, &detectors).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn ame_curves_start_at_one() {
        let v: Value = serde_json::from_str(&ame_curves_json(40, &[1, 2, 4], 0.5, 51).unwrap()).unwrap();
        assert_eq!(v["rho"].as_array().unwrap().len(), 51);
        assert_eq!(v["lml"][0], 1.0);
        assert_eq!(v["mf"][50], 0.0);
        assert_eq!(v["gplas"][2]["m"], 4);
        assert!(ame_curves_json(1, &[1], 0.5, 10).is_err());
    }

    #[test]
    fn regions_contain_the_noiseless_point() {
        let v: Value = serde_json::from_str(&fixed_point_regions_json(0.4, 1.0, 0.6, "slas", 2.0, 64).unwrap()).unwrap();
        let masks = v["masks"].as_array().unwrap();
        assert_eq!(masks.len(), 64 * 64);
        // Every point has at least one sequential fixed point.
        assert!(masks.iter().all(|m| m.as_u64().unwrap() != 0));
        // The GML vector is always a sequential fixed point.
        let gml = v["gml"].as_array().unwrap();
        for (m, g) in masks.iter().zip(gml) {
            assert!(m.as_u64().unwrap() >> g.as_u64().unwrap() & 1 == 1);
        }
    }

    #[test]
    fn ber_curves_order() {
        let dets = vec!["gml".to_string(), "lml".to_string(), "plas".to_string()];
        let v: Value = serde_json::from_str(&ber_curves_json(0.4, &[1.0, 0.6], 0.0, 12.0, 7, &dets).unwrap()).unwrap();
        let curves = v["curves"].as_array().unwrap();
        assert_eq!(curves.len(), 6);
        for i in 0..7 {
            let g = curves[0]["values"][i].as_f64().unwrap();
            let l = curves[2]["values"][i].as_f64().unwrap();
            assert!(l >= g);
        }
        assert!(ber_curves_json(0.4, &[1.0; 13], 0.0, 1.0, 3, &dets).is_err());
    }
}
