//! Analytic performance bounds.
//!
//! BER union bounds over indecomposable error vectors, distance diagnostics,
//! AME lower bounds, unit-AME conditions, equicorrelated closed forms, and
//! the half-space predicates used to audit the bound's derivation.
//!
//! A threshold vector `t` stands for the diagonal matrix `T = diag(t)`.

use serde::Serialize;

use crate::channel::{BitVector, Channel};
use crate::error_analysis::{ErrorVector, IndecomposableSet};
use crate::las::ThresholdVector;
use crate::{Error, Result};

/// Relative slack for the unit-AME inequalities, which hold with equality on
/// singletons.
pub const UNIT_AME_RTOL: f64 = 1e-12;

/// Gaussian tail `Q(x) = P(N(0,1) > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Pairwise (cascade) summation in slice order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 8;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Which union bound to evaluate.
#[derive(Clone, Debug, PartialEq)]
pub enum BoundVariant {
    /// LAS detector with diagonal thresholds `T`.
    Las(ThresholdVector),
    /// WSLAS and every LML detector (`T = A²`).
    Lml,
    /// Brute-force maximum likelihood.
    Gml,
}

impl BoundVariant {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::Las(_) => "las",
            Self::Lml => "lml",
            Self::Gml => "gml",
        }
    }

    /// The diagonal of `T`, or `None` for GML.
    pub fn thresholds(&self, ch: &Channel) -> Option<Vec<f64>> {
        match self {
            Self::Las(t) => Some(t.as_slice().to_vec()),
            Self::Lml => Some(ch.amplitudes().iter().map(|a| a * a).collect()),
            Self::Gml => None,
        }
    }
}

fn diag_quadratic(t: &[f64], eps: &ErrorVector) -> f64 {
    eps.support().iter().map(|&i| t[i]).sum()
}

fn energy(ch: &Channel, eps: &ErrorVector) -> Result<f64> {
    let e = eps.quadratic(ch.h());
    if e > 0.0 {
        Ok(e)
    } else {
        Err(Error::DegenerateEnergy(e))
    }
}

/// `εᵀ(2H − T)ε / √(εᵀHε)`, the LAS distance (before dividing by σ).
fn las_distance(ch: &Channel, eps: &ErrorVector, t: &[f64]) -> Result<f64> {
    let e = energy(ch, eps)?;
    Ok((2.0 * e - diag_quadratic(t, eps)) / e.sqrt())
}

/// Q-function argument of `eps` in the chosen bound at noise level `sigma`.
pub fn q_argument(ch: &Channel, eps: &ErrorVector, t: Option<&[f64]>, sigma: f64) -> Result<f64> {
    match t {
        Some(t) => Ok(las_distance(ch, eps, t)? / sigma),
        None => Ok(energy(ch, eps)?.sqrt() / sigma),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundTerm {
    pub eps: Vec<i8>,
    pub weight: usize,
    pub q_argument: f64,
    pub q_value: f64,
}

impl BoundTerm {
    pub fn contribution(&self) -> f64 {
        (0.5f64).powi(self.weight as i32) * self.q_value
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UserBound {
    /// 1-based user index.
    pub user: usize,
    pub bound: f64,
    pub negative_arg_terms: usize,
    pub terms: Vec<BoundTerm>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub detector: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Vec<f64>>,
    pub sigma: f64,
    /// True when `F` was truncated by weight: the sums are partial and not
    /// certified bounds.
    pub partial: bool,
    pub per_user: Vec<UserBound>,
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("sigma must be positive and finite, got {sigma}")))
    }
}

/// Union bound on user `k`'s BER (0-based `k`).
pub fn ber_bound(
    ch: &Channel,
    f: &IndecomposableSet,
    variant: &BoundVariant,
    sigma: f64,
    k: usize,
) -> Result<UserBound> {
    f.check_channel(ch)?;
    check_sigma(sigma)?;
    let t = variant.thresholds(ch);
    let mut terms = Vec::with_capacity(f.user_indices(k).len());
    for eps in f.for_user(k) {
        let arg = q_argument(ch, eps, t.as_deref(), sigma)?;
        terms.push(BoundTerm {
            eps: eps.as_slice().to_vec(),
            weight: eps.weight(),
            q_argument: arg,
            q_value: q_function(arg),
        });
    }
    let contributions: Vec<f64> = terms.iter().map(BoundTerm::contribution).collect();
    Ok(UserBound {
        user: k + 1,
        bound: pairwise_sum(&contributions),
        negative_arg_terms: terms.iter().filter(|t| t.q_argument < 0.0).count(),
        terms,
    })
}

/// Bounds for every user.
pub fn ber_bound_report(
    ch: &Channel,
    f: &IndecomposableSet,
    variant: &BoundVariant,
    sigma: f64,
) -> Result<BoundReport> {
    let per_user = (0..ch.k())
        .map(|k| ber_bound(ch, f, variant, sigma, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundReport {
        detector: variant.tag(),
        thresholds: variant.thresholds(ch),
        sigma,
        partial: !f.is_complete(),
        per_user,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Distances {
    pub d_gml: f64,
    pub d_las: f64,
    pub delta_las: f64,
    pub delta_lml: f64,
}

/// GML and LAS distances from the transmitted signal to the separating
/// hyperplanes, and their differences (LML uses `T = A²`).
pub fn distances(ch: &Channel, eps: &ErrorVector, t: &[f64]) -> Result<Distances> {
    let e = energy(ch, eps)?;
    let root = e.sqrt();
    let d_las = (2.0 * e - diag_quadratic(t, eps)) / root;
    Ok(Distances {
        d_gml: root,
        d_las,
        delta_las: (e - diag_quadratic(t, eps)) / root,
        delta_lml: eps.off_diagonal_energy(ch.h()) / root,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AmeEntry {
    /// 1-based user index.
    pub user: usize,
    pub lower_bound: f64,
    pub argmin_eps: Vec<i8>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AmeReport {
    pub detector: &'static str,
    pub partial: bool,
    pub per_user: Vec<AmeEntry>,
}

/// AME lower bound for user `k`: the squared minimum over `F_k` of the
/// clipped distance ratio. For GML this is `min εᵀHε / A_k²`.
pub fn ame_lower_bound(ch: &Channel, f: &IndecomposableSet, variant: &BoundVariant, k: usize) -> Result<AmeEntry> {
    f.check_channel(ch)?;
    let t = variant.thresholds(ch);
    let ak = ch.amplitude(k);
    let mut best: Option<(f64, &ErrorVector)> = None;
    for eps in f.for_user(k) {
        let e = energy(ch, eps)?;
        let ratio = match &t {
            Some(t) => (2.0 * e - diag_quadratic(t, eps)).max(0.0) / (ak * e.sqrt()),
            None => e.sqrt() / ak,
        };
        if best.is_none_or(|(r, _)| ratio < r) {
            best = Some((ratio, eps));
        }
    }
    let (ratio, eps) = best.ok_or_else(|| Error::InvalidErrorVector(format!("F_{} is empty", k + 1)))?;
    Ok(AmeEntry {
        user: k + 1,
        lower_bound: ratio * ratio,
        argmin_eps: eps.as_slice().to_vec(),
    })
}

pub fn ame_report(ch: &Channel, f: &IndecomposableSet, variant: &BoundVariant) -> Result<AmeReport> {
    Ok(AmeReport {
        detector: variant.tag(),
        partial: !f.is_complete(),
        per_user: (0..ch.k())
            .map(|k| ame_lower_bound(ch, f, variant, k))
            .collect::<Result<Vec<_>>>()?,
    })
}

/// Sufficient condition for unit AME of user `k`: for GML
/// `√(εᵀHε) ≥ A_k`, otherwise `εᵀ(2H−T)ε/√(εᵀHε) ≥ A_k`, for all `ε ∈ F_k`.
pub fn unit_ame_condition(ch: &Channel, f: &IndecomposableSet, variant: &BoundVariant, k: usize) -> Result<bool> {
    f.check_channel(ch)?;
    let t = variant.thresholds(ch);
    let ak = ch.amplitude(k);
    for eps in f.for_user(k) {
        let d = match &t {
            Some(t) => las_distance(ch, eps, t)?,
            None => energy(ch, eps)?.sqrt(),
        };
        if d < ak * (1.0 - UNIT_AME_RTOL) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `ρ_M = (4M + 3 − √(8M² + 8M + 1)) / (4(M+1)²)`.
pub fn rho_threshold(m: usize) -> f64 {
    let m = m as f64;
    (4.0 * m + 3.0 - (8.0 * m * m + 8.0 * m + 1.0).sqrt()) / (4.0 * (m + 1.0) * (m + 1.0))
}

fn pair_ratio(m: usize, rho: f64) -> f64 {
    2.0 * (1.0 - (m as f64 + 1.0) * rho).max(0.0) / (2.0 * (1.0 - rho)).sqrt()
}

/// Equal-power equicorrelated GPLAS with group size `M`:
/// `min²{1, 2[1 − (M+1)ρ]⁺ / √(2(1−ρ))}`. Exactly 1 for `ρ ≤ ρ_M`.
pub fn equicorr_ame_gplas(m: usize, rho: f64) -> f64 {
    if rho <= rho_threshold(m) {
        return 1.0;
    }
    let r = pair_ratio(m, rho).min(1.0);
    r * r
}

/// The same bound with the singleton term kept: with `t_k = A²(1 + (M−1)ρ)`
/// the error `e_k` contributes `1 − (M−1)ρ`, which is below 1 for `M ≥ 2`
/// and `ρ > 0`. Coincides with [`equicorr_ame_gplas`] at `M = 1`.
pub fn equicorr_ame_gplas_exact(m: usize, rho: f64) -> f64 {
    let single = (1.0 - (m as f64 - 1.0) * rho).max(0.0);
    let r = single.min(pair_ratio(m, rho)).min(1.0);
    r * r
}

/// Equal-power LML lower bound.
pub fn equicorr_ame_lml(rho: f64) -> f64 {
    equicorr_ame_gplas(1, rho)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaselineDetector {
    Mf,
    DecMmse,
    GmlEquicorr,
}

/// Equicorrelated equal-power AMEs of the MF, decorrelator/MMSE and GML.
pub fn baseline_ame(det: BaselineDetector, k: usize, rho: f64) -> f64 {
    let kf = k as f64;
    match det {
        BaselineDetector::Mf => {
            let v = (1.0 - (kf - 1.0) * rho).max(0.0);
            v * v
        }
        BaselineDetector::DecMmse => {
            (1.0 + (kf - 2.0) * rho - (kf - 1.0) * rho * rho) / (1.0 + (kf - 2.0) * rho)
        }
        BaselineDetector::GmlEquicorr => (2.0 * (1.0 - rho)).min(1.0),
    }
}

/// `(b − 2ε)ᵀ(H − T)ε − yᵀAε`; nonnegative iff `y` lies in the half-space.
pub fn halfspace_margin(ch: &Channel, y: &[f64], b: &BitVector, eps: &ErrorVector, t: &[f64]) -> f64 {
    let h = ch.h();
    let c = eps.apply_to(b);
    let support = eps.support();
    let mut rhs = 0.0;
    for &j in &support {
        let ej = f64::from(eps[j]);
        let col: f64 = (0..ch.k()).map(|i| f64::from(c[i]) * h[(i, j)]).sum();
        rhs += (col - f64::from(c[j]) * t[j]) * ej;
    }
    let lhs: f64 = support
        .iter()
        .map(|&j| y[j] * ch.amplitude(j) * f64::from(eps[j]))
        .sum();
    rhs - lhs
}

/// `yᵀAε ≤ (b − 2ε)ᵀ(H − T)ε`, evaluated verbatim.
pub fn halfspace_check(ch: &Channel, y: &[f64], b: &BitVector, eps: &ErrorVector, t: &[f64]) -> bool {
    halfspace_margin(ch, y, b, eps, t) >= 0.0
}

/// Vertex of the fixed-point region of `b − 2ε`: `(RA − A⁻¹T)(b − 2ε)`.
pub fn vertex(ch: &Channel, b: &BitVector, eps: &ErrorVector, t: &[f64]) -> Vec<f64> {
    let c = eps.apply_to(b);
    let r = ch.r();
    (0..ch.k())
        .map(|i| {
            let ra: f64 = (0..ch.k())
                .map(|j| r[(i, j)] * ch.amplitude(j) * f64::from(c[j]))
                .sum();
            ra - t[i] / ch.amplitude(i) * f64::from(c[i])
        })
        .collect()
}

/// Signed distance from the transmitted signal to the hyperplane through the
/// vertex parallel to the GML boundary: `(RAb − v)ᵀAε / √(εᵀHε)`.
pub fn vertex_plane_distance(ch: &Channel, b: &BitVector, eps: &ErrorVector, t: &[f64]) -> Result<f64> {
    let e = energy(ch, eps)?;
    let v = vertex(ch, b, eps, t);
    let rab = ch.noiseless(b);
    let num: f64 = eps
        .support()
        .iter()
        .map(|&j| (rab[j] - v[j]) * ch.amplitude(j) * f64::from(eps[j]))
        .sum();
    Ok(num / e.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::two_user_example;
    use crate::error_analysis::{enumerate_indecomposable, ENUMERATION_MAX_K};
    use crate::las::{fixed_point_region_check, Schedule};
    use approx::assert_relative_eq;

    fn ev(v: &[i8]) -> ErrorVector {
        ErrorVector::new(v.to_vec()).unwrap()
    }

    fn bits(v: &[i8]) -> BitVector {
        BitVector::new(v.to_vec()).unwrap()
    }

    // High-precision quadrature values.
    const Q_ORACLE: [(f64, f64); 7] = [
        (3.0, 1.349_898_031_630_094_526_7e-3),
        (1.0, 0.158_655_253_931_457_051_41),
        (4.0, 3.167_124_183_311_992_125_4e-5),
        (-2.0, 0.977_249_868_051_820_792_8),
        (0.5, 0.308_537_538_725_986_896_36),
        (6.0, 9.865_876_450_376_981_407e-10),
        (8.0, 6.220_960_574_271_784_123_5e-16),
    ];

    #[test]
    fn q_function_oracle() {
        assert_eq!(q_function(0.0), 0.5);
        for (x, q) in Q_ORACLE {
            assert_relative_eq!(q_function(x), q, max_relative = 1e-12);
        }
        for i in 0..=160 {
            let x = -8.0 + 0.1 * f64::from(i);
            assert!((q_function(-x) - (1.0 - q_function(x))).abs() <= 1e-12);
        }
        assert!(q_function(40.0) >= 0.0 && q_function(40.0) < 1e-300);
    }

    #[test]
    fn pairwise_sum_matches_naive() {
        let v: Vec<f64> = (0..1000).map(|i| 1.0 / (1.0 + f64::from(i))).collect();
        assert_relative_eq!(pairwise_sum(&v), v.iter().sum::<f64>(), max_relative = 1e-14);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn orthogonal_bounds_are_single_user() {
        let amps = [1.0, 0.5, 2.0];
        let ch = Channel::orthogonal(&amps).unwrap();
        let f = enumerate_indecomposable(&ch, ENUMERATION_MAX_K).unwrap();
        let las = BoundVariant::Las(crate::las::effective_thresholds(&ch, &Schedule::plas(3)));
        for variant in [BoundVariant::Lml, BoundVariant::Gml, las] {
            let rep = ber_bound_report(&ch, &f, &variant, 0.7).unwrap();
            for (k, u) in rep.per_user.iter().enumerate() {
                assert_relative_eq!(u.bound, q_function(amps[k] / 0.7), max_relative = 1e-12);
                assert_eq!(u.terms.len(), 2);
            }
        }
    }

    #[test]
    fn two_user_lml_and_gml_oracle() {
        let ch = two_user_example();
        let f = enumerate_indecomposable(&ch, ENUMERATION_MAX_K).unwrap();
        let lml = ber_bound(&ch, &f, &BoundVariant::Lml, 0.25, 0).unwrap();
        assert_relative_eq!(lml.bound, 0.022_052_049_157_380_693_606, max_relative = 1e-12);
        let pair = lml.terms.iter().find(|t| t.weight == 2).unwrap();
        assert_relative_eq!(pair.q_argument, 1.705_605_730_844_883_474_4, max_relative = 1e-12);
        assert_eq!(lml.negative_arg_terms, 0);

        let gml = ber_bound(&ch, &f, &BoundVariant::Gml, 0.25, 0).unwrap();
        assert_relative_eq!(gml.bound, 7.547_044_442_956_160_657_7e-5, max_relative = 1e-12);
        assert!(lml.bound >= gml.bound);

        // Singletons agree across the two bounds.
        for (a, b) in lml.terms.iter().zip(&gml.terms).filter(|(a, _)| a.weight == 1) {
            assert_eq!(a.q_argument, b.q_argument);
        }
    }

    #[test]
    fn negative_arguments_are_counted_not_dropped() {
        let ch = two_user_example();
        let f = enumerate_indecomposable(&ch, ENUMERATION_MAX_K).unwrap();
        let big = ThresholdVector::exact(vec![5.0, 5.0]);
        let u = ber_bound(&ch, &f, &BoundVariant::Las(big), 0.5, 0).unwrap();
        assert_eq!(u.negative_arg_terms, u.terms.len());
        assert!(u.terms.iter().all(|t| t.q_value > 0.5));
    }

    #[test]
    fn foreign_set_is_rejected() {
        let ch = two_user_example();
        let f = enumerate_indecomposable(&ch, ENUMERATION_MAX_K).unwrap();
        let other = Channel::equicorrelated(2, 0.3, &[1.0, 0.6]).unwrap();
        assert!(ber_bound(&other, &f, &BoundVariant::Gml, 0.5, 0).is_err());
        assert!(ber_bound(&ch, &f, &BoundVariant::Gml, 0.0, 0).is_err());
    }

    #[test]
    fn distance_examples() {
        let ch = two_user_example();
        let t = [1.0, 0.36];
        let d = distances(&ch, &ev(&[0, 1]), &t).unwrap();
        assert_eq!(d.delta_lml, 0.0);
        assert_relative_eq!(d.d_gml, 0.6);

        let d = distances(&ch, &ev(&[1, -1]), &t).unwrap();
        let (r, a1, a2): (f64, f64, f64) = (0.4, 1.0, 0.6);
        let expect = -2.0 * r * a1 * a2 / (a1 * a1 + a2 * a2 - 2.0 * r * a1 * a2).sqrt();
        assert_relative_eq!(d.delta_lml, expect, max_relative = 1e-14);
        assert_relative_eq!(d.d_las - d.d_gml, d.delta_las, max_relative = 1e-14);
        assert_relative_eq!(d.d_las, 0.40 / 0.88f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn ame_examples() {
        let ch = Channel::orthogonal(&[1.0, 2.0, 0.5]).unwrap();
        let f = enumerate_indecomposable(&ch, ENUMERATION_MAX_K).unwrap();
        for k in 0..3 {
            assert_eq!(ame_lower_bound(&ch, &f, &BoundVariant::Lml, k).unwrap().lower_bound, 1.0);
            assert!(unit_ame_condition(&ch, &f, &BoundVariant::Lml, k).unwrap());
            assert!(unit_ame_condition(&ch, &f, &BoundVariant::Gml, k).unwrap());
        }
        // t_k > 2A_k² clips the singleton term to zero.
        let t = ThresholdVector::exact(vec![2.5, 8.0, 0.5]);
        let e = ame_lower_bound(&ch, &f, &BoundVariant::Las(t), 0).unwrap();
        assert_eq!(e.lower_bound, 0.0);
        assert_eq!(e.argmin_eps.iter().filter(|&&v| v != 0).count(), 1);
    }

    #[test]
    fn unit_ame_around_rho_1() {
        for (rho, expect) in [(0.1, true), (0.3, false)] {
            let ch = Channel::equicorrelated(5, rho, &[1.0; 5]).unwrap();
            let f = enumerate_indecomposable(&ch, ENUMERATION_MAX_K).unwrap();
            for k in 0..5 {
                assert_eq!(unit_ame_condition(&ch, &f, &BoundVariant::Lml, k).unwrap(), expect);
            }
        }
    }

    #[test]
    fn closed_forms() {
        let rho1 = (7.0 - 17f64.sqrt()) / 16.0;
        assert_relative_eq!(rho_threshold(1), rho1, max_relative = 1e-15);
        assert_relative_eq!(rho_threshold(1), 0.179_805_898_398_896_215_64, max_relative = 1e-14);
        for m in 1..=8 {
            assert_eq!(equicorr_ame_gplas(m, 0.0), 1.0);
            assert_eq!(equicorr_ame_gplas(m, rho_threshold(m)), 1.0);
            assert!(equicorr_ame_gplas(m, rho_threshold(m) + 1e-6) < 1.0);
            assert!(rho_threshold(m + 1) < rho_threshold(m));
            // ρ_M is the root of 2(1 − (M+1)ρ) = √(2(1−ρ)).
            let r = rho_threshold(m);
            assert!((pair_ratio(m, r) - 1.0).abs() < 1e-12);
        }
        assert_eq!(equicorr_ame_gplas(1, 0.3), equicorr_ame_gplas_exact(1, 0.3));
        assert!(equicorr_ame_gplas_exact(2, 0.05) < equicorr_ame_gplas(2, 0.05));
        assert_eq!(equicorr_ame_gplas(1, 0.5), 0.0);
    }

    #[test]
    fn baseline_examples() {
        assert_eq!(baseline_ame(BaselineDetector::Mf, 40, 0.0), 1.0);
        assert_eq!(baseline_ame(BaselineDetector::Mf, 40, 0.5), 0.0);
        assert_relative_eq!(baseline_ame(BaselineDetector::DecMmse, 40, 0.5), 0.5125, max_relative = 1e-15);
        assert_eq!(baseline_ame(BaselineDetector::GmlEquicorr, 40, 0.5), 1.0);
        assert_relative_eq!(baseline_ame(BaselineDetector::GmlEquicorr, 3, 0.7), 0.6, max_relative = 1e-15);
        // Reciprocal of the diagonal of R⁻¹.
        let ch = Channel::equicorrelated(7, 0.3, &[1.0; 7]).unwrap();
        let inv = ch.r().clone().try_inverse().unwrap();
        assert_relative_eq!(baseline_ame(BaselineDetector::DecMmse, 7, 0.3), 1.0 / inv[(0, 0)], max_relative = 1e-13);
    }

    #[test]
    fn vertex_example_and_region_equality() {
        let ch = two_user_example();
        let t = [1.0, 0.36];
        let b = bits(&[1, 1]);
        let eps = ev(&[1, 0]);
        let v = vertex(&ch, &b, &eps, &t);
        assert_relative_eq!(v[0], 0.24, max_relative = 1e-14);
        assert_relative_eq!(v[1], -0.4, max_relative = 1e-14);
        // Every fixed-point constraint of b − 2ε is tight at the vertex.
        let c = BitVector::new(eps.apply_to(&b)).unwrap();
        let g = ch.gradient(&v, &c);
        for k in 0..2 {
            assert_relative_eq!(f64::from(c[k]) * g[k], -t[k], max_relative = 1e-14);
        }
        assert!(fixed_point_region_check(&ch, &v, &c, &t));
        // T = 0 gives the noiseless error signal.
        assert_eq!(vertex(&ch, &b, &eps, &[0.0, 0.0]), ch.noiseless(&c));
    }

    #[test]
    fn vertex_distance_equals_bound_distance() {
        let ch = Channel::equicorrelated(3, 0.35, &[1.0, 0.7, 1.3]).unwrap();
        let t = [1.4, 0.9, 2.0];
        for bi in 0..8 {
            let b = BitVector::from_index(3, bi);
            for code in 1..27usize {
                let mut c = code;
                let e: Vec<i8> = (0..3)
                    .map(|_| {
                        let v = (c % 3) as i8 - 1;
                        c /= 3;
                        v
                    })
                    .collect();
                let Ok(eps) = ErrorVector::new(e) else { continue };
                if !crate::error_analysis::is_admissible(&eps, &b) {
                    continue;
                }
                let dv = vertex_plane_distance(&ch, &b, &eps, &t).unwrap();
                let dl = las_distance(&ch, &eps, &t).unwrap();
                assert!((dv - dl).abs() <= 1e-12 * dl.abs().max(1.0));
            }
        }
    }

    #[test]
    fn halfspace_deep_point() {
        let ch = two_user_example();
        let b = bits(&[1, -1]);
        let eps = ev(&[1, -1]);
        let y: Vec<f64> = (0..2).map(|i| -1e6 * ch.amplitude(i) * f64::from(eps[i])).collect();
        assert!(halfspace_check(&ch, &y, &b, &eps, &[1.0, 0.36]));
        let y: Vec<f64> = y.iter().map(|v| -v).collect();
        assert!(!halfspace_check(&ch, &y, &b, &eps, &[1.0, 0.36]));
    }
}
