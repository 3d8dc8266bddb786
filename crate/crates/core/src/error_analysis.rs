//! Error vectors and indecomposable error sets.
//!
//! An error vector `ε = ½(b − b*)` has entries in `{-1, 0, +1}`. It is
//! indecomposable when every split of its support into two nonempty parts
//! `ε = ε₁ + ε₂` has strictly negative cross energy `ε₁ᵀHε₂ < 0`. Only
//! indecomposable vectors contribute to the union bounds. Within one support
//! set there are either none or exactly two (antipodal) indecomposable
//! vectors, which caps `|F|` at `2(2^K − 1)` and lets the search stop at the
//! first hit per support.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::channel::{BitVector, Channel};
use crate::{Error, Result};

/// Default refusal limit for full enumeration.
pub const ENUMERATION_MAX_K: usize = 20;
/// Limit for the exhaustive reference enumerator.
pub const EXHAUSTIVE_MAX_K: usize = 12;

/// Cross energies within `CROSS_RTOL · max|H_ij|` of zero count as zero,
/// which makes them decomposable.
pub const CROSS_RTOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct ErrorVector(Vec<i8>);

impl ErrorVector {
    pub fn new(e: Vec<i8>) -> Result<Self> {
        if e.iter().any(|&v| !(-1..=1).contains(&v)) {
            return Err(Error::InvalidErrorVector("entries must be in {-1, 0, 1}".into()));
        }
        if e.iter().all(|&v| v == 0) {
            return Err(Error::InvalidErrorVector("the zero vector is not an error".into()));
        }
        Ok(Self(e))
    }

    /// `½(b − b*)`; fails when the two vectors agree.
    pub fn between(b: &BitVector, b_star: &BitVector) -> Result<Self> {
        Self::new(
            b.as_slice()
                .iter()
                .zip(b_star.as_slice())
                .map(|(x, y)| (x - y) / 2)
                .collect(),
        )
    }

    /// Unit error `±e_k` in dimension `k_total`.
    pub fn unit(k_total: usize, k: usize, sign: i8) -> Self {
        let mut e = vec![0; k_total];
        e[k] = sign;
        Self(e)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    /// Number of nonzero entries `w(ε)`.
    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&v| v != 0).count()
    }

    /// Support `I(ε)`, 0-based.
    pub fn support(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn affects(&self, k: usize) -> bool {
        self.0[k] != 0
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|v| -v).collect())
    }

    /// `b − 2ε` (entries outside `{-1,+1}` when `ε` is not admissible).
    pub fn apply_to(&self, b: &BitVector) -> Vec<i8> {
        b.as_slice().iter().zip(&self.0).map(|(bi, ei)| bi - 2 * ei).collect()
    }

    /// `εᵀ M ε` for a square matrix `M`.
    pub fn quadratic(&self, m: &DMatrix<f64>) -> f64 {
        let s = self.support();
        let mut acc = 0.0;
        for &i in &s {
            for &j in &s {
                acc += f64::from(self.0[i]) * m[(i, j)] * f64::from(self.0[j]);
            }
        }
        acc
    }

    /// `εᵀ(H − A²)ε`, the off-diagonal part of `εᵀHε`.
    pub fn off_diagonal_energy(&self, h: &DMatrix<f64>) -> f64 {
        let s = self.support();
        let mut acc = 0.0;
        for &i in &s {
            for &j in &s {
                if i != j {
                    acc += f64::from(self.0[i]) * h[(i, j)] * f64::from(self.0[j]);
                }
            }
        }
        acc
    }
}

impl TryFrom<Vec<i8>> for ErrorVector {
    type Error = Error;
    fn try_from(v: Vec<i8>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ErrorVector> for Vec<i8> {
    fn from(e: ErrorVector) -> Self {
        e.0
    }
}

impl std::ops::Index<usize> for ErrorVector {
    type Output = i8;
    fn index(&self, k: usize) -> &i8 {
        &self.0[k]
    }
}

/// `ε ∈ A(b)`: every nonzero `ε_i` equals `b_i`, so `b − 2ε` is a bit vector.
pub fn is_admissible(eps: &ErrorVector, b: &BitVector) -> bool {
    eps.as_slice()
        .iter()
        .zip(b.as_slice())
        .all(|(&e, &bi)| e == 0 || e == bi)
}

fn cross_tolerance(h: &DMatrix<f64>) -> f64 {
    CROSS_RTOL * h.amax()
}

/// Indecomposability test on a support given as `(index, sign)` pairs.
///
/// Splits are enumerated with the first support element pinned to the first
/// part, so each unordered split is seen once.
fn indecomposable_on(h: &DMatrix<f64>, support: &[usize], signs: &[i8], tol: f64) -> bool {
    let w = support.len();
    if w <= 1 {
        return true;
    }
    // m[i][j] = ε_i H_ij ε_j restricted to the support.
    let m: Vec<f64> = (0..w * w)
        .map(|ij| {
            let (i, j) = (ij / w, ij % w);
            f64::from(signs[i]) * h[(support[i], support[j])] * f64::from(signs[j])
        })
        .collect();
    // Necessary condition first: every singleton split.
    for i in 0..w {
        let row: f64 = (0..w).filter(|&j| j != i).map(|j| m[i * w + j]).sum();
        if row >= -tol {
            return false;
        }
    }
    let free = w - 1;
    let full = (1u64 << free) - 1;
    // mask bit j (0-based) set means support element j+1 joins part one.
    for mask in 0..full {
        let in_one = |i: usize| i == 0 || (mask >> (i - 1)) & 1 == 1;
        let ones = 1 + mask.count_ones() as usize;
        if ones == 1 || ones == w - 1 {
            continue; // singleton splits checked above
        }
        let mut cross = 0.0;
        for i in (0..w).filter(|&i| in_one(i)) {
            for j in (0..w).filter(|&j| !in_one(j)) {
                cross += m[i * w + j];
            }
        }
        if cross >= -tol {
            return false;
        }
    }
    true
}

/// True iff every nonempty support split has `ε₁ᵀHε₂ < 0`.
pub fn is_indecomposable(ch: &Channel, eps: &ErrorVector) -> bool {
    let support = eps.support();
    let signs: Vec<i8> = support.iter().map(|&i| eps[i]).collect();
    indecomposable_on(ch.h(), &support, &signs, cross_tolerance(ch.h()))
}

/// `εᵀ(H − A²)ε`; nonpositive on indecomposable vectors and zero exactly at
/// weight one.
pub fn lemma2_margin(ch: &Channel, eps: &ErrorVector) -> f64 {
    eps.off_diagonal_energy(ch.h())
}

/// Indecomposable error vectors of one channel, with per-user views.
#[derive(Clone, Debug, PartialEq)]
pub struct IndecomposableSet {
    k: usize,
    vectors: Vec<ErrorVector>,
    by_user: Vec<Vec<usize>>,
    fingerprint: String,
    max_weight: Option<usize>,
}

impl IndecomposableSet {
    fn build(ch: &Channel, vectors: Vec<ErrorVector>, max_weight: Option<usize>) -> Self {
        let k = ch.k();
        let mut by_user = vec![Vec::new(); k];
        for (idx, v) in vectors.iter().enumerate() {
            for u in v.support() {
                by_user[u].push(idx);
            }
        }
        Self {
            k,
            vectors,
            by_user,
            fingerprint: ch.fingerprint(),
            max_weight: max_weight.filter(|&w| w < k),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn vectors(&self) -> &[ErrorVector] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// `F_k`: the vectors with `ε_k ≠ 0`.
    pub fn for_user(&self, k: usize) -> impl Iterator<Item = &ErrorVector> + '_ {
        self.by_user[k].iter().map(move |&i| &self.vectors[i])
    }

    pub fn user_indices(&self, k: usize) -> &[usize] {
        &self.by_user[k]
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    /// `Some(w)` when enumeration stopped at weight `w < K`; sums over such a
    /// set are partial and not certified bounds.
    pub fn max_weight(&self) -> Option<usize> {
        self.max_weight
    }

    pub fn is_complete(&self) -> bool {
        self.max_weight.is_none()
    }

    /// Fails unless this set was built for `ch`.
    pub fn check_channel(&self, ch: &Channel) -> Result<()> {
        let fp = ch.fingerprint();
        if fp != self.fingerprint {
            return Err(Error::FingerprintMismatch {
                expected: self.fingerprint.clone(),
                got: fp,
            });
        }
        Ok(())
    }

    /// Sorted copy of the vectors, for set comparisons.
    pub fn sorted_vectors(&self) -> Vec<ErrorVector> {
        let mut v = self.vectors.clone();
        v.sort();
        v
    }

    pub fn to_doc(&self) -> IndecomposableDoc {
        IndecomposableDoc {
            channel_fingerprint: self.fingerprint.clone(),
            k: self.k,
            max_weight: self.max_weight,
            vectors: self
                .vectors
                .iter()
                .map(|v| {
                    let support = v.support();
                    SupportSigns {
                        signs: support.iter().map(|&i| v[i]).collect(),
                        support: support.iter().map(|i| i + 1).collect(),
                    }
                })
                .collect(),
        }
    }

    /// Rebuilds from JSON, refusing documents made for another channel.
    pub fn from_doc(doc: IndecomposableDoc, ch: &Channel) -> Result<Self> {
        let fp = ch.fingerprint();
        if doc.channel_fingerprint != fp {
            return Err(Error::FingerprintMismatch {
                expected: doc.channel_fingerprint,
                got: fp,
            });
        }
        if doc.k != ch.k() {
            return Err(Error::Dimension {
                what: "error vector dimension",
                expected: ch.k(),
                got: doc.k,
            });
        }
        let vectors = doc
            .vectors
            .into_iter()
            .map(|ss| {
                if ss.support.len() != ss.signs.len() {
                    return Err(Error::InvalidErrorVector("support and signs differ in length".into()));
                }
                let mut e = vec![0i8; doc.k];
                for (&i, &s) in ss.support.iter().zip(&ss.signs) {
                    if i == 0 || i > doc.k || (s != 1 && s != -1) {
                        return Err(Error::InvalidErrorVector(format!("bad entry ({i}, {s})")));
                    }
                    e[i - 1] = s;
                }
                ErrorVector::new(e)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::build(ch, vectors, doc.max_weight))
    }
}

/// JSON form of an indecomposable set; supports are 1-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndecomposableDoc {
    pub channel_fingerprint: String,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_weight: Option<usize>,
    pub vectors: Vec<SupportSigns>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportSigns {
    pub support: Vec<usize>,
    pub signs: Vec<i8>,
}

/// Support masks of weight `w` over `k` users, in increasing numeric order.
fn supports_of_weight(k: usize, w: usize) -> Vec<u64> {
    if w == 0 || w > k {
        return Vec::new();
    }
    let mut out = Vec::new();
    let limit = 1u64 << k;
    let mut mask = (1u64 << w) - 1;
    while mask < limit {
        out.push(mask);
        // Gosper's hack: next integer with the same popcount.
        let c = mask & mask.wrapping_neg();
        let r = mask + c;
        mask = (((r ^ mask) >> 2) / c) | r;
    }
    out
}

/// Scans the sign patterns of one support (first sign pinned to +1) and
/// returns the indecomposable pattern if there is one.
fn scan_support(h: &DMatrix<f64>, k: usize, mask: u64, tol: f64) -> Option<ErrorVector> {
    let support: Vec<usize> = (0..k).filter(|&i| mask >> i & 1 == 1).collect();
    let w = support.len();
    let mut signs = vec![1i8; w];
    for pattern in 0..(1u64 << (w - 1)) {
        for (j, s) in signs.iter_mut().enumerate().skip(1) {
            *s = if pattern >> (j - 1) & 1 == 1 { -1 } else { 1 };
        }
        if indecomposable_on(h, &support, &signs, tol) {
            let mut e = vec![0i8; k];
            for (&i, &s) in support.iter().zip(&signs) {
                e[i] = s;
            }
            return Some(ErrorVector(e));
        }
    }
    None
}

fn enumeration_cost(k: usize) -> f64 {
    (3f64.powi(k as i32) - 1.0) / 2.0
}

fn enumerate_impl(ch: &Channel, max_weight: usize) -> IndecomposableSet {
    let k = ch.k();
    let h = ch.h();
    let tol = cross_tolerance(h);
    let mut vectors = Vec::new();
    for w in 1..=max_weight.min(k) {
        let masks = supports_of_weight(k, w);
        #[cfg(feature = "parallel")]
        let hits: Vec<Option<ErrorVector>> = {
            use rayon::prelude::*;
            masks.par_iter().map(|&m| scan_support(h, k, m, tol)).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let hits: Vec<Option<ErrorVector>> = masks.iter().map(|&m| scan_support(h, k, m, tol)).collect();
        for e in hits.into_iter().flatten() {
            let neg = e.negated();
            vectors.push(e);
            vectors.push(neg);
        }
    }
    IndecomposableSet::build(ch, vectors, Some(max_weight))
}

/// All indecomposable error vectors, one support set at a time in order of
/// increasing weight. Refuses `K > max_k`.
pub fn enumerate_indecomposable(ch: &Channel, max_k: usize) -> Result<IndecomposableSet> {
    let k = ch.k();
    if k > max_k || k > 62 {
        return Err(Error::TooLarge {
            what: "indecomposable enumeration",
            k,
            max: max_k.min(62),
            cost: enumeration_cost(k),
        });
    }
    Ok(enumerate_impl(ch, k))
}

/// Enumeration truncated at weight `max_weight`, allowed for any `K ≤ 62`.
/// The result reports the truncation through [`IndecomposableSet::max_weight`].
pub fn enumerate_indecomposable_truncated(ch: &Channel, max_weight: usize) -> Result<IndecomposableSet> {
    if ch.k() > 62 {
        return Err(Error::TooLarge {
            what: "indecomposable enumeration",
            k: ch.k(),
            max: 62,
            cost: enumeration_cost(ch.k()),
        });
    }
    Ok(enumerate_impl(ch, max_weight))
}

/// `ε₁ᵀHε₂` computed on full-length vectors.
fn cross_energy(h: &DMatrix<f64>, e1: &[i8], e2: &[i8]) -> f64 {
    let k = e1.len();
    let mut acc = 0.0;
    for i in 0..k {
        if e1[i] == 0 {
            continue;
        }
        for j in 0..k {
            if e2[j] != 0 {
                acc += f64::from(e1[i]) * h[(i, j)] * f64::from(e2[j]);
            }
        }
    }
    acc
}

/// Exhaustive reference: every one of the `3^K − 1` nonzero ternary vectors
/// is tested against every ordered split of its support, without pruning.
pub fn enumerate_indecomposable_exhaustive(ch: &Channel) -> Result<IndecomposableSet> {
    let k = ch.k();
    if k > EXHAUSTIVE_MAX_K {
        return Err(Error::TooLarge {
            what: "exhaustive enumeration",
            k,
            max: EXHAUSTIVE_MAX_K,
            cost: 3f64.powi(k as i32),
        });
    }
    let h = ch.h();
    let tol = cross_tolerance(h);
    let total = 3usize.pow(k as u32);
    let mut vectors = Vec::new();
    let mut e = vec![0i8; k];
    for code in 0..total {
        let mut c = code;
        for v in e.iter_mut() {
            *v = (c % 3) as i8 - 1;
            c /= 3;
        }
        if e.iter().all(|&v| v == 0) {
            continue;
        }
        let support: Vec<usize> = (0..k).filter(|&i| e[i] != 0).collect();
        let w = support.len();
        let mut ok = true;
        for sub in 1..((1u64 << w) - 1) {
            let mut e1 = vec![0i8; k];
            let mut e2 = vec![0i8; k];
            for (j, &i) in support.iter().enumerate() {
                if sub >> j & 1 == 1 {
                    e1[i] = e[i];
                } else {
                    e2[i] = e[i];
                }
            }
            if cross_energy(h, &e1, &e2) >= -tol {
                ok = false;
                break;
            }
        }
        if ok {
            vectors.push(ErrorVector(e.clone()));
        }
    }
    Ok(IndecomposableSet::build(ch, vectors, None))
}
