//! Synchronous CDMA channel model.
//!
//! A channel is described by the crosscorrelation matrix `R`, the diagonal
//! amplitude matrix `A` and, optionally, the spreading matrix `S` with
//! `R = SᵀS`. The matched-filter bank output is `y = RAb + n` with
//! `n ~ N(0, σ²R)`, and detectors maximise `f(y|b) = -½ bᵀHb + bᵀAy` where
//! `H = ARA`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::rng::{self, domain};
use crate::{Error, Result};

/// Entries of `R` may deviate from symmetry / unit diagonal by this much.
pub const STRUCTURE_TOL: f64 = 1e-10;
/// Eigenvalues of `R` down to `-PSD_TOL` are accepted and clamped to zero.
pub const PSD_TOL: f64 = 1e-10;

/// Sign with the crate-wide tie rule `sign(0) = +1`.
#[inline]
pub fn sign(x: f64) -> i8 {
    if x < 0.0 {
        -1
    } else {
        1
    }
}

/// A vector of antipodal symbols in `{-1, +1}^K`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct BitVector(Vec<i8>);

impl BitVector {
    pub fn new(bits: Vec<i8>) -> Result<Self> {
        if let Some(bad) = bits.iter().find(|&&v| v != 1 && v != -1) {
            return Err(Error::InvalidBits(format!("entry {bad} is not ±1")));
        }
        Ok(Self(bits))
    }

    pub fn all_plus(k: usize) -> Self {
        Self(vec![1; k])
    }

    /// Elementwise signs of `values`, with `sign(0) = +1`.
    pub fn from_signs(values: &[f64]) -> Self {
        Self(values.iter().map(|&v| sign(v)).collect())
    }

    /// The bit vector whose entry `k` is `+1` iff bit `K-1-k` of `index` is
    /// set. Index order therefore matches lexicographic order with `-1 < +1`.
    pub fn from_index(k: usize, index: u64) -> Self {
        Self(
            (0..k)
                .map(|i| if index >> (k - 1 - i) & 1 == 1 { 1 } else { -1 })
                .collect(),
        )
    }

    pub fn random<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Self {
        Self((0..k).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect())
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

    pub fn get(&self, k: usize) -> i8 {
        self.0[k]
    }

    pub fn flip(&mut self, k: usize) {
        self.0[k] = -self.0[k];
    }

    pub fn to_f64(&self) -> DVector<f64> {
        DVector::from_iterator(self.0.len(), self.0.iter().map(|&v| f64::from(v)))
    }

    /// Number of positions where `self` and `other` differ.
    pub fn hamming(&self, other: &BitVector) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }
}

impl TryFrom<Vec<i8>> for BitVector {
    type Error = Error;
    fn try_from(v: Vec<i8>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<BitVector> for Vec<i8> {
    fn from(b: BitVector) -> Self {
        b.0
    }
}

impl std::ops::Index<usize> for BitVector {
    type Output = i8;
    fn index(&self, k: usize) -> &i8 {
        &self.0[k]
    }
}

/// Matched-filter bank output together with the noise level it was drawn at.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub y: Vec<f64>,
    pub sigma: f64,
}

impl Observation {
    pub fn new(y: Vec<f64>, sigma: f64) -> Self {
        assert!(sigma >= 0.0, "sigma must be non-negative");
        Self { y, sigma }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// `N × K` matrix of unit-norm spreading sequences, one per column.
#[derive(Clone, Debug, PartialEq)]
pub struct SpreadingMatrix {
    columns: DMatrix<f64>,
}

impl SpreadingMatrix {
    pub fn new(columns: DMatrix<f64>) -> Result<Self> {
        if columns.ncols() == 0 || columns.nrows() == 0 {
            return Err(Error::InvalidChannel("empty spreading matrix".into()));
        }
        for (k, col) in columns.column_iter().enumerate() {
            let norm = col.norm();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidChannel(format!(
                    "spreading sequence {} has norm {norm}, expected 1",
                    k + 1
                )));
            }
        }
        Ok(Self { columns })
    }

    /// Builds from a list of columns, each of length `N`.
    pub fn from_columns(cols: &[Vec<f64>]) -> Result<Self> {
        let n = cols.first().map_or(0, Vec::len);
        if cols.iter().any(|c| c.len() != n) {
            return Err(Error::InvalidChannel("spreading columns differ in length".into()));
        }
        Self::new(DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i]))
    }

    pub fn n(&self) -> usize {
        self.columns.nrows()
    }

    pub fn k(&self) -> usize {
        self.columns.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.columns
    }

    pub fn correlation(&self) -> DMatrix<f64> {
        self.columns.transpose() * &self.columns
    }
}

/// Random binary spreading: i.i.d. chips `±1/√N`, equiprobable.
pub fn make_random_spreading(k: usize, n: usize, seed: u64) -> SpreadingMatrix {
    assert!(k >= 1 && n >= 1, "need K >= 1 and N >= 1");
    let mut rng = rng::stream(seed, domain::SPREADING, 0);
    let chip = 1.0 / (n as f64).sqrt();
    let columns = DMatrix::from_fn(n, k, |_, _| if rng.random::<bool>() { chip } else { -chip });
    SpreadingMatrix { columns }
}

/// An immutable synchronous CDMA channel.
#[derive(Clone, Debug)]
pub struct Channel {
    amplitudes: Vec<f64>,
    r: DMatrix<f64>,
    h: DMatrix<f64>,
    spreading: Option<SpreadingMatrix>,
    /// `G` with `G Gᵀ = R`, used to synthesise correlated noise.
    noise_factor: DMatrix<f64>,
}

impl Channel {
    /// Generic constructor from a crosscorrelation matrix.
    pub fn from_correlation(r: DMatrix<f64>, amplitudes: &[f64]) -> Result<Self> {
        let k = amplitudes.len();
        if k == 0 {
            return Err(Error::InvalidChannel("no users".into()));
        }
        if r.nrows() != k || r.ncols() != k {
            return Err(Error::Dimension {
                what: "crosscorrelation matrix",
                expected: k,
                got: r.nrows(),
            });
        }
        if let Some((i, a)) = amplitudes
            .iter()
            .enumerate()
            .find(|(_, &a)| !(a > 0.0 && a.is_finite()))
        {
            return Err(Error::InvalidChannel(format!(
                "amplitude A_{} = {a} must be positive",
                i + 1
            )));
        }
        for i in 0..k {
            if (r[(i, i)] - 1.0).abs() > STRUCTURE_TOL {
                return Err(Error::InvalidChannel(format!(
                    "R_{0}{0} = {1} but must equal 1",
                    i + 1,
                    r[(i, i)]
                )));
            }
            for j in 0..i {
                if (r[(i, j)] - r[(j, i)]).abs() > STRUCTURE_TOL {
                    return Err(Error::InvalidChannel("R is not symmetric".into()));
                }
            }
        }
        // Symmetrise exactly so that H is exactly symmetric downstream.
        let mut r = (&r + r.transpose()) * 0.5;
        for i in 0..k {
            r[(i, i)] = 1.0;
        }
        let noise_factor = psd_sqrt(&r)?;
        // Product order fixed by (min, max) index so that H is exactly symmetric.
        let h = DMatrix::from_fn(k, k, |i, j| {
            let (lo, hi) = (i.min(j), i.max(j));
            amplitudes[lo] * r[(lo, hi)] * amplitudes[hi]
        });
        Ok(Self {
            amplitudes: amplitudes.to_vec(),
            r,
            h,
            spreading: None,
            noise_factor,
        })
    }

    /// Equal crosscorrelation `rho` between every pair of users.
    pub fn equicorrelated(k: usize, rho: f64, amplitudes: &[f64]) -> Result<Self> {
        if amplitudes.len() != k {
            return Err(Error::Dimension {
                what: "amplitudes",
                expected: k,
                got: amplitudes.len(),
            });
        }
        if k >= 2 {
            let lo = -1.0 / (k as f64 - 1.0);
            if !(rho > lo && rho < 1.0) {
                return Err(Error::CorrelationOutOfRange { rho, lo, k });
            }
        }
        let r = DMatrix::from_fn(k, k, |i, j| if i == j { 1.0 } else { rho });
        Self::from_correlation(r, amplitudes)
    }

    /// `R = SᵀS`, keeping `S` for chip-level transmission.
    pub fn from_spreading(s: SpreadingMatrix, amplitudes: &[f64]) -> Result<Self> {
        if amplitudes.len() != s.k() {
            return Err(Error::Dimension {
                what: "amplitudes",
                expected: s.k(),
                got: amplitudes.len(),
            });
        }
        let mut ch = Self::from_correlation(s.correlation(), amplitudes)?;
        ch.spreading = Some(s);
        Ok(ch)
    }

    /// Orthogonal users: `R = I`.
    pub fn orthogonal(amplitudes: &[f64]) -> Result<Self> {
        Self::from_correlation(DMatrix::identity(amplitudes.len(), amplitudes.len()), amplitudes)
    }

    pub fn k(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, k: usize) -> f64 {
        self.amplitudes[k]
    }

    pub fn r(&self) -> &DMatrix<f64> {
        &self.r
    }

    pub fn h(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn spreading(&self) -> Option<&SpreadingMatrix> {
        self.spreading.as_ref()
    }

    pub fn noise_factor(&self) -> &DMatrix<f64> {
        &self.noise_factor
    }

    /// Noiseless matched-filter output `RAb`.
    pub fn noiseless(&self, b: &BitVector) -> Vec<f64> {
        let k = self.k();
        (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| self.r[(i, j)] * self.amplitudes[j] * f64::from(b[j]))
                    .sum()
            })
            .collect()
    }

    /// Draws `y = RAb + n`, `n = σ G z` with `z` i.i.d. standard normal.
    pub fn transmit_with<R: Rng + ?Sized>(&self, b: &BitVector, sigma: f64, rng: &mut R) -> Observation {
        assert_eq!(b.len(), self.k(), "bit vector length must equal K");
        let mut y = self.noiseless(b);
        if sigma > 0.0 {
            let z: Vec<f64> = (0..self.k()).map(|_| rng.sample(StandardNormal)).collect();
            for (i, yi) in y.iter_mut().enumerate() {
                let n: f64 = (0..self.k()).map(|j| self.noise_factor[(i, j)] * z[j]).sum();
                *yi += sigma * n;
            }
        }
        Observation::new(y, sigma)
    }

    /// Seeded variant of [`Channel::transmit_with`].
    pub fn transmit(&self, b: &BitVector, sigma: f64, seed: u64) -> Observation {
        let mut rng = rng::stream(seed, domain::TRANSMIT, 0);
        self.transmit_with(b, sigma, &mut rng)
    }

    /// Chip-level path: `r = SAb + m` with white `m ~ N(0, σ²I)`, then
    /// `y = Sᵀr`. Returns `None` if the channel has no spreading matrix.
    pub fn transmit_chips_with<R: Rng + ?Sized>(
        &self,
        b: &BitVector,
        sigma: f64,
        rng: &mut R,
    ) -> Option<Observation> {
        let s = self.spreading.as_ref()?.matrix();
        let ab = DVector::from_iterator(self.k(), (0..self.k()).map(|j| self.amplitudes[j] * f64::from(b[j])));
        let mut r = s * ab;
        if sigma > 0.0 {
            for v in r.iter_mut() {
                *v += sigma * rng.sample::<f64, _>(StandardNormal);
            }
        }
        let y = s.transpose() * r;
        Some(Observation::new(y.iter().copied().collect(), sigma))
    }

    /// `f(y|b) = -½ bᵀHb + bᵀAy`.
    pub fn likelihood(&self, y: &[f64], b: &BitVector) -> f64 {
        let k = self.k();
        let mut quad = 0.0;
        let mut lin = 0.0;
        for i in 0..k {
            let bi = f64::from(b[i]);
            let mut row = 0.0;
            for j in 0..k {
                row += self.h[(i, j)] * f64::from(b[j]);
            }
            quad += bi * row;
            lin += bi * self.amplitudes[i] * y[i];
        }
        -0.5 * quad + lin
    }

    /// `g = -Hb + Ay`.
    pub fn gradient(&self, y: &[f64], b: &BitVector) -> Vec<f64> {
        let k = self.k();
        (0..k)
            .map(|i| {
                let hb: f64 = (0..k).map(|j| self.h[(i, j)] * f64::from(b[j])).sum();
                -hb + self.amplitudes[i] * y[i]
            })
            .collect()
    }

    /// Hex SHA-256 over `K` and the bit patterns of `H`.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        hasher.update((self.k() as u64).to_le_bytes());
        for v in self.h.iter() {
            hasher.update(v.to_bits().to_le_bytes());
        }
        hasher
            .finalize()
            .iter()
            .map(|byte| format!("{byte:02x}"))
            .collect()
    }

    pub fn to_doc(&self, sigma: Option<f64>) -> ChannelDoc {
        let k = self.k();
        ChannelDoc {
            k,
            a: self.amplitudes.clone(),
            r: (0..k).map(|i| (0..k).map(|j| self.r[(i, j)]).collect()).collect(),
            sigma,
            s: self.spreading.as_ref().map(|s| SpreadingDoc {
                n: s.n(),
                columns: s
                    .matrix()
                    .column_iter()
                    .map(|c| c.iter().copied().collect())
                    .collect(),
            }),
        }
    }
}

/// JSON form of a channel. Matrices are row-major; spreading columns are
/// listed one sequence per entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelDoc {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "A")]
    pub a: Vec<f64>,
    #[serde(rename = "R")]
    pub r: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(rename = "S", default, skip_serializing_if = "Option::is_none")]
    pub s: Option<SpreadingDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpreadingDoc {
    #[serde(rename = "N")]
    pub n: usize,
    pub columns: Vec<Vec<f64>>,
}

impl ChannelDoc {
    pub fn into_channel(self) -> Result<Channel> {
        if self.a.len() != self.k {
            return Err(Error::Dimension {
                what: "A",
                expected: self.k,
                got: self.a.len(),
            });
        }
        if self.r.len() != self.k || self.r.iter().any(|row| row.len() != self.k) {
            return Err(Error::Dimension {
                what: "R",
                expected: self.k,
                got: self.r.len(),
            });
        }
        let r = DMatrix::from_fn(self.k, self.k, |i, j| self.r[i][j]);
        match self.s {
            Some(sd) => {
                if sd.columns.len() != self.k || sd.columns.iter().any(|c| c.len() != sd.n) {
                    return Err(Error::InvalidChannel("S must have K columns of length N".into()));
                }
                let s = SpreadingMatrix::from_columns(&sd.columns)?;
                let ch = Channel::from_spreading(s, &self.a)?;
                let gap = (ch.r() - &r).amax();
                if gap > 1e-10 {
                    return Err(Error::InvalidChannel(format!(
                        "R differs from SᵀS by {gap:e}"
                    )));
                }
                Ok(ch)
            }
            None => Channel::from_correlation(r, &self.a),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Symmetric PSD square root `V diag(√λ⁺) Vᵀ`.
fn psd_sqrt(r: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(r.clone());
    let min = eig.eigenvalues.min();
    if min < -PSD_TOL {
        return Err(Error::InvalidChannel(format!(
            "R is not positive semidefinite (min eigenvalue {min:e})"
        )));
    }
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let v = &eig.eigenvectors;
    Ok(v * DMatrix::from_diagonal(&roots) * v.transpose())
}

/// The two-user example channel with `ρ = 0.4`, `A = (1, 0.6)`.
pub fn two_user_example() -> Channel {
    Channel::equicorrelated(2, 0.4, &[1.0, 0.6]).expect("valid channel")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bits(v: &[i8]) -> BitVector {
        BitVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn random_spreading_single_user() {
        let s = make_random_spreading(1, 4, 99);
        assert_eq!((s.n(), s.k()), (4, 1));
        for v in s.matrix().iter() {
            assert!(*v == 0.5 || *v == -0.5);
        }
        assert_abs_diff_eq!(s.matrix().column(0).norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn random_spreading_correlation() {
        let s = make_random_spreading(2, 64, 7);
        let r = s.correlation();
        assert!(r[(0, 1)].abs() <= 1.0);

        let s = make_random_spreading(8, 32, 1);
        let stst = s.matrix().transpose() * s.matrix();
        for k in 0..8 {
            assert_abs_diff_eq!(stst[(k, k)], 1.0, epsilon = 1e-12);
        }
        assert_eq!(s, make_random_spreading(8, 32, 1));
    }

    #[test]
    fn equicorrelated_two_user_h() {
        let ch = two_user_example();
        let h = ch.h();
        assert_abs_diff_eq!(h[(0, 0)], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(h[(0, 1)], 0.24, epsilon = 1e-15);
        assert_abs_diff_eq!(h[(1, 0)], 0.24, epsilon = 1e-15);
        assert_abs_diff_eq!(h[(1, 1)], 0.36, epsilon = 1e-15);
    }

    #[test]
    fn equicorrelated_identity_and_large() {
        let ch = Channel::equicorrelated(3, 0.0, &[1.0; 3]).unwrap();
        assert_eq!(ch.r(), &DMatrix::identity(3, 3));
        assert_eq!(ch.h(), &DMatrix::identity(3, 3));

        let ch = Channel::equicorrelated(40, 0.5, &[1.0; 40]).unwrap();
        let eig = SymmetricEigen::new(ch.r().clone());
        assert_abs_diff_eq!(eig.eigenvalues.min(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn equicorrelated_rejects_non_pd() {
        let err = Channel::equicorrelated(3, -0.5, &[1.0; 3]).unwrap_err();
        assert!(err.to_string().contains("(-0.5, 1)"), "{err}");
        assert!(Channel::equicorrelated(3, 1.0, &[1.0; 3]).is_err());
        assert!(Channel::equicorrelated(2, 0.1, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn from_spreading_orthonormal_and_angle() {
        let s = SpreadingMatrix::from_columns(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let ch = Channel::from_spreading(s, &[1.0, 2.0]).unwrap();
        assert_eq!(ch.r(), &DMatrix::identity(2, 2));

        let theta: f64 = 0.7;
        let s = SpreadingMatrix::from_columns(&[vec![1.0, 0.0], vec![theta.cos(), theta.sin()]]).unwrap();
        let ch = Channel::from_spreading(s, &[1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(ch.r()[(0, 1)], theta.cos(), epsilon = 1e-15);
    }

    #[test]
    fn from_random_spreading_invariants() {
        let s = make_random_spreading(8, 32, 3);
        let amps: Vec<f64> = (0..8).map(|k| 0.5 + 0.1 * k as f64).collect();
        let ch = Channel::from_spreading(s.clone(), &amps).unwrap();
        let stst = s.matrix().transpose() * s.matrix();
        assert!((ch.r() - stst).amax() <= 1e-10);
        for k in 0..8 {
            assert_abs_diff_eq!(ch.h()[(k, k)], amps[k] * amps[k], epsilon = 1e-14);
            for j in 0..8 {
                assert_eq!(ch.h()[(k, j)], ch.h()[(j, k)]);
            }
        }
        let g = ch.noise_factor();
        assert!((g * g.transpose() - ch.r()).amax() < 1e-10);
    }

    #[test]
    fn transmit_noiseless() {
        let ch = two_user_example();
        let obs = ch.transmit(&bits(&[1, 1]), 0.0, 5);
        assert_abs_diff_eq!(obs.y[0], 1.24, epsilon = 1e-15);
        assert_abs_diff_eq!(obs.y[1], 1.0, epsilon = 1e-15);
        assert_eq!(obs.y, ch.noiseless(&bits(&[1, 1])));
    }

    #[test]
    fn likelihood_examples() {
        let ch = Channel::orthogonal(&[1.0; 5]).unwrap();
        let b = bits(&[1, -1, 1, 1, -1]);
        let y: Vec<f64> = b.as_slice().iter().map(|&v| f64::from(v)).collect();
        assert_abs_diff_eq!(ch.likelihood(&y, &b), 2.5, epsilon = 1e-15);

        let ch = two_user_example();
        assert_abs_diff_eq!(ch.likelihood(&[2.0, 1.0], &bits(&[1, 1])), 1.68, epsilon = 1e-14);
        assert_abs_diff_eq!(ch.likelihood(&[2.0, 1.0], &bits(&[1, -1])), 0.96, epsilon = 1e-14);
        assert_abs_diff_eq!(ch.likelihood(&[2.0, 1.0], &bits(&[-1, 1])), -1.84, epsilon = 1e-14);
        assert_abs_diff_eq!(ch.likelihood(&[2.0, 1.0], &bits(&[-1, -1])), -3.52, epsilon = 1e-14);
    }

    #[test]
    fn gradient_examples() {
        let ch = Channel::orthogonal(&[0.5, 2.0]).unwrap();
        let b = bits(&[1, -1]);
        let y = ch.noiseless(&b);
        for g in ch.gradient(&y, &b) {
            assert_abs_diff_eq!(g, 0.0, epsilon = 1e-15);
        }

        let ch = two_user_example();
        let g = ch.gradient(&[2.0, 1.0], &bits(&[-1, -1]));
        assert_abs_diff_eq!(g[0], 3.24, epsilon = 1e-14);
        assert_abs_diff_eq!(g[1], 1.20, epsilon = 1e-14);
    }

    /// Central differences of the quadratic extension of f over real b.
    #[test]
    fn gradient_matches_central_difference() {
        let ch = Channel::from_spreading(make_random_spreading(5, 16, 11), &[1.0, 0.7, 1.3, 0.9, 1.1]).unwrap();
        let b = bits(&[1, -1, -1, 1, 1]);
        let obs = ch.transmit(&b, 0.4, 1);
        let f_real = |x: &[f64]| {
            let k = x.len();
            let mut q = 0.0;
            let mut l = 0.0;
            for i in 0..k {
                for j in 0..k {
                    q += x[i] * ch.h()[(i, j)] * x[j];
                }
                l += x[i] * ch.amplitude(i) * obs.y[i];
            }
            -0.5 * q + l
        };
        let g = ch.gradient(&obs.y, &b);
        let x0: Vec<f64> = b.as_slice().iter().map(|&v| f64::from(v)).collect();
        let step = 1e-5;
        for k in 0..5 {
            let mut xp = x0.clone();
            let mut xm = x0.clone();
            xp[k] += step;
            xm[k] -= step;
            let fd = (f_real(&xp) - f_real(&xm)) / (2.0 * step);
            assert_abs_diff_eq!(fd, g[k], epsilon = 1e-8);
        }
    }

    #[test]
    fn json_round_trip_with_spreading() {
        let ch = Channel::from_spreading(make_random_spreading(3, 8, 2), &[1.0, 0.5, 2.0]).unwrap();
        let text = serde_json::to_string(&ch.to_doc(Some(0.3))).unwrap();
        assert!(text.contains("\"K\":3") && text.contains("\"N\":8"));
        let doc = ChannelDoc::from_json(&text).unwrap();
        assert_eq!(doc.sigma, Some(0.3));
        let back = doc.into_channel().unwrap();
        assert_eq!(back.fingerprint(), ch.fingerprint());
    }

    #[test]
    fn json_rejects_bad_r() {
        let text = r#"{"K":2,"A":[1,1],"R":[[1,0.5],[0.4,1]]}"#;
        assert!(ChannelDoc::from_json(text).unwrap().into_channel().is_err());
        let text = r#"{"K":2,"A":[1,1],"R":[[1,1.5],[1.5,1]]}"#;
        assert!(ChannelDoc::from_json(text).unwrap().into_channel().is_err());
    }

    #[test]
    fn bit_vector_rejects_zero() {
        assert!(BitVector::new(vec![1, 0]).is_err());
        assert!(serde_json::from_str::<BitVector>("[1,-1,2]").is_err());
        assert_eq!(BitVector::from_index(3, 0b011).as_slice(), &[-1, 1, 1]);
        assert_eq!(BitVector::from_signs(&[0.0, -0.1, 3.0]).as_slice(), &[1, -1, 1]);
    }
}
