//! Reference detectors: matched filter, decorrelator, MMSE, brute-force
//! maximum likelihood, and a local-optimality probe.
//!
//! All sign decisions use `sign(0) = +1`.

use nalgebra::{DMatrix, DVector};

use crate::channel::{BitVector, Channel, Observation};
use crate::{Error, Result};

/// Default refusal limit for brute-force search.
pub const GML_MAX_K: usize = 24;

/// Pivots smaller than this (relative to the largest) mark `R` singular.
const SINGULAR_RTOL: f64 = 1e-12;

pub fn mf_detect(obs: &Observation) -> BitVector {
    BitVector::from_signs(&obs.y)
}

fn solve_signs(m: DMatrix<f64>, y: &[f64]) -> Result<BitVector> {
    let lu = m.lu();
    let diag = lu.u().diagonal();
    let max = diag.amax();
    if max == 0.0 || diag.iter().any(|d| d.abs() <= SINGULAR_RTOL * max) {
        return Err(Error::Singular);
    }
    let x = lu.solve(&DVector::from_column_slice(y)).ok_or(Error::Singular)?;
    Ok(BitVector::from_signs(x.as_slice()))
}

/// `sgn(R⁻¹y)`.
pub fn decorrelator_detect(ch: &Channel, obs: &Observation) -> Result<BitVector> {
    solve_signs(ch.r().clone(), &obs.y)
}

/// `sgn((R + σ²A⁻²)⁻¹y)`; `σ = 0` is the decorrelator.
pub fn mmse_detect(ch: &Channel, obs: &Observation) -> Result<BitVector> {
    let mut m = ch.r().clone();
    for k in 0..ch.k() {
        m[(k, k)] += obs.sigma * obs.sigma / (ch.amplitude(k) * ch.amplitude(k));
    }
    solve_signs(m, &obs.y)
}

/// Exhaustive maximiser of `f(y|b)` over `{-1,+1}^K`.
///
/// Visits the hypercube in Gray-code order so that each candidate costs one
/// single-flip update of the likelihood and gradient. Exact ties go to the
/// lexicographically smallest vector (`-1 < +1`).
pub fn gml_bruteforce(ch: &Channel, obs: &Observation, max_k: usize) -> Result<BitVector> {
    let k = ch.k();
    if k > max_k || k >= 63 {
        return Err(Error::TooLarge {
            what: "brute-force maximum likelihood",
            k,
            max: max_k.min(62),
            cost: 2f64.powi(k as i32),
        });
    }
    let h = ch.h();
    let y = &obs.y;

    // Start from all −1 (index 0). User i is bit K−1−i of the index.
    let mut b = BitVector::new(vec![-1; k])?;
    let mut g = ch.gradient(y, &b);
    let mut f = ch.likelihood(y, &b);
    let mut index: u64 = 0;
    let mut best = (f, index);

    for step in 1u64..(1u64 << k) {
        let bit = step.trailing_zeros() as usize;
        let user = k - 1 - bit;
        let bu = f64::from(b[user]);
        f += -2.0 * bu * g[user] - 2.0 * h[(user, user)];
        for (gj, hju) in g.iter_mut().zip(h.column(user).iter()) {
            *gj += 2.0 * bu * hju;
        }
        b.flip(user);
        index ^= 1 << bit;
        if f > best.0 || (f == best.0 && index < best.1) {
            best = (f, index);
        }
    }
    Ok(BitVector::from_index(k, best.1))
}

/// True iff no single-bit flip strictly increases `f`.
pub fn lml_check(ch: &Channel, obs: &Observation, b: &BitVector) -> bool {
    let f0 = ch.likelihood(&obs.y, b);
    (0..ch.k()).all(|k| {
        let mut nb = b.clone();
        nb.flip(k);
        ch.likelihood(&obs.y, &nb) <= f0
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{make_random_spreading, two_user_example};
    use crate::las::wslas_region_check;

    fn bits(v: &[i8]) -> BitVector {
        BitVector::new(v.to_vec()).unwrap()
    }

    fn obs(y: &[f64], sigma: f64) -> Observation {
        Observation::new(y.to_vec(), sigma)
    }

    #[test]
    fn mf_examples() {
        assert_eq!(mf_detect(&obs(&[2.0, 1.0], 0.1)), bits(&[1, 1]));
        assert_eq!(mf_detect(&obs(&[-0.1, 3.0], 0.1)), bits(&[-1, 1]));
        assert_eq!(mf_detect(&obs(&[0.0, -3.0], 0.1)), bits(&[1, -1]));
    }

    #[test]
    fn decorrelator_examples() {
        let ch = Channel::orthogonal(&[1.0, 2.0, 0.5]).unwrap();
        let o = obs(&[0.3, -0.2, 0.0], 0.5);
        assert_eq!(decorrelator_detect(&ch, &o).unwrap(), mf_detect(&o));

        let ch = two_user_example();
        let b = bits(&[1, -1]);
        let o = Observation::new(ch.noiseless(&b), 0.0);
        assert_eq!(decorrelator_detect(&ch, &o).unwrap(), b);
    }

    #[test]
    fn decorrelator_singular() {
        let s = crate::channel::SpreadingMatrix::from_columns(&[vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let ch = Channel::from_spreading(s, &[1.0, 1.0]).unwrap();
        assert!(matches!(decorrelator_detect(&ch, &obs(&[1.0, 1.0], 0.0)), Err(Error::Singular)));
        // MMSE regularisation makes it solvable.
        assert!(mmse_detect(&ch, &obs(&[1.0, 1.0], 0.5)).is_ok());
    }

    #[test]
    fn linear_detectors_match_direct_solve() {
        let amps = [1.0, 0.8, 1.2, 0.6, 1.1, 0.9];
        let ch = Channel::from_spreading(make_random_spreading(6, 31, 4), &amps).unwrap();
        let r_inv = ch.r().clone().try_inverse().unwrap();
        for seed in 0..20 {
            let b = BitVector::random(6, &mut crate::rng::stream(seed, 1, 0));
            let o = ch.transmit(&b, 0.7, seed);
            let y = DVector::from_column_slice(&o.y);
            let dec = BitVector::from_signs((&r_inv * &y).as_slice());
            assert_eq!(decorrelator_detect(&ch, &o).unwrap(), dec);

            let mut m = ch.r().clone();
            for k in 0..6 {
                m[(k, k)] += 0.49 / (amps[k] * amps[k]);
            }
            let mmse = BitVector::from_signs((m.try_inverse().unwrap() * &y).as_slice());
            assert_eq!(mmse_detect(&ch, &o).unwrap(), mmse);
        }
    }

    #[test]
    fn mmse_limits() {
        let ch = Channel::orthogonal(&[1.0, 1.0]).unwrap();
        let o = obs(&[0.4, -2.0], 1e6);
        assert_eq!(mmse_detect(&ch, &o).unwrap(), mf_detect(&o));

        let ch = two_user_example();
        let o = obs(&[0.3, -0.9], 0.0);
        assert_eq!(mmse_detect(&ch, &o).unwrap(), decorrelator_detect(&ch, &o).unwrap());
    }

    /// Direct enumeration in index order.
    fn gml_reference(ch: &Channel, o: &Observation) -> BitVector {
        let k = ch.k();
        let mut best: Option<(f64, BitVector)> = None;
        for idx in 0..(1u64 << k) {
            let b = BitVector::from_index(k, idx);
            let f = ch.likelihood(&o.y, &b);
            if best.as_ref().is_none_or(|(bf, _)| f > *bf) {
                best = Some((f, b));
            }
        }
        best.unwrap().1
    }

    #[test]
    fn gml_examples() {
        let ch = Channel::orthogonal(&[1.0, 0.5, 2.0]).unwrap();
        let o = obs(&[0.2, -0.1, -3.0], 1.0);
        assert_eq!(gml_bruteforce(&ch, &o, GML_MAX_K).unwrap(), mf_detect(&o));

        let ch = two_user_example();
        assert_eq!(gml_bruteforce(&ch, &obs(&[2.0, 1.0], 0.0), GML_MAX_K).unwrap(), bits(&[1, 1]));
    }

    #[test]
    fn gml_matches_reference_and_is_lml() {
        let amps = [1.0, 0.8, 1.2, 0.6, 1.1, 0.9, 0.7];
        let ch = Channel::from_spreading(make_random_spreading(7, 12, 9), &amps).unwrap();
        for seed in 0..200 {
            let b = BitVector::random(7, &mut crate::rng::stream(seed, 2, 0));
            let o = ch.transmit(&b, 0.8, seed);
            let gml = gml_bruteforce(&ch, &o, GML_MAX_K).unwrap();
            assert_eq!(gml, gml_reference(&ch, &o));
            assert!(lml_check(&ch, &o, &gml));
            assert!(wslas_region_check(&ch, &o.y, &gml));
        }
    }

    #[test]
    fn gml_tie_prefers_lexicographically_smallest() {
        // y = 0 on an orthogonal channel: every vector has f = −K/2.
        let ch = Channel::orthogonal(&[1.0, 1.0, 1.0]).unwrap();
        let g = gml_bruteforce(&ch, &obs(&[0.0, 0.0, 0.0], 1.0), GML_MAX_K).unwrap();
        assert_eq!(g, bits(&[-1, -1, -1]));
    }

    #[test]
    fn gml_refuses_large_k() {
        let ch = Channel::orthogonal(&[1.0; 5]).unwrap();
        assert!(matches!(
            gml_bruteforce(&ch, &obs(&[0.0; 5], 1.0), 4),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn lml_examples() {
        let ch = two_user_example();
        let o = obs(&[2.0, 1.0], 0.0);
        assert!(lml_check(&ch, &o, &bits(&[1, 1])));
        assert!(!lml_check(&ch, &o, &bits(&[-1, -1])));
        assert!(!lml_check(&ch, &o, &bits(&[1, -1])));
    }
}
