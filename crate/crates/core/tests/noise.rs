use las_mud::channel::{make_random_spreading, BitVector, Channel};
use las_mud::rng::{self, domain};
use nalgebra::DMatrix;

const DRAWS: usize = 100_000;

fn empirical_cov(samples: &[Vec<f64>]) -> DMatrix<f64> {
    let k = samples[0].len();
    let n = samples.len() as f64;
    let mut mean = vec![0.0; k];
    for s in samples {
        for (m, v) in mean.iter_mut().zip(s) {
            *m += v / n;
        }
    }
    DMatrix::from_fn(k, k, |i, j| {
        samples.iter().map(|s| (s[i] - mean[i]) * (s[j] - mean[j])).sum::<f64>() / (n - 1.0)
    })
}

fn assert_within(cov: &DMatrix<f64>, target: &DMatrix<f64>, rel: f64) {
    for i in 0..cov.nrows() {
        for j in 0..cov.ncols() {
            let (c, t) = (cov[(i, j)], target[(i, j)]);
            assert!((c - t).abs() <= rel * t.abs(), "entry ({i},{j}): {c} vs {t}");
        }
    }
}

#[test]
fn synthesised_noise_has_covariance_sigma2_r() {
    let sigma = 0.7;
    let ch = Channel::equicorrelated(4, 0.4, &[1.0, 0.6, 1.3, 0.9]).unwrap();
    let b = BitVector::new(vec![1, -1, 1, 1]).unwrap();
    let clean = ch.noiseless(&b);
    let mut r = rng::stream(11, domain::TRANSMIT, 0);
    let noise: Vec<Vec<f64>> = (0..DRAWS)
        .map(|_| {
            let y = ch.transmit_with(&b, sigma, &mut r).y;
            y.iter().zip(&clean).map(|(a, c)| a - c).collect()
        })
        .collect();
    assert_within(&empirical_cov(&noise), &(ch.r() * (sigma * sigma)), 0.05);
}

#[test]
fn chip_path_agrees_with_direct_path() {
    let sigma = 0.5;
    let s = make_random_spreading(3, 4, 21);
    let ch = Channel::from_spreading(s, &[1.0, 0.8, 1.1]).unwrap();
    // Only entries clearly away from zero are compared relatively.
    let target = ch.r() * (sigma * sigma);
    let b = BitVector::new(vec![-1, 1, 1]).unwrap();
    let clean = ch.noiseless(&b);

    let mut r1 = rng::stream(5, domain::TRANSMIT, 1);
    let mut r2 = rng::stream(5, domain::TRANSMIT, 2);
    let mut direct = Vec::with_capacity(DRAWS);
    let mut chips = Vec::with_capacity(DRAWS);
    for _ in 0..DRAWS {
        let y = ch.transmit_with(&b, sigma, &mut r1).y;
        direct.push(y.iter().zip(&clean).map(|(a, c)| a - c).collect::<Vec<_>>());
        let y = ch.transmit_chips_with(&b, sigma, &mut r2).unwrap().y;
        chips.push(y.iter().zip(&clean).map(|(a, c)| a - c).collect::<Vec<_>>());
    }
    let (cd, cc) = (empirical_cov(&direct), empirical_cov(&chips));
    for i in 0..3 {
        for j in 0..3 {
            let t = target[(i, j)];
            // Standard error of a covariance entry is below σ²·√(2/n).
            let tol = (0.05 * t.abs()).max(6.0 * sigma * sigma * (2.0 / DRAWS as f64).sqrt());
            assert!((cd[(i, j)] - t).abs() <= tol, "direct ({i},{j})");
            assert!((cc[(i, j)] - t).abs() <= tol, "chips ({i},{j})");
        }
    }
    for k in 0..3 {
        let mean_d: f64 = direct.iter().map(|v| v[k]).sum::<f64>() / DRAWS as f64;
        let mean_c: f64 = chips.iter().map(|v| v[k]).sum::<f64>() / DRAWS as f64;
        assert!(mean_d.abs() < 0.01 && mean_c.abs() < 0.01);
    }
}

#[test]
fn chip_path_requires_spreading() {
    let ch = Channel::equicorrelated(2, 0.4, &[1.0, 0.6]).unwrap();
    let b = BitVector::all_plus(2);
    assert!(ch.transmit_chips_with(&b, 1.0, &mut rng::stream(1, 1, 1)).is_none());
}
