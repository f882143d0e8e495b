use std::f64::consts::PI;

use dense_mimo::array::{ArrayGeometry, CouplingMatrix, Direction};
use dense_mimo::channel::{
    complex_normal, multipath_channel, rayleigh_channels, MultipathSpec, PathComponent, StreamId,
};
use dense_mimo::{CMatrix, CVector, C64};
use rand::Rng;

/// Sample covariance of `draws` vectors with per-entry standard errors of
/// the real and imaginary parts.
struct SampleCovariance {
    mean: CMatrix,
    se_re: Vec<f64>,
    se_im: Vec<f64>,
}

fn sample_covariance(n: usize, draws: usize, mut next: impl FnMut() -> CVector) -> SampleCovariance {
    let mut sum = CMatrix::zeros(n, n);
    let mut sq_re = vec![0.0; n * n];
    let mut sq_im = vec![0.0; n * n];
    for _ in 0..draws {
        let h = next();
        for i in 0..n {
            for j in 0..n {
                let p = h[i] * h[j].conj();
                sum[(i, j)] += p;
                sq_re[i * n + j] += p.re * p.re;
                sq_im[i * n + j] += p.im * p.im;
            }
        }
    }
    let k = draws as f64;
    let mean = sum / C64::new(k, 0.0);
    let se = |sq: &[f64], part: fn(C64) -> f64| -> Vec<f64> {
        (0..n * n)
            .map(|idx| {
                let m = part(mean[(idx / n, idx % n)]);
                ((sq[idx] / k - m * m).max(0.0) / (k - 1.0)).sqrt()
            })
            .collect()
    };
    let se_re = se(&sq_re, |z| z.re);
    let se_im = se(&sq_im, |z| z.im);
    SampleCovariance { mean, se_re, se_im }
}

fn max_z(s: &SampleCovariance, reference: &CMatrix) -> f64 {
    let n = reference.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let d = s.mean[(i, j)] - reference[(i, j)];
            for (delta, se) in [(d.re, s.se_re[i * n + j]), (d.im, s.se_im[i * n + j])] {
                if se > 0.0 {
                    worst = worst.max(delta.abs() / se);
                } else {
                    assert!(delta.abs() < 1e-12);
                }
            }
        }
    }
    worst
}

#[test]
fn rayleigh_covariance_is_the_coupling_matrix() {
    let geom = ArrayGeometry::new(0.25, 3).unwrap();
    let b = CouplingMatrix::closed_form(&geom).unwrap();
    let mut r = 0;
    let s = sample_covariance(9, 20_000, || {
        r += 1;
        rayleigh_channels(&b, 1, StreamId::new(5, r))
            .unwrap()
            .h
            .column(0)
            .into_owned()
    });
    let z = max_z(&s, b.entries());
    assert!(z < 5.0, "max |z| = {z}");
}

#[test]
fn sample_covariance_error_decays_like_inverse_sqrt() {
    let geom = ArrayGeometry::new(0.3, 3).unwrap();
    let b = CouplingMatrix::closed_form(&geom).unwrap();
    let mut stream = 0;
    let mut error = |draws: usize| {
        (0..8)
            .map(|_| {
                let s = sample_covariance(9, draws, || {
                    stream += 1;
                    rayleigh_channels(&b, 1, StreamId::new(6, stream))
                        .unwrap()
                        .h
                        .column(0)
                        .into_owned()
                });
                (s.mean - b.entries()).norm()
            })
            .sum::<f64>()
            / 8.0
    };
    let (coarse, fine) = (error(500), error(8000));
    let ratio = coarse / fine;
    // 16× the draws should shrink the error about 4×
    assert!((2.5..6.5).contains(&ratio), "error ratio {ratio}");
}

#[test]
fn isotropic_multipath_matches_the_coupling_matrix() {
    // directions uniform on the hemisphere (cos θ ~ U[0, 1], φ ~ U[−π, π))
    // with gains CN(0, 2π/Q) give covariance exactly B
    let geom = ArrayGeometry::new(0.3, 2).unwrap();
    let b = CouplingMatrix::closed_form(&geom).unwrap();
    let q = 40;
    let mut rng = StreamId::new(9, 0).rng();
    let s = sample_covariance(4, 20_000, || {
        let paths = (0..q)
            .map(|_| {
                let theta = rng.random::<f64>().acos();
                let phi = rng.random_range(-PI..PI);
                PathComponent {
                    gain: complex_normal(&mut rng) * (2.0 * PI / q as f64).sqrt(),
                    direction: Direction::new(theta, phi).unwrap(),
                }
            })
            .collect();
        multipath_channel(&geom, &MultipathSpec::new(paths).unwrap())
    });
    let z = max_z(&s, b.entries());
    assert!(z < 5.0, "max |z| = {z}");
}

#[test]
fn downlink_channel_is_the_transpose() {
    let geom = ArrayGeometry::new(0.25, 4).unwrap();
    let b = CouplingMatrix::closed_form(&geom).unwrap();
    let set = rayleigh_channels(&b, 3, StreamId::new(1, 2)).unwrap();
    let down = set.downlink();
    assert_eq!(down.shape(), (3, 16));
    assert_eq!(down[(1, 5)], set.h[(5, 1)]);
    assert!((b.sqrt() * &set.s - &set.h).norm() < 1e-12);
}
