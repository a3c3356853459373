//! Random fixtures shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use tensorrank::{ExactTensor, Matrix, MultilinearMap, Rational, Scalar, Tensor};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor {
    Tensor::from_fn(shape, |_| StandardNormal.sample(rng)).unwrap()
}

pub fn gaussian_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| StandardNormal.sample(rng)).collect()
}

pub fn int_tensor<T: Scalar>(rng: &mut ChaCha8Rng, shape: &[usize], lo: i64, hi: i64) -> tensorrank::DenseTensor<T> {
    tensorrank::DenseTensor::from_fn(shape, |_| T::from_i64(rng.random_range(lo..=hi))).unwrap()
}

pub fn int_matrix<T: Scalar>(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lo: i64, hi: i64) -> Matrix<T> {
    Matrix::from_fn(rows, cols, |_, _| T::from_i64(rng.random_range(lo..=hi)))
}

pub fn int_map<T: Scalar>(rng: &mut ChaCha8Rng, dims: &[usize], lo: i64, hi: i64) -> MultilinearMap<T> {
    MultilinearMap::new(dims.iter().map(|&d| int_matrix(rng, d, d, lo, hi)).collect()).unwrap()
}

/// Integer tensor drawn so that all multilinear-rank patterns show up: a sum of
/// 0–3 integer rank-1 terms with small entries.
pub fn low_rank_int(rng: &mut ChaCha8Rng) -> ExactTensor {
    let terms = rng.random_range(0..=3);
    let mut acc = ExactTensor::zeros(&[2, 2, 2]).unwrap();
    for _ in 0..terms {
        let v: Vec<Vec<Rational>> = (0..3)
            .map(|_| (0..2).map(|_| Rational::from_i64(rng.random_range(-1..=1))).collect())
            .collect();
        acc = acc.add(&tensorrank::outer_product(&v).unwrap()).unwrap();
    }
    acc
}

/// Random orthogonal `n × n` matrix (QR of a Gaussian matrix).
pub fn orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Matrix<f64> {
    let g = nalgebra::DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(rng));
    Matrix::from_nalgebra(&g.qr().q())
}

/// Gaussian Tucker tensor of multilinear rank `ranks` (with probability 1).
pub fn tucker(rng: &mut ChaCha8Rng, shape: &[usize], ranks: &[usize]) -> Tensor {
    let core = gaussian(rng, ranks);
    let factors = shape
        .iter()
        .zip(ranks)
        .map(|(&d, &r)| Matrix::from_fn(d, r, |_, _| StandardNormal.sample(rng)))
        .collect();
    core.mmm(&MultilinearMap::new(factors).unwrap()).unwrap()
}
