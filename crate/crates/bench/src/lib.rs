//! Fixed inputs shared by the kernel benchmarks.

use tensorrank::{ExactTensor, OrbitClass, Tensor};
use tensorrank::constructions::random_orbit_sample;

/// One exact orbit sample per class, in `OrbitClass::ALL` order.
pub fn exact_orbit_samples(seed: u64) -> Vec<ExactTensor> {
    OrbitClass::ALL
        .iter()
        .map(|&c| random_orbit_sample(c, seed).0)
        .collect()
}

pub fn float_orbit_samples(seed: u64) -> Vec<Tensor> {
    exact_orbit_samples(seed).iter().map(|t| t.to_f64()).collect()
}

pub fn canonical_g3() -> Tensor {
    OrbitClass::G3.canonical()
}
