//! Low-rank approximation: CP alternating least squares with degeneracy
//! instrumentation, border-rank-2 weak solutions, and Brègman divergences.

mod als;
mod bregman;
mod degeneracy;
mod model;
mod weak;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use als::{als_cp, best_of_restarts, best_rank1, AlsOptions};
pub use bregman::{bregman, DivergenceGenerator, SquaredFrobenius};
pub use degeneracy::{degeneracy_report, DegeneracyReport, COLLINEAR_COS};
pub use model::{BoundaryFamily, BoundaryModel, CpModel, FitTrace, TraceRecord};
pub use weak::{weak_rank2, WeakOptions, WeakResult};

/// Default restart count for multi-start optimizers.
pub const DEFAULT_RESTARTS: usize = 8;

/// Generator for restart `i`: stream `i` of the ChaCha8 generator seeded with `seed`.
pub(crate) fn restart_rng(seed: u64, i: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    rng
}

/// Solves `X V = K` for symmetric positive semidefinite `V`. When the Cholesky
/// factorization fails, a ridge `1e-12·tr(V)/r` is added (and grown tenfold until it succeeds).
pub(crate) fn solve_gram(k: &DMatrix<f64>, v: &DMatrix<f64>) -> DMatrix<f64> {
    let r = v.nrows();
    let mut ridge = 1e-12 * v.trace().abs().max(f64::MIN_POSITIVE) / r as f64;
    let mut vv = v.clone();
    loop {
        if let Some(ch) = vv.clone().cholesky() {
            let x = ch.solve(&k.transpose()).transpose();
            if x.iter().all(|e| e.is_finite()) {
                return x;
            }
        }
        vv = v + DMatrix::identity(r, r) * ridge;
        ridge *= 10.0;
    }
}
