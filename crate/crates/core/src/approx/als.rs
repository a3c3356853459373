use std::time::Instant;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::model::{CpModel, FitTrace, TraceRecord};
use super::{restart_rng, solve_gram};
use crate::error::{arg_err, dim_err, Result};
use crate::tensor::{next_index, Tensor};

#[derive(Debug, Clone, PartialEq)]
pub struct AlsOptions {
    pub rank: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Stop once a sweep changes the residual by less than `tol·‖A‖`. Zero runs all `max_iter` sweeps.
    pub tol: f64,
}

impl Default for AlsOptions {
    fn default() -> Self {
        Self {
            rank: 1,
            seed: 0,
            max_iter: 10_000,
            tol: 1e-10,
        }
    }
}

pub(crate) fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Mode-`m` MTTKRP: `K[i, j] = Σ a_{…i…} ∏_{n≠m} U_n[i_n, j]`.
fn mttkrp(a: &Tensor, factors: &[DMatrix<f64>], m: usize) -> DMatrix<f64> {
    let r = factors[0].ncols();
    let mut k = DMatrix::zeros(a.shape()[m], r);
    let mut idx = vec![0; a.order()];
    for &v in a.data() {
        if v != 0.0 {
            for j in 0..r {
                let mut p = v;
                for (n, f) in factors.iter().enumerate() {
                    if n != m {
                        p *= f[(idx[n], j)];
                    }
                }
                k[(idx[m], j)] += p;
            }
        }
        next_index(&mut idx, a.shape());
    }
    k
}

/// Hadamard product of the Gram matrices of every factor but `m`.
fn gram_except(factors: &[DMatrix<f64>], m: usize) -> DMatrix<f64> {
    let r = factors[0].ncols();
    let mut v = DMatrix::from_element(r, r, 1.0);
    for (n, f) in factors.iter().enumerate() {
        if n != m {
            v.component_mul_assign(&(f.transpose() * f));
        }
    }
    v
}

/// Moves column norms of `f` into `lambdas`, leaving unit columns.
fn normalize_columns(f: &mut DMatrix<f64>, lambdas: &mut [f64]) {
    for j in 0..f.ncols() {
        let n = f.column(j).norm();
        lambdas[j] = n;
        if n > 0.0 {
            f.column_mut(j).unscale_mut(n);
        } else {
            f.column_mut(j).fill(0.0);
            f[(0, j)] = 1.0;
        }
    }
}

fn to_model(shape: &[usize], factors: &[DMatrix<f64>], lambdas: &[f64]) -> CpModel {
    let vectors = (0..lambdas.len())
        .map(|j| factors.iter().map(|f| f.column(j).iter().cloned().collect()).collect())
        .collect();
    CpModel {
        shape: shape.to_vec(),
        lambdas: lambdas.to_vec(),
        vectors,
    }
}

/// CP alternating least squares: cyclic exact least-squares updates of each
/// mode's factor matrix. Deterministic in `opts.seed`.
pub fn als_cp(a: &Tensor, opts: &AlsOptions) -> Result<(CpModel, FitTrace)> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    als_with_rng(a, opts, &mut rng)
}

fn als_with_rng(a: &Tensor, opts: &AlsOptions, rng: &mut ChaCha8Rng) -> Result<(CpModel, FitTrace)> {
    if opts.rank == 0 {
        return arg_err("rank must be at least 1");
    }
    if a.order() < 2 {
        return dim_err("ALS needs a tensor of order at least 2");
    }
    let start = Instant::now();
    let r = opts.rank;
    let shape = a.shape().to_vec();
    let a_norm = a.norm();
    let mut factors: Vec<DMatrix<f64>> = shape.iter().map(|&d| random_matrix(rng, d, r)).collect();
    let mut lambdas = vec![1.0; r];
    for f in factors.iter_mut() {
        normalize_columns(f, &mut lambdas);
    }
    // initial scale: best multiple of the random model
    let mut model = to_model(&shape, &factors, &vec![1.0; r]);
    let m0 = model.evaluate();
    let s = m0.frobenius(a)? / m0.norm_sq().max(f64::MIN_POSITIVE);
    lambdas = vec![s; r];
    model.lambdas.clone_from(&lambdas);
    // keep λ ≥ 0 by flipping the first mode
    if s < 0.0 {
        for l in lambdas.iter_mut() {
            *l = -*l;
        }
        factors[0].neg_mut();
        model = to_model(&shape, &factors, &lambdas);
    }

    let mut trace = FitTrace::default();
    let record = |iter: usize, model: &CpModel| TraceRecord {
        iter,
        residual: a.sub(&model.evaluate()).expect("same shape").norm(),
        lambdas: model.lambdas.clone(),
        cosines: model.mode_cosines(),
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    trace.push(record(0, &model));

    for iter in 1..=opts.max_iter {
        for m in 0..shape.len() {
            // others have unit columns, so λ is absorbed by the update
            let k = mttkrp(a, &factors, m);
            let v = gram_except(&factors, m);
            factors[m] = solve_gram(&k, &v);
            normalize_columns(&mut factors[m], &mut lambdas);
        }
        model = to_model(&shape, &factors, &lambdas);
        let rec = record(iter, &model);
        let prev = trace.final_residual().expect("nonempty");
        let change = (prev - rec.residual).abs();
        trace.push(rec);
        if change < opts.tol * a_norm || a_norm == 0.0 {
            break;
        }
    }
    Ok((model, trace))
}

/// Best rank-1 approximation by multi-restart ALS. Restarts run in parallel;
/// the winner is the smallest final residual, ties going to the lower restart index.
pub fn best_rank1(a: &Tensor, seed: u64, restarts: usize, max_iter: usize, tol: f64) -> Result<(CpModel, FitTrace)> {
    let opts = AlsOptions {
        rank: 1,
        seed,
        max_iter,
        tol,
    };
    best_of_restarts(a, &opts, restarts)
}

/// Runs `restarts` independent ALS fits (stream `i` of the seeded generator) and keeps the best.
pub fn best_of_restarts(a: &Tensor, opts: &AlsOptions, restarts: usize) -> Result<(CpModel, FitTrace)> {
    let runs: Vec<(usize, Result<(CpModel, FitTrace)>)> = (0..restarts.max(1))
        .into_par_iter()
        .map(|i| (i, als_with_rng(a, opts, &mut restart_rng(opts.seed, i))))
        .collect();
    let mut best: Option<(usize, CpModel, FitTrace)> = None;
    for (i, run) in runs {
        let (model, trace) = run?;
        let res = trace.final_residual().expect("nonempty");
        let better = match &best {
            None => true,
            Some((_, _, t)) => res < t.final_residual().expect("nonempty"),
        };
        if better {
            best = Some((i, model, trace));
        }
    }
    let (_, model, trace) = best.expect("at least one restart");
    Ok((model, trace))
}
