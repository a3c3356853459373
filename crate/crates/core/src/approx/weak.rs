use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::als::{best_of_restarts, random_matrix, AlsOptions};
use super::model::{dot, norm, BoundaryFamily, BoundaryModel, FitTrace, TraceRecord};
use super::{restart_rng, solve_gram, DEFAULT_RESTARTS};
use crate::error::{dim_err, Result};
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq)]
pub struct WeakOptions {
    pub seed: u64,
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for WeakOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            restarts: DEFAULT_RESTARTS,
            max_iter: 10_000,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct WeakResult {
    pub model: BoundaryModel,
    /// Trace of the winning run.
    pub trace: FitTrace,
    /// `‖A − model‖_F`, an upper bound on the distance from `A` to the border-rank-2 set.
    pub residual: f64,
    pub two_term_residual: f64,
    pub three_term_residual: f64,
}

fn kron(a: &[f64], b: &[f64]) -> DVector<f64> {
    DVector::from_iterator(a.len() * b.len(), a.iter().flat_map(|x| b.iter().map(move |y| x * y)))
}

/// Alternating least squares over the blocks `(xₘ, yₘ)` of the three-term family,
/// which is linear in each block.
fn three_term_fit(a: &Tensor, flats: &[DMatrix<f64>], rng: &mut ChaCha8Rng, opts: &WeakOptions) -> (BoundaryModel, FitTrace) {
    let start = Instant::now();
    let shape = a.shape();
    let a_norm = a.norm();
    let draw = |rng: &mut ChaCha8Rng, d: usize| random_matrix(rng, d, 1).iter().cloned().collect::<Vec<f64>>();
    let x: [Vec<f64>; 3] = std::array::from_fn(|m| draw(rng, shape[m]));
    let y: [Vec<f64>; 3] = std::array::from_fn(|m| draw(rng, shape[m]));
    let mut model = BoundaryModel {
        family: BoundaryFamily::ThreeTerm,
        x,
        y,
    };
    let record = |iter: usize, model: &BoundaryModel| TraceRecord {
        iter,
        residual: a.sub(&model.evaluate()).expect("same shape").norm(),
        lambdas: model.term_norms(),
        cosines: model.mode_cosines(),
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    let mut trace = FitTrace::default();
    trace.push(record(0, &model));

    for iter in 1..=opts.max_iter {
        for (m, flat) in flats.iter().enumerate() {
            let (p, q) = match m {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let (x, y) = (&model.x, &model.y);
            let av = kron(&x[p], &x[q]);
            let bv = kron(&y[p], &x[q]) + kron(&x[p], &y[q]);
            let d = DMatrix::from_columns(&[bv, av]);
            let k = flat * &d;
            let v = d.transpose() * &d;
            let sol = solve_gram(&k, &v);
            let mut xm: Vec<f64> = sol.column(0).iter().cloned().collect();
            let mut ym: Vec<f64> = sol.column(1).iter().cloned().collect();
            if m < 2 {
                // Gauge fixing; the next block solve absorbs both changes.
                let nx = norm(&xm);
                if nx > 0.0 {
                    let t = dot(&ym, &xm) / (nx * nx);
                    ym.iter_mut().zip(&xm).for_each(|(yi, xi)| *yi -= t * xi);
                    xm.iter_mut().for_each(|v| *v /= nx);
                    ym.iter_mut().for_each(|v| *v /= nx);
                }
            }
            model.x[m] = xm;
            model.y[m] = ym;
        }
        let rec = record(iter, &model);
        let change = (trace.final_residual().expect("nonempty") - rec.residual).abs();
        trace.push(rec);
        if change < opts.tol * a_norm || a_norm == 0.0 {
            break;
        }
    }
    (model, trace)
}

fn from_cp(m: &super::CpModel) -> BoundaryModel {
    let term = |j: usize| -> [Vec<f64>; 3] {
        std::array::from_fn(|mode| {
            let s = if mode == 0 { m.lambdas[j] } else { 1.0 };
            m.vectors[j][mode].iter().map(|v| v * s).collect()
        })
    };
    BoundaryModel {
        family: BoundaryFamily::TwoTerm,
        x: term(0),
        y: term(1),
    }
}

/// Best approximation of border rank ≤ 2: fits both parameterizations of the
/// border-rank-2 set by multi-restart alternating least squares and keeps the
/// better one (the three-term family on ties).
pub fn weak_rank2(a: &Tensor, opts: &WeakOptions) -> Result<WeakResult> {
    if a.order() != 3 || a.shape().iter().any(|&d| d < 2) {
        return dim_err(format!("weak rank-2 fitting needs an order-3 tensor with every dimension >= 2, got {:?}", a.shape()));
    }
    let als = AlsOptions {
        rank: 2,
        seed: opts.seed,
        max_iter: opts.max_iter,
        tol: opts.tol,
    };
    let (cp, cp_trace) = best_of_restarts(a, &als, opts.restarts)?;
    let two = from_cp(&cp);
    let two_res = cp_trace.final_residual().expect("nonempty");

    let flats: Vec<DMatrix<f64>> = (0..3)
        .map(|m| {
            let f = a.flatten(m).expect("order 3");
            DMatrix::from_row_slice(f.rows(), f.cols(), f.data())
        })
        .collect();
    // Streams past those used by the two-term restarts.
    let offset = opts.restarts.max(1);
    let runs: Vec<(BoundaryModel, FitTrace)> = (0..opts.restarts.max(1))
        .into_par_iter()
        .map(|i| three_term_fit(a, &flats, &mut restart_rng(opts.seed, offset + i), opts))
        .collect();
    let (three, three_trace) = runs
        .into_iter()
        .reduce(|best, cur| {
            if cur.1.final_residual() < best.1.final_residual() {
                cur
            } else {
                best
            }
        })
        .expect("at least one restart");
    let three_res = three_trace.final_residual().expect("nonempty");

    let (model, trace, residual) = if three_res <= two_res {
        (three, three_trace, three_res)
    } else {
        (two, cp_trace, two_res)
    };
    Ok(WeakResult {
        model,
        trace,
        residual,
        two_term_residual: two_res,
        three_term_residual: three_res,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{dsl_tensor, unit_pairs};
    use crate::rank222::{classify222, OrbitClass, EPS_DELTA};

    #[test]
    fn g2_is_fit_by_two_terms() {
        let a = OrbitClass::G2.canonical::<f64>();
        let r = weak_rank2(&a, &WeakOptions::default()).unwrap();
        assert!(r.two_term_residual <= 1e-6 * a.norm());
        assert!(r.residual <= 1e-6 * a.norm());
    }

    #[test]
    fn dsl_is_fit_by_three_terms() {
        let (x, y) = unit_pairs::<f64>(2);
        let a = dsl_tensor(&x, &y).unwrap();
        let r = weak_rank2(&a, &WeakOptions::default()).unwrap();
        assert_eq!(r.model.family, BoundaryFamily::ThreeTerm);
        assert!(r.residual <= 1e-6 * a.norm());
    }

    #[test]
    fn g3_lands_on_the_boundary() {
        let a = OrbitClass::G3.canonical::<f64>();
        let r = weak_rank2(&a, &WeakOptions::default()).unwrap();
        assert!(r.residual > 0.1);
        let b = r.model.evaluate();
        assert!((b.sub(&a).unwrap().norm() - r.residual).abs() < 1e-12);
        assert_eq!(classify222(&b, EPS_DELTA).unwrap().class, OrbitClass::D3);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(weak_rank2(&Tensor::zeros(&[2, 2]).unwrap(), &WeakOptions::default()).is_err());
        assert!(weak_rank2(&Tensor::zeros(&[2, 1, 2]).unwrap(), &WeakOptions::default()).is_err());
    }
}
