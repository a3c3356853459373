mod common;

use proptest::prelude::*;
use tensorrank::approx::{als_cp, best_of_restarts, best_rank1, weak_rank2, AlsOptions, BoundaryFamily, WeakOptions};
use tensorrank::constructions::{
    dsl_error_constants, dsl_sequence, dsl_tensor, leibniz_tensor, random_orbit_sample, LeibnizSpec,
};
use tensorrank::{
    classify222, delta, delta_extended, outer_product, reduce222, ExactTensor, Matrix, MultilinearMap, OrbitClass,
    Rational, Scalar, Sign, Tensor, TensorError, EPS_DELTA,
};

fn exact_tensor(shape: Vec<usize>) -> impl Strategy<Value = ExactTensor> {
    let n: usize = shape.iter().product();
    prop::collection::vec(-3i64..=3, n).prop_map(move |v| ExactTensor::from_i64(&shape, &v).unwrap())
}

fn shape3() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..=3, 3)
}

fn int_matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix<Rational>> {
    prop::collection::vec(-3i64..=3, rows * cols)
        .prop_map(move |v| Matrix::from_fn(rows, cols, |i, j| Rational::from_i64(v[i * cols + j])))
}

fn int_map(rows: Vec<usize>, cols: Vec<usize>) -> impl Strategy<Value = MultilinearMap<Rational>> {
    let parts: Vec<_> = rows.iter().zip(&cols).map(|(&r, &c)| int_matrix(r, c)).collect();
    parts.prop_map(|f| MultilinearMap::new(f).unwrap())
}

fn invertible_map222() -> impl Strategy<Value = MultilinearMap<Rational>> {
    int_map(vec![2; 3], vec![2; 3]).prop_filter("invertible", |g| g.is_invertible())
}

fn int_vec(d: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(-3i64..=3, d).prop_map(|v| v.into_iter().map(Rational::from_i64).collect())
}

fn float_tensor(shape: Vec<usize>) -> impl Strategy<Value = Tensor> {
    let n: usize = shape.iter().product();
    prop::collection::vec(-1.0f64..1.0, n).prop_map(move |v| Tensor::new(shape.clone(), v).unwrap())
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mmm_composes(
        (a, n, m) in shape3().prop_flat_map(|s| {
            let mid = vec![2, 3, 1];
            let out = vec![3, 1, 2];
            (exact_tensor(s.clone()), int_map(mid.clone(), s), int_map(out, mid))
        })
    ) {
        let two_steps = a.mmm(&n).unwrap().mmm(&m).unwrap();
        let once = a.mmm(&m.compose(&n).unwrap()).unwrap();
        prop_assert_eq!(two_steps, once);
    }

    #[test]
    fn mmm_is_linear(
        (a, b, g) in shape3().prop_flat_map(|s| {
            (exact_tensor(s.clone()), exact_tensor(s.clone()), int_map(vec![2, 2, 2], s))
        }),
        alpha in -5i64..=5,
        beta in -5i64..=5,
    ) {
        let (al, be) = (Rational::from_i64(alpha), Rational::from_i64(beta));
        let lhs = a.scale(&al).add(&b.scale(&be)).unwrap().mmm(&g).unwrap();
        let rhs = a.mmm(&g).unwrap().scale(&al).add(&b.mmm(&g).unwrap().scale(&be)).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn decomposable_law(
        (xs, g) in shape3().prop_flat_map(|s| {
            let vs: Vec<_> = s.iter().map(|&d| int_vec(d)).collect();
            (vs, int_map(vec![3, 2, 2], s))
        })
    ) {
        let lhs = outer_product(&xs).unwrap().mmm(&g).unwrap();
        let mapped: Vec<Vec<Rational>> = xs.iter().zip(g.factors()).map(|(x, l)| l.matvec(x).unwrap()).collect();
        prop_assert_eq!(lhs, outer_product(&mapped).unwrap());
    }

    #[test]
    fn norm_laws(
        u in prop::collection::vec(-2.0f64..2.0, 3),
        v in prop::collection::vec(-2.0f64..2.0, 2),
        w in prop::collection::vec(-2.0f64..2.0, 4),
        a in float_tensor(vec![2, 3]),
        b in float_tensor(vec![2, 2, 2]),
        seed in any::<u64>(),
    ) {
        let n2 = |x: &[f64]| x.iter().map(|t| t * t).sum::<f64>().sqrt();
        let d = outer_product(&[u.clone(), v.clone(), w.clone()]).unwrap();
        prop_assert!(rel_close(d.norm(), n2(&u) * n2(&v) * n2(&w), 1e-12));
        prop_assert!(rel_close(a.otimes(&b).norm(), a.norm() * b.norm(), 1e-12));
        let mut r = common::rng(seed);
        let q = MultilinearMap::new((0..3).map(|_| common::orthogonal(&mut r, 2)).collect()).unwrap();
        prop_assert!(rel_close(b.mmm(&q).unwrap().norm(), b.norm(), 1e-12));
    }

    #[test]
    fn mrank_invariant_under_invertible_maps(
        (a, g) in (exact_tensor(vec![2, 3, 2]), int_map(vec![2, 3, 2], vec![2, 3, 2])
            .prop_filter("invertible", |g| g.is_invertible()))
    ) {
        prop_assert_eq!(a.mmm(&g).unwrap().mrank(0.0), a.mrank(0.0));
    }

    #[test]
    fn delta_transformation_law(a in exact_tensor(vec![2, 2, 2]), g in int_map(vec![2; 3], vec![2; 3])) {
        let dets = g.determinants().unwrap();
        let k = &dets[0] * &dets[1] * &dets[2];
        prop_assert_eq!(delta(&a.mmm(&g).unwrap()).unwrap(), &k * &k * delta(&a).unwrap());
    }

    #[test]
    fn classification_is_orbit_invariant(a in exact_tensor(vec![2, 2, 2]), g in invertible_map222()) {
        let before = classify222(&a, 0.0).unwrap().class;
        let after = classify222(&a.mmm(&g).unwrap(), 0.0).unwrap().class;
        prop_assert_eq!(before, after);
    }

    #[test]
    fn reduction_witness_reconstructs(a in exact_tensor(vec![2, 2, 2])) {
        match reduce222(&a, 0.0) {
            Ok(rep) => {
                let w = rep.witness.expect("reduce222 returns a witness");
                prop_assert!(w.is_invertible());
                prop_assert_eq!(rep.class.canonical::<Rational>().mmm(&w).unwrap(), a.clone());
            }
            Err(TensorError::NoRationalWitness(_)) => {
                // a rational witness forces Δ(A)/Δ(canonical) to be a rational square
                let class = classify222(&a, 0.0).unwrap().class;
                let d0 = delta(&class.canonical::<Rational>()).unwrap();
                prop_assert!(d0.sign_rel(0.0, 0.0) != Sign::Zero);
                prop_assert!((delta(&a).unwrap() / d0).sqrt_exact().is_none());
                let af = a.to_f64();
                let rep = reduce222(&af, EPS_DELTA).unwrap();
                let back = rep.class.canonical::<f64>().mmm(&rep.witness.unwrap()).unwrap();
                prop_assert!(back.sub(&af).unwrap().norm() <= 1e-9 * af.norm());
            }
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn float_witness_reconstructs(a in float_tensor(vec![2, 2, 2])) {
        let rep = reduce222(&a, EPS_DELTA).unwrap();
        let back = rep.class.canonical::<f64>().mmm(&rep.witness.unwrap()).unwrap();
        prop_assert!(back.sub(&a).unwrap().norm() <= 1e-9 * a.norm());
    }

    /// Sums of two integer rank-1 terms have Δ ≥ 0; Δ > 0 forces rank ≤ 2.
    #[test]
    fn rank_bounds(xs in prop::collection::vec(int_vec(2), 6)) {
        let a = outer_product(&xs[..3]).unwrap().add(&outer_product(&xs[3..]).unwrap()).unwrap();
        let rep = classify222(&a, 0.0).unwrap();
        prop_assert_ne!(rep.delta.sign_rel(0.0, 0.0), Sign::Negative);
        prop_assert!(rep.outer_rank <= 2);
        prop_assert!(rep.border_rank <= rep.outer_rank);
        prop_assert!(rep.mlrank.all_at_most(rep.outer_rank));
        if rep.delta.sign_rel(0.0, 0.0) == Sign::Positive {
            prop_assert_eq!(rep.class, OrbitClass::G2);
        }
    }

    #[test]
    fn orbit_samples_classify(class_idx in 0usize..8, seed in any::<u64>()) {
        let class = OrbitClass::ALL[class_idx];
        let (a, g) = random_orbit_sample::<Rational>(class, seed);
        prop_assert_eq!(classify222(&a, 0.0).unwrap().class, class);
        prop_assert_eq!(class.canonical::<Rational>().mmm(&g).unwrap(), a);
    }

    #[test]
    fn leibniz_order_three_is_dsl(x in int_vec(3), y in int_vec(3)) {
        let spec = LeibnizSpec::new(3, vec![1], x.clone(), vec![y.clone()]).unwrap();
        let l = leibniz_tensor(&spec).unwrap();
        let xs = [x.clone(), x.clone(), x];
        let ys = [y.clone(), y.clone(), y];
        prop_assert_eq!(l, dsl_tensor(&xs, &ys).unwrap());
    }

    #[test]
    fn dsl_sequence_bound_and_witnesses(
        x in [int_vec(2), int_vec(3), int_vec(2)],
        y in [int_vec(2), int_vec(3), int_vec(2)],
    ) {
        let seq = dsl_sequence(&x, &y).unwrap();
        let (c1, c2) = dsl_error_constants(&x, &y).unwrap();
        let mut prev = f64::INFINITY;
        for n in 1..=30u64 {
            let term = seq.term(n).unwrap();
            prop_assert_eq!(term.witness.evaluate().unwrap(), term.tensor.clone());
            prop_assert!(term.witness.len() <= seq.term_rank_bound);
            let err = term.tensor.sub(&seq.limit).unwrap().norm();
            let nf = n as f64;
            prop_assert!(err <= (c1 / nf + c2 / (nf * nf)) * (1.0 + 1e-12));
            prop_assert!(err <= prev * (1.0 + 1e-12));
            prev = err;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn als_residual_is_monotone(
        a in shape3().prop_map(|s| s.into_iter().map(|d| d + 1).collect::<Vec<_>>()).prop_flat_map(float_tensor),
        rank in 1usize..=3,
        seed in any::<u64>(),
    ) {
        let (_, t) = als_cp(&a, &AlsOptions { rank, seed, max_iter: 200, tol: 0.0 }).unwrap();
        prop_assert!(t.max_residual_increase() <= 1e-12 * a.norm());
    }

    #[test]
    fn weak_fit_dominates_and_is_feasible(a in float_tensor(vec![2, 2, 2]), seed in 0u64..1000) {
        let w = weak_rank2(&a, &WeakOptions { seed, restarts: 4, max_iter: 2000, tol: 1e-12 }).unwrap();
        let a_norm = a.norm();
        // the same restart streams weak_rank2 draws its two-term candidates from
        let o = AlsOptions { rank: 2, seed, max_iter: 2000, tol: 1e-12 };
        let als = best_of_restarts(&a, &o, 4).unwrap().1.final_residual().unwrap();
        prop_assert!(w.residual <= w.two_term_residual);
        prop_assert!(w.residual <= als + 1e-8 * a_norm);
        let b = w.model.evaluate();
        prop_assert!((b.sub(&a).unwrap().norm() - w.residual).abs() <= 1e-12 * a_norm.max(1.0));
        let d = delta_extended(&b, 1e-10).unwrap();
        let scale = b.norm().powi(4).max(f64::MIN_POSITIVE);
        prop_assert!(d >= -EPS_DELTA * scale);
        if w.model.family == BoundaryFamily::ThreeTerm {
            prop_assert!(d.abs() <= EPS_DELTA * scale);
        }
    }

    #[test]
    fn best_rank1_is_orthogonally_invariant(a in float_tensor(vec![2, 2, 2]), seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let q = MultilinearMap::new((0..3).map(|_| common::orthogonal(&mut r, 2)).collect()).unwrap();
        let res = |t: &Tensor| best_rank1(t, 0, 8, 10_000, 1e-14).unwrap().1.final_residual().unwrap();
        let (r0, r1) = (res(&a), res(&a.mmm(&q).unwrap()));
        prop_assert!((r0 - r1).abs() <= 1e-8 * a.norm().max(1.0), "{} vs {}", r0, r1);
    }
}
