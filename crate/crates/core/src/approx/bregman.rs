use crate::error::{dim_err, Result, TensorError};
use crate::tensor::Tensor;

/// A strictly convex differentiable `φ` on (part of) a tensor space.
pub trait DivergenceGenerator {
    fn value(&self, a: &Tensor) -> f64;

    fn gradient(&self, a: &Tensor) -> Tensor;

    /// Whether `b` lies in the relative interior of the domain, where `∇φ(b)` exists.
    fn in_domain(&self, _b: &Tensor) -> bool {
        true
    }
}

/// `φ(A) = ½‖A‖_F²`, for which `D_φ(A, B) = ½‖A − B‖_F²`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SquaredFrobenius;

impl DivergenceGenerator for SquaredFrobenius {
    fn value(&self, a: &Tensor) -> f64 {
        0.5 * a.norm_sq()
    }

    fn gradient(&self, a: &Tensor) -> Tensor {
        a.clone()
    }
}

/// `D_φ(A, B) = φ(A) − φ(B) − ⟨∇φ(B), A − B⟩_F`.
pub fn bregman(a: &Tensor, b: &Tensor, phi: &dyn DivergenceGenerator) -> Result<f64> {
    if a.shape() != b.shape() {
        return dim_err(format!("shapes {:?} and {:?} differ", a.shape(), b.shape()));
    }
    if !phi.in_domain(b) {
        return Err(TensorError::OutsideDomain("second argument is not in the interior of the domain".into()));
    }
    let d = phi.value(a) - phi.value(b) - phi.gradient(b).frobenius(&a.sub(b)?)?;
    if !d.is_finite() {
        return Err(TensorError::OutsideDomain(format!("divergence evaluated to {d}")));
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Negative entropy `Σ aᵢ log aᵢ`, defined on positive tensors; its divergence is generalized KL.
    struct NegEntropy;

    impl DivergenceGenerator for NegEntropy {
        fn value(&self, a: &Tensor) -> f64 {
            a.data().iter().map(|&x| if x == 0.0 { 0.0 } else { x * x.ln() }).sum()
        }

        fn gradient(&self, a: &Tensor) -> Tensor {
            a.map(|&x| x.ln() + 1.0)
        }

        fn in_domain(&self, b: &Tensor) -> bool {
            b.data().iter().all(|&x| x > 0.0)
        }
    }

    #[test]
    fn squared_frobenius_is_half_distance() {
        let a = Tensor::from_i64(&[2, 2], &[1, 2, 3, 4]).unwrap();
        let b = Tensor::from_i64(&[2, 2], &[0, 2, 5, 4]).unwrap();
        assert_eq!(bregman(&a, &a, &SquaredFrobenius).unwrap(), 0.0);
        assert!((bregman(&a, &b, &SquaredFrobenius).unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn user_generator_gives_kl() {
        let a = Tensor::new(vec![3], vec![0.2, 0.3, 0.5]).unwrap();
        let b = Tensor::new(vec![3], vec![0.4, 0.4, 0.2]).unwrap();
        let kl: f64 = a.data().iter().zip(b.data()).map(|(p, q)| p * (p / q).ln() - p + q).sum();
        assert!((bregman(&a, &b, &NegEntropy).unwrap() - kl).abs() < 1e-12);
        assert!(bregman(&a, &b, &NegEntropy).unwrap() >= 0.0);
        let z = Tensor::new(vec![3], vec![0.0, 0.5, 0.5]).unwrap();
        assert!(matches!(bregman(&a, &z, &NegEntropy), Err(TensorError::OutsideDomain(_))));
        assert!(bregman(&a, &Tensor::zeros(&[2]).unwrap(), &SquaredFrobenius).is_err());
    }
}
