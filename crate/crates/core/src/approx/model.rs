use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};

use crate::constructions::dsl_tensor;
use crate::error::{dim_err, Result};
use crate::tensor::{outer_product, Tensor};

/// `Σᵢ λᵢ u⁽¹⁾ᵢ ⊗ … ⊗ u⁽ᵏ⁾ᵢ` with unit mode vectors and `λᵢ ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CpModel {
    pub shape: Vec<usize>,
    pub lambdas: Vec<f64>,
    /// `vectors[i][m]`: unit vector of term `i` in mode `m`.
    pub vectors: Vec<Vec<Vec<f64>>>,
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Unit vector and norm; a zero vector maps to `e₁` with norm 0.
pub(crate) fn normalize(v: &[f64]) -> (Vec<f64>, f64) {
    let n = norm(v);
    if n > 0.0 {
        (v.iter().map(|x| x / n).collect(), n)
    } else {
        let mut e = vec![0.0; v.len()];
        e[0] = 1.0;
        (e, 0.0)
    }
}

impl CpModel {
    /// Normalizes arbitrary terms; all scale and sign go into `λ` and the first mode vector.
    pub fn from_terms(shape: Vec<usize>, terms: &[Vec<Vec<f64>>]) -> Result<Self> {
        let mut lambdas = Vec::with_capacity(terms.len());
        let mut vectors = Vec::with_capacity(terms.len());
        for t in terms {
            if t.len() != shape.len() || t.iter().zip(&shape).any(|(v, &d)| v.len() != d) {
                return dim_err(format!("term does not match shape {shape:?}"));
            }
            let mut lambda = 1.0;
            let units: Vec<Vec<f64>> = t
                .iter()
                .map(|v| {
                    let (u, n) = normalize(v);
                    lambda *= n;
                    u
                })
                .collect();
            lambdas.push(lambda);
            vectors.push(units);
        }
        Ok(Self { shape, lambdas, vectors })
    }

    pub fn rank(&self) -> usize {
        self.lambdas.len()
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn evaluate(&self) -> Tensor {
        let mut acc = Tensor::zeros(&self.shape).expect("valid shape");
        for (l, vs) in self.lambdas.iter().zip(&self.vectors) {
            let t = outer_product(vs).expect("matching vectors").scale(l);
            acc = acc.add(&t).expect("same shape");
        }
        acc
    }

    pub fn max_lambda(&self) -> f64 {
        self.lambdas.iter().cloned().fold(0.0, f64::max)
    }

    /// Largest `|cos|` between distinct terms' vectors in each mode (0 for rank 1).
    pub fn mode_cosines(&self) -> Vec<f64> {
        (0..self.order())
            .map(|m| {
                let mut best: f64 = 0.0;
                for i in 0..self.rank() {
                    for j in i + 1..self.rank() {
                        best = best.max(dot(&self.vectors[i][m], &self.vectors[j][m]).abs());
                    }
                }
                best
            })
            .collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "shape": self.shape,
            "coefficients": self.lambdas,
            "vectors": self.vectors,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundaryFamily {
    /// `x₁⊗x₂⊗x₃ + y₁⊗y₂⊗y₃`
    #[serde(rename = "two-term")]
    TwoTerm,
    /// `y₁⊗x₂⊗x₃ + x₁⊗y₂⊗x₃ + x₁⊗x₂⊗y₃`
    #[serde(rename = "three-term-boundary")]
    ThreeTerm,
}

/// A point of the border-rank-2 set in one of its two parameterizations.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryModel {
    pub family: BoundaryFamily,
    pub x: [Vec<f64>; 3],
    pub y: [Vec<f64>; 3],
}

impl BoundaryModel {
    pub fn evaluate(&self) -> Tensor {
        match self.family {
            BoundaryFamily::TwoTerm => outer_product(&self.x)
                .and_then(|a| a.add(&outer_product(&self.y)?))
                .expect("consistent vectors"),
            BoundaryFamily::ThreeTerm => dsl_tensor(&self.x, &self.y).expect("consistent vectors"),
        }
    }

    /// Frobenius norms of the individual rank-1 terms.
    pub fn term_norms(&self) -> Vec<f64> {
        let (x, y) = (&self.x, &self.y);
        let n = |a: &[f64], b: &[f64], c: &[f64]| norm(a) * norm(b) * norm(c);
        match self.family {
            BoundaryFamily::TwoTerm => vec![n(&x[0], &x[1], &x[2]), n(&y[0], &y[1], &y[2])],
            BoundaryFamily::ThreeTerm => vec![
                n(&y[0], &x[1], &x[2]),
                n(&x[0], &y[1], &x[2]),
                n(&x[0], &x[1], &y[2]),
            ],
        }
    }

    /// `|cos(xₘ, yₘ)|` per mode.
    pub fn mode_cosines(&self) -> Vec<f64> {
        (0..3)
            .map(|m| {
                let d = norm(&self.x[m]) * norm(&self.y[m]);
                if d > 0.0 {
                    (dot(&self.x[m], &self.y[m]) / d).abs()
                } else {
                    0.0
                }
            })
            .collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "family": self.family,
            "vectors": {"x": self.x, "y": self.y},
            "coefficients": self.term_norms(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub iter: usize,
    pub residual: f64,
    pub lambdas: Vec<f64>,
    pub cosines: Vec<f64>,
    pub elapsed_ms: f64,
}

/// Per-iteration history of a fit; record 0 is the initial point.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct FitTrace {
    pub records: Vec<TraceRecord>,
}

impl FitTrace {
    pub fn push(&mut self, r: TraceRecord) {
        self.records.push(r);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn final_residual(&self) -> Option<f64> {
        self.last().map(|r| r.residual)
    }

    pub fn residuals(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.residual)
    }

    /// `λ_j` along the trace.
    pub fn lambda_series(&self, j: usize) -> Vec<f64> {
        self.records.iter().map(|r| r.lambdas[j]).collect()
    }

    /// Largest single-step residual increase (≤ 0 for a monotone trace).
    pub fn max_residual_increase(&self) -> f64 {
        self.records
            .windows(2)
            .map(|w| w[1].residual - w[0].residual)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `iter,residual,lambda_1..lambda_r,cos_mode1..cos_modek,elapsed_ms`.
    pub fn to_csv(&self) -> String {
        let (r, k) = self
            .records
            .first()
            .map_or((0, 0), |x| (x.lambdas.len(), x.cosines.len()));
        let mut s = String::from("iter,residual");
        for i in 1..=r {
            write!(s, ",lambda_{i}").unwrap();
        }
        for m in 1..=k {
            write!(s, ",cos_mode{m}").unwrap();
        }
        s.push_str(",elapsed_ms\n");
        for rec in &self.records {
            write!(s, "{},{:e}", rec.iter, rec.residual).unwrap();
            for l in &rec.lambdas {
                write!(s, ",{l:e}").unwrap();
            }
            for c in &rec.cosines {
                write!(s, ",{c:e}").unwrap();
            }
            writeln!(s, ",{:.3}", rec.elapsed_ms).unwrap();
        }
        s
    }
}
