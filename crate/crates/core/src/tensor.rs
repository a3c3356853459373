//! Dense k-way arrays and multilinear algebra on them.
//!
//! Layout is row-major with the last index fastest. Mode indices in the API
//! are 0-based. The mode-`i` flattening is the `dᵢ × ∏_{j≠i} dⱼ` matrix whose
//! columns are the mode-`i` fibers, ordered row-major over the remaining
//! indices taken in increasing mode order.

use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{arg_err, dim_err, Result};
use crate::linalg::Matrix;
use crate::scalar::{Rational, Scalar, ScalarKind};

/// Relative tolerance used for numerical rank decisions unless overridden.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor<T> {
    shape: Vec<usize>,
    data: Vec<T>,
}

pub type Tensor = DenseTensor<f64>;
pub type ExactTensor = DenseTensor<Rational>;

fn check_shape(shape: &[usize]) -> Result<usize> {
    if shape.is_empty() {
        return dim_err("tensor order must be at least 1");
    }
    if shape.contains(&0) {
        return dim_err(format!("every dimension must be positive, got {shape:?}"));
    }
    Ok(shape.iter().product())
}

/// Row-major strides for `shape`.
pub fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * shape[i + 1];
    }
    s
}

/// Advances a multi-index in row-major order; returns false after the last one.
pub fn next_index(idx: &mut [usize], shape: &[usize]) -> bool {
    for m in (0..idx.len()).rev() {
        idx[m] += 1;
        if idx[m] < shape[m] {
            return true;
        }
        idx[m] = 0;
    }
    false
}

impl<T: Scalar> DenseTensor<T> {
    pub fn new(shape: Vec<usize>, data: Vec<T>) -> Result<Self> {
        let n = check_shape(&shape)?;
        if data.len() != n {
            return dim_err(format!(
                "shape {shape:?} needs {n} entries, got {}",
                data.len()
            ));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Result<Self> {
        let n = check_shape(shape)?;
        Ok(Self {
            shape: shape.to_vec(),
            data: vec![T::zero(); n],
        })
    }

    pub fn from_fn(shape: &[usize], mut f: impl FnMut(&[usize]) -> T) -> Result<Self> {
        let n = check_shape(shape)?;
        let mut data = Vec::with_capacity(n);
        let mut idx = vec![0; shape.len()];
        loop {
            data.push(f(&idx));
            if !next_index(&mut idx, shape) {
                break;
            }
        }
        Ok(Self {
            shape: shape.to_vec(),
            data,
        })
    }

    /// Integer-valued tensor, convenient for exact fixtures.
    pub fn from_i64(shape: &[usize], values: &[i64]) -> Result<Self> {
        Self::new(shape.to_vec(), values.iter().map(|&v| T::from_i64(v)).collect())
    }

    #[inline]
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.shape.len()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn scalar_kind(&self) -> ScalarKind {
        T::KIND
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.shape.len());
        idx.iter()
            .zip(&self.shape)
            .fold(0, |acc, (&i, &d)| acc * d + i)
    }

    pub fn get(&self, idx: &[usize]) -> &T {
        &self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: T) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> DenseTensor<U> {
        DenseTensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn to_f64(&self) -> Tensor {
        self.map(Scalar::to_f64)
    }

    fn same_shape(&self, other: &Self, what: &str) -> Result<()> {
        if self.shape != other.shape {
            return dim_err(format!(
                "{what}: shapes {:?} and {:?} differ",
                self.shape, other.shape
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other, "add")?;
        Ok(Self {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other, "sub")?;
        Ok(Self {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        })
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|x| x.clone() * s.clone())
    }

    /// Frobenius inner product `Σ a_{i…} b_{i…}`.
    pub fn frobenius(&self, other: &Self) -> Result<T> {
        self.same_shape(other, "frobenius")?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone()))
    }

    pub fn norm_sq(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, a| acc + a.clone() * a.clone())
    }

    pub fn norm(&self) -> f64 {
        self.data
            .iter()
            .map(|x| x.to_f64().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Mode-`mode` product with a `c × d_mode` matrix.
    pub fn mode_product(&self, mode: usize, m: &Matrix<T>) -> Result<Self> {
        if mode >= self.order() {
            return dim_err(format!("mode {mode} out of range for order {}", self.order()));
        }
        let d = self.shape[mode];
        if m.cols() != d {
            return dim_err(format!(
                "factor for mode {mode} has {} columns, tensor dimension is {d}",
                m.cols()
            ));
        }
        let c = m.rows();
        let outer: usize = self.shape[..mode].iter().product();
        let inner: usize = self.shape[mode + 1..].iter().product();
        let mut shape = self.shape.clone();
        shape[mode] = c;
        check_shape(&shape)?;
        let mut data = vec![T::zero(); outer * c * inner];
        for o in 0..outer {
            for i in 0..c {
                for j in 0..d {
                    let w = m.get(i, j);
                    if w.is_zero() {
                        continue;
                    }
                    let src = (o * d + j) * inner;
                    let dst = (o * c + i) * inner;
                    for n in 0..inner {
                        let v = data[dst + n].clone() + w.clone() * self.data[src + n].clone();
                        data[dst + n] = v;
                    }
                }
            }
        }
        Ok(Self { shape, data })
    }

    /// Multilinear multiplication `(L₁,…,L_k)·A`.
    pub fn mmm(&self, map: &MultilinearMap<T>) -> Result<Self> {
        if map.order() != self.order() {
            return dim_err(format!(
                "map has {} factors, tensor has order {}",
                map.order(),
                self.order()
            ));
        }
        map.factors
            .iter()
            .enumerate()
            .try_fold(self.clone(), |acc, (mode, f)| acc.mode_product(mode, f))
    }

    /// Outer product `A ⊗ B`, of order `k + ℓ`.
    pub fn otimes(&self, other: &Self) -> Self {
        let mut shape = self.shape.clone();
        shape.extend_from_slice(&other.shape);
        let mut data = Vec::with_capacity(self.len() * other.len());
        for a in &self.data {
            for b in &other.data {
                data.push(a.clone() * b.clone());
            }
        }
        Self { shape, data }
    }

    /// Block-diagonal direct sum `A ⊕ B`.
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if self.order() != other.order() {
            return dim_err(format!(
                "direct sum needs equal orders, got {} and {}",
                self.order(),
                other.order()
            ));
        }
        let shape: Vec<usize> = self.shape.iter().zip(&other.shape).map(|(a, b)| a + b).collect();
        let mut out = Self::zeros(&shape)?;
        out.write_block(self, &vec![0; self.order()]);
        out.write_block(other, &self.shape);
        Ok(out)
    }

    fn write_block(&mut self, block: &Self, offset: &[usize]) {
        let mut idx = vec![0; block.order()];
        let mut dst = vec![0; block.order()];
        for v in &block.data {
            for m in 0..idx.len() {
                dst[m] = idx[m] + offset[m];
            }
            self.set(&dst, v.clone());
            next_index(&mut idx, &block.shape);
        }
    }

    /// Places `self` at `offset` inside a zero tensor of `shape`.
    pub fn place(&self, shape: &[usize], offset: &[usize]) -> Result<Self> {
        if shape.len() != self.order() || offset.len() != self.order() {
            return dim_err("placement shape/offset must match the tensor order");
        }
        for m in 0..shape.len() {
            if offset[m] + self.shape[m] > shape[m] {
                return dim_err(format!(
                    "block {:?} at offset {offset:?} does not fit in {shape:?}",
                    self.shape
                ));
            }
        }
        let mut out = Self::zeros(shape)?;
        out.write_block(self, offset);
        Ok(out)
    }

    /// Canonical embedding into a larger space: `A ⊕ 0`.
    pub fn embed_pad(&self, new_shape: &[usize]) -> Result<Self> {
        if new_shape.len() != self.order() || new_shape.iter().zip(&self.shape).any(|(n, o)| n < o) {
            return dim_err(format!(
                "cannot embed shape {:?} into {new_shape:?}",
                self.shape
            ));
        }
        self.place(new_shape, &vec![0; self.order()])
    }

    /// Leading block of the given shape.
    pub fn crop(&self, shape: &[usize]) -> Result<Self> {
        if shape.len() != self.order() || shape.iter().zip(&self.shape).any(|(n, o)| n > o) {
            return dim_err(format!("cannot crop {:?} to {shape:?}", self.shape));
        }
        Self::from_fn(shape, |idx| self.get(idx).clone())
    }

    /// Mode permutation: output mode `m` is input mode `perm[m]`.
    pub fn permute_modes(&self, perm: &[usize]) -> Result<Self> {
        let k = self.order();
        let mut seen = vec![false; k];
        if perm.len() != k
            || perm.iter().any(|&p| {
                p >= k || std::mem::replace(&mut seen[p], true)
            })
        {
            return arg_err(format!("{perm:?} is not a permutation of 0..{k}"));
        }
        let shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let in_strides = strides(&self.shape);
        Self::from_fn(&shape, |j| {
            let off: usize = (0..k).map(|m| j[m] * in_strides[perm[m]]).sum();
            self.data[off].clone()
        })
    }

    /// Mode-`mode` flattening (see module docs for the column order).
    pub fn flatten(&self, mode: usize) -> Result<Matrix<T>> {
        let k = self.order();
        if mode >= k {
            return dim_err(format!("mode {mode} out of range for order {k}"));
        }
        let mut perm = vec![mode];
        perm.extend((0..k).filter(|&m| m != mode));
        let p = self.permute_modes(&perm)?;
        let rows = self.shape[mode];
        Matrix::new(rows, self.len() / rows, p.data)
    }

    /// Multilinear rank `(r₁,…,r_k)`, `rᵢ = rank(flatten(i))`.
    pub fn mrank(&self, tol: f64) -> MlRank {
        MlRank::new(
            (0..self.order())
                .map(|m| {
                    self.flatten(m)
                        .expect("mode in range")
                        .rank(tol)
                })
                .collect(),
        )
    }
}

impl Tensor {
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl<T: Scalar + fmt::Display> fmt::Display for DenseTensor<T> {
    /// Order-3 tensors print as side-by-side slabs `[A₁ | A₂ | …]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.order() != 3 {
            return write!(f, "DenseTensor{:?}{:?}", self.shape, self.data);
        }
        let (d1, d2, d3) = (self.shape[0], self.shape[1], self.shape[2]);
        for j in 0..d2 {
            for i in 0..d1 {
                if i > 0 {
                    f.write_str(" | ")?;
                }
                for k in 0..d3 {
                    if k > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{}", self.get(&[i, j, k]))?;
                }
            }
            if j + 1 < d2 {
                writeln!(f)?;
            }
        }
        Ok(())
    }
}

/// Decomposable tensor `x₁ ⊗ … ⊗ x_k`.
pub fn outer_product<T: Scalar>(vectors: &[Vec<T>]) -> Result<DenseTensor<T>> {
    if vectors.is_empty() || vectors.iter().any(Vec::is_empty) {
        return dim_err("outer product needs at least one nonempty vector");
    }
    let shape: Vec<usize> = vectors.iter().map(Vec::len).collect();
    DenseTensor::from_fn(&shape, |idx| {
        idx.iter()
            .zip(vectors)
            .fold(T::one(), |acc, (&i, v)| acc * v[i].clone())
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MlRank(pub Vec<usize>);

impl MlRank {
    pub fn new(ranks: Vec<usize>) -> Self {
        Self(ranks)
    }

    pub fn ranks(&self) -> &[usize] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&r| r == 0)
    }

    /// Componentwise `≤`.
    pub fn le(&self, other: &Self) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn all_at_most(&self, bound: usize) -> bool {
        self.0.iter().all(|&r| r <= bound)
    }
}

impl fmt::Display for MlRank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// A k-tuple of matrices acting mode-wise on tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct MultilinearMap<T> {
    factors: Vec<Matrix<T>>,
}

impl<T: Scalar> MultilinearMap<T> {
    pub fn new(factors: Vec<Matrix<T>>) -> Result<Self> {
        if factors.is_empty() {
            return dim_err("a multilinear map needs at least one factor");
        }
        Ok(Self { factors })
    }

    pub fn identity(shape: &[usize]) -> Self {
        Self {
            factors: shape.iter().map(|&d| Matrix::identity(d)).collect(),
        }
    }

    pub fn factors(&self) -> &[Matrix<T>] {
        &self.factors
    }

    pub fn factor(&self, mode: usize) -> &Matrix<T> {
        &self.factors[mode]
    }

    pub fn order(&self) -> usize {
        self.factors.len()
    }

    /// `(self ∘ inner)ᵢ = selfᵢ · innerᵢ`: applying `inner` first, then `self`.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if self.order() != inner.order() {
            return dim_err("composing maps of different orders");
        }
        Ok(Self {
            factors: self
                .factors
                .iter()
                .zip(&inner.factors)
                .map(|(a, b)| a.matmul(b))
                .collect::<Result<_>>()?,
        })
    }

    /// All factors square with nonzero determinant.
    pub fn is_invertible(&self) -> bool {
        self.factors
            .iter()
            .all(|f| f.is_square() && f.det().map(|d| !d.is_zero()).unwrap_or(false))
    }

    pub fn inverse(&self) -> Result<Self> {
        Ok(Self {
            factors: self
                .factors
                .iter()
                .map(Matrix::inverse)
                .collect::<Result<_>>()?,
        })
    }

    pub fn determinants(&self) -> Result<Vec<T>> {
        self.factors.iter().map(Matrix::det).collect()
    }

    pub fn to_f64(&self) -> MultilinearMap<f64> {
        MultilinearMap {
            factors: self.factors.iter().map(Matrix::to_f64).collect(),
        }
    }

    /// Largest Frobenius norm among the factors.
    pub fn norm(&self) -> f64 {
        self.factors
            .iter()
            .map(|f| f.frobenius_sq().sqrt())
            .fold(0.0, f64::max)
    }
}

/// Per-mode orthogonal projections `(π₁,…,π_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    modes: Vec<Matrix<f64>>,
}

impl Projector {
    pub fn new(modes: Vec<Matrix<f64>>) -> Result<Self> {
        if modes.iter().any(|m| !m.is_square()) {
            return dim_err("projectors must be square");
        }
        Ok(Self { modes })
    }

    /// Orthogonal projector onto the span of the orthonormal columns of each basis.
    pub fn from_orthonormal_bases(bases: &[Matrix<f64>]) -> Result<Self> {
        Self::new(
            bases
                .iter()
                .map(|q| q.matmul(&q.transpose()))
                .collect::<Result<_>>()?,
        )
    }

    pub fn modes(&self) -> &[Matrix<f64>] {
        &self.modes
    }

    pub fn as_map(&self) -> MultilinearMap<f64> {
        MultilinearMap {
            factors: self.modes.clone(),
        }
    }

    /// The complementary projector `1 − πᵢ` in every mode.
    pub fn complement(&self) -> Self {
        Self {
            modes: self
                .modes
                .iter()
                .map(|p| Matrix::<f64>::identity(p.rows()).sub(p).expect("square"))
                .collect(),
        }
    }

    pub fn traces(&self) -> Vec<f64> {
        self.modes.iter().map(Matrix::trace).collect()
    }
}

/// Orthonormal bases of the supporting subspaces (column spaces of the flattenings).
pub fn supporting_bases(a: &Tensor, tol: f64) -> Vec<Matrix<f64>> {
    (0..a.order())
        .map(|m| a.flatten(m).expect("mode in range").column_space_basis(tol))
        .collect()
}

/// `Π_A`: projections onto the supporting subspaces of `a`, built from singular vectors.
pub fn supporting_projector(a: &Tensor, tol: f64) -> Projector {
    Projector::from_orthonormal_bases(&supporting_bases(a, tol)).expect("bases have matching rows")
}

/// `Π(B)`. Note `(1 − Π)B` in Pythagoras' identity is `B − Π(B)`, not the
/// mode-wise complement, which only covers part of the orthogonal complement.
pub fn project_onto_support(b: &Tensor, p: &Projector) -> Result<Tensor> {
    b.mmm(&p.as_map())
}

/// A sum of weighted decomposable terms `Σ cⱼ x⁽¹⁾ⱼ ⊗ … ⊗ x⁽ᵏ⁾ⱼ`, used as a
/// rank certificate: evaluating it must reproduce the tensor it accompanies.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneSum<T> {
    pub shape: Vec<usize>,
    pub terms: Vec<RankOneTerm<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankOneTerm<T> {
    pub coef: T,
    pub vectors: Vec<Vec<T>>,
}

impl<T: Scalar> RankOneSum<T> {
    pub fn new(shape: Vec<usize>) -> Self {
        Self {
            shape,
            terms: Vec::new(),
        }
    }

    pub fn push(&mut self, coef: T, vectors: Vec<Vec<T>>) -> Result<()> {
        if vectors.len() != self.shape.len()
            || vectors.iter().zip(&self.shape).any(|(v, &d)| v.len() != d)
        {
            return dim_err(format!("term does not match shape {:?}", self.shape));
        }
        self.terms.push(RankOneTerm { coef, vectors });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `{"shape": [...], "terms": [{"coefficient": c, "vectors": [[...], ...]}, ...]}`
    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|t| {
                let vectors: Vec<Vec<serde_json::Value>> =
                    t.vectors.iter().map(|v| v.iter().map(Scalar::to_json).collect()).collect();
                serde_json::json!({"coefficient": t.coef.to_json(), "vectors": vectors})
            })
            .collect();
        serde_json::json!({"shape": self.shape, "terms": terms})
    }

    pub fn evaluate(&self) -> Result<DenseTensor<T>> {
        let mut acc = DenseTensor::zeros(&self.shape)?;
        for t in &self.terms {
            acc = acc.add(&outer_product(&t.vectors)?.scale(&t.coef))?;
        }
        Ok(acc)
    }

    /// Appends unit mode vectors `u` to every term (the `A ⊗ u` lift).
    pub fn lift(&self, extra: &[Vec<T>]) -> Result<Self> {
        let mut shape = self.shape.clone();
        shape.extend(extra.iter().map(Vec::len));
        let mut out = Self::new(shape);
        for t in &self.terms {
            let mut v = t.vectors.clone();
            v.extend(extra.iter().cloned());
            out.push(t.coef.clone(), v)?;
        }
        Ok(out)
    }

    /// Shifts every term into the block at `offset` of a larger space.
    pub fn place(&self, shape: &[usize], offset: &[usize]) -> Result<Self> {
        let mut out = Self::new(shape.to_vec());
        for t in &self.terms {
            let vectors = t
                .vectors
                .iter()
                .enumerate()
                .map(|(m, v)| {
                    let mut w = vec![T::zero(); shape[m]];
                    for (i, x) in v.iter().enumerate() {
                        w[offset[m] + i] = x.clone();
                    }
                    w
                })
                .collect();
            out.push(t.coef.clone(), vectors)?;
        }
        Ok(out)
    }

    pub fn extend(&mut self, other: Self) -> Result<()> {
        if other.shape != self.shape {
            return dim_err("rank-one sums of different shapes");
        }
        self.terms.extend(other.terms);
        Ok(())
    }
}
