//! Orbit classification of real 2×2×2 tensors.
//!
//! Slab `i` of a 2×2×2 tensor is the matrix `(A_i)_{jk} = a_{ijk}`. Under
//! `(L, M, N)` the slabs transform as `A_i ↦ Σ_l L_{il} M A_l Nᵀ`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{arg_err, dim_err, Result, TensorError};
use crate::linalg::Matrix;
use crate::scalar::{Scalar, Sign};
use crate::tensor::{DenseTensor, MlRank, MultilinearMap, RankOneSum};

/// Relative zero threshold for Δ and the minors (both scaled by `‖A‖_F` to their degree).
pub const EPS_DELTA: f64 = 1e-10;

/// The eight GL-orbits of ℝ^{2×2×2}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OrbitClass {
    D0,
    D1,
    D2,
    #[serde(rename = "D2'")]
    D2p,
    #[serde(rename = "D2''")]
    D2pp,
    G2,
    D3,
    G3,
}

impl OrbitClass {
    pub const ALL: [OrbitClass; 8] = [
        OrbitClass::D0,
        OrbitClass::D1,
        OrbitClass::D2,
        OrbitClass::D2p,
        OrbitClass::D2pp,
        OrbitClass::G2,
        OrbitClass::D3,
        OrbitClass::G3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OrbitClass::D0 => "D0",
            OrbitClass::D1 => "D1",
            OrbitClass::D2 => "D2",
            OrbitClass::D2p => "D2'",
            OrbitClass::D2pp => "D2''",
            OrbitClass::G2 => "G2",
            OrbitClass::D3 => "D3",
            OrbitClass::G3 => "G3",
        }
    }

    /// Slabs `[A₁ | A₂]` of the canonical representative, row-major.
    fn slab_entries(self) -> [[i64; 4]; 2] {
        match self {
            OrbitClass::D0 => [[0, 0, 0, 0], [0, 0, 0, 0]],
            OrbitClass::D1 => [[1, 0, 0, 0], [0, 0, 0, 0]],
            OrbitClass::D2 => [[1, 0, 0, 1], [0, 0, 0, 0]],
            OrbitClass::D2p => [[1, 0, 0, 0], [0, 1, 0, 0]],
            OrbitClass::D2pp => [[1, 0, 0, 0], [0, 0, 1, 0]],
            OrbitClass::G2 => [[1, 0, 0, 0], [0, 0, 0, 1]],
            OrbitClass::D3 => [[1, 0, 0, 0], [0, 1, 1, 0]],
            OrbitClass::G3 => [[1, 0, 0, 1], [0, -1, 1, 0]],
        }
    }

    pub fn canonical<T: Scalar>(self) -> DenseTensor<T> {
        let [a1, a2] = self.slab_entries();
        let mut v = a1.to_vec();
        v.extend_from_slice(&a2);
        DenseTensor::from_i64(&[2, 2, 2], &v).expect("fixed shape")
    }

    pub fn delta_sign(self) -> Sign {
        match self {
            OrbitClass::G2 => Sign::Positive,
            OrbitClass::G3 => Sign::Negative,
            _ => Sign::Zero,
        }
    }

    pub fn mlrank(self) -> MlRank {
        MlRank::new(match self {
            OrbitClass::D0 => vec![0, 0, 0],
            OrbitClass::D1 => vec![1, 1, 1],
            OrbitClass::D2 => vec![1, 2, 2],
            OrbitClass::D2p => vec![2, 1, 2],
            OrbitClass::D2pp => vec![2, 2, 1],
            _ => vec![2, 2, 2],
        })
    }

    pub fn outer_rank(self) -> usize {
        match self {
            OrbitClass::D0 => 0,
            OrbitClass::D1 => 1,
            OrbitClass::D3 | OrbitClass::G3 => 3,
            _ => 2,
        }
    }

    pub fn border_rank(self) -> usize {
        match self {
            OrbitClass::D3 => 2,
            c => c.outer_rank(),
        }
    }

    /// Explicit decomposition of the canonical array with `outer_rank()` terms.
    pub fn cp_certificate<T: Scalar>(self) -> RankOneSum<T> {
        let e = |i: usize| -> Vec<T> {
            let mut v = vec![T::zero(); 2];
            v[i] = T::one();
            v
        };
        let v = |a: i64, b: i64| vec![T::from_i64(a), T::from_i64(b)];
        let terms: Vec<[Vec<T>; 3]> = match self {
            OrbitClass::D0 => vec![],
            OrbitClass::D1 => vec![[e(0), e(0), e(0)]],
            OrbitClass::D2 => vec![[e(0), e(0), e(0)], [e(0), e(1), e(1)]],
            OrbitClass::D2p => vec![[e(0), e(0), e(0)], [e(1), e(0), e(1)]],
            OrbitClass::D2pp => vec![[e(0), e(0), e(0)], [e(1), e(1), e(0)]],
            OrbitClass::G2 => vec![[e(0), e(0), e(0)], [e(1), e(1), e(1)]],
            OrbitClass::D3 => vec![[e(0), e(0), e(0)], [e(1), e(0), e(1)], [e(1), e(1), e(0)]],
            OrbitClass::G3 => vec![
                [v(1, 1), e(0), e(0)],
                [v(1, -1), e(1), e(1)],
                [e(1), v(-1, 1), v(1, 1)],
            ],
        };
        let mut sum = RankOneSum::new(vec![2, 2, 2]);
        for t in terms {
            sum.push(T::one(), t.to_vec()).expect("2x2x2 terms");
        }
        sum
    }

    fn from_invariants(mlrank: &MlRank, sign: Sign) -> Result<Self> {
        let class = match (mlrank.ranks(), sign) {
            ([0, 0, 0], Sign::Zero) => OrbitClass::D0,
            ([1, 1, 1], Sign::Zero) => OrbitClass::D1,
            ([1, 2, 2], Sign::Zero) => OrbitClass::D2,
            ([2, 1, 2], Sign::Zero) => OrbitClass::D2p,
            ([2, 2, 1], Sign::Zero) => OrbitClass::D2pp,
            ([2, 2, 2], Sign::Positive) => OrbitClass::G2,
            ([2, 2, 2], Sign::Zero) => OrbitClass::D3,
            ([2, 2, 2], Sign::Negative) => OrbitClass::G3,
            _ => {
                return Err(TensorError::Tolerance(format!(
                    "multilinear rank {mlrank} with sign(Δ) = {sign} is not realized by any real 2x2x2 tensor"
                )))
            }
        };
        Ok(class)
    }
}

impl fmt::Display for OrbitClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OrbitClass {
    type Err = TensorError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "D0" => OrbitClass::D0,
            "D1" => OrbitClass::D1,
            "D2" => OrbitClass::D2,
            "D2'" | "D2p" => OrbitClass::D2p,
            "D2''" | "D2pp" => OrbitClass::D2pp,
            "G2" => OrbitClass::G2,
            "D3" => OrbitClass::D3,
            "G3" => OrbitClass::G3,
            other => return arg_err(format!("unknown orbit class '{other}'")),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitReport<T> {
    pub class: OrbitClass,
    pub delta: T,
    pub mlrank: MlRank,
    pub outer_rank: usize,
    pub border_rank: usize,
    /// `(L, M, N)` with `(L, M, N)·canonical(class) = A`.
    pub witness: Option<MultilinearMap<T>>,
}

impl<T: Scalar> OrbitReport<T> {
    fn new(class: OrbitClass, delta: T, mlrank: MlRank) -> Self {
        Self {
            class,
            delta,
            mlrank,
            outer_rank: class.outer_rank(),
            border_rank: class.border_rank(),
            witness: None,
        }
    }

    pub fn to_json(&self) -> Value {
        let witness = self.witness.as_ref().map(|w| {
            Value::Array(
                w.factors()
                    .iter()
                    .map(|m| {
                        Value::Array(
                            m.to_rows()
                                .iter()
                                .map(|r| Value::Array(r.iter().map(Scalar::to_json).collect()))
                                .collect(),
                        )
                    })
                    .collect(),
            )
        });
        json!({
            "class": self.class.name(),
            "delta": self.delta.to_json(),
            "mlrank": self.mlrank,
            "outer_rank": self.outer_rank,
            "border_rank": self.border_rank,
            "witness": witness,
        })
    }
}

fn require_222<T: Scalar>(a: &DenseTensor<T>) -> Result<()> {
    if a.shape() != [2, 2, 2] {
        return dim_err(format!("expected a 2x2x2 tensor, got shape {:?}", a.shape()));
    }
    Ok(())
}

/// Cayley's hyperdeterminant.
pub fn delta<T: Scalar>(a: &DenseTensor<T>) -> Result<T> {
    require_222(a)?;
    let x = |i: usize, j: usize, k: usize| a.get(&[i - 1, j - 1, k - 1]).clone();
    let (a111, a112, a121, a122) = (x(1, 1, 1), x(1, 1, 2), x(1, 2, 1), x(1, 2, 2));
    let (a211, a212, a221, a222) = (x(2, 1, 1), x(2, 1, 2), x(2, 2, 1), x(2, 2, 2));
    let sq = |p: &T, q: &T| p.clone() * p.clone() * q.clone() * q.clone();
    let q4 = |p: &T, q: &T, r: &T, s: &T| p.clone() * q.clone() * r.clone() * s.clone();

    let squares = sq(&a111, &a222) + sq(&a112, &a221) + sq(&a121, &a212) + sq(&a122, &a211);
    let cross = q4(&a111, &a112, &a221, &a222)
        + q4(&a111, &a121, &a212, &a222)
        + q4(&a111, &a122, &a211, &a222)
        + q4(&a112, &a121, &a212, &a221)
        + q4(&a112, &a122, &a221, &a211)
        + q4(&a121, &a122, &a212, &a211);
    let quads = q4(&a111, &a122, &a212, &a221) + q4(&a112, &a121, &a211, &a222);
    let two = T::from_i64(2);
    let four = T::from_i64(4);
    Ok(squares - two * cross + four * quads)
}

/// True iff every 2×2 minor of the mode-`mode` flattening vanishes, i.e. `r_mode ≤ 1`.
/// `mode` is 0-based.
pub fn minors_vanish<T: Scalar>(a: &DenseTensor<T>, mode: usize, tol: f64) -> Result<bool> {
    require_222(a)?;
    let f = a.flatten(mode)?;
    let scale = a.norm().powi(2);
    for c in 0..4 {
        for d in c + 1..4 {
            let m = f.get(0, c).clone() * f.get(1, d).clone() - f.get(0, d).clone() * f.get(1, c).clone();
            if !m.is_negligible(scale, tol) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Table-driven classification from `rank_⊞` and `sign Δ`.
pub fn classify222<T: Scalar>(a: &DenseTensor<T>, tol: f64) -> Result<OrbitReport<T>> {
    require_222(a)?;
    let d = delta(a)?;
    let mlrank = a.mrank(tol);
    let sign = d.sign_rel(a.norm().powi(4), tol);
    let class = OrbitClass::from_invariants(&mlrank, sign)?;
    Ok(OrbitReport::new(class, d, mlrank))
}

fn slab<T: Scalar>(b: &DenseTensor<T>, i: usize) -> [T; 4] {
    [
        b.get(&[i, 0, 0]).clone(),
        b.get(&[i, 0, 1]).clone(),
        b.get(&[i, 1, 0]).clone(),
        b.get(&[i, 1, 1]).clone(),
    ]
}

fn m2<T: Scalar>(a: T, b: T, c: T, d: T) -> Matrix<T> {
    Matrix::new(2, 2, vec![a, b, c, d]).expect("2x2")
}

fn rank2x2<T: Scalar>(m: &[T; 4], scale: f64, tol: f64) -> usize {
    if m.iter().all(|x| x.is_negligible(scale, tol)) {
        return 0;
    }
    let det = m[0].clone() * m[3].clone() - m[1].clone() * m[2].clone();
    if det.is_negligible(scale * scale, tol) {
        1
    } else {
        2
    }
}

/// Index of the largest-magnitude entry (first on ties).
fn argmax<T: Scalar>(v: &[T]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.magnitude() > v[best].magnitude() {
            best = i;
        }
    }
    best
}

/// Running state `B = G·A` of the canonical-form reduction.
struct Reduction<T> {
    b: DenseTensor<T>,
    g: [Matrix<T>; 3],
}

impl<T: Scalar> Reduction<T> {
    fn apply(&mut self, mode: usize, p: Matrix<T>) -> Result<()> {
        self.b = self.b.mode_product(mode, &p)?;
        self.g[mode] = p.matmul(&self.g[mode])?;
        Ok(())
    }

    /// Replace slabs by `(A₁, A₂) ↦ (p·A₁ + q·A₂, r·A₁ + s·A₂)`.
    fn slabs(&mut self, p: T, q: T, r: T, s: T) -> Result<()> {
        self.apply(0, m2(p, q, r, s))
    }

    fn scale(&self) -> f64 {
        self.b.norm()
    }
}

fn no_witness(what: &str) -> TensorError {
    TensorError::NoRationalWitness(format!(
        "{what} is irrational; rerun in float mode for a numerical witness"
    ))
}

/// Canonical-form reduction with an explicit GL witness.
pub fn reduce222<T: Scalar>(a: &DenseTensor<T>, tol: f64) -> Result<OrbitReport<T>> {
    let report = classify222(a, tol)?;
    let mut st = Reduction {
        b: a.clone(),
        g: [Matrix::identity(2), Matrix::identity(2), Matrix::identity(2)],
    };
    let (o, z) = (T::one(), T::zero());
    let class = if report.class == OrbitClass::D0 {
        OrbitClass::D0
    } else {
        let scale = st.scale();
        let r1 = rank2x2(&slab(&st.b, 0), scale, tol);
        let r2 = rank2x2(&slab(&st.b, 1), scale, tol);
        if r1 < r2 {
            st.slabs(z.clone(), o.clone(), o.clone(), z.clone())?;
        }
        if r1.max(r2) == 1 {
            reduce_rank_one_pencil(&mut st, tol)?
        } else {
            reduce_regular_pencil(&mut st, tol)?
        }
    };
    if class != report.class {
        return Err(TensorError::Tolerance(format!(
            "canonical-form reduction reached {class} but invariants give {}",
            report.class
        )));
    }

    let witness = MultilinearMap::new(
        st.g.iter().map(Matrix::inverse).collect::<Result<Vec<_>>>()?,
    )?;
    let rebuilt = class.canonical::<T>().mmm(&witness)?;
    let err = rebuilt.sub(a)?;
    if T::is_exact() {
        if !err.is_zero() {
            return Err(TensorError::Tolerance("exact witness failed to reconstruct input".into()));
        }
    } else if err.norm() > 1e-6 * a.norm() {
        return Err(TensorError::Tolerance(format!(
            "witness reconstruction error {:.3e} relative",
            err.norm() / a.norm()
        )));
    }
    Ok(OrbitReport {
        witness: Some(witness),
        ..report
    })
}

/// First slab has rank 1 and dominates the second.
fn reduce_rank_one_pencil<T: Scalar>(st: &mut Reduction<T>, tol: f64) -> Result<OrbitClass> {
    let (o, z) = (T::one(), T::zero());
    let a1 = slab(&st.b, 0);
    let p = argmax(&a1);
    let (jp, kp) = (p / 2, p % 2);
    // A₁ = u vᵀ with v[kp] = 1
    let u: Vec<T> = (0..2).map(|j| a1[j * 2 + kp].clone()).collect();
    let v: Vec<T> = (0..2).map(|k| a1[jp * 2 + k].clone() / a1[p].clone()).collect();
    let basis = |w: &[T], piv: usize| {
        let mut cols = [w.to_vec(), vec![z.clone(); 2]];
        cols[1][1 - piv] = o.clone();
        Matrix::from_columns(&cols)
    };
    st.apply(1, basis(&u, jp)?.inverse()?)?;
    st.apply(2, basis(&v, kp)?.inverse()?)?;

    let [a, b, c, d] = slab(&st.b, 1);
    let scale = st.scale();
    if !d.is_negligible(scale, tol) {
        st.apply(1, m2(o.clone(), -(b / d.clone()), z.clone(), o.clone()))?;
        st.apply(2, m2(o.clone(), -(c / d.clone()), z.clone(), o.clone()))?;
        let a = slab(&st.b, 1)[0].clone();
        st.slabs(o.clone(), z.clone(), -a, o.clone())?;
        st.slabs(o.clone(), z.clone(), z.clone(), o / d)?;
        return Ok(OrbitClass::G2);
    }
    st.slabs(o.clone(), z.clone(), -a, o.clone())?;
    let (bz, cz) = (b.is_negligible(scale, tol), c.is_negligible(scale, tol));
    if !cz {
        st.apply(1, m2(o.clone(), z.clone(), z.clone(), o.clone() / c))?;
    }
    if !bz {
        st.apply(2, m2(o.clone(), z.clone(), z.clone(), o / b))?;
    }
    Ok(match (bz, cz) {
        (true, true) => OrbitClass::D1,
        (false, true) => OrbitClass::D2p,
        (true, false) => OrbitClass::D2pp,
        (false, false) => OrbitClass::D3,
    })
}

/// First slab invertible: reduce to `(I, A₁⁻¹A₂)` and use the real Jordan form.
fn reduce_regular_pencil<T: Scalar>(st: &mut Reduction<T>, tol: f64) -> Result<OrbitClass> {
    let (o, z) = (T::one(), T::zero());
    let two = T::from_i64(2);
    let a1 = slab(&st.b, 0);
    st.apply(1, m2(a1[0].clone(), a1[1].clone(), a1[2].clone(), a1[3].clone()).inverse()?)?;

    let a2 = slab(&st.b, 1);
    let m = m2(a2[0].clone(), a2[1].clone(), a2[2].clone(), a2[3].clone());
    let t = m.trace();
    let det = m.det()?;
    let disc = t.clone() * t.clone() - T::from_i64(4) * det;
    // A₁ is now I, so ‖A₂‖² + 1 sets the scale of the degree-2 discriminant.
    let scale = m.frobenius_sq() + 1.0;
    // Conjugation A ↦ P⁻¹ A P applied to both slabs.
    let conjugate = |st: &mut Reduction<T>, p: Matrix<T>| -> Result<()> {
        st.apply(1, p.inverse()?)?;
        st.apply(2, p.transpose())
    };
    let shifted = |mu: T| m.sub(&Matrix::identity(2).scale(&mu)).expect("2x2");
    let best_column = |x: &Matrix<T>| {
        let j = argmax(x.data()) % 2;
        x.column(j)
    };

    match disc.sign_rel(scale, tol) {
        Sign::Zero => {
            let lambda = t / two;
            let nil = shifted(lambda.clone());
            st.slabs(o.clone(), z.clone(), -lambda, o.clone())?;
            if nil.data().iter().all(|x| x.is_negligible(scale.sqrt(), tol)) {
                return Ok(OrbitClass::D2);
            }
            let j = argmax(nil.data()) % 2;
            let mut v2 = vec![z.clone(); 2];
            v2[j] = o.clone();
            let v1 = nil.matvec(&v2)?;
            conjugate(st, Matrix::from_columns(&[v1, v2])?)?;
            // (I, [[0,1],[0,0]]) → swap slabs and mode-3 coordinates
            st.slabs(z.clone(), o.clone(), o.clone(), z.clone())?;
            st.apply(2, m2(z.clone(), o.clone(), o, z))?;
            Ok(OrbitClass::D3)
        }
        Sign::Positive => {
            let s = disc.sqrt_exact().ok_or_else(|| no_witness("pencil eigenvalue"))?;
            let lambda = (t.clone() - s.clone()) / two.clone();
            let mu = (t + s) / two;
            let p = Matrix::from_columns(&[
                best_column(&shifted(mu.clone())),
                best_column(&shifted(lambda.clone())),
            ])?;
            conjugate(st, p)?;
            let gap = mu - lambda.clone();
            // (I, diag(λ, μ)) → (I, diag(0, 1)) → (diag(1, 0), diag(0, 1))
            st.slabs(o.clone(), z.clone(), -lambda, o.clone())?;
            st.slabs(o.clone(), z.clone(), z.clone(), o.clone() / gap)?;
            st.slabs(o.clone(), -o.clone(), z, o)?;
            Ok(OrbitClass::G2)
        }
        Sign::Negative => {
            let a = t / two.clone();
            let b = (-disc)
                .sqrt_exact()
                .ok_or_else(|| no_witness("imaginary part of the pencil eigenvalues"))?
                / two;
            let c = shifted(a.clone()).scale(&(o.clone() / b.clone()));
            let e1 = vec![o.clone(), z.clone()];
            let ce1 = c.matvec(&e1)?;
            conjugate(st, Matrix::from_columns(&[e1, ce1])?)?;
            st.slabs(o.clone(), z.clone(), -(a / b.clone()), o.clone() / b)?;
            Ok(OrbitClass::G3)
        }
    }
}

/// Bases of the supporting subspaces together with `Δ` of the compressed core.
fn compressed_core<T: Scalar>(a: &DenseTensor<T>, tol: f64) -> Result<(DenseTensor<T>, Vec<Matrix<T>>)> {
    let bases: Vec<Matrix<T>> = (0..3)
        .map(|m| Ok(T::column_basis(&a.flatten(m)?, tol)))
        .collect::<Result<_>>()?;
    let pinv = MultilinearMap::new(
        bases.iter().map(Matrix::left_inverse).collect::<Result<Vec<_>>>()?,
    )?;
    let core = a.mmm(&pinv)?.embed_pad(&[2, 2, 2])?;
    Ok((core, bases))
}

fn require_order3_mrank2<T: Scalar>(a: &DenseTensor<T>, tol: f64) -> Result<MlRank> {
    if a.order() != 3 {
        return dim_err(format!("expected an order-3 tensor, got order {}", a.order()));
    }
    let mlrank = a.mrank(tol);
    if !mlrank.all_at_most(2) {
        return arg_err(format!("multilinear rank {mlrank} exceeds (2,2,2)"));
    }
    Ok(mlrank)
}

/// `Δ` of a tensor with `rank_⊞ ≤ (2,2,2)`, evaluated on its compression to
/// orthonormal coordinates of the supporting subspaces.
///
/// Exact mode compresses with a non-orthogonal pivot basis `Bᵢ` and corrects by
/// `∏ det(BᵢᵀBᵢ)`, which is what an orthonormalization of `Bᵢ` would contribute.
pub fn delta_extended<T: Scalar>(a: &DenseTensor<T>, tol: f64) -> Result<T> {
    let mlrank = require_order3_mrank2(a, tol)?;
    if mlrank.ranks().iter().any(|&r| r < 2) {
        return Ok(T::zero());
    }
    let (core, bases) = compressed_core(a, tol)?;
    let mut d = delta(&core)?;
    for b in &bases {
        d = d * b.transpose().matmul(b)?.det()?;
    }
    Ok(d)
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeneralClassification<T> {
    Classified(OrbitReport<T>),
    /// `rank_⊞` exceeds `(2,2,2)` in some mode.
    Unclassified { mlrank: MlRank },
}

impl<T: Scalar> GeneralClassification<T> {
    pub fn class(&self) -> Option<OrbitClass> {
        match self {
            GeneralClassification::Classified(r) => Some(r.class),
            GeneralClassification::Unclassified { .. } => None,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            GeneralClassification::Classified(r) => r.to_json(),
            GeneralClassification::Unclassified { mlrank } => json!({
                "class": null,
                "unclassified": "multilinear rank exceeds (2,2,2)",
                "mlrank": mlrank,
            }),
        }
    }
}

/// Orbit type of an order-3 tensor of any shape with `rank_⊞ ≤ (2,2,2)`.
pub fn classify_general<T: Scalar>(a: &DenseTensor<T>, tol: f64) -> Result<GeneralClassification<T>> {
    if a.order() != 3 {
        return dim_err(format!("expected an order-3 tensor, got order {}", a.order()));
    }
    if a.shape() == [2, 2, 2] {
        return classify222(a, tol).map(GeneralClassification::Classified);
    }
    let mlrank = a.mrank(tol);
    if !mlrank.all_at_most(2) {
        return Ok(GeneralClassification::Unclassified { mlrank });
    }
    if mlrank.is_zero() {
        return Ok(GeneralClassification::Classified(OrbitReport::new(
            OrbitClass::D0,
            T::zero(),
            mlrank,
        )));
    }
    let d = delta_extended(a, tol)?;
    let sign = d.sign_rel(a.norm().powi(4), tol);
    let class = OrbitClass::from_invariants(&mlrank, sign)?;
    Ok(GeneralClassification::Classified(OrbitReport::new(class, d, mlrank)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Row {
    pub class: OrbitClass,
    pub sign_delta: Sign,
    pub mlrank: MlRank,
    pub outer_rank: usize,
    pub border_rank: usize,
    /// Terms in an explicit decomposition that was evaluated and matched.
    pub certified_terms: usize,
}

/// Recomputes the orbit table from the canonical arrays in exact arithmetic.
pub fn reproduce_table1() -> Result<Vec<Table1Row>> {
    use crate::scalar::Rational;
    OrbitClass::ALL
        .iter()
        .map(|&c| {
            let a = c.canonical::<Rational>();
            let r = classify222(&a, 0.0)?;
            let cert = c.cp_certificate::<Rational>();
            if cert.evaluate()? != a {
                return Err(TensorError::InvalidArgument(format!("decomposition of {c} does not evaluate to it")));
            }
            Ok(Table1Row {
                class: r.class,
                sign_delta: r.delta.sign_rel(0.0, 0.0),
                mlrank: r.mlrank,
                outer_rank: r.outer_rank,
                border_rank: r.border_rank,
                certified_terms: cert.len(),
            })
        })
        .collect()
}

pub fn table1_markdown(rows: &[Table1Row]) -> String {
    let mut s = String::from("| class | A1 | A2 | sign(Δ) | rank_⊞ | rank_⊗ | border rank |\n");
    s.push_str("|---|---|---|---|---|---|---|\n");
    for r in rows {
        let [a1, a2] = r.class.slab_entries();
        let fmt = |m: [i64; 4]| format!("[{} {}; {} {}]", m[0], m[1], m[2], m[3]);
        s.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} | {} |\n",
            r.class,
            fmt(a1),
            fmt(a2),
            r.sign_delta,
            r.mlrank,
            r.outer_rank,
            r.border_rank
        ));
    }
    s
}
