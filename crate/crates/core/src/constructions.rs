//! Explicit tensor families whose rank jumps in the limit.
//!
//! Each sequence term ships with a decomposition ([`RankOneSum`]) that
//! evaluates to it, so rank upper bounds are certified rather than trusted.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{arg_err, dim_err, Result};
use crate::linalg::Matrix;
use crate::rank222::{classify_general, OrbitClass};
use crate::scalar::Scalar;
use crate::tensor::{outer_product, DenseTensor, MultilinearMap, RankOneSum, DEFAULT_RANK_TOL};

/// How a rank label was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Provenance {
    /// Computed by classifying the compressed 2×2×2 core.
    #[serde(rename = "verified-in-2x2x2")]
    Verified,
    /// Taken from a theorem (direct-sum additivity, diagonal rank) without computation.
    #[serde(rename = "asserted-from-theorem")]
    Asserted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RankClaim {
    pub rank: usize,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceTerm<T> {
    pub n: u64,
    pub tensor: DenseTensor<T>,
    pub witness: RankOneSum<T>,
}

type TermFn<T> = dyn Fn(u64) -> Result<(DenseTensor<T>, RankOneSum<T>)> + Send + Sync;

/// A sequence `n ↦ Aₙ` together with its limit and rank labels.
#[derive(Clone)]
pub struct SequenceHandle<T> {
    pub name: String,
    pub limit: DenseTensor<T>,
    /// Certified bound `rank(Aₙ) ≤ term_rank_bound` (size of every witness).
    pub term_rank_bound: usize,
    /// `None` when the rank of the limit is not known.
    pub limit_rank: Option<RankClaim>,
    term: Arc<TermFn<T>>,
}

impl<T> fmt::Debug for SequenceHandle<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SequenceHandle")
            .field("name", &self.name)
            .field("term_rank_bound", &self.term_rank_bound)
            .field("limit_rank", &self.limit_rank)
            .finish_non_exhaustive()
    }
}

impl<T: Scalar> SequenceHandle<T> {
    pub fn term(&self, n: u64) -> Result<SequenceTerm<T>> {
        if n == 0 {
            return arg_err("sequence index starts at 1");
        }
        let (tensor, witness) = (self.term)(n)?;
        Ok(SequenceTerm { n, tensor, witness })
    }

    pub fn shape(&self) -> &[usize] {
        self.limit.shape()
    }
}

fn unit<T: Scalar>(i: usize, d: usize) -> Vec<T> {
    let mut v = vec![T::zero(); d];
    v[i] = T::one();
    v
}

fn axpy<T: Scalar>(x: &[T], a: &T, y: &[T]) -> Vec<T> {
    x.iter().zip(y).map(|(p, q)| p.clone() + a.clone() * q.clone()).collect()
}

/// Rank of an order-3 tensor whose supporting core is 2×2×2, by classification.
fn verified_rank<T: Scalar>(limit: &DenseTensor<T>) -> Option<RankClaim> {
    if limit.order() != 3 {
        return None;
    }
    let class = classify_general(limit, DEFAULT_RANK_TOL).ok()?.class()?;
    Some(RankClaim {
        rank: class.outer_rank(),
        provenance: Provenance::Verified,
    })
}

fn claim_rank<T: Scalar>(limit: &DenseTensor<T>, asserted: usize) -> Option<RankClaim> {
    verified_rank(limit).or(Some(RankClaim {
        rank: asserted,
        provenance: Provenance::Asserted,
    }))
}

fn check_pairs<T: Scalar>(x: &[Vec<T>; 3], y: &[Vec<T>; 3]) -> Result<()> {
    for i in 0..3 {
        if x[i].is_empty() || x[i].len() != y[i].len() {
            return dim_err(format!(
                "mode {i}: x has dimension {}, y has {}",
                x[i].len(),
                y[i].len()
            ));
        }
    }
    Ok(())
}

/// `x₁⊗x₂⊗y₃ + x₁⊗y₂⊗x₃ + y₁⊗x₂⊗x₃`.
pub fn dsl_tensor<T: Scalar>(x: &[Vec<T>; 3], y: &[Vec<T>; 3]) -> Result<DenseTensor<T>> {
    check_pairs(x, y)?;
    let a = outer_product(&[x[0].clone(), x[1].clone(), y[2].clone()])?;
    let b = outer_product(&[x[0].clone(), y[1].clone(), x[2].clone()])?;
    let c = outer_product(&[y[0].clone(), x[1].clone(), x[2].clone()])?;
    a.add(&b)?.add(&c)
}

/// `(e₁, e₂)` in every mode of ℝ^{d×d×d}.
pub fn unit_pairs<T: Scalar>(d: usize) -> ([Vec<T>; 3], [Vec<T>; 3]) {
    let x = unit::<T>(0, d);
    let y = unit::<T>(1, d);
    ([x.clone(), x.clone(), x], [y.clone(), y.clone(), y])
}

fn dsl_term<T: Scalar>(x: &[Vec<T>; 3], y: &[Vec<T>; 3], n: u64) -> Result<(DenseTensor<T>, RankOneSum<T>)> {
    let nn = T::from_i64(n as i64);
    let inv = T::one() / nn.clone();
    let shape: Vec<usize> = x.iter().map(Vec::len).collect();
    let mut w = RankOneSum::new(shape);
    w.push(nn.clone(), (0..3).map(|i| axpy(&x[i], &inv, &y[i])).collect())?;
    w.push(-nn, x.to_vec())?;
    Ok((w.evaluate()?, w))
}

/// `Aₙ = n(x₁ + y₁/n)⊗(x₂ + y₂/n)⊗(x₃ + y₃/n) − n x₁⊗x₂⊗x₃ → dsl_tensor(x, y)`.
pub fn dsl_sequence<T: Scalar>(x: &[Vec<T>; 3], y: &[Vec<T>; 3]) -> Result<SequenceHandle<T>> {
    let limit = dsl_tensor(x, y)?;
    let (x, y) = (x.clone(), y.clone());
    Ok(SequenceHandle {
        name: "dsl".into(),
        limit_rank: claim_rank(&limit, 3),
        limit,
        term_rank_bound: 2,
        term: Arc::new(move |n| dsl_term(&x, &y, n)),
    })
}

/// Constants `(C₁, C₂)` with `‖Aₙ − A‖_F ≤ C₁/n + C₂/n²` along [`dsl_sequence`].
pub fn dsl_error_constants<T: Scalar>(x: &[Vec<T>; 3], y: &[Vec<T>; 3]) -> Result<(f64, f64)> {
    check_pairs(x, y)?;
    let op = |a: &Vec<T>, b: &Vec<T>, c: &Vec<T>| outer_product(&[a.clone(), b.clone(), c.clone()]);
    let c1 = op(&y[0], &y[1], &x[2])?
        .add(&op(&y[0], &x[1], &y[2])?)?
        .add(&op(&x[0], &y[1], &y[2])?)?
        .norm();
    let c2 = op(&y[0], &y[1], &y[2])?.norm();
    Ok((c1, c2))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeibnizSpec<T> {
    pub k: usize,
    pub exponents: Vec<usize>,
    pub x: Vec<T>,
    pub y: Vec<Vec<T>>,
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

impl<T: Scalar> LeibnizSpec<T> {
    pub fn new(k: usize, exponents: Vec<usize>, x: Vec<T>, y: Vec<Vec<T>>) -> Result<Self> {
        let s = Self { k, exponents, x, y };
        s.validate()?;
        Ok(s)
    }

    /// `x = e₁` and `yᵢ = e_{i+1}` in ℝ^{j+1}.
    pub fn unit(k: usize, exponents: Vec<usize>) -> Result<Self> {
        let d = exponents.len() + 1;
        let y = (1..d).map(|i| unit(i, d)).collect();
        Self::new(k, exponents, unit(0, d), y)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 3 {
            return arg_err(format!("order k = {} must be at least 3", self.k));
        }
        if self.exponents.is_empty() || self.exponents.contains(&0) {
            return arg_err("exponents must be a nonempty list of positive integers");
        }
        if self.total() > self.k {
            return arg_err(format!("exponent sum {} exceeds the order {}", self.total(), self.k));
        }
        if self.y.len() != self.exponents.len() {
            return arg_err(format!(
                "{} direction vectors for {} exponents",
                self.y.len(),
                self.exponents.len()
            ));
        }
        if self.x.is_empty() || self.y.iter().any(|v| v.len() != self.x.len()) {
            return dim_err("base and direction vectors must share one positive dimension");
        }
        Ok(())
    }

    pub fn total(&self) -> usize {
        self.exponents.iter().sum()
    }

    /// `k! / ((k−a)! a₁! ⋯ a_j!)`.
    pub fn term_count(&self) -> u128 {
        self.exponents
            .iter()
            .fold(factorial(self.k) / factorial(self.k - self.total()), |acc, &a| acc / factorial(a))
    }

    pub fn quotient_term_count(&self) -> usize {
        self.exponents.iter().map(|a| a + 1).product()
    }

    fn shape(&self) -> Vec<usize> {
        vec![self.x.len(); self.k]
    }
}

/// All distinct words with the given letter multiplicities, in lexicographic order.
fn multiset_words(counts: &mut [usize], word: &mut Vec<usize>, len: usize, out: &mut Vec<Vec<usize>>) {
    if word.len() == len {
        out.push(word.clone());
        return;
    }
    for letter in 0..counts.len() {
        if counts[letter] > 0 {
            counts[letter] -= 1;
            word.push(letter);
            multiset_words(counts, word, len, out);
            word.pop();
            counts[letter] += 1;
        }
    }
}

/// `L_k(a₁,…,a_j)`: sum over every distinct placement of `aᵢ` copies of `yᵢ`
/// and `k − a` copies of `x` across the `k` modes.
pub fn leibniz_tensor<T: Scalar>(spec: &LeibnizSpec<T>) -> Result<DenseTensor<T>> {
    spec.validate()?;
    let mut counts = vec![spec.k - spec.total()];
    counts.extend_from_slice(&spec.exponents);
    let mut words = Vec::new();
    multiset_words(&mut counts, &mut Vec::new(), spec.k, &mut words);
    let mut acc = DenseTensor::zeros(&spec.shape())?;
    for w in words {
        let vectors: Vec<Vec<T>> = w
            .iter()
            .map(|&l| if l == 0 { spec.x.clone() } else { spec.y[l - 1].clone() })
            .collect();
        acc = acc.add(&outer_product(&vectors)?)?;
    }
    Ok(acc)
}

fn binomial(n: usize, k: usize) -> i64 {
    (factorial(n) / (factorial(k) * factorial(n - k))) as i64
}

/// Forward-difference quotient of the Veronese curve `V_k(v) = v^{⊗k}` whose
/// limit as `t → 0` is [`leibniz_tensor`]:
/// `Σ_m ∏ᵢ (−1)^{aᵢ−mᵢ} C(aᵢ, mᵢ) · V_k(x + t Σ mᵢ yᵢ) / (∏ aᵢ! · t^a)`,
/// one symmetric rank-1 term per `m ∈ ∏ [0, aᵢ]`.
pub fn leibniz_quotient_terms<T: Scalar>(spec: &LeibnizSpec<T>, t: &T) -> Result<RankOneSum<T>> {
    spec.validate()?;
    if t.is_zero() {
        return arg_err("difference step t must be nonzero");
    }
    let mut denom = T::one();
    for &a in &spec.exponents {
        denom = denom * T::from_i64(factorial(a) as i64);
        for _ in 0..a {
            denom = denom * t.clone();
        }
    }
    let mut out = RankOneSum::new(spec.shape());
    let mut m = vec![0usize; spec.exponents.len()];
    let bounds: Vec<usize> = spec.exponents.iter().map(|a| a + 1).collect();
    loop {
        let mut coef = T::one();
        let mut point = spec.x.clone();
        for (i, (&mi, &ai)) in m.iter().zip(&spec.exponents).enumerate() {
            let c = T::from_i64(binomial(ai, mi));
            coef = coef * if (ai - mi) % 2 == 1 { -c } else { c };
            point = axpy(&point, &(T::from_i64(mi as i64) * t.clone()), &spec.y[i]);
        }
        out.push(coef / denom.clone(), vec![point; spec.k])?;
        if !crate::tensor::next_index(&mut m, &bounds) {
            break;
        }
    }
    Ok(out)
}

pub fn leibniz_quotient<T: Scalar>(spec: &LeibnizSpec<T>, t: &T) -> Result<DenseTensor<T>> {
    leibniz_quotient_terms(spec, t)?.evaluate()
}

/// Difference quotients at `t = 1/n`.
pub fn leibniz_sequence<T: Scalar>(spec: &LeibnizSpec<T>) -> Result<SequenceHandle<T>> {
    let limit = leibniz_tensor(spec)?;
    let s = spec.clone();
    let bound = spec.quotient_term_count();
    let label = spec.exponents.iter().map(ToString::to_string).collect::<Vec<_>>().join(",");
    Ok(SequenceHandle {
        name: format!("leibniz L{}({label})", spec.k),
        limit_rank: verified_rank(&limit),
        limit,
        term_rank_bound: bound,
        term: Arc::new(move |n| {
            let w = leibniz_quotient_terms(&s, &(T::one() / T::from_i64(n as i64)))?;
            Ok((w.evaluate()?, w))
        }),
    })
}

/// `Σⱼ x_j^{(1)} ⊗ … ⊗ x_j^{(k)}` from `k` lists of `r` independent vectors.
pub fn build_diag_rank<T: Scalar>(lists: &[Vec<Vec<T>>], tol: f64) -> Result<DenseTensor<T>> {
    diag_rank_terms(lists, tol)?.evaluate()
}

fn diag_rank_terms<T: Scalar>(lists: &[Vec<Vec<T>>], tol: f64) -> Result<RankOneSum<T>> {
    let r = lists.first().map_or(0, Vec::len);
    if lists.is_empty() || r == 0 || lists.iter().any(|l| l.len() != r) {
        return arg_err("need k nonempty lists of r vectors each");
    }
    for (m, l) in lists.iter().enumerate() {
        let mat = Matrix::from_columns(l)?;
        if mat.rank(tol) != r {
            return arg_err(format!("mode {m}: the {r} vectors are linearly dependent"));
        }
    }
    let shape: Vec<usize> = lists.iter().map(|l| l[0].len()).collect();
    let mut out = RankOneSum::new(shape);
    for j in 0..r {
        out.push(T::one(), lists.iter().map(|l| l[j].clone()).collect())?;
    }
    Ok(out)
}

/// Identity tensor `Σⱼ eⱼ⊗eⱼ⊗eⱼ` of rank `r` in ℝ^{r×r×r}, as a decomposition.
fn identity_terms<T: Scalar>(r: usize) -> Result<RankOneSum<T>> {
    let basis: Vec<Vec<T>> = (0..r).map(|j| unit(j, r)).collect();
    diag_rank_terms(&[basis.clone(), basis.clone(), basis], 0.0)
}

/// `Bₙ = C ⊕ Aₙ ⊕ … ⊕ Aₙ` (`s` copies of the unit dSL term, `C` diagonal of rank `r − 2s`).
/// `rank(Bₙ) ≤ r` while the limit has rank `r + s`.
pub fn gap_sequence<T: Scalar>(r: usize, s: usize) -> Result<SequenceHandle<T>> {
    if s == 0 || r < 2 * s {
        return arg_err(format!("need r >= 2s >= 2, got r = {r}, s = {s}"));
    }
    let c = r - 2 * s;
    let (x, y) = unit_pairs::<T>(2);
    let shape = vec![r; 3];
    let build = move |block: &dyn Fn() -> Result<RankOneSum<T>>| -> Result<RankOneSum<T>> {
        let mut out = RankOneSum::new(vec![r; 3]);
        if c > 0 {
            out.extend(identity_terms::<T>(c)?.place(&[r; 3], &[0; 3])?)?;
        }
        for copy in 0..s {
            let off = c + 2 * copy;
            out.extend(block()?.place(&[r; 3], &[off; 3])?)?;
        }
        Ok(out)
    };
    let limit_block = {
        let d = dsl_tensor(&x, &y)?;
        move || -> Result<RankOneSum<T>> {
            // The limit has no short decomposition; carry it as its nonzero entries.
            let mut w = RankOneSum::new(vec![2; 3]);
            let mut idx = vec![0; 3];
            loop {
                let v = d.get(&idx).clone();
                if !v.is_zero() {
                    w.push(v, idx.iter().map(|&i| unit(i, 2)).collect())?;
                }
                if !crate::tensor::next_index(&mut idx, &[2, 2, 2]) {
                    break;
                }
            }
            Ok(w)
        }
    };
    let limit = build(&limit_block)?.evaluate()?;
    debug_assert_eq!(limit.shape(), shape.as_slice());
    Ok(SequenceHandle {
        name: format!("gap r={r} s={s}"),
        limit_rank: claim_rank(&limit, r + s),
        limit,
        term_rank_bound: r,
        term: Arc::new(move |n| {
            let w = build(&|| Ok(dsl_term(&x, &y, n)?.1))?;
            Ok((w.evaluate()?, w))
        }),
    })
}

/// A rank-`≤ r` sequence in ℝ^{d₁×⋯×d_k} whose limit has rank `r + 1`:
/// a diagonal block of rank `r − 2` next to a unit dSL sequence, lifted by
/// `⊗ e₁` in every mode beyond the third.
pub fn rank_plus_one_instance<T: Scalar>(shape: &[usize], r: usize) -> Result<SequenceHandle<T>> {
    if shape.len() < 3 || shape.iter().any(|&d| d < 2) {
        return arg_err(format!("need order >= 3 and every dimension >= 2, got {shape:?}"));
    }
    let dmin = *shape.iter().min().expect("nonempty");
    if r < 2 || r > dmin {
        return arg_err(format!("need 2 <= r <= {dmin}, got r = {r}"));
    }
    let core_shape = shape[..3].to_vec();
    let extra: Vec<Vec<T>> = shape[3..].iter().map(|&d| unit(0, d)).collect();
    let (x, y) = unit_pairs::<T>(2);
    let offset = vec![r - 2; 3];
    let assemble = move |block: RankOneSum<T>| -> Result<RankOneSum<T>> {
        let mut out = RankOneSum::new(core_shape.clone());
        if r > 2 {
            out.extend(identity_terms::<T>(r - 2)?.place(&core_shape, &[0; 3])?)?;
        }
        out.extend(block.place(&core_shape, &offset)?)?;
        out.lift(&extra)
    };
    let limit_core = dsl_tensor(&x, &y)?;
    let mut limit = assemble(RankOneSum::new(vec![2; 3]))?.evaluate()?;
    let placed = limit_core.place(&shape[..3], &[r - 2; 3])?;
    let mut lifted = placed;
    for u in &shape[3..] {
        lifted = lifted.otimes(&DenseTensor::new(vec![*u], unit(0, *u))?);
    }
    limit = limit.add(&lifted)?;
    Ok(SequenceHandle {
        name: format!("rank-plus-one {shape:?} r={r}"),
        limit_rank: claim_rank(&limit, r + 1),
        limit,
        term_rank_bound: r,
        term: Arc::new(move |n| {
            let w = assemble(dsl_term(&x, &y, n)?.1)?;
            Ok((w.evaluate()?, w))
        }),
    })
}

/// `(G·canonical(class), G)` for a random invertible integer `G` with entries in `[−3, 3]`.
pub fn random_orbit_sample<T: Scalar>(class: OrbitClass, seed: u64) -> (DenseTensor<T>, MultilinearMap<T>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let factors = (0..3)
        .map(|_| loop {
            let m = Matrix::<T>::from_fn(2, 2, |_, _| T::from_i64(rng.random_range(-3..=3)));
            if !m.det().expect("square").is_zero() {
                break m;
            }
        })
        .collect();
    let g = MultilinearMap::new(factors).expect("three factors");
    let a = class.canonical::<T>().mmm(&g).expect("2x2x2 maps");
    (a, g)
}
