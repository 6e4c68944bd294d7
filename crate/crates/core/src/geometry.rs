//! Embeddings, generalized volumes, Cayley–Menger determinants, the winding
//! number oracle and the edge-collapse perturbation for complex polyhedra.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Num, One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chains::{Chain, ChainError, Vertex};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("vertex {0} has no coordinates")]
    MissingVertex(Vertex),
    #[error("expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("chain is not a cycle; its volume depends on the base point")]
    NotACycle,
    #[error("no length for the pair ({0}, {1})")]
    MissingLength(Vertex, Vertex),
    #[error("chain of dimension {chain} cannot be measured in R^{ambient}")]
    WrongChainDimension { chain: usize, ambient: usize },
    #[error("neighbor list is empty")]
    NoNeighbors,
    #[error(transparent)]
    Chain(#[from] ChainError),
}

/// Coordinate field of an embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Field {
    ExactRational,
    Float,
    ComplexFloat,
}

/// Scalars an embedding can take values in.
pub trait Scalar: Clone + Debug + PartialEq + Num + Neg<Output = Self> + Send + Sync {
    const FIELD: Field;
    /// Size used for pivot selection.
    fn magnitude(&self) -> f64;
    fn from_rational(r: &BigRational) -> Self;
    fn from_usize(k: usize) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(k)))
    }
}

impl Scalar for BigRational {
    const FIELD: Field = Field::ExactRational;
    fn magnitude(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            crate::polyalg::to_f64(self).abs().max(f64::MIN_POSITIVE)
        }
    }
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
}

impl Scalar for f64 {
    const FIELD: Field = Field::Float;
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn from_rational(r: &BigRational) -> Self {
        crate::polyalg::to_f64(r)
    }
}

impl Scalar for Complex64 {
    const FIELD: Field = Field::ComplexFloat;
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn from_rational(r: &BigRational) -> Self {
        Complex64::new(crate::polyalg::to_f64(r), 0.0)
    }
}

/// Map from vertices to points of `F^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding<T> {
    dim: usize,
    coords: BTreeMap<Vertex, Vec<T>>,
}

pub type ExactEmbedding = Embedding<BigRational>;
pub type FloatEmbedding = Embedding<f64>;
pub type ComplexEmbedding = Embedding<Complex64>;

impl<T: Scalar> Embedding<T> {
    pub fn new(dim: usize) -> Self {
        Embedding { dim, coords: BTreeMap::new() }
    }

    pub fn from_points(dim: usize, points: impl IntoIterator<Item = (Vertex, Vec<T>)>) -> Result<Self, GeometryError> {
        let mut e = Self::new(dim);
        for (v, p) in points {
            e.insert(v, p)?;
        }
        Ok(e)
    }

    pub fn insert(&mut self, v: Vertex, point: Vec<T>) -> Result<(), GeometryError> {
        if point.len() != self.dim {
            return Err(GeometryError::DimensionMismatch { expected: self.dim, got: point.len() });
        }
        self.coords.insert(v, point);
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn field(&self) -> Field {
        T::FIELD
    }

    pub fn point(&self, v: Vertex) -> Result<&[T], GeometryError> {
        self.coords.get(&v).map(Vec::as_slice).ok_or(GeometryError::MissingVertex(v))
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.coords.keys().copied()
    }

    pub fn points(&self) -> impl Iterator<Item = (Vertex, &[T])> + '_ {
        self.coords.iter().map(|(v, p)| (*v, p.as_slice()))
    }

    pub fn covers(&self, z: &Chain) -> Result<(), GeometryError> {
        match z.vertices().into_iter().find(|v| !self.coords.contains_key(v)) {
            Some(v) => Err(GeometryError::MissingVertex(v)),
            None => Ok(()),
        }
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Embedding<U> {
        Embedding { dim: self.dim, coords: self.coords.iter().map(|(v, p)| (*v, p.iter().map(&f).collect())).collect() }
    }

    /// Squared lengths of the given edges.
    pub fn lengths(&self, edges: impl IntoIterator<Item = (Vertex, Vertex)>) -> Result<LengthAssignment<T>, GeometryError> {
        let mut out = LengthAssignment::new();
        for (u, v) in edges {
            out.insert(u, v, squared_length(self, u, v)?);
        }
        Ok(out)
    }
}

impl ExactEmbedding {
    pub fn to_float(&self) -> FloatEmbedding {
        self.map(|x| crate::polyalg::to_f64(x))
    }

    pub fn from_integers(dim: usize, points: impl IntoIterator<Item = (Vertex, Vec<i64>)>) -> Self {
        let mut e = Self::new(dim);
        for (v, p) in points {
            e.insert(v, p.into_iter().map(|x| BigRational::from_integer(BigInt::from(x))).collect())
                .expect("consistent dimensions");
        }
        e
    }
}

impl FloatEmbedding {
    pub fn to_complex(&self) -> ComplexEmbedding {
        self.map(|x| Complex64::new(*x, 0.0))
    }
}

/// Squared lengths keyed by unordered vertex pairs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LengthAssignment<T> {
    map: BTreeMap<(Vertex, Vertex), T>,
}

fn key(u: Vertex, v: Vertex) -> (Vertex, Vertex) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

impl<T: Clone> LengthAssignment<T> {
    pub fn new() -> Self {
        LengthAssignment { map: BTreeMap::new() }
    }

    pub fn insert(&mut self, u: Vertex, v: Vertex, l: T) {
        self.map.insert(key(u, v), l);
    }

    pub fn get(&self, u: Vertex, v: Vertex) -> Option<&T> {
        self.map.get(&key(u, v))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(Vertex, Vertex), &T)> {
        self.map.iter()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

impl<T: Clone> FromIterator<((Vertex, Vertex), T)> for LengthAssignment<T> {
    fn from_iter<I: IntoIterator<Item = ((Vertex, Vertex), T)>>(iter: I) -> Self {
        let mut a = Self::new();
        for ((u, v), l) in iter {
            a.insert(u, v, l);
        }
        a
    }
}

/// `Σ (x_u − x_v)²`, bilinear in the complex case.
pub fn squared_length<T: Scalar>(p: &Embedding<T>, u: Vertex, v: Vertex) -> Result<T, GeometryError> {
    let (a, b) = (p.point(u)?, p.point(v)?);
    Ok(a.iter().zip(b).fold(T::zero(), |acc, (x, y)| {
        let d = x.clone() - y.clone();
        acc + d.clone() * d
    }))
}

/// Determinant by Gaussian elimination with largest-magnitude pivots.
pub fn determinant<T: Scalar>(mut m: Vec<Vec<T>>) -> T {
    let n = m.len();
    let mut det = T::one();
    for k in 0..n {
        let pivot = (k..n)
            .filter(|&i| !m[i][k].is_zero())
            .max_by(|&a, &b| m[a][k].magnitude().total_cmp(&m[b][k].magnitude()));
        let Some(p) = pivot else { return T::zero() };
        if p != k {
            m.swap(p, k);
            det = -det;
        }
        let pkk = m[k][k].clone();
        det = det * pkk.clone();
        for i in k + 1..n {
            if m[i][k].is_zero() {
                continue;
            }
            let f = m[i][k].clone() / pkk.clone();
            for j in k + 1..n {
                let t = f.clone() * m[k][j].clone();
                m[i][j] = m[i][j].clone() - t;
            }
        }
    }
    det
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// Generalized volume `Σ q · V([O P(v_1) … P(v_n)])` of an `(n−1)`-cycle in `F^n`.
pub fn generalized_volume<T: Scalar>(z: &Chain, p: &Embedding<T>, base: Option<&[T]>) -> Result<T, GeometryError> {
    let n = p.dimension();
    if z.is_zero() {
        return Ok(T::zero());
    }
    if z.dimension() + 1 != n {
        return Err(GeometryError::WrongChainDimension { chain: z.dimension(), ambient: n });
    }
    if !z.is_cycle() {
        return Err(GeometryError::NotACycle);
    }
    signed_cone_volume(z, p, base)
}

/// Cone volume over `base` of any chain; equals the generalized volume on cycles.
pub fn signed_cone_volume<T: Scalar>(z: &Chain, p: &Embedding<T>, base: Option<&[T]>) -> Result<T, GeometryError> {
    let n = p.dimension();
    p.covers(z)?;
    let origin: Vec<T> = match base {
        Some(o) if o.len() != n => return Err(GeometryError::DimensionMismatch { expected: n, got: o.len() }),
        Some(o) => o.to_vec(),
        None => vec![T::zero(); n],
    };
    let mut total = T::zero();
    for (s, q) in z.terms() {
        let rows: Vec<Vec<T>> = s
            .iter()
            .map(|&v| {
                let x = p.point(v).expect("covered");
                x.iter().zip(&origin).map(|(a, b)| a.clone() - b.clone()).collect()
            })
            .collect();
        let d = determinant(rows);
        total = total + d * T::from_rational(&BigRational::from_integer(BigInt::from(q)));
    }
    Ok(total / T::from_usize(factorial(n)))
}

/// Bordered Cayley–Menger determinant of the squared distance matrix `l`.
pub fn cayley_menger<T: Scalar>(l: &[Vec<T>]) -> T {
    let k = l.len();
    let mut m = vec![vec![T::zero(); k + 1]; k + 1];
    for i in 1..=k {
        m[0][i] = T::one();
        m[i][0] = T::one();
        for j in 1..=k {
            m[i][j] = l[i - 1][j - 1].clone();
        }
    }
    determinant(m)
}

/// Cayley–Menger determinant of a vertex tuple under a length assignment.
pub fn cayley_menger_of<T: Scalar>(points: &[Vertex], lengths: &LengthAssignment<T>) -> Result<T, GeometryError> {
    Ok(cayley_menger(&distance_matrix(points, lengths)?))
}

fn distance_matrix<T: Scalar>(points: &[Vertex], lengths: &LengthAssignment<T>) -> Result<Vec<Vec<T>>, GeometryError> {
    let k = points.len();
    let mut l = vec![vec![T::zero(); k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let x = lengths.get(points[i], points[j]).ok_or(GeometryError::MissingLength(points[i], points[j]))?;
            l[i][j] = x.clone();
            l[j][i] = x.clone();
        }
    }
    Ok(l)
}

/// `(−1)^{n+1} / (2^n (n!)²)`, the factor turning a CM determinant of
/// `n+1` points into the squared volume.
pub fn cm_volume_factor(n: usize) -> BigRational {
    let f = BigInt::from(factorial(n));
    let den = (BigInt::one() << n) * &f * &f;
    let sign = if n % 2 == 1 { 1 } else { -1 };
    BigRational::new(BigInt::from(sign), den)
}

/// Squared volume of an `n`-simplex from its squared distance matrix.
pub fn simplex_volume_sq<T: Scalar>(n: usize, l: &[Vec<T>]) -> Result<T, GeometryError> {
    if l.len() != n + 1 {
        return Err(GeometryError::DimensionMismatch { expected: n + 1, got: l.len() });
    }
    Ok(cayley_menger(l) * T::from_rational(&cm_volume_factor(n)))
}

/// Monte-Carlo estimate of the generalized volume.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindingEstimate {
    pub estimate: f64,
    pub standard_error: f64,
    pub samples: usize,
    /// Samples dropped after exhausting direction retries.
    pub skipped: usize,
}

const RAY_TOLERANCE: f64 = 1e-12;
const RAY_RETRIES: usize = 100;

enum Crossing {
    Miss,
    Hit(i64),
    Degenerate,
}

/// Estimates `∫ λ(x) dx` over the vertex bounding box inflated by 10%, where
/// `λ(x)` is the signed number of crossings of a random ray from `x`.
pub fn winding_volume(z: &Chain, p: &FloatEmbedding, samples: usize, seed: u64) -> Result<WindingEstimate, GeometryError> {
    let n = p.dimension();
    if z.is_zero() || samples == 0 {
        return Ok(WindingEstimate { estimate: 0.0, standard_error: 0.0, samples, skipped: 0 });
    }
    if z.dimension() + 1 != n {
        return Err(GeometryError::WrongChainDimension { chain: z.dimension(), ambient: n });
    }
    p.covers(z)?;
    let facets: Vec<(Vec<Vec<f64>>, i64)> = z
        .terms()
        .map(|(s, q)| (s.iter().map(|&v| p.point(v).expect("covered").to_vec()).collect(), q))
        .collect();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for v in z.vertices() {
        for (i, x) in p.point(v)?.iter().enumerate() {
            lo[i] = lo[i].min(*x);
            hi[i] = hi[i].max(*x);
        }
    }
    for i in 0..n {
        let pad = 0.1 * (hi[i] - lo[i]).max(1e-9) / 2.0;
        lo[i] -= pad;
        hi[i] += pad;
    }
    let box_volume: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();

    let per_sample = |i: usize| -> Option<i64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let x: Vec<f64> = (0..n).map(|k| rng.gen_range(lo[k]..hi[k])).collect();
        'retry: for _ in 0..RAY_RETRIES {
            let d = random_direction(&mut rng, n);
            let mut lambda = 0;
            for (pts, q) in &facets {
                match ray_crossing(&x, &d, pts) {
                    Crossing::Miss => {}
                    Crossing::Hit(s) => lambda += s * q,
                    Crossing::Degenerate => continue 'retry,
                }
            }
            return Some(lambda);
        }
        None
    };
    let values: Vec<Option<i64>> = (0..samples).into_par_iter().map(per_sample).collect();
    let kept: Vec<i64> = values.iter().flatten().copied().collect();
    let skipped = samples - kept.len();
    let m = kept.len().max(1) as f64;
    let sum: i64 = kept.iter().sum();
    let sum_sq: i64 = kept.iter().map(|x| x * x).sum();
    let mean = sum as f64 / m;
    let var = if kept.len() > 1 { (sum_sq as f64 - m * mean * mean) / (m - 1.0) } else { 0.0 };
    Ok(WindingEstimate {
        estimate: box_volume * mean,
        standard_error: box_volume * (var.max(0.0) / m).sqrt(),
        samples,
        skipped,
    })
}

fn random_direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let d: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r2: f64 = d.iter().map(|x| x * x).sum();
        if r2 > 1e-6 && r2 <= 1.0 {
            let r = r2.sqrt();
            return d.into_iter().map(|x| x / r).collect();
        }
    }
}

/// Intersects the ray `x + t d` (t > 0) with the simplex spanned by `pts`.
fn ray_crossing(x: &[f64], d: &[f64], pts: &[Vec<f64>]) -> Crossing {
    let n = x.len();
    // columns: p_i − p_0 (i = 1..n−1), −d ; unknowns (s_1..s_{n−1}, t)
    let mut a = nalgebra::DMatrix::<f64>::zeros(n, n);
    for r in 0..n {
        for c in 1..n {
            a[(r, c - 1)] = pts[c][r] - pts[0][r];
        }
        a[(r, n - 1)] = -d[r];
    }
    let b = nalgebra::DVector::from_iterator(n, (0..n).map(|r| x[r] - pts[0][r]));
    let det = a.determinant();
    let scale: f64 = a.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
    if det.abs() <= RAY_TOLERANCE * scale.powi(n as i32) {
        // ray parallel to the facet plane
        return Crossing::Miss;
    }
    let Some(sol) = a.lu().solve(&b) else { return Crossing::Miss };
    let t = sol[n - 1];
    if t <= 0.0 {
        return Crossing::Miss;
    }
    let mut bary: Vec<f64> = (0..n - 1).map(|i| sol[i]).collect();
    bary.push(1.0 - bary.iter().sum::<f64>());
    if bary.iter().any(|&s| s < -RAY_TOLERANCE) {
        return Crossing::Miss;
    }
    if bary.iter().any(|&s| s.abs() <= RAY_TOLERANCE) {
        return Crossing::Degenerate;
    }
    // orientation of [p_1 − p_0, …, p_{n−1} − p_0, d] relative to the facet
    let mut m = nalgebra::DMatrix::<f64>::zeros(n, n);
    for r in 0..n {
        for c in 1..n {
            m[(r, c - 1)] = pts[c][r] - pts[0][r];
        }
        m[(r, n - 1)] = d[r];
    }
    let orient = m.determinant().signum() as i64;
    // the cone over x of an outward-facing facet has positive volume; with
    // the direction appended last this comes out as (−1)^{n+1}·orient
    Crossing::Hit(if n % 2 == 0 { -orient } else { orient })
}

/// Moves `P(u)` so that `l_{u v_j}` vanishes for one neighbor while every
/// other squared length changes by at most `3ε`, `ε = max_i |l_{u v_i}(P)|`.
/// Returns the index `j` (0-based into `neighbors`) and the new embedding.
pub fn collapse_edge_perturbation(
    p: &ComplexEmbedding,
    u: Vertex,
    neighbors: &[Vertex],
) -> Result<(usize, ComplexEmbedding), GeometryError> {
    if neighbors.is_empty() {
        return Err(GeometryError::NoNeighbors);
    }
    let pu = p.point(u)?.to_vec();
    let mut xis = Vec::with_capacity(neighbors.len());
    for &v in neighbors {
        let pv = p.point(v)?;
        let xi: Vec<Complex64> = pv.iter().zip(&pu).map(|(a, b)| a - b).collect();
        if bilinear(&xi, &xi) == Complex64::zero() {
            return Ok((xis.len(), p.clone()));
        }
        xis.push(xi);
    }
    let hermitian = |x: &[Complex64]| x.iter().map(|c| c.norm_sqr()).sum::<f64>();
    let (j, xi) = xis
        .iter()
        .enumerate()
        .max_by(|a, b| hermitian(a.1).total_cmp(&hermitian(b.1)))
        .expect("nonempty");
    let h2 = hermitian(xi);
    let lambda = bilinear(xi, xi);
    // smaller root of conj(λ) t² − 2h² t + λ = 0, product form
    let disc = (h2 * h2 - lambda.norm_sqr()).max(0.0).sqrt();
    let kappa = lambda / (h2 + disc);
    let mut out = p.clone();
    let moved: Vec<Complex64> = pu.iter().zip(xi).map(|(a, x)| a + kappa * x.conj()).collect();
    out.insert(u, moved)?;
    Ok((j, out))
}

fn bilinear(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Converts an `f64` to the exact rational it represents.
pub fn rational_from_f64(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

/// Nearest rational with denominator `den`.
pub fn round_to_rational(x: f64, den: i64) -> BigRational {
    BigRational::new(BigInt::from((x * den as f64).round() as i64), BigInt::from(den))
}

pub fn to_f64_lossy(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or_else(|| crate::polyalg::to_f64(x))
}
