//! Rigidity matrices, infinitesimal flexes, numerical flex continuation and
//! the Bellows check, plus the built-in example polyhedra.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::chains::{simplex_boundary, Chain, ChainError, SupportComplex, Vertex};
use crate::geometry::{generalized_volume, squared_length, ExactEmbedding, FloatEmbedding, GeometryError};
use crate::polyalg::ratio;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlexError {
    #[error("configuration is rigid: no nontrivial infinitesimal flex")]
    Rigid,
    #[error("unknown example {0:?}")]
    UnknownExample(String),
    #[error("constructor failed: {0}")]
    Constructor(String),
    #[error("trace is empty")]
    EmptyTrace,
    #[error("vertices span only a {rank}-dimensional affine subspace of R^{n}")]
    DegenerateSpan { rank: usize, n: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Chain(#[from] ChainError),
}

fn vertex_index(k: &SupportComplex) -> BTreeMap<Vertex, usize> {
    k.vertices().enumerate().map(|(i, v)| (v, i)).collect()
}

fn point_vec(p: &FloatEmbedding, v: Vertex) -> Result<&[f64], GeometryError> {
    p.point(v)
}

/// Jacobian of the squared edge lengths: one row per edge of `k` (in the
/// complex's edge order), `n` columns per vertex in ascending vertex order.
pub fn rigidity_matrix(k: &SupportComplex, p: &FloatEmbedding) -> Result<DMatrix<f64>, FlexError> {
    let n = p.dimension();
    let index = vertex_index(k);
    let edges: Vec<(Vertex, Vertex)> = k.edges().collect();
    let mut r = DMatrix::zeros(edges.len(), n * index.len());
    for (row, &(u, v)) in edges.iter().enumerate() {
        let (pu, pv) = (point_vec(p, u)?, point_vec(p, v)?);
        for c in 0..n {
            let d = 2.0 * (pu[c] - pv[c]);
            r[(row, n * index[&u] + c)] = d;
            r[(row, n * index[&v] + c)] = -d;
        }
    }
    Ok(r)
}

/// Infinitesimal translations and rotations as columns, one `n`-block per
/// vertex of `k`.
pub fn trivial_motions(k: &SupportComplex, p: &FloatEmbedding) -> Result<DMatrix<f64>, FlexError> {
    let n = p.dimension();
    let index = vertex_index(k);
    let cols = n * (n + 1) / 2;
    let mut t = DMatrix::zeros(n * index.len(), cols);
    for (&v, &i) in &index {
        let x = point_vec(p, v)?;
        for c in 0..n {
            t[(n * i + c, c)] = 1.0;
        }
        let mut col = n;
        for a in 0..n {
            for b in a + 1..n {
                t[(n * i + a, col)] = x[b];
                t[(n * i + b, col)] = -x[a];
                col += 1;
            }
        }
    }
    Ok(t)
}

/// Right singular vectors of `m` paired with singular values, ascending.
fn right_singular(m: &DMatrix<f64>) -> Vec<(f64, DVector<f64>)> {
    let cols = m.ncols();
    let padded = if m.nrows() < cols {
        let mut x = DMatrix::zeros(cols, cols);
        x.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        x
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested V");
    let mut out: Vec<(f64, DVector<f64>)> =
        svd.singular_values.iter().enumerate().map(|(i, &s)| (s, vt.row(i).transpose())).collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

fn orthonormal_columns(vs: &[DVector<f64>], tol: f64) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let c = q.dot(&w);
                w -= q * c;
            }
        }
        let norm = w.norm();
        if norm > tol {
            out.push(w / norm);
        }
    }
    out
}

/// Infinitesimal flexes of a framework modulo trivial motions.
#[derive(Debug, Clone)]
pub struct FlexSpace {
    pub basis: Vec<DVector<f64>>,
    /// Rank of the trivial-motion space; below `n(n+1)/2` for flat configurations.
    pub trivial_rank: usize,
    pub singular_values: Vec<f64>,
}

impl FlexSpace {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }
}

/// Orthonormal basis of `ker R` with the trivial motions projected out.
/// Singular values below `tol` times the largest count as zero.
pub fn flex_space(k: &SupportComplex, p: &FloatEmbedding, tol: f64) -> Result<FlexSpace, FlexError> {
    let r = rigidity_matrix(k, p)?;
    let sv = right_singular(&r);
    let smax = sv.last().map_or(0.0, |x| x.0).max(f64::MIN_POSITIVE);
    let kernel: Vec<DVector<f64>> = sv.iter().filter(|(s, _)| *s <= tol * smax).map(|(_, v)| v.clone()).collect();
    let t = trivial_motions(k, p)?;
    let tcols: Vec<DVector<f64>> = t.column_iter().map(|c| c.into_owned()).collect();
    let tscale = tcols.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
    let trivial = orthonormal_columns(&tcols, 1e-9 * tscale);
    let n = p.dimension();
    if trivial.len() < n * (n + 1) / 2 {
        eprintln!("warning: trivial motions have rank {} < {}; configuration is flat", trivial.len(), n * (n + 1) / 2);
    }
    let mut all = trivial.clone();
    let before = all.len();
    all.extend(kernel);
    let basis = orthonormal_columns(&all, 1e-6)[before..].to_vec();
    Ok(FlexSpace { basis, trivial_rank: trivial.len(), singular_values: sv.iter().map(|x| x.0).collect() })
}

#[derive(Debug, Clone)]
pub struct TraceOptions {
    pub steps: usize,
    pub step_size: f64,
    /// Corrector tolerance on the constraint residual.
    pub tol: f64,
    pub kernel_tol: f64,
    pub max_halvings: usize,
    /// Steps below this size count as a stall.
    pub min_step_size: f64,
    pub max_corrector_iterations: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions { steps: 50, step_size: 0.02, tol: 1e-12, kernel_tol: 1e-8, max_halvings: 20, min_step_size: 1e-5, max_corrector_iterations: 12 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceStatus {
    Completed,
    Truncated { step: usize, reason: String },
}

/// A sampled flex: parameters are arc lengths in configuration space.
#[derive(Debug, Clone)]
pub struct FlexTrace {
    pub parameters: Vec<f64>,
    pub embeddings: Vec<FloatEmbedding>,
    /// Max `|l_uv(P_t) − l_uv(P_0)|` over edges, per step.
    pub residuals: Vec<f64>,
    pub volumes: Vec<f64>,
    pub status: TraceStatus,
}

impl FlexTrace {
    pub fn len(&self) -> usize {
        self.embeddings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.embeddings.is_empty()
    }

    /// Accepted steps after the initial configuration.
    pub fn accepted_steps(&self) -> usize {
        self.len().saturating_sub(1)
    }
}

/// Pinning rows removing trivial motions: the first pinned vertex is fixed,
/// the second moves on a line, the third in a plane, and so on.
struct Pins {
    rows: Vec<(usize, DVector<f64>, f64)>,
}

impl Pins {
    fn new(order: &[Vertex], p: &FloatEmbedding) -> Result<Self, FlexError> {
        let n = p.dimension();
        let base = DVector::from_column_slice(p.point(order[0])?);
        let mut frame: Vec<DVector<f64>> = Vec::new();
        let mut chosen = vec![0usize];
        for (i, &v) in order.iter().enumerate().skip(1) {
            if frame.len() + 1 >= n {
                break;
            }
            let d = DVector::from_column_slice(p.point(v)?) - &base;
            let before = frame.len();
            frame = orthonormal_columns(&[frame.clone(), vec![d.clone()]].concat(), 1e-6 * d.norm().max(1e-300));
            if frame.len() > before {
                chosen.push(i);
            }
        }
        if frame.len() + 1 < n {
            return Err(FlexError::DegenerateSpan { rank: frame.len(), n });
        }
        let units: Vec<DVector<f64>> = (0..n).map(|c| DVector::from_fn(n, |r, _| if r == c { 1.0 } else { 0.0 })).collect();
        frame = orthonormal_columns(&[frame, units].concat(), 1e-9);
        let mut rows = Vec::new();
        for (k, &i) in chosen.iter().enumerate() {
            let x = DVector::from_column_slice(p.point(order[i])?);
            for f in &frame[k..] {
                rows.push((i, f.clone(), f.dot(&x)));
            }
        }
        Ok(Pins { rows })
    }
}

struct Constraints {
    n: usize,
    order: Vec<Vertex>,
    edges: Vec<(usize, usize)>,
    targets: Vec<f64>,
    pins: Pins,
}

impl Constraints {
    fn new(k: &SupportComplex, p0: &FloatEmbedding) -> Result<Self, FlexError> {
        let index = vertex_index(k);
        let order: Vec<Vertex> = index.keys().copied().collect();
        let edges: Vec<(usize, usize)> = k.edges().map(|(u, v)| (index[&u], index[&v])).collect();
        let targets = k.edges().map(|(u, v)| squared_length(p0, u, v)).collect::<Result<_, _>>()?;
        let pins = Pins::new(&order, p0)?;
        Ok(Constraints { n: p0.dimension(), order, edges, targets, pins })
    }

    fn flatten(&self, p: &FloatEmbedding) -> Result<DVector<f64>, FlexError> {
        let mut x = DVector::zeros(self.n * self.order.len());
        for (i, &v) in self.order.iter().enumerate() {
            x.rows_mut(self.n * i, self.n).copy_from_slice(p.point(v)?);
        }
        Ok(x)
    }

    fn embed(&self, x: &DVector<f64>) -> FloatEmbedding {
        let pts = self.order.iter().enumerate().map(|(i, &v)| (v, x.rows(self.n * i, self.n).iter().copied().collect()));
        FloatEmbedding::from_points(self.n, pts).expect("consistent dimension")
    }

    fn sq(&self, x: &DVector<f64>, a: usize, b: usize) -> f64 {
        (0..self.n).map(|c| (x[self.n * a + c] - x[self.n * b + c]).powi(2)).sum()
    }

    fn edge_residual(&self, x: &DVector<f64>) -> f64 {
        self.edges.iter().zip(&self.targets).map(|(&(a, b), t)| (self.sq(x, a, b) - t).abs()).fold(0.0, f64::max)
    }

    fn residual(&self, x: &DVector<f64>) -> DVector<f64> {
        let m = self.edges.len();
        let mut f = DVector::zeros(m + self.pins.rows.len());
        for (r, (&(a, b), t)) in self.edges.iter().zip(&self.targets).enumerate() {
            f[r] = self.sq(x, a, b) - t;
        }
        for (r, (i, dir, val)) in self.pins.rows.iter().enumerate() {
            f[m + r] = dir.dot(&x.rows(self.n * i, self.n)) - val;
        }
        f
    }

    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let m = self.edges.len();
        let n = self.n;
        let mut j = DMatrix::zeros(m + self.pins.rows.len(), x.len());
        for (r, &(a, b)) in self.edges.iter().enumerate() {
            for c in 0..n {
                let d = 2.0 * (x[n * a + c] - x[n * b + c]);
                j[(r, n * a + c)] = d;
                j[(r, n * b + c)] = -d;
            }
        }
        for (r, (i, dir, _)) in self.pins.rows.iter().enumerate() {
            for c in 0..n {
                j[(m + r, n * i + c)] = dir[c];
            }
        }
        j
    }

    /// Gauss–Newton from `pred`, with corrections kept orthogonal to the
    /// predictor's kernel directions.
    fn correct(&self, pred: &DVector<f64>, kernel: &[DVector<f64>], opts: &TraceOptions) -> Option<DVector<f64>> {
        let mut x = pred.clone();
        let base = self.edges.len() + self.pins.rows.len();
        for it in 0..=opts.max_corrector_iterations {
            let f = self.residual(&x);
            if f.amax() <= opts.tol {
                return Some(x);
            }
            if it == opts.max_corrector_iterations {
                break;
            }
            let d = &x - pred;
            let mut fa = DVector::zeros(base + kernel.len());
            fa.rows_mut(0, base).copy_from(&f);
            let mut ja = DMatrix::zeros(base + kernel.len(), x.len());
            ja.view_mut((0, 0), (base, x.len())).copy_from(&self.jacobian(&x));
            for (r, q) in kernel.iter().enumerate() {
                fa[base + r] = q.dot(&d);
                ja.set_row(base + r, &q.transpose());
            }
            let dx = ja.svd(true, true).solve(&fa, 1e-13).ok()?;
            x -= dx;
            if !x.iter().all(|v| v.is_finite()) {
                return None;
            }
        }
        None
    }
}

/// Traces an edge-length preserving deformation of `z` starting at `p0`.
pub fn trace_flex(z: &Chain, p0: &FloatEmbedding, opts: &TraceOptions) -> Result<FlexTrace, FlexError> {
    let k = z.support();
    p0.covers(z)?;
    let space = flex_space(&k, p0, opts.kernel_tol)?;
    if space.dimension() == 0 {
        return Err(FlexError::Rigid);
    }
    let cons = Constraints::new(&k, p0)?;
    let kdim = space.dimension();
    let mut x = cons.flatten(p0)?;
    let kernel_at = |x: &DVector<f64>| -> Vec<DVector<f64>> {
        right_singular(&cons.jacobian(x)).into_iter().take(kdim).map(|(_, v)| v).collect()
    };
    let tangent = |kernel: &[DVector<f64>], prev: &DVector<f64>| -> DVector<f64> {
        let mut t = DVector::zeros(prev.len());
        for q in kernel {
            t += q * q.dot(prev);
        }
        if t.norm() < 1e-12 {
            t = kernel[0].clone();
        }
        let t = t.normalize();
        if t.dot(prev) < 0.0 {
            -t
        } else {
            t
        }
    };
    // initial direction: the flex-space vector expressed with pins applied
    let start = {
        let sv = right_singular(&cons.jacobian(&x));
        let mut t = sv[0].1.clone();
        if let Some(c) = t.iter().find(|c| c.abs() > 1e-9) {
            if *c < 0.0 {
                t = -t;
            }
        }
        t
    };
    let mut trace = FlexTrace {
        parameters: vec![0.0],
        embeddings: vec![p0.clone()],
        residuals: vec![cons.edge_residual(&x)],
        volumes: vec![generalized_volume(z, p0, None)?],
        status: TraceStatus::Completed,
    };
    let mut dir = start;
    let mut h = opts.step_size;
    let mut streak = 0;
    let mut t_param = 0.0;
    for step in 1..=opts.steps {
        let kernel = kernel_at(&x);
        let mut halvings = 0;
        let accepted = loop {
            let t = tangent(&kernel, &dir);
            let pred = &x + &t * h;
            if let Some(xn) = cons.correct(&pred, &kernel, opts) {
                if (&xn - &pred).norm() <= 0.5 * h {
                    break Some((xn, t));
                }
            }
            halvings += 1;
            if halvings > opts.max_halvings || h * 0.5 < opts.min_step_size {
                break None;
            }
            h *= 0.5;
            streak = 0;
        };
        let Some((xn, t)) = accepted else {
            trace.status = TraceStatus::Truncated { step, reason: format!("corrector failed at step size {h:e}") };
            break;
        };
        t_param += (&xn - &x).norm();
        x = xn;
        dir = t;
        let p = cons.embed(&x);
        trace.parameters.push(t_param);
        trace.residuals.push(cons.edge_residual(&x));
        trace.volumes.push(generalized_volume(z, &p, None)?);
        trace.embeddings.push(p);
        streak += 1;
        if streak >= 3 {
            h = (h * 1.25).min(opts.step_size);
            streak = 0;
        }
    }
    Ok(trace)
}

/// Max edge residual of a trace, recomputed from its embeddings.
pub fn recompute_residual(z: &Chain, trace: &FlexTrace) -> Result<f64, FlexError> {
    let first = trace.embeddings.first().ok_or(FlexError::EmptyTrace)?;
    let edges: Vec<(Vertex, Vertex)> = z.support().edges().collect();
    let l0: Vec<f64> = edges.iter().map(|&(u, v)| squared_length(first, u, v)).collect::<Result<_, _>>()?;
    let mut worst: f64 = 0.0;
    for p in &trace.embeddings {
        for (&(u, v), l) in edges.iter().zip(&l0) {
            worst = worst.max((squared_length(p, u, v)? - l).abs());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellowsReport {
    pub max_drift: f64,
    /// `max_drift / max(1, |V_0|)`.
    pub relative_drift: f64,
    pub initial_volume: f64,
}

/// Volume drift along a trace, with volumes recomputed from the embeddings.
pub fn bellows_check(z: &Chain, trace: &FlexTrace) -> Result<BellowsReport, FlexError> {
    let first = trace.embeddings.first().ok_or(FlexError::EmptyTrace)?;
    let v0 = generalized_volume(z, first, None)?;
    let mut drift: f64 = 0.0;
    for p in &trace.embeddings[1..] {
        drift = drift.max((generalized_volume(z, p, None)? - v0).abs());
    }
    Ok(BellowsReport { max_drift: drift, relative_drift: drift / v0.abs().max(1.0), initial_volume: v0 })
}

/// Embedding attached to a zoo example.
#[derive(Debug, Clone, PartialEq)]
pub enum ZooEmbedding {
    Exact(ExactEmbedding),
    Float(FloatEmbedding),
}

impl ZooEmbedding {
    pub fn to_float(&self) -> FloatEmbedding {
        match self {
            ZooEmbedding::Exact(p) => p.to_float(),
            ZooEmbedding::Float(p) => p.clone(),
        }
    }

    pub fn exact(&self) -> Option<&ExactEmbedding> {
        match self {
            ZooEmbedding::Exact(p) => Some(p),
            ZooEmbedding::Float(_) => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExampleSpec {
    pub name: String,
    pub n: usize,
    pub cycle: Chain,
    pub embedding: ZooEmbedding,
}

pub const ZOO_NAMES: [&str; 6] = [
    "simplex-boundary",
    "double-4-simplex",
    "octahedron",
    "bricard-octahedron",
    "cross-polytope-16cell",
    "flexible-cross-polytope-4d",
];

/// Builds a zoo example. `simplex-boundary` accepts a dimension suffix,
/// e.g. `simplex-boundary(3)`; the default is 4. The two flexible examples
/// are constructed from `seed`.
pub fn example_zoo(name: &str, seed: u64) -> Result<ExampleSpec, FlexError> {
    let unknown = || FlexError::UnknownExample(name.to_string());
    let (base, arg) = match name.split_once('(') {
        Some((b, rest)) => (b, Some(rest.strip_suffix(')').ok_or_else(unknown)?)),
        None => (name, None),
    };
    if arg.is_some() && base != "simplex-boundary" {
        return Err(unknown());
    }
    let spec = |n: usize, cycle: Chain, embedding: ZooEmbedding| ExampleSpec { name: name.to_string(), n, cycle, embedding };
    match base {
        "simplex-boundary" => {
            let n: usize = arg.map_or(Ok(4), |a| a.trim().parse().map_err(|_| unknown()))?;
            if !(1..=8).contains(&n) {
                return Err(unknown());
            }
            let verts: Vec<Vertex> = (0..=n as Vertex).collect();
            Ok(spec(n, simplex_boundary(&verts)?, ZooEmbedding::Exact(standard_simplex(n))))
        }
        "double-4-simplex" => {
            let z = simplex_boundary(&[0, 1, 2, 3, 4])?.sub(&simplex_boundary(&[0, 1, 2, 3, 5])?);
            let mut p = standard_simplex(4);
            p.insert(5, vec![ratio(1, 1), ratio(1, 2), ratio(2, 1), ratio(-1, 3)])?;
            Ok(spec(4, z, ZooEmbedding::Exact(p)))
        }
        "octahedron" => Ok(spec(3, cross_polytope(3)?, ZooEmbedding::Exact(convex_octahedron()))),
        "bricard-octahedron" => {
            let p = bricard_octahedron(seed)?;
            Ok(spec(3, cross_polytope(3)?, ZooEmbedding::Float(p)))
        }
        "cross-polytope-16cell" => {
            let pts = (0..4).flat_map(|i| {
                [1i64, -1].into_iter().enumerate().map(move |(s, sign)| {
                    let mut c = vec![0i64; 4];
                    c[i] = sign;
                    ((2 * i + s) as Vertex, c)
                })
            });
            Ok(spec(4, cross_polytope(4)?, ZooEmbedding::Exact(ExactEmbedding::from_integers(4, pts))))
        }
        "flexible-cross-polytope-4d" => {
            let p = flexible_cross_polytope_4d(seed)?;
            Ok(spec(4, cross_polytope(4)?, ZooEmbedding::Float(p)))
        }
        _ => Err(unknown()),
    }
}

fn standard_simplex(n: usize) -> ExactEmbedding {
    ExactEmbedding::from_integers(n, (0..=n).map(|i| (i as Vertex, (0..n).map(|k| i64::from(i == k + 1)).collect())))
}

/// Boundary of the `n`-dimensional cross-polytope on vertices `2i` (`+e_i`)
/// and `2i + 1` (`−e_i`), oriented so that the standard embedding has
/// positive volume.
pub fn cross_polytope(n: usize) -> Result<Chain, ChainError> {
    let mut terms = Vec::with_capacity(1 << n);
    for mask in 0u32..(1 << n) {
        let verts: Vec<Vertex> = (0..n as u32).map(|i| 2 * i + ((mask >> i) & 1)).collect();
        let sign = if mask.count_ones() % 2 == 0 { 1 } else { -1 };
        terms.push((sign, verts));
    }
    Chain::from_terms(n - 1, terms)
}

/// Points on the coordinate axes at distinct distances, followed by a
/// rational shear; convex with the combinatorics of the cross-polytope.
fn convex_octahedron() -> ExactEmbedding {
    let axes: [(usize, i64); 6] = [(0, 2), (0, -3), (1, 2), (1, -1), (2, 3), (2, -2)];
    let shear = [[ratio(1, 1), ratio(1, 3), ratio(0, 1)], [ratio(0, 1), ratio(1, 1), ratio(1, 4)], [ratio(1, 5), ratio(0, 1), ratio(1, 1)]];
    let mut p = ExactEmbedding::new(3);
    for (v, &(axis, len)) in axes.iter().enumerate() {
        let x: Vec<BigRational> = (0..3).map(|r| &shear[r][axis] * ratio(len, 1)).collect();
        p.insert(v as Vertex, x).expect("three coordinates");
    }
    p
}

fn half_turn(x: &[f64]) -> Vec<f64> {
    x.iter().enumerate().map(|(i, c)| if i < 2 { -c } else { *c }).collect()
}

/// Line-symmetric octahedron: opposite vertices are exchanged by the half-turn
/// about the third coordinate axis. The symmetric placements of three points
/// form a 7-dimensional family subject to 6 edge conditions, so every generic
/// member flexes.
fn bricard_octahedron(seed: u64) -> Result<FloatEmbedding, FlexError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..32 {
        let mut p = FloatEmbedding::new(3);
        for i in 0..3u32 {
            let a: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            p.insert(2 * i + 1, half_turn(&a))?;
            p.insert(2 * i, a)?;
        }
        if well_separated(&p, 0.2) {
            validate_flexible(&cross_polytope(3)?, &p)?;
            return Ok(p);
        }
    }
    Err(FlexError::Constructor("no well-separated symmetric configuration".into()))
}

fn well_separated(p: &FloatEmbedding, min: f64) -> bool {
    let pts: Vec<(Vertex, &[f64])> = p.points().collect();
    pts.iter().enumerate().all(|(i, (_, a))| {
        pts[i + 1..].iter().all(|(_, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).powi(2)).sum::<f64>() > min * min)
    })
}

fn validate_flexible(z: &Chain, p: &FloatEmbedding) -> Result<(), FlexError> {
    if !z.is_cycle() {
        return Err(FlexError::Constructor("constructed chain is not a cycle".into()));
    }
    p.covers(z)?;
    let space = flex_space(&z.support(), p, 1e-8)?;
    if space.trivial_rank < p.dimension() * (p.dimension() + 1) / 2 {
        return Err(FlexError::DegenerateSpan { rank: space.trivial_rank, n: p.dimension() });
    }
    if space.dimension() == 0 {
        return Err(FlexError::Constructor("constructed configuration is rigid".into()));
    }
    Ok(())
}

/// Cross-polytope in `R^4` symmetric under the half-turn fixing the `(x_3, x_4)`
/// plane, with an infinitesimal flex. Unknowns are the four symmetric vertex
/// pairs and a flex vector `δ`; Gauss–Newton solves `R δ = 0`, `δ ⊥` trivial
/// motions, `|δ| = 1` from a seeded random start.
fn flexible_cross_polytope_4d(seed: u64) -> Result<FloatEmbedding, FlexError> {
    let z = cross_polytope(4)?;
    let k = z.support();
    let edges: Vec<(usize, usize)> = k.edges().map(|(u, v)| (u as usize, v as usize)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 4;
    let nv = 8;
    let sign = |c: usize| if c < 2 { -1.0 } else { 1.0 };
    for _ in 0..16 {
        // layout: θ (16) then δ (32)
        let mut u = DVector::from_fn(16 + n * nv, |_, _| rng.gen_range(-1.0..1.0));
        for (i, c, val) in [(0, 2, -1.0), (1, 2, 1.0), (2, 3, -1.0), (3, 3, 1.0)] {
            u[n * i + c] = val;
        }
        let nd = u.rows(16, n * nv).norm();
        u.rows_mut(16, n * nv).scale_mut(1.0 / nd);
        let points = |u: &DVector<f64>| -> Vec<f64> {
            let mut x = vec![0.0; n * nv];
            for i in 0..4 {
                for c in 0..n {
                    x[n * 2 * i + c] = u[n * i + c];
                    x[n * (2 * i + 1) + c] = sign(c) * u[n * i + c];
                }
            }
            x
        };
        let rows = edges.len() + n * (n + 1) / 2 + 1;
        let mut converged = false;
        for _ in 0..200 {
            let x = points(&u);
            let d = u.rows(16, n * nv);
            let mut g = DVector::zeros(rows);
            // derivatives w.r.t. the full point vector, folded onto θ below
            let mut jx = DMatrix::zeros(rows, n * nv);
            let mut jd = DMatrix::zeros(rows, n * nv);
            for (r, &(a, b)) in edges.iter().enumerate() {
                for c in 0..n {
                    let dp = x[n * a + c] - x[n * b + c];
                    let dd = d[n * a + c] - d[n * b + c];
                    g[r] += 2.0 * dp * dd;
                    jx[(r, n * a + c)] = 2.0 * dd;
                    jx[(r, n * b + c)] = -2.0 * dd;
                    jd[(r, n * a + c)] = 2.0 * dp;
                    jd[(r, n * b + c)] = -2.0 * dp;
                }
            }
            let mut r = edges.len();
            for c in 0..n {
                for v in 0..nv {
                    g[r] += d[n * v + c];
                    jd[(r, n * v + c)] = 1.0;
                }
                r += 1;
            }
            for a in 0..n {
                for b in a + 1..n {
                    for v in 0..nv {
                        let (xa, xb) = (x[n * v + a], x[n * v + b]);
                        let (da, db) = (d[n * v + a], d[n * v + b]);
                        g[r] += xb * da - xa * db;
                        jd[(r, n * v + a)] = xb;
                        jd[(r, n * v + b)] = -xa;
                        jx[(r, n * v + b)] = da;
                        jx[(r, n * v + a)] = -db;
                    }
                    r += 1;
                }
            }
            g[r] = d.norm_squared() - 1.0;
            for c in 0..n * nv {
                jd[(r, c)] = 2.0 * d[c];
            }
            if g.amax() < 1e-14 {
                converged = true;
                break;
            }
            let mut j = DMatrix::zeros(rows, 16 + n * nv);
            for i in 0..4 {
                // the coordinates moved by the half-turn stay at their random
                // values, and one fixed-plane coordinate per pair is pinned apart
                for c in [if i < 2 { 3 } else { 2 }] {
                    let col = jx.column(n * 2 * i + c) + jx.column(n * (2 * i + 1) + c) * sign(c);
                    j.set_column(n * i + c, &col);
                }
            }
            j.view_mut((0, 16), (rows, n * nv)).copy_from(&jd);
            let Ok(step) = j.svd(true, true).solve(&g, 1e-13) else { break };
            u -= step;
        }
        if !converged {
            continue;
        }
        let x = points(&u);
        let p = FloatEmbedding::from_points(n, (0..nv).map(|v| (v as Vertex, x[n * v..n * v + n].to_vec())))?;
        if well_separated(&p, 0.2) && validate_flexible(&z, &p).is_ok() {
            return Ok(p);
        }
    }
    Err(FlexError::Constructor("Gauss–Newton did not reach an infinitesimally flexible configuration".into()))
}
