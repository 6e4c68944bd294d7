//! Fixtures and randomized property checks shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use bellows::chains::{canonicalize, elementary_move, link_weight, simplex_boundary, Chain, Vertex};
use bellows::flex::rigidity_matrix;
use bellows::geometry::{
    collapse_edge_perturbation, generalized_volume, squared_length, ComplexEmbedding, ExactEmbedding, FloatEmbedding,
};
use bellows::polyalg::{rat, ratio, resultant, MultiPoly, Var};
use bellows::sabitov::edge_var;
use nalgebra::DVector;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Check = Result<(), String>;

/// Boundary of the unit cube from its six-simplex staircase triangulation.
pub fn triangulated_cube() -> (Chain, ExactEmbedding) {
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let signs = [1, -1, -1, 1, 1, -1];
    let mut solid = Chain::zero(3);
    for (perm, sign) in perms.iter().zip(signs) {
        let mut v = 0u32;
        let mut path = vec![0u32];
        for &axis in perm {
            v |= 1 << axis;
            path.push(v);
        }
        solid.add_term(sign, &path).unwrap();
    }
    let z = solid.boundary().unwrap();
    let p = ExactEmbedding::from_integers(3, (0..8u32).map(|v| (v, (0..3).map(|k| i64::from((v >> k) & 1)).collect())));
    (z, p)
}

/// 16-cell boundary with vertices `±3 e_i` moved by small rational offsets.
pub fn jittered_cell16(rng: &mut ChaCha8Rng) -> (Chain, ExactEmbedding) {
    let z = bellows::flex::cross_polytope(4).unwrap();
    let mut p = ExactEmbedding::new(4);
    for i in 0..4 {
        for (s, sign) in [(0u32, 3i64), (1, -3)] {
            let x: Vec<BigRational> = (0..4)
                .map(|k| if k == i { rat(sign) } else { ratio(rng.gen_range(-2..=2), 7) })
                .collect();
            p.insert(2 * i as u32 + s, x).unwrap();
        }
    }
    (z, p)
}

pub fn random_rational_embedding(rng: &mut ChaCha8Rng, n: usize, vertices: impl IntoIterator<Item = Vertex>) -> ExactEmbedding {
    let mut p = ExactEmbedding::new(n);
    for v in vertices {
        p.insert(v, (0..n).map(|_| ratio(rng.gen_range(-20..=20), rng.gen_range(1..=6))).collect()).unwrap();
    }
    p
}

pub fn random_float_embedding(rng: &mut ChaCha8Rng, n: usize, vertices: impl IntoIterator<Item = Vertex>) -> FloatEmbedding {
    let mut p = FloatEmbedding::new(n);
    for v in vertices {
        p.insert(v, (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
    }
    p
}

fn random_simplex(rng: &mut ChaCha8Rng, k: usize, nverts: u32) -> Vec<Vertex> {
    let all: Vec<Vertex> = (0..nverts).collect();
    all.choose_multiple(rng, k).copied().collect()
}

/// Nonzero integer combination of boundaries of random `n`-simplices.
pub fn random_cycle(rng: &mut ChaCha8Rng, n: usize, nverts: u32) -> Chain {
    loop {
        let mut z = Chain::zero(n - 1);
        for _ in 0..rng.gen_range(1..=4) {
            let q = rng.gen_range(-3..=3);
            z = z.add(&simplex_boundary(&random_simplex(rng, n + 1, nverts)).unwrap().scale(q));
        }
        if !z.is_zero() {
            return z;
        }
    }
}

pub fn boundary_squared_vanishes(rng: &mut ChaCha8Rng) -> Check {
    let k = rng.gen_range(2..=5);
    let mut c = Chain::zero(k);
    for _ in 0..rng.gen_range(1..=6) {
        c.add_term(rng.gen_range(-5..=5), &random_simplex(rng, k + 1, 9)).map_err(|e| e.to_string())?;
    }
    let bb = c.boundary().and_then(|b| b.boundary()).map_err(|e| e.to_string())?;
    bb.is_zero().then_some(()).ok_or_else(|| format!("boundary of boundary of {c} is {bb}"))
}

pub fn edge_links_are_heavy(rng: &mut ChaCha8Rng) -> Check {
    let z = random_cycle(rng, 4, 8);
    for (u, v) in z.support().edges() {
        let q = link_weight(&z, &[u, v]).map_err(|e| e.to_string())?;
        if q < 3 {
            return Err(format!("edge {u}-{v} of {z} has link weight {q}"));
        }
    }
    Ok(())
}

pub fn volume_additive_under_moves(rng: &mut ChaCha8Rng) -> Check {
    let n = if rng.gen_bool(0.5) { 3 } else { 4 };
    let z = random_cycle(rng, n, 7);
    let eta_vertices = random_simplex(rng, n + 1, 8);
    let eta = Chain::from_terms(n, [(1, canonicalize(&eta_vertices).unwrap().vertices().to_vec())]).unwrap();
    let moved = elementary_move(&z, &eta).map_err(|e| e.to_string())?;
    let p = random_rational_embedding(rng, n, 0..8);
    let vol = |c: &Chain| generalized_volume(c, &p, None).map_err(|e| e.to_string());
    let (a, b, c) = (vol(&z)?, vol(&moved)?, vol(&eta.boundary().unwrap())?);
    (a == &b + &c).then_some(()).ok_or_else(|| format!("V(Z) = {a} but V(Z') + V(eta) = {}", b + c))
}

fn x_var() -> Var {
    edge_var(0, 1)
}

fn linear_product(roots: &[BigRational]) -> MultiPoly {
    let x = MultiPoly::var(x_var());
    roots.iter().fold(MultiPoly::one(), |acc, a| &acc * &(&x - &MultiPoly::constant(a.clone())))
}

/// Monic products of linear factors: the resultant is zero exactly when a
/// root is shared, and otherwise equals `∏ (a_i − b_j)`.
pub fn resultant_detects_common_roots(rng: &mut ChaCha8Rng) -> Check {
    fn pick(rng: &mut ChaCha8Rng) -> Vec<BigRational> {
        let k = rng.gen_range(1..=3);
        (0..k).map(|_| ratio(rng.gen_range(-9..=9), rng.gen_range(1..=3))).collect()
    }
    let (a, mut b) = (pick(rng), pick(rng));
    let share = rng.gen_bool(0.5);
    if share {
        let root = a[0].clone();
        b[0] = root;
    }
    let common = a.iter().any(|x| b.contains(x));
    let res = resultant(&linear_product(&a), &linear_product(&b), x_var()).map_err(|e| e.to_string())?;
    let expected: BigRational = a.iter().flat_map(|x| b.iter().map(move |y| x - y)).product();
    if res.is_zero() != common {
        return Err(format!("roots {a:?} and {b:?}: resultant {res}"));
    }
    if res != MultiPoly::constant(expected.clone()) {
        return Err(format!("roots {a:?} and {b:?}: resultant {res}, expected {expected}"));
    }
    Ok(())
}

/// Resultants commute with specializing a second variable when the leading
/// coefficients survive.
pub fn resultant_commutes_with_specialization(rng: &mut ChaCha8Rng) -> Check {
    let y = edge_var(2, 3);
    let mut random_poly = |dx: u32| -> MultiPoly {
        let mut p = MultiPoly::zero();
        for i in 0..=dx {
            for j in 0..=2u32 {
                let c = rng.gen_range(-4..=4);
                let m = &MultiPoly::var(x_var()).pow(i) * &MultiPoly::var(y).pow(j);
                p = &p + &m.scale(&rat(c));
            }
        }
        p
    };
    let (f, g) = (random_poly(2), random_poly(3));
    let y0 = ratio(rng.gen_range(-5..=5), rng.gen_range(1..=3));
    let at: HashMap<Var, BigRational> = [(y, y0)].into();
    let (fs, gs) = (f.specialize(&at), g.specialize(&at));
    if fs.degree(x_var()) != f.degree(x_var()) || gs.degree(x_var()) != g.degree(x_var()) {
        return Ok(());
    }
    let lhs = resultant(&f, &g, x_var()).map_err(|e| e.to_string())?.specialize(&at);
    let rhs = resultant(&fs, &gs, x_var()).map_err(|e| e.to_string())?;
    (lhs == rhs).then_some(()).ok_or_else(|| format!("Res then specialize {lhs} != specialize then Res {rhs}"))
}

/// Rigidity matrix against central differences of the squared lengths.
pub fn rigidity_matches_finite_differences(rng: &mut ChaCha8Rng) -> Check {
    let n = if rng.gen_bool(0.5) { 3 } else { 4 };
    let z = random_cycle(rng, n, 8);
    let k = z.support();
    let p = random_float_embedding(rng, n, k.vertices());
    let r = rigidity_matrix(&k, &p).map_err(|e| e.to_string())?;
    let verts: Vec<Vertex> = k.vertices().collect();
    let delta = DVector::from_fn(n * verts.len(), |_, _| rng.gen_range(-1.0..1.0));
    let h = 1e-6;
    let shifted = |s: f64| -> FloatEmbedding {
        let pts = verts.iter().enumerate().map(|(i, &v)| {
            (v, p.point(v).unwrap().iter().enumerate().map(|(c, x)| x + s * delta[n * i + c]).collect())
        });
        FloatEmbedding::from_points(n, pts).unwrap()
    };
    let (plus, minus) = (shifted(h), shifted(-h));
    let predicted = &r * &delta;
    for (row, (u, v)) in k.edges().enumerate() {
        let fd = (squared_length(&plus, u, v).unwrap() - squared_length(&minus, u, v).unwrap()) / (2.0 * h);
        if (fd - predicted[row]).abs() > 1e-6 * (1.0 + fd.abs()) {
            return Err(format!("edge {u}-{v}: finite difference {fd}, rigidity row gives {}", predicted[row]));
        }
    }
    Ok(())
}

/// Edge-collapse perturbation: one neighbor ends up at squared length zero,
/// the others move by at most `3ε`.
pub fn perturbation_respects_bounds(rng: &mut ChaCha8Rng) -> Check {
    let n = rng.gen_range(3..=4);
    let scale = 10f64.powf(rng.gen_range(-3.0..0.0));
    let mut c = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let u: Vec<Complex64> = (0..n).map(|_| c()).collect();
    let k = 2 + (c().re.abs() * 4.0) as usize;
    let mut p = ComplexEmbedding::new(n);
    p.insert(0, u.clone()).unwrap();
    let neighbors: Vec<Vertex> = (1..=k as Vertex).collect();
    for &v in &neighbors {
        p.insert(v, u.iter().map(|x| x + c() * scale).collect()).unwrap();
    }
    let before: Vec<Complex64> = neighbors.iter().map(|&v| squared_length(&p, 0, v).unwrap()).collect();
    let eps = before.iter().map(|l| l.norm()).fold(0.0, f64::max);
    let (j, q) = collapse_edge_perturbation(&p, 0, &neighbors).map_err(|e| e.to_string())?;
    let collapsed = squared_length(&q, 0, neighbors[j]).unwrap().norm();
    if collapsed >= 1e-12 {
        return Err(format!("collapsed edge still has |l| = {collapsed:e}"));
    }
    for (&v, l0) in neighbors.iter().zip(&before) {
        let dl = (squared_length(&q, 0, v).unwrap() - l0).norm();
        if dl > 3.0 * eps + 1e-9 {
            return Err(format!("edge 0-{v} moved by {dl:e} > 3ε = {:e}", 3.0 * eps));
        }
    }
    for &v in &neighbors {
        if q.point(v).unwrap() != p.point(v).unwrap() {
            return Err(format!("vertex {v} moved"));
        }
    }
    Ok(())
}

/// Runs `check` on `count` seeded instances, reporting the first failure.
pub fn run_suite(name: &str, count: u64, check: fn(&mut ChaCha8Rng) -> Check) -> Check {
    use rand::SeedableRng;
    for seed in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0000);
        check(&mut rng).map_err(|e| format!("{name}, instance {seed}: {e}"))?;
    }
    Ok(())
}

pub const SUITES: [(&str, fn(&mut ChaCha8Rng) -> Check); 7] = [
    ("boundary of boundary", boundary_squared_vanishes),
    ("edge link weight", edge_links_are_heavy),
    ("additivity under moves", volume_additive_under_moves),
    ("resultant common roots", resultant_detects_common_roots),
    ("resultant specialization", resultant_commutes_with_specialization),
    ("rigidity finite differences", rigidity_matches_finite_differences),
    ("edge-collapse perturbation", perturbation_respects_bounds),
];
