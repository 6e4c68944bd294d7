//! Integer simplicial chains on a vertex set of non-negative integers.
//!
//! Every simplex is stored in canonical form: its vertex list strictly
//! increasing, with the orientation recorded as the parity of the sorting
//! permutation. Chains map canonical simplices to nonzero coefficients.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

pub type Vertex = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("invalid simplex {0:?}: repeated vertex")]
    InvalidSimplex(Vec<Vertex>),
    #[error("simplex {simplex:?} does not have {expected} vertices")]
    WrongArity { simplex: Vec<Vertex>, expected: usize },
    #[error("boundary of a {0}-dimensional chain is not defined")]
    Dimension(usize),
    #[error("simplex {0:?} is not in the support")]
    AbsentSimplex(Vec<Vertex>),
    #[error("chain is not a cycle")]
    NotACycle,
    #[error("chain is zero")]
    ZeroChain,
    #[error("complex is empty")]
    EmptyComplex,
    #[error("unsupported dimension n = {0}")]
    UnsupportedDimension(usize),
}

/// A simplex with strictly increasing vertices and an orientation sign.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrientedSimplex {
    vertices: Vec<Vertex>,
    sign: i8,
}

impl OrientedSimplex {
    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn dimension(&self) -> usize {
        self.vertices.len() - 1
    }

    /// The chain consisting of this simplex alone, with its orientation.
    pub fn to_chain(&self) -> Chain {
        let mut c = Chain::zero(self.dimension());
        c.add_canonical(self.vertices.clone(), i64::from(self.sign));
        c
    }
}

/// Sorts `vertices` and records the parity of the sorting permutation.
pub fn canonicalize(vertices: &[Vertex]) -> Result<OrientedSimplex, ChainError> {
    let mut v = vertices.to_vec();
    let mut sign = 1i8;
    // insertion sort; counts transpositions
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return Err(ChainError::InvalidSimplex(vertices.to_vec()));
    }
    Ok(OrientedSimplex { vertices: v, sign })
}

/// An integer chain of fixed dimension in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Chain {
    dim: usize,
    terms: BTreeMap<Vec<Vertex>, i64>,
}

impl Chain {
    pub fn zero(dim: usize) -> Self {
        Chain { dim, terms: BTreeMap::new() }
    }

    /// Builds a chain from `(coefficient, ordered vertex list)` terms.
    pub fn from_terms<I, V>(dim: usize, terms: I) -> Result<Self, ChainError>
    where
        I: IntoIterator<Item = (i64, V)>,
        V: AsRef<[Vertex]>,
    {
        let mut c = Chain::zero(dim);
        for (q, vs) in terms {
            c.add_term(q, vs.as_ref())?;
        }
        Ok(c)
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Canonical terms, sorted by vertex list.
    pub fn terms(&self) -> impl Iterator<Item = (&[Vertex], i64)> + '_ {
        self.terms.iter().map(|(k, &q)| (k.as_slice(), q))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the oriented simplex given by `vertices` (in that order).
    pub fn coefficient(&self, vertices: &[Vertex]) -> i64 {
        match canonicalize(vertices) {
            Ok(s) => self.terms.get(&s.vertices).map_or(0, |&q| q * i64::from(s.sign)),
            Err(_) => 0,
        }
    }

    pub fn add_term(&mut self, q: i64, vertices: &[Vertex]) -> Result<(), ChainError> {
        if vertices.len() != self.dim + 1 {
            return Err(ChainError::WrongArity {
                simplex: vertices.to_vec(),
                expected: self.dim + 1,
            });
        }
        let s = canonicalize(vertices)?;
        self.add_canonical(s.vertices, q * i64::from(s.sign));
        Ok(())
    }

    fn add_canonical(&mut self, key: Vec<Vertex>, q: i64) {
        if q == 0 {
            return;
        }
        let mut remove = false;
        {
            let e = self.terms.entry(key.clone()).or_insert(0);
            *e += q;
            if *e == 0 {
                remove = true;
            }
        }
        if remove {
            self.terms.remove(&key);
        }
    }

    pub fn scale(&self, k: i64) -> Chain {
        if k == 0 {
            return Chain::zero(self.dim);
        }
        Chain { dim: self.dim, terms: self.terms.iter().map(|(s, &q)| (s.clone(), q * k)).collect() }
    }

    pub fn add(&self, other: &Chain) -> Chain {
        assert_eq!(self.dim, other.dim, "adding chains of different dimension");
        let mut c = self.clone();
        for (s, &q) in &other.terms {
            c.add_canonical(s.clone(), q);
        }
        c
    }

    pub fn sub(&self, other: &Chain) -> Chain {
        self.add(&other.scale(-1))
    }

    pub fn boundary(&self) -> Result<Chain, ChainError> {
        if self.dim == 0 {
            return Err(ChainError::Dimension(0));
        }
        let mut b = Chain::zero(self.dim - 1);
        for (s, &q) in &self.terms {
            for i in 0..s.len() {
                let mut face = s.clone();
                face.remove(i);
                let sgn = if i % 2 == 0 { 1 } else { -1 };
                // faces of a sorted list stay sorted
                b.add_canonical(face, sgn * q);
            }
        }
        Ok(b)
    }

    /// A zero chain counts as a cycle in every dimension.
    pub fn is_cycle(&self) -> bool {
        if self.dim == 0 {
            return self.is_zero();
        }
        self.boundary().map(|b| b.is_zero()).unwrap_or(false)
    }

    pub fn vertices(&self) -> BTreeSet<Vertex> {
        self.terms.keys().flatten().copied().collect()
    }

    pub fn support(&self) -> SupportComplex {
        SupportComplex::from_facets(self.dim, self.terms.keys())
    }

    /// Link of the ordered simplex `sigma` in this chain: the chain of
    /// complements of all terms containing `sigma`, after reordering each term
    /// so that `sigma` leads.
    pub fn link(&self, sigma: &[Vertex]) -> Result<Chain, ChainError> {
        let sig = canonicalize(sigma)?;
        if sigma.len() > self.dim {
            return Err(ChainError::Dimension(self.dim));
        }
        let mut out = Chain::zero(self.dim - sigma.len());
        for (s, &q) in &self.terms {
            if !sig.vertices.iter().all(|v| s.binary_search(v).is_ok()) {
                continue;
            }
            let rest: Vec<Vertex> = s.iter().copied().filter(|v| !sigma.contains(v)).collect();
            let mut ordered = sigma.to_vec();
            ordered.extend_from_slice(&rest);
            let eps = canonicalize(&ordered)?.sign;
            out.add_canonical(rest, q * i64::from(eps));
        }
        Ok(out)
    }

    /// Canonical textual key used for memoization.
    pub fn canonical_key(&self) -> String {
        let mut s = format!("{}:", self.dim);
        for (vs, q) in &self.terms {
            s.push_str(&format!("{q}["));
            for (i, v) in vs.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                s.push_str(&v.to_string());
            }
            s.push(']');
        }
        s
    }
}

impl fmt::Display for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (vs, q)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " {} ", if *q < 0 { '-' } else { '+' })?;
            } else if *q < 0 {
                write!(f, "-")?;
            }
            if q.abs() != 1 {
                write!(f, "{}", q.abs())?;
            }
            write!(f, "[")?;
            for v in vs {
                write!(f, "v{v}")?;
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}

/// `∂` of the oriented simplex on `vertices`, as a chain.
pub fn simplex_boundary(vertices: &[Vertex]) -> Result<Chain, ChainError> {
    canonicalize(vertices)?.to_chain().boundary()
}

/// Link of the oriented edge `[uv]` in a 3-cycle.
pub fn edge_link(z: &Chain, u: Vertex, v: Vertex) -> Result<Chain, ChainError> {
    let l = z.link(&[u, v])?;
    if l.is_zero() {
        return Err(ChainError::AbsentSimplex(vec![u, v]));
    }
    Ok(l)
}

/// Sum of absolute values of the coefficients of terms containing `sigma`.
pub fn link_weight(z: &Chain, sigma: &[Vertex]) -> Result<u64, ChainError> {
    let l = z.link(sigma)?;
    if l.is_zero() {
        return Err(ChainError::AbsentSimplex(sigma.to_vec()));
    }
    Ok(l.terms().map(|(_, q)| q.unsigned_abs()).sum())
}

fn positive_digraph(c: &Chain) -> BTreeMap<Vertex, BTreeSet<Vertex>> {
    let mut g: BTreeMap<Vertex, BTreeSet<Vertex>> = BTreeMap::new();
    for (e, q) in c.terms() {
        let (a, b) = if q > 0 { (e[0], e[1]) } else { (e[1], e[0]) };
        g.entry(a).or_default().insert(b);
    }
    g
}

fn walk_from(g: &BTreeMap<Vertex, BTreeSet<Vertex>>, start: Vertex) -> Option<Vec<Vertex>> {
    let mut path = vec![start];
    let mut seen: BTreeMap<Vertex, usize> = BTreeMap::new();
    seen.insert(start, 0);
    let mut cur = start;
    loop {
        let next = *g.get(&cur)?.iter().next()?;
        if let Some(&pos) = seen.get(&next) {
            return Some(path[pos..].to_vec());
        }
        seen.insert(next, path.len());
        path.push(next);
        cur = next;
    }
}

fn check_one_cycle(c: &Chain) -> Result<(), ChainError> {
    if c.dimension() != 1 {
        return Err(ChainError::Dimension(c.dimension()));
    }
    if c.is_zero() {
        return Err(ChainError::ZeroChain);
    }
    if !c.is_cycle() {
        return Err(ChainError::NotACycle);
    }
    Ok(())
}

/// The deterministic directed simple cycle of a nonzero 1-cycle: start at the
/// smallest vertex with an outgoing positive edge, follow the smallest
/// successor, and return the loop closed by the first repeated vertex.
pub fn directed_simple_cycle(c: &Chain) -> Result<Vec<Vertex>, ChainError> {
    check_one_cycle(c)?;
    let g = positive_digraph(c);
    let start = *g.keys().next().ok_or(ChainError::ZeroChain)?;
    walk_from(&g, start).ok_or(ChainError::NotACycle)
}

/// Alternative directed simple cycles, first the deterministic one, then the
/// greedy walks from every other start vertex, deduplicated up to rotation.
pub fn directed_simple_cycles(c: &Chain) -> Result<Vec<Vec<Vertex>>, ChainError> {
    check_one_cycle(c)?;
    let g = positive_digraph(c);
    let mut out: Vec<Vec<Vertex>> = Vec::new();
    let mut keys = BTreeSet::new();
    for &start in g.keys() {
        let Some(cyc) = walk_from(&g, start) else { continue };
        let key = rotate_to_min(&cyc);
        if keys.insert(key) {
            out.push(cyc);
        }
    }
    Ok(out)
}

fn rotate_to_min(c: &[Vertex]) -> Vec<Vertex> {
    let pos = c.iter().enumerate().min_by_key(|(_, v)| **v).map_or(0, |(i, _)| i);
    c[pos..].iter().chain(&c[..pos]).copied().collect()
}

/// Replaces `z` by `z - ∂eta`.
pub fn elementary_move(z: &Chain, eta: &Chain) -> Result<Chain, ChainError> {
    let b = eta.boundary()?;
    if b.dimension() != z.dimension() {
        return Err(ChainError::Dimension(eta.dimension()));
    }
    Ok(z.sub(&b))
}

/// The simplicial complex generated by the terms of a chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportComplex {
    dim: usize,
    simplices: Vec<BTreeSet<Vec<Vertex>>>,
    adjacency: BTreeMap<Vertex, BTreeSet<Vertex>>,
}

impl SupportComplex {
    pub fn from_facets<'a, I>(dim: usize, facets: I) -> Self
    where
        I: IntoIterator<Item = &'a Vec<Vertex>>,
    {
        let mut simplices = vec![BTreeSet::new(); dim + 1];
        for f in facets {
            let k = f.len();
            // all nonempty subsets
            for mask in 1u32..(1u32 << k) {
                let sub: Vec<Vertex> =
                    (0..k).filter(|i| mask & (1 << i) != 0).map(|i| f[i]).collect();
                simplices[sub.len() - 1].insert(sub);
            }
        }
        let mut adjacency: BTreeMap<Vertex, BTreeSet<Vertex>> = BTreeMap::new();
        if let Some(vs) = simplices.first() {
            for v in vs {
                adjacency.entry(v[0]).or_default();
            }
        }
        if dim >= 1 {
            for e in &simplices[1] {
                adjacency.entry(e[0]).or_default().insert(e[1]);
                adjacency.entry(e[1]).or_default().insert(e[0]);
            }
        }
        SupportComplex { dim, simplices, adjacency }
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    /// Simplices of dimension `k`, as sorted vertex lists.
    pub fn simplices(&self, k: usize) -> impl Iterator<Item = &[Vertex]> + '_ {
        self.simplices.get(k).into_iter().flatten().map(Vec::as_slice)
    }

    pub fn count(&self, k: usize) -> usize {
        self.simplices.get(k).map_or(0, BTreeSet::len)
    }

    pub fn contains(&self, simplex: &[Vertex]) -> bool {
        let Ok(s) = canonicalize(simplex) else { return false };
        self.simplices.get(s.vertices.len() - 1).is_some_and(|set| set.contains(&s.vertices))
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.adjacency.keys().copied()
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.simplices(1).map(|e| (e[0], e[1]))
    }

    pub fn neighbors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        self.adjacency.get(&v).into_iter().flatten().copied()
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.adjacency.get(&u).is_some_and(|n| n.contains(&v))
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adjacency.get(&v).map_or(0, BTreeSet::len)
    }

    /// Number of `(k+1)`-simplices containing the `k`-simplex `tau`.
    pub fn cofacet_count(&self, tau: &[Vertex]) -> usize {
        let k = tau.len();
        self.simplices
            .get(k)
            .into_iter()
            .flatten()
            .filter(|s| tau.iter().all(|v| s.binary_search(v).is_ok()))
            .count()
    }
}

pub fn vertex_degrees(k: &SupportComplex) -> Result<BTreeMap<Vertex, usize>, ChainError> {
    if k.is_empty() {
        return Err(ChainError::EmptyComplex);
    }
    Ok(k.vertices().map(|v| (v, k.degree(v))).collect())
}

/// Smallest identifier among the vertices of minimal degree.
pub fn min_degree_vertex(k: &SupportComplex) -> Result<Vertex, ChainError> {
    let degs = vertex_degrees(k)?;
    let min = *degs.values().min().ok_or(ChainError::EmptyComplex)?;
    Ok(*degs.iter().find(|(_, &d)| d == min).map(|(v, _)| v).ok_or(ChainError::EmptyComplex)?)
}

/// Complexity vector `(m(K), m(τ⁰,K), …)`, ordered lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MVector(pub Vec<usize>);

impl fmt::Display for MVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, m) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, ")")
    }
}

/// A chain of simplices `τ⁰ ⊂ τ¹ ⊂ … ⊂ τ^{n−4}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Flag(pub Vec<Vec<Vertex>>);

/// Lexicographically minimal `(n−4)`-flag, ties broken by vertex identifiers.
pub fn minimal_flag(k: &SupportComplex, n: usize) -> Result<(Flag, MVector), ChainError> {
    if n < 3 {
        return Err(ChainError::UnsupportedDimension(n));
    }
    let len = n - 2;
    if k.is_empty() {
        return Ok((Flag::default(), MVector(vec![0; len])));
    }
    let m = k.vertex_count();
    if n == 3 {
        return Ok((Flag::default(), MVector(vec![m])));
    }
    if k.dimension() + 4 < n + 1 {
        // the complex is too small to carry an (n-4)-flag
        return Err(ChainError::UnsupportedDimension(n));
    }
    let mut best: Option<(Vec<usize>, Vec<Vec<Vertex>>)> = None;
    let mut stack: Vec<(Vec<Vec<Vertex>>, Vec<usize>)> = k
        .simplices(0)
        .map(|v| (vec![v.to_vec()], vec![m, k.cofacet_count(v)]))
        .collect();
    stack.reverse();
    while let Some((flag, mv)) = stack.pop() {
        if let Some((b, _)) = &best {
            if mv.as_slice() > &b[..mv.len()] {
                continue;
            }
        }
        if flag.len() == n - 3 {
            let better = match &best {
                None => true,
                Some((b, bf)) => (&mv, &flag) < (b, bf),
            };
            if better {
                best = Some((mv, flag));
            }
            continue;
        }
        let last = flag.last().expect("flag nonempty");
        let mut next: Vec<_> = k
            .simplices(last.len())
            .filter(|s| last.iter().all(|v| s.binary_search(v).is_ok()))
            .map(|s| {
                let mut f = flag.clone();
                f.push(s.to_vec());
                let mut m2 = mv.clone();
                m2.push(k.cofacet_count(s));
                (f, m2)
            })
            .collect();
        next.reverse();
        stack.extend(next);
    }
    let (mv, flag) = best.ok_or(ChainError::EmptyComplex)?;
    Ok((Flag(flag), MVector(mv)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn boundary_of(vs: &[Vertex]) -> Chain {
        simplex_boundary(vs).unwrap()
    }

    fn cross_polytope_16cell() -> Chain {
        // vertex 2i ↦ +e_i, 2i+1 ↦ −e_i
        let mut z = Chain::zero(3);
        for signs in 0..16u32 {
            let vs: Vec<Vertex> = (0..4).map(|i| 2 * i + ((signs >> i) & 1)).collect();
            let parity = signs.count_ones() % 2;
            z.add_term(if parity == 0 { 1 } else { -1 }, &vs).unwrap();
        }
        z
    }

    #[test]
    fn canonical_signs() {
        let s = canonicalize(&[2, 1]).unwrap();
        assert_eq!((s.vertices(), s.sign()), (&[1, 2][..], -1));
        let s = canonicalize(&[1, 2, 3]).unwrap();
        assert_eq!((s.vertices(), s.sign()), (&[1, 2, 3][..], 1));
        let s = canonicalize(&[3, 1, 2]).unwrap();
        assert_eq!((s.vertices(), s.sign()), (&[1, 2, 3][..], 1));
        assert!(matches!(canonicalize(&[1, 2, 1]), Err(ChainError::InvalidSimplex(_))));
    }

    #[test]
    fn boundary_of_edge_and_squares() {
        let b = boundary_of(&[0, 1]);
        assert_eq!(b.coefficient(&[1]), 1);
        assert_eq!(b.coefficient(&[0]), -1);
        assert!(boundary_of(&[0, 1, 2]).boundary().unwrap().is_zero());
        assert!(boundary_of(&[0, 1, 2, 3, 4]).boundary().unwrap().is_zero());
        assert_eq!(Chain::zero(0).boundary(), Err(ChainError::Dimension(0)));
    }

    #[test]
    fn cycle_and_support_of_simplex_boundary() {
        let z = boundary_of(&[0, 1, 2, 3, 4]);
        assert!(z.is_cycle());
        let k = z.support();
        assert_eq!([k.count(0), k.count(1), k.count(2), k.count(3)], [5, 10, 10, 5]);
        let single = Chain::from_terms(3, [(1, [0, 1, 2, 3])]).unwrap();
        assert!(!single.is_cycle());
    }

    #[test]
    fn edge_links() {
        let z = boundary_of(&[0, 1, 2, 3, 4]);
        let l = edge_link(&z, 0, 1).unwrap();
        assert!(l.is_cycle());
        assert_eq!(l.vertices(), [2, 3, 4].into_iter().collect());
        assert_eq!(l.len(), 3);
        assert_eq!(link_weight(&z, &[0, 1]).unwrap(), 3);
        assert_eq!(edge_link(&z, 1, 0).unwrap(), l.scale(-1));

        let c = cross_polytope_16cell();
        assert!(c.is_cycle());
        let l = edge_link(&c, 0, 2).unwrap();
        assert_eq!(l.vertices(), [4, 5, 6, 7].into_iter().collect());
        assert_eq!(l.len(), 4);
        assert_eq!(link_weight(&c, &[0, 2]).unwrap(), 4);
        assert_eq!(link_weight(&z.scale(2), &[3, 4]).unwrap(), 6);

        // antipodal vertices are not joined
        assert!(matches!(edge_link(&c, 0, 1), Err(ChainError::AbsentSimplex(_))));
    }

    #[test]
    fn simple_cycles() {
        let tri = Chain::from_terms(1, [(1, [1, 2]), (1, [2, 3]), (1, [3, 1])]).unwrap();
        assert_eq!(directed_simple_cycle(&tri).unwrap(), vec![1, 2, 3]);
        let sq = Chain::from_terms(1, [(1, [10, 11]), (1, [11, 12]), (1, [12, 13]), (1, [13, 10])])
            .unwrap();
        assert_eq!(directed_simple_cycle(&sq).unwrap(), vec![10, 11, 12, 13]);
        assert_eq!(directed_simple_cycle(&tri.scale(2)).unwrap(), vec![1, 2, 3]);
        assert_eq!(directed_simple_cycle(&Chain::zero(1)), Err(ChainError::ZeroChain));
        let path = Chain::from_terms(1, [(1, [1, 2])]).unwrap();
        assert_eq!(directed_simple_cycle(&path), Err(ChainError::NotACycle));
        // reversed orientation walks the other way
        assert_eq!(directed_simple_cycle(&tri.scale(-1)).unwrap(), vec![1, 3, 2]);
    }

    #[test]
    fn moves() {
        let eta = canonicalize(&[0, 1, 2, 3, 4]).unwrap().to_chain();
        let z = eta.boundary().unwrap();
        assert!(elementary_move(&z, &eta).unwrap().is_zero());
        assert_eq!(elementary_move(&Chain::zero(3), &eta).unwrap(), z.scale(-1));
        let eta2 = canonicalize(&[0, 1, 2, 3, 5]).unwrap().to_chain();
        let z2 = z.sub(&eta2.boundary().unwrap());
        assert_eq!(elementary_move(&z2, &eta).unwrap(), eta2.boundary().unwrap().scale(-1));
    }

    #[test]
    fn degrees_and_flags() {
        let k = boundary_of(&[0, 1, 2, 3, 4]).support();
        assert!(vertex_degrees(&k).unwrap().values().all(|&d| d == 4));
        let (flag, m) = minimal_flag(&k, 4).unwrap();
        assert_eq!(flag.0, vec![vec![0]]);
        assert_eq!(m, MVector(vec![5, 4]));

        let c = cross_polytope_16cell().support();
        assert!(vertex_degrees(&c).unwrap().values().all(|&d| d == 6));
        assert_eq!(minimal_flag(&c, 4).unwrap().1, MVector(vec![8, 6]));

        let tet = Chain::from_terms(3, [(1, [0, 1, 2, 3])]).unwrap().support();
        assert!(vertex_degrees(&tet).unwrap().values().all(|&d| d == 3));

        let empty = Chain::zero(3).support();
        assert_eq!(vertex_degrees(&empty), Err(ChainError::EmptyComplex));
        assert_eq!(minimal_flag(&empty, 4).unwrap().1, MVector(vec![0, 0]));
    }

    #[test]
    fn five_dimensional_flags_enumerate() {
        let k = boundary_of(&[0, 1, 2, 3, 4, 5]).support();
        let (flag, m) = minimal_flag(&k, 5).unwrap();
        assert_eq!(flag.0, vec![vec![0], vec![0, 1]]);
        assert_eq!(m, MVector(vec![6, 5, 4]));
    }
}
