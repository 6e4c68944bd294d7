//! Sparse multivariate polynomials over the rationals and resultants.
//!
//! Terms are kept in graded lexicographic order. Variables are `Var`
//! handles whose numeric encoding fixes their relative order: the volume
//! symbol comes first, then simplex volumes, short diagonals `d_j`, first-vertex
//! diagonals `D_j`, and finally edge symbols `l_{uv}` ordered by `(u, v)`.

mod modular;

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::chains::Vertex;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("both polynomials are constant in {0}")]
    ConstantInVariable(VarSymbol),
    #[error("zero polynomial has no content")]
    ZeroContent,
    #[error("inexact polynomial division")]
    InexactDivision,
    #[error("no value assigned to {0}")]
    Unassigned(VarSymbol),
    #[error("time budget exhausted")]
    BudgetExhausted,
    #[error("resultant too large: Sylvester order {order}, result degree bound {degree}")]
    TooLarge { order: usize, degree: usize },
}

/// Optional wall-clock limit checked between elimination steps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Budget {
    deadline: Option<std::time::Instant>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget { deadline: None }
    }

    pub fn until(deadline: std::time::Instant) -> Self {
        Budget { deadline: Some(deadline) }
    }

    pub fn deadline(&self) -> Option<std::time::Instant> {
        self.deadline
    }

    pub fn check(&self) -> Result<(), PolyError> {
        match self.deadline {
            Some(d) if std::time::Instant::now() > d => Err(PolyError::BudgetExhausted),
            _ => Ok(()),
        }
    }
}

const KIND_SHIFT: u32 = 28;
const VERTEX_BITS: u32 = 14;
const VERTEX_MASK: u32 = (1 << VERTEX_BITS) - 1;

/// A named indeterminate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarSymbol {
    /// The generalized volume `V`.
    Volume,
    /// The volume of an auxiliary simplex.
    SimplexVolume(u32),
    /// Short diagonal `d_j`.
    ShortDiagonal(u32),
    /// First-vertex diagonal `D_j`.
    LongDiagonal(u32),
    /// Squared edge length `l_{uv} = l_{vu}`.
    Edge(Vertex, Vertex),
}

impl VarSymbol {
    pub fn edge(u: Vertex, v: Vertex) -> Self {
        if u <= v {
            VarSymbol::Edge(u, v)
        } else {
            VarSymbol::Edge(v, u)
        }
    }
}

impl fmt::Display for VarSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarSymbol::Volume => write!(f, "V"),
            VarSymbol::SimplexVolume(i) => write!(f, "W{i}"),
            VarSymbol::ShortDiagonal(j) => write!(f, "d{j}"),
            VarSymbol::LongDiagonal(j) => write!(f, "D{j}"),
            VarSymbol::Edge(u, v) => write!(f, "l{u}_{v}"),
        }
    }
}

impl std::str::FromStr for VarSymbol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("unknown symbol {s:?}");
        if s == "V" {
            return Ok(VarSymbol::Volume);
        }
        if let Some(rest) = s.strip_prefix('l') {
            let (a, b) = rest.split_once('_').ok_or_else(bad)?;
            return Ok(VarSymbol::edge(a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?));
        }
        let (head, num) = s.split_at(1);
        let i: u32 = num.parse().map_err(|_| bad())?;
        match head {
            "W" => Ok(VarSymbol::SimplexVolume(i)),
            "d" => Ok(VarSymbol::ShortDiagonal(i)),
            "D" => Ok(VarSymbol::LongDiagonal(i)),
            _ => Err(bad()),
        }
    }
}

/// Compact handle for a `VarSymbol`; the encoding defines the term order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(u32);

impl Var {
    pub fn symbol(self) -> VarSymbol {
        let kind = self.0 >> KIND_SHIFT;
        let low = self.0 & ((1 << KIND_SHIFT) - 1);
        match kind {
            0 => VarSymbol::Volume,
            1 => VarSymbol::SimplexVolume(low),
            2 => VarSymbol::ShortDiagonal(low),
            3 => VarSymbol::LongDiagonal(low),
            _ => VarSymbol::Edge(low >> VERTEX_BITS, low & VERTEX_MASK),
        }
    }
}

impl From<VarSymbol> for Var {
    fn from(s: VarSymbol) -> Self {
        let enc = |kind: u32, low: u32| {
            assert!(low < (1 << KIND_SHIFT), "symbol index out of range");
            Var((kind << KIND_SHIFT) | low)
        };
        match s {
            VarSymbol::Volume => Var(0),
            VarSymbol::SimplexVolume(i) => enc(1, i),
            VarSymbol::ShortDiagonal(j) => enc(2, j),
            VarSymbol::LongDiagonal(j) => enc(3, j),
            VarSymbol::Edge(u, v) => {
                let (u, v) = if u <= v { (u, v) } else { (v, u) };
                assert!(v <= VERTEX_MASK, "vertex identifier too large for a symbol");
                enc(4, (u << VERTEX_BITS) | v)
            }
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.symbol().fmt(f)
    }
}

/// Sparse exponent vector sorted by variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(Var, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: Var, e: u32) -> Self {
        if e == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(v, e)])
        }
    }

    pub fn from_pairs(mut pairs: Vec<(Var, u32)>) -> Self {
        pairs.retain(|&(_, e)| e > 0);
        pairs.sort_by_key(|&(v, _)| v);
        let mut out: Vec<(Var, u32)> = Vec::with_capacity(pairs.len());
        for (v, e) in pairs {
            match out.last_mut() {
                Some((w, f)) if *w == v => *f += e,
                _ => out.push((v, e)),
            }
        }
        Monomial(out)
    }

    pub fn pairs(&self) -> &[(Var, u32)] {
        &self.0
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn degree(&self, v: Var) -> u32 {
        self.0.iter().find(|&&(w, _)| w == v).map_or(0, |&(_, e)| e)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// `self / other` if `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut j = 0;
        for &(v, e) in &self.0 {
            if j < other.0.len() && other.0[j].0 == v {
                let f = other.0[j].1;
                if f > e {
                    return None;
                }
                if e > f {
                    out.push((v, e - f));
                }
                j += 1;
            } else if j < other.0.len() && other.0[j].0 < v {
                return None;
            } else {
                out.push((v, e));
            }
        }
        if j < other.0.len() {
            return None;
        }
        Some(Monomial(out))
    }

    /// Removes `v` and returns its exponent.
    pub fn split_off(&self, v: Var) -> (u32, Monomial) {
        let mut e = 0;
        let rest = self
            .0
            .iter()
            .filter(|&&(w, f)| {
                if w == v {
                    e = f;
                    false
                } else {
                    true
                }
            })
            .copied()
            .collect();
        (e, Monomial(rest))
    }

    pub fn is_divisible_by(&self, other: &Monomial) -> bool {
        other.0.iter().all(|&(v, e)| self.degree(v) >= e)
    }
}

impl Ord for Monomial {
    /// Graded lexicographic order; smaller variable handles are more significant.
    fn cmp(&self, other: &Self) -> Ordering {
        match self.total_degree().cmp(&other.total_degree()) {
            Ordering::Equal => {}
            o => return o,
        }
        for (a, b) in self.0.iter().zip(&other.0) {
            if a.0 != b.0 {
                return if a.0 < b.0 { Ordering::Greater } else { Ordering::Less };
            }
            if a.1 != b.1 {
                return a.1.cmp(&b.1);
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, (v, e)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            write!(f, "{v}")?;
            if *e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// Coefficient ring for [`Poly`].
pub trait Coeff:
    Clone + PartialEq + fmt::Debug + fmt::Display + Zero + One + Signed + Send + Sync
{
    /// `a / b`, assuming the quotient is exact in the ring.
    fn exact_div(a: &Self, b: &Self) -> Option<Self>;
}

impl Coeff for BigRational {
    fn exact_div(a: &Self, b: &Self) -> Option<Self> {
        if b.is_zero() {
            None
        } else {
            Some(a / b)
        }
    }
}

impl Coeff for BigInt {
    fn exact_div(a: &Self, b: &Self) -> Option<Self> {
        if b.is_zero() {
            return None;
        }
        let (q, r) = a.div_rem(b);
        r.is_zero().then_some(q)
    }
}

/// Sparse polynomial; no zero coefficient is ever stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Poly<C> {
    terms: BTreeMap<Monomial, C>,
}

/// Polynomial with exact rational coefficients.
pub type MultiPoly = Poly<BigRational>;
/// Polynomial with integer coefficients, used inside eliminations.
pub type IntPoly = Poly<BigInt>;

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl<C: Coeff> Default for Poly<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<C: Coeff> Poly<C> {
    pub fn zero() -> Self {
        Poly { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::constant(C::one())
    }

    pub fn constant(c: C) -> Self {
        let mut p = Self::zero();
        if !c.is_zero() {
            p.terms.insert(Monomial::one(), c);
        }
        p
    }

    pub fn var(v: impl Into<Var>) -> Self {
        Self::monomial(C::one(), Monomial::var(v.into(), 1))
    }

    pub fn monomial(c: C, m: Monomial) -> Self {
        let mut p = Self::zero();
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, C)>) -> Self {
        let mut p = Self::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&Monomial::one()).is_some_and(|c| c.is_one())
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    /// Constant term value when the polynomial is constant.
    pub fn as_constant(&self) -> Option<C> {
        if self.is_zero() {
            return Some(C::zero());
        }
        if self.is_constant() {
            return self.terms.values().next().cloned();
        }
        None
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in increasing graded lexicographic order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &C)> + '_ {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &C)> {
        self.terms.iter().next_back()
    }

    pub fn add_term(&mut self, m: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().clone() + c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn variables(&self) -> Vec<Var> {
        let mut vs: Vec<Var> = self.terms.keys().flat_map(|m| m.0.iter().map(|&(v, _)| v)).collect();
        vs.sort();
        vs.dedup();
        vs
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::total_degree).max()
    }

    /// Degree in `v`; `None` for the zero polynomial.
    pub fn degree(&self, v: impl Into<Var>) -> Option<u32> {
        let v = v.into();
        self.terms.keys().map(|m| m.degree(v)).max()
    }

    /// Total degree in the given set of variables.
    pub fn degree_in(&self, vars: &[Var]) -> Option<u32> {
        self.terms.keys().map(|m| vars.iter().map(|&v| m.degree(v)).sum()).max()
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, a)| (m.clone(), a.clone() * c.clone())).collect() }
    }

    pub fn mul_monomial(&self, mono: &Monomial) -> Self {
        Poly { terms: self.terms.iter().map(|(m, a)| (m.mul(mono), a.clone())).collect() }
    }

    pub fn add_ref(&self, other: &Self) -> Self {
        let (mut big, small) = if self.len() >= other.len() { (self.clone(), other) } else { (other.clone(), self) };
        for (m, c) in &small.terms {
            big.add_term(m.clone(), c.clone());
        }
        big
    }

    pub fn sub_ref(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn mul_ref(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        if self.len() > other.len() {
            return other.mul_ref(self);
        }
        let mut acc: HashMap<Monomial, C> = HashMap::with_capacity((self.len() * other.len()).min(1 << 16));
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.mul(mb);
                let c = ca.clone() * cb.clone();
                match acc.get_mut(&m) {
                    Some(x) => *x = x.clone() + c,
                    None => {
                        acc.insert(m, c);
                    }
                }
            }
        }
        Poly { terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut result = Self::one();
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_ref(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_ref(&base);
            }
        }
        result
    }

    /// Coefficients of `self` viewed as a polynomial in `v`, indexed by power.
    pub fn to_univariate(&self, v: impl Into<Var>) -> Vec<Self> {
        let v = v.into();
        let deg = self.degree(v).unwrap_or(0) as usize;
        let mut out = vec![Self::zero(); deg + 1];
        if self.is_zero() {
            return Vec::new();
        }
        for (m, c) in &self.terms {
            let (e, rest) = m.split_off(v);
            out[e as usize].terms.insert(rest, c.clone());
        }
        out
    }

    pub fn from_univariate(coeffs: &[Self], v: impl Into<Var>) -> Self {
        let v = v.into();
        let mut out = Self::zero();
        for (e, c) in coeffs.iter().enumerate() {
            let mono = Monomial::var(v, e as u32);
            for (m, a) in &c.terms {
                out.add_term(m.mul(&mono), a.clone());
            }
        }
        out
    }

    /// Coefficient of `v^k` as a polynomial in the remaining variables.
    pub fn coefficient_of(&self, v: impl Into<Var>, k: u32) -> Self {
        let v = v.into();
        Poly {
            terms: self
                .terms
                .iter()
                .filter_map(|(m, c)| {
                    let (e, rest) = m.split_off(v);
                    (e == k).then(|| (rest, c.clone()))
                })
                .collect(),
        }
    }

    /// Replaces `v` by the polynomial `value` everywhere.
    pub fn substitute(&self, v: impl Into<Var>, value: &Self) -> Self {
        let v = v.into();
        let coeffs = self.to_univariate(v);
        let mut acc = Self::zero();
        for c in coeffs.iter().rev() {
            acc = acc.mul_ref(value).add_ref(c);
        }
        acc
    }

    /// Exact quotient `self / divisor`.
    pub fn div_exact(&self, divisor: &Self) -> Result<Self, PolyError> {
        if divisor.is_zero() {
            return Err(PolyError::InexactDivision);
        }
        if let Some(c) = divisor.as_constant() {
            let mut out = Self::zero();
            for (m, a) in &self.terms {
                let q = C::exact_div(a, &c).ok_or(PolyError::InexactDivision)?;
                out.terms.insert(m.clone(), q);
            }
            return Ok(out);
        }
        let (lm, lc) = divisor.leading_term().map(|(m, c)| (m.clone(), c.clone())).expect("nonzero");
        let mut rem = self.clone();
        let mut quot = Self::zero();
        while let Some((m, c)) = rem.leading_term().map(|(m, c)| (m.clone(), c.clone())) {
            let qm = m.div(&lm).ok_or(PolyError::InexactDivision)?;
            let qc = C::exact_div(&c, &lc).ok_or(PolyError::InexactDivision)?;
            for (dm, dc) in &divisor.terms {
                rem.add_term(dm.mul(&qm), -(dc.clone() * qc.clone()));
            }
            quot.terms.insert(qm, qc);
        }
        Ok(quot)
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Poly<D> {
        Poly::from_terms(self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }
}

impl MultiPoly {
    pub fn from_int(n: i64) -> Self {
        Self::constant(rat(n))
    }

    pub fn sym(s: VarSymbol) -> Self {
        Self::var(Var::from(s))
    }

    /// Substitutes rational values for the assigned variables.
    pub fn specialize(&self, assignment: &HashMap<Var, BigRational>) -> Self {
        if assignment.is_empty() {
            return self.clone();
        }
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut rest = Vec::with_capacity(m.0.len());
            for &(v, e) in &m.0 {
                match assignment.get(&v) {
                    Some(x) => coeff *= num_traits::pow(x.clone(), e as usize),
                    None => rest.push((v, e)),
                }
            }
            out.add_term(Monomial(rest), coeff);
        }
        out
    }

    /// Evaluates at a complete assignment.
    pub fn evaluate(&self, assignment: &HashMap<Var, BigRational>) -> Result<BigRational, PolyError> {
        let s = self.specialize(assignment);
        if let Some(v) = s.variables().first() {
            return Err(PolyError::Unassigned(v.symbol()));
        }
        Ok(s.as_constant().unwrap_or_else(BigRational::zero))
    }

    pub fn evaluate_f64(&self, assignment: &HashMap<Var, f64>) -> Result<f64, PolyError> {
        let mut sum = 0.0;
        for (m, c) in &self.terms {
            let mut t = to_f64(c);
            for &(v, e) in &m.0 {
                let x = assignment.get(&v).ok_or(PolyError::Unassigned(v.symbol()))?;
                t *= x.powi(e as i32);
            }
            sum += t;
        }
        Ok(sum)
    }

    /// Rational content: gcd of numerators over lcm of denominators, signed so
    /// that dividing by it leaves a positive leading coefficient.
    pub fn content(&self) -> Result<BigRational, PolyError> {
        let lead = self.leading_term().ok_or(PolyError::ZeroContent)?.1.clone();
        let mut g = BigInt::zero();
        let mut l = BigInt::one();
        for c in self.terms.values() {
            g = g.gcd(c.numer());
            l = l.lcm(c.denom());
        }
        let mut content = BigRational::new(g, l);
        if lead.is_negative() {
            content = -content;
        }
        Ok(content)
    }

    /// Divides out the content: coprime integer coefficients, positive leading term.
    pub fn normalize_content(&self) -> Result<Self, PolyError> {
        let c = self.content()?;
        Ok(self.scale(&c.recip()))
    }

    /// Integer polynomial `k·self` with `k > 0` the lcm of denominators.
    pub fn clear_denominators(&self) -> (IntPoly, BigInt) {
        let mut l = BigInt::one();
        for c in self.terms.values() {
            l = l.lcm(c.denom());
        }
        let p = IntPoly::from_terms(
            self.terms.iter().map(|(m, c)| (m.clone(), (c * BigRational::from_integer(l.clone())).to_integer())),
        );
        (p, l)
    }

    pub fn from_int_poly(p: &IntPoly) -> Self {
        p.map_coeffs(|c| BigRational::from_integer(c.clone()))
    }
}

impl IntPoly {
    pub fn content_int(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in self.terms.values() {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    pub fn primitive_part(&self) -> Self {
        let g = self.content_int();
        if g.is_zero() || g.is_one() {
            return self.clone();
        }
        self.map_coeffs(|c| c / &g)
    }
}

pub fn to_f64(c: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    c.to_f64().unwrap_or_else(|| {
        // fall back through scaled integers for very large operands
        let n = c.numer().bits() as i64;
        let d = c.denom().bits() as i64;
        let shift = (n - d).clamp(-1000, 1000);
        let scaled = if shift > 0 {
            BigRational::new(c.numer().clone(), c.denom() << (shift as usize))
        } else {
            BigRational::new(c.numer() << ((-shift) as usize), c.denom().clone())
        };
        scaled.to_f64().unwrap_or(f64::NAN) * 2f64.powi(shift as i32)
    })
}

impl<C: Coeff> Add for &Poly<C> {
    type Output = Poly<C>;
    fn add(self, rhs: Self) -> Poly<C> {
        self.add_ref(rhs)
    }
}

impl<C: Coeff> Sub for &Poly<C> {
    type Output = Poly<C>;
    fn sub(self, rhs: Self) -> Poly<C> {
        self.sub_ref(rhs)
    }
}

impl<C: Coeff> Mul for &Poly<C> {
    type Output = Poly<C>;
    fn mul(self, rhs: Self) -> Poly<C> {
        self.mul_ref(rhs)
    }
}

impl<C: Coeff> Add for Poly<C> {
    type Output = Poly<C>;
    fn add(self, rhs: Self) -> Poly<C> {
        self.add_ref(&rhs)
    }
}

impl<C: Coeff> Sub for Poly<C> {
    type Output = Poly<C>;
    fn sub(self, rhs: Self) -> Poly<C> {
        self.sub_ref(&rhs)
    }
}

impl<C: Coeff> Mul for Poly<C> {
    type Output = Poly<C>;
    fn mul(self, rhs: Self) -> Poly<C> {
        self.mul_ref(&rhs)
    }
}

impl<C: Coeff> Neg for &Poly<C> {
    type Output = Poly<C>;
    fn neg(self) -> Poly<C> {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect() }
    }
}

impl<C: Coeff> Neg for Poly<C> {
    type Output = Poly<C>;
    fn neg(self) -> Poly<C> {
        -&self
    }
}

impl<C: Coeff> fmt::Display for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if i > 0 {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            } else if neg {
                write!(f, "-")?;
            }
            if m.is_one() {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{a}*{m}")?;
            }
        }
        Ok(())
    }
}

/// Degree of `a` in `v` and the coefficient of its top power; the zero
/// polynomial reports `None` (degree −∞) and a zero coefficient.
pub fn degree_lc(a: &MultiPoly, v: impl Into<Var>) -> (Option<u32>, MultiPoly) {
    let v = v.into();
    match a.degree(v) {
        None => (None, MultiPoly::zero()),
        Some(d) => (Some(d), a.coefficient_of(v, d)),
    }
}

/// Determinant of a square matrix of polynomials by fraction-free Bareiss
/// elimination; every division is exact in the polynomial ring.
pub fn bareiss_determinant<C: Coeff>(m: Vec<Vec<Poly<C>>>) -> Poly<C> {
    bareiss_within(m, &Budget::unlimited()).expect("no deadline")
}

fn bareiss_within<C: Coeff>(mut m: Vec<Vec<Poly<C>>>, budget: &Budget) -> Result<Poly<C>, PolyError> {
    let n = m.len();
    if n == 0 {
        return Ok(Poly::one());
    }
    let mut sign = false;
    let mut prev = Poly::<C>::one();
    for k in 0..n - 1 {
        budget.check()?;
        if m[k][k].is_zero() {
            // pick the sparsest nonzero pivot below
            let pivot = (k + 1..n).filter(|&i| !m[i][k].is_zero()).min_by_key(|&i| m[i][k].len());
            match pivot {
                Some(p) => {
                    m.swap(k, p);
                    sign = !sign;
                }
                None => return Ok(Poly::zero()),
            }
        }
        let (head, tail) = m.split_at_mut(k + 1);
        let pivot_row = &head[k];
        let pkk = &pivot_row[k];
        let update = |row: &mut Vec<Poly<C>>| {
            let rik = row[k].clone();
            for j in k + 1..n {
                let t = pkk.mul_ref(&row[j]).sub_ref(&rik.mul_ref(&pivot_row[j]));
                row[j] = if prev.is_one() { t } else { t.div_exact(&prev).expect("Bareiss division is exact") };
            }
            row[k] = Poly::zero();
        };
        if n - k > 4 {
            use rayon::prelude::*;
            tail.par_iter_mut().for_each(update);
        } else {
            tail.iter_mut().for_each(update);
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    Ok(if sign { -d } else { d })
}

/// Determinant by cofactor expansion along the first row; for small matrices.
pub fn expansion_determinant<C: Coeff>(m: &[Vec<Poly<C>>]) -> Poly<C> {
    let n = m.len();
    match n {
        0 => Poly::one(),
        1 => m[0][0].clone(),
        _ => {
            let mut acc = Poly::zero();
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<Poly<C>>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, x)| x.clone()).collect())
                    .collect();
                let t = m[0][j].mul_ref(&expansion_determinant(&minor));
                acc = if j % 2 == 0 { acc.add_ref(&t) } else { acc.sub_ref(&t) };
            }
            acc
        }
    }
}

/// Determinant with the matrix-size dispatch used throughout the crate.
pub fn determinant<C: Coeff>(m: Vec<Vec<Poly<C>>>) -> Poly<C> {
    if m.len() <= 3 {
        expansion_determinant(&m)
    } else {
        bareiss_determinant(m)
    }
}

/// Sylvester matrix of `f = Σ f_i x^i` (degree `m`) and `g` (degree `n`),
/// with coefficient lists indexed by power.
pub fn sylvester_matrix<C: Coeff>(f: &[Poly<C>], g: &[Poly<C>]) -> Vec<Vec<Poly<C>>> {
    let m = f.len() - 1;
    let n = g.len() - 1;
    let size = m + n;
    let mut rows = Vec::with_capacity(size);
    for i in 0..n {
        let mut row = vec![Poly::zero(); size];
        for (k, c) in f.iter().rev().enumerate() {
            row[i + k] = c.clone();
        }
        rows.push(row);
    }
    for i in 0..m {
        let mut row = vec![Poly::zero(); size];
        for (k, c) in g.iter().rev().enumerate() {
            row[i + k] = c.clone();
        }
        rows.push(row);
    }
    rows
}

fn trim(mut c: Vec<IntPoly>) -> Vec<IntPoly> {
    while c.len() > 1 && c.last().is_some_and(Poly::is_zero) {
        c.pop();
    }
    c
}

/// Resultant of `f` and `g` with respect to `v`, as the determinant of their
/// Sylvester matrix.
pub fn resultant(f: &MultiPoly, g: &MultiPoly, v: impl Into<Var>) -> Result<MultiPoly, PolyError> {
    resultant_within(f, g, v, &Budget::unlimited())
}

/// [`resultant`] with a wall-clock budget.
pub fn resultant_within(f: &MultiPoly, g: &MultiPoly, v: impl Into<Var>, budget: &Budget) -> Result<MultiPoly, PolyError> {
    let v = v.into();
    let df = f.degree(v).unwrap_or(0);
    let dg = g.degree(v).unwrap_or(0);
    if df == 0 && dg == 0 {
        return Err(PolyError::ConstantInVariable(v.symbol()));
    }
    if f.is_zero() || g.is_zero() {
        return Ok(MultiPoly::zero());
    }
    budget.check()?;
    let (fi, kf) = f.clear_denominators();
    let (gi, kg) = g.clear_denominators();
    let r = int_resultant_within(&fi, &gi, v, budget)?;
    // Res(kf·f, kg·g) = kf^deg g · kg^deg f · Res(f, g)
    let scale = BigRational::from_integer(num_traits::pow(kf, dg as usize) * num_traits::pow(kg, df as usize));
    Ok(MultiPoly::from_int_poly(&r).scale(&scale.recip()))
}

/// Resultant over the integers. Uses a closed form when one side is quadratic
/// with constant leading coefficient, evaluation and interpolation modulo
/// primes when few variables remain, and Bareiss on the Sylvester matrix
/// otherwise.
pub fn int_resultant(f: &IntPoly, g: &IntPoly, v: Var) -> IntPoly {
    int_resultant_within(f, g, v, &Budget::unlimited()).expect("no deadline")
}

fn int_resultant_within(f: &IntPoly, g: &IntPoly, v: Var, budget: &Budget) -> Result<IntPoly, PolyError> {
    let fc = trim(f.to_univariate(v));
    let gc = trim(g.to_univariate(v));
    // Res(f, g) = (-1)^{2·deg g} Res(g, f)
    if fc.len() == 3 && fc[2].is_constant() && gc.len() > 1 {
        return Ok(quadratic_resultant(&fc, &gc));
    }
    if gc.len() == 3 && gc[2].is_constant() && fc.len() > 1 {
        return Ok(quadratic_resultant(&gc, &fc));
    }
    if fc.len() == 1 {
        return Ok(fc[0].pow((gc.len() - 1) as u32));
    }
    if gc.len() == 1 {
        return Ok(gc[0].pow((fc.len() - 1) as u32));
    }
    let order = fc.len() + gc.len() - 2;
    if order > 4 {
        match modular::resultant(&fc, &gc, budget)? {
            modular::Outcome::Done(r) => return Ok(r),
            modular::Outcome::TooLarge(degree) if order >= MAX_BAREISS_ORDER => {
                return Err(PolyError::TooLarge { order, degree });
            }
            _ => {}
        }
    }
    bareiss_within(sylvester_matrix(&fc, &gc), budget)
}

/// Sylvester orders from which Bareiss is not attempted once the modular
/// path has declined.
const MAX_BAREISS_ORDER: usize = 24;

/// `Res(q, f)` for `q = a x² + b x + c` with constant `a`:
/// `a^{deg f} ∏ f(α)` over the roots of `q`, computed from `f mod q`.
fn quadratic_resultant(q: &[IntPoly], f: &[IntPoly]) -> IntPoly {
    let a = q[2].as_constant().expect("constant leading coefficient");
    let (b, c) = (&q[1], &q[0]);
    // reduce f modulo q over Z[1/a]: track A + B x with a common factor a^k
    let deg_f = f.len() - 1;
    let a_poly = IntPoly::constant(a.clone());
    // Horner: R = R·x + f_i, with R = A + B x and x² ≡ -(b x + c)/a
    let mut ra = IntPoly::zero();
    let mut rb = IntPoly::zero();
    let mut scale_pow = 0u32; // R is stored as a^{scale_pow} · R_true
    for fi in f.iter().rev() {
        // R·x = A x + B x² = A x - B (b x + c)/a
        let na = -(&rb * c);
        let nb = &(&ra * &a_poly) - &(&rb * b);
        scale_pow += 1;
        let fi_scaled = fi.scale(&num_traits::pow(a.clone(), scale_pow as usize));
        ra = &na + &fi_scaled;
        rb = nb;
        // keep the leading power bounded when possible
        if scale_pow > 0 && !ra.is_zero() && !rb.is_zero() {
            let g = ra.content_int().gcd(&rb.content_int());
            if (&g % &a).is_zero() && !a.is_one() {
                ra = ra.map_coeffs(|x| x / &a);
                rb = rb.map_coeffs(|x| x / &a);
                scale_pow -= 1;
            }
        }
    }
    // ∏(A + Bα) = A² - (b/a) A B + (c/a) B²; true R = stored / a^{scale_pow}
    let num = &(&(&ra * &ra).scale(&a) - &(&(&ra * &rb) * b)) + &(&(&rb * &rb) * c);
    // Res = a^{deg f} · num / (a · a^{2·scale_pow})
    let exp_num = deg_f as i64;
    let exp_den = 1 + 2 * i64::from(scale_pow);
    if a.is_one() {
        return num;
    }
    if exp_num >= exp_den {
        num.scale(&num_traits::pow(a.clone(), (exp_num - exp_den) as usize))
    } else {
        let d = num_traits::pow(a.clone(), (exp_den - exp_num) as usize);
        num.map_coeffs(|x| {
            let (q, r) = x.div_rem(&d);
            debug_assert!(r.is_zero());
            q
        })
    }
}

/// Substitutes `values` into the variables of the polynomial entries and
/// evaluates the Sylvester resultant directly over the rationals. Test oracle.
pub fn resultant_by_expansion(f: &MultiPoly, g: &MultiPoly, v: impl Into<Var>) -> MultiPoly {
    let v = v.into();
    let fc = f.to_univariate(v);
    let gc = g.to_univariate(v);
    expansion_determinant(&sylvester_matrix(&fc, &gc))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> MultiPoly {
        MultiPoly::sym(VarSymbol::ShortDiagonal(1))
    }
    fn y() -> MultiPoly {
        MultiPoly::sym(VarSymbol::ShortDiagonal(2))
    }
    fn c(n: i64) -> MultiPoly {
        MultiPoly::from_int(n)
    }
    fn xv() -> Var {
        VarSymbol::ShortDiagonal(1).into()
    }

    #[test]
    fn ring_examples() {
        assert_eq!(&(&x() + &c(1)) * &(&x() - &c(1)), &x().pow(2) - &c(1));
        assert!((&x() * &MultiPoly::zero()).is_zero());
        let s = (&x() + &y()).pow(2);
        assert_eq!(s, &(&x().pow(2) + &(&x() * &y()).scale(&rat(2))) + &y().pow(2));
    }

    #[test]
    fn degree_and_leading_coefficient() {
        let l = MultiPoly::sym(VarSymbol::edge(0, 1));
        let a = &(&(&l.scale(&rat(2)) * &x().pow(2)) + &x()) + &c(1);
        assert_eq!(degree_lc(&a, xv()), (Some(2), l.scale(&rat(2))));
        assert_eq!(degree_lc(&c(5), xv()), (Some(0), c(5)));
        assert_eq!(degree_lc(&MultiPoly::zero(), xv()), (None, MultiPoly::zero()));
    }

    #[test]
    fn resultant_examples() {
        let f = &(&x().pow(2) - &x().scale(&rat(3))) + &c(2);
        assert!(resultant(&f, &(&x() - &c(1)), xv()).unwrap().is_zero());
        let r = resultant(&(&x().pow(2) - &c(2)), &(&x().pow(2) - &c(3)), xv()).unwrap();
        assert_eq!(r, c(1));
        let a = MultiPoly::sym(VarSymbol::edge(1, 2));
        let b = MultiPoly::sym(VarSymbol::edge(1, 3));
        let r = resultant(&(&x() - &a), &(&x() - &b), xv()).unwrap();
        assert!(r == &b - &a || r == &a - &b);
        assert_eq!(resultant(&c(2), &a, xv()), Err(PolyError::ConstantInVariable(VarSymbol::ShortDiagonal(1))));
    }

    #[test]
    fn quadratic_fast_path_matches_sylvester() {
        // q has a non-unit constant leading coefficient and f has rational coefficients
        let q = &(&x().pow(2).scale(&rat(3)) + &(&y() * &x())) - &c(5);
        let f = &(&(&x().pow(3).scale(&ratio(2, 3)) + &y().pow(2)) - &(&x() * &y()).scale(&rat(7))) + &c(1);
        let fast = resultant(&q, &f, xv()).unwrap();
        let slow = resultant_by_expansion(&q, &f, xv());
        assert_eq!(fast, slow);
        let fast2 = resultant(&f, &q, xv()).unwrap();
        assert_eq!(fast2, resultant_by_expansion(&f, &q, xv()));
    }

    #[test]
    fn bareiss_matches_expansion() {
        let m: Vec<Vec<MultiPoly>> = (0..5)
            .map(|i| (0..5).map(|j| &x().pow(((i * j) % 3) as u32) + &c((i as i64) - 2 * (j as i64))).collect())
            .collect();
        assert_eq!(bareiss_determinant(m.clone()), expansion_determinant(&m));
    }

    #[test]
    fn specialization() {
        let l = VarSymbol::edge(0, 1);
        let a = &MultiPoly::sym(l).scale(&rat(2)) * &x().pow(2);
        let asg: HashMap<Var, BigRational> = [(Var::from(l), rat(3))].into_iter().collect();
        assert_eq!(a.specialize(&asg), x().pow(2).scale(&rat(6)));
        let full: HashMap<Var, BigRational> = [(Var::from(l), rat(3)), (xv(), rat(2))].into_iter().collect();
        assert_eq!(a.specialize(&full), c(24));
        assert_eq!(a.specialize(&HashMap::new()), a);
    }

    #[test]
    fn content_normalization() {
        let p = &x().scale(&rat(6)) + &c(4);
        assert_eq!(p.normalize_content().unwrap(), &x().scale(&rat(3)) + &c(2));
        assert_eq!((-x()).normalize_content().unwrap(), x());
        let q = &x().scale(&ratio(2, 3)) + &MultiPoly::constant(ratio(4, 3));
        assert_eq!(q.normalize_content().unwrap(), &x() + &c(2));
        assert_eq!(MultiPoly::zero().normalize_content(), Err(PolyError::ZeroContent));
    }

    #[test]
    fn exact_division() {
        let a = &(&x() + &y()) * &(&x() - &y().scale(&rat(2)));
        assert_eq!(a.div_exact(&(&x() + &y())).unwrap(), &x() - &y().scale(&rat(2)));
        assert_eq!((&x() + &c(1)).div_exact(&y()), Err(PolyError::InexactDivision));
    }

    #[test]
    fn symbol_round_trip() {
        for s in [
            VarSymbol::Volume,
            VarSymbol::SimplexVolume(3),
            VarSymbol::ShortDiagonal(2),
            VarSymbol::LongDiagonal(4),
            VarSymbol::edge(7, 2),
        ] {
            assert_eq!(Var::from(s).symbol(), s);
            assert_eq!(s.to_string().parse::<VarSymbol>().unwrap(), s);
        }
        assert!(Var::from(VarSymbol::Volume) < Var::from(VarSymbol::edge(0, 1)));
    }

    #[test]
    fn modular_resultant_matches_bareiss() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let z = Var::from(VarSymbol::Volume);
        let w = Var::from(VarSymbol::ShortDiagonal(2));
        for _ in 0..20 {
            let mut rand_poly = |dx: u32, dz: u32| {
                let mut p = IntPoly::zero();
                for i in 0..=dx {
                    for j in 0..=dz {
                        let k: i64 = rng.gen_range(-50..=50);
                        let e = rng.gen_range(0..2u32);
                        p.add_term(Monomial::from_pairs(vec![(xv(), i), (z, j), (w, e)]), BigInt::from(k));
                    }
                }
                p.add_term(Monomial::from_pairs(vec![(xv(), dx)]), BigInt::from(1));
                p
            };
            let f = rand_poly(3, 2);
            let g = rand_poly(2, 3);
            let fc = trim(f.to_univariate(xv()));
            let gc = trim(g.to_univariate(xv()));
            let modular::Outcome::Done(fast) = modular::resultant(&fc, &gc, &Budget::unlimited()).unwrap() else { panic!("declined") };
            assert_eq!(fast, bareiss_determinant(sylvester_matrix(&fc, &gc)));
        }
    }
}
