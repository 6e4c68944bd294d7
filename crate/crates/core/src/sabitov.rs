//! Constructive elimination of the generalized volume: polynomial relations
//! `a_0 V^N + a_1 V^{N-1} + … + a_N = 0` with coefficients in the squared edge
//! lengths, for 2- and 3-dimensional cycles in `R^3` and `R^4`.
//!
//! The recursion follows an induction on the support: the vertex count and
//! minimal degree (outer measure) and, for a fixed simplex `σ` (an edge `[uv]`
//! in dimension 4, a vertex `u` in dimension 3), the weight of its link.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Mutex;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chains::{directed_simple_cycles, Chain, ChainError, SupportComplex, Vertex};
use crate::geometry::cm_volume_factor;
use crate::polyalg::{determinant, resultant_within, to_f64, Budget, MultiPoly, PolyError, Var, VarSymbol};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SabitovError {
    #[error("elimination is only available in dimensions 3 and 4, got {0}")]
    UnsupportedDimension(usize),
    #[error("input chain is not a cycle")]
    NotACycle,
    #[error("chain of dimension {chain} does not bound in R^{n}")]
    WrongChainDimension { chain: usize, n: usize },
    #[error("no length assigned to edge ({0}, {1})")]
    IncompleteAssignment(Vertex, Vertex),
    #[error("degenerate elimination: {0}")]
    Degenerate(String),
    #[error("every choice of simplex and cycle degenerated")]
    UnrecoverableDegeneracy { trace: Vec<String> },
    #[error("recursion measure did not decrease: {0}")]
    MeasureViolation(String),
    #[error("time budget exhausted")]
    BudgetExhausted { trace: Vec<String> },
    #[error("elimination exceeds resource limits: {detail}")]
    ResourceLimit { detail: String, trace: Vec<String> },
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Chain(#[from] ChainError),
}

pub type Assignment = HashMap<Var, BigRational>;

/// Whether edge lengths stay symbolic or are substituted up front.
#[derive(Debug, Clone, PartialEq)]
pub enum PipelineMode {
    Symbolic,
    Specialized(Assignment),
}

#[derive(Debug, Clone)]
pub struct PipelineOptions {
    /// Directed simple cycles tried per link before giving up on a simplex.
    pub max_cycles: usize,
    /// Choices of `σ` tried per cycle before reporting degeneracy upwards.
    pub max_sigmas: usize,
    /// Substitute assigned lengths for diagonals that happen to be edges of
    /// the input polyhedron.
    pub use_assigned_diagonals: bool,
    pub deadline: Option<Instant>,
    pub verbose: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions { max_cycles: 3, max_sigmas: 3, use_assigned_diagonals: true, deadline: None, verbose: false }
    }
}

/// Shape of the leading coefficient `a_0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Multiplier {
    /// `a_0 = 1`.
    Trivial,
    /// `a_0 = l_{uv}^s`.
    EdgePower { u: Vertex, v: Vertex, s: u32 },
    /// `a_0` is a product of several edge powers.
    EdgeMonomial { factors: Vec<(Vertex, Vertex, u32)> },
    /// Any other polynomial; kept as the normalized leading coefficient.
    General,
}

impl fmt::Display for Multiplier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Multiplier::Trivial => write!(f, "1"),
            Multiplier::EdgePower { u, v, s } => write!(f, "l{u}_{v}^{s}"),
            Multiplier::EdgeMonomial { factors } => {
                let parts: Vec<String> = factors.iter().map(|(u, v, s)| format!("l{u}_{v}^{s}")).collect();
                write!(f, "{}", parts.join("*"))
            }
            Multiplier::General => write!(f, "general"),
        }
    }
}

/// A polynomial relation satisfied by the generalized volume.
#[derive(Debug, Clone, PartialEq)]
pub struct SabitovRelation {
    pub n: usize,
    /// `a_0, …, a_N`; `a_i` multiplies `V^{N-i}`.
    pub coefficients: Vec<MultiPoly>,
    pub multiplier: Multiplier,
}

pub fn volume_var() -> Var {
    Var::from(VarSymbol::Volume)
}

pub fn simplex_volume_var() -> Var {
    Var::from(VarSymbol::SimplexVolume(0))
}

pub fn edge_var(u: Vertex, v: Vertex) -> Var {
    Var::from(VarSymbol::edge(u, v))
}

impl SabitovRelation {
    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn leading(&self) -> &MultiPoly {
        &self.coefficients[0]
    }

    pub fn as_poly(&self) -> MultiPoly {
        let mut c: Vec<MultiPoly> = self.coefficients.clone();
        c.reverse();
        MultiPoly::from_univariate(&c, volume_var())
    }

    fn from_poly(n: usize, p: &MultiPoly) -> Result<Self, SabitovError> {
        let coeffs = Self::descending(p)?;
        let (scale, multiplier) = classify_multiplier(&coeffs[0]);
        let coefficients = coeffs.iter().map(|c| c.scale(&scale)).collect();
        Ok(SabitovRelation { n, coefficients, multiplier })
    }

    /// Rebuilds a relation from a polynomial in `V` without rescaling.
    pub fn from_parts(n: usize, p: &MultiPoly, multiplier: Multiplier) -> Result<Self, SabitovError> {
        Ok(SabitovRelation { n, coefficients: Self::descending(p)?, multiplier })
    }

    fn descending(p: &MultiPoly) -> Result<Vec<MultiPoly>, SabitovError> {
        let mut coeffs = p.to_univariate(volume_var());
        while coeffs.len() > 1 && coeffs.last().is_some_and(MultiPoly::is_zero) {
            coeffs.pop();
        }
        if coeffs.len() < 2 {
            return Err(SabitovError::Degenerate("relation does not involve V".into()));
        }
        coeffs.reverse();
        Ok(coeffs)
    }

    /// Symbols other than `V` that occur in the coefficients.
    pub fn symbols(&self) -> BTreeSet<Var> {
        self.coefficients.iter().flat_map(|c| c.variables()).collect()
    }

    /// Coefficients with the given lengths substituted.
    pub fn specialize(&self, lengths: &Assignment) -> SabitovRelation {
        let coefficients: Vec<MultiPoly> = self.coefficients.iter().map(|c| c.specialize(lengths)).collect();
        SabitovRelation { n: self.n, coefficients, multiplier: self.multiplier.clone() }
    }

    /// Rational coefficients at a complete length assignment.
    pub fn evaluate_coefficients(&self, lengths: &Assignment) -> Result<Vec<BigRational>, SabitovError> {
        Ok(self.coefficients.iter().map(|c| c.evaluate(lengths)).collect::<Result<_, _>>()?)
    }

    pub fn residual(&self, v: &BigRational, lengths: &Assignment) -> Result<BigRational, SabitovError> {
        let cs = self.evaluate_coefficients(lengths)?;
        Ok(cs.iter().fold(BigRational::zero(), |acc, c| acc * v + c))
    }

    /// `|Q(v)|` in floating point, scaled by the largest term magnitude.
    pub fn relative_residual_f64(&self, v: f64, lengths: &HashMap<Var, f64>) -> Result<f64, SabitovError> {
        let cs: Vec<f64> = self.coefficients.iter().map(|c| c.evaluate_f64(lengths)).collect::<Result<_, _>>()?;
        let n = cs.len() - 1;
        let mut sum = 0.0;
        let mut scale = 0.0f64;
        for (i, c) in cs.iter().enumerate() {
            let t = c * v.powi((n - i) as i32);
            sum += t;
            scale = scale.max(t.abs());
        }
        Ok(if scale == 0.0 { 0.0 } else { sum.abs() / scale })
    }
}

/// Exact root check of `rel` at volume `v` and the given squared lengths.
pub fn verify_root(rel: &SabitovRelation, v: &BigRational, lengths: &Assignment) -> Result<bool, SabitovError> {
    Ok(rel.residual(v, lengths)?.is_zero())
}

fn classify_multiplier(lead: &MultiPoly) -> (BigRational, Multiplier) {
    if let Some(c) = lead.as_constant() {
        return (c.recip(), Multiplier::Trivial);
    }
    if lead.len() == 1 {
        let (m, c) = lead.leading_term().expect("nonzero");
        let mut factors = Vec::new();
        let mut edges_only = true;
        for &(var, e) in m.pairs() {
            match var.symbol() {
                VarSymbol::Edge(u, v) => factors.push((u, v, e)),
                _ => edges_only = false,
            }
        }
        if edges_only {
            let mult = if factors.len() == 1 {
                let (u, v, s) = factors[0];
                Multiplier::EdgePower { u, v, s }
            } else {
                Multiplier::EdgeMonomial { factors }
            };
            return (c.recip(), mult);
        }
    }
    let scale = lead.content().map(|c| c.recip()).unwrap_or_else(|_| BigRational::one());
    (scale, Multiplier::General)
}

/// Supplies squared lengths as polynomials: assigned edges become constants,
/// everything else (and every pair in `symbolic`) stays a symbol.
#[derive(Debug, Clone, Default)]
pub struct LengthSource<'a> {
    assignment: Option<&'a Assignment>,
    symbolic: BTreeSet<Var>,
}

impl<'a> LengthSource<'a> {
    pub fn symbolic() -> Self {
        LengthSource::default()
    }

    pub fn specialized(assignment: &'a Assignment) -> Self {
        LengthSource { assignment: Some(assignment), symbolic: BTreeSet::new() }
    }

    /// Keeps the given pairs symbolic even when assigned.
    pub fn with_symbolic(mut self, pairs: impl IntoIterator<Item = (Vertex, Vertex)>) -> Self {
        self.symbolic.extend(pairs.into_iter().map(|(a, b)| edge_var(a, b)));
        self
    }

    pub fn get(&self, a: Vertex, b: Vertex) -> MultiPoly {
        if a == b {
            return MultiPoly::zero();
        }
        let var = edge_var(a, b);
        if !self.symbolic.contains(&var) {
            if let Some(x) = self.assignment.and_then(|m| m.get(&var)) {
                return MultiPoly::constant(x.clone());
            }
        }
        MultiPoly::var(var)
    }
}

/// Bordered Cayley–Menger determinant of `points` with polynomial entries.
pub fn cm_poly(points: &[Vertex], lengths: &LengthSource<'_>) -> MultiPoly {
    let k = points.len();
    let mut m = vec![vec![MultiPoly::zero(); k + 1]; k + 1];
    for i in 1..=k {
        m[0][i] = MultiPoly::one();
        m[i][0] = MultiPoly::one();
        for j in 1..=k {
            m[i][j] = lengths.get(points[i - 1], points[j - 1]);
        }
    }
    determinant(m)
}

/// `W² − c·CM(η)` where `c = (−1)^{n+1}/(2^n (n!)²)` and `W` is the volume of `η`.
pub fn cm_eta_relation(eta: &[Vertex], lengths: &LengthSource<'_>) -> MultiPoly {
    let n = eta.len() - 1;
    let w = MultiPoly::var(simplex_volume_var());
    let cm = cm_poly(eta, lengths).scale(&cm_volume_factor(n));
    w.pow(2).sub_ref(&cm)
}

/// Cayley–Menger relation of `σ ∪ {w_a, w_b, w_c, w_d}`: seven points (7×7) for
/// an edge `σ`, five points for a vertex `σ`.
pub fn cm7_relation(sigma: &[Vertex], w: [Vertex; 4], lengths: &LengthSource<'_>) -> MultiPoly {
    let mut pts = sigma.to_vec();
    pts.extend_from_slice(&w);
    cm_poly(&pts, lengths)
}

/// Eliminates `W` between `Q(V − W)` and `W² − c`: the resultant equals
/// `A² − c B²` where `Q(V − W) ≡ A + B W  (mod W² − c)`.
pub fn eliminate_simplex_volume(q: &MultiPoly, c: &MultiPoly) -> MultiPoly {
    eliminate_simplex_volume_within(q, c, &Budget::unlimited()).expect("no deadline")
}

fn eliminate_simplex_volume_within(q: &MultiPoly, c: &MultiPoly, budget: &Budget) -> Result<MultiPoly, PolyError> {
    let v = volume_var();
    let coeffs = q.to_univariate(v);
    let vmono = crate::polyalg::Monomial::var(v, 1);
    let mut a = MultiPoly::zero();
    let mut b = MultiPoly::zero();
    for ai in coeffs.iter().rev() {
        budget.check()?;
        // (A + B W)(V − W) = (A V − B c) + (B V − A) W
        let na = a.mul_monomial(&vmono).sub_ref(&b.mul_ref(c));
        let nb = b.mul_monomial(&vmono).sub_ref(&a);
        a = na.add_ref(ai);
        b = nb;
    }
    budget.check()?;
    // A² − c B² over the integers: with A = A'/ka, B = B'/kb, c = c'/kc the
    // result is (kb² kc A'² − ka² c' B'²) / (ka² kb² kc)
    let (ai, ka) = a.clear_denominators();
    let (bi, kb) = b.clear_denominators();
    let (ci, kc) = c.clear_denominators();
    let (a2, b2) = rayon::join(|| ai.mul_ref(&ai), || ci.mul_ref(&bi.mul_ref(&bi)));
    let num = a2.scale(&(&kb * &kb * &kc)).sub_ref(&b2.scale(&(&ka * &ka)));
    let den = BigRational::from_integer(&ka * &ka * &kb * &kb * &kc);
    Ok(MultiPoly::from_int_poly(&num).scale(&den.recip()))
}

/// Labels of one elimination step: the fixed simplex `σ` and the directed
/// simple cycle `w_1 … w_r` of its link.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepLabels {
    pub sigma: Vec<Vertex>,
    pub w: Vec<Vertex>,
}

impl StepLabels {
    pub fn r(&self) -> usize {
        self.w.len()
    }

    /// `w_j` with 1-based cyclic indexing.
    pub fn wv(&self, j: usize) -> Vertex {
        self.w[(j - 1) % self.w.len()]
    }

    /// Short diagonal `d_j = l_{w_j w_{j+2}}`.
    pub fn d(&self, j: usize) -> Var {
        edge_var(self.wv(j), self.wv(j + 2))
    }

    /// First-vertex diagonal `D_j = l_{w_1 w_j}`.
    pub fn big_d(&self, j: usize) -> Var {
        edge_var(self.wv(1), self.wv(j))
    }

    pub fn d_pair(&self, j: usize) -> (Vertex, Vertex) {
        (self.wv(j), self.wv(j + 2))
    }

    /// The same cycle traversed backwards from `w_1`.
    pub fn reversed(&self) -> StepLabels {
        let r = self.r();
        let mut w = vec![self.w[0]];
        w.extend((2..=r).map(|j| self.wv(r - j + 2)));
        StepLabels { sigma: self.sigma.clone(), w }
    }

    /// Pairs that must stay symbolic inside the step.
    fn diagonal_pairs(&self) -> Vec<(Vertex, Vertex)> {
        let r = self.r();
        let mut out: Vec<(Vertex, Vertex)> = (1..=r - 2).map(|j| self.d_pair(j)).collect();
        out.extend((3..r).map(|j| (self.wv(1), self.wv(j))));
        out
    }

    /// Relation `(CM_j)` on `σ, w_1, w_j, w_{j+1}, w_{j+2}`.
    pub fn cm_j(&self, j: usize, lengths: &LengthSource<'_>) -> MultiPoly {
        cm7_relation(&self.sigma, [self.wv(1), self.wv(j), self.wv(j + 1), self.wv(j + 2)], lengths)
    }
}

/// Settings shared by the elimination stages.
#[derive(Debug, Clone, Copy, Default)]
pub struct ElimContext {
    /// Divide out the rational content after every resultant.
    pub normalize: bool,
    pub budget: Budget,
}

impl ElimContext {
    pub fn normalized() -> Self {
        ElimContext { normalize: true, budget: Budget::unlimited() }
    }

    pub fn raw() -> Self {
        ElimContext { normalize: false, budget: Budget::unlimited() }
    }

    fn resultant(&self, f: &MultiPoly, g: &MultiPoly, v: Var) -> Result<MultiPoly, SabitovError> {
        Ok(resultant_within(f, g, v, &self.budget)?)
    }

    fn checked(&self, p: MultiPoly, what: &str) -> Result<MultiPoly, SabitovError> {
        checked(p, what, self.normalize)
    }
}

fn checked(p: MultiPoly, what: &str, normalize: bool) -> Result<MultiPoly, SabitovError> {
    if p.is_zero() {
        return Err(SabitovError::Degenerate(format!("{what} vanished identically")));
    }
    if normalize {
        Ok(p.normalize_content()?)
    } else {
        Ok(p)
    }
}

/// `F_3, …, F_{r-2}`: eliminates `D_4, …, D_{r-2}` from the relations `(CM_j)`.
pub fn f_cascade(labels: &StepLabels, lengths: &LengthSource<'_>, ctx: &ElimContext) -> Result<Vec<MultiPoly>, SabitovError> {
    let r = labels.r();
    assert!(r >= 5, "cascade needs a cycle of length at least 5");
    let mut out = vec![labels.cm_j(3, lengths)];
    for j in 4..=r - 2 {
        let prev = out.last().expect("nonempty");
        let next = ctx.resultant(prev, &labels.cm_j(j, lengths), labels.big_d(j))?;
        out.push(ctx.checked(next, &format!("F_{j}"))?);
    }
    Ok(out)
}

/// `G_2, …, G_{r-2}`: eliminates `d_3, …, d_{r-2}` against the branch relations.
pub fn g_cascade(
    labels: &StepLabels,
    f_last: &MultiPoly,
    branch: &BTreeMap<usize, MultiPoly>,
    ctx: &ElimContext,
) -> Result<Vec<MultiPoly>, SabitovError> {
    let r = labels.r();
    // F_{r-2} leads with (2 l_uv)^S, S = 2^{r-5}(r-4); dividing by 2^S leaves l_uv^S
    let s = (1u32 << (r - 5)) * (r as u32 - 4);
    let denom = BigRational::from_integer(num_traits::pow(BigInt::from(2), s as usize));
    let mut out = vec![f_last.scale(&denom.recip())];
    for j in 3..=r - 2 {
        let rel = branch.get(&j).ok_or_else(|| SabitovError::Degenerate(format!("missing branch relation {j}")))?;
        let next = ctx.resultant(out.last().expect("nonempty"), rel, labels.d(j))?;
        out.push(ctx.checked(next, &format!("G_{j}"))?);
    }
    Ok(out)
}

/// Combines the forward and backward cascades and eliminates `D_3 = d_1`.
pub fn finalize_large_r(
    labels: &StepLabels,
    g_forward: &MultiPoly,
    g_backward: &MultiPoly,
    branch_1: &MultiPoly,
    ctx: &ElimContext,
) -> Result<MultiPoly, SabitovError> {
    let r = labels.r();
    let h = ctx.checked(ctx.resultant(g_forward, g_backward, labels.big_d(r - 1))?, "D_{r-1} elimination")?;
    ctx.checked(ctx.resultant(&h, branch_1, labels.big_d(3))?, "D_3 elimination")
}

/// Forward and backward cascades plus the final eliminations for `r ≥ 5`.
pub fn eliminate_large_r(
    labels: &StepLabels,
    lengths: &LengthSource<'_>,
    branch: &BTreeMap<usize, MultiPoly>,
    ctx: &ElimContext,
) -> Result<MultiPoly, SabitovError> {
    let r = labels.r();
    let fwd_f = f_cascade(labels, lengths, ctx)?;
    let fwd = g_cascade(labels, fwd_f.last().expect("nonempty"), branch, ctx)?;
    let back_labels = labels.reversed();
    // d'_j = d_{r-j}
    let back_branch: BTreeMap<usize, MultiPoly> =
        (3..=r - 2).filter_map(|j| branch.get(&(r - j)).map(|p| (j, p.clone()))).collect();
    let back_f = f_cascade(&back_labels, lengths, ctx)?;
    let back = g_cascade(&back_labels, back_f.last().expect("nonempty"), &back_branch, ctx)?;
    let b1 = branch.get(&1).ok_or_else(|| SabitovError::Degenerate("missing branch relation 1".into()))?;
    finalize_large_r(labels, fwd.last().expect("nonempty"), back.last().expect("nonempty"), b1, ctx)
}

/// `r = 4`: eliminate `d_2` with the Cayley–Menger relation of
/// `σ, w_1, …, w_4`, then `d_1` with the first branch relation.
pub fn eliminate_small_r(
    labels: &StepLabels,
    lengths: &LengthSource<'_>,
    branch_1: &MultiPoly,
    branch_2: &MultiPoly,
    ctx: &ElimContext,
) -> Result<MultiPoly, SabitovError> {
    assert_eq!(labels.r(), 4);
    let cm = cm7_relation(&labels.sigma, [labels.wv(1), labels.wv(2), labels.wv(3), labels.wv(4)], lengths);
    let r1 = ctx.checked(ctx.resultant(&cm, branch_2, labels.d(2))?, "d_2 elimination")?;
    ctx.checked(ctx.resultant(&r1, branch_1, labels.d(1))?, "d_1 elimination")
}

type Memo = Mutex<HashMap<String, Result<MultiPoly, SabitovError>>>;

/// One run of the recursive elimination for a fixed mode.
pub struct Pipeline {
    n: usize,
    assignment: Assignment,
    options: PipelineOptions,
    memo: Memo,
    trace: Mutex<Vec<String>>,
}

impl Pipeline {
    pub fn new(n: usize, mode: &PipelineMode, options: PipelineOptions) -> Result<Self, SabitovError> {
        if n != 3 && n != 4 {
            return Err(SabitovError::UnsupportedDimension(n));
        }
        let assignment = match mode {
            PipelineMode::Symbolic => Assignment::new(),
            PipelineMode::Specialized(a) => a.clone(),
        };
        Ok(Pipeline { n, assignment, options, memo: Mutex::new(HashMap::new()), trace: Mutex::new(Vec::new()) })
    }

    pub fn trace(&self) -> Vec<String> {
        self.trace.lock().expect("trace lock").clone()
    }

    fn note(&self, msg: String) {
        if self.options.verbose {
            eprintln!("{msg}");
        }
        self.trace.lock().expect("trace lock").push(msg);
    }

    fn lengths(&self) -> LengthSource<'_> {
        LengthSource::specialized(&self.assignment)
    }

    fn budget(&self) -> Budget {
        self.options.deadline.map_or_else(Budget::unlimited, Budget::until)
    }

    fn ctx(&self) -> ElimContext {
        ElimContext { normalize: true, budget: self.budget() }
    }

    fn check_budget(&self) -> Result<(), SabitovError> {
        Ok(self.budget().check()?)
    }

    /// Outer induction measure: `(m, p)` in dimension 4, `(m)` in dimension 3.
    fn outer_measure(&self, k: &SupportComplex) -> Vec<usize> {
        let m = k.vertex_count();
        if self.n == 3 {
            return vec![m];
        }
        let p = k.vertices().map(|v| k.degree(v)).min().unwrap_or(0);
        vec![m, p]
    }

    /// Candidate simplices `σ`, most preferred first.
    fn sigma_choices(&self, k: &SupportComplex) -> Vec<Vec<Vertex>> {
        let mut verts: Vec<(usize, Vertex)> = k.vertices().map(|v| (k.degree(v), v)).collect();
        verts.sort();
        let p = verts.first().map_or(0, |x| x.0);
        if self.n == 3 {
            return verts.into_iter().map(|(_, v)| vec![v]).collect();
        }
        let mut out = Vec::new();
        for &(d, u) in &verts {
            if d != p {
                break;
            }
            for v in k.neighbors(u) {
                out.push(vec![u, v]);
            }
        }
        out
    }

    /// Relation in `V` (and unassigned edge symbols of the support) for `z`.
    pub fn relation(&self, z: &Chain) -> Result<MultiPoly, SabitovError> {
        if z.is_zero() {
            return Ok(MultiPoly::var(volume_var()));
        }
        self.check_budget()?;
        let key = z.canonical_key();
        if let Some(r) = self.memo.lock().expect("memo lock").get(&key) {
            return r.clone();
        }
        let k = z.support();
        let mut failures = Vec::new();
        let mut result = None;
        for sigma in self.sigma_choices(&k).into_iter().take(self.options.max_sigmas) {
            match self.lemma_step(z, &sigma) {
                Ok(p) => {
                    result = Some(Ok(p));
                    break;
                }
                Err(SabitovError::Degenerate(msg)) => {
                    self.note(format!("degenerate at sigma={sigma:?} for {} terms: {msg}", z.len()));
                    failures.push(msg);
                }
                Err(e) => return Err(e),
            }
        }
        let result = result.unwrap_or_else(|| {
            Err(SabitovError::Degenerate(format!("all simplex choices failed ({} tried)", failures.len())))
        });
        self.memo.lock().expect("memo lock").insert(key, result.clone());
        result
    }

    /// Relation for `z` with `σ` fixed, by induction on the link weight.
    fn lemma_step(&self, z: &Chain, sigma: &[Vertex]) -> Result<MultiPoly, SabitovError> {
        self.check_budget()?;
        let key = format!("{sigma:?}|{}", z.canonical_key());
        if let Some(r) = self.memo.lock().expect("memo lock").get(&key) {
            return r.clone();
        }
        let link = z.link(sigma)?;
        let cycles = directed_simple_cycles(&link)?;
        let mut result = Err(SabitovError::Degenerate("no directed simple cycle".into()));
        for w in cycles.into_iter().take(self.options.max_cycles) {
            let labels = StepLabels { sigma: sigma.to_vec(), w };
            match self.step_with_cycle(z, &labels) {
                Ok(p) => {
                    result = Ok(p);
                    break;
                }
                Err(SabitovError::Degenerate(msg)) => {
                    self.note(format!("degenerate cycle {:?} at sigma={sigma:?}: {msg}", labels.w));
                    result = Err(SabitovError::Degenerate(msg));
                }
                Err(e) => return Err(e),
            }
        }
        self.memo.lock().expect("memo lock").insert(key, result.clone());
        result
    }

    fn known_pair(&self, k: &SupportComplex, a: Vertex, b: Vertex) -> bool {
        k.has_edge(a, b) || (self.options.use_assigned_diagonals && self.assignment.contains_key(&edge_var(a, b)))
    }

    fn step_with_cycle(&self, z: &Chain, labels: &StepLabels) -> Result<MultiPoly, SabitovError> {
        let k = z.support();
        let r = labels.r();
        // a diagonal with a known length already gives a relation over the support
        for j in 1..=r - 2 {
            let (a, b) = labels.d_pair(j);
            if self.known_pair(&k, a, b) {
                return self.branch_relation(z, labels, j);
            }
        }
        let branch: BTreeMap<usize, MultiPoly> = (1..=r - 2)
            .into_par_iter()
            .map(|j| self.branch_relation(z, labels, j).map(|p| (j, p)))
            .collect::<Result<_, _>>()?;
        let sizes: Vec<String> = branch.iter().map(|(j, p)| format!("{j}:{}", p.len())).collect();
        self.note(format!("sigma={:?} w={:?} r={r} branch terms [{}]", labels.sigma, labels.w, sizes.join(" ")));
        let lengths = self.lengths().with_symbolic(labels.diagonal_pairs());
        if r == 4 {
            eliminate_small_r(labels, &lengths, &branch[&1], &branch[&2], &self.ctx())
        } else {
            eliminate_large_r(labels, &lengths, &branch, &self.ctx())
        }
    }

    /// Relation `(12_j)` between `V_Z`, the support lengths and `d_j`.
    fn branch_relation(&self, z: &Chain, labels: &StepLabels, j: usize) -> Result<MultiPoly, SabitovError> {
        let mut verts = labels.sigma.clone();
        verts.extend([labels.wv(j), labels.wv(j + 1), labels.wv(j + 2)]);
        let sign = if labels.sigma.len() % 2 == 0 { 1 } else { -1 };
        let eta = Chain::from_terms(self.n, [(sign, verts.clone())])?;
        let zj = z.sub(&eta.boundary()?);
        let k = z.support();
        let outer = self.outer_measure(&k);
        let q = crate::chains::link_weight(z, &labels.sigma)?;
        let kj = zj.support();
        let mj = self.outer_measure(&kj);
        self.note(format!("measure {outer:?} q={q} -> {mj:?} (branch {j} of sigma={:?})", labels.sigma));
        let sub = match mj.cmp(&outer) {
            std::cmp::Ordering::Less => self.relation(&zj)?,
            std::cmp::Ordering::Equal => {
                let qj = zj.link(&labels.sigma)?.terms().map(|(_, c)| c.unsigned_abs()).sum::<u64>();
                if qj == 0 || qj >= q {
                    return Err(SabitovError::MeasureViolation(format!(
                        "link weight {q} -> {qj} with unchanged measure {outer:?}"
                    )));
                }
                self.lemma_step(&zj, &labels.sigma)?
            }
            std::cmp::Ordering::Greater => {
                return Err(SabitovError::MeasureViolation(format!("{outer:?} -> {mj:?}")));
            }
        };
        let (a, b) = labels.d_pair(j);
        let forced = if self.known_pair(&k, a, b) { None } else { Some((a, b)) };
        let lengths = self.lengths().with_symbolic(forced);
        let c = cm_poly(&verts, &lengths).scale(&cm_volume_factor(self.n));
        let out = checked(eliminate_simplex_volume_within(&sub, &c, &self.budget())?, &format!("branch {j}"), true)?;
        self.note(format!("branch {j}: {} terms, V-degree {}", out.len(), out.degree(volume_var()).unwrap_or(0)));
        Ok(out)
    }
}

fn with_trace(e: SabitovError, mut trace: Vec<String>) -> SabitovError {
    match e {
        SabitovError::Degenerate(msg) => {
            trace.push(format!("top level: {msg}"));
            SabitovError::UnrecoverableDegeneracy { trace }
        }
        SabitovError::BudgetExhausted { .. } | SabitovError::Poly(PolyError::BudgetExhausted) => {
            SabitovError::BudgetExhausted { trace }
        }
        SabitovError::Poly(e @ PolyError::TooLarge { .. }) => SabitovError::ResourceLimit { detail: e.to_string(), trace },
        e => e,
    }
}

/// Computes a relation satisfied by the generalized volume of the cycle `z`
/// in `R^n`.
pub fn sabitov_relation(
    z: &Chain,
    n: usize,
    mode: &PipelineMode,
    options: PipelineOptions,
) -> Result<SabitovRelation, SabitovError> {
    sabitov_relation_traced(z, n, mode, options).map(|(r, _)| r)
}

/// As [`sabitov_relation`], also returning the pipeline's choice log.
pub fn sabitov_relation_traced(
    z: &Chain,
    n: usize,
    mode: &PipelineMode,
    options: PipelineOptions,
) -> Result<(SabitovRelation, Vec<String>), SabitovError> {
    if n != 3 && n != 4 {
        return Err(SabitovError::UnsupportedDimension(n));
    }
    if !z.is_zero() && z.dimension() + 1 != n {
        return Err(SabitovError::WrongChainDimension { chain: z.dimension(), n });
    }
    if !z.is_cycle() {
        return Err(SabitovError::NotACycle);
    }
    if let PipelineMode::Specialized(a) = mode {
        if let Some((u, v)) = z.support().edges().find(|&(u, v)| !a.contains_key(&edge_var(u, v))) {
            return Err(SabitovError::IncompleteAssignment(u, v));
        }
    }
    let run = |opts: PipelineOptions| -> Result<(MultiPoly, Vec<String>), (SabitovError, Vec<String>)> {
        let p = Pipeline::new(n, mode, opts).map_err(|e| (e, Vec::new()))?;
        match p.relation(z) {
            Ok(r) => Ok((r, p.trace())),
            Err(e) => Err((e, p.trace())),
        }
    };
    let (poly, trace) = match run(options.clone()) {
        Ok(x) => x,
        Err((SabitovError::Degenerate(msg), mut trace))
            if options.use_assigned_diagonals && matches!(mode, PipelineMode::Specialized(_)) =>
        {
            trace.push(format!("top level: {msg}; retrying with symbolic diagonals"));
            let opts = PipelineOptions { use_assigned_diagonals: false, ..options };
            match run(opts) {
                Ok((r, t2)) => {
                    trace.extend(t2);
                    (r, trace)
                }
                Err((e, t2)) => {
                    trace.extend(t2);
                    return Err(with_trace(e, trace));
                }
            }
        }
        Err((e, trace)) => return Err(with_trace(e, trace)),
    };
    Ok((SabitovRelation::from_poly(n, &poly)?, trace))
}

/// Float evaluation of the relation's leading coefficient magnitude.
pub fn leading_magnitude(rel: &SabitovRelation, lengths: &Assignment) -> Result<f64, SabitovError> {
    Ok(to_f64(&rel.leading().evaluate(lengths)?).abs())
}

/// Squared lengths of the support edges of `z` as an exact assignment.
pub fn assignment_from_embedding(
    z: &Chain,
    p: &crate::geometry::ExactEmbedding,
) -> Result<Assignment, crate::geometry::GeometryError> {
    let mut a = Assignment::new();
    for (u, v) in z.support().edges() {
        a.insert(edge_var(u, v), crate::geometry::squared_length(p, u, v)?);
    }
    Ok(a)
}

/// Sign-normalized exact value check, used where only `|V|` is meaningful.
pub fn is_root_up_to_sign(rel: &SabitovRelation, v: &BigRational, lengths: &Assignment) -> Result<bool, SabitovError> {
    Ok(verify_root(rel, v, lengths)? || verify_root(rel, &-v.clone(), lengths)?)
}
