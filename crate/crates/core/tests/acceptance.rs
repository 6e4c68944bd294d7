//! One line per acceptance criterion. Criteria whose target is out of reach
//! print BLOCKED or DOWNGRADED with the reason instead of PASS; only FAIL
//! makes the run exit nonzero.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use bellows::chains::Chain;
use bellows::flex::{
    bellows_check, example_zoo, flex_space, recompute_residual, rigidity_matrix, trace_flex, TraceOptions, TraceStatus,
};
use bellows::geometry::{
    cayley_menger, generalized_volume, simplex_volume_sq, winding_volume, ExactEmbedding,
};
use bellows::polyalg::{rat, ratio, Monomial, MultiPoly, Var};
use bellows::sabitov::{
    assignment_from_embedding, cm_eta_relation, edge_var, f_cascade, g_cascade, sabitov_relation, simplex_volume_var, verify_root,
    volume_var, ElimContext, LengthSource, Multiplier, PipelineMode, PipelineOptions, SabitovError, StepLabels,
};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Outcome {
    Pass(String),
    Fail(String),
    Blocked(String),
    Downgraded(String),
}

use Outcome::*;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    ensure(start.elapsed() < limit, format!("took {:.1?}, limit {limit:?}", start.elapsed()))
}

fn outcome(r: Result<String, String>) -> Outcome {
    match r {
        Ok(s) => Pass(s),
        Err(e) => Fail(e),
    }
}

fn cm_identities() -> Outcome {
    let start = Instant::now();
    outcome((|| {
        let reg: Vec<Vec<BigRational>> = (0..4).map(|i| (0..4).map(|j| rat(i64::from(i != j))).collect()).collect();
        ensure(cayley_menger(&reg) == rat(4), "regular tetrahedron CM != 4")?;
        ensure(simplex_volume_sq(3, &reg).map_err(|e| e.to_string())? == ratio(1, 72), "tetrahedron V^2 != 1/72")?;
        let l = ratio(7, 3);
        let two = vec![vec![rat(0), l.clone()], vec![l.clone(), rat(0)]];
        ensure(cayley_menger(&two) == &l * rat(2), "two-point CM != 2l")?;
        let col = vec![vec![rat(0), rat(1), rat(9)], vec![rat(1), rat(0), rat(4)], vec![rat(9), rat(4), rat(0)]];
        ensure(cayley_menger(&col) == rat(0), "collinear CM != 0")?;
        within(Duration::from_secs(1), start)?;
        Ok("regular tetrahedron 4 and 1/72, two points 2l, collinear 0".into())
    })())
}

fn exact_volumes() -> Outcome {
    let start = Instant::now();
    outcome((|| {
        let s = example_zoo("simplex-boundary", 0).map_err(|e| e.to_string())?;
        let c = example_zoo("cross-polytope-16cell", 0).map_err(|e| e.to_string())?;
        let ps = s.embedding.exact().expect("exact").clone();
        let pc = c.embedding.exact().expect("exact").clone();
        let vs = generalized_volume(&s.cycle, &ps, None).map_err(|e| e.to_string())?;
        let vc = generalized_volume(&c.cycle, &pc, None).map_err(|e| e.to_string())?;
        ensure(vs == ratio(1, 24), format!("simplex boundary volume {vs}"))?;
        ensure(vc == ratio(2, 3) || vc == ratio(-2, 3), format!("16-cell volume {vc}"))?;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let base: Vec<BigRational> = (0..4).map(|_| ratio(rng.gen_range(-50..=50), rng.gen_range(1..=9))).collect();
            ensure(generalized_volume(&s.cycle, &ps, Some(&base)).unwrap() == vs, "simplex volume depends on base point")?;
            ensure(generalized_volume(&c.cycle, &pc, Some(&base)).unwrap() == vc, "16-cell volume depends on base point")?;
        }
        within(Duration::from_secs(1), start)?;
        Ok(format!("simplex boundary {vs}, 16-cell {vc}, 10 base points agree"))
    })())
}

/// Coefficient vectors in `V` that are proportional have the same roots.
fn proportional(a: &[BigRational], b: &[BigRational]) -> bool {
    let (Some(ia), Some(ib)) = (a.iter().position(|x| *x != rat(0)), b.iter().position(|x| *x != rat(0))) else {
        return false;
    };
    ia == ib && a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x * &b[ib] == y * &a[ia])
}

fn v_coefficients(p: &MultiPoly, v: Var) -> Vec<BigRational> {
    p.to_univariate(v).iter().map(|c| c.as_constant().unwrap_or_else(|| rat(0))).collect()
}

fn simplex_symbolic() -> Outcome {
    let start = Instant::now();
    outcome((|| {
        let ex = example_zoo("simplex-boundary", 0).map_err(|e| e.to_string())?;
        let p = ex.embedding.exact().expect("exact");
        let rel = sabitov_relation(&ex.cycle, 4, &PipelineMode::Symbolic, PipelineOptions::default()).map_err(|e| e.to_string())?;
        let lengths = assignment_from_embedding(&ex.cycle, p).map_err(|e| e.to_string())?;
        let spec = rel.specialize(&lengths).as_poly();
        let cm = cm_eta_relation(&[0, 1, 2, 3, 4], &LengthSource::specialized(&lengths));
        ensure(proportional(&v_coefficients(&spec, volume_var()), &v_coefficients(&cm, simplex_volume_var())), format!("specialized {spec} vs CM {cm}"))?;
        let v = generalized_volume(&ex.cycle, p, None).map_err(|e| e.to_string())?;
        ensure(verify_root(&rel, &v, &lengths).map_err(|e| e.to_string())?, "verify_root failed")?;
        within(Duration::from_secs(5), start)?;
        Ok(format!("degree {}, multiplier {}, roots match the CM relation, verify_root PASS", rel.degree(), rel.multiplier))
    })())
}

fn double_simplex() -> Outcome {
    let start = Instant::now();
    outcome((|| {
        let ex = example_zoo("double-4-simplex", 0).map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = common::random_rational_embedding(&mut rng, 4, ex.cycle.vertices());
        let lengths = assignment_from_embedding(&ex.cycle, &p).map_err(|e| e.to_string())?;
        let rel = sabitov_relation(&ex.cycle, 4, &PipelineMode::Specialized(lengths.clone()), PipelineOptions::default())
            .map_err(|e| e.to_string())?;
        let v = generalized_volume(&ex.cycle, &p, None).map_err(|e| e.to_string())?;
        ensure(verify_root(&rel, &v, &lengths).map_err(|e| e.to_string())?, format!("V = {v} is not a root"))?;
        within(Duration::from_secs(30), start)?;
        Ok(format!("degree {}, V = {v}, verify_root PASS", rel.degree()))
    })())
}

fn cell16_specialized() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (z, p) = common::jittered_cell16(&mut rng);
    let lengths = match assignment_from_embedding(&z, &p) {
        Ok(l) => l,
        Err(e) => return Fail(e.to_string()),
    };
    let options = PipelineOptions { deadline: Some(start + Duration::from_secs(600)), ..PipelineOptions::default() };
    match sabitov_relation(&z, 4, &PipelineMode::Specialized(lengths.clone()), options) {
        Ok(rel) => {
            let v = generalized_volume(&z, &p, None).expect("covered");
            match verify_root(&rel, &v, &lengths) {
                Ok(true) => Pass(format!("degree {}, verify_root PASS in {:.1?}", rel.degree(), start.elapsed())),
                Ok(false) => Fail(format!("V = {v} is not a root")),
                Err(e) => Fail(e.to_string()),
            }
        }
        Err(
            e @ (SabitovError::ResourceLimit { .. }
            | SabitovError::BudgetExhausted { .. }
            | SabitovError::UnrecoverableDegeneracy { .. }),
        ) => {
            let trace = match &e {
                SabitovError::ResourceLimit { trace, .. }
                | SabitovError::BudgetExhausted { trace }
                | SabitovError::UnrecoverableDegeneracy { trace } => trace.clone(),
                _ => unreachable!(),
            };
            let mut msg = format!("{e} after {:.1?}; failure trace:", start.elapsed());
            for line in &trace {
                msg.push_str("\n    ");
                msg.push_str(line);
            }
            Blocked(msg)
        }
        Err(e) => Fail(e.to_string()),
    }
}

fn octahedron() -> Outcome {
    let start = Instant::now();
    outcome((|| {
        let ex = example_zoo("octahedron", 0).map_err(|e| e.to_string())?;
        let p = ex.embedding.exact().expect("exact");
        let lengths = assignment_from_embedding(&ex.cycle, p).map_err(|e| e.to_string())?;
        let rel = sabitov_relation(&ex.cycle, 3, &PipelineMode::Specialized(lengths.clone()), PipelineOptions::default())
            .map_err(|e| e.to_string())?;
        ensure(rel.multiplier == Multiplier::Trivial, format!("multiplier {}", rel.multiplier))?;
        let v = generalized_volume(&ex.cycle, p, None).map_err(|e| e.to_string())?;
        ensure(verify_root(&rel, &v, &lengths).map_err(|e| e.to_string())?, format!("V = {v} is not a root"))?;
        within(Duration::from_secs(60), start)?;
        Ok(format!("degree {}, trivial multiplier, V = {v}, verify_root PASS", rel.degree()))
    })())
}

fn bricard() -> Outcome {
    outcome((|| {
        let ex = example_zoo("bricard-octahedron", 0).map_err(|e| e.to_string())?;
        let p = ex.embedding.to_float();
        let trace = trace_flex(&ex.cycle, &p, &TraceOptions { steps: 60, ..TraceOptions::default() }).map_err(|e| e.to_string())?;
        ensure(trace.accepted_steps() >= 50, format!("only {} accepted steps", trace.accepted_steps()))?;
        let residual = recompute_residual(&ex.cycle, &trace).map_err(|e| e.to_string())?;
        let report = bellows_check(&ex.cycle, &trace).map_err(|e| e.to_string())?;
        ensure(residual < 1e-10, format!("edge residual {residual:e}"))?;
        ensure(report.relative_drift < 1e-8, format!("relative drift {:e}", report.relative_drift))?;
        let mut corrupted = trace.clone();
        let last = corrupted.embeddings.last_mut().expect("nonempty");
        let moved: Vec<f64> = last.point(0).unwrap().iter().zip([0.1, 0.07, 0.03]).map(|(x, d)| x + d).collect();
        last.insert(0, moved).unwrap();
        let bad = bellows_check(&ex.cycle, &corrupted).map_err(|e| e.to_string())?;
        ensure(bad.relative_drift > 1e-4, format!("corrupted drift only {:e}", bad.relative_drift))?;
        Ok(format!(
            "{} steps, residual {residual:.1e}, drift {:.1e}, corrupted drift {:.1e}",
            trace.accepted_steps(),
            report.relative_drift,
            bad.relative_drift
        ))
    })())
}

fn flexible_cross_polytope() -> Outcome {
    let ex = match example_zoo("flexible-cross-polytope-4d", 0) {
        Ok(ex) => ex,
        Err(e) => return Fail(format!("constructor: {e}")),
    };
    let p = ex.embedding.to_float();
    let k = ex.cycle.support();
    let space = match flex_space(&k, &p, 1e-8) {
        Ok(s) => s,
        Err(e) => return Fail(e.to_string()),
    };
    if !ex.cycle.is_cycle() || space.dimension() == 0 {
        return Fail(format!("cycle {}, flex dimension {}", ex.cycle.is_cycle(), space.dimension()));
    }
    let r = rigidity_matrix(&k, &p).expect("covered");
    let residual = space.basis.iter().map(|d| (&r * d).amax()).fold(0.0, f64::max);
    if residual >= 1e-10 {
        return Fail(format!("infinitesimal flex residual {residual:e}"));
    }
    let trace = match trace_flex(&ex.cycle, &p, &TraceOptions::default()) {
        Ok(t) => t,
        Err(e) => return Fail(e.to_string()),
    };
    let drift = bellows_check(&ex.cycle, &trace).map(|b| b.relative_drift).unwrap_or(f64::NAN);
    match &trace.status {
        TraceStatus::Completed if drift < 1e-8 => {
            Pass(format!("flex dimension {}, {} steps, drift {drift:.1e}", space.dimension(), trace.accepted_steps()))
        }
        TraceStatus::Completed => Fail(format!("drift {drift:e}")),
        TraceStatus::Truncated { step, reason } => Downgraded(format!(
            "symmetric configuration is a cycle with flex dimension {} (residual {residual:.1e}), \
             but no finite flex: trace stopped at step {step} ({reason})",
            space.dimension()
        )),
    }
}

fn oracle_agreement() -> Outcome {
    let start = Instant::now();
    outcome((|| {
        let (cube, pcube) = common::triangulated_cube();
        let cell = example_zoo("cross-polytope-16cell", 0).map_err(|e| e.to_string())?;
        let cases: [(&str, Chain, ExactEmbedding); 2] =
            [("cube", cube, pcube), ("16-cell", cell.cycle, cell.embedding.exact().expect("exact").clone())];
        let mut summary = Vec::new();
        for (name, z, p) in cases {
            let exact = bellows::polyalg::to_f64(&generalized_volume(&z, &p, None).map_err(|e| e.to_string())?);
            let pf = p.to_float();
            let hits = (0..20u64)
                .filter(|&seed| {
                    let est = winding_volume(&z, &pf, 100_000, seed).expect("covered");
                    (est.estimate - exact).abs() <= 3.0 * est.standard_error
                })
                .count();
            ensure(hits >= 19, format!("{name}: only {hits}/20 runs within 3 SE of {exact}"))?;
            summary.push(format!("{name} {hits}/20"));
        }
        Ok(format!("{} in {:.1?}", summary.join(", "), start.elapsed()))
    })())
}

fn property_suites() -> Outcome {
    outcome((|| {
        for (name, check) in common::SUITES {
            common::run_suite(name, 200, check)?;
        }
        Ok(format!("{} suites x 200 instances", common::SUITES.len()))
    })())
}

fn cascade_structure() -> Outcome {
    let start = Instant::now();
    outcome((|| {
        let r = 5;
        let labels = StepLabels { sigma: vec![0, 1], w: (2..2 + r as u32).collect() };
        let l = MultiPoly::var(edge_var(0, 1));
        let v = MultiPoly::var(volume_var());
        let lengths = LengthSource::symbolic();
        let ctx = ElimContext::raw();
        let err = |e: SabitovError| e.to_string();
        // synthetic branch relations l^2 V^2 + d (V + e) + d^2: k = 2, N = 1, s = 1
        let mut branch = BTreeMap::new();
        for j in 1..=r - 2 {
            let d = MultiPoly::var(labels.d(j));
            let e = MultiPoly::var(edge_var(labels.wv(j), labels.wv(j + 1)));
            branch.insert(j, &(&l.pow(2) * &v.pow(2)) + &(&(&d * &(&v + &e)) + &d.pow(2)));
        }
        for lab in [labels.clone(), labels.reversed()] {
            for j in 3..=r - 2 {
                let cm = lab.cm_j(j, &lengths);
                let (dj, big) = (lab.d(j), [lab.big_d(j), lab.big_d(j + 1), lab.big_d(j + 2)]);
                ensure(cm.degree(dj) == Some(2), "CM: degree in d_j is not 2")?;
                ensure(cm.degree_in(&big) == Some(2), "CM: total degree in D_j, D_j+1, D_j+2 is not 2")?;
                ensure(cm.coefficient_of(dj, 2).coefficient_of(big[1], 2) == l.scale(&rat(2)), "CM: d_j^2 D_j+1^2 coefficient")?;
                let bad = Monomial::from_pairs(vec![(dj, 2), (big[0], 1)]);
                ensure(cm.terms().all(|(m, _)| !m.is_divisible_by(&bad)), "CM: monomial divisible by d_j^2 D_j")?;
            }
        }
        let f = f_cascade(&labels, &lengths, &ctx).map_err(err)?;
        for (i, fj) in f.iter().enumerate() {
            let j = i + 3;
            let t = 1u32 << (j - 2);
            for k in 3..=j {
                ensure(fj.degree(labels.d(k)) == Some(t), format!("F_{j}: degree in d_{k}"))?;
            }
            ensure(fj.degree_in(&[labels.big_d(3), labels.big_d(j + 1), labels.big_d(j + 2)]) == Some(t), format!("F_{j}: D degree"))?;
            let mut c = fj.coefficient_of(labels.big_d(j + 1), t);
            for k in 3..=j {
                c = c.coefficient_of(labels.d(k), t);
            }
            let expected = l.scale(&rat(2)).pow((1 << (j - 3)) * (j as u32 - 2));
            ensure(c == expected, format!("F_{j}: leading coefficient {c}"))?;
            let bad = Monomial::from_pairs(vec![(labels.d(3), t), (labels.big_d(3), 1)]);
            ensure(fj.terms().all(|(m, _)| !m.is_divisible_by(&bad)), format!("F_{j}: monomial divisible by d_3^T D_3"))?;
        }
        let g = g_cascade(&labels, f.last().expect("nonempty"), &branch, &ctx).map_err(err)?;
        // (T, M, S) for G_2, then G_j from k = 2, N = 1, s = 1
        let (mut t, mut m, mut s) = (1u32 << (r - 4), 0u32, (1u32 << (r - 5)) * (r as u32 - 4));
        for (i, gj) in g.iter().enumerate() {
            let j = i + 2;
            if j >= 3 {
                (t, m, s) = (2 * t, 2 * m + 2 * t, 2 * s + 2 * t);
            }
            for k in j + 1..=r - 2 {
                ensure(gj.degree(labels.d(k)) == Some(t), format!("G_{j}: degree in d_{k}"))?;
            }
            ensure(gj.degree_in(&[labels.big_d(3), labels.big_d(r - 1)]) == Some(t), format!("G_{j}: D degree"))?;
            ensure(gj.degree(volume_var()).unwrap_or(0) == m, format!("G_{j}: V degree"))?;
            let mut c = gj.coefficient_of(volume_var(), m).coefficient_of(labels.big_d(r - 1), t);
            for k in j + 1..=r - 2 {
                c = c.coefficient_of(labels.d(k), t);
            }
            ensure(c == l.pow(s), format!("G_{j}: leading coefficient {c}, expected l^{s}"))?;
            if j >= 3 {
                let bad = Monomial::from_pairs(vec![(labels.big_d(3), 1), (volume_var(), m)]);
                ensure(gj.terms().all(|(mo, _)| !mo.is_divisible_by(&bad)), format!("G_{j}: monomial divisible by D_3 V^M"))?;
            }
        }
        within(Duration::from_secs(600), start)?;
        Ok(format!("r = 5: CM, F and G degree, leading-coefficient and divisibility properties hold ({:.1?})", start.elapsed()))
    })())
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 11] = [
        (1, "Cayley-Menger identities", cm_identities),
        (2, "exact volumes", exact_volumes),
        (3, "simplex boundary symbolic relation", simplex_symbolic),
        (4, "double 4-simplex specialized relation", double_simplex),
        (5, "16-cell specialized relation", cell16_specialized),
        (6, "octahedron relation", octahedron),
        (7, "Bricard octahedron flex", bricard),
        (8, "flexible 4D cross-polytope", flexible_cross_polytope),
        (9, "winding oracle agreement", oracle_agreement),
        (10, "property suites", property_suites),
        (11, "symbolic cascade structure", cascade_structure),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, run) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let result = run();
        let secs = start.elapsed().as_secs_f64();
        let (status, detail) = match result {
            Pass(d) => ("PASS", d),
            Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Blocked(d) => ("BLOCKED", d),
            Downgraded(d) => ("DOWNGRADED", d),
        };
        println!("criterion {id:>2} {status:<10} {name} ({secs:.1} s): {detail}");
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
