#![allow(dead_code)]

use std::f64::consts::PI;

use extremal_core::calderon::calderon;
use extremal_core::extremal::{extremality_rank_test, face_of_q, find_zeros, perturbed_example_phi};
use extremal_core::fixtures;
use extremal_core::functional::{lf, lf_quadratic, lf_via_measure, phi_from_measure, AtomicMeasure};
use extremal_core::io::{parse, to_string, PhiJson, PolyJson};
use extremal_core::polynomial::{sum_of_mod_squares, uniform_grid, AnalyticTrigPoly, Angle3, DegreeBox, MultiIndex, TrigPoly};
use extremal_core::sos::{q_membership, verify_sos, GramProblem, MembershipStatus, DEFAULT_MAX_ITERS};
use extremal_core::toeplitz::{analytic_to_vector, build_matrix, is_psd, vector_to_analytic, PhiTable};
use nalgebra::DMatrix;
use num_complex::Complex;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestCaseError, TestRunner};

pub const SEED: u64 = 0x7075_6c73_6172;

pub type Outcome = Result<(), String>;

pub fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config { cases, rng_seed: RngSeed::Fixed(SEED), failure_persistence: None, ..Config::default() })
}

fn run<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Outcome
where
    S::Value: std::fmt::Debug,
{
    runner(cases).run(&strategy, test).map_err(|e| e.to_string())
}

fn unit() -> DegreeBox {
    DegreeBox::new(1, 1, 1)
}

pub fn boxes() -> impl Strategy<Value = DegreeBox> {
    prop_oneof![
        Just(DegreeBox::new(1, 1, 1)),
        Just(DegreeBox::new(1, 0, 1)),
        Just(DegreeBox::new(2, 1, 0)),
        Just(DegreeBox::new(0, 0, 2)),
        Just(DegreeBox::new(1, 1, 2)),
    ]
}

fn complex() -> impl Strategy<Value = Complex<f64>> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| Complex::new(re, im))
}

pub fn analytic_in(bx: DegreeBox) -> impl Strategy<Value = AnalyticTrigPoly<f64>> {
    prop::collection::vec(complex(), bx.octant_len()).prop_map(move |cs| {
        AnalyticTrigPoly::from_terms(bx, bx.octant().zip(cs)).unwrap()
    })
}

pub fn analytic() -> impl Strategy<Value = AnalyticTrigPoly<f64>> {
    boxes().prop_flat_map(analytic_in)
}

pub fn angle() -> impl Strategy<Value = Angle3<f64>> {
    (-PI..PI, -PI..PI, -PI..PI).prop_map(|(a, b, c)| Angle3::new(a, b, c))
}

pub fn measure() -> impl Strategy<Value = AtomicMeasure<f64>> {
    prop::collection::vec((angle(), 0.1..5.0f64), 1..7).prop_map(|atoms| AtomicMeasure::new(atoms).unwrap())
}

/// Real-valued polynomial with random upper-half coefficients.
pub fn real_trig_in(bx: DegreeBox) -> impl Strategy<Value = TrigPoly<f64>> {
    let half: Vec<MultiIndex> = bx.lattice().filter(|n| n.in_upper_half()).collect();
    prop::collection::vec(complex(), half.len()).prop_map(move |cs| {
        let mut f = TrigPoly::zero(bx);
        for (n, c) in half.iter().zip(cs) {
            if *n == MultiIndex::ORIGIN {
                f.add_term(*n, Complex::new(c.re, 0.0)).unwrap();
            } else {
                f.add_term(*n, c).unwrap();
                f.add_term(-*n, c.conj()).unwrap();
            }
        }
        f
    })
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

/// `f(theta + shift)`, by multiplying each coefficient by `exp(i n . shift)`.
fn translate(f: &TrigPoly<f64>, shift: &Angle3<f64>) -> TrigPoly<f64> {
    TrigPoly::from_terms(f.degree_box(), f.terms().map(|(n, c)| (n, c * Complex::from_polar(1.0, n.phase(shift))))).unwrap()
}

pub fn mod_square_is_real() -> Outcome {
    run(200, analytic(), |f| {
        let g = f.mod_square();
        ensure(g.is_real_valued(1e-12), || "mod_square not real-valued".into())
    })
}

pub fn mod_square_evaluates() -> Outcome {
    run(100, (analytic(), angle()), |(f, p)| {
        let lhs = f.mod_square().eval(&p).re;
        let rhs = f.eval(&p).norm_sqr();
        ensure((lhs - rhs).abs() <= 1e-10 * rhs.max(1.0), || format!("{lhs} vs {rhs}"))
    })
}

pub fn parseval() -> Outcome {
    run(200, analytic(), |f| {
        let c = f.mod_square().coeff(MultiIndex::ORIGIN).re;
        let n = f.norm_squared();
        ensure((c - n).abs() <= 1e-13 * n.max(1.0), || format!("{c} vs {n}"))
    })
}

pub fn sos_grid_min() -> Outcome {
    let strategy = boxes().prop_flat_map(|bx| prop::collection::vec(analytic_in(bx), 1..4));
    run(100, strategy, |fs| {
        let (min, _) = sum_of_mod_squares(&fs).unwrap().min_on_grid(12).unwrap();
        ensure(min >= -1e-9, || format!("grid min {min}"))
    })
}

pub fn matrix_hermitian_exact() -> Outcome {
    run(200, (boxes(), measure()), |(bx, mu)| {
        let a = build_matrix(&phi_from_measure(&mu, bx)).unwrap();
        let n = a.dim();
        for r in 0..n {
            for s in 0..n {
                if a.get(r, s) != a.get(s, r).conj() {
                    return Err(TestCaseError::fail(format!("entry ({r},{s}) breaks symmetry")));
                }
            }
        }
        Ok(())
    })
}

pub fn toeplitz_shift() -> Outcome {
    run(200, (boxes(), measure()), |(bx, mu)| {
        let a = build_matrix(&phi_from_measure(&mu, bx)).unwrap();
        let oct: Vec<MultiIndex> = bx.octant().collect();
        let pos = |i: MultiIndex| oct.iter().position(|o| *o == i);
        for (r, ir) in oct.iter().enumerate() {
            for (s, is) in oct.iter().enumerate() {
                for t in bx.lattice() {
                    if let (Some(r2), Some(s2)) = (pos(*ir + t), pos(*is + t)) {
                        ensure(a.get(r, s) == a.get(r2, s2), || format!("shift {t} moves ({r},{s})"))?;
                    }
                }
            }
        }
        Ok(())
    })
}

pub fn vectorization_round_trip() -> Outcome {
    run(200, analytic(), |f| {
        let back = vector_to_analytic(&analytic_to_vector(&f), f.degree_box()).unwrap();
        ensure(back == f, || "round trip changed the polynomial".into())
    })
}

pub fn measure_phi_is_psd() -> Outcome {
    run(200, (boxes(), measure()), |(bx, mu)| {
        let a = build_matrix(&phi_from_measure(&mu, bx)).unwrap();
        let (psd, min) = is_psd(&a, 1e-9).unwrap();
        let floor = -1e-10 * a.dim() as f64 * mu.total_weight();
        ensure(psd && min >= floor, || format!("min eigenvalue {min}"))
    })
}

pub fn quadratic_identity() -> Outcome {
    let strategy = boxes().prop_flat_map(|bx| (Just(bx), measure(), analytic_in(bx)));
    run(200, strategy, |(bx, mu, f)| {
        let phi = phi_from_measure(&mu, bx);
        let lhs = lf(&phi, &f.mod_square()).unwrap().re;
        let rhs = lf_quadratic(&phi, &f).unwrap();
        ensure((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()), || format!("{lhs} vs {rhs}"))
    })
}

pub fn lf_linear() -> Outcome {
    let strategy = boxes().prop_flat_map(|bx| (measure(), real_trig_in(bx), real_trig_in(bx), -3.0..3.0f64, -3.0..3.0f64));
    run(200, strategy, |(mu, f, g, a, b)| {
        let phi = phi_from_measure(&mu, f.degree_box());
        let combo = &f.scale(a) + &g.scale(b);
        let lhs = lf(&phi, &combo).unwrap();
        let rhs = lf(&phi, &f).unwrap().scale(a) + lf(&phi, &g).unwrap().scale(b);
        let scale = 1.0 + f.abs_sum() * a.abs() + g.abs_sum() * b.abs();
        ensure((lhs - rhs).norm() <= 1e-12 * scale, || format!("{lhs} vs {rhs}"))
    })
}

pub fn measure_routes_agree() -> Outcome {
    let strategy = boxes().prop_flat_map(|bx| (measure(), real_trig_in(bx)));
    run(200, strategy, |(mu, f)| {
        let direct = lf_via_measure(&mu, &f).unwrap();
        let table = lf(&phi_from_measure(&mu, f.degree_box()), &f).unwrap().re;
        let scale = 1.0 + f.abs_sum() * mu.total_weight();
        ensure((direct - table).abs() <= 1e-12 * scale, || format!("{direct} vs {table}"))
    })
}

pub fn face_generators_on_hyperplane() -> Outcome {
    let phis = prop_oneof![
        (0.05..1.0f64).prop_map(|t| {
            let c = Complex::new(t, 0.0);
            perturbed_example_phi(Complex::new(1.0, 0.0), c, c, c)
        }),
        prop::collection::vec((angle(), 0.1..5.0f64), 1..4)
            .prop_map(|atoms| phi_from_measure(&AtomicMeasure::new(atoms).unwrap(), unit())),
    ];
    run(100, phis, |phi| {
        let report = face_of_q(&phi, 1e-9).unwrap();
        for g in &report.generators {
            ensure(g.is_real_valued_default(), || "generator not real".into())?;
            let (min, _) = g.min_on_grid(32).unwrap();
            ensure(min >= -1e-9, || format!("generator grid min {min}"))?;
            let v = lf(&phi, g).unwrap().re;
            ensure(v <= 1e-9, || format!("generator off the hyperplane: {v}"))?;
        }
        Ok(())
    })
}

pub fn kernel_collapse() -> Outcome {
    let one = Complex::new(1.0, 0.0);
    for j in 1..=10 {
        let t = j as f64 / 10.0;
        let c = Complex::new(t, 0.0);
        let nu = face_of_q(&perturbed_example_phi(one, c, c, c), 1e-9).map_err(|e| e.to_string())?.nu;
        let want = if j < 10 { 1 } else { 4 };
        if nu != want {
            return Err(format!("t = {t}: nu = {nu}, expected {want}"));
        }
    }
    Ok(())
}

pub fn rank_test_scale_invariant() -> Outcome {
    let f = fixtures::f_extremal();
    let zeros = find_zeros(&f, 64, 1e-9).map_err(|e| e.to_string())?;
    let base = extremality_rank_test(&f, &zeros).map_err(|e| e.to_string())?;
    run(100, 0.01..100.0f64, |c| {
        let cert = extremality_rank_test(&f.scale(c), &zeros).unwrap();
        ensure(cert.rank == base.rank && cert.extremal == base.extremal, || format!("scale {c}: rank {}", cert.rank))
    })
}

pub fn zeros_are_refined() -> Outcome {
    let f = fixtures::f_extremal();
    run(100, (angle(), 0.1..10.0f64), |(shift, c)| {
        let g = translate(&f, &shift).scale(c);
        let zeros = find_zeros(&g, 32, 1e-9).unwrap();
        let axis = uniform_grid::<f64>(32);
        let grid_max = g.grid_values([&axis, &axis, &axis]).into_iter().fold(0.0f64, |a, v| a.max(v.abs()));
        ensure(zeros.len() <= 8, || format!("{} zeros", zeros.len()))?;
        for z in &zeros {
            ensure(g.eval(&z.point).re.abs() <= 1e-9 * grid_max, || format!("residual {}", z.residual))?;
            let grad = g.gradient(&z.point);
            let norm = grad.iter().map(|v| v * v).sum::<f64>().sqrt();
            ensure(norm <= 1e-6, || format!("gradient {norm}"))?;
        }
        Ok(())
    })
}

pub fn calderon_preserves_nonnegativity() -> Outcome {
    let grid: Vec<f64> = (0..21).map(|j| -3.0 + 0.3 * j as f64).collect();
    run(50, prop::collection::vec(analytic_in(unit()), 1..4), |fs| {
        let r = calderon(&sum_of_mod_squares(&fs).unwrap()).unwrap();
        for x in &grid {
            for y in &grid {
                for z in &grid {
                    let v = r.power.eval(*x, *y, *z);
                    ensure(v >= -1e-9 * r.scale_hint, || format!("value {v} at ({x},{y},{z})"))?;
                }
            }
        }
        Ok(())
    })
}

pub fn calderon_degree_bound() -> Outcome {
    run(200, boxes().prop_flat_map(real_trig_in), |f| {
        let r = calderon(&f).unwrap();
        let want = f.degree_box().doubled();
        ensure(r.power.degree_box() == want, || "box not doubled".into())?;
        for (i, _) in r.power.terms() {
            ensure(want.contains_octant(i), || format!("exponent {i} outside {want}"))?;
        }
        Ok(())
    })
}

pub fn calderon_additive() -> Outcome {
    let strategy = boxes().prop_flat_map(|bx| (real_trig_in(bx), real_trig_in(bx)));
    run(200, strategy, |(f, g)| {
        let sum = calderon(&(&f + &g)).unwrap().power;
        let parts = &calderon(&f).unwrap().power + &calderon(&g).unwrap().power;
        let scale = 1.0 + sum.max_abs_coeff();
        let diff = (&sum - &parts).max_abs_coeff();
        ensure(diff <= 1e-12 * scale, || format!("difference {diff}"))
    })
}

pub fn calderon_targets() -> Outcome {
    let targets = fixtures::power_targets();
    for (k, (f, p)) in fixtures::kernel_factors().iter().zip(&targets).enumerate() {
        let r = calderon(&f.mod_square()).map_err(|e| e.to_string())?;
        let (ok, ratio) = extremal_core::calderon::proportional(&r.power, p, 1e-9).map_err(|e| e.to_string())?;
        if !ok || ratio <= 0.0 {
            return Err(format!("pair {}: proportional {ok}, ratio {ratio}", k + 1));
        }
    }
    Ok(())
}

pub fn squares_are_members() -> Outcome {
    run(100, analytic(), |f| {
        let g = f.mod_square();
        let r = q_membership(&g, DEFAULT_MAX_ITERS, 1e-9).unwrap();
        ensure(r.status == MembershipStatus::Member, || format!("status {:?} after {} iterations", r.status, r.iterations))?;
        ensure(verify_sos(&g, r.factors.as_ref().unwrap(), 1e-7), || "factors do not reproduce f".into())
    })
}

pub fn non_member_certificates() -> Outcome {
    let f0 = fixtures::f0();
    run(100, (0.05..1.15f64, angle(), 0.2..5.0f64), |(m, shift, c)| {
        let g = translate(&(&f0 - &TrigPoly::constant(unit(), m)), &shift).scale(c);
        let r = q_membership(&g, DEFAULT_MAX_ITERS, 1e-9).unwrap();
        ensure(r.status == MembershipStatus::NonMember, || format!("status {:?}", r.status))?;
        let sep = r.separator.unwrap();
        let (_, min) = is_psd(&build_matrix(&sep).unwrap(), 1e-9).unwrap();
        ensure(min >= -1e-9, || format!("separator min eigenvalue {min}"))?;
        let v = lf(&sep, &g).unwrap().re;
        ensure(v < 0.0, || format!("separator value {v}"))
    })
}

pub fn gram_class_perturbation() -> Outcome {
    let strategy = boxes().prop_flat_map(|bx| (real_trig_in(bx), any::<u64>(), complex()));
    run(200, strategy, |(f, pick, delta)| {
        let problem = GramProblem::new(&f);
        let n = problem.dim();
        let g = problem.project_affine(&DMatrix::from_fn(n, n, |r, s| Complex::new((r + 2 * s) as f64 * 0.1, r as f64 - s as f64)));
        let classes: Vec<Vec<(usize, usize)>> = problem.classes().into_values().filter(|v| v.len() > 1).collect();
        if classes.is_empty() {
            return Ok(());
        }
        let class = &classes[(pick % classes.len() as u64) as usize];
        let a = class[(pick as usize / 7) % class.len()];
        let b = class[(a.0 + a.1 + 1 + (pick as usize / 11)) % class.len()];
        if a == b {
            return Ok(());
        }
        let mut h = g.clone();
        h[a] += delta;
        h[b] -= delta;
        let diff = (&problem.represented_poly(&h) - &f).max_abs_coeff();
        ensure(diff <= 1e-12 * (1.0 + f.max_abs_coeff()), || format!("difference {diff}"))
    })
}

pub fn json_round_trip() -> Outcome {
    let strategy = boxes().prop_flat_map(|bx| (real_trig_in(bx), analytic_in(bx), measure()));
    run(200, strategy, |(f, a, mu)| {
        let docs = [PolyJson::from_trig(&f), PolyJson::from_analytic(&a), PolyJson::from_power(&calderon(&f).unwrap().power)];
        for doc in docs {
            let text = to_string(&doc);
            let back: PolyJson = parse(&text).unwrap();
            ensure(back == doc && to_string(&back) == text, || "polynomial document changed".into())?;
        }
        let phi = PhiJson::from_table(&phi_from_measure(&mu, f.degree_box()));
        let back: PhiJson = parse(&to_string(&phi)).unwrap();
        ensure(back == phi, || "phi document changed".into())?;
        let table: PhiTable<f64> = back.to_table().unwrap();
        ensure(PhiJson::from_table(&table) == phi, || "phi table changed".into())
    })
}

pub type Property = (&'static str, fn() -> Outcome);

/// Every property, by name.
pub const ALL: &[Property] = &[
    ("mod_square_is_real", mod_square_is_real),
    ("mod_square_evaluates", mod_square_evaluates),
    ("parseval", parseval),
    ("sos_grid_min", sos_grid_min),
    ("matrix_hermitian_exact", matrix_hermitian_exact),
    ("toeplitz_shift", toeplitz_shift),
    ("vectorization_round_trip", vectorization_round_trip),
    ("measure_phi_is_psd", measure_phi_is_psd),
    ("quadratic_identity", quadratic_identity),
    ("lf_linear", lf_linear),
    ("measure_routes_agree", measure_routes_agree),
    ("face_generators_on_hyperplane", face_generators_on_hyperplane),
    ("kernel_collapse", kernel_collapse),
    ("rank_test_scale_invariant", rank_test_scale_invariant),
    ("zeros_are_refined", zeros_are_refined),
    ("calderon_preserves_nonnegativity", calderon_preserves_nonnegativity),
    ("calderon_degree_bound", calderon_degree_bound),
    ("calderon_additive", calderon_additive),
    ("calderon_targets", calderon_targets),
    ("squares_are_members", squares_are_members),
    ("non_member_certificates", non_member_certificates),
    ("gram_class_perturbation", gram_class_perturbation),
    ("json_round_trip", json_round_trip),
];
