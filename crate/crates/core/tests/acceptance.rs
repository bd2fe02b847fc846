mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use extremal_core::calderon::{calderon, proportional};
use extremal_core::extremal::{extremality_rank_test, face_of_q, find_zeros, local_minimum, perturbed_example_phi};
use extremal_core::fixtures;
use extremal_core::functional::{lf, lf_quadratic};
use extremal_core::polynomial::{DegreeBox, TrigPoly};
use extremal_core::sos::{q_membership, verify_sos, MembershipStatus, DEFAULT_MAX_ITERS};
use extremal_core::toeplitz::{analytic_to_vector, build_matrix, is_psd, kernel_basis, projector_distance};
use num_complex::Complex;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    require(elapsed < limit, || format!("took {elapsed:?}, limit {limit:?}"))
}

fn err(e: extremal_core::Error) -> String {
    e.to_string()
}

fn example1_kernel() -> Check {
    let start = Instant::now();
    let a = build_matrix(&fixtures::example1_phi()).map_err(err)?;
    require(a.dim() == 8, || format!("dimension {}", a.dim()))?;
    let (psd, min) = is_psd(&a, 1e-9).map_err(err)?;
    require(psd, || format!("min eigenvalue {min}"))?;
    let kernel = kernel_basis(&a, 1e-9).map_err(err)?;
    require(kernel.nu == 4, || format!("kernel_dim {}", kernel.nu))?;
    let expected: Vec<_> = fixtures::kernel_factors().iter().map(analytic_to_vector).collect();
    let dist = projector_distance(&kernel.vectors, &expected, 8);
    require(dist <= 1e-9, || format!("projector distance {dist:e}"))?;
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("8x8 PSD, kernel_dim 4, projector distance {dist:.1e}"))
}

fn quadratic_identity() -> Check {
    let phi = fixtures::example1_phi();
    let a = build_matrix(&phi).map_err(err)?;
    for (k, f) in fixtures::kernel_factors().iter().enumerate() {
        let value = lf(&phi, &f.mod_square()).map_err(err)?.norm();
        let form = lf_quadratic(&phi, f).map_err(err)?.abs();
        let direct = a.quadratic_form(&analytic_to_vector(f)).norm();
        require(value.max(form).max(direct) <= 1e-10, || format!("F{}: lf {value:e}, e*Ae {direct:e}", k + 1))?;
    }
    common::quadratic_identity()?;
    Ok("lf(phi, |F_k|^2) = e_k*Ae_k = 0 for k = 1..4; 200 random pairs agree".into())
}

fn perturbation_extremality() -> Check {
    let half = Complex::new(0.5, 0.0);
    let one = Complex::new(1.0, 0.0);
    let factors = fixtures::kernel_factors();
    let mut worst = 0.0f64;
    for j in 0..4 {
        let mut g = [half; 4];
        g[j] = one;
        let report = face_of_q(&perturbed_example_phi(g[0], g[1], g[2], g[3]), 1e-9).map_err(err)?;
        require(report.nu == 1, || format!("gamma_{} = 1: kernel_dim {}", j + 1, report.nu))?;
        let a = build_matrix(&report.phi).map_err(err)?;
        let kernel = kernel_basis(&a, 1e-9).map_err(err)?;
        let dist = projector_distance(&kernel.vectors, &[analytic_to_vector(&factors[j])], 8);
        require(dist <= 1e-9, || format!("gamma_{} = 1: distance {dist:e}", j + 1))?;
        worst = worst.max(dist);
    }
    Ok(format!("each perturbation isolates e_j, worst distance {worst:.1e}"))
}

fn calderon_targets() -> Check {
    let mut ratios = Vec::new();
    for (k, (f, p)) in fixtures::kernel_factors().iter().zip(fixtures::power_targets()).enumerate() {
        let r = calderon(&f.mod_square()).map_err(err)?;
        let (ok, ratio) = proportional(&r.power, &p, 1e-9).map_err(err)?;
        require(ok && ratio > 0.0, || format!("P{}: proportional {ok}, ratio {ratio}", k + 1))?;
        ratios.push(format!("{ratio}"));
    }
    Ok(format!("calderon(|F_k|^2) = c P_k with c = {}", ratios.join(", ")))
}

fn nonnegativity_and_zeros() -> Check {
    let target = 4.0 - 2f64.powf(1.5);
    let f0 = fixtures::f0();
    let (grid_min, _) = f0.min_on_grid(64).map_err(err)?;
    require((grid_min - target).abs() <= 1e-2, || format!("grid min {grid_min}"))?;
    let (refined, _) = local_minimum(&f0, 64).map_err(err)?;
    require((refined - target).abs() <= 1e-8, || format!("refined min {refined}"))?;
    let f = fixtures::f_extremal();
    let zeros = find_zeros(&f, 64, 1e-9).map_err(err)?;
    require(zeros.len() == 8, || format!("{} zeros", zeros.len()))?;
    for z in &zeros {
        require(z.residual <= 1e-9 && z.gradient_norm <= 1e-6, || format!("zero {:?}: |f| {:e}, grad {:e}", z.point.as_array(), z.residual, z.gradient_norm))?;
    }
    Ok(format!("grid min {grid_min:.5}, refined min {refined:.10}, 8 zeros"))
}

fn rank_certificate() -> Check {
    let start = Instant::now();
    let f = fixtures::f_extremal();
    let zeros = find_zeros(&f, 64, 1e-9).map_err(err)?;
    let cert = extremality_rank_test(&f, &zeros).map_err(err)?;
    require(cert.equations == 32 && cert.unknowns == 27 && cert.rank == 26, || format!("{} equations, {} unknowns, rank {}", cert.equations, cert.unknowns, cert.rank))?;
    let angle = cert.null_angle.ok_or("no null vector")?;
    require(cert.extremal && angle <= 1e-6, || format!("null angle {angle:e}"))?;
    within(start.elapsed(), Duration::from_secs(5))?;
    Ok(format!("32 equations, 27 unknowns, rank 26, null angle {angle:.1e}"))
}

fn calderon_extremal() -> Check {
    let r = calderon(&fixtures::f_extremal()).map_err(err)?;
    let (ok, ratio) = proportional(&r.power, &fixtures::target_extremal(), 1e-8).map_err(err)?;
    require(ok && ratio > 0.0, || format!("proportional {ok}, ratio {ratio}"))?;
    Ok(format!("proportional with ratio {ratio}"))
}

fn separation() -> Check {
    let bx = DegreeBox::new(1, 1, 1);
    let phi = fixtures::example1_phi();
    let f0 = fixtures::f0();
    for m in [0.1, 0.5, 1.0] {
        let v = lf(&phi, &(&f0 - &TrigPoly::constant(bx, m))).map_err(err)?;
        require((v - Complex::new(-m, 0.0)).norm() <= 1e-12, || format!("m = {m}: lf = {v}"))?;
    }
    let g = &f0 - &TrigPoly::constant(bx, 0.5);
    let r = q_membership(&g, DEFAULT_MAX_ITERS, 1e-9).map_err(err)?;
    require(r.status == MembershipStatus::NonMember, || format!("f0 - 1/2: status {:?}", r.status))?;
    let sep = r.separator.ok_or("no separator")?;
    let (psd, min) = is_psd(&build_matrix(&sep).map_err(err)?, 1e-9).map_err(err)?;
    let value = lf(&sep, &g).map_err(err)?.re;
    require(psd && value < -1e-2, || format!("separator min eigenvalue {min:e}, lf {value}"))?;
    let f1 = fixtures::kernel_factors()[0].mod_square();
    let member = q_membership(&f1, DEFAULT_MAX_ITERS, 1e-9).map_err(err)?;
    require(member.status == MembershipStatus::Member, || format!("|F1|^2: status {:?}", member.status))?;
    require(verify_sos(&f1, member.factors.as_deref().unwrap_or(&[]), 1e-7), || "|F1|^2 factors fail verification".into())?;
    Ok(format!("lf = -m exactly; separator lf {value:.4}, min eigenvalue {min:.1e}; |F1|^2 member"))
}

fn properties() -> Check {
    let start = Instant::now();
    for (name, prop) in common::ALL {
        let t = Instant::now();
        prop().map_err(|e| format!("{name}: {e}"))?;
        println!("    {name}: {:?}", t.elapsed());
    }
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!("{} properties in {:.1?}", common::ALL.len(), start.elapsed()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("Example 1 kernel", example1_kernel),
        ("quadratic identity", quadratic_identity),
        ("perturbation extremality", perturbation_extremality),
        ("Calderon targets", calderon_targets),
        ("nonnegativity and zeros", nonnegativity_and_zeros),
        ("rank certificate", rank_certificate),
        ("Calderon of the extremal polynomial", calderon_extremal),
        ("separation", separation),
        ("property suites", properties),
    ];
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail}", n + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {detail}", n + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
