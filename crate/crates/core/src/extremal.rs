//! Supporting hyperplanes, faces and extremality certificates.
//!
//! Two certificates are provided. For the sum-of-squares cone, a Hermitian
//! positive `phi` with singular block-Toeplitz matrix supports the cone; the
//! kernel of the matrix spans the face it cuts out, and a one-dimensional
//! kernel pins an extremal point ([`face_of_q`]). For the nonnegative cone,
//! the zeros of `f` force every minorant `g` to vanish to first order at the
//! same points; if that linear system leaves only multiples of `f`, then `f`
//! is extremal ([`extremality_rank_test`]).

use nalgebra::{DMatrix, Matrix3, Vector3, SVD};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::functional::{lf, lf_via_measure, AtomicMeasure};
use crate::polynomial::{wrap_angle, AnalyticTrigPoly, Angle3, DegreeBox, MultiIndex, TrigPoly};
use crate::scalar::{lit, to_f64, Real};
use crate::toeplitz::{build_matrix, is_psd, kernel_basis, vector_to_analytic, PhiTable};

/// Default sampling grid per axis for zero seeding.
pub const DEFAULT_GRID: usize = 64;
/// Default tolerance for nonnegativity of sampled values.
pub const DEFAULT_REFINE_TOL: f64 = 1e-9;
/// Default relative singular value cut-off for the rank test.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

const NEWTON_MAX_ITERS: usize = 50;
const DEDUP_DISTANCE: f64 = 1e-6;
const SEED_FRACTION: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    NotSupporting,
    ExtremalPoint,
    Face,
}

impl Classification {
    pub fn from_nu(nu: usize) -> Self {
        match nu {
            0 => Classification::NotSupporting,
            1 => Classification::ExtremalPoint,
            _ => Classification::Face,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Classification::NotSupporting => "not-supporting",
            Classification::ExtremalPoint => "extremal-point",
            Classification::Face => "face",
        }
    }
}

/// Face of the sum-of-squares cone cut out by `L_phi(f) = 0`.
#[derive(Clone, Debug)]
pub struct FaceReport<T: Real> {
    pub phi: PhiTable<T>,
    pub nu: usize,
    /// `|F_j|^2` for each kernel vector.
    pub generators: Vec<TrigPoly<T>>,
    /// The `F_j` themselves.
    pub factors: Vec<AnalyticTrigPoly<T>>,
    pub classification: Classification,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZeroPoint<T> {
    pub point: Angle3<T>,
    /// `|f|` at the refined point.
    pub residual: T,
    pub gradient_norm: T,
}

#[derive(Clone, Debug)]
pub struct RankCertificate<T: Real> {
    pub zeros: Vec<ZeroPoint<T>>,
    pub equations: usize,
    pub unknowns: usize,
    pub rank: usize,
    pub extremal: bool,
    pub singular_values: Vec<T>,
    /// Angle between the null vector and the coefficients of `f`, when extremal.
    pub null_angle: Option<T>,
}

/// Classifies the hyperplane `L_phi = 0` against the sum-of-squares cone.
pub fn face_of_q<T: Real>(phi: &PhiTable<T>, tol: T) -> Result<FaceReport<T>> {
    let a = build_matrix(phi)?;
    let (psd, min_eig) = is_psd(&a, tol)?;
    if !psd {
        return Err(Error::NotHermitianPositive { min_eig: to_f64(min_eig) });
    }
    let kernel = kernel_basis(&a, tol)?;
    let bx = phi.degree_box();
    let factors = kernel.vectors.iter().map(|v| vector_to_analytic(v, bx)).collect::<Result<Vec<_>>>()?;
    let generators = factors.iter().map(|f| f.mod_square()).collect();
    Ok(FaceReport { phi: phi.clone(), nu: kernel.nu, generators, factors, classification: Classification::from_nu(kernel.nu) })
}

/// Lattice function over box `(1,1,1)` with `B(0,0) = I`, `B(0,1) = B(1,0) = 0`,
/// `B(-1,1) = [[0, g2], [-g1, 0]]` and `B(1,1) = [[0, g4], [g3, 0]]`.
///
/// Setting `g_j = 1` with the other parameters of modulus below one puts the
/// `j`-th of the four Example-1 kernel vectors alone in the kernel;
/// `(1,1,1,1)` reproduces the Example-1 table.
pub fn perturbed_example_phi<T: Real>(g1: Complex<T>, g2: Complex<T>, g3: Complex<T>, g4: Complex<T>) -> PhiTable<T> {
    let bx = DegreeBox::new(1, 1, 1);
    let entries = [
        (MultiIndex::ORIGIN, Complex::new(T::one(), T::zero())),
        (MultiIndex::new(1, -1, 1), g2),
        (MultiIndex::new(-1, -1, 1), -g1),
        (MultiIndex::new(1, 1, 1), g4),
        (MultiIndex::new(-1, 1, 1), g3),
    ];
    let zero = Complex::new(T::zero(), T::zero());
    let rest = bx.lattice().filter(|i| i.in_upper_half()).map(|i| (i, zero));
    let mut table: Vec<(MultiIndex, Complex<T>)> = rest
        .filter(|(i, _)| !entries.iter().any(|(e, _)| *e == *i || *e == -*i))
        .collect();
    table.extend(entries);
    PhiTable::from_values(bx, table).expect("perturbed table is Hermitian")
}

fn axis_points<T: Real>(active: bool, grid: usize) -> Vec<T> {
    if active {
        crate::polynomial::uniform_grid(grid)
    } else {
        vec![T::zero()]
    }
}

fn norm3<T: Real>(g: &[T; 3]) -> T {
    (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt()
}

/// Damped Newton iteration on `grad f = 0` restricted to the active axes.
fn refine_critical_point<T: Real>(f: &TrigPoly<T>, start: Angle3<T>, active: [bool; 3]) -> Angle3<T> {
    let mask = |g: [T; 3]| {
        let mut g = g;
        for a in 0..3 {
            if !active[a] {
                g[a] = T::zero();
            }
        }
        g
    };
    let scale = T::one().max(f.abs_sum());
    let mut x = start;
    let mut grad = mask(f.gradient(&x));
    for _ in 0..NEWTON_MAX_ITERS {
        let gn = norm3(&grad);
        if gn <= lit::<T>(1e-15) * scale {
            break;
        }
        let h = f.hessian(&x);
        let hm = Matrix3::from_fn(|r, c| if active[r] && active[c] { h[r][c] } else { T::zero() });
        let rhs = Vector3::new(-grad[0], -grad[1], -grad[2]);
        let svd = SVD::new(hm, true, true);
        let smax = svd.singular_values.max();
        if smax <= T::zero() {
            break;
        }
        let Ok(step) = svd.solve(&rhs, lit::<T>(1e-12) * smax) else {
            break;
        };
        let mut t = T::one();
        let mut accepted = false;
        for _ in 0..30 {
            let cand = Angle3::new(x.alpha + t * step[0], x.beta + t * step[1], x.gamma + t * step[2]);
            let g2 = mask(f.gradient(&cand));
            if norm3(&g2) < gn {
                x = cand;
                grad = g2;
                accepted = true;
                break;
            }
            t *= lit(0.5);
        }
        if !accepted {
            break;
        }
    }
    x.normalized()
}

/// Grid minimum of a real-valued `f` refined by damped Newton on the gradient.
pub fn local_minimum<T: Real>(f: &TrigPoly<T>, grid: usize) -> Result<(T, Angle3<T>)> {
    let (_, seed) = f.min_on_grid(grid)?;
    let p = refine_critical_point(f, seed, f.active_axes());
    Ok((f.eval(&p).re, p))
}

/// Zeros of a nonnegative trigonometric polynomial.
///
/// Seeds are grid-local minima whose value is below `1e-3 * max |f|`; each
/// seed is refined by damped Newton on the gradient, kept if it is a zero to
/// `1e-9 * (1 + max |f|)`, deduplicated on the torus and sorted by canonical
/// coordinates. Variables absent from the support are pinned at zero.
pub fn find_zeros<T: Real>(f: &TrigPoly<T>, grid: usize, refine_tol: T) -> Result<Vec<ZeroPoint<T>>> {
    if grid < 2 {
        return Err(Error::BadResolution(grid));
    }
    if !f.is_real_valued_default() {
        return Err(Error::NotRealValued);
    }
    let active = f.active_axes();
    let axes: [Vec<T>; 3] = [axis_points(active[0], grid), axis_points(active[1], grid), axis_points(active[2], grid)];
    let dims = [axes[0].len(), axes[1].len(), axes[2].len()];
    let vals = f.grid_values([&axes[0], &axes[1], &axes[2]]);
    let min = vals.iter().copied().fold(T::max_value().unwrap_or_else(T::one), |a, b| a.min(b));
    if min < -refine_tol {
        return Err(Error::NotNonnegative { min: to_f64(min) });
    }
    let max_abs = vals.iter().fold(T::zero(), |a, v| a.max(v.abs()));
    let seed_cut = lit::<T>(SEED_FRACTION) * max_abs;
    let zero_tol = lit::<T>(1e-9) * (T::one() + max_abs);

    let at = |i: usize, j: usize, k: usize| vals[(i * dims[1] + j) * dims[2] + k];
    let mut zeros: Vec<ZeroPoint<T>> = Vec::new();
    for i in 0..dims[0] {
        for j in 0..dims[1] {
            for k in 0..dims[2] {
                let v = at(i, j, k);
                if v >= seed_cut || !is_local_min(&at, [i, j, k], dims, v) {
                    continue;
                }
                let seed = Angle3::new(axes[0][i], axes[1][j], axes[2][k]);
                let z = refine_critical_point(f, seed, active);
                let residual = f.eval(&z).re.abs();
                let gradient_norm = norm3(&f.gradient(&z));
                if residual > zero_tol || gradient_norm > lit(1e-6) {
                    continue;
                }
                let dup = zeros.iter().any(|q| q.point.periodic_distance(&z) < lit(DEDUP_DISTANCE));
                if !dup {
                    zeros.push(ZeroPoint { point: z, residual, gradient_norm });
                }
            }
        }
    }
    zeros.sort_by(|a, b| {
        let (pa, pb) = (a.point.as_array(), b.point.as_array());
        pa.iter().zip(pb.iter()).map(|(x, y)| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(zeros)
}

fn is_local_min<T: Real>(at: &impl Fn(usize, usize, usize) -> T, p: [usize; 3], dims: [usize; 3], v: T) -> bool {
    let offsets = |d: usize| if d > 1 { vec![-1i64, 0, 1] } else { vec![0] };
    for di in offsets(dims[0]) {
        for dj in offsets(dims[1]) {
            for dk in offsets(dims[2]) {
                if di == 0 && dj == 0 && dk == 0 {
                    continue;
                }
                let w = |c: usize, d: i64, n: usize| ((c as i64 + d).rem_euclid(n as i64)) as usize;
                if at(w(p[0], di, dims[0]), w(p[1], dj, dims[1]), w(p[2], dk, dims[2])) < v {
                    return false;
                }
            }
        }
    }
    true
}

/// Real parameterization of a real-valued polynomial over `bx`: the origin
/// coefficient, then `(Re q(n), Im q(n))` for each nonzero index of the
/// canonical half lattice, in index order.
pub fn half_lattice(bx: DegreeBox) -> Vec<MultiIndex> {
    let mut idx: Vec<MultiIndex> = bx.lattice().filter(|i| i.in_upper_half() && *i != MultiIndex::ORIGIN).collect();
    idx.sort();
    idx
}

/// Coefficients of `f` in the real parameterization of [`half_lattice`].
pub fn real_parameters<T: Real>(f: &TrigPoly<T>, bx: DegreeBox) -> Vec<T> {
    let mut p = vec![f.coeff(MultiIndex::ORIGIN).re];
    for n in half_lattice(bx) {
        let q = f.coeff(n);
        p.push(q.re);
        p.push(q.im);
    }
    p
}

/// Rows `g(z) = 0` and `dg/d(alpha, beta, gamma)(z) = 0` in the real parameters.
fn zero_rows<T: Real>(z: &Angle3<T>, half: &[MultiIndex]) -> [Vec<T>; 4] {
    let two = lit::<T>(2.0);
    let mut rows: [Vec<T>; 4] = [vec![T::one()], vec![T::zero()], vec![T::zero()], vec![T::zero()]];
    for n in half {
        let (s, c) = n.phase(z).sin_cos();
        // g contains 2 (a cos(phi) - b sin(phi)) for q(n) = a + i b
        rows[0].push(two * c);
        rows[0].push(-two * s);
        for axis in 0..3 {
            let d = lit::<T>(n.component(axis) as f64);
            rows[axis + 1].push(-two * d * s);
            rows[axis + 1].push(-two * d * c);
        }
    }
    rows
}

/// Linear-algebra extremality test for the nonnegative cone with tolerance
/// [`DEFAULT_RANK_TOL`].
pub fn extremality_rank_test<T: Real>(f: &TrigPoly<T>, zeros: &[ZeroPoint<T>]) -> Result<RankCertificate<T>> {
    extremality_rank_test_with_tol(f, zeros, lit(DEFAULT_RANK_TOL))
}

/// Every real-valued `g` in the box of `f` with `0 <= g <= f` must vanish
/// with its gradient at each zero of `f`. Builds that system over the real
/// coefficients of `g`; if its rank is one less than the number of unknowns
/// the only solutions are multiples of `f`, which is then extremal.
pub fn extremality_rank_test_with_tol<T: Real>(f: &TrigPoly<T>, zeros: &[ZeroPoint<T>], rank_tol: T) -> Result<RankCertificate<T>> {
    if !f.is_real_valued_default() {
        return Err(Error::NotRealValued);
    }
    let bx = f.degree_box();
    let half = half_lattice(bx);
    let unknowns = bx.lattice_len();
    let equations = 4 * zeros.len();
    let rows: Vec<Vec<T>> = zeros.iter().flat_map(|z| zero_rows(&z.point, &half)).collect();
    let padded = equations.max(unknowns);
    let m = DMatrix::from_fn(padded, unknowns, |r, c| if r < equations { rows[r][c] } else { T::zero() });

    let svd = SVD::new(m.clone(), false, true);
    let smax = svd.singular_values.max();
    let cut = rank_tol * smax;
    let rank = if smax > T::zero() { svd.singular_values.iter().filter(|s| **s > cut).count() } else { 0 };
    let mut singular_values: Vec<T> = svd.singular_values.iter().copied().collect();
    singular_values.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));

    let params = real_parameters(f, bx);
    let pnorm = params.iter().fold(T::zero(), |s, x| s + *x * *x).sqrt();
    if equations > 0 && pnorm > T::zero() {
        let residual = rows.iter().map(|r| r.iter().zip(&params).fold(T::zero(), |s, (a, b)| s + *a * *b) / pnorm).fold(T::zero(), |a, v| a.max(v.abs()));
        if residual > lit::<T>(1e-6) * T::one().max(smax) {
            return Err(Error::InconsistentCertificate(format!("coefficients of f leave residual {:.3e} in the zero system", to_f64(residual))));
        }
    }

    let extremal = rank + 1 == unknowns;
    let mut null_angle = None;
    if extremal {
        let null = if equations == 0 {
            // the whole (one-dimensional) parameter space
            vec![T::one()]
        } else {
            let vt = svd.v_t.as_ref().expect("requested V^T");
            let (jmin, _) = svd.singular_values.iter().enumerate().fold((0, smax), |best, (j, s)| if *s <= best.1 { (j, *s) } else { best });
            vt.row(jmin).iter().copied().collect()
        };
        let nn = null.iter().fold(T::zero(), |s, x| s + *x * *x).sqrt();
        let dot = null.iter().zip(&params).fold(T::zero(), |s, (a, b)| s + *a * *b);
        let cosine = (dot / (nn * pnorm)).abs().min(T::one());
        let perp = null.iter().zip(&params).fold(T::zero(), |s, (a, b)| {
            let r = *a / nn - *b / pnorm * (dot / (nn * pnorm));
            s + r * r
        });
        let angle = perp.sqrt().atan2(cosine);
        if !matches!(angle.partial_cmp(&lit(1e-6)), Some(std::cmp::Ordering::Less | std::cmp::Ordering::Equal)) {
            return Err(Error::InconsistentCertificate(format!("null space is at angle {:.3e} from the coefficients of f", to_f64(angle))));
        }
        null_angle = Some(angle);
    }
    Ok(RankCertificate { zeros: zeros.to_vec(), equations, unknowns, rank, extremal, singular_values, null_angle })
}

/// `L_phi(f)` for the extendible `phi` generated by `mu`; zero means the
/// hyperplane supports the nonnegative cone at `f`.
pub fn support_report_sigma<T: Real>(mu: &AtomicMeasure<T>, f: &TrigPoly<T>) -> Result<T> {
    let (min, _) = f.min_on_grid(32)?;
    if min < -lit::<T>(1e-9) * T::one().max(f.max_abs_coeff()) {
        return Err(Error::NotNonnegative { min: to_f64(min) });
    }
    lf_via_measure(mu, f)
}

/// Checks that each generator of `report` lies on its hyperplane.
pub fn generators_on_hyperplane<T: Real>(report: &FaceReport<T>, tol: T) -> Result<bool> {
    for g in &report.generators {
        if lf(&report.phi, g)?.re.abs() > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Canonical `[-pi, pi)` coordinates of a zero.
pub fn canonical<T: Real>(z: &ZeroPoint<T>) -> [T; 3] {
    z.point.as_array().map(wrap_angle)
}
