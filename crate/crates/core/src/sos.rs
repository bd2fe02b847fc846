//! Membership in the cone of sums of squared moduli.
//!
//! A real trigonometric polynomial `f` with box `N` lies in the cone iff some
//! PSD Gram matrix `G` on the coefficient octant reproduces `f`: for every
//! lattice index `n`, the entries `G[r][s]` with `oct[r] - oct[s] = n` sum to
//! `q(n)`. Feasibility is searched by alternating projections, and
//! infeasibility is certified by a lattice function `phi` whose Toeplitz
//! matrix is PSD and with `L_phi(f) < 0`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::functional::lf;
use crate::polynomial::{sum_of_mod_squares, AnalyticTrigPoly, DegreeBox, MultiIndex, TrigPoly};
use crate::scalar::{cabs, czero, lit, Real};
use crate::toeplitz::{build_matrix, phi_from_matrix, vector_to_analytic, HermitianMatrix, PhiTable};

pub const DEFAULT_MAX_ITERS: usize = 5000;
pub const DEFAULT_TOL: f64 = 1e-9;
/// Iterations of the separator search run by [`q_membership`].
pub const DEFAULT_SEPARATOR_ITERS: usize = 2000;

/// Coefficientwise tolerance a member's factors must meet.
const MEMBER_TOL: f64 = 1e-7;
/// Eigenvalues below this fraction of the trace are dropped from the factors.
const FACTOR_CUTOFF: f64 = 1e-10;
/// Alternating-projection checkpoint period.
const CHECKPOINT: usize = 200;
/// Relative gap decrease per checkpoint below which the iteration has stalled.
const STALL: f64 = 1e-3;
const POLISH_STEPS: usize = 30;
/// Consecutive Gauss-Newton steps without halving the residual before giving up.
const STALL_STEPS: usize = 5;
/// Threshold on `L_phi(f)` for accepting a separator.
const SEPARATION: f64 = -1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MembershipStatus {
    Member,
    NonMember,
    Unknown,
}

impl MembershipStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            MembershipStatus::Member => "member",
            MembershipStatus::NonMember => "non-member",
            MembershipStatus::Unknown => "unknown",
        }
    }
}

#[derive(Clone, Debug)]
pub struct QMembershipResult<T: Real> {
    pub status: MembershipStatus,
    /// `sum_j w_j w_j^*` over the factor vectors, present for members.
    pub gram: Option<HermitianMatrix<T>>,
    pub factors: Option<Vec<AnalyticTrigPoly<T>>>,
    pub separator: Option<PhiTable<T>>,
    pub iterations: usize,
    /// Last Frobenius distance between the PSD and affine iterates.
    pub gap: T,
}

/// Affine constraints on the Gram matrix of `f`.
#[derive(Clone, Debug)]
pub struct GramProblem<T: Real> {
    bx: DegreeBox,
    octant: Vec<MultiIndex>,
    /// Lattice indices in sorted order; `class_of[r][s]` points into this list.
    classes: Vec<MultiIndex>,
    class_of: Vec<Vec<usize>>,
    class_size: Vec<usize>,
    targets: Vec<Complex<T>>,
}

impl<T: Real> GramProblem<T> {
    pub fn new(f: &TrigPoly<T>) -> Self {
        let bx = f.degree_box();
        let octant: Vec<MultiIndex> = bx.octant().collect();
        let classes: Vec<MultiIndex> = {
            let mut v: Vec<MultiIndex> = bx.lattice().collect();
            v.sort();
            v
        };
        let pos: BTreeMap<MultiIndex, usize> = classes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        let class_of: Vec<Vec<usize>> = octant.iter().map(|a| octant.iter().map(|b| pos[&(*a - *b)]).collect()).collect();
        let mut class_size = vec![0; classes.len()];
        for row in &class_of {
            for &c in row {
                class_size[c] += 1;
            }
        }
        let targets = classes.iter().map(|n| f.coeff(*n)).collect();
        Self { bx, octant, classes, class_of, class_size, targets }
    }

    pub fn degree_box(&self) -> DegreeBox {
        self.bx
    }

    pub fn dim(&self) -> usize {
        self.octant.len()
    }

    /// Difference classes `n` with the `(r, s)` pairs in each.
    pub fn classes(&self) -> BTreeMap<MultiIndex, Vec<(usize, usize)>> {
        let mut out: BTreeMap<MultiIndex, Vec<(usize, usize)>> = BTreeMap::new();
        for (r, row) in self.class_of.iter().enumerate() {
            for (s, &c) in row.iter().enumerate() {
                out.entry(self.classes[c]).or_default().push((r, s));
            }
        }
        out
    }

    fn class_sums(&self, g: &DMatrix<Complex<T>>) -> Vec<Complex<T>> {
        let mut sums = vec![czero(); self.classes.len()];
        for (r, row) in self.class_of.iter().enumerate() {
            for (s, &c) in row.iter().enumerate() {
                sums[c] += g[(r, s)];
            }
        }
        sums
    }

    /// Orthogonal projection onto the affine set of Gram matrices of `f`.
    pub fn project_affine(&self, g: &DMatrix<Complex<T>>) -> DMatrix<Complex<T>> {
        let sums = self.class_sums(g);
        let corr: Vec<Complex<T>> = sums
            .iter()
            .zip(&self.targets)
            .zip(&self.class_size)
            .map(|((s, q), c)| (*q - *s).unscale(lit(*c as f64)))
            .collect();
        let mut out = g.clone();
        for (r, row) in self.class_of.iter().enumerate() {
            for (s, &c) in row.iter().enumerate() {
                out[(r, s)] += corr[c];
            }
        }
        out
    }

    /// Trigonometric polynomial whose coefficients are the class sums of `g`.
    pub fn represented_poly(&self, g: &DMatrix<Complex<T>>) -> TrigPoly<T> {
        let sums = self.class_sums(g);
        TrigPoly::from_terms(self.bx, self.classes.iter().copied().zip(sums).filter(|(_, v)| *v != czero()))
            .expect("classes lie in the box")
    }

    fn residual(&self, w: &DMatrix<Complex<T>>) -> Vec<Complex<T>> {
        let g = w * w.adjoint();
        self.class_sums(&g).into_iter().zip(&self.targets).map(|(s, q)| s - *q).collect()
    }

    /// Looks for an exact factor `W W^*` near `p` by Gauss-Newton, started
    /// from the eigen-factor of `p` at its numerical rank and then at each
    /// lower rank.
    fn polish(&self, p: &DMatrix<Complex<T>>) -> Option<DMatrix<Complex<T>>> {
        let full = psd_factor(p, None)?;
        let top = full.ncols();
        std::iter::once(top)
            .chain(1..top)
            .find_map(|r| self.gauss_newton(psd_factor(p, Some(r))?))
    }

    fn gauss_newton(&self, mut w: DMatrix<Complex<T>>) -> Option<DMatrix<Complex<T>>> {
        let scale = T::one().max(self.targets.iter().fold(T::zero(), |a, q| a.max(cabs(*q))));
        let done = lit::<T>(1e-13) * scale;
        let k = self.classes.len();
        let n = self.dim();
        let i = Complex::new(T::zero(), T::one());
        let mut previous = T::max_value().unwrap_or_else(T::one);
        let mut slow = 0;
        for _ in 0..POLISH_STEPS {
            let res = self.residual(&w);
            let worst = res.iter().fold(T::zero(), |a, z| a.max(cabs(*z)));
            if worst <= done {
                break;
            }
            slow = if worst > previous * lit(0.5) { slow + 1 } else { 0 };
            if slow >= STALL_STEPS {
                return None;
            }
            previous = worst;
            let r = w.ncols();
            let mut jac = DMatrix::<T>::zeros(2 * k, 2 * n * r);
            for j in 0..r {
                for a in 0..n {
                    for (offset, p) in [(0, Complex::new(T::one(), T::zero())), (1, i)] {
                        let col = 2 * (j * n + a) + offset;
                        let mut d = vec![czero::<T>(); k];
                        for b in 0..n {
                            d[self.class_of[a][b]] += p * w[(b, j)].conj();
                            d[self.class_of[b][a]] += w[(b, j)] * p.conj();
                        }
                        for (c, z) in d.iter().enumerate() {
                            jac[(c, col)] = z.re;
                            jac[(k + c, col)] = z.im;
                        }
                    }
                }
            }
            let rhs = DVector::from_iterator(2 * k, res.iter().map(|z| -z.re).chain(res.iter().map(|z| -z.im)));
            let svd = jac.svd(true, true);
            let smax = svd.singular_values.iter().fold(T::zero(), |a, v| a.max(*v));
            if smax <= T::zero() {
                break;
            }
            let dx = svd.solve(&rhs, lit::<T>(1e-12) * smax).ok()?;
            for j in 0..r {
                for a in 0..n {
                    let col = 2 * (j * n + a);
                    w[(a, j)] += Complex::new(dx[col], dx[col + 1]);
                }
            }
        }
        let ok = self.residual(&w).iter().fold(T::zero(), |a, z| a.max(cabs(*z))) <= lit::<T>(1e-11) * scale;
        ok.then_some(w)
    }
}

/// Columns `sqrt(lambda_j) v_j` for eigenvalues above the trace cutoff,
/// limited to the largest `rank` of them.
fn psd_factor<T: Real>(p: &DMatrix<Complex<T>>, rank: Option<usize>) -> Option<DMatrix<Complex<T>>> {
    let spec = HermitianMatrix::from_matrix(p.clone()).ok()?.spectrum();
    let trace = spec.values.iter().fold(T::zero(), |a, v| a + v.max(T::zero()));
    let cut = lit::<T>(FACTOR_CUTOFF) * trace;
    let mut keep: Vec<usize> = (0..spec.values.len()).filter(|&j| spec.values[j] > cut).collect();
    if let Some(r) = rank {
        keep.drain(..keep.len().saturating_sub(r));
    }
    if keep.is_empty() {
        return None;
    }
    Some(DMatrix::from_fn(p.nrows(), keep.len(), |r, c| spec.vectors[(r, keep[c])].scale(spec.values[keep[c]].sqrt())))
}

fn clip_psd<T: Real>(g: &DMatrix<Complex<T>>) -> DMatrix<Complex<T>> {
    let spec = HermitianMatrix::from_matrix(g.clone()).expect("square").spectrum();
    let n = g.nrows();
    let mut out = DMatrix::from_element(n, n, czero());
    for (j, v) in spec.values.iter().enumerate() {
        if *v > T::zero() {
            let col = spec.vectors.column(j);
            out += (col * col.adjoint()).scale(*v);
        }
    }
    out
}

fn frobenius<T: Real>(m: &DMatrix<Complex<T>>) -> T {
    m.iter().fold(T::zero(), |a, z| a + z.norm_sqr()).sqrt()
}

/// Drops factor columns of negligible norm and maps the rest to polynomials.
fn factors_from<T: Real>(w: &DMatrix<Complex<T>>, bx: DegreeBox) -> (Vec<AnalyticTrigPoly<T>>, DMatrix<Complex<T>>) {
    let norms: Vec<T> = (0..w.ncols()).map(|j| w.column(j).iter().fold(T::zero(), |a, z| a + z.norm_sqr())).collect();
    let trace = norms.iter().fold(T::zero(), |a, v| a + *v);
    let cut = lit::<T>(FACTOR_CUTOFF) * trace;
    let keep: Vec<usize> = (0..w.ncols()).filter(|&j| norms[j] > cut).collect();
    let kept = DMatrix::from_fn(w.nrows(), keep.len(), |r, c| w[(r, keep[c])]);
    let factors = keep
        .iter()
        .map(|&j| vector_to_analytic(&w.column(j).into_owned(), bx).expect("column length matches the box"))
        .collect();
    (factors, &kept * kept.adjoint())
}

/// True iff `sum_j |F_j|^2` matches `f` coefficientwise within `tol`.
pub fn verify_sos<T: Real>(f: &TrigPoly<T>, factors: &[AnalyticTrigPoly<T>], tol: T) -> bool {
    let sum = match factors.first() {
        None => TrigPoly::zero(f.degree_box()),
        Some(_) => match sum_of_mod_squares(factors) {
            Ok(s) => s,
            Err(_) => return false,
        },
    };
    (&sum - f).terms().all(|(_, c)| cabs(c) <= tol)
}

/// `(phi + c delta) / (1 + c)` with `c` the negative part of the smallest
/// eigenvalue, which makes the Toeplitz matrix PSD while keeping `phi(0) = 1`.
fn repair<T: Real>(phi: &PhiTable<T>) -> PhiTable<T> {
    let min = build_matrix(phi).expect("complete table").spectrum().min();
    let c = (-min).max(T::zero());
    phi.shift_origin(c).scale(T::one() / (T::one() + c))
}

/// Searches for `phi` with PSD Toeplitz matrix, `phi(0) = 1` and
/// `L_phi(f) < 0` by projected gradient descent.
pub fn find_separating_phi<T: Real>(f: &TrigPoly<T>, iters: usize) -> Option<PhiTable<T>> {
    if !f.is_real_valued_default() {
        return None;
    }
    let bx = f.degree_box();
    let qmax = f.max_abs_coeff();
    if qmax <= T::zero() {
        return None;
    }
    let step = lit::<T>(0.5) / qmax;
    let value = |phi: &PhiTable<T>| lf(phi, f).ok().map(|z| z.re);
    let mut phi = PhiTable::delta(bx);
    let mut best: Option<(T, PhiTable<T>)> = None;
    let mut since_best = 0usize;
    for _ in 0..iters {
        let moved = PhiTable::from_fn(bx, |n| phi.value(n) - f.coeff(n).conj().scale(step)).ok()?;
        let clipped = clip_psd(build_matrix(&moved).ok()?.entries());
        let projected = phi_from_matrix(&clipped, bx);
        let origin = projected.value(MultiIndex::ORIGIN).re;
        phi = if origin > T::zero() { projected.scale(T::one() / origin) } else { PhiTable::delta(bx) };
        let cand = repair(&phi);
        let v = value(&cand)?;
        match &best {
            Some((b, _)) if v >= *b - lit::<T>(1e-12) * T::one().max(b.abs()) => since_best += 1,
            _ => {
                best = Some((v, cand));
                since_best = 0;
            }
        }
        if since_best >= CHECKPOINT {
            break;
        }
    }
    best.filter(|(v, _)| *v < lit::<T>(SEPARATION)).map(|(_, p)| p)
}

/// Decides membership of `f` in the cone of sums of squared moduli.
pub fn q_membership<T: Real>(f: &TrigPoly<T>, max_iters: usize, tol: T) -> Result<QMembershipResult<T>> {
    if !f.is_real_valued_default() {
        return Err(Error::NotRealValued);
    }
    let problem = GramProblem::new(f);
    let n = problem.dim();
    let bx = problem.degree_box();
    if f.is_zero() {
        let gram = HermitianMatrix::from_matrix(DMatrix::from_element(n, n, czero()))?;
        return Ok(QMembershipResult {
            status: MembershipStatus::Member,
            gram: Some(gram),
            factors: Some(vec![]),
            separator: None,
            iterations: 0,
            gap: T::zero(),
        });
    }
    let member = |w: &DMatrix<Complex<T>>, iterations: usize, gap: T| -> Option<QMembershipResult<T>> {
        let (factors, gram) = factors_from(w, bx);
        verify_sos(f, &factors, lit(MEMBER_TOL)).then(|| QMembershipResult {
            status: MembershipStatus::Member,
            gram: HermitianMatrix::from_matrix(gram).ok(),
            factors: Some(factors),
            separator: None,
            iterations,
            gap,
        })
    };

    let mut g = problem.project_affine(&DMatrix::from_element(n, n, czero()));
    let mut gap = T::zero();
    let mut checkpoint_gap: Option<T> = None;
    let mut iterations = 0;
    for it in 1..=max_iters {
        iterations = it;
        let p = clip_psd(&g);
        let next = problem.project_affine(&p);
        gap = frobenius(&(&next - &p));
        g = next;
        if gap < tol {
            if let Some(w) = psd_factor(&p, None) {
                if let Some(res) = member(&w, it, gap) {
                    return Ok(res);
                }
            }
        }
        if gap < tol || it % CHECKPOINT == 0 {
            if let Some(res) = problem.polish(&p).and_then(|w| member(&w, it, gap)) {
                return Ok(res);
            }
            if let Some(prev) = checkpoint_gap {
                if gap > prev * (T::one() - lit(STALL)) {
                    break;
                }
            }
            checkpoint_gap = Some(gap);
        }
    }

    let separator = find_separating_phi(f, DEFAULT_SEPARATOR_ITERS);
    let status = if separator.is_some() { MembershipStatus::NonMember } else { MembershipStatus::Unknown };
    Ok(QMembershipResult { status, gram: None, factors: None, separator, iterations, gap })
}
