//! Calderon transform from trigonometric to power polynomials.
//!
//! Substituting `exp(i alpha) = (x+i)/(x-i)` (and likewise `y`, `z` for
//! `beta`, `gamma`) and clearing denominators with
//! `(x^2+1)^N1 (y^2+1)^N2 (z^2+1)^N3` sends the monomial
//! `exp(i(k alpha + l beta + m gamma))` to
//! `(x+i)^(N1+k) (x-i)^(N1-k) (y+i)^(N2+l) (y-i)^(N2-l) (z+i)^(N3+m) (z-i)^(N3-m)`.
//! The expansion is carried out over any coefficient ring; when every input
//! coefficient is a dyadic rational with a small denominator the ring is the
//! exact Gaussian rationals, otherwise `Complex<T>`.

use std::collections::BTreeMap;
use std::ops::Neg;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive};

use crate::error::{Error, Result};
use crate::polynomial::{AnalyticTrigPoly, DegreeBox, MultiIndex, PowerPoly, TrigPoly};
use crate::scalar::{lit, to_f64, Real};

/// Largest denominator accepted by the exact route.
const EXACT_DENOMINATOR_LIMIT: u64 = 1 << 53;
/// Imaginary residue tolerated in the transformed coefficients, relative to their scale.
const IMAG_DUST: f64 = 1e-9;

/// Coefficient ring for the expansion.
pub trait Ring: Clone + Num + Neg<Output = Self> {}

impl<R: Clone + Num + Neg<Output = R>> Ring for R {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    /// Gaussian rationals, no rounding until the final conversion.
    Exact,
    /// Floating point in the working scalar type.
    Float,
}

#[derive(Clone, Debug)]
pub struct CalderonResult<T: Real> {
    pub power: PowerPoly<T>,
    /// Largest coefficient magnitude of `power`.
    pub scale_hint: T,
    pub route: Route,
}

/// Coefficients of `(v+i)^a (v-i)^b` in ascending powers of `v`.
fn cayley_factor<R: Ring>(a: usize, b: usize) -> Vec<Complex<R>> {
    let i = Complex::new(R::zero(), R::one());
    let one = Complex::new(R::one(), R::zero());
    let mut poly = vec![one.clone()];
    let times_linear = |poly: &Vec<Complex<R>>, root: Complex<R>| {
        // (v + root) * poly
        let mut out = vec![Complex::new(R::zero(), R::zero()); poly.len() + 1];
        for (j, c) in poly.iter().enumerate() {
            out[j] = out[j].clone() + c.clone() * root.clone();
            out[j + 1] = out[j + 1].clone() + c.clone();
        }
        out
    };
    for _ in 0..a {
        poly = times_linear(&poly, i.clone());
    }
    for _ in 0..b {
        poly = times_linear(&poly, -i.clone());
    }
    poly
}

/// Expands `sum_n c(n) u1[n.k] u2[n.l] u3[n.m]` where `u*` are per-axis
/// univariate factors indexed by the term's exponent.
fn expand<R: Ring>(
    terms: &[(MultiIndex, Complex<R>)],
    factor: impl Fn(usize, i32) -> Vec<Complex<R>>,
) -> BTreeMap<MultiIndex, Complex<R>> {
    let mut out: BTreeMap<MultiIndex, Complex<R>> = BTreeMap::new();
    for (n, c) in terms {
        let (ux, uy, uz) = (factor(0, n.k), factor(1, n.l), factor(2, n.m));
        for (a, ca) in ux.iter().enumerate() {
            let ca = c.clone() * ca.clone();
            for (b, cb) in uy.iter().enumerate() {
                let cab = ca.clone() * cb.clone();
                for (e, cc) in uz.iter().enumerate() {
                    let v = cab.clone() * cc.clone();
                    let key = MultiIndex::new(a as i32, b as i32, e as i32);
                    let slot = out.entry(key).or_insert_with(|| Complex::new(R::zero(), R::zero()));
                    *slot = slot.clone() + v;
                }
            }
        }
    }
    out
}

fn transform_terms<R: Ring>(bx: DegreeBox, terms: &[(MultiIndex, Complex<R>)]) -> BTreeMap<MultiIndex, Complex<R>> {
    let n = bx.as_array().map(|v| v as i32);
    expand(terms, |axis, k| cayley_factor((n[axis] + k) as usize, (n[axis] - k) as usize))
}

fn transform_factor_terms<R: Ring>(bx: DegreeBox, terms: &[(MultiIndex, Complex<R>)]) -> BTreeMap<MultiIndex, Complex<R>> {
    let n = bx.as_array().map(|v| v as i32);
    expand(terms, |axis, k| cayley_factor(k as usize, (n[axis] - k) as usize))
}

fn to_exact(x: f64) -> Option<BigRational> {
    let r = BigRational::from_float(x)?;
    (r.denom() <= &BigInt::from(EXACT_DENOMINATOR_LIMIT)).then_some(r)
}

fn exact_terms<T: Real>(terms: impl Iterator<Item = (MultiIndex, Complex<T>)>) -> Option<Vec<(MultiIndex, Complex<BigRational>)>> {
    terms
        .map(|(i, c)| Some((i, Complex::new(to_exact(to_f64(c.re))?, to_exact(to_f64(c.im))?))))
        .collect()
}

fn exact_to_real<T: Real>(c: &BigRational) -> T {
    lit(c.to_f64().unwrap_or(f64::NAN))
}

/// Splits transformed coefficients into a real power polynomial, rejecting
/// imaginary parts above `IMAG_DUST` relative to the coefficient scale.
fn realize<T: Real>(bx: DegreeBox, coeffs: Vec<(MultiIndex, Complex<T>)>) -> Result<PowerPoly<T>> {
    let scale = coeffs.iter().fold(T::zero(), |a, (_, c)| a.max(c.re.abs()).max(c.im.abs()));
    let worst_imag = coeffs.iter().fold(T::zero(), |a, (_, c)| a.max(c.im.abs()));
    if worst_imag > lit::<T>(IMAG_DUST) * T::one().max(scale) {
        return Err(Error::NotRealValued);
    }
    PowerPoly::from_terms(bx, coeffs.into_iter().filter(|(_, c)| c.re != T::zero()).map(|(i, c)| (i, c.re)))
}

fn finish<T: Real>(power: PowerPoly<T>, route: Route) -> CalderonResult<T> {
    let scale_hint = power.max_abs_coeff();
    CalderonResult { power, scale_hint, route }
}

/// Calderon transform of a real-valued trigonometric polynomial; uses the
/// exact route whenever the coefficients allow it.
pub fn calderon<T: Real>(f: &TrigPoly<T>) -> Result<CalderonResult<T>> {
    match calderon_with(f, Route::Exact) {
        Err(Error::Malformed(_)) => calderon_with(f, Route::Float),
        other => other,
    }
}

/// Calderon transform along a fixed route. The exact route fails with
/// [`Error::Malformed`] if a coefficient is not a dyadic rational with
/// denominator at most `2^53`.
pub fn calderon_with<T: Real>(f: &TrigPoly<T>, route: Route) -> Result<CalderonResult<T>> {
    if !f.is_real_valued_default() {
        return Err(Error::NotRealValued);
    }
    let bx = f.degree_box();
    let out_box = bx.doubled();
    let coeffs: Vec<(MultiIndex, Complex<T>)> = match route {
        Route::Exact => {
            let terms = exact_terms(f.terms()).ok_or_else(|| Error::Malformed("coefficients are not exactly representable".into()))?;
            transform_terms(bx, &terms)
                .into_iter()
                .map(|(i, c)| (i, Complex::new(exact_to_real(&c.re), exact_to_real(&c.im))))
                .collect()
        }
        Route::Float => {
            let terms: Vec<_> = f.terms().collect();
            transform_terms(bx, &terms).into_iter().collect()
        }
    };
    Ok(finish(realize(out_box, coeffs)?, route))
}

/// Real and imaginary parts of `F((x+i)/(x-i), ...) (x-i)^N1 (y-i)^N2 (z-i)^N3`.
///
/// Their squares sum to the Calderon transform of `|F|^2`.
pub fn calderon_factor<T: Real>(f: &AnalyticTrigPoly<T>) -> (PowerPoly<T>, PowerPoly<T>) {
    let bx = f.degree_box();
    let coeffs: Vec<(MultiIndex, Complex<T>)> = match exact_terms(f.terms()) {
        Some(terms) => transform_factor_terms(bx, &terms)
            .into_iter()
            .map(|(i, c)| (i, Complex::new(exact_to_real(&c.re), exact_to_real(&c.im))))
            .collect(),
        None => {
            let terms: Vec<_> = f.terms().collect();
            transform_factor_terms(bx, &terms).into_iter().collect()
        }
    };
    let split = |part: fn(&Complex<T>) -> T| {
        PowerPoly::from_terms(bx, coeffs.iter().map(|(i, c)| (*i, part(c))).filter(|(_, v)| *v != T::zero()))
            .expect("factor exponents stay inside the box")
    };
    (split(|c| c.re), split(|c| c.im))
}

/// Transforms each `|F_j|^2` as a sum of two real squares.
///
/// The outputs add up to the transform of `sum_j |F_j|^2`.
pub fn calderon_sos<T: Real>(factors: &[AnalyticTrigPoly<T>]) -> Vec<PowerPoly<T>> {
    factors
        .iter()
        .map(|f| {
            let (re, im) = calderon_factor(f);
            &re.mul(&re) + &im.mul(&im)
        })
        .collect()
}

/// Tests `p = ratio * q` coefficientwise within `tol * max |p|`, with the
/// ratio read off at the largest coefficient of `p`.
pub fn proportional<T: Real>(p: &PowerPoly<T>, q: &PowerPoly<T>, tol: T) -> Result<(bool, T)> {
    if p.is_zero() || q.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let (pivot, pmax) = p
        .terms()
        .fold((MultiIndex::ORIGIN, T::zero()), |best, (i, c)| if c.abs() > best.1 { (i, c.abs()) } else { best });
    let qp = q.coeff(pivot);
    if qp == T::zero() {
        return Ok((false, T::zero()));
    }
    let ratio = p.coeff(pivot) / qp;
    let bound = tol * pmax;
    let ok = p
        .terms()
        .map(|(i, _)| i)
        .chain(q.terms().map(|(i, _)| i))
        .all(|i| (p.coeff(i) - ratio * q.coeff(i)).abs() <= bound);
    Ok((ok, ratio))
}
