//! The linear functional `L_phi(f) = sum q(n) phi(n)` and lattice functions
//! generated by finite positive measures on the torus.

use nalgebra::DVector;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::polynomial::{AnalyticTrigPoly, Angle3, DegreeBox, TrigPoly};
use crate::scalar::{cis, czero, Real};
use crate::toeplitz::{analytic_to_vector, build_matrix, PhiTable};

/// Finite positive combination of point masses on `[-pi, pi)^3`.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomicMeasure<T: Real> {
    atoms: Vec<(Angle3<T>, T)>,
}

impl<T: Real> AtomicMeasure<T> {
    /// Points are reduced to `[-pi, pi)^3`; weights must be positive and finite.
    pub fn new(atoms: Vec<(Angle3<T>, T)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        let mut out = Vec::with_capacity(atoms.len());
        for (p, w) in atoms {
            if w <= T::zero() || !w.is_finite() {
                return Err(Error::InvalidAtom(format!("weight {w} must be positive")));
            }
            if !p.as_array().iter().all(|c| c.is_finite()) {
                return Err(Error::InvalidAtom(format!("point {:?} is not finite", p.as_array())));
            }
            out.push((p.normalized(), w));
        }
        Ok(Self { atoms: out })
    }

    pub fn atoms(&self) -> &[(Angle3<T>, T)] {
        &self.atoms
    }

    pub fn total_weight(&self) -> T {
        self.atoms.iter().fold(T::zero(), |s, (_, w)| s + *w)
    }

    /// Rescales the weights so that the total is `(2 pi)^3`, which makes
    /// `phi(0,0,0) = 1` for the generated table.
    pub fn normalized_total(&self) -> Self {
        let c = torus_volume::<T>() / self.total_weight();
        Self { atoms: self.atoms.iter().map(|(p, w)| (*p, *w * c)).collect() }
    }
}

/// `(2 pi)^3`.
pub fn torus_volume<T: Real>() -> T {
    let t = T::two_pi();
    t * t * t
}

/// `L_phi(f) = sum_n q(n) phi(n)` over the support of `f`.
///
/// Returned as a complex number; for real-valued `f` and Hermitian `phi` the
/// imaginary part is rounding noise, and a large one signals bad input.
pub fn lf<T: Real>(phi: &PhiTable<T>, f: &TrigPoly<T>) -> Result<Complex<T>> {
    if !f.degree_box().fits_within(phi.degree_box()) {
        return Err(Error::BoxMismatch(format!("polynomial box {} exceeds phi box {}", f.degree_box(), phi.degree_box())));
    }
    let mut acc = czero();
    for (idx, q) in f.terms() {
        let v = phi.get(idx).ok_or_else(|| Error::IncompleteTable(vec![idx]))?;
        acc += q * v;
    }
    Ok(acc)
}

/// `e* A e` with `A` the block-Toeplitz matrix of `phi` and `e` the
/// coefficient vector of `factor`; equals `L_phi(|factor|^2)`.
pub fn lf_quadratic<T: Real>(phi: &PhiTable<T>, factor: &AnalyticTrigPoly<T>) -> Result<T> {
    if factor.degree_box() != phi.degree_box() {
        return Err(Error::BoxMismatch(format!("factor box {} differs from phi box {}", factor.degree_box(), phi.degree_box())));
    }
    let a = build_matrix(phi)?;
    let e: DVector<Complex<T>> = analytic_to_vector(factor);
    Ok(a.quadratic_form(&e).re)
}

/// `phi(n) = (2 pi)^-3 sum_j w_j exp(i n . p_j)` on the full box.
pub fn phi_from_measure<T: Real>(mu: &AtomicMeasure<T>, bx: DegreeBox) -> PhiTable<T> {
    let norm = torus_volume::<T>();
    PhiTable::from_fn(bx, |n| {
        let s = mu.atoms.iter().fold(czero(), |acc, (p, w)| acc + cis(n.phase(p)).scale(*w));
        s.unscale(norm)
    })
    .expect("measure-generated table is Hermitian")
}

/// `(2 pi)^-3 sum_j w_j f(p_j)`.
pub fn lf_via_measure<T: Real>(mu: &AtomicMeasure<T>, f: &TrigPoly<T>) -> Result<T> {
    if !f.is_real_valued_default() {
        return Err(Error::NotRealValued);
    }
    let s = mu.atoms.iter().fold(T::zero(), |acc, (p, w)| acc + *w * f.eval(p).re);
    Ok(s / torus_volume::<T>())
}
