//! Nested block-Toeplitz matrices built from Hermitian lattice functions.
//!
//! For a lattice function `phi` on the symmetric box, the matrix has entry
//! `phi(s - r)` at row `r`, column `s`, where rows and columns run over the
//! non-negative octant in vectorization order (`m` slowest, then `l`, `k`
//! fastest). The innermost `(N1+1)`-blocks are the Toeplitz matrices
//! `B(l, m)`, grouped into block-Toeplitz `C_m`, grouped into the final
//! matrix. With this orientation `e* A e = L_phi(|F|^2)` where `e` lists the
//! coefficients of `F`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::polynomial::{AnalyticTrigPoly, DegreeBox, MultiIndex};
use crate::scalar::{cabs, czero, lit, to_f64, Real};

/// Default relative tolerance for PSD and kernel decisions.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Hermitian-symmetric lattice function on the symmetric box.
#[derive(Clone, Debug, PartialEq)]
pub struct PhiTable<T: Real> {
    bx: DegreeBox,
    values: BTreeMap<MultiIndex, Complex<T>>,
}

impl<T: Real> PhiTable<T> {
    /// Builds a table from explicit entries; each entry also fixes its mirror
    /// `phi(-n) = conj(phi(n))`. Indices never mentioned stay missing.
    pub fn from_values<I>(bx: DegreeBox, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, Complex<T>)>,
    {
        let mut values: BTreeMap<MultiIndex, Complex<T>> = BTreeMap::new();
        for (idx, v) in entries {
            if !bx.contains(idx) {
                return Err(Error::IndexOutOfBox { idx, bx: bx.to_string() });
            }
            let scale = T::one().max(cabs(v));
            let tol = lit::<T>(1e-12) * scale;
            if idx == MultiIndex::ORIGIN && v.im.abs() > tol {
                return Err(Error::NotHermitianSymmetric(idx));
            }
            for (i, val) in [(idx, v), (-idx, v.conj())] {
                if let Some(prev) = values.get(&i) {
                    if cabs(*prev - val) > tol {
                        return Err(Error::NotHermitianSymmetric(i));
                    }
                }
                values.insert(i, val);
            }
        }
        if let Some(v) = values.get_mut(&MultiIndex::ORIGIN) {
            v.im = T::zero();
        }
        Ok(Self { bx, values })
    }

    /// Complete table from a function evaluated on the upper half lattice.
    pub fn from_fn(bx: DegreeBox, mut f: impl FnMut(MultiIndex) -> Complex<T>) -> Result<Self> {
        let entries: Vec<_> = bx.lattice().filter(|i| i.in_upper_half()).map(|i| (i, f(i))).collect();
        Self::from_values(bx, entries)
    }

    /// `phi = delta` at the origin.
    pub fn delta(bx: DegreeBox) -> Self {
        Self::from_fn(bx, |i| if i == MultiIndex::ORIGIN { Complex::new(T::one(), T::zero()) } else { czero() })
            .expect("delta table is Hermitian")
    }

    pub fn degree_box(&self) -> DegreeBox {
        self.bx
    }

    pub fn get(&self, idx: MultiIndex) -> Option<Complex<T>> {
        self.values.get(&idx).copied()
    }

    /// Value at `idx`, zero when absent or outside the box.
    pub fn value(&self, idx: MultiIndex) -> Complex<T> {
        self.get(idx).unwrap_or_else(czero)
    }

    pub fn entries(&self) -> impl Iterator<Item = (MultiIndex, Complex<T>)> + '_ {
        self.values.iter().map(|(i, v)| (*i, *v))
    }

    /// Entries on the canonical half lattice (enough to reconstruct the table).
    pub fn upper_half(&self) -> impl Iterator<Item = (MultiIndex, Complex<T>)> + '_ {
        self.entries().filter(|(i, _)| i.in_upper_half())
    }

    pub fn missing(&self) -> Vec<MultiIndex> {
        self.bx.lattice().filter(|i| !self.values.contains_key(i)).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.values.len() == self.bx.lattice_len()
    }

    pub fn scale(&self, c: T) -> Self {
        Self { bx: self.bx, values: self.values.iter().map(|(i, v)| (*i, v.scale(c))).collect() }
    }

    /// Adds `shift` to `phi(0,0,0)`; on the matrix this adds `shift * I`.
    pub fn shift_origin(&self, shift: T) -> Self {
        let mut out = self.clone();
        let v = out.values.entry(MultiIndex::ORIGIN).or_insert_with(czero);
        v.re += shift;
        out
    }
}

/// Dense square complex matrix intended to be Hermitian.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix<T: Real> {
    entries: DMatrix<Complex<T>>,
}

/// Eigen-decomposition with eigenvalues in ascending order.
#[derive(Clone, Debug)]
pub struct Spectrum<T: Real> {
    pub values: Vec<T>,
    /// Column `j` is the unit eigenvector for `values[j]`.
    pub vectors: DMatrix<Complex<T>>,
}

impl<T: Real> Spectrum<T> {
    pub fn spectral_radius(&self) -> T {
        self.values.iter().fold(T::zero(), |a, v| a.max(v.abs()))
    }

    pub fn min(&self) -> T {
        self.values.first().copied().unwrap_or_else(T::zero)
    }
}

impl<T: Real> HermitianMatrix<T> {
    pub fn from_matrix(entries: DMatrix<Complex<T>>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::Malformed(format!("matrix is {}x{}, not square", entries.nrows(), entries.ncols())));
        }
        Ok(Self { entries })
    }

    pub fn identity(dim: usize) -> Self {
        Self { entries: DMatrix::identity(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex<T>> {
        &self.entries
    }

    pub fn into_inner(self) -> DMatrix<Complex<T>> {
        self.entries
    }

    pub fn get(&self, r: usize, s: usize) -> Complex<T> {
        self.entries[(r, s)]
    }

    /// `max |M(i,j) - conj(M(j,i))|`.
    pub fn asymmetry(&self) -> T {
        let n = self.dim();
        let mut worst = T::zero();
        for i in 0..n {
            for j in i..n {
                worst = worst.max(cabs(self.entries[(i, j)] - self.entries[(j, i)].conj()));
            }
        }
        worst
    }

    pub fn max_abs(&self) -> T {
        self.entries.iter().fold(T::zero(), |a, z| a.max(cabs(*z)))
    }

    fn check_hermitian(&self) -> Result<()> {
        let asym = self.asymmetry();
        if asym > lit::<T>(1e-9) * T::one().max(self.max_abs()) {
            return Err(Error::NotHermitian(to_f64(asym)));
        }
        Ok(())
    }

    /// Eigen-decomposition of the Hermitian part, ascending.
    pub fn spectrum(&self) -> Spectrum<T> {
        let n = self.dim();
        if n == 0 {
            return Spectrum { values: vec![], vectors: DMatrix::zeros(0, 0) };
        }
        let herm = (&self.entries + self.entries.adjoint()).scale(lit(0.5));
        let eig = SymmetricEigen::new(herm);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap_or(std::cmp::Ordering::Equal));
        let values = order.iter().map(|&j| eig.eigenvalues[j]).collect();
        let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        Spectrum { values, vectors }
    }

    /// `v* M v`, real part.
    pub fn quadratic_form(&self, v: &DVector<Complex<T>>) -> Complex<T> {
        (v.adjoint() * &self.entries * v)[(0, 0)]
    }
}

/// Orthonormal basis of the (numerical) kernel of a Hermitian PSD matrix.
#[derive(Clone, Debug)]
pub struct KernelBasis<T: Real> {
    pub vectors: Vec<DVector<Complex<T>>>,
    pub nu: usize,
}

/// Position of `d(k, l, m)` in the coefficient vector:
/// `m (N2+1)(N1+1) + l (N1+1) + k`.
pub fn flatten_index(idx: MultiIndex, bx: DegreeBox) -> Result<usize> {
    if !bx.contains_octant(idx) {
        return Err(Error::IndexOutOfBox { idx, bx: bx.to_string() });
    }
    let (k, l, m) = (idx.k as usize, idx.l as usize, idx.m as usize);
    Ok(m * (bx.n2 + 1) * (bx.n1 + 1) + l * (bx.n1 + 1) + k)
}

/// Inverse of [`flatten_index`]; `pos` must be below `bx.octant_len()`.
pub fn unflatten_index(pos: usize, bx: DegreeBox) -> MultiIndex {
    let w1 = bx.n1 + 1;
    let w2 = bx.n2 + 1;
    MultiIndex::new((pos % w1) as i32, ((pos / w1) % w2) as i32, (pos / (w1 * w2)) as i32)
}

/// Assembles the nested block-Toeplitz matrix of `phi`.
pub fn build_matrix<T: Real>(phi: &PhiTable<T>) -> Result<HermitianMatrix<T>> {
    let missing = phi.missing();
    if !missing.is_empty() {
        return Err(Error::IncompleteTable(missing));
    }
    let bx = phi.degree_box();
    let octant: Vec<MultiIndex> = bx.octant().collect();
    let n = octant.len();
    let entries = DMatrix::from_fn(n, n, |r, s| phi.value(octant[s] - octant[r]));
    Ok(HermitianMatrix { entries })
}

/// Projects a matrix onto the block-Toeplitz structure by averaging each
/// difference class `s - r = n`; the result is a complete table.
pub fn phi_from_matrix<T: Real>(m: &DMatrix<Complex<T>>, bx: DegreeBox) -> PhiTable<T> {
    let octant: Vec<MultiIndex> = bx.octant().collect();
    let mut sums: BTreeMap<MultiIndex, (Complex<T>, usize)> = BTreeMap::new();
    for (r, ir) in octant.iter().enumerate() {
        for (s, is) in octant.iter().enumerate() {
            let e = sums.entry(*is - *ir).or_insert((czero(), 0));
            e.0 += m[(r, s)];
            e.1 += 1;
        }
    }
    let avg = |n: MultiIndex| {
        let (sum, count) = sums[&n];
        sum.unscale(lit(count as f64))
    };
    PhiTable::from_fn(bx, |n| {
        let a = avg(n);
        let b = avg(-n).conj();
        (a + b).scale(lit(0.5))
    })
    .expect("averaged table is Hermitian")
}

/// PSD test: `min_eig >= -tol * max(1, spectral radius)`.
pub fn is_psd<T: Real>(m: &HermitianMatrix<T>, tol: T) -> Result<(bool, T)> {
    m.check_hermitian()?;
    let spec = m.spectrum();
    let min = spec.min();
    Ok((min >= -tol * T::one().max(spec.spectral_radius()), min))
}

/// Orthonormal basis of the eigenvectors with eigenvalue `<= tol * spectral radius`.
pub fn kernel_basis<T: Real>(m: &HermitianMatrix<T>, tol: T) -> Result<KernelBasis<T>> {
    m.check_hermitian()?;
    let spec = m.spectrum();
    let cut = tol * spec.spectral_radius();
    let raw: Vec<DVector<Complex<T>>> = spec
        .values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v <= cut)
        .map(|(j, _)| spec.vectors.column(j).into_owned())
        .collect();
    let vectors = orthonormalize(&raw, lit(1e-12));
    let nu = vectors.len();
    Ok(KernelBasis { vectors, nu })
}

/// Modified Gram-Schmidt; vectors whose residual norm drops below `drop_tol`
/// (relative to their original norm) are discarded.
pub fn orthonormalize<T: Real>(vs: &[DVector<Complex<T>>], drop_tol: T) -> Vec<DVector<Complex<T>>> {
    let mut out: Vec<DVector<Complex<T>>> = Vec::with_capacity(vs.len());
    for v in vs {
        let norm0 = v.norm();
        let mut w = v.clone();
        for u in &out {
            let proj = u.dotc(&w);
            w -= u * proj;
        }
        let nw = w.norm();
        if nw > drop_tol * norm0 && nw > T::zero() {
            out.push(w.unscale(nw));
        }
    }
    out
}

/// Spectral-norm distance between the orthogonal projectors onto the spans
/// of `a` and `b` (each set need not be orthonormal).
pub fn projector_distance<T: Real>(a: &[DVector<Complex<T>>], b: &[DVector<Complex<T>>], dim: usize) -> T {
    let proj = |vs: &[DVector<Complex<T>>]| {
        let basis = orthonormalize(vs, lit(1e-12));
        let mut p = DMatrix::<Complex<T>>::zeros(dim, dim);
        for u in &basis {
            p += u * u.adjoint();
        }
        p
    };
    let diff = HermitianMatrix { entries: proj(a) - proj(b) };
    diff.spectrum().spectral_radius()
}

/// Coefficient vector of an analytic polynomial in vectorization order.
pub fn analytic_to_vector<T: Real>(f: &AnalyticTrigPoly<T>) -> DVector<Complex<T>> {
    let bx = f.degree_box();
    let mut v = DVector::from_element(bx.octant_len(), czero());
    for (idx, c) in f.terms() {
        // stored indices are inside the octant by construction
        v[flatten_index(idx, bx).expect("octant index")] = c;
    }
    v
}

/// Analytic polynomial whose coefficient vector is `v`.
pub fn vector_to_analytic<T: Real>(v: &DVector<Complex<T>>, bx: DegreeBox) -> Result<AnalyticTrigPoly<T>> {
    if v.len() != bx.octant_len() {
        return Err(Error::LengthMismatch { expected: bx.octant_len(), got: v.len() });
    }
    AnalyticTrigPoly::from_terms(
        bx,
        v.iter().enumerate().filter(|(_, c)| c.re != T::zero() || c.im != T::zero()).map(|(p, c)| (unflatten_index(p, bx), *c)),
    )
}
