//! Sparse trigonometric (Laurent) and power polynomials in three variables.
//!
//! Trigonometric polynomials are stored in the complex exponential basis
//! `exp(i(k alpha + l beta + m gamma))`; cosine terms are split into a
//! Hermitian pair on input. Every container carries an explicit
//! [`DegreeBox`], which is not inferred from the support: the vectorization
//! used by the Toeplitz machinery depends on the declared box.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cabs, cis, czero, lit, Real};

/// Coefficients below this magnitude are treated as zero by equality checks.
pub const DUST: f64 = 1e-14;

/// Lattice index `(k, l, m)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MultiIndex {
    pub k: i32,
    pub l: i32,
    pub m: i32,
}

impl MultiIndex {
    pub const ORIGIN: MultiIndex = MultiIndex { k: 0, l: 0, m: 0 };

    pub const fn new(k: i32, l: i32, m: i32) -> Self {
        Self { k, l, m }
    }

    pub fn as_array(self) -> [i32; 3] {
        [self.k, self.l, self.m]
    }

    pub fn component(self, axis: usize) -> i32 {
        self.as_array()[axis]
    }

    pub fn is_non_negative(self) -> bool {
        self.k >= 0 && self.l >= 0 && self.m >= 0
    }

    /// Canonical representative of the pair `{n, -n}`: `k > 0`, or `k = 0, l > 0`,
    /// or `k = l = 0, m >= 0`. The origin is included.
    pub fn in_upper_half(self) -> bool {
        self.k > 0 || (self.k == 0 && (self.l > 0 || (self.l == 0 && self.m >= 0)))
    }

    /// `k alpha + l beta + m gamma`.
    pub fn phase<T: Real>(self, p: &Angle3<T>) -> T {
        lit::<T>(self.k as f64) * p.alpha + lit::<T>(self.l as f64) * p.beta + lit::<T>(self.m as f64) * p.gamma
    }
}

impl Neg for MultiIndex {
    type Output = MultiIndex;
    fn neg(self) -> MultiIndex {
        MultiIndex::new(-self.k, -self.l, -self.m)
    }
}

impl Add for MultiIndex {
    type Output = MultiIndex;
    fn add(self, o: MultiIndex) -> MultiIndex {
        MultiIndex::new(self.k + o.k, self.l + o.l, self.m + o.m)
    }
}

impl Sub for MultiIndex {
    type Output = MultiIndex;
    fn sub(self, o: MultiIndex) -> MultiIndex {
        MultiIndex::new(self.k - o.k, self.l - o.l, self.m - o.m)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.k, self.l, self.m)
    }
}

impl From<[i32; 3]> for MultiIndex {
    fn from(a: [i32; 3]) -> Self {
        MultiIndex::new(a[0], a[1], a[2])
    }
}

/// Per-variable degree bounds `(N1, N2, N3)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct DegreeBox {
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
}

impl DegreeBox {
    pub const fn new(n1: usize, n2: usize, n3: usize) -> Self {
        Self { n1, n2, n3 }
    }

    pub fn as_array(self) -> [usize; 3] {
        [self.n1, self.n2, self.n3]
    }

    /// `|k| <= N1`, `|l| <= N2`, `|m| <= N3`.
    pub fn contains(self, idx: MultiIndex) -> bool {
        idx.as_array()
            .iter()
            .zip(self.as_array())
            .all(|(&c, n)| c.unsigned_abs() as usize <= n)
    }

    /// `0 <= k <= N1`, `0 <= l <= N2`, `0 <= m <= N3`.
    pub fn contains_octant(self, idx: MultiIndex) -> bool {
        idx.is_non_negative() && self.contains(idx)
    }

    /// Number of lattice points in the non-negative octant, `(N1+1)(N2+1)(N3+1)`.
    pub fn octant_len(self) -> usize {
        (self.n1 + 1) * (self.n2 + 1) * (self.n3 + 1)
    }

    /// Number of lattice points in the symmetric box, `(2N1+1)(2N2+1)(2N3+1)`.
    pub fn lattice_len(self) -> usize {
        (2 * self.n1 + 1) * (2 * self.n2 + 1) * (2 * self.n3 + 1)
    }

    pub fn fits_within(self, other: DegreeBox) -> bool {
        self.n1 <= other.n1 && self.n2 <= other.n2 && self.n3 <= other.n3
    }

    pub fn union(self, other: DegreeBox) -> DegreeBox {
        DegreeBox::new(self.n1.max(other.n1), self.n2.max(other.n2), self.n3.max(other.n3))
    }

    pub fn doubled(self) -> DegreeBox {
        DegreeBox::new(2 * self.n1, 2 * self.n2, 2 * self.n3)
    }

    /// All indices of the symmetric box, `m` slowest and `k` fastest.
    pub fn lattice(self) -> impl Iterator<Item = MultiIndex> {
        let [n1, n2, n3] = self.as_array().map(|n| n as i32);
        (-n3..=n3).flat_map(move |m| (-n2..=n2).flat_map(move |l| (-n1..=n1).map(move |k| MultiIndex::new(k, l, m))))
    }

    /// Indices of the non-negative octant in vectorization order (`m` slowest, `k` fastest).
    pub fn octant(self) -> impl Iterator<Item = MultiIndex> {
        let [n1, n2, n3] = self.as_array().map(|n| n as i32);
        (0..=n3).flat_map(move |m| (0..=n2).flat_map(move |l| (0..=n1).map(move |k| MultiIndex::new(k, l, m))))
    }
}

impl fmt::Display for DegreeBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.n1, self.n2, self.n3)
    }
}

/// A point `(alpha, beta, gamma)` of the torus.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Angle3<T> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
}

impl<T: Real> Angle3<T> {
    pub fn new(alpha: T, beta: T, gamma: T) -> Self {
        Self { alpha, beta, gamma }
    }

    pub fn origin() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn as_array(&self) -> [T; 3] {
        [self.alpha, self.beta, self.gamma]
    }

    pub fn from_array(a: [T; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    /// Canonical representative in `[-pi, pi)^3`.
    pub fn normalized(&self) -> Self {
        Self::from_array(self.as_array().map(wrap_angle))
    }

    /// Euclidean distance between the points on the torus.
    pub fn periodic_distance(&self, other: &Self) -> T {
        self.as_array()
            .iter()
            .zip(other.as_array())
            .map(|(&a, b)| {
                let d = wrap_angle(a - b);
                d * d
            })
            .fold(T::zero(), |s, x| s + x)
            .sqrt()
    }
}

/// Wraps an angle into `[-pi, pi)`.
pub fn wrap_angle<T: Real>(x: T) -> T {
    let pi = T::pi();
    let two_pi = T::two_pi();
    let mut y = x - two_pi * ((x + pi) / two_pi).floor();
    if y >= pi {
        y -= two_pi;
    }
    if y < -pi {
        y += two_pi;
    }
    y
}

fn check_in_box(bx: DegreeBox, idx: MultiIndex, octant: bool) -> Result<()> {
    let ok = if octant { bx.contains_octant(idx) } else { bx.contains(idx) };
    if ok {
        Ok(())
    } else {
        Err(Error::IndexOutOfBox { idx, bx: bx.to_string() })
    }
}

fn normalized_map<T: Real>(coeffs: &BTreeMap<MultiIndex, Complex<T>>) -> BTreeMap<MultiIndex, Complex<T>> {
    let dust = lit::<T>(DUST);
    coeffs.iter().filter(|(_, c)| cabs(**c) >= dust).map(|(i, c)| (*i, *c)).collect()
}

/// Trigonometric polynomial `sum q(k,l,m) exp(i(k alpha + l beta + m gamma))`
/// over the symmetric box `|k| <= N1, |l| <= N2, |m| <= N3`.
#[derive(Clone, Debug)]
pub struct TrigPoly<T: Real> {
    bx: DegreeBox,
    coeffs: BTreeMap<MultiIndex, Complex<T>>,
}

impl<T: Real> TrigPoly<T> {
    pub fn zero(bx: DegreeBox) -> Self {
        Self { bx, coeffs: BTreeMap::new() }
    }

    pub fn constant(bx: DegreeBox, c: T) -> Self {
        let mut p = Self::zero(bx);
        p.coeffs.insert(MultiIndex::ORIGIN, Complex::new(c, T::zero()));
        p
    }

    /// Builds a polynomial from `(index, coefficient)` pairs; repeated indices accumulate.
    pub fn from_terms<I>(bx: DegreeBox, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, Complex<T>)>,
    {
        let mut p = Self::zero(bx);
        for (idx, c) in terms {
            p.add_term(idx, c)?;
        }
        Ok(p)
    }

    pub fn add_term(&mut self, idx: MultiIndex, c: Complex<T>) -> Result<()> {
        check_in_box(self.bx, idx, false)?;
        *self.coeffs.entry(idx).or_insert_with(czero) += c;
        Ok(())
    }

    /// Adds `amp * cos(k alpha + l beta + m gamma)`.
    pub fn add_cosine(&mut self, idx: MultiIndex, amp: T) -> Result<()> {
        if idx == MultiIndex::ORIGIN {
            return self.add_term(idx, Complex::new(amp, T::zero()));
        }
        let half = Complex::new(amp * lit(0.5), T::zero());
        self.add_term(idx, half)?;
        self.add_term(-idx, half)
    }

    /// Adds `amp * sin(k alpha + l beta + m gamma)`.
    pub fn add_sine(&mut self, idx: MultiIndex, amp: T) -> Result<()> {
        if idx == MultiIndex::ORIGIN {
            return check_in_box(self.bx, idx, false);
        }
        let half = amp * lit(0.5);
        self.add_term(idx, Complex::new(T::zero(), -half))?;
        self.add_term(-idx, Complex::new(T::zero(), half))
    }

    pub fn degree_box(&self) -> DegreeBox {
        self.bx
    }

    pub fn coeff(&self, idx: MultiIndex) -> Complex<T> {
        self.coeffs.get(&idx).copied().unwrap_or_else(czero)
    }

    /// Stored terms in index order.
    pub fn terms(&self) -> impl Iterator<Item = (MultiIndex, Complex<T>)> + '_ {
        self.coeffs.iter().map(|(i, c)| (*i, *c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.values().all(|c| c.re == T::zero() && c.im == T::zero())
    }

    /// Same coefficients in a different (possibly larger) box.
    pub fn with_box(&self, bx: DegreeBox) -> Result<Self> {
        Self::from_terms(bx, self.terms())
    }

    /// Copy with coefficients below [`DUST`] removed.
    pub fn normalized(&self) -> Self {
        Self { bx: self.bx, coeffs: normalized_map(&self.coeffs) }
    }

    pub fn scale(&self, c: T) -> Self {
        Self { bx: self.bx, coeffs: self.coeffs.iter().map(|(i, q)| (*i, q.scale(c))).collect() }
    }

    pub fn max_abs_coeff(&self) -> T {
        self.coeffs.values().map(|c| cabs(*c)).fold(T::zero(), |a, b| a.max(b))
    }

    pub fn abs_sum(&self) -> T {
        self.coeffs.values().map(|c| cabs(*c)).fold(T::zero(), |a, b| a + b)
    }

    pub fn eval(&self, p: &Angle3<T>) -> Complex<T> {
        self.coeffs.iter().fold(czero(), |acc, (idx, q)| acc + *q * cis(idx.phase(p)))
    }

    /// Real part of the gradient with respect to `(alpha, beta, gamma)`.
    pub fn gradient(&self, p: &Angle3<T>) -> [T; 3] {
        let mut g = [T::zero(); 3];
        for (idx, q) in &self.coeffs {
            // d/d theta of q e^{i n.theta} = i n q e^{i n.theta}
            let w = *q * cis(idx.phase(p));
            let re_i = -w.im;
            for (axis, gi) in g.iter_mut().enumerate() {
                *gi += lit::<T>(idx.component(axis) as f64) * re_i;
            }
        }
        g
    }

    /// Real part of the Hessian with respect to `(alpha, beta, gamma)`.
    pub fn hessian(&self, p: &Angle3<T>) -> [[T; 3]; 3] {
        let mut h = [[T::zero(); 3]; 3];
        for (idx, q) in &self.coeffs {
            let w = (*q * cis(idx.phase(p))).re;
            let n = idx.as_array().map(|c| lit::<T>(c as f64));
            for a in 0..3 {
                for b in 0..3 {
                    h[a][b] -= n[a] * n[b] * w;
                }
            }
        }
        h
    }

    /// True iff `|q(-n) - conj(q(n))| <= tol` for every index.
    pub fn is_real_valued(&self, tol: T) -> bool {
        self.coeffs.iter().all(|(idx, q)| cabs(self.coeff(-*idx) - q.conj()) <= tol)
    }

    /// Default realness test used by operations that require a real-valued input:
    /// tolerance `1e-9 * max(1, max |q|)`.
    pub fn is_real_valued_default(&self) -> bool {
        self.is_real_valued(lit::<T>(1e-9) * T::one().max(self.max_abs_coeff()))
    }

    /// Variables that actually occur in the support.
    pub fn active_axes(&self) -> [bool; 3] {
        let mut act = [false; 3];
        for (idx, q) in &self.coeffs {
            if q.re == T::zero() && q.im == T::zero() {
                continue;
            }
            for (axis, a) in act.iter_mut().enumerate() {
                *a |= idx.component(axis) != 0;
            }
        }
        act
    }

    /// Real part of the polynomial on a tensor grid, `alpha` index slowest.
    ///
    /// The sum is contracted one axis at a time, so the cost is linear in the
    /// number of grid points times the per-axis degree.
    pub fn grid_values(&self, axes: [&[T]; 3]) -> Vec<T> {
        let [n1, n2, n3] = self.bx.as_array().map(|n| n as i32);
        let (w1, w2, w3) = ((2 * n1 + 1) as usize, (2 * n2 + 1) as usize, (2 * n3 + 1) as usize);
        let table = |pts: &[T], n: i32| -> Vec<Complex<T>> {
            pts.iter()
                .flat_map(|&t| (-n..=n).map(move |k| cis(lit::<T>(k as f64) * t)))
                .collect()
        };
        let (ta, tb, tc) = (table(axes[0], n1), table(axes[1], n2), table(axes[2], n3));
        let (na, nb, nc) = (axes[0].len(), axes[1].len(), axes[2].len());

        // dense coefficient block q[l][m][k]
        let mut q = vec![czero::<T>(); w1 * w2 * w3];
        for (idx, c) in &self.coeffs {
            let (k, l, m) = ((idx.k + n1) as usize, (idx.l + n2) as usize, (idx.m + n3) as usize);
            q[(l * w3 + m) * w1 + k] = *c;
        }
        let mut out = Vec::with_capacity(na * nb * nc);
        let mut s1 = vec![czero::<T>(); w2 * w3];
        let mut s2 = vec![czero::<T>(); w3];
        for i in 0..na {
            let ea = &ta[i * w1..(i + 1) * w1];
            for (lm, s) in s1.iter_mut().enumerate() {
                let row = &q[lm * w1..(lm + 1) * w1];
                *s = row.iter().zip(ea).fold(czero(), |acc, (a, b)| acc + *a * *b);
            }
            for j in 0..nb {
                let eb = &tb[j * w2..(j + 1) * w2];
                for (m, s) in s2.iter_mut().enumerate() {
                    *s = (0..w2).fold(czero(), |acc, l| acc + s1[l * w3 + m] * eb[l]);
                }
                for kk in 0..nc {
                    let ec = &tc[kk * w3..(kk + 1) * w3];
                    let v = s2.iter().zip(ec).fold(T::zero(), |acc, (a, b)| acc + (*a * *b).re);
                    out.push(v);
                }
            }
        }
        out
    }

    /// Minimum of the real part over the uniform `resolution^3` grid on `[-pi, pi)^3`.
    ///
    /// Ties resolve to the lexicographically smallest grid index.
    pub fn min_on_grid(&self, resolution: usize) -> Result<(T, Angle3<T>)> {
        if resolution < 2 {
            return Err(Error::BadResolution(resolution));
        }
        if !self.is_real_valued_default() {
            return Err(Error::NotRealValued);
        }
        let pts = uniform_grid::<T>(resolution);
        let vals = self.grid_values([&pts, &pts, &pts]);
        let mut best = 0;
        for (i, v) in vals.iter().enumerate() {
            if *v < vals[best] {
                best = i;
            }
        }
        let (i, j, k) = (best / (resolution * resolution), (best / resolution) % resolution, best % resolution);
        Ok((vals[best], Angle3::new(pts[i], pts[j], pts[k])))
    }
}

/// `resolution` equispaced points `-pi + 2 pi j / resolution`.
pub fn uniform_grid<T: Real>(resolution: usize) -> Vec<T> {
    let step = T::two_pi() / lit::<T>(resolution as f64);
    (0..resolution).map(|j| -T::pi() + step * lit::<T>(j as f64)).collect()
}

impl<T: Real> PartialEq for TrigPoly<T> {
    fn eq(&self, other: &Self) -> bool {
        self.bx == other.bx && normalized_map(&self.coeffs) == normalized_map(&other.coeffs)
    }
}

fn merge<T: Real>(a: &TrigPoly<T>, b: &TrigPoly<T>, sign: T) -> TrigPoly<T> {
    let mut out = TrigPoly::zero(a.bx.union(b.bx));
    out.coeffs = a.coeffs.clone();
    for (idx, c) in &b.coeffs {
        *out.coeffs.entry(*idx).or_insert_with(czero) += c.scale(sign);
    }
    out
}

impl<T: Real> Add for &TrigPoly<T> {
    type Output = TrigPoly<T>;
    fn add(self, o: &TrigPoly<T>) -> TrigPoly<T> {
        merge(self, o, T::one())
    }
}

impl<T: Real> Sub for &TrigPoly<T> {
    type Output = TrigPoly<T>;
    fn sub(self, o: &TrigPoly<T>) -> TrigPoly<T> {
        merge(self, o, -T::one())
    }
}

impl<T: Real> Neg for &TrigPoly<T> {
    type Output = TrigPoly<T>;
    fn neg(self) -> TrigPoly<T> {
        self.scale(-T::one())
    }
}

/// Analytic polynomial `sum q(k,l,m) exp(i(k alpha + l beta + m gamma))` with
/// indices in the non-negative octant.
#[derive(Clone, Debug)]
pub struct AnalyticTrigPoly<T: Real> {
    bx: DegreeBox,
    coeffs: BTreeMap<MultiIndex, Complex<T>>,
}

impl<T: Real> AnalyticTrigPoly<T> {
    pub fn zero(bx: DegreeBox) -> Self {
        Self { bx, coeffs: BTreeMap::new() }
    }

    pub fn from_terms<I>(bx: DegreeBox, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, Complex<T>)>,
    {
        let mut p = Self::zero(bx);
        for (idx, c) in terms {
            p.add_term(idx, c)?;
        }
        Ok(p)
    }

    pub fn add_term(&mut self, idx: MultiIndex, c: Complex<T>) -> Result<()> {
        check_in_box(self.bx, idx, true)?;
        *self.coeffs.entry(idx).or_insert_with(czero) += c;
        Ok(())
    }

    pub fn degree_box(&self) -> DegreeBox {
        self.bx
    }

    pub fn coeff(&self, idx: MultiIndex) -> Complex<T> {
        self.coeffs.get(&idx).copied().unwrap_or_else(czero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (MultiIndex, Complex<T>)> + '_ {
        self.coeffs.iter().map(|(i, c)| (*i, *c))
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        Self { bx: self.bx, coeffs: self.coeffs.iter().map(|(i, q)| (*i, *q * c)).collect() }
    }

    pub fn eval(&self, p: &Angle3<T>) -> Complex<T> {
        self.coeffs.iter().fold(czero(), |acc, (idx, q)| acc + *q * cis(idx.phase(p)))
    }

    /// Sum of squared coefficient moduli.
    pub fn norm_squared(&self) -> T {
        self.coeffs.values().map(|c| c.norm_sqr()).fold(T::zero(), |a, b| a + b)
    }

    /// `|F|^2` as a trigonometric polynomial over the same box.
    ///
    /// The coefficient at `n` is `sum_{a - b = n} q(a) conj(q(b))`; the result
    /// is made exactly Hermitian by symmetrizing each pair `(n, -n)`.
    pub fn mod_square(&self) -> TrigPoly<T> {
        let mut acc: BTreeMap<MultiIndex, Complex<T>> = BTreeMap::new();
        for (a, qa) in &self.coeffs {
            for (b, qb) in &self.coeffs {
                *acc.entry(*a - *b).or_insert_with(czero) += *qa * qb.conj();
            }
        }
        let half = lit::<T>(0.5);
        let mut coeffs = BTreeMap::new();
        for (idx, c) in &acc {
            if idx.in_upper_half() {
                let mirror = acc.get(&-*idx).copied().unwrap_or_else(czero);
                let v = (*c + mirror.conj()).scale(half);
                if *idx == MultiIndex::ORIGIN {
                    coeffs.insert(*idx, Complex::new(v.re, T::zero()));
                } else {
                    coeffs.insert(*idx, v);
                    coeffs.insert(-*idx, v.conj());
                }
            }
        }
        TrigPoly { bx: self.bx, coeffs }
    }
}

impl<T: Real> PartialEq for AnalyticTrigPoly<T> {
    fn eq(&self, other: &Self) -> bool {
        self.bx == other.bx && normalized_map(&self.coeffs) == normalized_map(&other.coeffs)
    }
}

/// `sum_j |F_j|^2`. All factors must share one box; an empty list gives the
/// zero polynomial over the trivial box.
pub fn sum_of_mod_squares<T: Real>(factors: &[AnalyticTrigPoly<T>]) -> Result<TrigPoly<T>> {
    let Some(first) = factors.first() else {
        return Ok(TrigPoly::zero(DegreeBox::default()));
    };
    let bx = first.bx;
    let mut total = TrigPoly::zero(bx);
    for f in factors {
        if f.bx != bx {
            return Err(Error::BoxMismatch(format!("factor box {} differs from {}", f.bx, bx)));
        }
        total = &total + &f.mod_square();
    }
    Ok(total)
}

/// Real power polynomial `sum a(k,l,m) x^k y^l z^m`; the box holds the
/// exponent bounds directly (`0 <= k <= box.n1`, ...).
#[derive(Clone, Debug)]
pub struct PowerPoly<T: Real> {
    bx: DegreeBox,
    coeffs: BTreeMap<MultiIndex, T>,
}

impl<T: Real> PowerPoly<T> {
    pub fn zero(bx: DegreeBox) -> Self {
        Self { bx, coeffs: BTreeMap::new() }
    }

    pub fn from_terms<I>(bx: DegreeBox, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, T)>,
    {
        let mut p = Self::zero(bx);
        for (idx, c) in terms {
            p.add_term(idx, c)?;
        }
        Ok(p)
    }

    pub fn add_term(&mut self, idx: MultiIndex, c: T) -> Result<()> {
        check_in_box(self.bx, idx, true)?;
        *self.coeffs.entry(idx).or_insert_with(T::zero) += c;
        Ok(())
    }

    pub fn degree_box(&self) -> DegreeBox {
        self.bx
    }

    pub fn coeff(&self, idx: MultiIndex) -> T {
        self.coeffs.get(&idx).copied().unwrap_or_else(T::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (MultiIndex, T)> + '_ {
        self.coeffs.iter().map(|(i, c)| (*i, *c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.values().all(|c| *c == T::zero())
    }

    pub fn max_abs_coeff(&self) -> T {
        self.coeffs.values().fold(T::zero(), |a, c| a.max(c.abs()))
    }

    pub fn scale(&self, c: T) -> Self {
        Self { bx: self.bx, coeffs: self.coeffs.iter().map(|(i, q)| (*i, *q * c)).collect() }
    }

    pub fn normalized(&self) -> Self {
        let dust = lit::<T>(DUST);
        Self { bx: self.bx, coeffs: self.coeffs.iter().filter(|(_, c)| c.abs() >= dust).map(|(i, c)| (*i, *c)).collect() }
    }

    pub fn eval(&self, x: T, y: T, z: T) -> T {
        self.coeffs.iter().fold(T::zero(), |acc, (idx, a)| {
            acc + *a * x.powi(idx.k) * y.powi(idx.l) * z.powi(idx.m)
        })
    }

    /// Product; the exponent box is the sum of the two boxes.
    pub fn mul(&self, other: &Self) -> Self {
        let bx = DegreeBox::new(self.bx.n1 + other.bx.n1, self.bx.n2 + other.bx.n2, self.bx.n3 + other.bx.n3);
        let mut out = Self::zero(bx);
        for (a, ca) in &self.coeffs {
            for (b, cb) in &other.coeffs {
                *out.coeffs.entry(*a + *b).or_insert_with(T::zero) += *ca * *cb;
            }
        }
        out
    }
}

impl<T: Real> PartialEq for PowerPoly<T> {
    fn eq(&self, other: &Self) -> bool {
        self.bx == other.bx && self.normalized().coeffs == other.normalized().coeffs
    }
}

impl<T: Real> Add for &PowerPoly<T> {
    type Output = PowerPoly<T>;
    fn add(self, o: &PowerPoly<T>) -> PowerPoly<T> {
        let mut out = PowerPoly { bx: self.bx.union(o.bx), coeffs: self.coeffs.clone() };
        for (idx, c) in &o.coeffs {
            *out.coeffs.entry(*idx).or_insert_with(T::zero) += *c;
        }
        out
    }
}

impl<T: Real> Sub for &PowerPoly<T> {
    type Output = PowerPoly<T>;
    fn sub(self, o: &PowerPoly<T>) -> PowerPoly<T> {
        self + &o.scale(-T::one())
    }
}
