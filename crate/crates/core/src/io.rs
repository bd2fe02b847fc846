//! JSON documents for polynomials, lattice functions, measures and reports.
//!
//! Polynomials share one layout:
//! `{"kind": "trig"|"analytic"|"power", "box": [N1, N2, N3], "coeffs": [{"idx": [k, l, m], "re": r, "im": i}]}`
//! with `"im"` absent for power polynomials.

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extremal::{FaceReport, RankCertificate, ZeroPoint};
use crate::functional::AtomicMeasure;
use crate::polynomial::{AnalyticTrigPoly, Angle3, DegreeBox, MultiIndex, PowerPoly, TrigPoly};
use crate::sos::QMembershipResult;
use crate::toeplitz::{HermitianMatrix, PhiTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolyKind {
    Trig,
    Analytic,
    Power,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffJson {
    pub idx: [i32; 3],
    pub re: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyJson {
    pub kind: PolyKind,
    #[serde(rename = "box")]
    pub bx: [usize; 3],
    pub coeffs: Vec<CoeffJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhiJson {
    #[serde(rename = "box")]
    pub bx: [usize; 3],
    /// Any subset of the lattice closed under the Hermitian mirror; typically the upper half.
    pub values: Vec<CoeffJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomJson {
    pub point: [f64; 3],
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureJson {
    pub atoms: Vec<AtomJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroJson {
    pub point: [f64; 3],
    pub residual: f64,
    pub gradient_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZerosJson {
    pub zeros: Vec<ZeroJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaceJson {
    pub nu: usize,
    pub classification: String,
    pub generators: Vec<PolyJson>,
    pub factors: Vec<PolyJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankJson {
    pub equations: usize,
    pub unknowns: usize,
    pub rank: usize,
    pub extremal: bool,
    pub null_angle: Option<f64>,
    pub singular_values: Vec<f64>,
    pub zeros: Vec<ZeroJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipJson {
    pub status: String,
    pub iterations: usize,
    pub gap: f64,
    pub gram: Option<MatrixJson>,
    pub factors: Option<Vec<PolyJson>>,
    pub separator: Option<PhiJson>,
}

fn box_of(b: [usize; 3]) -> DegreeBox {
    DegreeBox::new(b[0], b[1], b[2])
}

fn coeff(idx: MultiIndex, c: Complex<f64>) -> CoeffJson {
    CoeffJson { idx: idx.as_array(), re: c.re, im: Some(c.im) }
}

fn complex_terms(coeffs: &[CoeffJson]) -> impl Iterator<Item = (MultiIndex, Complex<f64>)> + '_ {
    coeffs.iter().map(|c| (MultiIndex::from(c.idx), Complex::new(c.re, c.im.unwrap_or(0.0))))
}

impl PolyJson {
    pub fn from_trig(f: &TrigPoly<f64>) -> Self {
        Self { kind: PolyKind::Trig, bx: f.degree_box().as_array(), coeffs: f.terms().map(|(i, c)| coeff(i, c)).collect() }
    }

    pub fn from_analytic(f: &AnalyticTrigPoly<f64>) -> Self {
        Self { kind: PolyKind::Analytic, bx: f.degree_box().as_array(), coeffs: f.terms().map(|(i, c)| coeff(i, c)).collect() }
    }

    pub fn from_power(p: &PowerPoly<f64>) -> Self {
        let coeffs = p.terms().map(|(i, c)| CoeffJson { idx: i.as_array(), re: c, im: None }).collect();
        Self { kind: PolyKind::Power, bx: p.degree_box().as_array(), coeffs }
    }

    fn expect_kind(&self, kind: PolyKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::Malformed(format!("expected a {kind:?} polynomial, found {:?}", self.kind).to_lowercase()));
        }
        Ok(())
    }

    pub fn to_trig(&self) -> Result<TrigPoly<f64>> {
        self.expect_kind(PolyKind::Trig)?;
        TrigPoly::from_terms(box_of(self.bx), complex_terms(&self.coeffs))
    }

    pub fn to_analytic(&self) -> Result<AnalyticTrigPoly<f64>> {
        self.expect_kind(PolyKind::Analytic)?;
        AnalyticTrigPoly::from_terms(box_of(self.bx), complex_terms(&self.coeffs))
    }

    pub fn to_power(&self) -> Result<PowerPoly<f64>> {
        self.expect_kind(PolyKind::Power)?;
        if let Some(c) = self.coeffs.iter().find(|c| c.im.is_some_and(|v| v != 0.0)) {
            return Err(Error::Malformed(format!("power coefficient at {:?} has an imaginary part", c.idx)));
        }
        PowerPoly::from_terms(box_of(self.bx), self.coeffs.iter().map(|c| (MultiIndex::from(c.idx), c.re)))
    }
}

impl PhiJson {
    /// Emits the upper half; the rest follows by Hermitian symmetry.
    pub fn from_table(phi: &PhiTable<f64>) -> Self {
        Self { bx: phi.degree_box().as_array(), values: phi.upper_half().map(|(i, c)| coeff(i, c)).collect() }
    }

    pub fn to_table(&self) -> Result<PhiTable<f64>> {
        PhiTable::from_values(box_of(self.bx), complex_terms(&self.values))
    }
}

impl MeasureJson {
    pub fn from_measure(mu: &AtomicMeasure<f64>) -> Self {
        Self { atoms: mu.atoms().iter().map(|(p, w)| AtomJson { point: p.as_array(), weight: *w }).collect() }
    }

    pub fn to_measure(&self) -> Result<AtomicMeasure<f64>> {
        AtomicMeasure::new(self.atoms.iter().map(|a| (Angle3::from_array(a.point), a.weight)).collect())
    }
}

impl MatrixJson {
    pub fn from_matrix(m: &DMatrix<Complex<f64>>) -> Self {
        let rows = |part: fn(&Complex<f64>) -> f64| (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| part(&m[(r, c)])).collect()).collect();
        Self { dim: m.nrows(), re: rows(|z| z.re), im: rows(|z| z.im) }
    }

    pub fn to_matrix(&self) -> Result<HermitianMatrix<f64>> {
        let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == self.dim && rows.iter().all(|r| r.len() == self.dim);
        if !shape_ok(&self.re) || !shape_ok(&self.im) {
            return Err(Error::Malformed(format!("matrix rows do not match dim {}", self.dim)));
        }
        HermitianMatrix::from_matrix(DMatrix::from_fn(self.dim, self.dim, |r, c| Complex::new(self.re[r][c], self.im[r][c])))
    }
}

impl ZeroJson {
    pub fn from_zero(z: &ZeroPoint<f64>) -> Self {
        Self { point: z.point.as_array(), residual: z.residual, gradient_norm: z.gradient_norm }
    }

    pub fn to_zero(&self) -> ZeroPoint<f64> {
        ZeroPoint { point: Angle3::from_array(self.point), residual: self.residual, gradient_norm: self.gradient_norm }
    }
}

impl ZerosJson {
    pub fn from_zeros(zs: &[ZeroPoint<f64>]) -> Self {
        Self { zeros: zs.iter().map(ZeroJson::from_zero).collect() }
    }

    pub fn to_zeros(&self) -> Vec<ZeroPoint<f64>> {
        self.zeros.iter().map(ZeroJson::to_zero).collect()
    }
}

impl FaceJson {
    pub fn from_report(r: &FaceReport<f64>) -> Self {
        Self {
            nu: r.nu,
            classification: r.classification.as_str().to_string(),
            generators: r.generators.iter().map(PolyJson::from_trig).collect(),
            factors: r.factors.iter().map(PolyJson::from_analytic).collect(),
        }
    }
}

impl RankJson {
    pub fn from_certificate(c: &RankCertificate<f64>) -> Self {
        Self {
            equations: c.equations,
            unknowns: c.unknowns,
            rank: c.rank,
            extremal: c.extremal,
            null_angle: c.null_angle,
            singular_values: c.singular_values.clone(),
            zeros: c.zeros.iter().map(ZeroJson::from_zero).collect(),
        }
    }
}

impl MembershipJson {
    pub fn from_result(r: &QMembershipResult<f64>) -> Self {
        Self {
            status: r.status.as_str().to_string(),
            iterations: r.iterations,
            gap: r.gap,
            gram: r.gram.as_ref().map(|g| MatrixJson::from_matrix(g.entries())),
            factors: r.factors.as_ref().map(|fs| fs.iter().map(PolyJson::from_analytic).collect()),
            separator: r.separator.as_ref().map(PhiJson::from_table),
        }
    }
}

/// Parses a JSON document, reporting syntax and shape errors as [`Error::Malformed`].
pub fn parse<D: DeserializeOwned>(text: &str) -> Result<D> {
    serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))
}

pub fn to_string<S: Serialize>(value: &S) -> String {
    serde_json::to_string_pretty(value).expect("documents serialize")
}
