//! Extremal elements of cones of nonnegative trigonometric polynomials in
//! three variables.
//!
//! The numerical core is generic over [`scalar::Real`] (`f32`, `f64`); the
//! aliases below fix the scalar to `f64`.

pub mod calderon;
pub mod error;
pub mod extremal;
pub mod fixtures;
pub mod functional;
pub mod io;
pub mod polynomial;
pub mod scalar;
pub mod sos;
pub mod toeplitz;

pub use error::{Error, Result};
pub use polynomial::{DegreeBox, MultiIndex};

pub type TrigPoly = polynomial::TrigPoly<f64>;
pub type AnalyticTrigPoly = polynomial::AnalyticTrigPoly<f64>;
pub type PowerPoly = polynomial::PowerPoly<f64>;
pub type Angle3 = polynomial::Angle3<f64>;
pub type PhiTable = toeplitz::PhiTable<f64>;
pub type HermitianMatrix = toeplitz::HermitianMatrix<f64>;
pub type AtomicMeasure = functional::AtomicMeasure<f64>;
pub type FaceReport = extremal::FaceReport<f64>;
pub type ZeroPoint = extremal::ZeroPoint<f64>;
pub type RankCertificate = extremal::RankCertificate<f64>;
pub type CalderonResult = calderon::CalderonResult<f64>;
pub type QMembershipResult = sos::QMembershipResult<f64>;
