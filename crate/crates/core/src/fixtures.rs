//! Worked examples on the unit box `(1, 1, 1)`, embedded as JSON.

use crate::io::{parse, PhiJson, PolyJson};
use crate::polynomial::{AnalyticTrigPoly, PowerPoly, TrigPoly};
use crate::toeplitz::PhiTable;

const EXAMPLE1_PHI: &str = include_str!("../fixtures/example1_phi.json");
const FACTORS: [&str; 4] = [
    include_str!("../fixtures/f1_factor.json"),
    include_str!("../fixtures/f2_factor.json"),
    include_str!("../fixtures/f3_factor.json"),
    include_str!("../fixtures/f4_factor.json"),
];
const POWER_TARGETS: [&str; 4] = [
    include_str!("../fixtures/p1.json"),
    include_str!("../fixtures/p2.json"),
    include_str!("../fixtures/p3.json"),
    include_str!("../fixtures/p4.json"),
];
const F0: &str = include_str!("../fixtures/f0.json");
const F_EXTREMAL: &str = include_str!("../fixtures/f_extremal.json");
const TARGET_EXTREMAL: &str = include_str!("../fixtures/target_extremal.json");

fn poly(text: &str) -> PolyJson {
    parse(text).expect("embedded fixture parses")
}

/// Lattice function whose Toeplitz matrix has a 4-dimensional kernel.
pub fn example1_phi() -> PhiTable<f64> {
    parse::<PhiJson>(EXAMPLE1_PHI).and_then(|p| p.to_table()).expect("embedded fixture is valid")
}

/// `F1 = e^{i(a+b)} + e^{ic}`, `F2 = -e^{ib} + e^{i(a+c)}`,
/// `F3 = -e^{ia} + e^{i(b+c)}`, `F4 = -1 + e^{i(a+b+c)}`.
pub fn kernel_factors() -> [AnalyticTrigPoly<f64>; 4] {
    FACTORS.map(|t| poly(t).to_analytic().expect("embedded fixture is valid"))
}

/// Squares of `xyz-z+y+x`, `yz-xz+xy+1`, `yz-xz-xy-1`, `xz+yz+xy-1`.
pub fn power_targets() -> [PowerPoly<f64>; 4] {
    POWER_TARGETS.map(|t| poly(t).to_power().expect("embedded fixture is valid"))
}

/// `4 - cos(a+b+c) - cos(-a+b+c) - cos(a-b+c) + cos(a+b-c)`, minimum `4 - 2^{3/2}`.
pub fn f0() -> TrigPoly<f64> {
    poly(F0).to_trig().expect("embedded fixture is valid")
}

/// `f0` shifted down to minimum zero.
pub fn f_extremal() -> TrigPoly<f64> {
    poly(F_EXTREMAL).to_trig().expect("embedded fixture is valid")
}

/// `2^{3/2}(1+x^2)(1+y^2)(1+z^2) + 8z(y+x)(yx-1) - 2(z^2-1)((yx+1)^2 - (x-y)^2)`.
pub fn target_extremal() -> PowerPoly<f64> {
    poly(TARGET_EXTREMAL).to_power().expect("embedded fixture is valid")
}

/// Raw fixture text, keyed by file stem.
pub fn raw(name: &str) -> Option<&'static str> {
    let all = [
        ("example1_phi", EXAMPLE1_PHI),
        ("f1_factor", FACTORS[0]),
        ("f2_factor", FACTORS[1]),
        ("f3_factor", FACTORS[2]),
        ("f4_factor", FACTORS[3]),
        ("p1", POWER_TARGETS[0]),
        ("p2", POWER_TARGETS[1]),
        ("p3", POWER_TARGETS[2]),
        ("p4", POWER_TARGETS[3]),
        ("f0", F0),
        ("f_extremal", F_EXTREMAL),
        ("target_extremal", TARGET_EXTREMAL),
    ];
    all.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}
