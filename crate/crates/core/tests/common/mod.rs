#![allow(dead_code)]

use std::sync::Arc;

use gcx::exterior::chart::{Chart, Cmp, Constraint, Coord, CoordKind, CoordValue, Quantity, Region};
use gcx::exterior::expr::{BumpSpec, Expr, Func, Var};
use gcx::exterior::map::CoordinateMap;
use gcx::topology::params::SurgeryParams;
use gcx::exterior::form::MixedForm;
use gcx::exterior::number::GaussRat;
use num_rational::BigRational;

pub fn chart(name: &str, coords: &[(&str, CoordKind)]) -> Arc<Chart> {
    Chart::new(name, coords.iter().map(|(n, k)| Coord { name: n.to_string(), kind: *k }).collect()).unwrap()
}

/// C² × R⁴ with z1, z2 complex and x3, y3, x4, y4 real.
pub fn local_model_chart() -> Arc<Chart> {
    chart(
        "c2r4",
        &[
            ("z1", CoordKind::Complex),
            ("z2", CoordKind::Complex),
            ("x3", CoordKind::Real),
            ("y3", CoordKind::Real),
            ("x4", CoordKind::Real),
            ("y4", CoordKind::Real),
        ],
    )
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub fn real(n: &str) -> Expr {
    Expr::var(Var::real(n))
}

pub fn holo(n: &str) -> Expr {
    Expr::var(Var::holo(n))
}

pub fn anti(n: &str) -> Expr {
    Expr::var(Var::anti(n))
}

pub fn slot(c: &Chart, v: &Var) -> usize {
    c.slot_of(v).unwrap()
}

pub fn d(c: &Arc<Chart>, name: &str) -> MixedForm {
    let v = c.symbol(name).unwrap();
    MixedForm::differential(c, &v).unwrap()
}

pub fn wedge(a: &MixedForm, b: &MixedForm) -> MixedForm {
    a.wedge(b).unwrap()
}

pub fn add(a: &MixedForm, b: &MixedForm) -> MixedForm {
    a.add(b).unwrap()
}

pub fn cst(n: i64, den: i64) -> GaussRat {
    GaussRat::from_ratio(n, den)
}

pub fn bump(name: &str, lo: (i64, i64), hi: (i64, i64)) -> Arc<BumpSpec> {
    Arc::new(BumpSpec::new(name, rat(lo.0, lo.1), rat(hi.0, hi.1)))
}

pub fn region(name: &str, cs: &[(Quantity, Cmp, BigRational)]) -> Region {
    Region {
        name: name.into(),
        constraints: cs.iter().map(|(q, c, v)| Constraint { quantity: q.clone(), cmp: *c, value: v.clone() }).collect(),
    }
}

pub fn modulus(n: &str) -> Quantity {
    Quantity::Modulus(n.into())
}

pub fn coord(n: &str) -> Quantity {
    Quantity::Coord(n.into())
}

pub fn cval(re: i64, im: i64, den: i64) -> CoordValue {
    CoordValue::Complex(GaussRat::new(rat(re, den), rat(im, den)))
}

/// The standard symplectic form dx3∧dy3 + dx4∧dy4.
pub fn omega0(c: &Arc<Chart>) -> MixedForm {
    add(&wedge(&d(c, "x3"), &d(c, "y3")), &wedge(&d(c, "x4"), &d(c, "y4")))
}

/// (z1 + dz1∧dz2) ∧ exp(i ω0).
pub fn local_model_spinor(c: &Arc<Chart>) -> MixedForm {
    let base = add(&MixedForm::scalar(c, holo("z1")), &wedge(&d(c, "z1"), &d(c, "z2")));
    wedge(&base, &omega0(c).scale(&Expr::i()).exp().unwrap())
}

/// Polar chart (r, th0, th1, th2) around the surgered torus.
pub fn polar() -> Arc<Chart> {
    chart("P", &[("r", CoordKind::Radial), ("th0", CoordKind::Angle), ("th1", CoordKind::Angle), ("th2", CoordKind::Angle)])
}

pub fn target() -> Arc<Chart> {
    chart("T", &[("R", CoordKind::Radial), ("T0", CoordKind::Angle), ("T1", CoordKind::Angle), ("T2", CoordKind::Angle)])
}

pub fn annulus() -> Region {
    region("ann", &[(coord("r"), Cmp::Gt, rat(1, 2)), (coord("r"), Cmp::Lt, rat(1, 1))])
}

pub fn to_complex(p: &Arc<Chart>, c: &Arc<Chart>) -> CoordinateMap {
    let z1 = real("r").mul(&Expr::apply(Func::Exp, &Expr::i().mul(&real("th0"))));
    let z2 = real("th1").add(&Expr::i().mul(&real("th2")));
    CoordinateMap::new("polar", p, c, &[("z1".into(), z1), ("z2".into(), z2)], Region::default()).unwrap()
}

pub fn gluing(p: &Arc<Chart>, t: &Arc<Chart>, s: SurgeryParams, scale: i64) -> CoordinateMap {
    let radial = Expr::apply(Func::Sqrt, &Expr::apply(Func::Log, &real("r").scale(&cst(4, 1))).scale(&cst(scale, 1)));
    let images = vec![
        ("R".to_string(), radial),
        ("T0".to_string(), real("th0").scale(&cst(s.p, 1)).add(&real("th2").scale(&cst(s.a, 1)))),
        ("T1".to_string(), real("th1")),
        ("T2".to_string(), real("th0").scale(&cst(s.q, 1)).add(&real("th2").scale(&cst(s.b, 1)))),
    ];
    CoordinateMap::new("phi", p, t, &images, annulus()).unwrap()
}

pub fn omega_tilde(t: &Arc<Chart>) -> MixedForm {
    add(&wedge(&d(t, "R"), &d(t, "T0")).scale(&real("R")), &wedge(&d(t, "T1"), &d(t, "T2")))
}

pub fn b0(p: &Arc<Chart>, s: SurgeryParams) -> MixedForm {
    let dlogr = d(p, "r").scale(&real("r").pow(-1));
    add(
        &wedge(&dlogr, &d(p, "th1")).scale_const(&cst(-s.q, 1)),
        &wedge(&d(p, "th0"), &d(p, "th2")).scale_const(&cst(-s.a, 2)),
    )
}

