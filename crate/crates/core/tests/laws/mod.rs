//! Generators and law checks for the exterior calculus, shared by the
//! property tests and the acceptance run.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use gcx::exterior::chart::{Chart, Coord, CoordKind, Region};
use gcx::exterior::equality::{form_zero, SampleConfig};
use gcx::exterior::expr::{Expr, Func, Var};
use gcx::exterior::form::{blade_degree, MixedForm};
use gcx::exterior::map::CoordinateMap;
use gcx::exterior::number::GaussRat;
use gcx::exterior::section::{courant_bracket, pairing, GeneralizedSection, VectorField};
use num_rational::BigRational;
use proptest::prelude::*;

pub fn cfg() -> SampleConfig {
    SampleConfig::default().with_samples(8)
}

pub fn chart(name: &str, coords: &[(&str, CoordKind)]) -> Arc<Chart> {
    Chart::new(name, coords.iter().map(|(n, k)| Coord { name: n.to_string(), kind: *k }).collect()).unwrap()
}

/// x, y, u real and z complex: five slots.
pub fn mixed_chart() -> Arc<Chart> {
    chart("m", &[("x", CoordKind::Real), ("y", CoordKind::Real), ("u", CoordKind::Real), ("z", CoordKind::Complex)])
}

pub fn real3(name: &str, coords: [&str; 3]) -> Arc<Chart> {
    chart(name, &coords.map(|c| (c, CoordKind::Real)))
}

/// A term `c · Π vᵢ^{eᵢ}`, optionally times `sin(v)` or `exp(v)`.
#[derive(Clone, Debug)]
pub struct Term {
    pub c: (i64, i64),
    pub exps: Vec<u32>,
    pub func: Option<(u8, usize)>,
}

pub type FormSpec = Vec<(u64, Vec<Term>)>;
pub type VectorSpec = Vec<Vec<Term>>;

pub fn term(nvars: usize) -> impl Strategy<Value = Term> {
    (
        (-3i64..=3, -2i64..=2),
        prop::collection::vec(0u32..=2, nvars),
        prop::option::weighted(0.2, (0u8..2, 0..nvars)),
    )
        .prop_map(|(c, exps, func)| Term { c, exps, func })
}

pub fn poly(nvars: usize) -> impl Strategy<Value = Vec<Term>> {
    prop::collection::vec(term(nvars), 1..=3)
}

/// Map images: multilinear with at most two terms, so composites stay small.
pub fn image(nvars: usize) -> impl Strategy<Value = Vec<Term>> {
    let t = (
        (-3i64..=3, Just(0i64)),
        prop::collection::vec(0u32..=1, nvars),
        prop::option::weighted(0.2, (Just(0u8), 0..nvars)),
    )
        .prop_map(|(c, exps, func)| Term { c, exps, func });
    prop::collection::vec(t, 1..=2)
}

pub fn build(terms: &[Term], vars: &[Var]) -> Expr {
    let mut out = Expr::zero();
    for t in terms {
        let mut e = Expr::constant(GaussRat::new(
            BigRational::from_integer(t.c.0.into()),
            BigRational::from_integer(t.c.1.into()),
        ));
        for (v, k) in vars.iter().zip(&t.exps) {
            e = e.mul(&Expr::var(v.clone()).pow(*k as i64));
        }
        if let Some((f, j)) = t.func {
            let f = if f == 0 { Func::Sin } else { Func::Exp };
            e = e.mul(&Expr::apply(f, &Expr::var(vars[j].clone())));
        }
        out = out.add(&e);
    }
    out
}

/// Random form: a list of (blade, coefficient) pairs.
pub fn form_spec(dim: usize, nvars: usize) -> impl Strategy<Value = FormSpec> {
    prop::collection::vec((0u64..(1u64 << dim), poly(nvars)), 0..=4)
}

pub fn homogeneous_spec(dim: usize, nvars: usize, deg: usize) -> impl Strategy<Value = FormSpec> {
    form_spec(dim, nvars).prop_map(move |v| v.into_iter().filter(|(b, _)| blade_degree(*b) == deg).collect())
}

pub fn build_form(c: &Arc<Chart>, spec: &[(u64, Vec<Term>)]) -> MixedForm {
    let vars = c.vars();
    let mut out = MixedForm::zero(c);
    for (b, t) in spec {
        let slots: Vec<usize> = (0..c.dim()).filter(|k| b >> k & 1 == 1).collect();
        out = out.add(&MixedForm::monomial(c, &slots, build(t, &vars))).unwrap();
    }
    out
}

pub fn build_vector(c: &Arc<Chart>, comps: &[Vec<Term>]) -> VectorField {
    let vars = c.vars();
    VectorField::from_components(c, comps.iter().enumerate().map(|(k, t)| (k, build(t, &vars))))
}

pub fn vector_spec(dim: usize, nvars: usize) -> impl Strategy<Value = VectorSpec> {
    prop::collection::vec(poly(nvars), dim)
}

fn assert_zero(f: &MixedForm, what: &str) -> Result<(), TestCaseError> {
    let v = form_zero(f, &Region::default(), &cfg()).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert!(v.holds(), "{what}: {f} ({v:?})");
    Ok(())
}

fn sign(deg: usize) -> Expr {
    if deg.is_multiple_of(2) {
        Expr::one()
    } else {
        Expr::int(-1)
    }
}

pub fn d_squared(spec: &FormSpec) -> Result<(), TestCaseError> {
    let c = mixed_chart();
    let a = build_form(&c, spec);
    let dd = a.d().d();
    prop_assert!(dd.is_zero(), "d(d a) = {dd}");
    Ok(())
}

pub fn leibniz_input() -> impl Strategy<Value = (usize, Vec<FormSpec>, FormSpec)> {
    (0usize..=3, prop::collection::vec(form_spec(5, 5), 4), form_spec(5, 5))
}

pub fn leibniz((k, sa, sb): &(usize, Vec<FormSpec>, FormSpec)) -> Result<(), TestCaseError> {
    let c = mixed_chart();
    let a = build_form(&c, &sa.concat()).part(*k);
    let b = build_form(&c, sb);
    let lhs = a.wedge(&b).unwrap().d();
    let rhs = a.d().wedge(&b).unwrap().add(&a.wedge(&b.d()).unwrap().scale(&sign(*k))).unwrap();
    assert_zero(&lhs.sub(&rhs).unwrap(), "Leibniz")
}

pub type PullbackInput = (VectorSpec, VectorSpec, FormSpec, FormSpec);

pub fn pullback_input() -> impl Strategy<Value = PullbackInput> {
    (prop::collection::vec(image(3), 3), prop::collection::vec(image(3), 3), form_spec(3, 3), form_spec(3, 3))
}

/// `f*(a∧b) = f*a ∧ f*b`, `f*da = d f*a` and `(g∘f)* = f*∘g*`.
pub fn pullback_functorial((fi, gi, sa, sb): &PullbackInput) -> Result<(), TestCaseError> {
    let s = real3("s", ["a", "b", "e"]);
    let t = real3("t", ["x", "y", "w"]);
    let u = real3("u", ["p", "q", "r"]);
    let sv = s.vars();
    let tv = t.vars();
    let images = |names: [&str; 3], ps: &VectorSpec, vars: &[Var]| -> Vec<(String, Expr)> {
        names.iter().zip(ps).map(|(n, p)| (n.to_string(), build(p, vars))).collect()
    };
    let f = CoordinateMap::new("f", &s, &t, &images(["x", "y", "w"], fi, &sv), Region::default()).unwrap();
    let g = CoordinateMap::new("g", &t, &u, &images(["p", "q", "r"], gi, &tv), Region::default()).unwrap();
    let a = build_form(&t, sa);
    let b = build_form(&t, sb);
    let fa = f.pullback(&a).unwrap();
    let fb = f.pullback(&b).unwrap();
    assert_zero(&f.pullback(&a.wedge(&b).unwrap()).unwrap().sub(&fa.wedge(&fb).unwrap()).unwrap(), "f*(a^b)")?;
    assert_zero(&f.pullback(&a.d()).unwrap().sub(&fa.d()).unwrap(), "f*(da)")?;
    let c = build_form(&u, sa);
    let gf = f.then(&g).unwrap();
    assert_zero(&gf.pullback(&c).unwrap().sub(&f.pullback(&g.pullback(&c).unwrap()).unwrap()).unwrap(), "(g.f)*")
}

pub fn interior_input() -> impl Strategy<Value = (VectorSpec, FormSpec)> {
    (vector_spec(5, 5), form_spec(5, 5))
}

pub fn interior_squared((xs, sa): &(VectorSpec, FormSpec)) -> Result<(), TestCaseError> {
    let c = mixed_chart();
    let x = build_vector(&c, xs);
    let a = build_form(&c, sa);
    let ii = x.interior(&x.interior(&a).unwrap()).unwrap();
    assert_zero(&ii, "i_X i_X")
}

pub fn antiderivation_input() -> impl Strategy<Value = (usize, VectorSpec, FormSpec, FormSpec)> {
    (0usize..=3, vector_spec(5, 5), form_spec(5, 5), form_spec(5, 5))
}

pub fn interior_antiderivation((k, xs, sa, sb): &(usize, VectorSpec, FormSpec, FormSpec)) -> Result<(), TestCaseError> {
    let c = mixed_chart();
    let x = build_vector(&c, xs);
    let a = build_form(&c, sa).part(*k);
    let b = build_form(&c, sb);
    let lhs = x.interior(&a.wedge(&b).unwrap()).unwrap();
    let rhs = x
        .interior(&a)
        .unwrap()
        .wedge(&b)
        .unwrap()
        .add(&a.wedge(&x.interior(&b).unwrap()).unwrap().scale(&sign(*k)))
        .unwrap();
    assert_zero(&lhs.sub(&rhs).unwrap(), "i_X(a^b)")
}

pub type PairingInput = ([VectorSpec; 3], [FormSpec; 3], Vec<Term>);

pub fn pairing_input() -> impl Strategy<Value = PairingInput> {
    (
        [vector_spec(5, 5), vector_spec(5, 5), vector_spec(5, 5)],
        [homogeneous_spec(5, 5, 1), homogeneous_spec(5, 5, 1), homogeneous_spec(5, 5, 1)],
        poly(5),
    )
}

/// Symmetry, bilinearity over functions, and `⟨s,s⟩ = ξ(X)`.
pub fn pairing_laws((vs, fs, k): &PairingInput) -> Result<(), TestCaseError> {
    let c = mixed_chart();
    let kk = build(k, &c.vars());
    let sec = |i: usize| GeneralizedSection::new(build_vector(&c, &vs[i]), build_form(&c, &fs[i])).unwrap();
    let (a, b, e) = (sec(0), sec(1), sec(2));
    prop_assert_eq!(pairing(&a, &b).unwrap(), pairing(&b, &a).unwrap());
    let be = b.add(&e).unwrap();
    prop_assert_eq!(pairing(&a, &be).unwrap(), pairing(&a, &b).unwrap().add(&pairing(&a, &e).unwrap()));
    let kb = GeneralizedSection::new(b.x.scale(&kk), b.xi.scale(&kk)).unwrap();
    prop_assert_eq!(pairing(&a, &kb).unwrap(), pairing(&a, &b).unwrap().mul(&kk));
    let own = a.x.interior(&a.xi).unwrap().scalar_part();
    prop_assert_eq!(pairing(&a, &a).unwrap(), own);
    Ok(())
}

pub fn exp_input() -> impl Strategy<Value = [FormSpec; 4]> {
    [homogeneous_spec(6, 3, 2), homogeneous_spec(6, 3, 4), homogeneous_spec(6, 3, 2), homogeneous_spec(6, 3, 4)]
}

/// `exp(a + b) = exp(a) ∧ exp(b)` for even forms.
pub fn exp_additive([a2, a4, b2, b4]: &[FormSpec; 4]) -> Result<(), TestCaseError> {
    let c = chart(
        "r6",
        &[
            ("x", CoordKind::Real),
            ("y", CoordKind::Real),
            ("u", CoordKind::Real),
            ("v", CoordKind::Real),
            ("s", CoordKind::Real),
            ("t", CoordKind::Real),
        ],
    );
    // coefficients in the first three coordinates only
    let short = |s: &[(u64, Vec<Term>)]| -> FormSpec {
        s.iter()
            .map(|(b, t)| {
                let ts = t.iter().map(|t| Term { exps: t.exps[..3].to_vec(), func: t.func.filter(|f| f.1 < 3), c: t.c });
                (*b, ts.collect())
            })
            .collect()
    };
    let a = build_form(&c, &short(&[a2.clone(), a4.clone()].concat()));
    let b = build_form(&c, &short(&[b2.clone(), b4.clone()].concat()));
    let lhs = a.add(&b).unwrap().exp().unwrap();
    let rhs = a.exp().unwrap().wedge(&b.exp().unwrap()).unwrap();
    assert_zero(&lhs.sub(&rhs).unwrap(), "exp(a+b)")
}

/// Components of a 3-form as a fully antisymmetric tensor.
fn tensor3(h: &MixedForm, n: usize) -> BTreeMap<(usize, usize, usize), Expr> {
    let mut out = BTreeMap::new();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if a == b || b == c || a == c {
                    continue;
                }
                let mut idx = [a, b, c];
                let mut s = 1;
                for i in 0..3 {
                    for j in 0..2 - i {
                        if idx[j] > idx[j + 1] {
                            idx.swap(j, j + 1);
                            s = -s;
                        }
                    }
                }
                let blade = (1u64 << idx[0]) | (1u64 << idx[1]) | (1u64 << idx[2]);
                let v = h.coeff(blade);
                out.insert((a, b, c), if s < 0 { v.neg() } else { v });
            }
        }
    }
    out
}

/// Coordinate formula for the twisted Courant bracket of two sections on a
/// real chart: vector part `[X,Y]^k`, covector part
/// `(L_X η − L_Y ξ)_k − ½ ∂_k(η(X) − ξ(Y)) + Y^b X^a H_{abk}`.
#[allow(clippy::needless_range_loop)]
fn courant_oracle(
    c: &Arc<Chart>,
    x: &[Expr],
    xi: &[Expr],
    y: &[Expr],
    eta: &[Expr],
    h: &MixedForm,
) -> (Vec<Expr>, Vec<Expr>) {
    let vars = c.vars();
    let n = vars.len();
    let dv = |e: &Expr, j: usize| e.diff(&vars[j]);
    let mut vec = vec![Expr::zero(); n];
    for k in 0..n {
        for j in 0..n {
            vec[k] = vec[k].add(&x[j].mul(&dv(&y[k], j))).sub(&y[j].mul(&dv(&x[k], j)));
        }
    }
    let mut f = Expr::zero();
    for j in 0..n {
        f = f.add(&eta[j].mul(&x[j])).sub(&xi[j].mul(&y[j]));
    }
    let t = tensor3(h, n);
    let half = GaussRat::from_ratio(1, 2);
    let mut form = vec![Expr::zero(); n];
    for k in 0..n {
        let mut s = Expr::zero();
        for j in 0..n {
            s = s.add(&x[j].mul(&dv(&eta[k], j))).add(&eta[j].mul(&dv(&x[j], k)));
            s = s.sub(&y[j].mul(&dv(&xi[k], j))).sub(&xi[j].mul(&dv(&y[j], k)));
        }
        s = s.sub(&dv(&f, k).scale(&half));
        for a in 0..n {
            for b in 0..n {
                if let Some(h) = t.get(&(a, b, k)) {
                    s = s.add(&y[b].mul(&x[a]).mul(h));
                }
            }
        }
        form[k] = s;
    }
    (vec, form)
}

fn components(f: &MixedForm, n: usize) -> Vec<Expr> {
    (0..n).map(|k| f.coeff(1u64 << k)).collect()
}

pub type CourantInput = ([VectorSpec; 4], Vec<Term>, bool);

pub fn courant_input() -> impl Strategy<Value = CourantInput> {
    ([vector_spec(3, 3), vector_spec(3, 3), vector_spec(3, 3), vector_spec(3, 3)], poly(3), any::<bool>())
}

#[allow(clippy::needless_range_loop)]
pub fn courant_matches_oracle(([xs, ys, xis, etas], hs, with_h): &CourantInput) -> Result<(), TestCaseError> {
    let c = real3("r3", ["x", "y", "w"]);
    let vars = c.vars();
    let ex = |v: &[Vec<Term>]| -> Vec<Expr> { v.iter().map(|t| build(t, &vars)).collect() };
    let (x, y, xi, eta) = (ex(xs), ex(ys), ex(xis), ex(etas));
    let one_form = |cs: &[Expr]| {
        let mut f = MixedForm::zero(&c);
        for (k, e) in cs.iter().enumerate() {
            f = f.add(&MixedForm::monomial(&c, &[k], e.clone())).unwrap();
        }
        f
    };
    let h = if *with_h { MixedForm::monomial(&c, &[0, 1, 2], build(hs, &vars)) } else { MixedForm::zero(&c) };
    let a = GeneralizedSection::new(VectorField::from_components(&c, x.iter().cloned().enumerate()), one_form(&xi)).unwrap();
    let b = GeneralizedSection::new(VectorField::from_components(&c, y.iter().cloned().enumerate()), one_form(&eta)).unwrap();
    let got = courant_bracket(&a, &b, &h).unwrap();
    let (vec, form) = courant_oracle(&c, &x, &xi, &y, &eta, &h);
    for k in 0..3 {
        prop_assert_eq!(got.x.component(k), vec[k].clone(), "vector part {}", k);
    }
    prop_assert_eq!(components(&got.xi, 3), form);
    prop_assert!(got.xi.degrees().iter().all(|d| *d == 1));
    Ok(())
}
