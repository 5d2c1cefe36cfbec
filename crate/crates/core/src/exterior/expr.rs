//! Exact symbolic scalars.
//!
//! An [`Expr`] is kept in a canonical expanded form: a finite sum of
//! Gaussian-rational multiples of Laurent monomials over *atoms*. Atoms are
//! coordinate symbols, transcendental function applications, opaque bump
//! functions, and multi-term sums that occur with a negative exponent.
//! Products are expanded, like bases merge their exponents, and multi-term
//! inverse bases are normalised to leading coefficient one, so `z·(2z)⁻¹`
//! collapses to `1/2` structurally.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use super::number::{GaussRat, Value};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("symbol `{0}` has no value at this point")]
    Unbound(String),
    #[error("singular evaluation: {0}")]
    Singular(String),
    #[error("bump `{0}` evaluated at a non-real argument {1}")]
    ComplexBumpArgument(String, String),
}

/// How a coordinate symbol behaves under conjugation and differentiation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarKind {
    /// A real coordinate (real, radial or angle).
    Real,
    /// The holomorphic symbol `z` of a complex coordinate.
    Holo,
    /// The conjugate symbol `z̄` of a complex coordinate.
    Anti,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    pub name: Arc<str>,
    pub kind: VarKind,
}

impl Var {
    pub fn real(name: &str) -> Self {
        Var { name: Arc::from(name), kind: VarKind::Real }
    }

    pub fn holo(name: &str) -> Self {
        Var { name: Arc::from(name), kind: VarKind::Holo }
    }

    pub fn anti(name: &str) -> Self {
        Var { name: Arc::from(name), kind: VarKind::Anti }
    }

    pub fn conj(&self) -> Var {
        let kind = match self.kind {
            VarKind::Real => VarKind::Real,
            VarKind::Holo => VarKind::Anti,
            VarKind::Anti => VarKind::Holo,
        };
        Var { name: self.name.clone(), kind }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            VarKind::Anti => write!(f, "{}b", self.name),
            _ => write!(f, "{}", self.name),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Log,
    Exp,
    Sqrt,
    Sin,
    Cos,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Log => "log",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "log" => Func::Log,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            _ => return None,
        })
    }
}

/// An opaque smooth increasing function of one real argument that is
/// identically 0 for `t <= zero_below` and identically 1 for `t >= one_above`.
/// Between the two thresholds it is evaluated with a degree-7 smoothstep.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BumpSpec {
    pub name: Arc<str>,
    pub zero_below: BigRational,
    pub one_above: BigRational,
}

impl BumpSpec {
    pub fn new(name: &str, zero_below: BigRational, one_above: BigRational) -> Self {
        BumpSpec { name: Arc::from(name), zero_below, one_above }
    }

    /// Value of the `order`-th derivative at `t`. Exact inside the constant
    /// regions.
    pub fn eval(&self, order: u32, t: f64) -> Value {
        let lo = self.zero_below.to_f64().unwrap_or(0.0);
        let hi = self.one_above.to_f64().unwrap_or(1.0);
        if t <= lo {
            return Value::zero();
        }
        if t >= hi {
            return if order == 0 { Value::one() } else { Value::zero() };
        }
        let w = hi - lo;
        let u = (t - lo) / w;
        Value::Float(Complex64::new(smoothstep7(order, u) / w.powi(order as i32), 0.0))
    }
}

// S(u) = 35u^4 - 84u^5 + 70u^6 - 20u^7, with its derivatives.
fn smoothstep7(order: u32, u: f64) -> f64 {
    let mut coeffs: Vec<f64> = vec![0.0, 0.0, 0.0, 0.0, 35.0, -84.0, 70.0, -20.0];
    for _ in 0..order {
        coeffs = coeffs.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect();
        if coeffs.is_empty() {
            return 0.0;
        }
    }
    coeffs.iter().rev().fold(0.0, |acc, c| acc * u + c)
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Var(Var),
    Func(Func, Arc<Expr>),
    Bump { spec: Arc<BumpSpec>, order: u32, arg: Arc<Expr> },
    /// A sum with at least two terms and leading coefficient one; only ever
    /// carries negative exponents.
    Sum(Arc<Expr>),
}

type Monomial = Vec<(Atom, i64)>;

/// Canonical symbolic scalar. See the module documentation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Expr {
    terms: BTreeMap<Monomial, GaussRat>,
}

fn merge_monomials(a: &Monomial, b: &Monomial) -> Monomial {
    let mut out: Monomial = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j].clone());
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                let e = a[i].1 + b[j].1;
                if e != 0 {
                    out.push((a[i].0.clone(), e));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

fn needs_normalizing(m: &Monomial) -> bool {
    let mut exps = 0;
    for (a, e) in m {
        match a {
            Atom::Func(Func::Sqrt, _) if e.abs() >= 2 => return true,
            Atom::Func(Func::Exp, _) => {
                if *e != 1 {
                    return true;
                }
                exps += 1;
            }
            _ => {}
        }
    }
    exps >= 2
}

impl Expr {
    pub fn zero() -> Self {
        Expr::default()
    }

    pub fn one() -> Self {
        Expr::constant(GaussRat::one())
    }

    pub fn i() -> Self {
        Expr::constant(GaussRat::i())
    }

    pub fn int(n: i64) -> Self {
        Expr::constant(GaussRat::from_int(n))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Expr::constant(GaussRat::from_ratio(n, d))
    }

    pub fn constant(c: GaussRat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Vec::new(), c);
        }
        Expr { terms }
    }

    pub fn var(v: Var) -> Self {
        Expr::atom(Atom::Var(v), 1)
    }

    fn atom(a: Atom, e: i64) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![(a, e)], GaussRat::one());
        Expr { terms }
    }

    fn from_term(m: Monomial, c: GaussRat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Expr { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// The constant value if the expression has no atoms.
    pub fn as_constant(&self) -> Option<GaussRat> {
        match self.terms.len() {
            0 => Some(GaussRat::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_empty().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn add(&self, o: &Expr) -> Expr {
        let (big, small) = if self.terms.len() >= o.terms.len() { (self, o) } else { (o, self) };
        let mut terms = big.terms.clone();
        for (m, c) in &small.terms {
            match terms.get_mut(m) {
                Some(x) => {
                    *x = &*x + c;
                    if x.is_zero() {
                        terms.remove(m);
                    }
                }
                None => {
                    terms.insert(m.clone(), c.clone());
                }
            }
        }
        Expr { terms }
    }

    pub fn neg(&self) -> Expr {
        Expr { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub fn sub(&self, o: &Expr) -> Expr {
        self.add(&o.neg())
    }

    pub fn scale(&self, k: &GaussRat) -> Expr {
        if k.is_zero() {
            return Expr::zero();
        }
        Expr { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect() }
    }

    fn add_term(terms: &mut BTreeMap<Monomial, GaussRat>, m: Monomial, c: GaussRat) {
        if c.is_zero() {
            return;
        }
        match terms.get_mut(&m) {
            Some(x) => {
                *x = &*x + &c;
                if x.is_zero() {
                    terms.remove(&m);
                }
            }
            None => {
                terms.insert(m, c);
            }
        }
    }

    pub fn mul(&self, o: &Expr) -> Expr {
        let mut terms = BTreeMap::new();
        let mut deferred: Vec<Expr> = Vec::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                let m = merge_monomials(m1, m2);
                let c = c1 * c2;
                if needs_normalizing(&m) {
                    deferred.push(Expr::normalize_monomial(m, c));
                } else {
                    Expr::add_term(&mut terms, m, c);
                }
            }
        }
        let mut out = Expr { terms };
        for d in deferred {
            out = out.add(&d);
        }
        out
    }

    // sqrt(u)^e with |e| >= 2 becomes sqrt(u)^(e mod 2) * u^(e div 2), and
    // all exponentials of a monomial merge into one.
    fn normalize_monomial(m: Monomial, c: GaussRat) -> Expr {
        let mut rest: Monomial = Vec::new();
        let mut extra = Expr::constant(c);
        let mut exponent = Expr::zero();
        let mut has_exp = false;
        for (a, e) in m {
            match &a {
                Atom::Func(Func::Exp, u) => {
                    has_exp = true;
                    exponent = exponent.add(&u.scale(&GaussRat::from_int(e)));
                }
                Atom::Func(Func::Sqrt, u) if e.abs() >= 2 => {
                    let k = e / 2;
                    let r = e % 2;
                    extra = extra.mul(&u.pow(k));
                    if r != 0 {
                        rest.push((a, r));
                    }
                }
                _ => rest.push((a, e)),
            }
        }
        rest.sort();
        let mut out = Expr::from_term(rest, GaussRat::one()).mul(&extra);
        if has_exp {
            out = out.mul(&Expr::apply(Func::Exp, &exponent));
        }
        out
    }

    /// Integer power. Negative powers of multi-term sums become inverse
    /// atoms; negative powers of a structural zero return zero's inverse as
    /// `None` through [`Expr::try_pow`].
    pub fn pow(&self, e: i64) -> Expr {
        self.try_pow(e).expect("negative power of structural zero")
    }

    pub fn try_pow(&self, e: i64) -> Option<Expr> {
        if e == 0 {
            return Some(Expr::one());
        }
        if e == 1 {
            return Some(self.clone());
        }
        if self.is_zero() {
            return if e > 0 { Some(Expr::zero()) } else { None };
        }
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            let c = c.powi(e)?;
            let m: Monomial = m.iter().map(|(a, k)| (a.clone(), k * e)).collect();
            if needs_normalizing(&m) {
                return Some(Expr::normalize_monomial(m, c));
            }
            return Some(Expr::from_term(m, c));
        }
        if e > 0 {
            let mut acc = Expr::one();
            let mut base = self.clone();
            let mut k = e;
            while k > 0 {
                if k & 1 == 1 {
                    acc = acc.mul(&base);
                }
                k >>= 1;
                if k > 0 {
                    base = base.mul(&base);
                }
            }
            return Some(acc);
        }
        let lead = self.terms.values().next().unwrap().clone();
        let normalized = self.scale(&lead.inv()?);
        let scale = lead.powi(e)?;
        Some(Expr::from_term(vec![(Atom::Sum(Arc::new(normalized)), e)], scale))
    }

    pub fn inv(&self) -> Option<Expr> {
        self.try_pow(-1)
    }

    pub fn div(&self, o: &Expr) -> Option<Expr> {
        Some(self.mul(&o.inv()?))
    }

    pub fn apply(f: Func, u: &Expr) -> Expr {
        if let Some(c) = u.as_constant() {
            match f {
                Func::Exp if c.is_zero() => return Expr::one(),
                Func::Log if c.is_one() => return Expr::zero(),
                Func::Sqrt => {
                    if let Some(r) = c.exact_sqrt() {
                        return Expr::constant(r);
                    }
                }
                Func::Sin if c.is_zero() => return Expr::zero(),
                Func::Cos if c.is_zero() => return Expr::one(),
                _ => {}
            }
        }
        Expr::atom(Atom::Func(f, Arc::new(u.clone())), 1)
    }

    pub fn bump(spec: &Arc<BumpSpec>, order: u32, arg: &Expr) -> Expr {
        Expr::atom(Atom::Bump { spec: spec.clone(), order, arg: Arc::new(arg.clone()) }, 1)
    }

    /// Partial derivative with respect to a coordinate symbol (`z` and `z̄`
    /// are independent symbols, so this is the Wirtinger derivative).
    pub fn diff(&self, v: &Var) -> Expr {
        let mut out = Expr::zero();
        for (m, c) in &self.terms {
            for (k, (a, e)) in m.iter().enumerate() {
                let da = a.diff(v);
                if da.is_zero() {
                    continue;
                }
                let mut rest: Monomial = Vec::with_capacity(m.len());
                for (j, (b, f)) in m.iter().enumerate() {
                    if j == k {
                        if *e != 1 {
                            rest.push((b.clone(), e - 1));
                        }
                    } else {
                        rest.push((b.clone(), *f));
                    }
                }
                let coeff = c * &GaussRat::from_int(*e);
                let term = if needs_normalizing(&rest) {
                    Expr::normalize_monomial(rest, coeff)
                } else {
                    Expr::from_term(rest, coeff)
                };
                out = out.add(&term.mul(&da));
            }
        }
        out
    }

    /// Whether the expression mentions the symbol anywhere.
    pub fn depends_on(&self, v: &Var) -> bool {
        self.terms.keys().any(|m| m.iter().any(|(a, _)| a.depends_on(v)))
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_vars(&self, out: &mut Vec<Var>) {
        for m in self.terms.keys() {
            for (a, _) in m {
                match a {
                    Atom::Var(v) => out.push(v.clone()),
                    Atom::Func(_, u) | Atom::Sum(u) => u.collect_vars(out),
                    Atom::Bump { arg, .. } => arg.collect_vars(out),
                }
            }
        }
    }

    /// True when some term divides by a bump value, so the expression
    /// blows up wherever that bump vanishes.
    pub fn divides_by_bump(&self) -> bool {
        self.terms.keys().any(|m| {
            m.iter().any(|(a, e)| match a {
                Atom::Bump { .. } => *e < 0,
                Atom::Sum(u) => u.terms.keys().any(|n| n.iter().any(|(b, _)| matches!(b, Atom::Bump { .. }))),
                Atom::Func(_, u) => u.divides_by_bump(),
                Atom::Var(_) => false,
            })
        })
    }

    /// True when the expression contains only polynomial / rational
    /// structure (no transcendental or opaque atoms).
    pub fn is_algebraic(&self) -> bool {
        self.terms.keys().all(|m| {
            m.iter().all(|(a, _)| match a {
                Atom::Var(_) => true,
                Atom::Sum(u) => u.is_algebraic(),
                _ => false,
            })
        })
    }

    pub fn conj(&self) -> Expr {
        let mut out = Expr::zero();
        for (m, c) in &self.terms {
            let mut t = Expr::constant(c.conj());
            for (a, e) in m {
                t = t.mul(&a.conj().pow(*e));
            }
            out = out.add(&t);
        }
        out
    }

    pub fn re(&self) -> Expr {
        self.add(&self.conj()).scale(&GaussRat::from_ratio(1, 2))
    }

    pub fn im(&self) -> Expr {
        self.sub(&self.conj()).scale(&GaussRat::new(BigRational::zero(), BigRational::new((-1).into(), 2.into())))
    }

    pub fn substitute(&self, map: &HashMap<Var, Expr>) -> Expr {
        let mut out = Expr::zero();
        for (m, c) in &self.terms {
            let mut t = Expr::constant(c.clone());
            for (a, e) in m {
                t = t.mul(&a.substitute(map).pow(*e));
            }
            out = out.add(&t);
        }
        out
    }

    /// Evaluate at a point. Terms containing a bump that vanishes on a
    /// neighbourhood of the point are zero regardless of their other factors.
    pub fn eval(&self, point: &HashMap<Var, Value>) -> Result<Value, EvalError> {
        Ok(self.eval_scaled(point)?.0)
    }

    /// Evaluate, also returning the sum of absolute values of the individual
    /// terms (the scale against which a floating zero test is judged).
    pub fn eval_scaled(&self, point: &HashMap<Var, Value>) -> Result<(Value, f64), EvalError> {
        let mut acc = Value::zero();
        let mut scale = 0.0;
        'terms: for (m, c) in &self.terms {
            let mut factors = Vec::with_capacity(m.len());
            for (a, e) in m {
                if let Atom::Bump { .. } = a {
                    let v = a.eval(point)?;
                    if v.is_exact_zero() && *e > 0 {
                        continue 'terms;
                    }
                    factors.push((v, *e, a));
                }
            }
            let mut t = Value::Exact(c.clone());
            for (a, e) in m {
                let v = match a {
                    Atom::Bump { .. } => factors.iter().find(|(_, _, b)| *b == a).unwrap().0.clone(),
                    _ => a.eval(point)?,
                };
                let p = v
                    .powi(*e)
                    .ok_or_else(|| EvalError::Singular(format!("({a})**{e} with zero base")))?;
                t = t.mul(&p);
            }
            scale += t.to_c64().norm();
            acc = acc.add(&t);
        }
        Ok((acc, scale))
    }

    /// View as a polynomial in `v`: coefficients by power, each free of `v`
    /// and its conjugate. `None` if `v` occurs non-polynomially.
    pub fn coefficients_in(&self, v: &Var) -> Option<BTreeMap<i64, Expr>> {
        let cv = v.conj();
        let mut out: BTreeMap<i64, Expr> = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut power = 0;
            let mut rest: Monomial = Vec::with_capacity(m.len());
            for (a, e) in m {
                match a {
                    Atom::Var(w) if w == v => {
                        if *e < 0 {
                            return None;
                        }
                        power = *e;
                    }
                    _ => {
                        if a.depends_on(v) || a.depends_on(&cv) {
                            return None;
                        }
                        rest.push((a.clone(), *e));
                    }
                }
            }
            let t = Expr::from_term(rest, c.clone());
            let entry = out.entry(power).or_default();
            *entry = entry.add(&t);
        }
        out.retain(|_, e| !e.is_zero());
        Some(out)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<(Atom, i64)>, &GaussRat)> {
        self.terms.iter()
    }
}

impl Atom {
    fn diff(&self, v: &Var) -> Expr {
        match self {
            Atom::Var(w) => {
                if w == v {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Atom::Func(f, u) => {
                let du = u.diff(v);
                if du.is_zero() {
                    return Expr::zero();
                }
                let outer = match f {
                    Func::Log => u.pow(-1),
                    Func::Exp => Expr::apply(Func::Exp, u),
                    Func::Sqrt => Expr::apply(Func::Sqrt, u).pow(-1).scale(&GaussRat::from_ratio(1, 2)),
                    Func::Sin => Expr::apply(Func::Cos, u),
                    Func::Cos => Expr::apply(Func::Sin, u).neg(),
                };
                outer.mul(&du)
            }
            Atom::Bump { spec, order, arg } => {
                let da = arg.diff(v);
                if da.is_zero() {
                    return Expr::zero();
                }
                Expr::bump(spec, order + 1, arg).mul(&da)
            }
            Atom::Sum(u) => u.diff(v),
        }
    }

    fn depends_on(&self, v: &Var) -> bool {
        match self {
            Atom::Var(w) => w == v,
            Atom::Func(_, u) | Atom::Sum(u) => u.depends_on(v),
            Atom::Bump { arg, .. } => arg.depends_on(v),
        }
    }

    fn conj(&self) -> Expr {
        match self {
            Atom::Var(v) => Expr::var(v.conj()),
            Atom::Func(f, u) => Expr::apply(*f, &u.conj()),
            Atom::Bump { spec, order, arg } => Expr::bump(spec, *order, &arg.conj()),
            Atom::Sum(u) => u.conj(),
        }
    }

    fn substitute(&self, map: &HashMap<Var, Expr>) -> Expr {
        match self {
            Atom::Var(v) => map.get(v).cloned().unwrap_or_else(|| Expr::var(v.clone())),
            Atom::Func(f, u) => Expr::apply(*f, &u.substitute(map)),
            Atom::Bump { spec, order, arg } => Expr::bump(spec, *order, &arg.substitute(map)),
            Atom::Sum(u) => u.substitute(map),
        }
    }

    fn eval(&self, point: &HashMap<Var, Value>) -> Result<Value, EvalError> {
        match self {
            Atom::Var(v) => point.get(v).cloned().ok_or_else(|| EvalError::Unbound(v.to_string())),
            Atom::Sum(u) => u.eval(point),
            Atom::Func(f, u) => {
                let x = u.eval(point)?;
                if let Value::Exact(q) = &x {
                    match f {
                        Func::Exp if q.is_zero() => return Ok(Value::one()),
                        Func::Log if q.is_one() => return Ok(Value::zero()),
                        Func::Log if q.is_zero() => {
                            return Err(EvalError::Singular(format!("log({u}) at zero")))
                        }
                        Func::Sqrt => {
                            if let Some(r) = q.exact_sqrt() {
                                return Ok(Value::Exact(r));
                            }
                        }
                        Func::Sin if q.is_zero() => return Ok(Value::zero()),
                        Func::Cos if q.is_zero() => return Ok(Value::one()),
                        _ => {}
                    }
                }
                let c = x.to_c64();
                Ok(Value::Float(match f {
                    Func::Exp => c.exp(),
                    Func::Log => {
                        if c.norm() == 0.0 {
                            return Err(EvalError::Singular(format!("log({u}) at zero")));
                        }
                        c.ln()
                    }
                    Func::Sqrt => c.sqrt(),
                    Func::Sin => c.sin(),
                    Func::Cos => c.cos(),
                }))
            }
            Atom::Bump { spec, order, arg } => {
                let x = arg.eval(point)?.to_c64();
                if x.im.abs() > 1e-9 * (1.0 + x.re.abs()) {
                    return Err(EvalError::ComplexBumpArgument(spec.name.to_string(), format!("{x}")));
                }
                Ok(spec.eval(*order, x.re))
            }
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Var(v) => write!(f, "{v}"),
            Atom::Func(g, u) => write!(f, "{}({u})", g.name()),
            Atom::Bump { spec, order, arg } => {
                write!(f, "{}{}({arg})", spec.name, "'".repeat(*order as usize))
            }
            Atom::Sum(u) => write!(f, "({u})"),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let (neg, mag) = if c.is_real() && c.re.is_negative() { (true, -c) } else { (false, c.clone()) };
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            let mut parts: Vec<String> = Vec::new();
            if !mag.is_one() || m.is_empty() {
                parts.push(mag.to_string());
            }
            for (a, e) in m {
                if *e == 1 {
                    parts.push(a.to_string());
                } else {
                    parts.push(format!("{a}**{e}"));
                }
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

/// Convert a real rational to an expression constant.
pub fn rat_expr(r: &BigRational) -> Expr {
    Expr::constant(GaussRat::real(r.clone()))
}

/// A real value as a float, for thresholds.
pub fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> Expr {
        Expr::var(Var::holo("z"))
    }
    fn zb() -> Expr {
        Expr::var(Var::anti("z"))
    }
    fn x() -> Expr {
        Expr::var(Var::real("x"))
    }

    #[test]
    fn polynomial_coefficients() {
        let w = Var::holo("w");
        let e = Expr::var(w.clone()).pow(2).scale(&GaussRat::from_int(3)).add(&z()).add(&Expr::int(1));
        let c = e.coefficients_in(&w).unwrap();
        assert_eq!(c[&2], Expr::int(3));
        assert_eq!(c[&0], z().add(&Expr::int(1)));
        assert!(Expr::var(w.conj()).coefficients_in(&w).is_none());
        assert!(Expr::var(w.clone()).pow(-1).coefficients_in(&w).is_none());
    }

    #[test]
    fn exponentials_merge() {
        let t = Expr::var(Var::real("t"));
        let a = Expr::apply(Func::Exp, &Expr::i().mul(&t));
        let b = Expr::apply(Func::Exp, &Expr::i().mul(&t).neg());
        assert_eq!(a.mul(&b), Expr::one());
        assert_eq!(a.pow(2), Expr::apply(Func::Exp, &Expr::i().mul(&t).scale(&GaussRat::from_int(2))));
        assert_eq!(a.diff(&Var::real("t")), a.mul(&Expr::i()));
    }

    #[test]
    fn cancels_like_bases() {
        let e = z().mul(&z().scale(&GaussRat::from_int(2)).inv().unwrap());
        assert_eq!(e, Expr::ratio(1, 2));
    }

    #[test]
    fn expands_products() {
        let s = x().add(&Expr::one());
        let sq = s.mul(&s);
        let expected = x().mul(&x()).add(&x().scale(&GaussRat::from_int(2))).add(&Expr::one());
        assert_eq!(sq, expected);
    }

    #[test]
    fn sum_inverse_is_normalised() {
        let s = x().scale(&GaussRat::from_int(2)).add(&Expr::int(2));
        let a = s.inv().unwrap();
        let b = x().add(&Expr::one()).inv().unwrap().scale(&GaussRat::from_ratio(1, 2));
        assert_eq!(a, b);
    }

    #[test]
    fn wirtinger_derivatives() {
        let e = z().mul(&zb());
        assert_eq!(e.diff(&Var::holo("z")), zb());
        assert_eq!(e.diff(&Var::anti("z")), z());
        assert!(z().diff(&Var::anti("z")).is_zero());
    }

    #[test]
    fn sqrt_square_collapses() {
        let u = z().mul(&zb());
        let s = Expr::apply(Func::Sqrt, &u);
        assert_eq!(s.mul(&s), u);
        // d sqrt(u) * 2 sqrt(u) = du
        let d = s.diff(&Var::holo("z")).mul(&s).scale(&GaussRat::from_int(2));
        assert_eq!(d, zb());
    }

    #[test]
    fn chain_rule_through_opaque_bump() {
        let spec = Arc::new(BumpSpec::new("xi", BigRational::new(1.into(), 4.into()), BigRational::new(1.into(), 2.into())));
        let r = Expr::var(Var::real("r"));
        let e = Expr::bump(&spec, 0, &r.mul(&r));
        let d = e.diff(&Var::real("r"));
        let expected = Expr::bump(&spec, 1, &r.mul(&r)).mul(&r.scale(&GaussRat::from_int(2)));
        assert_eq!(d, expected);
    }

    #[test]
    fn conjugation_swaps_symbols() {
        let e = z().mul(&Expr::i()).add(&x());
        let c = e.conj();
        assert_eq!(c, zb().mul(&Expr::i().neg()).add(&x()));
        assert_eq!(c.conj(), e);
    }

    #[test]
    fn bump_zero_region_annihilates_singular_term() {
        let spec = Arc::new(BumpSpec::new("xi", BigRational::new(1.into(), 4.into()), BigRational::new(1.into(), 2.into())));
        let t = Expr::apply(Func::Sqrt, &z().mul(&zb()));
        let e = Expr::bump(&spec, 0, &t).mul(&zb().inv().unwrap());
        let mut pt = HashMap::new();
        pt.insert(Var::holo("z"), Value::zero());
        pt.insert(Var::anti("z"), Value::zero());
        assert_eq!(e.eval(&pt).unwrap(), Value::zero());
        let bare = zb().inv().unwrap();
        assert!(matches!(bare.eval(&pt), Err(EvalError::Singular(_))));
    }

    #[test]
    fn smoothstep_is_consistent_with_its_derivative() {
        let h = 1e-6;
        for k in 1..10 {
            let u = k as f64 / 10.0;
            let fd = (smoothstep7(0, u + h) - smoothstep7(0, u - h)) / (2.0 * h);
            assert!((fd - smoothstep7(1, u)).abs() < 1e-6);
        }
        assert_eq!(smoothstep7(0, 0.0), 0.0);
        assert!((smoothstep7(0, 1.0) - 1.0).abs() < 1e-12);
    }
}
