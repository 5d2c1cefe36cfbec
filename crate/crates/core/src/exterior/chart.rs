//! Coordinate charts, coordinate-box regions and seeded point sampling.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::Rng;
use thiserror::Error;

use super::expr::Var;
use super::number::{GaussRat, Value};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChartError {
    #[error("duplicate coordinate name `{0}`")]
    DuplicateCoordinate(String),
    #[error("coordinate name `{0}` collides with a derived symbol")]
    ReservedName(String),
    #[error("unknown coordinate `{0}` on chart `{1}`")]
    UnknownCoordinate(String, String),
    #[error("modulus constraint on non-complex coordinate `{0}`")]
    ModulusOfReal(String),
    #[error("region `{0}` is empty after combining its constraints")]
    EmptyRegion(String),
    #[error("could not sample a point of region `{0}` within budget")]
    SamplingBudget(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CoordKind {
    Real,
    /// Positive real radius.
    Radial,
    /// Periodic angle; its differential is a global 1-form.
    Angle,
    /// Complex coordinate `z = x + iy`, contributing slots `dz` and `dz̄`.
    Complex,
}

impl CoordKind {
    pub fn keyword(self) -> &'static str {
        match self {
            CoordKind::Real => "real",
            CoordKind::Radial => "radial",
            CoordKind::Angle => "angle",
            CoordKind::Complex => "complex",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        Some(match s {
            "real" => CoordKind::Real,
            "radial" => CoordKind::Radial,
            "angle" => CoordKind::Angle,
            "complex" => CoordKind::Complex,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Coord {
    pub name: String,
    pub kind: CoordKind,
}

/// One basis differential of the chart.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Slot {
    pub var: Var,
    pub coord: usize,
}

impl Slot {
    pub fn differential_name(&self) -> String {
        format!("d{}", self.var)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cmp {
    Lt,
    Le,
    Gt,
    Ge,
}

impl Cmp {
    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Gt => ">",
            Cmp::Ge => ">=",
        }
    }

    fn holds(self, a: f64, b: f64) -> bool {
        match self {
            Cmp::Lt => a < b,
            Cmp::Le => a <= b,
            Cmp::Gt => a > b,
            Cmp::Ge => a >= b,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Quantity {
    /// Value of a real/radial/angle coordinate.
    Coord(String),
    /// Modulus of a complex coordinate.
    Modulus(String),
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::Coord(c) => write!(f, "{c}"),
            Quantity::Modulus(c) => write!(f, "|{c}|"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub quantity: Quantity,
    pub cmp: Cmp,
    pub value: BigRational,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.quantity, self.cmp.symbol(), fmt_rational(&self.value))
    }
}

pub fn fmt_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// A conjunction of coordinate inequalities. The empty region is the whole
/// chart domain.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Region {
    pub name: String,
    pub constraints: Vec<Constraint>,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.constraints.is_empty() {
            return write!(f, "everywhere");
        }
        let parts: Vec<String> = self.constraints.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(", "))
    }
}

/// Value assigned to a coordinate when building a point.
#[derive(Clone, Debug, PartialEq)]
pub enum CoordValue {
    Real(BigRational),
    Complex(GaussRat),
}

pub type Point = HashMap<Var, Value>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Chart {
    pub name: String,
    pub coords: Vec<Coord>,
    pub slots: Vec<Slot>,
}

impl Chart {
    pub fn new(name: &str, coords: Vec<Coord>) -> Result<Arc<Chart>, ChartError> {
        let mut seen: Vec<&str> = Vec::new();
        for c in &coords {
            if seen.contains(&c.name.as_str()) {
                return Err(ChartError::DuplicateCoordinate(c.name.clone()));
            }
            seen.push(&c.name);
        }
        for c in &coords {
            if c.kind == CoordKind::Complex && seen.contains(&format!("{}b", c.name).as_str()) {
                return Err(ChartError::ReservedName(format!("{}b", c.name)));
            }
        }
        let mut slots = Vec::new();
        for (k, c) in coords.iter().enumerate() {
            match c.kind {
                CoordKind::Complex => {
                    slots.push(Slot { var: Var::holo(&c.name), coord: k });
                    slots.push(Slot { var: Var::anti(&c.name), coord: k });
                }
                _ => slots.push(Slot { var: Var::real(&c.name), coord: k }),
            }
        }
        Ok(Arc::new(Chart { name: name.to_string(), coords, slots }))
    }

    /// Real dimension (number of basis differentials).
    pub fn dim(&self) -> usize {
        self.slots.len()
    }

    pub fn coord(&self, name: &str) -> Option<&Coord> {
        self.coords.iter().find(|c| c.name == name)
    }

    pub fn slot_of(&self, v: &Var) -> Option<usize> {
        self.slots.iter().position(|s| &s.var == v)
    }

    /// Resolve a symbol name (`x`, `z`, or `zb` for the conjugate).
    pub fn symbol(&self, name: &str) -> Option<Var> {
        for c in &self.coords {
            if c.name == name {
                return Some(match c.kind {
                    CoordKind::Complex => Var::holo(&c.name),
                    _ => Var::real(&c.name),
                });
            }
            if c.kind == CoordKind::Complex && format!("{}b", c.name) == name {
                return Some(Var::anti(&c.name));
            }
        }
        None
    }

    pub fn vars(&self) -> Vec<Var> {
        self.slots.iter().map(|s| s.var.clone()).collect()
    }

    pub fn check_region(&self, region: &Region) -> Result<(), ChartError> {
        for c in &region.constraints {
            match &c.quantity {
                Quantity::Coord(n) => {
                    let co = self
                        .coord(n)
                        .ok_or_else(|| ChartError::UnknownCoordinate(n.clone(), self.name.clone()))?;
                    if co.kind == CoordKind::Complex {
                        return Err(ChartError::UnknownCoordinate(n.clone(), self.name.clone()));
                    }
                }
                Quantity::Modulus(n) => {
                    let co = self
                        .coord(n)
                        .ok_or_else(|| ChartError::UnknownCoordinate(n.clone(), self.name.clone()))?;
                    if co.kind != CoordKind::Complex {
                        return Err(ChartError::ModulusOfReal(n.clone()));
                    }
                }
            }
        }
        Ok(())
    }

    /// Build an evaluation point from explicit coordinate values.
    pub fn point(&self, values: &[(String, CoordValue)]) -> Result<Point, ChartError> {
        let mut p = Point::new();
        for (name, v) in values {
            let co = self
                .coord(name)
                .ok_or_else(|| ChartError::UnknownCoordinate(name.clone(), self.name.clone()))?;
            match (co.kind, v) {
                (CoordKind::Complex, CoordValue::Complex(q)) => {
                    p.insert(Var::holo(name), Value::Exact(q.clone()));
                    p.insert(Var::anti(name), Value::Exact(q.conj()));
                }
                (CoordKind::Complex, CoordValue::Real(r)) => {
                    p.insert(Var::holo(name), Value::Exact(GaussRat::real(r.clone())));
                    p.insert(Var::anti(name), Value::Exact(GaussRat::real(r.clone())));
                }
                (_, CoordValue::Real(r)) => {
                    p.insert(Var::real(name), Value::Exact(GaussRat::real(r.clone())));
                }
                (_, CoordValue::Complex(q)) => {
                    p.insert(Var::real(name), Value::Exact(GaussRat::real(q.re.clone())));
                }
            }
        }
        Ok(p)
    }

    /// Whether a point satisfies every constraint of the region.
    pub fn contains(&self, region: &Region, point: &Point) -> bool {
        region.constraints.iter().all(|c| {
            let v = match &c.quantity {
                Quantity::Coord(n) => point.get(&Var::real(n)).map(|v| v.to_c64().re),
                Quantity::Modulus(n) => point.get(&Var::holo(n)).map(|v| v.to_c64().norm()),
            };
            match v {
                Some(v) => c.cmp.holds(v, c.value.to_f64().unwrap_or(f64::NAN)),
                None => false,
            }
        })
    }

    /// Sample a point of `region` with rational coordinates. Coordinates
    /// listed in `fixed` take the given values instead.
    pub fn sample<R: Rng>(
        &self,
        region: &Region,
        fixed: &[(String, CoordValue)],
        rng: &mut R,
    ) -> Result<Point, ChartError> {
        let mut values: Vec<(String, CoordValue)> = fixed.to_vec();
        for co in &self.coords {
            if fixed.iter().any(|(n, _)| n == &co.name) {
                continue;
            }
            let v = match co.kind {
                CoordKind::Complex => {
                    let (lo, hi) = bounds(region, &Quantity::Modulus(co.name.clone()), 0.0, 2.0, true);
                    if hi <= lo {
                        return Err(ChartError::EmptyRegion(region.name.clone()));
                    }
                    let mut found = None;
                    for _ in 0..2000 {
                        let re = random_rational(rng, -hi, hi);
                        let im = random_rational(rng, -hi, hi);
                        let q = GaussRat::new(re, im);
                        let m = q.norm_sqr().to_f64().unwrap().sqrt();
                        let ok = region.constraints.iter().all(|c| match &c.quantity {
                            Quantity::Modulus(n) if n == &co.name => {
                                c.cmp.holds(m, c.value.to_f64().unwrap()) && m > 1e-6
                            }
                            _ => true,
                        }) && m >= lo;
                        if ok {
                            found = Some(q);
                            break;
                        }
                    }
                    CoordValue::Complex(found.ok_or_else(|| ChartError::SamplingBudget(region.name.clone()))?)
                }
                CoordKind::Real => {
                    let (lo, hi) = bounds(region, &Quantity::Coord(co.name.clone()), -2.0, 2.0, false);
                    CoordValue::Real(sample_interval(rng, region, &co.name, lo, hi)?)
                }
                CoordKind::Radial => {
                    let (lo, hi) = bounds(region, &Quantity::Coord(co.name.clone()), 0.0, 2.0, true);
                    CoordValue::Real(sample_interval(rng, region, &co.name, lo.max(0.0), hi)?)
                }
                CoordKind::Angle => {
                    let (lo, hi) = bounds(region, &Quantity::Coord(co.name.clone()), 0.0, std::f64::consts::TAU, false);
                    CoordValue::Real(sample_interval(rng, region, &co.name, lo, hi)?)
                }
            };
            values.push((co.name.clone(), v));
        }
        self.point(&values)
    }

}

fn bounds(region: &Region, q: &Quantity, dlo: f64, dhi: f64, nonneg: bool) -> (f64, f64) {
    let mut lo: Option<f64> = None;
    let mut hi: Option<f64> = None;
    for c in &region.constraints {
        if &c.quantity != q {
            continue;
        }
        let v = c.value.to_f64().unwrap();
        match c.cmp {
            Cmp::Gt | Cmp::Ge => lo = Some(lo.map_or(v, |l: f64| l.max(v))),
            Cmp::Lt | Cmp::Le => hi = Some(hi.map_or(v, |h: f64| h.min(v))),
        }
    }
    let width = dhi - dlo;
    match (lo, hi) {
        (Some(l), Some(h)) => (l, h),
        (Some(l), None) => (l, l + width),
        (None, Some(h)) => {
            let l = h - width;
            (if nonneg { l.max(dlo) } else { l }, h)
        }
        (None, None) => (dlo, dhi),
    }
}

fn random_rational<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> BigRational {
    const DEN: i64 = 1024;
    let a = (lo * DEN as f64).ceil() as i64;
    let b = (hi * DEN as f64).floor() as i64;
    let n = if b > a { rng.gen_range(a..=b) } else { a };
    BigRational::new(BigInt::from(n), BigInt::from(DEN))
}

fn sample_interval<R: Rng>(
    rng: &mut R,
    region: &Region,
    name: &str,
    lo: f64,
    hi: f64,
) -> Result<BigRational, ChartError> {
    if hi < lo {
        return Err(ChartError::EmptyRegion(region.name.clone()));
    }
    for _ in 0..1000 {
        let r = random_rational(rng, lo, hi);
        let v = r.to_f64().unwrap();
        let ok = region.constraints.iter().all(|c| match &c.quantity {
            Quantity::Coord(n) if n == name => c.cmp.holds(v, c.value.to_f64().unwrap()),
            _ => true,
        });
        if ok && !(lo >= 0.0 && v == 0.0 && lo == 0.0) {
            return Ok(r);
        }
    }
    Err(ChartError::SamplingBudget(region.name.clone()))
}

/// Merge the constraints of two regions (their intersection).
pub fn intersect(a: &Region, b: &Region) -> Region {
    let mut constraints = a.constraints.clone();
    for c in &b.constraints {
        if !constraints.contains(c) {
            constraints.push(c.clone());
        }
    }
    let name = match (a.name.is_empty(), b.name.is_empty()) {
        (true, _) => b.name.clone(),
        (_, true) => a.name.clone(),
        _ => format!("{}&{}", a.name, b.name),
    };
    Region { name, constraints }
}
