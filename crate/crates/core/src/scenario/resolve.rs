//! Turning declarations into forms, spinors, maps and descriptors.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::exterior::chart::{Chart, Constraint, Coord, CoordValue, Point, Quantity, Region};
use crate::exterior::equality::SampleConfig;
use crate::exterior::expr::{BumpSpec, Expr, Func};
use crate::exterior::form::MixedForm;
use crate::exterior::map::CoordinateMap;
use crate::exterior::number::GaussRat;
use crate::exterior::section::{GeneralizedSection, VectorField};
use crate::gcs::builders::{build_gluck_spinor, build_luttinger_spinor};
use crate::gcs::integrable::check_integrable;
use crate::gcs::spinor::{b_field_transform, Hints, SpinorStructure};
use crate::topology::descriptor::{
    Factor, GluingData, Label, LocusKind, ManifoldDescriptor, Origin, Pi1, Signature, Spin, SurgeryLocus,
    TypeChangeComponent, H2,
};
use crate::topology::group::GroupPresentation;
use crate::topology::params::SurgeryParams;

use super::ast::{Arg, BinOp, LocusDecl, SExpr, Stmt};
use super::error::ScenarioError;

type R<T> = Result<T, String>;

/// Everything declared so far.
#[derive(Clone, Debug, Default)]
pub struct Env {
    pub charts: BTreeMap<String, Arc<Chart>>,
    pub current: Option<String>,
    pub regions: BTreeMap<String, Region>,
    pub params: BTreeMap<String, GaussRat>,
    pub bumps: BTreeMap<String, Arc<BumpSpec>>,
    pub forms: BTreeMap<String, MixedForm>,
    pub spinors: BTreeMap<String, SpinorStructure>,
    pub maps: BTreeMap<String, CoordinateMap>,
    pub manifolds: BTreeMap<String, ManifoldDescriptor>,
    pub warnings: Vec<String>,
}

fn parse_number(s: &str) -> R<BigRational> {
    match s.split_once('.') {
        None => s.parse::<BigInt>().map(BigRational::from_integer).map_err(|e| e.to_string()),
        Some((int, frac)) => {
            let den = BigInt::from(10u32).pow(frac.len() as u32);
            let num: BigInt = format!("{int}{frac}").parse().map_err(|e: num_bigint::ParseBigIntError| e.to_string())?;
            Ok(BigRational::new(num, den))
        }
    }
}

fn scalar_of(f: &MixedForm) -> Option<Expr> {
    if f.degrees().iter().all(|d| *d == 0) {
        Some(f.scalar_part())
    } else {
        None
    }
}

impl Env {
    pub fn chart(&self, name: &str) -> R<Arc<Chart>> {
        self.charts.get(name).cloned().ok_or_else(|| format!("unknown chart `{name}`"))
    }

    /// Chart named explicitly, or the current one.
    pub fn chart_or_current(&self, name: &Option<String>) -> R<Arc<Chart>> {
        match name {
            Some(n) => self.chart(n),
            None => match &self.current {
                Some(c) => self.chart(c),
                None => Err("no chart declared".into()),
            },
        }
    }

    pub fn region(&self, name: &str) -> R<Region> {
        self.regions.get(name).cloned().ok_or_else(|| format!("unknown region `{name}`"))
    }

    pub fn spinor(&self, name: &str) -> R<&SpinorStructure> {
        self.spinors.get(name).ok_or_else(|| format!("unknown spinor `{name}`"))
    }

    pub fn manifold(&self, name: &str) -> R<&ManifoldDescriptor> {
        self.manifolds.get(name).ok_or_else(|| format!("unknown manifold `{name}`"))
    }

    pub fn map(&self, name: &str) -> R<&CoordinateMap> {
        self.maps.get(name).ok_or_else(|| format!("unknown map `{name}`"))
    }

    /// A constant (rational or Gaussian rational) expression.
    pub fn constant(&self, e: &SExpr) -> R<GaussRat> {
        match e {
            SExpr::Num(n) => Ok(GaussRat::real(parse_number(n)?)),
            SExpr::Ident(s) if s == "i" => Ok(GaussRat::i()),
            SExpr::Ident(s) => self.params.get(s).cloned().ok_or_else(|| format!("`{s}` is not a constant")),
            SExpr::Neg(a) => Ok(-self.constant(a)?),
            SExpr::Bin(op, a, b) => {
                let (x, y) = (self.constant(a)?, self.constant(b)?);
                match op {
                    BinOp::Add => Ok(&x + &y),
                    BinOp::Sub => Ok(&x - &y),
                    BinOp::Mul | BinOp::Wedge => Ok(&x * &y),
                    BinOp::Div => {
                        if y.is_zero() {
                            Err("division by zero".into())
                        } else {
                            Ok(&x / &y)
                        }
                    }
                }
            }
            SExpr::Pow(a, k) => self.constant(a)?.powi(*k).ok_or_else(|| "zero to a negative power".into()),
            _ => Err("expected a constant".into()),
        }
    }

    pub fn rational(&self, e: &SExpr) -> R<BigRational> {
        let c = self.constant(e)?;
        if !c.is_real() {
            return Err(format!("expected a real number, got {c}"));
        }
        Ok(c.re)
    }

    pub fn integer(&self, e: &SExpr) -> R<i64> {
        self.constant(e)?.as_integer().ok_or_else(|| "expected an integer".into())
    }

    /// Evaluate an expression to a form on `chart`.
    pub fn form(&self, e: &SExpr, chart: &Arc<Chart>) -> R<MixedForm> {
        let scalar = |f: MixedForm, what: &str| -> R<Expr> {
            scalar_of(&f).ok_or_else(|| format!("{what} needs a scalar (degree 0) argument"))
        };
        match e {
            SExpr::Num(_) => Ok(MixedForm::scalar(chart, Expr::constant(self.constant(e)?))),
            SExpr::Ident(name) => self.ident(name, chart),
            SExpr::Neg(a) => Ok(self.form(a, chart)?.neg()),
            SExpr::Bin(op, a, b) => {
                let x = self.form(a, chart)?;
                let y = self.form(b, chart)?;
                match op {
                    BinOp::Add => x.add(&y).map_err(|e| e.to_string()),
                    BinOp::Sub => x.sub(&y).map_err(|e| e.to_string()),
                    BinOp::Wedge => x.wedge(&y).map_err(|e| e.to_string()),
                    BinOp::Mul => match (scalar_of(&x), scalar_of(&y)) {
                        (Some(s), _) => Ok(y.scale(&s)),
                        (_, Some(s)) => Ok(x.scale(&s)),
                        _ => Err("`*` multiplies by a scalar; use `^` to wedge forms".into()),
                    },
                    BinOp::Div => {
                        let s = scalar(y, "division")?;
                        x.div_scalar(&s).map_err(|e| e.to_string())
                    }
                }
            }
            SExpr::Pow(a, k) => {
                let s = scalar(self.form(a, chart)?, "`**`")?;
                let p = s.try_pow(*k).ok_or_else(|| "cannot raise to this power".to_string())?;
                Ok(MixedForm::scalar(chart, p))
            }
            SExpr::Call(f, args) => self.call(f, args, chart),
            SExpr::Str(_) | SExpr::Group(_) | SExpr::List(_) | SExpr::Record(_) => {
                Err("expected a form expression".into())
            }
        }
    }

    fn ident(&self, name: &str, chart: &Arc<Chart>) -> R<MixedForm> {
        if name == "i" {
            return Ok(MixedForm::scalar(chart, Expr::i()));
        }
        if let Some(c) = self.params.get(name) {
            return Ok(MixedForm::scalar(chart, Expr::constant(c.clone())));
        }
        if let Some(v) = chart.symbol(name) {
            return Ok(MixedForm::scalar(chart, Expr::var(v)));
        }
        if let Some(f) = self.forms.get(name) {
            if **f.chart() != **chart {
                return Err(format!("form `{name}` lives on chart `{}`, not `{}`", f.chart().name, chart.name));
            }
            return Ok(f.clone());
        }
        if let Some(rest) = name.strip_prefix('d') {
            if let Some(v) = chart.symbol(rest) {
                return Ok(MixedForm::differential(chart, &v).expect("symbol of chart"));
            }
        }
        if let Some(s) = self.spinors.get(name) {
            if **s.chart() == **chart {
                return Ok(s.rho.clone());
            }
        }
        Err(format!("unknown name `{name}` on chart `{}`", chart.name))
    }

    fn positional<'b>(&self, args: &'b [Arg], n: usize, f: &str) -> R<Vec<&'b SExpr>> {
        let pos: Vec<&SExpr> = args.iter().filter(|a| a.name.is_none()).map(|a| &a.value).collect();
        if pos.len() != n {
            return Err(format!("`{f}` takes {n} argument(s), got {}", pos.len()));
        }
        Ok(pos)
    }

    fn call(&self, f: &str, args: &[Arg], chart: &Arc<Chart>) -> R<MixedForm> {
        let scalar_arg = |i: usize| -> R<Expr> {
            let a = self.positional(args, 1, f)?;
            let v = self.form(a[i], chart)?;
            scalar_of(&v).ok_or_else(|| format!("`{f}` needs a scalar argument"))
        };
        let wrap = |e: Expr| Ok(MixedForm::scalar(chart, e));
        match f {
            "exp" => {
                let a = self.positional(args, 1, f)?;
                let v = self.form(a[0], chart)?;
                match scalar_of(&v) {
                    Some(s) => wrap(Expr::apply(Func::Exp, &s)),
                    None if v.scalar_part().is_zero() => v.exp().map_err(|e| e.to_string()),
                    None => v.exp_general().map_err(|e| e.to_string()),
                }
            }
            "log" => wrap(Expr::apply(Func::Log, &scalar_arg(0)?)),
            "sqrt" => wrap(Expr::apply(Func::Sqrt, &scalar_arg(0)?)),
            "sin" => wrap(Expr::apply(Func::Sin, &scalar_arg(0)?)),
            "cos" => wrap(Expr::apply(Func::Cos, &scalar_arg(0)?)),
            "abs" => {
                let s = scalar_arg(0)?;
                wrap(Expr::apply(Func::Sqrt, &s.mul(&s.conj())))
            }
            "conj" | "re" | "im" | "d" => {
                let a = self.positional(args, 1, f)?;
                let v = self.form(a[0], chart)?;
                Ok(match f {
                    "conj" => v.conj(),
                    "re" => v.re(),
                    "im" => v.im(),
                    _ => v.d(),
                })
            }
            "twist" => {
                let a = self.positional(args, 1, f)?;
                let s = self.spinor(a[0].ident().ok_or("`twist` needs a spinor name")?)?;
                if **s.chart() != **chart {
                    return Err(format!("spinor `{}` lives on chart `{}`", s.name, s.chart().name));
                }
                Ok(s.h.clone())
            }
            "pullback" => {
                let a = self.positional(args, 2, f)?;
                let m = self.map(a[0].ident().ok_or("`pullback` needs a map name")?)?;
                if *m.source != **chart {
                    return Err(format!("map `{}` starts on `{}`, not `{}`", m.name, m.source.name, chart.name));
                }
                let v = self.form(a[1], &m.target.clone())?;
                m.pullback(&v).map_err(|e| e.to_string())
            }
            _ => {
                if let Some(b) = self.bumps.get(f) {
                    let order = match args.iter().find(|a| a.name.as_deref() == Some("order")) {
                        Some(a) => self.integer(&a.value)? as u32,
                        None => 0,
                    };
                    let a = self.positional(args, 1, f)?;
                    let v = self.form(a[0], chart)?;
                    let s = scalar_of(&v).ok_or("a bump takes a scalar argument")?;
                    return wrap(Expr::bump(b, order, &s));
                }
                Err(format!("unknown function `{f}`"))
            }
        }
    }

    fn named<'b>(&self, args: &'b [Arg], key: &str) -> Option<&'b SExpr> {
        args.iter().find(|a| a.name.as_deref() == Some(key)).map(|a| &a.value)
    }

    fn need<'b>(&self, args: &'b [Arg], key: &str, f: &str) -> R<&'b SExpr> {
        self.named(args, key).ok_or_else(|| format!("`{f}` needs `{key} = ...`"))
    }

    pub fn params_from(&self, args: &[(String, SExpr)]) -> R<SurgeryParams> {
        let get = |k: &str| -> R<i64> {
            let e = args.iter().find(|(n, _)| n == k).map(|(_, v)| v).ok_or_else(|| format!("missing `{k}`"))?;
            self.integer(e)
        };
        Ok(SurgeryParams::new(get("p")?, get("q")?, get("a")?, get("b")?))
    }

    fn builder_params(&self, args: &[Arg], f: &str) -> R<SurgeryParams> {
        let kv: Vec<(String, SExpr)> = ["p", "q", "a", "b"]
            .iter()
            .map(|k| Ok((k.to_string(), self.need(args, k, f)?.clone())))
            .collect::<R<_>>()?;
        self.params_from(&kv)
    }

    fn coord_name(&self, args: &[Arg], key: &str, f: &str) -> R<String> {
        self.need(args, key, f)?.ident().map(|s| s.to_string()).ok_or_else(|| format!("`{key}` must be a coordinate name"))
    }

    /// The value of a `spinor` declaration before options are applied.
    pub fn spinor_value(&self, name: &str, e: &SExpr, chart: &Arc<Chart>, cfg: &SampleConfig) -> R<SpinorStructure> {
        match e {
            SExpr::Call(f, args) if f == "luttinger" || f == "gluck" => {
                let params = self.builder_params(args, f)?;
                let z1 = self.coord_name(args, "z1", f)?;
                let z2 = self.coord_name(args, "z2", f)?;
                let bname = self.coord_name(args, "bump", f)?;
                let bump = self.bumps.get(&bname).ok_or_else(|| format!("unknown bump `{bname}`"))?;
                let side_key = if f == "luttinger" { "sigma" } else { "R" };
                let side = match self.named(args, side_key) {
                    Some(e) => self.form(e, chart)?,
                    None => MixedForm::zero(chart),
                };
                let mut s = if f == "luttinger" {
                    build_luttinger_spinor(chart, params, &z1, &z2, bump, &side, cfg)
                } else {
                    let z3 = self.coord_name(args, "z3", f)?;
                    build_gluck_spinor(chart, params, &z1, &z2, &z3, bump, &side, cfg)
                }
                .map_err(|e| e.to_string())?;
                s.name = name.into();
                Ok(s)
            }
            SExpr::Call(f, args) if f == "btransform" => {
                let a = self.positional(args, 2, f)?;
                let mut base = self.spinor(a[0].ident().ok_or("`btransform` needs a spinor name")?)?.clone();
                if base.certificate.is_none() {
                    let found = check_integrable(&base, cfg).map_err(|e| e.to_string())?;
                    base.certificate = found.certificate().cloned();
                }
                let b = self.form(a[1], &base.chart().clone())?;
                let mut s = b_field_transform(&base, &b).map_err(|e| e.to_string())?;
                s.name = name.into();
                Ok(s)
            }
            _ => Ok(SpinorStructure::plain(name, self.form(e, chart)?)),
        }
    }

    /// A vector field `vec(z2 = -1, x3 = y3)` by slot symbol.
    pub fn vector(&self, e: &SExpr, chart: &Arc<Chart>) -> R<VectorField> {
        let SExpr::Call(f, args) = e else { return Err("expected `vec(...)`".into()) };
        if f != "vec" {
            return Err("expected `vec(...)`".into());
        }
        let mut x = VectorField::zero(chart);
        for a in args {
            let n = a.name.as_ref().ok_or("`vec` arguments are `symbol = value`")?;
            let v = chart.symbol(n).ok_or_else(|| format!("unknown symbol `{n}`"))?;
            let slot = chart.slot_of(&v).expect("symbol of chart");
            let c = scalar_of(&self.form(&a.value, chart)?).ok_or("vector components are scalars")?;
            x.set(slot, c);
        }
        Ok(x)
    }

    /// Apply the `with { ... }` options of a spinor declaration.
    pub fn spinor_with(
        &self,
        mut s: SpinorStructure,
        options: &[(String, SExpr)],
        cfg: &SampleConfig,
    ) -> R<SpinorStructure> {
        let chart = s.chart().clone();
        let mut h = s.h.clone();
        let mut x: Option<VectorField> = None;
        let mut xi: Option<MixedForm> = None;
        let mut hints = Hints { b: None, omega: None, big_omega: None, region: Region::default() };
        let mut has_hints = false;
        for (k, v) in options {
            match k.as_str() {
                "H" => h = self.form(v, &chart)?,
                "X" => x = Some(self.vector(v, &chart)?),
                "xi" => xi = Some(self.form(v, &chart)?),
                "B" => {
                    hints.b = Some(self.form(v, &chart)?);
                    has_hints = true;
                }
                "omega" => {
                    hints.omega = Some(self.form(v, &chart)?);
                    has_hints = true;
                }
                "Omega" => {
                    hints.big_omega = Some(self.form(v, &chart)?);
                    has_hints = true;
                }
                "hints_region" => hints.region = self.region(v.ident().ok_or("region name expected")?)?,
                "region" => s.region = self.region(v.ident().ok_or("region name expected")?)?,
                other => return Err(format!("unknown spinor option `{other}`")),
            }
        }
        let certificate = match (x, xi) {
            (None, None) => s.certificate.clone(),
            (x, xi) => Some(
                GeneralizedSection::new(
                    x.unwrap_or_else(|| VectorField::zero(&chart)),
                    xi.unwrap_or_else(|| MixedForm::zero(&chart)),
                )
                .map_err(|e| e.to_string())?,
            ),
        };
        let hints = if has_hints { Some(hints) } else { s.hints.clone() };
        SpinorStructure::new(&s.name, s.rho, h, certificate, hints, s.region, cfg).map_err(|e| e.to_string())
    }

    /// A point from a record such as `{z1 = 0, z2 = 1/2 + i}`.
    pub fn point_values(&self, e: &SExpr, chart: &Chart) -> R<Vec<(String, CoordValue)>> {
        let SExpr::Record(kv) = e else { return Err("expected a point `{coord = value, ...}`".into()) };
        let mut out = Vec::new();
        for (k, v) in kv {
            if chart.coord(k).is_none() {
                return Err(format!("unknown coordinate `{k}` on `{}`", chart.name));
            }
            out.push((k.clone(), CoordValue::Complex(self.constant(v)?)));
        }
        Ok(out)
    }

    pub fn point(&self, e: &SExpr, chart: &Chart) -> R<Point> {
        chart.point(&self.point_values(e, chart)?).map_err(|e| e.to_string())
    }

    pub fn group(&self, e: &SExpr) -> R<GroupPresentation> {
        match e {
            SExpr::Group(text) => parse_group(text),
            SExpr::Ident(s) if s == "trivial" => Ok(GroupPresentation::trivial()),
            _ => Err("expected a group `< gens | relators >` or `trivial`".into()),
        }
    }

    fn label(&self, e: &SExpr) -> R<Label> {
        let mut factors = Vec::new();
        collect_factors(self, e, &mut factors)?;
        Ok(Label::new(factors))
    }

    pub fn manifold_decl(&self, name: &str, fields: &[(String, SExpr)], loci: &[LocusDecl]) -> R<ManifoldDescriptor> {
        let get = |k: &str| fields.iter().find(|(n, _)| n == k).map(|(_, v)| v);
        for (k, _) in fields {
            if !["dim", "chi", "signature", "spin", "pi1", "b2", "torsion", "components"].contains(&k.as_str()) {
                return Err(format!("unknown manifold field `{k}`"));
            }
        }
        let dim = self.integer(get("dim").ok_or("manifold needs `dim`")?)?;
        let chi = self.integer(get("chi").ok_or("manifold needs `chi`")?)?;
        let signature = match get("signature") {
            None if dim % 4 == 0 => Signature::Unknown,
            None => Signature::Undefined,
            Some(SExpr::Ident(s)) if s == "unknown" => Signature::Unknown,
            Some(SExpr::Ident(s)) if s == "undefined" => Signature::Undefined,
            Some(e) => Signature::Known(self.integer(e)?),
        };
        let mut m = ManifoldDescriptor::new(name, dim as u32, chi, signature).map_err(|e| e.to_string())?;
        m.spin = match get("spin").and_then(|e| e.ident()) {
            None | Some("unknown") => Spin::Unknown,
            Some("spin") | Some("true") => Spin::Spin,
            Some("nonspin") | Some("false") => Spin::NonSpin,
            Some(other) => return Err(format!("spin must be spin, nonspin or unknown, got `{other}`")),
        };
        m.pi1 = match get("pi1") {
            None => Pi1::Unknown("not supplied".into()),
            Some(SExpr::Ident(s)) if s == "unknown" => Pi1::Unknown("declared unknown".into()),
            Some(SExpr::Ident(s)) if s == "trivial" => Pi1::Known(GroupPresentation::trivial()),
            Some(e) => Pi1::Known(self.group(e)?),
        };
        if let Some(b2) = get("b2") {
            let rank = self.integer(b2)?;
            if rank < 0 {
                return Err("b2 must be nonnegative".into());
            }
            let torsion = match get("torsion") {
                Some(SExpr::List(xs)) => xs.iter().map(|x| self.integer(x).map(|v| v as u64)).collect::<R<_>>()?,
                Some(_) => return Err("torsion is a list".into()),
                None => vec![],
            };
            m.h2 = Some(H2 { rank: rank as u64, torsion });
        }
        if let Some(c) = get("components") {
            let SExpr::List(xs) = c else { return Err("components is a list of labels".into()) };
            for x in xs {
                m.components.push(TypeChangeComponent::new(self.label(x)?, Origin::Original));
            }
        }
        for l in loci {
            m.loci.push(self.locus_decl(l)?);
        }
        Ok(m)
    }

    fn locus_decl(&self, l: &LocusDecl) -> R<SurgeryLocus> {
        let get = |k: &str| l.fields.iter().find(|(n, _)| n == k).map(|(_, v)| v);
        let boolean = |k: &str| -> R<bool> {
            match get(k).and_then(|e| e.ident()) {
                Some("true") => Ok(true),
                Some("false") | None => Ok(false),
                Some(o) => Err(format!("`{k}` must be true or false, got `{o}`")),
            }
        };
        let string = |e: &SExpr| -> R<String> {
            match e {
                SExpr::Str(s) => Ok(s.clone()),
                SExpr::Ident(s) => Ok(s.clone()),
                _ => Err("expected a word in quotes".into()),
            }
        };
        let kind = match get("kind").and_then(|e| e.ident()) {
            Some("torus_surface") => LocusKind::TorusSurface,
            Some("torus_factor_sphere") => LocusKind::TorusFactorSphere,
            Some("branch") => LocusKind::Branch,
            _ => return Err(format!("locus `{}` needs kind = torus_surface | torus_factor_sphere | branch", l.name)),
        };
        let factor = match get("factor") {
            Some(e) => self.label(e)?,
            None => Label::new(vec![Factor::Point]),
        };
        let gluing = match get("complement") {
            None => None,
            Some(c) => {
                let complement = self.group(c)?;
                let meridian = get("meridian").map(string).transpose()?.unwrap_or_else(|| "1".into());
                let circles = match get("circles") {
                    Some(SExpr::List(xs)) if xs.len() == 2 => [string(&xs[0])?, string(&xs[1])?],
                    _ => return Err("`circles` must list two words".into()),
                };
                let images = match get("images") {
                    None => None,
                    Some(SExpr::List(xs)) if xs.len() == 3 => Some([string(&xs[0])?, string(&xs[1])?, string(&xs[2])?]),
                    Some(_) => return Err("`images` must list three words".into()),
                };
                let [circle1, circle2] = circles;
                Some(GluingData { complement, meridian, circle1, circle2, images })
            }
        };
        Ok(SurgeryLocus {
            name: l.name.clone(),
            kind,
            dim: match get("dim") {
                Some(e) => self.integer(e)? as u32,
                None => 2,
            },
            chi: match get("chi") {
                Some(e) => self.integer(e)?,
                None => 0,
            },
            factor,
            neighborhood_trivial: boolean("trivial")?,
            j_symplectic: boolean("symplectic")?,
            gluing,
        })
    }

    /// Process one declaration.
    pub fn declare(&mut self, stmt: &Stmt, line: usize, cfg: &SampleConfig) -> Result<(), ScenarioError> {
        let sem = |m: String| ScenarioError::semantic(line, m);
        match stmt {
            Stmt::Chart { name, coords } => {
                let c = Chart::new(name, coords.iter().map(|(n, k)| Coord { name: n.clone(), kind: *k }).collect())
                    .map_err(|e| sem(e.to_string()))?;
                self.charts.insert(name.clone(), c);
                self.current = Some(name.clone());
            }
            Stmt::Use(c) => {
                self.chart(c).map_err(sem)?;
                self.current = Some(c.clone());
            }
            Stmt::Region { name, chart, constraints } => {
                let ch = self.chart_or_current(chart).map_err(sem)?;
                let mut cs = Vec::new();
                for a in constraints {
                    let value = self.rational(&a.value).map_err(sem)?;
                    let quantity =
                        if a.modulus { Quantity::Modulus(a.coord.clone()) } else { Quantity::Coord(a.coord.clone()) };
                    cs.push(Constraint { quantity, cmp: a.cmp, value });
                }
                let r = Region { name: name.clone(), constraints: cs };
                ch.check_region(&r).map_err(|e| sem(e.to_string()))?;
                self.regions.insert(name.clone(), r);
            }
            Stmt::Param { name, value } => {
                let v = self.constant(value).map_err(sem)?;
                self.params.insert(name.clone(), v);
            }
            Stmt::Bump { name, zero_below, one_above } => {
                let lo = self.rational(zero_below).map_err(sem)?;
                let hi = self.rational(one_above).map_err(sem)?;
                if lo >= hi {
                    return Err(sem(format!("bump `{name}`: zero region must end before the one region starts")));
                }
                self.bumps.insert(name.clone(), Arc::new(BumpSpec::new(name, lo, hi)));
            }
            Stmt::Form { name, chart, value } => {
                let ch = self.chart_or_current(chart).map_err(sem)?;
                let f = self.form(value, &ch).map_err(|m| sem(format!("form `{name}`: {m}")))?;
                if f.is_zero() {
                    self.warnings.push(format!("line {line}: form `{name}` is identically zero"));
                }
                self.forms.insert(name.clone(), f);
            }
            Stmt::Spinor { name, chart, value, options } => {
                let ch = self.chart_or_current(chart).map_err(sem)?;
                let s = self.spinor_value(name, value, &ch, cfg).map_err(|m| sem(format!("spinor `{name}`: {m}")))?;
                let s = self.spinor_with(s, options, cfg).map_err(|m| sem(format!("spinor `{name}`: {m}")))?;
                self.spinors.insert(name.clone(), s);
            }
            Stmt::Map { name, source, target, images, domain } => {
                let src = self.chart(source).map_err(sem)?;
                let tgt = self.chart(target).map_err(sem)?;
                let mut imgs = Vec::new();
                for (k, v) in images {
                    let f = self.form(v, &src).map_err(|m| sem(format!("map `{name}`, image of `{k}`: {m}")))?;
                    let s = scalar_of(&f).ok_or_else(|| sem(format!("map `{name}`: image of `{k}` is not a function")))?;
                    imgs.push((k.clone(), s));
                }
                let dom = match domain {
                    Some(d) => self.region(d).map_err(sem)?,
                    None => Region::default(),
                };
                let m = CoordinateMap::new(name, &src, &tgt, &imgs, dom).map_err(|e| sem(e.to_string()))?;
                self.maps.insert(name.clone(), m);
            }
            Stmt::Manifold { name, fields, loci } => {
                let m = self.manifold_decl(name, fields, loci).map_err(|m| sem(format!("manifold `{name}`: {m}")))?;
                self.manifolds.insert(name.clone(), m);
            }
            Stmt::Command { .. } | Stmt::Expect { .. } => {}
        }
        Ok(())
    }
}

fn collect_factors(env: &Env, e: &SExpr, out: &mut Vec<Factor>) -> R<()> {
    match e {
        SExpr::Bin(BinOp::Mul, a, b) => {
            collect_factors(env, a, out)?;
            collect_factors(env, b, out)
        }
        SExpr::Ident(s) => {
            out.push(match s.as_str() {
                "T2" => Factor::Torus,
                "S2" => Factor::Sphere,
                "pt" => Factor::Point,
                _ => match s.strip_prefix("Sigma").and_then(|g| g.parse::<u32>().ok()) {
                    Some(g) => Factor::Surface(g),
                    None => return Err(format!("unknown label factor `{s}`")),
                },
            });
            Ok(())
        }
        SExpr::Call(f, args) if f == "R" => {
            let name = args.first().and_then(|a| a.value.ident()).ok_or("R(name, b1) expected")?;
            let b1 = args.get(1).map(|a| env.integer(&a.value)).transpose()?.unwrap_or(0);
            out.push(Factor::Generic(name.into(), b1 as u32));
            Ok(())
        }
        _ => Err("labels are products like T2*Sigma2".into()),
    }
}

/// `gens | relators` as written between angle brackets.
pub fn parse_group(text: &str) -> R<GroupPresentation> {
    let (gens, rels) = match text.split_once('|') {
        Some((g, r)) => (g, r),
        None => (text, ""),
    };
    let names: Vec<&str> = gens.split(',').map(|s| s.trim()).filter(|s| !s.is_empty()).collect();
    let base = GroupPresentation::free(&names);
    let mut relators = Vec::new();
    for r in split_top_level(rels) {
        relators.push(base.parse_word(&r).map_err(|e| e.to_string())?);
    }
    GroupPresentation::new(base.generators, relators).map_err(|e| e.to_string())
}

/// Split on commas outside brackets.
fn split_top_level(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '[' | '(' => depth += 1,
            ']' | ')' => depth -= 1,
            ',' if depth == 0 => {
                if !cur.trim().is_empty() {
                    out.push(cur.trim().to_string());
                }
                cur.clear();
                continue;
            }
            _ => {}
        }
        cur.push(c);
    }
    if !cur.trim().is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}
