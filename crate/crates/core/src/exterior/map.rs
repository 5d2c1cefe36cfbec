//! Coordinate maps between charts and pullback of forms.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use super::chart::{Chart, CoordKind, Region};
use super::equality::{regular_points, EqualityError, SampleConfig};
use super::expr::{Expr, Var, VarKind};
use super::form::MixedForm;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MapError {
    #[error("map `{map}`: no image given for target coordinate `{coord}`")]
    MissingImage { map: String, coord: String },
    #[error("map `{map}`: `{coord}` is not a coordinate of target chart `{chart}`")]
    UnknownTarget { map: String, coord: String, chart: String },
    #[error("map `{map}`: image of `{coord}` uses `{symbol}`, which is not a source coordinate")]
    ForeignSymbol { map: String, coord: String, symbol: String },
    #[error("map `{map}`: angle image `{coord}` is not integer-linear in the source angles")]
    AngleNotIntegerLinear { map: String, coord: String },
    #[error("pullback along `{map}` expects a form on `{expected}`, got `{found}`")]
    WrongChart { map: String, expected: String, found: String },
    #[error("cannot compose `{0}` then `{1}`: charts do not match")]
    NotComposable(String, String),
    #[error("map `{map}` leaves its domain: `{coord}` = {value} at {point}")]
    DomainViolation { map: String, coord: String, value: String, point: String },
    #[error(transparent)]
    Sampling(#[from] EqualityError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoordinateMap {
    pub name: String,
    pub source: Arc<Chart>,
    pub target: Arc<Chart>,
    /// Image of every target slot symbol, in source symbols.
    images: HashMap<Var, Expr>,
    pub domain: Region,
    pub inverse: Option<Box<CoordinateMap>>,
}

impl CoordinateMap {
    /// `images` assigns an expression to each target coordinate name. For a
    /// complex coordinate `w` the given expression is the image of `w`; the
    /// image of `wb` is its conjugate unless `wb` is listed explicitly.
    pub fn new(
        name: &str,
        source: &Arc<Chart>,
        target: &Arc<Chart>,
        images: &[(String, Expr)],
        domain: Region,
    ) -> Result<Self, MapError> {
        let mut map = HashMap::new();
        for (coord, e) in images {
            let v = target.symbol(coord).ok_or_else(|| MapError::UnknownTarget {
                map: name.into(),
                coord: coord.clone(),
                chart: target.name.clone(),
            })?;
            let source_vars = source.vars();
            if let Some(bad) = e.vars().into_iter().find(|w| !source_vars.contains(w)) {
                return Err(MapError::ForeignSymbol { map: name.into(), coord: coord.clone(), symbol: bad.to_string() });
            }
            map.insert(v, e.clone());
        }
        for slot in &target.slots {
            if map.contains_key(&slot.var) {
                continue;
            }
            if slot.var.kind == VarKind::Anti {
                if let Some(h) = map.get(&slot.var.conj()).cloned() {
                    map.insert(slot.var.clone(), h.conj());
                    continue;
                }
            }
            return Err(MapError::MissingImage { map: name.into(), coord: slot.var.to_string() });
        }
        let m = CoordinateMap {
            name: name.to_string(),
            source: source.clone(),
            target: target.clone(),
            images: map,
            domain,
            inverse: None,
        };
        m.check_angles()?;
        Ok(m)
    }

    pub fn identity(chart: &Arc<Chart>) -> Self {
        let images = chart.slots.iter().map(|s| (s.var.clone(), Expr::var(s.var.clone()))).collect();
        CoordinateMap {
            name: "id".into(),
            source: chart.clone(),
            target: chart.clone(),
            images,
            domain: Region::default(),
            inverse: None,
        }
    }

    pub fn with_inverse(mut self, inv: CoordinateMap) -> Result<Self, MapError> {
        if inv.source != self.target || inv.target != self.source {
            return Err(MapError::NotComposable(self.name.clone(), inv.name.clone()));
        }
        self.inverse = Some(Box::new(inv));
        Ok(self)
    }

    pub fn image(&self, v: &Var) -> Option<&Expr> {
        self.images.get(v)
    }

    // angle targets: every partial derivative in a source angle must be an
    // integer constant
    fn check_angles(&self) -> Result<(), MapError> {
        for co in &self.target.coords {
            if co.kind != CoordKind::Angle {
                continue;
            }
            let img = &self.images[&Var::real(&co.name)];
            for sc in &self.source.coords {
                if sc.kind != CoordKind::Angle {
                    continue;
                }
                let ok = img
                    .diff(&Var::real(&sc.name))
                    .as_constant()
                    .and_then(|k| k.as_integer())
                    .is_some();
                if !ok {
                    return Err(MapError::AngleNotIntegerLinear { map: self.name.clone(), coord: co.name.clone() });
                }
            }
        }
        Ok(())
    }

    /// Pull a form on the target chart back to the source chart.
    pub fn pullback(&self, a: &MixedForm) -> Result<MixedForm, MapError> {
        if **a.chart() != *self.target {
            return Err(MapError::WrongChart {
                map: self.name.clone(),
                expected: self.target.name.clone(),
                found: a.chart().name.clone(),
            });
        }
        let diffs: Vec<MixedForm> = self
            .target
            .slots
            .iter()
            .map(|s| MixedForm::scalar(&self.source, self.images[&s.var].clone()).d())
            .collect();
        let mut out = MixedForm::zero(&self.source);
        for (b, c) in a.terms() {
            let mut t = MixedForm::scalar(&self.source, c.substitute(&self.images));
            for (j, dj) in diffs.iter().enumerate() {
                if b & (1u64 << j) != 0 {
                    t = t.wedge_unchecked(dj);
                }
            }
            out = out.add_unchecked(&t);
        }
        Ok(out)
    }

    /// Pull back a scalar.
    pub fn pullback_scalar(&self, f: &Expr) -> Expr {
        f.substitute(&self.images)
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &CoordinateMap) -> Result<CoordinateMap, MapError> {
        if *next.source != *self.target {
            return Err(MapError::NotComposable(self.name.clone(), next.name.clone()));
        }
        let images = next.images.iter().map(|(v, e)| (v.clone(), e.substitute(&self.images))).collect();
        Ok(CoordinateMap {
            name: format!("{}.{}", next.name, self.name),
            source: self.source.clone(),
            target: next.target.clone(),
            images,
            domain: self.domain.clone(),
            inverse: None,
        })
    }

    /// Sample the domain and confirm every image evaluates, real images are
    /// real and radial images are positive. Returns the number of points.
    pub fn check_domain(&self, cfg: &SampleConfig) -> Result<usize, MapError> {
        let exprs: Vec<&Expr> = self.images.values().collect();
        let pts = regular_points(&self.source, &self.domain, &[], &exprs, cfg.samples, cfg)?;
        for p in &pts {
            for co in &self.target.coords {
                if co.kind == CoordKind::Complex {
                    continue;
                }
                let v = self.images[&Var::real(&co.name)].eval(p).expect("regular point").to_c64();
                let bad_imag = v.im.abs() > cfg.tolerance * (1.0 + v.re.abs());
                let bad_sign = co.kind == CoordKind::Radial && v.re <= 0.0;
                if bad_imag || bad_sign || !v.re.is_finite() {
                    let mut desc: Vec<String> = p.iter().map(|(k, x)| format!("{k}={x}")).collect();
                    desc.sort();
                    return Err(MapError::DomainViolation {
                        map: self.name.clone(),
                        coord: co.name.clone(),
                        value: format!("{v}"),
                        point: desc.join(", "),
                    });
                }
            }
        }
        Ok(pts.len())
    }
}
