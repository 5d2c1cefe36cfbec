//! Vector fields and sections `X + ξ` of `TM ⊕ T*M`.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::chart::Chart;
use super::expr::Expr;
use super::form::{FormError, MixedForm};
use super::number::GaussRat;

/// Vector field given by components along the slot basis `∂_{v}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorField {
    chart: Arc<Chart>,
    comps: BTreeMap<usize, Expr>,
}

impl VectorField {
    pub fn zero(chart: &Arc<Chart>) -> Self {
        VectorField { chart: chart.clone(), comps: BTreeMap::new() }
    }

    pub fn from_components(chart: &Arc<Chart>, comps: impl IntoIterator<Item = (usize, Expr)>) -> Self {
        let mut v = VectorField::zero(chart);
        for (s, c) in comps {
            v.set(s, v.component(s).add(&c));
        }
        v
    }

    /// The coordinate field of one slot.
    pub fn basis(chart: &Arc<Chart>, slot: usize) -> Self {
        VectorField::from_components(chart, [(slot, Expr::one())])
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn set(&mut self, slot: usize, c: Expr) {
        if c.is_zero() {
            self.comps.remove(&slot);
        } else {
            self.comps.insert(slot, c);
        }
    }

    pub fn component(&self, slot: usize) -> Expr {
        self.comps.get(&slot).cloned().unwrap_or_default()
    }

    pub fn components(&self) -> &BTreeMap<usize, Expr> {
        &self.comps
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn add(&self, o: &VectorField) -> VectorField {
        let mut out = self.clone();
        for (s, c) in &o.comps {
            out.set(*s, out.component(*s).add(c));
        }
        out
    }

    pub fn neg(&self) -> VectorField {
        self.map(|c| c.neg())
    }

    pub fn scale(&self, f: &Expr) -> VectorField {
        self.map(|c| c.mul(f))
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> VectorField {
        let mut out = VectorField::zero(&self.chart);
        for (s, c) in &self.comps {
            out.set(*s, f(c));
        }
        out
    }

    /// Directional derivative `X(f)`.
    pub fn apply(&self, f: &Expr) -> Expr {
        let mut out = Expr::zero();
        for (s, c) in &self.comps {
            out = out.add(&c.mul(&f.diff(&self.chart.slots[*s].var)));
        }
        out
    }

    pub fn interior(&self, a: &MixedForm) -> Result<MixedForm, FormError> {
        if *a.chart() != self.chart {
            return Err(FormError::ChartMismatch(self.chart.name.clone(), a.chart().name.clone()));
        }
        Ok(a.interior(&self.comps))
    }

    /// Lie bracket `[X, Y]`.
    pub fn bracket(&self, o: &VectorField) -> VectorField {
        let mut out = VectorField::zero(&self.chart);
        for j in 0..self.chart.dim() {
            let c = self.apply(&o.component(j)).sub(&o.apply(&self.component(j)));
            out.set(j, c);
        }
        out
    }

    /// Lie derivative of a form via Cartan's formula.
    pub fn lie_derivative(&self, a: &MixedForm) -> Result<MixedForm, FormError> {
        let first = self.interior(a)?.d();
        let second = self.interior(&a.d())?;
        first.add(&second)
    }

    pub fn conj(&self) -> VectorField {
        let mut out = VectorField::zero(&self.chart);
        for (s, c) in &self.comps {
            let t = self.chart.slot_of(&self.chart.slots[*s].var.conj()).expect("conjugate slot");
            out.set(t, c.conj());
        }
        out
    }

    pub fn substitute(&self, map: &std::collections::HashMap<super::expr::Var, Expr>) -> VectorField {
        self.map(|c| c.substitute(map))
    }
}

impl std::fmt::Display for VectorField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.comps.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> =
            self.comps.iter().map(|(s, c)| format!("({c})*d/d{}", self.chart.slots[*s].var)).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// A section `X + ξ` with `ξ` a 1-form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneralizedSection {
    pub x: VectorField,
    pub xi: MixedForm,
}

impl GeneralizedSection {
    pub fn new(x: VectorField, xi: MixedForm) -> Result<Self, FormError> {
        if *xi.chart() != *x.chart() {
            return Err(FormError::ChartMismatch(x.chart().name.clone(), xi.chart().name.clone()));
        }
        xi.expect_degree(1)?;
        Ok(GeneralizedSection { x, xi })
    }

    pub fn zero(chart: &Arc<Chart>) -> Self {
        GeneralizedSection { x: VectorField::zero(chart), xi: MixedForm::zero(chart) }
    }

    pub fn vector(x: VectorField) -> Self {
        let xi = MixedForm::zero(x.chart());
        GeneralizedSection { x, xi }
    }

    pub fn covector(xi: MixedForm) -> Result<Self, FormError> {
        let x = VectorField::zero(xi.chart());
        GeneralizedSection::new(x, xi)
    }

    pub fn chart(&self) -> &Arc<Chart> {
        self.x.chart()
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.xi.is_zero()
    }

    pub fn add(&self, o: &GeneralizedSection) -> Result<GeneralizedSection, FormError> {
        Ok(GeneralizedSection { x: self.x.add(&o.x), xi: self.xi.add(&o.xi)? })
    }

    pub fn sub(&self, o: &GeneralizedSection) -> Result<GeneralizedSection, FormError> {
        Ok(GeneralizedSection { x: self.x.add(&o.x.neg()), xi: self.xi.sub(&o.xi)? })
    }

    /// Clifford action `ι_X ρ + ξ ∧ ρ`.
    pub fn clifford(&self, rho: &MixedForm) -> Result<MixedForm, FormError> {
        self.x.interior(rho)?.add(&self.xi.wedge(rho)?)
    }
}

/// `ξ(X)` for a 1-form `ξ`.
fn contract(xi: &MixedForm, x: &VectorField) -> Result<Expr, FormError> {
    Ok(x.interior(xi)?.scalar_part())
}

/// Symmetric pairing `½(η(X) + ξ(Y))`.
pub fn pairing(a: &GeneralizedSection, b: &GeneralizedSection) -> Result<Expr, FormError> {
    let s = contract(&b.xi, &a.x)?.add(&contract(&a.xi, &b.x)?);
    Ok(s.scale(&GaussRat::from_ratio(1, 2)))
}

/// The `H`-twisted Courant bracket.
pub fn courant_bracket(
    a: &GeneralizedSection,
    b: &GeneralizedSection,
    h: &MixedForm,
) -> Result<GeneralizedSection, FormError> {
    h.expect_degree(3)?;
    let (x, xi) = (&a.x, &a.xi);
    let (y, eta) = (&b.x, &b.xi);
    let vec = x.bracket(y);
    let f = contract(eta, x)?.sub(&contract(xi, y)?);
    let df = MixedForm::scalar(a.chart(), f).d().scale_const(&GaussRat::from_ratio(-1, 2));
    let hterm = y.interior(&x.interior(h)?)?;
    let form = x.lie_derivative(eta)?.sub(&y.lie_derivative(xi)?)?.add(&df)?.add(&hterm)?;
    GeneralizedSection::new(vec, form)
}
