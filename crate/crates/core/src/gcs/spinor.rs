//! Pure spinors with their twisting 3-form, and the pointwise checks on them.

use std::sync::Arc;

use thiserror::Error;

use crate::exterior::chart::{Chart, ChartError, Point, Region};
use crate::exterior::equality::{form_equal, form_zero, regular_points, EqualityError, SampleConfig, Verdict};
use crate::exterior::expr::{EvalError, Expr, Var, VarKind};
use crate::exterior::form::{blade_degree, FormError, MixedForm};
use crate::exterior::number::{GaussRat, Value};
use crate::exterior::section::GeneralizedSection;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GcsError {
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Equality(#[from] EqualityError),
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error("twisting form of `{0}` is not closed ({1})")]
    NotClosed(String, String),
    #[error("twisting form of `{0}` is not a 3-form")]
    HNotThreeForm(String),
    #[error("decomposition hints of `{0}` do not reproduce the spinor ({1})")]
    BadHints(String, String),
    #[error("spinor vanishes at the point (not a pure spinor there)")]
    VanishesAt,
    #[error("no decomposition available for `{0}`")]
    NoDecomposition(String),
    #[error("stored certificate of `{0}` does not satisfy the integrability equation ({1})")]
    BadCertificate(String, String),
    #[error("cannot sample the zero set of the degree-0 part `{0}` within budget")]
    CannotSampleZeroSet(String),
    #[error("B-field must be a 2-form")]
    BNotTwoForm,
    #[error("invalid surgery parameters: {0}")]
    Params(String),
    #[error("piece `{0}` is not {1}")]
    PieceCheck(String, String),
    #[error("overlap `{overlap}` disagrees on {what}: {detail}")]
    OverlapMismatch { overlap: String, what: String, detail: String },
    #[error("unknown piece `{0}`")]
    UnknownPiece(String),
    #[error(transparent)]
    Map(#[from] crate::exterior::map::MapError),
}

/// Optional factorisation `ρ = e^{B + iω} ∧ Ω`, valid on a region.
#[derive(Clone, Debug, PartialEq)]
pub struct Hints {
    pub b: Option<MixedForm>,
    pub omega: Option<MixedForm>,
    pub big_omega: Option<MixedForm>,
    pub region: Region,
}

impl Hints {
    /// `e^{B + iω} ∧ Ω` with absent pieces read as 0, 0 and 1.
    pub fn rebuild(&self, chart: &Arc<Chart>) -> Result<MixedForm, FormError> {
        let mut expo = MixedForm::zero(chart);
        if let Some(b) = &self.b {
            expo = expo.add(b)?;
        }
        if let Some(w) = &self.omega {
            expo = expo.add(&w.scale(&Expr::i()))?;
        }
        let base = self.big_omega.clone().unwrap_or_else(|| MixedForm::one(chart));
        expo.exp()?.wedge(&base)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpinorStructure {
    pub name: String,
    pub rho: MixedForm,
    pub h: MixedForm,
    pub certificate: Option<GeneralizedSection>,
    pub hints: Option<Hints>,
    /// Where the structure is defined (sampling domain for checks).
    pub region: Region,
}

impl SpinorStructure {
    /// Builds the structure, checking that `H` is a closed 3-form and that the
    /// hints (if any) reproduce `ρ` on their region.
    pub fn new(
        name: &str,
        rho: MixedForm,
        h: MixedForm,
        certificate: Option<GeneralizedSection>,
        hints: Option<Hints>,
        region: Region,
        cfg: &SampleConfig,
    ) -> Result<Self, GcsError> {
        rho.same_chart(&h)?;
        if h.expect_degree(3).is_err() {
            return Err(GcsError::HNotThreeForm(name.into()));
        }
        let dh = h.d();
        if !dh.is_zero() {
            let v = form_zero(&dh, &region, cfg)?;
            if !v.holds() {
                return Err(GcsError::NotClosed(name.into(), format!("{v:?}")));
            }
        }
        if let Some(hs) = &hints {
            let rebuilt = hs.rebuild(rho.chart())?;
            let v = form_equal(&rho, &rebuilt, &hs.region, cfg)?;
            if !v.holds() {
                return Err(GcsError::BadHints(name.into(), format!("{v:?}")));
            }
        }
        if let Some(c) = &certificate {
            rho.same_chart(&c.xi)?;
        }
        Ok(SpinorStructure { name: name.into(), rho, h, certificate, hints, region })
    }

    /// Untwisted structure with no extras.
    pub fn plain(name: &str, rho: MixedForm) -> Self {
        let h = MixedForm::zero(rho.chart());
        SpinorStructure { name: name.into(), rho, h, certificate: None, hints: None, region: Region::default() }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        self.rho.chart()
    }

    /// `d_H ρ = dρ + H ∧ ρ`.
    pub fn d_h(&self) -> MixedForm {
        self.rho.d().add_unchecked(&self.h.wedge_unchecked(&self.rho))
    }

    /// `d_H ρ − (X + ξ)·ρ` for a candidate certificate.
    pub fn residual(&self, cert: &GeneralizedSection) -> Result<MixedForm, GcsError> {
        Ok(self.d_h().sub(&cert.clifford(&self.rho)?)?)
    }
}

/// Lowest degree with a coefficient that is nonzero at the point.
pub fn type_at(rho: &MixedForm, point: &Point, tol: f64) -> Result<usize, GcsError> {
    let mut best: Option<usize> = None;
    for (b, c) in rho.terms() {
        let k = blade_degree(*b);
        if best.is_some_and(|x| x <= k) {
            continue;
        }
        let (v, scale) = c.eval_scaled(point)?;
        let zero = match v {
            Value::Exact(q) => q.is_zero(),
            Value::Float(z) => z.norm() <= tol * scale.max(1.0),
        };
        if !zero {
            best = Some(k);
        }
    }
    best.ok_or(GcsError::VanishesAt)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NondegeneracyMethod {
    /// `Ω ∧ Ω̄ ∧ ω^{m−k}` from decomposition hints.
    Hints,
    /// The Mukai pairing `(ρ, ρ̄)`, used when no hints are present.
    Mukai,
}

fn top_nonzero(f: &MixedForm, point: &Point, tol: f64) -> Result<bool, GcsError> {
    let (v, scale) = f.top_coeff().eval_scaled(point)?;
    Ok(match v {
        Value::Exact(q) => !q.is_zero(),
        Value::Float(z) => z.norm() > tol * scale.max(1.0),
    })
}

/// Sign-reversal anti-automorphism: degree `k` gets `(−1)^{k(k−1)/2}`.
fn reversal(f: &MixedForm) -> MixedForm {
    let mut out = MixedForm::zero(f.chart());
    for k in f.degrees() {
        let part = f.part(k);
        let sign = if (k * (k.saturating_sub(1)) / 2) % 2 == 0 { 1 } else { -1 };
        out = out.add_unchecked(&part.scale_const(&GaussRat::from_int(sign)));
    }
    out
}

/// The Mukai pairing `[ρ ∧ σ(τ)]_top`.
pub fn mukai_pairing(rho: &MixedForm, tau: &MixedForm) -> Result<Expr, GcsError> {
    Ok(rho.wedge(&reversal(tau))?.top_coeff())
}

/// `Ω ∧ Ω̄ ∧ ω^{m−k} ≠ 0` at a point, with the method used.
pub fn check_nondegenerate(
    s: &SpinorStructure,
    point: &Point,
    tol: f64,
) -> Result<(bool, NondegeneracyMethod), GcsError> {
    let chart = s.chart();
    let m = chart.dim() / 2;
    if let Some(h) = &s.hints {
        let big = h.big_omega.clone().unwrap_or_else(|| MixedForm::one(chart));
        let degs = big.degrees();
        if degs.len() != 1 {
            return Err(GcsError::NoDecomposition(s.name.clone()));
        }
        let k = degs[0];
        if k > m {
            return Ok((false, NondegeneracyMethod::Hints));
        }
        let omega = h.omega.clone().unwrap_or_else(|| MixedForm::zero(chart));
        let mut acc = big.wedge(&big.conj())?;
        for _ in 0..(m - k) {
            acc = acc.wedge(&omega)?;
        }
        return Ok((top_nonzero(&acc, point, tol)?, NondegeneracyMethod::Hints));
    }
    let pair = mukai_pairing(&s.rho, &s.rho.conj())?;
    let f = MixedForm::scalar(chart, pair);
    let (v, scale) = f.scalar_part().eval_scaled(point)?;
    let ok = match v {
        Value::Exact(q) => !q.is_zero(),
        Value::Float(z) => z.norm() > tol * scale.max(1.0),
    };
    Ok((ok, NondegeneracyMethod::Mukai))
}

/// Outcome of a stability check.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    pub stable: bool,
    /// The degree-0 part whose zero set is the type-change locus.
    pub s0: Expr,
    /// False when the degree-0 part is a nonzero constant.
    pub locus_nonempty: bool,
    pub points_checked: usize,
    /// How zero-set points were produced.
    pub method: String,
}

impl StabilityReport {
    pub fn locus_label(&self) -> String {
        if self.locus_nonempty {
            format!("{{{} = 0}}", self.s0)
        } else {
            "empty".into()
        }
    }
}

/// Real 2×N differential of a complex function at a point has rank 2.
fn real_rank_two(s0: &Expr, chart: &Chart, point: &Point, tol: f64) -> Result<bool, GcsError> {
    // directional derivatives along every real direction of the chart
    let mut dirs: Vec<Value> = Vec::new();
    let mut seen = Vec::new();
    for slot in &chart.slots {
        match slot.var.kind {
            VarKind::Real => {
                let (v, _) = s0.diff(&slot.var).eval_scaled(point)?;
                dirs.push(v);
            }
            VarKind::Holo | VarKind::Anti => {
                if seen.contains(&slot.coord) {
                    continue;
                }
                seen.push(slot.coord);
                let name = &chart.coords[slot.coord].name;
                let dz = s0.diff(&Var::holo(name)).eval(point)?;
                let dzb = s0.diff(&Var::anti(name)).eval(point)?;
                // ∂/∂x = ∂z + ∂z̄ ; ∂/∂y = i(∂z − ∂z̄)
                dirs.push(dz.add(&dzb));
                dirs.push(Value::Exact(GaussRat::i()).mul(&dz.sub(&dzb)));
            }
        }
    }
    for j in 0..dirs.len() {
        for k in j + 1..dirs.len() {
            // det [[Re a, Re b],[Im a, Im b]] = Im(conj(a)·b)
            let m = dirs[j].conj().mul(&dirs[k]);
            let nonzero = match m {
                Value::Exact(q) => !num_traits::Zero::is_zero(&q.im),
                Value::Float(c) => {
                    let s = dirs[j].to_c64().norm() * dirs[k].to_c64().norm();
                    c.im.abs() > tol * s.max(1.0)
                }
            };
            if nonzero {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Stability: the degree-0 part must meet zero transversally. Points of the
/// zero set are produced by solving for one complex coordinate when the
/// degree-0 part has the shape `α + β·w^k`; otherwise `witnesses` are used.
pub fn check_stable(
    s: &SpinorStructure,
    witnesses: &[Point],
    cfg: &SampleConfig,
) -> Result<StabilityReport, GcsError> {
    let s0 = s.rho.scalar_part();
    let chart = s.chart().clone();
    if let Some(c) = s0.as_constant() {
        return Ok(StabilityReport {
            stable: !c.is_zero(),
            s0,
            locus_nonempty: c.is_zero(),
            points_checked: 0,
            method: "constant".into(),
        });
    }
    let mut points: Vec<Point> = Vec::new();
    let mut method = String::new();
    'search: for co in &chart.coords {
        if co.kind != crate::exterior::chart::CoordKind::Complex {
            continue;
        }
        let w = Var::holo(&co.name);
        let Some(coeffs) = s0.coefficients_in(&w) else { continue };
        let powers: Vec<i64> = coeffs.keys().copied().filter(|k| *k > 0).collect();
        if powers.len() != 1 {
            continue;
        }
        let k = powers[0];
        let alpha = coeffs.get(&0).cloned().unwrap_or_default();
        let beta = coeffs[&k].clone();
        let seeds = regular_points(&chart, &s.region, &[], &[&alpha, &beta], cfg.samples, cfg);
        let Ok(seeds) = seeds else { continue };
        for mut p in seeds {
            let a = alpha.eval(&p)?;
            let b = beta.eval(&p)?;
            if b.is_zero(cfg.tolerance) {
                continue 'search;
            }
            let root = if a.is_exact_zero() {
                Value::zero()
            } else {
                let q = Value::Float(-a.to_c64() / b.to_c64());
                match (k, &a, &b) {
                    (1, Value::Exact(x), Value::Exact(y)) => Value::Exact(&(-x) / y),
                    _ => Value::Float(q.to_c64().powf(1.0 / k as f64)),
                }
            };
            p.insert(w.conj(), root.conj());
            p.insert(w.clone(), root);
            points.push(p);
        }
        method = format!("solved for {} (power {k})", co.name);
        break;
    }
    if points.is_empty() {
        if witnesses.is_empty() {
            return Err(GcsError::CannotSampleZeroSet(s0.to_string()));
        }
        points = witnesses.to_vec();
        method = "witness points".into();
    }
    let mut stable = true;
    for p in &points {
        let v = s0.eval(p)?;
        if !v.is_zero(cfg.tolerance * 10.0) {
            return Err(GcsError::CannotSampleZeroSet(s0.to_string()));
        }
        if !real_rank_two(&s0, &chart, p, cfg.tolerance)? {
            stable = false;
            break;
        }
    }
    Ok(StabilityReport { stable, s0, locus_nonempty: true, points_checked: points.len(), method })
}

/// `ρ ↦ e^B ∧ ρ`, `H ↦ H − dB`, certificate `X + ξ ↦ X + (ξ − ι_X B)`.
pub fn b_field_transform(s: &SpinorStructure, b: &MixedForm) -> Result<SpinorStructure, GcsError> {
    if b.expect_degree(2).is_err() {
        return Err(GcsError::BNotTwoForm);
    }
    s.rho.same_chart(b)?;
    let rho = b.exp()?.wedge(&s.rho)?;
    let h = s.h.sub(&b.d())?;
    let certificate = match &s.certificate {
        Some(c) => {
            let shift = c.x.interior(b)?;
            Some(GeneralizedSection::new(c.x.clone(), c.xi.sub(&shift)?)?)
        }
        None => None,
    };
    let hints = match &s.hints {
        Some(hs) => {
            let nb = match &hs.b {
                Some(old) => old.add(b)?,
                None => b.clone(),
            };
            Some(Hints { b: Some(nb), ..hs.clone() })
        }
        None => None,
    };
    Ok(SpinorStructure {
        name: format!("{}^B", s.name),
        rho,
        h,
        certificate,
        hints,
        region: s.region.clone(),
    })
}

/// Whether `ρ₁` equals `ρ₀ ∧ e^{B}` up to the nonzero scalar given by the
/// ratio of degree-0 parts.
pub fn normalized(rho: &MixedForm) -> Result<MixedForm, GcsError> {
    let s0 = rho.scalar_part();
    if s0.is_zero() {
        return Err(GcsError::VanishesAt);
    }
    Ok(rho.div_scalar(&s0)?)
}

pub fn verdict_text(v: &Verdict) -> String {
    match v {
        Verdict::Structural => "structural".into(),
        Verdict::Sampled { points, exact } => {
            format!("{points} samples ({})", if *exact { "exact" } else { "floating" })
        }
        Verdict::Differs { blade, point, value } => match blade {
            Some(b) => format!("coefficient of {b} is {value} at {point}"),
            None => format!("difference is {value} at {point}"),
        },
    }
}
