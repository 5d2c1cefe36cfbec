//! The explicit extension spinors used by the surgery and by the Gluck twist.

use std::sync::Arc;

use crate::exterior::chart::{Chart, CoordKind, Region};
use crate::exterior::equality::{form_zero, SampleConfig};
use crate::exterior::expr::{BumpSpec, Expr, Func, Var};
use crate::exterior::form::MixedForm;
use crate::exterior::number::GaussRat;
use crate::topology::params::{validate_surgery_params, SurgeryParams};

use super::spinor::{GcsError, SpinorStructure};

/// What the bump of the extension spinor is evaluated at.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BumpArgument {
    /// `ξ(|z₁|)`.
    Modulus,
    /// `ξ(|z₁|²)`.
    ModulusSquared,
}

fn complex_var(chart: &Chart, name: &str) -> Result<(Expr, Expr, usize, usize), GcsError> {
    match chart.coord(name) {
        Some(c) if c.kind == CoordKind::Complex => {}
        _ => return Err(GcsError::Params(format!("`{name}` is not a complex coordinate of `{}`", chart.name))),
    }
    let h = Var::holo(name);
    let a = Var::anti(name);
    let sh = chart.slot_of(&h).unwrap();
    let sa = chart.slot_of(&a).unwrap();
    Ok((Expr::var(h), Expr::var(a), sh, sa))
}

fn q(n: i64, d: i64) -> GaussRat {
    GaussRat::from_ratio(n, d)
}

/// The degree-2 exponent shared by both extension spinors (without the
/// sphere block).
fn torus_exponent(
    chart: &Arc<Chart>,
    params: SurgeryParams,
    z1: &str,
    z2: &str,
    bump: &Arc<BumpSpec>,
    arg: BumpArgument,
) -> Result<MixedForm, GcsError> {
    let (w, wb, s1, s1b) = complex_var(chart, z1)?;
    let (_, _, s2, s2b) = complex_var(chart, z2)?;
    let SurgeryParams { p, q: qq, a, b } = params;
    let modsq = w.mul(&wb);
    let t = match arg {
        BumpArgument::Modulus => Expr::apply(Func::Sqrt, &modsq),
        BumpArgument::ModulusSquared => modsq.clone(),
    };
    let xi = Expr::bump(bump, 0, &t);
    let c1 = xi.mul(&modsq.inv().unwrap()).scale(&q(-p, 4));
    let mut out = MixedForm::monomial(chart, &[s1, s1b], c1);
    out = out.add(&MixedForm::monomial(chart, &[s2, s2b], Expr::constant(q(-b, 2))))?;
    let half_inv = w.inv().unwrap().scale(&q(1, 2));
    // a/2 − q and −(a/2 + q)
    let c_dz2 = half_inv.scale(&q(a - 2 * qq, 2));
    let c_dz2b = half_inv.scale(&q(-(a + 2 * qq), 2));
    out = out.add(&MixedForm::monomial(chart, &[s1, s2], c_dz2))?;
    out = out.add(&MixedForm::monomial(chart, &[s1, s2b], c_dz2b))?;
    Ok(out)
}

fn check_side_form(name: &str, form: &MixedForm, chart: &Arc<Chart>, factor_dim: usize, cfg: &SampleConfig) -> Result<(), GcsError> {
    if **form.chart() != **chart {
        return Err(GcsError::Params(format!("{name} lives on `{}`, not `{}`", form.chart().name, chart.name)));
    }
    form.expect_degree(2).map_err(|_| GcsError::Params(format!("{name} must be a 2-form")))?;
    let d = form.d();
    if !d.is_zero() && !form_zero(&d, &Region::default(), cfg)?.holds() {
        return Err(GcsError::Params(format!("{name} is not closed")));
    }
    let k = factor_dim / 2;
    if k > 0 {
        let mut pow = MixedForm::one(chart);
        for _ in 0..k {
            pow = pow.wedge(form)?;
        }
        if pow.is_zero() {
            return Err(GcsError::Params(format!("{name} is degenerate")));
        }
    }
    Ok(())
}

/// `z₁ exp(−p/4 ξ(|z₁|) dz^{11̄}/|z₁|² − b/2 dz^{22̄} + dz¹/(2z₁)[(a/2−q)dz² − (a/2+q)dz^{2̄}]) ∧ e^{iσ}`
/// where `σ` is the (pulled back) symplectic form of the extra factor.
pub fn build_luttinger_spinor(
    chart: &Arc<Chart>,
    params: SurgeryParams,
    z1: &str,
    z2: &str,
    bump: &Arc<BumpSpec>,
    sigma_form: &MixedForm,
    cfg: &SampleConfig,
) -> Result<SpinorStructure, GcsError> {
    validate_surgery_params(params).map_err(|e| GcsError::Params(e.to_string()))?;
    check_side_form("the surface form", sigma_form, chart, chart.dim().saturating_sub(4), cfg)?;
    let expo = torus_exponent(chart, params, z1, z2, bump, BumpArgument::Modulus)?;
    let (w, ..) = complex_var(chart, z1)?;
    let rho = expo.exp()?.scale(&w).wedge(&sigma_form.scale(&Expr::i()).exp()?)?;
    Ok(SpinorStructure::plain("luttinger", rho))
}

/// The Gluck-twist extension spinor: the torus exponent with `ξ(|z₁|²)`, the
/// sphere block `−2/(1+|z₃|²)² dz²∧(z̄₃dz³ + z₃dz^{3̄})`, wedged with
/// `e^{iσ}` for the form of the extra factor.
#[allow(clippy::too_many_arguments)]
pub fn build_gluck_spinor(
    chart: &Arc<Chart>,
    params: SurgeryParams,
    z1: &str,
    z2: &str,
    z3: &str,
    bump: &Arc<BumpSpec>,
    r_form: &MixedForm,
    cfg: &SampleConfig,
) -> Result<SpinorStructure, GcsError> {
    validate_surgery_params(params).map_err(|e| GcsError::Params(e.to_string()))?;
    check_side_form("the factor form", r_form, chart, chart.dim().saturating_sub(6), cfg)?;
    let mut expo = torus_exponent(chart, params, z1, z2, bump, BumpArgument::ModulusSquared)?;
    expo = expo.add(&sphere_block(chart, z2, z3)?)?;
    let (w, ..) = complex_var(chart, z1)?;
    let rho = expo.exp()?.scale(&w).wedge(&r_form.scale(&Expr::i()).exp()?)?;
    Ok(SpinorStructure::plain("gluck", rho))
}

/// `−2/(1+|z₃|²)² dz² ∧ (z̄₃ dz³ + z₃ dz^{3̄})`.
pub fn sphere_block(chart: &Arc<Chart>, z2: &str, z3: &str) -> Result<MixedForm, GcsError> {
    let (_, _, s2, _) = complex_var(chart, z2)?;
    let (u, ub, s3, s3b) = complex_var(chart, z3)?;
    let den = Expr::one().add(&u.mul(&ub)).pow(-2).scale(&q(-2, 1));
    let a = MixedForm::monomial(chart, &[s2, s3], den.mul(&ub));
    let b = MixedForm::monomial(chart, &[s2, s3b], den.mul(&u));
    Ok(a.add(&b)?)
}
