//! Structural-then-sampled equality of scalars and forms.
//!
//! Differences that are not structurally zero are evaluated at seeded random
//! points of a region. Algebraic expressions at rational points are compared
//! exactly; anything involving transcendental or bump atoms is compared in
//! floating point with a relative tolerance, so the verdict is probabilistic.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::chart::{Chart, ChartError, CoordValue, Point, Region};
use super::expr::{EvalError, Expr};
use super::form::{Blade, MixedForm};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleConfig {
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig { samples: 32, seed: 0, tolerance: 1e-9 }
    }
}

impl SampleConfig {
    pub fn with_samples(self, samples: usize) -> Self {
        SampleConfig { samples, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        SampleConfig { seed, ..self }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EqualityError {
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error("could not find {wanted} regular sample points in `{region}` (last error: {last})")]
    SingularLocus { region: String, wanted: usize, last: String },
    #[error("chart mismatch: `{0}` vs `{1}`")]
    ChartMismatch(String, String),
}

/// How a comparison was decided.
#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    /// The difference simplified to zero.
    Structural,
    /// Zero at every sampled point. `exact` is false when floating evaluation
    /// was needed somewhere.
    Sampled { points: usize, exact: bool },
    /// Nonzero somewhere.
    Differs { blade: Option<String>, point: String, value: String },
}

impl Verdict {
    pub fn holds(&self) -> bool {
        !matches!(self, Verdict::Differs { .. })
    }
}

fn describe_point(p: &Point) -> String {
    let mut items: Vec<String> = p.iter().map(|(v, x)| format!("{v}={x}")).collect();
    items.sort();
    items.join(", ")
}

/// Draw `n` points of `region` at which every expression evaluates without
/// error.
pub fn regular_points(
    chart: &Chart,
    region: &Region,
    fixed: &[(String, CoordValue)],
    exprs: &[&Expr],
    n: usize,
    cfg: &SampleConfig,
) -> Result<Vec<Point>, EqualityError> {
    chart.check_region(region)?;
    let mut rng = cfg.rng();
    let mut out = Vec::with_capacity(n);
    let mut last = String::new();
    let budget = 20 * n + 50;
    for _ in 0..budget {
        if out.len() == n {
            break;
        }
        let p = chart.sample(region, fixed, &mut rng)?;
        match exprs.iter().try_for_each(|e| e.eval(&p).map(|_| ())) {
            Ok(()) => out.push(p),
            Err(e) => last = e.to_string(),
        }
    }
    if out.len() < n {
        return Err(EqualityError::SingularLocus { region: region.name.clone(), wanted: n, last });
    }
    Ok(out)
}

/// Test `value` against zero at a point, using the exact value when possible.
pub fn vanishes_at(e: &Expr, p: &Point, tol: f64) -> Result<(bool, bool), EvalError> {
    let (v, scale) = e.eval_scaled(p)?;
    Ok(match v {
        super::number::Value::Exact(q) => (q.is_zero(), true),
        super::number::Value::Float(c) => (c.norm() <= tol * scale.max(1.0), false),
    })
}

/// Scalar equality on a region.
pub fn expr_equal(
    a: &Expr,
    b: &Expr,
    chart: &Chart,
    region: &Region,
    cfg: &SampleConfig,
) -> Result<Verdict, EqualityError> {
    let diff = a.sub(b);
    if diff.is_zero() {
        return Ok(Verdict::Structural);
    }
    let pts = regular_points(chart, region, &[], &[&diff], cfg.samples, cfg)?;
    let mut exact = true;
    for p in &pts {
        let (zero, ex) = vanishes_at(&diff, p, cfg.tolerance).expect("regular point");
        exact &= ex;
        if !zero {
            return Ok(Verdict::Differs {
                blade: None,
                point: describe_point(p),
                value: diff.eval(p).unwrap().to_string(),
            });
        }
    }
    Ok(Verdict::Sampled { points: pts.len(), exact })
}

/// Coefficient-wise equality of two forms on a region. The same sample
/// points are used for every coefficient.
pub fn form_equal(
    a: &MixedForm,
    b: &MixedForm,
    region: &Region,
    cfg: &SampleConfig,
) -> Result<Verdict, EqualityError> {
    if a.same_chart(b).is_err() {
        return Err(EqualityError::ChartMismatch(a.chart().name.clone(), b.chart().name.clone()));
    }
    let diff = a.sub(b).expect("same chart");
    form_zero(&diff, region, cfg)
}

/// Whether every coefficient of a form vanishes on a region.
pub fn form_zero(f: &MixedForm, region: &Region, cfg: &SampleConfig) -> Result<Verdict, EqualityError> {
    if f.is_zero() {
        return Ok(Verdict::Structural);
    }
    let coeffs: BTreeMap<Blade, &Expr> = f.terms().iter().map(|(b, c)| (*b, c)).collect();
    let list: Vec<&Expr> = coeffs.values().copied().collect();
    let pts = regular_points(f.chart(), region, &[], &list, cfg.samples, cfg)?;
    let mut exact = true;
    for p in &pts {
        for (b, c) in &coeffs {
            let (zero, ex) = vanishes_at(c, p, cfg.tolerance).expect("regular point");
            exact &= ex;
            if !zero {
                return Ok(Verdict::Differs {
                    blade: Some(f.blade_name(*b)),
                    point: describe_point(p),
                    value: c.eval(p).unwrap().to_string(),
                });
            }
        }
    }
    Ok(Verdict::Sampled { points: pts.len(), exact })
}
