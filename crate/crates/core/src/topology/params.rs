//! Gluing parameters `(p, q, a, b)` of the torus surgery.

use std::fmt;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SurgeryParams {
    pub p: i64,
    pub q: i64,
    pub a: i64,
    pub b: i64,
}

impl SurgeryParams {
    pub fn new(p: i64, q: i64, a: i64, b: i64) -> Self {
        SurgeryParams { p, q, a, b }
    }

    /// `pb − aq`.
    pub fn det(&self) -> i64 {
        self.p * self.b - self.a * self.q
    }

    /// `f(t) = pbt − aq`.
    pub fn f(&self, t: i64) -> i64 {
        self.p * self.b * t - self.a * self.q
    }

    /// Boundary matrix acting on `(θ⁰, θ¹, θ²)`.
    pub fn matrix(&self) -> [[i64; 3]; 3] {
        [[self.p, 0, self.q], [0, 1, 0], [self.a, 0, self.b]]
    }
}

impl fmt::Display for SurgeryParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(p={}, q={}, a={}, b={})", self.p, self.q, self.a, self.b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParamViolation {
    #[error("pb - aq = {0}, expected +1 or -1")]
    Determinant(i64),
    #[error("f(t) = pbt - aq vanishes at t = {endpoint} (f(0) = {f0}, f(1) = {f1})")]
    VanishesAtEndpoint { endpoint: u8, f0: i64, f1: i64 },
    #[error("f(t) = pbt - aq changes sign on [0,1] (f(0) = {f0}, f(1) = {f1})")]
    CrossesZero { f0: i64, f1: i64 },
}

/// Accepted parameters with their boundary data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamCheck {
    pub params: SurgeryParams,
    pub det: i64,
    pub matrix: [[i64; 3]; 3],
}

pub fn det3(m: &[[i64; 3]; 3]) -> i64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Checks `|pb − aq| = 1` and that `f(t) = pbt − aq` has no zero on `[0,1]`.
/// `f` is linear, so the latter is `f(0)·f(1) > 0`.
pub fn validate_surgery_params(params: SurgeryParams) -> Result<ParamCheck, ParamViolation> {
    let det = params.det();
    if det.abs() != 1 {
        return Err(ParamViolation::Determinant(det));
    }
    let (f0, f1) = (params.f(0), params.f(1));
    if f0 == 0 {
        return Err(ParamViolation::VanishesAtEndpoint { endpoint: 0, f0, f1 });
    }
    if f1 == 0 {
        return Err(ParamViolation::VanishesAtEndpoint { endpoint: 1, f0, f1 });
    }
    if f0.signum() != f1.signum() {
        return Err(ParamViolation::CrossesZero { f0, f1 });
    }
    Ok(ParamCheck { params, det, matrix: params.matrix() })
}
