//! Mixed-degree differential forms on a chart.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use super::chart::{Chart, Point};
use super::expr::{EvalError, Expr, Var};
use super::number::{GaussRat, Value};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormError {
    #[error("chart mismatch: `{0}` vs `{1}`")]
    ChartMismatch(String, String),
    #[error("exp of a form needs only even positive degrees, found degree {0}")]
    NotNilpotent(usize),
    #[error("expected a form of pure degree {expected}, found degrees {found:?}")]
    Degree { expected: usize, found: Vec<usize> },
    #[error("division by a form that is not a nonzero function")]
    BadDivisor,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Increasing multi-index over chart slots, stored as a bit set.
pub type Blade = u64;

pub fn blade_degree(b: Blade) -> usize {
    b.count_ones() as usize
}

/// Sign of `e_a ∧ e_b` relative to `e_{a|b}`, or `None` if they overlap.
pub fn wedge_sign(a: Blade, b: Blade) -> Option<i64> {
    if a & b != 0 {
        return None;
    }
    // count pairs (i in a, j in b) with i > j
    let mut swaps = 0u32;
    let mut bb = b;
    while bb != 0 {
        let j = bb.trailing_zeros();
        swaps += (a >> (j + 1)).count_ones();
        bb &= bb - 1;
    }
    Some(if swaps.is_multiple_of(2) { 1 } else { -1 })
}

/// Sign produced by removing slot `j` from blade `b` via an interior
/// product: `(-1)^(number of slots of b before j)`.
fn removal_sign(b: Blade, j: u32) -> i64 {
    let before = (b & ((1u64 << j) - 1)).count_ones();
    if before.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MixedForm {
    chart: Arc<Chart>,
    terms: BTreeMap<Blade, Expr>,
}

impl MixedForm {
    pub fn zero(chart: &Arc<Chart>) -> Self {
        MixedForm { chart: chart.clone(), terms: BTreeMap::new() }
    }

    pub fn scalar(chart: &Arc<Chart>, f: Expr) -> Self {
        let mut m = MixedForm::zero(chart);
        m.insert(0, f);
        m
    }

    pub fn one(chart: &Arc<Chart>) -> Self {
        MixedForm::scalar(chart, Expr::one())
    }

    /// The basis 1-form of a slot.
    pub fn basis(chart: &Arc<Chart>, slot: usize) -> Self {
        let mut m = MixedForm::zero(chart);
        m.insert(1u64 << slot, Expr::one());
        m
    }

    /// `d` of the coordinate symbol `v`, i.e. the basis 1-form of its slot.
    pub fn differential(chart: &Arc<Chart>, v: &Var) -> Option<Self> {
        chart.slot_of(v).map(|s| MixedForm::basis(chart, s))
    }

    /// Build from an unordered slot list; repeated slots give zero and the
    /// permutation sign is applied.
    pub fn monomial(chart: &Arc<Chart>, slots: &[usize], coeff: Expr) -> Self {
        let mut acc = MixedForm::scalar(chart, coeff);
        for &s in slots {
            acc = acc.wedge_unchecked(&MixedForm::basis(chart, s));
        }
        acc
    }

    fn insert(&mut self, b: Blade, c: Expr) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&b) {
            Some(x) => {
                *x = x.add(&c);
                if x.is_zero() {
                    self.terms.remove(&b);
                }
            }
            None => {
                self.terms.insert(b, c);
            }
        }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn terms(&self) -> &BTreeMap<Blade, Expr> {
        &self.terms
    }

    pub fn coeff(&self, b: Blade) -> Expr {
        self.terms.get(&b).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.terms.keys().map(|b| blade_degree(*b)).collect();
        d.sort();
        d.dedup();
        d
    }

    /// Homogeneous component of degree `k`.
    pub fn part(&self, k: usize) -> MixedForm {
        MixedForm {
            chart: self.chart.clone(),
            terms: self.terms.iter().filter(|(b, _)| blade_degree(**b) == k).map(|(b, c)| (*b, c.clone())).collect(),
        }
    }

    pub fn scalar_part(&self) -> Expr {
        self.coeff(0)
    }

    pub fn same_chart(&self, o: &MixedForm) -> Result<(), FormError> {
        if Arc::ptr_eq(&self.chart, &o.chart) || *self.chart == *o.chart {
            Ok(())
        } else {
            Err(FormError::ChartMismatch(self.chart.name.clone(), o.chart.name.clone()))
        }
    }

    pub fn expect_degree(&self, k: usize) -> Result<(), FormError> {
        let found = self.degrees();
        if found.iter().all(|d| *d == k) {
            Ok(())
        } else {
            Err(FormError::Degree { expected: k, found })
        }
    }

    pub fn add(&self, o: &MixedForm) -> Result<MixedForm, FormError> {
        self.same_chart(o)?;
        Ok(self.add_unchecked(o))
    }

    pub(crate) fn add_unchecked(&self, o: &MixedForm) -> MixedForm {
        let mut out = self.clone();
        for (b, c) in &o.terms {
            out.insert(*b, c.clone());
        }
        out
    }

    pub fn sub(&self, o: &MixedForm) -> Result<MixedForm, FormError> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> MixedForm {
        self.map_coeffs(|c| c.neg())
    }

    pub fn scale(&self, f: &Expr) -> MixedForm {
        self.map_coeffs(|c| c.mul(f))
    }

    pub fn scale_const(&self, k: &GaussRat) -> MixedForm {
        self.map_coeffs(|c| c.scale(k))
    }

    pub fn map_coeffs(&self, f: impl Fn(&Expr) -> Expr) -> MixedForm {
        let mut out = MixedForm::zero(&self.chart);
        for (b, c) in &self.terms {
            out.insert(*b, f(c));
        }
        out
    }

    pub fn wedge(&self, o: &MixedForm) -> Result<MixedForm, FormError> {
        self.same_chart(o)?;
        Ok(self.wedge_unchecked(o))
    }

    pub(crate) fn wedge_unchecked(&self, o: &MixedForm) -> MixedForm {
        let mut out = MixedForm::zero(&self.chart);
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                if let Some(s) = wedge_sign(*a, *b) {
                    let c = ca.mul(cb);
                    out.insert(a | b, if s < 0 { c.neg() } else { c });
                }
            }
        }
        out
    }

    /// Exterior derivative.
    pub fn d(&self) -> MixedForm {
        let mut out = MixedForm::zero(&self.chart);
        for (b, c) in &self.terms {
            for (s, slot) in self.chart.slots.iter().enumerate() {
                let bit = 1u64 << s;
                if b & bit != 0 {
                    continue;
                }
                let dc = c.diff(&slot.var);
                if dc.is_zero() {
                    continue;
                }
                let sign = wedge_sign(bit, *b).unwrap();
                out.insert(b | bit, if sign < 0 { dc.neg() } else { dc });
            }
        }
        out
    }

    /// Interior product with a vector given by its slot components.
    pub fn interior(&self, comps: &BTreeMap<usize, Expr>) -> MixedForm {
        let mut out = MixedForm::zero(&self.chart);
        for (b, c) in &self.terms {
            let mut bb = *b;
            while bb != 0 {
                let j = bb.trailing_zeros();
                bb &= bb - 1;
                if let Some(x) = comps.get(&(j as usize)) {
                    let t = c.mul(x);
                    let sign = removal_sign(*b, j);
                    out.insert(b & !(1u64 << j), if sign < 0 { t.neg() } else { t });
                }
            }
        }
        out
    }

    /// `exp` of a nilpotent form (only even positive degrees), i.e. the
    /// truncated series `Σ b^k / k!`.
    pub fn exp(&self) -> Result<MixedForm, FormError> {
        if let Some(d) = self.degrees().into_iter().find(|d| *d == 0 || d % 2 == 1) {
            return Err(FormError::NotNilpotent(d));
        }
        let mut acc = MixedForm::one(&self.chart);
        let mut power = MixedForm::one(&self.chart);
        let mut k = 1i64;
        loop {
            power = power.wedge_unchecked(self).scale_const(&GaussRat::from_ratio(1, k));
            if power.is_zero() {
                break;
            }
            acc = acc.add_unchecked(&power);
            k += 1;
        }
        Ok(acc)
    }

    /// `exp` of a form whose degree-0 part may be nonzero: `e^{f} · exp(rest)`.
    pub fn exp_general(&self) -> Result<MixedForm, FormError> {
        let f = self.scalar_part();
        let mut rest = self.clone();
        rest.terms.remove(&0);
        let e = rest.exp()?;
        Ok(if f.is_zero() { e } else { e.scale(&Expr::apply(super::expr::Func::Exp, &f)) })
    }

    /// Complex conjugate: coefficients are conjugated and `dz ↔ dz̄`.
    pub fn conj(&self) -> MixedForm {
        let perm: Vec<usize> = self
            .chart
            .slots
            .iter()
            .map(|s| self.chart.slot_of(&s.var.conj()).expect("conjugate slot"))
            .collect();
        let mut out = MixedForm::zero(&self.chart);
        for (b, c) in &self.terms {
            let slots: Vec<usize> = (0..64).filter(|j| b & (1u64 << j) != 0).map(|j| perm[j]).collect();
            out = out.add_unchecked(&MixedForm::monomial(&self.chart, &slots, c.conj()));
        }
        out
    }

    pub fn re(&self) -> MixedForm {
        self.add_unchecked(&self.conj()).scale_const(&GaussRat::from_ratio(1, 2))
    }

    pub fn im(&self) -> MixedForm {
        self.add_unchecked(&self.conj().neg())
            .scale_const(&GaussRat::new(num_rational::BigRational::from_integer(0.into()), num_rational::BigRational::new((-1).into(), 2.into())))
    }

    /// Divide by a nowhere-zero 0-form.
    pub fn div_scalar(&self, f: &Expr) -> Result<MixedForm, FormError> {
        let inv = f.inv().ok_or(FormError::BadDivisor)?;
        Ok(self.scale(&inv))
    }

    pub fn substitute_coeffs(&self, map: &std::collections::HashMap<Var, Expr>) -> MixedForm {
        self.map_coeffs(|c| c.substitute(map))
    }

    /// Evaluate every coefficient at a point.
    pub fn eval(&self, point: &Point) -> Result<BTreeMap<Blade, Value>, FormError> {
        let mut out = BTreeMap::new();
        for (b, c) in &self.terms {
            out.insert(*b, c.eval(point)?);
        }
        Ok(out)
    }

    /// Coefficient of the top-degree blade.
    pub fn top_coeff(&self) -> Expr {
        let dim = self.chart.dim();
        let top = if dim == 64 { u64::MAX } else { (1u64 << dim) - 1 };
        self.coeff(top)
    }

    /// Transplant a form onto an equal chart object.
    pub fn with_chart(&self, chart: &Arc<Chart>) -> Result<MixedForm, FormError> {
        if *chart.as_ref() != *self.chart {
            return Err(FormError::ChartMismatch(self.chart.name.clone(), chart.name.clone()));
        }
        Ok(MixedForm { chart: chart.clone(), terms: self.terms.clone() })
    }

    pub fn blade_name(&self, b: Blade) -> String {
        if b == 0 {
            return "1".to_string();
        }
        let parts: Vec<String> =
            (0..self.chart.dim()).filter(|j| b & (1u64 << j) != 0).map(|j| self.chart.slots[j].differential_name()).collect();
        parts.join("^")
    }
}

impl fmt::Display for MixedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        // order by degree, then blade
        let mut keys: Vec<&Blade> = self.terms.keys().collect();
        keys.sort_by_key(|b| (blade_degree(**b), **b));
        for b in keys {
            let c = &self.terms[b];
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if *b == 0 {
                write!(f, "({c})")?;
            } else if c.as_constant().is_some_and(|k| k.is_one()) {
                write!(f, "{}", self.blade_name(*b))?;
            } else {
                write!(f, "({c})*{}", self.blade_name(*b))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::chart::{Coord, CoordKind};

    fn c4() -> Arc<Chart> {
        Chart::new(
            "c4",
            vec![
                Coord { name: "x1".into(), kind: CoordKind::Real },
                Coord { name: "y1".into(), kind: CoordKind::Real },
                Coord { name: "x2".into(), kind: CoordKind::Real },
                Coord { name: "y2".into(), kind: CoordKind::Real },
            ],
        )
        .unwrap()
    }

    fn dz() -> Arc<Chart> {
        Chart::new(
            "cz",
            vec![Coord { name: "z1".into(), kind: CoordKind::Complex }, Coord { name: "z2".into(), kind: CoordKind::Complex }],
        )
        .unwrap()
    }

    // permutation-sign oracle: sign of sorting a slot sequence by bubble sort
    fn perm_sign(seq: &[usize]) -> i64 {
        let mut v = seq.to_vec();
        let mut s = 1;
        for i in 0..v.len() {
            for j in 0..v.len() - 1 - i {
                if v[j] > v[j + 1] {
                    v.swap(j, j + 1);
                    s = -s;
                }
            }
        }
        s
    }

    #[test]
    fn wedge_sign_matches_permutation_oracle() {
        for a in 0u64..16 {
            for b in 0u64..16 {
                let sa: Vec<usize> = (0..4).filter(|j| a & (1 << j) != 0).collect();
                let sb: Vec<usize> = (0..4).filter(|j| b & (1 << j) != 0).collect();
                let expected = if a & b != 0 {
                    None
                } else {
                    Some(perm_sign(&[sa.clone(), sb.clone()].concat()))
                };
                assert_eq!(wedge_sign(a, b), expected, "{a} {b}");
            }
        }
    }

    #[test]
    fn antisymmetry_of_complex_differentials() {
        let c = dz();
        let dz1 = MixedForm::basis(&c, 0);
        let dz2 = MixedForm::basis(&c, 2);
        let a = dz1.wedge(&dz2).unwrap();
        let b = dz2.wedge(&dz1).unwrap();
        assert_eq!(a, b.neg());
        assert_eq!(a.coeff(0b101), Expr::one());
        let rho = a.add(&MixedForm::scalar(&c, Expr::int(3))).unwrap();
        assert_eq!(MixedForm::one(&c).wedge(&rho).unwrap(), rho);
    }

    #[test]
    fn exp_of_two_symplectic_blocks() {
        let c = c4();
        let w1 = MixedForm::monomial(&c, &[0, 1], Expr::one());
        let w2 = MixedForm::monomial(&c, &[2, 3], Expr::one());
        let w = w1.add(&w2).unwrap();
        let e = w.exp().unwrap();
        // brute-force: 1 + w + w^2/2 with w^2 = 2 dx1dy1dx2dy2
        let expected = MixedForm::one(&c).add(&w).unwrap().add(&MixedForm::monomial(&c, &[0, 1, 2, 3], Expr::one())).unwrap();
        assert_eq!(e, expected);
        assert_eq!(MixedForm::zero(&c).exp().unwrap(), MixedForm::one(&c));
        assert!(matches!(MixedForm::basis(&c, 0).exp(), Err(FormError::NotNilpotent(1))));
        assert!(matches!(MixedForm::one(&c).exp(), Err(FormError::NotNilpotent(0))));
    }

    #[test]
    fn d_of_cor_spinor_pieces() {
        let c = dz();
        let z1 = Expr::var(Var::holo("z1"));
        let rho = MixedForm::scalar(&c, z1).add(&MixedForm::monomial(&c, &[0, 2], Expr::one())).unwrap();
        assert_eq!(rho.d(), MixedForm::basis(&c, 0));
    }

    #[test]
    fn interior_on_complex_blade() {
        let c = dz();
        let dz12 = MixedForm::monomial(&c, &[0, 2], Expr::one());
        let mut x = BTreeMap::new();
        x.insert(2usize, Expr::int(-1));
        assert_eq!(dz12.interior(&x), MixedForm::basis(&c, 0));
        assert!(MixedForm::scalar(&c, Expr::int(5)).interior(&x).is_zero());
    }

    #[test]
    fn conjugation_swaps_dz_and_dzbar() {
        let c = dz();
        let dz1 = MixedForm::basis(&c, 0);
        let dz1b = MixedForm::basis(&c, 1);
        assert_eq!(dz1.conj(), dz1b);
        let a = dz1.wedge(&dz1b).unwrap();
        assert_eq!(a.conj(), a.neg());
        // dz∧dz̄ = -2i dx∧dy is purely imaginary
        assert!(a.re().is_zero());
    }
}
