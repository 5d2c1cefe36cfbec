//! Unbranched and branched coverings, and the Riemann–Hurwitz formula.

use super::descriptor::{
    LocusKind, ManifoldDescriptor, Origin, Pi1, Signature, Spin, TopologyError, TypeChangeComponent,
};
use super::group::GroupPresentation;

/// Branching indices of the points above one branch component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchComponent {
    pub locus: String,
    pub indices: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchingData {
    pub degree: u32,
    pub components: Vec<BranchComponent>,
}

impl BranchingData {
    /// Every index is at least 2 and the ramified sheets above each
    /// component fit into `d`; the rest are unramified.
    pub fn validate(&self) -> Result<(), TopologyError> {
        if self.degree < 1 {
            return Err(TopologyError::Degree(self.degree as i64));
        }
        for c in &self.components {
            if let Some(t) = c.indices.iter().find(|t| **t < 2) {
                return Err(TopologyError::Branching(format!("index {t} above {} is below 2", c.locus)));
            }
            let s: u32 = c.indices.iter().sum();
            if s > self.degree {
                return Err(TopologyError::Branching(format!(
                    "indices above {} sum to {s} > d = {}",
                    c.locus, self.degree
                )));
            }
        }
        Ok(())
    }

    pub fn unramified_sheets(&self, component: usize) -> u32 {
        self.degree - self.components[component].indices.iter().sum::<u32>()
    }
}

fn sheets(m: &ManifoldDescriptor, d: u32) -> Vec<TypeChangeComponent> {
    let mut out = Vec::new();
    for c in &m.components {
        for i in 0..d {
            out.push(TypeChangeComponent::new(c.label.clone(), Origin::CoverPreimage(i)));
        }
    }
    out
}

/// A `d`-fold unbranched cover. `subgroup` is a presentation of the
/// corresponding subgroup of π₁ when the caller has one.
pub fn apply_cover(
    m: &ManifoldDescriptor,
    d: i64,
    subgroup: Option<GroupPresentation>,
) -> Result<ManifoldDescriptor, TopologyError> {
    if d < 1 {
        return Err(TopologyError::Degree(d));
    }
    if d == 1 {
        return Ok(m.clone());
    }
    let du = d as u32;
    let mut out = m.clone();
    out.name = format!("{}^({d})", m.name);
    out.chi = d * m.chi;
    out.signature = match m.signature {
        Signature::Known(s) => Signature::Known(d * s),
        ref s => s.clone(),
    };
    out.spin = if m.spin == Spin::Spin { Spin::Spin } else { Spin::Unknown };
    out.pi1 = match subgroup {
        Some(g) => Pi1::Known(g),
        None => Pi1::Unknown(format!("{d}-fold cover without subgroup witness")),
    };
    out.h2 = None;
    out.components = sheets(m, du);
    out.loci.clear();
    out.provenance.push(format!("{d}-fold cover"));
    Ok(out)
}

/// χ of the total space: `d·χ(M) − Σ (t−1)·χ(B)` over branch components
/// `B` and the indices above them.
pub fn branched_chi(d: i64, chi: i64, branch: &[(i64, Vec<u32>)]) -> i64 {
    let mut out = d * chi;
    for (chi_b, idx) in branch {
        for t in idx {
            out -= (*t as i64 - 1) * chi_b;
        }
    }
    out
}

pub fn apply_branched_cover(m: &ManifoldDescriptor, b: &BranchingData) -> Result<ManifoldDescriptor, TopologyError> {
    b.validate()?;
    let mut data = Vec::new();
    for c in &b.components {
        let l = m.locus(&c.locus)?;
        if l.kind != LocusKind::Branch {
            return Err(TopologyError::LocusKind {
                locus: c.locus.clone(),
                found: l.kind.to_string(),
                expected: LocusKind::Branch.to_string(),
            });
        }
        if l.dim + 2 != m.dim {
            return Err(TopologyError::LocusFlags { locus: c.locus.clone(), what: "codimension 2".into() });
        }
        if !l.j_symplectic {
            return Err(TopologyError::LocusFlags { locus: c.locus.clone(), what: "J-symplectic".into() });
        }
        data.push((l.chi, c.indices.clone()));
    }
    let d = b.degree;
    let mut out = m.clone();
    out.name = format!("{}^({d},branched)", m.name);
    out.chi = branched_chi(d as i64, m.chi, &data);
    out.signature = if m.signature == Signature::Undefined { Signature::Undefined } else { Signature::Unknown };
    out.spin = Spin::Unknown;
    out.pi1 = Pi1::Unknown("branched cover".into());
    out.h2 = None;
    out.components = sheets(m, d);
    out.loci.clear();
    out.provenance.push(format!("{d}-fold branched cover; χ by the stratified count d·χ − Σ(t−1)·χ(B)"));
    Ok(out)
}

/// Checks `2 − 2g̃ = d(2 − 2g) − Σ(tᵢ − 1)` and `g̃ ≥ g`.
pub fn riemann_hurwitz_check(g_cover: i64, g_base: i64, d: i64, indices: &[i64]) -> Result<(), TopologyError> {
    if d < 1 {
        return Err(TopologyError::Degree(d));
    }
    if let Some(t) = indices.iter().find(|t| **t < 2) {
        return Err(TopologyError::RiemannHurwitz(format!("branching index {t} < 2")));
    }
    if g_cover < g_base {
        return Err(TopologyError::RiemannHurwitz(format!("g̃ = {g_cover} < g = {g_base}")));
    }
    let lhs = 2 - 2 * g_cover;
    let rhs = d * (2 - 2 * g_base) - indices.iter().map(|t| t - 1).sum::<i64>();
    if lhs != rhs {
        return Err(TopologyError::RiemannHurwitz(format!("2 − 2g̃ = {lhs} but d(2 − 2g) − Σ(t−1) = {rhs}")));
    }
    Ok(())
}

/// Smallest `(d, indices)` with `d ≤ 6`, indices in `2..=min(d, 6)` in
/// non-increasing order, satisfying the formula.
pub fn realize_genus(g_cover: i64, g_base: i64) -> Option<(i64, Vec<i64>)> {
    if g_cover < g_base {
        return None;
    }
    for d in 1..=6i64 {
        let need = d * (2 - 2 * g_base) - (2 - 2 * g_cover);
        if need < 0 {
            continue;
        }
        let top = d.min(6);
        if let Some(v) = partition(need, top) {
            return Some((d, v));
        }
    }
    None
}

/// Indices `t ≤ top` (`t ≥ 2`) with `Σ(t−1) = need`, greedy largest first.
fn partition(need: i64, top: i64) -> Option<Vec<i64>> {
    if need == 0 {
        return Some(vec![]);
    }
    if top < 2 {
        return None;
    }
    let mut v = Vec::new();
    let mut rest = need;
    while rest > 0 {
        let t = (rest + 1).min(top);
        v.push(t);
        rest -= t - 1;
    }
    Some(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn riemann_hurwitz_examples() {
        assert!(riemann_hurwitz_check(1, 0, 2, &[2, 2, 2, 2]).is_ok());
        assert!(riemann_hurwitz_check(3, 3, 1, &[]).is_ok());
        for d in 1..4 {
            assert!(riemann_hurwitz_check(0, 1, d, &[]).is_err());
        }
        assert!(riemann_hurwitz_check(1, 0, 2, &[2, 2]).is_err());
        assert!(riemann_hurwitz_check(1, 0, 2, &[1]).is_err());
    }

    #[test]
    fn realizations() {
        let (d, idx) = realize_genus(1, 0).unwrap();
        assert!(riemann_hurwitz_check(1, 0, d, &idx).is_ok());
        assert_eq!(realize_genus(2, 2), Some((1, vec![])));
        assert_eq!(realize_genus(0, 1), None);
        // a genus-3 surface is not covered by a genus-4 surface
        assert_eq!(realize_genus(4, 3), None);
    }

    #[test]
    fn sphere_double_cover() {
        assert_eq!(branched_chi(2, 2, &[(1, vec![2]), (1, vec![2])]), 2);
        assert_eq!(branched_chi(2, 12, &[(0, vec![2]), (0, vec![2])]), 24);
    }
}
