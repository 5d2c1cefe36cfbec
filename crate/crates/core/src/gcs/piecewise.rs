//! Spinors glued from pieces that agree on overlaps.

use crate::exterior::chart::Region;
use crate::exterior::equality::{form_equal, SampleConfig, Verdict};
use crate::exterior::map::CoordinateMap;

use super::integrable::{check_integrable, Integrability};
use super::spinor::{check_stable, normalized, verdict_text, GcsError, SpinorStructure, StabilityReport};

#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    pub name: String,
    pub spinor: SpinorStructure,
}

/// Two pieces compared on a common chart `W` through maps into each piece's
/// chart. Spinors are compared after dividing by their degree-0 parts, since
/// a pure spinor is only defined up to a nowhere-zero function.
#[derive(Clone, Debug, PartialEq)]
pub struct Overlap {
    pub name: String,
    pub a: String,
    pub b: String,
    pub map_a: CoordinateMap,
    pub map_b: CoordinateMap,
    pub region: Region,
    pub required: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OverlapResult {
    pub name: String,
    pub spinor: Verdict,
    pub h: Verdict,
}

impl OverlapResult {
    pub fn agrees(&self) -> bool {
        self.spinor.holds() && self.h.holds()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseSpinor {
    pub pieces: Vec<Piece>,
    pub overlaps: Vec<Overlap>,
    pub results: Vec<OverlapResult>,
    pub certificates: Vec<(String, Integrability)>,
    pub stability: Vec<(String, StabilityReport)>,
}

impl PiecewiseSpinor {
    /// Type-change loci of the pieces (empty ones omitted).
    pub fn locus(&self) -> Vec<String> {
        self.stability
            .iter()
            .filter(|(_, r)| r.locus_nonempty)
            .map(|(n, r)| format!("{n}: {}", r.locus_label()))
            .collect()
    }
}

/// Compare two pieces on one overlap.
pub fn compare_on_overlap(
    pa: &SpinorStructure,
    pb: &SpinorStructure,
    ov: &Overlap,
    cfg: &SampleConfig,
) -> Result<OverlapResult, GcsError> {
    let ra = normalized(&ov.map_a.pullback(&pa.rho)?)?;
    let rb = normalized(&ov.map_b.pullback(&pb.rho)?)?;
    let spinor = form_equal(&ra, &rb, &ov.region, cfg)?;
    let ha = ov.map_a.pullback(&pa.h)?;
    let hb = ov.map_b.pullback(&pb.h)?;
    let h = form_equal(&ha, &hb, &ov.region, cfg)?;
    Ok(OverlapResult { name: ov.name.clone(), spinor, h })
}

/// Check every piece (integrable and stable on its region), then every
/// required overlap.
pub fn assemble_piecewise(
    pieces: Vec<Piece>,
    overlaps: Vec<Overlap>,
    cfg: &SampleConfig,
) -> Result<PiecewiseSpinor, GcsError> {
    let mut certificates = Vec::new();
    let mut stability = Vec::new();
    for p in &pieces {
        let integ = check_integrable(&p.spinor, cfg)?;
        if let Integrability::Infeasible { reason } = &integ {
            return Err(GcsError::PieceCheck(p.name.clone(), format!("integrable: {reason}")));
        }
        let st = check_stable(&p.spinor, &[], cfg)?;
        if !st.stable {
            return Err(GcsError::PieceCheck(p.name.clone(), "stable".into()));
        }
        certificates.push((p.name.clone(), integ));
        stability.push((p.name.clone(), st));
    }
    let find = |n: &str| -> Result<&Piece, GcsError> {
        pieces.iter().find(|p| p.name == n).ok_or_else(|| GcsError::UnknownPiece(n.into()))
    };
    let mut results = Vec::new();
    for ov in &overlaps {
        let pa = find(&ov.a)?;
        let pb = find(&ov.b)?;
        let r = compare_on_overlap(&pa.spinor, &pb.spinor, ov, cfg)?;
        if ov.required && !r.agrees() {
            let (what, v) = if !r.spinor.holds() { ("spinor", &r.spinor) } else { ("H", &r.h) };
            return Err(GcsError::OverlapMismatch {
                overlap: ov.name.clone(),
                what: what.into(),
                detail: verdict_text(v),
            });
        }
        results.push(r);
    }
    Ok(PiecewiseSpinor { pieces, overlaps, results, certificates, stability })
}
