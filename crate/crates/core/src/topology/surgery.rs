//! Torus surgery and Gluck twist on descriptors.

use super::descriptor::{
    GluingData, LocusKind, ManifoldDescriptor, Origin, Pi1, Signature, Spin, SurgeryLocus, TopologyError,
    TypeChangeComponent,
};
use super::group::{power, GroupPresentation, Word};
use super::params::{validate_surgery_params, SurgeryParams};

/// Optional data the caller knows about the result.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SurgeryOptions {
    pub spin_after: Option<Spin>,
    pub name: Option<String>,
}

fn check_locus(m: &ManifoldDescriptor, locus: &str, kind: LocusKind) -> Result<SurgeryLocus, TopologyError> {
    let l = m.locus(locus)?.clone();
    if l.kind != kind {
        return Err(TopologyError::LocusKind { locus: locus.into(), found: l.kind.to_string(), expected: kind.to_string() });
    }
    if !l.neighborhood_trivial {
        return Err(TopologyError::LocusFlags { locus: locus.into(), what: "trivial neighbourhood D²×locus".into() });
    }
    if !l.j_symplectic {
        return Err(TopologyError::LocusFlags { locus: locus.into(), what: "J-symplectic".into() });
    }
    Ok(l)
}

/// Images of the boundary loops `(∂D², circle₁, circle₂)` of the new piece
/// as words in the abstract letters `m = 1, l1 = 2, l2 = 3`, read off the
/// rows of the boundary matrix.
pub fn boundary_images(params: SurgeryParams) -> [Word; 3] {
    let mx = params.matrix();
    let row = |r: [i64; 3]| -> Word {
        let mut w = power(&[1], r[0]);
        w.extend(power(&[2], r[1]));
        w.extend(power(&[3], r[2]));
        w
    };
    [row(mx[0]), row(mx[1]), row(mx[2])]
}

fn exponent_sums(w: &[i64]) -> [i64; 3] {
    let mut s = [0; 3];
    for x in w {
        s[(x.abs() - 1) as usize] += x.signum();
    }
    s
}

/// `(π₁(M∖ν) ∗ ⟨t₁,t₂ | [t₁,t₂]⟩)/N`, with `N` generated by the image of
/// `∂D²` and by `tᵢ⁻¹·(image of the i-th circle)`.
pub fn surgery_pi1(g: &GluingData, params: SurgeryParams) -> Result<GroupPresentation, TopologyError> {
    let abstract_letters = GroupPresentation::free(&["m", "l1", "l2"]);
    let mx = params.matrix();
    let images: [Word; 3] = match &g.images {
        None => boundary_images(params),
        Some(ws) => {
            let mut out: [Word; 3] = Default::default();
            for i in 0..3 {
                out[i] = abstract_letters.parse_word(&ws[i])?;
                let sums = exponent_sums(&out[i]);
                if sums != mx[i] {
                    return Err(TopologyError::GluingWords(format!(
                        "image {i} `{}` has exponent sums {sums:?}, matrix row is {:?}",
                        ws[i], mx[i]
                    )));
                }
            }
            out
        }
    };
    let (mut prod, t) = g.complement.free_product(&GroupPresentation::torus("t1", "t2"));
    let base = [
        g.complement.parse_word(&g.meridian)?,
        g.complement.parse_word(&g.circle1)?,
        g.complement.parse_word(&g.circle2)?,
    ];
    let subst = |w: &Word| -> Word {
        let mut out = Vec::new();
        for &x in w {
            let b = &base[(x.abs() - 1) as usize];
            out.extend(power(b, x.signum()));
        }
        out
    };
    let t1 = prod.index_of(&t[0]).unwrap() as i64 + 1;
    let t2 = prod.index_of(&t[1]).unwrap() as i64 + 1;
    let mut n = vec![subst(&images[0])];
    let mut w1 = vec![-t1];
    w1.extend(subst(&images[1]));
    n.push(w1);
    let mut w2 = vec![-t2];
    w2.extend(subst(&images[2]));
    n.push(w2);
    prod = prod.quotient(&n);
    Ok(prod)
}

fn surgery(
    m: &ManifoldDescriptor,
    locus: &str,
    params: SurgeryParams,
    kind: LocusKind,
    origin: Origin,
    opts: &SurgeryOptions,
) -> Result<ManifoldDescriptor, TopologyError> {
    let l = check_locus(m, locus, kind)?;
    let check = validate_surgery_params(params).map_err(|e| TopologyError::Params(e.to_string()))?;
    let mut out = m.clone();
    out.name = opts.name.clone().unwrap_or_else(|| format!("{}~", m.name));
    out.provenance.push(format!("surgery along {locus} with {params}, det {}", check.det));
    out.pi1 = match &l.gluing {
        Some(g) => {
            out.provenance.push("π₁ from boundary matrix rows; abelianization-verified".into());
            Pi1::Known(surgery_pi1(g, params)?)
        }
        None => Pi1::Unknown(format!("no gluing data for locus {locus}")),
    };
    out.spin = opts.spin_after.unwrap_or(Spin::Unknown);
    out.provenance.push(match opts.spin_after {
        Some(s) => format!("spin after surgery supplied: {s}"),
        None => "spin after surgery not supplied".into(),
    });
    // χ and σ are preserved; H₂ is not tracked through surgery
    out.h2 = None;
    if let Signature::Known(_) = m.signature {
        out.provenance.push("signature preserved".into());
    }
    out.components.push(TypeChangeComponent::new(l.surgery_label(), origin));
    Ok(out)
}

pub fn apply_luttinger(
    m: &ManifoldDescriptor,
    locus: &str,
    params: SurgeryParams,
    opts: &SurgeryOptions,
) -> Result<ManifoldDescriptor, TopologyError> {
    surgery(m, locus, params, LocusKind::TorusSurface, Origin::Luttinger, opts)
}

pub fn apply_gluck(
    m: &ManifoldDescriptor,
    locus: &str,
    params: SurgeryParams,
    opts: &SurgeryOptions,
) -> Result<ManifoldDescriptor, TopologyError> {
    let mut out = surgery(m, locus, params, LocusKind::TorusFactorSphere, Origin::Gluck, opts)?;
    let l = m.locus(locus)?;
    out.provenance.push(format!(
        "φ restricts to torus surgery of multiplicity {} on D²×T² and to the Gluck twist on D²×S²",
        params.p
    ));
    if l.factor.factors() == [super::descriptor::Factor::Point] {
        out.provenance.push("R is a point: reduces to the 6-dimensional torus surgery".into());
    }
    Ok(out)
}
