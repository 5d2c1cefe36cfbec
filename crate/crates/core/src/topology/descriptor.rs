//! Manifold descriptors: the invariants tracked through surgeries and covers.

use std::fmt;

use thiserror::Error;

use super::group::GroupPresentation;
use super::snf::AbelianGroup;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TopologyError {
    #[error("signature must be {expected} for dimension {dim}")]
    Signature { dim: u32, expected: &'static str },
    #[error("dimension must be even and positive, got {0}")]
    Dimension(u32),
    #[error("unknown locus `{0}`")]
    UnknownLocus(String),
    #[error("locus `{locus}` has kind {found}, expected {expected}")]
    LocusKind { locus: String, found: String, expected: String },
    #[error("locus `{locus}` fails hypothesis: {what}")]
    LocusFlags { locus: String, what: String },
    #[error("invalid surgery parameters: {0}")]
    Params(String),
    #[error("covering degree must be at least 1, got {0}")]
    Degree(i64),
    #[error("branching data inconsistent: {0}")]
    Branching(String),
    #[error("gluing words inconsistent with the boundary matrix: {0}")]
    GluingWords(String),
    #[error("group error: {0}")]
    Group(#[from] super::group::GroupError),
    #[error("Riemann-Hurwitz: {0}")]
    RiemannHurwitz(String),
    #[error("classification: {0}")]
    Classify(String),
    #[error("4-dimensional manifold has a non-T² type-change component `{0}`")]
    NonTorusComponent(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Spin {
    Spin,
    NonSpin,
    Unknown,
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Spin::Spin => "spin",
            Spin::NonSpin => "non-spin",
            Spin::Unknown => "unknown",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Signature {
    /// Dimension not divisible by 4.
    Undefined,
    Known(i64),
    Unknown,
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Signature::Undefined => f.write_str("undefined"),
            Signature::Known(s) => write!(f, "{s}"),
            Signature::Unknown => f.write_str("unknown"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pi1 {
    Known(GroupPresentation),
    Unknown(String),
}

impl Pi1 {
    pub fn abelianization(&self) -> Option<AbelianGroup> {
        match self {
            Pi1::Known(g) => Some(g.abelianization()),
            Pi1::Unknown(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct H2 {
    pub rank: u64,
    pub torsion: Vec<u64>,
}

/// A factor of a homotopy-type label.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Factor {
    Torus,
    Surface(u32),
    Sphere,
    Point,
    /// A generic factor with its name and first Betti number.
    Generic(String, u32),
}

impl Factor {
    pub fn b1(&self) -> u32 {
        match self {
            Factor::Torus => 2,
            Factor::Surface(g) => 2 * g,
            Factor::Sphere | Factor::Point => 0,
            Factor::Generic(_, b) => *b,
        }
    }

    fn normal(self) -> Factor {
        match self {
            Factor::Surface(0) => Factor::Sphere,
            Factor::Surface(1) => Factor::Torus,
            f => f,
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::Torus => f.write_str("T²"),
            Factor::Surface(g) => write!(f, "Σ{}", subscript(*g as u64)),
            Factor::Sphere => f.write_str("S²"),
            Factor::Point => f.write_str("pt"),
            Factor::Generic(n, _) => f.write_str(n),
        }
    }
}

pub fn subscript(n: u64) -> String {
    n.to_string().chars().map(|c| char::from_u32(0x2080 + c.to_digit(10).unwrap()).unwrap()).collect()
}

/// A product of factors, kept in the order given (points dropped).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Label(Vec<Factor>);

impl Label {
    pub fn new(factors: Vec<Factor>) -> Label {
        let mut fs: Vec<Factor> = factors.into_iter().map(Factor::normal).filter(|f| *f != Factor::Point).collect();
        if fs.is_empty() {
            fs.push(Factor::Point);
        }
        Label(fs)
    }

    pub fn factors(&self) -> &[Factor] {
        &self.0
    }

    pub fn b1(&self) -> u32 {
        self.0.iter().map(Factor::b1).sum()
    }

    pub fn product(&self, other: &Label) -> Label {
        Label::new(self.0.iter().chain(other.0.iter()).cloned().collect())
    }

    pub fn is_torus(&self) -> bool {
        self.0 == [Factor::Torus]
    }

    /// Same factors up to order.
    pub fn same_type(&self, other: &Label) -> bool {
        let mut a = self.0.clone();
        let mut b = other.0.clone();
        a.sort();
        b.sort();
        a == b
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        f.write_str(&parts.join("×"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Origin {
    Original,
    Luttinger,
    Gluck,
    CoverPreimage(u32),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Original => f.write_str("original"),
            Origin::Luttinger => f.write_str("luttinger"),
            Origin::Gluck => f.write_str("gluck"),
            Origin::CoverPreimage(i) => write!(f, "cover sheet {i}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeChangeComponent {
    pub label: Label,
    pub origin: Origin,
}

impl TypeChangeComponent {
    pub fn new(label: Label, origin: Origin) -> Self {
        TypeChangeComponent { label, origin }
    }

    pub fn b1(&self) -> u32 {
        self.label.b1()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LocusKind {
    /// `T²×Σ`, for the torus surgery.
    TorusSurface,
    /// `T²×R×S²`, for the Gluck twist.
    TorusFactorSphere,
    /// A codimension-2 submanifold along which a cover branches.
    Branch,
}

impl fmt::Display for LocusKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LocusKind::TorusSurface => "T²×Σ",
            LocusKind::TorusFactorSphere => "T²×R×S²",
            LocusKind::Branch => "branch locus",
        })
    }
}

/// π₁ data of the complement of a tubular neighbourhood of a locus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GluingData {
    pub complement: GroupPresentation,
    /// Words in the complement for the meridian `∂D²` and the two torus
    /// circles.
    pub meridian: String,
    pub circle1: String,
    pub circle2: String,
    /// Optional explicit images of the three boundary loops of the new
    /// piece, as words in the letters `m`, `l1`, `l2`.
    pub images: Option<[String; 3]>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurgeryLocus {
    pub name: String,
    pub kind: LocusKind,
    /// The `Σ` (or `R`, or branch component) factor.
    pub factor: Label,
    pub dim: u32,
    pub chi: i64,
    pub neighborhood_trivial: bool,
    pub j_symplectic: bool,
    pub gluing: Option<GluingData>,
}

impl SurgeryLocus {
    /// Type-change label created by a surgery along this locus.
    pub fn surgery_label(&self) -> Label {
        match self.kind {
            LocusKind::TorusSurface => Label::new(vec![Factor::Torus]).product(&self.factor),
            LocusKind::TorusFactorSphere => {
                Label::new(vec![Factor::Torus]).product(&self.factor).product(&Label::new(vec![Factor::Sphere]))
            }
            LocusKind::Branch => self.factor.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifoldDescriptor {
    pub name: String,
    pub dim: u32,
    pub chi: i64,
    pub signature: Signature,
    pub spin: Spin,
    pub pi1: Pi1,
    pub h2: Option<H2>,
    pub components: Vec<TypeChangeComponent>,
    pub loci: Vec<SurgeryLocus>,
    pub provenance: Vec<String>,
}

impl ManifoldDescriptor {
    pub fn new(name: &str, dim: u32, chi: i64, signature: Signature) -> Result<Self, TopologyError> {
        if dim == 0 || !dim.is_multiple_of(2) {
            return Err(TopologyError::Dimension(dim));
        }
        match (&signature, dim.is_multiple_of(4)) {
            (Signature::Undefined, true) => return Err(TopologyError::Signature { dim, expected: "present" }),
            (Signature::Known(_) | Signature::Unknown, false) => {
                return Err(TopologyError::Signature { dim, expected: "absent" })
            }
            _ => {}
        }
        Ok(ManifoldDescriptor {
            name: name.into(),
            dim,
            chi,
            signature,
            spin: Spin::Unknown,
            pi1: Pi1::Unknown("not supplied".into()),
            h2: None,
            components: vec![],
            loci: vec![],
            provenance: vec![],
        })
    }

    pub fn locus(&self, name: &str) -> Result<&SurgeryLocus, TopologyError> {
        self.loci.iter().find(|l| l.name == name).ok_or_else(|| TopologyError::UnknownLocus(name.into()))
    }

    pub fn heterogeneous(&self) -> bool {
        self.components.windows(2).any(|w| w[0].b1() != w[1].b1())
            || self.components.iter().any(|c| c.b1() != self.components[0].b1())
    }
}

/// Component listing with the label-level homotopy distinction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentsReport {
    pub entries: Vec<(String, u32, String)>,
    pub heterogeneous: bool,
    pub notes: Vec<String>,
}

pub fn components_report(m: &ManifoldDescriptor) -> Result<ComponentsReport, TopologyError> {
    let mut notes = Vec::new();
    if m.dim == 4 {
        if let Some(c) = m.components.iter().find(|c| !c.label.is_torus()) {
            return Err(TopologyError::NonTorusComponent(c.label.to_string()));
        }
        notes.push("dimension 4: every type-change component is T²".to_string());
    }
    let heterogeneous = m.heterogeneous();
    if heterogeneous {
        notes.push("components distinguished by b1 of their labels".to_string());
    }
    Ok(ComponentsReport {
        entries: m.components.iter().map(|c| (c.label.to_string(), c.b1(), c.origin.to_string())).collect(),
        heterogeneous,
        notes,
    })
}
