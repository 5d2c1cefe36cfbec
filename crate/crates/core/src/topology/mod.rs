//! Invariant bookkeeping for surgeries, twists and coverings.

pub mod classify;
pub mod cover;
pub mod descriptor;
pub mod group;
pub mod params;
pub mod snf;
pub mod surgery;

pub use classify::{classify_simply_connected_5, smale_barden_k};
pub use cover::{
    apply_branched_cover, apply_cover, branched_chi, realize_genus, riemann_hurwitz_check, BranchComponent,
    BranchingData,
};
pub use descriptor::{
    components_report, ComponentsReport, Factor, GluingData, Label, LocusKind, ManifoldDescriptor, Origin, Pi1,
    Signature, Spin, SurgeryLocus, TopologyError, TypeChangeComponent, H2,
};
pub use group::{GroupError, GroupPresentation, Word};
pub use params::{validate_surgery_params, ParamCheck, ParamViolation, SurgeryParams};
pub use snf::{cokernel, smith_diagonal, AbelianGroup};
pub use surgery::{apply_gluck, apply_luttinger, boundary_images, surgery_pi1, SurgeryOptions};
