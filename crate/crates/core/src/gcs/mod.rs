//! Pure spinors: type, nondegeneracy, stability, integrability, B-field
//! transforms, the explicit extension spinors and piecewise assembly.

pub mod builders;
pub mod integrable;
pub mod piecewise;
pub mod spinor;

pub use builders::{build_gluck_spinor, build_luttinger_spinor};
pub use integrable::{check_integrable, Integrability};
pub use piecewise::{assemble_piecewise, Overlap, Piece, PiecewiseSpinor};
pub use spinor::{
    b_field_transform, check_nondegenerate, check_stable, type_at, GcsError, Hints, SpinorStructure,
    StabilityReport,
};
