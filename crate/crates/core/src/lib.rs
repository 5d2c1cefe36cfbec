//! Symbolic verification of stable generalized complex structures given as
//! pure spinors on coordinate charts, together with invariant bookkeeping
//! for torus surgery, Gluck twists and branched coverings.

pub mod exterior;
pub mod gcs;
pub mod scenario;
pub mod topology;
