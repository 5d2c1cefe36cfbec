//! Exact scalars, charts and mixed-degree differential forms.

pub mod chart;
pub mod equality;
pub mod expr;
pub mod form;
pub mod map;
pub mod number;
pub mod section;

pub use chart::{Chart, Coord, CoordKind, Point, Region};
pub use expr::{BumpSpec, Expr, Func, Var, VarKind};
pub use equality::{expr_equal, form_equal, SampleConfig, Verdict};
pub use form::MixedForm;
pub use map::CoordinateMap;
pub use number::{GaussRat, Value};
pub use section::{courant_bracket, pairing, GeneralizedSection, VectorField};
