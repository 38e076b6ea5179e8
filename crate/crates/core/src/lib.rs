pub mod bounds;
pub mod chain;
pub mod circuit;
pub mod error;
pub mod field;
pub mod format;
pub mod ideal;
pub mod linalg;
pub mod nucleus;
pub mod path;
pub mod pit;
pub mod poly;
pub mod report;
pub mod sg;

pub use circuit::{Circuit, Limits, MultTerm};
pub use error::{Error, Result};
pub use field::{FieldSpec, Scalar};
pub use linalg::{FormVec, Subspace, Transform};
