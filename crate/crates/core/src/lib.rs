//! Exact cell decomposition, quantifier elimination, Skolem sections and
//! definable-bijection classification for the semi-affine language over Q_p.

pub mod cells;
pub mod classify;
pub mod cli;
pub mod error;
pub mod formula;
pub mod gen;
pub mod grid;
pub mod lambda;
pub mod padic;
pub mod qe;
pub mod skolem;

pub use error::{Error, Result};
pub use formula::{Assignment, Formula, LinearPoly};
pub use lambda::{LambdaElem, LambdaSort};
pub use padic::{PadicRational, Prime, Valuation};
