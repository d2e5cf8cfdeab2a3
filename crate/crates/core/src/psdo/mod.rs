mod family;
mod matrix;
mod operator;

pub use family::WaveSymbolFamily;
pub use matrix::{LaurentMatrix, MatrixSeries};
pub use operator::{pdo_apply, pdo_commutator, pdo_invert, pdo_left_apply, pdo_mul, pdo_project, Coefficient, PseudoDiffOp};
