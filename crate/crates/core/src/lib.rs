pub mod algebra;
pub mod error;
pub mod fermion;
pub mod psdo;
pub mod hierarchy;
pub mod cli;
