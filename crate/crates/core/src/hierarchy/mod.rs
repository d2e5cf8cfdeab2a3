mod checks;
mod data;
mod residual;
mod signs;
mod wave;

pub use checks::*;
pub use data::{wave_coefficients, Hierarchy, HierarchyConfig, SchurCorruption, WaveCoefficients};
pub use residual::Residual;
pub use signs::{sign_eps, sign_eps_uniform, SignTable};
pub use wave::{
    baker_akhiezer, baker_akhiezer_full, build_wave_operator, dressed_shift, flow_generator, lax_operator, BakerFunction,
    Construction, Flow, WaveOperator,
};
