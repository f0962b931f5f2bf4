//! Capped `l_{2,1}`-norm linear discriminant analysis.
//!
//! The crate is organised bottom-up:
//!
//! * [`dataset`]: labelled column-sample matrices and class statistics
//! * [`norms`]: the capped `l_{p,q}` family
//! * [`linalg`]: symmetric and symmetric-definite eigensolvers
//! * [`scatter`]: centered class matrices and (re)weighted scatters
//! * [`discriminant`]: classical LDA and the capped-norm solver
//! * [`eval`]: 1-NN classification, stratified k-fold CV, epsilon grids
//! * [`synth`]: the two-strip artificial dataset and Gaussian pollution
//!
//! Samples are always matrix columns.

pub mod dataset;
pub mod discriminant;
pub mod error;
pub mod eval;
pub mod linalg;
pub mod norms;
pub mod scatter;
pub mod synth;

pub use dataset::{ClassStats, Dataset};
pub use discriminant::{
    clda_fit, clda_objective, lda_fit, project, CldaConfig, CldaObjective, Projection, Ridge,
};
pub use error::{Error, Result};
pub use eval::{epsilon_grid, kfold_cv, nn_classify, EpsilonSpec, EvalReport, GridPoint, Method};
pub use linalg::{gen_eig_spd, sym_eig, EigenPairs};
pub use norms::{capped_lpq, l21_norm, CappedNormParams};
pub use scatter::{build_centered, clda_weights, weighted_scatters, ScatterPair, WeightDiag};
pub use synth::{add_gaussian_noise, make_artificial, NoiseSpec};
