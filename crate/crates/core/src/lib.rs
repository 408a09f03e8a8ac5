//! Minimal Complexity Machine.
//!
//! Hyperplane classifiers, linear and kernel, trained by minimizing the ratio
//! `h` of the largest to the smallest functional margin over the training set.
//! `h²` bounds the VC dimension of the classifier from above and below, and
//! minimizing `h` reduces to a single linear program.
//!
//! The crate is organized bottom-up:
//!
//! - [`lp`]: dense two-phase simplex and CPLEX-LP text I/O.
//! - [`kernel`]: kernel functions and Gram matrices.
//! - [`formulation`]: assembly of the hard/soft linear and soft kernel LPs,
//!   and extraction of trained models from LP solutions.
//! - [`capacity`]: `h`, the radius/margin ratio and support-vector statistics.
//! - [`model`]: model types, decision functions and the JSON model format.
//! - [`data`]: CSV/LibSVM loading, label binarization and min-max scaling.
//! - [`eval`]: stratified folds, cross-validation and grid search.

pub mod capacity;
pub mod data;
pub mod error;
pub mod eval;
pub mod formulation;
pub mod kernel;
pub mod lp;
pub mod model;

pub use capacity::CapacityReport;
pub use data::{Dataset, ScaleParams};
pub use error::{Error, Result};
pub use eval::{CvReport, FoldPlan, GridSpec};
pub use formulation::{TrainConfig, Variant};
pub use kernel::{GramMatrix, KernelKind, KernelSpec};
pub use lp::{LpProblem, LpSolution, LpStatus, SolverOptions};
pub use model::{BinaryModel, Classifier, KernelModel, LinearModel, Model, OvrModel};
