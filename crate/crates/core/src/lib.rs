//! Lipschitz p-approximate Schauder frames on subsets of finite-dimensional
//! Banach spaces: construction, evaluation, certification, duals,
//! similarity, interpolation and direct sums.

pub mod certify;
pub mod cli;
pub mod duality;
pub mod error;
pub mod fixtures;
pub mod frame;
pub mod solver;
pub mod spaces;
pub mod transforms;

pub use certify::{certify_frame, CertificationReport, Verdict};
pub use duality::{canonical_dual, dual_from_parameters, is_dual};
pub use error::{FrameError, Result};
pub use fixtures::{disc_frame, linear_frame, log_frame, orthogonal_pair, FixtureId};
pub use frame::{Frame, KindHint, LipMap};
pub use solver::SolverCfg;
pub use spaces::{AmbientNorm, Point, ScalarField, SeqVec, SubsetSpec};
pub use transforms::{direct_sum, interpolate, is_orthogonal, projections_equal, recover_similarity};
