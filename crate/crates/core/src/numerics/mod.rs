//! Dense linear algebra, activations, seeded initialization, dropout masks and
//! the finite-difference gradient oracle.

mod activation;
mod dd;
mod dropout;
mod gradcheck;
mod init;
mod mat;
mod param;
mod rng;

pub use activation::{sigm, sigm_d, sigmoid, softmax, tanh_d, tanh_m};
pub use dd::{Dd, Real};
pub use dropout::{Dropout, Mode};
pub use gradcheck::{
    grad_check, grad_check_by_tensor, relative_error, GradCheckReport, ParamSet, DEFAULT_EPS,
};
pub use init::{gaussian_init, orthogonal_init, orthogonality_defect, GaussianScale};
pub use mat::Mat;
pub use param::Param;
pub use rng::Rng;
