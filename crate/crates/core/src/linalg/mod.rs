//! Dense linear algebra for dimensions up to 8 (complex) and 4 (real).

mod eigen;
mod lorentz;
mod matrix;
pub mod real;
mod rotation;
mod svd;

pub use eigen::{hermitian_eigen, hermitian_eigenvalues, symmetric_eigen, HermitianEigen, HERMITIAN_TOL};
pub use lorentz::{
    boost, embed_rotation, is_proper_lorentz, lift_to_sl2c, lorentz_defect, lorentz_of, polar_split,
    random_proper_lorentz, MinkowskiMetric, LORENTZ_TOL,
};
pub use matrix::{kron, kron_all, ComplexMatrix, ONE, ZERO};
pub use real::{Mat3, Mat4, Vec3};
pub use rotation::{quaternion_to_rotation, so3_from_angles, Rot3, ROTATION_TOL};
pub use svd::{svd3, Svd3};
