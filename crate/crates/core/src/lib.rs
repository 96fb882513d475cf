pub mod bridge;
pub mod continuation;
pub mod error;
pub mod functionals;
pub mod grid;
pub mod groundstate;
pub mod linearization;
pub mod quadrature;
pub mod report;
pub mod spectral;
pub mod sphere;
pub mod verify;
