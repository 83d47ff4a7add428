//! The antisymmetric Galerkin sector: determinant bases, orbital
//! transforms, Hamiltonian assembly and reduced densities.

pub mod bruteforce;
pub mod density;
pub mod hamiltonian;
pub mod interaction;
pub mod orbitals;
pub mod slater;
pub mod wave;

pub use bruteforce::{assemble_manybody_bruteforce, assemble_manybody_bruteforce_with};
pub use density::{density_matrix, reduced_density, reduced_pair_density, DensityProfile, PairDensityProfile};
pub use hamiltonian::{assemble_manybody, assemble_manybody_with_limit, ManyBodyMatrix, ManyBodyOperator, OperatorOrigin};
pub use interaction::{transform_two_body, InteractionSpec, TwoBodyTensor};
pub use orbitals::{cholesky_orbitals, eigen_orbitals, orthonormalize_orbitals, transform_one_body, Orbitals};
pub use slater::{binomial, enumerate_slater_basis, enumerate_slater_basis_capped, SlaterBasis, DEFAULT_BASIS_CAP};
pub use wave::{antisymmetric_tensor, evaluate_on_tensor_grid, evaluate_with_values, WaveVector};
