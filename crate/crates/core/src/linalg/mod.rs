//! Dense and profile-stored linear algebra used by the solvers.

pub mod cholesky;
pub mod dense;
pub mod eigen;
pub mod lobpcg;
pub mod sparse;

pub use cholesky::{ldl_pivots, Cholesky};
pub use dense::{axpy, dot, norm2, Matrix, SymMatrix};
pub use eigen::{symmetric_eigen, SymmetricEigen};
pub use lobpcg::{lobpcg, lobpcg_from, IdentityPreconditioner, LinearOperator, LobpcgOptions, LobpcgResult, Preconditioner};
pub use sparse::CsrMatrix;
