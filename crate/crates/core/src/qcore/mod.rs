//! Dense complex linear algebra and qubit-register primitives.

mod decomp;
mod eigen;
mod matrix;
mod state;

pub use decomp::{qr, schatten_norm, singular_values};
pub use eigen::{evolve_unitary, hermitian_eig, hermitian_eigvals, real_symmetric_eigvals, Eigh};
pub use matrix::{
    kron, pauli_x, pauli_y, pauli_z, ComplexMatrix, Structure, HERMITIAN_TOL, MAX_ENTRIES, UNITARY_TOL,
};
pub use state::{project_bath, BathProjection, QubitSplit, Statevector, PRUNE_THRESHOLD};

pub(crate) use decomp::schatten_from_singular_values;
pub(crate) use matrix::check_entries;
pub(crate) use state::inner;
