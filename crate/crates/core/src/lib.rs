//! Numerical verification toolkit for spectral-gap stability of interacting
//! lattice fermions.
//!
//! The pipeline follows the constructive argument end to end at
//! exact-diagonalization scale:
//!
//! 1. [`lattice`]: finite hypercubic lattices with the path metric.
//! 2. [`single_particle`]: the hopping matrix `T = t - E_F` and its Fermi gap.
//! 3. [`majorana`]: the Majorana matrix `A`, its absolute value and sign.
//! 4. [`fock`]: exact Fock-space operator algebra with Jordan-Wigner signs.
//! 5. [`doubled`]: the frustration-free doubled Hamiltonian `η†|A|η`.
//! 6. [`transform`]: interactions rewritten in the η fermions.
//! 7. [`flow`]: spectral flow, Kato transport and the band-limited filter.
//! 8. [`assembly`]: ground-state-annihilating effective interactions and the
//!    relative-bound gap argument.
//! 9. [`localization`]: fermionic conditional expectations and shell splits.
//! 10. [`lieb_robinson`]: commutator growth profiles.

pub mod assembly;
pub mod doubled;
pub mod error;
pub mod flow;
pub mod fock;
pub mod lattice;
pub mod lieb_robinson;
pub mod linalg;
pub mod localization;
pub mod majorana;
pub mod models;
pub mod polynomial;
pub mod single_particle;
pub mod transform;

pub use error::{Error, Result};
pub use linalg::C64;
