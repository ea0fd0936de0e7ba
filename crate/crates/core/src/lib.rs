//! Numerical machinery for quantum structures: alternative tensor-product
//! factorizations of one composite system, the structure dependence of
//! entanglement and discord, Gaussian open-system dynamics in the
//! Caldeira–Leggett and amplitude-damping models, Nakajima–Zwanzig projector
//! obstructions, and second-quantization operator transforms.
//!
//! Conventions used throughout the crate:
//!
//! * Kronecker products are row-major: for factors with dimensions
//!   `[d0, d1, ..., dk]` the basis index of `|i0 i1 ... ik>` is
//!   `((i0 * d1 + i1) * d2 + i2) ...`, i.e. the last factor runs fastest.
//! * Phase-space vectors are ordered `(x_1, ..., x_n, p_1, ..., p_n)` and the
//!   symplectic form is `J = [[0, I], [-I, 0]]`.
//! * ħ = 1 unless a function takes an explicit `hbar` argument.
//! * Entropies are in nats.

pub mod correlations;
pub mod cv;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod matrix_io;
pub mod projections;
pub mod second_quant;
pub mod tensor;

mod optim;

pub use error::{Error, Result};
pub use linalg::{CMat, CVec, RMat, RVec, C64};
