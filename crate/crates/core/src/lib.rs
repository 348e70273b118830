//! Small-amplitude self-similar profiles for four dispersive equations.
//!
//! The modulated Fourier transform of each profile is split into a closed-form
//! high-frequency ansatz and a decaying remainder. The remainder is found by
//! Picard iteration on a frequency-space integral equation whose nonlinear term
//! is a multilinear oscillatory convolution.
//!
//! Conventions: `f̂(ξ) = ∫ f(x) e^{−ixξ} dx`, so `F(fg) = (1/2π) f̂ * ĝ`.
//!
//! | equation | flow | modulated profile |
//! |----------|------|-------------------|
//! | mKdV | `u_t + u_xxx + (u³)_x = 0` | `Ũ = e^{−iξ³} Û` |
//! | quartic KdV | `v_t + v_xxx + (v⁴)_x = 0` | `Ṽ = |ξ|^{1/3} e^{−iξ³} V̂` |
//! | modified BO | `w_t + H w_xx − (w³)_x = 0` | `W̃ = |ξ|^{1/2} e^{iξ|ξ|} Ŵ` |
//! | cubic NLS | `i q_t + q_xx + |q|² q = 0` | `Q̃ = e^{iξ²} Q̂` |

pub mod ansatz;
pub mod error;
pub mod fixedpoint;
pub mod oscillatory;
pub mod profile_space;
pub mod reconstruct;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use profile_space::{Equation, FrequencyGrid, GridSpec, NormReport, Profile};
