//! Pseudo-spectral toolkit for the dissipative surface quasi-geostrophic
//! equation `∂_tθ + Λ^αθ + u·∇θ = 0`, `u = ∇⊥Λ^{-1}θ`, on a periodic box.

pub mod error;
pub mod estimates;
pub mod littlewood_paley;
pub mod mild;
pub mod random;
pub mod spectral;
pub mod uniqueness;

pub use error::{Result, SqgError};
pub use littlewood_paley::{
    besov_norm, build_bank, chemin_lerner_norm, BesovIndex, BumpProfile, DyadicBank, Level, TimeSeriesField,
};
pub use spectral::{Exponent, Grid2, SpectralField};
