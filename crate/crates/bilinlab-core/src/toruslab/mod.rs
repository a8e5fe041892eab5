//! Spectral propagators on flat tori, dyadic projections, bilinear ratio
//! measurements, and the one-dimensional variable-metric solver.

pub mod bilinear;
pub mod circle;
pub mod field;

pub use bilinear::{
    bilinear_ratio, derivative_twisted_ratio, linear_strichartz_of_field, linear_strichartz_ratio, mixed_ratio,
    product_norm_sq, ratio_of_fields, rescaled_ratio, resonance_oracle, Backend, Generator, LinearSample, ModeSet,
    RatioSample, RatioSetup,
};
pub use circle::{exact_1d_solver, parametrix, parametrix_error, wave_packet, CircleSolver, ParametrixSample};
pub use field::{make_band_field, modes_for_band, propagate, DyadicBand, Family, FourierMultiplier, TorusField};
