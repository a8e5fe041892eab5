//! Direct evaluation of oscillatory operators T_λ, bilinear L² norms, the
//! TT* kernel, and the rectangle sharpness witness.

pub mod amplitude;
pub mod eval;
pub mod grid;
pub mod kernel;
pub mod sharpness;
pub mod sweep;

pub use amplitude::{Amplitude, Support};
pub use eval::{bilinear_l2_norm, eval_direct, eval_oscillatory, eval_separable, product_norm, Operator};
pub use grid::{FrequencyProfile, PhaseBounds, RandomProfile, SpaceTimeGrid, MIN_NODES, POINTS_PER_WAVELENGTH};
pub use kernel::{kernel_decay_check, kernel_k, kernel_ray, tt_star_check, KernelDecayFit, KernelSample, KernelSetup, RayKind, TtStarCheck};
pub use sharpness::{sharpness_witness, SharpnessSample};
pub use sweep::{decay_sweep, support_transversality, DecaySample, DecaySweep, MuRule, ScaleSchedule};
