//! Cyclicity probes: dilation quotients, optimal approximants, the
//! multiplier heuristic and the reduced integral chains.

mod approximant;
mod chains;
mod critical;
mod crosscheck;
mod layercake;
mod multiplier;
mod sweep;

pub use approximant::{opt_approximant_distance, ApproximantReport};
pub use chains::{chain_critical_alpha, chain_value, chain_verify, default_u_grid, ChainCase, ChainReport};
pub use critical::{estimate_critical_index, measured_dimension, CriticalIndexReport};
pub use crosscheck::{chain_crosscheck_4d, constant_t_control, ControlReport, CrosscheckReport};
pub use layercake::{layer_cake_check, LayerCake};
pub use multiplier::{multiplier_heuristic, sphere_samples, MultiplierReport, Verdict};
pub use sweep::{quotient_norm_sweep, DilationSweep, SweepReport, SweepRow};
