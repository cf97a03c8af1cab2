use serde::{Deserialize, Serialize};

use crate::capacity::{critical_alpha_capacity, CapacityInput, CriticalOptions};
use crate::error::{Error, Result};
use crate::fit::logspace;
use crate::sets::{CantorSpec, IntervalSet};

use super::chains::{chain_critical_alpha, default_u_grid, ChainCase};

/// `1 -` the slope of `log |E_t|` against `log t`, over `t` from a hundred
/// times the longest interval (at least `1e-6`) up to `0.1`.
pub fn measured_dimension(e: &IntervalSet) -> Result<f64> {
    let longest = e.intervals().iter().map(|(a, b)| b - a).fold(0.0, f64::max);
    let t_lo = (100.0 * longest).max(1e-6);
    if t_lo >= 1e-2 {
        return Err(Error::TooCoarse(format!("intervals of length {longest:.3e} leave no fitting window")));
    }
    let profile = e.measure_profile(&logspace(t_lo, 1e-1, 25))?;
    Ok((1.0 - profile.fit.slope).max(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalIndexReport {
    pub case: ChainCase,
    /// Measured dimension of the built set.
    pub d: f64,
    /// Zero crossing of the chain exponent.
    pub cyclic_side: f64,
    /// Divergence threshold of the capacity criterion.
    pub capacity_side: f64,
    /// Closed-form threshold at the construction's dimension.
    pub predicted: f64,
    pub gap: f64,
}

/// Both estimates of the critical index for the set built from `spec`.
pub fn estimate_critical_index(spec: &CantorSpec, case: ChainCase) -> Result<CriticalIndexReport> {
    let d = measured_dimension(&spec.build()?)?;
    let cyclic_side = chain_critical_alpha(case, d, &default_u_grid())?;
    let capacity_side = critical_alpha_capacity(&CapacityInput::Cantor(*spec), case.capacity_case(), CriticalOptions::default())?.alpha_c;
    Ok(CriticalIndexReport {
        case,
        d,
        cyclic_side,
        capacity_side,
        predicted: case.predicted_alpha_c(spec.dimension()),
        gap: (cyclic_side - capacity_side).abs(),
    })
}
