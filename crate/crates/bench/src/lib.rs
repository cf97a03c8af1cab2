//! Deterministic inputs shared by the benchmarks.

use critcyc::{Complex64, MultiIndex, PowerSeries};

/// `1 + Σ c_k z^k` with small, index-dependent coefficients, so the
/// reciprocal exists and nothing depends on a random generator.
pub fn invertible_series(degree: usize) -> PowerSeries {
    let mut f = PowerSeries::one(degree);
    for total in 1..=degree {
        for k1 in 0..=total {
            let phase = (7 * k1 + 3 * total) as f64;
            let c = Complex64::from_polar(0.1 / (1 + total) as f64, phase);
            f.set(MultiIndex::new(k1, total - k1), c);
        }
    }
    f
}
