//! Process-wide numeric tolerance τ used by every invariant check.
//!
//! The default is `1e-9`. It can be overridden once at startup (the CLI does
//! this from `--tol` or `STEERLAB_TOL`). Reads are lock-free.

use std::sync::atomic::{AtomicU64, Ordering};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Environment variable consulted by the CLI for the default tolerance.
pub const TOLERANCE_ENV: &str = "STEERLAB_TOL";

static TOLERANCE_BITS: AtomicU64 = AtomicU64::new(0x3E11_2E0B_E826_D695); // 1e-9

/// Current tolerance τ.
pub fn tolerance() -> f64 {
    f64::from_bits(TOLERANCE_BITS.load(Ordering::Relaxed))
}

/// Replace τ. Values that are not finite and positive are ignored and
/// `false` is returned.
pub fn set_tolerance(tol: f64) -> bool {
    if !(tol.is_finite() && tol > 0.0) {
        return false;
    }
    TOLERANCE_BITS.store(tol.to_bits(), Ordering::Relaxed);
    true
}
