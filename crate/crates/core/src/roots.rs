//! Locating the onset of an inequality along a one-dimensional sweep.

use crate::Result;

/// Where a sweep starts; a condition already met here counts as met from zero.
pub(crate) const SWEEP_START: f64 = 1e-3;
pub(crate) const SWEEP_STEP: f64 = 1e-2;
pub(crate) const SWEEP_END: f64 = 10.0;
/// Final bracket width of the bisection.
pub(crate) const BISECTION_TOL: f64 = 1e-4;

/// Smallest `x ≥ 0` at which `margin(x) ≥ 0`, found by a coarse forward sweep
/// followed by bisection of the first bracket. Returns `0` if the condition
/// already holds at the start of the sweep and `None` if it never holds.
///
/// The returned point is the upper end of the final bracket, so the condition
/// holds there.
pub(crate) fn first_onset(mut margin: impl FnMut(f64) -> Result<f64>) -> Result<Option<f64>> {
    if margin(SWEEP_START)? >= 0.0 {
        return Ok(Some(0.0));
    }
    let mut lo = SWEEP_START;
    loop {
        let hi = lo + SWEEP_STEP;
        if hi > SWEEP_END {
            return Ok(None);
        }
        if margin(hi)? >= 0.0 {
            return bisect(&mut margin, lo, hi).map(Some);
        }
        lo = hi;
    }
}

fn bisect(margin: &mut impl FnMut(f64) -> Result<f64>, mut lo: f64, mut hi: f64) -> Result<f64> {
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if margin(mid)? >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
