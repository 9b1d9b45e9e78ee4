//! Bessel functions of the first kind and integer order.
//!
//! Every amplitude of the infinite uniform lattice is `iⁿ Jₙ(2Cz)`, and the SPDC
//! integrals need a whole ladder of orders at each quadrature node, so the
//! primary entry point computes `J₀..=J_max` at once with Miller's backward
//! recurrence, normalized by the Neumann sum `J₀ + 2 Σ J₂ₖ = 1`.

use alloc::vec;
use alloc::vec::Vec;

const RESCALE_ABOVE: f64 = 1e250;
const RESCALE_BY: f64 = 1e-250;
const SERIES_BELOW: f64 = 1e-5;

/// `J₀(x), J₁(x), …, J_{order_max}(x)` for `x ≥ 0`.
///
/// Absolute accuracy is ~1e-15 for `x ≤ 50` and orders up to a few hundred.
/// Negative `x` is handled through `Jₙ(−x) = (−1)ⁿ Jₙ(x)`.
pub fn bessel_j_orders(order_max: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; order_max + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    if x < 0.0 {
        let mut pos = bessel_j_orders(order_max, -x);
        for (n, v) in pos.iter_mut().enumerate() {
            if n % 2 == 1 {
                *v = -*v;
            }
        }
        return pos;
    }
    if x < SERIES_BELOW {
        // Two series terms; the third is below 1e-21 relative.
        let half = 0.5 * x;
        let mut lead = 1.0;
        for (n, v) in out.iter_mut().enumerate() {
            if n > 0 {
                lead *= half / n as f64;
            }
            *v = lead * (1.0 - half * half / (n + 1) as f64);
        }
        return out;
    }

    // Start well above both the requested order and the turning point n ≈ x,
    // where Jₙ already decays super-exponentially.
    let reach = libm::fmax(order_max as f64, x);
    let mut start = (reach + 20.0 + 10.0 * libm::sqrt(reach)) as usize + 2;
    if start % 2 == 1 {
        start += 1;
    }

    let two_over_x = 2.0 / x;
    let mut above = 0.0; // j_{k+1}
    let mut current = 1e-300; // j_k, arbitrary seed
    let mut neumann = 0.0;
    for k in (1..=start).rev() {
        if k <= order_max {
            out[k] = current;
        }
        if k % 2 == 0 {
            neumann += 2.0 * current;
        }
        let below = k as f64 * two_over_x * current - above;
        above = current;
        current = below;
        if libm::fabs(current) > RESCALE_ABOVE {
            current *= RESCALE_BY;
            above *= RESCALE_BY;
            neumann *= RESCALE_BY;
            for v in out.iter_mut() {
                *v *= RESCALE_BY;
            }
        }
    }
    out[0] = current;
    neumann += current;

    for v in out.iter_mut() {
        *v /= neumann;
    }
    out
}

/// `Jₙ(x)` for any integer order, using `J₋ₙ = (−1)ⁿ Jₙ`.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    let order = n.unsigned_abs() as usize;
    let v = bessel_j_orders(order, x)[order];
    if n < 0 && order % 2 == 1 {
        -v
    } else {
        v
    }
}

/// Looks up `Jₙ` for a signed order in a table produced by [`bessel_j_orders`].
/// Orders beyond the table are treated as zero.
#[inline]
pub(crate) fn signed_order(table: &[f64], n: i64) -> f64 {
    let k = n.unsigned_abs() as usize;
    match table.get(k) {
        Some(&v) if n < 0 && k % 2 == 1 => -v,
        Some(&v) => v,
        None => 0.0,
    }
}
