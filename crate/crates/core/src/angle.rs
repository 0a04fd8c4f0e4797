//! Angle reduction helpers.

use std::f64::consts::{PI, TAU};

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_tau(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Reduces an angle to `[-π, π)`.
pub fn wrap_pi(x: f64) -> f64 {
    wrap_tau(x + PI) - PI
}

/// Reduces an angle to `[0, π)`.
pub fn wrap_half_turn(x: f64) -> f64 {
    let r = x.rem_euclid(PI);
    if r >= PI {
        0.0
    } else {
        r
    }
}

/// Shortest signed distance between two angles on the circle, in `[-π, π)`.
pub fn circular_diff(a: f64, b: f64) -> f64 {
    wrap_pi(a - b)
}

/// `n` equally spaced points covering `[start, start + span)`.
pub fn linspace_open(start: f64, span: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| start + span * i as f64 / n as f64).collect()
}

/// `n` equally spaced points covering `[start, stop]` inclusive.
pub fn linspace_closed(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n)
            .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_ranges() {
        assert_eq!(wrap_tau(-1e-18), 0.0);
        assert!((wrap_tau(-0.5) - (TAU - 0.5)).abs() < 1e-15);
        assert!((wrap_pi(PI) + PI).abs() < 1e-15);
        assert!((wrap_half_turn(4.0 * PI / 3.0) - PI / 3.0).abs() < 1e-15);
        assert!((circular_diff(0.1, TAU - 0.1) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn grids() {
        assert_eq!(linspace_open(0.0, 1.0, 4), vec![0.0, 0.25, 0.5, 0.75]);
        assert_eq!(linspace_closed(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
    }
}
