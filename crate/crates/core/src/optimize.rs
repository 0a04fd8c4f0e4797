//! Coarse grid scan followed by local pattern-search refinement on periodic
//! domains.
//!
//! The coarse scan may evaluate points concurrently; the reduction is
//! sequential in grid order, so among values equal within [`TIE_TOL`] the
//! lexicographically smallest point wins regardless of scheduling.

use rayon::prelude::*;

/// Relative tolerance under which two coarse-grid values count as tied.
pub const TIE_TOL: f64 = 1e-12;

/// Refinement stops after this many stencil evaluations even if the step has
/// not shrunk below the tolerance.
const MAX_REFINE_ITERS: usize = 10_000;

/// Location and value of a maximum in two dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum2 {
    pub x: f64,
    pub y: f64,
    pub value: f64,
}

/// Location and value of a maximum in one dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum1 {
    pub x: f64,
    pub value: f64,
}

/// Square periodic domain `[lo, lo + period)²` (or `[lo, lo + period)` in 1-D).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicDomain {
    pub lo: f64,
    pub period: f64,
}

impl PeriodicDomain {
    /// `[-π, π)`.
    pub const SYMMETRIC: PeriodicDomain = PeriodicDomain {
        lo: -std::f64::consts::PI,
        period: std::f64::consts::TAU,
    };

    /// `[0, 2π)`.
    pub const POSITIVE: PeriodicDomain = PeriodicDomain {
        lo: 0.0,
        period: std::f64::consts::TAU,
    };

    pub fn wrap(&self, x: f64) -> f64 {
        let r = self.lo + (x - self.lo).rem_euclid(self.period);
        if r >= self.lo + self.period {
            self.lo
        } else {
            r
        }
    }

    fn grid(&self, step: f64) -> Vec<f64> {
        let n = ((self.period / step) - 1e-9).ceil().max(1.0) as usize;
        let h = self.period / n as f64;
        (0..n).map(|i| self.lo + h * i as f64).collect()
    }
}

fn better(candidate: f64, best: f64) -> bool {
    if best == f64::NEG_INFINITY {
        return candidate > best;
    }
    candidate > best + TIE_TOL * best.abs().max(1.0)
}

/// Grid scan with spacing at most `coarse_step`, then pattern-search
/// refinement until the stencil step drops below `refine_tol`.
pub fn maximize_2d<F>(f: F, domain: PeriodicDomain, coarse_step: f64, refine_tol: f64) -> Maximum2
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let grid = domain.grid(coarse_step);
    let h = domain.period / grid.len() as f64;
    let rows: Vec<Vec<f64>> = grid
        .par_iter()
        .map(|&x| grid.iter().map(|&y| f(x, y)).collect())
        .collect();

    let mut best = Maximum2 {
        x: grid[0],
        y: grid[0],
        value: f64::NEG_INFINITY,
    };
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if better(v, best.value) {
                best = Maximum2 {
                    x: grid[i],
                    y: grid[j],
                    value: v,
                };
            }
        }
    }
    refine_2d(&f, best, domain, h, refine_tol)
}

/// Pattern search from `start` with initial step `step`.
pub fn refine_2d<F>(f: &F, start: Maximum2, domain: PeriodicDomain, step: f64, tol: f64) -> Maximum2
where
    F: Fn(f64, f64) -> f64,
{
    let mut cur = start;
    let mut h = step;
    let mut iters = 0;
    while h >= tol && iters < MAX_REFINE_ITERS {
        iters += 1;
        let mut moved = None;
        let mut best_v = cur.value;
        for dx in [-1.0, 0.0, 1.0] {
            for dy in [-1.0, 0.0, 1.0] {
                if dx == 0.0 && dy == 0.0 {
                    continue;
                }
                let (x, y) = (cur.x + dx * h, cur.y + dy * h);
                let v = f(x, y);
                if v > best_v {
                    best_v = v;
                    moved = Some((x, y));
                }
            }
        }
        match moved {
            Some((x, y)) => cur = Maximum2 { x, y, value: best_v },
            None => h *= 0.5,
        }
    }
    Maximum2 {
        x: domain.wrap(cur.x),
        y: domain.wrap(cur.y),
        value: cur.value,
    }
}

/// One-dimensional analogue of [`maximize_2d`].
pub fn maximize_1d<F>(f: F, domain: PeriodicDomain, coarse_step: f64, refine_tol: f64) -> Maximum1
where
    F: Fn(f64) -> f64 + Sync,
{
    let grid = domain.grid(coarse_step);
    let h = domain.period / grid.len() as f64;
    let values: Vec<f64> = grid.par_iter().map(|&x| f(x)).collect();
    let mut best = Maximum1 {
        x: grid[0],
        value: f64::NEG_INFINITY,
    };
    for (x, v) in grid.iter().zip(values) {
        if better(v, best.value) {
            best = Maximum1 { x: *x, value: v };
        }
    }
    refine_1d(&f, best, domain, h, refine_tol)
}

/// Pattern search in one dimension.
pub fn refine_1d<F>(f: &F, start: Maximum1, domain: PeriodicDomain, step: f64, tol: f64) -> Maximum1
where
    F: Fn(f64) -> f64,
{
    let mut cur = start;
    let mut h = step;
    let mut iters = 0;
    while h >= tol && iters < MAX_REFINE_ITERS {
        iters += 1;
        let (l, r) = (f(cur.x - h), f(cur.x + h));
        if l > cur.value && l >= r {
            cur = Maximum1 { x: cur.x - h, value: l };
        } else if r > cur.value {
            cur = Maximum1 { x: cur.x + h, value: r };
        } else {
            h *= 0.5;
        }
    }
    Maximum1 {
        x: domain.wrap(cur.x),
        value: cur.value,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn finds_smooth_peak_off_grid() {
        let f = |x: f64, y: f64| (x - 0.123_456).cos() + 2.0 * (y + 1.234_567).cos();
        let m = maximize_2d(f, PeriodicDomain::SYMMETRIC, PI / 64.0, 1e-9);
        assert!((m.x - 0.123_456).abs() < 1e-7, "{m:?}");
        assert!((m.y + 1.234_567).abs() < 1e-7, "{m:?}");
        assert!((m.value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn wraps_across_boundary() {
        let f = |x: f64| (x - 3.1).cos();
        let m = maximize_1d(f, PeriodicDomain::SYMMETRIC, PI / 64.0, 1e-10);
        assert!((m.x - 3.1).abs() < 1e-8 || (m.x - (3.1 - 2.0 * PI)).abs() < 1e-8);
        assert!(m.x >= -PI && m.x < PI);
    }

    #[test]
    fn ties_resolve_to_smallest_point() {
        // four equal grid-aligned peaks at ±π/4, ±3π/4
        let f = |x: f64| (2.0 * x).sin().powi(2);
        let m = maximize_1d(f, PeriodicDomain::SYMMETRIC, PI / 64.0, 1e-10);
        assert!((m.x + 3.0 * PI / 4.0).abs() < 1e-8, "{m:?}");
        let m2 = maximize_1d(f, PeriodicDomain::SYMMETRIC, PI / 64.0, 1e-10);
        assert_eq!(m, m2);
    }

    #[test]
    fn coarse_scan_escapes_minimum_at_first_grid_point() {
        // hill climbing from x = 0 would stall on the flat minimum
        let f = |x: f64| (1.0 - x.cos()).powi(3);
        let m = maximize_1d(f, PeriodicDomain::POSITIVE, PI / 64.0, 1e-10);
        assert!((m.x - PI).abs() < 1e-6, "{m:?}");
        let g = |x: f64, y: f64| (2.0 - x.cos() - y.cos()).powi(3);
        let m = maximize_2d(g, PeriodicDomain::POSITIVE, PI / 64.0, 1e-10);
        assert!((m.x - PI).abs() < 1e-6 && (m.y - PI).abs() < 1e-6, "{m:?}");
    }

    #[test]
    fn deterministic_under_parallel_scan() {
        let f = |x: f64, y: f64| (x.sin() * y.cos()).abs();
        let a = maximize_2d(f, PeriodicDomain::SYMMETRIC, PI / 90.0, 1e-8);
        for _ in 0..5 {
            assert_eq!(a, maximize_2d(f, PeriodicDomain::SYMMETRIC, PI / 90.0, 1e-8));
        }
        // four symmetric maxima; the smallest (x, y) is chosen
        assert!((a.x + PI / 2.0).abs() < 1e-6 && (a.y + PI).abs() < 1e-6, "{a:?}");
    }
}
