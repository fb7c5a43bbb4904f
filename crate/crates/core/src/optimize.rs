//! Derivative-free optimizers used by the bound computations.
//!
//! Objectives here are cheap but not unimodal in general, so every search
//! starts with a dense grid and only then refines locally.

/// Default number of grid points for one-dimensional searches.
pub const DEFAULT_GRID_POINTS: usize = 2001;
/// Default final bracket width for one-dimensional refinement.
pub const DEFAULT_REFINE_TOL: f64 = 1e-9;
/// Default grid resolution per axis for triangle searches.
pub const DEFAULT_GRID_2D: usize = 201;
/// Default coordinate tolerance for triangle refinement.
pub const DEFAULT_REFINE_TOL_2D: f64 = 1e-7;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Numerical settings for the bound searches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerSettings {
    pub grid_points: usize,
    pub refine_tol: f64,
    pub grid_2d: usize,
    pub refine_tol_2d: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            grid_points: DEFAULT_GRID_POINTS,
            refine_tol: DEFAULT_REFINE_TOL,
            grid_2d: DEFAULT_GRID_2D,
            refine_tol_2d: DEFAULT_REFINE_TOL_2D,
        }
    }
}

/// Location and value of a one-dimensional optimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub arg: f64,
    pub value: f64,
}

/// Location and value of a two-dimensional optimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum2 {
    pub alpha: f64,
    pub beta: f64,
    pub value: f64,
}

/// Golden-section minimization on `[lo, hi]`, stopping at bracket width `tol`.
///
/// Returns the best point evaluated, endpoints included.
pub fn golden_section_min<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Extremum {
    let (mut a, mut b) = (lo, hi);
    let mut best = better_min(
        Extremum { arg: a, value: f(a) },
        Extremum { arg: b, value: f(b) },
    );
    if b - a <= tol {
        return best;
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
            best = better_min(best, Extremum { arg: c, value: fc });
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
            best = better_min(best, Extremum { arg: d, value: fd });
        }
    }
    best = better_min(best, Extremum { arg: c, value: fc });
    better_min(best, Extremum { arg: d, value: fd })
}

/// Grid search followed by golden-section refinement around the best cell.
///
/// `lo > hi` is treated as the single point `lo`.
pub fn grid_refine_min<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    grid_points: usize,
    tol: f64,
) -> Extremum {
    if hi <= lo {
        return Extremum { arg: lo, value: f(lo) };
    }
    let n = grid_points.max(3);
    let step = (hi - lo) / (n - 1) as f64;
    let at = |i: usize| if i + 1 == n { hi } else { lo + step * i as f64 };
    let mut best_i = 0;
    let mut best = Extremum { arg: lo, value: f(lo) };
    for i in 1..n {
        let x = at(i);
        let v = f(x);
        if v < best.value || best.value.is_nan() {
            best = Extremum { arg: x, value: v };
            best_i = i;
        }
    }
    let a = at(best_i.saturating_sub(1));
    let b = at((best_i + 1).min(n - 1));
    better_min(best, golden_section_min(&mut f, a, b, tol))
}

/// Grid search and refinement for a maximum.
pub fn grid_refine_max<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    grid_points: usize,
    tol: f64,
) -> Extremum {
    let r = grid_refine_min(|x| -f(x), lo, hi, grid_points, tol);
    Extremum { arg: r.arg, value: -r.value }
}

/// Maximizes `f(alpha, beta)` over `alpha, beta >= lower`, `alpha + beta <= sum_max`.
///
/// `f` must be symmetric in its arguments; only the half `alpha <= beta` is
/// gridded. Points where `f` returns `None` are skipped. Returns `None` when
/// the triangle is empty or no point is admissible.
pub fn symmetric_triangle_max<F: FnMut(f64, f64) -> Option<f64>>(
    mut f: F,
    lower: f64,
    sum_max: f64,
    grid: usize,
    tol: f64,
) -> Option<Extremum2> {
    let span = sum_max - 2.0 * lower;
    if span < 0.0 {
        return None;
    }
    let n = grid.max(2);
    let step = span / (n - 1) as f64;
    let mut best: Option<Extremum2> = None;
    let consider = |best: &mut Option<Extremum2>, a: f64, b: f64, v: Option<f64>| {
        if let Some(v) = v {
            if v.is_finite() && best.is_none_or(|e| v > e.value) {
                *best = Some(Extremum2 { alpha: a, beta: b, value: v });
            }
        }
    };
    for i in 0..n {
        for j in i..n - i {
            let a = lower + step * i as f64;
            let b = (lower + step * j as f64).min(sum_max - a);
            let v = f(a, b);
            consider(&mut best, a, b, v);
        }
    }
    let mut cur = best?;
    if span == 0.0 {
        return Some(cur);
    }
    // Coordinate ascent inside a shrinking window around the grid optimum.
    let mut radius = step;
    for _ in 0..60 {
        let prev = cur;
        let beta = cur.beta;
        let a_lo = (cur.alpha - radius).max(lower);
        let a_hi = (cur.alpha + radius).min(sum_max - beta);
        if a_hi > a_lo {
            let r = golden_section_min(
                |a| f(a, beta).map_or(f64::INFINITY, |v| -v),
                a_lo,
                a_hi,
                tol,
            );
            if r.value.is_finite() && -r.value > cur.value {
                cur = Extremum2 { alpha: r.arg, beta, value: -r.value };
            }
        }
        let alpha = cur.alpha;
        let b_lo = (cur.beta - radius).max(lower);
        let b_hi = (cur.beta + radius).min(sum_max - alpha);
        if b_hi > b_lo {
            let r = golden_section_min(
                |b| f(alpha, b).map_or(f64::INFINITY, |v| -v),
                b_lo,
                b_hi,
                tol,
            );
            if r.value.is_finite() && -r.value > cur.value {
                cur = Extremum2 { alpha, beta: r.arg, value: -r.value };
            }
        }
        let moved = (cur.alpha - prev.alpha).abs().max((cur.beta - prev.beta).abs());
        if moved < tol && radius <= tol {
            break;
        }
        if moved < tol {
            radius *= 0.25;
        }
    }
    Some(cur)
}

fn better_min(a: Extremum, b: Extremum) -> Extremum {
    if b.value < a.value || a.value.is_nan() {
        b
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_minimum() {
        let r = golden_section_min(|x| (x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-10);
        assert!((r.arg - 0.3).abs() < 1e-8);
    }

    #[test]
    fn grid_escapes_local_minimum() {
        // Shallow well at 0.2, deep well at 0.8.
        let f = |x: f64| -0.2 * (-(x - 0.2) * (x - 0.2) / 1e-3).exp() - (-(x - 0.8) * (x - 0.8) / 1e-3).exp();
        let r = grid_refine_min(f, 0.0, 1.0, 2001, 1e-9);
        assert!((r.arg - 0.8).abs() < 1e-6);
        assert!((r.value + 1.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_interval() {
        let r = grid_refine_min(|x| x, 0.4, 0.4, 2001, 1e-9);
        assert_eq!(r.arg, 0.4);
        let r = grid_refine_max(|x| x, 0.0, 1.0, 11, 1e-9);
        assert_eq!(r.value, 1.0);
    }

    #[test]
    fn triangle_max_interior_and_corner() {
        let r = symmetric_triangle_max(
            |a, b| Some(-(a - 0.3).powi(2) - (b - 0.3).powi(2)),
            0.0,
            1.0,
            201,
            1e-9,
        )
        .unwrap();
        assert!((r.alpha - 0.3).abs() < 1e-6 && (r.beta - 0.3).abs() < 1e-6);
        // Linear objective peaks on the hypotenuse.
        let r = symmetric_triangle_max(|a, b| Some(a + b), 0.1, 0.9, 201, 1e-9).unwrap();
        assert!((r.value - 0.9).abs() < 1e-12);
        assert!(symmetric_triangle_max(|_, _| Some(0.0), 0.6, 1.0, 201, 1e-9).is_none());
    }

    #[test]
    fn triangle_skips_inadmissible_points() {
        let r = symmetric_triangle_max(
            |a, b| if a < 0.5 { None } else { Some(a + b) },
            0.0,
            2.0,
            101,
            1e-9,
        )
        .unwrap();
        assert!(r.alpha >= 0.5);
        assert!((r.value - 2.0).abs() < 1e-12);
    }
}
