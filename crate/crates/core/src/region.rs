//! The mode-collapse region and its hypothesis-testing properties.
//!
//! A region is stored as its upper boundary: a concave polyline from `(0,0)`
//! to `(1,1)` in `(ε, δ)` coordinates, where `ε` is mass under the generator
//! `Q` and `δ` mass under the target `P`. The region itself is everything
//! between that polyline and the diagonal. This is the ROC curve of the test
//! `P` vs `Q`; the half below the diagonal is its mirror image and is never
//! stored.

use alloc::format;
use alloc::vec::Vec;

use crate::dist::{make_pair, DistributionPair};
use crate::error::{Error, Result};

/// Absolute tolerance for collinearity and containment tests.
pub const GEOMETRY_TOLERANCE: f64 = 1e-12;

/// A point `(ε, δ)` with `0 ≤ ε < δ ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollapsePoint {
    epsilon: f64,
    delta: f64,
}

impl CollapsePoint {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&epsilon) || !(delta > epsilon && delta <= 1.0) {
            return Err(Error::InvalidCollapsePoint { epsilon, delta });
        }
        Ok(Self { epsilon, delta })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// Concave upper boundary of `R(P, Q)`.
///
/// Invariants: starts at `(0,0)` and ends at `(1,1)`; `ε` and `δ` are
/// nondecreasing; only the first segment may be vertical (symbols with
/// `q = 0`); segment slopes strictly decrease; every vertex has `δ ≥ ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeCollapseRegion {
    vertices: Vec<(f64, f64)>,
}

impl ModeCollapseRegion {
    /// Validates a boundary, merging collinear vertices.
    pub fn new(vertices: &[(f64, f64)]) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidRegion("need at least two vertices".into()));
        }
        let first = vertices[0];
        let last = vertices[vertices.len() - 1];
        if first.0.abs() > GEOMETRY_TOLERANCE || first.1.abs() > GEOMETRY_TOLERANCE {
            return Err(Error::InvalidRegion(format!(
                "first vertex must be (0,0), got {first:?}"
            )));
        }
        if (last.0 - 1.0).abs() > GEOMETRY_TOLERANCE || (last.1 - 1.0).abs() > GEOMETRY_TOLERANCE {
            return Err(Error::InvalidRegion(format!(
                "last vertex must be (1,1), got {last:?}"
            )));
        }
        for (i, w) in vertices.windows(2).enumerate() {
            let (dx, dy) = (w[1].0 - w[0].0, w[1].1 - w[0].1);
            if dx < -GEOMETRY_TOLERANCE || dy < -GEOMETRY_TOLERANCE {
                return Err(Error::InvalidRegion(format!(
                    "boundary decreases between vertices {i} and {}",
                    i + 1
                )));
            }
        }
        for (i, v) in vertices.iter().enumerate() {
            if !(v.0.is_finite() && v.1.is_finite()) || v.1 < v.0 - GEOMETRY_TOLERANCE {
                return Err(Error::InvalidRegion(format!(
                    "vertex {i} = {v:?} lies below the diagonal"
                )));
            }
        }
        let hull = upper_boundary(vertices.iter().copied());
        // A vertex strictly under the hull marks a convex kink. Vertices at
        // ε = 0 sit on the vertical first segment.
        for v in vertices.iter().filter(|v| v.0 > GEOMETRY_TOLERANCE) {
            if boundary_at(&hull, v.0) > v.1 + GEOMETRY_TOLERANCE {
                return Err(Error::InvalidRegion(format!(
                    "boundary is not concave at {v:?}"
                )));
            }
        }
        Ok(Self { vertices: hull })
    }

    // For vertex lists produced by `upper_boundary`.
    pub(crate) fn from_hull_unchecked(vertices: Vec<(f64, f64)>) -> Self {
        Self { vertices }
    }

    /// The diagonal: `P = Q`, nothing distinguishable.
    pub fn diagonal() -> Self {
        Self {
            vertices: alloc::vec![(0.0, 0.0), (1.0, 1.0)],
        }
    }

    /// The largest possible region, `P` and `Q` mutually singular.
    pub fn full() -> Self {
        Self {
            vertices: alloc::vec![(0.0, 0.0), (0.0, 1.0), (1.0, 1.0)],
        }
    }

    /// Boundary vertices as `(ε, δ)`.
    pub fn vertices(&self) -> &[(f64, f64)] {
        &self.vertices
    }

    /// Number of boundary segments.
    pub fn segments(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Boundary `δ` at `ε`, linearly interpolated.
    pub fn boundary_delta_at(&self, epsilon: f64) -> f64 {
        boundary_at(&self.vertices, epsilon)
    }

    /// Whether `(ε, δ)` lies in the region.
    pub fn has_collapse(&self, point: CollapsePoint) -> bool {
        self.boundary_delta_at(point.epsilon) >= point.delta - GEOMETRY_TOLERANCE
    }

    /// Whether the mirrored point `(1−δ, 1−ε)` lies in the region, i.e. the
    /// pair has `(ε, δ)`-mode augmentation.
    pub fn has_augmentation(&self, point: CollapsePoint) -> bool {
        self.boundary_delta_at(1.0 - point.delta) >= 1.0 - point.epsilon - GEOMETRY_TOLERANCE
    }

    /// Region of the pair with `P` and `Q` exchanged: the reflection
    /// `(ε, δ) ↦ (1−δ, 1−ε)`.
    pub fn reflected(&self) -> Self {
        let pts = self.vertices.iter().rev().map(|&(e, d)| (1.0 - d, 1.0 - e));
        Self {
            vertices: upper_boundary(pts),
        }
    }
}

/// `δ` of a concave boundary polyline at `ε` (clamped to `[0, 1]`).
fn boundary_at(vertices: &[(f64, f64)], epsilon: f64) -> f64 {
    let eps = epsilon.clamp(0.0, 1.0);
    let mut i = 0;
    while i + 1 < vertices.len() && vertices[i + 1].0 <= eps {
        i += 1;
    }
    if i + 1 == vertices.len() {
        return vertices[i].1;
    }
    let (a, b) = (vertices[i], vertices[i + 1]);
    let t = (eps - a.0) / (b.0 - a.0);
    a.1 + t * (b.1 - a.1)
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - a.1) - (a.1 - o.1) * (b.0 - a.0)
}

/// Upper concave hull from `(0,0)` to `(1,1)` of points that are already
/// sorted by `ε` (ties by `δ`). Near-collinear vertices (|cross| ≤ 1e-12)
/// are merged and the endpoints are snapped to exact corners.
pub(crate) fn upper_boundary(points: impl IntoIterator<Item = (f64, f64)>) -> Vec<(f64, f64)> {
    let mut hull: Vec<(f64, f64)> = Vec::new();
    let push = |hull: &mut Vec<(f64, f64)>, v: (f64, f64)| {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], v) >= -GEOMETRY_TOLERANCE {
            hull.pop();
        }
        if hull.len() == 1 && hull[0] == v {
            return;
        }
        hull.push(v);
    };
    push(&mut hull, (0.0, 0.0));
    for v in points {
        let v = (v.0.clamp(0.0, 1.0), v.1.clamp(0.0, 1.0));
        push(&mut hull, v);
    }
    push(&mut hull, (1.0, 1.0));
    let n = hull.len();
    hull[0] = (0.0, 0.0);
    hull[n - 1] = (1.0, 1.0);
    hull
}

/// Boundary of `R(P, Q)`: symbols sorted by likelihood ratio `p/q`
/// (descending, `q = 0` first), cumulative `(ΣQ, ΣP)` as vertices.
///
/// Symbols with equal ratio end up on one segment; symbols with
/// `p = q = 0` are ignored.
pub fn region_from_pair(pair: &DistributionPair) -> ModeCollapseRegion {
    let p = pair.p().probs();
    let q = pair.q().probs();
    let mut order: Vec<usize> = (0..p.len()).filter(|&i| p[i] > 0.0 || q[i] > 0.0).collect();
    // Cross-multiplied comparisons are not transitive under rounding, so sort
    // on the ratio itself (`q = 0` gives +inf).
    let ratio: Vec<f64> = p.iter().zip(q).map(|(&a, &b)| if b > 0.0 { a / b } else { f64::INFINITY }).collect();
    order.sort_by(|&a, &b| ratio[b].total_cmp(&ratio[a]));
    let mut cum = (0.0, 0.0);
    let pts = order.iter().map(|&i| {
        cum = (cum.0 + q[i], cum.1 + p[i]);
        cum
    });
    let vertices = upper_boundary(pts.collect::<Vec<_>>());
    debug_assert!(ModeCollapseRegion::new(&vertices).is_ok());
    ModeCollapseRegion { vertices }
}

/// `d_TV` read off the region: the largest vertical gap above the diagonal,
/// i.e. the intercept of the slope-1 tangent.
pub fn tv_from_region(region: &ModeCollapseRegion) -> f64 {
    region
        .vertices
        .iter()
        .map(|&(e, d)| d - e)
        .fold(0.0, f64::max)
}

/// Boundary `δ` at `ε`.
pub fn boundary_delta_at(region: &ModeCollapseRegion, epsilon: f64) -> f64 {
    region.boundary_delta_at(epsilon)
}

/// Some set (or randomized test) has `Q(S) ≤ ε` and `P(S) ≥ δ`.
pub fn has_mode_collapse(region: &ModeCollapseRegion, point: CollapsePoint) -> bool {
    region.has_collapse(point)
}

/// Some set has `Q(S) ≥ δ` and `P(S) ≤ ε`: collapse of the swapped pair.
pub fn has_mode_augmentation(pair: &DistributionPair, point: CollapsePoint) -> bool {
    region_from_pair(&pair.swapped()).has_collapse(point)
}

/// Whether `inner ⊆ outer`.
pub fn region_contains(outer: &ModeCollapseRegion, inner: &ModeCollapseRegion) -> bool {
    inner
        .vertices
        .iter()
        .all(|&(e, d)| outer.boundary_delta_at(e) >= d - GEOMETRY_TOLERANCE)
}

/// Minimum-support pair realizing `region`: one symbol per boundary segment
/// with `p = Δδ` and `q = Δε`.
pub fn canonical_pair_from_region(region: &ModeCollapseRegion) -> DistributionPair {
    let (q, p): (Vec<f64>, Vec<f64>) = region
        .vertices
        .windows(2)
        .map(|w| (w[1].0 - w[0].0, w[1].1 - w[0].1))
        .unzip();
    make_pair(&p, &q).expect("segment increments of a valid region form a distribution pair")
}

/// Hausdorff distance between two regions viewed as closed convex sets.
///
/// The distance to a convex set is a convex function, so each directed
/// distance is attained at a vertex of the other polygon.
pub fn hausdorff_distance(a: &ModeCollapseRegion, b: &ModeCollapseRegion) -> f64 {
    let ab = a
        .vertices
        .iter()
        .map(|&v| distance_to_region(b, v))
        .fold(0.0, f64::max);
    let ba = b
        .vertices
        .iter()
        .map(|&v| distance_to_region(a, v))
        .fold(0.0, f64::max);
    ab.max(ba)
}

fn distance_to_region(region: &ModeCollapseRegion, pt: (f64, f64)) -> f64 {
    let vs = &region.vertices;
    let n = vs.len();
    // Boundary runs left to right above the diagonal and closes back along
    // it, so the polygon is clockwise and interior points sit to the right.
    let mut inside = true;
    let mut best = f64::INFINITY;
    for i in 0..n {
        let a = vs[i];
        let b = vs[(i + 1) % n];
        let edge = (b.0 - a.0, b.1 - a.1);
        let rel = (pt.0 - a.0, pt.1 - a.1);
        if edge.0 * rel.1 - edge.1 * rel.0 > GEOMETRY_TOLERANCE {
            inside = false;
        }
        best = best.min(segment_distance(a, b, pt));
    }
    if inside {
        0.0
    } else {
        best
    }
}

fn segment_distance(a: (f64, f64), b: (f64, f64), p: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (cx, cy) = (a.0 + t * dx - p.0, a.1 + t * dy - p.1);
    crate::math::sqrt(cx * cx + cy * cy)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn region(p: &[f64], q: &[f64]) -> ModeCollapseRegion {
        region_from_pair(&make_pair(p, q).unwrap())
    }

    fn assert_vertices(r: &ModeCollapseRegion, want: &[(f64, f64)]) {
        assert_eq!(r.vertices().len(), want.len(), "{:?}", r.vertices());
        for (a, b) in r.vertices().iter().zip(want) {
            assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn region_examples() {
        assert_vertices(&region(&[0.5, 0.5], &[0.3, 0.7]), &[(0.0, 0.0), (0.3, 0.5), (1.0, 1.0)]);
        assert_vertices(&region(&[0.2, 0.8], &[0.0, 1.0]), &[(0.0, 0.0), (0.0, 0.2), (1.0, 1.0)]);
        assert_vertices(&region(&[0.4, 0.6], &[0.4, 0.6]), &[(0.0, 0.0), (1.0, 1.0)]);
    }

    #[test]
    fn equal_ratios_share_a_segment() {
        let r = region(&[0.2, 0.4, 0.4], &[0.1, 0.2, 0.7]);
        assert_vertices(&r, &[(0.0, 0.0), (0.3, 0.6), (1.0, 1.0)]);
    }

    #[test]
    fn zero_atoms_dropped_and_ordered() {
        let r = region(&[0.0, 0.5, 0.5, 0.0], &[0.0, 0.0, 0.5, 0.5]);
        assert_vertices(&r, &[(0.0, 0.0), (0.0, 0.5), (0.5, 1.0), (1.0, 1.0)]);
    }

    #[test]
    fn tv_examples() {
        assert!((tv_from_region(&region(&[0.5, 0.5], &[0.3, 0.7])) - 0.2).abs() < 1e-15);
        assert_eq!(tv_from_region(&ModeCollapseRegion::diagonal()), 0.0);
        assert_eq!(tv_from_region(&region(&[1.0, 0.0], &[0.0, 1.0])), 1.0);
    }

    #[test]
    fn boundary_interpolation() {
        let r = region(&[0.5, 0.5], &[0.3, 0.7]);
        assert!((r.boundary_delta_at(0.12) - 0.2).abs() < 1e-12);
        assert_eq!(ModeCollapseRegion::diagonal().boundary_delta_at(0.0), 0.0);
        assert_eq!(r.boundary_delta_at(1.0), 1.0);
        // top of the vertical segment at ε = 0
        assert!((region(&[0.2, 0.8], &[0.0, 1.0]).boundary_delta_at(0.0) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn collapse_examples() {
        let pt = CollapsePoint::new(0.0, 0.2).unwrap();
        assert!(has_mode_collapse(&region(&[0.2, 0.8], &[0.0, 1.0]), pt));
        assert!(!has_mode_collapse(&region(&[0.5, 0.5], &[0.3, 0.7]), pt));
        let any = CollapsePoint::new(0.3, 0.31).unwrap();
        assert!(!has_mode_collapse(&ModeCollapseRegion::diagonal(), any));
    }

    #[test]
    fn augmentation_examples() {
        let pt = CollapsePoint::new(0.0, 0.2).unwrap();
        let pair = make_pair(&[0.0, 1.0], &[0.2, 0.8]).unwrap();
        assert!(has_mode_augmentation(&pair, pt));
        assert!(region_from_pair(&pair).has_augmentation(pt));
        let same = make_pair(&[0.3, 0.7], &[0.3, 0.7]).unwrap();
        assert!(!has_mode_augmentation(&same, CollapsePoint::new(0.1, 0.5).unwrap()));
        // Best randomized test for Q over P is S = {1} with ratio 0.7/0.5, so
        // at P(S) = 0.12 the largest reachable Q(S) is 0.168 < 0.2.
        let toy = make_pair(&[0.5, 0.5], &[0.3, 0.7]).unwrap();
        let pt = CollapsePoint::new(0.12, 0.2).unwrap();
        assert!(!has_mode_augmentation(&toy, pt));
        assert!(!region_from_pair(&toy).has_augmentation(pt));
        let pt = CollapsePoint::new(0.12, 0.168).unwrap();
        assert!(has_mode_augmentation(&toy, pt));
        assert!(region_from_pair(&toy).has_augmentation(pt));
    }

    #[test]
    fn containment_examples() {
        let a = region(&[0.2, 0.8], &[0.0, 1.0]);
        let b = region(&[0.5, 0.5], &[0.3, 0.7]);
        let diag = ModeCollapseRegion::diagonal();
        let full = ModeCollapseRegion::full();
        for r in [&a, &b, &diag, &full] {
            assert!(region_contains(r, &diag));
            assert!(region_contains(&full, r));
        }
        assert!(!region_contains(&a, &b));
        assert!(!region_contains(&b, &a));
    }

    #[test]
    fn canonical_examples() {
        let c = canonical_pair_from_region(&region(&[0.2, 0.8], &[0.0, 1.0]));
        assert_eq!(c, make_pair(&[0.2, 0.8], &[0.0, 1.0]).unwrap());
        let d = canonical_pair_from_region(&ModeCollapseRegion::diagonal());
        assert_eq!(d, make_pair(&[1.0], &[1.0]).unwrap());
        let t = canonical_pair_from_region(&region(&[0.5, 0.5], &[0.3, 0.7]));
        for (a, b) in t.p().probs().iter().zip([0.5, 0.5]) {
            assert!((a - b).abs() < 1e-15);
        }
        for (a, b) in t.q().probs().iter().zip([0.3, 0.7]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn new_rejects_bad_boundaries() {
        assert!(ModeCollapseRegion::new(&[(0.0, 0.0)]).is_err());
        assert!(ModeCollapseRegion::new(&[(0.1, 0.0), (1.0, 1.0)]).is_err());
        assert!(ModeCollapseRegion::new(&[(0.0, 0.0), (0.9, 0.9)]).is_err());
        // convex kink
        assert!(ModeCollapseRegion::new(&[(0.0, 0.0), (0.5, 0.6), (0.6, 0.9), (1.0, 1.0)]).is_err());
        // below the diagonal
        assert!(ModeCollapseRegion::new(&[(0.0, 0.0), (0.5, 0.4), (1.0, 1.0)]).is_err());
        // collinear vertex merged
        let r = ModeCollapseRegion::new(&[(0.0, 0.0), (0.1, 0.2), (0.2, 0.4), (1.0, 1.0)]).unwrap();
        assert_eq!(r.vertices().len(), 3);
    }

    #[test]
    fn reflection_matches_swap() {
        let pair = make_pair(&[0.1, 0.2, 0.3, 0.4], &[0.4, 0.1, 0.3, 0.2]).unwrap();
        let r = region_from_pair(&pair);
        let s = region_from_pair(&pair.swapped());
        assert!(hausdorff_distance(&r.reflected(), &s) < 1e-12);
    }

    #[test]
    fn hausdorff_basics() {
        let a = region(&[0.5, 0.5], &[0.3, 0.7]);
        assert_eq!(hausdorff_distance(&a, &a), 0.0);
        // full triangle vs diagonal: farthest point (0,1) is 1/√2 from the diagonal
        let h = hausdorff_distance(&ModeCollapseRegion::full(), &ModeCollapseRegion::diagonal());
        assert!((h - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }
}
