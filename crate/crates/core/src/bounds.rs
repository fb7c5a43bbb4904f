//! Bounds on `d_TV(P^m, Q^m)` for pairs with `d_TV(P, Q) = τ`.
//!
//! Each bound is the product TV of a canonical pair family, optimized over
//! the family parameters. The canonical pairs are exposed so callers can
//! inspect the extremal distributions directly.

use alloc::format;
use alloc::vec::Vec;

use crate::dist::{make_pair, product_tv_slices, DistributionPair};
use crate::error::{Error, Result};
use crate::math::powi;
use crate::optimize::{grid_refine_min, symmetric_triangle_max, OptimizerSettings};
use crate::region::CollapsePoint;

/// Tolerance for feasibility comparisons and for clamping rounding noise
/// out of canonical masses.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-12;

// Denominators below this are treated as singular.
const SINGULAR_TOLERANCE: f64 = 1e-14;

fn check_tau(tau: f64) -> Result<()> {
    if (0.0..=1.0).contains(&tau) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("tau must lie in [0, 1], got {tau}")))
    }
}

fn check_m(m: u32) -> Result<()> {
    if m == 0 {
        Err(Error::InvalidArgument("m must be at least 1".into()))
    } else {
        Ok(())
    }
}

fn clamp_masses<const N: usize>(mut v: [f64; N], what: &str) -> Result<[f64; N]> {
    for (i, x) in v.iter_mut().enumerate() {
        if !x.is_finite() || *x < -FEASIBILITY_TOLERANCE {
            return Err(Error::InfeasibleParameters(format!(
                "{what}: atom {i} has mass {x}"
            )));
        }
        if *x < 0.0 {
            *x = 0.0;
        }
    }
    Ok(v)
}

fn inner_arrays(alpha: f64, tau: f64) -> ([f64; 2], [f64; 2]) {
    (
        [(1.0 - alpha).max(0.0), alpha],
        [(1.0 - alpha - tau).max(0.0), (alpha + tau).min(1.0)],
    )
}

/// Binary pair `([1-α, α], [1-α-τ, α+τ])`.
pub fn inner_pair(alpha: f64, tau: f64) -> Result<DistributionPair> {
    check_tau(tau)?;
    let max = 1.0 - tau;
    if !(alpha >= -FEASIBILITY_TOLERANCE && alpha <= max + FEASIBILITY_TOLERANCE) {
        return Err(Error::AlphaOutOfRange { alpha, max });
    }
    let (p, q) = inner_arrays(alpha.clamp(0.0, max), tau);
    make_pair(&p, &q)
}

/// Same pair as [`inner_pair`], used on the upper part of the collapse-constrained range.
pub fn inner2_pair(alpha: f64, tau: f64) -> Result<DistributionPair> {
    inner_pair(alpha, tau)
}

/// Ternary pair `P = [τ, 1-τ, 0]`, `Q = [0, 1-τ, τ]`; its product TV is `1-(1-τ)^m`.
pub fn outer_pair(tau: f64) -> Result<DistributionPair> {
    check_tau(tau)?;
    make_pair(&[tau, 1.0 - tau, 0.0], &[0.0, 1.0 - tau, tau])
}

fn check_collapse(eps: f64, delta: f64) -> Result<CollapsePoint> {
    CollapsePoint::new(eps, delta)
}

fn inner1_arrays(eps: f64, delta: f64, alpha: f64, tau: f64) -> Result<([f64; 3], [f64; 3])> {
    let max = 1.0 - tau * delta / (delta - eps);
    if alpha < -FEASIBILITY_TOLERANCE || alpha > max + FEASIBILITY_TOLERANCE {
        return Err(Error::InfeasibleParameters(format!(
            "alpha = {alpha} outside [0, {max}]"
        )));
    }
    let p = clamp_masses([delta, 1.0 - alpha - delta, alpha], "inner1 P")?;
    let q = clamp_masses([eps, 1.0 - alpha - tau - eps, alpha + tau], "inner1 Q")?;
    Ok((p, q))
}

/// Ternary pair `([δ, 1-α-δ, α], [ε, 1-α-τ-ε, α+τ])`, which has `(ε, δ)`-collapse.
pub fn inner1_pair(eps: f64, delta: f64, alpha: f64, tau: f64) -> Result<DistributionPair> {
    check_collapse(eps, delta)?;
    check_tau(tau)?;
    let (p, q) = inner1_arrays(eps, delta, alpha, tau)?;
    make_pair(&p, &q)
}

// Shared shape of the two five-atom families. `a` plays the role of ε and
// `b` of δ in the first family, `1-δ` and `1-ε` in the second.
#[allow(clippy::too_many_arguments)]
fn outer_arrays(
    eps: f64,
    delta: f64,
    a: f64,
    b: f64,
    alpha: f64,
    beta: f64,
    tau: f64,
    what: &str,
) -> Result<([f64; 5], [f64; 5])> {
    let lower = a * tau / (delta - eps);
    if alpha < lower - FEASIBILITY_TOLERANCE || beta < lower - FEASIBILITY_TOLERANCE {
        return Err(Error::InfeasibleParameters(format!(
            "{what}: alpha = {alpha}, beta = {beta} must be at least {lower}"
        )));
    }
    if alpha + beta > 1.0 - tau + FEASIBILITY_TOLERANCE {
        return Err(Error::InfeasibleParameters(format!(
            "{what}: alpha + beta = {} exceeds 1 - tau",
            alpha + beta
        )));
    }
    let (da, db) = (alpha - a, beta - a);
    if da.abs() < SINGULAR_TOLERANCE || db.abs() < SINGULAR_TOLERANCE {
        return Err(Error::InfeasibleParameters(format!(
            "{what}: singular denominator at alpha = {alpha}, beta = {beta}"
        )));
    }
    let mid = 1.0 - tau - alpha - beta;
    let p = [
        (alpha * (delta - eps) - a * tau) / da,
        alpha * (alpha + tau - b) / da,
        mid,
        beta,
        0.0,
    ];
    let q = [
        0.0,
        alpha,
        mid,
        beta * (beta + tau - b) / db,
        (beta * (delta - eps) - a * tau) / db,
    ];
    Ok((clamp_masses(p, what)?, clamp_masses(q, what)?))
}

fn outer1_arrays(
    eps: f64,
    delta: f64,
    alpha: f64,
    beta: f64,
    tau: f64,
) -> Result<([f64; 5], [f64; 5])> {
    if delta + eps > 1.0 + FEASIBILITY_TOLERANCE {
        return Err(Error::InfeasibleParameters("outer1 needs delta + eps <= 1".into()));
    }
    outer_arrays(eps, delta, eps, delta, alpha, beta, tau, "outer1")
}

fn outer2_arrays(
    eps: f64,
    delta: f64,
    alpha: f64,
    beta: f64,
    tau: f64,
) -> Result<([f64; 5], [f64; 5])> {
    if delta + eps <= 1.0 {
        return Err(Error::InfeasibleParameters("outer2 needs delta + eps > 1".into()));
    }
    outer_arrays(eps, delta, 1.0 - delta, 1.0 - eps, alpha, beta, tau, "outer2")
}

/// Five-atom extremal pair without `(ε, δ)`-collapse or augmentation, for `δ + ε ≤ 1`.
pub fn outer1_pair(
    eps: f64,
    delta: f64,
    alpha: f64,
    beta: f64,
    tau: f64,
) -> Result<DistributionPair> {
    check_collapse(eps, delta)?;
    check_tau(tau)?;
    let (p, q) = outer1_arrays(eps, delta, alpha, beta, tau)?;
    make_pair(&p, &q)
}

/// Five-atom extremal pair for `δ + ε > 1`; the point `(1-δ, 1-ε)` takes over from `(ε, δ)`.
pub fn outer2_pair(
    eps: f64,
    delta: f64,
    alpha: f64,
    beta: f64,
    tau: f64,
) -> Result<DistributionPair> {
    check_collapse(eps, delta)?;
    check_tau(tau)?;
    let (p, q) = outer2_arrays(eps, delta, alpha, beta, tau)?;
    make_pair(&p, &q)
}

/// Which canonical family attains the lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LowerBranch {
    /// Binary inner pair over the whole admissible range.
    Inner,
    /// Ternary pair pinned through the collapse point.
    Inner1,
    /// Binary pair on the part of the range where the collapse holds automatically.
    Inner2,
}

/// Regime of the no-collapse, no-augmentation bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Thm3Regime {
    /// `τ < δ - ε`: the constraint is inactive.
    Unconstrained,
    /// `δ + ε ≤ 1` and `δ - ε ≤ τ ≤ (δ-ε)/(δ+ε)`.
    Outer1,
    /// `δ + ε > 1` and `δ - ε ≤ τ ≤ (δ-ε)/(2-δ-ε)`.
    Outer2,
    /// No pair satisfies the constraints.
    Infeasible,
}

/// A pair of bounds on `d_TV(P^m, Q^m)` with the optimizers that produced them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
    pub lower_branch: LowerBranch,
    /// Parameter `α` at which the lower bound is attained.
    pub lower_alpha: f64,
    /// `(α, β)` at which a numerically maximized upper bound is attained.
    pub upper_args: Option<(f64, f64)>,
}

fn inner_tv(alpha: f64, tau: f64, m: u32) -> f64 {
    let (p, q) = inner_arrays(alpha, tau);
    product_tv_slices(&p, &q, m)
}

fn inner_min(lo: f64, hi: f64, tau: f64, m: u32, s: &OptimizerSettings) -> (f64, f64) {
    let r = grid_refine_min(|a| inner_tv(a, tau, m), lo, hi, s.grid_points, s.refine_tol);
    (r.value, r.arg)
}

fn closed_upper(tau: f64, m: u32) -> f64 {
    1.0 - powi(1.0 - tau, m)
}

// Snaps a range whose ends crossed by rounding; `None` when genuinely empty.
fn range(lo: f64, hi: f64) -> Option<(f64, f64)> {
    if hi >= lo {
        Some((lo, hi))
    } else if lo - hi <= FEASIBILITY_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        Some((mid, mid))
    } else {
        None
    }
}

/// Bounds without collapse constraints, using default optimizer settings.
pub fn thm1_bounds(tau: f64, m: u32) -> Result<Bounds> {
    thm1_bounds_with(tau, m, &OptimizerSettings::default())
}

/// [`thm1_bounds`] with explicit optimizer settings.
pub fn thm1_bounds_with(tau: f64, m: u32, settings: &OptimizerSettings) -> Result<Bounds> {
    check_tau(tau)?;
    check_m(m)?;
    let (lower, lower_alpha) = inner_min(0.0, 1.0 - tau, tau, m, settings);
    Ok(Bounds {
        lower,
        upper: closed_upper(tau, m),
        lower_branch: LowerBranch::Inner,
        lower_alpha,
        upper_args: None,
    })
}

/// Bounds over pairs with `(ε, δ)`-mode collapse; `None` when no such pair has TV `τ`.
pub fn thm2_bounds(eps: f64, delta: f64, tau: f64, m: u32) -> Result<Option<Bounds>> {
    thm2_bounds_with(eps, delta, tau, m, &OptimizerSettings::default())
}

/// [`thm2_bounds`] with explicit optimizer settings.
pub fn thm2_bounds_with(
    eps: f64,
    delta: f64,
    tau: f64,
    m: u32,
    settings: &OptimizerSettings,
) -> Result<Option<Bounds>> {
    check_collapse(eps, delta)?;
    check_tau(tau)?;
    check_m(m)?;
    let gap = delta - eps;
    if tau < gap - FEASIBILITY_TOLERANCE {
        return Ok(None);
    }
    let split = 1.0 - tau * delta / gap;
    let mut best: Option<(f64, f64, LowerBranch)> = None;
    if let Some((lo, hi)) = range(0.0, split) {
        let r = grid_refine_min(
            |a| match inner1_arrays(eps, delta, a, tau) {
                Ok((p, q)) => product_tv_slices(&p, &q, m),
                Err(_) => f64::INFINITY,
            },
            lo,
            hi,
            settings.grid_points,
            settings.refine_tol,
        );
        if r.value.is_finite() {
            best = Some((r.value, r.arg, LowerBranch::Inner1));
        }
    }
    if let Some((lo, hi)) = range(split.max(0.0), 1.0 - tau) {
        let (v, a) = inner_min(lo, hi, tau, m, settings);
        if best.is_none_or(|b| v < b.0) {
            best = Some((v, a, LowerBranch::Inner2));
        }
    }
    Ok(best.map(|(lower, lower_alpha, lower_branch)| Bounds {
        lower,
        upper: closed_upper(tau, m),
        lower_branch,
        lower_alpha,
        upper_args: None,
    }))
}

/// Regime selection for pairs with neither `(ε, δ)`-collapse nor augmentation.
pub fn thm3_regime(eps: f64, delta: f64, tau: f64) -> Result<Thm3Regime> {
    check_collapse(eps, delta)?;
    check_tau(tau)?;
    let gap = delta - eps;
    if tau < gap - FEASIBILITY_TOLERANCE {
        return Ok(Thm3Regime::Unconstrained);
    }
    Ok(if delta + eps <= 1.0 {
        if tau <= gap / (delta + eps) + FEASIBILITY_TOLERANCE {
            Thm3Regime::Outer1
        } else {
            Thm3Regime::Infeasible
        }
    } else if tau <= gap / (2.0 - delta - eps) + FEASIBILITY_TOLERANCE {
        Thm3Regime::Outer2
    } else {
        Thm3Regime::Infeasible
    })
}

/// Bounds over pairs with neither `(ε, δ)`-collapse nor `(ε, δ)`-augmentation.
pub fn thm3_bounds(eps: f64, delta: f64, tau: f64, m: u32) -> Result<Option<Bounds>> {
    thm3_bounds_with(eps, delta, tau, m, &OptimizerSettings::default())
}

/// [`thm3_bounds`] with explicit optimizer settings.
pub fn thm3_bounds_with(
    eps: f64,
    delta: f64,
    tau: f64,
    m: u32,
    settings: &OptimizerSettings,
) -> Result<Option<Bounds>> {
    check_m(m)?;
    let regime = thm3_regime(eps, delta, tau)?;
    let gap = delta - eps;
    // (lower end of both searches, upper end of the α range for the lower bound)
    let (a, b) = match regime {
        Thm3Regime::Unconstrained => return thm1_bounds_with(tau, m, settings).map(Some),
        Thm3Regime::Infeasible => return Ok(None),
        Thm3Regime::Outer1 => (eps, delta),
        Thm3Regime::Outer2 => (1.0 - delta, 1.0 - eps),
    };
    let lo = a * tau / gap;
    let Some((l_lo, l_hi)) = range(lo, 1.0 - b * tau / gap) else {
        return Ok(None);
    };
    let (lower, lower_alpha) = inner_min(l_lo, l_hi, tau, m, settings);
    let arrays = if regime == Thm3Regime::Outer1 { outer1_arrays } else { outer2_arrays };
    let upper = symmetric_triangle_max(
        |al, be| {
            arrays(eps, delta, al, be, tau)
                .ok()
                .map(|(p, q)| product_tv_slices(&p, &q, m))
        },
        lo,
        1.0 - tau,
        settings.grid_2d,
        settings.refine_tol_2d,
    );
    let Some(upper) = upper else {
        return Ok(None);
    };
    Ok(Some(Bounds {
        lower,
        upper: upper.value,
        lower_branch: LowerBranch::Inner,
        lower_alpha,
        upper_args: Some((upper.alpha, upper.beta)),
    }))
}

/// Which family of pairs a band describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    None,
    HasCollapse,
    NoCollapseNoAugmentation,
}

/// A family of pairs with `d_TV(P, Q) = τ`, optionally constrained at a collapse point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintSpec {
    tau: f64,
    collapse: Option<CollapsePoint>,
    kind: ConstraintKind,
}

impl ConstraintSpec {
    /// All pairs with TV `τ`.
    pub fn unconstrained(tau: f64) -> Result<Self> {
        check_tau(tau)?;
        Ok(Self { tau, collapse: None, kind: ConstraintKind::None })
    }

    /// Pairs with TV `τ` that have `(ε, δ)`-mode collapse.
    pub fn has_collapse(eps: f64, delta: f64, tau: f64) -> Result<Self> {
        check_tau(tau)?;
        let point = check_collapse(eps, delta)?;
        Ok(Self { tau, collapse: Some(point), kind: ConstraintKind::HasCollapse })
    }

    /// Pairs with TV `τ` having neither `(ε, δ)`-collapse nor `(ε, δ)`-augmentation.
    pub fn no_collapse_no_augmentation(eps: f64, delta: f64, tau: f64) -> Result<Self> {
        check_tau(tau)?;
        let point = check_collapse(eps, delta)?;
        Ok(Self {
            tau,
            collapse: Some(point),
            kind: ConstraintKind::NoCollapseNoAugmentation,
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn collapse(&self) -> Option<CollapsePoint> {
        self.collapse
    }

    pub fn kind(&self) -> ConstraintKind {
        self.kind
    }

    /// Bounds at packing degree `m`, or `None` when the family is empty.
    pub fn bounds(&self, m: u32) -> Result<Option<Bounds>> {
        self.bounds_with(m, &OptimizerSettings::default())
    }

    /// [`Self::bounds`] with explicit optimizer settings.
    pub fn bounds_with(&self, m: u32, settings: &OptimizerSettings) -> Result<Option<Bounds>> {
        match (self.kind, self.collapse) {
            (ConstraintKind::None, _) => thm1_bounds_with(self.tau, m, settings).map(Some),
            (ConstraintKind::HasCollapse, Some(c)) => {
                thm2_bounds_with(c.epsilon(), c.delta(), self.tau, m, settings)
            }
            (ConstraintKind::NoCollapseNoAugmentation, Some(c)) => {
                thm3_bounds_with(c.epsilon(), c.delta(), self.tau, m, settings)
            }
            _ => unreachable!("constructors attach a collapse point to constrained kinds"),
        }
    }
}

/// Bounds at one packing degree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandEntry {
    pub m: u32,
    /// `(lower, upper)`, or `None` when no pair satisfies the constraints.
    pub bounds: Option<(f64, f64)>,
}

impl BandEntry {
    pub fn feasible(&self) -> bool {
        self.bounds.is_some()
    }

    pub fn lower(&self) -> Option<f64> {
        self.bounds.map(|b| b.0)
    }

    pub fn upper(&self) -> Option<f64> {
        self.bounds.map(|b| b.1)
    }
}

/// Bounds for `m = 1..=m_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionBand {
    entries: Vec<BandEntry>,
}

impl EvolutionBand {
    pub fn entries(&self) -> &[BandEntry] {
        &self.entries
    }

    /// Entry for packing degree `m`, if within the band.
    pub fn get(&self, m: u32) -> Option<&BandEntry> {
        self.entries.get((m as usize).checked_sub(1)?)
    }
}

/// Evaluates the bounds of `spec` for every `m` in `1..=m_max`.
pub fn evolution_band(spec: &ConstraintSpec, m_max: u32) -> Result<EvolutionBand> {
    evolution_band_with(spec, m_max, &OptimizerSettings::default())
}

/// [`evolution_band`] with explicit optimizer settings.
pub fn evolution_band_with(
    spec: &ConstraintSpec,
    m_max: u32,
    settings: &OptimizerSettings,
) -> Result<EvolutionBand> {
    check_m(m_max)?;
    let entries = (1..=m_max)
        .map(|m| {
            let b = spec.bounds_with(m, settings)?;
            Ok(BandEntry { m, bounds: b.map(|b| (b.lower, b.upper)) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvolutionBand { entries })
}

/// Smallest `m ≤ m_max` at which every pair of `h1` is strictly farther from
/// its product than any pair of `h0`, i.e. `lower_h1(m) > upper_h0(m)`.
///
/// Both specs must share `τ`. Typically `h0` excludes collapse and `h1`
/// requires it, but any two specs are accepted.
pub fn separation_m(h0: &ConstraintSpec, h1: &ConstraintSpec, m_max: u32) -> Result<Option<u32>> {
    separation_m_with(h0, h1, m_max, &OptimizerSettings::default())
}

/// [`separation_m`] with explicit optimizer settings.
pub fn separation_m_with(
    h0: &ConstraintSpec,
    h1: &ConstraintSpec,
    m_max: u32,
    settings: &OptimizerSettings,
) -> Result<Option<u32>> {
    check_m(m_max)?;
    if (h0.tau - h1.tau).abs() > FEASIBILITY_TOLERANCE {
        return Err(Error::InvalidArgument(format!(
            "hypotheses must share tau, got {} and {}",
            h0.tau, h1.tau
        )));
    }
    for m in 1..=m_max {
        let (Some(b0), Some(b1)) = (h0.bounds_with(m, settings)?, h1.bounds_with(m, settings)?)
        else {
            continue;
        };
        if b1.lower > b0.upper {
            return Ok(Some(m));
        }
    }
    Ok(None)
}
