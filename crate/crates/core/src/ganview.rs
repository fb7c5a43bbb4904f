//! Estimating a mode-collapse region from samples.
//!
//! For a threshold `α` the set `S_α = {x : p(x) ≥ α q(x)}` is an optimal
//! test, so the points `(Q(S_α), P(S_α))` trace the region boundary. The
//! estimator learns `S_α` with a weighted classifier on half of the data and
//! measures both masses on the other half.
//!
//! The classifier for `α` minimizes the expected loss
//! `-E_P[ln G] - α E_Q[ln(1 - G)]`. Scaling the two weights to
//! `1/(1+α)` and `α/(1+α)` changes nothing, since the minimizer is the same:
//! `G*(x) = p(x) / (p(x) + α q(x))`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::dist::DistributionPair;
use crate::error::{Error, Result};
use crate::math::{exp, ln};
use crate::metrics::SampleSet;
use crate::region::{upper_boundary, ModeCollapseRegion};

/// Default additive pseudo-count per histogram bin.
pub const DEFAULT_SMOOTHING: f64 = 0.5;

const RATIO_SLACK: f64 = 1e-12;

/// Largest sample dimension the histogram backend accepts.
pub const MAX_HISTOGRAM_DIM: usize = 3;

/// Value of the optimal weighted classifier, `p / (p + α q)`.
pub fn optimal_classifier_value(p_density: f64, q_density: f64, alpha: f64) -> Result<f64> {
    let valid = p_density >= 0.0 && q_density >= 0.0 && alpha > 0.0;
    if !valid {
        return Err(Error::InvalidArgument(format!(
            "densities must be nonnegative and alpha positive, got p = {p_density}, q = {q_density}, alpha = {alpha}"
        )));
    }
    if p_density == 0.0 && q_density == 0.0 {
        return Err(Error::DegenerateInput("p = q = 0 leaves the classifier undefined".into()));
    }
    if q_density == 0.0 {
        return Ok(1.0);
    }
    if alpha.is_infinite() {
        return Ok(0.0);
    }
    Ok(p_density / (p_density + alpha * q_density))
}

/// Exact masses `(P(S_α), Q(S_α))` of `S_α = {i : p_i ≥ α q_i}`.
///
/// `α = ∞` selects the atoms with `q_i = 0` and positive `p_i`. The ratio
/// test allows a relative slack of `1e-12`, so a threshold computed as
/// `p_i / q_i` admits atom `i` despite rounding.
pub fn s_alpha_masses(pair: &DistributionPair, alpha: f64) -> (f64, f64) {
    let (mut pm, mut qm) = (0.0, 0.0);
    for (&p, &q) in pair.p().probs().iter().zip(pair.q().probs()) {
        if in_s_alpha(p, q, alpha) {
            pm += p;
            qm += q;
        }
    }
    (pm.min(1.0), qm.min(1.0))
}

fn in_s_alpha(p: f64, q: f64, alpha: f64) -> bool {
    if alpha.is_infinite() {
        q == 0.0 && p > 0.0
    } else {
        p >= alpha * q * (1.0 - RATIO_SLACK)
    }
}

/// Likelihood-ratio thresholds, strictly increasing and positive.
///
/// The endpoints `0` and `∞` are always evaluated in addition.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaSchedule {
    alphas: Vec<f64>,
}

impl AlphaSchedule {
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        for (i, &a) in alphas.iter().enumerate() {
            if !(a.is_finite() && a > 0.0) {
                return Err(Error::InvalidSchedule(format!("alpha {a} is not finite and positive")));
            }
            if i > 0 && a <= alphas[i - 1] {
                return Err(Error::InvalidSchedule("alphas must be strictly increasing".into()));
            }
        }
        Ok(Self { alphas })
    }

    /// `count` values evenly spaced in `ln α` over `[lo, hi]`.
    pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && hi.is_finite()) || count < 2 {
            return Err(Error::InvalidSchedule(format!(
                "need 0 < lo < hi < inf and count >= 2, got [{lo}, {hi}] x {count}"
            )));
        }
        let (a, b) = (ln(lo), ln(hi));
        let alphas = (0..count)
            .map(|i| match i {
                0 => lo,
                _ if i + 1 == count => hi,
                _ => exp(a + (b - a) * i as f64 / (count - 1) as f64),
            })
            .collect();
        Self::new(alphas)
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// `0`, the finite thresholds, then `∞`.
    pub fn with_endpoints(&self) -> impl Iterator<Item = f64> + '_ {
        core::iter::once(0.0)
            .chain(self.alphas.iter().copied())
            .chain(core::iter::once(f64::INFINITY))
    }
}

impl Default for AlphaSchedule {
    /// 41 log-spaced thresholds in `[1e-3, 1e3]`.
    fn default() -> Self {
        Self::log_spaced(1e-3, 1e3, 41).expect("static schedule is valid")
    }
}

/// How the per-threshold classifier is obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassifierBackend {
    /// Thresholds the true likelihood ratio of a known discrete pair. Each
    /// sample's first coordinate is read as a symbol index.
    ExactRatio(DistributionPair),
    /// Per-bin density ratio from smoothed histogram counts of the training
    /// halves, for samples of dimension at most three.
    Histogram { bins: usize, smoothing: f64 },
}

impl ClassifierBackend {
    pub fn exact_ratio(pair: DistributionPair) -> Self {
        Self::ExactRatio(pair)
    }

    pub fn histogram(bins: usize, smoothing: f64) -> Result<Self> {
        if bins < 2 {
            return Err(Error::InvalidBackend(format!("need at least 2 bins, got {bins}")));
        }
        if !(smoothing >= 0.0 && smoothing.is_finite()) {
            return Err(Error::InvalidBackend(format!("smoothing must be >= 0, got {smoothing}")));
        }
        Ok(Self::Histogram { bins, smoothing })
    }

    fn validate(&self) -> Result<()> {
        match self {
            Self::ExactRatio(_) => Ok(()),
            Self::Histogram { bins, smoothing } => Self::histogram(*bins, *smoothing).map(|_| ()),
        }
    }
}

/// One evaluated threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatePoint {
    pub alpha: f64,
    pub p_mass: f64,
    pub q_mass: f64,
}

/// Estimated masses per threshold and the region they span.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionEstimate {
    points: Vec<EstimatePoint>,
    hull: ModeCollapseRegion,
}

impl RegionEstimate {
    fn from_points(points: Vec<EstimatePoint>) -> Self {
        let hull = hull_of(&points);
        Self { points, hull }
    }

    pub fn points(&self) -> &[EstimatePoint] {
        &self.points
    }

    pub fn hull(&self) -> &ModeCollapseRegion {
        &self.hull
    }
}

/// Concave hull of the `(q_mass, p_mass)` points with `(0,0)` and `(1,1)`.
/// Points under the diagonal contribute nothing.
pub fn hull_of(points: &[EstimatePoint]) -> ModeCollapseRegion {
    let mut pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|e| e.p_mass >= e.q_mass)
        .map(|e| (e.q_mass.clamp(0.0, 1.0), e.p_mass.clamp(0.0, 1.0)))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    ModeCollapseRegion::from_hull_unchecked(upper_boundary(pts))
}

/// Exact region points of a known pair at every threshold of `schedule`.
pub fn ganview_exact(pair: &DistributionPair, schedule: &AlphaSchedule) -> RegionEstimate {
    let points = schedule
        .with_endpoints()
        .map(|alpha| {
            let (p_mass, q_mass) = s_alpha_masses(pair, alpha);
            EstimatePoint { alpha, p_mass, q_mass }
        })
        .collect();
    RegionEstimate::from_points(points)
}

// Per-sample classifier inputs: estimated (p, q) densities at a point.
trait DensityModel {
    fn densities(&self, x: &[f64]) -> Result<(f64, f64)>;
}

struct ExactModel<'a>(&'a DistributionPair);

impl DensityModel for ExactModel<'_> {
    fn densities(&self, x: &[f64]) -> Result<(f64, f64)> {
        let v = x[0];
        let k = self.0.len();
        if !(v >= 0.0 && crate::math::floor(v) == v && v < k as f64) {
            return Err(Error::SymbolOutOfRange { value: v, size: k });
        }
        let i = v as usize;
        Ok((self.0.p().probs()[i], self.0.q().probs()[i]))
    }
}

struct HistogramModel {
    bins: usize,
    lo: [f64; MAX_HISTOGRAM_DIM],
    width: [f64; MAX_HISTOGRAM_DIM],
    p: Vec<f64>,
    q: Vec<f64>,
}

impl HistogramModel {
    fn fit(train_p: &SampleSet, train_q: &SampleSet, bins: usize, smoothing: f64) -> Self {
        let dim = train_p.dim();
        let mut lo = [0.0; MAX_HISTOGRAM_DIM];
        let mut width = [1.0; MAX_HISTOGRAM_DIM];
        for d in 0..dim {
            let (mut a, mut b) = (f64::INFINITY, f64::NEG_INFINITY);
            for row in train_p.rows().chain(train_q.rows()) {
                a = a.min(row[d]);
                b = b.max(row[d]);
            }
            lo[d] = a;
            width[d] = if b > a { (b - a) / bins as f64 } else { 1.0 };
        }
        let cells = bins.pow(dim as u32);
        let mut model = Self { bins, lo, width, p: vec![smoothing; cells], q: vec![smoothing; cells] };
        for row in train_p.rows() {
            let c = model.cell(row);
            model.p[c] += 1.0;
        }
        for row in train_q.rows() {
            let c = model.cell(row);
            model.q[c] += 1.0;
        }
        normalize(&mut model.p);
        normalize(&mut model.q);
        model
    }

    // Out-of-range points are clamped into the edge bins.
    fn cell(&self, x: &[f64]) -> usize {
        // `x` has the model's dimension, so the zip stops there.
        let mut c = 0;
        for ((v, lo), w) in x.iter().zip(&self.lo).zip(&self.width) {
            let t = (v - lo) / w;
            let b = if t.is_nan() || t < 0.0 {
                0
            } else {
                (t as usize).min(self.bins - 1)
            };
            c = c * self.bins + b;
        }
        c
    }
}

fn normalize(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    }
}

impl DensityModel for HistogramModel {
    fn densities(&self, x: &[f64]) -> Result<(f64, f64)> {
        let c = self.cell(x);
        Ok((self.p[c], self.q[c]))
    }
}

// The learned decision `G(x) ≥ 1/2`. Where the model puts no mass on either
// side the ratio test `p ≥ α q` holds trivially, so such points count as in.
fn decide(p: f64, q: f64, alpha: f64) -> bool {
    if alpha == 0.0 {
        return true;
    }
    match optimal_classifier_value(p, q, alpha) {
        Ok(g) if alpha.is_infinite() => g >= 0.5 && q == 0.0,
        Ok(g) => g >= 0.5,
        Err(_) => !alpha.is_infinite(),
    }
}

/// Estimates the region of the distributions behind two sample sets.
///
/// The first `⌊n/2⌋` samples of each set train the classifier; the rest
/// estimate the masses. No shuffling happens here.
pub fn ganview_estimate(
    samples_p: &SampleSet,
    samples_q: &SampleSet,
    schedule: &AlphaSchedule,
    backend: &ClassifierBackend,
) -> Result<RegionEstimate> {
    backend.validate()?;
    if samples_p.dim() != samples_q.dim() {
        return Err(Error::DimensionMismatch { expected: samples_p.dim(), got: samples_q.dim() });
    }
    for s in [samples_p, samples_q] {
        if s.len() < 4 {
            return Err(Error::TooFewSamples { needed: 4, got: s.len() });
        }
    }
    let (train_p, test_p) = samples_p.split_at(samples_p.len() / 2);
    let (train_q, test_q) = samples_q.split_at(samples_q.len() / 2);
    let dim = samples_p.dim();
    match backend {
        ClassifierBackend::ExactRatio(pair) => {
            if dim != 1 {
                return Err(Error::DimensionMismatch { expected: 1, got: dim });
            }
            estimate_with(&ExactModel(pair), &test_p, &test_q, schedule)
        }
        ClassifierBackend::Histogram { bins, smoothing } => {
            if dim == 0 || dim > MAX_HISTOGRAM_DIM {
                return Err(Error::UnsupportedDimension(dim));
            }
            let model = HistogramModel::fit(&train_p, &train_q, *bins, *smoothing);
            estimate_with(&model, &test_p, &test_q, schedule)
        }
    }
}

fn estimate_with(
    model: &dyn DensityModel,
    test_p: &SampleSet,
    test_q: &SampleSet,
    schedule: &AlphaSchedule,
) -> Result<RegionEstimate> {
    let dens_p = test_p.rows().map(|x| model.densities(x)).collect::<Result<Vec<_>>>()?;
    let dens_q = test_q.rows().map(|x| model.densities(x)).collect::<Result<Vec<_>>>()?;
    let points = schedule
        .with_endpoints()
        .map(|alpha| {
            let hits_p = dens_p.iter().filter(|&&(p, q)| decide(p, q, alpha)).count();
            let misses_q = dens_q.iter().filter(|&&(p, q)| !decide(p, q, alpha)).count();
            EstimatePoint {
                alpha,
                p_mass: hits_p as f64 / dens_p.len() as f64,
                q_mass: 1.0 - misses_q as f64 / dens_q.len() as f64,
            }
        })
        .collect();
    Ok(RegionEstimate::from_points(points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::make_pair;
    use crate::region::{hausdorff_distance, region_from_pair};

    #[test]
    fn classifier_values() {
        assert_eq!(optimal_classifier_value(0.3, 0.3, 1.0).unwrap(), 0.5);
        assert_eq!(optimal_classifier_value(0.3, 0.0, 7.0).unwrap(), 1.0);
        assert_eq!(optimal_classifier_value(1.0, 2.0, 0.5).unwrap(), 0.5);
        assert!(matches!(optimal_classifier_value(0.0, 0.0, 1.0), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn s_alpha_examples() {
        let pr = make_pair(&[0.2, 0.8], &[0.0, 1.0]).unwrap();
        assert_eq!(s_alpha_masses(&pr, 0.0), (1.0, 1.0));
        assert_eq!(s_alpha_masses(&pr, f64::INFINITY), (0.2, 0.0));
        let pr = make_pair(&[0.5, 0.5], &[0.3, 0.7]).unwrap();
        assert_eq!(s_alpha_masses(&pr, 1.0), (0.5, 0.3));
    }

    #[test]
    fn schedule_validation() {
        let s = AlphaSchedule::default();
        assert_eq!(s.alphas().len(), 41);
        assert_eq!(s.alphas()[0], 1e-3);
        assert_eq!(s.alphas()[40], 1e3);
        assert!((s.alphas()[20] - 1.0).abs() < 1e-12);
        assert_eq!(s.with_endpoints().count(), 43);
        assert!(AlphaSchedule::new(vec![1.0, 1.0]).is_err());
        assert!(AlphaSchedule::new(vec![0.0]).is_err());
        assert!(AlphaSchedule::new(vec![f64::INFINITY]).is_err());
        assert!(ClassifierBackend::histogram(1, 0.5).is_err());
    }

    #[test]
    fn exact_mode_reproduces_region() {
        let pr = make_pair(&[0.5, 0.3, 0.2, 0.0], &[0.1, 0.3, 0.4, 0.2]).unwrap();
        let sched = AlphaSchedule::new(vec![0.5, 1.0, 5.0]).unwrap();
        let est = ganview_exact(&pr, &sched);
        assert!(hausdorff_distance(est.hull(), &region_from_pair(&pr)) < 1e-12);
    }

    #[test]
    fn exact_backend_on_symbol_samples() {
        let pr = make_pair(&[0.5, 0.5], &[0.25, 0.75]).unwrap();
        // Test halves: P sees symbols 0,0,1,1; Q sees 0,1,1,1.
        let sp = SampleSet::new(1, vec![0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0]).unwrap();
        let sq = SampleSet::new(1, vec![1.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0]).unwrap();
        let sched = AlphaSchedule::new(vec![1.0]).unwrap();
        let est = ganview_estimate(&sp, &sq, &sched, &ClassifierBackend::exact_ratio(pr.clone())).unwrap();
        let at_one = est.points()[1];
        assert_eq!((at_one.p_mass, at_one.q_mass), (0.5, 0.25));
        let bad = SampleSet::new(1, vec![0.0, 1.0, 2.0, 1.0]).unwrap();
        assert!(matches!(
            ganview_estimate(&bad, &sq, &sched, &ClassifierBackend::exact_ratio(pr)),
            Err(Error::SymbolOutOfRange { .. })
        ));
    }

    #[test]
    fn input_validation() {
        let a = SampleSet::new(1, vec![0.0; 8]).unwrap();
        let b = SampleSet::new(2, vec![0.0; 8]).unwrap();
        let tiny = SampleSet::new(1, vec![0.0; 3]).unwrap();
        let sched = AlphaSchedule::default();
        let h = ClassifierBackend::histogram(10, 0.5).unwrap();
        assert!(matches!(ganview_estimate(&a, &b, &sched, &h), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(ganview_estimate(&a, &tiny, &sched, &h), Err(Error::TooFewSamples { .. })));
        let d4 = SampleSet::new(4, vec![0.0; 32]).unwrap();
        assert!(matches!(ganview_estimate(&d4, &d4, &sched, &h), Err(Error::UnsupportedDimension(4))));
    }
}
