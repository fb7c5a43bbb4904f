//! Mode-coverage metrics on 2-D Gaussian mixtures.
//!
//! Every sample is attributed to its nearest mode center (ties go to the
//! lowest index). A sample is high quality when that distance is at most
//! `quality_x` standard deviations.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::math::{cos, ln, sin, sqrt};

/// Points of one fixed dimension, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    dim: usize,
    data: Vec<f64>,
}

impl SampleSet {
    /// Wraps row-major `data`; its length must be a multiple of `dim`.
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("sample dimension must be positive".into()));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: data.len() % dim });
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(dim * rows.len());
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: r.len() });
            }
            data.extend_from_slice(r);
        }
        Self::new(dim, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> core::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    /// Appends one point.
    pub fn push(&mut self, row: &[f64]) -> Result<()> {
        if row.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: row.len() });
        }
        self.data.extend_from_slice(row);
        Ok(())
    }

    /// The first `n` rows and the rest.
    pub fn split_at(&self, n: usize) -> (SampleSet, SampleSet) {
        let (a, b) = self.data.split_at(n.min(self.len()) * self.dim);
        (
            SampleSet { dim: self.dim, data: a.to_vec() },
            SampleSet { dim: self.dim, data: b.to_vec() },
        )
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Centers and spread of an equal-weight isotropic 2-D Gaussian mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSpec {
    centers: Vec<[f64; 2]>,
    std: f64,
    quality_x: f64,
}

impl ModeSpec {
    pub fn new(centers: Vec<[f64; 2]>, std: f64, quality_x: f64) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::InvalidModeSpec("need at least one center".into()));
        }
        if centers.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidModeSpec("centers must be finite".into()));
        }
        if !(std > 0.0 && std.is_finite()) {
            return Err(Error::InvalidModeSpec(format!("std must be positive, got {std}")));
        }
        if !(quality_x > 0.0 && quality_x.is_finite()) {
            return Err(Error::InvalidModeSpec(format!(
                "quality_x must be positive, got {quality_x}"
            )));
        }
        Ok(Self { centers, std, quality_x })
    }

    pub fn centers(&self) -> &[[f64; 2]] {
        &self.centers
    }

    pub fn std(&self) -> f64 {
        self.std
    }

    pub fn quality_x(&self) -> f64 {
        self.quality_x
    }

    /// Index of the nearest center and the distance to it.
    pub fn nearest(&self, x: f64, y: f64) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, c) in self.centers.iter().enumerate() {
            let d2 = (x - c[0]) * (x - c[0]) + (y - c[1]) * (y - c[1]);
            if d2 < best.1 {
                best = (i, d2);
            }
        }
        (best.0, sqrt(best.1))
    }

    fn is_high_quality(&self, dist: f64) -> bool {
        dist <= self.quality_x * self.std
    }
}

/// Eight modes on the unit circle, std 0.01.
pub fn ring_spec() -> ModeSpec {
    let centers = (1..=8)
        .map(|i| {
            let t = 2.0 * core::f64::consts::PI * i as f64 / 8.0;
            [cos(t), sin(t)]
        })
        .collect();
    ModeSpec::new(centers, 0.01, 3.0).expect("static spec is valid")
}

/// 25 modes at `(-4 + 2i, -4 + 2j)`, std 0.05.
pub fn grid_spec() -> ModeSpec {
    let mut centers = Vec::with_capacity(25);
    for i in 0..5 {
        for j in 0..5 {
            centers.push([-4.0 + 2.0 * i as f64, -4.0 + 2.0 * j as f64]);
        }
    }
    ModeSpec::new(centers, 0.05, 3.0).expect("static spec is valid")
}

/// `n` draws from the mixture: a uniform mode, then Gaussian noise around it.
pub fn sample_mixture(spec: &ModeSpec, n: usize, seed: u64) -> Result<SampleSet> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, spec.std).map_err(|e| Error::InvalidModeSpec(format!("{e}")))?;
    let mut data = Vec::with_capacity(2 * n);
    for _ in 0..n {
        let c = spec.centers[rng.random_range(0..spec.centers.len())];
        data.push(c[0] + noise.sample(&mut rng));
        data.push(c[1] + noise.sample(&mut rng));
    }
    SampleSet::new(2, data)
}

fn check_2d(samples: &SampleSet) -> Result<()> {
    if samples.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: samples.dim() });
    }
    if samples.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    Ok(())
}

/// Fraction of samples within `quality_x · std` of their nearest center.
pub fn high_quality_fraction(samples: &SampleSet, spec: &ModeSpec) -> Result<f64> {
    check_2d(samples)?;
    let good = samples
        .rows()
        .filter(|r| spec.is_high_quality(spec.nearest(r[0], r[1]).1))
        .count();
    Ok(good as f64 / samples.len() as f64)
}

/// Number of modes that receive at least one high-quality sample.
pub fn count_modes(samples: &SampleSet, spec: &ModeSpec) -> Result<usize> {
    check_2d(samples)?;
    let mut hit = vec![false; spec.centers.len()];
    for r in samples.rows() {
        let (i, d) = spec.nearest(r[0], r[1]);
        if spec.is_high_quality(d) {
            hit[i] = true;
        }
    }
    Ok(hit.iter().filter(|&&h| h).count())
}

/// Mode histogram by nearest center, as counts.
pub fn mode_counts(samples: &SampleSet, spec: &ModeSpec) -> Result<Vec<usize>> {
    check_2d(samples)?;
    let mut counts = vec![0; spec.centers.len()];
    for r in samples.rows() {
        counts[spec.nearest(r[0], r[1]).0] += 1;
    }
    Ok(counts)
}

/// `D(G || R)` in nats between the mode distributions of generated and reference samples.
///
/// Fails with [`Error::UndefinedKl`] when a mode has generated mass but no
/// reference mass. See [`reverse_kl_smoothed`] for a total variant.
pub fn reverse_kl(generated: &SampleSet, reference: &SampleSet, spec: &ModeSpec) -> Result<f64> {
    kl_from_counts(&mode_counts(generated, spec)?, &mode_counts(reference, spec)?, 0.0)
}

/// [`reverse_kl`] after adding `pseudo_count` to every mode of both histograms.
pub fn reverse_kl_smoothed(
    generated: &SampleSet,
    reference: &SampleSet,
    spec: &ModeSpec,
    pseudo_count: f64,
) -> Result<f64> {
    if !(pseudo_count > 0.0 && pseudo_count.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "pseudo-count must be positive, got {pseudo_count}"
        )));
    }
    kl_from_counts(
        &mode_counts(generated, spec)?,
        &mode_counts(reference, spec)?,
        pseudo_count,
    )
}

fn kl_from_counts(g: &[usize], r: &[usize], pseudo: f64) -> Result<f64> {
    let k = g.len() as f64;
    let gt = g.iter().sum::<usize>() as f64 + pseudo * k;
    let rt = r.iter().sum::<usize>() as f64 + pseudo * k;
    let mut kl = 0.0;
    for (mode, (&gc, &rc)) in g.iter().zip(r).enumerate() {
        let gp = (gc as f64 + pseudo) / gt;
        let rp = (rc as f64 + pseudo) / rt;
        if gp == 0.0 {
            continue;
        }
        if rp == 0.0 {
            return Err(Error::UndefinedKl { mode });
        }
        kl += gp * ln(gp / rp);
    }
    Ok(kl.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_shapes() {
        let r = ring_spec();
        assert_eq!(r.centers().len(), 8);
        assert_eq!(r.std(), 0.01);
        let c = r.centers()[7];
        assert!((c[0] - 1.0).abs() < 1e-15 && c[1].abs() < 1e-15);
        let g = grid_spec();
        assert_eq!(g.centers().len(), 25);
        assert_eq!(g.std(), 0.05);
        assert_eq!(g.centers()[0], [-4.0, -4.0]);
        assert_eq!(g.quality_x(), 3.0);
        assert!(ModeSpec::new(vec![], 1.0, 3.0).is_err());
        assert!(ModeSpec::new(vec![[0.0, 0.0]], 0.0, 3.0).is_err());
        assert!(ModeSpec::new(vec![[0.0, 0.0]], 1.0, -1.0).is_err());
    }

    #[test]
    fn sampler_is_deterministic() {
        let g = grid_spec();
        assert!(sample_mixture(&g, 0, 1).is_err());
        let a = sample_mixture(&g, 100, 7).unwrap();
        let b = sample_mixture(&g, 100, 7).unwrap();
        let c = sample_mixture(&g, 100, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn metric_edge_cases() {
        let g = grid_spec();
        let at = SampleSet::from_rows(&[[-4.0, -4.0], [0.0, 0.0], [0.0, 0.0]]).unwrap();
        assert_eq!(high_quality_fraction(&at, &g).unwrap(), 1.0);
        assert_eq!(count_modes(&at, &g).unwrap(), 2);
        let far = SampleSet::from_rows(&[[-3.0, -3.0], [1.0, 1.0]]).unwrap();
        assert_eq!(high_quality_fraction(&far, &g).unwrap(), 0.0);
        assert_eq!(count_modes(&far, &g).unwrap(), 0);
        // Equidistant from four centers: goes to the lowest index.
        assert_eq!(g.nearest(-3.0, -3.0).0, 0);
        let one_d = SampleSet::new(1, vec![0.0]).unwrap();
        assert!(matches!(count_modes(&one_d, &g), Err(Error::DimensionMismatch { .. })));
        assert!(high_quality_fraction(&SampleSet::new(2, vec![]).unwrap(), &g).is_err());
    }

    #[test]
    fn kl_examples() {
        let g = grid_spec();
        let reference = SampleSet::from_rows(g.centers()).unwrap();
        assert_eq!(reverse_kl(&reference, &reference, &g).unwrap(), 0.0);
        let single = SampleSet::from_rows(&[[0.0, 0.0], [0.01, 0.0]]).unwrap();
        assert!((reverse_kl(&single, &reference, &g).unwrap() - 25f64.ln()).abs() < 1e-12);
        assert!(matches!(reverse_kl(&reference, &single, &g), Err(Error::UndefinedKl { .. })));
        let s = reverse_kl_smoothed(&reference, &single, &g, 1.0).unwrap();
        assert!(s.is_finite() && s > 0.0);
    }
}
