//! Reduction of piecewise-uniform densities to finite pairs.
//!
//! Two densities on the line that are constant on intervals induce a finite
//! pair by lumping together the cells where the likelihood ratio `p/q` takes
//! the same value. The lumped pair has the same region and the same value
//! for every f-divergence as the continuous pair.

use anyhow::{bail, Result};
use modecollapse::{make_pair, DistributionPair};
use serde::Deserialize;

/// A density equal to `densities[i]` on `[breaks[i], breaks[i+1])`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct PiecewiseUniform {
    pub breaks: Vec<f64>,
    pub densities: Vec<f64>,
}

/// How to fix inputs whose printed constants do not integrate to one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MassPolicy {
    /// Divide every piece by the total mass.
    #[default]
    Proportional,
    /// Keep every piece but the last and give the last the remaining mass.
    LastAbsorbs,
}

impl PiecewiseUniform {
    pub fn new(breaks: Vec<f64>, densities: Vec<f64>) -> Result<Self> {
        let d = Self { breaks, densities };
        d.validate()?;
        Ok(d)
    }

    fn validate(&self) -> Result<()> {
        if self.densities.is_empty() || self.breaks.len() != self.densities.len() + 1 {
            bail!("need one more break than densities");
        }
        if self.breaks.iter().any(|b| !b.is_finite()) || self.breaks.windows(2).any(|w| w[1] <= w[0]) {
            bail!("breaks must be finite and strictly increasing");
        }
        if self.densities.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            bail!("densities must be finite and nonnegative");
        }
        Ok(())
    }

    fn piece_masses(&self, policy: MassPolicy) -> Result<Vec<f64>> {
        let mut m: Vec<f64> = self
            .densities
            .iter()
            .zip(self.breaks.windows(2))
            .map(|(d, w)| d * (w[1] - w[0]))
            .collect();
        let total: f64 = m.iter().sum();
        if total <= 0.0 {
            bail!("density has zero mass");
        }
        match policy {
            MassPolicy::Proportional => m.iter_mut().for_each(|x| *x /= total),
            MassPolicy::LastAbsorbs => {
                let n = m.len();
                let rest: f64 = m[..n - 1].iter().sum();
                if rest > 1.0 {
                    bail!("pieces before the last already carry mass {rest} > 1");
                }
                m[n - 1] = 1.0 - rest;
            }
        }
        Ok(m)
    }

    // Mass of [a, b) given per-piece masses.
    fn mass_on(&self, masses: &[f64], a: f64, b: f64) -> f64 {
        let mut s = 0.0;
        for (i, w) in self.breaks.windows(2).enumerate() {
            let lo = a.max(w[0]);
            let hi = b.min(w[1]);
            if hi > lo {
                s += masses[i] * (hi - lo) / (w[1] - w[0]);
            }
        }
        s
    }
}

/// Lumps the cells of equal likelihood ratio, ordered from highest `p/q` down.
pub fn reduce_pair(p: &PiecewiseUniform, q: &PiecewiseUniform, policy: MassPolicy) -> Result<DistributionPair> {
    p.validate()?;
    q.validate()?;
    let (pm, qm) = (p.piece_masses(policy)?, q.piece_masses(policy)?);
    let mut cuts: Vec<f64> = p.breaks.iter().chain(&q.breaks).copied().collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut cells: Vec<(f64, f64)> = cuts
        .windows(2)
        .map(|w| (p.mass_on(&pm, w[0], w[1]), q.mass_on(&qm, w[0], w[1])))
        .filter(|&(a, b)| a > 0.0 || b > 0.0)
        .collect();
    let ratio = |c: &(f64, f64)| if c.1 > 0.0 { c.0 / c.1 } else { f64::INFINITY };
    cells.sort_by(|a, b| ratio(b).total_cmp(&ratio(a)));
    let mut groups: Vec<(f64, f64)> = Vec::new();
    for c in cells {
        match groups.last_mut() {
            Some(g) if same_ratio(*g, c) => {
                g.0 += c.0;
                g.1 += c.1;
            }
            _ => groups.push(c),
        }
    }
    let (pw, qw): (Vec<f64>, Vec<f64>) = groups.into_iter().unzip();
    Ok(make_pair(&pw, &qw)?)
}

fn same_ratio(a: (f64, f64), b: (f64, f64)) -> bool {
    let (x, y) = (a.0 * b.1, b.0 * a.1);
    (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pu(b: &[f64], d: &[f64]) -> PiecewiseUniform {
        PiecewiseUniform::new(b.to_vec(), d.to_vec()).unwrap()
    }

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn collapse_toys() {
        let p = pu(&[0.0, 1.0], &[1.0]);
        let r = reduce_pair(&p, &pu(&[0.2, 1.0], &[1.25]), MassPolicy::Proportional).unwrap();
        assert!(close(r.p().probs(), &[0.2, 0.8]) && close(r.q().probs(), &[0.0, 1.0]));
        let r = reduce_pair(&p, &pu(&[0.0, 0.5, 1.0], &[0.6, 1.4]), MassPolicy::Proportional).unwrap();
        assert!(close(r.p().probs(), &[0.5, 0.5]) && close(r.q().probs(), &[0.3, 0.7]));
    }

    #[test]
    fn equal_ratio_cells_merge() {
        let p = pu(&[0.0, 0.25, 0.5, 1.0], &[1.0, 1.0, 1.0]);
        let q = pu(&[0.0, 0.5, 1.0], &[1.0, 1.0]);
        let r = reduce_pair(&p, &q, MassPolicy::Proportional).unwrap();
        assert_eq!(r.len(), 1);
    }

    #[test]
    fn mass_policies_differ_on_inconsistent_constants() {
        let p = pu(&[0.0, 1.0], &[1.0]);
        let q = pu(&[0.0, 0.77815, 1.0], &[0.285, 3.479]);
        let a = reduce_pair(&p, &q, MassPolicy::Proportional).unwrap();
        let b = reduce_pair(&p, &q, MassPolicy::LastAbsorbs).unwrap();
        assert!((b.q().probs()[0] - 0.285 * 0.77815).abs() < 1e-12);
        assert!((a.q().probs()[0] - b.q().probs()[0]).abs() > 1e-4);
    }

    #[test]
    fn validation() {
        assert!(PiecewiseUniform::new(vec![0.0, 1.0], vec![]).is_err());
        assert!(PiecewiseUniform::new(vec![1.0, 0.0], vec![1.0]).is_err());
        assert!(PiecewiseUniform::new(vec![0.0, 1.0], vec![-1.0]).is_err());
        let p = pu(&[0.0, 1.0], &[3.0]);
        let q = pu(&[0.0, 0.5, 1.0], &[3.0, 1.0]);
        assert!(reduce_pair(&q, &p, MassPolicy::LastAbsorbs).is_err());
    }
}
