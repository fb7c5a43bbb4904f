//! Randomized check that product TVs of random pairs respect the bounds.
//!
//! Each random pair is classified by its region against the collapse points
//! and tested against every bound that applies to it.

use std::fmt::Write as _;

use anyhow::Result;
use modecollapse::{
    has_mode_augmentation, has_mode_collapse, make_pair, product_tv, region_from_pair, thm1_bounds,
    thm2_bounds, thm3_bounds, total_variation, CollapsePoint, DistributionPair, ProductSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Slack allowed on either side of a bound.
pub const SANDWICH_TOLERANCE: f64 = 1e-9;

/// Which bound a pair is checked against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Check {
    Unconstrained,
    HasCollapse(CollapsePoint),
    NoCollapseNoAugmentation(CollapsePoint),
}

impl Check {
    pub fn label(&self) -> String {
        match self {
            Check::Unconstrained => "thm1".into(),
            Check::HasCollapse(c) => format!("thm2({},{})", c.epsilon(), c.delta()),
            Check::NoCollapseNoAugmentation(c) => format!("thm3({},{})", c.epsilon(), c.delta()),
        }
    }

    /// Whether `pair` belongs to the family this check bounds.
    pub fn applies_to(&self, pair: &DistributionPair) -> bool {
        match self {
            Check::Unconstrained => true,
            Check::HasCollapse(c) => has_mode_collapse(&region_from_pair(pair), *c),
            Check::NoCollapseNoAugmentation(c) => {
                !has_mode_collapse(&region_from_pair(pair), *c) && !has_mode_augmentation(pair, *c)
            }
        }
    }
}

/// A product TV outside its bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub trial: usize,
    pub check: String,
    pub m: u32,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub pair: DistributionPair,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub trials: usize,
    pub seed: u64,
    pub max_support: usize,
    pub m_max: u32,
    /// Moves every lower bound up and every upper bound down by this much.
    /// Only used to test that the harness reports violations.
    pub corrupt: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerifyReport {
    pub trials: usize,
    /// `(check label, pairs checked)` in check order.
    pub checked: Vec<(String, usize)>,
    pub violations: Vec<Violation>,
}

fn weights(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    loop {
        let w: Vec<f64> = (0..k)
            .map(|_| {
                if rng.random::<f64>() < 0.2 {
                    0.0
                } else {
                    -(1.0 - rng.random::<f64>()).ln()
                }
            })
            .collect();
        let s: f64 = w.iter().sum();
        if s > 0.0 {
            return w.iter().map(|x| x / s).collect();
        }
    }
}

/// A random pair on at most `max_support` symbols. Half of the draws take
/// `Q` independent of `P`; the others perturb `P` slightly, which covers
/// the pairs without collapse or augmentation.
pub fn random_pair(rng: &mut ChaCha8Rng, max_support: usize) -> DistributionPair {
    let k = rng.random_range(2..=max_support.max(2));
    let p = weights(rng, k);
    let q = if rng.random::<bool>() {
        weights(rng, k)
    } else {
        let r = weights(rng, k);
        let t = 0.3 * rng.random::<f64>();
        p.iter().zip(&r).map(|(a, b)| (1.0 - t) * a + t * b).collect()
    };
    make_pair(&p, &q).expect("generated weights are normalized")
}

/// Checks one pair against one family's bounds for `m = 1..=m_max`.
pub fn check_pair(
    trial: usize,
    pair: &DistributionPair,
    check: &Check,
    m_max: u32,
    corrupt: f64,
) -> Result<Vec<Violation>> {
    let tau = total_variation(pair).clamp(0.0, 1.0);
    let mut out = Vec::new();
    for m in 1..=m_max {
        let bounds = match check {
            Check::Unconstrained => Some(thm1_bounds(tau, m)?),
            Check::HasCollapse(c) => thm2_bounds(c.epsilon(), c.delta(), tau, m)?,
            Check::NoCollapseNoAugmentation(c) => thm3_bounds(c.epsilon(), c.delta(), tau, m)?,
        };
        let value = product_tv(&ProductSpec::new(pair.clone(), m)?);
        let (lower, upper) = match bounds {
            Some(b) => (b.lower + corrupt, b.upper - corrupt),
            // The pair exists, so an empty family is itself a violation.
            None => (f64::NAN, f64::NAN),
        };
        let inside = lower - SANDWICH_TOLERANCE <= value && value <= upper + SANDWICH_TOLERANCE;
        if !inside {
            out.push(Violation { trial, check: check.label(), m, value, lower, upper, pair: pair.clone() });
        }
    }
    Ok(out)
}

/// The checks used by default: no constraint, and collapse or its absence at
/// `(0.02, 0.1)` and `(0.05, 0.1)`.
pub fn default_checks(points: &[CollapsePoint]) -> Vec<Check> {
    let mut v = vec![Check::Unconstrained];
    for &c in points {
        v.push(Check::HasCollapse(c));
        v.push(Check::NoCollapseNoAugmentation(c));
    }
    v
}

/// Draws `cfg.trials` pairs and checks each against every applicable family.
pub fn run_verify(cfg: &VerifyConfig, checks: &[Check]) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut report = VerifyReport {
        trials: cfg.trials,
        checked: checks.iter().map(|c| (c.label(), 0)).collect(),
        violations: Vec::new(),
    };
    for trial in 0..cfg.trials {
        let pair = random_pair(&mut rng, cfg.max_support);
        for (i, check) in checks.iter().enumerate() {
            if check.applies_to(&pair) {
                report.checked[i].1 += 1;
                report
                    .violations
                    .extend(check_pair(trial, &pair, check, cfg.m_max, cfg.corrupt)?);
            }
        }
    }
    Ok(report)
}

/// Draws pairs until `wanted` of them fall in the family of `check`, and
/// checks those. Returns the number of pairs drawn and any violations.
pub fn run_restricted(
    check: &Check,
    wanted: usize,
    seed: u64,
    max_support: usize,
    m_max: u32,
) -> Result<(usize, Vec<Violation>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut drawn, mut accepted) = (0, 0);
    let mut violations = Vec::new();
    while accepted < wanted {
        let pair = random_pair(&mut rng, max_support);
        drawn += 1;
        if check.applies_to(&pair) {
            violations.extend(check_pair(accepted, &pair, check, m_max, 0.0)?);
            accepted += 1;
        }
    }
    Ok((drawn, violations))
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

/// Header `trial,check,m,value,lower,upper,p,q`; `p` and `q` are `;`-separated.
pub fn violations_csv(violations: &[Violation]) -> String {
    let mut s = String::from("trial,check,m,value,lower,upper,p,q\n");
    for v in violations {
        writeln!(
            s,
            "{},\"{}\",{},{},{},{},{},{}",
            v.trial,
            v.check,
            v.m,
            v.value,
            v.lower,
            v.upper,
            join(v.pair.p().probs()),
            join(v.pair.q().probs())
        )
        .unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(corrupt: f64) -> VerifyConfig {
        VerifyConfig { trials: 40, seed: 3, max_support: 5, m_max: 3, corrupt }
    }

    #[test]
    fn clean_run_has_no_violations() {
        let pts = [CollapsePoint::new(0.02, 0.1).unwrap()];
        let r = run_verify(&cfg(0.0), &default_checks(&pts)).unwrap();
        assert!(r.violations.is_empty(), "{:?}", r.violations);
        assert_eq!(r.checked[0].1, 40);
        assert!(r.checked[1].1 > 0 && r.checked[2].1 > 0);
    }

    #[test]
    fn corrupted_bounds_are_caught() {
        let r = run_verify(&cfg(0.05), &[Check::Unconstrained]).unwrap();
        assert!(!r.violations.is_empty());
        let csv = violations_csv(&r.violations);
        assert!(csv.starts_with("trial,check,m,value,lower,upper,p,q\n"));
        assert!(csv.lines().count() > 1);
    }

    #[test]
    fn same_seed_same_pairs() {
        let mut a = ChaCha8Rng::seed_from_u64(9);
        let mut b = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            assert_eq!(random_pair(&mut a, 6), random_pair(&mut b, 6));
        }
    }
}
