//! Finite-alphabet distributions, their m-fold products and divergences.
//!
//! Product divergences never materialize `P^m`: the likelihood ratio of an
//! outcome of the product depends only on how many times each base symbol
//! occurs, so sums run over count vectors weighted by multinomial
//! coefficients. For `k` symbols that is `C(m+k-1, k-1)` terms instead of
//! `k^m`.

use alloc::vec::Vec;
use core::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::math;

/// Tolerated deviation of raw weights from a unit sum before construction
/// refuses to renormalize.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Default cap on the alphabet size of a materialized product.
pub const DEFAULT_PRODUCT_CAP: usize = 10_000_000;

/// Above this packing degree, count-vector terms are accumulated in the log
/// domain.
const LOG_DOMAIN_THRESHOLD: u32 = 30;

/// A probability vector over the alphabet `{0, .., k-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    probs: Vec<f64>,
}

impl DiscreteDistribution {
    /// Validates raw weights and renormalizes them to sum to one.
    pub fn new(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        for (index, &w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(Error::InvalidArgument(alloc::format!(
                    "non-finite weight {w} at index {index}"
                )));
            }
            if w < 0.0 {
                return Err(Error::NegativeMass { index, value: w });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::NotNormalized(sum));
        }
        Ok(Self {
            probs: weights.iter().map(|w| w / sum).collect(),
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Alphabet size.
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// A target `p` and a generator `q` on a shared alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionPair {
    p: DiscreteDistribution,
    q: DiscreteDistribution,
}

impl DistributionPair {
    pub fn new(p: DiscreteDistribution, q: DiscreteDistribution) -> Result<Self> {
        if p.len() != q.len() {
            return Err(Error::LengthMismatch(p.len(), q.len()));
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> &DiscreteDistribution {
        &self.p
    }

    pub fn q(&self) -> &DiscreteDistribution {
        &self.q
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    /// The pair with target and generator exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            p: self.q.clone(),
            q: self.p.clone(),
        }
    }
}

/// A base pair together with a packing degree `m >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductSpec {
    base: DistributionPair,
    m: u32,
}

impl ProductSpec {
    pub fn new(base: DistributionPair, m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("packing degree m must be >= 1".into()));
        }
        Ok(Self { base, m })
    }

    pub fn base(&self) -> &DistributionPair {
        &self.base
    }

    pub fn m(&self) -> u32 {
        self.m
    }
}

/// Builds a validated pair from raw weights.
pub fn make_pair(p_weights: &[f64], q_weights: &[f64]) -> Result<DistributionPair> {
    if p_weights.is_empty() || q_weights.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    if p_weights.len() != q_weights.len() {
        return Err(Error::LengthMismatch(p_weights.len(), q_weights.len()));
    }
    DistributionPair::new(
        DiscreteDistribution::new(p_weights)?,
        DiscreteDistribution::new(q_weights)?,
    )
}

/// `½ Σ |p_i − q_i|`.
pub fn total_variation(pair: &DistributionPair) -> f64 {
    tv_slices(pair.p.probs(), pair.q.probs())
}

pub(crate) fn tv_slices(p: &[f64], q: &[f64]) -> f64 {
    let s: f64 = p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum();
    (0.5 * s).clamp(0.0, 1.0)
}

/// Materializes `(P^m, Q^m)` with the default size cap.
///
/// Outcomes are ordered lexicographically by their base-k digits, first
/// coordinate most significant.
pub fn product_pair(spec: &ProductSpec) -> Result<DistributionPair> {
    product_pair_capped(spec, DEFAULT_PRODUCT_CAP)
}

pub fn product_pair_capped(spec: &ProductSpec, cap: usize) -> Result<DistributionPair> {
    let k = spec.base.len();
    let size = libm::pow(k as f64, f64::from(spec.m));
    if size > cap as f64 {
        return Err(Error::ProductTooLarge { size, cap });
    }
    let p = materialize(spec.base.p.probs(), spec.m);
    let q = materialize(spec.base.q.probs(), spec.m);
    Ok(DistributionPair {
        p: DiscreteDistribution { probs: p },
        q: DiscreteDistribution { probs: q },
    })
}

fn materialize(base: &[f64], m: u32) -> Vec<f64> {
    let mut out = alloc::vec![1.0];
    for _ in 0..m {
        let mut next = Vec::with_capacity(out.len() * base.len());
        for &prefix in &out {
            next.extend(base.iter().map(|&b| prefix * b));
        }
        out = next;
    }
    out
}

/// `d_TV(P^m, Q^m)` by count-vector enumeration.
pub fn product_tv(spec: &ProductSpec) -> f64 {
    product_tv_slices(spec.base.p.probs(), spec.base.q.probs(), spec.m)
}

/// Same as [`product_tv`] on raw probability slices; used by the bound
/// optimizers, which evaluate many small canonical pairs.
///
/// Uses `d_TV = 1 − Σ_x min(P^m(x), Q^m(x))`. An outcome containing a symbol
/// with `p = 0` or `q = 0` contributes nothing to the sum, so only symbols
/// charged by both distributions are enumerated.
pub fn product_tv_slices(p: &[f64], q: &[f64], m: u32) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    if m == 1 {
        return tv_slices(p, q);
    }
    let mut shared_p = [0.0; 16];
    let mut shared_q = [0.0; 16];
    let mut spill_p = Vec::new();
    let mut spill_q = Vec::new();
    let mut k = 0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 && b > 0.0 {
            if k < 16 {
                shared_p[k] = a;
                shared_q[k] = b;
            } else {
                if k == 16 {
                    spill_p.extend_from_slice(&shared_p);
                    spill_q.extend_from_slice(&shared_q);
                }
                spill_p.push(a);
                spill_q.push(b);
            }
            k += 1;
        }
    }
    if k == 0 {
        return 1.0;
    }
    let (sp, sq): (&[f64], &[f64]) = if k <= 16 {
        (&shared_p[..k], &shared_q[..k])
    } else {
        (&spill_p, &spill_q)
    };
    let overlap = if m > LOG_DOMAIN_THRESHOLD {
        let lp: Vec<f64> = sp.iter().map(|&x| math::ln(x)).collect();
        let lq: Vec<f64> = sq.iter().map(|&x| math::ln(x)).collect();
        let mut acc = 0.0;
        overlap_log(&lp, &lq, m, 0.0, 0.0, 0.0, &mut acc);
        acc
    } else {
        let mut acc = 0.0;
        overlap_exact(sp, sq, m, 1.0, 1.0, 1.0, &mut acc);
        acc
    };
    (1.0 - overlap).clamp(0.0, 1.0)
}

/// Accumulates `Σ coef · min(Πp^c, Πq^c)` over count vectors of the
/// remaining symbols summing to `remaining`.
fn overlap_exact(p: &[f64], q: &[f64], remaining: u32, coef: f64, pp: f64, qq: f64, acc: &mut f64) {
    if p.len() == 1 {
        let a = pp * math::powi(p[0], remaining);
        let b = qq * math::powi(q[0], remaining);
        *acc += coef * a.min(b);
        return;
    }
    let (p0, q0) = (p[0], q[0]);
    let mut binom = 1.0;
    let mut pc = 1.0;
    let mut qc = 1.0;
    for c in 0..=remaining {
        overlap_exact(&p[1..], &q[1..], remaining - c, coef * binom, pp * pc, qq * qc, acc);
        binom = binom * f64::from(remaining - c) / f64::from(c + 1);
        pc *= p0;
        qc *= q0;
    }
}

fn overlap_log(lp: &[f64], lq: &[f64], remaining: u32, lcoef: f64, sp: f64, sq: f64, acc: &mut f64) {
    if lp.len() == 1 {
        let a = sp + f64::from(remaining) * lp[0];
        let b = sq + f64::from(remaining) * lq[0];
        *acc += math::exp(lcoef + a.min(b));
        return;
    }
    let lr = math::ln_factorial(remaining);
    for c in 0..=remaining {
        let lbinom = lr - math::ln_factorial(c) - math::ln_factorial(remaining - c);
        let cf = f64::from(c);
        overlap_log(
            &lp[1..],
            &lq[1..],
            remaining - c,
            lcoef + lbinom,
            sp + cf * lp[0],
            sq + cf * lq[0],
            acc,
        );
    }
}

/// Per-outcome Jensen–Shannon contribution `½[p ln(2p/(p+q)) + q ln(2q/(p+q))]`.
///
/// Homogeneous of degree one, so a multiplicity can be folded into `p` and
/// `q` before the call.
#[inline]
fn js_term(p: f64, q: f64) -> f64 {
    let s = p + q;
    if s <= 0.0 {
        return 0.0;
    }
    let mut t = 0.0;
    if p > 0.0 {
        t += p * math::ln(2.0 * p / s);
    }
    if q > 0.0 {
        t += q * math::ln(2.0 * q / s);
    }
    0.5 * t
}

/// Jensen–Shannon divergence in nats, bounded by `ln 2`.
pub fn js_divergence(pair: &DistributionPair) -> f64 {
    js_slices(pair.p.probs(), pair.q.probs())
}

fn js_slices(p: &[f64], q: &[f64]) -> f64 {
    let js: f64 = p.iter().zip(q).map(|(&a, &b)| js_term(a, b)).sum();
    js.clamp(0.0, LN_2)
}

/// `d_KL(P ‖ Q)` in nats; `+∞` when `P` charges a symbol that `Q` does not.
pub fn kl_divergence(pair: &DistributionPair) -> f64 {
    let mut kl = 0.0;
    for (&a, &b) in pair.p.probs().iter().zip(pair.q.probs()) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            kl += a * math::ln(a / b);
        }
    }
    kl.max(0.0)
}

/// `d_JS(P^m, Q^m)` in nats by count-vector enumeration over the full alphabet.
pub fn product_js(spec: &ProductSpec) -> f64 {
    let p = spec.base.p.probs();
    let q = spec.base.q.probs();
    if spec.m == 1 {
        return js_slices(p, q);
    }
    let mut acc = 0.0;
    if spec.m > LOG_DOMAIN_THRESHOLD {
        let lp: Vec<f64> = p.iter().map(|&x| log_or_neg_inf(x)).collect();
        let lq: Vec<f64> = q.iter().map(|&x| log_or_neg_inf(x)).collect();
        js_log(&lp, &lq, spec.m, 0.0, 0.0, 0.0, &mut acc);
    } else {
        js_exact(p, q, spec.m, 1.0, 1.0, 1.0, &mut acc);
    }
    acc.clamp(0.0, LN_2)
}

fn log_or_neg_inf(x: f64) -> f64 {
    if x > 0.0 {
        math::ln(x)
    } else {
        f64::NEG_INFINITY
    }
}

fn js_exact(p: &[f64], q: &[f64], remaining: u32, coef: f64, pp: f64, qq: f64, acc: &mut f64) {
    if p.len() == 1 {
        let a = pp * math::powi(p[0], remaining);
        let b = qq * math::powi(q[0], remaining);
        *acc += js_term(coef * a, coef * b);
        return;
    }
    let (p0, q0) = (p[0], q[0]);
    let mut binom = 1.0;
    let mut pc = 1.0;
    let mut qc = 1.0;
    for c in 0..=remaining {
        js_exact(&p[1..], &q[1..], remaining - c, coef * binom, pp * pc, qq * qc, acc);
        binom = binom * f64::from(remaining - c) / f64::from(c + 1);
        pc *= p0;
        qc *= q0;
    }
}

fn js_log(lp: &[f64], lq: &[f64], remaining: u32, lcoef: f64, sp: f64, sq: f64, acc: &mut f64) {
    if lp.len() == 1 {
        let a = scaled_log_term(sp, remaining, lp[0]);
        let b = scaled_log_term(sq, remaining, lq[0]);
        *acc += js_term(math::exp(lcoef + a), math::exp(lcoef + b));
        return;
    }
    let lr = math::ln_factorial(remaining);
    for c in 0..=remaining {
        let lbinom = lr - math::ln_factorial(c) - math::ln_factorial(remaining - c);
        js_log(
            &lp[1..],
            &lq[1..],
            remaining - c,
            lcoef + lbinom,
            scaled_log_term(sp, c, lp[0]),
            scaled_log_term(sq, c, lq[0]),
            acc,
        );
    }
}

/// `s + c·l` with `0·(−∞) = 0`.
#[inline]
fn scaled_log_term(s: f64, c: u32, l: f64) -> f64 {
    if c == 0 {
        s
    } else {
        s + f64::from(c) * l
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(p: &[f64], q: &[f64]) -> DistributionPair {
        make_pair(p, q).unwrap()
    }

    fn spec(p: &[f64], q: &[f64], m: u32) -> ProductSpec {
        ProductSpec::new(pair(p, q), m).unwrap()
    }

    #[test]
    fn make_pair_validation() {
        assert!(make_pair(&[0.5, 0.5], &[0.3, 0.7]).is_ok());
        assert!(make_pair(&[1.0], &[1.0]).is_ok());
        assert!(matches!(
            make_pair(&[0.5, 0.6], &[0.3, 0.7]),
            Err(Error::NotNormalized(_))
        ));
        assert!(matches!(
            make_pair(&[1.2, -0.2], &[0.3, 0.7]),
            Err(Error::NegativeMass { index: 1, .. })
        ));
        assert_eq!(
            make_pair(&[1.0], &[0.5, 0.5]),
            Err(Error::LengthMismatch(1, 2))
        );
        assert_eq!(make_pair(&[], &[]), Err(Error::EmptyDistribution));
    }

    #[test]
    fn small_deviation_is_renormalized() {
        let pr = make_pair(&[0.5, 0.5 + 5e-10], &[0.3, 0.7]).unwrap();
        let s: f64 = pr.p().probs().iter().sum();
        assert!((s - 1.0).abs() < 1e-15);
        assert!(make_pair(&[0.5, 0.5 + 2e-9], &[0.3, 0.7]).is_err());
    }

    #[test]
    fn tv_toy_values() {
        assert!((total_variation(&pair(&[0.2, 0.8], &[0.0, 1.0])) - 0.2).abs() < 1e-15);
        assert!((total_variation(&pair(&[0.5, 0.5], &[0.3, 0.7])) - 0.2).abs() < 1e-15);
        assert_eq!(total_variation(&pair(&[0.4, 0.6], &[0.4, 0.6])), 0.0);
    }

    #[test]
    fn product_pair_by_hand() {
        let pp = product_pair(&spec(&[0.2, 0.8], &[0.0, 1.0], 2)).unwrap();
        let want_p = [0.04, 0.16, 0.16, 0.64];
        let want_q = [0.0, 0.0, 0.0, 1.0];
        for i in 0..4 {
            assert!((pp.p().probs()[i] - want_p[i]).abs() < 1e-15);
            assert!((pp.q().probs()[i] - want_q[i]).abs() < 1e-15);
        }
        let pq = product_pair(&spec(&[0.5, 0.5], &[0.3, 0.7], 2)).unwrap();
        let want = [0.09, 0.21, 0.21, 0.49];
        for (a, b) in pq.q().probs().iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        let base = pair(&[0.1, 0.2, 0.7], &[0.3, 0.3, 0.4]);
        let one = product_pair(&ProductSpec::new(base.clone(), 1).unwrap()).unwrap();
        assert_eq!(one, base);
    }

    #[test]
    fn product_pair_cap() {
        let s = spec(&[0.5, 0.5], &[0.3, 0.7], 24);
        assert!(matches!(product_pair(&s), Err(Error::ProductTooLarge { .. })));
        assert!(product_pair_capped(&spec(&[0.5, 0.5], &[0.3, 0.7], 3), 8).is_ok());
        assert!(product_pair_capped(&spec(&[0.5, 0.5], &[0.3, 0.7], 4), 8).is_err());
    }

    #[test]
    fn product_tv_examples() {
        // Brute force over the four outcomes: ½(0.04+0.16+0.16+0.36) = 0.36.
        assert!((product_tv(&spec(&[0.2, 0.8], &[0.0, 1.0], 2)) - 0.36).abs() < 1e-14);
        // ½(|0.25−0.09| + 2|0.25−0.21| + |0.25−0.49|) = 0.24.
        assert!((product_tv(&spec(&[0.5, 0.5], &[0.3, 0.7], 2)) - 0.24).abs() < 1e-14);
        let s = spec(&[0.1, 0.2, 0.7], &[0.3, 0.3, 0.4], 1);
        assert_eq!(product_tv(&s), total_variation(s.base()));
    }

    #[test]
    fn product_tv_matches_materialized() {
        let s = spec(&[0.1, 0.2, 0.3, 0.4], &[0.25, 0.0, 0.5, 0.25], 5);
        let brute = total_variation(&product_pair(&s).unwrap());
        assert!((product_tv(&s) - brute).abs() < 1e-12);
    }

    #[test]
    fn log_domain_agrees_with_exact_domain() {
        let p = [0.3, 0.5, 0.2];
        let q = [0.25, 0.45, 0.3];
        let mut exact = 0.0;
        overlap_exact(&p, &q, 30, 1.0, 1.0, 1.0, &mut exact);
        let lp: Vec<f64> = p.iter().map(|&x| math::ln(x)).collect();
        let lq: Vec<f64> = q.iter().map(|&x| math::ln(x)).collect();
        let mut logd = 0.0;
        overlap_log(&lp, &lq, 30, 0.0, 0.0, 0.0, &mut logd);
        assert!((exact - logd).abs() < 1e-12);
        let big = product_tv(&spec(&p, &q, 64));
        assert!(big > product_tv(&spec(&p, &q, 30)) && big <= 1.0);
    }

    #[test]
    fn js_examples() {
        let js = js_divergence(&pair(&[0.4, 0.6], &[0.0, 1.0]));
        assert!((js - 0.1639).abs() < 5e-4, "{js}");
        assert_eq!(js_divergence(&pair(&[0.3, 0.7], &[0.3, 0.7])), 0.0);
        let disjoint = js_divergence(&pair(&[1.0, 0.0], &[0.0, 1.0]));
        assert!((disjoint - LN_2).abs() < 1e-15);
    }

    #[test]
    fn product_js_matches_materialized() {
        let s = spec(&[0.4, 0.6], &[0.0, 1.0], 3);
        let brute = js_divergence(&product_pair(&s).unwrap());
        assert!((product_js(&s) - brute).abs() < 1e-12);
        let one = spec(&[0.4, 0.6], &[0.0, 1.0], 1);
        assert_eq!(product_js(&one), js_divergence(one.base()));
        // log-domain path stays below ln 2 and above the m = 30 value
        let big = product_js(&spec(&[0.4, 0.6], &[0.0, 1.0], 40));
        assert!(big >= product_js(&spec(&[0.4, 0.6], &[0.0, 1.0], 30)) - 1e-12);
        assert!(big <= LN_2);
    }

    #[test]
    fn kl_infinite_off_support() {
        assert_eq!(kl_divergence(&pair(&[0.5, 0.5], &[1.0, 0.0])), f64::INFINITY);
        assert!((kl_divergence(&pair(&[1.0, 0.0], &[0.5, 0.5])) - LN_2).abs() < 1e-15);
    }

    #[test]
    fn zero_packing_rejected() {
        assert!(ProductSpec::new(pair(&[1.0], &[1.0]), 0).is_err());
    }
}
