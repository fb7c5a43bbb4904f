//! Mode-collapse regions for pairs of finite distributions.
//!
//! A target `P` and a generator `Q` exhibit `(ε, δ)`-mode collapse when some
//! set `S` has `P(S) ≥ δ` and `Q(S) ≤ ε`. The convex hull of all such points
//! is the *mode-collapse region*, which coincides with the ROC region of the
//! binary test `P` vs `Q`. This crate computes regions exactly for finite
//! alphabets, bounds how `d_TV(P^m, Q^m)` evolves with the packing degree `m`
//! under collapse constraints, estimates regions from samples, and evaluates
//! the usual mode-coverage metrics on 2-D Gaussian-mixture benchmarks.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! the randomized verification harness live in the `modecollapse-cli` crate.
//!
//! Divergences are reported in nats.
#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod bounds;
pub mod dist;
mod error;
pub mod ganview;
mod math;
pub mod metrics;
pub mod optimize;
pub mod region;

pub use bounds::{
    evolution_band, separation_m, thm1_bounds, thm2_bounds, thm3_bounds, BandEntry, Bounds,
    ConstraintKind, ConstraintSpec, EvolutionBand, LowerBranch, Thm3Regime,
};
pub use dist::{
    js_divergence, make_pair, product_js, product_pair, product_tv, total_variation,
    DiscreteDistribution, DistributionPair, ProductSpec,
};
pub use error::{Error, Result};
pub use ganview::{
    ganview_estimate, ganview_exact, optimal_classifier_value, s_alpha_masses, AlphaSchedule,
    ClassifierBackend, RegionEstimate,
};
pub use metrics::{
    count_modes, grid_spec, high_quality_fraction, reverse_kl, ring_spec, sample_mixture,
    ModeSpec, SampleSet,
};
pub use region::{
    canonical_pair_from_region, has_mode_augmentation, has_mode_collapse, region_contains,
    region_from_pair, tv_from_region, CollapsePoint, ModeCollapseRegion,
};
