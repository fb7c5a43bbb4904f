//! Argument parsing and subcommand dispatch.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use modecollapse::ganview::{hull_of, DEFAULT_SMOOTHING};
use modecollapse::metrics::reverse_kl_smoothed;
use modecollapse::{
    count_modes, evolution_band, ganview_estimate, ganview_exact, grid_spec, has_mode_augmentation,
    has_mode_collapse, high_quality_fraction, js_divergence, region_from_pair, reverse_kl, ring_spec,
    sample_mixture, separation_m, total_variation, AlphaSchedule, ClassifierBackend, CollapsePoint,
    ConstraintSpec, ModeSpec, Thm3Regime,
};
use serde::Deserialize;

use crate::formats::{self, parse_list};
use crate::reduce::{reduce_pair, MassPolicy, PiecewiseUniform};
use crate::svg::{line_chart, Series};
use crate::verify::{default_checks, run_verify, violations_csv, VerifyConfig};

/// Exit status for success.
pub const EXIT_OK: i32 = 0;
/// Exit status when a verification finds violations.
pub const EXIT_VERIFY_FAILED: i32 = 1;
/// Exit status for bad usage, unreadable input or invalid parameters.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "modecollapse", version, about = "Mode-collapse regions, packed TV bounds and region estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Region boundary of a pair given as JSON {"p": [..], "q": [..]}.
    Region(RegionArgs),
    /// Bounds on d_TV(P^m, Q^m) for m = 1..m-max.
    Band(BandArgs),
    /// First packing degree at which a collapsed family separates from a non-collapsed one.
    Separate(SeparateArgs),
    /// Randomized check of the bounds against product TVs of random pairs.
    Verify(VerifyArgs),
    /// Draw samples from the ring or grid Gaussian mixture.
    Sample(SampleArgs),
    /// Mode count, high-quality fraction and reverse KL of a sample file.
    Metrics(MetricsArgs),
    /// Estimate a region from two sample files, or exactly from a known pair.
    Ganview(GanviewArgs),
    /// Reduce piecewise-uniform densities on the line to a finite pair.
    Reduce(ReduceArgs),
}

#[derive(Debug, clap::Args)]
pub struct RegionArgs {
    /// Pair JSON file.
    pub pair: PathBuf,
    /// Report collapse and augmentation at (eps, delta).
    #[arg(long, requires = "delta")]
    pub eps: Option<f64>,
    #[arg(long, requires = "eps")]
    pub delta: Option<f64>,
    /// Region CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write an SVG chart next to --out.
    #[arg(long, requires = "out")]
    pub emit_svg: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundFamily {
    /// Unconstrained pairs.
    Thm1,
    /// Pairs with (eps, delta)-mode collapse.
    Thm2,
    /// Pairs with neither (eps, delta)-mode collapse nor augmentation.
    Thm3,
}

#[derive(Debug, clap::Args)]
#[command(after_help = "Defaults: tau = 0.11, delta = 0.1; eps sweeps 0.00..0.05 (thm2) and 0.03..0.08 (thm3).")]
pub struct BandArgs {
    #[arg(value_enum)]
    pub family: BoundFamily,
    #[arg(long, default_value_t = 0.11)]
    pub tau: f64,
    /// Defaults to 0.02 for thm2 and 0.05 for thm3.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 10)]
    pub m_max: u32,
    /// Band CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, requires = "out")]
    pub emit_svg: bool,
}

#[derive(Debug, clap::Args)]
#[command(after_help = "Each of --tau, --eps, --delta takes one value shared by both hypotheses, or H0,H1.\nH0 excludes (eps, delta)-collapse and augmentation; H1 requires collapse.")]
pub struct SeparateArgs {
    #[arg(long, default_value = "0.11")]
    pub tau: String,
    #[arg(long, default_value = "0.05,0.02")]
    pub eps: String,
    #[arg(long, default_value = "0.1")]
    pub delta: String,
    #[arg(long, default_value_t = 10)]
    pub m_max: u32,
}

#[derive(Debug, clap::Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 6)]
    pub max_support: usize,
    #[arg(long, default_value_t = 4)]
    pub m_max: u32,
    /// Collapse points to check, paired with --delta.
    #[arg(long, default_value = "0.02,0.05")]
    pub eps: String,
    #[arg(long, default_value = "0.1")]
    pub delta: String,
    /// Violator CSV destination.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, hide = true, default_value_t = 0.0)]
    pub corrupt_bound: f64,
}

#[derive(Debug, clap::Args)]
pub struct SampleArgs {
    /// `ring`, `grid`, or a mode spec JSON file.
    #[arg(long, default_value = "grid")]
    pub spec: String,
    #[arg(long, default_value_t = 2500)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct MetricsArgs {
    /// Generated samples (CSV).
    pub samples: PathBuf,
    /// Reference samples (CSV); enables reverse KL.
    pub reference: Option<PathBuf>,
    /// `ring`, `grid`, or a mode spec JSON file.
    #[arg(long, default_value = "grid")]
    pub spec: String,
    /// Add one pseudo-count per mode before computing reverse KL.
    #[arg(long)]
    pub smooth: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct GanviewArgs {
    /// Samples of the target P (CSV).
    #[arg(requires = "q_samples")]
    pub p_samples: Option<PathBuf>,
    /// Samples of the generator Q (CSV).
    pub q_samples: Option<PathBuf>,
    /// Known pair JSON: thresholds its exact likelihood ratio. Without sample
    /// files the exact masses are reported.
    #[arg(long)]
    pub exact: Option<PathBuf>,
    /// Histogram bins per dimension.
    #[arg(long, default_value_t = 50)]
    pub bins: usize,
    /// Comma-separated thresholds; default 41 log-spaced values in [1e-3, 1e3].
    #[arg(long)]
    pub alphas: Option<String>,
    /// Estimate CSV destination; the hull goes to `<stem>.hull.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, requires = "out")]
    pub emit_svg: bool,
}

#[derive(Debug, clap::Args)]
#[command(after_help = "Input: {\"p\": {\"breaks\": [..], \"densities\": [..]}, \"q\": {..}, \"mass_policy\": \"proportional\" | \"last_absorbs\"}")]
pub struct ReduceArgs {
    /// Piecewise-uniform densities (JSON).
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

enum Failure {
    Usage(anyhow::Error),
    Verification(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

impl From<modecollapse::Error> for Failure {
    fn from(e: modecollapse::Error) -> Self {
        Failure::Usage(e.into())
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if code == EXIT_OK {
                write!(out, "{}", e.render())
            } else {
                write!(err, "{}", e.render())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Region(a) => cmd_region(&a, out, err),
        Command::Band(a) => cmd_band(&a, out, err),
        Command::Separate(a) => cmd_separate(&a, out),
        Command::Verify(a) => cmd_verify(&a, out, err),
        Command::Sample(a) => cmd_sample(&a, out),
        Command::Metrics(a) => cmd_metrics(&a, out),
        Command::Ganview(a) => cmd_ganview(&a, out),
        Command::Reduce(a) => cmd_reduce(&a, out, err),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(e)) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_USAGE
        }
        Err(Failure::Verification(msg)) => {
            let _ = writeln!(err, "verification failed: {msg}");
            EXIT_VERIFY_FAILED
        }
    }
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => formats::write_text(p, text),
        None => out.write_all(text.as_bytes()).context("cannot write to stdout"),
    }
}

fn svg_path(path: &Path) -> PathBuf {
    path.with_extension("svg")
}

fn collapse_point(eps: f64, delta: f64) -> Result<CollapsePoint> {
    CollapsePoint::new(eps, delta).map_err(|_| anyhow!("need 0 <= eps < delta <= 1, got eps = {eps}, delta = {delta}"))
}

fn check_tau(tau: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&tau) {
        bail!("need 0 <= tau <= 1, got tau = {tau}");
    }
    Ok(())
}

fn check_m_max(m_max: u32) -> Result<()> {
    if m_max == 0 {
        bail!("need m-max >= 1");
    }
    Ok(())
}

fn cmd_region(a: &RegionArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let pair = formats::parse_pair_json(&formats::read_text(&a.pair)?)?;
    let point = match (a.eps, a.delta) {
        (Some(e), Some(d)) => Some(collapse_point(e, d)?),
        _ => None,
    };
    let region = region_from_pair(&pair);
    let mut summary = format!("tv,{}\n", total_variation(&pair));
    if let Some(c) = point {
        summary.push_str(&format!("collapse,{}\n", has_mode_collapse(&region, c)));
        summary.push_str(&format!("augmentation,{}\n", has_mode_augmentation(&pair, c)));
    }
    emit(out, a.out.as_deref(), &formats::region_csv(&region))?;
    if let Some(path) = &a.out {
        out.write_all(summary.as_bytes()).context("cannot write to stdout")?;
        if a.emit_svg {
            let series = [
                Series { name: "boundary".into(), points: region.vertices().to_vec() },
                Series { name: "diagonal".into(), points: vec![(0.0, 0.0), (1.0, 1.0)] },
            ];
            let svg = line_chart("mode-collapse region", "epsilon", "delta", (0.0, 1.0), (0.0, 1.0), &series);
            formats::write_text(&svg_path(path), &svg)?;
        }
    } else {
        err.write_all(summary.as_bytes()).context("cannot write to stderr")?;
    }
    Ok(())
}

fn cmd_band(a: &BandArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    check_tau(a.tau)?;
    check_m_max(a.m_max)?;
    let spec = match a.family {
        BoundFamily::Thm1 => ConstraintSpec::unconstrained(a.tau)?,
        BoundFamily::Thm2 => {
            let c = collapse_point(a.eps.unwrap_or(0.02), a.delta)?;
            ConstraintSpec::has_collapse(c.epsilon(), c.delta(), a.tau)?
        }
        BoundFamily::Thm3 => {
            let c = collapse_point(a.eps.unwrap_or(0.05), a.delta)?;
            ConstraintSpec::no_collapse_no_augmentation(c.epsilon(), c.delta(), a.tau)?
        }
    };
    let band = evolution_band(&spec, a.m_max)?;
    if band.entries().iter().all(|e| !e.feasible()) {
        writeln!(err, "note: {}", infeasibility_reason(&spec)).context("cannot write to stderr")?;
    }
    emit(out, a.out.as_deref(), &formats::band_csv(&band))?;
    if let (Some(path), true) = (&a.out, a.emit_svg) {
        let pick = |f: fn(&modecollapse::BandEntry) -> Option<f64>| -> Vec<(f64, f64)> {
            band.entries().iter().filter_map(|e| f(e).map(|v| (e.m as f64, v))).collect()
        };
        let series = [
            Series { name: "upper".into(), points: pick(|e| e.upper()) },
            Series { name: "lower".into(), points: pick(|e| e.lower()) },
        ];
        let svg = line_chart("TV bounds under packing", "m", "d_TV(P^m, Q^m)", (1.0, a.m_max as f64), (0.0, 1.0), &series);
        formats::write_text(&svg_path(path), &svg)?;
    }
    Ok(())
}

fn infeasibility_reason(spec: &ConstraintSpec) -> String {
    let Some(c) = spec.collapse() else {
        return "no pair satisfies the constraints".into();
    };
    let (e, d, t) = (c.epsilon(), c.delta(), spec.tau());
    match spec.kind() {
        modecollapse::ConstraintKind::HasCollapse => {
            format!("tau < delta - eps ({t} < {}): a pair with (eps, delta)-mode collapse has TV at least delta - eps", d - e)
        }
        _ => match modecollapse::bounds::thm3_regime(e, d, t) {
            Ok(Thm3Regime::Infeasible) if d + e <= 1.0 => {
                format!("tau > (delta - eps)/(delta + eps) = {}: no pair avoids both collapse and augmentation", (d - e) / (d + e))
            }
            Ok(Thm3Regime::Infeasible) => {
                format!("tau > (delta - eps)/(2 - delta - eps) = {}: no pair avoids both collapse and augmentation", (d - e) / (2.0 - d - e))
            }
            _ => "the admissible parameter range is empty".into(),
        },
    }
}

// One value for both hypotheses, or `h0,h1`.
fn h_pair(text: &str, name: &str) -> Result<(f64, f64)> {
    let v = parse_list(text).with_context(|| format!("--{name}"))?;
    match v[..] {
        [x] => Ok((x, x)),
        [a, b] => Ok((a, b)),
        _ => bail!("--{name} takes one value or two (H0,H1), got {}", v.len()),
    }
}

fn cmd_separate(a: &SeparateArgs, out: &mut dyn Write) -> Outcome {
    let (t0, t1) = h_pair(&a.tau, "tau")?;
    let (e0, e1) = h_pair(&a.eps, "eps")?;
    let (d0, d1) = h_pair(&a.delta, "delta")?;
    check_tau(t0)?;
    check_tau(t1)?;
    check_m_max(a.m_max)?;
    if t0 != t1 {
        return Err(anyhow!("H0 and H1 must share tau, got {t0} and {t1}").into());
    }
    let c0 = collapse_point(e0, d0)?;
    let c1 = collapse_point(e1, d1)?;
    let h0 = ConstraintSpec::no_collapse_no_augmentation(c0.epsilon(), c0.delta(), t0)?;
    let h1 = ConstraintSpec::has_collapse(c1.epsilon(), c1.delta(), t1)?;
    let line = match separation_m(&h0, &h1, a.m_max)? {
        Some(m) => format!("{m}\n"),
        None => format!("no separation ≤ {}\n", a.m_max),
    };
    out.write_all(line.as_bytes()).context("cannot write to stdout")?;
    Ok(())
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    if a.trials == 0 {
        return Err(anyhow!("need trials >= 1").into());
    }
    if a.max_support < 2 {
        return Err(anyhow!("need max-support >= 2").into());
    }
    check_m_max(a.m_max)?;
    let eps = parse_list(&a.eps).context("--eps")?;
    let delta = parse_list(&a.delta).context("--delta")?;
    if delta.len() != 1 && delta.len() != eps.len() {
        return Err(anyhow!("--delta takes one value or one per --eps value").into());
    }
    let points = eps
        .iter()
        .enumerate()
        .map(|(i, &e)| collapse_point(e, delta[if delta.len() == 1 { 0 } else { i }]))
        .collect::<Result<Vec<_>>>()?;
    let cfg = VerifyConfig {
        trials: a.trials,
        seed: a.seed,
        max_support: a.max_support,
        m_max: a.m_max,
        corrupt: a.corrupt_bound,
    };
    let report = run_verify(&cfg, &default_checks(&points))?;
    let mut text = String::from("check,pairs\n");
    for (label, n) in &report.checked {
        text.push_str(&format!("\"{label}\",{n}\n"));
    }
    text.push_str(&format!("violations,{}\n", report.violations.len()));
    out.write_all(text.as_bytes()).context("cannot write to stdout")?;
    if let Some(path) = &a.out {
        formats::write_text(path, &violations_csv(&report.violations))?;
    } else if !report.violations.is_empty() {
        err.write_all(violations_csv(&report.violations).as_bytes()).context("cannot write to stderr")?;
    }
    if report.violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(format!("{} bound violations", report.violations.len())))
    }
}

fn mode_spec(name: &str) -> Result<ModeSpec> {
    match name {
        "ring" => Ok(ring_spec()),
        "grid" => Ok(grid_spec()),
        path => formats::parse_mode_spec_json(&formats::read_text(Path::new(path))?),
    }
}

fn cmd_sample(a: &SampleArgs, out: &mut dyn Write) -> Outcome {
    let spec = mode_spec(&a.spec)?;
    let samples = sample_mixture(&spec, a.n, a.seed)?;
    emit(out, a.out.as_deref(), &formats::samples_csv(&samples))?;
    Ok(())
}

fn cmd_metrics(a: &MetricsArgs, out: &mut dyn Write) -> Outcome {
    let spec = mode_spec(&a.spec)?;
    let samples = formats::parse_samples_csv(&formats::read_text(&a.samples)?)?;
    let mut text = String::from("metric,value\n");
    text.push_str(&format!("modes,{}\n", count_modes(&samples, &spec)?));
    text.push_str(&format!("max_modes,{}\n", spec.centers().len()));
    text.push_str(&format!("high_quality_fraction,{}\n", high_quality_fraction(&samples, &spec)?));
    if let Some(r) = &a.reference {
        let reference = formats::parse_samples_csv(&formats::read_text(r)?)?;
        if a.smooth {
            let v = reverse_kl_smoothed(&samples, &reference, &spec, 1.0)?;
            text.push_str(&format!("reverse_kl_smoothed,{v}\n"));
        } else {
            let v = reverse_kl(&samples, &reference, &spec)
                .map_err(|e| anyhow!("{e}; rerun with --smooth to add one pseudo-count per mode"))?;
            text.push_str(&format!("reverse_kl,{v}\n"));
        }
    }
    emit(out, a.out.as_deref(), &text)?;
    Ok(())
}

fn hull_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.hull.csv"))
}

fn cmd_ganview(a: &GanviewArgs, out: &mut dyn Write) -> Outcome {
    let schedule = match &a.alphas {
        Some(s) => AlphaSchedule::new(parse_list(s).context("--alphas")?)?,
        None => AlphaSchedule::default(),
    };
    let pair = match &a.exact {
        Some(p) => Some(formats::parse_pair_json(&formats::read_text(p)?)?),
        None => None,
    };
    let estimate = match (&a.p_samples, &a.q_samples, pair) {
        (Some(ps), Some(qs), pair) => {
            let sp = formats::parse_samples_csv(&formats::read_text(ps)?)?;
            let sq = formats::parse_samples_csv(&formats::read_text(qs)?)?;
            let backend = match pair {
                Some(pr) => ClassifierBackend::exact_ratio(pr),
                None => ClassifierBackend::histogram(a.bins, DEFAULT_SMOOTHING)?,
            };
            ganview_estimate(&sp, &sq, &schedule, &backend)?
        }
        (None, None, Some(pr)) => ganview_exact(&pr, &schedule),
        _ => return Err(anyhow!("give two sample files, --exact PAIR, or both").into()),
    };
    let est_csv = formats::estimate_csv(estimate.points());
    let hull_csv = formats::region_csv(estimate.hull());
    debug_assert_eq!(hull_of(estimate.points()), *estimate.hull());
    match &a.out {
        Some(path) => {
            formats::write_text(path, &est_csv)?;
            formats::write_text(&hull_path(path), &hull_csv)?;
            if a.emit_svg {
                let pts = estimate.points().iter().map(|p| (p.q_mass, p.p_mass)).collect();
                let series = [
                    Series { name: "hull".into(), points: estimate.hull().vertices().to_vec() },
                    Series { name: "estimates".into(), points: pts },
                ];
                let svg = line_chart("estimated region", "epsilon", "delta", (0.0, 1.0), (0.0, 1.0), &series);
                formats::write_text(&svg_path(path), &svg)?;
            }
        }
        None => {
            out.write_all(est_csv.as_bytes()).context("cannot write to stdout")?;
            out.write_all(b"\n").context("cannot write to stdout")?;
            out.write_all(hull_csv.as_bytes()).context("cannot write to stdout")?;
        }
    }
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ReduceInput {
    p: PiecewiseUniform,
    q: PiecewiseUniform,
    #[serde(default)]
    mass_policy: MassPolicy,
}

fn cmd_reduce(a: &ReduceArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let input: ReduceInput =
        serde_json::from_str(&formats::read_text(&a.input)?).context("invalid reduction input")?;
    let pair = reduce_pair(&input.p, &input.q, input.mass_policy)?;
    emit(out, a.out.as_deref(), &formats::pair_to_json(&pair))?;
    writeln!(err, "tv,{}\njs,{}", total_variation(&pair), js_divergence(&pair)).context("cannot write to stderr")?;
    Ok(())
}
