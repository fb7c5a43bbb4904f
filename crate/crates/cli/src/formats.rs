//! Readers and writers for the on-disk formats.
//!
//! CSV output is always `\n`-terminated with `.` decimals; floats print in
//! shortest round-trip form unless noted.

use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use modecollapse::ganview::EstimatePoint;
use modecollapse::{make_pair, DistributionPair, EvolutionBand, ModeCollapseRegion, ModeSpec, SampleSet};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub fn read_text(path: &Path) -> Result<String> {
    let mut s = String::new();
    std::fs::File::open(path)
        .with_context(|| format!("cannot open {}", path.display()))?
        .read_to_string(&mut s)
        .with_context(|| format!("cannot read {}", path.display()))?;
    Ok(s)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn number_array(obj: &serde_json::Map<String, Value>, field: &str) -> Result<Vec<f64>> {
    let v = obj.get(field).ok_or_else(|| anyhow!("field `{field}` is missing"))?;
    let arr = v
        .as_array()
        .ok_or_else(|| anyhow!("field `{field}` must be an array of numbers"))?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| x.as_f64().ok_or_else(|| anyhow!("field `{field}[{i}]` is not a number")))
        .collect()
}

/// Parses `{"p": [..], "q": [..]}`.
pub fn parse_pair_json(text: &str) -> Result<DistributionPair> {
    let v: Value = serde_json::from_str(text).context("pair file is not valid JSON")?;
    let obj = v.as_object().ok_or_else(|| anyhow!("pair JSON must be an object with fields `p` and `q`"))?;
    let p = number_array(obj, "p")?;
    let q = number_array(obj, "q")?;
    make_pair(&p, &q).map_err(|e| anyhow!("invalid pair: {e}"))
}

pub fn pair_to_json(pair: &DistributionPair) -> String {
    let v = serde_json::json!({ "p": pair.p().probs(), "q": pair.q().probs() });
    format!("{v}\n")
}

/// Header `epsilon,delta`, one boundary vertex per row.
pub fn region_csv(region: &ModeCollapseRegion) -> String {
    let mut s = String::from("epsilon,delta\n");
    for (e, d) in region.vertices() {
        writeln!(s, "{e},{d}").unwrap();
    }
    s
}

pub fn parse_region_csv(text: &str) -> Result<ModeCollapseRegion> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let mut pts = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let get = |j: usize| -> Result<f64> {
            rec.get(j)
                .ok_or_else(|| anyhow!("row {}: expected 2 columns", i + 1))?
                .trim()
                .parse()
                .with_context(|| format!("row {}: not a number", i + 1))
        };
        pts.push((get(0)?, get(1)?));
    }
    ModeCollapseRegion::new(&pts).map_err(|e| anyhow!("{e}"))
}

/// Rounds to 12 significant digits and prints the shortest form of the result.
pub fn sig12(x: f64) -> String {
    let r: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    format!("{r}")
}

/// Header `m,lower,upper,feasible`; infeasible rows leave both bounds empty.
pub fn band_csv(band: &EvolutionBand) -> String {
    let mut s = String::from("m,lower,upper,feasible\n");
    for e in band.entries() {
        match e.bounds {
            Some((lo, hi)) => writeln!(s, "{},{},{},true", e.m, sig12(lo), sig12(hi)).unwrap(),
            None => writeln!(s, "{},,,false", e.m).unwrap(),
        }
    }
    s
}

fn axis_names(dim: usize) -> Vec<String> {
    match dim {
        1 => vec!["x".into()],
        2 => vec!["x".into(), "y".into()],
        3 => vec!["x".into(), "y".into(), "z".into()],
        _ => (1..=dim).map(|i| format!("x{i}")).collect(),
    }
}

/// One point per row with an `x,y`-style header.
pub fn samples_csv(samples: &SampleSet) -> String {
    let mut s = axis_names(samples.dim()).join(",");
    s.push('\n');
    for row in samples.rows() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

/// Reads sample rows; a first row that does not parse as numbers is taken as a header.
pub fn parse_samples_csv(text: &str) -> Result<SampleSet> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.with_context(|| format!("sample row {}", i + 1))?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(r) => {
                if let Some(first) = rows.first() {
                    if first.len() != r.len() {
                        bail!("sample row {} has {} columns, expected {}", i + 1, r.len(), first.len());
                    }
                }
                rows.push(r);
            }
            Err(_) if i == 0 => continue,
            Err(_) => bail!("sample row {} contains a non-numeric value", i + 1),
        }
    }
    if rows.is_empty() {
        bail!("sample file has no data rows");
    }
    SampleSet::from_rows(&rows).map_err(|e| anyhow!("{e}"))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModeSpecJson {
    centers: Vec<[f64; 2]>,
    std: f64,
    #[serde(default = "default_quality_x")]
    quality_x: f64,
}

fn default_quality_x() -> f64 {
    3.0
}

/// `{"centers": [[x, y], ..], "std": s, "quality_x": 3}`; `quality_x` defaults to 3.
pub fn parse_mode_spec_json(text: &str) -> Result<ModeSpec> {
    let j: ModeSpecJson = serde_json::from_str(text).context("invalid mode spec JSON")?;
    ModeSpec::new(j.centers, j.std, j.quality_x).map_err(|e| anyhow!("{e}"))
}

pub fn mode_spec_to_json(spec: &ModeSpec) -> String {
    let j = ModeSpecJson {
        centers: spec.centers().to_vec(),
        std: spec.std(),
        quality_x: spec.quality_x(),
    };
    format!("{}\n", serde_json::to_string(&j).expect("spec serializes"))
}

/// Header `alpha,p_mass,q_mass`; the last threshold prints as `inf`.
pub fn estimate_csv(points: &[EstimatePoint]) -> String {
    let mut s = String::from("alpha,p_mass,q_mass\n");
    for p in points {
        writeln!(s, "{},{},{}", p.alpha, p.p_mass, p.q_mass).unwrap();
    }
    s
}

/// Parses a comma-separated list of reals.
pub fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>().with_context(|| format!("`{t}` is not a number"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_json_errors_name_the_field() {
        let e = parse_pair_json(r#"{"p": [0.5, 0.5]}"#).unwrap_err().to_string();
        assert!(e.contains("`q`"), "{e}");
        let e = parse_pair_json(r#"{"p": [0.5, "x"], "q": [1, 0]}"#).unwrap_err().to_string();
        assert!(e.contains("`p[1]`"), "{e}");
        let e = parse_pair_json(r#"{"p": 3, "q": [1]}"#).unwrap_err().to_string();
        assert!(e.contains("`p`"), "{e}");
        assert!(parse_pair_json("{").is_err());
        let pr = parse_pair_json(r#"{"p": [0.2, 0.8], "q": [0, 1]}"#).unwrap();
        assert_eq!(parse_pair_json(&pair_to_json(&pr)).unwrap(), pr);
    }

    #[test]
    fn sig12_rounds() {
        assert_eq!(sig12(0.11), "0.11");
        assert_eq!(sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(sig12(0.0), "0");
        assert_eq!(sig12(1.0), "1");
    }

    #[test]
    fn samples_round_trip_with_and_without_header() {
        let s = SampleSet::from_rows(&[[1.5, -2.0], [0.25, 3.0]]).unwrap();
        let text = samples_csv(&s);
        assert!(text.starts_with("x,y\n"));
        assert_eq!(parse_samples_csv(&text).unwrap(), s);
        assert_eq!(parse_samples_csv("1.5,-2\n0.25,3\n").unwrap(), s);
        assert!(parse_samples_csv("x,y\n1,2\n3\n").is_err());
        assert!(parse_samples_csv("x,y\n").is_err());
    }

    #[test]
    fn region_round_trip() {
        let r = ModeCollapseRegion::new(&[(0.0, 0.0), (0.0, 0.2), (1.0, 1.0)]).unwrap();
        let text = region_csv(&r);
        assert_eq!(text, "epsilon,delta\n0,0\n0,0.2\n1,1\n");
        assert_eq!(parse_region_csv(&text).unwrap(), r);
    }

    #[test]
    fn mode_spec_round_trip() {
        let g = modecollapse::grid_spec();
        assert_eq!(parse_mode_spec_json(&mode_spec_to_json(&g)).unwrap(), g);
        let s = parse_mode_spec_json(r#"{"centers": [[0, 0]], "std": 0.1}"#).unwrap();
        assert_eq!(s.quality_x(), 3.0);
        assert!(parse_mode_spec_json(r#"{"centers": [], "std": 0.1}"#).is_err());
    }
}
