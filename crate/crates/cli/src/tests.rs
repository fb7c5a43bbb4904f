use std::path::Path;

struct Output {
    code: i32,
    out: String,
    err: String,
}

fn run(args: &[&str]) -> Output {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = crate::run(std::iter::once("modecollapse").chain(args.iter().copied()), &mut out, &mut err);
    Output { code, out: String::from_utf8(out).unwrap(), err: String::from_utf8(err).unwrap() }
}

fn stdout(o: &Output) -> String {
    o.out.clone()
}

fn stderr(o: &Output) -> String {
    o.err.clone()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn region_of_the_balanced_toy() {
    let dir = tempfile::tempdir().unwrap();
    let pair = write(dir.path(), "pair.json", r#"{"p": [0.5, 0.5], "q": [0.3, 0.7]}"#);
    let o = run(&["region", &pair, "--eps", "0.12", "--delta", "0.2"]);
    assert_eq!(o.code, (0));
    assert_eq!(stdout(&o), "epsilon,delta\n0,0\n0.3,0.5\n1,1\n");
    let err = stderr(&o);
    assert!(err.contains("collapse,true"), "{err}");
    assert!(err.contains("augmentation,false"), "{err}");

    let out = dir.path().join("r.csv");
    let o = run(&["region", &pair, "--out", out.to_str().unwrap(), "--emit-svg"]);
    assert_eq!(o.code, (0));
    assert!(stdout(&o).starts_with("tv,0.19999"));
    assert!(out.exists() && dir.path().join("r.svg").exists());
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(run(&["band", "thm2", "--eps", "0.2", "--delta", "0.1"]).code, (2));
    assert_eq!(run(&["band", "thm4"]).code, (2));
    assert_eq!(run(&["region", "/nonexistent/pair.json"]).code, (2));
    assert_eq!(run(&["verify", "--trials", "0"]).code, (2));
    assert_eq!(run(&["separate", "--tau", "0.11,0.12"]).code, (2));
    assert_eq!(run(&[]).code, (2));
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"p": [0.5, 0.5]}"#);
    let o = run(&["region", &bad]);
    assert_eq!(o.code, (2));
    assert!(stderr(&o).contains("`q`"));
}

#[test]
fn help_lists_the_default_parameters() {
    let o = run(&["band", "--help"]);
    assert_eq!(o.code, (0));
    let s = stdout(&o);
    assert!(s.contains("tau = 0.11") && s.contains("0.03..0.08"), "{s}");
}

#[test]
fn band_is_deterministic_and_marks_infeasible_rows() {
    let a = run(&["band", "thm3", "--m-max", "4"]);
    let b = run(&["band", "thm3", "--m-max", "4"]);
    assert_eq!(a.code, (0));
    assert_eq!(a.out, b.out);
    assert_eq!(stdout(&a).lines().count(), 5);
    let o = run(&["band", "thm2", "--tau", "0.05", "--eps", "0.0", "--delta", "0.1", "--m-max", "2"]);
    assert_eq!(o.code, (0));
    assert_eq!(stdout(&o), "m,lower,upper,feasible\n1,,,false\n2,,,false\n");
    assert!(stderr(&o).contains("tau < delta - eps"));
}

#[test]
fn band_thm1_first_rows() {
    let o = run(&["band", "thm1", "--m-max", "2"]);
    let s = stdout(&o);
    let rows: Vec<&str> = s.lines().collect();
    assert_eq!(rows[1], "1,0.11,0.11,true");
    assert!(rows[2].ends_with(",0.2079,true"), "{}", rows[2]);
}

#[test]
fn separate_reports_in_range_results() {
    let o = run(&["separate", "--m-max", "3"]);
    assert_eq!(o.code, (0));
    assert_eq!(stdout(&o), "no separation ≤ 3\n");
}

#[test]
fn verify_fails_on_corrupted_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v.csv");
    let o = run(&["verify", "--trials", "30", "--eps", "0.02", "--corrupt-bound", "0.05", "--out", out.to_str().unwrap()]);
    assert_eq!(o.code, (1));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.lines().count() > 1);
    let o = run(&["verify", "--trials", "30", "--eps", "0.02", "--m-max", "2"]);
    assert_eq!(o.code, (0), "{}", stderr(&o));
}

#[test]
fn sample_and_metrics_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s.csv");
    let r = dir.path().join("r.csv");
    let (s, r) = (s.to_str().unwrap(), r.to_str().unwrap());
    assert_eq!(run(&["sample", "--spec", "grid", "--n", "2500", "--seed", "4", "--out", s]).code, (0));
    assert_eq!(run(&["sample", "--spec", "grid", "--n", "2500", "--seed", "5", "--out", r]).code, (0));
    let again = run(&["sample", "--spec", "grid", "--n", "2500", "--seed", "4"]);
    assert_eq!(std::fs::read_to_string(s).unwrap(), again.out);
    let o = run(&["metrics", s, r, "--spec", "grid"]);
    assert_eq!(o.code, (0));
    let text = stdout(&o);
    assert!(text.contains("modes,25\n"), "{text}");
    assert!(text.contains("reverse_kl,"));
}

#[test]
fn ganview_exact_and_histogram() {
    let dir = tempfile::tempdir().unwrap();
    let pair = write(dir.path(), "pair.json", r#"{"p": [0.2, 0.8], "q": [0, 1]}"#);
    let o = run(&["ganview", "--exact", &pair, "--alphas", "0.5,1,2"]);
    assert_eq!(o.code, (0));
    assert!(stdout(&o).ends_with("epsilon,delta\n0,0\n0,0.2\n1,1\n"), "{}", stdout(&o));

    let p: String = (0..400).map(|i| format!("{}\n", (i as f64 + 0.5) / 400.0)).collect();
    let q: String = (0..400).map(|i| format!("{}\n", 0.2 + 0.8 * (i as f64 + 0.5) / 400.0)).collect();
    let (ps, qs) = (write(dir.path(), "p.csv", &p), write(dir.path(), "q.csv", &q));
    let out = dir.path().join("est.csv");
    let o = run(&["ganview", &ps, &qs, "--bins", "10", "--out", out.to_str().unwrap()]);
    assert_eq!(o.code, (0), "{}", stderr(&o));
    assert!(std::fs::read_to_string(&out).unwrap().starts_with("alpha,p_mass,q_mass\n"));
    assert!(std::fs::read_to_string(dir.path().join("est.hull.csv")).unwrap().starts_with("epsilon,delta\n"));
}

#[test]
fn reduce_piecewise_toy() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "toy.json",
        r#"{"p": {"breaks": [0, 1], "densities": [1]}, "q": {"breaks": [0, 0.5, 1], "densities": [0.6, 1.4]}}"#,
    );
    let o = run(&["reduce", &input]);
    assert_eq!(o.code, (0));
    assert_eq!(stdout(&o), "{\"p\":[0.5,0.5],\"q\":[0.3,0.7]}\n");
}
