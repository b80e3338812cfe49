use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::time::Duration;

use tempfile::TempDir;

fn neff() -> Command {
    Command::new(env!("CARGO_BIN_EXE_neff"))
}

fn run(args: &[&str]) -> Output {
    neff().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn g_csv() -> String {
    let mut t = String::from("x,y\n");
    for (x, events) in [(0, 3), (1, 5)] {
        for k in 0..10 {
            t.push_str(&format!("{x},{}\n", u8::from(k < events)));
        }
    }
    t
}

fn fit_g(dir: &TempDir) -> PathBuf {
    let data = write(dir, "g.csv", &g_csv());
    let model = dir.path().join("g.json");
    let o = run(&[
        "fit",
        "--data",
        s(&data),
        "--outcome",
        "y",
        "--family",
        "binomial",
        "--predictors",
        "x",
        "--binary",
        "x",
        "--model",
        s(&model),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    model
}

fn fit_d1(dir: &TempDir) -> (PathBuf, Output) {
    let data = write(dir, "d1.csv", "x,y\n0,0\n1,0\n2,3\n");
    let model = dir.path().join("d1.json");
    let o = run(&[
        "fit",
        "--data",
        s(&data),
        "--outcome",
        "y",
        "--family",
        "gaussian",
        "--predictors",
        "x",
        "--model",
        s(&model),
    ]);
    (model, o)
}

fn summary_value(out: &str, key: &str) -> f64 {
    out.lines()
        .find_map(|l| l.strip_prefix(key))
        .unwrap_or_else(|| panic!("no `{key}` in\n{out}"))
        .trim()
        .parse()
        .unwrap()
}

#[test]
fn fit_d1_reports_harmonic_mean() {
    let dir = TempDir::new().unwrap();
    let (model, o) = fit_d1(&dir);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!((summary_value(&out, "harmonic mean n_eff:") - 1.5).abs() < 1e-12);
    assert!((summary_value(&out, "min n_eff:") - 1.2).abs() < 1e-12);
    assert_eq!(summary_value(&out, "n:"), 3.0);
    assert_eq!(summary_value(&out, "n_eff below 30:"), 3.0);
    assert!(model.exists());
}

#[test]
fn fit_g_min_neff_is_ten() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "g.csv", &g_csv());
    let model = dir.path().join("g.json");
    let o = run(&[
        "fit",
        "--data",
        s(&data),
        "--outcome",
        "y",
        "--family",
        "binomial",
        "--predictors",
        "x",
        "--model",
        s(&model),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!((summary_value(&stdout(&o), "min n_eff:") - 10.0).abs() < 1e-8);
}

#[test]
fn fit_missing_outcome_names_column() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "d.csv", "x,z\n0,1\n1,2\n2,4\n");
    let o = run(&[
        "fit",
        "--data",
        s(&data),
        "--outcome",
        "y",
        "--family",
        "gaussian",
        "--predictors",
        "x",
        "--model",
        s(&dir.path().join("m.json")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`y`"), "{}", stderr(&o));
}

#[test]
fn fit_non_convergence_exits_3() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "g.csv", &g_csv());
    let model = dir.path().join("capped.json");
    let args = [
        "fit",
        "--data",
        s(&data),
        "--outcome",
        "y",
        "--family",
        "binomial",
        "--predictors",
        "x",
        "--model",
        s(&model),
        "--max-iterations",
        "1",
    ];
    let o = run(&args);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(!model.exists());

    let mut forced = args.to_vec();
    forced.push("--allow-unconverged");
    let o = run(&forced);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("converged: false"));
}

#[test]
fn separation_fits_with_warning() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "sep.csv", "x,y\n-2,0\n-1,0\n1,1\n2,1\n");
    let o = run(&[
        "fit",
        "--data",
        s(&data),
        "--outcome",
        "y",
        "--family",
        "binomial",
        "--predictors",
        "x",
        "--model",
        s(&dir.path().join("sep.json")),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("separation"), "{}", stderr(&o));
}

#[test]
fn missing_data_file_exits_4() {
    let dir = TempDir::new().unwrap();
    let o = run(&[
        "fit",
        "--data",
        s(&dir.path().join("absent.csv")),
        "--outcome",
        "y",
        "--family",
        "gaussian",
        "--model",
        s(&dir.path().join("m.json")),
    ]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn bad_flags_exit_2() {
    assert_eq!(run(&["fit", "--family", "weibull"]).status.code(), Some(2));
    assert_eq!(run(&["predict", "--model", "m.json"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn predict_g_single_record() {
    let dir = TempDir::new().unwrap();
    let model = fit_g(&dir);
    let o = run(&["predict", "--model", s(&model), "--set", "x=0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!((summary_value(&out, "yhat:") - 0.3).abs() < 1e-10);
    assert!((summary_value(&out, "n_eff:") - 10.0).abs() < 1e-8);
    assert_eq!(summary_value(&out, "per_hundred:"), 30.0);
}

#[test]
fn predict_d1_extrapolation() {
    let dir = TempDir::new().unwrap();
    let (model, _) = fit_d1(&dir);
    let o = run(&["predict", "--model", s(&model), "--set", "x=4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!((summary_value(&out, "n_eff:") - 6.0 / 29.0).abs() < 1e-12);
    assert!(out.contains("annotations: extrapolation"), "{out}");
    assert!(out.contains("n_eff_display: < 1"), "{out}");
}

#[test]
fn predict_unknown_covariate_exits_2() {
    let dir = TempDir::new().unwrap();
    let (model, _) = fit_d1(&dir);
    let o = run(&["predict", "--model", s(&model), "--set", "x=1", "--set", "z=1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains('z'));
}

#[test]
fn predict_csv_and_keep_going() {
    let dir = TempDir::new().unwrap();
    let model = fit_g(&dir);
    let input = write(&dir, "q.csv", "x\n0\n2\n1\n");
    let out = dir.path().join("out.csv");
    let o = run(&[
        "predict",
        "--model",
        s(&model),
        "--input",
        s(&input),
        "--output",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&[
        "predict",
        "--model",
        s(&model),
        "--input",
        s(&input),
        "--output",
        s(&out),
        "--keep-going",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "row_id,yhat,se_pred,rel_var,n_eff,dev_percentile,annotations,error"
    );
    assert_eq!(lines.len(), 4);
    assert!(lines[1].ends_with(','));
    assert!(lines[2].starts_with("2,,,,,,,") && lines[2].len() > 8);
    let cells: Vec<&str> = lines[3].split(',').collect();
    assert!((cells[1].parse::<f64>().unwrap() - 0.5).abs() < 1e-10);
}

#[test]
fn predict_on_reloaded_model_is_stable() {
    let dir = TempDir::new().unwrap();
    let model = fit_g(&dir);
    let a = run(&["predict", "--model", s(&model), "--set", "x=1"]);
    let copy = dir.path().join("copy.json");
    std::fs::copy(&model, &copy).unwrap();
    let b = run(&["predict", "--model", s(&copy), "--set", "x=1"]);
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn predict_with_simulation_is_seeded() {
    let dir = TempDir::new().unwrap();
    let model = fit_g(&dir);
    let dev = dir.path().join("g.csv");
    let args = [
        "predict",
        "--model",
        s(&model),
        "--set",
        "x=1",
        "--simulate",
        "200",
        "--dev-data",
        s(&dev),
        "--seed",
        "7",
    ];
    let a = run(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert!(stdout(&a).contains("n_eff_simulated:"));
    assert_eq!(stdout(&a), stdout(&run(&args)));
}

#[test]
fn report_identical_samples_have_zero_deltas() {
    let dir = TempDir::new().unwrap();
    let model = fit_g(&dir);
    let val = dir.path().join("g.csv");
    let out = dir.path().join("report.json");
    let o = run(&["report", "--model", s(&model), "--data", s(&val), "--output", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    for d in v["comparison"]["quantile_deltas"].as_array().unwrap() {
        assert!(d["delta"].as_f64().unwrap().abs() < 1e-9, "{d}");
    }
    assert_eq!(v["dev"]["quantiles"], v["val"]["quantiles"]);
}

#[test]
fn report_extrapolated_validation_is_less_certain() {
    let dir = TempDir::new().unwrap();
    let (model, _) = fit_d1(&dir);
    let val = write(&dir, "val.csv", "x\n3\n4\n");
    let out = dir.path().join("report.json");
    let hist = dir.path().join("hist.csv");
    let o = run(&[
        "report",
        "--model",
        s(&model),
        "--data",
        s(&val),
        "--output",
        s(&out),
        "--plot-data",
        &format!("histogram={}", s(&hist)),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let dev = v["dev"]["harmonic_mean"].as_f64().unwrap();
    let val = v["val"]["harmonic_mean"].as_f64().unwrap();
    assert!((dev - 1.5).abs() < 1e-12);
    assert!(val < dev, "{val} >= {dev}");
    assert!(std::fs::read_to_string(&hist)
        .unwrap()
        .starts_with("sample,lower,upper,count\n"));
}

#[test]
fn report_schema_mismatch_exits_2() {
    let dir = TempDir::new().unwrap();
    let (model, _) = fit_d1(&dir);
    let val = write(&dir, "val.csv", "age\n3\n");
    let o = run(&["report", "--model", s(&model), "--data", s(&val)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn report_heatmap_grid() {
    let dir = TempDir::new().unwrap();
    let data = write(
        &dir,
        "two.csv",
        "age,shock,y\n50,0,1.0\n60,1,2.5\n70,0,2.0\n55,0,1.2\n65,1,3.1\n",
    );
    let model = dir.path().join("two.json");
    let o = run(&[
        "fit",
        "--data",
        s(&data),
        "--outcome",
        "y",
        "--family",
        "gaussian",
        "--predictors",
        "age,shock",
        "--binary",
        "shock",
        "--center",
        "auto",
        "--model",
        s(&model),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let grid = dir.path().join("grid.csv");
    let o = run(&[
        "report",
        "--model",
        s(&model),
        "--plot-data",
        &format!("heatmap-grid={}", s(&grid)),
        "--grid",
        "50:70:10",
        "--grid",
        "0:1:1",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&grid).unwrap();
    assert_eq!(text.lines().next(), Some("cov1,cov2,yhat,n_eff"));
    assert_eq!(text.lines().count(), 1 + 3 * 2);
}

fn read_port(child: &mut std::process::Child) -> u16 {
    let out = child.stdout.take().unwrap();
    let mut line = String::new();
    BufReader::new(out).read_line(&mut line).unwrap();
    line.trim().rsplit(':').next().unwrap().parse().unwrap()
}

#[test]
fn serve_answers_and_shuts_down_on_sigint() {
    let dir = TempDir::new().unwrap();
    let model = fit_g(&dir);
    let mut child = neff()
        .args(["serve", "--model", s(&model), "--port", "0", "--quiet"])
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let port = read_port(&mut child);

    let mut stream = TcpStream::connect(("127.0.0.1", port)).unwrap();
    stream.set_read_timeout(Some(Duration::from_secs(10))).unwrap();
    stream
        .write_all(b"GET /api/v1/model HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n")
        .unwrap();
    let mut resp = String::new();
    stream.read_to_string(&mut resp).unwrap();
    assert!(resp.starts_with("HTTP/1.1 200"), "{resp}");
    assert!(resp.contains("\"n_dev\":20"), "{resp}");

    unsafe {
        libc::kill(child.id() as libc::pid_t, libc::SIGINT);
    }
    let status = child.wait().unwrap();
    assert_eq!(status.code(), Some(0));
}

#[test]
fn serve_bind_failure_exits_4() {
    let dir = TempDir::new().unwrap();
    let model = fit_g(&dir);
    let taken = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let port = taken.local_addr().unwrap().port().to_string();
    let o = run(&["serve", "--model", s(&model), "--port", &port]);
    assert_eq!(o.status.code(), Some(4));
}
