use std::io::Write;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lindeberg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> serde_json::Value {
    let o = run(args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn constants_json() {
    let v = json(&["constants", "--format", "json"]);
    assert!((v["x0"].as_f64().unwrap() - 5.487414539984266).abs() < 1e-12);
    assert!((v["kappa"].as_f64().unwrap() - 0.5315518294543019).abs() < 1e-12);
    assert!((v["gamma_star"].as_f64().unwrap() - 0.5599529876763902).abs() < 1e-12);
    assert!((v["tau1_bar"].as_f64().unwrap() - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
}

#[test]
fn table_one_passes() {
    let o = run(&["table", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.lines().last().unwrap().starts_with("table 1: PASS"), "{text}");
}

#[test]
fn table_one_fails_under_tight_tolerance() {
    let mut f = tempfile_path("tight.json");
    f.1.write_all(br#"{"t_gamma": 1e-9}"#).unwrap();
    let o = run(&["table", "1", "--tol-overrides", f.0.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn table_csv_header() {
    let o = run(&["table", "1", "--format", "csv"]);
    let text = stdout(&o);
    assert_eq!(
        text.lines().next().unwrap(),
        "table,eps,gamma,column,computed,reference,deviation,tolerance,status"
    );
    assert_eq!(text.lines().count(), 10);
}

fn tempfile_path(name: &str) -> (std::path::PathBuf, std::fs::File) {
    let dir = std::env::temp_dir().join(format!("lindeberg-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    let f = std::fs::File::create(&p).unwrap();
    (p, f)
}

#[test]
fn fractions_from_file() {
    let (p, mut f) = tempfile_path("sys.txt");
    f.write_all(b"# symmetric Bernoulli, three copies\nsummand 3\n-1 1/2\n1 1/2\n").unwrap();
    let v = json(&["fractions", p.to_str().unwrap(), "--eps", "1", "--gamma", "1"]);
    assert_eq!(v["summands"], 3);
    assert_eq!(v["exact"], false);
    // L3 = n / B^3 = 3 / 3^{3/2}
    assert!((v["lyapunov"].as_f64().unwrap() - 3f64.powf(-0.5)).abs() < 1e-12);
}

#[test]
fn invalid_input_exits_two() {
    let (p, mut f) = tempfile_path("bad.txt");
    f.write_all(b"summand\n1 0.5\n2 oops\n").unwrap();
    let o = run(&["fractions", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["fractions", "/nonexistent/file"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["table", "9"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn four_point_comparison() {
    let v = json(&["compare", "four-point", "--n", "9"]);
    assert_eq!(v["fractions"]["exact"], true);
    assert!((v["fractions"]["esseen"].as_f64().unwrap() - 0.3).abs() < 1e-15);
    let claim = &v["claims"][0];
    assert_eq!(claim["name"], "sharper_than_osipov");
    assert_eq!(claim["status"], "PASS");
    assert!(v["kolmogorov_distance"].as_f64().unwrap() > 0.0);
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["compare", "alternating", "--n", "4"][..],
        &["figure", "1"][..],
        &["table", "1", "--format", "json"][..],
    ] {
        let a = run(args);
        let b = run(args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

fn csv_points(args: &[&str]) -> Vec<(String, f64, f64)> {
    let o = run(args);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("series,x,y"));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_owned(), f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect()
}

#[test]
fn thresholds_figure() {
    let pts = csv_points(&["figure", "1"]);
    let t: Vec<_> = pts.iter().filter(|p| p.0 == "t_gamma").collect();
    assert_eq!(t.len(), 300);
    // t_gamma increases with gamma towards t_inf
    assert!(t.windows(2).all(|w| w[1].2 >= w[0].2));
    assert!(t.iter().all(|p| p.2 < 3.571728420093449 + 1e-9));
}

#[test]
fn rozovskii_figure() {
    let pts = csv_points(&["figure", "3"]);
    assert_eq!(pts.len(), 800);
    // smaller gamma gives a larger bound at every eps
    let series = |name: &str| pts.iter().filter(|p| p.0 == name).map(|p| p.2).collect::<Vec<_>>();
    let (a, b) = (series("gamma*"), series("gamma=0.2"));
    assert!(a.iter().zip(&b).all(|(x, y)| x <= y));
}
