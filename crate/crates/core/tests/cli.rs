use std::path::Path;
use std::process::{Command, Output};

use axiflow::profile::{curvatures_at, volume};
use axiflow::runner::{load_profile, read_snapshots, Summary, OUT_ENV};
use axiflow::FlowParams;

fn axiflow(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_axiflow"))
        .args(args)
        .current_dir(cwd)
        .env_remove(OUT_ENV)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read(path: impl AsRef<Path>) -> String {
    std::fs::read_to_string(path.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", path.as_ref().display()))
}

fn summary(dir: &Path) -> Summary {
    serde_json::from_str(&read(dir.join("summary.json"))).unwrap()
}

#[test]
fn runs_are_deterministic_and_accurate() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["run", "--initial", "sphere:1", "--nodes", "100"];
    ok(&axiflow(&[&args[..], &["--out", "a"]].concat(), tmp.path()));
    ok(&axiflow(&[&args[..], &["--out", "b"]].concat(), tmp.path()));
    for f in ["series.csv", "snapshots.jsonl"] {
        assert_eq!(read(tmp.path().join("a").join(f)), read(tmp.path().join("b").join(f)), "{f}");
    }
    let s = summary(&tmp.path().join("a"));
    let omega = s.extinction.omega.unwrap();
    assert!((omega - 1.0 / 3.0).abs() <= 0.01 / 3.0, "{omega}");
    assert_eq!(s.invariants.total(), 0);

    let header = read(tmp.path().join("a/series.csv")).lines().next().unwrap().to_owned();
    assert_eq!(header, "t,V,diam,kr_min,kr_max,ka_min,ka_max,speed_max,a,b,u_max,uxx_min,uxx_max");

    let check = axiflow(&["check-invariants", "--out", "a"], tmp.path());
    ok(&check);
    assert!(!String::from_utf8_lossy(&check.stdout).contains("FAIL"));
}

#[test]
fn zero_exponent_is_rejected_at_parse() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("bad.json"),
        "{\n  \"params\": {\"alpha1\": 0, \"alpha2\": 1},\n  \"nodes\": 100\n}\n",
    )
    .unwrap();
    let out = axiflow(&["run", "--config", "bad.json"], tmp.path());
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("alpha1") && err.contains("line 2"), "{err}");
    assert!(!tmp.path().join("out").exists());

    std::fs::write(tmp.path().join("small.json"), "{\"nodes\": 20}").unwrap();
    let out = axiflow(&["run", "--config", "small.json"], tmp.path());
    assert!(String::from_utf8_lossy(&out.stderr).contains("nodes"));
}

#[test]
fn environment_sets_the_output_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_axiflow"))
        .args(["run", "--nodes", "60", "--t-max", "0.01"])
        .current_dir(tmp.path())
        .env(OUT_ENV, "from_env")
        .output()
        .unwrap();
    ok(&out);
    assert!(tmp.path().join("from_env/summary.json").is_file());
}

#[test]
fn sweep_is_sorted_and_independent_of_workers() {
    let tmp = tempfile::tempdir().unwrap();
    let sweep = |jobs: &str, dir: &str| {
        ok(&axiflow(
            &[
                "sweep", "--alpha1", "1,0.5", "--alpha2", "1,0.5", "--nodes", "60", "--jobs", jobs, "--out", dir,
            ],
            tmp.path(),
        ));
        read(tmp.path().join(dir).join("sweep.csv"))
    };
    let one = sweep("1", "s1");
    let four = sweep("4", "s4");
    assert_eq!(one, four);

    let mut reader = csv::Reader::from_reader(one.as_bytes());
    let headers = reader.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 4);
    let cells: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r[col("alpha1")].parse().unwrap(), r[col("alpha2")].parse().unwrap()))
        .collect();
    assert_eq!(cells, vec![(0.5, 0.5), (0.5, 1.0), (1.0, 0.5), (1.0, 1.0)]);
    for (r, (a1, a2)) in rows.iter().zip(cells) {
        let exact = 1.0 / (a1 + a2 + 1.0);
        let omega: f64 = r[col("omega")].parse().unwrap();
        assert!((omega / exact - 1.0).abs() <= 0.01, "{a1} {a2}: {omega}");
        assert_eq!(&r[col("status")], "ok");
    }

    std::fs::write(tmp.path().join("empty.json"), "{\"alpha1\": [], \"alpha2\": [1]}").unwrap();
    let out = axiflow(&["sweep", "--config", "empty.json"], tmp.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha1"));
}

#[test]
fn export_reproduces_series_and_snapshots() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&axiflow(&["run", "--initial", "spheroid:1,0.5", "--nodes", "80", "--out", "r"], tmp.path()));
    ok(&axiflow(&["export", "--out", "r"], tmp.path()));
    let dir = tmp.path().join("r");

    let series = read(dir.join("series.csv"));
    let expected: Vec<String> = series
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            format!("{} {}", f[0], f[1])
        })
        .collect();
    let plotted: Vec<String> = read(dir.join("plot_volume.dat")).lines().skip(1).map(String::from).collect();
    assert_eq!(plotted, expected);

    let blocks = read(dir.join("plot_rescaled.dat")).matches("# t = ").count();
    assert_eq!(blocks, 5);

    let empty = tmp.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    let out = axiflow(&["export", "--out", "empty"], tmp.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing artifacts"));
}

#[test]
fn exported_profiles_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&axiflow(&["run", "--initial", "spheroid:1,0.5", "--nodes", "80", "--out", "r"], tmp.path()));
    let path = tmp.path().join("r/snapshots.jsonl");
    let lines = read_snapshots(&path).unwrap();
    let params = FlowParams::new(1.0, 1.0).unwrap();
    for (k, line) in lines.iter().enumerate() {
        let original = line.curve().unwrap();
        let back = load_profile(&path, k).unwrap();
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
        assert!(rel(volume(&back), volume(&original)) <= 1e-10);
        let (fa, fb) = (curvatures_at(&back, &params).unwrap(), curvatures_at(&original, &params).unwrap());
        for (a, b) in fa.speed.iter().zip(&fb.speed) {
            assert!(rel(*a, *b) <= 1e-10);
        }
    }

    // the third snapshot restarts as a new run
    let spec = format!("profile:{},2", path.display());
    ok(&axiflow(&["run", "--initial", &spec, "--nodes", "80", "--out", "again"], tmp.path()));
    let s = summary(&tmp.path().join("again"));
    let v = volume(&lines[2].curve().unwrap());
    assert!((s.initial_volume / v - 1.0).abs() < 1e-3, "{} vs {v}", s.initial_volume);
}

#[test]
fn reference_config_lists_the_defaults() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/config.reference.json");
    let documented: axiflow::runner::RunConfig = serde_json::from_str(&read(path)).unwrap();
    assert_eq!(documented, axiflow::runner::RunConfig::default());
}
