use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn deck(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../decks").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nanosim"))
        .args(args)
        .env_remove("NANOSIM_THREADS")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn op_prints_node_voltages() {
    let out = run(&["op", deck("divider.ckt").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).lines().any(|l| l == "v(2) = 2.5"), "{}", stdout(&out));
}

#[test]
fn op_compare_reports_speedup() {
    let out = run(&["op", deck("rtd_div.ckt").to_str().unwrap(), "--compare-nr"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("speedup"), "{}", stdout(&out));
}

#[test]
fn dc_writes_one_row_per_point() {
    let out = run(&["dc", deck("rtd_div.ckt").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let table = rows(&stdout(&out));
    assert_eq!(table.len(), 61);
    assert_eq!(table[0][0], "bias");
    assert!(table[0].contains(&"i(XRTD1)".to_string()), "{:?}", table[0]);
    let last: f64 = table[60][0].parse().unwrap();
    assert_eq!(last, 20.0);
}

#[test]
fn dc_flags_override_the_card() {
    let out = run(&[
        "dc",
        deck("rtd_div.ckt").to_str().unwrap(),
        "--from",
        "-1",
        "--to",
        "1",
        "--points",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let table = rows(&stdout(&out));
    let bias: Vec<f64> = table[1..].iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(bias, [-1.0, -0.5, 0.0, 0.5, 1.0]);
}

#[test]
fn bad_input_exits_one() {
    let rtd = deck("rtd_div.ckt");
    let rtd = rtd.to_str().unwrap();
    assert_eq!(run(&["dc", rtd, "--points", "1"]).status.code(), Some(1));
    assert_eq!(run(&["tran", rtd, "--eps", "0"]).status.code(), Some(1));
    assert_eq!(run(&["op", rtd, "--eps", "banana"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    let missing = run(&["op", "/no/such/deck.ckt"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(stderr(&missing).contains("/no/such/deck.ckt"), "{}", stderr(&missing));
}

#[test]
fn malformed_deck_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.ckt");
    std::fs::write(&path, "R1 a 0 notanumber\n.end\n").unwrap();
    let out = run(&["op", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!stderr(&out).is_empty());
}

#[test]
fn rc_transient_settles_to_source() {
    let out = run(&["tran", deck("rc.ckt").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let table = rows(&stdout(&out));
    let col = table[0].iter().position(|h| h == "v(out)").unwrap();
    let last: f64 = table.last().unwrap()[col].parse().unwrap();
    assert!((last - 1.0).abs() < 0.01, "{last}");
}

#[test]
fn inverter_output_has_two_levels() {
    let out = run(&["tran", deck("fet_rtd_inverter.ckt").to_str().unwrap(), "--from-op"]);
    assert!(matches!(out.status.code(), Some(0 | 3)), "{}", stderr(&out));
    let table = rows(&stdout(&out));
    let col = table[0].iter().position(|h| h == "v(out)").unwrap();
    let v: Vec<f64> = table[1..].iter().map(|r| r[col].parse().unwrap()).collect();
    assert!(v.iter().any(|&x| x < 1.0) && v.iter().any(|&x| x > 4.0));
}

#[test]
fn resample_gives_uniform_grid() {
    let out = run(&["tran", deck("rc.ckt").to_str().unwrap(), "--resample", "11"]);
    assert_eq!(out.status.code(), Some(0));
    let table = rows(&stdout(&out));
    assert_eq!(table.len(), 12);
    let t: Vec<f64> = table[1..].iter().map(|r| r[0].parse().unwrap()).collect();
    for (i, ti) in t.iter().enumerate() {
        assert!((ti - 5e-10 * i as f64).abs() < 1e-20, "{t:?}");
    }
}

#[test]
fn zero_noise_has_zero_variance() {
    let out = run(&["stoch", deck("ou_zero.ckt").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("# seed=1 paths=16"), "{text}");
    let table = rows(&text);
    let vars: Vec<usize> = (0..table[0].len()).filter(|&i| table[0][i].starts_with("var(")).collect();
    assert!(!vars.is_empty());
    for row in &table[1..] {
        for &i in &vars {
            assert_eq!(row[i].parse::<f64>().unwrap(), 0.0);
        }
    }
}

#[test]
fn stoch_is_reproducible_and_seed_sensitive() {
    let ou = deck("ou.ckt");
    let args = ["stoch", ou.to_str().unwrap(), "--paths", "64", "--stride", "50"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let mut other = args.to_vec();
    other.extend(["--seed", "7"]);
    assert_ne!(run(&other).stdout, a.stdout);
}

#[test]
fn stoch_window_adds_peak_summary() {
    let out = run(&[
        "stoch",
        deck("ou.ckt").to_str().unwrap(),
        "--paths",
        "32",
        "--window",
        "1n,2n",
        "--stride",
        "100",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("# peak(x) mean="), "{}", stdout(&out));
}

#[test]
fn plot_writes_script_next_to_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("rc.csv");
    let out = run(&["tran", deck("rc.ckt").to_str().unwrap(), "--out", csv.to_str().unwrap(), "--plot"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let script = std::fs::read_to_string(dir.path().join("rc.gp")).unwrap();
    assert!(script.contains("'rc.csv'") && script.contains("plot "), "{script}");
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("t,"));
    assert_eq!(run(&["tran", deck("rc.ckt").to_str().unwrap(), "--plot"]).status.code(), Some(1));
}

#[test]
fn invalid_thread_count_exits_one() {
    let out = Command::new(env!("CARGO_BIN_EXE_nanosim"))
        .args(["op", deck("divider.ckt").to_str().unwrap()])
        .env("NANOSIM_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
