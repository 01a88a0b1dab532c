use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn htmad(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_htmad"))
        .args(args)
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path, generator: &str, seed: u64, len: usize) -> PathBuf {
    let path = dir.join(format!("{generator}_{seed}.csv"));
    let out = htmad(&[
        "synth",
        "-g",
        generator,
        "--seed",
        &seed.to_string(),
        "--len",
        &len.to_string(),
        "-o",
        s(&path),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn synth_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = synth(dir.path(), "temperature", 3, 500);
    let b = fs::read(&a).unwrap();
    let c = synth(dir.path(), "temperature", 4, 500);
    let again = synth(dir.path(), "temperature", 3, 500);
    assert_eq!(b, fs::read(again).unwrap());
    assert_ne!(b, fs::read(c).unwrap());
    let text = String::from_utf8(b).unwrap();
    assert_eq!(text.lines().next(), Some("timestamp,value"));
    assert_eq!(text.lines().count(), 501);
}

#[test]
fn synth_writes_labels_keyed_by_file_name() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("shift.csv");
    let labels = dir.path().join("labels.json");
    let out = htmad(&["synth", "-g", "level_shift", "-o", s(&csv), "-l", s(&labels), "--len", "1000"]);
    assert!(out.status.success());
    let json = fs::read_to_string(labels).unwrap();
    assert!(json.contains("\"shift.csv\""), "{json}");
}

#[test]
fn detect_writes_one_row_per_record() {
    let dir = tempfile::tempdir().unwrap();
    let input = synth(dir.path(), "level_shift", 0, 400);
    let output = dir.path().join("out.csv");
    let out = htmad(&["detect", "-i", s(&input), "-o", s(&output)]);
    assert!(out.status.success());
    let text = fs::read_to_string(output).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("timestamp,value,raw_score,likelihood,flag"));
    assert_eq!(lines.count(), 400);
    let summary = String::from_utf8_lossy(&out.stderr);
    assert!(summary.contains("records=400"), "{summary}");
    assert!(summary.contains("epsilon=1e-5"), "{summary}");
}

#[test]
fn epsilon_is_echoed_and_changes_flags() {
    let dir = tempfile::tempdir().unwrap();
    let input = synth(dir.path(), "noisy_spikes", 0, 1500);
    let flags = |eps: &str| {
        let out = htmad(&["detect", "-i", s(&input), "-o", s(&dir.path().join("o.csv")), "--epsilon", eps]);
        assert!(out.status.success());
        let summary = String::from_utf8_lossy(&out.stderr).into_owned();
        assert!(summary.contains(&format!("epsilon={eps}")), "{summary}");
        summary
            .split_whitespace()
            .find_map(|f| f.strip_prefix("flags="))
            .unwrap()
            .parse::<usize>()
            .unwrap()
    };
    assert!(flags("1e-1") > flags("1e-5"));
}

#[test]
fn detect_reads_stdin() {
    let dir = tempfile::tempdir().unwrap();
    let input = synth(dir.path(), "temperature", 0, 200);
    let out = Command::new(env!("CARGO_BIN_EXE_htmad"))
        .arg("detect")
        .stdin(fs::File::open(input).unwrap())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 201);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    assert_eq!(htmad(&["detect", "-i", s(&missing)]).status.code(), Some(1));
    assert_eq!(htmad(&["synth", "-g", "sawtooth"]).status.code(), Some(2));

    let input = synth(dir.path(), "temperature", 0, 200);
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"likelihood": {"epsilon": 3}}"#).unwrap();
    assert_eq!(htmad(&["detect", "-i", s(&input), "-c", s(&bad)]).status.code(), Some(2));

    let garbage = dir.path().join("garbage.csv");
    fs::write(&garbage, "timestamp,value\nyesterday,1\n").unwrap();
    let strict = dir.path().join("strict.json");
    fs::write(&strict, r#"{"row_policy": "fail"}"#).unwrap();
    assert_eq!(htmad(&["detect", "-i", s(&garbage), "-c", s(&strict)]).status.code(), Some(2));
}

#[test]
fn multi_combines_streams() {
    let dir = tempfile::tempdir().unwrap();
    let a = synth(dir.path(), "temperature", 0, 300);
    let b = synth(dir.path(), "temperature", 1, 300);
    let out_path = dir.path().join("multi.csv");
    let out = htmad(&["multi", "-i", s(&a), s(&b), "-o", s(&out_path)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(out_path).unwrap();
    assert_eq!(text.lines().count(), 301);
    assert!(String::from_utf8_lossy(&out.stderr).contains("models=2"));
}

#[test]
fn bench_reference_detectors() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    fs::create_dir(&corpus).unwrap();
    let labels = dir.path().join("labels.json");
    let out = htmad(&[
        "synth", "-g", "level_shift", "--len", "1000", "-o", s(&corpus.join("shift.csv")), "-l", s(&labels),
    ]);
    assert!(out.status.success());
    let csv = dir.path().join("scores.csv");
    let out = htmad(&[
        "bench", "--corpus", s(&corpus), "--labels", s(&labels), "-d", "perfect,null", "-p", "standard", "-o", s(&csv),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table.contains("100.00"), "{table}");
    assert!(table.contains("0.00"), "{table}");
    assert!(fs::read_to_string(csv).unwrap().lines().count() >= 3);

    let out = htmad(&["bench", "--corpus", s(&corpus), "--labels", s(&dir.path().join("none.json"))]);
    assert_eq!(out.status.code(), Some(1));
    let out = htmad(&["bench", "--corpus", s(&corpus), "--labels", s(&labels), "-p", "reward_nothing"]);
    assert_eq!(out.status.code(), Some(2));
}
