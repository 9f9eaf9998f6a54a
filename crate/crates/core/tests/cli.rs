use std::path::Path;
use std::process::{Command, Output};

use kdac::commands::{Command as Cmd, RunConfig};

fn kit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kdac-kit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn gradcheck_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("grad.csv");
    let o = kit(&["gradcheck", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(!text.contains(",FAIL,"));
    let families: std::collections::BTreeSet<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .filter_map(|l| l.split(',').next())
        .collect();
    assert!(families.len() >= 4, "{families:?}");
    assert_eq!(RunConfig::from_output_header(&text).unwrap().command, Cmd::Gradcheck);
}

#[test]
fn curves_grammar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("k.csv");
    let o = kit(&[
        "curves",
        "--activation",
        "kdac",
        "--beta1",
        "1.2",
        "--beta2",
        "0.8",
        "--mu",
        "0.01",
        "--min",
        "-5",
        "--max",
        "5",
        "--steps",
        "1001",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "x,y,dy_dx");
    assert_eq!(rows.len(), 1002);
    // beta1 >= 1 has no k; beta2 < 1 has t where 0.8x meets tanh x
    let bp = text.lines().find(|l| l.starts_with("# breakpoints")).unwrap();
    assert!(
        bp.starts_with("# breakpoints k=none t=") && !bp.ends_with("none"),
        "{bp}"
    );
    let cfg = RunConfig::from_output_header(&text).unwrap();
    assert_eq!(
        cfg.activations,
        vec![kdac::ActivationKind::Kdac {
            beta1: 1.2,
            beta2: 0.8,
            mu: 0.01
        }]
    );
}

#[test]
fn bench_with_config_file_and_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "b.cfg",
        "[run]\nseeds = 1, 2\n[activations]\nselect = relu; kdac\n[train]\nlr = 1e-2\nepochs = 2\n[task]\nsamples = 64\nhidden = 4\n",
    );
    let out = dir.path().join("bench.csv");
    let o = kit(&[
        "bench",
        "--config",
        &cfg,
        "--task",
        "regression",
        "--lr",
        "1e-3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    let effective = RunConfig::from_output_header(&csv).unwrap();
    assert_eq!(effective.train.learning_rate, 1e-3);
    assert_eq!(effective.train.epochs, 2);
    assert_eq!(effective.seeds, vec![1, 2]);
    assert!(csv.contains("test_mse: lower is better"));
    assert!(dir.path().join("bench.txt").exists());
}

#[test]
fn configuration_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.cfg", "[kdac]\nbeta1 = 1.2\nbetta1 = 2\n");
    let o = kit(&["bench", "--config", &bad]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("betta1") && err.contains("line 3"), "{err}");

    for args in [
        &["bench", "--task", "ner"][..],
        &["curves", "--activation", "gelu"],
        &["curves", "--min", "2", "--max", "1"],
        &["bench", "--repeats", "0"],
        &["curves", "--mu", "0"],
        &["timing", "--config", "/nonexistent/file.cfg"],
        &["launch"],
    ] {
        assert_eq!(kit(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn unwritable_output_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = write(dir.path(), "file", "x");
    let out = format!("{blocker}/sub/out.csv");
    let o = kit(&["curves", "--steps", "3", "--out", &out]);
    assert_eq!(o.status.code(), Some(1));
}
