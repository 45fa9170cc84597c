use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn run(args: &[&str], config: &str, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bergman-lab"))
        .args(args)
        .arg("--config")
        .arg(data(config))
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn psh_family_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["verify-psh"], "psh_family.json", dir.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = read(dir.path(), "verify_psh.csv");
    assert!(csv.lines().nth(1).unwrap().ends_with(",pass,pass"), "{csv}");
}

#[test]
fn concave_control_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["verify-psh"], "psh_control.json", dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(read(dir.path(), "verify_psh.csv").contains(",fail"));
}

#[test]
fn failed_weight_hypothesis_is_vacuous() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["run"], "vacuous.json", dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = read(dir.path(), "verify_psh.csv");
    assert!(
        csv.lines().nth(1).unwrap().ends_with(",fail,vacuous"),
        "{csv}"
    );
}

#[test]
fn unknown_key_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["run"], "unknown_key.json", dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("fooo"), "{err}");
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(run(&["run"], "mixed.json", a.path()).status.code(), Some(0));
    assert_eq!(
        run(&["run", "--jobs", "1"], "mixed.json", b.path())
            .status
            .code(),
        Some(0)
    );
    for name in [
        "compute_kernel.csv",
        "ot_extend.csv",
        "thicken_limit.csv",
        "ns_potential.csv",
        "integrability.csv",
    ] {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name}");
    }
}

#[test]
fn subcommand_restricts_to_its_kind() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["ot-extend"], "mixed.json", dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = read(dir.path(), "ot_extend.csv");
    assert!(csv.starts_with("problem_id,extension_norm,slice_norm,ratio,budget,"));
    assert!(!dir.path().join("compute_kernel.csv").exists());
    let missing = run(&["azd-iterate"], "mixed.json", dir.path());
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn plots_are_written_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["run", "--plot", "--seed", "11"], "mixed.json", dir.path());
    assert_eq!(out.status.code(), Some(0));
    for name in ["compute_kernel__disk.svg", "thicken_limit__product.svg"] {
        assert!(read(dir.path(), name).starts_with("<svg"), "{name}");
    }
}
