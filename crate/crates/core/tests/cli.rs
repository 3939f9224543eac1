//! Golden-file tests for the `crcsel` binary. Set `CRCSEL_BLESS=1` to
//! rewrite the expected outputs under `tests/golden/`.

use std::path::PathBuf;
use std::process::Command;

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_crcsel"))
        .args(args)
        .output()
        .expect("spawn crcsel");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn golden(name: &str, args: &[&str], expected_code: i32) {
    let (code, stdout, stderr) = run(args);
    assert_eq!(code, expected_code, "crcsel {args:?}\nstderr: {stderr}");
    let path = golden_dir().join(name);
    if std::env::var_os("CRCSEL_BLESS").is_some() {
        std::fs::create_dir_all(golden_dir()).unwrap();
        std::fs::write(&path, &stdout).unwrap();
        return;
    }
    let want = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(stdout, want, "crcsel {args:?} differs from {}", path.display());
}

#[test]
fn order() {
    golden("order_93f.txt", &["order", "93f"], 0);
    golden("order_3.txt", &["order", "3"], 0);
    golden("order_18005.txt", &["order", "18005"], 0);
    golden("order_93f.json", &["order", "93f", "--json"], 0);
}

#[test]
fn profile() {
    golden("profile_1a2eb_512.txt", &["profile", "1a2eb", "512"], 0);
    golden("profile_1a2eb_512.csv", &["--csv", "profile", "1a2eb", "512"], 0);
    golden("profile_1a2eb_512.json", &["--json", "profile", "1a2eb", "512"], 0);
    golden("profile_158ff_8192.csv", &["profile", "158ff", "8192", "--csv"], 0);
    golden("profile_b_7.csv", &["profile", "b", "7", "--csv"], 0);
}

#[test]
fn score() {
    golden("score_1a2eb.txt", &["score", "1a2eb", "512,1024,2048,4096,8192"], 0);
    golden("score_1a2eb.csv", &["score", "1a2eb", "512,1024,2048,4096,8192", "--csv"], 0);
    golden("score_1a2eb.json", &["score", "1a2eb", "512,1024,2048,4096,8192", "--json"], 0);
    golden("score_11021_512.txt", &["score", "11021", "512"], 0);
    golden("score_a0f_512.txt", &["score", "a0f", "512"], 0);
    golden("score_a0f_512.csv", &["score", "a0f", "512", "--csv"], 0);
    golden("score_a0f_512.json", &["score", "a0f", "512", "--json"], 0);
}

#[test]
fn search() {
    golden("search_11.txt", &["search", "11", "--M", "512"], 0);
    golden("search_13.csv", &["search", "13", "--M", "512", "--csv", "--top-k", "3"], 0);
    golden("search_3.csv", &["search", "3", "--M", "7", "--csv"], 0);
    golden("search_2.csv", &["search", "2", "--M", "4", "--csv"], 0);
    golden(
        "search_16_list.json",
        &["search", "16", "--candidates", "18005,11021,1ae8b,158ff", "--M", "512,8192", "--json"],
        0,
    );
}

#[test]
fn search_csv_is_stable_across_workers() {
    let one = run(&["search", "12", "--M", "512,1024", "--csv", "--workers", "1"]);
    let four = run(&["search", "12", "--M", "512,1024", "--csv", "--workers", "4", "--block-size", "32"]);
    assert_eq!(one.0, 0);
    assert_eq!(one.1, four.1);
}

#[test]
fn search_resume_via_checkpoint() {
    let dir = std::env::temp_dir().join(format!("crcsel-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let ckpt = dir.join("p11.ckpt");
    let ckpt_s = ckpt.to_str().unwrap();
    let full = run(&["search", "11", "--csv"]);
    let base = ["search", "11", "--csv", "--block-size", "64", "--checkpoint", ckpt_s];

    let (code, partial, _) = run(&[&base[..], &["--stop-after-blocks", "4"]].concat());
    assert_eq!(code, 0);
    assert!(std::fs::read_to_string(&ckpt).unwrap().starts_with("crcsel-checkpoint 1\n"));
    let (code, resumed, _) = run(&base);
    assert_eq!(code, 0);
    assert_eq!(resumed, full.1);
    assert_ne!(partial, full.1);

    // same checkpoint, different degree
    let (code, _, err) = run(&["search", "12", "--checkpoint", ckpt_s]);
    assert_eq!(code, 1);
    assert!(err.contains("different search"), "{err}");

    std::fs::write(&ckpt, "crcsel-checkpoint 1\nconfig 00 nonsense\n").unwrap();
    let (code, _, err) = run(&base);
    assert_eq!(code, 1);
    assert!(err.contains("corrupt checkpoint"), "{err}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn verify() {
    golden("verify_default.txt", &["verify"], 0);
    let (code, out, _) = run(&["verify", "--samples", "40", "--seed", "7", "--csv"]);
    assert_eq!(code, 0);
    let again = run(&["verify", "--samples", "40", "--seed", "7", "--csv"]);
    assert_eq!(out, again.1);
    assert_eq!(out.lines().count(), 41);
}

#[test]
fn verify_injected_fault_fails() {
    let (code, out, _) = run(&["verify", "--samples", "100", "--inject-fault"]);
    assert_eq!(code, 1);
    assert!(out.contains("MISMATCH"));
    assert!(out.contains("FAIL"));
}

#[test]
fn tables() {
    golden("tables_fast.txt", &["tables", "--skip-slow"], 0);
    golden("tables_1.csv", &["tables", "--table", "1", "--csv"], 0);
}

#[test]
fn usage_errors() {
    for args in [
        &["order", "0x11"][..],
        &["order", "12"],
        &["order", ""],
        &["profile", "1a2eb", "16"],
        &["score", "b"],
        &["search", "25"],
        &["search", "22"],
        &["search", "11", "--M", "1024,512"],
        &["search", "11", "--top-k", "0"],
        &["verify", "--min-degree", "9", "--max-degree", "4"],
        &["tables", "--table", "5"],
        &["frobnicate"],
        &[],
    ] {
        let (code, out, err) = run(args);
        assert_eq!(code, 2, "crcsel {args:?}: stdout {out} stderr {err}");
        assert!(!err.is_empty());
    }
}
