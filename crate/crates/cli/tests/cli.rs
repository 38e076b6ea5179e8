use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sps-lab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn gen(dir: &TempDir, name: &str, family: &[&str]) -> String {
    let p = dir.path().join(name);
    let path = p.to_str().unwrap().to_string();
    let mut args = vec!["gen"];
    args.extend_from_slice(family);
    args.extend_from_slice(&["-o", &path]);
    assert!(run(&args).status.success(), "gen {family:?}");
    path
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn validate(out: &Output) -> Value {
    let schema_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/schema/sps-lab-1.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(schema_path).unwrap()).unwrap();
    let v: Value = serde_json::from_str(&stdout(out)).expect("stdout is JSON");
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(&v).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}\n{v:#}");
    v
}

#[test]
fn check_all_methods_on_identity() {
    let dir = TempDir::new().unwrap();
    let f = gen(&dir, "i3.txt", &["interp", "3"]);
    let o = run(&["check", &f, "--method", "all", "--seed", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("ZERO / ZERO / PROBABLY_ZERO"));
}

#[test]
fn check_nonzero_ships_certificate() {
    let dir = TempDir::new().unwrap();
    let f = write(
        &dir,
        "nz.txt",
        "field rational\nnvars 2\nterm 1: [1,0]^2\nterm -1: [1,1]^2\n",
    );
    let o = run(&["check", &f, "--method", "all", "--seed", "1", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = validate(&o);
    let results = v["report"]["results"].as_array().unwrap();
    assert!(results.iter().all(|r| r["verdict"] == "NONZERO"));
    assert!(results[0]["certificate"].is_object());
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.txt", "field rational\nnvars 2\nterm 1 [1,0]\n");
    let o = run(&["check", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    assert_eq!(run(&["check", "/nonexistent/file"]).status.code(), Some(2));
    assert_eq!(run(&["check", &bad, "--bogus"]).status.code(), Some(2));
    let i3 = gen(&dir, "i3.txt", &["interp", "3"]);
    assert_eq!(run(&["check", &i3, "--method", "random"]).status.code(), Some(2));
    // grid of 3^20 points
    assert_eq!(
        run(&["hitting-set", "-k", "2", "-d", "2", "-n", "20"]).status.code(),
        Some(3)
    );
    assert_eq!(run(&["gen", "fp", "3", "1", "2"]).status.code(), Some(2));
}

#[test]
fn nucleus_reports() {
    let dir = TempDir::new().unwrap();
    let f = gen(&dir, "i4.txt", &["interp", "4"]);
    let o = run(&["nucleus", &f, "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = validate(&o);
    let r = &v["report"];
    assert!(r["rank"].as_u64().unwrap() < 32);
    assert_eq!(r["identity_expands_to_zero"], true);
    assert!(r["bounds"]["entries"]
        .as_array()
        .unwrap()
        .iter()
        .all(|e| e["pass"] == true));
    let mat = run(&["nucleus", &f, "--stage", "mat", "--json"]);
    assert!(validate(&mat)["report"]["rank"].as_u64().unwrap() < 16);
}

#[test]
fn nucleus_rejections() {
    let dir = TempDir::new().unwrap();
    let nz = write(
        &dir,
        "nz.txt",
        "field rational\nnvars 2\nterm 1: [1,0]\nterm 1: [0,1]\n",
    );
    let o = run(&["nucleus", &nz]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not an identity (certificate attached)"));
    // two copies of a 3-term identity side by side
    let text = "field rational\nnvars 2\nterm 1: [1,0]\nterm -2: [1,1]\nterm 1: [1,2]\nterm 1: [1,0]\nterm -2: [1,1]\nterm 1: [1,2]\n";
    let nm = write(&dir, "nm.txt", text);
    let o = run(&["nucleus", &nm]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("vanishing proper subset {"));
}

#[test]
fn sg_commands() {
    let dir = TempDir::new().unwrap();
    let sk = gen(&dir, "sk.txt", &["skew-lines"]);
    let o = run(&["sg", &sk, "-k", "3", "--op", "closed"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().any(|l| l == "true"));
    let fp = gen(&dir, "fp.txt", &["fp", "3", "2", "3"]);
    let o = run(&["sg", &fp, "-k", "3", "--op", "growth", "--json"]);
    let v = validate(&o);
    assert_eq!(
        (v["report"]["size"].as_u64(), v["report"]["rank"].as_u64()),
        (Some(11), Some(5))
    );
    assert_eq!(v["report"]["regime"], "below threshold");
    let pair = write(&dir, "pair.txt", "field rational\nnvars 2\nvec [1,0]\nvec [0,1]\n");
    let v = validate(&run(&["sg", &pair, "-k", "2", "--op", "operator", "--json"]));
    assert_eq!(v["report"]["closed"], false);
    assert_eq!(v["report"]["witness"].as_array().unwrap().len(), 2);
}

#[test]
fn generated_files_round_trip() {
    let dir = TempDir::new().unwrap();
    for fam in [
        &["interp", "5"][..],
        &["random", "3", "2", "3", "9"],
        &["fp", "4", "1", "5"],
        &["line"],
    ] {
        let f = gen(&dir, "g.txt", fam);
        let text = std::fs::read_to_string(&f).unwrap();
        let o = run(&[&["gen"][..], fam].concat());
        assert_eq!(stdout(&o), text);
    }
    let f = gen(&dir, "g7.txt", &["interp", "4", "--field", "prime 7"]);
    assert!(std::fs::read_to_string(f).unwrap().starts_with("field prime 7"));
}

#[test]
fn hitting_set_export_and_oracle() {
    let o = run(&["hitting-set", "-k", "2", "-d", "2", "-n", "2"]);
    assert_eq!(stdout(&o).lines().count(), 9);
    assert!(stdout(&o).starts_with("point [0,0]"));
    let v = validate(&run(&["hitting-set", "-k", "2", "-d", "2", "-n", "2", "--json"]));
    assert_eq!(v["report"]["mode"], "grid");
    // external evaluator of x1 * x2: answers from the point line
    let script = "while read l; do p=${l#point [}; p=${p%]}; a=${p%,*}; b=${p#*,}; echo $((a*b)); done";
    let o = run(&[
        "hitting-set",
        "-k",
        "2",
        "-d",
        "2",
        "-n",
        "2",
        "--oracle",
        "sh",
        "--oracle-args",
        "-c",
        script,
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("NONZERO at [1,1]"), "{}", stdout(&o));
    let zero = "while read l; do echo 0.0; done";
    let o = run(&[
        "hitting-set",
        "-k",
        "2",
        "-d",
        "2",
        "-n",
        "2",
        "--json",
        "--oracle",
        "sh",
        "--oracle-args",
        "-c",
        zero,
    ]);
    assert_eq!(validate(&o)["report"]["results"][0]["verdict"], "ZERO");
}

#[test]
fn bench_runs() {
    let o = run(&["bench", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = validate(&o);
    assert!(v["report"]["cases"].as_array().unwrap().len() >= 8);
}
