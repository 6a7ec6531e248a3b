//! End-to-end runs of the `boxdim` binary.

use std::path::Path;
use std::process::{Command, Output};

use boxdim::formats::{read_edge_list, read_witness};
use boxdim::scalar::int;
use boxdim::Limits;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_boxdim")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value(o: &Output, key: &str) -> String {
    stdout(o)
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")).map(str::to_string))
        .unwrap_or_else(|| panic!("no {key}= in {}", stdout(o)))
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn cycle_witness_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let edges = path(dir.path(), "c12.edges");
    let o = run(&["quotient", "build", "--group", "z", "--level", "12", "--out", &edges]);
    assert!(o.status.success());
    assert_eq!(value(&o, "index"), "12");
    assert_eq!(value(&o, "diameter"), "6");

    let witness = path(dir.path(), "w.txt");
    let o = run(&[
        "dim-at-scale", "--space", &edges, "--R", "3", "--S", "5", "--mode", "exact", "--shape", "arcs", "--out", &witness,
    ]);
    assert!(o.status.success());
    assert_eq!(value(&o, "value"), "2");
    assert_eq!(value(&o, "optimality"), "exact");

    let space = read_edge_list(&std::fs::read_to_string(&edges).unwrap()).unwrap();
    for y in 0..12 {
        let d = value(&run(&["metric", "dist", "--space", &edges, "--x", "0", "--y", &y.to_string()]), "distance");
        assert_eq!(d, space.dist(0, y).to_string());
    }
    let (header, cover) = read_witness(&std::fs::read_to_string(&witness).unwrap(), &space).unwrap();
    assert!(header.contains(&("value".to_string(), "2".to_string())));
    let check = cover.verify(&space, &Limits::default()).unwrap();
    assert_eq!(check.multiplicity, 2);
    assert!(check.bound <= int(5));

    let o = run(&["dim-at-scale", "--space", &edges, "--R", "3", "--S", "5", "--coloring"]);
    assert_eq!(value(&o, "value"), "2");
}

#[test]
fn lift_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let edges = path(dir.path(), "c64.edges");
    assert!(run(&["quotient", "build", "--group", "z", "--H", "congruence:64", "--out", &edges]).status.success());
    let base = path(dir.path(), "u.txt");
    let o = run(&["dim-at-scale", "--space", &edges, "--R", "3", "--S", "10", "--mode", "greedy", "--out", &base]);
    assert!(o.status.success());
    let lifted = path(dir.path(), "lifted.txt");
    let o = run(&[
        "lift-cover", "--group", "z", "--H", "congruence:64", "--cover", &base, "--nominal", "10", "--S", "10", "--window", "20",
        "--out", &lifted,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(value(&o, "multiplicity"), "2");
    assert!(std::fs::read_to_string(&lifted).unwrap().contains("R=3 S=10"));

    // A bound above a third of the injectivity radius is refused.
    let wide = path(dir.path(), "wide.txt");
    assert!(run(&["dim-at-scale", "--space", &edges, "--R", "4", "--S", "16", "--mode", "greedy", "--out", &wide]).status.success());
    let o = run(&["lift-cover", "--group", "z", "--H", "congruence:64", "--cover", &wide, "--nominal", "4", "--S", "16", "--window", "20"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verdicts_and_exit_codes() {
    let o = run(&["check", "scs", "--group", "dinf", "--sigma", "refl:3:0", "--F", "r^0;r^0s", "--mode", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(value(&o, "verdict"), "false");
    let o = run(&["check", "separating", "--group", "z", "--sigma", "congruence:4;congruence:9", "--F", "(1);(2);(6)"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(value(&o, "verdict"), "true");

    let o = run(&["radius", "inj", "--group", "z", "--H", "congruence:12"]);
    assert_eq!(value(&o, "radius"), "5");
    let o = run(&["radius", "iso", "--group", "z", "--H", "congruence:64", "--R", "10"]);
    assert_eq!((value(&o, "holds").as_str(), value(&o, "vacuous").as_str()), ("true", "false"));

    let o = run(&["verify", "key-lemma", "--ext", "z2", "--H", "levels:3,2", "--R", "1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("clause") && l.contains(" pass ")).count(), 5);

    assert_eq!(value(&run(&["hirsch", "--tree", "ext(ab(1), ab(2))"]), "hirsch"), "3");
    assert_eq!(value(&run(&["hirsch", "--group", "lamp2"]), "hirsch"), "1");
    assert_eq!(value(&run(&["hirsch", "--tree", "union(ab(1), ab(2), ...)"]), "hirsch"), "inf");

    assert_eq!(run(&["group", "ball", "--group", "nonsense", "--R", "1"]).status.code(), Some(2));
    assert_eq!(run(&["hirsch", "--tree", "ext(ab(1)"]).status.code(), Some(2));
}

#[test]
fn box_commands() {
    let dir = tempfile::tempdir().unwrap();
    let sigma = "congruence:2;congruence:4;congruence:8";
    let o = run(&["box", "report", "--group", "z", "--sigma", sigma, "--R", "2", "--S", "8"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("member=8Z injectivity=3"));
    let out = path(dir.path(), "box.edges");
    let o = run(&["box", "export", "--group", "z", "--sigma", sigma, "--lambda", "1,2,4", "--R", "6", "--out", &out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let space = read_edge_list(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(space.len(), 14);
    let o = run(&["box", "assemble", "--group", "z", "--sigma", "congruence:2;congruence:32"]);
    assert_eq!(o.status.code(), Some(2));
}
