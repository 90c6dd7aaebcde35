use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const FIVE_NODE: &str = "0\t1\n0\t3\n1\t3\n2\t3\n2\t4\n3\t4\n";

fn specgraph(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_specgraph"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn signal_values(path: &Path) -> Vec<f64> {
    specgraph::formats::parse_signal(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn laplacian_of_the_five_node_example() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("g.tsv"), FIVE_NODE).unwrap();
    let out = specgraph(
        dir.path(),
        &[
            "laplacian",
            "--graph",
            "g.tsv",
            "--kind",
            "combinatorial",
            "--out",
            "L.csv",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(
        fs::read_to_string(dir.path().join("L.csv")).unwrap(),
        "2,-1,0,-1,0\n-1,2,0,-1,0\n0,0,2,-1,-1\n-1,-1,-1,4,-1\n0,0,-1,-1,2\n"
    );

    let out = specgraph(
        dir.path(),
        &[
            "laplacian",
            "--graph",
            "g.tsv",
            "--out",
            "L.coo",
            "--format",
            "coo",
        ],
    );
    assert!(out.status.success());
    let coo = specgraph::formats::parse_coordinate(
        &fs::read_to_string(dir.path().join("L.coo")).unwrap(),
    )
    .unwrap();
    assert_eq!(coo.get(3, 3), 4.0);
    assert_eq!(coo.nnz(), 17);
}

#[test]
fn named_nodes_get_a_node_map() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("g.tsv"), "alice\tbob\nbob\tcarol\t2.5\n").unwrap();
    let out = specgraph(
        dir.path(),
        &[
            "laplacian",
            "--graph",
            "g.tsv",
            "--out",
            "L.csv",
            "--node-map",
            "map.csv",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let map = fs::read_to_string(dir.path().join("map.csv")).unwrap();
    assert!(map.contains("alice") && map.contains("carol"));
    assert_eq!(
        fs::read_to_string(dir.path().join("L.csv")).unwrap(),
        "1,-1,0\n-1,3.5000000000000000e0,-2.5000000000000000e0\n0,-2.5000000000000000e0,2.5000000000000000e0\n"
    );
}

#[test]
fn spectrum_counts_components() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("g.tsv"), "n=4\n0\t1\n2\t3\n").unwrap();
    for kind in ["combinatorial", "sym-normalized"] {
        let out = specgraph(
            dir.path(),
            &[
                "spectrum", "--graph", "g.tsv", "--kind", kind, "--out", "eig.csv",
            ],
        );
        assert!(out.status.success(), "{}", stderr(&out));
        let text = fs::read_to_string(dir.path().join("eig.csv")).unwrap();
        assert!(
            text.ends_with("# zero_multiplicity=2,component_count=2\n"),
            "{text}"
        );
        assert_eq!(text.lines().count(), 5);
    }
}

#[test]
fn chebyshev_direct_and_exact_agree() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("g.tsv"), FIVE_NODE).unwrap();
    fs::write(dir.path().join("f.txt"), "1\n-0.5\n0.25\n2\n0\n").unwrap();
    fs::write(
        dir.path().join("spec.json"),
        r#"{"kind":"chebyshev","theta":[0.5,-0.25,0.125,0.3],"lambda_max":2}"#,
    )
    .unwrap();
    let base = [
        "filter",
        "--graph",
        "g.tsv",
        "--spec",
        "spec.json",
        "--signal",
        "f.txt",
        "--kind",
        "sym-normalized",
    ];
    let direct = specgraph(dir.path(), &[&base[..], &["--out", "d.txt"]].concat());
    let exact = specgraph(
        dir.path(),
        &[&base[..], &["--out", "e.txt", "--method", "exact"]].concat(),
    );
    assert!(direct.status.success() && exact.status.success());
    let (d, e) = (
        signal_values(&dir.path().join("d.txt")),
        signal_values(&dir.path().join("e.txt")),
    );
    for (a, b) in d.iter().zip(&e) {
        assert!((a - b).abs() <= 1e-8);
    }
}

#[test]
fn lanczos_report_has_one_row_per_step() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("g.tsv"), FIVE_NODE).unwrap();
    fs::write(dir.path().join("f.txt"), "1\n0\n0\n0\n2\n").unwrap();
    let out = specgraph(
        dir.path(),
        &[
            "lanczos",
            "--graph",
            "g.tsv",
            "--g",
            "heat:0.5",
            "--signal",
            "f.txt",
            "--m-sweep",
            "2..5",
            "--out",
            "r.csv",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(dir.path().join("r.csv")).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "M,error,bound,satisfied");
    assert_eq!(lines.len(), 5);
    assert!(lines[1..].iter().all(|l| l.ends_with(",true")));
}

#[test]
fn errors_carry_codes_and_exit_statuses() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("g.tsv"), FIVE_NODE).unwrap();
    fs::write(dir.path().join("bad.tsv"), "0\t0\n").unwrap();
    fs::write(dir.path().join("junk.tsv"), "0\tx\ty\tz\n").unwrap();

    let out = specgraph(
        dir.path(),
        &[
            "spectrum",
            "--graph",
            "g.tsv",
            "--kind",
            "random-walk",
            "--out",
            "e.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("ERROR NonSymmetricKind: "));

    let out = specgraph(
        dir.path(),
        &["laplacian", "--graph", "bad.tsv", "--out", "L.csv"],
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).starts_with("ERROR SelfLoopRejected: "));

    let out = specgraph(
        dir.path(),
        &["laplacian", "--graph", "junk.tsv", "--out", "L.csv"],
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).starts_with("ERROR Parse: "));

    let out = specgraph(
        dir.path(),
        &[
            "laplacian",
            "--graph",
            "g.tsv",
            "--kind",
            "weird",
            "--out",
            "L.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("ERROR Config: "));

    let out = specgraph(
        dir.path(),
        &[
            "gen-sbm",
            "--blocks",
            "2",
            "--nodes-per-block",
            "4",
            "--p-in",
            "1",
            "--p-out",
            "0",
            "--out-dir",
            "d",
        ],
    );
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).starts_with("ERROR ConnectivityFailure: "));
}

#[test]
fn train_and_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(
        specgraph(p, &["gen-sbm", "--seed", "5", "--out-dir", "data"])
            .status
            .success()
    );
    let out = specgraph(
        p,
        &[
            "train",
            "--data",
            "data",
            "--epochs",
            "50",
            "--checkpoint",
            "m.json",
            "--history",
            "h.csv",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let history = fs::read_to_string(p.join("h.csv")).unwrap();
    assert_eq!(history.lines().count(), 51);
    let out = specgraph(
        p,
        &[
            "eval",
            "--data",
            "data",
            "--checkpoint",
            "m.json",
            "--split",
            "val",
            "--out",
            "acc.csv",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("val_accuracy="));
    assert!(fs::read_to_string(p.join("acc.csv"))
        .unwrap()
        .starts_with("split,accuracy\nval,"));
}
