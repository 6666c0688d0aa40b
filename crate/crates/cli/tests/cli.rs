use std::process::{Command, Output};

const HEADER: &str =
    "n,m,algo,params,rounds_total,rounds_route,rounds_broadcast,rounds_quantum,rounds_converge,queries,found,seed";

fn qcc(args: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcc"))
        .args(args.split_whitespace())
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn planted_k5_is_found() {
    let o = qcc("detect-clique --gen planted_clique,64,0.1,5,1 --q 5 --seed 1");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(HEADER));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "64");
    assert_eq!(row[10], "1");
    assert_eq!(row[11], "1");
    assert!(lines.next().is_none());
}

#[test]
fn cost_only_rows_leave_found_blank() {
    let o = qcc("sweep --algo clique --q 3 --strategy triangle15 --mode cost-only --n-list 1024,2048,4096");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert_eq!(r[10], "");
        let parts: u64 = r[5..9].iter().map(|x| x.parse::<u64>().unwrap()).sum();
        assert_eq!(parts, r[4].parse::<u64>().unwrap());
    }
}

#[test]
fn sweep_then_fit() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("c4.csv");
    let o = qcc(&format!(
        "sweep --algo cycle --ell 4 --mode cost-only --n-list 1024,2048,4096,8192,16384,32768,65536 --m-exp 0.5 --out {}",
        csv.display()
    ));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
    let o = qcc(&format!("fit --csv {} --json", csv.display()));
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let slope = v["slope"].as_f64().unwrap();
    assert!((0.19..=0.31).contains(&slope), "{slope}");
    assert_eq!(v["rows"], 7);
}

#[test]
fn json_rows() {
    let o = qcc("detect-cycle --gen cycle,9 --ell 9 --json");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[0]["found"], true);
    assert_eq!(v[0]["params"], "ell=9");
}

#[test]
fn gen_writes_edge_list() {
    let o = qcc("gen --gen complete,4");
    assert_eq!(stdout(&o).lines().next(), Some("4 6"));
    assert_eq!(stdout(&o).lines().count(), 7);
}

#[test]
fn verify_reports_agreement() {
    let o = qcc("verify --algo list --p 3 --gen gnp,24,0.4,0,2 --trials 5");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("5 of 5 rows agree"));
    assert_eq!(stdout(&o).lines().count(), 6);
}

#[test]
fn loads_graph_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.txt");
    std::fs::write(&path, "# two triangles\n6 6\n0 1\n1 2\n2 0\n3 4\n4 5\n5 3\n").unwrap();
    let o = qcc(&format!("list --graph {} --p 3", path.display()));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).lines().nth(1).unwrap().ends_with(",1,0"));
}

#[test]
fn usage_errors_exit_2_and_name_the_field() {
    let cases = [
        ("detect-clique --q 2 --gen gnp,40,0.4", "`q`"),
        ("detect-clique --q 5 --p 2 --t 2 --gen gnp,40,0.4", "`t`"),
        ("detect-cycle --ell 4 --mode cost-only --n-list 64", "`m-list`"),
        ("detect-cycle --ell 4", "`graph`"),
        ("detect-clique --q 4 --gen gnp,40,0.4 --reps 0", "`reps`"),
        ("detect-clique --q 4 --gen nope,40", "`kind`"),
        ("sweep --algo cycle --gen gnp,40,0.4", "`ell`"),
        ("fit --csv /nonexistent/rows.csv", "rows.csv"),
    ];
    for (args, needle) in cases {
        let o = qcc(args);
        assert_eq!(o.status.code(), Some(2), "{args}: {}", stderr(&o));
        assert!(stderr(&o).contains(needle), "{args}: {}", stderr(&o));
    }
    assert_eq!(qcc("frobnicate").status.code(), Some(2));
}
