use std::process::{Command, Output};

fn cdsu(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cdsu")).args(args).output().expect("spawn cdsu")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn bench_writes_csv_grid() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let o = cdsu(&[
        "bench", "--n", "256", "--m", "n,4n", "--p", "1,2", "--link", "rank-dcas", "--find", "naive,two", "--verify",
        "--csv", csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,m,p,link,find,seed,mode,total_visits,total_cas,cas_failures,max_rank,wall_ms,ratio");
    assert_eq!(lines.len(), 1 + 8);
    for row in &lines[1..] {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols.len(), 13);
        assert_eq!(cols[6], "threads");
        assert_eq!(cols[12].is_empty(), cols[4] == "naive", "{row}");
    }
    assert_eq!(stdout(&o).lines().filter(|l| l.ends_with(" ok")).count(), 8);

    let again = cdsu(&["bench", "--n", "64", "--csv", csv.to_str().unwrap(), "--append"]);
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 10);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(cdsu(&["bench", "--link", "nope"]).status.code(), Some(2));
    assert_eq!(cdsu(&["bench", "--n", "4n"]).status.code(), Some(2));
    assert_eq!(cdsu(&["bench", "--mix", "1:1"]).status.code(), Some(2));
    assert_eq!(cdsu(&["scenario", "--scenario", "nope"]).status.code(), Some(2));
    assert_eq!(cdsu(&["sim", "--schedule", "/no/such/file"]).status.code(), Some(2));
    assert_eq!(cdsu(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn sim_with_workload_and_schedule_files() {
    let dir = tempfile::tempdir().unwrap();
    let work = dir.path().join("w.txt");
    std::fs::write(&work, "# two processes\n@1 U 0 1\n@2 U 1 2\n@1 S 0 2\n@2 F 0\n").unwrap();
    let sched = dir.path().join("s.txt");
    let run = |extra: &[&str]| {
        let mut args = vec!["sim", "--n", "4", "--p", "2", "--workload", work.to_str().unwrap()];
        args.extend_from_slice(extra);
        cdsu(&args)
    };
    // everything but the schedule name and the wall time
    let strip = |o: &Output| -> Vec<String> {
        stdout(o)
            .split_whitespace()
            .filter(|t| !t.starts_with("mode=") && !t.starts_with("wall_ms="))
            .map(String::from)
            .collect()
    };
    for link in ["index", "rank-dcas", "rank-rand"] {
        let a = run(&["--link", link, "--schedule", "random:5", "--save-schedule", sched.to_str().unwrap()]);
        assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
        assert!(std::fs::read_to_string(&sched).unwrap().starts_with("procs 2 seed 0\n"));
        let b = run(&["--link", link, "--schedule", sched.to_str().unwrap()]);
        assert_eq!(b.status.code(), Some(0), "{}", String::from_utf8_lossy(&b.stderr));
        assert!(stdout(&b).contains("mode=sim:file"));
        assert_eq!(strip(&a), strip(&b));
    }
    let short = dir.path().join("short.txt");
    std::fs::write(&short, "procs 2 seed 0\n1\n").unwrap();
    assert_eq!(run(&["--schedule", short.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn scenarios_and_verify_succeed() {
    let o = cdsu(&["scenario", "--scenario", "wakeup", "--n", "9", "--p", "8", "--k", "8", "--seed", "1,2,3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().filter(|l| l.contains("\"some_true\":true")).count(), 3);

    let o = cdsu(&["sim", "--scenario", "sqrt-path-adversary", "--n", "64", "--p", "16", "--link", "index"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let o = cdsu(&[
        "verify", "--n", "8", "--m", "2n", "--p", "3", "--link", "index,rank-dcas,rank-rand", "--find", "one,cond-two",
        "--runs", "20",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 6);
}
