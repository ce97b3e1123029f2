use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data").join(rel)
}

fn pgsat(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_pgsat")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn plan_args<'a>(domain: &'a str, problem: &'a str, extra: &[&'a str]) -> Vec<String> {
    let mut v: Vec<String> = vec![
        "plan".into(),
        "--domain".into(),
        data(domain).display().to_string(),
        "--problem".into(),
        data(problem).display().to_string(),
        "--solver".into(),
        env!("CARGO_BIN_EXE_pgsat-solve").into(),
    ];
    v.extend(extra.iter().map(|s| s.to_string()));
    v
}

fn run_plan(domain: &str, problem: &str, extra: &[&str]) -> (i32, String, String) {
    let args = plan_args(domain, problem, extra);
    pgsat(&args.iter().map(String::as_str).collect::<Vec<_>>())
}

#[test]
fn tiny_transport_plan() {
    let (code, out, _) = run_plan("transport/domain.pddl", "transport/p01.pddl", &["--encoding", "ground"]);
    assert_eq!(code, 0);
    assert_eq!(out, "(drop v l p)\n");
}

#[test]
fn exit_code_ten_when_bound_too_small() {
    let (code, out, _) =
        run_plan("blocksworld/domain.pddl", "blocksworld/p01.pddl", &["--max-length", "3", "--encoding", "binary"]);
    assert_eq!(code, 10);
    assert!(out.is_empty());
}

#[test]
fn satisficing_mode_finds_a_plan_within_the_first_bound() {
    let (code, out, _) = run_plan("gripper/domain.pddl", "gripper/p02.pddl", &["--mode", "sat"]);
    assert_eq!(code, 0);
    let steps = out.lines().count();
    assert!((9..=10).contains(&steps), "{out}");
}

#[test]
fn stats_and_kept_formulas() {
    let dir = tempfile::tempdir().unwrap();
    let stats = dir.path().join("stats.csv");
    let cnf = dir.path().join("cnf");
    let extra = ["--stats", stats.to_str().unwrap(), "--keep-cnf", cnf.to_str().unwrap()];
    for _ in 0..2 {
        let (code, _, _) = run_plan("visitall/domain.pddl", "visitall/p01.pddl", &extra);
        assert_eq!(code, 0);
    }
    let text = fs::read_to_string(&stats).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "instance,encoding,pp,length,vars,clauses,result,seconds");
    assert_eq!(lines.len(), 1 + 2 * 4);
    assert!(lines[4].starts_with("p01,plmg,on,3,") && lines[4].contains(",SAT,"));
    assert!(cnf.join("plmg-3.cnf").exists());
}

#[test]
fn unknown_solver_is_an_error() {
    let (code, _, err) = pgsat(&[
        "plan",
        "--domain",
        data("transport/domain.pddl").to_str().unwrap(),
        "--problem",
        data("transport/p01.pddl").to_str().unwrap(),
        "--solver",
        "/nonexistent/solver",
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("cannot start"), "{err}");
}

#[test]
fn bench_writes_one_row_per_instance_and_encoding() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("manifest.txt");
    fs::write(dir.path().join("broken.pddl"), "(define (problem").unwrap();
    fs::write(
        &manifest,
        format!(
            "# domain problem\n{d}/transport/domain.pddl {d}/transport/p01.pddl\n{d}/visitall/domain.pddl {d}/visitall/p01.pddl\n{d}/visitall/domain.pddl broken.pddl\n",
            d = data("").display()
        ),
    )
    .unwrap();
    let out = dir.path().join("bench.csv");
    let (code, _, _) = pgsat(&[
        "bench",
        "--manifest",
        manifest.to_str().unwrap(),
        "--solver",
        env!("CARGO_BIN_EXE_pgsat-solve"),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "instance,encoding,pp,outcome,plan_length,lengths,vars,clauses,seconds");
    assert_eq!(rows.len(), 1 + 9);
    assert!(rows[1].starts_with("transport/p01,ground,on,plan,1,0;1,"));
    assert!(rows[4].starts_with("visitall/p01,ground,on,plan,3,0;1;2;3,"));
    assert!(rows[7..].iter().all(|r| r.contains(",error,")));
}

#[test]
fn encode_writes_dimacs() {
    let (code, out, err) = pgsat(&[
        "encode",
        "--domain",
        data("transport/domain.pddl").to_str().unwrap(),
        "--problem",
        data("transport/p01.pddl").to_str().unwrap(),
        "--encoding",
        "ground",
        "--length",
        "1",
    ]);
    assert_eq!(code, 0);
    assert!(out.starts_with("p cnf "));
    assert!(err.contains("length=1"));
}
