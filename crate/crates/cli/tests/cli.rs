use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ecsbench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ecsbench"))
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn gen_writes_clouds_and_sidecars() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("maze.json");
    fs::write(&spec, r#"{"p": 0.2}"#).unwrap();
    let out = dir.path().join("maps");
    let o = ecsbench(&[
        "gen",
        "--family",
        "maze",
        "--spec",
        s(&spec),
        "--count",
        "2",
        "--seed",
        "4",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for i in 0..2 {
        let meta = json(&out.join(format!("maze_{i:05}.json")));
        assert_eq!(meta["family"], "maze");
        assert_eq!(meta["seed"], 4 + i);
        assert_eq!(meta["p"], 0.2);
        assert!(meta["bounds"].is_object() && meta["start"].is_array() && meta["goal"].is_array());
        let ply = fs::read_to_string(out.join(format!("maze_{i:05}.ply"))).unwrap();
        assert!(ply.starts_with("ply\nformat ascii 1.0\n"));
    }

    let csv = dir.path().join("ecs.csv");
    let pattern = format!("{}/*.ply", s(&out));
    let o = ecsbench(&["ecs", "--in", &pattern, "--out", s(&csv)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "file,density,clutter,structure,occupied,resolution"
    );
    assert_eq!(lines.len(), 3);
    for l in &lines[1..] {
        let cols: Vec<&str> = l.split(',').collect();
        let d: f64 = cols[1].parse().unwrap();
        assert!(d > 0.0 && d < 1.0);
        assert!(cols[4].parse::<usize>().unwrap() > 0);
        assert_eq!(cols[5], "0.2");
    }
}

#[test]
fn plan_runs_the_full_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("obs.json");
    fs::write(&spec, "{}").unwrap();
    let maps = dir.path().join("maps");
    let o = ecsbench(&[
        "gen",
        "--family",
        "obstacle",
        "--spec",
        s(&spec),
        "--count",
        "1",
        "--out",
        s(&maps),
        "--format",
        "xyz",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let meta = json(&maps.join("obstacle_00000.json"));
    let pt = |v: &serde_json::Value| format!("{},{},{}", v[0], v[1], v[2]);
    let out = dir.path().join("plan");
    let o = ecsbench(&[
        "plan",
        "--map",
        s(&maps.join("obstacle_00000.xyz")),
        "--start",
        &pt(&meta["start"]),
        "--goal",
        &pt(&meta["goal"]),
        "--frontend",
        "jps",
        "--backend",
        "flatness",
        "--timeout",
        "5",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let path: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(path["status"], "success");
    assert!(path["cost"].as_f64().unwrap() >= 10.0);
    assert!(path["waypoints"].as_array().unwrap().len() >= 2);
    assert!(path["time_ms"].as_f64().is_some());
    assert_eq!(json(&out.join("path.json")), path);

    let corridor = json(&out.join("corridor.json"));
    assert_eq!(
        corridor["normals"].as_array().unwrap().len(),
        corridor["offsets"].as_array().unwrap().len()
    );
    let traj = json(&out.join("trajectory.json"));
    let segs = traj["segments"].as_array().unwrap();
    assert!(!segs.is_empty());
    assert_eq!(segs[0]["coeffs_x"].as_array().unwrap().len(), 6);
    let total: f64 = segs.iter().map(|g| g["duration"].as_f64().unwrap()).sum();
    assert!((total - traj["T"].as_f64().unwrap()).abs() < 1e-9);
    let csv = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,px,py,pz,"));
}

#[test]
fn bench_and_report_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("suite.json");
    fs::write(
        &cfg,
        r#"{
            "families": [{"family": "obstacle", "count": 3, "obstacle": {}}],
            "frontends": ["jps"],
            "backends": ["flatness", "none"]
        }"#,
    )
    .unwrap();
    let out = dir.path().join("res");
    let o = ecsbench(&["bench", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = fs::read_to_string(out.join("results.csv")).unwrap();
    assert!(rows.starts_with(
        "case_id,family,seed,density,clutter,structure,frontend,fe_status,fe_time_ms,"
    ));
    let summary = json(&out.join("summary.json"));
    assert_eq!(
        summary["runs"].as_u64().unwrap() as usize,
        rows.lines().count() - 1
    );
    assert!(out.join("ecs_scatter.csv").exists());
    assert!(out.join("trajectories").is_dir());

    let o = ecsbench(&["report", "--in", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("spearman"));
}

#[test]
fn exit_codes_classify_failures() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    let out = dir.path().join("x");
    assert_eq!(
        code(&ecsbench(&[
            "gen",
            "--family",
            "maze",
            "--spec",
            s(&missing),
            "--out",
            s(&out)
        ])),
        2
    );

    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{not json").unwrap();
    assert_eq!(
        code(&ecsbench(&[
            "gen",
            "--family",
            "maze",
            "--spec",
            s(&bad),
            "--out",
            s(&out)
        ])),
        1
    );
    assert_eq!(
        code(&ecsbench(&["bench", "--config", s(&bad), "--out", s(&out)])),
        1
    );

    let empty_suite = dir.path().join("empty.json");
    fs::write(&empty_suite, "{}").unwrap();
    assert_eq!(
        code(&ecsbench(&[
            "bench",
            "--config",
            s(&empty_suite),
            "--out",
            s(&out)
        ])),
        1
    );

    assert_eq!(
        code(&ecsbench(&["report", "--in", s(&dir.path().join("none"))])),
        2
    );

    let cloud = dir.path().join("c.xyz");
    fs::write(&cloud, "1 1 1\n").unwrap();
    let o = ecsbench(&[
        "plan",
        "--map",
        s(&cloud),
        "--start",
        "-5,1,1",
        "--goal",
        "3,3,3",
        "--frontend",
        "jps",
    ]);
    assert_eq!(code(&o), 1);
    assert_eq!(
        code(&ecsbench(&[
            "plan",
            "--map",
            s(&cloud),
            "--start",
            "1,1",
            "--goal",
            "3,3,3",
            "--frontend",
            "jps"
        ])),
        1
    );
    assert_eq!(code(&ecsbench(&["frobnicate"])), 1);
}
