use ecsbench_core::backend::BackendId;
use ecsbench_core::bench::{
    read_results_csv, run_case, run_suite, spearman, write_report, CaseResult, FamilyConfig,
    Status, SuiteConfig, Summary, RESULTS_CSV, SCATTER_CSV, SUMMARY_JSON, TRAJECTORY_DIR,
};
use ecsbench_core::envgen::{BoxSpec, Family, ObstacleSpec, Provenance, Range, ScenarioCase};
use ecsbench_core::{Bounds, FrontendId, PlannerBudget, PointCloud, Vec3};

fn strip(mut r: CaseResult) -> CaseResult {
    r.fe_time_ms = 0.0;
    r.be_time_ms = r.be_time_ms.map(|_| 0.0);
    r.total_time_ms = 0.0;
    r
}

fn case(cloud: PointCloud, seed: u64) -> ScenarioCase {
    ScenarioCase {
        cloud,
        bounds: Bounds::default(),
        start: Vec3::new(2.05, 5.05, 2.05),
        goal: Vec3::new(17.95, 5.05, 2.05),
        provenance: Provenance {
            family: Family::Obstacle,
            spec_hash: String::new(),
            seed,
        },
    }
}

/// Generous budget so the deterministic iteration caps bind before the clock.
fn patient() -> SuiteConfig {
    SuiteConfig {
        budget: PlannerBudget {
            timeout: 60.0,
            ..PlannerBudget::default()
        },
        ..SuiteConfig::default()
    }
}

fn wall_at(x: f64) -> PointCloud {
    let mut pts = Vec::new();
    for j in 0..=100 {
        for k in 0..=50 {
            pts.push(Vec3::new(x, j as f64 * 0.1, k as f64 * 0.1));
        }
    }
    PointCloud::new(pts).unwrap()
}

#[test]
fn empty_map_succeeds_for_every_pair() {
    let c = case(PointCloud::empty(), 1);
    for fe in FrontendId::ALL {
        for be in [BackendId::Flatness, BackendId::None] {
            let r = run_case(&c, fe, be, &SuiteConfig::default()).unwrap();
            assert_eq!(r.status, Status::Success, "{fe}/{be}: {r:?}");
            assert!(!r.collision);
            // No occupied cell: the signature is undefined.
            assert_eq!(r.density, None);
        }
    }
}

#[test]
fn walled_off_goal_never_succeeds() {
    let c = case(wall_at(10.0), 2);
    let config = SuiteConfig::default();
    let jps = run_case(&c, FrontendId::Jps, BackendId::Flatness, &config).unwrap();
    assert_eq!(jps.fe_status, Status::Infeasible);
    assert_eq!(jps.status, Status::Infeasible);
    assert_eq!(jps.be_status, None);
    for fe in [FrontendId::RrtStar, FrontendId::Mpl] {
        let r = run_case(&c, fe, BackendId::Flatness, &config).unwrap();
        assert!(
            matches!(r.status, Status::Infeasible | Status::Timeout),
            "{r:?}"
        );
    }
}

#[test]
fn run_case_is_deterministic_apart_from_timing() {
    let mut spec = ObstacleSpec::empty();
    spec.seed = 5;
    spec.boxes = BoxSpec {
        count: 20,
        edge: Range::new(0.5, 2.0),
    };
    let cloud = ecsbench_core::envgen::generate_obstacle_map(&spec, &Bounds::default())
        .unwrap()
        .cloud;
    let c = case(cloud, 3);
    for fe in FrontendId::ALL {
        let a = run_case(&c, fe, BackendId::Flatness, &patient()).unwrap();
        let b = run_case(&c, fe, BackendId::Flatness, &patient()).unwrap();
        assert_eq!(strip(a), strip(b));
    }
}

fn trivial_suite(n: usize) -> SuiteConfig {
    SuiteConfig {
        families: vec![FamilyConfig::obstacle(n, ObstacleSpec::empty())],
        backends: vec![BackendId::Flatness, BackendId::None],
        ..SuiteConfig::default()
    }
}

#[test]
fn trivial_maps_all_succeed_and_report_round_trips() {
    let res = run_suite(&trivial_suite(10)).unwrap();
    assert_eq!(res.summary.maps, 10);
    assert_eq!(res.results.len(), 10 * 6);
    for g in &res.summary.groups {
        assert_eq!(g.success_rate, 1.0, "{g:?}");
        assert_eq!(g.collision_rate, 0.0);
    }
    // Empty maps carry no signature, so no map enters the correlation.
    assert!(res.summary.correlation.maps == 0 && !res.summary.correlation.sufficient);

    let dir = tempfile::tempdir().unwrap();
    write_report(&res, dir.path()).unwrap();
    let rows = read_results_csv(&dir.path().join(RESULTS_CSV)).unwrap();
    assert_eq!(rows, res.results);
    let traj = std::fs::read_dir(dir.path().join(TRAJECTORY_DIR))
        .unwrap()
        .count();
    assert_eq!(
        traj,
        res.results
            .iter()
            .filter(|r| r.backend == BackendId::Flatness && r.success())
            .count()
    );
    assert!(dir.path().join(SCATTER_CSV).exists());
    let written: Summary =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join(SUMMARY_JSON)).unwrap())
            .unwrap();
    let again = Summary::from_results(&rows);
    assert_eq!(written.groups, again.groups);
    assert_eq!(written.runs, again.runs);
    assert_eq!(written.maps, again.maps);
}

#[test]
fn spearman_on_synthetic_rows() {
    let x: Vec<f64> = (0..40).map(|i| i as f64 * 0.01).collect();
    let fails: Vec<f64> = x.iter().map(|v| (v * 100.0).powi(2)).collect();
    assert_eq!(spearman(&x, &fails), Some(1.0));
    assert_eq!(spearman(&x, &vec![3.0; 40]), None);
    assert_eq!(spearman(&x[..1], &fails[..1]), None);
}

#[test]
fn parallel_and_serial_runs_agree() {
    let mut spec = ObstacleSpec::default();
    spec.seed = 0;
    let mut config = SuiteConfig {
        families: vec![FamilyConfig::obstacle(6, spec)],
        seed_base: 77,
        ..patient()
    };
    let serial = run_suite(&config).unwrap();
    config.parallelism = 4;
    let parallel = run_suite(&config).unwrap();
    assert!(!serial.results.is_empty());
    let a: Vec<_> = serial.results.into_iter().map(strip).collect();
    let b: Vec<_> = parallel.results.into_iter().map(strip).collect();
    assert_eq!(a, b);
}

#[test]
fn invalid_suites_are_rejected() {
    assert!(run_suite(&SuiteConfig::default()).is_err());
    let mut c = trivial_suite(1);
    c.parallelism = 0;
    assert!(run_suite(&c).is_err());
}
