//! `ecsbench`: generate maps, score them, plan on them and benchmark planners.

use std::fs;
use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use ecsbench_core::backend::{
    check_dynamic_feasibility, optimize_trajectory, BoundaryState, OptimizerConfig,
};
use ecsbench_core::bench::{
    read_results_csv, run_suite, write_report, BenchError, GroupSummary, Summary, RESULTS_CSV,
    SUMMARY_JSON,
};
use ecsbench_core::corridor::{build_corridor, simplify_path};
use ecsbench_core::envgen::{
    generate_maze, generate_obstacle_map, load_point_cloud, maze_start_goal, sample_start_goal,
    save_point_cloud, spec_hash, CaseMeta, EnvError, MazeSpec, ObstacleSpec, PointFormat,
};
use ecsbench_core::frontend::{plan, PlanError, PlannerConfig};
use ecsbench_core::world::{planning_grid, WorldError};
use ecsbench_core::{
    ecs_grid, ecs_of_grid, BackendId, Bounds, Family, FrontendId, PlannerBudget, PointCloud,
    QuadrotorSpec, Status, SuiteConfig, Vec3,
};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "ecsbench", version, about = "Quadrotor planning benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenFamily {
    Maze,
    Obstacle,
}

#[derive(Clone, Copy, ValueEnum)]
enum CloudFormat {
    Ply,
    Xyz,
}

#[derive(Subcommand)]
enum Command {
    /// Generate point-cloud maps with JSON sidecars.
    Gen {
        #[arg(long, value_enum)]
        family: GenFamily,
        /// Maze or obstacle spec as JSON; omitted fields take defaults.
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "ply")]
        format: CloudFormat,
        /// Minimum start/goal distance for obstacle maps, meters.
        #[arg(long, default_value_t = 10.0)]
        min_separation: f64,
    },
    /// Score every matching cloud and write one CSV row per file.
    Ecs {
        #[arg(long = "in")]
        input: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.2)]
        radius: f64,
    },
    /// Plan a single query and print the path as JSON.
    Plan {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, value_parser = parse_point)]
        start: Vec3,
        #[arg(long, value_parser = parse_point)]
        goal: Vec3,
        #[arg(long)]
        frontend: FrontendId,
        #[arg(long)]
        backend: Option<BackendId>,
        /// Directory for path, corridor and trajectory files.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0.2)]
        timeout: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a benchmark suite described by a JSON config.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Summarize a results directory.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Io(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Io(_) => 2,
            Failure::Internal(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Io(m) | Failure::Internal(m) => m,
        }
    }
}

impl From<EnvError> for Failure {
    fn from(e: EnvError) -> Self {
        match e {
            EnvError::Io(_) | EnvError::Parse { .. } => Failure::Io(e.to_string()),
            EnvError::Config(_) | EnvError::World(_) | EnvError::InfeasibleSampling { .. } => {
                Failure::Config(e.to_string())
            }
        }
    }
}

impl From<BenchError> for Failure {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Config(_) => Failure::Config(e.to_string()),
            BenchError::Io { .. } | BenchError::Format(_) => Failure::Io(e.to_string()),
            BenchError::Env(e) => e.into(),
        }
    }
}

impl From<WorldError> for Failure {
    fn from(e: WorldError) -> Self {
        Failure::Config(e.to_string())
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn parse_point(s: &str) -> std::result::Result<Vec3, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    match v[..] {
        [x, y, z] if v.iter().all(|c| c.is_finite()) => Ok(Vec3::new(x, y, z)),
        _ => Err(format!("expected x,y,z, got {s:?}")),
    }
}

fn read(path: &FsPath) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write(path: &FsPath, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn mkdir(path: &FsPath) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &FsPath) -> Result<T> {
    serde_json::from_str(&read(path)?)
        .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("output types serialize")
}

fn sidecar_path(cloud: &FsPath) -> PathBuf {
    cloud.with_extension("json")
}

/// Bounds from the sidecar next to `cloud`, else the protocol default.
fn map_bounds(cloud: &FsPath) -> Result<Bounds> {
    let side = sidecar_path(cloud);
    if side.exists() {
        Ok(parse_json::<CaseMeta>(&side)?.bounds)
    } else {
        Ok(Bounds::default())
    }
}

fn load(path: &FsPath) -> Result<PointCloud> {
    load_point_cloud(path, PointFormat::from_path(path)).map_err(|e| match e {
        EnvError::Io(io) => Failure::Io(format!("{}: {io}", path.display())),
        other => Failure::Io(format!("{}: {other}", path.display())),
    })
}

fn gen(
    family: GenFamily,
    spec: &FsPath,
    count: usize,
    seed: u64,
    out: &FsPath,
    format: CloudFormat,
    min_separation: f64,
) -> Result<()> {
    let text = read(spec)?;
    let bad = |e: serde_json::Error| Failure::Config(format!("{}: {e}", spec.display()));
    let (maze, obstacle): (Option<MazeSpec>, Option<ObstacleSpec>) = match family {
        GenFamily::Maze => (Some(serde_json::from_str(&text).map_err(bad)?), None),
        GenFamily::Obstacle => (None, Some(serde_json::from_str(&text).map_err(bad)?)),
    };
    mkdir(out)?;
    let bounds = Bounds::default();
    let quad = QuadrotorSpec::default();
    let (fmt, ext) = match format {
        CloudFormat::Ply => (PointFormat::AsciiPly, "ply"),
        CloudFormat::Xyz => (PointFormat::XyzText, "xyz"),
    };
    let mut written = 0;
    for i in 0..count {
        let s = seed.wrapping_add(i as u64);
        let (cloud, meta) = match (&maze, &obstacle) {
            (Some(m), _) => {
                let spec = MazeSpec {
                    seed: s,
                    ..m.clone()
                };
                spec.validate()?;
                let cloud = generate_maze(&spec, &bounds)?;
                let (start, goal) = maze_start_goal(&spec, &bounds);
                let meta = CaseMeta {
                    family: Family::Maze,
                    seed: s,
                    p: Some(spec.p),
                    shape_spec: None,
                    bounds,
                    start,
                    goal,
                    spec_hash: spec_hash(&spec),
                };
                (cloud, meta)
            }
            (None, Some(o)) => {
                let spec = ObstacleSpec {
                    seed: s,
                    ..o.clone()
                };
                spec.validate()?;
                let cloud = generate_obstacle_map(&spec, &bounds)?.cloud;
                let grid = planning_grid(&cloud, bounds, &quad, 0.3)?;
                let (start, goal) = match sample_start_goal(&grid, min_separation, s) {
                    Ok(sg) => sg,
                    Err(EnvError::InfeasibleSampling { .. }) => {
                        log::warn!("seed {s}: no start/goal pair, map skipped");
                        continue;
                    }
                    Err(e) => return Err(e.into()),
                };
                let meta = CaseMeta {
                    family: Family::Obstacle,
                    seed: s,
                    p: None,
                    shape_spec: Some(spec.clone()),
                    bounds,
                    start,
                    goal,
                    spec_hash: spec_hash(&spec),
                };
                (cloud, meta)
            }
            (None, None) => unreachable!(),
        };
        let stem = format!("{}_{:05}", meta.family, i);
        let cloud_path = out.join(format!("{stem}.{ext}"));
        save_point_cloud(&cloud_path, &cloud, fmt)?;
        write(&sidecar_path(&cloud_path), &to_json(&meta))?;
        written += 1;
    }
    println!("wrote {written} maps to {}", out.display());
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn ecs_cmd(pattern: &str, out: &FsPath, radius: f64) -> Result<()> {
    let quad = QuadrotorSpec {
        radius,
        ..QuadrotorSpec::default()
    };
    quad.validate()
        .map_err(|e| Failure::Config(e.to_string()))?;
    let paths: Vec<PathBuf> = glob::glob(pattern)
        .map_err(|e| Failure::Config(format!("bad pattern {pattern:?}: {e}")))?
        .filter_map(|p| p.ok())
        .filter(|p| !matches!(p.extension().and_then(|e| e.to_str()), Some("json" | "csv")))
        .collect();
    if paths.is_empty() {
        return Err(Failure::Io(format!("no files match {pattern:?}")));
    }
    let mut csv = String::from("file,density,clutter,structure,occupied,resolution\n");
    for p in &paths {
        let cloud = load(p)?;
        let grid = ecs_grid(&cloud, map_bounds(p)?, &quad);
        let sig = grid
            .as_ref()
            .map_err(|e| e.clone())
            .and_then(|g| ecs_of_grid(g, &quad));
        if let Err(e) = &sig {
            log::warn!("{}: {e}", p.display());
        }
        let sig = sig.ok();
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            p.display(),
            opt(sig.map(|s| s.density)),
            opt(sig.map(|s| s.clutter)),
            opt(sig.map(|s| s.structure)),
            grid.map(|g| g.occupied_count().to_string())
                .unwrap_or_default(),
            quad.radius,
        ));
    }
    write(out, &csv)?;
    println!("scored {} maps into {}", paths.len(), out.display());
    Ok(())
}

#[derive(Serialize)]
struct PathOut {
    waypoints: Vec<Vec3>,
    cost: Option<f64>,
    time_ms: f64,
    status: Status,
}

#[derive(Serialize)]
struct CorridorOut<'a> {
    normals: Vec<&'a [Vec3]>,
    offsets: Vec<&'a [f64]>,
}

#[allow(clippy::too_many_arguments)]
fn plan_cmd(
    map: &FsPath,
    start: Vec3,
    goal: Vec3,
    fe: FrontendId,
    be: Option<BackendId>,
    out: Option<&FsPath>,
    timeout: f64,
    seed: u64,
) -> Result<()> {
    let bounds = map_bounds(map)?;
    let cloud = load(map)?;
    let quad = QuadrotorSpec::default();
    let budget = PlannerBudget {
        timeout,
        ..PlannerBudget::default()
    };
    let grid = planning_grid(&cloud, bounds, &quad, 0.3)?;
    let t0 = Instant::now();
    let res = plan(
        fe,
        &grid,
        start,
        goal,
        &quad,
        &budget,
        &PlannerConfig::default(),
        seed,
    );
    let time_ms = t0.elapsed().as_secs_f64() * 1e3;
    let (path, status) = match res {
        Ok(p) => (Some(p), Status::Success),
        Err(PlanError::Infeasible) => (None, Status::Infeasible),
        Err(PlanError::BudgetExceeded { .. }) => (None, Status::Timeout),
        Err(PlanError::InvalidQuery(m)) => return Err(Failure::Config(m)),
    };
    let path_out = PathOut {
        waypoints: path
            .as_ref()
            .map(|p| p.waypoints.clone())
            .unwrap_or_default(),
        cost: path.as_ref().map(|p| p.cost),
        time_ms,
        status,
    };
    let path_json = to_json(&path_out);
    println!("{path_json}");
    if let Some(dir) = out {
        mkdir(dir)?;
        write(&dir.join("path.json"), &path_json)?;
    }

    let (Some(path), Some(BackendId::Flatness)) = (path, be) else {
        return Ok(());
    };
    let path = simplify_path(&path, &grid);
    let corridor = build_corridor(&path, &grid).map_err(|e| Failure::Internal(e.to_string()))?;
    let traj = optimize_trajectory(
        &corridor,
        &BoundaryState::rest(path.start()),
        &BoundaryState::rest(path.end()),
        &quad,
        &OptimizerConfig::default(),
    );
    let report = traj
        .as_ref()
        .ok()
        .map(|t| check_dynamic_feasibility(t, Some(&grid), 0.01));
    match (&traj, &report) {
        (Ok(t), Some(r)) => eprintln!(
            "trajectory: {:.2} s, max speed {:.2}, max acceleration {:.2}, collision {}",
            t.duration(),
            r.max_speed,
            r.max_acceleration,
            r.collision()
        ),
        (Err(e), _) => eprintln!("back-end failed: {e}"),
        _ => {}
    }
    if let Some(dir) = out {
        let c = CorridorOut {
            normals: corridor.polytopes.iter().map(|p| &p.normals[..]).collect(),
            offsets: corridor.polytopes.iter().map(|p| &p.offsets[..]).collect(),
        };
        write(&dir.join("corridor.json"), &to_json(&c))?;
        if let Ok(t) = &traj {
            write(&dir.join("trajectory.json"), &to_json(t))?;
            write(&dir.join("trajectory.csv"), &t.sampled_csv(0.01))?;
        }
    }
    Ok(())
}

fn bench_cmd(config: &FsPath, out: &FsPath) -> Result<()> {
    let config: SuiteConfig = parse_json(config)?;
    config.validate()?;
    let res = run_suite(&config)?;
    write_report(&res, out)?;
    println!(
        "{} runs on {} of {} maps written to {}",
        res.summary.runs,
        res.summary.maps,
        res.summary.generated.unwrap_or(res.summary.maps),
        out.display()
    );
    print_groups(&res.summary.groups);
    Ok(())
}

fn fmt_opt(v: Option<f64>, prec: usize) -> String {
    v.map(|x| format!("{x:.prec$}"))
        .unwrap_or_else(|| "-".into())
}

fn print_groups(groups: &[GroupSummary]) {
    println!(
        "{:<9} {:<8} {:<9} {:>5} {:>8} {:>9} {:>9} {:>9} {:>8}",
        "family", "frontend", "backend", "runs", "success", "collision", "fe_ms", "be_ms", "dur_s"
    );
    for g in groups {
        println!(
            "{:<9} {:<8} {:<9} {:>5} {:>7.1}% {:>8.1}% {:>9.1} {:>9} {:>8}",
            g.family.as_str(),
            g.frontend.as_str(),
            g.backend.as_str(),
            g.runs,
            g.success_rate * 100.0,
            g.collision_rate * 100.0,
            g.mean_fe_time_ms,
            fmt_opt(g.mean_be_time_ms, 1),
            fmt_opt(g.mean_traj_duration, 2),
        );
    }
}

fn report_cmd(dir: &FsPath) -> Result<()> {
    let rows = read_results_csv(&dir.join(RESULTS_CSV))?;
    let mut summary = Summary::from_results(&rows);
    let stored = dir.join(SUMMARY_JSON);
    if stored.exists() {
        let old: Summary = serde_json::from_str(&read(&stored)?)
            .map_err(|e| Failure::Io(format!("{}: {e}", stored.display())))?;
        summary.generated = old.generated;
        if old.groups != summary.groups {
            log::warn!("{} disagrees with {}", stored.display(), RESULTS_CSV);
        }
    }
    println!("{} runs on {} maps", summary.runs, summary.maps);
    print_groups(&summary.groups);
    let c = &summary.correlation;
    println!(
        "spearman vs failures over {} maps{}: density {}, clutter {}, structure {}",
        c.maps,
        if c.sufficient { "" } else { " (too few maps)" },
        fmt_opt(c.density, 3),
        fmt_opt(c.clutter, 3),
        fmt_opt(c.structure, 3),
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen {
            family,
            spec,
            count,
            seed,
            out,
            format,
            min_separation,
        } => gen(family, &spec, count, seed, &out, format, min_separation),
        Command::Ecs { input, out, radius } => ecs_cmd(&input, &out, radius),
        Command::Plan {
            map,
            start,
            goal,
            frontend,
            backend,
            out,
            timeout,
            seed,
        } => plan_cmd(
            &map,
            start,
            goal,
            frontend,
            backend,
            out.as_deref(),
            timeout,
            seed,
        ),
        Command::Bench { config, out } => bench_cmd(&config, &out),
        Command::Report { input } => report_cmd(&input),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(f)) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
        Err(_) => ExitCode::from(Failure::Internal(String::new()).code()),
    }
}
