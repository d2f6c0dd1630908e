use std::fmt::{self, Write as _};
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use roadcloud::game::{allocate_round, check_uniqueness, solve_nash, solve_nash_traced, utility};
use roadcloud::model::{validate_config, GameSetup};
use roadcloud::output::{
    config_hash, write_comparison_csv, write_events_csv, write_grid_csv, write_sim_report_csv, write_states_csv,
    write_trajectory_csv,
};
use roadcloud::reservation::{analyze, mean_occupancy, optimize_reservation, utilization};
use roadcloud::sim::{compare_analytic_vs_sim, loss_event_log, run_corridor_sim, run_loss_sim};
use roadcloud::{
    AllocationProfile, ConfigDocument, GameError, LossSimParams, RateModel, ReservationError, SimReport,
    ValidatedConfig, VrcState,
};

use crate::output::RunFiles;
use crate::ranges::{parse_axis, parse_grid, parse_pair};
use crate::{AllocateArgs, Mode, OptimizeArgs, SimulateArgs, SteadyStateArgs, SweepArgs};

/// Errors that abort a command before any output is written.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Overflow(String),
    Solver(String),
    Io(anyhow::Error),
}

impl Failure {
    pub const IO_EXIT: u8 = 1;

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Solver(_) => 3,
            Self::Overflow(_) => 4,
            Self::Io(_) => Self::IO_EXIT,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(m) => write!(f, "config: {m}"),
            Self::Overflow(m) | Self::Solver(m) => f.write_str(m),
            Self::Io(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Self::Io(e)
    }
}

impl From<ReservationError> for Failure {
    fn from(e: ReservationError) -> Self {
        match e {
            ReservationError::StateSpaceOverflow { .. } => Self::Overflow(e.to_string()),
            ReservationError::Singular { .. } => Self::Solver(e.to_string()),
            _ => Self::Config(e.to_string()),
        }
    }
}

impl From<GameError> for Failure {
    fn from(e: GameError) -> Self {
        Self::Config(e.to_string())
    }
}

/// Completed run: outputs are written even when the status is not `Ok`.
pub enum Status {
    Ok,
    NotConverged(String),
    Infeasible(String),
}

impl Status {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Ok => 0,
            Self::NotConverged(_) => 3,
            Self::Infeasible(_) => 5,
        }
    }
}

pub struct Report {
    pub files: RunFiles,
    pub summary: String,
    pub status: Status,
    pub seed: Option<u64>,
    pub config_hash: String,
}

struct Loaded {
    config: ValidatedConfig,
    hash: String,
}

fn load(path: &Path) -> Result<Loaded, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    let doc = ConfigDocument::from_json(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let config = validate_config(&doc).map_err(|e| Failure::Config(e.to_string()))?;
    Ok(Loaded {
        config,
        hash: config_hash(&doc),
    })
}

fn rate_model(cfg: &ValidatedConfig, local_rate: Option<f64>, state_cap: Option<usize>) -> Result<RateModel, Failure> {
    let classes = cfg
        .classes
        .clone()
        .ok_or_else(|| Failure::Config("classes: section required".into()))?;
    let mut model = RateModel::new(classes, cfg.capacity).map_err(|e| Failure::Config(e.to_string()))?;
    if let Some(rate) = local_rate {
        model = model.with_local_arrival_rate(rate).map_err(|e| Failure::Config(e.to_string()))?;
    }
    if let Some(cap) = state_cap {
        model = model.with_state_cap(cap);
    }
    Ok(model)
}

fn game_setup(cfg: &ValidatedConfig) -> Result<&GameSetup, Failure> {
    cfg.game.as_ref().ok_or_else(|| Failure::Config("game: section required".into()))
}

fn csv_rows<R: AsRef<[String]>>(header: &[&str], rows: impl IntoIterator<Item = R>) -> csv::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.as_ref())?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

fn equilibrium_rows(setup: &GameSetup, p: &AllocationProfile) -> Result<Vec<Vec<String>>, GameError> {
    (0..setup.config.num_players())
        .map(|i| {
            let u = utility(i, &p.requests_compute, &p.requests_storage, &setup.config)?;
            Ok(vec![
                i.to_string(),
                p.requests_compute[i].to_string(),
                p.requests_storage[i].to_string(),
                p.shares_compute[i].to_string(),
                p.shares_storage[i].to_string(),
                u.to_string(),
            ])
        })
        .collect()
}

pub fn allocate(args: &AllocateArgs) -> Result<Report, Failure> {
    let loaded = load(&args.config)?;
    let setup = game_setup(&loaded.config)?;
    let cfg = &setup.config;
    let n = cfg.num_players();
    let cap = cfg.capacity();
    let init_c = setup
        .initial_compute
        .clone()
        .unwrap_or_else(|| vec![cap.compute_total() / n as f64; n]);
    let init_m = setup
        .initial_storage
        .clone()
        .unwrap_or_else(|| vec![cap.storage_total() / n as f64; n]);

    let mut files = RunFiles::default();
    let profile = if args.trace {
        let (p, trace) = solve_nash_traced(cfg, &init_c, &init_m)?;
        files.csv("trajectory.csv", |b| write_trajectory_csv(b, &trace))?;
        p
    } else {
        solve_nash(cfg, &init_c, &init_m)?
    };
    let rows = equilibrium_rows(setup, &profile)?;
    files.add(
        "equilibrium.csv",
        csv_rows(
            &["player", "request_compute", "request_storage", "share_compute", "share_storage", "utility"],
            &rows,
        )
        .map_err(anyhow::Error::from)?,
    );

    let mut summary = String::new();
    let uniq = check_uniqueness(cfg);
    let _ = writeln!(summary, "players: {n}");
    let _ = writeln!(
        summary,
        "uniqueness condition: {}",
        if uniq.holds {
            "holds".to_string()
        } else {
            format!("violated by players {:?}", uniq.violating_players())
        }
    );
    let _ = writeln!(summary, "converged: {} after {} rounds", profile.converged, profile.iterations_used);
    for r in &rows {
        let _ = writeln!(
            summary,
            "player {}: request c={} m={} share c={} m={} utility={}",
            r[0], r[1], r[2], r[3], r[4], r[5]
        );
    }
    let sc: f64 = profile.shares_compute.iter().sum();
    let sm: f64 = profile.shares_storage.iter().sum();
    let _ = writeln!(summary, "share totals: compute={sc} storage={sm}");

    let mut all_converged = profile.converged;
    if args.restarts > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        let floor = cfg.request_floor();
        let mut solutions = vec![profile.clone()];
        let mut restart_rows = Vec::new();
        for r in 0..args.restarts {
            let ic: Vec<f64> = (0..n).map(|_| rng.random_range(floor..=cap.compute_total())).collect();
            let im: Vec<f64> = (0..n).map(|_| rng.random_range(floor..=cap.storage_total())).collect();
            let p = solve_nash(cfg, &ic, &im)?;
            all_converged &= p.converged;
            for i in 0..n {
                restart_rows.push(vec![
                    (r + 1).to_string(),
                    i.to_string(),
                    p.requests_compute[i].to_string(),
                    p.requests_storage[i].to_string(),
                    p.converged.to_string(),
                ]);
            }
            solutions.push(p);
        }
        let mut spread: f64 = 0.0;
        for a in &solutions {
            for b in &solutions {
                for (x, y) in a.requests_compute.iter().zip(&b.requests_compute) {
                    spread = spread.max((x - y).abs());
                }
                for (x, y) in a.requests_storage.iter().zip(&b.requests_storage) {
                    spread = spread.max((x - y).abs());
                }
            }
        }
        files.add(
            "restarts.csv",
            csv_rows(&["restart", "player", "request_compute", "request_storage", "converged"], &restart_rows)
                .map_err(anyhow::Error::from)?,
        );
        let _ = writeln!(summary, "restarts: {} (seed {}), max pairwise distance {spread:e}", args.restarts, args.seed);
    }

    if args.vrc_rounds > 0 {
        let mut state = match setup.vrc_caps {
            Some((cc, cm)) => VrcState::new(n, cc, cm).map_err(|e| Failure::Config(e.to_string()))?,
            None => VrcState::with_default_caps(n, cap),
        };
        let mut vrc_rows = Vec::new();
        let mut totals = vec![(0.0, 0.0); n];
        for round in 1..=args.vrc_rounds {
            let (outcome, next) = allocate_round(cfg, &state)?;
            all_converged &= outcome.converged;
            for (i, total) in totals.iter_mut().enumerate() {
                total.0 += outcome.grants_compute[i];
                total.1 += outcome.grants_storage[i];
                vrc_rows.push(vec![
                    round.to_string(),
                    i.to_string(),
                    outcome.grants_compute[i].to_string(),
                    outcome.grants_storage[i].to_string(),
                    outcome.admitted[i].compute.to_string(),
                    outcome.admitted[i].storage.to_string(),
                    next.applied_compute()[i].to_string(),
                    next.applied_storage()[i].to_string(),
                ]);
            }
            state = next;
        }
        files.add(
            "vrc.csv",
            csv_rows(
                &[
                    "round",
                    "player",
                    "grant_compute",
                    "grant_storage",
                    "admitted_compute",
                    "admitted_storage",
                    "counter_compute",
                    "counter_storage",
                ],
                &vrc_rows,
            )
            .map_err(anyhow::Error::from)?,
        );
        for (i, (c, m)) in totals.iter().enumerate() {
            let _ = writeln!(summary, "vrc player {i}: granted compute={c} storage={m} over {} rounds", args.vrc_rounds);
        }
    }

    let status = if all_converged {
        Status::Ok
    } else {
        Status::NotConverged(format!("best-response iteration hit max_iterations = {}", cfg.max_iterations()))
    };
    Ok(Report {
        files,
        summary,
        status,
        seed: (args.restarts > 0).then_some(args.seed),
        config_hash: loaded.hash,
    })
}

pub fn steady_state(args: &SteadyStateArgs) -> Result<Report, Failure> {
    let loaded = load(&args.config)?;
    let model = rate_model(&loaded.config, args.local_rate, args.state_cap)?;
    let sol = analyze(&model)?;
    let m = sol.metrics.expect("analyze attaches metrics");
    let (uc, um) = utilization(&sol, &model);
    let occupancy = mean_occupancy(&sol, &model);

    let mut files = RunFiles::default();
    files.csv("states.csv", |b| write_states_csv(b, &sol, model.num_classes()))?;
    let mut metrics = vec![
        ("states".to_string(), sol.states.len() as f64),
        ("residual".to_string(), sol.residual),
        ("blocking_rate".to_string(), m.blocking_rate),
        ("dropping_rate".to_string(), m.dropping_rate),
        ("blocking_probability".to_string(), m.blocking_probability),
        ("dropping_probability".to_string(), m.dropping_probability),
        ("compute_utilization".to_string(), uc),
        ("storage_utilization".to_string(), um),
    ];
    for (k, o) in occupancy.iter().enumerate() {
        metrics.push((format!("mean_occupancy_{k}"), *o));
    }
    let rows: Vec<Vec<String>> = metrics.iter().map(|(k, v)| vec![k.clone(), format!("{v:e}")]).collect();
    files.add("metrics.csv", csv_rows(&["metric", "value"], &rows).map_err(anyhow::Error::from)?);

    let mut summary = String::new();
    for (k, v) in &metrics {
        let _ = writeln!(summary, "{k}: {v}");
    }
    Ok(Report {
        files,
        summary,
        status: Status::Ok,
        seed: None,
        config_hash: loaded.hash,
    })
}

pub fn optimize(args: &OptimizeArgs) -> Result<Report, Failure> {
    let loaded = load(&args.config)?;
    let model = rate_model(&loaded.config, args.local_rate, args.state_cap)?;
    if !(args.rbc >= 0.0) {
        return Err(Failure::Config("--rbc must be >= 0".into()));
    }
    let grid = parse_grid(&args.grid).map_err(Failure::Config)?;
    let out = optimize_reservation(&model, args.rbc, &grid)?;

    let mut files = RunFiles::default();
    files.csv("grid.csv", |b| write_grid_csv(b, &out.table))?;
    let mut summary = String::new();
    let _ = writeln!(summary, "candidates: {}", out.table.len());
    let _ = writeln!(summary, "blocking constraint: {}", args.rbc);
    let status = match &out.best {
        Some(b) => {
            let _ = writeln!(
                summary,
                "best reservation: compute_reserved={} storage_reserved={} dropping_rate={} blocking_rate={}",
                b.compute_reserved, b.storage_reserved, b.dropping_rate, b.blocking_rate
            );
            Status::Ok
        }
        None => {
            let min_rb = out.table.iter().map(|r| r.blocking_rate).fold(f64::INFINITY, f64::min);
            let _ = writeln!(summary, "infeasible: smallest blocking rate on the grid is {min_rb}");
            Status::Infeasible("no candidate satisfies the blocking constraint".into())
        }
    };
    Ok(Report {
        files,
        summary,
        status,
        seed: None,
        config_hash: loaded.hash,
    })
}

fn report_summary(summary: &mut String, r: &SimReport) {
    let est = |e: roadcloud::Estimate| format!("{} ± {}", e.mean, e.half_width);
    let _ = writeln!(summary, "replications: {} (seed {})", r.replications, r.seed);
    let _ = writeln!(summary, "blocking_rate: {}", est(r.blocking_rate));
    let _ = writeln!(summary, "dropping_rate: {}", est(r.dropping_rate));
    let _ = writeln!(summary, "blocking_probability: {}", est(r.blocking_probability));
    let _ = writeln!(summary, "dropping_probability: {}", est(r.dropping_probability));
    let _ = writeln!(summary, "compute_utilization: {}", est(r.compute_utilization));
    let _ = writeln!(summary, "storage_utilization: {}", est(r.storage_utilization));
}

pub fn simulate(args: &SimulateArgs) -> Result<Report, Failure> {
    let loaded = load(&args.config)?;
    let cfg = &loaded.config;
    let base = cfg.simulation;
    let horizon = args
        .horizon
        .or(base.map(|s| s.horizon))
        .ok_or_else(|| Failure::Config("simulation.horizon: required (config or --horizon)".into()))?;
    let seed = args.seed.or(base.map(|s| s.seed)).unwrap_or(0);
    let mut files = RunFiles::default();
    let mut summary = String::new();

    match args.mode {
        Mode::Loss => {
            let model = rate_model(cfg, args.local_rate, None)?;
            let reps = args.reps.or(base.map(|s| s.replications)).unwrap_or(30);
            // The config's warm-up only applies to the config's horizon.
            let warmup = args
                .warmup
                .or(base.filter(|_| args.horizon.is_none()).map(|s| s.warmup))
                .unwrap_or(0.1 * horizon);
            let params = LossSimParams::new(horizon, warmup, reps, seed).map_err(|e| Failure::Config(e.to_string()))?;
            let report = run_loss_sim(&model, &params);
            files.csv("sim_report.csv", |b| write_sim_report_csv(b, &report, &loaded.hash))?;
            if args.events {
                let events = loss_event_log(&model, &params);
                files.csv("events.csv", |b| write_events_csv(b, &events))?;
            }
            let _ = writeln!(summary, "mode: loss, horizon {horizon}, warm-up {warmup}");
            report_summary(&mut summary, &report);
            if args.compare {
                let rows = compare_analytic_vs_sim(&model, &params)?;
                files.csv("comparison.csv", |b| write_comparison_csv(b, &rows))?;
                for r in &rows {
                    let _ = writeln!(
                        summary,
                        "compare {}: analytic {} simulated {} ± {} within_ci={}",
                        r.metric, r.analytic, r.simulated.mean, r.simulated.half_width, r.within_ci
                    );
                }
            }
        }
        Mode::Corridor => {
            let corridor = cfg
                .corridor
                .as_ref()
                .ok_or_else(|| Failure::Config("corridor: section required for --mode corridor".into()))?;
            let model = rate_model(cfg, args.local_rate, None)?;
            let run = run_corridor_sim(corridor, cfg.corridor_vm_class, model.classes(), &cfg.capacity, horizon, seed)
                .map_err(|e| Failure::Config(e.to_string()))?;
            files.csv("sim_report.csv", |b| write_sim_report_csv(b, &run.report, &loaded.hash))?;
            if args.events {
                files.csv("events.csv", |b| write_events_csv(b, &run.events))?;
            }
            let rows: Vec<Vec<String>> = run
                .vehicles
                .iter()
                .map(|v| {
                    vec![
                        v.id.to_string(),
                        v.speed.to_string(),
                        v.entry_time.to_string(),
                        v.crossings.to_string(),
                        v.handoffs.to_string(),
                        v.migration_attempts.to_string(),
                        v.entry_blocked.to_string(),
                        v.completed.to_string(),
                    ]
                })
                .collect();
            files.add(
                "vehicles.csv",
                csv_rows(
                    &[
                        "vehicle_id",
                        "speed",
                        "entry_time",
                        "crossings",
                        "handoffs",
                        "migration_attempts",
                        "entry_blocked",
                        "completed",
                    ],
                    &rows,
                )
                .map_err(anyhow::Error::from)?,
            );
            let s = run.report.scenarios;
            let _ = writeln!(summary, "mode: corridor, horizon {horizon}, vehicles {}", run.vehicles.len());
            let _ = writeln!(summary, "entry_blocked: {}", run.entry_blocked);
            let _ = writeln!(summary, "migration_attempts: {}", run.migration_attempts);
            let _ = writeln!(summary, "migrations_dropped: {}", run.migrations_dropped);
            let _ = writeln!(summary, "inter_cloudlet: {}", s.inter_cloudlet);
            let _ = writeln!(summary, "intra_cloudlet_handoff: {}", s.intra_cloudlet_handoff);
            let _ = writeln!(summary, "to_vehicular_cloud: {}", s.to_vehicular_cloud);
            let _ = writeln!(summary, "to_central_cloud: {}", s.to_central_cloud);
            report_summary(&mut summary, &run.report);
        }
    }
    Ok(Report {
        files,
        summary,
        status: Status::Ok,
        seed: Some(seed),
        config_hash: loaded.hash,
    })
}

pub fn sweep(args: &SweepArgs) -> Result<Report, Failure> {
    let loaded = load(&args.config)?;
    let cfg = &loaded.config;
    let rates = parse_axis(&args.rates).map_err(Failure::Config)?;
    let reserve = match &args.reserve {
        Some(s) => parse_pair(s).map_err(Failure::Config)?,
        None => (cfg.capacity.compute_reserved(), cfg.capacity.storage_reserved()),
    };
    let base = rate_model(cfg, None, None)?;
    let plain = cfg.capacity.with_reservation(0.0, 0.0).map_err(|e| Failure::Config(e.to_string()))?;
    let reserved = cfg
        .capacity
        .with_reservation(reserve.0, reserve.1)
        .map_err(|e| Failure::Config(e.to_string()))?;

    let mut rows = Vec::new();
    let mut summary = String::new();
    let _ = writeln!(summary, "local_rate  R_d(no reservation)  R_d(C_r={}, M_r={})", reserve.0, reserve.1);
    let mut ordered = true;
    for &rate in &rates {
        let model = base.with_local_arrival_rate(rate).map_err(|e| Failure::Config(e.to_string()))?;
        let mut rd = [0.0; 2];
        for (j, cap) in [plain, reserved].into_iter().enumerate() {
            let m = analyze(&model.with_capacity(cap))?.metrics.expect("analyze attaches metrics");
            rd[j] = m.dropping_rate;
            rows.push(vec![
                rate.to_string(),
                cap.compute_reserved().to_string(),
                cap.storage_reserved().to_string(),
                format!("{:e}", m.blocking_rate),
                format!("{:e}", m.dropping_rate),
                format!("{:e}", m.blocking_probability),
                format!("{:e}", m.dropping_probability),
            ]);
        }
        ordered &= rd[1] < rd[0];
        let _ = writeln!(summary, "{rate}  {:e}  {:e}", rd[0], rd[1]);
    }
    let _ = writeln!(summary, "reservation lowers dropping at every rate: {ordered}");
    let mut files = RunFiles::default();
    files.add(
        "sweep.csv",
        csv_rows(
            &[
                "local_rate",
                "compute_reserved",
                "storage_reserved",
                "blocking_rate",
                "dropping_rate",
                "blocking_probability",
                "dropping_probability",
            ],
            &rows,
        )
        .map_err(anyhow::Error::from)?,
    );
    Ok(Report {
        files,
        summary,
        status: Status::Ok,
        seed: None,
        config_hash: loaded.hash,
    })
}
