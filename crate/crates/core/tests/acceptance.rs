//! Exit criteria for the allocation game, the reservation model and the
//! simulators. Runs as a plain binary and prints one line per criterion.

mod common;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{brute_force, erlang_b, fig5_classes, OracleSite};
use roadcloud::game::{check_uniqueness, solve_nash, solve_nash_traced, utility};
use roadcloud::output::{
    write_events_csv, write_grid_csv, write_sim_report_csv, write_states_csv, write_trajectory_csv,
};
use roadcloud::reservation::{analyze, optimize_reservation};
use roadcloud::sim::{loss_event_log, run_corridor_sim, run_loss_sim, Rsu};
use roadcloud::{
    AllocationProfile, Capacity, CorridorConfig, GameConfig, LossSimParams, RateModel, VmClassSpec, VmGameParams,
};

/// Seed fixed before any run.
const SEED: u64 = 20130601;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn run(id: u32, name: &str, limit: Duration, f: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let v = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= limit;
    let pass = v.pass && in_time;
    println!(
        "criterion {id:>2} {name:<34} {} ({:.2?} / limit {:.0?}) {}{}",
        if pass { "PASS" } else { "FAIL" },
        elapsed,
        limit,
        v.detail,
        if in_time { "" } else { " [over time limit]" },
    );
    pass
}

fn sci(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ")
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

// ---------------------------------------------------------------- game

struct RandomGame {
    config: GameConfig,
    profile: AllocationProfile,
}

fn random_games() -> Vec<RandomGame> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    (0..1000)
        .map(|_| {
            let n = rng.random_range(1..=8usize);
            let cap = Capacity::unreserved(rng.random_range(10.0..1000.0), rng.random_range(10.0..1000.0)).unwrap();
            let players = (0..n)
                .map(|_| {
                    VmGameParams::new(
                        rng.random_range(0.5..50.0),
                        rng.random_range(0.5..50.0),
                        rng.random_range(0.01..2.0),
                        rng.random_range(0.01..2.0),
                    )
                    .unwrap()
                })
                .collect();
            let config = GameConfig::new(cap, players).unwrap();
            let floor = config.request_floor();
            let ic: Vec<f64> = (0..n).map(|_| rng.random_range(floor..=cap.compute_total())).collect();
            let im: Vec<f64> = (0..n).map(|_| rng.random_range(floor..=cap.storage_total())).collect();
            let profile = solve_nash(&config, &ic, &im).unwrap();
            RandomGame { config, profile }
        })
        .collect()
}

fn criterion_1(games: &[RandomGame]) -> Verdict {
    let mut worst: f64 = 0.0;
    for g in games {
        let cap = g.config.capacity();
        let sc: f64 = g.profile.shares_compute.iter().sum();
        let sm: f64 = g.profile.shares_storage.iter().sum();
        worst = worst.max(rel(sc, cap.compute_total())).max(rel(sm, cap.storage_total()));
    }
    let converged = games.iter().filter(|g| g.profile.converged).count();
    verdict(
        worst <= 1e-9,
        format!("max relative share error {worst:.2e} over {} games ({converged} converged)", games.len()),
    )
}

fn symmetric(n: usize, alpha: f64, price: f64, c: f64, m: f64) -> GameConfig {
    let p = VmGameParams::new(alpha, alpha, price, price).unwrap();
    GameConfig::new(Capacity::unreserved(c, m).unwrap(), vec![p; n]).unwrap()
}

fn criterion_2() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [2usize, 3, 5] {
        // Smallest weight that satisfies the uniqueness bound.
        let price = 1.0;
        let alpha = 4.0 * (n as f64 - 1.0) * price;
        let (c_tot, m_tot) = (100.0, 200.0);
        let cfg = symmetric(n, alpha, price, c_tot, m_tot);
        assert!(check_uniqueness(&cfg).holds);
        let nf = n as f64;
        let expect_c = alpha * (nf - 1.0) * c_tot / (nf * nf * price);
        let expect_m = alpha * (nf - 1.0) * m_tot / (nf * nf * price);
        let init_c: Vec<f64> = (0..n).map(|i| c_tot * (i + 1) as f64 / (2 * n) as f64).collect();
        let init_m: Vec<f64> = (0..n).map(|i| m_tot * (i + 1) as f64 / (2 * n) as f64).collect();
        let prof = solve_nash(&cfg, &init_c, &init_m).unwrap();
        let err = prof
            .requests_compute
            .iter()
            .map(|&c| rel(c, expect_c))
            .chain(prof.requests_storage.iter().map(|&m| rel(m, expect_m)))
            .fold(0.0, f64::max);
        let ok = prof.converged && err <= 1e-6;
        pass &= ok;
        parts.push(format!(
            "N={n}: c={:.4} vs {:.4} (rel {err:.1e})",
            prof.requests_compute[0], expect_c
        ));
    }
    verdict(pass, parts.join("; "))
}

fn fig3_config() -> GameConfig {
    // Distinct players, each at or above the uniqueness bound 4(N-1) = 8.
    let players = vec![
        VmGameParams::new(9.0, 8.0, 1.0, 1.0).unwrap(),
        VmGameParams::new(8.0, 12.0, 1.0, 1.0).unwrap(),
        VmGameParams::new(8.0, 10.0, 1.0, 1.0).unwrap(),
    ];
    GameConfig::new(Capacity::unreserved(50.0, 100.0).unwrap(), players).unwrap()
}

fn criterion_3() -> Verdict {
    let cfg = fig3_config();
    assert!(check_uniqueness(&cfg).holds);
    let base = solve_nash(&cfg, &[10.0, 5.0, 5.0], &[5.0, 15.0, 10.0]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let floor = cfg.request_floor();
    let mut spread: f64 = 0.0;
    for _ in 0..10 {
        let ic: Vec<f64> = (0..3).map(|_| rng.random_range(floor..=50.0)).collect();
        let im: Vec<f64> = (0..3).map(|_| rng.random_range(floor..=100.0)).collect();
        let p = solve_nash(&cfg, &ic, &im).unwrap();
        if !p.converged {
            return verdict(false, "a restart did not converge");
        }
        for (a, b) in p.requests_compute.iter().zip(&base.requests_compute) {
            spread = spread.max((a - b).abs());
        }
        for (a, b) in p.requests_storage.iter().zip(&base.requests_storage) {
            spread = spread.max((a - b).abs());
        }
    }
    verdict(
        base.converged && base.iterations_used <= 15 && spread <= 1e-4,
        format!(
            "{} rounds, restart spread {spread:.1e}, shares c={:.3?} m={:.3?}",
            base.iterations_used, base.shares_compute, base.shares_storage
        ),
    )
}

fn criterion_4(games: &[RandomGame]) -> Verdict {
    let mut checked = 0;
    let mut worst_gain: f64 = f64::NEG_INFINITY;
    let mut violations = 0;
    for g in games.iter().filter(|g| g.profile.converged) {
        checked += 1;
        let cfg = &g.config;
        let cap = cfg.capacity();
        let floor = cfg.request_floor();
        let rc = &g.profile.requests_compute;
        let rm = &g.profile.requests_storage;
        for i in 0..cfg.num_players() {
            let u0 = utility(i, rc, rm, cfg).unwrap();
            let tol = 1e-9 * u0.abs().max(1.0);
            for (total, is_compute) in [(cap.compute_total(), true), (cap.storage_total(), false)] {
                let mut c = rc.clone();
                let mut m = rm.clone();
                for k in 0..1000 {
                    let x = (floor + (total - floor) * k as f64 / 999.0).min(total);
                    if is_compute {
                        c[i] = x;
                    } else {
                        m[i] = x;
                    }
                    let gain = utility(i, &c, &m, cfg).unwrap() - u0;
                    worst_gain = worst_gain.max(gain / u0.abs().max(1.0));
                    if gain > tol {
                        violations += 1;
                    }
                }
            }
        }
    }
    verdict(
        violations == 0 && checked > 0,
        format!("{checked} equilibria, {violations} improving deviations, max relative gain {worst_gain:.1e}"),
    )
}

// --------------------------------------------------------- reservation

fn fig5_model(local_rate: f64, cr: f64, mr: f64) -> RateModel {
    let classes = vec![
        VmClassSpec::new(20.0, 15.0, local_rate, 2.0, 0.05, 0.1).unwrap(),
        VmClassSpec::new(10.0, 40.0, local_rate, 2.0, 0.05, 0.1).unwrap(),
    ];
    RateModel::new(classes, Capacity::new(50.0, 100.0, cr, mr).unwrap()).unwrap()
}

fn criterion_5() -> Verdict {
    let mut worst: f64 = 0.0;
    for n in [1u32, 2, 5, 10] {
        for load in [0.5, 1.0, 3.0, 8.0] {
            let class = VmClassSpec::new(1.0, 0.0, load, 1.0, 0.0, 0.0).unwrap();
            let cap = Capacity::unreserved(f64::from(n), 1.0).unwrap();
            let model = RateModel::new(vec![class], cap).unwrap();
            let m = analyze(&model).unwrap().metrics.unwrap();
            worst = worst.max((m.blocking_probability - erlang_b(n, load)).abs());
        }
    }
    verdict(worst <= 1e-10, format!("max |P_b - ErlangB| = {worst:.1e}"))
}

fn criterion_6() -> Verdict {
    let params = LossSimParams::with_default_warmup(1e4, 30, SEED).unwrap();
    let mut hits = 0;
    let mut cells = Vec::new();
    for rate in [0.1, 0.2, 0.3] {
        let model = fig5_model(rate, 0.0, 0.0);
        let sol = analyze(&model).unwrap();
        let m = sol.metrics.unwrap();
        let (util, _) = roadcloud::reservation::utilization(&sol, &model);
        let rep = run_loss_sim(&model, &params);
        for (name, analytic, est) in [
            ("P_b", m.blocking_probability, rep.blocking_probability),
            ("P_d", m.dropping_probability, rep.dropping_probability),
            ("U_c", util, rep.compute_utilization),
        ] {
            let inside = est.contains(analytic);
            hits += usize::from(inside);
            cells.push(format!(
                "{rate}/{name}:{}",
                if inside { "in" } else { "out" }
            ));
        }
    }
    verdict(hits >= 8, format!("{hits}/9 cells inside the 95% CI [{}]", cells.join(" ")))
}

fn criterion_7() -> Verdict {
    let rates = [0.1, 0.15, 0.2, 0.25, 0.3];
    let rd = |cr: f64, mr: f64| -> Vec<f64> {
        rates
            .iter()
            .map(|&r| analyze(&fig5_model(r, cr, mr)).unwrap().metrics.unwrap().dropping_rate)
            .collect()
    };
    let without = rd(0.0, 0.0);
    let with = rd(20.0, 40.0);
    let lower = with.iter().zip(&without).all(|(a, b)| a < b);
    let monotone = |v: &[f64]| v.windows(2).all(|w| w[0] <= w[1]);
    verdict(
        lower && monotone(&without) && monotone(&with),
        format!("R_d without [{}] with [{}]", sci(&without), sci(&with)),
    )
}

fn fig5_grid() -> Vec<(f64, f64)> {
    let mut grid = Vec::new();
    for cr in [0.0, 5.0, 10.0, 15.0, 20.0] {
        for mr in [0.0, 10.0, 20.0, 30.0, 40.0] {
            grid.push((cr, mr));
        }
    }
    grid
}

fn criterion_8() -> Verdict {
    let rate = 0.2;
    let model = fig5_model(rate, 0.0, 0.0);
    let classes = fig5_classes(rate);
    let site = |cr, mr| OracleSite {
        c_total: 50.0,
        m_total: 100.0,
        c_reserved: cr,
        m_reserved: mr,
    };
    let rbc = 2.0 * brute_force(site(0.0, 0.0), &classes).blocking_rate;
    let grid = fig5_grid();
    let out = optimize_reservation(&model, rbc, &grid).unwrap();

    let oracle: Vec<_> = grid.iter().map(|&(cr, mr)| brute_force(site(cr, mr), &classes)).collect();
    let mut worst: f64 = 0.0;
    for (row, o) in out.table.iter().zip(&oracle) {
        worst = worst.max(rel(row.blocking_rate, o.blocking_rate)).max(rel(row.dropping_rate, o.dropping_rate));
    }
    let mut best: Option<usize> = None;
    for (i, o) in oracle.iter().enumerate() {
        if o.blocking_rate <= rbc && best.is_none_or(|b| o.dropping_rate < oracle[b].dropping_rate) {
            best = Some(i);
        }
    }
    let Some(b) = best else {
        return verdict(false, "oracle found no feasible candidate");
    };
    let Some(chosen) = out.best else {
        return verdict(false, "optimizer reported infeasible");
    };
    let same = (chosen.compute_reserved, chosen.storage_reserved) == grid[b];
    verdict(
        worst <= 1e-9 && same && chosen.blocking_rate <= rbc,
        format!(
            "table rel err {worst:.1e}; best (C_r, M_r) = ({}, {}) R_d={:.3e} R_b={:.3e} <= {:.3e}",
            chosen.compute_reserved, chosen.storage_reserved, chosen.dropping_rate, chosen.blocking_rate, rbc
        ),
    )
}

// ------------------------------------------------------------ corridor

fn corridor(cloudlets: [usize; 5]) -> CorridorConfig {
    let rsus = (0..5)
        .map(|i| Rsu {
            start: 500.0 * i as f64,
            end: 500.0 * (i + 1) as f64,
            cloudlet: cloudlets[i],
        })
        .collect();
    CorridorConfig::new(rsus, 2500.0, 0.1, (25.0, 25.0), 0.5).unwrap()
}

fn corridor_class() -> Vec<VmClassSpec> {
    vec![VmClassSpec::new(20.0, 15.0, 0.0, 1.0, 0.0, 1.0).unwrap()]
}

fn criterion_9() -> Verdict {
    let cap = Capacity::new(50.0, 100.0, 20.0, 40.0).unwrap();
    let split = run_corridor_sim(&corridor([0, 1, 2, 3, 4]), 0, &corridor_class(), &cap, 5000.0, SEED).unwrap();
    let shared = run_corridor_sim(&corridor([0; 5]), 0, &corridor_class(), &cap, 5000.0, SEED).unwrap();
    let done_split: Vec<_> = split.vehicles.iter().filter(|v| v.completed).collect();
    let done_shared: Vec<_> = shared.vehicles.iter().filter(|v| v.completed).collect();
    let ok_split = !done_split.is_empty() && done_split.iter().all(|v| v.migration_attempts == 4 && v.handoffs == 0);
    let ok_shared =
        !done_shared.is_empty() && done_shared.iter().all(|v| v.migration_attempts == 0 && v.handoffs == 4);
    verdict(
        ok_split && ok_shared && shared.migration_attempts == 0,
        format!(
            "{} traversals over 5 cloudlets, {} over one shared cloudlet",
            done_split.len(),
            done_shared.len()
        ),
    )
}

// --------------------------------------------------------- determinism

fn csv_bundle() -> Vec<Vec<u8>> {
    let mut files = Vec::new();
    let mut buf = Vec::new();
    let (_, trace) = solve_nash_traced(&fig3_config(), &[10.0, 5.0, 5.0], &[5.0, 15.0, 10.0]).unwrap();
    write_trajectory_csv(&mut buf, &trace).unwrap();
    files.push(std::mem::take(&mut buf));

    let model = fig5_model(0.2, 20.0, 40.0);
    write_states_csv(&mut buf, &analyze(&model).unwrap(), 2).unwrap();
    files.push(std::mem::take(&mut buf));

    let out = optimize_reservation(&fig5_model(0.2, 0.0, 0.0), 1e-2, &fig5_grid()).unwrap();
    write_grid_csv(&mut buf, &out.table).unwrap();
    files.push(std::mem::take(&mut buf));

    let params = LossSimParams::with_default_warmup(1e4, 30, SEED).unwrap();
    write_sim_report_csv(&mut buf, &run_loss_sim(&model, &params), "fig5").unwrap();
    files.push(std::mem::take(&mut buf));
    write_events_csv(&mut buf, &loss_event_log(&model, &params)).unwrap();
    files.push(std::mem::take(&mut buf));

    let cap = Capacity::new(50.0, 100.0, 20.0, 40.0).unwrap();
    let run = run_corridor_sim(&corridor([0, 0, 1, 2, 2]), 0, &corridor_class(), &cap, 5000.0, SEED).unwrap();
    write_sim_report_csv(&mut buf, &run.report, "corridor").unwrap();
    files.push(std::mem::take(&mut buf));
    write_events_csv(&mut buf, &run.events).unwrap();
    files.push(std::mem::take(&mut buf));
    files
}

fn criterion_10() -> Verdict {
    let a = csv_bundle();
    let b = csv_bundle();
    let same = a == b;
    let bytes: usize = a.iter().map(Vec::len).sum();
    verdict(same, format!("{} CSV files, {bytes} bytes, identical: {same}", a.len()))
}

fn main() {
    let secs = Duration::from_secs;
    let mut results = Vec::new();
    let mut games = Vec::new();
    results.push(run(1, "share conservation", secs(10), || {
        games = random_games();
        criterion_1(&games)
    }));
    results.push(run(2, "symmetric closed-form equilibrium", secs(10), criterion_2));
    results.push(run(3, "three-VM convergence", secs(1), criterion_3));
    results.push(run(4, "no profitable deviation", secs(60), || criterion_4(&games)));
    results.push(run(5, "Erlang-B equivalence", secs(1), criterion_5));
    results.push(run(6, "simulation vs Markov chain", secs(300), criterion_6));
    results.push(run(7, "reservation lowers dropping", secs(60), criterion_7));
    results.push(run(8, "exhaustive optimizer", secs(120), criterion_8));
    results.push(run(9, "corridor accounting", secs(10), criterion_9));
    results.push(run(10, "determinism", secs(600), criterion_10));
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
