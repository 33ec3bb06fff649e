//! `run` and `particles`.

use std::io::Write;
use std::path::Path;

use kinetic_continua::analytic::{example_fields, Example};
use kinetic_continua::particles::{
    balance_residuals, conservation_check, energy_theorem_residual, random_particles, rigid_ring,
    write_trajectory_csv, Particle, ParticleSystem, Sample,
};
use kinetic_continua::solver::{
    write_diagnostics_csv, write_snapshot_csv, BoundarySpec, Cell, FieldState, Grid, Problem,
    Solver, SolverError, SNAPSHOT_HEADER,
};
use kinetic_continua::{Exec, SymTen2, Ten2, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{self, InitialSpec, ParticleConfig, ParticleSpec, ScenarioConfig};
use crate::out::{num, nums, Provenance, Sink};
use crate::{CliError, Common};

fn config_err(e: SolverError) -> CliError {
    CliError::Config(e.to_string())
}

fn output_dir<'a>(common: &'a Common, cfg: Option<&'a Path>, fallback: &'a Path) -> &'a Path {
    common.out.as_deref().or(cfg).unwrap_or(fallback)
}

pub fn cmd_run(
    path: &Path,
    common: &Common,
    snapshot_every: Option<f64>,
    exec: Exec,
) -> Result<(), CliError> {
    let (mut cfg, bytes): (ScenarioConfig, _) = config::load(path)?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(s) = snapshot_every {
        cfg.solver.snapshot_every = Some(s);
    }
    let grid = Grid::new(
        cfg.grid.n,
        [
            cfg.grid.length[0] / cfg.grid.n[0].max(1) as f64,
            cfg.grid.length[1] / cfg.grid.n[1].max(1) as f64,
        ],
    )
    .map_err(config_err)?;
    let boundary: BoundarySpec = cfg.boundary.into();
    let problem = Problem {
        grid,
        params: cfg.material,
        boundary,
        sources: cfg.sources.clone(),
        config: cfg.solver.clone(),
    };
    problem.validate().map_err(config_err)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let initial = initial_state(&cfg.initial, &grid, &boundary, cfg.seed, base)?;
    let mut solver = Solver::new(problem, initial).map_err(config_err)?.with_exec(exec);

    let fallback = Path::new("out").join(&cfg.name);
    let sink = Sink::new(Some(output_dir(common, cfg.output.dir.as_deref(), &fallback)))?;
    let prov = Provenance::new(&bytes, cfg.seed);
    let result = solver.run();
    let output = match result {
        Ok(o) => o,
        Err(e) => return Err(CliError::Runtime(e.to_string())),
    };
    for (k, (t, state)) in output.snapshots.iter().enumerate() {
        sink.emit(&format!("snapshot_{k:05}.csv"), &prov, |w| {
            writeln!(w, "# tau {}", num(*t))?;
            write_snapshot_csv(w, &grid, state)
        })?;
    }
    sink.emit("diagnostics.csv", &prov, |w| {
        write_diagnostics_csv(w, &output.diagnostics)
    })?;
    let last = output.diagnostics.last().expect("run records a final diagnostics row");
    println!(
        "{}: {} steps to tau = {}, {} snapshots, max relative PSD correction {:e}, energy residual {:e}",
        cfg.name,
        output.steps,
        solver.time(),
        output.snapshots.len(),
        output.max_psd_correction,
        last.residual_relative
    );
    Ok(())
}

fn initial_state(
    spec: &InitialSpec,
    grid: &Grid,
    boundary: &BoundarySpec,
    seed: u64,
    base: &Path,
) -> Result<FieldState, CliError> {
    match spec {
        InitialSpec::Uniform {
            rho,
            v,
            y,
            b,
            h,
            eps,
            noise,
        } => {
            let cell = Cell {
                rho: *rho,
                v: *v,
                y: *y,
                b: *b,
                h: *h,
                eps: *eps,
            };
            let mut state = FieldState::uniform(grid, boundary, cell);
            if *noise != 0.0 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for c in &mut state.cells {
                    c.v.0[0] += noise * rng.random_range(-1.0..1.0);
                    c.v.0[1] += noise * rng.random_range(-1.0..1.0);
                }
            }
            Ok(state)
        }
        InitialSpec::Example { which, params, tau } => {
            let which: Example = which
                .parse()
                .map_err(|e: String| CliError::Config(format!("initial.which: {e}")))?;
            let ex = example_fields(which, params)
                .map_err(|e| CliError::Config(format!("initial.params: {e}")))?;
            Ok(ex.sample(grid, boundary, *tau))
        }
        InitialSpec::File { path } => {
            let path = base.join(path);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::Config(format!("initial.path {}: {e}", path.display())))?;
            read_snapshot(&text, grid, boundary)
                .map_err(|e| CliError::Config(format!("initial.path {}: {e}", path.display())))
        }
    }
}

/// Parses a snapshot CSV written by `run` back into a state.
pub fn read_snapshot(text: &str, grid: &Grid, boundary: &BoundarySpec) -> Result<FieldState, String> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.starts_with('#') && !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == SNAPSHOT_HEADER => {}
        _ => return Err("missing snapshot header row".into()),
    }
    let mut cells = vec![None; grid.len()];
    for (lineno, line) in lines {
        let row = |m: String| format!("line {}: {m}", lineno + 1);
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 30 {
            return Err(row(format!("{} columns, expected 30", cols.len())));
        }
        let i: usize = cols[0].trim().parse().map_err(|e| row(format!("i: {e}")))?;
        let j: usize = cols[1].trim().parse().map_err(|e| row(format!("j: {e}")))?;
        if i >= grid.n[0] || j >= grid.n[1] {
            return Err(row(format!("cell ({i}, {j}) outside the grid")));
        }
        let v: Vec<f64> = cols[4..]
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| row(e.to_string()))?;
        let arr = |a: usize, n: usize| -> Vec<f64> { v[a..a + n].to_vec() };
        cells[i + grid.n[0] * j] = Some(Cell {
            rho: v[0],
            v: Vec3(arr(1, 3).try_into().unwrap()),
            y: SymTen2(arr(4, 6).try_into().unwrap()),
            b: Ten2::from_row_major(arr(10, 9).try_into().unwrap()),
            h: SymTen2(arr(19, 6).try_into().unwrap()),
            eps: v[25],
        });
    }
    let cells: Vec<Cell> = cells
        .into_iter()
        .enumerate()
        .map(|(k, c)| c.ok_or_else(|| format!("cell {:?} missing", grid.coords(k))))
        .collect::<Result<_, _>>()?;
    let mut state = FieldState::from_fn(grid, boundary, |_| Cell::default());
    // Wall ferment not fixed by the boundary takes the adjacent interior value.
    for side in 0..4 {
        if boundary.wall_ferment_init(grid, side) != Some(None) {
            continue;
        }
        let axis = side / 2;
        let other = 1 - axis;
        for m in 0..state.walls[side].len() {
            let mut ij = [0; 2];
            ij[axis] = if side % 2 == 1 { grid.n[axis] - 1 } else { 0 };
            ij[other] = m;
            state.walls[side][m] = cells[ij[0] + grid.n[0] * ij[1]].h;
        }
    }
    state.cells = cells;
    Ok(state)
}

fn build_particles(spec: &ParticleSpec, seed: u64) -> Vec<Particle> {
    match spec {
        ParticleSpec::Random { count, speed } => random_particles(*count, seed, *speed),
        ParticleSpec::Ring {
            count,
            radius,
            omega,
        } => rigid_ring(*count, *radius, *omega),
        ParticleSpec::CounterStreaming { speed } => [1.0, -1.0]
            .iter()
            .map(|s| Particle {
                mass: 1.0,
                position: Vec3::ZERO,
                velocity: Vec3::new(0.0, s * speed, 0.0),
            })
            .collect(),
        ParticleSpec::List { items } => items.clone(),
    }
}

/// Max residual norms of one run.
struct Report {
    rows: [f64; 4],
    energy: f64,
    remark: f64,
    conservation: Option<f64>,
}

fn trajectory(cfg: &ParticleConfig, dt: f64, steps: usize) -> Result<Vec<Sample>, CliError> {
    let particles = build_particles(&cfg.particles, cfg.seed);
    let mut sys = ParticleSystem::new(particles, Box::new(cfg.force.clone()))
        .map_err(|e| CliError::Config(e.to_string()))?;
    sys.run(dt, steps, 1).map_err(|e| CliError::Runtime(e.to_string()))
}

fn report(traj: &[Sample], dt: f64) -> Result<Report, CliError> {
    let rt = |e: kinetic_continua::particles::ParticleError| CliError::Runtime(e.to_string());
    let res = balance_residuals(traj, dt).map_err(rt)?;
    let energy = energy_theorem_residual(traj, dt).map_err(rt)?;
    let remark = traj
        .iter()
        .map(|s| {
            let a = &s.agg;
            let byb = a.y.congruence(&a.b);
            (a.h_tilde - byb - a.h).norm() / a.h_tilde.norm().max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max);
    Ok(Report {
        rows: res.max_norms(),
        energy: energy.iter().map(|e| e.norm()).fold(0.0, f64::max),
        remark,
        conservation: conservation_check(traj, None)
            .ok()
            .map(|c| c.max_relative_drift),
    })
}

pub fn cmd_particles(path: &Path, common: &Common) -> Result<(), CliError> {
    let (mut cfg, bytes): (ParticleConfig, _) = config::load(path)?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
        return Err(CliError::Config(format!("dt = {} must be positive", cfg.dt)));
    }
    if cfg.steps < 2 {
        return Err(CliError::Config("steps must be at least 2".into()));
    }
    let traj = trajectory(&cfg, cfg.dt, cfg.steps)?;
    let rep = report(&traj, cfg.dt)?;
    let half = if cfg.dt_halving {
        let t = trajectory(&cfg, 0.5 * cfg.dt, 2 * cfg.steps)?;
        Some(report(&t, 0.5 * cfg.dt)?)
    } else {
        None
    };

    let fallback = Path::new("out").join(&cfg.name);
    let sink = Sink::new(Some(output_dir(common, cfg.output.dir.as_deref(), &fallback)))?;
    let prov = Provenance::new(&bytes, cfg.seed);
    let every = cfg.sample_every.max(1);
    let res = balance_residuals(&traj, cfg.dt).map_err(|e| CliError::Runtime(e.to_string()))?;
    let energy =
        energy_theorem_residual(&traj, cfg.dt).map_err(|e| CliError::Runtime(e.to_string()))?;
    // Thin the trajectory and its interior residual series together.
    let keep: Vec<usize> = (0..traj.len()).filter(|n| n % every == 0).collect();
    let thin_traj: Vec<Sample> = keep.iter().map(|&n| traj[n]).collect();
    sink.emit("trajectory.csv", &prov, |w| {
        if every == 1 {
            write_trajectory_csv(w, &traj, Some((&res, &energy)))
        } else {
            write_trajectory_csv(w, &thin_traj, None)
        }
    })?;
    sink.emit("residuals.csv", &prov, |w| {
        writeln!(w, "quantity,dt,dt_half,ratio")?;
        let mut line = |name: &str, a: f64, b: Option<f64>| match b {
            Some(b) => writeln!(w, "{name},{},{},{}", num(a), num(b), num(a / b)),
            None => writeln!(w, "{name},{},,", num(a)),
        };
        let names = ["momentum", "moment_of_momentum", "inertia", "ferment"];
        for (k, name) in names.iter().enumerate() {
            line(name, rep.rows[k], half.as_ref().map(|h| h.rows[k]))?;
        }
        line("energy_theorem", rep.energy, half.as_ref().map(|h| h.energy))?;
        line("remark_identity_relative", rep.remark, half.as_ref().map(|h| h.remark))?;
        if let Some(c) = rep.conservation {
            line(
                "conservation_relative_drift",
                c,
                half.as_ref().and_then(|h| h.conservation),
            )?;
        }
        Ok(())
    })?;
    println!(
        "{}: {} steps, max residuals momentum {:e}, moment {:e}, inertia {:e}, ferment {:e}, energy {:e}",
        cfg.name, cfg.steps, rep.rows[0], rep.rows[1], rep.rows[2], rep.rows[3], rep.energy
    );
    if let Some(h) = &half {
        println!(
            "  dt halving ratios: {}",
            nums(&[
                rep.rows[0] / h.rows[0],
                rep.rows[1] / h.rows[1],
                rep.rows[2] / h.rows[2],
                rep.rows[3] / h.rows[3],
                rep.energy / h.energy,
            ])
        );
    }
    Ok(())
}
