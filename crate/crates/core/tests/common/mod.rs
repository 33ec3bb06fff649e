#![allow(dead_code)]

use kinetic_continua::analytic::{example_fields, Example, ExampleParams};
use kinetic_continua::constitutive::MaterialParams;
use kinetic_continua::solver::{
    BoundarySpec, Cell, ConstraintMode, FermentBc, Grid, Inflow, Problem, SideSpec, Solver,
    SolverConfig, SourceSpec, VelocityBc,
};
use kinetic_continua::tensor::{SymTen2, Ten2, Vec3};

pub fn wall(velocity: VelocityBc) -> SideSpec {
    SideSpec::new(velocity, FermentBc::FluxFree)
}

pub fn problem(grid: Grid, params: MaterialParams, boundary: BoundarySpec) -> Problem {
    Problem {
        grid,
        params,
        boundary,
        sources: SourceSpec::default(),
        config: SolverConfig::default(),
    }
}

pub fn rel_err(a: &SymTen2, b: &SymTen2) -> f64 {
    (*a - *b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// Steady bounce: periodic along the channel, free-slip walls.
pub fn example1(n: usize, rho: f64, u: f64, v: f64) -> (Solver, SymTen2) {
    let grid = Grid::new([n, n], [1.0 / n as f64; 2]).unwrap();
    let bc = BoundarySpec::channel(wall(VelocityBc::FreeSlip), wall(VelocityBc::FreeSlip));
    let ex = example_fields(
        Example::One,
        &ExampleParams {
            rho,
            u,
            v,
            ..Default::default()
        },
    )
    .unwrap();
    let h = ex.h0;
    let s = Solver::from_fn(problem(grid, MaterialParams::default(), bc), |z| ex.at(z, 0.0)).unwrap();
    (s, h)
}

/// Uniform bounce decaying in time on a periodic box.
pub fn example2_temporal(alpha: f64, v0: f64, dt: f64) -> Solver {
    let grid = Grid::new([4, 4], [0.25, 0.25]).unwrap();
    let params = MaterialParams {
        alpha,
        ..Default::default()
    };
    let mut p = problem(grid, params, BoundarySpec::periodic());
    p.config.dt = Some(dt);
    let h = Vec3::new(0.0, v0, 0.0).outer_self();
    Solver::from_fn(p, |_| Cell {
        rho: 1.0,
        h,
        ..Default::default()
    })
    .unwrap()
}

/// Stationary decay along a channel of length `length` fed at `ζ₁ = 0`,
/// started from the exact profile.
pub fn example2_spatial(n: usize, length: f64, alpha: f64, u: f64, v0: f64) -> Solver {
    let grid = Grid::line(0, n, length).unwrap();
    let h0 = Vec3::new(0.0, v0, 0.0).outer_self();
    let inlet = SideSpec::new(
        VelocityBc::VelocityDirichlet {
            value: Vec3::new(u, 0.0, 0.0),
        },
        FermentBc::Dirichlet { value: h0 },
    )
    .with_inflow(Inflow {
        rho: 1.0,
        y: SymTen2::ZERO,
        b: Ten2::ZERO,
        eps: 0.0,
    });
    let bc = BoundarySpec {
        x_low: inlet,
        x_high: wall(VelocityBc::Outflow),
        ..BoundarySpec::periodic()
    };
    let params = MaterialParams {
        alpha,
        ..Default::default()
    };
    Solver::from_fn(problem(grid, params, bc), |z| Cell {
        rho: 1.0,
        v: Vec3::new(u, 0.0, 0.0),
        h: h0.scale((-alpha * z[0] / u).exp()),
        ..Default::default()
    })
    .unwrap()
}

/// Channel across `ζ₂ ∈ [0, δ]` with walls moving at `u_low` and `u_high`.
pub fn channel_1d(
    n: usize,
    delta: f64,
    params: MaterialParams,
    mode: ConstraintMode,
    u_low: f64,
    u_high: f64,
) -> Problem {
    let grid = Grid::line(1, n, delta).unwrap();
    let side = |u: f64| {
        wall(VelocityBc::VelocityDirichlet {
            value: Vec3::new(u, 0.0, 0.0),
        })
    };
    let mut p = problem(grid, params, BoundarySpec::channel(side(u_low), side(u_high)));
    p.config.constraint_mode = mode;
    p
}

pub fn at_rest(rho: f64) -> impl Fn([f64; 2]) -> Cell {
    move |_| Cell {
        rho,
        ..Default::default()
    }
}
