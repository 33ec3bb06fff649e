//! `analytic stationary | dispersion | example`.

use std::io::Write;

use clap::{Subcommand, ValueEnum};
use kinetic_continua::analytic::{
    algebraic_residual, dispersion_with, example4_alpha_zero, example_fields, printed_h11,
    stationary_shear, DispersionConvention, Example, ExampleParams,
};
use kinetic_continua::solver::{write_snapshot_csv, BoundarySpec, Grid};

use crate::out::{num, Provenance, Sink};
use crate::{CliError, Common};

#[derive(Subcommand, Debug)]
pub enum AnalyticCommand {
    /// Stationary homogeneous shear with velocity gradient `L₁₂`.
    Stationary {
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
        #[arg(long, default_value_t = 0.0)]
        eta3: f64,
        #[arg(long, default_value_t = 1.0)]
        l12: f64,
    },
    /// Roots of the wall-loss dispersion relation.
    Dispersion {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        u: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        gamma_hat: f64,
        #[arg(long, value_enum, default_value_t = Convention::Printed)]
        convention: Convention,
    },
    /// Sample a closed-form example flow in the snapshot schema.
    Example {
        /// 1, 2_spatial, 2_temporal, 3 or 4.
        which: String,
        /// Cells per direction.
        #[arg(long, default_value_t = 32)]
        n: usize,
        /// Extent along the channel.
        #[arg(long, default_value_t = 1.0)]
        length: f64,
        #[arg(long, default_value_t = 0.0)]
        tau: f64,
        /// Example parameter as `key=value` (rho, u, v, alpha, beta, gamma,
        /// gamma_hat, eta3, delta, chi0, convention).
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Convention {
    Printed,
    Diffusive,
}

impl From<Convention> for DispersionConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Printed => DispersionConvention::Printed,
            Convention::Diffusive => DispersionConvention::Diffusive,
        }
    }
}

/// Builds example parameters from `key=value` pairs through the TOML parser,
/// so unknown keys and bad values are reported by name.
fn example_params(pairs: &[String]) -> Result<ExampleParams, CliError> {
    let mut text = String::new();
    for p in pairs {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--param `{p}` is not KEY=VALUE")))?;
        let v = v.trim();
        let quoted = if v.parse::<f64>().is_ok() { v.to_string() } else { format!("\"{v}\"") };
        text.push_str(&format!("{} = {quoted}\n", k.trim()));
    }
    toml::from_str(&text).map_err(|e| CliError::Config(format!("--param: {e}")))
}

pub fn cmd_analytic(cmd: AnalyticCommand, common: &Common) -> Result<(), CliError> {
    let sink = Sink::new(common.out.as_deref())?;
    let seed = common.seed.unwrap_or(0);
    let prov = Provenance::new(format!("{cmd:?}").as_bytes(), seed);
    let bad = |e: kinetic_continua::analytic::AnalyticError| CliError::Config(e.to_string());
    match cmd {
        AnalyticCommand::Stationary {
            rho,
            alpha,
            gamma,
            eta3,
            l12,
        } => {
            if alpha == 0.0 {
                let e = example4_alpha_zero(rho, gamma, l12, 1.0);
                return sink.emit("stationary.csv", &prov, |w| {
                    writeln!(w, "# alpha = 0: H12 = gamma L12 / (8 rho); the (2,2) balance leaves gamma L12^2 / 4")?;
                    writeln!(w, "quantity,value,form")?;
                    writeln!(w, "H12,{},derived", num(e.h12))?;
                    writeln!(w, "H12,{},printed", num(e.h12_printed))?;
                    writeln!(w, "residual_22,{},derived", num(e.residual_22))?;
                    writeln!(w, "consistent,{},derived", e.consistent)
                });
            }
            let s = stationary_shear(rho, alpha, gamma, eta3, l12).map_err(bad)?;
            let mut printed = s.candidate();
            printed.h.set(0, 0, printed_h11(rho, alpha, gamma, l12));
            let extra = s.extra_stress();
            sink.emit("stationary.csv", &prov, |w| {
                writeln!(w, "quantity,value,form")?;
                writeln!(w, "H11,{},derived", num(s.h.get(0, 0)))?;
                writeln!(w, "H11,{},printed", num(printed.h.get(0, 0)))?;
                writeln!(w, "H22,{},printed", num(s.h.get(1, 1)))?;
                writeln!(w, "H12,{},printed", num(s.h.get(0, 1)))?;
                writeln!(w, "H33,{},derived", num(s.h.get(2, 2)))?;
                writeln!(w, "B12,{},derived", num(s.b12))?;
                writeln!(w, "extra_stress_11,{},derived", num(extra.get(0, 0)))?;
                writeln!(w, "extra_stress_22,{},derived", num(extra.get(1, 1)))?;
                writeln!(w, "extra_stress_12,{},derived", num(extra.get(0, 1)))?;
                writeln!(w, "algebraic_residual,{},derived", num(algebraic_residual(&s.candidate())))?;
                writeln!(w, "algebraic_residual,{},printed", num(algebraic_residual(&printed)))
            })
        }
        AnalyticCommand::Dispersion {
            beta,
            u,
            alpha,
            gamma_hat,
            convention,
        } => {
            if !(beta > 0.0) || !(u >= 0.0) {
                return Err(CliError::Config("dispersion needs beta > 0 and u >= 0".into()));
            }
            let d = dispersion_with(convention.into(), beta, u, alpha, gamma_hat);
            sink.emit("dispersion.csv", &prov, |w| {
                writeln!(w, "# convention {:?}, constant term {}", d.convention, num(d.constant_term()))?;
                writeln!(w, "# regime {:?}, alpha in (gamma_hat, gamma_hat + u^2/4beta): {}", d.regime, d.alpha_in_interval)?;
                writeln!(w, "root,residual")?;
                for r in &d.roots {
                    writeln!(w, "{},{}", num(*r), num(d.residual(*r)))?;
                }
                Ok(())
            })
        }
        AnalyticCommand::Example {
            which,
            n,
            length,
            tau,
            params,
        } => {
            let which: Example = which.parse().map_err(CliError::Config)?;
            let p = example_params(&params)?;
            let ex = example_fields(which, &p).map_err(bad)?;
            let grid = Grid::new([n, n], [length / n as f64, p.delta / n as f64])
                .map_err(|e| CliError::Config(e.to_string()))?;
            let state = ex.sample(&grid, &BoundarySpec::periodic(), tau);
            sink.emit("example.csv", &prov, |w| {
                writeln!(w, "# example {which:?} at tau {}", num(tau))?;
                writeln!(w, "# k_space {} k_time {}", num(ex.k_space), num(ex.k_time))?;
                if let Some(p) = ex.wall_pressure {
                    writeln!(w, "# wall_pressure {}", num(p))?;
                }
                if let Some(s) = ex.extra_stress {
                    let c: Vec<String> = s.0.iter().map(|v| num(*v)).collect();
                    writeln!(w, "# extra_stress {}", c.join(","))?;
                }
                write_snapshot_csv(w, &grid, &state)
            })
        }
    }
}
