//! `temperance moments | fit | tabulate`.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Subcommand};
use kinetic_continua::temperance::{
    fit_temperance, moments_with, order_tensor, tabulate, FitOptions, Integration, MomentErrors,
    SpeedDistribution, Temperance,
};
use kinetic_continua::{Exec, SymTen2};

use crate::out::{nums, Provenance, Sink};
use crate::{CliError, Common};

#[derive(Subcommand, Debug)]
pub enum TemperanceCommand {
    /// Moments and order tensor of a distribution.
    Moments {
        /// Uniform directions at this speed.
        #[arg(long, conflicts_with = "theta")]
        sphere: Option<f64>,
        /// Canonical density of this temperance, `11,22,33,12,13,23`.
        #[arg(long, allow_hyphen_values = true)]
        theta: Option<String>,
        #[command(flatten)]
        mc: MonteCarlo,
    },
    /// Temperance whose canonical density has the given `H`.
    Fit {
        /// Target ferment `11,22,33,12,13,23`.
        #[arg(long, allow_hyphen_values = true)]
        h: String,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// `H(Θ)`, `Q` and `θ₀` for each row of a file of temperances.
    Tabulate {
        /// Rows of six comma- or space-separated components; `#` starts a comment.
        #[arg(long)]
        thetas: PathBuf,
        #[command(flatten)]
        mc: MonteCarlo,
    },
}

#[derive(Args, Debug)]
pub struct MonteCarlo {
    /// Monte Carlo sample count; quadrature when omitted.
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long, default_value_t = 64)]
    blocks: usize,
}

impl MonteCarlo {
    fn integration(&self, seed: u64) -> Integration {
        match self.samples {
            Some(samples) => Integration::MonteCarlo {
                samples,
                seed,
                blocks: self.blocks,
            },
            None => Integration::default(),
        }
    }
}

fn parse_sym(text: &str, what: &str) -> Result<SymTen2, CliError> {
    let c: Vec<f64> = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Config(format!("{what}: {e}")))?;
    let arr: [f64; 6] = c
        .try_into()
        .map_err(|c: Vec<f64>| CliError::Config(format!("{what}: {} components, expected 6", c.len())))?;
    Ok(SymTen2(arr))
}

const SYM: [&str; 6] = ["11", "22", "33", "12", "13", "23"];

fn cols(prefix: &str) -> String {
    SYM.iter().map(|s| format!("{prefix}{s}")).collect::<Vec<_>>().join(",")
}

fn err_cols(e: Option<MomentErrors>) -> String {
    match e {
        Some(e) => format!("{},{}", nums(&e.h.0), nums(&e.q.0)),
        None => [""; 12].join(","),
    }
}

fn tem_err(e: kinetic_continua::temperance::TemperanceError) -> CliError {
    use kinetic_continua::temperance::TemperanceError as E;
    match e {
        E::NoConvergence { .. } | E::QuadratureFailure { .. } => CliError::Runtime(e.to_string()),
        _ => CliError::Config(e.to_string()),
    }
}

pub fn cmd_temperance(cmd: TemperanceCommand, common: &Common, exec: Exec) -> Result<(), CliError> {
    let sink = Sink::new(common.out.as_deref())?;
    let seed = common.seed.unwrap_or(0);
    match cmd {
        TemperanceCommand::Moments { sphere, theta, mc } => {
            let prov = Provenance::new(format!("moments {sphere:?} {theta:?} {mc:?}").as_bytes(), seed);
            let dist = match (sphere, theta) {
                (Some(v), None) => SpeedDistribution::uniform_sphere(v),
                (None, Some(t)) => {
                    let theta = parse_sym(&t, "--theta")?;
                    SpeedDistribution::Canonical(Temperance::new(theta).map_err(tem_err)?)
                }
                _ => return Err(CliError::Config("give one of --sphere or --theta".into())),
            };
            let m = moments_with(&dist, &mc.integration(seed), exec).map_err(tem_err)?;
            let q = order_tensor(&m.h).map_err(tem_err)?;
            sink.emit("moments.csv", &prov, |w| {
                writeln!(w, "norm,m1,m2,m3,{},{},{},{}", cols("H"), cols("Q"), cols("se_H"), cols("se_Q"))?;
                let mut row = vec![m.norm];
                row.extend(m.mean.0);
                row.extend(m.h.0);
                row.extend(q.0);
                writeln!(w, "{},{}", nums(&row), err_cols(m.std_err))
            })
        }
        TemperanceCommand::Fit { h, tol } => {
            let prov = Provenance::new(format!("fit {h} {tol}").as_bytes(), seed);
            let target = parse_sym(&h, "--h")?;
            let options = FitOptions {
                tolerance: tol,
                ..Default::default()
            };
            let fit = fit_temperance(&target, &options).map_err(tem_err)?;
            let q = order_tensor(&fit.h).map_err(tem_err)?;
            sink.emit("fit.csv", &prov, |w| {
                writeln!(w, "{},{},{},theta0,residual,iterations", cols("Theta"), cols("H"), cols("Q"))?;
                let mut row = fit.temperance.theta.0.to_vec();
                row.extend(fit.h.0);
                row.extend(q.0);
                row.push(fit.temperance.theta0);
                row.push(fit.residual);
                writeln!(w, "{},{}", nums(&row), fit.iterations)
            })
        }
        TemperanceCommand::Tabulate { thetas, mc } => {
            let text = std::fs::read(&thetas)
                .map_err(|e| CliError::Config(format!("{}: {e}", thetas.display())))?;
            let mut hashed = text.clone();
            hashed.extend(format!("{mc:?}").bytes());
            let prov = Provenance::new(&hashed, seed);
            let text = String::from_utf8_lossy(&text);
            let list: Vec<SymTen2> = text
                .lines()
                .enumerate()
                .map(|(n, l)| (n, l.split('#').next().unwrap_or("").trim()))
                .filter(|(_, l)| !l.is_empty())
                .map(|(n, l)| parse_sym(l, &format!("{} line {}", thetas.display(), n + 1)))
                .collect::<Result<_, _>>()?;
            let rows = tabulate(&list, &mc.integration(seed)).map_err(tem_err)?;
            sink.emit("tabulate.csv", &prov, |w| {
                writeln!(
                    w,
                    "{},{},{},theta0,{},{}",
                    cols("Theta"),
                    cols("H"),
                    cols("Q"),
                    cols("se_H"),
                    cols("se_Q")
                )?;
                for r in &rows {
                    let mut row = r.theta.0.to_vec();
                    row.extend(r.h.0);
                    row.extend(r.q.0);
                    row.push(r.theta0);
                    writeln!(w, "{},{}", nums(&row), err_cols(r.std_err))?;
                }
                Ok(())
            })
        }
    }
}
