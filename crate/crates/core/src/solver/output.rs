use std::io::{self, Write};

use super::diagnostics::Diagnostics;
use super::grid::Grid;
use super::state::FieldState;

pub const SNAPSHOT_HEADER: &str = "i,j,zeta1,zeta2,rho,v1,v2,v3,\
Y11,Y22,Y33,Y12,Y13,Y23,\
B11,B12,B13,B21,B22,B23,B31,B32,B33,\
H11,H22,H33,H12,H13,H23,eps";

pub const DIAGNOSTICS_HEADER: &str = "tau,mass,\
E11,E22,E33,E12,E13,E23,\
dE11,dE22,dE33,dE12,dE13,dE23,\
P11,P22,P33,P12,P13,P23,\
F11,F22,F33,F12,F13,F23,\
residual_norm,residual_relative,\
C11,C22,C33,C12,C13,C23,\
min_eig_H,min_eig_Y,\
p_x_low,p_x_high,p_y_low,p_y_high,psd_correction";

fn num(v: f64) -> String {
    format!("{v:.17e}")
}

/// One row per cell in the snapshot schema.
pub fn write_snapshot_csv<W: Write>(out: &mut W, grid: &Grid, state: &FieldState) -> io::Result<()> {
    writeln!(out, "{SNAPSHOT_HEADER}")?;
    for (k, c) in state.cells.iter().enumerate() {
        let (i, j) = grid.coords(k);
        let z = grid.centre(i, j);
        let mut vals = vec![z[0], z[1], c.rho];
        vals.extend(c.v.0);
        vals.extend(c.y.0);
        vals.extend(c.b.to_row_major());
        vals.extend(c.h.0);
        vals.push(c.eps);
        let cols: Vec<String> = vals.into_iter().map(num).collect();
        writeln!(out, "{i},{j},{}", cols.join(","))?;
    }
    Ok(())
}

/// One row per diagnostics record; wall pressures are empty where there is no wall.
pub fn write_diagnostics_csv<W: Write>(out: &mut W, records: &[Diagnostics]) -> io::Result<()> {
    writeln!(out, "{DIAGNOSTICS_HEADER}")?;
    for d in records {
        let mut cols = vec![num(d.t), num(d.mass)];
        for s in [
            &d.kinetic_energy,
            &d.energy_rate,
            &d.power,
            &d.boundary_flux,
        ] {
            cols.extend(s.0.iter().map(|v| num(*v)));
        }
        cols.push(num(d.residual.norm()));
        cols.push(num(d.residual_relative));
        cols.extend(d.collision_density.0.iter().map(|v| num(*v)));
        cols.push(num(d.min_eig_h));
        cols.push(num(d.min_eig_y));
        for p in d.wall_pressure {
            cols.push(p.map(num).unwrap_or_default());
        }
        cols.push(num(d.psd_correction));
        writeln!(out, "{}", cols.join(","))?;
    }
    Ok(())
}
