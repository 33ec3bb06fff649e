//! Output files with a provenance header.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::CliError;

/// Header written at the top of every output file.
#[derive(Clone, Debug)]
pub struct Provenance {
    pub config_sha256: String,
    pub seed: u64,
}

impl Provenance {
    pub fn new(config: &[u8], seed: u64) -> Self {
        let digest = Sha256::digest(config);
        Provenance {
            config_sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
            seed,
        }
    }

    pub fn write<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "# kinetic {}", env!("CARGO_PKG_VERSION"))?;
        writeln!(out, "# config_sha256 {}", self.config_sha256)?;
        writeln!(out, "# seed {}", self.seed)
    }
}

pub fn num(v: f64) -> String {
    format!("{v:.17e}")
}

pub fn nums(vs: &[f64]) -> String {
    vs.iter().map(|v| num(*v)).collect::<Vec<_>>().join(",")
}

/// Where a command writes: files in a directory, or standard output.
pub enum Sink {
    Dir(PathBuf),
    Stdout,
}

impl Sink {
    pub fn new(dir: Option<&Path>) -> Result<Self, CliError> {
        match dir {
            Some(d) => {
                fs::create_dir_all(d)
                    .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", d.display())))?;
                Ok(Sink::Dir(d.to_path_buf()))
            }
            None => Ok(Sink::Stdout),
        }
    }

    /// Writes `body` under the provenance header to `name` (or stdout).
    pub fn emit(
        &self,
        name: &str,
        prov: &Provenance,
        body: impl FnOnce(&mut Vec<u8>) -> io::Result<()>,
    ) -> Result<(), CliError> {
        let mut buf = Vec::new();
        prov.write(&mut buf).and_then(|_| body(&mut buf)).map_err(io_err)?;
        match self {
            Sink::Dir(d) => {
                let path = d.join(name);
                fs::write(&path, buf)
                    .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
            }
            Sink::Stdout => io::stdout().write_all(&buf).map_err(io_err),
        }
    }
}

fn io_err(e: io::Error) -> CliError {
    CliError::Runtime(format!("output: {e}"))
}
