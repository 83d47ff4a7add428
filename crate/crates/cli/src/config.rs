//! Strict TOML run configuration.
//!
//! ```toml
//! bc = "quasiperiodic"     # dirichlet, dirichlet_left, dirichlet_right, free,
//! alpha = 1.0              # periodic, antiperiodic, quasiperiodic, line
//! N = 2
//! n_cells = 40
//! k = 6
//! grids = [40, 80]
//! seed = 0
//! scenarios = ["nondegeneracy_nonlocal"]
//!
//! [potential]
//! kind = "delta"
//! x0 = 0.5
//! strength = -10.0
//!
//! [interaction]
//! kind = "delta_contact"
//! g = 5.0
//!
//! [output]
//! path = "report.json"
//! format = "json"
//!
//! [solver]
//! deg_tol = 1e-6
//! basis_cap = 100000
//! ```

use serde::Deserialize;

use fermigate_core::basis::{BoundarySpec, PotentialSpec};
use fermigate_core::manybody::{InteractionSpec, DEFAULT_BASIS_CAP};
use fermigate_core::mbspectrum::{default_grids, ManyBodyProblem};
use fermigate_core::spectrum::DEFAULT_DEG_TOL;
use fermigate_core::verify::ReportFormat;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BcName {
    Dirichlet,
    DirichletLeft,
    DirichletRight,
    Free,
    Periodic,
    Antiperiodic,
    Quasiperiodic,
    Line,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialEntry {
    Zero,
    Delta { x0: f64, strength: f64 },
    Sampled { values: Vec<f64> },
    HMinusOnePair { alpha: f64, cell_values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InteractionEntry {
    None,
    DeltaContact { g: f64 },
    SampledKernel { values: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<String>,
    pub format: Option<ReportFormat>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub deg_tol: Option<f64>,
    pub basis_cap: Option<usize>,
}

/// The document as written; every key optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub bc: Option<BcName>,
    pub alpha: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    #[serde(alias = "N")]
    pub n_particles: Option<usize>,
    pub n_cells: Option<usize>,
    pub k: Option<usize>,
    pub grids: Option<[usize; 2]>,
    pub seed: Option<u64>,
    pub scenarios: Option<Vec<String>>,
    pub potential: Option<PotentialEntry>,
    pub interaction: Option<InteractionEntry>,
    pub output: Option<OutputSection>,
    pub solver: Option<SolverSection>,
}

/// Validated configuration with defaults filled.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ManyBodyProblem,
    /// Explicit grid size; commands choose their own default.
    pub n_cells: Option<usize>,
    pub k: usize,
    /// Explicit grid pair for two-grid checks.
    pub grids: Option<(usize, usize)>,
    pub seed: u64,
    pub scenarios: Vec<String>,
    pub out: Option<String>,
    pub format: ReportFormat,
    pub deg_tol: f64,
    pub basis_cap: usize,
}

impl RunConfig {
    pub fn grids_or_default(&self) -> (usize, usize) {
        self.grids.unwrap_or_else(|| default_grids(self.problem.n_particles))
    }
}

pub const DEFAULT_K: usize = 6;
pub const DEFAULT_N_CELLS: usize = 200;

fn invalid(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("`{key}`: {msg}"))
}

fn boundary(file: &ConfigFile) -> Result<BoundarySpec, CliError> {
    let bc = file.bc.unwrap_or(BcName::Dirichlet);
    let unused = |key: &str, v: Option<f64>| match v {
        Some(_) => Err(invalid(key, format!("not used by bc = {bc:?}").to_lowercase())),
        None => Ok(()),
    };
    if !matches!(bc, BcName::Quasiperiodic) {
        unused("alpha", file.alpha)?;
    }
    if !matches!(bc, BcName::Line) {
        unused("a", file.a)?;
        unused("b", file.b)?;
    }
    let spec = match bc {
        BcName::Dirichlet => BoundarySpec::DirichletBoth,
        BcName::DirichletLeft => BoundarySpec::DirichletLeft,
        BcName::DirichletRight => BoundarySpec::DirichletRight,
        BcName::Free => BoundarySpec::Free,
        BcName::Periodic => BoundarySpec::QuasiPeriodic { alpha: 1.0 },
        BcName::Antiperiodic => BoundarySpec::QuasiPeriodic { alpha: -1.0 },
        BcName::Quasiperiodic => {
            let alpha = file.alpha.ok_or_else(|| invalid("alpha", "required for bc = \"quasiperiodic\""))?;
            if alpha == 0.0 {
                return Err(invalid("alpha", "alpha must be nonzero"));
            }
            BoundarySpec::QuasiPeriodic { alpha }
        }
        BcName::Line => {
            let a = file.a.ok_or_else(|| invalid("a", "required for bc = \"line\""))?;
            let b = file.b.ok_or_else(|| invalid("b", "required for bc = \"line\""))?;
            BoundarySpec::Line { a, b }
        }
    };
    spec.validate().map_err(|e| invalid("bc", e))?;
    Ok(spec)
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<RunConfig, CliError> {
        let bc = boundary(self)?;
        let n_particles = self.n_particles.unwrap_or(1);
        if n_particles == 0 {
            return Err(invalid("N", "must be at least 1"));
        }
        if let Some(n) = self.n_cells {
            if n < 4 {
                return Err(invalid("n_cells", "must be at least 4"));
            }
        }
        let n_cells = self.n_cells.unwrap_or(DEFAULT_N_CELLS);
        let k = self.k.unwrap_or(DEFAULT_K);
        if k == 0 {
            return Err(invalid("k", "must be at least 1"));
        }
        let grids = match self.grids {
            Some([n, m]) => Some(check_grids(n, m)?),
            None => None,
        };
        let potential = match self.potential.clone().unwrap_or(PotentialEntry::Zero) {
            PotentialEntry::Zero => PotentialSpec::Zero,
            PotentialEntry::Delta { x0, strength } => PotentialSpec::Delta { x0, strength },
            PotentialEntry::Sampled { values } => {
                if values.len() < 2 {
                    return Err(invalid("potential.values", "needs at least two nodal values"));
                }
                PotentialSpec::Sampled { values }
            }
            PotentialEntry::HMinusOnePair { alpha, cell_values } => {
                if cell_values.is_empty() {
                    return Err(invalid("potential.cell_values", "needs at least one cell value"));
                }
                PotentialSpec::HMinusOnePair { alpha, cell_values }
            }
        };
        potential.resample(n_cells).validate(n_cells).map_err(|e| invalid("potential", e))?;
        let interaction = match self.interaction.clone().unwrap_or(InteractionEntry::None) {
            InteractionEntry::None => InteractionSpec::NoInteraction,
            InteractionEntry::DeltaContact { g } => InteractionSpec::DeltaContact { g },
            InteractionEntry::SampledKernel { values } => InteractionSpec::SampledKernel { values },
        };
        interaction.resample(n_cells).validate(n_cells).map_err(|e| invalid("interaction", e))?;
        let solver = self.solver.clone().unwrap_or_default();
        let deg_tol = solver.deg_tol.unwrap_or(DEFAULT_DEG_TOL);
        if !(deg_tol > 0.0 && deg_tol.is_finite()) {
            return Err(invalid("solver.deg_tol", "must be positive and finite"));
        }
        let basis_cap = solver.basis_cap.unwrap_or(DEFAULT_BASIS_CAP);
        if basis_cap == 0 {
            return Err(invalid("solver.basis_cap", "must be positive"));
        }
        let output = self.output.clone().unwrap_or_default();
        Ok(RunConfig {
            problem: ManyBodyProblem { bc, potential, interaction, n_particles },
            n_cells: self.n_cells,
            k,
            grids,
            seed: self.seed.unwrap_or(0),
            scenarios: self.scenarios.clone().unwrap_or_default(),
            out: output.path,
            format: output.format.unwrap_or_default(),
            deg_tol,
            basis_cap,
        })
    }
}

pub fn check_grids(n: usize, m: usize) -> Result<(usize, usize), CliError> {
    if n < 4 || m != 2 * n {
        return Err(invalid("grids", format!("expected (n, 2n) with n ≥ 4, got ({n}, {m})")));
    }
    Ok((n, m))
}

/// Parses `--grids "n,2n"`.
pub fn parse_grids_flag(text: &str) -> Result<(usize, usize), CliError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let parse = |s: &str| s.parse::<usize>().map_err(|_| invalid("--grids", format!("expected \"n,2n\", got {text:?}")));
    match parts.as_slice() {
        [a, b] => check_grids(parse(a)?, parse(b)?),
        _ => Err(invalid("--grids", format!("expected \"n,2n\", got {text:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(text: &str) -> Result<RunConfig, CliError> {
        ConfigFile::parse(text)?.validate()
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = run("bc = \"dirichlet\"\nn_cells = 200\n").unwrap();
        assert_eq!(c.k, 6);
        assert_eq!(c.problem.bc, BoundarySpec::DirichletBoth);
        assert_eq!(c.problem.potential, PotentialSpec::Zero);
        assert_eq!(c.format, ReportFormat::Json);
    }

    #[test]
    fn zero_alpha_rejected() {
        let e = run("bc = \"quasiperiodic\"\nalpha = 0.0\n").unwrap_err();
        assert!(e.to_string().contains("alpha must be nonzero"), "{e}");
    }

    #[test]
    fn unknown_keys_rejected() {
        let e = run("bc = \"dirichlet\"\nncells = 20\n").unwrap_err();
        assert!(e.to_string().contains("ncells"), "{e}");
        let e = run("[potential]\nkind = \"delta\"\nx0 = 0.5\nstrength = 1.0\nwidth = 2.0\n").unwrap_err();
        assert!(e.to_string().contains("width"), "{e}");
    }

    #[test]
    fn type_mismatch_names_expected_type() {
        let e = run("n_cells = \"many\"\n").unwrap_err().to_string();
        assert!(e.contains("line 1"), "{e}");
        assert!(e.contains("expected usize"), "{e}");
    }

    #[test]
    fn particle_alias_and_grids() {
        let c = run("N = 3\n").unwrap();
        assert_eq!(c.problem.n_particles, 3);
        assert_eq!(c.grids_or_default(), (20, 40));
        assert!(run("grids = [40, 70]\n").is_err());
        assert_eq!(parse_grids_flag("30, 60").unwrap(), (30, 60));
        assert!(parse_grids_flag("30").is_err());
    }

    #[test]
    fn stray_alpha_rejected() {
        assert!(run("bc = \"dirichlet\"\nalpha = 2.0\n").is_err());
    }
}
