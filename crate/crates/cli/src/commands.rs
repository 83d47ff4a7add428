//! The four subcommands.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use fermigate_core::basis::{assemble_overlap, assemble_potential, assemble_stiffness, build_grid_basis, BoundarySpec, PotentialSpec};
use fermigate_core::manybody::{binomial, reduced_density, WaveVector};
use fermigate_core::mbspectrum::{classify_degeneracy, relative_residual, solve_problem, DegeneracyReport, ManyBodyProblem};
use fermigate_core::simplex::{restrict_to_simplex, SimplexSample};
use fermigate_core::spectrum::{gap_report, solve_sp_eig, GapReport};
use fermigate_core::verify::{
    default_manifest, emit_report, nondegeneracy_nonlocal, parse_report, run_manifest, Manifest, ReportBundle, ReportFormat,
    Scenario, ScenarioKind,
};
use fermigate_core::Error;

use crate::config::{ConfigFile, RunConfig, DEFAULT_N_CELLS};
use crate::output::{csv_number, rounded_json, text_table, write_output};
use crate::CliError;

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub format: Option<ReportFormat>,
    pub seed: Option<u64>,
    pub scenarios: Vec<String>,
    pub grids: Option<(usize, usize)>,
}

/// Reads and validates the config (defaults when absent) and applies overrides.
pub fn load_config(path: Option<&Path>, overrides: &Overrides) -> Result<RunConfig, CliError> {
    let file = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            ConfigFile::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
        None => ConfigFile::default(),
    };
    let mut cfg = file.validate()?;
    if let Some(out) = &overrides.out {
        cfg.out = Some(out.display().to_string());
    }
    if let Some(f) = overrides.format {
        cfg.format = f;
    }
    if let Some(s) = overrides.seed {
        cfg.seed = s;
    }
    if !overrides.scenarios.is_empty() {
        cfg.scenarios = overrides.scenarios.clone();
    }
    if overrides.grids.is_some() {
        cfg.grids = overrides.grids;
    }
    Ok(cfg)
}

fn out_path(cfg: &RunConfig) -> Option<PathBuf> {
    cfg.out.as_ref().map(PathBuf::from)
}

#[derive(Debug, Serialize)]
struct SingleOutput {
    command: &'static str,
    bc: BoundarySpec,
    potential: PotentialSpec,
    n_cells: usize,
    eigenvalues: Vec<f64>,
    residuals: Vec<f64>,
    gaps: GapReport,
}

pub fn solve_single(cfg: &RunConfig) -> Result<(), CliError> {
    let n_cells = cfg.n_cells.unwrap_or(DEFAULT_N_CELLS);
    let bc = cfg.problem.bc;
    let basis = build_grid_basis(n_cells, bc)?;
    let v = cfg.problem.potential.resample(n_cells);
    let k = cfg.k.min(basis.n_dofs());
    let m = assemble_overlap(&basis);
    let res = solve_sp_eig(&assemble_stiffness(&basis), &assemble_potential(&basis, &v)?, &m, k)?;
    let gaps = gap_report(&res, &bc, cfg.deg_tol);
    let bytes = match cfg.format {
        ReportFormat::Json => rounded_json(&SingleOutput {
            command: "solve-single",
            bc,
            potential: v,
            n_cells,
            eigenvalues: res.eigenvalues.clone(),
            residuals: res.residuals.clone(),
            gaps,
        }),
        ReportFormat::Csv => {
            let mut s = String::from("index,eigenvalue,residual\n");
            for (i, (l, r)) in res.eigenvalues.iter().zip(&res.residuals).enumerate() {
                s += &format!("{},{},{}\n", i + 1, csv_number(*l), csv_number(*r));
            }
            s.into_bytes()
        }
    };
    write_output(out_path(cfg).as_deref(), &bytes)
}

#[derive(Debug, Serialize)]
struct Profile {
    points: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct ManyOutput {
    command: &'static str,
    problem: ManyBodyProblem,
    n_cells: usize,
    dimension: usize,
    eigenvalues: Vec<f64>,
    relative_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    degeneracy: Option<DegeneracyReport>,
    /// Ground-state one-particle density.
    density: Profile,
    /// Ground state on the ordered simplex grid.
    #[serde(skip_serializing_if = "Option::is_none")]
    simplex_sample: Option<SimplexSample>,
}

/// Largest particle count for which simplex samples are emitted.
const SIMPLEX_SAMPLE_MAX_N: usize = 3;

pub fn solve_many(cfg: &RunConfig) -> Result<(), CliError> {
    let problem = &cfg.problem;
    let n_cells = cfg.n_cells.unwrap_or(cfg.grids_or_default().0);
    let n_orbitals = build_grid_basis(n_cells, problem.bc)?.n_dofs();
    let size = binomial(n_orbitals, problem.n_particles).unwrap_or(usize::MAX);
    if size > cfg.basis_cap {
        return Err(Error::BasisTooLarge { size, cap: cfg.basis_cap }.into());
    }
    if problem.n_particles > n_orbitals {
        return Err(Error::InvalidArgument(format!("{} particles exceed {n_orbitals} orbitals", problem.n_particles)).into());
    }
    let sol = solve_problem(problem, n_cells, cfg.k.min(size))?;
    let degeneracy = match cfg.grids {
        Some(g) => Some(classify_degeneracy(problem, g)?),
        None => None,
    };
    let (basis, orbitals) = (&sol.system.operator.basis, &sol.system.orbitals);
    let ground = WaveVector::normalized(sol.state(0).coeffs)?;
    let rho = reduced_density(&ground, basis, orbitals)?;
    let simplex_sample = if problem.n_particles <= SIMPLEX_SAMPLE_MAX_N {
        Some(restrict_to_simplex(&ground, basis, orbitals)?)
    } else {
        None
    };
    let out = ManyOutput {
        command: "solve-many",
        problem: problem.clone(),
        n_cells,
        dimension: size,
        eigenvalues: sol.spectrum.eigenvalues.clone(),
        relative_residual: relative_residual(&sol.system.operator, &sol.spectrum),
        degeneracy,
        density: Profile { points: rho.points, values: rho.values },
        simplex_sample,
    };
    let bytes = match cfg.format {
        ReportFormat::Json => rounded_json(&out),
        ReportFormat::Csv => eigenvalue_csv(&out.eigenvalues),
    };
    write_output(out_path(cfg).as_deref(), &bytes)
}

fn eigenvalue_csv(values: &[f64]) -> Vec<u8> {
    let mut s = String::from("index,eigenvalue\n");
    for (i, l) in values.iter().enumerate() {
        s += &format!("{},{}\n", i + 1, csv_number(*l));
    }
    s.into_bytes()
}

/// Scenario names that take their problem from the config.
pub const CONFIGURED_SCENARIOS: [&str; 3] = ["nondegeneracy_nonlocal", "single_particle_gaps", "slater_sum_oracle"];

fn resolve_scenario(name: &str, cfg: &RunConfig, defaults: &Manifest) -> Result<Scenario, CliError> {
    let p = &cfg.problem;
    let grids = cfg.grids_or_default();
    let scenario = match name {
        "nondegeneracy_nonlocal" => nondegeneracy_nonlocal(p.clone(), grids),
        "single_particle_gaps" => {
            let grids = cfg.grids.unwrap_or((100, 200));
            Scenario::new(name, ScenarioKind::GapLaw { bc: p.bc, potential: p.potential.clone(), grids, gaps: cfg.k.max(2) - 1 })
        }
        "slater_sum_oracle" => Scenario::new(
            name,
            ScenarioKind::SlaterSum {
                bc: p.bc,
                potential: p.potential.clone(),
                n_particles: p.n_particles,
                n_cells: cfg.n_cells.unwrap_or(grids.0),
                k: cfg.k,
            },
        ),
        other => defaults.get(other).cloned().ok_or_else(|| {
            let mut known: Vec<&str> = CONFIGURED_SCENARIOS.to_vec();
            known.extend(defaults.names());
            CliError::Config(format!("unknown scenario {other:?}; known: {}", known.join(", ")))
        })?,
    };
    Ok(scenario)
}

/// Runs the selected scenarios (all of the default manifest when none are
/// named), writes the report and prints one line per check to stderr.
pub fn verify(cfg: &RunConfig) -> Result<ReportBundle, CliError> {
    let defaults = default_manifest();
    let manifest = if cfg.scenarios.is_empty() {
        defaults
    } else {
        let scenarios = cfg.scenarios.iter().map(|n| resolve_scenario(n, cfg, &defaults)).collect::<Result<Vec<_>, _>>()?;
        Manifest { version: defaults.version, scenarios }
    }
    .with_seed(cfg.seed);
    let bundle = run_manifest(&manifest, cfg.seed);
    for r in &bundle.reports {
        if let Some(e) = &r.error {
            eprintln!("FAIL {}: error: {e}", r.scenario);
        }
        for c in &r.checks {
            eprintln!(
                "{} {}/{}: {} {} {}",
                if c.passed { "PASS" } else { "FAIL" },
                r.scenario,
                c.name,
                csv_number(c.measured),
                c.relation.symbol(),
                csv_number(c.threshold)
            );
        }
    }
    write_output(out_path(cfg).as_deref(), &emit_report(&bundle, cfg.format))?;
    Ok(bundle)
}

#[derive(Debug, Deserialize)]
struct SolveDocument {
    command: String,
}

fn write_file(dir: &Path, name: &str, text: String) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().map(|a| a.iter().map(|x| x.as_f64().unwrap_or(f64::NAN)).collect()).unwrap_or_default()
}

/// Prints a table for a report or solve output; with `out_dir`, also
/// writes plot-ready CSV files there.
pub fn report(input: &Path, out_dir: Option<&Path>) -> Result<String, CliError> {
    let bytes = std::fs::read(input).map_err(|e| CliError::Config(format!("{}: {e}", input.display())))?;
    if let Ok(bundle) = parse_report(&bytes) {
        let rows: Vec<Vec<String>> = bundle
            .reports
            .iter()
            .flat_map(|r| {
                let err = r.error.iter().map(move |e| vec![r.scenario.clone(), format!("error: {e}"), String::new(), String::new(), String::new(), "FAIL".into()]);
                let checks = r.checks.iter().map(move |c| {
                    vec![
                        r.scenario.clone(),
                        c.name.clone(),
                        csv_number(c.measured),
                        c.relation.symbol().into(),
                        csv_number(c.threshold),
                        if c.passed { "PASS" } else { "FAIL" }.into(),
                    ]
                });
                err.chain(checks)
            })
            .collect();
        let mut table = text_table(&["scenario", "check", "measured", "rel", "threshold", "verdict"], &rows);
        table += &format!("overall: {}\n", if bundle.passed() { "PASS" } else { "FAIL" });
        if let Some(dir) = out_dir {
            write_file(dir, "checks.csv", String::from_utf8(emit_report(&bundle, ReportFormat::Csv)).expect("utf-8"))?;
        }
        return Ok(table);
    }
    let doc: Value = serde_json::from_slice(&bytes).map_err(|e| CliError::Config(format!("{}: not a report: {e}", input.display())))?;
    let kind: SolveDocument =
        serde_json::from_value(doc.clone()).map_err(|_| CliError::Config(format!("{}: unrecognised document", input.display())))?;
    let eigenvalues = floats(&doc["eigenvalues"]);
    let rows: Vec<Vec<String>> = eigenvalues.iter().enumerate().map(|(i, l)| vec![(i + 1).to_string(), csv_number(*l)]).collect();
    let mut table = format!("{} on {} cells\n", kind.command, doc["n_cells"]);
    table += &text_table(&["index", "eigenvalue"], &rows);
    if let Some(dir) = out_dir {
        write_file(dir, "eigenvalues.csv", String::from_utf8(eigenvalue_csv(&eigenvalues)).expect("utf-8"))?;
        if kind.command == "solve-many" {
            let (x, rho) = (floats(&doc["density"]["points"]), floats(&doc["density"]["values"]));
            let mut s = String::from("x,rho\n");
            for (a, b) in x.iter().zip(&rho) {
                s += &format!("{},{}\n", csv_number(*a), csv_number(*b));
            }
            write_file(dir, "density.csv", s)?;
            if let Ok(sample) = serde_json::from_value::<SimplexSample>(doc["simplex_sample"].clone()) {
                let n = sample.points.first().map_or(0, Vec::len);
                let mut s = (1..=n).map(|k| format!("x{k}")).collect::<Vec<_>>().join(",") + ",value,tag\n";
                for ((p, v), t) in sample.points.iter().zip(&sample.values).zip(&sample.tags) {
                    let coords: Vec<String> = p.iter().map(|c| csv_number(*c)).collect();
                    let tag = serde_json::to_value(t).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
                    s += &format!("{},{},{}\n", coords.join(","), csv_number(*v), tag);
                }
                write_file(dir, "simplex_samples.csv", s)?;
            }
        }
    }
    Ok(table)
}
