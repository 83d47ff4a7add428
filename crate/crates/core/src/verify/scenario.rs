//! Named scenarios, the default manifest and the scenario runner.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::oracles::{self, env};
use super::report::{Check, Expectation, ReportBundle, VerificationReport};
use crate::basis::{BoundarySpec, PotentialSpec};
use crate::error::Result;
use crate::manybody::InteractionSpec;
use crate::mbspectrum::ManyBodyProblem;

/// Version of the default scenario matrix and the report schema.
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioKind {
    /// Analytic free single-particle spectra.
    FreeSpectrum { bc: BoundarySpec, n_cells: usize },
    /// Refined single-particle gap pattern.
    GapLaw { bc: BoundarySpec, potential: PotentialSpec, grids: (usize, usize), gaps: usize },
    /// Non-interacting spectrum against orbital-energy sums.
    SlaterSum { bc: BoundarySpec, potential: PotentialSpec, n_particles: usize, n_cells: usize, k: usize },
    /// Fast assembly against brute-force integration.
    SlaterCondon { bc: BoundarySpec, n_cells: usize },
    /// Two-grid ground-state classification.
    Nondegeneracy { problem: ManyBodyProblem, grids: (usize, usize), expected_gap: Option<f64> },
    /// Ground-state sign statistics on the ordered simplex.
    Positivity { problem: ManyBodyProblem, n_cells: usize, excited_control: bool },
    /// Ground energy growth along Dirichlet sets.
    Monotonicity {
        potential: PotentialSpec,
        interaction: InteractionSpec,
        n_particles: usize,
        chain: Vec<BoundarySpec>,
        grids: (usize, usize),
        min_margin: f64,
    },
    /// Weak against limit boundary flux.
    NeumannTrace { n_particles: usize, n_cells: usize },
    /// Extension maps, tessellation, density sums and report determinism.
    Structural { points: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub expected: Expectation,
    #[serde(default)]
    pub seed: u64,
    #[serde(flatten)]
    pub kind: ScenarioKind,
}

impl Scenario {
    pub fn new(name: &str, kind: ScenarioKind) -> Self {
        Self { name: name.into(), expected: Expectation::Pass, seed: 0, kind }
    }

    pub fn negative_control(mut self) -> Self {
        self.expected = Expectation::NegativeControl;
        self
    }

    fn grids(&self) -> Vec<usize> {
        match &self.kind {
            ScenarioKind::FreeSpectrum { n_cells, .. }
            | ScenarioKind::SlaterSum { n_cells, .. }
            | ScenarioKind::SlaterCondon { n_cells, .. }
            | ScenarioKind::Positivity { n_cells, .. }
            | ScenarioKind::NeumannTrace { n_cells, .. } => vec![*n_cells],
            ScenarioKind::GapLaw { grids, .. }
            | ScenarioKind::Nondegeneracy { grids, .. }
            | ScenarioKind::Monotonicity { grids, .. } => vec![grids.0, grids.1],
            ScenarioKind::Structural { .. } => vec![],
        }
    }
}

/// Whether `α(−1)^{N−1} > 0`, the condition for a simple ground state
/// under a quasi-periodic condition.
pub fn parity_condition_holds(alpha: f64, n_particles: usize) -> bool {
    let s = if n_particles % 2 == 1 { alpha } else { -alpha };
    s > 0.0
}

/// Nondegeneracy scenario under a quasi-periodic condition, marked as a
/// negative control when the parity condition fails.
pub fn nondegeneracy_nonlocal(problem: ManyBodyProblem, grids: (usize, usize)) -> Scenario {
    let expected = match problem.bc.quasi_alpha() {
        Some(alpha) if !parity_condition_holds(alpha, problem.n_particles) => Expectation::NegativeControl,
        _ => Expectation::Pass,
    };
    let mut s = Scenario::new("nondegeneracy_nonlocal", ScenarioKind::Nondegeneracy { problem, grids, expected_gap: None });
    s.expected = expected;
    s
}

fn run_checks(s: &Scenario) -> Result<Vec<Check>> {
    match &s.kind {
        ScenarioKind::FreeSpectrum { bc, n_cells } => oracles::free_spectrum_checks(*bc, *n_cells),
        ScenarioKind::GapLaw { bc, potential, grids, gaps } => oracles::gap_law_checks(*bc, potential, *grids, *gaps),
        ScenarioKind::SlaterSum { bc, potential, n_particles, n_cells, k } => {
            Ok(oracles::slater_sum_oracle(potential, *bc, *n_particles, *k, *n_cells)?.checks)
        }
        ScenarioKind::SlaterCondon { bc, n_cells } => oracles::slater_condon_checks(*bc, *n_cells),
        ScenarioKind::Nondegeneracy { problem, grids, expected_gap } => {
            oracles::nondegeneracy_checks(problem, *grids, s.expected, *expected_gap)
        }
        ScenarioKind::Positivity { problem, n_cells, excited_control } => {
            oracles::positivity_checks(problem, *n_cells, *excited_control)
        }
        ScenarioKind::Monotonicity { potential, interaction, n_particles, chain, grids, min_margin } => {
            Ok(oracles::monotonicity_suite(potential, interaction, *n_particles, chain, *grids, *min_margin)?.checks)
        }
        ScenarioKind::NeumannTrace { n_particles, n_cells } => oracles::neumann_trace_checks(*n_particles, *n_cells),
        ScenarioKind::Structural { points } => structural_checks(s.seed, *points),
    }
}

fn structural_checks(seed: u64, points: usize) -> Result<Vec<Check>> {
    let mut checks = oracles::extension_checks(seed, 20)?;
    checks.extend(oracles::tessellation_checks(seed, points, 3));
    let well = ManyBodyProblem {
        bc: BoundarySpec::DirichletBoth,
        potential: PotentialSpec::Delta { x0: 0.5, strength: -10.0 },
        interaction: InteractionSpec::DeltaContact { g: 5.0 },
        n_particles: 2,
    };
    checks.extend(oracles::density_checks(&well, 40, "well_pair")?);
    let ring = ManyBodyProblem {
        bc: BoundarySpec::QuasiPeriodic { alpha: 1.0 },
        potential: PotentialSpec::Zero,
        interaction: InteractionSpec::NoInteraction,
        n_particles: 3,
    };
    checks.extend(oracles::density_checks(&ring, 20, "periodic_triple")?);
    // Two runs of the same scenario must emit identical bytes.
    let probe = Scenario::new(
        "determinism_probe",
        ScenarioKind::SlaterSum { bc: BoundarySpec::DirichletBoth, potential: PotentialSpec::Zero, n_particles: 2, n_cells: 16, k: 4 },
    );
    let emit = || super::report::emit_report(&ReportBundle::new(MANIFEST_VERSION, seed, vec![run_scenario(&probe)]), Default::default());
    let differs = (emit() != emit()) as u8 as f64;
    checks.push(Check::new("report_bytes_differ", differs, super::report::Relation::Le, 0.0));
    Ok(checks)
}

/// Runs every check of a scenario. Solver errors and panics become a
/// failed report carrying the message.
pub fn run_scenario(s: &Scenario) -> VerificationReport {
    let environment = env(s.grids(), s.seed);
    match catch_unwind(AssertUnwindSafe(|| run_checks(s))) {
        Ok(Ok(checks)) => VerificationReport::new(&s.name, s.expected, environment, checks),
        Ok(Err(e)) => VerificationReport::failed(&s.name, s.expected, environment, e.to_string()),
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "scenario panicked".into());
            VerificationReport::failed(&s.name, s.expected, environment, format!("internal error: {msg}"))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub scenarios: Vec<Scenario>,
}

impl Manifest {
    pub fn get(&self, name: &str) -> Option<&Scenario> {
        self.scenarios.iter().find(|s| s.name == name)
    }

    pub fn names(&self) -> Vec<&str> {
        self.scenarios.iter().map(|s| s.name.as_str()).collect()
    }

    /// Overrides the seed of every scenario.
    pub fn with_seed(mut self, seed: u64) -> Self {
        for s in &mut self.scenarios {
            s.seed = seed;
        }
        self
    }
}

/// Runs scenarios concurrently; reports keep manifest order.
pub fn run_manifest(manifest: &Manifest, seed: u64) -> ReportBundle {
    let reports = manifest.scenarios.par_iter().map(run_scenario).collect();
    ReportBundle::new(manifest.version, seed, reports)
}

fn problem(bc: BoundarySpec, potential: PotentialSpec, interaction: InteractionSpec, n_particles: usize) -> ManyBodyProblem {
    ManyBodyProblem { bc, potential, interaction, n_particles }
}

pub fn default_manifest() -> Manifest {
    use BoundarySpec::*;
    let p2 = PI * PI;
    let periodic = QuasiPeriodic { alpha: 1.0 };
    let anti = QuasiPeriodic { alpha: -1.0 };
    let well = || PotentialSpec::Delta { x0: 0.5, strength: -10.0 };
    let bump = || PotentialSpec::Delta { x0: 0.3, strength: 4.0 };
    let none = || InteractionSpec::NoInteraction;
    let contact = || InteractionSpec::DeltaContact { g: 5.0 };
    let local = problem(DirichletBoth, well(), contact(), 2);

    let mut scenarios = vec![
        Scenario::new("free_spectrum_dirichlet", ScenarioKind::FreeSpectrum { bc: DirichletBoth, n_cells: 200 }),
        Scenario::new("free_spectrum_periodic", ScenarioKind::FreeSpectrum { bc: periodic, n_cells: 200 }),
        Scenario::new("free_spectrum_antiperiodic", ScenarioKind::FreeSpectrum { bc: anti, n_cells: 200 }),
        Scenario::new("gap_law_periodic_free", ScenarioKind::GapLaw { bc: periodic, potential: PotentialSpec::Zero, grids: (100, 200), gaps: 5 }),
        Scenario::new("gap_law_periodic_well", ScenarioKind::GapLaw { bc: periodic, potential: well(), grids: (100, 200), gaps: 5 }),
        Scenario::new("gap_law_antiperiodic_free", ScenarioKind::GapLaw { bc: anti, potential: PotentialSpec::Zero, grids: (100, 200), gaps: 5 }),
    ];
    for (n, bc, label, n_cells) in [(2, DirichletBoth, "pair_dirichlet", 24), (3, DirichletBoth, "triple_dirichlet", 16), (2, anti, "pair_antiperiodic", 24), (3, periodic, "triple_periodic", 16)] {
        for (vlabel, v) in [("free", PotentialSpec::Zero), ("bump", bump())] {
            scenarios.push(Scenario::new(
                &format!("slater_sum_{label}_{vlabel}"),
                ScenarioKind::SlaterSum { bc, potential: v, n_particles: n, n_cells, k: 6 },
            ));
        }
    }
    scenarios.extend([
        Scenario::new("slater_condon_bruteforce", ScenarioKind::SlaterCondon { bc: DirichletBoth, n_cells: 7 }),
        Scenario::new("nondegeneracy_local", ScenarioKind::Nondegeneracy { problem: local.clone(), grids: (40, 80), expected_gap: None }),
        Scenario::new(
            "parity_periodic_triple",
            ScenarioKind::Nondegeneracy { problem: problem(periodic, PotentialSpec::Zero, none(), 3), grids: (20, 40), expected_gap: Some(12.0 * p2) },
        ),
        Scenario::new(
            "parity_periodic_pair",
            ScenarioKind::Nondegeneracy { problem: problem(periodic, PotentialSpec::Zero, none(), 2), grids: (40, 80), expected_gap: None },
        )
        .negative_control(),
        Scenario::new(
            "parity_antiperiodic_pair",
            ScenarioKind::Nondegeneracy { problem: problem(anti, PotentialSpec::Zero, none(), 2), grids: (40, 80), expected_gap: Some(8.0 * p2) },
        ),
        Scenario::new(
            "parity_antiperiodic_triple",
            ScenarioKind::Nondegeneracy { problem: problem(anti, PotentialSpec::Zero, none(), 3), grids: (20, 40), expected_gap: None },
        )
        .negative_control(),
        Scenario::new("positivity_local", ScenarioKind::Positivity { problem: local, n_cells: 80, excited_control: true }),
        Scenario::new(
            "positivity_periodic_triple",
            ScenarioKind::Positivity { problem: problem(periodic, PotentialSpec::Zero, none(), 3), n_cells: 40, excited_control: false },
        ),
        Scenario::new(
            "positivity_antiperiodic_pair",
            ScenarioKind::Positivity { problem: problem(anti, PotentialSpec::Zero, none(), 2), n_cells: 80, excited_control: false },
        ),
    ]);
    for (label, w) in [("free", none()), ("contact", contact())] {
        scenarios.push(Scenario::new(
            &format!("monotonicity_{label}"),
            ScenarioKind::Monotonicity {
                potential: PotentialSpec::Zero,
                interaction: w,
                n_particles: 2,
                chain: vec![Free, DirichletLeft, DirichletBoth],
                grids: (40, 80),
                min_margin: 0.5,
            },
        ));
    }
    scenarios.extend([
        Scenario::new("neumann_trace_single", ScenarioKind::NeumannTrace { n_particles: 1, n_cells: 200 }),
        Scenario::new("neumann_trace_pair", ScenarioKind::NeumannTrace { n_particles: 2, n_cells: 80 }),
        Scenario::new("structural_invariants", ScenarioKind::Structural { points: 100_000 }),
    ]);
    Manifest { version: MANIFEST_VERSION, scenarios }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parity_flag() {
        assert!(parity_condition_holds(1.0, 3));
        assert!(!parity_condition_holds(1.0, 2));
        assert!(parity_condition_holds(-1.0, 2));
        let p = problem(BoundarySpec::QuasiPeriodic { alpha: 1.0 }, PotentialSpec::Zero, InteractionSpec::NoInteraction, 2);
        assert_eq!(nondegeneracy_nonlocal(p, (40, 80)).expected, Expectation::NegativeControl);
    }

    #[test]
    fn manifest_names_are_unique() {
        let m = default_manifest();
        let mut names = m.names();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), m.scenarios.len());
    }

    #[test]
    fn errors_become_failed_reports() {
        let s = Scenario::new("bad", ScenarioKind::FreeSpectrum { bc: BoundarySpec::Free, n_cells: 20 });
        let r = run_scenario(&s);
        assert!(!r.passed());
        assert!(r.error.is_some());
    }

    #[test]
    fn scenario_serde_round_trip() {
        for s in default_manifest().scenarios {
            let text = serde_json::to_string(&s).unwrap();
            assert_eq!(serde_json::from_str::<Scenario>(&text).unwrap(), s);
        }
    }
}
