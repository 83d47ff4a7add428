//! Acceptance suite: runs the default scenario manifest grouped into the
//! ten acceptance criteria and prints one PASS/FAIL line per criterion.

use std::time::{Duration, Instant};

use fermigate_core::verify::{default_manifest, emit_report, parse_report, run_scenario, ReportBundle, ReportFormat, MANIFEST_VERSION};
use rayon::prelude::*;

struct Criterion {
    id: u32,
    title: &'static str,
    prefixes: &'static [&'static str],
    /// Wall-clock budget for the whole group.
    budget: Duration,
}

const CRITERIA: &[Criterion] = &[
    Criterion { id: 1, title: "single-particle free spectra", prefixes: &["free_spectrum_"], budget: Duration::from_secs(6) },
    Criterion { id: 2, title: "quasi-periodic gap law", prefixes: &["gap_law_"], budget: Duration::from_secs(60) },
    Criterion { id: 3, title: "orbital-energy sum oracle", prefixes: &["slater_sum_"], budget: Duration::from_secs(30) },
    Criterion { id: 4, title: "fast assembly vs brute force", prefixes: &["slater_condon_"], budget: Duration::from_secs(60) },
    Criterion { id: 5, title: "non-degeneracy with interaction", prefixes: &["nondegeneracy_local"], budget: Duration::from_secs(60) },
    Criterion { id: 6, title: "parity condition", prefixes: &["parity_"], budget: Duration::from_secs(120) },
    Criterion { id: 7, title: "simplex positivity", prefixes: &["positivity_"], budget: Duration::from_secs(120) },
    Criterion { id: 8, title: "Dirichlet-set monotonicity", prefixes: &["monotonicity_"], budget: Duration::from_secs(120) },
    Criterion { id: 9, title: "boundary flux", prefixes: &["neumann_trace_"], budget: Duration::from_secs(60) },
    Criterion { id: 10, title: "structural invariants", prefixes: &["structural_"], budget: Duration::from_secs(120) },
];

fn main() {
    let manifest = default_manifest();
    let suite_start = Instant::now();
    let mut all_ok = true;
    let mut reports = Vec::new();
    for c in CRITERIA {
        let scenarios: Vec<_> = manifest.scenarios.iter().filter(|s| c.prefixes.iter().any(|p| s.name.starts_with(p))).collect();
        let start = Instant::now();
        let group: Vec<_> = scenarios.par_iter().map(|s| run_scenario(s)).collect();
        let elapsed = start.elapsed();
        let mut ok = !group.is_empty() && group.iter().all(|r| r.passed()) && elapsed <= c.budget;
        let mut detail = Vec::new();
        for r in &group {
            if let Some(e) = &r.error {
                detail.push(format!("{}: error {e}", r.scenario));
            }
            for ch in r.checks.iter().filter(|ch| !ch.passed) {
                detail.push(format!("{}/{}: {} {} {}", r.scenario, ch.name, ch.measured, ch.relation.symbol(), ch.threshold));
            }
        }
        if c.id == 10 {
            // The emitted bundle re-emits byte-identically after parsing.
            let bundle = ReportBundle::new(MANIFEST_VERSION, 0, group.clone());
            let bytes = emit_report(&bundle, ReportFormat::Json);
            let same = parse_report(&bytes).map(|b| emit_report(&b, ReportFormat::Json) == bytes).unwrap_or(false);
            if !same {
                ok = false;
                detail.push("report round trip not byte-identical".into());
            }
        }
        if elapsed > c.budget {
            detail.push(format!("runtime {:.2?} over budget {:.0?}", elapsed, c.budget));
        }
        let checks: usize = group.iter().map(|r| r.checks.len()).sum();
        println!(
            "{} criterion {:>2} ({}): {} scenarios, {} checks, {:.2?}",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.title,
            group.len(),
            checks,
            elapsed
        );
        for d in detail {
            println!("       {d}");
        }
        all_ok &= ok;
        reports.extend(group);
    }
    let total = suite_start.elapsed();
    let within = total <= Duration::from_secs(300);
    println!("{} full suite runtime {:.2?} (budget 5 min)", if within { "PASS" } else { "FAIL" }, total);
    let covered = reports.len();
    if covered != manifest.scenarios.len() {
        println!("FAIL manifest coverage: {covered} of {} scenarios grouped", manifest.scenarios.len());
        all_ok = false;
    }
    if !(all_ok && within) {
        std::process::exit(1);
    }
}
