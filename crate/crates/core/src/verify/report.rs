//! Verification reports and their JSON and CSV encodings.
//!
//! Floats are written with 12 significant digits. Non-finite values are
//! written as the strings `"inf"`, `"-inf"` and `"nan"`. Emitting a parsed
//! report reproduces the original bytes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rounds to 12 significant decimal digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

pub(crate) mod sig12 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_nan() {
            s.serialize_str("nan")
        } else if x.is_infinite() {
            s.serialize_str(if *x > 0.0 { "inf" } else { "-inf" })
        } else {
            s.serialize_f64(super::round12(*x))
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) => match t.as_str() {
                "nan" => Ok(f64::NAN),
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                _ => Err(serde::de::Error::custom(format!("invalid number {t:?}"))),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
}

impl Relation {
    /// NaN never satisfies a relation.
    pub fn holds(self, measured: f64, threshold: f64) -> bool {
        match self {
            Relation::Le => measured <= threshold,
            Relation::Lt => measured < threshold,
            Relation::Ge => measured >= threshold,
            Relation::Gt => measured > threshold,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Lt => "<",
            Relation::Ge => ">=",
            Relation::Gt => ">",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    #[serde(with = "sig12")]
    pub measured: f64,
    pub relation: Relation,
    #[serde(with = "sig12")]
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, measured: f64, relation: Relation, threshold: f64) -> Self {
        Self { name: name.into(), measured, relation, threshold, passed: relation.holds(measured, threshold) }
    }

    /// `|measured − target| / |target| ≤ tol`, or absolute when `target = 0`.
    pub fn close(name: impl Into<String>, measured: f64, target: f64, tol: f64) -> Self {
        let dev = if target == 0.0 { measured.abs() } else { (measured - target).abs() / target.abs() };
        Self::new(name, dev, Relation::Le, tol)
    }
}

/// Whether a scenario asserts the theorem's conclusion or its failure
/// outside the hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Expectation {
    #[default]
    Pass,
    NegativeControl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Environment {
    pub grids: Vec<usize>,
    #[serde(with = "sig12")]
    pub residual_tolerance: f64,
    pub seed: u64,
}

pub const NO_CHECKS: &str = "no-checks";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub scenario: String,
    pub expected: Expectation,
    pub environment: Environment,
    pub checks: Vec<Check>,
    pub overall: Outcome,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl VerificationReport {
    /// Overall is the conjunction of the checks; an error fails the report.
    pub fn new(scenario: impl Into<String>, expected: Expectation, environment: Environment, checks: Vec<Check>) -> Self {
        let mut r = Self {
            scenario: scenario.into(),
            expected,
            environment,
            checks,
            overall: Outcome::Pass,
            flags: Vec::new(),
            error: None,
        };
        r.finalize();
        r
    }

    pub fn failed(scenario: impl Into<String>, expected: Expectation, environment: Environment, error: String) -> Self {
        let mut r = Self::new(scenario, expected, environment, Vec::new());
        r.error = Some(error);
        r.finalize();
        r
    }

    pub fn finalize(&mut self) {
        let ok = self.error.is_none() && self.checks.iter().all(|c| c.passed);
        self.overall = if ok { Outcome::Pass } else { Outcome::Fail };
        self.flags.retain(|f| f != NO_CHECKS);
        if self.checks.is_empty() && self.error.is_none() {
            self.flags.push(NO_CHECKS.into());
        }
    }

    pub fn passed(&self) -> bool {
        self.overall == Outcome::Pass
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
        self.finalize();
    }
}

/// Reports of one run, in manifest order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub manifest_version: u32,
    pub seed: u64,
    pub reports: Vec<VerificationReport>,
    pub overall: Outcome,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

impl ReportBundle {
    pub fn new(manifest_version: u32, seed: u64, reports: Vec<VerificationReport>) -> Self {
        let ok = reports.iter().all(VerificationReport::passed);
        let flags = if reports.iter().all(|r| r.checks.is_empty()) && reports.iter().all(|r| r.error.is_none()) {
            vec![NO_CHECKS.to_string()]
        } else {
            Vec::new()
        };
        Self { manifest_version, seed, reports, overall: if ok { Outcome::Pass } else { Outcome::Fail }, flags }
    }

    pub fn passed(&self) -> bool {
        self.overall == Outcome::Pass
    }

    pub fn has_errors(&self) -> bool {
        self.reports.iter().any(|r| r.error.is_some())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

pub const CSV_HEADER: &str = "scenario,expected,check,measured,relation,threshold,passed";

/// Decimal text of `round12(x)`; exponent form outside `[1e-4, 1e15)`.
pub fn format_sig12(x: f64) -> String {
    let r = round12(x);
    if r != 0.0 && (r.abs() < 1e-4 || r.abs() >= 1e15) {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

fn csv_number(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format_sig12(x)
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn emit_report(bundle: &ReportBundle, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Json => {
            let mut out = serde_json::to_vec_pretty(bundle).expect("report types serialize");
            out.push(b'\n');
            out
        }
        ReportFormat::Csv => {
            let mut out = String::from(CSV_HEADER);
            out.push('\n');
            for r in &bundle.reports {
                let expected = match r.expected {
                    Expectation::Pass => "pass",
                    Expectation::NegativeControl => "negative-control",
                };
                if let Some(e) = &r.error {
                    let name = csv_field(&format!("error: {e}"));
                    out.push_str(&format!("{},{},{name},nan,,,false\n", csv_field(&r.scenario), expected));
                }
                for c in &r.checks {
                    out.push_str(&format!(
                        "{},{},{},{},{},{},{}\n",
                        csv_field(&r.scenario),
                        expected,
                        csv_field(&c.name),
                        csv_number(c.measured),
                        c.relation.symbol(),
                        csv_number(c.threshold),
                        c.passed
                    ));
                }
            }
            out.into_bytes()
        }
    }
}

pub fn parse_report(bytes: &[u8]) -> Result<ReportBundle> {
    serde_json::from_slice(bytes).map_err(|e| Error::InvalidArgument(format!("malformed report: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ReportBundle {
        let checks = vec![
            Check::new("gap", std::f64::consts::PI * 1e3, Relation::Gt, 4.0),
            Check::new("ratio", f64::INFINITY, Relation::Gt, 0.5),
            Check::close("value", 1.0 / 3.0, 0.3333, 1e-3),
        ];
        let env = Environment { grids: vec![40, 80], residual_tolerance: 1e-8, seed: 7 };
        ReportBundle::new(1, 7, vec![VerificationReport::new("demo", Expectation::Pass, env, checks)])
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let bytes = emit_report(&sample(), ReportFormat::Json);
        let parsed = parse_report(&bytes).unwrap();
        assert_eq!(emit_report(&parsed, ReportFormat::Json), bytes);
        assert!(String::from_utf8(bytes).unwrap().contains("3141.59265359"));
    }

    #[test]
    fn empty_report_passes_vacuously() {
        let r = VerificationReport::new("empty", Expectation::Pass, Environment::default(), vec![]);
        assert!(r.passed());
        assert_eq!(r.flags, vec![NO_CHECKS.to_string()]);
        let b = ReportBundle::new(1, 0, vec![r]);
        let text = String::from_utf8(emit_report(&b, ReportFormat::Json)).unwrap();
        assert!(text.contains("no-checks"));
        assert!(serde_json::from_str::<serde_json::Value>(&text).is_ok());
    }

    #[test]
    fn nan_fails_and_csv_has_header() {
        assert!(!Check::new("x", f64::NAN, Relation::Le, 1.0).passed);
        let csv = String::from_utf8(emit_report(&sample(), ReportFormat::Csv)).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(lines.count(), 3);
    }

    #[test]
    fn rounding_is_idempotent() {
        for x in [1.0 / 3.0, 49.348022005446793, -1e-300, 123456789.123456789] {
            assert_eq!(round12(round12(x)), round12(x));
        }
    }
}
