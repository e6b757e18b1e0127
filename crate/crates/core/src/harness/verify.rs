use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;
use std::thread;

use serde::{Deserialize, Serialize};

use super::config::parse_config;
use super::experiment::{run_experiment, ExperimentReport};
use super::HarnessError;

/// Which part of the built-in audit suite to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    All,
    Convex,
    Smooth,
    StronglyConvex,
    WellConditioned,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::All => "all",
            Regime::Convex => "convex",
            Regime::Smooth => "smooth",
            Regime::StronglyConvex => "strongly-convex",
            Regime::WellConditioned => "well-conditioned",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, HarnessError> {
        [
            Regime::All,
            Regime::Convex,
            Regime::Smooth,
            Regime::StronglyConvex,
            Regime::WellConditioned,
        ]
        .into_iter()
        .find(|r| r.as_str() == s)
        .ok_or_else(|| {
            HarnessError::field(
                "regime",
                format!("unknown regime `{s}` (expected all, convex, smooth, strongly-convex or well-conditioned)"),
            )
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyCheck {
    pub name: String,
    pub regime: Regime,
    pub passed: bool,
    pub report: ExperimentReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub regime: Regime,
    pub checks: Vec<VerifyCheck>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{} {:<18} {:<28} min h={:e}",
                if c.passed { "PASS" } else { "FAIL" },
                c.regime.as_str(),
                c.name,
                c.report.summary.min_h
            );
            for v in c.report.compliance.iter().filter(|v| v.enforced) {
                let _ = writeln!(
                    out,
                    "       {} margin={:e} {}",
                    if v.pass { "PASS" } else { "FAIL" },
                    v.margin,
                    v.name
                );
            }
            for (name, a) in c.report.audits.all() {
                if a.applicable && !a.pass {
                    let _ = writeln!(out, "       FAIL {name}: {} violations", a.violation_count);
                }
            }
        }
        let _ = writeln!(
            out,
            "verify {}: {}",
            self.regime,
            if self.passed { "PASS" } else { "FAIL" }
        );
        out
    }
}

const QUADRATIC_20: &str = r#"
[objective]
kind = "quadratic"
dimension = 20
spectrum = [1.0, 10.0]
[start]
distance = 1.0
"#;

fn suite() -> Vec<(&'static str, Regime, String)> {
    let audit = "[audit]\npoints = 1000\n";
    vec![
        (
            "norm-exact",
            Regime::Convex,
            format!(
                r#"seed = 1
T = 400
[objective]
kind = "scaled-euclidean-norm"
dimension = 10
scale = 1.0
[start]
distance = 1.0
[schedule]
name = "polyak"
{audit}"#
            ),
        ),
        (
            "singular-quadratic-exact",
            Regime::Smooth,
            format!(
                r#"seed = 2
T = 100
[objective]
kind = "singular-quadratic"
dimension = 5
eigenvalues = [0.0, 0.0, 1.0, 2.5, 4.0]
[start]
distance = 1.0
[schedule]
name = "polyak"
{audit}"#
            ),
        ),
        (
            "quadratic-exact",
            Regime::StronglyConvex,
            format!("seed = 3\nT = 1000\n{QUADRATIC_20}[schedule]\nname = \"polyak\"\n{audit}"),
        ),
        (
            "quadratic-lower-bound",
            Regime::StronglyConvex,
            format!("seed = 3\nT = 1000\n{QUADRATIC_20}[schedule]\nname = \"polyak-lb\"\nf_tilde = 0.0\n{audit}"),
        ),
        (
            "l1-exact",
            Regime::StronglyConvex,
            format!(
                r#"seed = 4
T = 1000
[objective]
kind = "strongly-convex-plus-l1"
dimension = 10
quadratic = 1.0
l1_weight = 0.5
x_star_radius = 1.0
[start]
distance = 1.0
[schedule]
name = "polyak"
{audit}"#
            ),
        ),
        (
            "quadratic-geometric",
            Regime::WellConditioned,
            format!("seed = 3\nT = 200\n{QUADRATIC_20}[schedule]\nname = \"polyak\"\n{audit}"),
        ),
        (
            "adaptive-restarts",
            Regime::WellConditioned,
            format!(
                r#"seed = 3
T = 500
[objective]
kind = "quadratic"
dimension = 20
spectrum = [1.0, 10.0]
offset = 5.0
[start]
distance = 1.0
[adaptive]
f_tilde = 0.0
{audit}"#
            ),
        ),
    ]
}

/// Runs the built-in audit suite, one experiment per thread. Passes iff
/// every enforced verdict and every applicable audit passes.
pub fn verify(regime: Regime) -> Result<VerifyReport, HarnessError> {
    let selected: Vec<_> = suite()
        .into_iter()
        .filter(|(_, r, _)| regime == Regime::All || *r == regime)
        .map(|(name, r, text)| parse_config(&text).map(|cfg| (name, r, cfg)))
        .collect::<Result<_, _>>()?;

    let results = thread::scope(|scope| {
        let handles: Vec<_> = selected
            .iter()
            .map(|(_, _, cfg)| scope.spawn(move || run_experiment(cfg)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("experiment thread panicked"))
            .collect::<Vec<_>>()
    });

    let mut checks = Vec::with_capacity(selected.len());
    for ((name, r, _), result) in selected.iter().zip(results) {
        let report = result?.report;
        checks.push(VerifyCheck {
            name: (*name).to_owned(),
            regime: *r,
            passed: report.passed,
            report,
        });
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport { regime, checks, passed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_configs_parse() {
        for (name, _, text) in suite() {
            parse_config(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn regimes_parse_and_print() {
        for s in ["all", "convex", "smooth", "strongly-convex", "well-conditioned"] {
            assert_eq!(s.parse::<Regime>().unwrap().to_string(), s);
        }
        assert!("linear".parse::<Regime>().unwrap_err().is_usage());
    }

    #[test]
    fn convex_regime_passes() {
        let report = verify(Regime::Convex).unwrap();
        assert_eq!(report.checks.len(), 1);
        assert!(report.passed, "{}", report.render_text());
    }
}
