use std::collections::BTreeMap;

use serde::Serialize;

/// How a checked value is compared with its tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    AtMost,
    AtLeast,
    Within,
}

/// A named pass/fail judgement together with the tolerance used.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub comparison: Comparison,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, upper: f64) -> Self {
        Check {
            name: name.into(),
            value,
            comparison: Comparison::AtMost,
            lower: None,
            upper: Some(upper),
            passed: value <= upper,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, lower: f64) -> Self {
        Check {
            name: name.into(),
            value,
            comparison: Comparison::AtLeast,
            lower: Some(lower),
            upper: None,
            passed: value >= lower,
        }
    }

    pub fn within(name: impl Into<String>, value: f64, lower: f64, upper: f64) -> Self {
        Check {
            name: name.into(),
            value,
            comparison: Comparison::Within,
            lower: Some(lower),
            upper: Some(upper),
            passed: value >= lower && value <= upper,
        }
    }
}

/// Named scalars, tallies and checks produced by an experiment.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub experiment: String,
    /// Effective parameters after defaults and tuning.
    pub parameters: BTreeMap<String, f64>,
    pub scalars: BTreeMap<String, f64>,
    pub tallies: BTreeMap<String, BTreeMap<String, u64>>,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

impl DiagnosticsReport {
    pub fn new(experiment: impl Into<String>) -> Self {
        DiagnosticsReport {
            experiment: experiment.into(),
            ..Default::default()
        }
    }

    pub fn scalar(&mut self, name: impl Into<String>, value: f64) {
        self.scalars.insert(name.into(), value);
    }

    pub fn parameter(&mut self, name: impl Into<String>, value: f64) {
        self.parameters.insert(name.into(), value);
    }

    pub fn tally(&mut self, group: impl Into<String>, key: impl Into<String>, count: u64) {
        self.tallies.entry(group.into()).or_default().insert(key.into(), count);
    }

    pub fn check(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    /// Appends everything from `other`, prefixing its names with `prefix.`.
    pub fn merge(&mut self, prefix: &str, other: DiagnosticsReport) {
        for (k, v) in other.parameters {
            self.parameters.insert(format!("{prefix}.{k}"), v);
        }
        for (k, v) in other.scalars {
            self.scalars.insert(format!("{prefix}.{k}"), v);
        }
        for (k, v) in other.tallies {
            self.tallies.insert(format!("{prefix}.{k}"), v);
        }
        for mut c in other.checks {
            c.name = format!("{prefix}.{}", c.name);
            self.checks.push(c);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_never_passes() {
        assert!(!Check::at_most("x", f64::NAN, 1.0).passed);
        assert!(!Check::at_least("x", f64::NAN, 1.0).passed);
        assert!(!Check::within("x", f64::NAN, 0.0, 1.0).passed);
    }

    #[test]
    fn merge_prefixes() {
        let mut a = DiagnosticsReport::new("a");
        let mut b = DiagnosticsReport::new("b");
        b.check(Check::at_most("r", 2.0, 1.0));
        b.scalar("s", 1.0);
        a.merge("sub", b);
        assert!(!a.passed());
        assert_eq!(a.failures()[0].name, "sub.r");
        assert_eq!(a.scalars["sub.s"], 1.0);
    }
}
