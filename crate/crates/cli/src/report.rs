use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::RunConfig;

pub const SCHEMA: &str = "mdlab/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Inconclusive,
    Fail,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Inconclusive => "INCONCLUSIVE",
            Status::Fail => "FAIL",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    /// Human-readable one-liner.
    pub summary: String,
    pub metrics: Value,
    /// The statement the check reproduces.
    pub anchor: String,
}

impl Check {
    pub fn new(
        name: impl Into<String>,
        status: Status,
        summary: impl Into<String>,
        metrics: Value,
        anchor: &str,
    ) -> Self {
        Check {
            name: name.into(),
            status,
            summary: summary.into(),
            metrics,
            anchor: anchor.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub command: String,
    pub config: RunConfig,
    pub checks: Vec<Check>,
    pub status: Status,
    pub timestamp: String,
}

impl Report {
    pub fn new(command: &str, config: RunConfig, checks: Vec<Check>) -> Self {
        let status = checks
            .iter()
            .map(|c| c.status)
            .max()
            .unwrap_or(Status::Pass);
        Report {
            schema: SCHEMA.to_string(),
            command: command.to_string(),
            config,
            checks,
            status,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self.status {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Inconclusive => 2,
        }
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{:<12} {:<40} {}\n",
                c.status.label(),
                c.name,
                c.summary
            ));
        }
        let count = |s: Status| self.checks.iter().filter(|c| c.status == s).count();
        out.push_str(&format!(
            "{} checks: {} pass, {} fail, {} inconclusive\n",
            self.checks.len(),
            count(Status::Pass),
            count(Status::Fail),
            count(Status::Inconclusive)
        ));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn worst_status_wins() {
        let c = |s| Check::new("x", s, "", json!({}), "");
        let r = Report::new(
            "t",
            RunConfig::default(),
            vec![c(Status::Pass), c(Status::Inconclusive)],
        );
        assert_eq!(r.exit_code(), 2);
        let r = Report::new(
            "t",
            RunConfig::default(),
            vec![c(Status::Fail), c(Status::Inconclusive)],
        );
        assert_eq!(r.exit_code(), 1);
        assert_eq!(
            Report::new("t", RunConfig::default(), vec![]).exit_code(),
            0
        );
    }
}
