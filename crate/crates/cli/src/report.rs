use std::collections::BTreeMap;
use std::fmt::Write;
use std::time::Duration;

use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QueryResult {
    pub name: String,
    pub value: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(skip)]
    pub cases: usize,
    #[serde(skip)]
    pub elapsed: Duration,
}

/// Results in declaration order. Timings are kept out of the serialized
/// body so that reports are reproducible byte for byte.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub queries: Vec<QueryResult>,
    pub checks: Vec<CheckResult>,
    pub seed: u64,
    pub versions: BTreeMap<String, String>,
}

impl Report {
    pub fn new(seed: u64) -> Self {
        let versions = BTreeMap::from([
            ("prochern".to_string(), env!("CARGO_PKG_VERSION").to_string()),
            ("prochern-core".to_string(), prochern_core::VERSION.to_string()),
        ]);
        Report {
            queries: Vec::new(),
            checks: Vec::new(),
            seed,
            versions,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.status == Status::Pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let versions: Vec<String> = self.versions.iter().map(|(k, v)| format!("{k} {v}")).collect();
        writeln!(out, "seed {} ({})", self.seed, versions.join(", ")).unwrap();
        for q in &self.queries {
            writeln!(out, "query {} = {}", q.name, q.value).unwrap();
        }
        for c in &self.checks {
            match (&c.status, &c.witness) {
                (Status::Pass, _) => {
                    let plural = if c.cases == 1 { "" } else { "s" };
                    writeln!(out, "check {}: pass ({} case{plural})", c.name, c.cases).unwrap()
                }
                (Status::Fail, w) => {
                    writeln!(out, "check {}: FAIL: {}", c.name, w.as_deref().unwrap_or("")).unwrap()
                }
            }
        }
        out
    }

    pub fn timings(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            writeln!(out, "{:>10.3} ms  {}", c.elapsed.as_secs_f64() * 1e3, c.name).unwrap();
        }
        out
    }
}
