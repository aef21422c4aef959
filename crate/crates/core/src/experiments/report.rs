use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{ExperimentError, Scenario, ScenarioConfig};

pub const REPORT_FORMAT: u32 = 1;
pub const CSV_COLUMNS: [&str; 5] = ["version", "scenario", "record", "quantity", "value"];

/// Named numbers and flags of one trial or summary row.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub label: String,
    pub quantities: BTreeMap<String, f64>,
    pub flags: BTreeMap<String, bool>,
}

impl Record {
    pub fn new(label: impl Into<String>) -> Self {
        Record { label: label.into(), ..Default::default() }
    }

    pub fn set(&mut self, name: &str, value: f64) -> &mut Self {
        self.quantities.insert(name.to_string(), value);
        self
    }

    pub fn flag(&mut self, name: &str, value: bool) -> &mut Self {
        self.flags.insert(name.to_string(), value);
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.quantities.get(name).copied()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub seed: u64,
}

/// Output of a scenario. The serialized form depends only on the config and
/// the crate version; wall time goes to a separate file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub format: u32,
    pub scenario: Scenario,
    pub config: ScenarioConfig,
    pub records: Vec<Record>,
    pub pass: bool,
    pub provenance: Provenance,
}

impl Report {
    pub fn new(config: &ScenarioConfig, records: Vec<Record>, pass: bool) -> Self {
        Report {
            format: REPORT_FORMAT,
            scenario: config.scenario,
            config: config.clone(),
            records,
            pass,
            provenance: Provenance {
                tool: env!("CARGO_PKG_NAME").to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                seed: config.seed,
            },
        }
    }

    pub fn record(&self, label: &str) -> Option<&Record> {
        self.records.iter().find(|r| r.label == label)
    }

    pub fn to_json(&self) -> Result<String, ExperimentError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Long format, one row per quantity; flags are written as 0 or 1.
    pub fn to_csv(&self) -> Result<String, ExperimentError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_COLUMNS)?;
        let version = &self.provenance.version;
        let scenario = self.scenario.to_string();
        for r in &self.records {
            for (q, v) in &r.quantities {
                w.write_record([version.as_str(), &scenario, &r.label, q, &v.to_string()])?;
            }
            for (q, v) in &r.flags {
                w.write_record([version.as_str(), &scenario, &r.label, q, if *v { "1" } else { "0" }])?;
            }
        }
        let bytes = w.into_inner().map_err(|e| ExperimentError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Writes `<scenario>.json`, `<scenario>.csv` and `<scenario>.timing.json`
    /// into `dir` and returns the paths.
    pub fn write_to(&self, dir: &Path, wall: Duration) -> Result<Vec<PathBuf>, ExperimentError> {
        std::fs::create_dir_all(dir)?;
        let stem = self.scenario.to_string();
        let json = dir.join(format!("{stem}.json"));
        let csv = dir.join(format!("{stem}.csv"));
        let timing = dir.join(format!("{stem}.timing.json"));
        std::fs::write(&json, self.to_json()?)?;
        std::fs::write(&csv, self.to_csv()?)?;
        let t = serde_json::json!({ "scenario": stem, "wall_time_s": wall.as_secs_f64() });
        std::fs::write(&timing, format!("{}\n", serde_json::to_string_pretty(&t)?))?;
        Ok(vec![json, csv, timing])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_long_format() {
        let cfg = ScenarioConfig::new(Scenario::Tau);
        let mut r = Record::new("class");
        r.set("p01", 1.0).set("p23", 0.5).flag("pseudo_symplectic", true);
        let rep = Report::new(&cfg, vec![r], true);
        let csv = rep.to_csv().unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "version,scenario,record,quantity,value");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].ends_with(",tau,class,p01,1"));
        assert!(lines[3].ends_with(",tau,class,pseudo_symplectic,1"));
    }

    #[test]
    fn json_round_trip() {
        let cfg = ScenarioConfig::new(Scenario::Junction).resolved().unwrap();
        let mut r = Record::new("summary");
        r.set("worst", 1.25e-13).flag("ok", false);
        let rep = Report::new(&cfg, vec![r], false);
        let back: Report = serde_json::from_str(&rep.to_json().unwrap()).unwrap();
        assert_eq!(back, rep);
    }
}
