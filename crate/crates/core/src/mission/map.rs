use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fs;
use std::path::Path;

use super::MissionError;
use crate::motion::Material;
use crate::perception::{ComplianceReport, DetectionMethod};

pub const MAP_FORMAT: &str = "reline-branch-map";
pub const MAP_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryStatus {
    Detected,
    CharacterizationFailed,
    NonCompliant,
    Bored,
    MachiningFailed,
    RelocationFailed,
    Drilled,
}

impl EntryStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            EntryStatus::Detected => "detected",
            EntryStatus::CharacterizationFailed => "characterization_failed",
            EntryStatus::NonCompliant => "non_compliant",
            EntryStatus::Bored => "bored",
            EntryStatus::MachiningFailed => "machining_failed",
            EntryStatus::RelocationFailed => "relocation_failed",
            EntryStatus::Drilled => "drilled",
        }
    }
}

/// Which measurement produced an estimate, and when.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub pass: u8,
    pub method: DetectionMethod,
    pub timestamp_us: i64,
    pub axial_pos_est: f64,
    pub angular_pos_est: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachiningRecord {
    pub pass: u8,
    pub material: Material,
    /// `bore`, `drill` or `ream`.
    pub operation: String,
    pub rpm: f64,
    pub planned_duration_s: f64,
    pub duration_s: f64,
    pub final_diameter: f64,
    pub jam_occurred: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapEntry {
    pub id: String,
    /// m
    pub axial_pos_est: f64,
    /// deg
    pub angular_pos_est: Option<f64>,
    /// mm
    pub diameter_est: Option<f64>,
    pub valve_axis_offset_est: Option<f64>,
    pub compliance: Option<ComplianceReport>,
    pub status: EntryStatus,
    pub provenance: Vec<Provenance>,
    #[serde(default)]
    pub machining: Vec<MachiningRecord>,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl MapEntry {
    /// Latest estimate produced by `method`.
    pub fn estimate_by(&self, method: DetectionMethod) -> Option<&Provenance> {
        self.provenance.iter().rev().find(|p| p.method == method)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassRecord {
    pub pass: u8,
    pub seed: u64,
    pub duration_s: f64,
    pub entries: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchMap {
    pub format: String,
    pub version: u32,
    pub pipe_id: String,
    pub entries: Vec<MapEntry>,
    pub pass_history: Vec<PassRecord>,
}

impl BranchMap {
    pub fn new(pipe_id: &str) -> Self {
        BranchMap {
            format: MAP_FORMAT.to_string(),
            version: MAP_VERSION,
            pipe_id: pipe_id.to_string(),
            entries: Vec::new(),
            pass_history: Vec::new(),
        }
    }

    pub fn sort_entries(&mut self) {
        self.entries
            .sort_by(|a, b| a.axial_pos_est.total_cmp(&b.axial_pos_est));
    }

    /// Sorted entries, unique ids, at least one provenance record each.
    pub fn validate(&self) -> Result<(), MissionError> {
        if self
            .entries
            .windows(2)
            .any(|w| w[0].axial_pos_est > w[1].axial_pos_est)
        {
            return Err(MissionError::Format(
                "entries are not sorted by axial position".into(),
            ));
        }
        let mut ids = HashSet::new();
        for e in &self.entries {
            if !ids.insert(e.id.as_str()) {
                return Err(MissionError::Format(format!("duplicate entry id {}", e.id)));
            }
            if e.provenance.is_empty() {
                return Err(MissionError::Format(format!(
                    "entry {} has no provenance",
                    e.id
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("branch map serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, MissionError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| MissionError::Parse(e.to_string()))?;
        match value.get("format").and_then(|f| f.as_str()) {
            Some(MAP_FORMAT) => {}
            other => {
                return Err(MissionError::Format(format!(
                    "unexpected format tag {other:?}"
                )))
            }
        }
        match value.get("version").and_then(|v| v.as_u64()) {
            Some(v) if v == MAP_VERSION as u64 => {}
            other => {
                return Err(MissionError::Format(format!(
                    "unsupported map version {other:?}, expected {MAP_VERSION}"
                )))
            }
        }
        let map: BranchMap =
            serde_json::from_value(value).map_err(|e| MissionError::Parse(e.to_string()))?;
        map.validate()?;
        Ok(map)
    }
}

pub fn save_map(map: &BranchMap, path: &Path) -> Result<(), MissionError> {
    fs::write(path, map.to_json()).map_err(|e| MissionError::Io(format!("{}: {e}", path.display())))
}

pub fn load_map(path: &Path) -> Result<BranchMap, MissionError> {
    let text = fs::read_to_string(path)
        .map_err(|e| MissionError::Io(format!("{}: {e}", path.display())))?;
    BranchMap::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perception::ComplianceReason;

    fn sample() -> BranchMap {
        let mut map = BranchMap::new("lab");
        map.entries.push(MapEntry {
            id: "B01".into(),
            axial_pos_est: 3.0101,
            angular_pos_est: Some(0.25),
            diameter_est: Some(20.01),
            valve_axis_offset_est: Some(0.1),
            compliance: Some(ComplianceReport {
                compliant: true,
                reason: ComplianceReason::Ok,
            }),
            status: EntryStatus::Bored,
            provenance: vec![Provenance {
                pass: 1,
                method: DetectionMethod::FrontLaser,
                timestamp_us: 12,
                axial_pos_est: 3.02,
                angular_pos_est: Some(0.5),
            }],
            machining: Vec::new(),
            notes: Vec::new(),
        });
        map
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("map.json");
        let map = sample();
        save_map(&map, &path).unwrap();
        assert_eq!(load_map(&path).unwrap(), map);
    }

    #[test]
    fn future_version_rejected() {
        let text = sample()
            .to_json()
            .replace("\"version\": 1", "\"version\": 2");
        assert!(matches!(
            BranchMap::from_json(&text),
            Err(MissionError::Format(_))
        ));
    }

    #[test]
    fn truncated_file_rejected() {
        let text = sample().to_json();
        assert!(matches!(
            BranchMap::from_json(&text[..text.len() / 2]),
            Err(MissionError::Parse(_))
        ));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let mut map = sample();
        map.entries.push(map.entries[0].clone());
        assert!(matches!(map.validate(), Err(MissionError::Format(_))));
    }
}
