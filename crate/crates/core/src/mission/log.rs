use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{MissionError, Phase};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub timestamp_us: i64,
    pub phase: Phase,
    pub event: String,
    pub payload: Value,
}

/// Time-ordered mission events, one JSON object per line on disk.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MissionLog {
    pub records: Vec<LogRecord>,
}

impl MissionLog {
    pub fn push(&mut self, timestamp_us: i64, phase: Phase, event: &str, payload: Value) {
        self.records.push(LogRecord {
            timestamp_us,
            phase,
            event: event.to_string(),
            payload,
        });
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn events<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a LogRecord> + 'a {
        self.records.iter().filter(move |r| r.event == name)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("log record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, MissionError> {
        let records = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(n, l)| {
                serde_json::from_str(l)
                    .map_err(|e| MissionError::Parse(format!("log line {}: {e}", n + 1)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(MissionLog { records })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn jsonl_round_trip() {
        let mut log = MissionLog::default();
        log.push(0, Phase::Traverse, "start", json!({"z": 0.0}));
        log.push(1_500_000, Phase::Done, "end", Value::Null);
        let text = log.to_jsonl();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(MissionLog::from_jsonl(&text).unwrap(), log);
        assert!(MissionLog::from_jsonl("{\"timestamp_us\": 1").is_err());
    }
}
