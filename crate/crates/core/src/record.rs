//! JSON experiment records.
//!
//! Schema `boostlab.experiment-record/1`, one object with stable fields:
//!
//! * `schema`: the schema tag above.
//! * `concept`: `{"labels": [±1, ...]}` over the whole domain.
//! * `training_set`: `{"indices": [...], "labels": [...]}`, slot order.
//! * `hypotheses`: `[{"id": n, "predictions": [±1, ...]}, ...]`.
//! * `ledger`: `{"rounds": [{"queries": [{"query": {"support": [...],
//!   "weights": [...]}, "response_id": n}, ...]}, ...]}`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::{Concept, Hypothesis, TrainingSet};
use crate::error::{LabError, Result};
use crate::ledger::QueryLedger;

pub const RECORD_SCHEMA: &str = "boostlab.experiment-record/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub schema: String,
    pub concept: Concept,
    pub training_set: TrainingSet,
    pub hypotheses: Vec<Hypothesis>,
    pub ledger: QueryLedger,
}

impl ExperimentRecord {
    pub fn new(concept: Concept, training_set: TrainingSet, hypotheses: Vec<Hypothesis>, ledger: QueryLedger) -> Self {
        Self {
            schema: RECORD_SCHEMA.to_string(),
            concept,
            training_set,
            hypotheses,
            ledger,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| LabError::Io(e.to_string()))
    }

    /// Parses and checks the schema tag and training-set labels.
    pub fn from_json(text: &str) -> Result<Self> {
        let record: Self = serde_json::from_str(text).map_err(|e| LabError::InvalidInput(e.to_string()))?;
        if record.schema != RECORD_SCHEMA {
            return Err(LabError::InvalidInput(format!("unknown record schema {:?}", record.schema)));
        }
        record.training_set.validate_against(&record.concept)?;
        Ok(record)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::WeightVector;

    #[test]
    fn round_trip_and_field_names() {
        let c = Concept::new(vec![1, -1, 1]).unwrap();
        let s = TrainingSet::new(&c, vec![2, 0, 2]).unwrap();
        let h = c.as_hypothesis(4);
        let mut ledger = QueryLedger::new();
        ledger.record(0, WeightVector::uniform(&[0, 2]).unwrap(), &h).unwrap();
        let rec = ExperimentRecord::new(c, s, vec![h], ledger);
        let json = rec.to_json().unwrap();
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(value["schema"], RECORD_SCHEMA);
        assert_eq!(value["concept"]["labels"], serde_json::json!([1, -1, 1]));
        assert_eq!(value["training_set"]["indices"], serde_json::json!([2, 0, 2]));
        assert_eq!(value["hypotheses"][0]["id"], 4);
        assert_eq!(value["ledger"]["rounds"][0]["queries"][0]["response_id"], 4);
        assert_eq!(ExperimentRecord::from_json(&json).unwrap(), rec);
    }

    #[test]
    fn rejects_mislabeled_sample() {
        let text = serde_json::json!({
            "schema": RECORD_SCHEMA,
            "concept": {"labels": [1, -1]},
            "training_set": {"indices": [1], "labels": [1]},
            "hypotheses": [],
            "ledger": {"rounds": []}
        })
        .to_string();
        assert!(ExperimentRecord::from_json(&text).is_err());
        let wrong_schema = text.replace(RECORD_SCHEMA, "other/0");
        assert!(ExperimentRecord::from_json(&wrong_schema).is_err());
    }
}
