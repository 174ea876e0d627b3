use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

/// Where a fitted preprocessing step got its statistics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformProvenance {
    pub name: String,
    pub fit_on_training_only: bool,
}

/// A model input together with the time it is measured, relative to
/// randomization (0 = baseline, positive = after randomization).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionInput {
    pub feature: String,
    pub timepoint: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    IdOverlap { participant_id: String },
    TransformFitOutsideTraining { transform: String },
    ForwardLookingInput { feature: String, timepoint: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::IdOverlap { participant_id } => {
                write!(f, "participant {participant_id} appears in both training and test data")
            }
            Violation::TransformFitOutsideTraining { transform } => {
                write!(f, "transform {transform} was fit on data outside the training set")
            }
            Violation::ForwardLookingInput { feature, timepoint } => write!(
                f,
                "input {feature} is measured at {timepoint} (after randomization): forward-looking information"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub violations: Vec<Violation>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            return write!(f, "PASS");
        }
        write!(f, "FAIL")?;
        for v in &self.violations {
            write!(f, "\n  - {v}")?;
        }
        Ok(())
    }
}

/// Checks train/test separation: disjoint ids, training-only transforms, and
/// no post-randomization model inputs.
pub fn leakage_audit(
    training_ids: &BTreeSet<String>,
    test_ids: &BTreeSet<String>,
    transforms: &[TransformProvenance],
    prediction_inputs: &[PredictionInput],
) -> AuditReport {
    let mut violations: Vec<Violation> = training_ids
        .intersection(test_ids)
        .map(|id| Violation::IdOverlap { participant_id: id.clone() })
        .collect();
    violations.extend(
        transforms
            .iter()
            .filter(|t| !t.fit_on_training_only)
            .map(|t| Violation::TransformFitOutsideTraining { transform: t.name.clone() }),
    );
    violations.extend(
        prediction_inputs
            .iter()
            .filter(|p| p.timepoint > 0.0)
            .map(|p| Violation::ForwardLookingInput { feature: p.feature.clone(), timepoint: p.timepoint }),
    );
    AuditReport { violations }
}
