use super::{EvalError, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use std::fmt;

/// An (endpoint, timepoint) pair.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Measure {
    pub endpoint: String,
    pub timepoint: String,
}

impl Measure {
    pub fn new(endpoint: impl Into<String>, timepoint: impl Into<String>) -> Self {
        Self { endpoint: endpoint.into(), timepoint: timepoint.into() }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.endpoint, self.timepoint)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arm {
    Treatment,
    Control,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelevanceGrade {
    High,
    Medium,
    Low,
}

/// User-supplied judgement of how well a cohort represents the planned trial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relevance {
    pub grade: RelevanceGrade,
    pub rationale: String,
}

/// Participant-level table stored column-wise. Every column has one entry
/// per participant; `None` marks a missing value.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CohortData {
    pub cohort_id: String,
    pub participant_ids: Vec<String>,
    pub arms: Vec<Option<Arm>>,
    pub baseline: BTreeMap<String, Vec<Option<f64>>>,
    pub scores: BTreeMap<Measure, Vec<Option<f64>>>,
    pub outcomes: BTreeMap<Measure, Vec<Option<f64>>>,
    /// Completion flag per timepoint.
    pub completed: BTreeMap<String, Vec<bool>>,
    pub relevance: Option<Relevance>,
    /// Content digest of the source file, when loaded from disk.
    pub digest: Option<String>,
}

impl CohortData {
    pub fn new(cohort_id: impl Into<String>, participant_ids: Vec<String>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(participant_ids.len());
        for id in &participant_ids {
            if !seen.insert(id.as_str()) {
                return Err(EvalError::DuplicateId(id.clone()));
            }
        }
        let n = participant_ids.len();
        Ok(Self {
            cohort_id: cohort_id.into(),
            participant_ids,
            arms: vec![None; n],
            ..Default::default()
        })
    }

    pub fn len(&self) -> usize {
        self.participant_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.participant_ids.is_empty()
    }

    fn check_len(&self, what: &str, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(EvalError::Invalid(format!(
                "{what} has {len} entries for {} participants",
                self.len()
            )));
        }
        Ok(())
    }

    pub fn with_baseline(mut self, name: impl Into<String>, values: Vec<Option<f64>>) -> Result<Self> {
        let name = name.into();
        self.check_len(&name, values.len())?;
        self.baseline.insert(name, values);
        Ok(self)
    }

    pub fn with_score(mut self, measure: Measure, values: Vec<Option<f64>>) -> Result<Self> {
        self.check_len("score", values.len())?;
        self.scores.insert(measure, values);
        Ok(self)
    }

    pub fn with_outcome(mut self, measure: Measure, values: Vec<Option<f64>>) -> Result<Self> {
        self.check_len("outcome", values.len())?;
        self.outcomes.insert(measure, values);
        Ok(self)
    }

    pub fn with_arms(mut self, arms: Vec<Option<Arm>>) -> Result<Self> {
        self.check_len("arm", arms.len())?;
        self.arms = arms;
        Ok(self)
    }

    pub fn with_relevance(mut self, relevance: Relevance) -> Self {
        self.relevance = Some(relevance);
        self
    }

    /// Checks column lengths and id uniqueness.
    pub fn validate(&self) -> Result<()> {
        Self::new(self.cohort_id.clone(), self.participant_ids.clone())?;
        self.check_len("arm", self.arms.len())?;
        for (k, v) in &self.baseline {
            self.check_len(k, v.len())?;
        }
        for (k, v) in self.scores.iter().chain(&self.outcomes) {
            self.check_len(&k.to_string(), v.len())?;
        }
        for (k, v) in &self.completed {
            self.check_len(k, v.len())?;
        }
        Ok(())
    }

    /// All measures with an outcome column.
    pub fn measures(&self) -> Vec<Measure> {
        self.outcomes.keys().cloned().collect()
    }

    /// Participants in `idx`, in that order.
    pub fn subset(&self, idx: &[usize]) -> Self {
        let pick = |v: &Vec<Option<f64>>| idx.iter().map(|&i| v[i]).collect::<Vec<_>>();
        Self {
            cohort_id: self.cohort_id.clone(),
            participant_ids: idx.iter().map(|&i| self.participant_ids[i].clone()).collect(),
            arms: idx.iter().map(|&i| self.arms[i]).collect(),
            baseline: self.baseline.iter().map(|(k, v)| (k.clone(), pick(v))).collect(),
            scores: self.scores.iter().map(|(k, v)| (k.clone(), pick(v))).collect(),
            outcomes: self.outcomes.iter().map(|(k, v)| (k.clone(), pick(v))).collect(),
            completed: self
                .completed
                .iter()
                .map(|(k, v)| (k.clone(), idx.iter().map(|&i| v[i]).collect()))
                .collect(),
            relevance: self.relevance.clone(),
            digest: None,
        }
    }

    /// Stacks cohorts into one. Participant ids become `cohort_id/participant_id`
    /// so that ids repeated across studies stay distinct. Columns absent from a
    /// cohort are filled with missing values.
    pub fn concat(cohort_id: impl Into<String>, parts: &[&CohortData]) -> Result<Self> {
        let ids = parts
            .iter()
            .flat_map(|c| c.participant_ids.iter().map(move |p| format!("{}/{}", c.cohort_id, p)))
            .collect();
        let mut out = Self::new(cohort_id, ids)?;
        out.arms = parts.iter().flat_map(|c| c.arms.iter().copied()).collect();

        fn stack<K: Ord + Clone>(
            parts: &[&CohortData],
            get: impl Fn(&CohortData) -> &BTreeMap<K, Vec<Option<f64>>>,
        ) -> BTreeMap<K, Vec<Option<f64>>> {
            let keys: std::collections::BTreeSet<K> = parts.iter().flat_map(|c| get(c).keys().cloned()).collect();
            keys.into_iter()
                .map(|k| {
                    let col = parts
                        .iter()
                        .flat_map(|c| match get(c).get(&k) {
                            Some(v) => v.clone(),
                            None => vec![None; c.len()],
                        })
                        .collect();
                    (k, col)
                })
                .collect()
        }
        out.baseline = stack(parts, |c| &c.baseline);
        out.scores = stack(parts, |c| &c.scores);
        out.outcomes = stack(parts, |c| &c.outcomes);
        Ok(out)
    }

    pub(crate) fn outcome_column(&self, m: &Measure) -> Result<&[Option<f64>]> {
        self.outcomes.get(m).map(Vec::as_slice).ok_or_else(|| EvalError::MissingMeasure {
            cohort: self.cohort_id.clone(),
            kind: "outcome",
            measure: m.to_string(),
        })
    }

    pub(crate) fn score_column(&self, m: &Measure) -> Result<&[Option<f64>]> {
        self.scores.get(m).map(Vec::as_slice).ok_or_else(|| EvalError::MissingMeasure {
            cohort: self.cohort_id.clone(),
            kind: "score",
            measure: m.to_string(),
        })
    }
}
