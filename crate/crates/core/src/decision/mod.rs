//! Decision mining: instances at a decision place, the distribution of the
//! choices made there, and classifiers predicting the choice from case data.

mod classify;
mod dataset;
mod extract;
mod tree;

use std::fmt::Write as _;

use thiserror::Error;

use crate::conformance::ConformanceError;
use crate::model::{EventLog, Phenotype};
use crate::petri::{decision_points, PetriNet};

pub use classify::{
    evaluate, fit, Classifier, ClassifierKind, ClassifierReport, Logistic, Majority, NaiveBayes,
};
pub use dataset::{stratified_split, Dataset, FeatureKind, Value};
pub use extract::{distribution, extract_instances, DecisionInstance, Extraction, Features, NONE_LABEL};
pub use tree::DecisionTree;

pub const DEFAULT_TEST_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DecisionError {
    #[error("unknown place '{0}'")]
    UnknownPlace(String),
    #[error("place '{0}' is not a decision point")]
    NotDecisionPoint(String),
    #[error("unknown classifier '{0}' (expected majority, naive-bayes, logistic or decision-tree)")]
    UnknownClassifier(String),
    #[error("at least two decision instances are required, got {0}")]
    TooFewInstances(usize),
    #[error("holdout fraction must lie strictly between 0 and 1, got {0}")]
    InvalidSplit(f64),
    #[error(transparent)]
    Conformance(#[from] ConformanceError),
}

#[derive(Debug, Clone)]
pub struct MineOptions {
    pub kinds: Vec<ClassifierKind>,
    pub filter: Option<Phenotype>,
    pub test_fraction: f64,
    pub seed: u64,
}

impl Default for MineOptions {
    fn default() -> Self {
        MineOptions {
            kinds: ClassifierKind::ALL.to_vec(),
            filter: None,
            test_fraction: DEFAULT_TEST_FRACTION,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionReport {
    pub place: String,
    pub filter: Option<Phenotype>,
    pub n_instances: usize,
    pub skipped_traces: usize,
    pub distribution: Vec<(String, f64)>,
    pub classifiers: Vec<ClassifierReport>,
}

/// Outgoing labels of a place, with every silent transition reported as
/// [`NONE_LABEL`] first.
fn outgoing_labels(net: &PetriNet, place: crate::petri::PlaceIdx) -> Vec<String> {
    let mut labels = Vec::new();
    if net.outgoing(place).iter().any(|t| net.transition(*t).is_silent()) {
        labels.push(NONE_LABEL.to_string());
    }
    for t in net.outgoing(place) {
        if let Some(l) = &net.transition(*t).label {
            if !labels.contains(l) {
                labels.push(l.clone());
            }
        }
    }
    labels
}

/// Extracts instances at `place` (optionally only for cases of one
/// phenotype), tabulates the choices and evaluates each classifier kind on
/// one shared stratified holdout.
pub fn mine_place(
    net: &PetriNet,
    log: &EventLog,
    place: &str,
    opts: &MineOptions,
) -> Result<DecisionReport, DecisionError> {
    let p = net
        .place_by_id(place)
        .ok_or_else(|| DecisionError::UnknownPlace(place.to_string()))?;
    if !decision_points(net).iter().any(|d| d.place == p) {
        return Err(DecisionError::NotDecisionPoint(place.to_string()));
    }
    let filtered;
    let log = match opts.filter {
        Some(ph) => {
            filtered = log.filter_cases(|t| t.events.iter().find_map(|e| e.phenotype()) == Some(ph));
            &filtered
        }
        None => log,
    };
    let extraction = extract_instances(net, log, p)?;
    let data = Dataset::from_instances(&extraction.instances);
    let (train, test) = stratified_split(&data, opts.test_fraction, opts.seed)?;
    Ok(DecisionReport {
        place: place.to_string(),
        filter: opts.filter,
        n_instances: extraction.instances.len(),
        skipped_traces: extraction.skipped,
        distribution: distribution(&extraction.instances, &outgoing_labels(net, p)),
        classifiers: evaluate(&data, &train, &test, &opts.kinds),
    })
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("strings serialize")
}

impl DecisionReport {
    /// Percentages with two decimals, accuracies with one.
    pub fn to_json(&self) -> String {
        let mut s = String::from("{\n");
        let _ = writeln!(s, "  \"place\": {},", json_str(&self.place));
        let filter = self.filter.map_or("null".to_string(), |f| json_str(f.label()));
        let _ = writeln!(s, "  \"filter\": {filter},");
        let _ = writeln!(s, "  \"n_instances\": {},", self.n_instances);
        let _ = writeln!(s, "  \"skipped_traces\": {},", self.skipped_traces);
        s.push_str("  \"distribution\": {");
        for (i, (label, pct)) in self.distribution.iter().enumerate() {
            let sep = if i == 0 { "\n" } else { ",\n" };
            let _ = write!(s, "{sep}    {}: {pct:.2}", json_str(label));
        }
        s.push_str(if self.distribution.is_empty() { "},\n" } else { "\n  },\n" });
        s.push_str("  \"classifiers\": [");
        for (i, c) in self.classifiers.iter().enumerate() {
            s.push_str(if i == 0 { "\n" } else { ",\n" });
            let _ = writeln!(s, "    {{");
            let _ = writeln!(s, "      \"kind\": {},", json_str(c.kind.as_str()));
            let _ = writeln!(s, "      \"accuracy\": {:.1},", c.accuracy);
            let _ = writeln!(s, "      \"degenerate\": {},", c.degenerate);
            let root = c.root_split.as_deref().map_or("null".to_string(), json_str);
            let _ = writeln!(s, "      \"root_split\": {root},");
            let _ = writeln!(s, "      \"n_train\": {},", c.n_train);
            let _ = writeln!(s, "      \"n_test\": {},", c.n_test);
            let classes: Vec<String> = c.classes.iter().map(|l| json_str(l)).collect();
            let _ = writeln!(s, "      \"classes\": [{}],", classes.join(", "));
            let rows: Vec<String> = c
                .confusion
                .iter()
                .map(|r| format!("[{}]", r.iter().map(usize::to_string).collect::<Vec<_>>().join(", ")))
                .collect();
            let _ = writeln!(s, "      \"confusion\": [{}]", rows.join(", "));
            s.push_str("    }");
        }
        s.push_str(if self.classifiers.is_empty() { "]\n" } else { "\n  ]\n" });
        s.push_str("}\n");
        s
    }
}
