use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::AttributeValue;

use super::extract::DecisionInstance;
use super::DecisionError;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Cat(String),
    Missing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    Numeric,
    Categorical,
}

/// Instances encoded as rows of typed feature values with class indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Vec<String>,
    pub kinds: Vec<FeatureKind>,
    pub classes: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    pub labels: Vec<usize>,
}

fn encode(v: &AttributeValue) -> Value {
    match v {
        AttributeValue::Integer(i) => Value::Num(*i as f64),
        AttributeValue::Real(r) if r.is_finite() => Value::Num(*r),
        AttributeValue::Real(_) | AttributeValue::Missing => Value::Missing,
        AttributeValue::Timestamp(d) => {
            Value::Num(d.signed_duration_since(chrono::NaiveDate::default()).num_days() as f64)
        }
        AttributeValue::Boolean(b) => Value::Cat(b.to_string()),
        AttributeValue::Text(s) => Value::Cat(s.clone()),
    }
}

impl Dataset {
    /// A feature is numeric when all its present values are numbers, and
    /// categorical otherwise. Features never present are dropped.
    pub fn from_instances(instances: &[DecisionInstance]) -> Self {
        let names: BTreeSet<&str> = instances
            .iter()
            .flat_map(|i| i.features.keys().map(String::as_str))
            .collect();
        let classes: Vec<String> = instances
            .iter()
            .map(|i| i.chosen.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut features = Vec::new();
        let mut kinds = Vec::new();
        let mut columns: Vec<Vec<Value>> = Vec::new();
        for name in names {
            let raw: Vec<Value> = instances
                .iter()
                .map(|i| i.features.get(name).map_or(Value::Missing, encode))
                .collect();
            if raw.iter().all(|v| *v == Value::Missing) {
                continue;
            }
            let numeric = raw.iter().all(|v| !matches!(v, Value::Cat(_)));
            let column = if numeric {
                raw
            } else {
                raw.into_iter()
                    .map(|v| match v {
                        Value::Num(x) => Value::Cat(x.to_string()),
                        other => other,
                    })
                    .collect()
            };
            features.push(name.to_string());
            kinds.push(if numeric { FeatureKind::Numeric } else { FeatureKind::Categorical });
            columns.push(column);
        }
        let rows = (0..instances.len())
            .map(|r| columns.iter().map(|c| c[r].clone()).collect())
            .collect();
        let labels = instances
            .iter()
            .map(|i| classes.binary_search(&i.chosen).expect("class collected above"))
            .collect();
        Dataset { features, kinds, classes, rows, labels }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            features: self.features.clone(),
            kinds: self.kinds.clone(),
            classes: self.classes.clone(),
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.classes.len()];
        for &l in &self.labels {
            c[l] += 1;
        }
        c
    }
}

/// Stratified holdout: per class, a seeded shuffle sends
/// `round(n_class * test_fraction)` instances to the test side. At least
/// one instance always lands on each side.
pub fn stratified_split(
    data: &Dataset,
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>), DecisionError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(DecisionError::InvalidSplit(test_fraction));
    }
    if data.len() < 2 {
        return Err(DecisionError::TooFewInstances(data.len()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in data.labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for members in by_class.values_mut() {
        members.shuffle(&mut rng);
        let k = ((members.len() as f64 * test_fraction).round() as usize).min(members.len());
        test.extend_from_slice(&members[..k]);
        train.extend_from_slice(&members[k..]);
    }
    if test.is_empty() {
        let largest = by_class.values().max_by_key(|m| m.len()).expect("non-empty data");
        let moved = *largest.last().expect("non-empty class");
        train.retain(|&i| i != moved);
        test.push(moved);
    }
    if train.is_empty() {
        train.push(test.pop().expect("at least two instances"));
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}
