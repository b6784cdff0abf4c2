use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::dataset::{Dataset, FeatureKind, Value};
use super::tree::DecisionTree;
use super::DecisionError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassifierKind {
    Majority,
    NaiveBayes,
    Logistic,
    DecisionTree,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 4] = [
        ClassifierKind::Majority,
        ClassifierKind::NaiveBayes,
        ClassifierKind::Logistic,
        ClassifierKind::DecisionTree,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Majority => "majority",
            ClassifierKind::NaiveBayes => "naive-bayes",
            ClassifierKind::Logistic => "logistic",
            ClassifierKind::DecisionTree => "decision-tree",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = DecisionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ClassifierKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| DecisionError::UnknownClassifier(s.to_string()))
    }
}

/// A fitted model mapping a feature row to a class index.
pub trait Classifier {
    fn predict(&self, row: &[Value]) -> usize;
}

fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s > scores[best] {
            best = i;
        }
    }
    best
}

pub struct Majority {
    class: usize,
}

impl Majority {
    pub fn fit(data: &Dataset) -> Self {
        let counts: Vec<f64> = data.class_counts().into_iter().map(|c| c as f64).collect();
        Majority { class: argmax(&counts) }
    }
}

impl Classifier for Majority {
    fn predict(&self, _row: &[Value]) -> usize {
        self.class
    }
}

enum NbFeature {
    /// Per class `(mean, variance)`, `None` without observations.
    Gaussian(Vec<Option<(f64, f64)>>),
    /// Per class category counts and observed totals.
    Categorical {
        counts: Vec<BTreeMap<String, usize>>,
        totals: Vec<usize>,
        vocabulary: usize,
    },
}

/// Gaussian and categorical naive Bayes; a missing value drops that feature
/// from the product for the row.
pub struct NaiveBayes {
    log_prior: Vec<f64>,
    features: Vec<NbFeature>,
}

impl NaiveBayes {
    pub fn fit(data: &Dataset) -> Self {
        let k = data.classes.len();
        let n = data.len() as f64;
        let log_prior = data
            .class_counts()
            .into_iter()
            .map(|c| if c == 0 { f64::NEG_INFINITY } else { (c as f64 / n).ln() })
            .collect();

        let mut max_var: f64 = 0.0;
        let mut features = Vec::new();
        for (f, kind) in data.kinds.iter().enumerate() {
            match kind {
                FeatureKind::Numeric => {
                    let mut per_class: Vec<Vec<f64>> = vec![Vec::new(); k];
                    for (row, &label) in data.rows.iter().zip(&data.labels) {
                        if let Value::Num(x) = row[f] {
                            per_class[label].push(x);
                        }
                    }
                    let all: Vec<f64> = per_class.iter().flatten().copied().collect();
                    max_var = max_var.max(mean_var(&all).map_or(0.0, |(_, v)| v));
                    features.push(NbFeature::Gaussian(per_class.iter().map(|xs| mean_var(xs)).collect()));
                }
                FeatureKind::Categorical => {
                    let mut counts: Vec<BTreeMap<String, usize>> = vec![BTreeMap::new(); k];
                    let mut totals = vec![0; k];
                    let mut vocab = std::collections::BTreeSet::new();
                    for (row, &label) in data.rows.iter().zip(&data.labels) {
                        if let Value::Cat(c) = &row[f] {
                            *counts[label].entry(c.clone()).or_default() += 1;
                            totals[label] += 1;
                            vocab.insert(c.clone());
                        }
                    }
                    features.push(NbFeature::Categorical { counts, totals, vocabulary: vocab.len() });
                }
            }
        }
        let epsilon = 1e-9 * max_var.max(1.0);
        for f in &mut features {
            if let NbFeature::Gaussian(stats) = f {
                for (_, var) in stats.iter_mut().flatten() {
                    *var += epsilon;
                }
            }
        }
        NaiveBayes { log_prior, features }
    }
}

fn mean_var(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    Some((mean, var))
}

impl Classifier for NaiveBayes {
    fn predict(&self, row: &[Value]) -> usize {
        let mut scores = self.log_prior.clone();
        for (feature, value) in self.features.iter().zip(row) {
            match (feature, value) {
                (NbFeature::Gaussian(stats), Value::Num(x)) => {
                    // classes without observations would make the feature incomparable
                    if stats.iter().zip(&self.log_prior).any(|(s, p)| s.is_none() && p.is_finite()) {
                        continue;
                    }
                    for (score, s) in scores.iter_mut().zip(stats) {
                        if let Some((mean, var)) = s {
                            *score += -0.5 * (2.0 * std::f64::consts::PI * var).ln()
                                - (x - mean).powi(2) / (2.0 * var);
                        }
                    }
                }
                (NbFeature::Categorical { counts, totals, vocabulary }, Value::Cat(c)) => {
                    if !counts.iter().any(|m| m.contains_key(c)) {
                        continue;
                    }
                    for ((score, m), total) in scores.iter_mut().zip(counts).zip(totals) {
                        let hits = m.get(c).copied().unwrap_or(0) as f64;
                        *score += ((hits + 1.0) / (*total as f64 + *vocabulary as f64)).ln();
                    }
                }
                _ => {}
            }
        }
        argmax(&scores)
    }
}

enum Column {
    Numeric { feature: usize, mean: f64, sd: f64, indicator: bool },
    OneHot { feature: usize, categories: Vec<String>, indicator: bool },
}

/// Multinomial logistic regression on standardized features. Missing
/// numbers are imputed with the training mean and flagged by an indicator
/// column; categories are one-hot encoded.
pub struct Logistic {
    columns: Vec<Column>,
    /// One weight row per class; the last entry is the bias.
    weights: Vec<Vec<f64>>,
}

const LOGISTIC_EPOCHS: usize = 300;
const LOGISTIC_RATE: f64 = 0.5;
const LOGISTIC_L2: f64 = 1e-4;

impl Logistic {
    pub fn fit(data: &Dataset) -> Self {
        let mut columns = Vec::new();
        for (f, kind) in data.kinds.iter().enumerate() {
            let indicator = data.rows.iter().any(|r| r[f] == Value::Missing);
            match kind {
                FeatureKind::Numeric => {
                    let xs: Vec<f64> = data
                        .rows
                        .iter()
                        .filter_map(|r| match r[f] {
                            Value::Num(x) => Some(x),
                            _ => None,
                        })
                        .collect();
                    let (mean, var) = mean_var(&xs).unwrap_or((0.0, 1.0));
                    let sd = if var > 0.0 { var.sqrt() } else { 1.0 };
                    columns.push(Column::Numeric { feature: f, mean, sd, indicator });
                }
                FeatureKind::Categorical => {
                    let categories: Vec<String> = data
                        .rows
                        .iter()
                        .filter_map(|r| match &r[f] {
                            Value::Cat(c) => Some(c.clone()),
                            _ => None,
                        })
                        .collect::<std::collections::BTreeSet<_>>()
                        .into_iter()
                        .collect();
                    columns.push(Column::OneHot { feature: f, categories, indicator });
                }
            }
        }
        let mut model = Logistic { columns, weights: Vec::new() };
        let x: Vec<Vec<f64>> = data.rows.iter().map(|r| model.design(r)).collect();
        let d = x.first().map_or(1, Vec::len);
        let k = data.classes.len();
        let n = data.len() as f64;
        let mut w = vec![vec![0.0; d]; k];
        let mut probs = vec![0.0; k];
        for _ in 0..LOGISTIC_EPOCHS {
            let mut grad = vec![vec![0.0; d]; k];
            for (xi, &yi) in x.iter().zip(&data.labels) {
                softmax(&w, xi, &mut probs);
                for c in 0..k {
                    let err = probs[c] - f64::from(u8::from(c == yi));
                    for (g, v) in grad[c].iter_mut().zip(xi) {
                        *g += err * v;
                    }
                }
            }
            for c in 0..k {
                for j in 0..d {
                    let penalty = if j + 1 == d { 0.0 } else { LOGISTIC_L2 * w[c][j] };
                    w[c][j] -= LOGISTIC_RATE * (grad[c][j] / n + penalty);
                }
            }
        }
        model.weights = w;
        model
    }

    fn design(&self, row: &[Value]) -> Vec<f64> {
        let mut x = Vec::new();
        for col in &self.columns {
            match col {
                Column::Numeric { feature, mean, sd, indicator } => {
                    match row[*feature] {
                        Value::Num(v) => x.push((v - mean) / sd),
                        _ => x.push(0.0),
                    }
                    if *indicator {
                        x.push(f64::from(u8::from(row[*feature] == Value::Missing)));
                    }
                }
                Column::OneHot { feature, categories, indicator } => {
                    for c in categories {
                        x.push(f64::from(u8::from(matches!(&row[*feature], Value::Cat(v) if v == c))));
                    }
                    if *indicator {
                        x.push(f64::from(u8::from(row[*feature] == Value::Missing)));
                    }
                }
            }
        }
        x.push(1.0);
        x
    }
}

fn softmax(w: &[Vec<f64>], x: &[f64], out: &mut [f64]) {
    for (o, wc) in out.iter_mut().zip(w) {
        *o = wc.iter().zip(x).map(|(a, b)| a * b).sum();
    }
    let max = out.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for o in out.iter_mut() {
        *o = (*o - max).exp();
        total += *o;
    }
    for o in out.iter_mut() {
        *o /= total;
    }
}

impl Classifier for Logistic {
    fn predict(&self, row: &[Value]) -> usize {
        let x = self.design(row);
        let mut p = vec![0.0; self.weights.len()];
        softmax(&self.weights, &x, &mut p);
        argmax(&p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifierReport {
    pub kind: ClassifierKind,
    /// Holdout accuracy in percent.
    pub accuracy: f64,
    pub classes: Vec<String>,
    /// `confusion[actual][predicted]` over the holdout.
    pub confusion: Vec<Vec<usize>>,
    /// Set when only one class occurs; accuracy is then 100 by definition.
    pub degenerate: bool,
    /// Feature tested at the root of a decision tree.
    pub root_split: Option<String>,
    pub n_train: usize,
    pub n_test: usize,
}

pub fn fit(kind: ClassifierKind, data: &Dataset) -> (Box<dyn Classifier>, Option<String>) {
    match kind {
        ClassifierKind::Majority => (Box::new(Majority::fit(data)), None),
        ClassifierKind::NaiveBayes => (Box::new(NaiveBayes::fit(data)), None),
        ClassifierKind::Logistic => (Box::new(Logistic::fit(data)), None),
        ClassifierKind::DecisionTree => {
            let tree = DecisionTree::fit(data);
            let root = tree.root_feature().map(|f| data.features[f].clone());
            (Box::new(tree), root)
        }
    }
}

/// Fits each kind on `train` and scores it on `test`.
pub fn evaluate(data: &Dataset, train: &[usize], test: &[usize], kinds: &[ClassifierKind]) -> Vec<ClassifierReport> {
    let k = data.classes.len();
    let train_set = data.subset(train);
    kinds
        .iter()
        .map(|&kind| {
            if k == 1 {
                return ClassifierReport {
                    kind,
                    accuracy: 100.0,
                    classes: data.classes.clone(),
                    confusion: vec![vec![test.len()]],
                    degenerate: true,
                    root_split: None,
                    n_train: train.len(),
                    n_test: test.len(),
                };
            }
            let (model, root_split) = fit(kind, &train_set);
            let mut confusion = vec![vec![0; k]; k];
            for &i in test {
                confusion[data.labels[i]][model.predict(&data.rows[i])] += 1;
            }
            let correct: usize = (0..k).map(|c| confusion[c][c]).sum();
            ClassifierReport {
                kind,
                accuracy: 100.0 * correct as f64 / test.len() as f64,
                classes: data.classes.clone(),
                confusion,
                degenerate: false,
                root_split,
                n_train: train.len(),
                n_test: test.len(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(rows: Vec<Vec<Value>>, labels: Vec<usize>, kinds: Vec<FeatureKind>) -> Dataset {
        Dataset {
            features: (0..kinds.len()).map(|i| format!("f{i}")).collect(),
            kinds,
            classes: vec!["a".into(), "b".into()],
            rows,
            labels,
        }
    }

    fn separable() -> Dataset {
        let rows: Vec<Vec<Value>> = (0..40)
            .map(|i| {
                let x = if i < 20 { i as f64 } else { 100.0 + i as f64 };
                let cat = if i < 20 { "lo" } else { "hi" };
                vec![Value::Num(x), Value::Cat(cat.into())]
            })
            .collect();
        let labels = (0..40).map(|i| usize::from(i >= 20)).collect();
        data(rows, labels, vec![FeatureKind::Numeric, FeatureKind::Categorical])
    }

    #[test]
    fn kinds_parse() {
        for k in ClassifierKind::ALL {
            assert_eq!(k.as_str().parse::<ClassifierKind>().unwrap(), k);
        }
        assert!(matches!("svm".parse::<ClassifierKind>(), Err(DecisionError::UnknownClassifier(_))));
    }

    #[test]
    fn every_kind_learns_a_separable_problem() {
        let d = separable();
        let all: Vec<usize> = (0..d.len()).collect();
        for r in evaluate(&d, &all, &all, &ClassifierKind::ALL) {
            if r.kind == ClassifierKind::Majority {
                assert_eq!(r.accuracy, 50.0);
            } else {
                assert_eq!(r.accuracy, 100.0, "{}", r.kind);
            }
        }
    }

    #[test]
    fn missing_values_are_tolerated() {
        let mut d = separable();
        for (i, row) in d.rows.iter_mut().enumerate() {
            if i % 3 == 0 {
                row[0] = Value::Missing;
            }
            if i % 4 == 0 {
                row[1] = Value::Missing;
            }
        }
        let all: Vec<usize> = (0..d.len()).collect();
        for r in evaluate(&d, &all, &all, &ClassifierKind::ALL[1..]) {
            assert!(r.accuracy >= 90.0, "{} {}", r.kind, r.accuracy);
        }
    }

    #[test]
    fn majority_matches_top_share() {
        let rows = vec![vec![Value::Missing]; 10];
        let labels = vec![0, 0, 0, 1, 1, 1, 1, 1, 1, 1];
        let d = data(rows, labels, vec![FeatureKind::Numeric]);
        let all: Vec<usize> = (0..10).collect();
        let r = &evaluate(&d, &all, &all, &[ClassifierKind::Majority])[0];
        assert_eq!(r.accuracy, 70.0);
        assert_eq!(r.confusion, vec![vec![0, 3], vec![0, 7]]);
    }
}
