use super::classify::Classifier;
use super::dataset::{Dataset, FeatureKind, Value};

const MAX_DEPTH: usize = 10;
const MIN_SPLIT: usize = 4;

#[derive(Debug, Clone, PartialEq)]
enum Test {
    /// Left when `value <= threshold`.
    Threshold(f64),
    /// Left when equal to the category.
    Equals(String),
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf(usize),
    Split {
        feature: usize,
        test: Test,
        left: Box<Node>,
        right: Box<Node>,
        missing: Box<Node>,
    },
}

/// CART tree with Gini impurity. Every split has a third branch for rows
/// whose tested feature is missing.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    root: Node,
}

fn gini(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

fn weighted(parts: &[&[usize]]) -> f64 {
    parts
        .iter()
        .map(|c| c.iter().sum::<usize>() as f64 * gini(c))
        .sum()
}

fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

struct Builder<'a> {
    data: &'a Dataset,
    k: usize,
}

impl Builder<'_> {
    fn counts(&self, idx: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.k];
        for &i in idx {
            c[self.data.labels[i]] += 1;
        }
        c
    }

    fn build(&self, idx: &[usize], depth: usize, fallback: usize) -> Node {
        if idx.is_empty() {
            return Node::Leaf(fallback);
        }
        let counts = self.counts(idx);
        let here = majority(&counts);
        if depth >= MAX_DEPTH || idx.len() < MIN_SPLIT || counts.iter().filter(|&&c| c > 0).count() == 1 {
            return Node::Leaf(here);
        }
        let parent = idx.len() as f64 * gini(&counts);
        let Some((feature, test, _)) = self.best_split(idx, parent) else {
            return Node::Leaf(here);
        };
        let (mut left, mut right, mut missing) = (Vec::new(), Vec::new(), Vec::new());
        for &i in idx {
            match route(&test, &self.data.rows[i][feature]) {
                Some(true) => left.push(i),
                Some(false) => right.push(i),
                None => missing.push(i),
            }
        }
        Node::Split {
            feature,
            left: Box::new(self.build(&left, depth + 1, here)),
            right: Box::new(self.build(&right, depth + 1, here)),
            missing: Box::new(self.build(&missing, depth + 1, here)),
            test,
        }
    }

    fn best_split(&self, idx: &[usize], parent: f64) -> Option<(usize, Test, f64)> {
        let mut best: Option<(usize, Test, f64)> = None;
        let mut consider = |f: usize, test: Test, score: f64| {
            if score < parent - 1e-9 && best.as_ref().is_none_or(|b| score < b.2 - 1e-12) {
                best = Some((f, test, score));
            }
        };
        for (f, kind) in self.data.kinds.iter().enumerate() {
            let missing: Vec<usize> = idx
                .iter()
                .copied()
                .filter(|&i| self.data.rows[i][f] == Value::Missing)
                .collect();
            let miss_counts = self.counts(&missing);
            match kind {
                FeatureKind::Numeric => {
                    let mut present: Vec<(f64, usize)> = idx
                        .iter()
                        .filter_map(|&i| match self.data.rows[i][f] {
                            Value::Num(x) => Some((x, self.data.labels[i])),
                            _ => None,
                        })
                        .collect();
                    present.sort_by(|a, b| a.0.total_cmp(&b.0));
                    let mut left = vec![0; self.k];
                    let mut right = vec![0; self.k];
                    for &(_, l) in &present {
                        right[l] += 1;
                    }
                    for w in 0..present.len().saturating_sub(1) {
                        let (x, l) = present[w];
                        left[l] += 1;
                        right[l] -= 1;
                        let next = present[w + 1].0;
                        if next == x {
                            continue;
                        }
                        let score = weighted(&[&left, &right, &miss_counts]);
                        consider(f, Test::Threshold(x + (next - x) / 2.0), score);
                    }
                }
                FeatureKind::Categorical => {
                    let mut per_cat: std::collections::BTreeMap<&str, Vec<usize>> = Default::default();
                    for &i in idx {
                        if let Value::Cat(c) = &self.data.rows[i][f] {
                            per_cat.entry(c.as_str()).or_insert_with(|| vec![0; self.k])[self.data.labels[i]] += 1;
                        }
                    }
                    if per_cat.len() < 2 {
                        continue;
                    }
                    let total: Vec<usize> = (0..self.k)
                        .map(|c| per_cat.values().map(|v| v[c]).sum())
                        .collect();
                    for (cat, yes) in &per_cat {
                        let no: Vec<usize> = total.iter().zip(yes).map(|(t, y)| t - y).collect();
                        let score = weighted(&[yes, &no, &miss_counts]);
                        consider(f, Test::Equals(cat.to_string()), score);
                    }
                }
            }
        }
        best
    }
}

fn route(test: &Test, value: &Value) -> Option<bool> {
    match (test, value) {
        (_, Value::Missing) => None,
        (Test::Threshold(t), Value::Num(x)) => Some(*x <= *t),
        (Test::Equals(c), Value::Cat(v)) => Some(v == c),
        // a value of the other kind never occurs for a fitted dataset
        _ => Some(false),
    }
}

impl DecisionTree {
    pub fn fit(data: &Dataset) -> Self {
        let idx: Vec<usize> = (0..data.len()).collect();
        let builder = Builder { data, k: data.classes.len() };
        let fallback = majority(&builder.counts(&idx));
        DecisionTree { root: builder.build(&idx, 0, fallback) }
    }

    /// Index of the feature tested at the root, if the tree splits at all.
    pub fn root_feature(&self) -> Option<usize> {
        match &self.root {
            Node::Leaf(_) => None,
            Node::Split { feature, .. } => Some(*feature),
        }
    }

    /// Threshold of the root test when it is numeric.
    pub fn root_threshold(&self) -> Option<f64> {
        match &self.root {
            Node::Split { test: Test::Threshold(t), .. } => Some(*t),
            _ => None,
        }
    }
}

impl Classifier for DecisionTree {
    fn predict(&self, row: &[Value]) -> usize {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf(c) => return *c,
                Node::Split { feature, test, left, right, missing } => {
                    node = match route(test, &row[*feature]) {
                        Some(true) => left,
                        Some(false) => right,
                        None => missing,
                    };
                }
            }
        }
    }
}
