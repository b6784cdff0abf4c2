use std::collections::BTreeMap;

use crate::model::EventLog;

/// Directly-follows counts over all traces of a log.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DirectlyFollowsGraph {
    pub activities: BTreeMap<String, u64>,
    pub edges: BTreeMap<(String, String), u64>,
    pub start_activities: BTreeMap<String, u64>,
    pub end_activities: BTreeMap<String, u64>,
}

impl DirectlyFollowsGraph {
    pub fn from_traces<S: AsRef<str>>(traces: &[Vec<S>]) -> Self {
        let mut g = DirectlyFollowsGraph::default();
        for trace in traces {
            let acts: Vec<&str> = trace.iter().map(AsRef::as_ref).collect();
            for a in &acts {
                *g.activities.entry(a.to_string()).or_default() += 1;
            }
            for w in acts.windows(2) {
                *g.edges
                    .entry((w[0].to_string(), w[1].to_string()))
                    .or_default() += 1;
            }
            if let (Some(first), Some(last)) = (acts.first(), acts.last()) {
                *g.start_activities.entry(first.to_string()).or_default() += 1;
                *g.end_activities.entry(last.to_string()).or_default() += 1;
            }
        }
        g
    }

    pub fn follows(&self, a: &str, b: &str) -> bool {
        self.edges.contains_key(&(a.to_string(), b.to_string()))
    }

    pub fn total_edge_frequency(&self) -> u64 {
        self.edges.values().sum()
    }
}

pub fn build_dfg(log: &EventLog) -> DirectlyFollowsGraph {
    DirectlyFollowsGraph::from_traces(&log.activity_traces())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Event;

    #[test]
    fn example_log_counts() {
        let day = "2023-02-20".parse().unwrap();
        let log = EventLog::new(vec![
            Event::new("007", "Visit before CO", day),
            Event::new("007", "HF", day),
            Event::new("007", "Death_HF", day),
            Event::new("008", "Visit before CO", day),
        ]);
        let g = build_dfg(&log);
        let edge = |a: &str, b: &str| g.edges.get(&(a.to_string(), b.to_string())).copied();
        assert_eq!(g.edges.len(), 2);
        assert_eq!(edge("Visit before CO", "HF"), Some(1));
        assert_eq!(edge("HF", "Death_HF"), Some(1));
        assert_eq!(g.start_activities["Visit before CO"], 2);
        assert_eq!(g.end_activities["Death_HF"], 1);
        assert_eq!(g.end_activities["Visit before CO"], 1);
    }

    #[test]
    fn single_and_empty() {
        let g = DirectlyFollowsGraph::from_traces(&[vec!["a"]]);
        assert!(g.edges.is_empty());
        assert_eq!(g.start_activities["a"], 1);
        assert_eq!(g.end_activities["a"], 1);
        assert_eq!(build_dfg(&EventLog::default()), DirectlyFollowsGraph::default());
    }

    #[test]
    fn counts_every_position() {
        let g = DirectlyFollowsGraph::from_traces(&[vec!["a", "b", "a", "b"], vec!["a", "b"]]);
        assert_eq!(g.edges[&("a".into(), "b".into())], 3);
        assert_eq!(g.edges[&("b".into(), "a".into())], 1);
        assert_eq!(g.total_edge_frequency(), 4);
    }
}
