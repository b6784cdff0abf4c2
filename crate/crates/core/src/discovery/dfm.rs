use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::model::EventLog;
use crate::petri::{NetBuilder, PetriNet};

use super::dfg::{build_dfg, DirectlyFollowsGraph};
use super::DiscoveryError;

type Edge = (String, String);

/// Edges kept by the path filter, before and after connectivity repair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSelection {
    /// All edges, most frequent first, ties by name.
    pub ranked: Vec<(Edge, u64)>,
    /// Length of the frequency-mass prefix of `ranked`.
    pub prefix_len: usize,
    /// Edges re-added to connect every activity to start and end.
    pub repaired: Vec<Edge>,
}

impl EdgeSelection {
    pub fn retained(&self) -> BTreeSet<Edge> {
        self.ranked[..self.prefix_len]
            .iter()
            .map(|(e, _)| e.clone())
            .chain(self.repaired.iter().cloned())
            .collect()
    }
}

pub fn select_edges(dfg: &DirectlyFollowsGraph, paths: f64) -> Result<EdgeSelection, DiscoveryError> {
    if !(0.0..=1.0).contains(&paths) {
        return Err(DiscoveryError::InvalidPaths(paths));
    }
    let mut ranked: Vec<(Edge, u64)> = dfg.edges.iter().map(|(e, f)| (e.clone(), *f)).collect();
    ranked.sort_by(|(ea, fa), (eb, fb)| fb.cmp(fa).then_with(|| ea.cmp(eb)));

    let target = paths * dfg.total_edge_frequency() as f64;
    let mut mass = 0u64;
    let mut prefix_len = 0;
    while prefix_len < ranked.len() && (mass as f64) < target {
        mass += ranked[prefix_len].1;
        prefix_len += 1;
    }

    let mut kept: BTreeSet<Edge> = ranked[..prefix_len].iter().map(|(e, _)| e.clone()).collect();
    let mut repaired = Vec::new();
    let activities: BTreeSet<&str> = dfg.activities.keys().map(String::as_str).collect();
    loop {
        let (fwd, bwd) = reach(dfg, &kept);
        if activities.iter().all(|a| fwd.contains(*a) && bwd.contains(*a)) {
            break;
        }
        let score = fwd.len() + bwd.len();
        let next = ranked[prefix_len..].iter().map(|(e, _)| e).find(|e| {
            if kept.contains(*e) {
                return false;
            }
            let mut trial = kept.clone();
            trial.insert((*e).clone());
            let (f, b) = reach(dfg, &trial);
            f.len() + b.len() > score
        });
        match next {
            Some(e) => {
                kept.insert(e.clone());
                repaired.push(e.clone());
            }
            None => break,
        }
    }
    Ok(EdgeSelection { ranked, prefix_len, repaired })
}

/// Activities reachable from the start activities and those from which an
/// end activity is reachable, over `edges`.
fn reach<'a>(
    dfg: &'a DirectlyFollowsGraph,
    edges: &'a BTreeSet<Edge>,
) -> (BTreeSet<&'a str>, BTreeSet<&'a str>) {
    let mut succ: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    let mut pred: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (a, b) in edges {
        succ.entry(a).or_default().push(b);
        pred.entry(b).or_default().push(a);
    }
    let flood = |seeds: Vec<&'a str>, adj: &BTreeMap<&'a str, Vec<&'a str>>| {
        let mut seen: BTreeSet<&str> = seeds.iter().copied().collect();
        let mut queue: VecDeque<&str> = seeds.into();
        while let Some(a) = queue.pop_front() {
            for b in adj.get(a).into_iter().flatten() {
                if seen.insert(b) {
                    queue.push_back(b);
                }
            }
        }
        seen
    };
    let fwd = flood(dfg.start_activities.keys().map(String::as_str).collect(), &succ);
    let bwd = flood(dfg.end_activities.keys().map(String::as_str).collect(), &pred);
    (fwd, bwd)
}

/// Directly-follows model. Each activity is a labelled transition between
/// its own `in:` and `out:` places; every retained edge, start and end is a
/// silent transition routing a single token, so the net is a state machine.
pub fn mine_dfm(log: &EventLog, paths: f64) -> Result<PetriNet, DiscoveryError> {
    let dfg = build_dfg(log);
    let selection = select_edges(&dfg, paths)?;
    Ok(dfm_net(&dfg, &selection.retained()))
}

fn dfm_net(dfg: &DirectlyFollowsGraph, edges: &BTreeSet<Edge>) -> PetriNet {
    let mut b = NetBuilder::new();
    let source = b.place("source").expect("fresh id");
    let sink = b.place("sink").expect("fresh id");
    let mut io = BTreeMap::new();
    for a in dfg.activities.keys() {
        let pin = b.place(format!("in:{a}")).expect("fresh id");
        let pout = b.place(format!("out:{a}")).expect("fresh id");
        let t = b.transition(format!("t:{a}"), Some(a)).expect("fresh id");
        b.input(pin, t).output(t, pout);
        io.insert(a.as_str(), (pin, pout));
    }
    for (i, a) in dfg.start_activities.keys().enumerate() {
        let t = b.transition(format!("s:start{i}"), None).expect("fresh id");
        b.input(source, t).output(t, io[a.as_str()].0);
    }
    for (i, (x, y)) in edges.iter().enumerate() {
        let t = b.transition(format!("s:edge{i}"), None).expect("fresh id");
        b.input(io[x.as_str()].1, t).output(t, io[y.as_str()].0);
    }
    for (i, a) in dfg.end_activities.keys().enumerate() {
        let t = b.transition(format!("s:end{i}"), None).expect("fresh id");
        b.input(io[a.as_str()].1, t).output(t, sink);
    }
    b.mark_initial(source).mark_final(sink);
    b.build().expect("arcs are unique by construction")
}
