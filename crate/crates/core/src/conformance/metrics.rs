use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use crate::petri::{Marking, PetriNet, TransitionIdx};

use super::align::{Alignment, Move};

/// `1 - Σ cost / Σ (|trace| + empty_cost)`, where `empty_cost` is the cost of
/// aligning the empty trace. Pairs are `(trace length, alignment cost)`.
pub fn fitness_from_costs(pairs: &[(usize, u32)], empty_cost: u32) -> f64 {
    let cost: u64 = pairs.iter().map(|(_, c)| u64::from(*c)).sum();
    let worst: u64 = pairs
        .iter()
        .map(|(len, _)| *len as u64 + u64::from(empty_cost))
        .sum();
    if worst == 0 {
        return 1.0;
    }
    1.0 - cost as f64 / worst as f64
}

/// Visible transitions enabled somewhere in the silent closure of `m`.
fn enabled_visible(net: &PetriNet, m: &Marking, cache: &mut HashMap<Marking, BTreeSet<TransitionIdx>>) -> usize {
    if let Some(set) = cache.get(m) {
        return set.len();
    }
    let mut seen = HashSet::from([m.clone()]);
    let mut queue = VecDeque::from([m.clone()]);
    let mut visible = BTreeSet::new();
    // silent cycles are harmless; the closure is capped to stay finite on
    // nets whose silent transitions generate tokens
    while let Some(cur) = queue.pop_front() {
        for t in net.enabled(&cur) {
            if net.transition(t).is_silent() {
                let next = net.fire_unchecked(&cur, t);
                if seen.len() < 10_000 && seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            } else {
                visible.insert(t);
            }
        }
    }
    let n = visible.len();
    cache.insert(m.clone(), visible);
    n
}

/// Markings reached after each visible model step of an alignment, paired
/// with the next visible transition fired from there.
fn visible_states(net: &PetriNet, alignment: &Alignment) -> Vec<(Marking, Option<TransitionIdx>)> {
    let mut m = net.initial_marking().clone();
    let mut anchor = m.clone();
    let mut out = Vec::new();
    for mv in &alignment.moves {
        let Some(t) = mv.transition() else { continue };
        m = net.fire_unchecked(&m, t);
        if !matches!(mv, Move::Silent { .. }) {
            out.push((anchor, Some(t)));
            anchor = m.clone();
        }
    }
    out.push((anchor, None));
    out
}

/// Escaping-edges precision with markings as states. Each visited state
/// counts the visible transitions enabled through its silent closure; those
/// never observed next from that marking anywhere in the log escape.
pub fn precision_from_alignments(net: &PetriNet, alignments: &[Alignment]) -> f64 {
    let visits: Vec<Vec<(Marking, Option<TransitionIdx>)>> =
        alignments.iter().map(|a| visible_states(net, a)).collect();
    let mut observed: HashMap<&Marking, BTreeSet<TransitionIdx>> = HashMap::new();
    for (m, next) in visits.iter().flatten() {
        let entry = observed.entry(m).or_default();
        if let Some(t) = next {
            entry.insert(*t);
        }
    }
    let mut cache = HashMap::new();
    let (mut escaping, mut enabled) = (0usize, 0usize);
    for (m, _) in visits.iter().flatten() {
        let en = enabled_visible(net, m, &mut cache);
        let seen = observed[m].iter().filter(|t| cache[m].contains(t)).count();
        enabled += en;
        escaping += en - seen;
    }
    if enabled == 0 {
        return 1.0;
    }
    1.0 - escaping as f64 / enabled as f64
}

/// Firings of each visible transition in the model projection.
pub fn execution_counts(net: &PetriNet, alignments: &[Alignment]) -> BTreeMap<TransitionIdx, u64> {
    let mut counts: BTreeMap<TransitionIdx, u64> = net.visible_transitions().map(|t| (t, 0)).collect();
    for a in alignments {
        for mv in &a.moves {
            if let Move::Sync { transition, .. } | Move::Model { transition } = mv {
                *counts.entry(*transition).or_default() += 1;
            }
        }
    }
    counts
}

/// `1 - mean(1/sqrt(exec(t)))` over visible transitions; unfired ones add 1.
pub fn generalization_from_counts(counts: &[u64]) -> f64 {
    if counts.is_empty() {
        return 1.0;
    }
    let sum: f64 = counts
        .iter()
        .map(|&c| if c == 0 { 1.0 } else { 1.0 / (c as f64).sqrt() })
        .sum();
    1.0 - sum / counts.len() as f64
}

/// `1 / (1 + max(0, mean degree - 2))`.
pub fn simplicity(net: &PetriNet) -> f64 {
    let nodes = net.places().len() + net.transitions().len();
    if nodes == 0 {
        return 1.0;
    }
    let mean_degree = 2.0 * net.arcs().len() as f64 / nodes as f64;
    1.0 / (1.0 + (mean_degree - 2.0).max(0.0))
}

pub fn f1(fitness: f64, precision: f64) -> f64 {
    let s = fitness + precision;
    if s == 0.0 {
        0.0
    } else {
        2.0 * fitness * precision / s
    }
}
