//! Exhaustive alignment oracle and random small instances.

use std::collections::{HashMap, HashSet, VecDeque};

use pathminer::conformance::{Alignment, Move};
use pathminer::petri::{Marking, NetBuilder, PetriNet};
use rand::seq::IndexedRandom;
use rand::Rng;

/// Minimal alignment cost by Bellman-Ford over the fully enumerated
/// product of reachable markings and trace positions. `None` when the final
/// marking cannot be reached.
pub fn oracle_cost(net: &PetriNet, trace: &[String]) -> Option<u32> {
    let mut markings = vec![net.initial_marking().clone()];
    let mut index: HashMap<Marking, usize> = HashMap::from([(markings[0].clone(), 0)]);
    let mut succ: Vec<Vec<(usize, Option<String>)>> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let m = markings[i].clone();
        let mut out = Vec::new();
        for t in net.enabled(&m) {
            let next = net.fire(&m, t).unwrap();
            let j = *index.entry(next.clone()).or_insert_with(|| {
                markings.push(next);
                queue.push_back(markings.len() - 1);
                markings.len() - 1
            });
            out.push((j, net.transition(t).label.clone()));
        }
        if succ.len() <= i {
            succ.resize(i + 1, Vec::new());
        }
        succ[i] = out;
    }
    succ.resize(markings.len(), Vec::new());

    let n = trace.len();
    let id = |m: usize, p: usize| m * (n + 1) + p;
    let mut edges: Vec<(usize, usize, u32)> = Vec::new();
    for m in 0..markings.len() {
        for p in 0..=n {
            if p < n {
                edges.push((id(m, p), id(m, p + 1), 1));
            }
            for (j, label) in &succ[m] {
                match label {
                    None => edges.push((id(m, p), id(*j, p), 0)),
                    Some(l) => {
                        edges.push((id(m, p), id(*j, p), 1));
                        if p < n && *l == trace[p] {
                            edges.push((id(m, p), id(*j, p + 1), 0));
                        }
                    }
                }
            }
        }
    }
    let mut dist = vec![u32::MAX; markings.len() * (n + 1)];
    dist[id(0, 0)] = 0;
    loop {
        let mut changed = false;
        for &(a, b, w) in &edges {
            if dist[a] != u32::MAX && dist[a] + w < dist[b] {
                dist[b] = dist[a] + w;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let goal = index.get(net.final_marking())?;
    let d = dist[id(*goal, n)];
    (d != u32::MAX).then_some(d)
}

/// Checks both projections and the cost bookkeeping of an alignment.
pub fn check_alignment(net: &PetriNet, trace: &[String], a: &Alignment) -> Result<(), String> {
    let log: Vec<&str> = a.log_projection();
    if log != trace.iter().map(String::as_str).collect::<Vec<_>>() {
        return Err(format!("log projection {log:?} differs from {trace:?}"));
    }
    let mut m = net.initial_marking().clone();
    for t in a.model_projection() {
        m = net.fire(&m, t).map_err(|e| e.to_string())?;
    }
    if &m != net.final_marking() {
        return Err("model projection does not reach the final marking".into());
    }
    for mv in &a.moves {
        let ok = match mv {
            Move::Sync { transition, activity } => {
                net.transition(*transition).label.as_deref() == Some(activity.as_str())
            }
            Move::Model { transition } => !net.transition(*transition).is_silent(),
            Move::Silent { transition } => net.transition(*transition).is_silent(),
            Move::Log { .. } => true,
        };
        if !ok {
            return Err(format!("move {mv:?} mislabelled"));
        }
    }
    let sum: u32 = a.moves.iter().map(Move::cost).sum();
    if sum != a.cost {
        return Err(format!("cost {} but moves sum to {sum}", a.cost));
    }
    Ok(())
}

/// Token-conserving random net (every transition consumes as many tokens as
/// it produces), so the reachable state space is finite.
pub fn random_instance<R: Rng>(rng: &mut R) -> (PetriNet, Vec<String>) {
    let labels = ["a", "b", "c"];
    let n_places = rng.random_range(2..=5);
    let n_transitions = rng.random_range(1..=8);
    let mut b = NetBuilder::new();
    let places: Vec<_> = (0..n_places).map(|i| b.place(format!("p{i}")).unwrap()).collect();
    for i in 0..n_transitions {
        let label = if rng.random_bool(0.25) { None } else { labels.choose(rng).copied() };
        let t = b.transition(format!("t{i}"), label).unwrap();
        let k = if n_places >= 2 && rng.random_bool(0.3) { 2 } else { 1 };
        let pre: Vec<_> = places.choose_multiple(rng, k).copied().collect();
        let post: Vec<_> = places.choose_multiple(rng, k).copied().collect();
        for p in pre {
            b.input(p, t);
        }
        for p in post {
            b.output(t, p);
        }
    }
    let tokens = rng.random_range(1..=2);
    for _ in 0..tokens {
        b.mark_initial(*places.choose(rng).unwrap());
    }
    for _ in 0..tokens {
        b.mark_final(*places.choose(rng).unwrap());
    }
    let net = b.build().unwrap();
    let len = rng.random_range(0..=6);
    let alphabet = ["a", "b", "c", "d"];
    let trace = (0..len).map(|_| alphabet.choose(rng).unwrap().to_string()).collect();
    (net, trace)
}

/// Reachable marking count; used to skip degenerate instances in reports.
#[allow(dead_code)]
pub fn reachable_markings(net: &PetriNet) -> usize {
    let mut seen = HashSet::from([net.initial_marking().clone()]);
    let mut queue = VecDeque::from([net.initial_marking().clone()]);
    while let Some(m) = queue.pop_front() {
        for t in net.enabled(&m) {
            let next = net.fire(&m, t).unwrap();
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    seen.len()
}
