use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use crate::petri::{Marking, PetriNet, TransitionIdx};

use super::ConformanceError;

pub const DEFAULT_STATE_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Move {
    Sync { transition: TransitionIdx, activity: String },
    Log { activity: String },
    Model { transition: TransitionIdx },
    Silent { transition: TransitionIdx },
}

impl Move {
    /// Standard cost function.
    pub fn cost(&self) -> u32 {
        match self {
            Move::Sync { .. } | Move::Silent { .. } => 0,
            Move::Log { .. } | Move::Model { .. } => 1,
        }
    }

    pub fn transition(&self) -> Option<TransitionIdx> {
        match self {
            Move::Sync { transition, .. } | Move::Model { transition } | Move::Silent { transition } => {
                Some(*transition)
            }
            Move::Log { .. } => None,
        }
    }

    pub fn activity(&self) -> Option<&str> {
        match self {
            Move::Sync { activity, .. } | Move::Log { activity } => Some(activity),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    pub moves: Vec<Move>,
    pub cost: u32,
}

impl Alignment {
    pub fn log_projection(&self) -> Vec<&str> {
        self.moves.iter().filter_map(Move::activity).collect()
    }

    pub fn model_projection(&self) -> Vec<TransitionIdx> {
        self.moves.iter().filter_map(Move::transition).collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Heuristic {
    #[default]
    Zero,
    /// Remaining events whose label no transition carries; each of them
    /// must become a log move.
    LabelBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlignOptions {
    pub heuristic: Heuristic,
    pub state_cap: usize,
}

impl Default for AlignOptions {
    fn default() -> Self {
        AlignOptions {
            heuristic: Heuristic::Zero,
            state_cap: DEFAULT_STATE_CAP,
        }
    }
}

struct Node {
    parent: Option<(usize, Move)>,
    marking: Marking,
    pos: usize,
}

/// Optimal alignment by best-first search over the synchronous product.
/// Among optimal alignments the one with fewest silent moves wins.
pub fn align<S: AsRef<str>>(net: &PetriNet, trace: &[S]) -> Result<Alignment, ConformanceError> {
    align_with(net, trace, AlignOptions::default())
}

pub fn align_with<S: AsRef<str>>(
    net: &PetriNet,
    trace: &[S],
    opts: AlignOptions,
) -> Result<Alignment, ConformanceError> {
    let trace: Vec<&str> = trace.iter().map(AsRef::as_ref).collect();
    let n = trace.len();
    let h: Vec<u32> = match opts.heuristic {
        Heuristic::Zero => vec![0; n + 1],
        Heuristic::LabelBound => {
            let known = |a: &str| net.transitions().iter().any(|t| t.label.as_deref() == Some(a));
            let mut h = vec![0; n + 1];
            for i in (0..n).rev() {
                h[i] = h[i + 1] + u32::from(!known(trace[i]));
            }
            h
        }
    };

    let mut nodes: Vec<Node> = Vec::new();
    let mut best: HashMap<(Marking, usize), (u32, u32)> = HashMap::new();
    let mut heap = BinaryHeap::new();
    let mut counter = 0u64;

    let start = net.initial_marking().clone();
    best.insert((start.clone(), 0), (0, 0));
    nodes.push(Node { parent: None, marking: start, pos: 0 });
    heap.push(Reverse((h[0], 0u32, counter, 0u32, 0usize)));

    while let Some(Reverse((_, silent, _, g, id))) = heap.pop() {
        let (marking, pos) = (nodes[id].marking.clone(), nodes[id].pos);
        if best.get(&(marking.clone(), pos)) != Some(&(g, silent)) {
            continue;
        }
        if pos == n && &marking == net.final_marking() {
            return Ok(reconstruct(&nodes, id, g));
        }

        let mut successors: Vec<(Marking, usize, Move)> = Vec::new();
        if pos < n {
            successors.push((
                marking.clone(),
                pos + 1,
                Move::Log { activity: trace[pos].to_string() },
            ));
        }
        for t in net.enabled(&marking) {
            let next = net.fire_unchecked(&marking, t);
            match &net.transition(t).label {
                None => successors.push((next, pos, Move::Silent { transition: t })),
                Some(label) => {
                    if pos < n && label == trace[pos] {
                        successors.push((
                            next.clone(),
                            pos + 1,
                            Move::Sync { transition: t, activity: label.clone() },
                        ));
                    }
                    successors.push((next, pos, Move::Model { transition: t }));
                }
            }
        }

        for (m, p, mv) in successors {
            let cost = (g + mv.cost(), silent + u32::from(matches!(mv, Move::Silent { .. })));
            let key = (m, p);
            if best.get(&key).is_some_and(|b| cost >= *b) {
                continue;
            }
            let (m, p) = (key.0.clone(), key.1);
            best.insert(key, cost);
            if best.len() > opts.state_cap {
                return Err(ConformanceError::StateCap { cap: opts.state_cap });
            }
            counter += 1;
            nodes.push(Node { parent: Some((id, mv)), marking: m, pos: p });
            heap.push(Reverse((cost.0 + h[p], cost.1, counter, cost.0, nodes.len() - 1)));
        }
    }
    Err(ConformanceError::FinalUnreachable)
}

fn reconstruct(nodes: &[Node], mut id: usize, cost: u32) -> Alignment {
    let mut moves = Vec::new();
    while let Some((parent, mv)) = &nodes[id].parent {
        moves.push(mv.clone());
        id = *parent;
    }
    moves.reverse();
    Alignment { moves, cost }
}

/// Cost of the cheapest path from the initial to the final marking, counting
/// visible transitions only.
pub fn cheapest_model_cost(net: &PetriNet, opts: AlignOptions) -> Result<u32, ConformanceError> {
    align_with::<&str>(net, &[], opts).map(|a| a.cost)
}
