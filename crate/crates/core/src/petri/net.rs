use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PetriError {
    #[error("duplicate node id '{0}'")]
    DuplicateId(String),
    #[error("unknown node id '{0}'")]
    UnknownId(String),
    #[error("arc {0} -> {1} does not connect a place and a transition")]
    NotBipartite(String, String),
    #[error("duplicate arc {0} -> {1}")]
    DuplicateArc(String, String),
    #[error("transition '{0}' is not enabled")]
    NotEnabled(String),
    #[error("transition '{id}' has no {side} arc")]
    Unconnected { id: String, side: &'static str },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlaceIdx(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TransitionIdx(pub usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Place {
    pub id: String,
}

/// A transition; `label == None` marks a silent (tau) transition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub id: String,
    pub label: Option<String>,
}

impl Transition {
    pub fn is_silent(&self) -> bool {
        self.label.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Arc {
    PlaceToTransition(PlaceIdx, TransitionIdx),
    TransitionToPlace(TransitionIdx, PlaceIdx),
}

/// Token counts per place, indexed by [`PlaceIdx`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Marking(Vec<u32>);

impl Marking {
    pub fn empty(places: usize) -> Self {
        Marking(vec![0; places])
    }

    pub fn from_places(places: usize, marked: &[PlaceIdx]) -> Self {
        let mut m = Marking::empty(places);
        for p in marked {
            m.0[p.0] += 1;
        }
        m
    }

    pub fn tokens(&self, p: PlaceIdx) -> u32 {
        self.0[p.0]
    }

    pub fn add(&mut self, p: PlaceIdx, n: u32) {
        self.0[p.0] += n;
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    /// Marked places with multiplicity, in place order.
    pub fn to_places(&self) -> Vec<PlaceIdx> {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(i, &n)| std::iter::repeat_n(PlaceIdx(i), n as usize))
            .collect()
    }
}

/// A labelled place/transition net with unit arc weights.
#[derive(Debug, Clone)]
pub struct PetriNet {
    places: Vec<Place>,
    transitions: Vec<Transition>,
    arcs: Vec<Arc>,
    preset: Vec<Vec<PlaceIdx>>,
    postset: Vec<Vec<PlaceIdx>>,
    place_out: Vec<Vec<TransitionIdx>>,
    place_in: Vec<Vec<TransitionIdx>>,
    initial: Marking,
    final_marking: Marking,
}

impl PartialEq for PetriNet {
    /// Structural equality up to node and arc ordering.
    fn eq(&self, other: &Self) -> bool {
        fn canon(net: &PetriNet) -> impl Eq + fmt::Debug {
            let places: Vec<&str> = {
                let mut v: Vec<&str> = net.places.iter().map(|p| p.id.as_str()).collect();
                v.sort();
                v
            };
            let transitions: BTreeMap<&str, Option<&str>> = net
                .transitions
                .iter()
                .map(|t| (t.id.as_str(), t.label.as_deref()))
                .collect();
            let mut arcs: Vec<(&str, &str)> = net.arcs.iter().map(|a| net.arc_ids(*a)).collect();
            arcs.sort();
            let marking = |m: &Marking| {
                let mut v: Vec<&str> = m.to_places().iter().map(|p| net.place(*p).id.as_str()).collect();
                v.sort();
                v.into_iter().map(str::to_string).collect::<Vec<_>>()
            };
            (
                places.into_iter().map(str::to_string).collect::<Vec<_>>(),
                transitions
                    .into_iter()
                    .map(|(k, v)| (k.to_string(), v.map(str::to_string)))
                    .collect::<Vec<_>>(),
                arcs.into_iter()
                    .map(|(a, b)| (a.to_string(), b.to_string()))
                    .collect::<Vec<_>>(),
                marking(&net.initial),
                marking(&net.final_marking),
            )
        }
        canon(self) == canon(other)
    }
}

impl PetriNet {
    pub fn places(&self) -> &[Place] {
        &self.places
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn place(&self, p: PlaceIdx) -> &Place {
        &self.places[p.0]
    }

    pub fn transition(&self, t: TransitionIdx) -> &Transition {
        &self.transitions[t.0]
    }

    pub fn place_indices(&self) -> impl Iterator<Item = PlaceIdx> {
        (0..self.places.len()).map(PlaceIdx)
    }

    pub fn transition_indices(&self) -> impl Iterator<Item = TransitionIdx> {
        (0..self.transitions.len()).map(TransitionIdx)
    }

    pub fn place_by_id(&self, id: &str) -> Option<PlaceIdx> {
        self.places.iter().position(|p| p.id == id).map(PlaceIdx)
    }

    pub fn transition_by_id(&self, id: &str) -> Option<TransitionIdx> {
        self.transitions.iter().position(|t| t.id == id).map(TransitionIdx)
    }

    pub fn preset(&self, t: TransitionIdx) -> &[PlaceIdx] {
        &self.preset[t.0]
    }

    pub fn postset(&self, t: TransitionIdx) -> &[PlaceIdx] {
        &self.postset[t.0]
    }

    /// Transitions consuming from `p`.
    pub fn outgoing(&self, p: PlaceIdx) -> &[TransitionIdx] {
        &self.place_out[p.0]
    }

    /// Transitions producing into `p`.
    pub fn incoming(&self, p: PlaceIdx) -> &[TransitionIdx] {
        &self.place_in[p.0]
    }

    pub fn initial_marking(&self) -> &Marking {
        &self.initial
    }

    pub fn final_marking(&self) -> &Marking {
        &self.final_marking
    }

    pub fn visible_transitions(&self) -> impl Iterator<Item = TransitionIdx> + '_ {
        self.transition_indices()
            .filter(|t| !self.transitions[t.0].is_silent())
    }

    pub fn arc_ids(&self, arc: Arc) -> (&str, &str) {
        match arc {
            Arc::PlaceToTransition(p, t) => (&self.places[p.0].id, &self.transitions[t.0].id),
            Arc::TransitionToPlace(t, p) => (&self.transitions[t.0].id, &self.places[p.0].id),
        }
    }

    pub fn is_enabled(&self, marking: &Marking, t: TransitionIdx) -> bool {
        self.preset[t.0].iter().all(|p| marking.tokens(*p) > 0)
    }

    /// Transitions whose input places all carry a token.
    pub fn enabled(&self, marking: &Marking) -> Vec<TransitionIdx> {
        self.transition_indices()
            .filter(|t| self.is_enabled(marking, *t))
            .collect()
    }

    pub fn fire(&self, marking: &Marking, t: TransitionIdx) -> Result<Marking, PetriError> {
        if !self.is_enabled(marking, t) {
            return Err(PetriError::NotEnabled(self.transitions[t.0].id.clone()));
        }
        Ok(self.fire_unchecked(marking, t))
    }

    pub(crate) fn fire_unchecked(&self, marking: &Marking, t: TransitionIdx) -> Marking {
        let mut next = marking.clone();
        for p in &self.preset[t.0] {
            next.0[p.0] -= 1;
        }
        for p in &self.postset[t.0] {
            next.0[p.0] += 1;
        }
        next
    }

    /// Every transition has at least one input and one output arc.
    pub fn check_connected(&self) -> Result<(), PetriError> {
        for (i, t) in self.transitions.iter().enumerate() {
            if self.preset[i].is_empty() {
                return Err(PetriError::Unconnected {
                    id: t.id.clone(),
                    side: "input",
                });
            }
            if self.postset[i].is_empty() {
                return Err(PetriError::Unconnected {
                    id: t.id.clone(),
                    side: "output",
                });
            }
        }
        Ok(())
    }
}

/// Incremental construction of a [`PetriNet`]; ids must be unique across
/// places and transitions.
#[derive(Debug, Default, Clone)]
pub struct NetBuilder {
    places: Vec<Place>,
    transitions: Vec<Transition>,
    arcs: Vec<Arc>,
    ids: HashMap<String, Node>,
    initial: Vec<PlaceIdx>,
    final_places: Vec<PlaceIdx>,
}

#[derive(Debug, Clone, Copy)]
enum Node {
    Place(PlaceIdx),
    Transition(TransitionIdx),
}

impl NetBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn place(&mut self, id: impl Into<String>) -> Result<PlaceIdx, PetriError> {
        let id = id.into();
        if self.ids.contains_key(&id) {
            return Err(PetriError::DuplicateId(id));
        }
        let idx = PlaceIdx(self.places.len());
        self.ids.insert(id.clone(), Node::Place(idx));
        self.places.push(Place { id });
        Ok(idx)
    }

    pub fn transition(
        &mut self,
        id: impl Into<String>,
        label: Option<&str>,
    ) -> Result<TransitionIdx, PetriError> {
        let id = id.into();
        if self.ids.contains_key(&id) {
            return Err(PetriError::DuplicateId(id));
        }
        let idx = TransitionIdx(self.transitions.len());
        self.ids.insert(id.clone(), Node::Transition(idx));
        self.transitions.push(Transition {
            id,
            label: label.map(str::to_string),
        });
        Ok(idx)
    }

    pub fn input(&mut self, p: PlaceIdx, t: TransitionIdx) -> &mut Self {
        self.arcs.push(Arc::PlaceToTransition(p, t));
        self
    }

    pub fn output(&mut self, t: TransitionIdx, p: PlaceIdx) -> &mut Self {
        self.arcs.push(Arc::TransitionToPlace(t, p));
        self
    }

    /// Adds an arc between two nodes given by id.
    pub fn arc_by_id(&mut self, source: &str, target: &str) -> Result<&mut Self, PetriError> {
        let s = *self
            .ids
            .get(source)
            .ok_or_else(|| PetriError::UnknownId(source.to_string()))?;
        let t = *self
            .ids
            .get(target)
            .ok_or_else(|| PetriError::UnknownId(target.to_string()))?;
        match (s, t) {
            (Node::Place(p), Node::Transition(tr)) => Ok(self.input(p, tr)),
            (Node::Transition(tr), Node::Place(p)) => Ok(self.output(tr, p)),
            _ => Err(PetriError::NotBipartite(source.into(), target.into())),
        }
    }

    pub fn place_id(&self, id: &str) -> Result<PlaceIdx, PetriError> {
        match self.ids.get(id) {
            Some(Node::Place(p)) => Ok(*p),
            _ => Err(PetriError::UnknownId(id.to_string())),
        }
    }

    pub fn mark_initial(&mut self, p: PlaceIdx) -> &mut Self {
        self.initial.push(p);
        self
    }

    pub fn mark_final(&mut self, p: PlaceIdx) -> &mut Self {
        self.final_places.push(p);
        self
    }

    pub fn build(self) -> Result<PetriNet, PetriError> {
        let np = self.places.len();
        let nt = self.transitions.len();
        let mut seen = HashSet::new();
        let mut preset = vec![Vec::new(); nt];
        let mut postset = vec![Vec::new(); nt];
        let mut place_out = vec![Vec::new(); np];
        let mut place_in = vec![Vec::new(); np];
        for arc in &self.arcs {
            if !seen.insert(*arc) {
                let (a, b) = match *arc {
                    Arc::PlaceToTransition(p, t) => (&self.places[p.0].id, &self.transitions[t.0].id),
                    Arc::TransitionToPlace(t, p) => (&self.transitions[t.0].id, &self.places[p.0].id),
                };
                return Err(PetriError::DuplicateArc(a.clone(), b.clone()));
            }
            match *arc {
                Arc::PlaceToTransition(p, t) => {
                    preset[t.0].push(p);
                    place_out[p.0].push(t);
                }
                Arc::TransitionToPlace(t, p) => {
                    postset[t.0].push(p);
                    place_in[p.0].push(t);
                }
            }
        }
        Ok(PetriNet {
            initial: Marking::from_places(np, &self.initial),
            final_marking: Marking::from_places(np, &self.final_places),
            places: self.places,
            transitions: self.transitions,
            arcs: self.arcs,
            preset,
            postset,
            place_out,
            place_in,
        })
    }
}

/// A place with more than one outgoing arc.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionPoint {
    pub place: PlaceIdx,
    pub outgoing: Vec<TransitionIdx>,
}

pub fn decision_points(net: &PetriNet) -> Vec<DecisionPoint> {
    net.place_indices()
        .filter(|p| net.outgoing(*p).len() >= 2)
        .map(|p| DecisionPoint {
            place: p,
            outgoing: net.outgoing(p).to_vec(),
        })
        .collect()
}
