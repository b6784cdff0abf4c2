use std::collections::BTreeSet;
use std::fmt;

use crate::model::EventLog;
use crate::petri::{NetBuilder, PetriNet};

use super::dfg::{build_dfg, DirectlyFollowsGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    /// a > b and not b > a.
    Causal,
    /// b > a and not a > b.
    InverseCausal,
    Parallel,
    Choice,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Causal => "→",
            Relation::InverseCausal => "←",
            Relation::Parallel => "∥",
            Relation::Choice => "#",
        })
    }
}

/// Alpha relations between every ordered pair of activities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Footprint {
    activities: Vec<String>,
    matrix: Vec<Vec<Relation>>,
}

impl Footprint {
    pub fn from_dfg(dfg: &DirectlyFollowsGraph) -> Self {
        let activities: Vec<String> = dfg.activities.keys().cloned().collect();
        let matrix = activities
            .iter()
            .map(|a| {
                activities
                    .iter()
                    .map(|b| match (dfg.follows(a, b), dfg.follows(b, a)) {
                        (true, false) => Relation::Causal,
                        (false, true) => Relation::InverseCausal,
                        (true, true) => Relation::Parallel,
                        (false, false) => Relation::Choice,
                    })
                    .collect()
            })
            .collect();
        Footprint { activities, matrix }
    }

    pub fn activities(&self) -> &[String] {
        &self.activities
    }

    pub fn index(&self, activity: &str) -> Option<usize> {
        self.activities.binary_search_by(|a| a.as_str().cmp(activity)).ok()
    }

    pub fn relation_at(&self, a: usize, b: usize) -> Relation {
        self.matrix[a][b]
    }

    pub fn relation(&self, a: &str, b: &str) -> Option<Relation> {
        Some(self.matrix[self.index(a)?][self.index(b)?])
    }
}

/// A pair `(A, B)` of activity index sets; one place of the alpha net.
pub type AlphaPair = (BTreeSet<usize>, BTreeSet<usize>);

fn choice_free(fp: &Footprint, set: &BTreeSet<usize>) -> bool {
    set.iter()
        .all(|&x| set.iter().all(|&y| fp.relation_at(x, y) == Relation::Choice))
}

fn is_valid(fp: &Footprint, (a, b): &AlphaPair) -> bool {
    !a.is_empty()
        && !b.is_empty()
        && a.iter()
            .all(|&x| b.iter().all(|&y| fp.relation_at(x, y) == Relation::Causal))
        && choice_free(fp, a)
        && choice_free(fp, b)
}

/// Maximal valid pairs. Validity is inherited by sub-pairs, so every valid
/// pair is reached from a causal singleton by adding one activity at a time.
pub fn maximal_pairs(fp: &Footprint) -> Vec<AlphaPair> {
    let n = fp.activities.len();
    let mut all: BTreeSet<AlphaPair> = BTreeSet::new();
    let mut frontier: Vec<AlphaPair> = Vec::new();
    for x in 0..n {
        for y in 0..n {
            let pair = (BTreeSet::from([x]), BTreeSet::from([y]));
            if is_valid(fp, &pair) && all.insert(pair.clone()) {
                frontier.push(pair);
            }
        }
    }
    while let Some((a, b)) = frontier.pop() {
        for z in 0..n {
            for grow_left in [true, false] {
                let mut next = (a.clone(), b.clone());
                let target = if grow_left { &mut next.0 } else { &mut next.1 };
                if !target.insert(z) {
                    continue;
                }
                if is_valid(fp, &next) && all.insert(next.clone()) {
                    frontier.push(next);
                }
            }
        }
    }
    all.iter()
        .filter(|(a, b)| {
            !all.iter()
                .any(|(c, d)| (c, d) != (a, b) && a.is_subset(c) && b.is_subset(d))
        })
        .cloned()
        .collect()
}

/// Classic alpha algorithm. Activities in length-one loops end up without
/// arcs, which is a known limitation of the algorithm.
pub fn mine_alpha(log: &EventLog) -> PetriNet {
    alpha_from_dfg(&build_dfg(log))
}

pub fn alpha_from_dfg(dfg: &DirectlyFollowsGraph) -> PetriNet {
    let fp = Footprint::from_dfg(dfg);
    let mut b = NetBuilder::new();
    let source = b.place("i").expect("fresh id");
    let sink = b.place("o").expect("fresh id");
    let transitions: Vec<_> = fp
        .activities
        .iter()
        .map(|a| b.transition(format!("t:{a}"), Some(a)).expect("fresh id"))
        .collect();
    for a in dfg.start_activities.keys() {
        b.input(source, transitions[fp.index(a).expect("known activity")]);
    }
    for a in dfg.end_activities.keys() {
        b.output(transitions[fp.index(a).expect("known activity")], sink);
    }
    for (i, (xs, ys)) in maximal_pairs(&fp).iter().enumerate() {
        let p = b.place(format!("p{i}")).expect("fresh id");
        for &x in xs {
            b.output(transitions[x], p);
        }
        for &y in ys {
            b.input(p, transitions[y]);
        }
    }
    b.mark_initial(source).mark_final(sink);
    b.build().expect("arcs are unique by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fp_of(traces: &[&[&str]]) -> Footprint {
        let owned: Vec<Vec<&str>> = traces.iter().map(|t| t.to_vec()).collect();
        Footprint::from_dfg(&DirectlyFollowsGraph::from_traces(&owned))
    }

    fn named(fp: &Footprint, pairs: &[AlphaPair]) -> BTreeSet<(Vec<String>, Vec<String>)> {
        let names = |s: &BTreeSet<usize>| s.iter().map(|&i| fp.activities()[i].clone()).collect();
        pairs.iter().map(|(a, b)| (names(a), names(b))).collect()
    }

    /// Every subset pair is checked; only usable for a handful of activities.
    fn brute_force_pairs(fp: &Footprint) -> Vec<AlphaPair> {
        let n = fp.activities().len();
        let subset = |mask: u32| -> BTreeSet<usize> { (0..n).filter(|i| mask & (1 << i) != 0).collect() };
        let valid: Vec<AlphaPair> = (1..1u32 << n)
            .flat_map(|ma| (1..1u32 << n).map(move |mb| (ma, mb)))
            .map(|(ma, mb)| (subset(ma), subset(mb)))
            .filter(|p| is_valid(fp, p))
            .collect();
        valid
            .iter()
            .filter(|(a, b)| {
                !valid
                    .iter()
                    .any(|(c, d)| (c, d) != (a, b) && a.is_subset(c) && b.is_subset(d))
            })
            .cloned()
            .collect()
    }

    #[test]
    fn sequence_net() {
        let dfg = DirectlyFollowsGraph::from_traces(&[vec!["a", "b"]]);
        let net = alpha_from_dfg(&dfg);
        assert_eq!(net.places().len(), 3);
        net.check_connected().unwrap();
        let a = net.transition_by_id("t:a").unwrap();
        let b = net.transition_by_id("t:b").unwrap();
        assert_eq!(net.preset(a), &[net.place_by_id("i").unwrap()]);
        assert_eq!(net.postset(b), &[net.place_by_id("o").unwrap()]);
        assert_eq!(net.postset(a), net.preset(b));
    }

    #[test]
    fn textbook_l1() {
        let fp = fp_of(&[&["a", "b", "c", "d"], &["a", "c", "b", "d"], &["a", "e", "d"]]);
        assert_eq!(fp.relation("b", "c"), Some(Relation::Parallel));
        assert_eq!(fp.relation("a", "e"), Some(Relation::Causal));
        assert_eq!(fp.relation("e", "a"), Some(Relation::InverseCausal));
        assert_eq!(fp.relation("b", "e"), Some(Relation::Choice));
        assert_eq!(fp.relation("a", "a"), Some(Relation::Choice));
        let pairs = named(&fp, &maximal_pairs(&fp));
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        let expected: BTreeSet<_> = [
            (s(&["a"]), s(&["b", "e"])),
            (s(&["a"]), s(&["c", "e"])),
            (s(&["b", "e"]), s(&["d"])),
            (s(&["c", "e"]), s(&["d"])),
        ]
        .into_iter()
        .collect();
        assert_eq!(pairs, expected);
    }

    #[test]
    fn example_log_footprint() {
        let fp = fp_of(&[&["Visit before CO", "HF", "Death_HF"], &["Visit before CO"]]);
        assert_eq!(fp.relation("Visit before CO", "HF"), Some(Relation::Causal));
        assert_eq!(fp.relation("HF", "Death_HF"), Some(Relation::Causal));
        assert_eq!(fp.relation("Death_HF", "HF"), Some(Relation::InverseCausal));
    }

    #[test]
    fn short_loop_leaves_transition_unconnected() {
        let dfg = DirectlyFollowsGraph::from_traces(&[vec!["a", "b", "b", "c"]]);
        let net = alpha_from_dfg(&dfg);
        assert!(net.check_connected().is_err());
    }

    proptest! {
        #[test]
        fn footprint_is_consistent(traces in prop::collection::vec(
            prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d"]), 1..6), 1..8)) {
            let dfg = DirectlyFollowsGraph::from_traces(&traces);
            let fp = Footprint::from_dfg(&dfg);
            let n = fp.activities().len();
            for i in 0..n {
                for j in 0..n {
                    let (r, s) = (fp.relation_at(i, j), fp.relation_at(j, i));
                    match r {
                        Relation::Causal => prop_assert_eq!(s, Relation::InverseCausal),
                        Relation::InverseCausal => prop_assert_eq!(s, Relation::Causal),
                        Relation::Parallel | Relation::Choice => prop_assert_eq!(s, r),
                    }
                }
            }
        }

        #[test]
        fn maximal_pairs_match_brute_force(traces in prop::collection::vec(
            prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d", "e", "f"]), 1..7), 1..10)) {
            let dfg = DirectlyFollowsGraph::from_traces(&traces);
            let fp = Footprint::from_dfg(&dfg);
            let fast: BTreeSet<_> = maximal_pairs(&fp).into_iter().collect();
            let slow: BTreeSet<_> = brute_force_pairs(&fp).into_iter().collect();
            prop_assert_eq!(fast, slow);
        }
    }
}
