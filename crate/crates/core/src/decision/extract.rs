use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use crate::conformance::{align_log, AlignOptions, Move};
use crate::model::{AttributeValue, EventLog};
use crate::petri::{PetriNet, PlaceIdx};

use super::DecisionError;

/// Label recorded when a silent transition consumes the token.
pub const NONE_LABEL: &str = "None";

pub type Features = BTreeMap<String, AttributeValue>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecisionInstance {
    pub case_id: String,
    pub place: String,
    pub features: Features,
    pub chosen: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Extraction {
    pub instances: Vec<DecisionInstance>,
    /// Traces left out because they do not align at cost 0.
    pub skipped: usize,
}

/// Replays the optimal alignment of every fitting trace. Each token that
/// enters `place` becomes one instance, labelled by the transition that
/// later consumes it (tokens leave in arrival order). Features are the
/// attributes of the latest event replayed before the token arrived, or of
/// the first event for tokens present from the start.
pub fn extract_instances(
    net: &PetriNet,
    log: &EventLog,
    place: PlaceIdx,
) -> Result<Extraction, DecisionError> {
    let alignments = align_log(net, log, AlignOptions::default())?;
    let place_id = net.place(place).id.clone();
    let mut out = Extraction::default();
    for (trace, alignment) in log.traces().iter().zip(&alignments) {
        if alignment.cost > 0 {
            out.skipped += 1;
            continue;
        }
        let Some(first) = trace.events.first() else { continue };
        let mut latest = &first.attributes;
        let mut next_event = 0;
        let mut tokens: VecDeque<&Features> =
            std::iter::repeat_n(latest, net.initial_marking().tokens(place) as usize).collect();
        for mv in &alignment.moves {
            if matches!(mv, Move::Sync { .. } | Move::Log { .. }) {
                latest = &trace.events[next_event].attributes;
                next_event += 1;
            }
            let Some(t) = mv.transition() else { continue };
            for _ in net.preset(t).iter().filter(|p| **p == place) {
                let features = tokens.pop_front().expect("replay of a cost-0 alignment is sound");
                out.instances.push(DecisionInstance {
                    case_id: trace.case_id.to_string(),
                    place: place_id.clone(),
                    features: features.clone(),
                    chosen: net
                        .transition(t)
                        .label
                        .clone()
                        .unwrap_or_else(|| NONE_LABEL.to_string()),
                });
            }
            for _ in net.postset(t).iter().filter(|p| **p == place) {
                tokens.push_back(latest);
            }
        }
    }
    Ok(out)
}

/// Percentage per label in the given order; labels absent from `order`
/// follow alphabetically.
pub fn distribution(instances: &[DecisionInstance], order: &[String]) -> Vec<(String, f64)> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for i in instances {
        *counts.entry(i.chosen.as_str()).or_default() += 1;
    }
    let mut labels: Vec<String> = order.to_vec();
    for l in counts.keys() {
        if !labels.iter().any(|x| x == l) {
            labels.push(l.to_string());
        }
    }
    let n = instances.len();
    labels
        .into_iter()
        .map(|l| {
            let c = counts.get(l.as_str()).copied().unwrap_or(0);
            let pct = if n == 0 { 0.0 } else { 100.0 * c as f64 / n as f64 };
            (l, pct)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Event;
    use crate::petri::build_dejure;
    use chrono::NaiveDate;

    fn event(case: &str, act: &str, day: u32, lvef: i64) -> Event {
        let mut e = Event::new(case, act, NaiveDate::from_ymd_opt(2022, 2, day).unwrap());
        e.attributes.insert("lvef".into(), AttributeValue::Integer(lvef));
        e
    }

    fn example_log() -> EventLog {
        EventLog::new(vec![
            event("007", "Visit before CO", 1, 30),
            event("007", "HF", 2, 31),
            event("007", "Death_HF", 3, 32),
            event("008", "Visit before CO", 1, 55),
        ])
    }

    fn chosen(e: &Extraction, case: &str) -> Vec<String> {
        e.instances.iter().filter(|i| i.case_id == case).map(|i| i.chosen.clone()).collect()
    }

    #[test]
    fn p1_instances_of_example_patients() {
        let net = build_dejure();
        let e = extract_instances(&net, &example_log(), net.place_by_id("p1").unwrap()).unwrap();
        // the token returns to p1 through tau4 before leaving via tau2
        assert_eq!(chosen(&e, "007"), ["HF", "None"]);
        assert_eq!(chosen(&e, "008"), ["None"]);
        let first = &e.instances[0];
        assert_eq!(first.features["lvef"], AttributeValue::Integer(30));
        assert_eq!(e.instances[1].features["lvef"], AttributeValue::Integer(31));
        assert_eq!(e.skipped, 0);
    }

    #[test]
    fn p4_instances() {
        let net = build_dejure();
        let e = extract_instances(&net, &example_log(), net.place_by_id("p4").unwrap()).unwrap();
        assert_eq!(chosen(&e, "007"), ["Death_HF"]);
        assert_eq!(chosen(&e, "008"), ["None"]);
    }

    #[test]
    fn initial_tokens_use_first_event() {
        let net = build_dejure();
        let e = extract_instances(&net, &example_log(), net.place_by_id("p0").unwrap()).unwrap();
        assert_eq!(chosen(&e, "007"), ["Visit before CO"]);
        assert_eq!(e.instances[0].features["lvef"], AttributeValue::Integer(30));
    }

    #[test]
    fn misfits_are_skipped() {
        let net = build_dejure();
        let mut log = example_log();
        log.events.push(event("009", "Death_HF", 1, 40));
        log.events.push(event("009", "HF", 2, 40));
        let e = extract_instances(&net, &log, net.place_by_id("p1").unwrap()).unwrap();
        assert_eq!(e.skipped, 1);
        assert!(chosen(&e, "009").is_empty());
        let empty = extract_instances(&net, &EventLog::default(), net.place_by_id("p1").unwrap()).unwrap();
        assert!(empty.instances.is_empty());
    }

    #[test]
    fn distribution_sums_to_hundred() {
        let net = build_dejure();
        let e = extract_instances(&net, &example_log(), net.place_by_id("p1").unwrap()).unwrap();
        let d = distribution(&e.instances, &["None".into(), "CV".into()]);
        assert_eq!(d[0].0, "None");
        assert!((d[0].1 - 200.0 / 3.0).abs() < 1e-9);
        assert_eq!(d[1], ("CV".into(), 0.0));
        assert_eq!(d[2].0, "HF");
        assert!((d.iter().map(|x| x.1).sum::<f64>() - 100.0).abs() < 1e-9);
        let single = distribution(&e.instances[..1], &[]);
        assert_eq!(single, vec![("HF".to_string(), 100.0)]);
    }
}
