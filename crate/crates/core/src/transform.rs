//! Event-log construction from patient records: split each patient's
//! sequence at the first cardiovascular outcome, then map every record to
//! one event.

use thiserror::Error;

use crate::model::{build_sequences, Event, EventLog, PatientDatum, PatientSequence};
use crate::petri::{VISIT_AFTER, VISIT_BEFORE};

#[derive(Debug, Error, PartialEq)]
pub enum TransformError {
    #[error("record {row} of patient '{pat_id}' carries an outcome but was mapped as a pre-outcome visit")]
    OutcomeBeforeSplit { pat_id: String, row: usize },
}

/// A patient sequence cut before its first outcome record.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitSequence {
    pub pat_id: String,
    pub pre: Vec<PatientDatum>,
    pub post: Vec<PatientDatum>,
}

pub fn split_sequence(seq: &PatientSequence) -> SplitSequence {
    let cut = seq
        .data
        .iter()
        .position(|d| d.outcome.is_some())
        .unwrap_or(seq.data.len());
    let (pre, post) = seq.data.split_at(cut);
    SplitSequence {
        pat_id: seq.pat_id.clone(),
        pre: pre.to_vec(),
        post: post.to_vec(),
    }
}

fn to_event(d: &PatientDatum, activity: &str) -> Event {
    Event {
        case_id: d.pat_id.clone(),
        activity: activity.to_string(),
        timestamp: d.timestamp,
        attributes: d.attributes(),
    }
}

/// Maps a record preceding any outcome to a "Visit before CO" event.
pub fn trans_pre(d: &PatientDatum) -> Result<Event, TransformError> {
    if d.outcome.is_some() {
        return Err(TransformError::OutcomeBeforeSplit {
            pat_id: d.pat_id.clone(),
            row: d.row_index,
        });
    }
    Ok(to_event(d, VISIT_BEFORE))
}

/// Maps a record at or after the first outcome: outcome records become
/// their outcome label, other records "Visit after CO".
pub fn trans_post(d: &PatientDatum) -> Event {
    match d.outcome {
        Some(o) => to_event(d, o.label()),
        None => to_event(d, VISIT_AFTER),
    }
}

/// Builds the event log, cases in patient-id order.
pub fn transform_log(data: &[PatientDatum]) -> Result<EventLog, TransformError> {
    let mut events = Vec::with_capacity(data.len());
    for seq in build_sequences(data).values() {
        let split = split_sequence(seq);
        for d in &split.pre {
            events.push(trans_pre(d)?);
        }
        events.extend(split.post.iter().map(trans_post));
    }
    Ok(EventLog::new(events))
}
