//! Alignment-based conformance checking and the model quality metrics.

mod align;
mod metrics;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::model::EventLog;
use crate::petri::PetriNet;

pub use align::{
    align, align_with, cheapest_model_cost, AlignOptions, Alignment, Heuristic, Move,
    DEFAULT_STATE_CAP,
};
pub use metrics::{
    execution_counts, f1, fitness_from_costs, generalization_from_counts,
    precision_from_alignments, simplicity,
};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ConformanceError {
    #[error("final marking is unreachable from the initial marking")]
    FinalUnreachable,
    #[error("alignment search exceeded the state cap of {cap}")]
    StateCap { cap: usize },
}

/// One optimal alignment per trace, in trace order. Traces with the same
/// activity sequence share one search.
pub fn align_log(
    net: &PetriNet,
    log: &EventLog,
    opts: AlignOptions,
) -> Result<Vec<Alignment>, ConformanceError> {
    let traces = log.activity_traces();
    let variants: Vec<&Vec<String>> = {
        let mut v: Vec<&Vec<String>> = traces.iter().collect();
        v.sort();
        v.dedup();
        v
    };
    let solved: BTreeMap<&Vec<String>, Alignment> = variants
        .par_iter()
        .map(|v| align_with(net, v, opts).map(|a| (*v, a)))
        .collect::<Result<_, _>>()?;
    Ok(traces.iter().map(|t| solved[t].clone()).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConformanceReport {
    pub fitness: f64,
    pub precision: f64,
    pub generalization: f64,
    pub simplicity: f64,
    pub f1: f64,
}

impl ConformanceReport {
    /// JSON object with every metric fixed to four decimals.
    pub fn to_json(&self) -> String {
        format!(
            "{{\n  \"fitness\": {:.4},\n  \"precision\": {:.4},\n  \"generalization\": {:.4},\n  \"simplicity\": {:.4},\n  \"f1\": {:.4}\n}}\n",
            self.fitness, self.precision, self.generalization, self.simplicity, self.f1
        )
    }
}

pub fn fitness(net: &PetriNet, log: &EventLog) -> Result<f64, ConformanceError> {
    Ok(evaluate(net, log, AlignOptions::default())?.fitness)
}

pub fn precision(net: &PetriNet, log: &EventLog) -> Result<f64, ConformanceError> {
    let alignments = align_log(net, log, AlignOptions::default())?;
    Ok(precision_from_alignments(net, &alignments))
}

pub fn generalization(net: &PetriNet, log: &EventLog) -> Result<f64, ConformanceError> {
    let alignments = align_log(net, log, AlignOptions::default())?;
    let counts: Vec<u64> = execution_counts(net, &alignments).into_values().collect();
    Ok(generalization_from_counts(&counts))
}

/// All five metrics from a single alignment pass.
pub fn evaluate(
    net: &PetriNet,
    log: &EventLog,
    opts: AlignOptions,
) -> Result<ConformanceReport, ConformanceError> {
    let alignments = align_log(net, log, opts)?;
    let empty = cheapest_model_cost(net, opts)?;
    let pairs: Vec<(usize, u32)> = log
        .activity_traces()
        .iter()
        .zip(&alignments)
        .map(|(t, a)| (t.len(), a.cost))
        .collect();
    let fitness = fitness_from_costs(&pairs, empty);
    let precision = precision_from_alignments(net, &alignments);
    let counts: Vec<u64> = execution_counts(net, &alignments).into_values().collect();
    Ok(ConformanceReport {
        fitness,
        precision,
        generalization: generalization_from_counts(&counts),
        simplicity: simplicity(net),
        f1: f1(fitness, precision),
    })
}
