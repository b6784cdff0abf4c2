//! Petri nets: structure and firing rule, the reference treatment-path
//! model, decision points, and cohort simulation.

mod dejure;
mod net;
mod simulate;

pub use dejure::{build_dejure, DEJURE_TRANSITIONS, VISIT_AFTER, VISIT_BEFORE};
pub use net::{
    decision_points, Arc, DecisionPoint, Marking, NetBuilder, PetriError, PetriNet, Place,
    PlaceIdx, Transition, TransitionIdx,
};
pub use simulate::{
    simulate, simulate_on, ChoiceRule, Comparison, Condition, Sampler, SimulationConfig,
    SimulationError,
};
