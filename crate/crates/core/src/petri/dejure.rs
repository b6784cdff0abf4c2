//! The expert reference model of treatment paths.
//!
//! ```text
//! p0 --[Visit before CO | tau1]--> p1
//! p1 --[Visit before CO]--> p1
//! p1 --[HF | CV | Stroke | MI]--> p2
//! p1 --[tau2]--> p4
//! p2 --[Visit after CO | tau3]--> p3
//! p3 --[Visit after CO]--> p3
//! p3 --[tau4]--> p1
//! p4 --[Death_AnyCause | Death_HF | tau5]--> p_end
//! ```

use super::net::{NetBuilder, PetriNet};

pub const VISIT_BEFORE: &str = "Visit before CO";
pub const VISIT_AFTER: &str = "Visit after CO";

/// `(id, label, from, to)` for every transition of the reference model.
pub const DEJURE_TRANSITIONS: [(&str, Option<&str>, &str, &str); 15] = [
    ("t_vb", Some(VISIT_BEFORE), "p0", "p1"),
    ("tau1", None, "p0", "p1"),
    ("t_vb2", Some(VISIT_BEFORE), "p1", "p1"),
    ("t_HF", Some("HF"), "p1", "p2"),
    ("t_CV", Some("CV"), "p1", "p2"),
    ("t_Stroke", Some("Stroke"), "p1", "p2"),
    ("t_MI", Some("MI"), "p1", "p2"),
    ("tau2", None, "p1", "p4"),
    ("t_va", Some(VISIT_AFTER), "p2", "p3"),
    ("tau3", None, "p2", "p3"),
    ("t_va2", Some(VISIT_AFTER), "p3", "p3"),
    ("tau4", None, "p3", "p1"),
    ("t_dac", Some("Death_AnyCause"), "p4", "p_end"),
    ("t_dhf", Some("Death_HF"), "p4", "p_end"),
    ("tau5", None, "p4", "p_end"),
];

pub fn build_dejure() -> PetriNet {
    let mut b = NetBuilder::new();
    for id in ["p0", "p1", "p2", "p3", "p4", "p_end"] {
        b.place(id).expect("unique place ids");
    }
    for (id, label, from, to) in DEJURE_TRANSITIONS {
        b.transition(id, label).expect("unique transition ids");
        b.arc_by_id(from, id).expect("known ids");
        b.arc_by_id(id, to).expect("known ids");
    }
    let p0 = b.place_id("p0").expect("p0 exists");
    let end = b.place_id("p_end").expect("p_end exists");
    b.mark_initial(p0).mark_final(end);
    b.build().expect("reference model is well formed")
}
