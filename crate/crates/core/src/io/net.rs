//! Canonical JSON form of a Petri net, and Graphviz DOT rendering.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::petri::{NetBuilder, PetriError, PetriNet};

#[derive(Debug, Error)]
pub enum NetFormatError {
    #[error("invalid net JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid net structure: {0}")]
    Structure(#[from] PetriError),
    #[error("transition '{0}': silent flag contradicts label")]
    SilentLabel(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaceDoc {
    pub id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionDoc {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default)]
    pub silent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcDoc {
    pub source: String,
    pub target: String,
}

/// Serialized net. Markings list place ids, repeated per token.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetDocument {
    pub places: Vec<PlaceDoc>,
    pub transitions: Vec<TransitionDoc>,
    pub arcs: Vec<ArcDoc>,
    pub initial_marking: Vec<String>,
    pub final_marking: Vec<String>,
}

impl From<&PetriNet> for NetDocument {
    fn from(net: &PetriNet) -> Self {
        let marking = |m: &crate::petri::Marking| {
            m.to_places()
                .into_iter()
                .map(|p| net.place(p).id.clone())
                .collect()
        };
        NetDocument {
            places: net
                .places()
                .iter()
                .map(|p| PlaceDoc { id: p.id.clone() })
                .collect(),
            transitions: net
                .transitions()
                .iter()
                .map(|t| TransitionDoc {
                    id: t.id.clone(),
                    label: t.label.clone(),
                    silent: t.is_silent(),
                })
                .collect(),
            arcs: net
                .arcs()
                .iter()
                .map(|a| {
                    let (s, t) = net.arc_ids(*a);
                    ArcDoc {
                        source: s.to_string(),
                        target: t.to_string(),
                    }
                })
                .collect(),
            initial_marking: marking(net.initial_marking()),
            final_marking: marking(net.final_marking()),
        }
    }
}

impl NetDocument {
    pub fn to_net(&self) -> Result<PetriNet, NetFormatError> {
        let mut b = NetBuilder::new();
        for p in &self.places {
            b.place(p.id.clone())?;
        }
        for t in &self.transitions {
            if t.silent == t.label.is_some() {
                return Err(NetFormatError::SilentLabel(t.id.clone()));
            }
            b.transition(t.id.clone(), t.label.as_deref())?;
        }
        for a in &self.arcs {
            b.arc_by_id(&a.source, &a.target)?;
        }
        for id in &self.initial_marking {
            let p = b.place_id(id)?;
            b.mark_initial(p);
        }
        for id in &self.final_marking {
            let p = b.place_id(id)?;
            b.mark_final(p);
        }
        Ok(b.build()?)
    }
}

pub fn write_net_json(net: &PetriNet) -> String {
    let mut s = serde_json::to_string_pretty(&NetDocument::from(net)).expect("net document serializes");
    s.push('\n');
    s
}

pub fn read_net_json(bytes: &[u8]) -> Result<PetriNet, NetFormatError> {
    let doc: NetDocument = serde_json::from_slice(bytes)?;
    doc.to_net()
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Places as circles, transitions as boxes; silent transitions are filled
/// black. Initial places get a token glyph, final places a double circle.
pub fn write_dot(net: &PetriNet) -> String {
    let mut s = String::from("digraph petri_net {\n  rankdir=LR;\n");
    for p in net.place_indices() {
        let id = &net.place(p).id;
        let shape = if net.final_marking().tokens(p) > 0 {
            "doublecircle"
        } else {
            "circle"
        };
        let tokens = net.initial_marking().tokens(p);
        let label = if tokens > 0 { "●".repeat(tokens as usize) } else { String::new() };
        let _ = writeln!(
            s,
            "  {} [shape={shape}, label={}, xlabel={}];",
            quote(id),
            quote(&label),
            quote(id)
        );
    }
    for t in net.transitions() {
        match &t.label {
            Some(label) => {
                let _ = writeln!(s, "  {} [shape=box, label={}];", quote(&t.id), quote(label));
            }
            None => {
                let _ = writeln!(
                    s,
                    "  {} [shape=box, style=filled, fillcolor=black, label=\"\", width=0.15];",
                    quote(&t.id)
                );
            }
        }
    }
    for a in net.arcs() {
        let (src, dst) = net.arc_ids(*a);
        let _ = writeln!(s, "  {} -> {};", quote(src), quote(dst));
    }
    s.push_str("}\n");
    s
}
