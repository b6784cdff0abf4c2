//! Synthetic cohort generation by random walks on a state-machine net.
//!
//! Each patient walks from the initial to the final marking. At a place
//! with several outgoing transitions the next transition is drawn from the
//! configured distribution (or from the first matching rule's
//! distribution). Every visible firing emits one [`PatientDatum`]. Patient
//! `i` draws from its own ChaCha stream `(seed, i)`, so output does not
//! depend on scheduling.

use std::collections::BTreeMap;

use chrono::{Duration, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::dejure::build_dejure;
use super::net::{PetriNet, TransitionIdx};
use crate::model::{classify_phenotype, AttributeValue, CardiovascularOutcome, PatientDatum};

#[derive(Debug, Error, PartialEq)]
pub enum SimulationError {
    #[error("place '{place}': probabilities sum to {sum}, expected 1")]
    BadProbabilitySum { place: String, sum: f64 },
    #[error("place '{place}': invalid probability {value} for '{transition}'")]
    BadProbability {
        place: String,
        transition: String,
        value: f64,
    },
    #[error("place '{place}': '{transition}' is not an outgoing transition")]
    NotOutgoing { place: String, transition: String },
    #[error("unknown place '{0}'")]
    UnknownPlace(String),
    #[error("decision place '{0}' has no probability distribution")]
    MissingDistribution(String),
    #[error("unknown attribute '{0}'")]
    UnknownAttribute(String),
    #[error("attribute '{attribute}': {message}")]
    BadSampler { attribute: String, message: String },
    #[error("net is not a state machine: {0}")]
    NotStateMachine(String),
    #[error("walk exceeded {0} steps without reaching the final marking")]
    WalkTooLong(usize),
    #[error("gap range {min}..={max} days is invalid")]
    BadGap { min: i64, max: i64 },
}

/// Distribution of one per-patient attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case")]
pub enum Sampler {
    Constant {
        value: f64,
        #[serde(default)]
        missing_rate: f64,
    },
    UniformInt {
        min: i64,
        max: i64,
        #[serde(default)]
        missing_rate: f64,
    },
    Uniform {
        min: f64,
        max: f64,
        #[serde(default)]
        missing_rate: f64,
    },
    Normal {
        mean: f64,
        sd: f64,
        #[serde(default)]
        missing_rate: f64,
    },
    Bernoulli {
        p: f64,
        #[serde(default)]
        missing_rate: f64,
    },
}

impl Sampler {
    fn missing_rate(&self) -> f64 {
        match self {
            Sampler::Constant { missing_rate, .. }
            | Sampler::UniformInt { missing_rate, .. }
            | Sampler::Uniform { missing_rate, .. }
            | Sampler::Normal { missing_rate, .. }
            | Sampler::Bernoulli { missing_rate, .. } => *missing_rate,
        }
    }

    fn validate(&self, name: &str) -> Result<(), SimulationError> {
        let bad = |message: &str| SimulationError::BadSampler {
            attribute: name.to_string(),
            message: message.to_string(),
        };
        if !(0.0..=1.0).contains(&self.missing_rate()) {
            return Err(bad("missing_rate must lie in [0, 1]"));
        }
        match self {
            Sampler::UniformInt { min, max, .. } if min > max => Err(bad("min > max")),
            Sampler::Uniform { min, max, .. } if !(min <= max) => Err(bad("min > max")),
            Sampler::Normal { sd, .. } if !(*sd >= 0.0) => Err(bad("sd must be non-negative")),
            Sampler::Bernoulli { p, .. } if !(0.0..=1.0).contains(p) => Err(bad("p must lie in [0, 1]")),
            _ => Ok(()),
        }
    }

    /// `None` means missing. Reals are rounded to one decimal.
    fn sample(&self, rng: &mut ChaCha8Rng) -> Option<f64> {
        // Always consume the missing draw so streams stay aligned.
        let missing = rng.random::<f64>() < self.missing_rate();
        let round1 = |v: f64| (v * 10.0).round() / 10.0;
        let value = match self {
            Sampler::Constant { value, .. } => *value,
            Sampler::UniformInt { min, max, .. } => rng.random_range(*min..=*max) as f64,
            Sampler::Uniform { min, max, .. } => {
                if min == max {
                    *min
                } else {
                    round1(rng.random_range(*min..*max))
                }
            }
            Sampler::Normal { mean, sd, .. } => {
                let n = Normal::new(*mean, *sd).expect("validated sd");
                round1(n.sample(rng).max(0.0))
            }
            Sampler::Bernoulli { p, .. } => {
                if rng.random::<f64>() < *p {
                    1.0
                } else {
                    0.0
                }
            }
        };
        (!missing).then_some(value)
    }
}

/// Attribute names the simulator can sample, and whether each is boolean,
/// integer or real.
const SAMPLED: [(&str, Kind); 14] = [
    ("lvef", Kind::Int),
    ("weight", Kind::Real),
    ("hf_diagnosis_year", Kind::Int),
    ("nt_pro_bnp", Kind::Real),
    ("diabetes", Kind::Bool),
    ("ckd", Kind::Bool),
    ("wbc", Kind::Real),
    ("hstnt", Kind::Real),
    ("il6", Kind::Real),
    ("urea", Kind::Real),
    ("beta_blocker", Kind::Real),
    ("acei_arni", Kind::Real),
    ("sglt2", Kind::Real),
    ("mra", Kind::Real),
];

#[derive(Clone, Copy)]
enum Kind {
    Int,
    Real,
    Bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

/// A predicate on a patient attribute. Booleans compare as 0/1; a missing
/// attribute never satisfies a condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub attribute: String,
    pub op: Comparison,
    pub value: f64,
}

impl Condition {
    pub fn new(attribute: &str, op: Comparison, value: f64) -> Self {
        Condition {
            attribute: attribute.to_string(),
            op,
            value,
        }
    }

    fn holds(&self, attrs: &BTreeMap<String, AttributeValue>) -> bool {
        let v = match attrs.get(&self.attribute) {
            Some(AttributeValue::Boolean(b)) => f64::from(u8::from(*b)),
            Some(other) => match other.as_f64() {
                Some(v) => v,
                None => return false,
            },
            None => return false,
        };
        match self.op {
            Comparison::Lt => v < self.value,
            Comparison::Le => v <= self.value,
            Comparison::Eq => v == self.value,
            Comparison::Ge => v >= self.value,
            Comparison::Gt => v > self.value,
        }
    }
}

/// Overrides a place's distribution for patients matching every condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChoiceRule {
    pub place: String,
    pub when: Vec<Condition>,
    pub probabilities: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulationConfig {
    pub patients: usize,
    pub seed: u64,
    /// Earliest first-record date; each patient starts uniformly within
    /// `enrollment_days` after it.
    pub start_date: NaiveDate,
    pub enrollment_days: i64,
    /// Inclusive range of days between consecutive records of a patient.
    pub gap_min_days: i64,
    pub gap_max_days: i64,
    /// place id -> transition id -> probability.
    pub choices: BTreeMap<String, BTreeMap<String, f64>>,
    pub rules: Vec<ChoiceRule>,
    pub attributes: BTreeMap<String, Sampler>,
    pub max_steps: usize,
}

fn normalized(weights: &[(&str, f64)]) -> BTreeMap<String, f64> {
    let total: f64 = weights.iter().map(|(_, w)| w).sum();
    weights
        .iter()
        .map(|(k, w)| (k.to_string(), w / total))
        .collect()
}

impl Default for SimulationConfig {
    fn default() -> Self {
        let mut choices = BTreeMap::new();
        // Reference shares at p1 (non-CO vs outcomes) and p4 (end vs
        // deaths), renormalised because the percentages are rounded.
        choices.insert(
            "p0".to_string(),
            normalized(&[("t_vb", 0.9186), ("tau1", 0.0814)]),
        );
        choices.insert(
            "p1".to_string(),
            normalized(&[
                ("tau2", 91.86),
                ("t_HF", 5.78),
                ("t_CV", 1.90),
                ("t_Stroke", 0.30),
                ("t_MI", 0.15),
                ("t_vb2", 0.0),
            ]),
        );
        choices.insert(
            "p2".to_string(),
            normalized(&[("t_va", 0.5), ("tau3", 0.5)]),
        );
        choices.insert(
            "p3".to_string(),
            normalized(&[("t_va2", 0.4), ("tau4", 0.6)]),
        );
        choices.insert(
            "p4".to_string(),
            normalized(&[("tau5", 98.29), ("t_dac", 1.39), ("t_dhf", 0.33)]),
        );

        let attributes = [
            ("lvef", Sampler::UniformInt { min: 10, max: 70, missing_rate: 0.0 }),
            ("weight", Sampler::Normal { mean: 82.0, sd: 15.0, missing_rate: 0.05 }),
            ("hf_diagnosis_year", Sampler::UniformInt { min: 2005, max: 2019, missing_rate: 0.05 }),
            ("nt_pro_bnp", Sampler::Uniform { min: 100.0, max: 5000.0, missing_rate: 0.1 }),
            ("diabetes", Sampler::Bernoulli { p: 0.4, missing_rate: 0.0 }),
            ("ckd", Sampler::Bernoulli { p: 0.3, missing_rate: 0.05 }),
            ("wbc", Sampler::Normal { mean: 7.5, sd: 2.0, missing_rate: 0.2 }),
            ("hstnt", Sampler::Uniform { min: 5.0, max: 60.0, missing_rate: 0.2 }),
            ("il6", Sampler::Uniform { min: 1.0, max: 30.0, missing_rate: 0.3 }),
            ("urea", Sampler::Uniform { min: 15.0, max: 80.0, missing_rate: 0.1 }),
            ("beta_blocker", Sampler::Uniform { min: 0.0, max: 100.0, missing_rate: 0.1 }),
            ("acei_arni", Sampler::Uniform { min: 0.0, max: 100.0, missing_rate: 0.1 }),
            ("sglt2", Sampler::Uniform { min: 0.0, max: 10.0, missing_rate: 0.3 }),
            ("mra", Sampler::Uniform { min: 0.0, max: 50.0, missing_rate: 0.2 }),
        ]
        .into_iter()
        .map(|(k, s)| (k.to_string(), s))
        .collect();

        SimulationConfig {
            patients: 240,
            seed: 0,
            start_date: NaiveDate::from_ymd_opt(2019, 4, 1).expect("valid date"),
            enrollment_days: 365,
            gap_min_days: 14,
            gap_max_days: 180,
            choices,
            rules: Vec::new(),
            attributes,
            max_steps: 100_000,
        }
    }
}

/// Per-place sampling table resolved against a net.
struct Resolved {
    /// indexed by place; empty for non-decision places
    base: Vec<Vec<(TransitionIdx, f64)>>,
    rules: Vec<(usize, Vec<Condition>, Vec<(TransitionIdx, f64)>)>,
}

fn resolve_distribution(
    net: &PetriNet,
    place: &str,
    probs: &BTreeMap<String, f64>,
) -> Result<(usize, Vec<(TransitionIdx, f64)>), SimulationError> {
    let p = net
        .place_by_id(place)
        .ok_or_else(|| SimulationError::UnknownPlace(place.to_string()))?;
    let mut dist = Vec::new();
    for (tid, &prob) in probs {
        let t = net
            .transition_by_id(tid)
            .filter(|t| net.outgoing(p).contains(t))
            .ok_or_else(|| SimulationError::NotOutgoing {
                place: place.to_string(),
                transition: tid.clone(),
            })?;
        if !(prob.is_finite() && prob >= 0.0) {
            return Err(SimulationError::BadProbability {
                place: place.to_string(),
                transition: tid.clone(),
                value: prob,
            });
        }
        dist.push((t, prob));
    }
    let sum: f64 = dist.iter().map(|(_, w)| w).sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(SimulationError::BadProbabilitySum {
            place: place.to_string(),
            sum,
        });
    }
    Ok((p.0, dist))
}

impl SimulationConfig {
    fn resolve(&self, net: &PetriNet) -> Result<Resolved, SimulationError> {
        for t in net.transition_indices() {
            if net.preset(t).len() != 1 || net.postset(t).len() != 1 {
                return Err(SimulationError::NotStateMachine(format!(
                    "transition '{}' must have exactly one input and one output",
                    net.transition(t).id
                )));
            }
        }
        if net.initial_marking().total() != 1 {
            return Err(SimulationError::NotStateMachine(
                "initial marking must hold exactly one token".into(),
            ));
        }
        if self.gap_min_days < 1 || self.gap_max_days < self.gap_min_days || self.enrollment_days < 1 {
            return Err(SimulationError::BadGap {
                min: self.gap_min_days,
                max: self.gap_max_days,
            });
        }
        for (name, sampler) in &self.attributes {
            if !SAMPLED.iter().any(|(k, _)| k == name) {
                return Err(SimulationError::UnknownAttribute(name.clone()));
            }
            sampler.validate(name)?;
        }
        let mut base = vec![Vec::new(); net.places().len()];
        for (place, probs) in &self.choices {
            let (p, dist) = resolve_distribution(net, place, probs)?;
            base[p] = dist;
        }
        for p in net.place_indices() {
            if net.outgoing(p).len() >= 2 && base[p.0].is_empty() {
                return Err(SimulationError::MissingDistribution(net.place(p).id.clone()));
            }
        }
        let rules = self
            .rules
            .iter()
            .map(|r| {
                let (p, dist) = resolve_distribution(net, &r.place, &r.probabilities)?;
                for c in &r.when {
                    if !SAMPLED.iter().any(|(k, _)| *k == c.attribute) {
                        return Err(SimulationError::UnknownAttribute(c.attribute.clone()));
                    }
                }
                Ok((p, r.when.clone(), dist))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Resolved { base, rules })
    }

    pub fn validate(&self) -> Result<(), SimulationError> {
        self.resolve(&build_dejure()).map(|_| ())
    }
}

fn draw(rng: &mut ChaCha8Rng, dist: &[(TransitionIdx, f64)]) -> TransitionIdx {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for &(t, w) in dist {
        acc += w;
        if u < acc {
            return t;
        }
    }
    // rounding slack: last transition with positive weight
    dist.iter()
        .rev()
        .find(|(_, w)| *w > 0.0)
        .map(|(t, _)| *t)
        .expect("distribution has positive mass")
}

fn sample_patient(
    config: &SimulationConfig,
    rng: &mut ChaCha8Rng,
    pat_id: &str,
) -> (PatientDatum, BTreeMap<String, AttributeValue>) {
    let start = config.start_date + Duration::days(rng.random_range(0..config.enrollment_days));
    let mut datum = PatientDatum::new(pat_id, start, 0);
    let mut attrs = BTreeMap::new();
    for (name, kind) in SAMPLED {
        let value = config.attributes.get(name).and_then(|s| s.sample(rng));
        let av = match (kind, value) {
            (_, None) => AttributeValue::Missing,
            (Kind::Int, Some(v)) => AttributeValue::Integer(v.round() as i64),
            (Kind::Real, Some(v)) => AttributeValue::Real(v),
            (Kind::Bool, Some(v)) => AttributeValue::Boolean(v != 0.0),
        };
        attrs.insert(name.to_string(), av);
    }
    let real = |k: &str| attrs[k].as_f64();
    let int = |k: &str| attrs[k].as_f64().map(|v| v as i64);
    let boolean = |k: &str| attrs[k].as_bool();
    datum.lvef = int("lvef").map(|v| v.clamp(0, 100));
    if let Some(phenotype) = datum.lvef.and_then(|v| classify_phenotype(v).ok()) {
        use crate::model::Phenotype::*;
        datum.hfref = Some(phenotype == HfrEf);
        datum.hfmref = Some(phenotype == HfmrEf);
        datum.hfpef = Some(phenotype == HfpEf);
    }
    datum.weight = real("weight");
    datum.hf_diagnosis_year = int("hf_diagnosis_year");
    datum.nt_pro_bnp = real("nt_pro_bnp");
    datum.diabetes = boolean("diabetes");
    datum.ckd = boolean("ckd");
    datum.wbc = real("wbc");
    datum.hstnt = real("hstnt");
    datum.il6 = real("il6");
    datum.urea = real("urea");
    datum.beta_blocker = real("beta_blocker");
    datum.acei_arni = real("acei_arni");
    datum.sglt2 = real("sglt2");
    datum.mra = real("mra");
    (datum, attrs)
}

fn walk(
    net: &PetriNet,
    resolved: &Resolved,
    config: &SimulationConfig,
    index: usize,
    pat_id: &str,
) -> Result<Vec<PatientDatum>, SimulationError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index as u64);
    let (template, attrs) = sample_patient(config, &mut rng, pat_id);

    let mut out = Vec::new();
    let mut when = template.timestamp;
    let mut marking = net.initial_marking().clone();
    for _ in 0..config.max_steps {
        if &marking == net.final_marking() {
            return Ok(out);
        }
        let place = marking.to_places()[0];
        let outgoing = net.outgoing(place);
        let t = match outgoing {
            [] => return Ok(out),
            [only] => *only,
            _ => {
                let dist = resolved
                    .rules
                    .iter()
                    .find(|(p, conds, _)| *p == place.0 && conds.iter().all(|c| c.holds(&attrs)))
                    .map(|(_, _, d)| d.as_slice())
                    .unwrap_or(&resolved.base[place.0]);
                draw(&mut rng, dist)
            }
        };
        marking = net.fire_unchecked(&marking, t);
        if let Some(label) = &net.transition(t).label {
            if !out.is_empty() {
                when += Duration::days(rng.random_range(config.gap_min_days..=config.gap_max_days));
            }
            let outcome = label.parse::<CardiovascularOutcome>().ok();
            out.push(PatientDatum {
                outcome,
                timestamp: when,
                ..template.clone()
            });
            if outcome.is_some_and(CardiovascularOutcome::is_death) {
                return Ok(out);
            }
        }
    }
    Err(SimulationError::WalkTooLong(config.max_steps))
}

/// Simulates `config.patients` patients on `net`.
pub fn simulate_on(net: &PetriNet, config: &SimulationConfig) -> Result<Vec<PatientDatum>, SimulationError> {
    let resolved = config.resolve(net)?;
    let width = config.patients.to_string().len().max(4);
    let per_patient: Vec<Vec<PatientDatum>> = (0..config.patients)
        .into_par_iter()
        .map(|i| walk(net, &resolved, config, i, &format!("{:0width$}", i + 1)))
        .collect::<Result<_, _>>()?;
    let mut out: Vec<PatientDatum> = per_patient.into_iter().flatten().collect();
    for (i, d) in out.iter_mut().enumerate() {
        d.row_index = i + 1;
    }
    Ok(out)
}

/// Simulates a cohort on the reference treatment-path model.
pub fn simulate(config: &SimulationConfig) -> Result<Vec<PatientDatum>, SimulationError> {
    simulate_on(&build_dejure(), config)
}
