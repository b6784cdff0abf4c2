//! Domain vocabulary shared across the pipeline: patient records, events,
//! event logs and the attribute values they carry.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("LVEF {0} is outside [0, 100]")]
    LvefOutOfRange(i64),
    #[error("unknown cardiovascular outcome label '{0}'")]
    UnknownOutcome(String),
    #[error("unknown phenotype '{0}'")]
    UnknownPhenotype(String),
}

/// A single attribute value. `Missing` is its own state and is never
/// conflated with zero, `false` or the empty string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "lowercase")]
pub enum AttributeValue {
    Integer(i64),
    Real(f64),
    Boolean(bool),
    Text(String),
    Timestamp(NaiveDate),
    Missing,
}

impl AttributeValue {
    pub fn is_missing(&self) -> bool {
        matches!(self, AttributeValue::Missing)
    }

    /// Numeric view used by classifiers and cohort splits.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            AttributeValue::Integer(v) => Some(*v as f64),
            AttributeValue::Real(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            AttributeValue::Boolean(b) => Some(*b),
            _ => None,
        }
    }
}

impl<T: Into<AttributeValue>> From<Option<T>> for AttributeValue {
    fn from(v: Option<T>) -> Self {
        v.map_or(AttributeValue::Missing, Into::into)
    }
}

impl From<i64> for AttributeValue {
    fn from(v: i64) -> Self {
        AttributeValue::Integer(v)
    }
}

impl From<f64> for AttributeValue {
    fn from(v: f64) -> Self {
        AttributeValue::Real(v)
    }
}

impl From<bool> for AttributeValue {
    fn from(v: bool) -> Self {
        AttributeValue::Boolean(v)
    }
}

impl From<String> for AttributeValue {
    fn from(v: String) -> Self {
        AttributeValue::Text(v)
    }
}

impl From<NaiveDate> for AttributeValue {
    fn from(v: NaiveDate) -> Self {
        AttributeValue::Timestamp(v)
    }
}

/// The six cardiovascular outcomes. The two death outcomes end a
/// patient's record in simulated data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CardiovascularOutcome {
    #[serde(rename = "HF")]
    Hf,
    #[serde(rename = "MI")]
    Mi,
    Stroke,
    #[serde(rename = "CV")]
    Cv,
    #[serde(rename = "Death_AnyCause")]
    DeathAnyCause,
    #[serde(rename = "Death_HF")]
    DeathHf,
}

impl CardiovascularOutcome {
    pub const ALL: [CardiovascularOutcome; 6] = [
        CardiovascularOutcome::Hf,
        CardiovascularOutcome::Mi,
        CardiovascularOutcome::Stroke,
        CardiovascularOutcome::Cv,
        CardiovascularOutcome::DeathAnyCause,
        CardiovascularOutcome::DeathHf,
    ];

    pub fn label(self) -> &'static str {
        match self {
            CardiovascularOutcome::Hf => "HF",
            CardiovascularOutcome::Mi => "MI",
            CardiovascularOutcome::Stroke => "Stroke",
            CardiovascularOutcome::Cv => "CV",
            CardiovascularOutcome::DeathAnyCause => "Death_AnyCause",
            CardiovascularOutcome::DeathHf => "Death_HF",
        }
    }

    pub fn is_death(self) -> bool {
        matches!(
            self,
            CardiovascularOutcome::DeathAnyCause | CardiovascularOutcome::DeathHf
        )
    }
}

impl fmt::Display for CardiovascularOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for CardiovascularOutcome {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CardiovascularOutcome::ALL
            .into_iter()
            .find(|o| o.label() == s)
            .ok_or_else(|| ModelError::UnknownOutcome(s.to_string()))
    }
}

/// Heart-failure phenotype derived from the ejection fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Phenotype {
    #[serde(rename = "HFrEF")]
    HfrEf,
    #[serde(rename = "HFmrEF")]
    HfmrEf,
    #[serde(rename = "HFpEF")]
    HfpEf,
}

impl Phenotype {
    pub const ALL: [Phenotype; 3] = [Phenotype::HfrEf, Phenotype::HfmrEf, Phenotype::HfpEf];

    pub fn label(self) -> &'static str {
        match self {
            Phenotype::HfrEf => "HFrEF",
            Phenotype::HfmrEf => "HFmrEF",
            Phenotype::HfpEf => "HFpEF",
        }
    }
}

impl fmt::Display for Phenotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Phenotype {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Phenotype::ALL
            .into_iter()
            .find(|p| p.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| ModelError::UnknownPhenotype(s.to_string()))
    }
}

/// Maps an LVEF percentage onto its phenotype. 40 belongs to HFrEF.
pub fn classify_phenotype(lvef: i64) -> Result<Phenotype, ModelError> {
    match lvef {
        0..=40 => Ok(Phenotype::HfrEf),
        41..=49 => Ok(Phenotype::HfmrEf),
        50..=100 => Ok(Phenotype::HfpEf),
        _ => Err(ModelError::LvefOutOfRange(lvef)),
    }
}

/// One row of clinical data. Every optional field is `None` when the
/// source cell was empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatientDatum {
    pub pat_id: String,
    pub lvef: Option<i64>,
    pub hfref: Option<bool>,
    pub hfmref: Option<bool>,
    pub hfpef: Option<bool>,
    pub weight: Option<f64>,
    pub hf_diagnosis_year: Option<i64>,
    pub nt_pro_bnp: Option<f64>,
    pub diabetes: Option<bool>,
    pub ckd: Option<bool>,
    pub outcome: Option<CardiovascularOutcome>,
    pub wbc: Option<f64>,
    pub hstnt: Option<f64>,
    pub il6: Option<f64>,
    pub urea: Option<f64>,
    pub beta_blocker: Option<f64>,
    pub acei_arni: Option<f64>,
    pub sglt2: Option<f64>,
    pub mra: Option<f64>,
    pub timestamp: NaiveDate,
    /// 1-based position of the row in its source.
    pub row_index: usize,
    /// Columns outside the fixed schema, kept verbatim.
    #[serde(default)]
    pub extra: BTreeMap<String, String>,
}

impl PatientDatum {
    /// A record carrying only identity and time; every clinical field missing.
    pub fn new(pat_id: impl Into<String>, timestamp: NaiveDate, row_index: usize) -> Self {
        PatientDatum {
            pat_id: pat_id.into(),
            lvef: None,
            hfref: None,
            hfmref: None,
            hfpef: None,
            weight: None,
            hf_diagnosis_year: None,
            nt_pro_bnp: None,
            diabetes: None,
            ckd: None,
            outcome: None,
            wbc: None,
            hstnt: None,
            il6: None,
            urea: None,
            beta_blocker: None,
            acei_arni: None,
            sglt2: None,
            mra: None,
            timestamp,
            row_index,
            extra: BTreeMap::new(),
        }
    }

    /// All clinical fields as event attributes, keyed by their snake_case
    /// names. Missing fields are present with [`AttributeValue::Missing`].
    pub fn attributes(&self) -> BTreeMap<String, AttributeValue> {
        let mut attrs: BTreeMap<String, AttributeValue> = [
            ("lvef", self.lvef.into()),
            ("hfref", self.hfref.into()),
            ("hfmref", self.hfmref.into()),
            ("hfpef", self.hfpef.into()),
            ("weight", self.weight.into()),
            ("hf_diagnosis_year", self.hf_diagnosis_year.into()),
            ("nt_pro_bnp", self.nt_pro_bnp.into()),
            ("diabetes", self.diabetes.into()),
            ("ckd", self.ckd.into()),
            (
                "outcome",
                self.outcome.map(|o| o.label().to_string()).into(),
            ),
            ("wbc", self.wbc.into()),
            ("hstnt", self.hstnt.into()),
            ("il6", self.il6.into()),
            ("urea", self.urea.into()),
            ("beta_blocker", self.beta_blocker.into()),
            ("acei_arni", self.acei_arni.into()),
            ("sglt2", self.sglt2.into()),
            ("mra", self.mra.into()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        for (k, v) in &self.extra {
            let value = if v.is_empty() {
                AttributeValue::Missing
            } else {
                AttributeValue::Text(v.clone())
            };
            attrs.insert(k.clone(), value);
        }
        attrs
    }

    /// Phenotype from the explicit flags, falling back to LVEF.
    pub fn phenotype(&self) -> Option<Phenotype> {
        phenotype_from_parts(self.hfref, self.hfmref, self.hfpef, self.lvef)
    }
}

pub(crate) fn phenotype_from_parts(
    hfref: Option<bool>,
    hfmref: Option<bool>,
    hfpef: Option<bool>,
    lvef: Option<i64>,
) -> Option<Phenotype> {
    let flagged: Vec<Phenotype> = [
        (hfref, Phenotype::HfrEf),
        (hfmref, Phenotype::HfmrEf),
        (hfpef, Phenotype::HfpEf),
    ]
    .into_iter()
    .filter_map(|(flag, p)| (flag == Some(true)).then_some(p))
    .collect();
    match flagged.as_slice() {
        [single] => Some(*single),
        [] => lvef.and_then(|v| classify_phenotype(v).ok()),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub case_id: String,
    pub activity: String,
    pub timestamp: NaiveDate,
    pub attributes: BTreeMap<String, AttributeValue>,
}

impl Event {
    pub fn new(
        case_id: impl Into<String>,
        activity: impl Into<String>,
        timestamp: NaiveDate,
    ) -> Self {
        Event {
            case_id: case_id.into(),
            activity: activity.into(),
            timestamp,
            attributes: BTreeMap::new(),
        }
    }

    pub fn attribute(&self, key: &str) -> &AttributeValue {
        self.attributes.get(key).unwrap_or(&AttributeValue::Missing)
    }

    /// Phenotype recorded on this event, if determinable.
    pub fn phenotype(&self) -> Option<Phenotype> {
        phenotype_from_parts(
            self.attribute("hfref").as_bool(),
            self.attribute("hfmref").as_bool(),
            self.attribute("hfpef").as_bool(),
            match self.attribute("lvef") {
                AttributeValue::Integer(v) => Some(*v),
                AttributeValue::Real(v) => Some(v.round() as i64),
                _ => None,
            },
        )
    }
}

/// The ordered events of one case.
#[derive(Debug, Clone)]
pub struct Trace<'a> {
    pub case_id: &'a str,
    pub events: Vec<&'a Event>,
}

impl<'a> Trace<'a> {
    pub fn activities(&self) -> Vec<&'a str> {
        self.events.iter().map(|e| e.activity.as_str()).collect()
    }
}

/// A set of events. The trace view groups by case and orders each case by
/// `(timestamp, position in `events`)`, so ties keep insertion order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EventLog {
    pub events: Vec<Event>,
}

impl EventLog {
    pub fn new(events: Vec<Event>) -> Self {
        EventLog { events }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Traces sorted by case id.
    pub fn traces(&self) -> Vec<Trace<'_>> {
        let mut by_case: BTreeMap<&str, Vec<(usize, &Event)>> = BTreeMap::new();
        for (pos, e) in self.events.iter().enumerate() {
            by_case.entry(e.case_id.as_str()).or_default().push((pos, e));
        }
        by_case
            .into_iter()
            .map(|(case_id, mut evs)| {
                evs.sort_by_key(|(pos, e)| (e.timestamp, *pos));
                Trace {
                    case_id,
                    events: evs.into_iter().map(|(_, e)| e).collect(),
                }
            })
            .collect()
    }

    pub fn case_ids(&self) -> Vec<&str> {
        self.traces().into_iter().map(|t| t.case_id).collect()
    }

    /// Activity sequences in case order.
    pub fn activity_traces(&self) -> Vec<Vec<String>> {
        self.traces()
            .iter()
            .map(|t| t.activities().into_iter().map(str::to_string).collect())
            .collect()
    }

    /// The same log with events rearranged into trace order.
    pub fn canonical(&self) -> EventLog {
        EventLog {
            events: self
                .traces()
                .into_iter()
                .flat_map(|t| t.events.into_iter().cloned())
                .collect(),
        }
    }

    /// Keeps only the cases accepted by `keep`.
    pub fn filter_cases(&self, mut keep: impl FnMut(&Trace<'_>) -> bool) -> EventLog {
        let events = self
            .traces()
            .into_iter()
            .filter(|t| keep(t))
            .flat_map(|t| t.events.into_iter().cloned())
            .collect();
        EventLog { events }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatientSequence {
    pub pat_id: String,
    pub data: Vec<PatientDatum>,
}

/// Groups records per patient, ordered by `(timestamp, row_index)`.
pub fn build_sequences(data: &[PatientDatum]) -> BTreeMap<String, PatientSequence> {
    let mut out: BTreeMap<String, PatientSequence> = BTreeMap::new();
    for d in data {
        out.entry(d.pat_id.clone())
            .or_insert_with(|| PatientSequence {
                pat_id: d.pat_id.clone(),
                data: Vec::new(),
            })
            .data
            .push(d.clone());
    }
    for seq in out.values_mut() {
        seq.data.sort_by_key(|d| (d.timestamp, d.row_index));
    }
    out
}
