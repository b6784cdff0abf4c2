use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::model::{EventLog, Phenotype, Trace};
use crate::petri::{VISIT_AFTER, VISIT_BEFORE};

use super::kruskal::{dunn_bonferroni, kruskal_wallis, DunnMatrix, KruskalResult};
use super::StatsError;

/// Activities compared across cohorts, in report order.
pub const COHORT_ACTIVITIES: [&str; 8] = [
    VISIT_BEFORE,
    VISIT_AFTER,
    "CV",
    "HF",
    "Stroke",
    "MI",
    "Death_AnyCause",
    "Death_HF",
];

pub const DEFAULT_ALPHA: f64 = 0.05;

/// Occurrences of `activity` in one case.
pub fn count_c(activity: &str, case: &str, log: &EventLog) -> usize {
    log.events
        .iter()
        .filter(|e| e.case_id == case && e.activity == activity)
        .count()
}

/// Per-case occurrence counts of `activity`, in case order.
pub fn count_l(activity: &str, log: &EventLog) -> Vec<usize> {
    log.traces().iter().map(|t| count_in_trace(activity, t)).collect()
}

fn count_in_trace(activity: &str, trace: &Trace<'_>) -> usize {
    trace.events.iter().filter(|e| e.activity == activity).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Diabetes,
    Ckd,
}

impl Axis {
    pub fn attribute(self) -> &'static str {
        match self {
            Axis::Diabetes => "diabetes",
            Axis::Ckd => "ckd",
        }
    }

    fn prefix(self) -> &'static str {
        match self {
            Axis::Diabetes => "D",
            Axis::Ckd => "CKD",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.attribute())
    }
}

impl FromStr for Axis {
    type Err = StatsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "diabetes" => Ok(Axis::Diabetes),
            "ckd" => Ok(Axis::Ckd),
            _ => Err(StatsError::UnknownAxis(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct CohortKey {
    pub axis: Axis,
    pub flag: bool,
    pub phenotype: Phenotype,
}

impl CohortKey {
    /// The six groups of an axis, flag first and phenotype labels sorted.
    pub fn all(axis: Axis) -> [CohortKey; 6] {
        let key = |flag, phenotype| CohortKey { axis, flag, phenotype };
        [
            key(false, Phenotype::HfmrEf),
            key(false, Phenotype::HfpEf),
            key(false, Phenotype::HfrEf),
            key(true, Phenotype::HfmrEf),
            key(true, Phenotype::HfpEf),
            key(true, Phenotype::HfrEf),
        ]
    }

    pub fn label(&self) -> String {
        format!(
            "{}={} and {}",
            self.axis.prefix(),
            u8::from(self.flag),
            self.phenotype.label()
        )
    }
}

/// The cohort a case belongs to, from the first recorded comorbidity flag
/// and phenotype in its trace.
pub fn cohort_of(trace: &Trace<'_>, axis: Axis) -> Option<CohortKey> {
    let flag = trace
        .events
        .iter()
        .find_map(|e| e.attribute(axis.attribute()).as_bool())?;
    let phenotype = trace.events.iter().find_map(|e| e.phenotype())?;
    Some(CohortKey { axis, flag, phenotype })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActivityComparison {
    pub activity: String,
    /// `None` when some group has no cases.
    pub kruskal: Option<KruskalResult>,
    pub dunn: Option<DunnMatrix>,
}

impl ActivityComparison {
    pub fn testable(&self) -> bool {
        self.kruskal.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CohortReport {
    pub axis: Axis,
    pub alpha: f64,
    pub groups: Vec<CohortKey>,
    pub group_sizes: Vec<usize>,
    /// Cases lacking the comorbidity flag or a phenotype.
    pub excluded: usize,
    pub activities: Vec<ActivityComparison>,
}

pub fn compare_cohorts(log: &EventLog, axis: Axis, alpha: f64) -> Result<CohortReport, StatsError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::InvalidAlpha(alpha));
    }
    let keys = CohortKey::all(axis);
    let traces = log.traces();
    let mut members: Vec<Vec<&Trace<'_>>> = vec![Vec::new(); keys.len()];
    let mut excluded = 0;
    for t in &traces {
        match cohort_of(t, axis).and_then(|k| keys.iter().position(|g| *g == k)) {
            Some(g) => members[g].push(t),
            None => excluded += 1,
        }
    }
    let labels: Vec<String> = keys.iter().map(CohortKey::label).collect();
    let testable = members.iter().all(|m| !m.is_empty());

    let mut activities = Vec::new();
    for activity in COHORT_ACTIVITIES {
        if !testable {
            activities.push(ActivityComparison { activity: activity.to_string(), kruskal: None, dunn: None });
            continue;
        }
        let groups: Vec<Vec<f64>> = members
            .iter()
            .map(|m| m.iter().map(|t| count_in_trace(activity, t) as f64).collect())
            .collect();
        let kruskal = match kruskal_wallis(&groups) {
            Ok(k) => k,
            Err(StatsError::TooFewObservations(_)) => {
                activities.push(ActivityComparison { activity: activity.to_string(), kruskal: None, dunn: None });
                continue;
            }
            Err(e) => return Err(e),
        };
        let dunn = if kruskal.p_value < alpha {
            Some(dunn_bonferroni(&groups)?.with_labels(labels.clone()))
        } else {
            None
        };
        activities.push(ActivityComparison {
            activity: activity.to_string(),
            kruskal: Some(kruskal),
            dunn,
        });
    }
    Ok(CohortReport {
        axis,
        alpha,
        groups: keys.to_vec(),
        group_sizes: members.iter().map(Vec::len).collect(),
        excluded,
        activities,
    })
}

impl CohortReport {
    /// One row per activity: H, degrees of freedom and p-value, or a
    /// `not testable` status.
    pub fn kruskal_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["activity", "h", "df", "p_value", "significant", "status"])
            .expect("in-memory write");
        for a in &self.activities {
            let row = match &a.kruskal {
                Some(k) => vec![
                    a.activity.clone(),
                    format!("{:.6}", k.h),
                    k.df.to_string(),
                    format!("{:.6}", k.p_value),
                    (k.p_value < self.alpha).to_string(),
                    "tested".to_string(),
                ],
                None => vec![
                    a.activity.clone(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    "not testable".to_string(),
                ],
            };
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }

    /// Adjusted p-value matrix laid out group by group.
    pub fn dunn_csv(matrix: &DunnMatrix) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header: Vec<&str> = std::iter::once("").chain(matrix.labels.iter().map(String::as_str)).collect();
        w.write_record(&header).expect("in-memory write");
        for (label, row) in matrix.labels.iter().zip(&matrix.adjusted) {
            let fields: Vec<String> = std::iter::once(label.clone())
                .chain(row.iter().map(|p| format!("{p:.6}")))
                .collect();
            w.write_record(&fields).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }

    pub fn summary(&self) -> String {
        let mut s = format!("axis: {}\nexcluded cases: {}\n", self.axis, self.excluded);
        for (g, n) in self.groups.iter().zip(&self.group_sizes) {
            s.push_str(&format!("{}: {n}\n", g.label()));
        }
        for a in &self.activities {
            match &a.kruskal {
                Some(k) => s.push_str(&format!(
                    "{}: H={:.4} p={:.4}{}\n",
                    a.activity,
                    k.h,
                    k.p_value,
                    if a.dunn.is_some() { " *" } else { "" }
                )),
                None => s.push_str(&format!("{}: not testable\n", a.activity)),
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AttributeValue, Event};
    use chrono::NaiveDate;

    fn day(d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2022, 1, d).unwrap()
    }

    fn example_log() -> EventLog {
        EventLog::new(vec![
            Event::new("007", "Visit before CO", day(1)),
            Event::new("007", "HF", day(2)),
            Event::new("007", "Death_HF", day(3)),
            Event::new("008", "Visit before CO", day(1)),
        ])
    }

    #[test]
    fn occurrence_counts() {
        let log = example_log();
        assert_eq!(count_c("HF", "007", &log), 1);
        assert_eq!(count_c("HF", "008", &log), 0);
        assert_eq!(count_c("Visit before CO", "007", &log), 1);
        assert_eq!(count_l("Visit before CO", &log), vec![1, 1]);
        assert_eq!(count_l("HF", &log), vec![1, 0]);
        assert!(count_l("HF", &EventLog::default()).is_empty());
    }

    #[test]
    fn counts_partition_the_log() {
        let log = example_log();
        let acts: std::collections::BTreeSet<&str> = log.events.iter().map(|e| e.activity.as_str()).collect();
        let total: usize = acts.iter().map(|a| count_l(a, &log).iter().sum::<usize>()).sum();
        assert_eq!(total, log.len());
        assert!(acts.iter().all(|a| count_l(a, &log).len() == 2));
    }

    #[test]
    fn group_labels() {
        let labels: Vec<String> = CohortKey::all(Axis::Diabetes).iter().map(CohortKey::label).collect();
        assert_eq!(labels[0], "D=0 and HFmrEF");
        assert_eq!(labels[5], "D=1 and HFrEF");
        assert_eq!(CohortKey::all(Axis::Ckd)[3].label(), "CKD=1 and HFmrEF");
        assert_eq!("CKD".parse::<Axis>().unwrap(), Axis::Ckd);
        assert!("bmi".parse::<Axis>().is_err());
    }

    #[test]
    fn missing_axis_is_not_testable() {
        let mut log = example_log();
        for e in &mut log.events {
            e.attributes.insert("lvef".into(), AttributeValue::Integer(30));
            e.attributes.insert("diabetes".into(), AttributeValue::Boolean(true));
        }
        let r = compare_cohorts(&log, Axis::Ckd, 0.05).unwrap();
        assert_eq!(r.excluded, 2);
        assert!(r.activities.iter().all(|a| !a.testable()));
        assert!(r.kruskal_csv().lines().skip(1).all(|l| l.ends_with("not testable")));
        assert_eq!(r.activities.len(), 8);
    }

    #[test]
    fn cohort_uses_first_recorded_values() {
        let mut log = example_log();
        log.events[0].attributes.insert("diabetes".into(), AttributeValue::Missing);
        log.events[1].attributes.insert("diabetes".into(), AttributeValue::Boolean(true));
        log.events[2].attributes.insert("diabetes".into(), AttributeValue::Boolean(false));
        log.events[1].attributes.insert("lvef".into(), AttributeValue::Integer(45));
        let traces = log.traces();
        let key = cohort_of(&traces[0], Axis::Diabetes).unwrap();
        assert_eq!(key.label(), "D=1 and HFmrEF");
        assert_eq!(cohort_of(&traces[1], Axis::Diabetes), None);
    }

    #[test]
    fn rejects_bad_alpha() {
        assert!(compare_cohorts(&example_log(), Axis::Diabetes, 0.0).is_err());
        assert!(compare_cohorts(&example_log(), Axis::Diabetes, f64::NAN).is_err());
    }

    #[test]
    fn dunn_csv_layout() {
        let m = dunn_bonferroni(&[vec![1.0, 2.0, 3.0], vec![7.0, 8.0, 9.0]])
            .unwrap()
            .with_labels(vec!["x".into(), "y".into()]);
        let csv = CohortReport::dunn_csv(&m);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], ",x,y");
        assert!(lines[1].starts_with("x,1.000000,"));
        assert!(lines[2].ends_with(",1.000000"));
    }
}
