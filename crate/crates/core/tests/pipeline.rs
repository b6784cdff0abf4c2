use std::collections::BTreeMap;

use pathminer::conformance::{evaluate, AlignOptions};
use pathminer::decision::{mine_place, ClassifierKind, MineOptions};
use pathminer::model::EventLog;
use pathminer::petri::{build_dejure, simulate, ChoiceRule, Comparison, Condition, Sampler, SimulationConfig};
use pathminer::stats::{compare_cohorts, Axis};
use pathminer::transform::transform_log;

fn log_of(config: &SimulationConfig) -> EventLog {
    transform_log(&simulate(config).unwrap()).unwrap()
}

fn probs(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn share(report: &pathminer::decision::DecisionReport, label: &str) -> f64 {
    report
        .distribution
        .iter()
        .find(|(l, _)| l == label)
        .map(|(_, p)| *p)
        .unwrap_or(0.0)
}

#[test]
fn simulated_logs_fit_the_reference_model() {
    let net = build_dejure();
    for seed in 0..5 {
        let log = log_of(&SimulationConfig { seed, ..Default::default() });
        let report = evaluate(&net, &log, AlignOptions::default()).unwrap();
        assert_eq!(report.fitness, 1.0, "seed {seed}");
        assert!(report.to_json().contains("\"fitness\": 1.0000"));
    }
}

#[test]
fn default_choices_are_recovered_at_p1_and_p4() {
    let net = build_dejure();
    let log = log_of(&SimulationConfig { patients: 10_000, seed: 11, ..Default::default() });
    let opts = MineOptions { kinds: vec![ClassifierKind::Majority], ..Default::default() };

    let p1 = mine_place(&net, &log, "p1", &opts).unwrap();
    assert_eq!(p1.skipped_traces, 0);
    for (label, expected) in [("None", 91.86), ("HF", 5.78), ("CV", 1.90), ("Stroke", 0.30), ("MI", 0.15)] {
        assert!((share(&p1, label) - expected).abs() <= 1.0, "p1 {label}: {}", share(&p1, label));
    }
    let p4 = mine_place(&net, &log, "p4", &opts).unwrap();
    for (label, expected) in [("None", 98.29), ("Death_AnyCause", 1.39), ("Death_HF", 0.33)] {
        assert!((share(&p4, label) - expected).abs() <= 0.5, "p4 {label}: {}", share(&p4, label));
    }
    let total: f64 = p4.distribution.iter().map(|(_, p)| p).sum();
    assert!((total - 100.0).abs() < 0.01);
}

#[test]
fn tree_recovers_a_planted_threshold() {
    let mut config = SimulationConfig { patients: 3000, seed: 5, ..Default::default() };
    config.choices.insert("p4".into(), probs(&[("tau5", 1.0), ("t_dac", 0.0), ("t_dhf", 0.0)]));
    config.attributes.insert(
        "nt_pro_bnp".into(),
        Sampler::Uniform { min: 100.0, max: 2000.0, missing_rate: 0.0 },
    );
    config.rules.push(ChoiceRule {
        place: "p4".into(),
        when: vec![Condition::new("nt_pro_bnp", Comparison::Gt, 1000.0)],
        probabilities: probs(&[("t_dhf", 1.0)]),
    });
    let log = log_of(&config);
    let report = mine_place(&build_dejure(), &log, "p4", &MineOptions::default()).unwrap();
    let tree = report
        .classifiers
        .iter()
        .find(|c| c.kind == ClassifierKind::DecisionTree)
        .unwrap();
    assert_eq!(tree.root_split.as_deref(), Some("nt_pro_bnp"));
    assert!(tree.accuracy >= 95.0, "accuracy {}", tree.accuracy);
    let majority = &report.classifiers[0];
    assert!(tree.accuracy >= majority.accuracy - 0.5);
}

#[test]
fn planted_cohort_excess_is_flagged() {
    let mut config = SimulationConfig { patients: 1200, seed: 3, ..Default::default() };
    config.rules.push(ChoiceRule {
        place: "p4".into(),
        when: vec![
            Condition::new("diabetes", Comparison::Eq, 1.0),
            Condition::new("lvef", Comparison::Le, 40.0),
        ],
        probabilities: probs(&[("tau5", 0.6), ("t_dhf", 0.4)]),
    });
    let log = log_of(&config);
    let report = compare_cohorts(&log, Axis::Diabetes, 0.05).unwrap();
    let death_hf = report.activities.iter().find(|a| a.activity == "Death_HF").unwrap();
    let kruskal = death_hf.kruskal.as_ref().unwrap();
    assert!(kruskal.p_value < 0.05, "p = {}", kruskal.p_value);

    let dunn = death_hf.dunn.as_ref().unwrap();
    let target = dunn.labels.iter().position(|l| l == "D=1 and HFrEF").unwrap();
    let mut best = (0, 1, f64::INFINITY);
    for i in 0..dunn.labels.len() {
        for j in i + 1..dunn.labels.len() {
            if dunn.adjusted[i][j] < best.2 {
                best = (i, j, dunn.adjusted[i][j]);
            }
        }
    }
    assert!(best.0 == target || best.1 == target, "most significant pair {best:?}");
    assert!(best.2 < 0.05);
    for (i, label) in dunn.labels.iter().enumerate() {
        if i != target {
            assert!(dunn.adjusted[i][target] < 0.05, "{label} vs D=1 and HFrEF");
        }
    }
}

/// With no planted effect each omnibus test should reject at about the
/// nominal rate: at most 10 of 100 seeds per activity (a binomial tail of
/// about 1% at alpha 0.05), and at most 7% pooled.
#[test]
fn null_cohorts_reject_at_nominal_rate() {
    let seeds = 100;
    let mut rejections = vec![0usize; 8];
    for seed in 0..seeds {
        let log = log_of(&SimulationConfig { seed, ..Default::default() });
        let report = compare_cohorts(&log, Axis::Diabetes, 0.05).unwrap();
        for (i, a) in report.activities.iter().enumerate() {
            if a.kruskal.as_ref().is_some_and(|k| k.p_value < 0.05) {
                rejections[i] += 1;
            }
        }
    }
    for (count, activity) in rejections.iter().zip(pathminer::stats::COHORT_ACTIVITIES) {
        assert!(*count <= 10, "{activity}: {count} rejections in {seeds} seeds");
    }
    let pooled = rejections.iter().sum::<usize>() as f64 / (8 * seeds) as f64;
    assert!(pooled <= 0.07, "pooled rejection rate {pooled}");
}
