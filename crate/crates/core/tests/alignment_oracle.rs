mod common {
    pub mod oracle;
}

use common::oracle::{check_alignment, oracle_cost, random_instance};
use pathminer::conformance::{align_with, AlignOptions, ConformanceError, Heuristic};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn compare(seed: u64, heuristic: Heuristic) -> Result<(), TestCaseError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (net, trace) = random_instance(&mut rng);
    let expected = oracle_cost(&net, &trace);
    let got = align_with(&net, &trace, AlignOptions { heuristic, ..Default::default() });
    match (expected, got) {
        (Some(cost), Ok(a)) => {
            prop_assert_eq!(a.cost, cost);
            check_alignment(&net, &trace, &a).map_err(TestCaseError::fail)?;
        }
        (None, Err(ConformanceError::FinalUnreachable)) => {}
        (e, g) => prop_assert!(false, "oracle {e:?} vs search {g:?}"),
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn zero_heuristic_matches_exhaustive_search(seed in any::<u64>()) {
        compare(seed, Heuristic::Zero)?;
    }

    #[test]
    fn label_bound_matches_exhaustive_search(seed in any::<u64>()) {
        compare(seed, Heuristic::LabelBound)?;
    }
}
