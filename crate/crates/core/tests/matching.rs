use proptest::prelude::*;
use termkit::corpus::{find_occurrences, MatchConfig};
use termkit_oracle::{find_matches, slice};

fn config(case_fold: bool, require_word_boundary: bool) -> MatchConfig {
    MatchConfig {
        case_fold,
        require_word_boundary,
        ..MatchConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn occurrences_match_brute_force(
        text in "[abAB É,.-]{0,40}",
        term in "[abAB É]{1,4}",
        case_fold: bool,
        boundary: bool,
    ) {
        prop_assume!(!term.trim().is_empty());
        let found = find_occurrences(&text, &term, &config(case_fold, boundary)).unwrap();
        let spans: Vec<(usize, usize)> = found.iter().map(|o| (o.start, o.end)).collect();
        prop_assert_eq!(&spans, &find_matches(&text, &term, case_fold, boundary));
        for o in &found {
            prop_assert_eq!(&o.surface, &slice(&text, (o.start, o.end)));
        }
    }

    #[test]
    fn boundary_matches_are_a_subset(text in "[ab ]{0,30}", term in "[ab]{1,3}") {
        let strict = find_occurrences(&text, &term, &config(true, true)).unwrap();
        let loose = find_occurrences(&text, &term, &config(true, false)).unwrap();
        prop_assert!(strict.iter().all(|o| loose.contains(o)));
    }
}
