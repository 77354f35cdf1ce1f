use super::{MatchConfig, TermOccurrence};
use crate::error::{Error, Result};

/// Case folding applied per scalar value: a character folds to its lowercase
/// mapping when that mapping is a single character, and to itself otherwise.
/// Folding never changes the character count, so offsets stay aligned.
pub fn fold_char(c: char) -> char {
    let mut lower = c.to_lowercase();
    match (lower.next(), lower.next()) {
        (Some(l), None) => l,
        _ => c,
    }
}

/// A position is a word boundary iff the neighbouring character is absent or
/// not alphanumeric.
pub fn is_word_boundary(neighbour: Option<char>) -> bool {
    neighbour.is_none_or(|c| !c.is_alphanumeric())
}

/// Every exact match of `surface` in `text` under `cfg`, sorted by start.
///
/// Matches of the same surface may overlap each other; overlap resolution
/// across surfaces is left to the caller.
pub fn find_occurrences(
    text: &str,
    surface: &str,
    cfg: &MatchConfig,
) -> Result<Vec<TermOccurrence>> {
    let needle: Vec<char> = surface.trim().chars().collect();
    if needle.is_empty() {
        return Err(Error::EmptySurface);
    }
    let haystack: Vec<char> = text.chars().collect();
    if needle.len() > haystack.len() {
        return Ok(Vec::new());
    }

    let key = |c: char| if cfg.case_fold { fold_char(c) } else { c };
    let needle: Vec<char> = needle.into_iter().map(key).collect();
    let folded: Vec<char> = haystack.iter().copied().map(key).collect();

    let mut found = Vec::new();
    for start in 0..=folded.len() - needle.len() {
        let end = start + needle.len();
        if folded[start] != needle[0] || folded[start..end] != needle[..] {
            continue;
        }
        if cfg.require_word_boundary {
            let before = start.checked_sub(1).map(|i| haystack[i]);
            if !is_word_boundary(before) || !is_word_boundary(haystack.get(end).copied()) {
                continue;
            }
        }
        found.push(TermOccurrence {
            surface: haystack[start..end].iter().collect(),
            start,
            end,
        });
    }
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::OverlapPolicy;

    fn spans(found: &[TermOccurrence]) -> Vec<(usize, usize)> {
        found.iter().map(TermOccurrence::span).collect()
    }

    #[test]
    fn two_disjoint_hits() {
        let found = find_occurrences("tsunami after tsunami", "tsunami", &MatchConfig::default())
            .unwrap();
        assert_eq!(spans(&found), [(0, 7), (14, 21)]);
    }

    #[test]
    fn boundary_excludes_inner_substring() {
        let cfg = MatchConfig::default();
        assert!(find_occurrences("party", "art", &cfg).unwrap().is_empty());
        let loose = MatchConfig {
            require_word_boundary: false,
            ..cfg
        };
        assert_eq!(spans(&find_occurrences("party", "art", &loose).unwrap()), [(1, 4)]);
    }

    #[test]
    fn case_folded_matches_keep_original_surface() {
        let found = find_occurrences(
            "Heart failure and heart failure",
            "heart failure",
            &MatchConfig::default(),
        )
        .unwrap();
        assert_eq!(spans(&found), [(0, 13), (18, 31)]);
        assert_eq!(found[0].surface, "Heart failure");

        let strict = MatchConfig {
            case_fold: false,
            ..MatchConfig::default()
        };
        let found = find_occurrences("Heart failure and heart failure", "heart failure", &strict)
            .unwrap();
        assert_eq!(spans(&found), [(18, 31)]);
    }

    #[test]
    fn empty_surface_is_an_error() {
        let cfg = MatchConfig::default();
        assert!(matches!(find_occurrences("abc", "  ", &cfg), Err(Error::EmptySurface)));
    }

    #[test]
    fn self_overlapping_matches_are_all_reported() {
        let cfg = MatchConfig {
            require_word_boundary: false,
            overlap_policy: OverlapPolicy::AllowOverlaps,
            ..MatchConfig::default()
        };
        assert_eq!(spans(&find_occurrences("aaaa", "aa", &cfg).unwrap()), [(0, 2), (1, 3), (2, 4)]);
    }

    #[test]
    fn offsets_are_scalar_values() {
        let found = find_occurrences("Über Öl und öl", "öl", &MatchConfig::default()).unwrap();
        assert_eq!(spans(&found), [(5, 7), (12, 14)]);
        assert_eq!(found[0].surface, "Öl");
    }

    #[test]
    fn boundaries_apply_to_punctuated_surfaces_too() {
        let cfg = MatchConfig::default();
        assert_eq!(spans(&find_occurrences("use C++ daily", "C++", &cfg).unwrap()), [(4, 7)]);
        assert!(find_occurrences("C++x", "C++", &cfg).unwrap().is_empty());
    }
}
