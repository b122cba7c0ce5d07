//! "Did you mean" suggestions.

use std::collections::HashMap;

/// Largest edit distance at which a candidate is still suggested.
pub const MAX_SUGGESTION_DISTANCE: usize = 2;

/// Unrestricted Damerau-Levenshtein distance over Unicode scalar values:
/// insertions, deletions, substitutions and adjacent transpositions each
/// cost 1.
pub fn damerau_levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let (n, m) = (a.len(), b.len());
    let max = n + m;
    // (n + 2) x (m + 2) table with a sentinel border row/column.
    let width = m + 2;
    let mut d = vec![0usize; (n + 2) * width];
    d[0] = max;
    for i in 0..=n {
        d[(i + 1) * width] = max;
        d[(i + 1) * width + 1] = i;
    }
    for j in 0..=m {
        d[j + 1] = max;
        d[width + j + 1] = j;
    }
    let mut last_row: HashMap<char, usize> = HashMap::new();
    for i in 1..=n {
        let mut last_match_col = 0;
        for j in 1..=m {
            let i1 = *last_row.get(&b[j - 1]).unwrap_or(&0);
            let j1 = last_match_col;
            let cost = if a[i - 1] == b[j - 1] {
                last_match_col = j;
                0
            } else {
                1
            };
            let substitution = d[i * width + j] + cost;
            let insertion = d[(i + 1) * width + j] + 1;
            let deletion = d[i * width + j + 1] + 1;
            let transposition = d[i1 * width + j1] + (i - i1 - 1) + 1 + (j - j1 - 1);
            d[(i + 1) * width + j + 1] = substitution.min(insertion).min(deletion).min(transposition);
        }
        last_row.insert(a[i - 1], i);
    }
    d[(n + 1) * width + m + 1]
}

/// Candidates within [`MAX_SUGGESTION_DISTANCE`] of `offending`, closest
/// first; ties keep candidate order.
pub fn suggest_fix<S: AsRef<str>>(offending: &str, candidates: &[S]) -> Vec<String> {
    let mut scored: Vec<(usize, usize, &str)> = candidates
        .iter()
        .enumerate()
        .map(|(i, c)| (damerau_levenshtein(offending, c.as_ref()), i, c.as_ref()))
        .filter(|(d, _, _)| *d <= MAX_SUGGESTION_DISTANCE)
        .collect();
    scored.sort();
    scored.into_iter().map(|(_, _, c)| c.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const KERNELS: [&str; 5] = ["linear", "poly", "rbf", "sigmoid", "precomputed"];

    /// Exhaustive search over edit scripts, bounded by `limit` operations.
    /// Independent of the table-based implementation; only usable on short
    /// strings.
    fn brute_distance(a: &str, b: &str, limit: usize) -> usize {
        let alphabet: Vec<char> = a.chars().chain(b.chars()).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
        let mut frontier: std::collections::BTreeSet<String> = [a.to_string()].into();
        let mut seen = frontier.clone();
        for steps in 0..=limit {
            if frontier.contains(b) {
                return steps;
            }
            let mut next = std::collections::BTreeSet::new();
            for s in &frontier {
                let cs: Vec<char> = s.chars().collect();
                let mut push = |v: Vec<char>| {
                    let st: String = v.into_iter().collect();
                    if seen.insert(st.clone()) {
                        next.insert(st);
                    }
                };
                for i in 0..=cs.len() {
                    for &c in &alphabet {
                        let mut v = cs.clone();
                        v.insert(i, c);
                        push(v);
                    }
                }
                for i in 0..cs.len() {
                    let mut v = cs.clone();
                    v.remove(i);
                    push(v);
                    for &c in &alphabet {
                        let mut v = cs.clone();
                        v[i] = c;
                        push(v);
                    }
                    if i + 1 < cs.len() {
                        let mut v = cs.clone();
                        v.swap(i, i + 1);
                        push(v);
                    }
                }
            }
            frontier = next;
        }
        usize::MAX
    }

    #[test]
    fn known_distances() {
        assert_eq!(damerau_levenshtein("line", "linear"), 2);
        assert_eq!(damerau_levenshtein("rbf", "rbf"), 0);
        assert_eq!(damerau_levenshtein("", "abc"), 3);
        assert_eq!(damerau_levenshtein("SVD", "SVC"), 1);
        assert_eq!(damerau_levenshtein("ab", "ba"), 1);
        // Unrestricted variant: an edit between transposed letters is allowed.
        assert_eq!(damerau_levenshtein("ca", "abc"), 2);
    }

    #[test]
    fn kernel_suggestions() {
        assert_eq!(suggest_fix("line", &KERNELS), vec!["linear"]);
        assert_eq!(suggest_fix("rbf", &KERNELS), vec!["rbf"]);
        assert!(suggest_fix("zzzzzz", &KERNELS).is_empty());
        assert_eq!(suggest_fix("kernal", &["kernel", "degree"]), vec!["kernel"]);
    }

    proptest! {
        #[test]
        fn matches_exhaustive_search(a in "[ab]{0,3}", b in "[abc]{0,3}") {
            prop_assert_eq!(damerau_levenshtein(&a, &b), brute_distance(&a, &b, 6));
        }

        #[test]
        fn symmetric_and_bounded(a in "[a-d]{0,8}", b in "[a-d]{0,8}") {
            let d = damerau_levenshtein(&a, &b);
            prop_assert_eq!(d, damerau_levenshtein(&b, &a));
            prop_assert!(d <= a.chars().count().max(b.chars().count()));
            prop_assert_eq!(d == 0, a == b);
        }
    }
}
