//! Hashtag and author-keyword terms: extraction, normalization, synonym
//! merging, frequency ranking and tie-aware top-N selection.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermKind {
    Hashtag,
    Keyword,
}

/// A normalized term.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Term {
    pub surface: String,
    pub kind: TermKind,
}

impl Term {
    pub fn as_str(&self) -> &str {
        &self.surface
    }
}

fn is_tag_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn looks_like_url(token: &str) -> bool {
    token.contains("://") || token.get(..4).is_some_and(|p| p.eq_ignore_ascii_case("www."))
}

/// Extracts hashtags from tweet text.
///
/// A hashtag is a `#` at the start of a whitespace-delimited token, or after a
/// punctuation character, followed by a maximal run of letters, digits and
/// underscores. Tokens that look like URLs are skipped so fragment
/// identifiers are not mistaken for hashtags. Results are uppercased and keep
/// duplicates in text order.
pub fn extract_hashtags(text: &str) -> Vec<Term> {
    let mut out = Vec::new();
    for token in text.split(char::is_whitespace) {
        if token.is_empty() || looks_like_url(token) {
            continue;
        }
        let mut prev: Option<char> = None;
        let mut chars = token.char_indices().peekable();
        while let Some((i, c)) = chars.next() {
            if c == '#' && !prev.is_some_and(is_tag_char) {
                let start = i + 1;
                let mut end = start;
                while let Some(&(j, d)) = chars.peek() {
                    if !is_tag_char(d) {
                        break;
                    }
                    end = j + d.len_utf8();
                    chars.next();
                }
                if end > start {
                    let mut surface = String::with_capacity(end - i);
                    surface.push('#');
                    surface.push_str(&token[start..end].to_uppercase());
                    out.push(Term { surface, kind: TermKind::Hashtag });
                    prev = token[..end].chars().next_back();
                    continue;
                }
            }
            prev = Some(c);
        }
    }
    out
}

fn is_hyphen(c: char) -> bool {
    matches!(c, '-' | '\u{2010}' | '\u{2011}')
}

/// Normalizes an author keyword: trimmed, lowercased, each run of whitespace
/// and each hyphen replaced by an underscore.
pub fn normalize_keyword(raw: &str) -> Result<Term> {
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return Err(Error::EmptyKeyword);
    }
    let mut surface = String::with_capacity(trimmed.len());
    let mut in_space = false;
    for c in trimmed.chars() {
        if c.is_whitespace() {
            if !in_space {
                surface.push('_');
            }
            in_space = true;
            continue;
        }
        in_space = false;
        if is_hyphen(c) {
            surface.push('_');
        } else {
            surface.extend(c.to_lowercase());
        }
    }
    Ok(Term { surface, kind: TermKind::Keyword })
}

/// Normalizes one side of a thesaurus rule according to the term kind.
pub fn normalize_term(kind: TermKind, raw: &str) -> Result<String> {
    match kind {
        TermKind::Keyword => normalize_keyword(raw).map(|t| t.surface),
        TermKind::Hashtag => {
            let t = raw.trim();
            let body = t.strip_prefix('#').unwrap_or(t);
            if body.is_empty() || !body.chars().all(is_tag_char) {
                return Err(Error::Thesaurus(format!("`{raw}` is not a hashtag")));
            }
            Ok(format!("#{}", body.to_uppercase()))
        }
    }
}

/// Synonym mapping from variant terms to canonical terms.
///
/// Canonical terms never appear as variants, so one application reaches a
/// fixed point.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Thesaurus {
    map: BTreeMap<String, String>,
}

const DEFAULT_HASHTAG_RULES: [(&str, &str); 9] = [
    ("#ANTARCTIC", "#ANTARCTICA"),
    ("#BIODIVERSIDAD", "#BIODIVERSITY"),
    ("#CAMBIOCLIMTICO", "#CAMBIOCLIMATICO"),
    ("#COP21", "#COP"),
    ("#COP22", "#COP"),
    ("#FOREST", "#FORESTS"),
    ("#OA", "#OPENACCESS"),
    ("#EXTINCIÓN", "#EXTINCTION"),
    ("#EXTINCTIONS", "#EXTINCTION"),
];

const DEFAULT_KEYWORD_RULES: [(&str, &str); 7] = [
    ("greenhouse_gas", "greenhouse_gases"),
    ("modelling", "modeling"),
    ("models_and_modeling", "modeling"),
    ("palaeoclimate", "paleoclimate"),
    ("co2", "carbon_dioxide"),
    ("lca", "life_cycle_assessment"),
    ("life_cycle_assessment_(lca)", "life_cycle_assessment"),
];

impl Thesaurus {
    /// Builds a thesaurus from already-normalized `(variant, canonical)` pairs.
    pub fn new<I, A, B>(rules: I) -> Result<Self>
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<String>,
        B: Into<String>,
    {
        let mut map = BTreeMap::new();
        for (variant, canonical) in rules {
            let (variant, canonical) = (variant.into(), canonical.into());
            if variant == canonical {
                return Err(Error::Thesaurus(format!("`{variant}` maps to itself")));
            }
            if let Some(prev) = map.insert(variant.clone(), canonical.clone()) {
                if prev != canonical {
                    return Err(Error::Thesaurus(format!(
                        "`{variant}` maps to both `{prev}` and `{canonical}`"
                    )));
                }
            }
        }
        if let Some((v, c)) = map.iter().find(|(_, c)| map.contains_key(*c)) {
            return Err(Error::Thesaurus(format!("chain: `{v}` => `{c}` => `{}`", map[c])));
        }
        Ok(Thesaurus { map })
    }

    /// Builds a thesaurus from raw rule sides, normalizing each side for `kind`.
    pub fn for_kind<'a, I>(kind: TermKind, rules: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut normalized = Vec::new();
        for (v, c) in rules {
            normalized.push((normalize_term(kind, v)?, normalize_term(kind, c)?));
        }
        Thesaurus::new(normalized)
    }

    /// The hashtag merges used for the climate-change hashtag network.
    pub fn default_hashtags() -> Self {
        Thesaurus::new(DEFAULT_HASHTAG_RULES).expect("default hashtag thesaurus is valid")
    }

    /// The author-keyword merges used for the climate-change keyword networks.
    pub fn default_keywords() -> Self {
        Thesaurus::new(DEFAULT_KEYWORD_RULES).expect("default keyword thesaurus is valid")
    }

    pub fn apply<'a>(&'a self, term: &'a str) -> &'a str {
        self.map.get(term).map_or(term, String::as_str)
    }

    pub fn apply_all(&self, terms: Vec<String>) -> Vec<String> {
        terms
            .into_iter()
            .map(|t| match self.map.get(&t) {
                Some(c) => c.clone(),
                None => t,
            })
            .collect()
    }

    pub fn rules(&self) -> impl Iterator<Item = (&str, &str)> {
        self.map.iter().map(|(v, c)| (v.as_str(), c.as_str()))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub term: String,
    pub frequency: u64,
    /// Competition rank: equal frequencies share a rank, the next group's rank
    /// skips accordingly (1, 2, 2, 4, ...).
    pub rank: usize,
}

/// Term frequencies sorted by decreasing frequency, ties by term.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedTerms {
    pub entries: Vec<RankedEntry>,
}

impl RankedTerms {
    /// Builds a ranking from raw counts.
    pub fn from_counts(counts: impl IntoIterator<Item = (String, u64)>) -> Self {
        let mut entries: Vec<RankedEntry> =
            counts.into_iter().map(|(term, frequency)| RankedEntry { term, frequency, rank: 0 }).collect();
        entries.sort_by(|a, b| b.frequency.cmp(&a.frequency).then_with(|| a.term.cmp(&b.term)));
        for i in 0..entries.len() {
            entries[i].rank = if i > 0 && entries[i - 1].frequency == entries[i].frequency {
                entries[i - 1].rank
            } else {
                i + 1
            };
        }
        RankedTerms { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.entries.iter().map(|e| e.frequency).sum()
    }

    pub fn frequency(&self, term: &str) -> Option<u64> {
        self.entries.iter().find(|e| e.term == term).map(|e| e.frequency)
    }
}

/// Counts in how many documents each term occurs (repeats within a document
/// count once) and ranks the result.
pub fn rank_frequencies<D, T>(documents: impl IntoIterator<Item = D>) -> RankedTerms
where
    D: IntoIterator<Item = T>,
    T: AsRef<str>,
{
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    for doc in documents {
        seen.clear();
        for t in doc {
            let t = t.as_ref();
            if seen.insert(t.to_string()) {
                *counts.entry(t.to_string()).or_insert(0) += 1;
            }
        }
    }
    RankedTerms::from_counts(counts)
}

/// Terms chosen for a network, in rank order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermSet {
    pub terms: Vec<String>,
    pub target: usize,
    /// Selected terms occur more than this many times.
    pub threshold: Option<u64>,
}

impl TermSet {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn contains(&self, term: &str) -> bool {
        self.terms.iter().any(|t| t == term)
    }

    /// Human-readable selection rule, e.g. "more than 13".
    pub fn threshold_label(&self) -> Option<String> {
        self.threshold.map(|k| format!("more than {k}"))
    }
}

/// Selects whole frequency groups in descending order while the cumulative
/// size stays within `target`. A tie group is never split: the selection
/// stops before the first group that would overflow the target.
pub fn select_top(ranked: &RankedTerms, target: usize) -> Result<TermSet> {
    if target == 0 {
        return Err(Error::InvalidParameter("target must be at least 1".into()));
    }
    let entries = &ranked.entries;
    let mut selected = 0;
    while selected < entries.len() {
        let freq = entries[selected].frequency;
        let group_end = selected + entries[selected..].iter().take_while(|e| e.frequency == freq).count();
        if group_end > target {
            break;
        }
        selected = group_end;
    }
    if selected == 0 && !entries.is_empty() {
        log::warn!(
            "first tie group ({} terms at frequency {}) exceeds target {target}; selection is empty",
            entries.iter().take_while(|e| e.frequency == entries[0].frequency).count(),
            entries[0].frequency
        );
    }
    let threshold = match entries.get(selected) {
        Some(excluded) => Some(excluded.frequency),
        None => entries.last().map(|e| e.frequency - 1),
    };
    Ok(TermSet { terms: entries[..selected].iter().map(|e| e.term.clone()).collect(), target, threshold })
}

/// Default network size: the top 1% of the vocabulary, at least one term.
pub fn default_target(vocabulary_size: usize) -> usize {
    (libm::round(vocabulary_size as f64 * 0.01) as usize).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn tags(text: &str) -> Vec<String> {
        extract_hashtags(text).into_iter().map(|t| t.surface).collect()
    }

    #[test]
    fn hashtags_are_uppercased_in_order() {
        assert_eq!(tags("Rising seas #ClimateChange #COP21"), vec!["#CLIMATECHANGE", "#COP21"]);
        assert_eq!(tags("#EXTINCIÓN matters"), vec!["#EXTINCIÓN"]);
        assert_eq!(tags("#a #b #a"), vec!["#A", "#B", "#A"]);
    }

    #[test]
    fn url_fragments_are_not_hashtags() {
        assert!(tags("see https://x.org/page#frag").is_empty());
        assert!(tags("www.example.org/#top").is_empty());
        assert!(tags("x.org/page#frag").is_empty());
    }

    #[test]
    fn hashtag_boundaries() {
        assert_eq!(tags("(#COP21!) end"), vec!["#COP21"]);
        assert_eq!(tags("a#b #c#d"), vec!["#C"]);
        assert_eq!(tags("# alone ##x"), vec!["#X"]);
        assert_eq!(tags("#sea_ice,#arctic."), vec!["#SEA_ICE", "#ARCTIC"]);
        assert!(tags("no tags here").is_empty());
    }

    #[test]
    fn keyword_normalization() {
        assert_eq!(normalize_keyword("sea-level rise").unwrap().surface, "sea_level_rise");
        assert_eq!(normalize_keyword("Climate Change").unwrap().surface, "climate_change");
        assert_eq!(normalize_keyword("  Holocene  ").unwrap().surface, "holocene");
        assert_eq!(normalize_keyword("Life cycle  assessment (LCA)").unwrap().surface, "life_cycle_assessment_(lca)");
        assert_eq!(normalize_keyword("   "), Err(Error::EmptyKeyword));
    }

    #[test]
    fn default_thesauri_merge_variants() {
        let h = Thesaurus::default_hashtags();
        assert_eq!(h.apply("#ANTARCTIC"), "#ANTARCTICA");
        assert_eq!(h.apply("#EXTINCIÓN"), "#EXTINCTION");
        assert_eq!(h.apply("#COP22"), "#COP");
        assert_eq!(h.apply("#ARCTIC"), "#ARCTIC");
        let k = Thesaurus::default_keywords();
        assert_eq!(k.apply("palaeoclimate"), "paleoclimate");
        assert_eq!(k.apply("co2"), "carbon_dioxide");
        assert_eq!(k.apply("holocene"), "holocene");
    }

    #[test]
    fn thesaurus_rejects_chains_and_conflicts() {
        assert!(matches!(Thesaurus::new([("a", "b"), ("b", "c")]), Err(Error::Thesaurus(_))));
        assert!(matches!(Thesaurus::new([("a", "b"), ("a", "c")]), Err(Error::Thesaurus(_))));
        assert!(matches!(Thesaurus::new([("a", "a")]), Err(Error::Thesaurus(_))));
        assert!(Thesaurus::new([("a", "b"), ("a", "b"), ("c", "b")]).is_ok());
    }

    #[test]
    fn thesaurus_for_kind_normalizes_sides() {
        let t = Thesaurus::for_kind(TermKind::Keyword, [("Greenhouse gas", "greenhouse-gases")]).unwrap();
        assert_eq!(t.apply("greenhouse_gas"), "greenhouse_gases");
        let h = Thesaurus::for_kind(TermKind::Hashtag, [("#forest", "FORESTS")]).unwrap();
        assert_eq!(h.apply("#FOREST"), "#FORESTS");
        assert!(Thesaurus::for_kind(TermKind::Hashtag, [("#two words", "#x")]).is_err());
    }

    #[test]
    fn ranking_counts_once_per_document() {
        let docs = vec![vec!["a", "b"], vec!["a"], vec!["a", "c", "a"]];
        let r = rank_frequencies(docs);
        let got: Vec<_> = r.entries.iter().map(|e| (e.term.as_str(), e.frequency, e.rank)).collect();
        assert_eq!(got, vec![("a", 3, 1), ("b", 1, 2), ("c", 1, 2)]);
        assert_eq!(r.total(), 5);
        let empty = rank_frequencies(vec![Vec::<&str>::new()]);
        assert!(empty.is_empty());
    }

    #[test]
    fn competition_ranks() {
        let r = RankedTerms::from_counts([("a".into(), 5), ("b".into(), 3), ("c".into(), 3), ("d".into(), 1)]);
        assert_eq!(r.entries.iter().map(|e| e.rank).collect::<Vec<_>>(), vec![1, 2, 2, 4]);
    }

    /// `above` terms with distinct-ish frequencies above `tie_freq`, then a
    /// tie group of `tie_size` terms at `tie_freq`, then a tail at 1.
    fn ranking_with_tie(above: usize, tie_freq: u64, tie_size: usize) -> RankedTerms {
        let mut counts = Vec::new();
        for i in 0..above {
            counts.push((format!("hi{i:03}"), tie_freq + 1 + (i as u64 % 7)));
        }
        for i in 0..tie_size {
            counts.push((format!("tie{i:02}"), tie_freq));
        }
        for i in 0..50 {
            counts.push((format!("lo{i:02}"), 1));
        }
        RankedTerms::from_counts(counts)
    }

    #[test]
    fn tie_group_straddling_the_target_is_excluded() {
        let r = ranking_with_tie(85, 13, 10);
        let set = select_top(&r, 92).unwrap();
        assert_eq!(set.len(), 85);
        assert_eq!(set.threshold_label().as_deref(), Some("more than 13"));

        let r = ranking_with_tie(84, 9, 4);
        assert_eq!(select_top(&r, 85).unwrap().len(), 84);
    }

    #[test]
    fn exact_fit_without_ties() {
        let counts: Vec<_> = (0..100).map(|i| (format!("t{i:03}"), 200 - i as u64)).collect();
        let set = select_top(&RankedTerms::from_counts(counts), 85).unwrap();
        assert_eq!(set.len(), 85);
        assert_eq!(set.threshold, Some(115));
    }

    #[test]
    fn oversized_first_group_gives_empty_selection() {
        let r = RankedTerms::from_counts([("a".into(), 2), ("b".into(), 2), ("c".into(), 1)]);
        let set = select_top(&r, 1).unwrap();
        assert!(set.is_empty());
        assert!(select_top(&r, 0).is_err());
        let all = select_top(&r, 10).unwrap();
        assert_eq!((all.len(), all.threshold), (3, Some(0)));
    }

    #[test]
    fn default_targets() {
        assert_eq!(default_target(9_236), 92);
        assert_eq!(default_target(100), 1);
        assert_eq!(default_target(50), 1);
        assert_eq!(default_target(1), 1);
    }

    proptest! {
        #[test]
        fn extracted_hashtags_are_upper_and_whitespace_free(text in "\\PC{0,60}") {
            for t in extract_hashtags(&text) {
                prop_assert!(t.surface.starts_with('#'));
                prop_assert!(!t.surface.chars().any(char::is_whitespace));
                prop_assert_eq!(t.surface.to_uppercase(), t.surface.clone());
            }
        }

        #[test]
        fn thesaurus_application_is_idempotent(terms in proptest::collection::vec("#[A-Z]{1,3}", 0..20)) {
            let t = Thesaurus::new([("#A", "#B"), ("#C", "#B"), ("#AB", "#X")]).unwrap();
            let once = t.apply_all(terms);
            prop_assert_eq!(t.apply_all(once.clone()), once);
        }

        #[test]
        fn selection_never_splits_a_tie_group(
            freqs in proptest::collection::vec(1u64..20, 1..120),
            target in 1usize..100,
        ) {
            let r = RankedTerms::from_counts(freqs.iter().enumerate().map(|(i, f)| (format!("t{i}"), *f)));
            let set = select_top(&r, target).unwrap();
            prop_assert!(set.len() <= target);
            let selected: BTreeSet<&str> = set.terms.iter().map(String::as_str).collect();
            let min_in = r.entries.iter().filter(|e| selected.contains(e.term.as_str())).map(|e| e.frequency).min();
            let max_out = r.entries.iter().filter(|e| !selected.contains(e.term.as_str())).map(|e| e.frequency).max();
            if let (Some(lo), Some(hi)) = (min_in, max_out) {
                prop_assert!(lo > hi);
            }
            if let (Some(k), Some(lo)) = (set.threshold, min_in) {
                prop_assert!(lo > k);
            }
        }

        #[test]
        fn ranking_total_matches_distinct_per_document(docs in proptest::collection::vec(proptest::collection::vec("[a-e]", 0..6), 0..20)) {
            let r = rank_frequencies(docs.iter().map(|d| d.iter()));
            let expected: usize = docs.iter().map(|d| d.iter().collect::<BTreeSet<_>>().len()).sum();
            prop_assert_eq!(r.total(), expected as u64);
            prop_assert!(r.entries.windows(2).all(|w| w[0].frequency >= w[1].frequency));
        }
    }
}
