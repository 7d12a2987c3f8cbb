//! Attention segments and the term-document corpora built from them.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{AltmetricRecord, PublicationRecord};
use crate::doi::Doi;
use crate::terms::{extract_hashtags, normalize_keyword, Thesaurus};
use crate::tweet::TweetRecord;
use crate::Error;

/// The four publication sets compared by the analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Segment {
    /// Every paper with a DOI.
    All,
    /// Papers without any tweet.
    NotTweeted,
    /// Papers tweeted by at least two distinct accounts.
    Tweeted2,
    /// Papers tweeted by at least two accounts and mentioned in news at least once.
    Tweeted2News,
}

impl Segment {
    pub const ALL: [Segment; 4] = [Segment::All, Segment::NotTweeted, Segment::Tweeted2, Segment::Tweeted2News];

    pub fn name(self) -> &'static str {
        match self {
            Segment::All => "all",
            Segment::NotTweeted => "not_tweeted",
            Segment::Tweeted2 => "tweeted2",
            Segment::Tweeted2News => "tweeted2_news",
        }
    }

    /// Display title used in report tables.
    pub fn title(self) -> &'static str {
        match self {
            Segment::All => "All",
            Segment::NotTweeted => "Not tweeted",
            Segment::Tweeted2 => "Tweeted",
            Segment::Tweeted2News => "Tweeted and mentioned in the news",
        }
    }

    pub fn min_accounts(self) -> u64 {
        match self {
            Segment::Tweeted2 | Segment::Tweeted2News => 2,
            _ => 0,
        }
    }

    pub fn require_news(self) -> bool {
        self == Segment::Tweeted2News
    }

    pub fn admits(self, alt: &AltmetricRecord) -> bool {
        match self {
            Segment::All => true,
            Segment::NotTweeted => alt.tweet_count == 0 && alt.account_count == 0,
            _ => alt.account_count >= self.min_accounts() && (!self.require_news() || alt.news_count >= 1),
        }
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Segment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Segment::ALL
            .into_iter()
            .find(|seg| seg.name() == s)
            .ok_or_else(|| Error::InvalidParameter(alloc::format!("unknown segment `{s}`")))
    }
}

/// Segment membership of every paper.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Segments {
    members: BTreeMap<Segment, BTreeSet<Doi>>,
}

impl Segments {
    pub fn get(&self, segment: Segment) -> &BTreeSet<Doi> {
        static EMPTY: BTreeSet<Doi> = BTreeSet::new();
        self.members.get(&segment).unwrap_or(&EMPTY)
    }

    pub fn insert(&mut self, segment: Segment, doi: Doi) {
        self.members.entry(segment).or_default().insert(doi);
    }

    pub fn size(&self, segment: Segment) -> usize {
        self.get(segment).len()
    }

    /// Segments a paper belongs to, in canonical order.
    pub fn flags(&self, doi: &Doi) -> Vec<Segment> {
        Segment::ALL.into_iter().filter(|s| self.get(*s).contains(doi)).collect()
    }

    /// Fraction of `all` that falls in `segment`.
    pub fn fraction(&self, segment: Segment) -> Option<f64> {
        let all = self.size(Segment::All);
        (all > 0).then(|| self.size(segment) as f64 / all as f64)
    }
}

/// Assigns every publication to the segments its attention data admits.
/// Papers without an altmetric record count as never tweeted.
pub fn classify_papers(pubs: &[PublicationRecord], alts: &[AltmetricRecord]) -> Segments {
    let mut by_doi: BTreeMap<&Doi, &AltmetricRecord> = BTreeMap::new();
    for a in alts {
        by_doi.entry(&a.doi).or_insert(a);
    }
    let mut segments = Segments::default();
    for seg in Segment::ALL {
        segments.members.entry(seg).or_default();
    }
    for p in pubs {
        let empty;
        let alt = match by_doi.get(&p.doi) {
            Some(a) => *a,
            None => {
                empty = AltmetricRecord::empty(p.doi.clone());
                &empty
            }
        };
        for seg in Segment::ALL {
            if seg.admits(alt) {
                segments.insert(seg, p.doi.clone());
            }
        }
    }
    segments
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusUnit {
    Paper,
    Tweet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    /// DOI for papers, tweet URL for tweets.
    pub id: String,
    pub doi: Doi,
    /// Distinct terms in first-occurrence order.
    pub terms: Vec<String>,
    /// Term occurrences before removing repeats.
    pub occurrences: usize,
}

/// Documents of one corpus; keyword corpora have one document per paper,
/// hashtag corpora one per tweet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermCorpus {
    pub unit: CorpusUnit,
    pub documents: Vec<Document>,
}

impl TermCorpus {
    pub fn term_lists(&self) -> impl Iterator<Item = &[String]> {
        self.documents.iter().map(|d| d.terms.as_slice())
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }
}

fn dedup_in_order(terms: Vec<String>) -> Vec<String> {
    let mut seen = BTreeSet::new();
    terms.into_iter().filter(|t| seen.insert(t.clone())).collect()
}

/// One document per keyworded paper of the segment, in publication order.
pub fn keyword_corpus(segment: &BTreeSet<Doi>, pubs: &[PublicationRecord], thesaurus: &Thesaurus) -> TermCorpus {
    let documents = pubs
        .iter()
        .filter(|p| segment.contains(&p.doi))
        .filter_map(|p| {
            let terms: Vec<String> =
                p.keywords.iter().filter_map(|k| normalize_keyword(k).ok()).map(|t| t.surface).collect();
            if terms.is_empty() {
                return None;
            }
            let occurrences = terms.len();
            let terms = dedup_in_order(thesaurus.apply_all(terms));
            Some(Document { id: p.doi.to_string(), doi: p.doi.clone(), terms, occurrences })
        })
        .collect();
    TermCorpus { unit: CorpusUnit::Paper, documents }
}

/// One document per tweet referring to a paper of the segment. Tweets without
/// hashtags yield empty documents.
pub fn hashtag_corpus(tweets: &[TweetRecord], segment: &BTreeSet<Doi>, thesaurus: &Thesaurus) -> TermCorpus {
    let documents = tweets
        .iter()
        .filter(|t| segment.contains(&t.doi))
        .map(|t| {
            let tags: Vec<String> = extract_hashtags(&t.text).into_iter().map(|h| h.surface).collect();
            let occurrences = tags.len();
            Document {
                id: t.url.clone(),
                doi: t.doi.clone(),
                terms: dedup_in_order(thesaurus.apply_all(tags)),
                occurrences,
            }
        })
        .collect();
    TermCorpus { unit: CorpusUnit::Tweet, documents }
}

/// Integer totals behind the hashtag ratios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct HashtagTotals {
    /// Hashtag occurrences, counting repeats within a tweet.
    pub hashtags: u64,
    pub tweets: u64,
    pub tweets_with_hashtag: u64,
    pub tweeted_papers: u64,
    pub doi_papers: u64,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Descriptive hashtag statistics. Ratios are always recomputed from the
/// integer totals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HashtagStats {
    pub totals: HashtagTotals,
    pub hashtags_per_tweet: Option<f64>,
    pub hashtags_per_tweeted_paper: Option<f64>,
    pub hashtags_per_doi_paper: Option<f64>,
    pub tweets_with_hashtag_fraction: Option<f64>,
    /// Hashtags per paper -> number of papers, over papers with at least one hashtag.
    pub per_paper: BTreeMap<u64, u64>,
    /// Paper with the most hashtags: (doi, hashtags, tweets).
    pub top_paper: Option<(Doi, u64, u64)>,
}

impl HashtagStats {
    pub fn from_totals(totals: HashtagTotals) -> Self {
        HashtagStats {
            totals,
            hashtags_per_tweet: ratio(totals.hashtags, totals.tweets),
            hashtags_per_tweeted_paper: ratio(totals.hashtags, totals.tweeted_papers),
            hashtags_per_doi_paper: ratio(totals.hashtags, totals.doi_papers),
            tweets_with_hashtag_fraction: ratio(totals.tweets_with_hashtag, totals.tweets),
            per_paper: BTreeMap::new(),
            top_paper: None,
        }
    }

    /// Ratios formatted as reported: two decimals, fraction as a percentage
    /// with one decimal. Undefined ratios render as `None`.
    pub fn rounded(&self) -> [Option<String>; 4] {
        let two = |x: Option<f64>| x.map(|v| alloc::format!("{v:.2}"));
        [
            two(self.hashtags_per_tweet),
            two(self.hashtags_per_tweeted_paper),
            two(self.hashtags_per_doi_paper),
            self.tweets_with_hashtag_fraction.map(|v| alloc::format!("{:.1}", v * 100.0)),
        ]
    }
}

/// Computes hashtag statistics for a tweet corpus.
pub fn hashtag_stats(corpus: &TermCorpus, tweeted_papers: usize, doi_papers: usize) -> HashtagStats {
    let mut per_doi: BTreeMap<&Doi, (u64, u64)> = BTreeMap::new();
    let mut totals = HashtagTotals {
        tweeted_papers: tweeted_papers as u64,
        doi_papers: doi_papers as u64,
        ..HashtagTotals::default()
    };
    for d in &corpus.documents {
        totals.tweets += 1;
        totals.hashtags += d.occurrences as u64;
        if d.occurrences > 0 {
            totals.tweets_with_hashtag += 1;
        }
        let e = per_doi.entry(&d.doi).or_insert((0, 0));
        e.0 += d.occurrences as u64;
        e.1 += 1;
    }
    let mut stats = HashtagStats::from_totals(totals);
    for (doi, (tags, tweets)) in &per_doi {
        if *tags > 0 {
            *stats.per_paper.entry(*tags).or_insert(0) += 1;
        }
        let better = match &stats.top_paper {
            None => *tags > 0,
            Some((_, best, _)) => tags > best,
        };
        if better {
            stats.top_paper = Some(((*doi).clone(), *tags, *tweets));
        }
    }
    stats
}
