//! Publication and altmetric records and corpus-level coverage statistics.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::doi::Doi;
use crate::{Error, Result};

/// One paper of the corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicationRecord {
    pub doi: Doi,
    pub year: i32,
    pub journal: String,
    /// Raw author keywords, never empty strings.
    pub keywords: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
}

/// Attention data appended to a DOI.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AltmetricRecord {
    pub doi: Doi,
    /// Links to the tweets mentioning the paper, in input order. May be
    /// shorter than `tweet_count` when URLs are unavailable.
    pub tweet_urls: Vec<String>,
    /// Distinct Twitter accounts.
    pub account_count: u64,
    pub tweet_count: u64,
    pub news_count: u64,
}

impl AltmetricRecord {
    /// Zero-attention record for papers without altmetric data.
    pub fn empty(doi: Doi) -> Self {
        AltmetricRecord { doi, tweet_urls: Vec::new(), account_count: 0, tweet_count: 0, news_count: 0 }
    }

    /// Checks the record-level invariants, returning the violated rule.
    pub fn check(&self) -> core::result::Result<(), &'static str> {
        if self.account_count > 0 && self.tweet_count == 0 {
            return Err("account_count > 0 requires tweet_count > 0");
        }
        if self.tweet_urls.len() as u64 > self.tweet_count {
            return Err("more tweet_urls than tweet_count");
        }
        Ok(())
    }
}

/// Why an input line was not accepted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    /// 1-based line number.
    pub line: usize,
    pub reason: String,
}

/// Records accepted from a stream plus everything that was not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parsed<T> {
    pub records: Vec<T>,
    pub rejections: Vec<Rejection>,
    /// Non-fatal problems such as dropped malformed URLs.
    pub warnings: usize,
    /// Lines skipped only because they had no DOI.
    pub missing_doi: usize,
}

impl<T> Default for Parsed<T> {
    fn default() -> Self {
        Parsed { records: Vec::new(), rejections: Vec::new(), warnings: 0, missing_doi: 0 }
    }
}

impl<T> Parsed<T> {
    pub fn lines(&self) -> usize {
        self.records.len() + self.rejections.len()
    }
}

/// Coverage statistics of a corpus.
///
/// Keyword coverage is relative to the papers with a DOI, since only those
/// can be matched against altmetric data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub total_papers: usize,
    pub papers_with_doi: usize,
    pub papers_with_keywords: usize,
    pub doi_coverage: f64,
    pub keyword_coverage: f64,
    pub altmetric_records: usize,
    pub altmetric_matched: usize,
    pub tweets: u64,
    pub tweet_urls: u64,
    pub url_coverage: Option<f64>,
}

/// Computes coverage statistics. `missing_doi` counts input papers rejected
/// for lacking a DOI; they contribute to `total_papers` only.
pub fn validate_corpus(pubs: &[PublicationRecord], missing_doi: usize, alts: &[AltmetricRecord]) -> Result<CorpusStats> {
    if pubs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let total = pubs.len() + missing_doi;
    let with_keywords = pubs.iter().filter(|p| !p.keywords.is_empty()).count();
    let dois: BTreeSet<&Doi> = pubs.iter().map(|p| &p.doi).collect();
    let matched = alts.iter().filter(|a| dois.contains(&a.doi)).count();
    let tweets: u64 = alts.iter().map(|a| a.tweet_count).sum();
    let urls: u64 = alts.iter().map(|a| a.tweet_urls.len() as u64).sum();
    Ok(CorpusStats {
        total_papers: total,
        papers_with_doi: pubs.len(),
        papers_with_keywords: with_keywords,
        doi_coverage: pubs.len() as f64 / total as f64,
        keyword_coverage: with_keywords as f64 / pubs.len() as f64,
        altmetric_records: alts.len(),
        altmetric_matched: matched,
        tweets,
        tweet_urls: urls,
        url_coverage: (tweets > 0).then(|| urls as f64 / tweets as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::string::ToString;

    fn paper(i: usize, keywords: usize) -> PublicationRecord {
        PublicationRecord {
            doi: Doi::new(&alloc::format!("10.1/{i}")),
            year: 2015,
            journal: "Nature".to_string(),
            keywords: (0..keywords).map(|k| alloc::format!("kw{k}")).collect(),
            title: None,
        }
    }

    #[test]
    fn keyword_coverage_of_synthetic_corpus() {
        // 759 of 1,000 papers carry keywords.
        let pubs: Vec<_> = (0..1000).map(|i| paper(i, usize::from(i < 759))).collect();
        let stats = validate_corpus(&pubs, 0, &[]).unwrap();
        assert_eq!(stats.papers_with_keywords, 759);
        assert_eq!(alloc::format!("{:.1}", stats.keyword_coverage * 100.0), "75.9");
        assert_eq!(stats.url_coverage, None);
    }

    #[test]
    fn reported_doi_and_keyword_coverage() {
        let doi = 164_772.0 / 176_122.0 * 100.0;
        assert_eq!(alloc::format!("{doi:.1}"), "93.6");
        let kw = 125_003.0 / 164_772.0 * 100.0;
        assert_eq!(alloc::format!("{kw:.1}"), "75.9");
        let urls = 403_918.0 / 404_227.0 * 100.0;
        assert_eq!(alloc::format!("{urls:.1}"), "99.9");
    }

    #[test]
    fn full_keyword_coverage() {
        let pubs = vec![paper(1, 2), paper(2, 1)];
        let alts = vec![AltmetricRecord {
            doi: Doi::new("10.1/1"),
            tweet_urls: vec!["https://twitter.com/a/status/1".to_string()],
            account_count: 1,
            tweet_count: 2,
            news_count: 0,
        }];
        let stats = validate_corpus(&pubs, 1, &alts).unwrap();
        assert_eq!(stats.keyword_coverage, 1.0);
        assert_eq!(stats.total_papers, 3);
        assert_eq!(stats.altmetric_matched, 1);
        assert_eq!(stats.url_coverage, Some(0.5));
    }

    #[test]
    fn empty_corpus_is_an_error() {
        assert_eq!(validate_corpus(&[], 3, &[]), Err(Error::EmptyCorpus));
    }

    #[test]
    fn altmetric_invariants() {
        let mut a = AltmetricRecord::empty(Doi::new("10.1/x"));
        assert!(a.check().is_ok());
        a.account_count = 1;
        assert!(a.check().is_err());
        a.tweet_count = 1;
        a.tweet_urls = vec!["u1".into(), "u2".into()];
        assert!(a.check().is_err());
    }
}
