//! Co-word network analysis for altmetrics topic maps.
//!
//! This crate holds the algorithmic core: DOI normalization, segmenting a
//! publication corpus by Twitter/news attention, hashtag and keyword term
//! extraction, tie-aware term selection, cosine-normalized co-occurrence
//! networks, resolution-parameterized clustering, Kamada-Kawai layout and the
//! comparison reports. It performs no IO and only needs `alloc`.
//!
//! File formats, HTTP harvesting and the command line live in the `altmap`
//! crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod cluster;
pub mod corpus;
pub mod doi;
mod error;
pub mod layout;
pub mod network;
pub mod report;
pub mod seed;
pub mod segment;
pub mod terms;
pub mod tweet;

pub use cluster::{cluster, tune_resolution, ClusterAssignment, ClusterParams, Tuned};
pub use corpus::{validate_corpus, AltmetricRecord, CorpusStats, PublicationRecord};
pub use doi::Doi;
pub use error::{Error, Result};
pub use layout::{layout_kk, Layout, LayoutOptions};
pub use network::{build_matrix, cooccurrence, cosine_normalize, to_graph, CoocGraph, DocTermMatrix};
pub use segment::{classify_papers, hashtag_corpus, keyword_corpus, HashtagStats, Segment, Segments, TermCorpus};
pub use terms::{
    default_target, extract_hashtags, normalize_keyword, rank_frequencies, select_top, RankedTerms, Term, TermKind,
    TermSet, Thesaurus,
};
pub use tweet::{availability_stats, filter_by_year, FetchPolicy, FetchResult, FetchStatus, TweetRecord, YearWindow};
