//! Digital object identifiers, the join key between publications, tweets
//! and news mentions.

use alloc::string::{String, ToString};
use core::fmt;

use serde::{Deserialize, Serialize};

const RESOLVER_PREFIXES: [&str; 5] = [
    "https://doi.org/",
    "http://doi.org/",
    "https://dx.doi.org/",
    "http://dx.doi.org/",
    "doi:",
];

/// Normalizes a DOI string: trims, lowercases and strips resolver prefixes.
///
/// Prefixes are stripped repeatedly so the operation is idempotent even for
/// doubly-prefixed input.
pub fn normalize(raw: &str) -> String {
    let mut s = raw.trim().to_lowercase();
    while let Some(rest) = RESOLVER_PREFIXES.iter().find_map(|p| s.strip_prefix(p)) {
        s = rest.trim().to_string();
    }
    s
}

/// A normalized DOI.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub struct Doi(String);

impl Doi {
    pub fn new(raw: &str) -> Self {
        Doi(normalize(raw))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<String> for Doi {
    fn from(s: String) -> Self {
        Doi::new(&s)
    }
}

impl From<&str> for Doi {
    fn from(s: &str) -> Self {
        Doi::new(s)
    }
}

impl From<Doi> for String {
    fn from(d: Doi) -> Self {
        d.0
    }
}

impl fmt::Display for Doi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}
