//! Deterministic synthetic corpus: papers on four climate topics with
//! distinct keyword and hashtag vocabularies, attention data and tweets.

use std::fmt::Write as _;
use std::path::Path;

use altmap_core::{AltmetricRecord, Doi, PublicationRecord, TweetRecord};
use chrono::{TimeZone, Utc};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::formats;
use crate::pipeline::write_tweets;

struct Topic {
    keywords: &'static [&'static str],
    hashtags: &'static [&'static str],
    journals: &'static [&'static str],
    phrase: &'static str,
}

const TOPICS: [Topic; 4] = [
    Topic {
        keywords: &[
            "sea-level rise", "Antarctica", "Greenland", "ice sheet", "glacier", "sea ice", "Arctic", "permafrost",
            "ice core", "ocean warming", "Paleoclimate", "Holocene", "ice shelf", "snow cover",
        ],
        hashtags: &["#Antarctica", "#Arctic", "#SeaLevel", "#Glaciers", "#Greenland", "#Ice", "#Polar"],
        journals: &[
            "The Cryosphere", "Journal of Glaciology", "Quaternary Science Reviews", "Climate of the Past",
            "Annals of Glaciology", "Polar Research", "Paleoceanography",
        ],
        phrase: "Ice loss",
    },
    Topic {
        keywords: &[
            "biodiversity", "extinction", "species distribution", "phenology", "coral reefs", "ecosystem services",
            "conservation", "range shift", "invasive species", "amphibians", "pollination", "forests",
            "habitat loss", "ocean acidification",
        ],
        hashtags: &["#Biodiversity", "#Extinction", "#Conservation", "#Corals", "#Forests", "#Wildlife"],
        journals: &[
            "Global Change Biology", "Ecology Letters", "Biological Conservation", "Diversity and Distributions",
            "Ecography", "Coral Reefs", "Oecologia",
        ],
        phrase: "Species shifts",
    },
    Topic {
        keywords: &[
            "renewable energy", "carbon dioxide", "greenhouse gases", "life cycle assessment", "emissions",
            "carbon capture", "bioenergy", "energy policy", "carbon tax", "mitigation", "solar energy",
            "electric vehicles", "energy efficiency", "carbon budget",
        ],
        hashtags: &["#Energy", "#Renewables", "#Solar", "#Carbon", "#Emissions", "#COP"],
        journals: &[
            "Energy Policy", "Applied Energy", "Journal of Cleaner Production", "Renewable Energy",
            "Energy Economics", "Climate Policy", "Environmental Science & Technology",
        ],
        phrase: "Decarbonisation",
    },
    Topic {
        keywords: &[
            "public health", "heat waves", "adaptation", "vulnerability", "food security", "migration",
            "air pollution", "malaria", "drought", "agriculture", "risk perception", "urban heat island",
            "crop yield", "water scarcity",
        ],
        hashtags: &["#Health", "#Heatwave", "#FoodSecurity", "#Agriculture", "#Drought", "#Adaptation"],
        journals: &[
            "Environmental Health Perspectives", "Global Environmental Change", "Climatic Change",
            "Food Policy", "Environmental Research Letters", "Regional Environmental Change", "Weather, Climate, and Society",
        ],
        phrase: "Health risks",
    },
];

const GENERAL_KEYWORDS: &[&str] = &["climate change", "global warming", "modeling", "temperature", "precipitation", "uncertainty"];
const GENERAL_HASHTAGS: &[&str] = &["#ClimateChange", "#Climate", "#Science", "#OpenAccess", "#GlobalWarming"];
const GENERAL_JOURNALS: &[&str] = &["Nature", "Science", "Nature Climate Change", "PNAS", "PLoS ONE", "Scientific Reports"];

/// Variant spellings merged by the default thesauri.
const KEYWORD_VARIANTS: &[(&str, &str)] = &[
    ("Paleoclimate", "Palaeoclimate"),
    ("greenhouse gases", "Greenhouse gas"),
    ("modeling", "Modelling"),
    ("carbon dioxide", "CO2"),
    ("life cycle assessment", "LCA"),
];
const HASHTAG_VARIANTS: &[(&str, &str)] = &[
    ("#Antarctica", "#Antarctic"),
    ("#Biodiversity", "#biodiversidad"),
    ("#Extinction", "#Extinción"),
    ("#Forests", "#forest"),
    ("#COP", "#COP21"),
    ("#OpenAccess", "#OA"),
];

/// Size of the generated corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixtureSpec {
    /// Publication lines, including a few without DOI.
    pub papers: usize,
    /// Tweets over all papers, before deletions and the year filter.
    pub tweets: usize,
    pub seed: u64,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        FixtureSpec { papers: 500, tweets: 5_000, seed: 0 }
    }
}

/// Generated files as text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fixture {
    pub publications: String,
    pub altmetrics: String,
    /// Tweets whose pages are still online.
    pub tweets: String,
    /// Every tweet URL, including deleted ones.
    pub manifest: String,
}

fn zipf_pick<'a, T>(rng: &mut ChaCha8Rng, items: &'a [T]) -> &'a T {
    let weights: Vec<f64> = (0..items.len()).map(|r| 1.0 / (r as f64 + 1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut x = rng.random::<f64>() * total;
    for (item, w) in items.iter().zip(&weights) {
        if x < *w {
            return item;
        }
        x -= w;
    }
    items.last().expect("non-empty")
}

fn surface(rng: &mut ChaCha8Rng, canonical: &str, variants: &[(&str, &str)]) -> String {
    if let Some((_, v)) = variants.iter().find(|(c, _)| *c == canonical) {
        if rng.random_bool(0.3) {
            return v.to_string();
        }
    }
    match rng.random_range(0..4) {
        0 => canonical.to_uppercase(),
        1 => canonical.to_lowercase(),
        _ => canonical.to_string(),
    }
}

fn keyword_surface(rng: &mut ChaCha8Rng, canonical: &str) -> String {
    let s = surface(rng, canonical, KEYWORD_VARIANTS);
    if rng.random_bool(0.2) {
        s.replace(' ', "-")
    } else {
        s
    }
}

fn choose_topic(rng: &mut ChaCha8Rng) -> usize {
    let x: f64 = rng.random();
    match x {
        x if x < 0.28 => 0,
        x if x < 0.54 => 1,
        x if x < 0.78 => 2,
        _ => 3,
    }
}

fn paper(rng: &mut ChaCha8Rng, i: usize, topic: usize) -> PublicationRecord {
    let t = &TOPICS[topic];
    let journal = if rng.random_bool(0.7) {
        zipf_pick(rng, t.journals).to_string()
    } else {
        zipf_pick(rng, GENERAL_JOURNALS).to_string()
    };
    let journal = if rng.random_bool(0.05) { journal.to_lowercase() } else { journal };
    let mut chosen: Vec<&str> = Vec::new();
    if !rng.random_bool(0.06) {
        if rng.random_bool(0.5) {
            chosen.push("climate change");
        }
        if rng.random_bool(0.3) {
            chosen.push(GENERAL_KEYWORDS.choose(rng).expect("general keywords"));
        }
        let n = rng.random_range(2..=5);
        while chosen.len() < n + 2 && chosen.iter().filter(|k| t.keywords.contains(k)).count() < n {
            let k = *zipf_pick(rng, t.keywords);
            if !chosen.contains(&k) {
                chosen.push(k);
            }
        }
        if rng.random_bool(0.12) {
            let other = &TOPICS[(topic + rng.random_range(1..4)) % 4];
            let k = *zipf_pick(rng, other.keywords);
            if !chosen.contains(&k) {
                chosen.push(k);
            }
        }
    }
    let keywords = chosen.iter().map(|k| keyword_surface(rng, k)).collect();
    PublicationRecord {
        doi: Doi::new(&format!("10.5555/fx.{i:04}")),
        year: rng.random_range(2011..=2017),
        journal,
        keywords,
        title: Some(format!("{} in a warming world: case {i}", t.phrase)),
    }
}

fn tweet_text(rng: &mut ChaCha8Rng, topic: usize, doi: &Doi) -> String {
    let t = &TOPICS[topic];
    let mut text = String::from(match rng.random_range(0..4) {
        0 => "New paper:",
        1 => "Worth reading:",
        2 => "Interesting study on",
        _ => "Just published",
    });
    let _ = write!(text, " {}", t.phrase.to_lowercase());
    if rng.random_bool(0.55) {
        let n = rng.random_range(1..=4);
        let mut tags: Vec<&str> = Vec::new();
        for _ in 0..n {
            let tag = if rng.random_bool(0.3) { *zipf_pick(rng, GENERAL_HASHTAGS) } else { *zipf_pick(rng, t.hashtags) };
            if !tags.contains(&tag) {
                tags.push(tag);
            }
        }
        for tag in tags {
            let s = surface(rng, tag, HASHTAG_VARIANTS);
            let _ = write!(text, " {s}");
        }
    }
    if rng.random_bool(0.2) {
        let _ = write!(text, " https://doi.org/{doi}#abstract");
    }
    text
}

/// Builds the corpus. Identical specs give identical text.
pub fn generate(spec: FixtureSpec) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut publications = String::new();
    let mut papers: Vec<(PublicationRecord, usize)> = Vec::new();
    for i in 0..spec.papers {
        let topic = choose_topic(&mut rng);
        let p = paper(&mut rng, i, topic);
        if i % 60 == 59 {
            let mut line = formats::publication_line(&p);
            line = line.replacen(&format!("\"doi\":\"{}\",", p.doi), "", 1);
            publications.push_str(&line);
            publications.push('\n');
            continue;
        }
        publications.push_str(&formats::publication_line(&p));
        publications.push('\n');
        papers.push((p, topic));
    }

    // Attention: 45% untweeted, 15% one account, 40% two or more; half of
    // the latter also reach the news.
    let mut accounts = vec![0u64; papers.len()];
    let mut news = vec![0u64; papers.len()];
    for k in 0..papers.len() {
        let x: f64 = rng.random();
        if x < 0.45 {
            news[k] = u64::from(rng.random_bool(0.05));
        } else if x < 0.60 {
            accounts[k] = 1;
        } else {
            accounts[k] = rng.random_range(2..=12);
            if rng.random_bool(0.5) {
                news[k] = rng.random_range(1..=4);
            }
        }
    }
    let mut tweets = accounts.clone();
    let base: u64 = tweets.iter().sum();
    let multi: Vec<usize> = (0..papers.len()).filter(|&k| accounts[k] >= 2).collect();
    for _ in base..spec.tweets as u64 {
        let k = *zipf_pick(&mut rng, &multi);
        tweets[k] += 1;
    }

    let users: Vec<String> = (0..900).map(|u| format!("user{u:03}")).collect();
    let mut altmetrics = String::new();
    let mut store: Vec<TweetRecord> = Vec::new();
    let mut manifest = String::new();
    let mut status_id = 1_000_000u64;
    for (k, (p, topic)) in papers.iter().enumerate() {
        if tweets[k] == 0 && news[k] == 0 {
            continue;
        }
        let handles: Vec<&String> = users.choose_multiple(&mut rng, accounts[k] as usize).collect();
        let mut urls = Vec::new();
        for n in 0..tweets[k] {
            status_id += rng.random_range(1..50);
            let author = handles[(n as usize) % handles.len()];
            let url = format!("https://twitter.com/{author}/status/{status_id}");
            // A few tweets have no URL in the altmetric data.
            if rng.random_bool(0.005) {
                continue;
            }
            let _ = writeln!(manifest, "{url}\t{}", p.doi);
            urls.push(url.clone());
            // About 6% of tweets were deleted before harvesting.
            if rng.random_bool(0.06) {
                continue;
            }
            let year = if rng.random_bool(0.05) { 2018 } else { rng.random_range(p.year..=2017) };
            let ts = Utc
                .with_ymd_and_hms(year, rng.random_range(1..=12), rng.random_range(1..=28), rng.random_range(0..24), rng.random_range(0..60), 0)
                .single()
                .expect("valid date");
            store.push(TweetRecord::new(url, author.clone(), ts, tweet_text(&mut rng, *topic, &p.doi), p.doi.clone()));
        }
        let rec = AltmetricRecord {
            doi: p.doi.clone(),
            tweet_urls: urls,
            account_count: accounts[k],
            tweet_count: tweets[k],
            news_count: news[k],
        };
        altmetrics.push_str(&formats::write_altmetrics(std::slice::from_ref(&rec)));
    }
    Fixture { publications, altmetrics, tweets: write_tweets(&store), manifest }
}

pub const FIXTURE_CONFIG: &str = r#"# Bundled fixture: 500 publications, 5,000 tweets.
seed = 0
out_dir = "out"
year_from = 2011
year_to = 2017

[inputs]
publications = "publications.jsonl"
altmetrics = "altmetrics.jsonl"
tweets = "tweets.jsonl"
hashtag_thesaurus = "hashtags.thesaurus"
keyword_thesaurus = "keywords.thesaurus"

[terms]
keyword_target = 40
hashtag_target = 30

[cluster]
target_clusters = 4
min_cluster_size = 2
random_starts = 10
iterations = 10
merge_small = true
resolution_range = [0.0, 0.25]
max_probes = 40

[layout]
scale = 1.0
tolerance = 1e-6

[report]
top_journals = 20
histogram_range = [1, 30]
"#;

/// Writes the fixture files, default thesauri and a config into `dir`.
pub fn write_fixture(spec: FixtureSpec, dir: &Path) -> Result<()> {
    let f = generate(spec);
    formats::write_text(&dir.join("publications.jsonl"), &f.publications)?;
    formats::write_text(&dir.join("altmetrics.jsonl"), &f.altmetrics)?;
    formats::write_text(&dir.join("tweets.jsonl"), &f.tweets)?;
    formats::write_text(&dir.join("manifest.tsv"), &f.manifest)?;
    let hashtags = String::from("# variant => canonical; a leading hash is written \\#\n")
        + &formats::write_thesaurus(&altmap_core::Thesaurus::default_hashtags());
    formats::write_text(&dir.join("hashtags.thesaurus"), &hashtags)?;
    let keywords = String::from("# variant => canonical\n") + &formats::write_thesaurus(&altmap_core::Thesaurus::default_keywords());
    formats::write_text(&dir.join("keywords.thesaurus"), &keywords)?;
    formats::write_text(&dir.join("config.toml"), FIXTURE_CONFIG)?;
    Ok(())
}
