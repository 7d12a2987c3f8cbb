use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use altmap::config::{ClusterConfig, LayoutConfig, PipelineConfig};
use altmap::core::terms::TermKind;
use altmap::core::{FetchPolicy, YearWindow};
use altmap::fixture::{write_fixture, FixtureSpec};
use altmap::formats;
use altmap::pipeline::{self, Outputs, TweetSource};
use altmap::server::{Behavior, FixtureServer, FixtureSite};
use altmap::{Error, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "altmap", version, about = "Co-word maps of altmetrics attention segments")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Pipeline seed; per-stage seeds are derived from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    year_from: Option<i32>,
    #[arg(long, global = true)]
    year_to: Option<i32>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// More log output (-v, -vv).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
}

impl Global {
    fn out(&self) -> Result<Outputs> {
        Outputs::new(self.out_dir.clone().unwrap_or_else(|| PathBuf::from(".")))
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn window(&self) -> Result<YearWindow> {
        YearWindow::new(self.year_from.unwrap_or(2011), self.year_to.unwrap_or(2017)).map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate publication and altmetric files.
    Ingest {
        #[arg(long)]
        publications: PathBuf,
        #[arg(long)]
        altmetrics: PathBuf,
    },
    /// Fetch tweet pages (or load a tweet store) and apply the year window.
    Harvest(HarvestArgs),
    /// Classify papers into segments and write term corpora.
    Segment {
        #[arg(long)]
        publications: PathBuf,
        #[arg(long)]
        altmetrics: PathBuf,
        #[arg(long)]
        tweets: PathBuf,
        #[arg(long)]
        keyword_thesaurus: Option<PathBuf>,
        #[arg(long)]
        hashtag_thesaurus: Option<PathBuf>,
    },
    /// Rank the terms of a corpus and select the top ones.
    Rank {
        #[arg(long)]
        corpus: PathBuf,
        /// Default: 1% of the vocabulary.
        #[arg(long)]
        target: Option<usize>,
    },
    /// Build the co-occurrence network of a corpus.
    BuildNet {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        terms: PathBuf,
        #[arg(long)]
        min_edge_weight: Option<f64>,
    },
    /// Cluster a Pajek network.
    Cluster(ClusterArgs),
    /// Lay out a clustered network.
    Layout(LayoutArgs),
    /// Comparison reports.
    Report {
        #[command(subcommand)]
        report: ReportCommand,
    },
    /// Run the whole pipeline from a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Hash every file of the output directory into manifest.json.
    Manifest,
    /// Serve a tweet store as fixture pages.
    ServeFixtures {
        #[arg(long)]
        tweets: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        /// Answer 404 for every n-th tweet.
        #[arg(long)]
        dead_every: Option<usize>,
    },
    /// Generate the synthetic fixture corpus with a config.
    GenFixture {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 500)]
        papers: usize,
        #[arg(long, default_value_t = 5000)]
        tweets: usize,
    },
}

#[derive(Args)]
struct HarvestArgs {
    /// `url<TAB>doi` manifest to fetch.
    #[arg(long, conflicts_with = "store", required_unless_present = "store")]
    manifest: Option<PathBuf>,
    /// Use already parsed tweets instead of fetching.
    #[arg(long)]
    store: Option<PathBuf>,
    /// Send every request here instead of the URL's own host.
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    max_parallel: Option<usize>,
    /// Requests per second per host.
    #[arg(long)]
    rate_limit: Option<f64>,
    #[arg(long)]
    max_retries: Option<u32>,
    #[arg(long)]
    backoff_ms: Option<u64>,
    /// Directory for fetched pages, named by the SHA-256 of the URL.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ClusterArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    target_clusters: Option<usize>,
    #[arg(long)]
    resolution: Option<f64>,
    #[arg(long)]
    min_cluster_size: Option<usize>,
    #[arg(long)]
    starts: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    merge_small: Option<bool>,
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    range: Option<Vec<f64>>,
    #[arg(long)]
    max_probes: Option<usize>,
}

#[derive(Args)]
struct LayoutArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    clusters: PathBuf,
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    tolerance: Option<f64>,
    /// Fail on disconnected networks instead of packing components.
    #[arg(long)]
    no_per_component: bool,
}

#[derive(Subcommand)]
enum ReportCommand {
    /// Overlap table of term lists (overlap.csv).
    Overlap {
        #[arg(long, num_args = 1..)]
        sets: Vec<PathBuf>,
        /// Comma-separated display names; default: file names.
        #[arg(long, value_delimiter = ',')]
        names: Option<Vec<String>>,
    },
    /// Top journals per segment (journals.csv).
    Journals {
        #[arg(long)]
        publications: PathBuf,
        #[arg(long)]
        segments: PathBuf,
        #[arg(long, default_value_t = 20)]
        top: usize,
    },
    /// Hashtags-per-paper histogram (hashtag_hist.csv/.svg).
    Hashtags {
        #[arg(long)]
        stats: PathBuf,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        range: Option<Vec<usize>>,
    },
    /// SVG drawing of a network (network_<name>.svg).
    Network {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        map: PathBuf,
    },
}

fn cluster_config(a: &ClusterArgs) -> ClusterConfig {
    let mut c = ClusterConfig { target_clusters: a.target_clusters, ..ClusterConfig::default() };
    if let Some(v) = a.resolution {
        c.resolution = v;
    }
    if let Some(v) = a.min_cluster_size {
        c.min_cluster_size = v;
    }
    if let Some(v) = a.starts {
        c.random_starts = v;
    }
    if let Some(v) = a.iterations {
        c.iterations = v;
    }
    if let Some(v) = a.merge_small {
        c.merge_small = v;
    }
    if let Some(r) = &a.range {
        c.resolution_range = (r[0], r[1]);
    }
    if let Some(v) = a.max_probes {
        c.max_probes = v;
    }
    c
}

fn default_name(path: &std::path::Path) -> String {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("set");
    name.strip_suffix(".terms.txt").or_else(|| name.strip_suffix(".txt")).unwrap_or(name).to_string()
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    let threads = g.threads.unwrap_or(0);
    match cli.command {
        Command::Ingest { publications, altmetrics } => {
            let r = pipeline::ingest(&publications, &altmetrics, &mut g.out()?)?;
            let s = &r.stats;
            println!(
                "{} papers with DOI of {} ({:.1}%), {:.1}% with keywords; {} rejected lines",
                s.papers_with_doi,
                s.total_papers,
                100.0 * s.doi_coverage,
                100.0 * s.keyword_coverage,
                r.publication_rejections + r.altmetric_rejections
            );
        }
        Command::Harvest(a) => {
            let source = match (&a.store, &a.manifest) {
                (Some(store), _) => TweetSource::Store(store.clone()),
                (None, Some(m)) => {
                    let d = FetchPolicy::default();
                    let policy = FetchPolicy {
                        max_parallel: a.max_parallel.unwrap_or(d.max_parallel),
                        rate_limit: a.rate_limit.unwrap_or(d.rate_limit),
                        max_retries: a.max_retries.unwrap_or(d.max_retries),
                        backoff_base_ms: a.backoff_ms.unwrap_or(d.backoff_base_ms),
                        backoff_multiplier: d.backoff_multiplier,
                    };
                    policy.validate().map_err(|e| Error::Config(e.to_string()))?;
                    let manifest = formats::parse_manifest(&formats::read_text(m)?, m)?;
                    TweetSource::Harvest { manifest, endpoint: a.endpoint.clone(), policy, bodies: a.out.clone() }
                }
                (None, None) => unreachable!("clap requires one source"),
            };
            let r = pipeline::tweets(&source, g.window()?, threads, &mut g.out()?)?;
            if let Some(av) = &r.availability {
                println!(
                    "{} fetched: {} ok, {} dead ({:.1}%), {} failed",
                    av.total,
                    av.ok,
                    av.dead,
                    100.0 * av.dead_fraction,
                    av.failed
                );
            }
            println!("{} tweets, {} outside the year window, {} retained", r.loaded, r.removed_by_year, r.retained);
        }
        Command::Segment { publications, altmetrics, tweets, keyword_thesaurus, hashtag_thesaurus } => {
            let kw = pipeline::load_thesaurus(keyword_thesaurus.as_deref(), TermKind::Keyword)?;
            let ht = pipeline::load_thesaurus(hashtag_thesaurus.as_deref(), TermKind::Hashtag)?;
            let r = pipeline::segment(&publications, &altmetrics, &tweets, &kw, &ht, &mut g.out()?)?;
            for (name, size) in &r.sizes {
                println!("{name}\t{size}\t{:.1}%", 100.0 * r.fractions[name]);
            }
        }
        Command::Rank { corpus, target } => {
            if target == Some(0) {
                return Err(Error::Config("--target must be >= 1".into()));
            }
            let set = pipeline::rank(&corpus, target, &mut g.out()?)?;
            println!("{} terms selected (target {}), {}", set.len(), set.target, set.threshold_label().unwrap_or_default());
        }
        Command::BuildNet { corpus, terms, min_edge_weight } => {
            let graph = pipeline::build_net(&corpus, &terms, min_edge_weight, &mut g.out()?)?;
            println!("{} nodes, {} edges", graph.len(), graph.edges.len());
        }
        Command::Cluster(a) => {
            let cfg = cluster_config(&a);
            cfg.params(g.seed()).validate().map_err(|e| Error::Config(e.to_string()))?;
            let r = pipeline::cluster_net(&a.input, &cfg, g.seed(), threads, &mut g.out()?)?;
            println!("resolution {}: {} clusters, quality {:.4}", r.resolution, r.clusters, r.quality);
        }
        Command::Layout(a) => {
            let mut cfg = LayoutConfig::default();
            if let Some(v) = a.scale {
                cfg.scale = v;
            }
            if let Some(v) = a.max_iterations {
                cfg.max_iterations = v;
            }
            if let Some(v) = a.tolerance {
                cfg.tolerance = v;
            }
            cfg.per_component = !a.no_per_component;
            let l = pipeline::layout_net(&a.input, &a.clusters, &cfg, g.seed(), &mut g.out()?)?;
            println!("energy {:.6} -> {:.6} in {} moves", l.initial_energy, l.energy, l.iterations);
        }
        Command::Report { report } => {
            let mut out = g.out()?;
            match report {
                ReportCommand::Overlap { sets, names } => {
                    let names = names.unwrap_or_else(|| sets.iter().map(|p| default_name(p)).collect());
                    if names.len() != sets.len() {
                        return Err(Error::Config("--names must name every set".into()));
                    }
                    let t = pipeline::report_overlap(&names.into_iter().zip(sets).collect::<Vec<_>>(), &mut out)?;
                    print!("{}", t.to_csv());
                }
                ReportCommand::Journals { publications, segments, top } => {
                    let t = pipeline::report_journals(&publications, &segments, top, &mut out)?;
                    println!("{} journals in the union of the top-{top} lists", t.rows.len());
                }
                ReportCommand::Hashtags { stats, range } => {
                    let range = range.map(|r| (r[0], r[1])).unwrap_or((1, 30));
                    let h = pipeline::report_hashtags(&stats, range, &mut out)?;
                    println!("{} papers binned, {} outside {}..={}", h.bins.iter().sum::<u64>(), h.outside, h.lo, h.hi);
                }
                ReportCommand::Network { input, map } => {
                    let path = pipeline::report_network(&input, &map, &mut out)?;
                    println!("{}", path.display());
                }
            }
        }
        Command::Run { config } => {
            let mut cfg = PipelineConfig::load(&config)?;
            if let Some(s) = g.seed {
                cfg.seed = s;
            }
            if let Some(d) = &g.out_dir {
                cfg.out_dir = d.clone();
            }
            if let Some(y) = g.year_from {
                cfg.year_from = y;
            }
            if let Some(y) = g.year_to {
                cfg.year_to = y;
            }
            if let Some(t) = g.threads {
                cfg.threads = t;
            }
            let m = altmap::run_pipeline(&cfg)?;
            println!("{} files written to {}", m.files.len(), cfg.out_dir.display());
        }
        Command::Manifest => {
            let mut out = g.out()?;
            let m = pipeline::scan_manifest(out.dir())?;
            out.write_json("manifest.json", &m)?;
            println!("{} files hashed", m.files.len());
        }
        Command::ServeFixtures { tweets, addr, dead_every } => {
            let store = pipeline::load_tweets(&tweets)?;
            let mut site = FixtureSite::from_tweets(&store);
            if let Some(n) = dead_every.filter(|&n| n > 0) {
                for t in store.iter().skip(n - 1).step_by(n) {
                    if let Ok(u) = url::Url::parse(&t.url) {
                        site.insert(u.path(), Behavior::Status(404));
                    }
                }
            }
            let server = FixtureServer::start(site, addr)?;
            println!("serving {} tweets at {}", store.len(), server.endpoint());
            server.wait();
        }
        Command::GenFixture { out, papers, tweets } => {
            write_fixture(FixtureSpec { papers, tweets, seed: g.seed() }, &out)?;
            println!("fixture written to {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
