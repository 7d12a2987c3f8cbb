use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use altmap::pipeline::{corpus_names, scan_manifest, ArtifactManifest};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn altmap(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_altmap"))
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .output()
        .expect("run altmap")
}

fn ok(out: &Path, args: &[&str]) -> String {
    let o = altmap(out, args);
    assert!(o.status.success(), "altmap {args:?} failed: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).expect("utf-8 output")
}

fn fx(name: &str) -> String {
    fixtures().join(name).to_string_lossy().into_owned()
}

fn manifest(dir: &Path) -> ArtifactManifest {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).expect("manifest.json")).expect("manifest parses")
}

#[test]
fn stages_reproduce_the_monolithic_run() {
    let mono = tempfile::tempdir().unwrap();
    ok(mono.path(), &["run", "--config", &fx("config.toml")]);

    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let p = |name: &str| d.join(name).to_string_lossy().into_owned();
    ok(d, &["ingest", "--publications", &fx("publications.jsonl"), "--altmetrics", &fx("altmetrics.jsonl")]);
    ok(d, &["harvest", "--store", &fx("tweets.jsonl")]);
    ok(
        d,
        &[
            "segment",
            "--publications",
            &p("publications.jsonl"),
            "--altmetrics",
            &p("altmetrics.jsonl"),
            "--tweets",
            &p("tweets.jsonl"),
            "--keyword-thesaurus",
            &fx("keywords.thesaurus"),
            "--hashtag-thesaurus",
            &fx("hashtags.thesaurus"),
        ],
    );
    let first = ok(d, &["rank", "--corpus", &p("keywords_tweeted2_news.txt"), "--target", "40"]);
    let selected = first.split_whitespace().next().expect("term count").to_string();
    for seg in ["all", "not_tweeted", "tweeted2"] {
        ok(d, &["rank", "--corpus", &p(&format!("keywords_{seg}.txt")), "--target", &selected]);
    }
    ok(d, &["rank", "--corpus", &p("hashtags_tweeted2.txt"), "--target", "30"]);
    for name in corpus_names() {
        ok(d, &["build-net", "--corpus", &p(&format!("{name}.txt")), "--terms", &p(&format!("{name}.terms.txt"))]);
    }
    for name in corpus_names() {
        let out = ok(
            d,
            &[
                "cluster",
                "--in",
                &p(&format!("{name}.paj")),
                "--target-clusters",
                "4",
                "--min-cluster-size",
                "2",
                "--starts",
                "10",
                "--iterations",
                "10",
                "--merge-small",
                "true",
                "--range",
                "0",
                "0.25",
                "--max-probes",
                "40",
            ],
        );
        assert!(out.starts_with("resolution "), "{out}");
    }
    for name in corpus_names() {
        ok(d, &["layout", "--in", &p(&format!("{name}.paj")), "--clusters", &p(&format!("{name}.clusters.tsv"))]);
    }
    let sets: Vec<String> = ["all", "not_tweeted", "tweeted2", "tweeted2_news"].iter().map(|s| p(&format!("keywords_{s}.terms.txt"))).collect();
    let mut args = vec!["report", "overlap", "--sets"];
    args.extend(sets.iter().map(String::as_str));
    args.extend(["--names", "all,not_tweeted,tweeted2,tweeted2_news"]);
    ok(d, &args);
    ok(d, &["report", "journals", "--publications", &p("publications.jsonl"), "--segments", &p("segments.tsv"), "--top", "20"]);
    ok(d, &["report", "hashtags", "--stats", &p("hashtag_stats.json"), "--range", "1", "30"]);
    for name in corpus_names() {
        ok(d, &["report", "network", "--in", &p(&format!("{name}.paj")), "--map", &p(&format!("{name}.map.tsv"))]);
    }
    ok(d, &["manifest"]);

    let staged = manifest(d);
    let whole = manifest(mono.path());
    assert_eq!(staged, whole);
    assert_eq!(fs::read(d.join("manifest.json")).unwrap(), fs::read(mono.path().join("manifest.json")).unwrap());
    assert_eq!(scan_manifest(mono.path()).unwrap(), whole);
}

#[test]
fn run_reports_the_expected_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["run", "--config", &fx("config.toml")]);
    let m = manifest(dir.path());
    for name in ["overlap.csv", "journals.csv", "hashtag_hist.csv", "hashtag_hist.svg"] {
        assert!(m.get(name).is_some(), "{name} missing");
    }
    for name in corpus_names() {
        assert!(m.get(&format!("{name}.paj")).is_some());
        assert!(m.get(&format!("network_{name}.svg")).is_some());
    }
    for a in &m.files {
        assert_eq!(a.bytes, fs::metadata(dir.path().join(&a.name)).unwrap().len());
        assert_eq!(a.sha256.len(), 64);
    }
}

#[test]
fn cluster_echoes_the_chosen_resolution() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["run", "--config", &fx("config.toml")]);
    let out = tempfile::tempdir().unwrap();
    let paj = dir.path().join("keywords_all.paj");
    let text = ok(out.path(), &["--seed", "0", "cluster", "--in", &paj.to_string_lossy(), "--target-clusters", "4", "--range", "0", "0.25", "--min-cluster-size", "2"]);
    assert!(text.contains(": 4 clusters"), "{text}");
    let gamma: f64 = text.trim_start_matches("resolution ").split(':').next().unwrap().parse().unwrap();
    assert!(gamma > 0.0 && gamma < 0.25);
    assert!(out.path().join("keywords_all.clusters.tsv").is_file());
}

#[test]
fn missing_config_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = altmap(dir.path(), &["run", "--config", "/nonexistent/config.toml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_input_path_fails_before_any_work() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(fixtures().join("config.toml"))
        .unwrap()
        .replace("publications = \"publications.jsonl\"", "publications = \"no-such-file.jsonl\"");
    let cfg = dir.path().join("config.toml");
    fs::write(&cfg, text).unwrap();
    for name in ["publications.jsonl", "altmetrics.jsonl", "tweets.jsonl"] {
        fs::copy(fixtures().join(name), dir.path().join(name)).unwrap();
    }
    let out = dir.path().join("out");
    let o = altmap(&out, &["run", "--config", &cfg.to_string_lossy()]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no-such-file.jsonl"));
    assert!(!out.exists() || fs::read_dir(&out).unwrap().next().is_none());
}

#[test]
fn unknown_flags_and_bad_values_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(altmap(dir.path(), &["rank", "--bogus"]).status.code(), Some(2));
    assert_eq!(altmap(dir.path(), &["rank", "--corpus", "x.txt", "--target", "0"]).status.code(), Some(2));
    assert_eq!(altmap(dir.path(), &["frobnicate"]).status.code(), Some(2));
}

#[test]
fn stage_failure_exits_with_3_and_marks_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["publications.jsonl", "altmetrics.jsonl", "config.toml"] {
        fs::copy(fixtures().join(name), dir.path().join(name)).unwrap();
    }
    fs::write(dir.path().join("tweets.jsonl"), "{\"not\": \"a tweet\"}\n").unwrap();
    fs::write(dir.path().join("hashtags.thesaurus"), "").unwrap();
    fs::write(dir.path().join("keywords.thesaurus"), "").unwrap();
    let out = dir.path().join("out");
    let o = altmap(&out, &["run", "--config", &dir.path().join("config.toml").to_string_lossy()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("harvest"));
    let names: Vec<String> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    assert!(names.contains(&"publications.jsonl.partial".to_string()), "{names:?}");
    assert!(names.iter().all(|n| n.ends_with(".partial")), "{names:?}");
    assert!(!names.contains(&"manifest.json".to_string()));
}

#[test]
fn missing_stage_input_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = altmap(dir.path(), &["rank", "--corpus", &dir.path().join("absent.txt").to_string_lossy()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("absent.txt"));
}

#[test]
fn gen_fixture_matches_the_bundled_files() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["gen-fixture", "--out", &dir.path().to_string_lossy()]);
    for name in ["publications.jsonl", "altmetrics.jsonl", "tweets.jsonl", "manifest.tsv", "config.toml", "hashtags.thesaurus", "keywords.thesaurus"] {
        assert_eq!(fs::read(dir.path().join(name)).unwrap(), fs::read(fixtures().join(name)).unwrap(), "{name}");
    }
}
