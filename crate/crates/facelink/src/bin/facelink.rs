//! Command-line front end for the facelink pipeline.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use facelink::evaluation::{
    compute_metrics, run_alignment_experiment, run_grid, run_sampling_experiment, CsvReportWriter,
};
use facelink::filtering::{build_anchor, load_anchor, write_anchor};
use facelink::ingest::{load_face_records, load_ground_truth, load_names, ProfileCollection};
use facelink::matching::write_match_file;
use facelink::names::{match_by_name, normalize_name, TranslitTable};
use facelink::pipeline::{run_pipeline, PipelineConfig};
use facelink::synthgen::{generate_dataset, write_dataset, SynthConfig};

#[derive(Parser)]
#[command(name = "facelink", version, about = "Cross-network profile matching from face embeddings")]
struct Cli {
    /// Worker threads for per-profile and per-cell work.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

/// Pipeline flags. Unset flags fall back to the config file, then to the
/// built-in defaults (quality 80, cluster threshold 0.8, k 2, min size 2,
/// threshold distance 0.65, name threshold 4).
#[derive(Args, Clone)]
struct PipelineArgs {
    /// Key=value config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Minimum face-crop side length q; keeps faces with >= q*q pixels.
    #[arg(long)]
    quality: Option<u64>,
    #[arg(long)]
    cluster_threshold: Option<f64>,
    #[arg(long)]
    k_clusters: Option<usize>,
    #[arg(long)]
    min_cluster_size: Option<usize>,
    #[arg(long)]
    threshold_distance: Option<f64>,
    #[arg(long)]
    name_threshold: Option<usize>,
    /// Build defining vectors from avatar faces only.
    #[arg(long)]
    avatars_only: bool,
    /// Greedy one-to-one assignment instead of independent per-source argmin.
    #[arg(long)]
    unique: bool,
    /// Anchor file; may be repeated.
    #[arg(long = "anchor")]
    anchors: Vec<PathBuf>,
    #[arg(long, env = "FACELINK_SEED")]
    seed: Option<u64>,
}

impl PipelineArgs {
    fn resolve(&self) -> Result<PipelineConfig> {
        let mut cfg = PipelineConfig::default();
        if let Some(path) = &self.config {
            apply_config_file(&mut cfg, path)?;
        }
        if let Some(v) = self.quality {
            cfg.quality_q = v;
        }
        if let Some(v) = self.cluster_threshold {
            cfg.cluster_threshold = v;
        }
        if let Some(v) = self.k_clusters {
            cfg.k_clusters = v;
        }
        if let Some(v) = self.min_cluster_size {
            cfg.min_cluster_size = v;
        }
        if let Some(v) = self.threshold_distance {
            cfg.threshold_distance = v;
        }
        if let Some(v) = self.name_threshold {
            cfg.name_threshold = v;
        }
        if self.avatars_only {
            cfg.avatars_only = true;
        }
        if self.unique {
            cfg.unique = true;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        for path in &self.anchors {
            cfg.anchors
                .push(load_anchor(path).with_context(|| format!("loading anchor {}", path.display()))?);
        }
        Ok(cfg)
    }
}

fn apply_config_file(cfg: &mut PipelineConfig, path: &Path) -> Result<()> {
    let content = std::fs::read_to_string(path)
        .with_context(|| format!("reading config file {}", path.display()))?;
    for (idx, line) in content.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .with_context(|| format!("{}:{}: expected key=value", path.display(), idx + 1))?;
        let (key, value) = (key.trim(), value.trim());
        let ctx = || format!("{}:{}: invalid value for {key}", path.display(), idx + 1);
        match key {
            "quality" => cfg.quality_q = value.parse().with_context(ctx)?,
            "cluster-threshold" => cfg.cluster_threshold = value.parse().with_context(ctx)?,
            "k-clusters" => cfg.k_clusters = value.parse().with_context(ctx)?,
            "min-cluster-size" => cfg.min_cluster_size = value.parse().with_context(ctx)?,
            "threshold-distance" => cfg.threshold_distance = value.parse().with_context(ctx)?,
            "name-threshold" => cfg.name_threshold = value.parse().with_context(ctx)?,
            "avatars-only" => cfg.avatars_only = value.parse().with_context(ctx)?,
            "unique" => cfg.unique = value.parse().with_context(ctx)?,
            "seed" => cfg.seed = value.parse().with_context(ctx)?,
            other => bail!("{}:{}: unknown config key {other:?}", path.display(), idx + 1),
        }
    }
    Ok(())
}

#[derive(Subcommand)]
enum Command {
    /// Run filter -> cluster -> owner -> match between two networks.
    Match {
        /// Directory with faces.jsonl (and optionally names.tsv).
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        /// Ground-truth pairs; enables metrics output.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Real-name Levenshtein matching baseline.
    Baseline {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Cyrillic-to-Latin table file; defaults to the bundled GOST 7.79
        /// System B table.
        #[arg(long)]
        translit_table: Option<PathBuf>,
        /// Remove spaces during name normalization.
        #[arg(long)]
        strip_spaces: bool,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Quality x threshold-distance sweep.
    Grid {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0,30,60,80,100,150")]
        qualities: Vec<u64>,
        #[arg(long, value_delimiter = ',', default_value = "0.35,0.45,0.55,0.65,0.75")]
        thresholds: Vec<f64>,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Photo-sampling experiment: rerun on per-profile photo subsamples.
    Sample {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.5,1.0")]
        fractions: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        repetitions: usize,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Partial-alignment experiment: shrink the aligned population.
    Align {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0.05,0.3,0.66,1.0")]
        rates: Vec<f64>,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Generate a synthetic dataset with ground truth.
    Synth {
        /// JSON config; missing keys take generator defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config's seed.
        #[arg(long, env = "FACELINK_SEED")]
        seed: Option<u64>,
    },
    /// Build an anchor from a face-record file of known child faces.
    Anchors {
        #[arg(long)]
        faces: PathBuf,
        #[arg(long, default_value_t = 0.8)]
        radius: f64,
        #[arg(long, default_value = "children")]
        label: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_network(dir: &Path) -> Result<ProfileCollection> {
    let faces = dir.join("faces.jsonl");
    let mut collection = load_face_records(&faces, None)
        .with_context(|| format!("loading {}", faces.display()))?;
    let names = dir.join("names.tsv");
    if names.exists() {
        load_names(&mut collection, &names)
            .with_context(|| format!("loading {}", names.display()))?;
    }
    Ok(collection)
}

fn ensure_out_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.max(1))
        .build()
        .context("building worker pool")?;
    pool.install(|| run(cli.command))
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Match {
            source,
            target,
            truth,
            out,
            pipeline,
        } => {
            let cfg = pipeline.resolve()?;
            let source = load_network(&source)?;
            let target = load_network(&target)?;
            let results = run_pipeline(&source, &target, &cfg)?;
            ensure_out_dir(&out)?;
            write_match_file(&results, out.join("matches.tsv"))?;
            if let Some(truth_path) = truth {
                let truth = load_ground_truth(&truth_path)?;
                let metrics = compute_metrics(&results, &truth)?;
                let mut csv = CsvReportWriter::create(out.join("metrics.csv"))?;
                csv.row("match", "-", 0, &metrics)?;
                csv.finish()?;
                println!(
                    "match: K={} K_p={} V={} P={:.4} R={:.4} F1={:.4}",
                    metrics.k, metrics.k_p, metrics.v, metrics.precision, metrics.recall, metrics.f1
                );
            } else {
                let matched = results.iter().filter(|r| r.is_matched()).count();
                println!("match: {} sources, {} matched", results.len(), matched);
            }
            Ok(())
        }
        Command::Baseline {
            source,
            target,
            truth,
            out,
            translit_table,
            strip_spaces,
            pipeline,
        } => {
            let cfg = pipeline.resolve()?;
            let table = match translit_table {
                Some(path) => TranslitTable::load(path)?,
                None => TranslitTable::default(),
            };
            let source = load_network(&source)?;
            let target = load_network(&target)?;
            let normalize = |c: &ProfileCollection| -> BTreeMap<_, _> {
                c.names
                    .iter()
                    .map(|(id, raw)| (id.clone(), normalize_name(raw, &table, strip_spaces)))
                    .collect()
            };
            let results = match_by_name(&normalize(&source), &normalize(&target), cfg.name_threshold);
            ensure_out_dir(&out)?;
            write_match_file(&results, out.join("matches.tsv"))?;
            if let Some(truth_path) = truth {
                let truth = load_ground_truth(&truth_path)?;
                let metrics = compute_metrics(&results, &truth)?;
                let mut csv = CsvReportWriter::create(out.join("metrics.csv"))?;
                csv.row("baseline", &format!("t{}", cfg.name_threshold), 0, &metrics)?;
                csv.finish()?;
                println!(
                    "baseline: K={} K_p={} V={} P={:.4} R={:.4} F1={:.4}",
                    metrics.k, metrics.k_p, metrics.v, metrics.precision, metrics.recall, metrics.f1
                );
            }
            Ok(())
        }
        Command::Grid {
            source,
            target,
            truth,
            out,
            qualities,
            thresholds,
            pipeline,
        } => {
            let cfg = pipeline.resolve()?;
            let source = load_network(&source)?;
            let target = load_network(&target)?;
            let truth = load_ground_truth(&truth)?;
            let cells = run_grid(&source, &target, &truth, &qualities, &thresholds, &cfg)?;
            ensure_out_dir(&out)?;
            let mut csv = CsvReportWriter::create(out.join("grid.csv"))?;
            for (q, t, m) in &cells {
                csv.row("grid", &format!("q{q}_d{t}"), 0, m)?;
            }
            csv.finish()?;
            println!("grid: {} cells written", cells.len());
            Ok(())
        }
        Command::Sample {
            source,
            target,
            truth,
            out,
            fractions,
            repetitions,
            pipeline,
        } => {
            let cfg = pipeline.resolve()?;
            let source = load_network(&source)?;
            let target = load_network(&target)?;
            let truth = load_ground_truth(&truth)?;
            let rows = run_sampling_experiment(
                &source,
                &target,
                &truth,
                &fractions,
                repetitions,
                cfg.seed,
                &cfg,
            )?;
            ensure_out_dir(&out)?;
            let mut csv = CsvReportWriter::create(out.join("sample.csv"))?;
            for (fraction, rep, m) in &rows {
                csv.row("sample", &format!("{fraction}"), *rep, m)?;
            }
            csv.finish()?;
            println!("sample: {} rows written", rows.len());
            Ok(())
        }
        Command::Align {
            source,
            target,
            truth,
            out,
            rates,
            pipeline,
        } => {
            let cfg = pipeline.resolve()?;
            let source = load_network(&source)?;
            let target = load_network(&target)?;
            let truth = load_ground_truth(&truth)?;
            let rows = run_alignment_experiment(&source, &target, &truth, &rates, cfg.seed, &cfg)?;
            ensure_out_dir(&out)?;
            let mut csv = CsvReportWriter::create(out.join("align.csv"))?;
            for (rate, m) in &rows {
                csv.row("align", &format!("{rate}"), 0, m)?;
            }
            csv.finish()?;
            println!("align: {} rows written", rows.len());
            Ok(())
        }
        Command::Synth { config, out, seed } => {
            let mut cfg = match config {
                Some(path) => SynthConfig::load(path)?,
                None => SynthConfig::default(),
            };
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let dataset = generate_dataset(&cfg)?;
            ensure_out_dir(&out)?;
            write_dataset(&dataset, &out)?;
            println!(
                "synth: {} source profiles, {} target profiles, {} true pairs -> {}",
                dataset.source.records.len(),
                dataset.target.records.len(),
                dataset.truth.v(),
                out.display()
            );
            Ok(())
        }
        Command::Anchors {
            faces,
            radius,
            label,
            out,
        } => {
            let collection = load_face_records(&faces, None)
                .with_context(|| format!("loading {}", faces.display()))?;
            let embeddings: Vec<_> = collection
                .records
                .values()
                .flatten()
                .map(|r| r.embedding.clone())
                .collect();
            let anchor = build_anchor(embeddings.iter(), radius, label)?;
            write_anchor(&anchor, &out)?;
            println!("anchors: {} faces -> {}", embeddings.len(), out.display());
            Ok(())
        }
    }
}
