use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use fos_core::pipeline::{self, compute_stats, load_corpus, sample_for_eval, PipelineConfig, Stage};
use fos_core::syngen::{generate, PlantedSpec};

/// Concept discovery, tagging and hierarchy induction over a publication corpus.
#[derive(Debug, Parser)]
#[command(name = "fos", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run all three stages, reusing up-to-date artifacts.
    Run(RunArgs),
    /// Run concept discovery only.
    Discover(RunArgs),
    /// Run discovery (if stale) and tagging.
    Tag(RunArgs),
    /// Run every stage up to the hierarchy; same as `run`.
    Hierarchy(RunArgs),
    /// Generate a synthetic corpus with planted ground truth.
    Syngen(SyngenArgs),
    /// Export an evaluation sample of one stage's artifact.
    Sample(SampleArgs),
    /// Print the statistics report for an output directory.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Pipeline config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct SyngenArgs {
    /// Planted spec (TOML); defaults apply to missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[command(flatten)]
    run: RunArgs,
    /// discovery, tagging or hierarchy.
    #[arg(long)]
    stage: String,
}

#[derive(Debug, Args)]
struct StatsArgs {
    /// Pipeline config naming the output directory.
    #[arg(long, required_unless_present = "out")]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load_config(args: &RunArgs) -> Result<PipelineConfig> {
    let mut config = PipelineConfig::load(&args.config)?;
    if let Some(out) = &args.out {
        config.out_dir = out.clone();
    }
    if let Some(seed) = args.seed {
        config.rng_seed = seed;
    }
    Ok(config)
}

fn run(args: &RunArgs, until: Stage) -> Result<()> {
    let config = load_config(args)?;
    let report = pipeline::run(&config, until)?;
    for (stage, outcome) in &report.stages {
        println!("{stage}\t{}", serde_json::to_value(outcome)?.as_str().unwrap_or_default());
    }
    if let Some(stats) = report.stats {
        print!("{}", stats.to_json());
    }
    Ok(())
}

fn syngen(args: &SyngenArgs) -> Result<()> {
    let mut spec = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            toml::from_str::<PlantedSpec>(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => PlantedSpec::default(),
    };
    if let Some(seed) = args.seed {
        spec.rng_seed = seed;
    }
    let corpus = generate(&spec)?;
    corpus.write(&args.out)?;
    println!(
        "{} entities, {} documents, {} venues, {} planted concepts, {} planted edges -> {}",
        corpus.entities.len(),
        corpus.documents.len(),
        corpus.venues.len(),
        corpus.truth.fos.len(),
        corpus.truth.tree_edges.len(),
        args.out.display()
    );
    Ok(())
}

fn sample(args: &SampleArgs) -> Result<()> {
    let stage: Stage = args.stage.parse()?;
    let config = load_config(&args.run)?;
    let snapshot = load_corpus(&config)?;
    let report = sample_for_eval(stage, &config.out_dir, &snapshot, config.rng_seed)?;
    println!("{stage}: sampled {} of {} rows", report.sampled, report.available);
    for file in &report.files {
        println!("{}", file.display());
    }
    Ok(())
}

fn stats(args: &StatsArgs) -> Result<()> {
    let out: PathBuf = match (&args.out, &args.config) {
        (Some(out), _) => out.clone(),
        (None, Some(config)) => PipelineConfig::load(config)?.out_dir,
        (None, None) => bail!("either --out or --config is required"),
    };
    if !Path::new(&out).is_dir() {
        bail!("output directory {} does not exist", out.display());
    }
    print!("{}", compute_stats(&out)?.to_json());
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match &cli.command {
        Command::Run(args) | Command::Hierarchy(args) => run(args, Stage::Hierarchy),
        Command::Discover(args) => run(args, Stage::Discovery),
        Command::Tag(args) => run(args, Stage::Tagging),
        Command::Syngen(args) => syngen(args),
        Command::Sample(args) => sample(args),
        Command::Stats(args) => stats(args),
    }
}
