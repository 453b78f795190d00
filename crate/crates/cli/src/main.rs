use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dynamorep::config::ExperimentConfig;
use dynamorep::experiments::FeatureKind;
use dynamorep::optimizers::Algorithm;
use dynamorep::pipeline;

#[derive(Parser)]
#[command(name = "dynamorep", version, about = "Problem-class identification from optimizer trajectories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the optimizers and write one trajectory CSV per run.
    Generate(Options),
    /// Turn trajectories into a feature table per algorithm.
    Featurize(Options),
    /// Cross-validate both seed settings and write report JSON files.
    Evaluate(Options),
    /// Emit plot-ready CSVs from the reports.
    Report(Options),
    /// Every stage in order.
    All(Options),
}

#[derive(Args)]
struct Options {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dimension: Option<usize>,
    /// Instances per problem class.
    #[arg(long)]
    instances: Option<u32>,
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long, value_delimiter = ',')]
    algorithms: Option<Vec<Algorithm>>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    population: Option<usize>,
    /// dynamorep or ela.
    #[arg(long)]
    features: Option<FeatureKind>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    trees: Option<usize>,
    #[arg(long)]
    forest_seed: Option<u64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    workers: Option<usize>,
}

impl Options {
    fn resolve(self) -> dynamorep::Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($field:ident => $target:ident),*) => {
                $(if let Some(v) = self.$field { c.$target = v; })*
            };
        }
        set!(dimension => dimension, instances => instances, seeds => seeds,
             algorithms => algorithms, iterations => iterations, population => population,
             features => feature_kind, folds => folds, trees => trees,
             forest_seed => forest_seed, output_dir => output_dir, workers => workers);
        c.validate()?;
        Ok(c)
    }
}

fn run(command: Command) -> Result<(), (&'static str, dynamorep::Error)> {
    let (stage, options) = match command {
        Command::Generate(o) => ("generate", o),
        Command::Featurize(o) => ("featurize", o),
        Command::Evaluate(o) => ("evaluate", o),
        Command::Report(o) => ("report", o),
        Command::All(o) => ("all", o),
    };
    let config = options.resolve().map_err(|e| ("config", e))?;
    log::info!("config {} -> {}", config.hash(), config.output_dir.display());
    let step = |name: &'static str, f: fn(&ExperimentConfig) -> dynamorep::Result<()>| {
        log::info!("{name}");
        f(&config).map_err(|e| (name, e))
    };
    let generate = |c: &ExperimentConfig| {
        let s = pipeline::cmd_generate(c)?;
        log::info!("{} runs written, {} already complete", s.written, s.skipped);
        Ok(())
    };
    let featurize = |c: &ExperimentConfig| pipeline::cmd_featurize(c).map(drop);
    let evaluate = |c: &ExperimentConfig| pipeline::cmd_evaluate(c).map(drop);
    let report = |c: &ExperimentConfig| pipeline::cmd_report(c).map(drop);
    match stage {
        "generate" => step("generate", generate),
        "featurize" => step("featurize", featurize),
        "evaluate" => step("evaluate", evaluate),
        "report" => step("report", report),
        _ => {
            step("generate", generate)?;
            step("featurize", featurize)?;
            step("evaluate", evaluate)?;
            step("report", report)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err((stage, err)) => {
            eprintln!("dynamorep {stage} failed: {err}");
            ExitCode::FAILURE
        }
    }
}
