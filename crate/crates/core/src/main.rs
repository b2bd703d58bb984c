use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use asem::config::{ConfigError, PipelineConfig};
use asem::pipeline::{run_until, PipelineError, PipelineOutput, Stage};
use asem::synthetic::{write_dataset, SyntheticConfig};

/// Seed-word weak supervision for aspect-based sentiment analysis.
#[derive(Parser)]
#[command(name = "asem", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct StageArgs {
    /// Pipeline config (TOML). Keys can be overridden with ASEM_<SECTION>__<KEY>.
    #[arg(short, long)]
    config: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Train (or load cached) word vectors.
    TrainEmbeddings(StageArgs),
    /// Pseudo-label the in-domain corpus with the initial seeds.
    PseudoLabel(StageArgs),
    /// Add seed words from boundary keywords, relabel and filter.
    EnhanceSeeds(StageArgs),
    /// Retrieve and label augmentation sentences from the data bank.
    Retrieve(StageArgs),
    /// Train one classifier per configured seed.
    Train(StageArgs),
    /// Evaluate trained classifiers on the test split.
    Evaluate(StageArgs),
    /// Run every stage and print the metric report.
    Pipeline {
        #[command(flatten)]
        stage: StageArgs,
        /// Comma-separated classifier seeds; the report adds their mean.
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        /// Skip seed enhancement.
        #[arg(long)]
        no_sec: bool,
        /// Neighbours per query; 0 disables augmentation.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Write the planted synthetic dataset and a config for it.
    GenSynthetic {
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long, default_value_t = SyntheticConfig::default().seed)]
        seed: u64,
        #[arg(long, default_value_t = SyntheticConfig::default().in_domain)]
        in_domain: usize,
        #[arg(long, default_value_t = SyntheticConfig::default().bank)]
        bank: usize,
        #[arg(long, default_value_t = SyntheticConfig::default().test)]
        test: usize,
    },
}

fn load(args: &StageArgs) -> Result<PipelineConfig, PipelineError> {
    Ok(PipelineConfig::load(&args.config)?)
}

fn print_output(out: &PipelineOutput) {
    for (stage, hash) in &out.stage_hashes {
        println!("{stage:<16} {hash}");
    }
    for (word, aspect) in &out.added_seeds {
        println!("added seed {word} -> {aspect}");
    }
    for path in &out.artifacts {
        println!("wrote {}", path.display());
    }
    if let Some(report) = &out.report {
        print!("{}", report.to_table());
    }
}

fn run(command: Command) -> Result<(), PipelineError> {
    let (cfg, stage) = match command {
        Command::TrainEmbeddings(a) => (load(&a)?, Stage::Embeddings),
        Command::PseudoLabel(a) => (load(&a)?, Stage::PseudoLabel),
        Command::EnhanceSeeds(a) => (load(&a)?, Stage::EnhanceSeeds),
        Command::Retrieve(a) => (load(&a)?, Stage::Retrieve),
        Command::Train(a) => (load(&a)?, Stage::Train),
        Command::Evaluate(a) => (load(&a)?, Stage::Evaluate),
        Command::Pipeline { stage, seeds, no_sec, k } => {
            let mut cfg = load(&stage)?;
            if !seeds.is_empty() {
                cfg.run.seeds = seeds;
            }
            if no_sec {
                cfg.sec.enabled = false;
            }
            if let Some(k) = k {
                cfg.retrieval.k = k;
            }
            (cfg, Stage::Evaluate)
        }
        Command::GenSynthetic {
            out,
            seed,
            in_domain,
            bank,
            test,
        } => {
            let cfg = SyntheticConfig {
                seed,
                in_domain,
                bank,
                test,
                ..Default::default()
            };
            let path = write_dataset(&out, &cfg).map_err(|e| PipelineError::Stage {
                stage: "gen-synthetic",
                message: e.to_string(),
            })?;
            println!("wrote {}", path.display());
            return Ok(());
        }
    };
    let out = run_until(&cfg, stage)?;
    print_output(&out);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let PipelineError::Config(ConfigError::Io { .. }) = e {
                return ExitCode::from(1);
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
