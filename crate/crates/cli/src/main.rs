//! `qalign`: degradation ladders, quality-aware training, scoring, and
//! evaluation from the command line.
//!
//! Exit codes: 0 success, 1 runtime/I-O failure, 2 invalid arguments.
//! Logs go to stderr; data goes to files or stdout.

mod commands;
mod config;
mod meta;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qalign_core::error::Error;

use config::Overrides;

#[derive(Parser)]
#[command(name = "qalign", version, about = "Quality-aware image-text alignment toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every pipeline command.
#[derive(Args, Debug, Default)]
struct Common {
    /// Flat key=value config file; flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: logical CPU count).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Base seed for every derived random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate seeded synthetic pristine images plus a manifest.
    Synth {
        #[command(flatten)]
        common: Common,
        /// Number of images.
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Square image side in pixels.
        #[arg(long, default_value_t = 256)]
        size: usize,
        /// Output directory (images + manifest.csv).
        #[arg(long)]
        out: PathBuf,
    },
    /// List the 24 distortion kinds and their groups.
    ListKinds,
    /// Apply one distortion to one image and report the PSNR cost.
    Degrade {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
        /// Distortion kind (see `list-kinds`).
        #[arg(long)]
        kind: String,
        /// Intensity level 1..=5.
        #[arg(long)]
        level: u8,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a toy prompt bank of seeded random unit vectors.
    Prompts {
        #[command(flatten)]
        common: Common,
        /// Number of antonym pairs.
        #[arg(long, default_value_t = 7)]
        pairs: usize,
        /// Embedding dimension.
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a degradation-ladder corpus from a manifest.
    Corpus {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        patch_size: Option<usize>,
        #[arg(long)]
        levels: Option<u8>,
        /// Sequential distortions per ladder (ablation: 2).
        #[arg(long)]
        distortions: Option<u8>,
        #[arg(long)]
        min_overlap: Option<f64>,
    },
    /// Train the toy encoder on a corpus.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        corpus: PathBuf,
        /// Prompt bank store.
        #[arg(long)]
        prompts: PathBuf,
        /// Output model file.
        #[arg(long)]
        out: PathBuf,
        /// Loss history CSV (default: `<out>.history.csv`).
        #[arg(long)]
        history: Option<PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        batch: Option<usize>,
        #[arg(long)]
        learning_rate: Option<f64>,
        #[arg(long)]
        weight_decay: Option<f64>,
        #[arg(long)]
        m_cons: Option<f64>,
        #[arg(long)]
        m_rank: Option<f64>,
        #[arg(long)]
        lambda_cons: Option<f64>,
        #[arg(long)]
        lambda_pos: Option<f64>,
        #[arg(long)]
        lambda_neg: Option<f64>,
        #[arg(long)]
        tau: Option<f64>,
        /// Loss variant: similarity-ranking or quality-ranking.
        #[arg(long)]
        variant: Option<String>,
    },
    /// Score images (from a manifest or single files) or an embedding store.
    Score {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        prompts: PathBuf,
        /// Manifest of images to score.
        #[arg(long, conflicts_with_all = ["input", "store"])]
        manifest: Option<PathBuf>,
        /// Single image files to score.
        #[arg(long, num_args = 1.., conflicts_with = "store")]
        input: Vec<PathBuf>,
        /// Precomputed embedding store to score.
        #[arg(long)]
        store: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        tau: Option<f64>,
    },
    /// Correlate scores with opinion scores (SRCC, logistic-fitted PLCC).
    Eval {
        #[command(flatten)]
        common: Common,
        /// Scores CSV (id,s_p,s_n,q).
        #[arg(long)]
        scores: PathBuf,
        /// Manifest CSV carrying the mos column.
        #[arg(long)]
        manifest: PathBuf,
        /// Output report JSON.
        #[arg(long)]
        out: PathBuf,
    },
    /// Degrade held-out images at every (kind, level) and correlate scores
    /// with the intensity.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        prompts: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        /// Comma-separated kind names, or `all`.
        #[arg(long, default_value = "all")]
        kinds: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        tau: Option<f64>,
    },
    /// Maximum-differentiation pair selection between two score files.
    Gmad {
        #[command(flatten)]
        common: Common,
        /// Defender scores CSV.
        #[arg(long)]
        defender: PathBuf,
        /// Attacker scores CSV.
        #[arg(long)]
        attacker: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long)]
        band_width: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::InvalidArgument(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn init_pool(jobs: usize) {
    // Ignore the error when tests re-enter main in one process.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Synth { common, count, size, out } => {
            let cfg = config::resolve_config(common.config.as_ref(), &overrides(&common))?;
            init_pool(cfg.jobs);
            commands::synth::run(&cfg, count, size, &out)
        }
        Command::ListKinds => {
            commands::list_kinds::run();
            Ok(())
        }
        Command::Degrade { common, input, kind, level, out } => {
            let cfg = config::resolve_config(common.config.as_ref(), &overrides(&common))?;
            init_pool(cfg.jobs);
            commands::degrade::run(&cfg, &input, &kind, level, &out)
        }
        Command::Prompts { common, pairs, dim, out } => {
            let mut flags = overrides(&common);
            flags.dim = dim.or(flags.dim);
            let cfg = config::resolve_config(common.config.as_ref(), &flags)?;
            init_pool(cfg.jobs);
            commands::prompts::run(&cfg, pairs, &out)
        }
        Command::Corpus { common, manifest, out, patch_size, levels, distortions, min_overlap } => {
            let mut flags = overrides(&common);
            flags.patch_size = patch_size;
            flags.levels = levels;
            flags.distortions = distortions;
            flags.min_overlap = min_overlap;
            let cfg = config::resolve_config(common.config.as_ref(), &flags)?;
            init_pool(cfg.jobs);
            commands::corpus::run(&cfg, &manifest, &out)
        }
        Command::Train {
            common,
            corpus,
            prompts,
            out,
            history,
            epochs,
            batch,
            learning_rate,
            weight_decay,
            m_cons,
            m_rank,
            lambda_cons,
            lambda_pos,
            lambda_neg,
            tau,
            variant,
        } => {
            let mut flags = overrides(&common);
            flags.epochs = epochs;
            flags.batch = batch;
            flags.learning_rate = learning_rate;
            flags.weight_decay = weight_decay;
            flags.m_cons = m_cons;
            flags.m_rank = m_rank;
            flags.lambda_cons = lambda_cons;
            flags.lambda_pos = lambda_pos;
            flags.lambda_neg = lambda_neg;
            flags.tau = tau;
            flags.variant = variant.as_deref().map(parse_variant_flag).transpose()?;
            let cfg = config::resolve_config(common.config.as_ref(), &flags)?;
            init_pool(cfg.jobs);
            commands::train::run(&cfg, &corpus, &prompts, &out, history.as_deref())
        }
        Command::Score { common, model, prompts, manifest, input, store, out, tau } => {
            let mut flags = overrides(&common);
            flags.tau = tau;
            let cfg = config::resolve_config(common.config.as_ref(), &flags)?;
            init_pool(cfg.jobs);
            commands::score::run(
                &cfg,
                model.as_deref(),
                &prompts,
                manifest.as_deref(),
                &input,
                store.as_deref(),
                &out,
            )
        }
        Command::Eval { common, scores, manifest, out } => {
            let cfg = config::resolve_config(common.config.as_ref(), &overrides(&common))?;
            init_pool(cfg.jobs);
            commands::eval::run(&cfg, &scores, &manifest, &out)
        }
        Command::Sweep { common, model, prompts, manifest, kinds, out, tau } => {
            let mut flags = overrides(&common);
            flags.tau = tau;
            let cfg = config::resolve_config(common.config.as_ref(), &flags)?;
            init_pool(cfg.jobs);
            commands::sweep::run(&cfg, &model, &prompts, &manifest, &kinds, &out)
        }
        Command::Gmad { common, defender, attacker, out, levels, band_width } => {
            let mut flags = overrides(&common);
            flags.gmad_levels = levels;
            flags.band_width = band_width;
            let cfg = config::resolve_config(common.config.as_ref(), &flags)?;
            init_pool(cfg.jobs);
            commands::gmad::run(&cfg, &defender, &attacker, &out)
        }
    }
}

fn overrides(common: &Common) -> Overrides {
    Overrides { jobs: common.jobs, seed: common.seed, ..Default::default() }
}

fn parse_variant_flag(raw: &str) -> Result<qalign_core::alignment::LossVariant, Error> {
    match raw {
        "similarity-ranking" => Ok(qalign_core::alignment::LossVariant::SimilarityRanking),
        "quality-ranking" => Ok(qalign_core::alignment::LossVariant::QualityRanking),
        other => Err(Error::invalid(format!(
            "--variant must be similarity-ranking or quality-ranking, got `{other}`"
        ))),
    }
}
