//! Train the toy encoder over a corpus of ladders.

use std::path::Path;

use qalign_core::alignment::{load_corpus, train, write_history_csv, PromptBank};
use qalign_core::error::Result;
use qalign_core::store::store_read;

use crate::commands::ensure_parent_dir;
use crate::config::RunConfig;
use crate::meta::MetaWriter;

pub fn run(
    cfg: &RunConfig,
    corpus_dir: &Path,
    prompts: &Path,
    out: &Path,
    history: Option<&Path>,
) -> Result<()> {
    let meta = MetaWriter::start("train");
    let bank = PromptBank::<f32>::from_store(&store_read(prompts)?)?;
    let corpus = load_corpus(corpus_dir)?;
    eprintln!(
        "train: {} ladders, bank dim {}, {} epochs, batch {}",
        corpus.ladders.len(),
        bank.dim(),
        cfg.epochs,
        cfg.batch
    );
    let outcome = train(&corpus, &bank, &cfg.loss_config(), &cfg.train_config(bank.dim()))?;
    ensure_parent_dir(out)?;
    outcome.params.save(out)?;
    let history_path = match history {
        Some(p) => p.to_path_buf(),
        None => {
            let mut name = out.file_name().unwrap_or_default().to_os_string();
            name.push(".history.csv");
            out.with_file_name(name)
        }
    };
    write_history_csv(&history_path, &outcome.history)?;
    if let Some(last) = outcome.history.last() {
        println!("final_loss={}", last.total);
    } else {
        println!("final_loss=");
    }
    meta.finish(out, cfg)
}
