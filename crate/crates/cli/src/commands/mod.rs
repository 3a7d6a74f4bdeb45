pub mod corpus;
pub mod degrade;
pub mod eval;
pub mod gmad;
pub mod list_kinds;
pub mod prompts;
pub mod score;
pub mod sweep;
pub mod synth;
pub mod train;

use qalign_core::error::{Error, Result};
use qalign_core::sampling::DatasetManifest;
use std::path::Path;

/// Loads a manifest and resolves relative image paths against the
/// manifest's own directory.
pub fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    let mut manifest = DatasetManifest::read_csv(path)?;
    if let Some(base) = path.parent() {
        for row in &mut manifest.rows {
            if row.path.is_relative() {
                row.path = base.join(&row.path);
            }
        }
    }
    Ok(manifest)
}

pub fn ensure_parent_dir(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    Ok(())
}
