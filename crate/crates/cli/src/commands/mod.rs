pub mod gradcheck;
pub mod preprocess;
pub mod report;
pub mod run;
pub mod synth;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};

/// Creates `path` (and its parent directories) and hands a buffered writer
/// to `f`.
pub fn write_file(
    path: &Path,
    f: impl FnOnce(&mut BufWriter<File>) -> dietnet::Result<()>,
) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    f(&mut w).with_context(|| format!("writing {}", path.display()))?;
    w.flush()?;
    Ok(())
}

pub fn read_dataset(path: &Path) -> Result<dietnet::genotype::GenotypeDataset> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    dietnet::genotype::read_cache(std::io::BufReader::new(file))
        .with_context(|| format!("reading {}", path.display()))
}
