use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::graph::{exact_all_pairs, DistanceMatrix, Graph, LoadOptions};

/// Cache key for the true distances of a dataset file under given load options.
pub fn truth_cache_key(file_bytes: &[u8], options: LoadOptions) -> String {
    let mut hasher = Sha256::new();
    hasher.update(file_bytes);
    hasher.update([options.directed as u8, options.take_complement as u8, options.largest_component as u8]);
    hex::encode(hasher.finalize())
}

/// On-disk store of exact all-pairs distances, one text file per key.
#[derive(Debug, Clone)]
pub struct TruthCache {
    dir: PathBuf,
}

impl TruthCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("truth-{key}.txt"))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Returns the cached matrix for `key`, computing and storing it on a miss.
    /// A cached file whose size does not match `g` is recomputed.
    pub fn load_or_compute(&self, key: &str, g: &Graph) -> Result<DistanceMatrix> {
        let path = self.path_for(key);
        if let Ok(text) = fs::read_to_string(&path) {
            if let Ok(matrix) = DistanceMatrix::from_text(&text) {
                if matrix.n() == g.n() {
                    return Ok(matrix);
                }
            }
        }
        let matrix = exact_all_pairs(g, None);
        fs::create_dir_all(&self.dir)?;
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, matrix.to_text())?;
        fs::rename(&tmp, &path)?;
        Ok(matrix)
    }
}
