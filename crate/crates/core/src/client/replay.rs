use std::path::{Path, PathBuf};
use std::sync::Mutex;

/// Recorded replies on disk: `<root>/<model>/<fingerprint>-<imagehash>.txt`,
/// with a `-<k>` suffix before `.txt` for samples `k >= 1`.
#[derive(Debug)]
pub struct ReplayStore {
    root: PathBuf,
    write_lock: Mutex<()>,
}

impl ReplayStore {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self {
            root: root.into(),
            write_lock: Mutex::new(()),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, model: &str, prompt_fingerprint: &str, image_hash: &str, sample: usize) -> PathBuf {
        let stem = format!("{prompt_fingerprint}-{image_hash}");
        let file = if sample == 0 {
            format!("{stem}.txt")
        } else {
            format!("{stem}-{sample}.txt")
        };
        self.root.join(model).join(file)
    }

    pub fn get(&self, model: &str, prompt_fingerprint: &str, image_hash: &str, sample: usize) -> Option<String> {
        std::fs::read_to_string(self.path(model, prompt_fingerprint, image_hash, sample)).ok()
    }

    /// Writes are serialized so concurrent recorders never interleave.
    pub fn put(
        &self,
        model: &str,
        prompt_fingerprint: &str,
        image_hash: &str,
        sample: usize,
        reply: &str,
    ) -> std::io::Result<PathBuf> {
        let path = self.path(model, prompt_fingerprint, image_hash, sample);
        let _guard = self.write_lock.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, reply)?;
        std::fs::rename(&tmp, &path)?;
        Ok(path)
    }
}
