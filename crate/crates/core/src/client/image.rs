use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("image {0} is empty")]
    Empty(String),
    #[error("image {0} is neither JPEG nor PNG")]
    UnsupportedMediaType(String),
    #[error("cannot read image {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MediaType {
    Jpeg,
    Png,
}

impl MediaType {
    pub fn mime(self) -> &'static str {
        match self {
            MediaType::Jpeg => "image/jpeg",
            MediaType::Png => "image/png",
        }
    }

    /// Detects the type from magic bytes.
    pub fn sniff(bytes: &[u8]) -> Option<Self> {
        if bytes.starts_with(&[0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a]) {
            Some(MediaType::Png)
        } else if bytes.starts_with(&[0xff, 0xd8, 0xff]) {
            Some(MediaType::Jpeg)
        } else {
            None
        }
    }
}

/// Image bytes plus their media type and content hash.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageRef {
    pub path: Option<PathBuf>,
    bytes: Arc<[u8]>,
    pub media_type: MediaType,
    /// First 16 hex digits of the SHA-256 of the bytes.
    pub content_hash: String,
}

impl ImageRef {
    pub fn from_bytes(bytes: Vec<u8>) -> Result<Self, ImageError> {
        Self::build(None, bytes)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, ImageError> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|source| ImageError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::build(Some(path.to_owned()), bytes)
    }

    fn build(path: Option<PathBuf>, bytes: Vec<u8>) -> Result<Self, ImageError> {
        let name = || {
            path.as_ref()
                .map_or_else(|| "<bytes>".to_owned(), |p| p.display().to_string())
        };
        if bytes.is_empty() {
            return Err(ImageError::Empty(name()));
        }
        let media_type = MediaType::sniff(&bytes).ok_or_else(|| ImageError::UnsupportedMediaType(name()))?;
        let content_hash = hex::encode(&Sha256::digest(&bytes)[..8]);
        Ok(Self {
            path,
            bytes: bytes.into(),
            media_type,
            content_hash,
        })
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn base64(&self) -> String {
        use base64::Engine;
        base64::engine::general_purpose::STANDARD.encode(&self.bytes)
    }
}
