//! Content-addressed document store.
//!
//! Documents are immutable and identified by the SHA-256 digest of their
//! bytes; changed content therefore gets a new identity. Ordered groups
//! of documents combine into a simplified Merkle DAG whose internal
//! nodes are themselves stored (node content = concatenated child
//! digests), so every node id is verifiable by rehashing its content.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};
use thiserror::Error;

/// 32-byte digest identifying stored content; rendered as 64 lowercase
/// hex characters.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ContentHash([u8; 32]);

impl ContentHash {
    pub fn of(bytes: &[u8]) -> ContentHash {
        ContentHash(Sha256::digest(bytes).into())
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }
}

impl fmt::Display for ContentHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

impl fmt::Debug for ContentHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ContentHash({self})")
    }
}

impl FromStr for ContentHash {
    type Err = HashParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.len() != 64 {
            return Err(HashParseError::BadLength(s.len()));
        }
        let raw = hex::decode(s).map_err(|_| HashParseError::BadHex)?;
        let mut digest = [0u8; 32];
        digest.copy_from_slice(&raw);
        Ok(ContentHash(digest))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HashParseError {
    #[error("content hash must be 64 hex characters, got {0}")]
    BadLength(usize),
    #[error("content hash contains non-hex characters")]
    BadHex,
}

/// In-memory store with optional directory persistence (one file per
/// entry, filename = hex digest).
#[derive(Debug, Default)]
pub struct DocStore {
    entries: BTreeMap<ContentHash, Vec<u8>>,
    dir: Option<PathBuf>,
}

impl DocStore {
    pub fn in_memory() -> DocStore {
        DocStore::default()
    }

    /// Open a directory-backed store, loading and verifying any existing
    /// entries (filename must equal the digest of the file's bytes).
    pub fn with_directory(dir: &Path) -> Result<DocStore, DocStoreError> {
        fs::create_dir_all(dir).map_err(|source| DocStoreError::io(dir, source))?;
        let mut store = DocStore { entries: BTreeMap::new(), dir: Some(dir.to_path_buf()) };
        let listing = fs::read_dir(dir).map_err(|source| DocStoreError::io(dir, source))?;
        for item in listing {
            let item = item.map_err(|source| DocStoreError::io(dir, source))?;
            let path = item.path();
            if !path.is_file() {
                continue;
            }
            let bytes = fs::read(&path).map_err(|source| DocStoreError::io(&path, source))?;
            let hash = ContentHash::of(&bytes);
            let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
            if name.parse::<ContentHash>() != Ok(hash) {
                return Err(DocStoreError::CorruptEntry { path: path.display().to_string() });
            }
            store.entries.insert(hash, bytes);
        }
        Ok(store)
    }

    /// Store content and return its identity. Idempotent: identical
    /// bytes never add a second entry.
    pub fn put(&mut self, bytes: &[u8]) -> Result<ContentHash, DocStoreError> {
        let hash = ContentHash::of(bytes);
        if self.entries.contains_key(&hash) {
            return Ok(hash);
        }
        if let Some(dir) = &self.dir {
            let path = dir.join(hash.to_string());
            fs::write(&path, bytes).map_err(|source| DocStoreError::io(&path, source))?;
        }
        self.entries.insert(hash, bytes.to_vec());
        Ok(hash)
    }

    pub fn get(&self, hash: ContentHash) -> Result<&[u8], DocStoreError> {
        self.entries
            .get(&hash)
            .map(Vec::as_slice)
            .ok_or(DocStoreError::NotFound { hash })
    }

    pub fn contains(&self, hash: ContentHash) -> bool {
        self.entries.contains_key(&hash)
    }

    /// Count of distinct stored entries.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Combine stored documents, in order, into a Merkle DAG and return
    /// the root id. Levels hash adjacent pairs; an odd trailing node is
    /// promoted unchanged. A single-leaf bundle still adds one node, so
    /// the root never equals the leaf. Internal node content is the
    /// concatenation of the two (or one) child digests, and every
    /// internal node is stored under its own id.
    pub fn bundle(&mut self, leaves: &[ContentHash]) -> Result<ContentHash, DocStoreError> {
        if leaves.is_empty() {
            return Err(DocStoreError::EmptyBundle);
        }
        for &leaf in leaves {
            if !self.contains(leaf) {
                return Err(DocStoreError::NotFound { hash: leaf });
            }
        }
        if let [leaf] = leaves {
            return self.put(&leaf.0);
        }
        let mut level = leaves.to_vec();
        while level.len() > 1 {
            let mut next = Vec::with_capacity(level.len().div_ceil(2));
            for pair in level.chunks(2) {
                match pair {
                    [left, right] => {
                        let mut content = Vec::with_capacity(64);
                        content.extend_from_slice(&left.0);
                        content.extend_from_slice(&right.0);
                        next.push(self.put(&content)?);
                    }
                    [odd] => next.push(*odd),
                    _ => unreachable!(),
                }
            }
            level = next;
        }
        Ok(level[0])
    }
}

#[derive(Debug, Error)]
pub enum DocStoreError {
    #[error("no document stored under {hash}")]
    NotFound { hash: ContentHash },
    #[error("cannot bundle zero documents")]
    EmptyBundle,
    #[error("store file {path} does not match its digest")]
    CorruptEntry { path: String },
    #[error("document store I/O failure at {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl DocStoreError {
    fn io(path: &Path, source: std::io::Error) -> DocStoreError {
        DocStoreError::Io { path: path.display().to_string(), source }
    }
}
