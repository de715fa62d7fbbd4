//! Provenance manifests written beside every command's outputs: input
//! hashes, seed, and tool version. Deliberately timestamp-free so reruns
//! are byte-identical.

use std::path::Path;

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes =
        std::fs::read(path).with_context(|| format!("hashing {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Writes `<dir>/<command>.manifest` listing the command, version, seed,
/// and a sha256 per input, with inputs sorted by label.
pub fn write_manifest(
    dir: &Path,
    command: &str,
    seed: u64,
    inputs: &[(String, &Path)],
) -> Result<()> {
    let mut lines = vec![
        format!("command = {command}"),
        format!("version = {}", env!("CARGO_PKG_VERSION")),
        format!("seed = {seed}"),
    ];
    let mut hashed: Vec<(String, String)> = inputs
        .iter()
        .map(|(label, path)| Ok((label.clone(), sha256_file(path)?)))
        .collect::<Result<_>>()?;
    hashed.sort();
    for (label, digest) in hashed {
        lines.push(format!("input {label} = sha256:{digest}"));
    }
    let path = dir.join(format!("{command}.manifest"));
    std::fs::write(&path, lines.join("\n") + "\n")
        .with_context(|| format!("writing {}", path.display()))
}
