//! File input and atomic output.

use std::io::Write;
use std::path::{Path, PathBuf};

use placescope_core::kde::{read_ascii_grid, read_binary, write_ascii_grid, write_binary};
use placescope_core::{GeoPost, Raster};

use crate::CliError;

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

/// Fails early, before any compute, when an input is missing.
pub fn require_file(path: &Path) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "input {} does not exist or is not a file",
            path.display()
        )))
    }
}

/// Fails early when the destination directory is missing.
pub fn require_parent(path: &Path) -> Result<(), CliError> {
    let parent = parent_dir(path);
    if parent.is_dir() {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "output directory {} does not exist",
            parent.display()
        )))
    }
}

fn parent_dir(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

/// Writes through a temporary file in the destination directory and renames it
/// into place, so the destination never holds a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut tmp = tempfile::NamedTempFile::new_in(parent_dir(path)).map_err(|e| io_err(path, e))?;
    tmp.write_all(bytes).map_err(|e| io_err(path, e))?;
    tmp.as_file().sync_all().map_err(|e| io_err(path, e))?;
    tmp.persist(path).map_err(|e| io_err(path, e.error))?;
    Ok(())
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| io_err(path, e))
}

/// Posts from a line-delimited file; malformed lines are skipped with a warning.
pub fn read_posts(path: &Path) -> Result<Vec<GeoPost>, CliError> {
    let text = read_text(path)?;
    let (posts, malformed) = placescope_core::ingest::parse_posts(text.lines(), false)
        .map_err(|e| CliError::domain("ingest", e))?;
    if malformed > 0 {
        log::warn!("{}: skipped {malformed} malformed line(s)", path.display());
    }
    Ok(posts)
}

pub fn posts_to_jsonl(posts: &[GeoPost]) -> String {
    let mut out = String::new();
    for p in posts {
        out.push_str(&p.to_json_line());
        out.push('\n');
    }
    out
}

fn is_binary_path(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("bin") || e.eq_ignore_ascii_case("psrb"))
}

/// Binary when the file starts with the binary magic, ESRI ASCII otherwise.
pub fn read_raster(path: &Path) -> Result<Raster, CliError> {
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    let raster = if bytes.starts_with(b"PSRB") {
        read_binary(&bytes)
    } else {
        let text = String::from_utf8(bytes).map_err(|_| {
            CliError::Usage(format!(
                "{} is neither a binary nor an ASCII raster",
                path.display()
            ))
        })?;
        read_ascii_grid(&text)
    };
    raster.map_err(|e| CliError::domain("raster", e))
}

pub fn raster_bytes(path: &Path, raster: &Raster) -> Vec<u8> {
    if is_binary_path(path) {
        write_binary(raster)
    } else {
        write_ascii_grid(raster).into_bytes()
    }
}

pub fn write_raster(path: &Path, raster: &Raster) -> Result<(), CliError> {
    write_atomic(path, &raster_bytes(path, raster))
}
