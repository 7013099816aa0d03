use std::io::Write;
use std::path::Path;

use crate::error::{AnamError, Result};

/// Writes `bytes` to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| AnamError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| AnamError::io(path, e))?;
    tmp.persist(path).map_err(|e| AnamError::io(path, e.error))?;
    Ok(())
}
