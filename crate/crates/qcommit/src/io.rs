//! File access: JSON documents with byte-accurate parse errors and atomic
//! writes.

use std::io::Write;
use std::path::Path;

use qcommit_core::grid::{load_case, CaseDocument, GridCase};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Byte offset of a 1-based (line, column) position.
fn byte_offset(bytes: &[u8], line: usize, column: usize) -> usize {
    let mut offset = 0;
    for (i, l) in bytes.split_inclusive(|b| *b == b'\n').enumerate() {
        if i + 1 == line {
            return (offset + column).min(bytes.len());
        }
        offset += l.len();
    }
    bytes.len()
}

pub fn parse_json<T: DeserializeOwned>(path: &Path, bytes: &[u8]) -> CliResult<T> {
    serde_json::from_slice(bytes).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        offset: byte_offset(bytes, e.line(), e.column()),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    parse_json(path, &read_bytes(path)?)
}

/// Reads and validates a case file.
pub fn read_case(path: &Path) -> CliResult<GridCase> {
    let doc: CaseDocument = read_json(path)?;
    Ok(load_case(doc)?)
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> CliResult<()> {
    let io_err = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(io_err)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("serializable value");
    out.push(b'\n');
    out
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> CliResult<()> {
    write_atomic(path, &to_json(value))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets_follow_lines() {
        let b = b"ab\ncde\nf";
        assert_eq!(byte_offset(b, 1, 1), 1);
        assert_eq!(byte_offset(b, 2, 2), 5);
        assert_eq!(byte_offset(b, 9, 1), b.len());
    }

    #[test]
    fn truncated_json_reports_end_offset() {
        let bytes = br#"{"meta": {"name": "x""#;
        let err = parse_json::<serde_json::Value>(Path::new("x.json"), bytes).unwrap_err();
        match err {
            CliError::Parse { offset, .. } => assert_eq!(offset, bytes.len()),
            other => panic!("unexpected {other:?}"),
        }
    }
}
