//! Input ingestion and atomic report emission.

use std::io::Write;
use std::path::Path;

use iwasawa_core::presentation::{ModulePresentation, PresentationJson};
use iwasawa_core::Error;
use serde::Deserialize;

pub fn read_text(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Io { message: format!("{}: {e}", path.display()) })
}

/// Parses a presentation file; `precision` (when set) replaces the file's
/// precision so the whole session works at one `N`.
pub fn read_presentation(path: &Path, precision: Option<u32>) -> Result<ModulePresentation, Error> {
    let text = read_text(path)?;
    let mut raw: PresentationJson = serde_json::from_str(&text).map_err(|e| Error::InvalidInput {
        field: "presentation".into(),
        message: format!("{}: {e}", path.display()),
    })?;
    if let Some(n) = precision {
        raw.precision = n;
    }
    raw.into_presentation()
}

#[derive(Deserialize)]
struct RankRow {
    level: u32,
    rank: u64,
}

/// Reads a `level,rank` CSV; levels must be `0, 1, 2, …` in order.
pub fn read_rank_csv(path: &Path) -> Result<Vec<u64>, Error> {
    let text = read_text(path)?;
    parse_rank_csv(&text)
}

pub fn parse_rank_csv(text: &str) -> Result<Vec<u64>, Error> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::InvalidInput { field: "csv".into(), message: e.to_string() })?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["level", "rank"] {
        return Err(Error::InvalidInput {
            field: "csv".into(),
            message: format!("header must be `level,rank`, found `{}`", headers.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut ranks = Vec::new();
    for (i, row) in reader.deserialize::<RankRow>().enumerate() {
        let row = row.map_err(|e| Error::InvalidInput { field: "csv".into(), message: format!("row {}: {e}", i + 1) })?;
        if row.level as usize != i {
            return Err(Error::InvalidInput {
                field: "csv".into(),
                message: format!("row {} has level {}, expected {i}", i + 1, row.level),
            });
        }
        ranks.push(row.rank);
    }
    Ok(ranks)
}

/// Writes to `path` atomically (temporary file in the same directory, then
/// rename), or to stdout when `path` is `None`.
pub fn emit(text: &str, path: Option<&Path>) -> Result<(), Error> {
    let io = |e: std::io::Error| Error::Io { message: e.to_string() };
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(io)?;
            if !text.ends_with('\n') {
                out.write_all(b"\n").map_err(io)?;
            }
            Ok(())
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
            tmp.write_all(text.as_bytes()).map_err(io)?;
            if !text.ends_with('\n') {
                tmp.write_all(b"\n").map_err(io)?;
            }
            tmp.as_file().sync_all().map_err(io)?;
            tmp.persist(path).map_err(|e| io(e.error))?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_header_and_order_are_checked() {
        assert_eq!(parse_rank_csv("level,rank\n0,2\n1,6\n").unwrap(), vec![2, 6]);
        assert!(parse_rank_csv("n,rank\n0,2\n").is_err());
        assert!(parse_rank_csv("level,rank\n1,2\n").is_err());
    }
}
