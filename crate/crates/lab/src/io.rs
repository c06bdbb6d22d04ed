//! CSV plumbing. Every file this crate writes starts with `#` comment lines;
//! readers skip them.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::LabError;

fn format_err(path: &Path, e: impl std::fmt::Display) -> LabError {
    LabError::Format {
        path: path.to_path_buf(),
        msg: e.to_string(),
    }
}

fn reader(path: &Path, headers: bool) -> Result<csv::Reader<File>, LabError> {
    let f = File::open(path).map_err(|e| LabError::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(headers)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(f))
}

/// A `T x K` loss matrix, one row per round, no header.
pub fn read_schedule(path: &Path) -> Result<Vec<Vec<f64>>, LabError> {
    let mut rows = Vec::new();
    for (i, rec) in reader(path, false)?.records().enumerate() {
        let rec = rec.map_err(|e| format_err(path, e))?;
        let row = rec
            .iter()
            .map(|v| v.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| format_err(path, format!("row {}: {e}", i + 1)))?;
        rows.push(row);
    }
    Ok(rows)
}

/// Writes `comments` as `# ...` lines, then a header and numeric rows.
pub fn write_table(path: &Path, comments: &[String], header: &[&str], rows: &[Vec<f64>]) -> Result<(), LabError> {
    let f = File::create(path).map_err(|e| LabError::io(path, e))?;
    let mut w = BufWriter::new(f);
    for c in comments {
        writeln!(w, "# {c}").map_err(|e| LabError::io(path, e))?;
    }
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(header).map_err(|e| format_err(path, e))?;
    for row in rows {
        csv.write_record(row.iter().map(|v| v.to_string())).map_err(|e| format_err(path, e))?;
    }
    csv.flush().map_err(|e| LabError::io(path, e))
}

/// Like [`write_table`] with string cells.
pub fn write_text_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), LabError> {
    let mut csv = csv::Writer::from_path(path).map_err(|e| format_err(path, e))?;
    csv.write_record(header).map_err(|e| format_err(path, e))?;
    for row in rows {
        csv.write_record(row).map_err(|e| format_err(path, e))?;
    }
    csv.flush().map_err(|e| LabError::io(path, e))
}

/// Comment lines, header, and numeric rows of a file written by [`write_table`].
pub struct Table {
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// Value of a `# key=value` comment.
    pub fn comment_value(&self, key: &str) -> Option<&str> {
        self.comments.iter().find_map(|c| c.strip_prefix(key)?.strip_prefix('='))
    }
}

pub fn read_table(path: &Path) -> Result<Table, LabError> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    let comments = text
        .lines()
        .filter_map(|l| l.strip_prefix('#'))
        .map(|l| l.trim().to_string())
        .collect();
    let mut r = reader(path, true)?;
    let header = r.headers().map_err(|e| format_err(path, e))?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| format_err(path, e))?;
        rows.push(
            rec.iter()
                .map(|v| v.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| format_err(path, format!("row {}: {e}", i + 1)))?,
        );
    }
    Ok(Table { comments, header, rows })
}
