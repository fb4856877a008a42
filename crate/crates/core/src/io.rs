//! Plain-text artifacts: CSV tables, PGM rasters, `key = value` manifests,
//! all written atomically.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::Path;

use crate::scalar::Real;

/// 17 significant digits, enough to round-trip an `f64`.
pub fn num<T: Real>(x: T) -> String {
    format!("{:.16e}", x.to_f64().unwrap_or(f64::NAN))
}

/// Comma-separated table with a header line.
pub fn csv<I>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Plain (P2) greymap.
pub fn pgm(width: usize, height: usize, maxval: u16, values: &[u16]) -> String {
    assert_eq!(values.len(), width * height, "pgm size mismatch");
    let mut out = format!("P2\n{width} {height}\n{maxval}\n");
    for row in values.chunks(width.max(1)) {
        let mut line = String::new();
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                line.push(if i % 16 == 0 { '\n' } else { ' ' });
            }
            let _ = write!(line, "{v}");
        }
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// Reads back a P2 greymap as `(width, height, maxval, values)`.
pub fn parse_pgm(text: &str) -> Option<(usize, usize, u16, Vec<u16>)> {
    let mut tok = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace);
    if tok.next()? != "P2" {
        return None;
    }
    let w: usize = tok.next()?.parse().ok()?;
    let h: usize = tok.next()?.parse().ok()?;
    let maxval: u16 = tok.next()?.parse().ok()?;
    let values: Vec<u16> = tok.map(|t| t.parse().ok()).collect::<Option<_>>()?;
    (values.len() == w * h).then_some((w, h, maxval, values))
}

/// Ordered `key = value` lines.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.entries.push((key.into(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn parse(text: &str) -> Option<Self> {
        let mut m = Self::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=')?;
            m.push(k.trim(), v.trim());
        }
        Some(m)
    }
}

/// Writes through a sibling temporary file and renames it into place, so
/// readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "path has no file name"))?;
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    let result = (|| {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(contents)?;
        file.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}
