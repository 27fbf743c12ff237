//! CSV and JSON-lines emission with a provenance preamble.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
}

/// Identifies a table layout and where it came from.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub schema: &'static str,
    pub version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub layout: Option<&'static str>,
}

impl Provenance {
    pub fn new(schema: &'static str) -> Self {
        Self {
            schema,
            version: VERSION,
            seed: None,
            layout: None,
        }
    }

    pub fn seeded(mut self, seed: u64, layout: &'static str) -> Self {
        self.seed = Some(seed);
        self.layout = Some(layout);
        self
    }

    fn comment(&self) -> String {
        let mut s = format!("# schema={},version={}", self.schema, self.version);
        if let Some(seed) = self.seed {
            s.push_str(&format!(",seed={seed}"));
        }
        if let Some(layout) = self.layout {
            s.push_str(&format!(",layout={layout}"));
        }
        s
    }
}

pub fn open(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| io_error(p, e))?)),
        None => Box::new(io::stdout().lock()),
    })
}

pub fn io_error(path: &Path, e: io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// `PATH.summary.json` next to a table written at `PATH`.
pub fn summary_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".summary.json");
    PathBuf::from(s)
}

/// Writes `rows` with a header (CSV) or one object per line (JSONL), preceded
/// by the provenance record.
pub fn write_table<R: Serialize>(
    out: &mut dyn Write,
    format: Format,
    provenance: &Provenance,
    header: &[&str],
    rows: &[R],
) -> Result<(), CliError> {
    match format {
        Format::Csv => {
            writeln!(out, "{}", provenance.comment())?;
            let mut w = csv::WriterBuilder::new()
                .has_headers(false)
                .from_writer(&mut *out);
            w.write_record(header)?;
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
        Format::Jsonl => {
            serde_json::to_writer(&mut *out, provenance)?;
            writeln!(out)?;
            for row in rows {
                serde_json::to_writer(&mut *out, row)?;
                writeln!(out)?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

pub fn write_json_file<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut f = BufWriter::new(File::create(path).map_err(|e| io_error(path, e))?);
    write_json(&mut f, value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        n: usize,
        x: f64,
    }

    #[test]
    fn csv_has_preamble_and_header() {
        let mut buf = Vec::new();
        let prov = Provenance::new("test.v1").seeded(5, "layout-x");
        write_table(
            &mut buf,
            Format::Csv,
            &prov,
            &["n", "x"],
            &[Row { n: 1, x: 0.5 }],
        )
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(
            lines[0],
            format!("# schema=test.v1,version={VERSION},seed=5,layout=layout-x")
        );
        assert_eq!(lines[1], "n,x");
        assert_eq!(lines[2], "1,0.5");
    }

    #[test]
    fn jsonl_rows() {
        let mut buf = Vec::new();
        write_table(
            &mut buf,
            Format::Jsonl,
            &Provenance::new("t"),
            &["n", "x"],
            &[Row { n: 2, x: 1.0 }],
        )
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), r#"{"n":2,"x":1.0}"#);
    }

    #[test]
    fn summary_path_appends_suffix() {
        assert_eq!(
            summary_path(Path::new("a/b.csv")),
            PathBuf::from("a/b.csv.summary.json")
        );
    }
}
