//! CSV and JSON artifacts. Every CSV starts with a `# schema:` comment that
//! names the table and its version.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

pub struct CsvTable {
    path: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
}

impl CsvTable {
    pub fn create(path: &Path, schema: &str, columns: &[&str]) -> std::io::Result<CsvTable> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "# schema: crestwave/{schema} v{SCHEMA_VERSION}")?;
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(columns).map_err(into_io)?;
        Ok(CsvTable {
            path: path.to_path_buf(),
            writer,
        })
    }

    pub fn row<I, S>(&mut self, fields: I) -> std::io::Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).map_err(into_io)
    }

    pub fn finish(mut self) -> std::io::Result<PathBuf> {
        self.writer.flush()?;
        Ok(self.path)
    }
}

fn into_io(e: csv::Error) -> std::io::Error {
    std::io::Error::other(e)
}

/// Shortest round-trip decimal form, so identical runs give identical files.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value).map_err(std::io::Error::other)?;
    writeln!(out)?;
    out.flush()
}
