use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::CliError;
use crate::path::SolutionPath;

/// Listing entry for one artifact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileRecord {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Writer that hashes and counts everything passing through it.
pub struct HashingWriter<W> {
    inner: W,
    hasher: Sha256,
    bytes: u64,
}

impl<W: Write> HashingWriter<W> {
    pub fn new(inner: W) -> Self {
        Self {
            inner,
            hasher: Sha256::new(),
            bytes: 0,
        }
    }

    /// Flush and return `(hex sha256, byte count)`.
    pub fn finish(mut self) -> io::Result<(String, u64)> {
        self.inner.flush()?;
        Ok((hex::encode(self.hasher.finalize()), self.bytes))
    }
}

impl<W: Write> Write for HashingWriter<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.hasher.update(&buf[..n]);
        self.bytes += n as u64;
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

pub type CsvFile = HashingWriter<BufWriter<File>>;

pub fn create(dir: &Path, name: &str) -> Result<CsvFile, CliError> {
    let path = dir.join(name);
    let f = File::create(&path).map_err(|e| CliError::io(&path, e))?;
    Ok(HashingWriter::new(BufWriter::new(f)))
}

pub fn close(w: CsvFile, dir: &Path, name: &str) -> Result<FileRecord, CliError> {
    let (sha256, bytes) = w.finish().map_err(|e| CliError::io(&dir.join(name), e))?;
    Ok(FileRecord {
        name: name.to_string(),
        sha256,
        bytes,
    })
}

/// 17 significant digits, shortest exponent form.
#[inline]
fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_header(w: &mut impl Write, with_id: bool) -> io::Result<()> {
    if with_id {
        writeln!(w, "path_id,t,x,y")
    } else {
        writeln!(w, "t,x,y")
    }
}

pub fn write_rows(w: &mut impl Write, path: &SolutionPath<f64>, path_id: Option<usize>) -> io::Result<()> {
    for ((t, x), y) in path.times().iter().zip(&path.x).zip(&path.y) {
        if let Some(id) = path_id {
            write!(w, "{id},")?;
        }
        writeln!(w, "{},{},{}", fmt(*t), fmt(*x), fmt(*y))?;
    }
    Ok(())
}

/// Pretty JSON with a trailing newline, hashed like any other artifact.
pub fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<FileRecord, CliError> {
    let mut w = create(dir, name)?;
    let io_err = |e| CliError::io(&dir.join(name), e);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| io_err(io::Error::other(e)))?;
    w.write_all(b"\n").map_err(io_err)?;
    close(w, dir, name)
}
