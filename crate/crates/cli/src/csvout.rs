//! CSV output with a single metadata header line.
//!
//! Every file starts with one `# key=value ...` comment carrying the config
//! hash, mesh/solver metadata, and a timestamp, followed by a column header
//! and data rows. Apart from that first line, identical configs produce
//! bitwise-identical files; floats are printed with 17 significant digits.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

/// 17 significant digits, locale-independent.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct CsvWriter {
    out: BufWriter<File>,
    path: PathBuf,
}

impl CsvWriter {
    /// Creates the file (and its parent directory) and writes the metadata
    /// line followed by the column header.
    pub fn create(
        path: &Path,
        metadata: &[(&str, String)],
        columns: &[&str],
    ) -> std::io::Result<Self> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let mut out = BufWriter::new(File::create(path)?);
        let stamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let mut meta = String::from("#");
        for (k, v) in metadata {
            meta.push_str(&format!(" {k}={v}"));
        }
        meta.push_str(&format!(" timestamp={stamp}"));
        writeln!(out, "{meta}")?;
        writeln!(out, "{}", columns.join(","))?;
        Ok(Self { out, path: path.to_path_buf() })
    }

    pub fn row(&mut self, fields: &[String]) -> std::io::Result<()> {
        writeln!(self.out, "{}", fields.join(","))
    }

    pub fn finish(mut self) -> std::io::Result<PathBuf> {
        self.out.flush()?;
        Ok(self.path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_metadata_header_and_rows() {
        let dir = std::env::temp_dir().join("hmm_csv_test");
        let path = dir.join("t.csv");
        let mut w = CsvWriter::create(
            &path,
            &[("config_hash", "abc".into()), ("n", "8".into())],
            &["k", "value"],
        )
        .unwrap();
        w.row(&["1".into(), fmt_f64(0.5)]).unwrap();
        w.finish().unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        let meta = lines.next().unwrap();
        assert!(meta.starts_with("# config_hash=abc n=8 timestamp="));
        assert_eq!(lines.next().unwrap(), "k,value");
        assert_eq!(lines.next().unwrap(), "1,5.0000000000000000e-1");
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_f64(1.0 / 3.0), "3.3333333333333331e-1");
        assert_eq!(fmt_f64(11.7804630632), "1.1780463063200000e1");
    }
}
