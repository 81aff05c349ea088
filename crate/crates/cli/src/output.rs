//! CSV sinks and number formatting.

use crate::error::CliError;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

/// Twelve significant digits in scientific notation; `nan`/`inf` spelled out.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.11e}")
    } else {
        v.to_string().to_lowercase()
    }
}

/// Where a command writes its table.
pub struct Sink {
    path: Option<PathBuf>,
    out: Box<dyn Write>,
}

impl Sink {
    pub fn open(path: Option<&Path>) -> Result<Self, CliError> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| CliError::io(p, e))?)),
            None => Box::new(io::stdout().lock()),
        };
        Ok(Self { path: path.map(Path::to_path_buf), out })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
        w.write_record(fields).and_then(|()| w.flush().map_err(csv::Error::from)).map_err(|e| self.wrap(e.into_kind()))?;
        let line = w.into_inner().expect("flushed above");
        self.out.write_all(&line).map_err(|e| self.wrap_io(e))
    }

    /// A `# ...` line ahead of or after the table; gnuplot skips these.
    pub fn comment(&mut self, text: &str) -> Result<(), CliError> {
        writeln!(self.out, "# {text}").map_err(|e| self.wrap_io(e))
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.out.flush().map_err(|e| self.wrap_io(e))
    }

    fn wrap(&self, kind: csv::ErrorKind) -> CliError {
        match kind {
            csv::ErrorKind::Io(e) => self.wrap_io(e),
            other => CliError::Usage(format!("csv: {other:?}")),
        }
    }

    fn wrap_io(&self, e: io::Error) -> CliError {
        CliError::io(self.path.clone().unwrap_or_else(|| "<stdout>".into()), e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(num(0.019553857606871314), "1.95538576069e-2");
        assert_eq!(num(-2.0), "-2.00000000000e0");
        assert_eq!(num(f64::NAN), "nan");
    }
}
