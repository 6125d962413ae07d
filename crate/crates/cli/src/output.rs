use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

/// Fixed 17-significant-digit formatting for CSV fields.
pub fn fmt17(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.fract() == 0.0 && x.abs() < 1e15 {
        return format!("{x:.0}");
    }
    format!("{x:.16e}")
}

/// Where command results go: stdout, or files in an output directory.
pub struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    pub fn new(dir: Option<PathBuf>) -> io::Result<Self> {
        if let Some(d) = &dir {
            fs::create_dir_all(d)?;
        }
        Ok(Sink { dir })
    }

    /// Writes `body` to `<dir>/<name>` or to stdout.
    pub fn emit(&self, name: &str, body: &str) -> io::Result<()> {
        match &self.dir {
            Some(d) => {
                let path = d.join(name);
                fs::write(&path, body)?;
                eprintln!("wrote {}", path.display());
                Ok(())
            }
            None => {
                let mut out = io::stdout().lock();
                out.write_all(body.as_bytes())?;
                if !body.ends_with('\n') {
                    out.write_all(b"\n")?;
                }
                Ok(())
            }
        }
    }

    pub fn emit_json<T: Serialize>(&self, name: &str, value: &T) -> io::Result<()> {
        let mut s = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
        s.push('\n');
        self.emit(name, &s)
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }
}

/// CSV text from a header and rows of numbers.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(fmt17).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting() {
        assert_eq!(fmt17(0.0), "0");
        assert_eq!(fmt17(42.0), "42");
        assert_eq!(fmt17(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt17(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn csv_layout() {
        let s = csv(&["a", "b"], vec![vec![1.0, 0.5]]);
        assert_eq!(s, "a,b\n1,5.0000000000000000e-1\n");
    }
}
