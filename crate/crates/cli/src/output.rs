//! Run directories: an exclusive lockfile, CSV series, JSON summaries and SVG plots.

use std::fmt::Write as _;
use std::fs::{self, File, OpenOptions};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;

const LOCK_NAME: &str = ".lock";

/// A run's output directory, held exclusively until dropped.
pub struct RunDir {
    path: PathBuf,
    _lock: Lock,
}

struct Lock(PathBuf);

impl Drop for Lock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

impl RunDir {
    pub fn open(path: &Path) -> Result<Self> {
        fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))?;
        let lock = path.join(LOCK_NAME);
        let created = OpenOptions::new().write(true).create_new(true).open(&lock);
        match created {
            Ok(mut f) => {
                use std::io::Write;
                writeln!(f, "{}", std::process::id())?;
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                bail!("run directory {} is locked by another run ({})", path.display(), lock.display())
            }
            Err(e) => return Err(e).with_context(|| format!("creating {}", lock.display())),
        }
        Ok(Self {
            path: path.to_path_buf(),
            _lock: Lock(lock),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_text(name, &text)
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<()> {
        let path = self.path.join(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }

    /// Writes a CSV with the given header; every cell is already formatted.
    pub fn write_csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let path = self.path.join(name);
        let mut w = csv::Writer::from_writer(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Formats an optional number, leaving the cell empty when absent.
pub fn cell(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

/// A line plot of `(x, y)` points as a bare SVG polyline with axis extents labelled.
pub fn svg_polyline(title: &str, x_label: &str, y_label: &str, points: &[(f64, f64)]) -> String {
    const W: f64 = 480.0;
    const H: f64 = 320.0;
    const PAD: f64 = 48.0;
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x1 > x0) {
        x1 = x0 + 1.0;
    }
    if !(y1 > y0) {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let mut poly = String::new();
    for &(x, y) in points {
        let _ = write!(poly, "{:.2},{:.2} ", sx(x), sy(y));
    }
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n",
            "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
            "<text x=\"{pad}\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">{title}</text>\n",
            "<line x1=\"{pad}\" y1=\"{base}\" x2=\"{right}\" y2=\"{base}\" stroke=\"black\"/>\n",
            "<line x1=\"{pad}\" y1=\"{pad}\" x2=\"{pad}\" y2=\"{base}\" stroke=\"black\"/>\n",
            "<text x=\"{pad}\" y=\"{below}\" font-family=\"sans-serif\" font-size=\"11\">{x_label}: {x0:.3} .. {x1:.3}</text>\n",
            "<text x=\"4\" y=\"{mid}\" font-family=\"sans-serif\" font-size=\"11\">{y_label}: {y0:.3} .. {y1:.3}</text>\n",
            "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"{poly}\"/>\n",
            "</svg>\n"
        ),
        w = W,
        h = H,
        pad = PAD,
        base = H - PAD,
        right = W - PAD,
        below = H - PAD + 24.0,
        mid = PAD - 8.0,
        title = escape(title),
        x_label = escape(x_label),
        y_label = escape(y_label),
        x0 = x0,
        x1 = x1,
        y0 = y0,
        y1 = y1,
        poly = poly.trim_end(),
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lock_is_exclusive_and_released() {
        let dir = tempfile::tempdir().unwrap();
        let run = RunDir::open(dir.path()).unwrap();
        assert!(RunDir::open(dir.path()).is_err());
        drop(run);
        assert!(RunDir::open(dir.path()).is_ok());
    }

    #[test]
    fn svg_has_one_vertex_per_point() {
        let svg = svg_polyline("decay <0>", "t", "log mass", &[(2.0, -1.0), (3.0, -2.0), (4.0, -3.1)]);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("decay &lt;0&gt;"));
        let poly = svg.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        assert_eq!(poly.split(' ').count(), 3);
    }
}
