//! CSV path dumps: header `t,y,x`, one row per grid point.

use std::io::{BufRead, Write};

use super::{GridSpec, SamplePath};
use crate::error::{Error, Result};
use crate::output::fmt_f64;

impl SamplePath {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,y,x")?;
        for (i, t) in self.times().enumerate() {
            writeln!(w, "{},{},{}", fmt_f64(t), fmt_f64(self.y[i]), fmt_f64(self.x[i]))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a path written by [`SamplePath::write_csv`]. The time column must
    /// be a uniform grid; it is re-based to start at zero.
    pub fn read_csv<R: BufRead>(r: R) -> Result<SamplePath> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::Config("empty path file".into()))??;
        if header.trim() != "t,y,x" {
            return Err(Error::Config(format!("expected header `t,y,x`, found `{}`", header.trim())));
        }
        let (mut t, mut y, mut x) = (Vec::new(), Vec::new(), Vec::new());
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(Error::Config(format!("line {}: expected 3 fields", lineno + 2)));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::Config(format!("line {}: bad number `{s}`", lineno + 2)))
            };
            t.push(parse(fields[0])?);
            y.push(parse(fields[1])?);
            x.push(parse(fields[2])?);
        }
        if t.len() < 2 {
            return Err(Error::Config("path file needs at least two rows".into()));
        }
        let n = t.len() - 1;
        let span = t[n] - t[0];
        let dt = span / n as f64;
        let tol = 1e-9 * span.abs().max(1.0);
        if let Some(i) = t.iter().enumerate().position(|(i, ti)| (ti - t[0] - i as f64 * dt).abs() > tol) {
            return Err(Error::InvalidGrid(format!("time column is not uniform at row {}", i + 2)));
        }
        let grid = GridSpec::from_steps(n, dt)?;
        SamplePath::new(grid, y, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;
    use crate::sim::{simulate, RngStream, Scheme};

    #[test]
    fn csv_round_trip_is_exact() {
        let p = ModelParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let g = GridSpec::new(1.0, 0.01).unwrap();
        let path = simulate(&p, 1.0, 0.0, g, Scheme::Exact, RngStream::new(4, 0)).unwrap();
        let mut buf = Vec::new();
        path.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,y,x\n"));
        assert_eq!(text.lines().count(), 102);
        let back = SamplePath::read_csv(&buf[..]).unwrap();
        assert_eq!(back.y, path.y);
        assert_eq!(back.x, path.x);
        assert_eq!(back.grid.n_steps, 100);
        assert!((back.grid.dt - 0.01).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(SamplePath::read_csv(&b"a,b,c\n0,1,2\n1,1,2\n"[..]).is_err());
        assert!(SamplePath::read_csv(&b"t,y,x\n0,1,2\n"[..]).is_err());
        assert!(SamplePath::read_csv(&b"t,y,x\n0,1,2\n1,1,2\n3,1,2\n"[..]).is_err());
        assert!(SamplePath::read_csv(&b"t,y,x\n0,1,2\n1,-1,2\n"[..]).is_err());
    }
}
