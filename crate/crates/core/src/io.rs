//! Two-column `t,value` CSV for paths and grid functions.
//!
//! Paths carry `#hurst`, `#seed`, `#stream` and `#generator` comment lines
//! ahead of the `t,value` header; grid functions carry the header only.
//! Floats are written with 17 significant digits, which round-trips every
//! `f64` exactly.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::fraccalc::GridFunction;
use crate::gaussianpaths::{Generator, GridSpec, RngSeed, SamplePath};

/// Relative tolerance on the spacing of imported time columns.
const SPACING_TOLERANCE: f64 = 1e-9;

fn io_error(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

/// Scientific notation with 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_rows<W: Write>(out: W, t: &[f64], values: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "value"]).map_err(io_error)?;
    for (a, b) in t.iter().zip(values) {
        w.write_record([format_float(*a), format_float(*b)]).map_err(io_error)?;
    }
    w.flush().map_err(io_error)
}

pub fn write_path_csv<W: Write>(mut out: W, path: &SamplePath) -> Result<()> {
    write!(
        out,
        "#hurst {}\n#seed {}\n#stream {}\n#generator {}\n",
        path.hurst,
        path.seed.root,
        path.seed.stream,
        path.generator.as_str()
    )
    .map_err(io_error)?;
    write_rows(out, &path.times(), &path.values)
}

pub fn write_grid_function_csv<W: Write>(out: W, f: &GridFunction) -> Result<()> {
    write_rows(out, &f.nodes(), &f.values())
}

/// Metadata recovered from the comment lines of a path CSV.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SeriesHeader {
    pub hurst: Option<f64>,
    pub seed: Option<u64>,
    pub stream: Option<u64>,
    pub generator: Option<Generator>,
}

/// An imported `t,value` table.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub header: SeriesHeader,
    pub t: Vec<f64>,
    pub values: Vec<f64>,
}

fn parse_header_line(header: &mut SeriesHeader, line: &str, number: usize) -> Result<()> {
    let bad = |reason: String| Error::Parse { line: number, reason };
    let Some((key, value)) = line.trim_start_matches('#').trim().split_once(char::is_whitespace) else {
        return Ok(());
    };
    let value = value.trim();
    match key {
        "hurst" => header.hurst = Some(value.parse().map_err(|_| bad(format!("bad hurst `{value}`")))?),
        "seed" => header.seed = Some(value.parse().map_err(|_| bad(format!("bad seed `{value}`")))?),
        "stream" => header.stream = Some(value.parse().map_err(|_| bad(format!("bad stream `{value}`")))?),
        "generator" => {
            header.generator = Some(Generator::parse(value).ok_or_else(|| bad(format!("unknown generator `{value}`")))?)
        }
        _ => {}
    }
    Ok(())
}

/// Reads comment headers, an optional `t,value` header row and two numeric
/// columns. Errors name the offending 1-based line.
pub fn read_series_csv<R: Read>(mut input: R) -> Result<Series> {
    let mut text = String::new();
    input.read_to_string(&mut text).map_err(io_error)?;
    let mut header = SeriesHeader::default();
    for (i, line) in text.lines().enumerate() {
        if line.starts_with('#') {
            parse_header_line(&mut header, line, i + 1)?;
        }
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let (mut t, mut values) = (Vec::new(), Vec::new());
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            reason: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if i == 0 && record.iter().eq(["t", "value"]) {
            continue;
        }
        if record.len() != 2 {
            return Err(Error::Parse {
                line,
                reason: format!("expected 2 columns, found {}", record.len()),
            });
        }
        let num = |s: &str| {
            s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| Error::Parse {
                line,
                reason: format!("`{s}` is not a finite number"),
            })
        };
        t.push(num(&record[0])?);
        values.push(num(&record[1])?);
    }
    if t.is_empty() {
        return Err(Error::Parse {
            line: text.lines().count(),
            reason: "no data rows".into(),
        });
    }
    Ok(Series { header, t, values })
}

impl Series {
    /// Checks that the time column is uniform and returns its spacing.
    fn spacing(&self) -> Result<f64> {
        let n = self.t.len();
        if n < 2 {
            return Err(Error::InsufficientData(format!("{n} rows")));
        }
        let h = (self.t[n - 1] - self.t[0]) / (n - 1) as f64;
        if !(h > 0.0) {
            return Err(Error::DegenerateGrid("time column is not increasing".into()));
        }
        if let Some(k) = (0..n).find(|&k| (self.t[k] - self.t[0] - k as f64 * h).abs() > SPACING_TOLERANCE * (1.0 + self.t[k].abs())) {
            return Err(Error::DegenerateGrid(format!("time column is not uniform at row {k}")));
        }
        Ok(h)
    }

    /// A path on `[0, T]`; missing metadata defaults to Hurst 1/2 and the
    /// `External` generator.
    pub fn to_path(&self) -> Result<SamplePath> {
        self.spacing()?;
        if self.t[0].abs() > SPACING_TOLERANCE {
            return Err(Error::DegenerateGrid(format!("paths start at t = 0, not {}", self.t[0])));
        }
        let grid = GridSpec::new(*self.t.last().unwrap(), self.t.len() - 1)?;
        let h = &self.header;
        SamplePath::from_values(
            grid,
            self.values.clone(),
            h.hurst.unwrap_or(0.5),
            RngSeed::new(h.seed.unwrap_or(0), h.stream.unwrap_or(0)),
            h.generator.unwrap_or(Generator::External),
        )
    }

    pub fn to_grid_function(&self) -> Result<GridFunction> {
        self.spacing()?;
        GridFunction::new(self.t[0], *self.t.last().unwrap(), self.values.clone())
    }
}
