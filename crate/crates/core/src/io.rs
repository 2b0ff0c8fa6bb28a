//! File formats.
//!
//! * Binary images: an ASCII grid of `0`/`1` (one row per line, whitespace
//!   between pixels optional) or a plain/raw PBM (`P1`/`P4`).
//! * Posterior-mean images: plain PGM (`P2`, maxval 255).
//! * Trace: JSON lines; the first line is a [`TraceHeader`], every further
//!   line one [`IterationRecord`].
//! * Summary: CSV with a `# aptemper-summary v1` line followed by the columns
//!   `estimator,mean,std,rmse`. Unknown values are left empty.
//! * `betas.csv` / `level1.csv`: per-record β ladders and level-1 states.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::SamplerConfig;
use crate::error::{Error, Result};
use crate::sampler::{EstimateRow, IterationRecord, RunSummary};
use crate::target::BinaryImage;

pub const TRACE_FORMAT: &str = "aptemper-trace";
pub const TRACE_VERSION: u32 = 1;
pub const SUMMARY_HEADER: &str = "# aptemper-summary v1";

pub fn read_image(path: &Path) -> Result<BinaryImage> {
    let bytes = std::fs::read(path).map_err(|e| Error::config("image_file", format!("{}: {e}", path.display())))?;
    parse_image(&bytes, &path.display().to_string())
}

/// Parses an ASCII grid or a PBM image.
pub fn parse_image(bytes: &[u8], source_name: &str) -> Result<BinaryImage> {
    if bytes.starts_with(b"P4") {
        return parse_raw_pbm(bytes, source_name);
    }
    let text = std::str::from_utf8(bytes).map_err(|_| Error::parse(source_name, 1, "image is not text"))?;
    if text.trim_start().starts_with("P1") {
        return parse_plain_pbm(text, source_name);
    }
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        let mut row = Vec::new();
        for ch in line.chars().filter(|c| !c.is_whitespace()) {
            match ch {
                '0' => row.push(0u8),
                '1' => row.push(1u8),
                other => return Err(Error::parse(source_name, idx + 1, format!("unexpected character `{other}`"))),
            }
        }
        if row.is_empty() {
            continue;
        }
        if let Some(first) = rows.first().map(Vec::len) {
            if row.len() != first {
                return Err(Error::parse(source_name, idx + 1, format!("row has {} pixels, expected {first}", row.len())));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::parse(source_name, 1, "empty image"));
    }
    let (r, c) = (rows.len(), rows[0].len());
    BinaryImage::new(r, c, rows.concat())
}

fn pbm_tokens(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().flat_map(|(i, l)| {
        l.split('#').next().unwrap_or("").split_whitespace().map(move |t| (i + 1, t))
    })
}

fn parse_plain_pbm(text: &str, source_name: &str) -> Result<BinaryImage> {
    let mut tokens = pbm_tokens(text);
    tokens.next();
    let mut dim = |what: &str| -> Result<usize> {
        let (line, tok) = tokens.next().ok_or_else(|| Error::parse(source_name, 1, format!("missing {what}")))?;
        tok.parse().map_err(|_| Error::parse(source_name, line, format!("bad {what} `{tok}`")))
    };
    let cols = dim("width")?;
    let rows = dim("height")?;
    let mut pixels = Vec::with_capacity(rows * cols);
    for (line, tok) in tokens {
        for ch in tok.chars() {
            match ch {
                '0' => pixels.push(0),
                '1' => pixels.push(1),
                other => return Err(Error::parse(source_name, line, format!("unexpected character `{other}`"))),
            }
        }
    }
    if pixels.len() != rows * cols {
        return Err(Error::parse(source_name, 1, format!("expected {} pixels, found {}", rows * cols, pixels.len())));
    }
    BinaryImage::new(rows, cols, pixels)
}

fn parse_raw_pbm(bytes: &[u8], source_name: &str) -> Result<BinaryImage> {
    // header: magic, width, height, then one whitespace byte before the data
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 3 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::parse(source_name, 1, "truncated PBM header"));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    pos += 1;
    let parse = |s: &str| s.parse::<usize>().map_err(|_| Error::parse(source_name, 1, format!("bad dimension `{s}`")));
    let (cols, rows) = (parse(&fields[1])?, parse(&fields[2])?);
    let stride = cols.div_ceil(8);
    let data = bytes.get(pos..).unwrap_or(&[]);
    if data.len() < stride * rows {
        return Err(Error::parse(source_name, 1, "truncated PBM data"));
    }
    Ok(BinaryImage::from_fn(rows, cols, |i, j| data[i * stride + j / 8] & (0x80 >> (j % 8)) != 0))
}

/// Writes an image as an ASCII `0`/`1` grid.
pub fn write_image<W: Write>(mut w: W, image: &BinaryImage) -> Result<()> {
    for i in 0..image.rows() {
        let line: String = (0..image.cols()).map(|j| if image.get(i, j) == 1 { '1' } else { '0' }).collect();
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Writes values in `[0, 1]` as a plain PGM, mapping 1 to white.
pub fn write_pgm<W: Write>(mut w: W, rows: usize, cols: usize, values: &[f64]) -> Result<()> {
    if values.len() != rows * cols {
        return Err(Error::DimensionMismatch {
            expected: rows * cols,
            actual: values.len(),
        });
    }
    writeln!(w, "P2\n{cols} {rows}\n255")?;
    for row in values.chunks(cols) {
        let line: Vec<String> = row
            .iter()
            .map(|v| ((v.clamp(0.0, 1.0) * 255.0).round() as u8).to_string())
            .collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

/// Reads a plain PGM back as values in `[0, 1]`; returns `(rows, cols, values)`.
pub fn read_pgm<R: Read>(mut r: R) -> Result<(usize, usize, Vec<f64>)> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let mut tokens = pbm_tokens(&text);
    match tokens.next() {
        Some((_, "P2")) => {}
        _ => return Err(Error::parse("pgm", 1, "expected `P2`")),
    }
    let mut nums = tokens.map(|(line, t)| t.parse::<usize>().map_err(|_| Error::parse("pgm", line, format!("bad number `{t}`"))));
    let mut next = || nums.next().unwrap_or_else(|| Err(Error::parse("pgm", 1, "truncated")));
    let cols = next()?;
    let rows = next()?;
    let maxval = next()? as f64;
    let values = (0..rows * cols).map(|_| next().map(|v| v as f64 / maxval)).collect::<Result<Vec<_>>>()?;
    Ok((rows, cols, values))
}

/// First line of a trace file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub format: String,
    pub version: u32,
    pub levels: usize,
    pub iterations: u64,
    pub thin: u64,
    pub seed: u64,
    pub adaptation: String,
}

impl TraceHeader {
    pub fn for_config(config: &SamplerConfig) -> Self {
        Self {
            format: TRACE_FORMAT.to_string(),
            version: TRACE_VERSION,
            levels: config.levels,
            iterations: config.iterations,
            thin: config.thin,
            seed: config.seed,
            adaptation: config.adaptation.as_str().to_string(),
        }
    }
}

/// Streams trace records as JSON lines.
pub struct TraceWriter<W: Write> {
    out: W,
}

impl<W: Write> TraceWriter<W> {
    pub fn new(mut out: W, header: &TraceHeader) -> Result<Self> {
        serde_json::to_writer(&mut out, header)?;
        out.write_all(b"\n")?;
        Ok(Self { out })
    }

    pub fn write(&mut self, record: &IterationRecord) -> Result<()> {
        serde_json::to_writer(&mut self.out, record)?;
        self.out.write_all(b"\n")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

pub fn read_trace<R: Read>(r: R) -> Result<(TraceHeader, Vec<IterationRecord>)> {
    let mut lines = BufReader::new(r).lines();
    let first = lines.next().ok_or_else(|| Error::parse("trace", 1, "empty trace"))??;
    let header: TraceHeader = serde_json::from_str(&first)?;
    if header.format != TRACE_FORMAT || header.version != TRACE_VERSION {
        return Err(Error::parse(
            "trace",
            1,
            format!("unsupported trace format {} v{}", header.format, header.version),
        ));
    }
    let mut records = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str(&line).map_err(|e| Error::parse("trace", idx + 2, e.to_string()))?);
    }
    Ok((header, records))
}

fn fmt_opt(v: f64) -> String {
    if v.is_nan() { String::new() } else { format!("{v}") }
}

fn parse_opt(s: &str, line: usize) -> Result<f64> {
    if s.trim().is_empty() {
        Ok(f64::NAN)
    } else {
        s.trim().parse().map_err(|_| Error::parse("summary", line, format!("bad number `{s}`")))
    }
}

pub fn write_summary<W: Write>(mut w: W, rows: &[EstimateRow]) -> Result<()> {
    writeln!(w, "{SUMMARY_HEADER}")?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["estimator", "mean", "std", "rmse"])?;
    for row in rows {
        csv.write_record([
            row.estimator.clone(),
            fmt_opt(row.mean),
            fmt_opt(row.std),
            row.rmse.map(fmt_opt).unwrap_or_default(),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

pub fn read_summary<R: Read>(r: R) -> Result<Vec<EstimateRow>> {
    let mut reader = BufReader::new(r);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    if first.trim_end() != SUMMARY_HEADER {
        return Err(Error::parse("summary", 1, format!("expected `{SUMMARY_HEADER}`")));
    }
    let mut csv = csv::Reader::from_reader(reader);
    let headers = csv.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["estimator", "mean", "std", "rmse"] {
        return Err(Error::parse("summary", 2, "expected columns estimator,mean,std,rmse"));
    }
    let mut rows = Vec::new();
    for (idx, rec) in csv.records().enumerate() {
        let rec = rec?;
        let line = idx + 3;
        let rmse = parse_opt(&rec[3], line)?;
        rows.push(EstimateRow {
            estimator: rec[0].to_string(),
            mean: parse_opt(&rec[1], line)?,
            std: parse_opt(&rec[2], line)?,
            rmse: (!rmse.is_nan()).then_some(rmse),
        });
    }
    Ok(rows)
}

/// Summary rows of a single run: level-1 moments (with the error against the
/// truth when known), per-pair swap and per-level within-level acceptance,
/// and the final ladder.
pub fn run_summary_rows(summary: &RunSummary, truth: Option<&(Vec<f64>, Vec<f64>)>) -> Vec<EstimateRow> {
    let mut rows = Vec::new();
    let mut push = |name: String, mean: f64, rmse: Option<f64>| {
        rows.push(EstimateRow {
            estimator: name,
            mean,
            std: f64::NAN,
            rmse,
        })
    };
    for (sq, label, values) in [(false, "", &summary.coord_mean), (true, "^2", &summary.coord_sq_mean)] {
        for (i, &v) in values.iter().enumerate() {
            let t = truth.map(|(m, m2)| if sq { m2[i] } else { m[i] });
            push(format!("E[X{}{label}]", i + 1), v, t.map(|t| (v - t).abs()));
        }
    }
    for (name, v) in &summary.functions {
        push(name.clone(), *v, None);
    }
    for (j, &p) in summary.swap_accept_prob.iter().enumerate() {
        push(format!("swap[{}]", j + 1), p, None);
    }
    for (l, &p) in summary.rwm_accept_prob.iter().enumerate() {
        push(format!("accept[{}]", l + 1), p, None);
    }
    for (l, &b) in summary.final_betas.iter().enumerate() {
        push(format!("beta[{}]", l + 1), b, None);
    }
    rows
}

/// Writes `iteration,beta1,…,betaL` for every trace record.
pub fn write_betas<W: Write>(w: W, records: &[IterationRecord]) -> Result<()> {
    let levels = records.first().map_or(0, |r| r.betas.len());
    let mut csv = csv::Writer::from_writer(w);
    let mut header = vec!["iteration".to_string()];
    header.extend((1..=levels).map(|l| format!("beta{l}")));
    csv.write_record(&header)?;
    for r in records {
        let mut row = vec![r.iteration.to_string()];
        row.extend(r.betas.iter().map(|b| format!("{b:e}")));
        csv.write_record(&row)?;
    }
    csv.flush()?;
    Ok(())
}

/// Writes `iteration,x1,…,xd` for every trace record carrying a state.
pub fn write_level1<W: Write>(w: W, records: &[IterationRecord]) -> Result<()> {
    let dim = records.iter().find_map(|r| r.x1.as_ref()).map_or(0, Vec::len);
    let mut csv = csv::Writer::from_writer(w);
    let mut header = vec!["iteration".to_string()];
    header.extend((1..=dim).map(|i| format!("x{i}")));
    csv.write_record(&header)?;
    for r in records {
        if let Some(x) = &r.x1 {
            let mut row = vec![r.iteration.to_string()];
            row.extend(x.iter().map(|v| v.to_string()));
            csv.write_record(&row)?;
        }
    }
    csv.flush()?;
    Ok(())
}

/// Reads a numeric CSV with a header row (e.g. `betas.csv`).
pub fn read_numeric_csv<R: Read>(r: R) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut csv = csv::Reader::from_reader(r);
    let headers = csv.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (idx, rec) in csv.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|v| v.parse::<f64>().map_err(|_| Error::parse("csv", idx + 2, format!("bad number `{v}`"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok((headers, rows))
}

/// A run manifest: the fully resolved configuration preceded by comment lines.
/// It is itself a valid configuration file.
pub fn manifest_text(config: &SamplerConfig, version: &str, started: &str, artifacts: &[&str]) -> String {
    let mut out = format!("# aptemper {version}\n# started {started}\n");
    for a in artifacts {
        out.push_str(&format!("# artifact {a}\n"));
    }
    out.push_str(&config.to_text());
    out
}

/// Creates `path` for buffered writing.
pub fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}
