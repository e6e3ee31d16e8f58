use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::EnvError;
use crate::world::{PointCloud, Vec3};

/// Supported on-disk point formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointFormat {
    /// ASCII PLY with a `vertex` element carrying `x`, `y`, `z` properties.
    AsciiPly,
    /// One whitespace-separated `x y z` triple per line; extra columns ignored.
    XyzText,
}

impl PointFormat {
    /// Guess from the file extension; anything but `.ply` is treated as XYZ text.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("ply") => PointFormat::AsciiPly,
            _ => PointFormat::XyzText,
        }
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> EnvError {
    EnvError::Parse {
        line,
        message: message.into(),
    }
}

pub fn load_point_cloud(path: &Path, format: PointFormat) -> Result<PointCloud, EnvError> {
    let reader = BufReader::new(File::open(path)?);
    match format {
        PointFormat::AsciiPly => read_ply(reader),
        PointFormat::XyzText => read_xyz(reader),
    }
}

fn parse_coord(tok: Option<&str>, line: usize) -> Result<f64, EnvError> {
    let tok = tok.ok_or_else(|| parse_err(line, "missing coordinate"))?;
    let v: f64 = tok
        .parse()
        .map_err(|_| parse_err(line, format!("non-numeric coordinate {tok:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite coordinate {tok:?}")));
    }
    Ok(v)
}

fn read_xyz(reader: impl BufRead) -> Result<PointCloud, EnvError> {
    let mut points = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let mut toks = body.split_whitespace();
        let x = parse_coord(toks.next(), lineno)?;
        let y = parse_coord(toks.next(), lineno)?;
        let z = parse_coord(toks.next(), lineno)?;
        points.push(Vec3::new(x, y, z));
    }
    Ok(PointCloud::new(points)?)
}

struct Element {
    name: String,
    count: usize,
    properties: Vec<String>,
}

fn read_ply(reader: impl BufRead) -> Result<PointCloud, EnvError> {
    let mut lines = reader.lines().enumerate();
    let mut next_line = |expect: &str| -> Result<(usize, String), EnvError> {
        match lines.next() {
            Some((i, l)) => Ok((i + 1, l?)),
            None => Err(parse_err(
                0,
                format!("unexpected end of file, expected {expect}"),
            )),
        }
    };

    let (n, magic) = next_line("ply magic")?;
    if magic.trim() != "ply" {
        return Err(parse_err(n, "missing 'ply' magic"));
    }
    let mut elements: Vec<Element> = Vec::new();
    let mut saw_format = false;
    let mut last;
    loop {
        let (n, line) = next_line("end_header")?;
        last = n;
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            ["end_header"] => break,
            ["format", "ascii", _] => saw_format = true,
            ["format", other, ..] => {
                return Err(parse_err(n, format!("unsupported PLY format {other:?}")));
            }
            ["comment", ..] | ["obj_info", ..] | [] => {}
            ["element", name, count] => {
                let count = count
                    .parse()
                    .map_err(|_| parse_err(n, format!("bad element count {count:?}")))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            ["property", "list", ..] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| parse_err(n, "property before any element"))?;
                el.properties.push(String::from("<list>"));
            }
            ["property", _ty, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| parse_err(n, "property before any element"))?;
                el.properties.push(name.to_string());
            }
            _ => return Err(parse_err(n, format!("malformed header line {line:?}"))),
        }
    }
    if !saw_format {
        return Err(parse_err(last, "header has no format line"));
    }

    let mut points = Vec::new();
    for el in &elements {
        if el.name != "vertex" {
            // Skip other elements; list properties make their lines variable-width.
            for _ in 0..el.count {
                next_line("element data")?;
            }
            continue;
        }
        let find = |axis: &str| {
            el.properties
                .iter()
                .position(|p| p == axis)
                .ok_or_else(|| parse_err(last, format!("vertex element lacks property {axis}")))
        };
        let (ix, iy, iz) = (find("x")?, find("y")?, find("z")?);
        points.reserve(el.count);
        for _ in 0..el.count {
            let (n, line) = next_line("vertex data")
                .map_err(|_| parse_err(last + 1, "truncated vertex data"))?;
            last = n;
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() < el.properties.len() {
                return Err(parse_err(
                    n,
                    format!("expected {} values", el.properties.len()),
                ));
            }
            let x = parse_coord(toks.get(ix).copied(), n)?;
            let y = parse_coord(toks.get(iy).copied(), n)?;
            let z = parse_coord(toks.get(iz).copied(), n)?;
            points.push(Vec3::new(x, y, z));
        }
    }
    Ok(PointCloud::new(points)?)
}

/// Writes coordinates with shortest round-trip formatting, so a reload is exact.
pub fn save_point_cloud(
    path: &Path,
    cloud: &PointCloud,
    format: PointFormat,
) -> Result<(), EnvError> {
    let mut w = BufWriter::new(File::create(path)?);
    if format == PointFormat::AsciiPly {
        writeln!(w, "ply")?;
        writeln!(w, "format ascii 1.0")?;
        writeln!(w, "element vertex {}", cloud.len())?;
        writeln!(w, "property float x")?;
        writeln!(w, "property float y")?;
        writeln!(w, "property float z")?;
        writeln!(w, "end_header")?;
    }
    for p in cloud.points() {
        writeln!(w, "{} {} {}", p.x, p.y, p.z)?;
    }
    w.flush()?;
    Ok(())
}
