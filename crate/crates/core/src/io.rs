//! File formats: binary scalar fields, OBJ meshes, CSV and plot scripts.
//!
//! A field file is a short text header followed by raw node values:
//!
//! ```text
//! SFIELD1
//! nodes 41 41 41
//! origin 0 0 0
//! spacing 0.075000000000000011 0.075000000000000011 0.075000000000000011
//! encoding f64le
//! data
//! <nx*ny*nz little-endian f64, x-fastest>
//! ```

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::Path;

use thiserror::Error;

use crate::grid::{GridError, GridMeasures, GridSpec, NodeField, TriMesh};
use crate::point::Point3;

pub const FIELD_MAGIC: &str = "SFIELD1";
pub const FIELD_ENCODING: &str = "f64le";

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("field header line {line}: {msg}")]
    Header { line: usize, msg: String },
    #[error("field payload has {got} bytes, header declares {expected}")]
    Payload { expected: usize, got: usize },
    #[error("mesh line {line}: {msg}")]
    Mesh { line: usize, msg: String },
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Shortest fixed or exponent form with 17 significant digits, in the
/// style of C's `%.17g`. Parses back to the same bits.
pub fn fmt17(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mant, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: String| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if (-4..17).contains(&exp) {
        trim(format!("{x:.*}", (16 - exp) as usize))
    } else {
        format!("{}e{}{:02}", trim(mant.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn fmt_point(p: Point3) -> String {
    format!("{} {} {}", fmt17(p.x), fmt17(p.y), fmt17(p.z))
}

pub fn write_field<W: Write>(field: &NodeField, mut w: W) -> io::Result<()> {
    let spec = field.spec();
    let [nx, ny, nz] = spec.nodes();
    writeln!(w, "{FIELD_MAGIC}")?;
    writeln!(w, "nodes {nx} {ny} {nz}")?;
    writeln!(w, "origin {}", fmt_point(spec.origin()))?;
    writeln!(w, "spacing {}", fmt_point(spec.spacing().into()))?;
    writeln!(w, "encoding {FIELD_ENCODING}")?;
    writeln!(w, "data")?;
    let mut buf = Vec::with_capacity(field.values().len() * 8);
    for v in field.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    w.flush()
}

fn header_values<T: std::str::FromStr>(
    line: &str,
    n: usize,
    key: &str,
    lineno: usize,
) -> Result<Vec<T>, IoError> {
    let bad = |msg: String| IoError::Header { line: lineno, msg };
    let mut it = line.split_ascii_whitespace();
    if it.next() != Some(key) {
        return Err(bad(format!("expected `{key}`, found `{line}`")));
    }
    let vals: Vec<T> = it
        .map(|s| s.parse().map_err(|_| bad(format!("cannot parse `{s}` in `{key}`"))))
        .collect::<Result<_, _>>()?;
    if vals.len() != n {
        return Err(bad(format!("`{key}` needs {n} values, found {}", vals.len())));
    }
    Ok(vals)
}

pub fn read_field<R: BufRead>(mut r: R) -> Result<NodeField, IoError> {
    let mut lines = Vec::new();
    for lineno in 1..=6 {
        let mut line = String::new();
        if r.read_line(&mut line)? == 0 {
            return Err(IoError::Header {
                line: lineno,
                msg: "unexpected end of header".into(),
            });
        }
        let line = line.trim_end_matches(['\n', '\r']).to_string();
        if lineno == 1 && line != FIELD_MAGIC {
            return Err(IoError::Header {
                line: 1,
                msg: format!("bad magic `{line}`"),
            });
        }
        lines.push(line);
    }
    let nodes: Vec<usize> = header_values(&lines[1], 3, "nodes", 2)?;
    let origin: Vec<f64> = header_values(&lines[2], 3, "origin", 3)?;
    let spacing: Vec<f64> = header_values(&lines[3], 3, "spacing", 4)?;
    let encoding: Vec<String> = header_values(&lines[4], 1, "encoding", 5)?;
    if encoding[0] != FIELD_ENCODING {
        return Err(IoError::Header {
            line: 5,
            msg: format!("unsupported encoding `{}`", encoding[0]),
        });
    }
    if lines[5] != "data" {
        return Err(IoError::Header {
            line: 6,
            msg: format!("expected `data`, found `{}`", lines[5]),
        });
    }
    let spec = GridSpec::new(
        [nodes[0], nodes[1], nodes[2]],
        Point3::new(origin[0], origin[1], origin[2]),
        [spacing[0], spacing[1], spacing[2]],
    )?;
    let expected = spec
        .node_count()
        .checked_mul(8)
        .ok_or_else(|| IoError::Header {
            line: 2,
            msg: "node count overflows".into(),
        })?;
    let mut payload = Vec::new();
    r.read_to_end(&mut payload)?;
    if payload.len() != expected {
        return Err(IoError::Payload {
            expected,
            got: payload.len(),
        });
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Ok(NodeField::new(spec, values)?)
}

pub fn save_field(field: &NodeField, path: &Path) -> Result<(), IoError> {
    write_field(field, io::BufWriter::new(fs::File::create(path)?))?;
    Ok(())
}

pub fn load_field(path: &Path) -> Result<NodeField, IoError> {
    read_field(io::BufReader::new(fs::File::open(path)?))
}

/// Wavefront OBJ: `v x y z` lines then `f a b c` lines, 1-based.
pub fn write_obj<W: Write>(mesh: &TriMesh, mut w: W) -> io::Result<()> {
    for v in &mesh.vertices {
        writeln!(w, "v {}", fmt_point(*v))?;
    }
    for f in &mesh.faces {
        writeln!(w, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
    }
    w.flush()
}

/// Reads the `v` and triangular `f` lines of an OBJ file; other records
/// are skipped.
pub fn read_obj<R: BufRead>(r: R) -> Result<TriMesh, IoError> {
    let mut mesh = TriMesh::default();
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let bad = |msg: String| IoError::Mesh { line: idx + 1, msg };
        let mut it = line.split_ascii_whitespace();
        match it.next() {
            Some("v") => {
                let c: Vec<f64> = it
                    .map(|s| s.parse().map_err(|_| bad(format!("bad coordinate `{s}`"))))
                    .collect::<Result<_, _>>()?;
                if c.len() != 3 {
                    return Err(bad("vertex needs 3 coordinates".into()));
                }
                mesh.vertices.push(Point3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let ids: Vec<usize> = it
                    .map(|s| {
                        let head = s.split('/').next().unwrap_or(s);
                        head.parse::<usize>()
                            .ok()
                            .filter(|&i| i >= 1 && i <= mesh.vertices.len())
                            .map(|i| i - 1)
                            .ok_or_else(|| bad(format!("bad vertex reference `{s}`")))
                    })
                    .collect::<Result<_, _>>()?;
                if ids.len() != 3 {
                    return Err(bad("only triangles are supported".into()));
                }
                mesh.faces.push([ids[0], ids[1], ids[2]]);
            }
            _ => {}
        }
    }
    Ok(mesh)
}

pub const MEASURES_CSV_HEADER: &str =
    "volume1,volume0,interface_area,normal_x,normal_y,normal_z,domain_volume,cut_cells";

pub fn measures_csv(m: &GridMeasures) -> String {
    format!(
        "{MEASURES_CSV_HEADER}\n{},{},{},{},{},{},{},{}\n",
        fmt17(m.total_volume1),
        fmt17(m.total_volume0),
        fmt17(m.total_interface_area),
        fmt17(m.normal_integral.x),
        fmt17(m.normal_integral.y),
        fmt17(m.normal_integral.z),
        fmt17(m.domain_volume),
        m.cut_cells,
    )
}

/// Gnuplot script drawing the error columns of a convergence CSV on log
/// axes against mesh size.
pub fn convergence_plot_script(csv_path: &str, image_path: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set logscale xy\n\
         set xlabel 'cells per axis'\n\
         set ylabel 'absolute error'\n\
         set terminal pngcairo size 800,600\n\
         set output '{image_path}'\n\
         plot '{csv_path}' using 1:3 with linespoints title 'volume', \\\n\
         \x20    '{csv_path}' using 1:5 with linespoints title 'area'\n"
    )
}
