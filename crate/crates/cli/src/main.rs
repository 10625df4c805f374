use std::f64::consts::PI;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use cellvol::cases::lookup_table;
use cellvol::grid::{
    adjacent_face_agreement, convergence_study, sample_field, FieldSource, GridSpec, ImplicitField, NodeField,
};
use cellvol::io::{convergence_plot_script, fmt17, load_field, measures_csv, write_obj};
use cellvol::measure::{component_surface, measure_config};
use cellvol::oracles::{mc_point_in_mesh_volume, plane_clip_box};
use cellvol::topology::{config_orbits, describe_labeling, validate_rotation_group, ROTATION_TABLE};
use cellvol::{Component, Config, Point3};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "cellvol", version, about = "Partial cell volumes and interface measures on Cartesian grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Measure both component volumes, interface area and normal integral.
    Volume {
        #[command(flatten)]
        source: SourceArgs,
        /// Also write the totals as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Refinement study against exact volume and area.
    Convergence {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        exact_volume: Option<f64>,
        #[arg(long)]
        exact_area: Option<f64>,
        /// Component whose volume is compared: 0 or 1. Defaults to the
        /// sphere interior (0) or the plane's positive side (1).
        #[arg(long)]
        component: Option<u8>,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write a gnuplot script for the CSV given by --out.
        #[arg(long, requires = "out")]
        plot: Option<PathBuf>,
    },
    /// Export the interface triangles as OBJ.
    Mesh {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the 256-entry lookup table.
    Table {
        /// Print the corner, edge and face numbering instead.
        #[arg(long)]
        labels: bool,
    },
    /// Show the table entry of one config and measure it in the unit cell.
    Cellcase {
        /// Config byte, decimal or 0x-prefixed hex.
        #[arg(long, value_parser = parse_config)]
        config: u8,
        /// 12 crossing parameters, each from the edge's first endpoint.
        #[arg(long, value_delimiter = ',')]
        params: Option<Vec<f64>>,
    },
    /// Independent checks of the kernel and the table.
    Verify {
        #[arg(value_enum)]
        check: Check,
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, value_parser = parse_config)]
        config: Option<u8>,
        #[arg(long, value_delimiter = ',')]
        params: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Check {
    /// Monte Carlo volume of one cell (--config) or all 256.
    Mc,
    /// Grid volume and area of a plane against exact clipping.
    Plane,
    /// Rotation group and table coverage.
    Table,
    /// Interface agreement across shared cell faces.
    Faces,
}

#[derive(Args)]
struct SourceArgs {
    /// Binary field file; its header defines the grid.
    #[arg(long, conflicts_with_all = ["sphere", "plane", "constant"])]
    field: Option<PathBuf>,
    /// Signed distance to a sphere: cx,cy,cz,r.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    sphere: Option<Vec<f64>>,
    /// Use |x-c|^2 - r^2 instead of the distance for --sphere.
    #[arg(long, requires = "sphere")]
    squared: bool,
    /// n.x - d with the plane nx,ny,nz,d.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, conflicts_with = "sphere")]
    plane: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["sphere", "plane"])]
    constant: Option<f64>,
    /// Cells per axis: N for a cube, Nx,Ny,Nz, or a list for convergence.
    #[arg(long, value_delimiter = ',')]
    mesh: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    iso: f64,
    /// x0,y0,z0,x1,y1,z1
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    domain: Option<Vec<f64>>,
}

fn parse_config(s: &str) -> Result<u8, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u8::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|_| format!("`{s}` is not a config in 0..=255"))
}

/// Usage problems found after argument parsing.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

const DEFAULT_MESHES: [usize; 4] = [10, 20, 40, 80];

fn check_len(values: &Option<Vec<f64>>, flag: &str, n: usize) -> Result<()> {
    match values {
        Some(v) if v.len() != n => Err(usage(format!("--{flag} takes {n} comma-separated values, got {}", v.len()))),
        _ => Ok(()),
    }
}

impl SourceArgs {
    fn validate(&self) -> Result<()> {
        check_len(&self.sphere, "sphere", 4)?;
        check_len(&self.plane, "plane", 4)?;
        check_len(&self.domain, "domain", 6)
    }

    fn implicit(&self) -> Result<Option<ImplicitField>> {
        self.validate()?;
        if let Some(s) = &self.sphere {
            let center = Point3::new(s[0], s[1], s[2]);
            let radius = s[3];
            if radius.is_nan() || radius <= 0.0 {
                return Err(usage("sphere radius must be positive"));
            }
            return Ok(Some(if self.squared {
                ImplicitField::SphereSquared { center, radius }
            } else {
                ImplicitField::Sphere { center, radius }
            }));
        }
        if let Some(p) = &self.plane {
            return Ok(Some(ImplicitField::Plane {
                normal: Point3::new(p[0], p[1], p[2]),
                offset: p[3],
            }));
        }
        Ok(self.constant.map(ImplicitField::Constant))
    }

    fn domain(&self) -> Result<(Point3, Point3)> {
        self.validate()?;
        let d = self.domain.as_deref().unwrap_or(&[0.0, 0.0, 0.0, 3.0, 3.0, 3.0]);
        let (lo, hi) = (Point3::new(d[0], d[1], d[2]), Point3::new(d[3], d[4], d[5]));
        if !(lo.x < hi.x && lo.y < hi.y && lo.z < hi.z) {
            return Err(usage(format!("domain {lo} .. {hi} is empty")));
        }
        Ok((lo, hi))
    }

    fn cells(&self) -> Result<[usize; 3]> {
        match self.mesh.as_deref() {
            None => Ok([40; 3]),
            Some(&[n]) => Ok([n; 3]),
            Some(&[x, y, z]) => Ok([x, y, z]),
            Some(m) => Err(usage(format!("--mesh takes N or Nx,Ny,Nz here, got {} values", m.len()))),
        }
    }

    /// Sampled field from a file or an implicit source.
    fn field(&self) -> Result<NodeField> {
        if let Some(path) = &self.field {
            if self.mesh.is_some() || self.domain.is_some() {
                return Err(usage("--mesh and --domain come from the field file"));
            }
            return load_field(path).with_context(|| format!("reading {}", path.display()));
        }
        let f = self
            .implicit()?
            .ok_or_else(|| usage("give a field: --field, --sphere, --plane or --constant"))?;
        let (lo, hi) = self.domain()?;
        let spec = GridSpec::over_domain(lo, hi, self.cells()?).map_err(|e| usage(e.to_string()))?;
        Ok(sample_field(&FieldSource::Implicit(f), &spec)?)
    }
}

fn print_point(out: &mut impl Write, name: &str, p: Point3) -> io::Result<()> {
    writeln!(out, "{name} {} {} {}", fmt17(p.x), fmt17(p.y), fmt17(p.z))
}

fn cmd_volume(source: &SourceArgs, out_path: Option<&PathBuf>) -> Result<()> {
    let field = source.field()?;
    let m = field.measure(source.iso, false)?;
    let mut out = io::stdout().lock();
    let [nx, ny, nz] = field.spec().cells();
    writeln!(out, "cells {nx} {ny} {nz}")?;
    writeln!(out, "volume1 {}", fmt17(m.total_volume1))?;
    writeln!(out, "volume0 {}", fmt17(m.total_volume0))?;
    writeln!(out, "interface_area {}", fmt17(m.total_interface_area))?;
    print_point(&mut out, "normal_integral", m.normal_integral)?;
    print_point(&mut out, "first_moment", m.first_moment)?;
    writeln!(out, "domain_volume {}", fmt17(m.domain_volume))?;
    writeln!(out, "cut_cells {}", m.cut_cells)?;
    if let Some(path) = out_path {
        fs::write(path, measures_csv(&m)).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn cmd_convergence(
    source: &SourceArgs,
    exact_volume: Option<f64>,
    exact_area: Option<f64>,
    component: Option<u8>,
    out_path: Option<&PathBuf>,
    plot: Option<&PathBuf>,
) -> Result<()> {
    if source.field.is_some() {
        return Err(usage("convergence needs an implicit field (--sphere or --plane)"));
    }
    let f = match source.implicit()? {
        Some(f) => f,
        None => ImplicitField::Sphere {
            center: Point3::new(1.5, 1.5, 1.5),
            radius: 1.0,
        },
    };
    let (lo, hi) = source.domain()?;
    let meshes = source.mesh.clone().unwrap_or_else(|| DEFAULT_MESHES.to_vec());
    if meshes.contains(&0) {
        return Err(usage("mesh sizes must be positive"));
    }
    let (default_component, default_volume, default_area) = match f {
        ImplicitField::Sphere { radius, .. } | ImplicitField::SphereSquared { radius, .. } => (
            Component::Zero,
            Some(4.0 / 3.0 * PI * radius.powi(3)),
            Some(4.0 * PI * radius * radius),
        ),
        ImplicitField::Plane { normal, offset } => {
            let c = plane_clip_box(normal, offset, lo, hi).map_err(|e| usage(e.to_string()))?;
            (Component::One, Some(c.volume), Some(c.section_area))
        }
        _ => (Component::One, None, None),
    };
    let component = match component {
        None => default_component,
        Some(0) => Component::Zero,
        Some(1) => Component::One,
        Some(c) => return Err(usage(format!("component must be 0 or 1, got {c}"))),
    };
    let exact_volume = exact_volume
        .or(default_volume)
        .ok_or_else(|| usage("--exact-volume is required for this field"))?;
    let exact_area = exact_area
        .or(default_area)
        .ok_or_else(|| usage("--exact-area is required for this field"))?;
    if meshes.len() < 2 {
        eprintln!("warning: a single mesh gives no convergence order");
    }

    let study = convergence_study(&meshes, lo, hi, &f, source.iso, component, exact_volume, exact_area)?;
    for w in &study.warnings {
        eprintln!("warning: {w}");
    }
    let csv = study.to_csv();
    match out_path {
        Some(path) => fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?,
        None => io::stdout().lock().write_all(csv.as_bytes())?,
    }
    if let (Some(script), Some(csv_path)) = (plot, out_path) {
        let image = csv_path.with_extension("png");
        fs::write(
            script,
            convergence_plot_script(&csv_path.to_string_lossy(), &image.to_string_lossy()),
        )
        .with_context(|| format!("writing {}", script.display()))?;
    }
    Ok(())
}

fn cmd_mesh(source: &SourceArgs, out_path: &PathBuf) -> Result<()> {
    let field = source.field()?;
    let mesh = field.interface_mesh(source.iso)?;
    let file = fs::File::create(out_path).with_context(|| format!("creating {}", out_path.display()))?;
    write_obj(&mesh, BufWriter::new(file)).with_context(|| format!("writing {}", out_path.display()))?;
    let mut out = io::stdout().lock();
    writeln!(out, "vertices {}", mesh.vertices.len())?;
    writeln!(out, "faces {}", mesh.faces.len())?;
    writeln!(out, "area {}", fmt17(mesh.area()))?;
    writeln!(out, "open_edges {}", mesh.open_edges().len())?;
    Ok(())
}

fn cell_params(params: Option<&Vec<f64>>) -> Result<[f64; 12]> {
    let Some(p) = params else {
        return Ok([0.5; 12]);
    };
    let p: [f64; 12] = p.as_slice().try_into().map_err(|_| usage("--params needs 12 values"))?;
    if p.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(usage("crossing parameters must lie in [0, 1]"));
    }
    Ok(p)
}

fn cmd_cellcase(config: u8, params: Option<&Vec<f64>>) -> Result<()> {
    let params = cell_params(params)?;
    let config = Config(config);
    let e = lookup_table().entry(config);
    let m = measure_config(config, &params, Point3::ZERO, Point3::new(1.0, 1.0, 1.0))?;
    let mut out = io::stdout().lock();
    writeln!(out, "config {config} {:08b}", config.0)?;
    writeln!(out, "case {:02}", e.case_id)?;
    writeln!(out, "rotation {:02}", e.rotation_index)?;
    match e.entry.enclosed {
        Some(c) => writeln!(out, "enclosed component {}", c.bit())?,
        None => writeln!(out, "enclosed none")?,
    }
    for (i, part) in e.entry.parts.iter().enumerate() {
        let tris: Vec<String> = part.triangles.iter().map(ToString::to_string).collect();
        writeln!(out, "part {i}: {}", tris.join(", "))?;
    }
    writeln!(out, "volume1 {}", fmt17(m.volume1))?;
    writeln!(out, "volume0 {}", fmt17(m.volume0))?;
    writeln!(out, "interface_area {}", fmt17(m.interface_area))?;
    print_point(&mut out, "normal_integral", m.normal_integral)?;
    print_point(&mut out, "first_moment", m.first_moment)?;
    Ok(())
}

/// Returns whether the check passed.
fn cmd_verify(
    check: Check,
    source: &SourceArgs,
    config: Option<u8>,
    params: Option<&Vec<f64>>,
    samples: usize,
    seed: u64,
) -> Result<bool> {
    let mut out = io::stdout().lock();
    match check {
        Check::Mc => {
            if samples == 0 {
                return Err(usage("--samples must be positive"));
            }
            let (lo, hi) = (Point3::ZERO, Point3::new(1.0, 1.0, 1.0));
            let p = cell_params(params)?;
            let configs: Vec<u8> = match config {
                Some(c) => vec![c],
                None => (0..=255).collect(),
            };
            let mut ok = true;
            for c in configs {
                let e = lookup_table().entry(Config(c));
                let (component, tris) = component_surface(Config(c), &p, lo, hi);
                let kernel = measure_config(Config(c), &p, lo, hi)?.volume(component);
                let mc = mc_point_in_mesh_volume(&tris, lo, hi, samples, seed.wrapping_add(c as u64))?;
                let sigmas = mc.sigmas(kernel);
                ok &= sigmas <= 4.0;
                writeln!(
                    out,
                    "{} case {:02} kernel {} mc {} +- {} ({:.2} sigma)",
                    Config(c),
                    e.case_id,
                    fmt17(kernel),
                    fmt17(mc.value),
                    fmt17(mc.standard_error),
                    sigmas
                )?;
            }
            Ok(ok)
        }
        Check::Plane => {
            source.validate()?;
            let p = source.plane.as_deref().ok_or_else(|| usage("verify plane needs --plane"))?;
            let (normal, offset) = (Point3::new(p[0], p[1], p[2]), p[3]);
            let field = source.field()?;
            let spec = field.spec();
            let exact = plane_clip_box(normal, offset, spec.origin(), spec.extent()).map_err(|e| usage(e.to_string()))?;
            let m = field.measure(source.iso, false)?;
            let rel = |a: f64, b: f64| {
                let s = a.abs().max(b.abs());
                if s == 0.0 {
                    0.0
                } else {
                    (a - b).abs() / s
                }
            };
            let (dv, da) = (rel(m.total_volume1, exact.volume), rel(m.total_interface_area, exact.section_area));
            writeln!(out, "volume1 {} exact {} rel {:.3e}", fmt17(m.total_volume1), fmt17(exact.volume), dv)?;
            writeln!(
                out,
                "interface_area {} exact {} rel {:.3e}",
                fmt17(m.total_interface_area),
                fmt17(exact.section_area),
                da
            )?;
            Ok(dv <= 1e-12 && da <= 1e-12)
        }
        Check::Table => {
            let table = lookup_table();
            let group = validate_rotation_group(&ROTATION_TABLE);
            let mut ids: Vec<u8> = table.entries().iter().map(|e| e.case_id).collect();
            ids.sort();
            ids.dedup();
            let sizes = table.report().orbit_sizes;
            writeln!(out, "rotations {} violations {}", group.checked, group.violations.len())?;
            for v in &group.violations {
                writeln!(out, "  {v:?}")?;
            }
            writeln!(out, "configs {}", table.entries().len())?;
            writeln!(out, "cases {}", ids.len())?;
            writeln!(out, "orbits {}", config_orbits().len())?;
            let sizes_text: Vec<String> = sizes.iter().map(ToString::to_string).collect();
            writeln!(out, "orbit_sizes {}", sizes_text.join(" "))?;
            for e in &table.report().errata {
                writeln!(out, "erratum {e:?}")?;
            }
            Ok(group.is_ok() && table.entries().len() == 256 && ids.len() == 23 && sizes.iter().sum::<usize>() == 256)
        }
        Check::Faces => {
            let field = source.field()?;
            let report = adjacent_face_agreement(field.spec(), &FieldSource::Nodes(field.values().to_vec()), source.iso)?;
            writeln!(out, "faces {}", report.faces_checked)?;
            writeln!(out, "segments {}", report.segments_checked)?;
            writeln!(out, "mismatches {}", report.mismatches.len())?;
            for m in &report.mismatches {
                let [i, j, k] = m.lower_cell;
                writeln!(
                    out,
                    "  axis {} cell ({i}, {j}, {k}) case {:02} vs case {:02}: {} vs {} segments",
                    ["x", "y", "z"][m.axis],
                    m.lower_case,
                    m.upper_case,
                    m.lower_segments,
                    m.upper_segments
                )?;
            }
            Ok(report.is_consistent())
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Volume { source, out } => cmd_volume(&source, out.as_ref()).map(|_| true),
        Command::Convergence {
            source,
            exact_volume,
            exact_area,
            component,
            out,
            plot,
        } => cmd_convergence(&source, exact_volume, exact_area, component, out.as_ref(), plot.as_ref()).map(|_| true),
        Command::Mesh { source, out } => cmd_mesh(&source, &out).map(|_| true),
        Command::Table { labels } => {
            let text = if labels { describe_labeling() } else { lookup_table().dump() };
            io::stdout().lock().write_all(text.as_bytes())?;
            Ok(true)
        }
        Command::Cellcase { config, params } => cmd_cellcase(config, params.as_ref()).map(|_| true),
        Command::Verify {
            check,
            source,
            config,
            params,
            samples,
            seed,
        } => cmd_verify(check, &source, config, params.as_ref(), samples, seed),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<UsageError>() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
