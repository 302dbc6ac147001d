//! Text tables: scene truth, point clouds, PLY, estimates and snapshot input.

use std::io::Write;
use std::path::Path;

use gdls_core::model::{Snapshot, C64};
use gdls_core::solvers::SolveResult;

use super::config::{KeyValues, Provenance};
use super::stack::{geometry_entries, parse_geometry};
use super::{read_text, write_file};
use crate::bench::format_float;
use crate::error::{Error, Result};
use crate::tomosar::{BuildingSpec, CloudPoint, PointCloud, Scatterer, ScattererKind, TomoScene};

const SCENE_HEADER: &str = "cell_row,cell_col,kind,elevation_m,reflectivity_re,reflectivity_im";
const CLOUD_HEADER: &str =
    "range_m,azimuth_m,elevation_m,amplitude_abs,amplitude_phase_rad,cell_row,cell_col";

/// Data rows of a CSV: comments dropped, header checked.
fn data_rows<'a>(text: &'a str, header: &str, file: &str) -> Result<Vec<(usize, Vec<&'a str>)>> {
    let mut rows = Vec::new();
    let mut seen_header = false;
    for (i, line) in text.lines().enumerate() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        if !seen_header {
            if line.trim() != header {
                return Err(Error::parse(file, i + 1, format!("expected header `{header}`")));
            }
            seen_header = true;
            continue;
        }
        rows.push((i + 1, line.split(',').map(str::trim).collect()));
    }
    if !seen_header {
        return Err(Error::parse(file, 1, "missing header row"));
    }
    Ok(rows)
}

fn field<T: std::str::FromStr>(fields: &[&str], idx: usize, name: &str, file: &str, line: usize) -> Result<T> {
    let raw = fields
        .get(idx)
        .ok_or_else(|| Error::parse(file, line, format!("missing field `{name}`")))?;
    raw.parse()
        .map_err(|_| Error::parse(file, line, format!("invalid `{name}` value `{raw}`")))
}

fn write_comment_block<W: Write + ?Sized>(w: &mut W, kv: &KeyValues) -> std::io::Result<()> {
    for (k, v) in kv.entries() {
        writeln!(w, "# {k} = {v}")?;
    }
    Ok(())
}

fn building_entries(b: &BuildingSpec) -> KeyValues {
    let mut kv = KeyValues::default();
    kv.set("building_height_m", format_float(b.height_m));
    kv.set("building_width_m", format_float(b.width_m));
    kv.set("building_azimuth_start_m", format_float(b.azimuth_start_m));
    kv.set("building_length_m", format_float(b.length_m));
    kv
}

/// Ground truth CSV; the header carries the geometry and raster so the file
/// scores a cloud on its own.
pub fn write_scene(path: &Path, scene: &TomoScene, provenance: &Provenance) -> Result<()> {
    write_file(path, |w| {
        provenance.write_header(w, "#")?;
        write_comment_block(w, &geometry_entries(&scene.geometry, &scene.grid, None))?;
        write_comment_block(w, &building_entries(&scene.building))?;
        writeln!(w, "{SCENE_HEADER}")?;
        for (idx, cell) in scene.cells.iter().enumerate() {
            let (row, col) = scene.grid.position(idx);
            for s in cell {
                writeln!(
                    w,
                    "{row},{col},{},{},{},{}",
                    s.kind.name(),
                    format_float(s.elevation_m),
                    format_float(s.reflectivity.re),
                    format_float(s.reflectivity.im)
                )?;
            }
        }
        Ok(())
    })
}

pub fn read_scene(path: &Path) -> Result<TomoScene> {
    let name = path.display().to_string();
    let text = read_text(path)?;
    let kv = KeyValues::from_header(&text);
    let (geometry, grid, _) = parse_geometry(&kv, &name)?;
    let building = BuildingSpec {
        height_m: kv.require("building_height_m", &name)?,
        width_m: kv.require("building_width_m", &name)?,
        azimuth_start_m: kv.require("building_azimuth_start_m", &name)?,
        length_m: kv.require("building_length_m", &name)?,
    };
    let mut cells = vec![Vec::new(); grid.len()];
    for (line, f) in data_rows(&text, SCENE_HEADER, &name)? {
        let row: usize = field(&f, 0, "cell_row", &name, line)?;
        let col: usize = field(&f, 1, "cell_col", &name, line)?;
        if row >= grid.rows || col >= grid.cols {
            return Err(Error::parse(&name, line, format!("cell ({row}, {col}) outside the raster")));
        }
        let kind_raw: String = field(&f, 2, "kind", &name, line)?;
        let kind = ScattererKind::parse(&kind_raw)
            .ok_or_else(|| Error::parse(&name, line, format!("unknown scatterer kind `{kind_raw}`")))?;
        cells[row * grid.cols + col].push(Scatterer {
            kind,
            elevation_m: field(&f, 3, "elevation_m", &name, line)?,
            reflectivity: C64::new(
                field(&f, 4, "reflectivity_re", &name, line)?,
                field(&f, 5, "reflectivity_im", &name, line)?,
            ),
        });
    }
    Ok(TomoScene {
        geometry,
        grid,
        building,
        cells,
    })
}

pub fn write_point_cloud(path: &Path, cloud: &PointCloud, provenance: &Provenance) -> Result<()> {
    write_file(path, |w| {
        provenance.write_header(w, "#")?;
        writeln!(w, "{CLOUD_HEADER}")?;
        for p in &cloud.points {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                format_float(p.range_m),
                format_float(p.azimuth_m),
                format_float(p.elevation_m),
                format_float(p.amplitude.norm()),
                format_float(p.amplitude.arg()),
                p.row,
                p.col
            )?;
        }
        Ok(())
    })
}

pub fn read_point_cloud(path: &Path) -> Result<PointCloud> {
    let name = path.display().to_string();
    let text = read_text(path)?;
    let mut points = Vec::new();
    for (line, f) in data_rows(&text, CLOUD_HEADER, &name)? {
        let abs: f64 = field(&f, 3, "amplitude_abs", &name, line)?;
        let phase: f64 = field(&f, 4, "amplitude_phase_rad", &name, line)?;
        points.push(CloudPoint {
            range_m: field(&f, 0, "range_m", &name, line)?,
            azimuth_m: field(&f, 1, "azimuth_m", &name, line)?,
            elevation_m: field(&f, 2, "elevation_m", &name, line)?,
            amplitude: C64::from_polar(abs, phase),
            row: field(&f, 5, "cell_row", &name, line)?,
            col: field(&f, 6, "cell_col", &name, line)?,
        });
    }
    Ok(PointCloud { points })
}

/// ASCII PLY with `x` = azimuth, `y` = slant-range offset, `z` = elevation
/// and the amplitude magnitude.
pub fn write_ply(path: &Path, cloud: &PointCloud, provenance: &Provenance) -> Result<()> {
    write_file(path, |w| {
        writeln!(w, "ply")?;
        writeln!(w, "format ascii 1.0")?;
        provenance.write_header(w, "comment")?;
        writeln!(w, "element vertex {}", cloud.points.len())?;
        for p in ["x", "y", "z", "amplitude"] {
            writeln!(w, "property double {p}")?;
        }
        writeln!(w, "end_header")?;
        for p in &cloud.points {
            writeln!(
                w,
                "{} {} {} {}",
                format_float(p.azimuth_m),
                format_float(p.range_m),
                format_float(p.elevation_m),
                format_float(p.amplitude.norm())
            )?;
        }
        Ok(())
    })
}

/// One complex sample per line as `re,im` or `re im`; blank lines and `#`
/// comments are skipped.
pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let name = path.display().to_string();
    let text = read_text(path)?;
    let mut samples = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        if parts.len() != 2 {
            return Err(Error::parse(&name, i + 1, format!("expected `re,im`, found `{line}`")));
        }
        let re: f64 = field(&parts, 0, "re", &name, i + 1)?;
        let im: f64 = field(&parts, 1, "im", &name, i + 1)?;
        samples.push(C64::new(re, im));
    }
    if samples.is_empty() {
        return Err(Error::parse(&name, 1, "empty input: no samples"));
    }
    Snapshot::new(samples).map_err(|e| Error::parse(&name, 1, e.to_string()))
}

/// Estimated frequencies and amplitudes, one source per row.
pub fn write_estimate(path: &Path, result: &SolveResult, provenance: &Provenance) -> Result<()> {
    write_file(path, |w| {
        provenance.write_header(w, "#")?;
        writeln!(w, "# final_cost = {}", format_float(result.final_cost))?;
        writeln!(w, "# iterations = {}", result.iterations)?;
        writeln!(w, "index,frequency,amplitude_re,amplitude_im")?;
        for (l, (f, c)) in result
            .frequencies
            .as_slice()
            .iter()
            .zip(result.amplitudes.as_slice())
            .enumerate()
        {
            writeln!(w, "{l},{},{},{}", format_float(*f), format_float(c.re), format_float(c.im))?;
        }
        Ok(())
    })
}

pub fn write_trajectory(path: &Path, trajectory: &[(usize, f64)], provenance: &Provenance) -> Result<()> {
    write_file(path, |w| {
        provenance.write_header(w, "#")?;
        writeln!(w, "iteration,cost")?;
        for (it, cost) in trajectory {
            writeln!(w, "{it},{}", format_float(*cost))?;
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tomosar::{simulate_scene, CellGrid};
    use gdls_core::model::TomoGeometry;

    fn provenance() -> Provenance {
        Provenance {
            command: "test".into(),
            seed: 3,
            config: KeyValues::default(),
        }
    }

    #[test]
    fn snapshot_accepts_both_separators() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("y.txt");
        std::fs::write(&p, "# header\n1,2\n\n3 -4\n 5.5 ,\t6\n").unwrap();
        let y = read_snapshot(&p).unwrap();
        assert_eq!(y.samples(), &[C64::new(1.0, 2.0), C64::new(3.0, -4.0), C64::new(5.5, 6.0)]);
    }

    #[test]
    fn snapshot_errors_name_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("y.txt");
        std::fs::write(&p, "").unwrap();
        assert!(matches!(read_snapshot(&p), Err(Error::Parse { .. })));
        std::fs::write(&p, "1,2\n3,abc\n").unwrap();
        let err = read_snapshot(&p).unwrap_err().to_string();
        assert!(err.ends_with(":2: invalid `im` value `abc`"), "{err}");
        std::fs::write(&p, "1,2,3\n").unwrap();
        assert!(read_snapshot(&p).unwrap_err().to_string().contains(":1:"));
    }

    #[test]
    fn scene_and_cloud_round_trip() {
        let g = TomoGeometry::ku_band_reference();
        let b = BuildingSpec::reference();
        let grid = CellGrid::covering(&b, &g, 8, 2);
        let (scene, _) = simulate_scene(&g, &b, &grid, None, 4).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let sp = dir.path().join("scene.csv");
        write_scene(&sp, &scene, &provenance()).unwrap();
        assert_eq!(read_scene(&sp).unwrap(), scene);

        let cloud = PointCloud {
            points: vec![CloudPoint {
                range_m: -1.25,
                azimuth_m: 0.5,
                elevation_m: 12.0,
                amplitude: C64::from_polar(0.75, -1.0),
                row: 3,
                col: 1,
            }],
        };
        let cp = dir.path().join("cloud.csv");
        write_point_cloud(&cp, &cloud, &provenance()).unwrap();
        let back = read_point_cloud(&cp).unwrap();
        assert_eq!(back.points[0].elevation_m, 12.0);
        assert!((back.points[0].amplitude - cloud.points[0].amplitude).norm() < 1e-15);
        let text = std::fs::read_to_string(&cp).unwrap();
        assert!(text.contains(CLOUD_HEADER));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn ply_vertex_count_matches() {
        let cloud = PointCloud {
            points: vec![
                CloudPoint {
                    range_m: 0.0,
                    azimuth_m: 0.0,
                    elevation_m: 1.0,
                    amplitude: C64::new(1.0, 0.0),
                    row: 0,
                    col: 0,
                };
                3
            ],
        };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.ply");
        write_ply(&p, &cloud, &provenance()).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("ply\nformat ascii 1.0\ncomment gdls 0.1.0\n"));
        assert!(text.contains("element vertex 3\n"));
        let body = text.split("end_header\n").nth(1).unwrap();
        assert_eq!(body.lines().count(), 3);
    }
}
