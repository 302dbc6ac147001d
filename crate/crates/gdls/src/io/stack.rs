//! Binary stack container.
//!
//! Layout: magic `GDLS`, then little-endian `u32` version, rows, cols and
//! samples per cell, then row-major cells of interleaved `f64` (re, im)
//! pairs. The acquisition geometry and cell raster live in a text sidecar
//! next to it (`<stack>.geom`, `key = value`).

use std::path::{Path, PathBuf};

use gdls_core::model::{Snapshot, TomoGeometry, C64};

use super::config::{KeyValues, Provenance};
use super::{read_text, write_file};
use crate::bench::format_float;
use crate::error::{Error, Result};
use crate::tomosar::{CellGrid, TomoStack};

pub const STACK_MAGIC: &[u8; 4] = b"GDLS";
pub const STACK_VERSION: u32 = 1;
const HEADER_LEN: usize = 20;

pub fn sidecar_path(stack: &Path) -> PathBuf {
    let mut s = stack.as_os_str().to_owned();
    s.push(".geom");
    PathBuf::from(s)
}

/// Geometry, raster and SNR as `key = value` pairs.
pub(crate) fn geometry_entries(g: &TomoGeometry, grid: &CellGrid, snr_db: Option<f64>) -> KeyValues {
    let mut kv = KeyValues::default();
    kv.set("wavelength_m", format_float(g.wavelength_m));
    kv.set("baseline_spacing_m", format_float(g.baseline_spacing_m));
    kv.set("range_m", format_float(g.range_m));
    kv.set("num_baselines", g.num_baselines.to_string());
    kv.set("incident_angle_rad", format_float(g.incident_angle_rad));
    kv.set("rows", grid.rows.to_string());
    kv.set("cols", grid.cols.to_string());
    kv.set("range_start_m", format_float(grid.range_start_m));
    kv.set("range_spacing_m", format_float(grid.range_spacing_m));
    kv.set("azimuth_start_m", format_float(grid.azimuth_start_m));
    kv.set("azimuth_spacing_m", format_float(grid.azimuth_spacing_m));
    kv.set("snr_db", snr_db.map_or_else(|| "none".to_string(), format_float));
    kv
}

pub(crate) fn parse_geometry(kv: &KeyValues, file: &str) -> Result<(TomoGeometry, CellGrid, Option<f64>)> {
    let geometry = TomoGeometry::new(
        kv.require("wavelength_m", file)?,
        kv.require("baseline_spacing_m", file)?,
        kv.require("range_m", file)?,
        kv.require("num_baselines", file)?,
        kv.require("incident_angle_rad", file)?,
    )?;
    let grid = CellGrid {
        rows: kv.require("rows", file)?,
        cols: kv.require("cols", file)?,
        range_start_m: kv.require("range_start_m", file)?,
        range_spacing_m: kv.require("range_spacing_m", file)?,
        azimuth_start_m: kv.require("azimuth_start_m", file)?,
        azimuth_spacing_m: kv.require("azimuth_spacing_m", file)?,
    };
    let snr_db = match kv.get("snr_db") {
        None | Some("none") => None,
        Some(_) => Some(kv.require("snr_db", file)?),
    };
    Ok((geometry, grid, snr_db))
}

/// Writes the binary stack and its geometry sidecar.
pub fn write_stack(path: &Path, stack: &TomoStack, provenance: &Provenance) -> Result<()> {
    stack.validate()?;
    let to_u32 = |v: usize| u32::try_from(v).map_err(|_| Error::Config(format!("{v} does not fit the stack header")));
    let mut bytes = Vec::with_capacity(HEADER_LEN + stack.cells.len() * stack.geometry.num_baselines * 16);
    bytes.extend_from_slice(STACK_MAGIC);
    for v in [
        STACK_VERSION,
        to_u32(stack.grid.rows)?,
        to_u32(stack.grid.cols)?,
        to_u32(stack.geometry.num_baselines)?,
    ] {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    for s in stack.cells.iter().flat_map(|c| c.samples()) {
        bytes.extend_from_slice(&s.re.to_le_bytes());
        bytes.extend_from_slice(&s.im.to_le_bytes());
    }
    write_file(path, |w| w.write_all(&bytes))?;
    let geom = geometry_entries(&stack.geometry, &stack.grid, stack.snr_db);
    write_file(&sidecar_path(path), |w| {
        provenance.write_header(w, "#")?;
        geom.write_plain(w)
    })
}

fn u32_at(bytes: &[u8], offset: usize) -> u32 {
    u32::from_le_bytes(bytes[offset..offset + 4].try_into().expect("four bytes"))
}

fn f64_at(bytes: &[u8], offset: usize) -> f64 {
    f64::from_le_bytes(bytes[offset..offset + 8].try_into().expect("eight bytes"))
}

/// Reads a stack and its sidecar, checking that both agree.
pub fn read_stack(path: &Path) -> Result<TomoStack> {
    let name = path.display().to_string();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() < HEADER_LEN || &bytes[..4] != STACK_MAGIC {
        return Err(Error::parse(&name, 0, "not a GDLS stack (bad magic or truncated header)"));
    }
    let version = u32_at(&bytes, 4);
    if version != STACK_VERSION {
        return Err(Error::parse(&name, 0, format!("unsupported stack version {version}")));
    }
    let (rows, cols, n) = (
        u32_at(&bytes, 8) as usize,
        u32_at(&bytes, 12) as usize,
        u32_at(&bytes, 16) as usize,
    );
    let expected = rows
        .checked_mul(cols)
        .and_then(|c| c.checked_mul(n))
        .and_then(|c| c.checked_mul(16))
        .and_then(|c| c.checked_add(HEADER_LEN));
    if expected != Some(bytes.len()) {
        return Err(Error::parse(
            &name,
            0,
            format!("payload length {} does not match header {rows}x{cols}x{n}", bytes.len()),
        ));
    }
    let geom_path = sidecar_path(path);
    let geom_name = geom_path.display().to_string();
    let kv = KeyValues::parse(&read_text(&geom_path)?, &geom_name)?;
    let (geometry, grid, snr_db) = parse_geometry(&kv, &geom_name)?;
    if (grid.rows, grid.cols, geometry.num_baselines) != (rows, cols, n) {
        return Err(Error::Config(format!(
            "{geom_name}: raster {}x{}x{} disagrees with stack header {rows}x{cols}x{n}",
            grid.rows, grid.cols, geometry.num_baselines
        )));
    }
    let mut cells = Vec::with_capacity(rows * cols);
    for cell in 0..rows * cols {
        let base = HEADER_LEN + cell * n * 16;
        let samples = (0..n)
            .map(|k| C64::new(f64_at(&bytes, base + 16 * k), f64_at(&bytes, base + 16 * k + 8)))
            .collect();
        cells.push(Snapshot::new(samples).map_err(|e| Error::parse(&name, 0, format!("cell {cell}: {e}")))?);
    }
    Ok(TomoStack {
        geometry,
        grid,
        snr_db,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tomosar::{simulate_scene, BuildingSpec};

    fn provenance() -> Provenance {
        Provenance {
            command: "test".into(),
            seed: 1,
            config: KeyValues::default(),
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let g = TomoGeometry::ku_band_reference();
        let b = BuildingSpec::reference();
        let grid = CellGrid::covering(&b, &g, 6, 3);
        let (_, stack) = simulate_scene(&g, &b, &grid, Some(25.0), 11).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.stack");
        write_stack(&path, &stack, &provenance()).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[..4], b"GDLS");
        assert_eq!(u32_at(&bytes, 8), 6);
        assert_eq!(read_stack(&path).unwrap(), stack);
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.stack");
        std::fs::write(&path, b"NOPE0000000000000000").unwrap();
        assert!(matches!(read_stack(&path), Err(Error::Parse { .. })));
        let mut good = b"GDLS".to_vec();
        for v in [1u32, 1, 1, 2] {
            good.extend_from_slice(&v.to_le_bytes());
        }
        good.extend_from_slice(&[0u8; 16]);
        std::fs::write(&path, &good).unwrap();
        assert!(matches!(read_stack(&path), Err(Error::Parse { .. })));
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = read_stack(Path::new("/nonexistent/x.stack")).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
