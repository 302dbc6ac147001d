//! File formats: key = value configs, the binary stack container with its
//! geometry sidecar, CSV tables, ASCII PLY and snapshot text input.

mod config;
mod stack;
mod tables;

pub use config::{KeyValues, Provenance, VERSION_LINE};
pub use stack::{read_stack, sidecar_path, write_stack, STACK_MAGIC, STACK_VERSION};
pub use tables::{
    read_point_cloud, read_scene, read_snapshot, write_estimate, write_point_cloud, write_ply,
    write_scene, write_trajectory,
};

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Creates `path` (and missing parents) and runs `body` on a buffered writer.
pub fn write_file(path: &Path, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}
