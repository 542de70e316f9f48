//! Raw field dumps: little-endian interleaved `(re, im)` f64 pairs in
//! row-major order, with a JSON sidecar describing the grid.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::{Grid, SpectralField};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpMeta {
    pub component: i32,
    pub box_length: f64,
    pub resolution: usize,
    pub tag: String,
}

/// Writes `<stem>.bin` and `<stem>.json` into `dir`.
pub fn write_field(dir: &Path, stem: &str, field: &SpectralField, component: i32, tag: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut bytes = Vec::with_capacity(field.coefficients().len() * 16);
    for v in field.coefficients() {
        bytes.extend_from_slice(&v.re.to_le_bytes());
        bytes.extend_from_slice(&v.im.to_le_bytes());
    }
    fs::File::create(dir.join(format!("{stem}.bin")))?.write_all(&bytes)?;
    let meta = DumpMeta {
        component,
        box_length: field.grid().box_len(),
        resolution: field.grid().n(),
        tag: tag.to_string(),
    };
    let json = serde_json::to_string_pretty(&meta).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(dir.join(format!("{stem}.json")), json)?;
    Ok(())
}

pub fn read_field(dir: &Path, stem: &str) -> Result<(SpectralField, DumpMeta)> {
    let meta: DumpMeta = serde_json::from_str(&fs::read_to_string(dir.join(format!("{stem}.json")))?)
        .map_err(|e| Error::Io(e.to_string()))?;
    let bytes = fs::read(dir.join(format!("{stem}.bin")))?;
    let grid = Grid::new(meta.resolution, meta.box_length)?;
    if bytes.len() != grid.len() * 16 {
        return Err(Error::Io(format!(
            "dump holds {} bytes, expected {}",
            bytes.len(),
            grid.len() * 16
        )));
    }
    let data = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    Ok((SpectralField::from_coefficients(&grid, data)?, meta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::new(4, 3.0).unwrap();
        let f = SpectralField::from_fn(&g, |x| Complex64::new(x[0], x[1] * x[2]));
        write_field(dir.path(), "f", &f, -2, "test").unwrap();
        let (h, meta) = read_field(dir.path(), "f").unwrap();
        assert_eq!(meta.component, -2);
        assert_eq!(h.coefficients(), f.coefficients());
    }
}
