//! On-disk formats.
//!
//! Volume file: a 16-byte header (`RAYCLASSVOL\0` then a little-endian `u32` format
//! version), three little-endian `u32` dims, then `nx * ny * nz` little-endian `f32`
//! voxels, x fastest. A JSON sidecar next to it (same stem, `.json`) holds spacing,
//! axial axis and provenance. Masks are JSON `{"dims": [x, y, z], "indices": [...]}`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::{voxel_count, Dims, ImageVolume, RegionMask, WeightMap};

pub const VOLUME_MAGIC: &[u8; 12] = b"RAYCLASSVOL\0";
pub const VOLUME_VERSION: u32 = 1;
const HEADER_LEN: usize = 16 + 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeSidecar {
    pub spacing_mm: [f64; 3],
    pub axial_axis: usize,
    #[serde(default)]
    pub provenance: String,
}

impl Default for VolumeSidecar {
    fn default() -> Self {
        VolumeSidecar {
            spacing_mm: [1.0; 3],
            axial_axis: 2,
            provenance: String::new(),
        }
    }
}

pub fn sidecar_path(volume_path: &Path) -> PathBuf {
    volume_path.with_extension("json")
}

fn create_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    Ok(())
}

/// Writes `bytes` to a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    create_parent(path)?;
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("")
    ));
    let mut file = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    file.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    file.sync_all().map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn encode_volume(dims: Dims, data: &[f64]) -> Vec<u8> {
    let mut bytes = Vec::with_capacity(HEADER_LEN + 4 * data.len());
    bytes.extend_from_slice(VOLUME_MAGIC);
    bytes.extend_from_slice(&VOLUME_VERSION.to_le_bytes());
    for n in dims {
        bytes.extend_from_slice(&(n as u32).to_le_bytes());
    }
    for &v in data {
        bytes.extend_from_slice(&(v as f32).to_le_bytes());
    }
    bytes
}

pub fn decode_volume(path: &Path, bytes: &[u8]) -> Result<(Dims, Vec<f64>)> {
    if bytes.len() < HEADER_LEN || &bytes[..12] != VOLUME_MAGIC {
        return Err(Error::format(path, "not a volume file"));
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
    let version = word(12);
    if version != VOLUME_VERSION {
        return Err(Error::format(path, format!("unsupported version {version}")));
    }
    let dims = [word(16) as usize, word(20) as usize, word(24) as usize];
    let d = voxel_count(dims);
    if bytes.len() != HEADER_LEN + 4 * d {
        return Err(Error::format(
            path,
            format!("expected {} voxels, file holds {} bytes", d, bytes.len()),
        ));
    }
    let data = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    Ok((dims, data))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::format(path, e))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::format(path, e))
}

/// Writes the volume (as `f32`) and its sidecar.
pub fn write_volume(path: &Path, volume: &ImageVolume, provenance: &str) -> Result<()> {
    write_atomic(path, &encode_volume(volume.dims(), volume.data()))?;
    write_json(
        &sidecar_path(path),
        &VolumeSidecar {
            spacing_mm: volume.spacing_mm(),
            axial_axis: volume.axial_axis(),
            provenance: provenance.to_string(),
        },
    )
}

fn read_raw(path: &Path) -> Result<(Dims, Vec<f64>, VolumeSidecar)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let (dims, data) = decode_volume(path, &bytes)?;
    let side = sidecar_path(path);
    let sidecar = if side.exists() {
        read_json(&side)?
    } else {
        VolumeSidecar::default()
    };
    Ok((dims, data, sidecar))
}

pub fn read_volume(path: &Path) -> Result<ImageVolume> {
    let (dims, data, sidecar) = read_raw(path)?;
    ImageVolume::with_axial_axis(dims, sidecar.spacing_mm, sidecar.axial_axis, data).map_err(|e| Error::format(path, e))
}

pub fn write_weight_map(path: &Path, map: &WeightMap, provenance: &str) -> Result<()> {
    write_atomic(path, &encode_volume(map.dims, &map.data))?;
    write_json(
        &sidecar_path(path),
        &VolumeSidecar {
            spacing_mm: map.spacing_mm,
            axial_axis: 2,
            provenance: provenance.to_string(),
        },
    )
}

pub fn read_weight_map(path: &Path) -> Result<WeightMap> {
    let (dims, data, sidecar) = read_raw(path)?;
    Ok(WeightMap {
        dims,
        spacing_mm: sidecar.spacing_mm,
        data,
    })
}

pub fn write_mask(path: &Path, mask: &RegionMask) -> Result<()> {
    let text = serde_json::to_string(mask).map_err(|e| Error::format(path, e))?;
    write_atomic(path, format!("{text}\n").as_bytes())
}

pub fn read_mask(path: &Path) -> Result<RegionMask> {
    read_json(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn volume_round_trip_is_exact_for_f32_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.vol");
        let data: Vec<f64> = (0..24).map(|i| (i as f32 * 0.37) as f64).collect();
        let v = ImageVolume::with_axial_axis([2, 3, 4], [2.0, 2.0, 3.5], 1, data).unwrap();
        write_volume(&path, &v, "test").unwrap();
        assert_eq!(read_volume(&path).unwrap(), v);
        let bytes = fs::read(&path).unwrap();
        assert_eq!(bytes.len(), 16 + 12 + 24 * 4);
        assert_eq!(&bytes[16..20], &2u32.to_le_bytes());
    }

    #[test]
    fn rejects_truncated_and_foreign_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.vol");
        let mut bytes = encode_volume([2, 2, 2], &[1.0; 8]);
        bytes.pop();
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(read_volume(&path), Err(Error::Format { .. })));
        fs::write(&path, b"hello").unwrap();
        assert!(read_volume(&path).is_err());
        let missing = read_volume(&dir.path().join("nope.vol")).unwrap_err();
        assert!(missing.to_string().contains("nope.vol"));
    }

    #[test]
    fn mask_file_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        let mask = RegionMask::new([3, 2, 1], vec![4, 1]).unwrap();
        write_mask(&path, &mask).unwrap();
        assert_eq!(
            fs::read_to_string(&path).unwrap(),
            "{\"dims\":[3,2,1],\"indices\":[1,4]}\n"
        );
        assert_eq!(read_mask(&path).unwrap(), mask);
    }

    #[test]
    fn weight_maps_may_be_signed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.vol");
        let mut map = WeightMap::zeros([2, 1, 1], [1.0; 3]);
        map.data[1] = -0.25;
        write_weight_map(&path, &map, "weights").unwrap();
        assert_eq!(read_weight_map(&path).unwrap(), map);
    }
}
