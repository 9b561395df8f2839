//! File formats: RVOL volumes and masks, OBJ meshes, PPM/PGM images and
//! JSON documents.
//!
//! RVOL is a small ASCII header followed by raw little-endian voxels:
//!
//! ```text
//! RVOL 1
//! dims nx ny nz
//! spacing sx sy sz
//! origin ox oy oz
//! dtype int16
//! data raw-le
//!
//! <nx*ny*nz values, x fastest>
//! ```
//!
//! Masks use `dtype uint8` with values 0/1.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{BinaryMask, TriMesh};
use crate::volume::{Grid, Volume};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dtype {
    Int16,
    Uint8,
}

fn write_header(w: &mut impl Write, grid: &Grid, dtype: Dtype) -> std::io::Result<()> {
    let [nx, ny, nz] = grid.dims;
    let [sx, sy, sz] = grid.spacing;
    let [ox, oy, oz] = grid.origin;
    writeln!(w, "RVOL 1")?;
    writeln!(w, "dims {nx} {ny} {nz}")?;
    writeln!(w, "spacing {sx} {sy} {sz}")?;
    writeln!(w, "origin {ox} {oy} {oz}")?;
    let name = match dtype {
        Dtype::Int16 => "int16",
        Dtype::Uint8 => "uint8",
    };
    writeln!(w, "dtype {name}")?;
    writeln!(w, "data raw-le")?;
    writeln!(w)
}

fn parse_triple<T: std::str::FromStr>(rest: &str, key: &str) -> Result<[T; 3]> {
    let parts: Vec<&str> = rest.split_whitespace().collect();
    if parts.len() != 3 {
        return Err(Error::format("RVOL header", format!("`{key}` needs 3 values")));
    }
    let mut out = Vec::with_capacity(3);
    for p in parts {
        out.push(
            p.parse::<T>()
                .map_err(|_| Error::format("RVOL header", format!("bad `{key}` value `{p}`")))?,
        );
    }
    let mut it = out.into_iter();
    Ok([it.next().unwrap(), it.next().unwrap(), it.next().unwrap()])
}

fn read_header(r: &mut impl BufRead) -> Result<(Grid, Dtype)> {
    let mut lines = Vec::new();
    loop {
        let mut line = String::new();
        let n = r
            .read_line(&mut line)
            .map_err(|e| Error::format("RVOL header", e.to_string()))?;
        if n == 0 {
            return Err(Error::format("RVOL header", "missing blank line before data"));
        }
        let line = line.trim_end_matches(['\n', '\r']).to_string();
        if line.is_empty() {
            break;
        }
        lines.push(line);
    }
    if lines.first().map(|l| l.trim()) != Some("RVOL 1") {
        return Err(Error::format("RVOL header", "expected `RVOL 1` magic line"));
    }
    let (mut dims, mut spacing, mut origin, mut dtype, mut data) = (None, None, None, None, false);
    for line in &lines[1..] {
        let (key, rest) = line.split_once(' ').unwrap_or((line.as_str(), ""));
        match key {
            "dims" => dims = Some(parse_triple::<usize>(rest, key)?),
            "spacing" => spacing = Some(parse_triple::<f64>(rest, key)?),
            "origin" => origin = Some(parse_triple::<f64>(rest, key)?),
            "dtype" => {
                dtype = Some(match rest.trim() {
                    "int16" => Dtype::Int16,
                    "uint8" => Dtype::Uint8,
                    other => {
                        return Err(Error::format("RVOL header", format!("unsupported dtype `{other}`")))
                    }
                })
            }
            "data" => {
                if rest.trim() != "raw-le" {
                    return Err(Error::format("RVOL header", "only `data raw-le` is supported"));
                }
                data = true;
            }
            other => return Err(Error::format("RVOL header", format!("unknown key `{other}`"))),
        }
    }
    let missing = |k: &str| Error::format("RVOL header", format!("missing `{k}`"));
    if !data {
        return Err(missing("data"));
    }
    let grid = Grid::new(
        dims.ok_or_else(|| missing("dims"))?,
        spacing.ok_or_else(|| missing("spacing"))?,
        origin.ok_or_else(|| missing("origin"))?,
    )
    .map_err(|e| Error::format("RVOL header", e.to_string()))?;
    Ok((grid, dtype.ok_or_else(|| missing("dtype"))?))
}

/// Write a volume as int16 HU. Values are rounded and saturated to the int16
/// range.
pub fn write_volume(path: impl AsRef<Path>, vol: &Volume) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    let res = (|| {
        write_header(&mut w, vol.grid(), Dtype::Int16)?;
        for &v in vol.data() {
            let q = v.round().clamp(i16::MIN as f64, i16::MAX as f64) as i16;
            w.write_all(&q.to_le_bytes())?;
        }
        w.flush()
    })();
    res.map_err(|e| Error::io(path, e))
}

pub fn read_volume(path: impl AsRef<Path>) -> Result<Volume> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(f);
    let (grid, dtype) = read_header(&mut r)?;
    let mut raw = Vec::new();
    r.read_to_end(&mut raw).map_err(|e| Error::io(path, e))?;
    let data = match dtype {
        Dtype::Int16 => {
            if raw.len() != 2 * grid.len() {
                return Err(Error::format(
                    "RVOL data",
                    format!("expected {} bytes, found {}", 2 * grid.len(), raw.len()),
                ));
            }
            raw.chunks_exact(2)
                .map(|c| i16::from_le_bytes([c[0], c[1]]) as f64)
                .collect()
        }
        Dtype::Uint8 => {
            if raw.len() != grid.len() {
                return Err(Error::format(
                    "RVOL data",
                    format!("expected {} bytes, found {}", grid.len(), raw.len()),
                ));
            }
            raw.iter().map(|&b| b as f64).collect()
        }
    };
    Volume::new(grid, data)
}

pub fn write_mask(path: impl AsRef<Path>, mask: &BinaryMask) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    let res = (|| {
        write_header(&mut w, mask.grid(), Dtype::Uint8)?;
        let bytes: Vec<u8> = mask.bits().iter().map(|&b| b as u8).collect();
        w.write_all(&bytes)?;
        w.flush()
    })();
    res.map_err(|e| Error::io(path, e))
}

pub fn read_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(f);
    let (grid, dtype) = read_header(&mut r)?;
    if dtype != Dtype::Uint8 {
        return Err(Error::format("RVOL mask", "masks must use dtype uint8"));
    }
    let mut raw = Vec::new();
    r.read_to_end(&mut raw).map_err(|e| Error::io(path, e))?;
    if raw.len() != grid.len() {
        return Err(Error::format(
            "RVOL data",
            format!("expected {} bytes, found {}", grid.len(), raw.len()),
        ));
    }
    if let Some(b) = raw.iter().find(|&&b| b > 1) {
        return Err(Error::format("RVOL mask", format!("mask value {b} is not 0/1")));
    }
    BinaryMask::from_bits(grid, raw.iter().map(|&b| b == 1).collect())
}

/// ASCII OBJ with `v` and `f` records (1-based indices, mm units).
pub fn write_obj(path: impl AsRef<Path>, mesh: &TriMesh) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    let res = (|| {
        for v in mesh.vertices() {
            writeln!(w, "v {} {} {}", v.x, v.y, v.z)?;
        }
        for t in mesh.triangles() {
            writeln!(w, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
        }
        w.flush()
    })();
    res.map_err(|e| Error::io(path, e))
}

pub fn read_obj(path: impl AsRef<Path>) -> Result<TriMesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut verts = Vec::new();
    let mut tris = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let mut it = line.split_whitespace();
        let bad = || Error::format("OBJ", format!("line {}: `{line}`", n + 1));
        match it.next() {
            Some("v") => {
                let c: Vec<f64> = it.map(|t| t.parse().map_err(|_| bad())).collect::<Result<_>>()?;
                if c.len() != 3 {
                    return Err(bad());
                }
                verts.push(crate::Vec3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let c: Vec<usize> = it
                    .map(|t| {
                        t.split('/')
                            .next()
                            .and_then(|s| s.parse::<usize>().ok())
                            .filter(|&i| i >= 1)
                            .map(|i| i - 1)
                            .ok_or_else(bad)
                    })
                    .collect::<Result<_>>()?;
                if c.len() != 3 {
                    return Err(bad());
                }
                tris.push([c[0], c[1], c[2]]);
            }
            _ => {}
        }
    }
    TriMesh::new(verts, tris)
}

/// Binary PPM (P6).
pub fn write_ppm(path: impl AsRef<Path>, width: usize, height: usize, rgb: &[[u8; 3]]) -> Result<()> {
    let path = path.as_ref();
    if rgb.len() != width * height {
        return Err(Error::InvalidParam("pixel count does not match image size".into()));
    }
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    let res = (|| {
        write!(w, "P6\n{width} {height}\n255\n")?;
        for px in rgb {
            w.write_all(px)?;
        }
        w.flush()
    })();
    res.map_err(|e| Error::io(path, e))
}

/// Binary PGM (P5).
pub fn write_pgm(path: impl AsRef<Path>, width: usize, height: usize, gray: &[u8]) -> Result<()> {
    let path = path.as_ref();
    if gray.len() != width * height {
        return Err(Error::InvalidParam("pixel count does not match image size".into()));
    }
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    let res = (|| {
        write!(w, "P5\n{width} {height}\n255\n")?;
        w.write_all(gray)?;
        w.flush()
    })();
    res.map_err(|e| Error::io(path, e))
}

/// Read a binary PPM written by [`write_ppm`].
pub fn read_ppm(path: impl AsRef<Path>) -> Result<(usize, usize, Vec<[u8; 3]>)> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::format("PPM", "truncated header"));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    pos += 1;
    if fields[0] != "P6" || fields[3] != "255" {
        return Err(Error::format("PPM", "expected P6 with maxval 255"));
    }
    let w: usize = fields[1].parse().map_err(|_| Error::format("PPM", "bad width"))?;
    let h: usize = fields[2].parse().map_err(|_| Error::format("PPM", "bad height"))?;
    let body = bytes.get(pos..).unwrap_or_default();
    if body.len() != 3 * w * h {
        return Err(Error::format("PPM", "pixel data length mismatch"));
    }
    Ok((w, h, body.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect()))
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn volume_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid::new([3, 4, 2], [0.5, 0.75, 2.0], [-1.0, 0.25, 10.0]).unwrap();
        let vol = Volume::from_fn(grid, |p| (p.x * 100.0 + p.y * 10.0 - p.z).round()).unwrap();
        let path = dir.path().join("v.rvol");
        write_volume(&path, &vol).unwrap();
        assert_eq!(read_volume(&path).unwrap(), vol);
    }

    #[test]
    fn header_is_ascii_and_exact() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid::isotropic([2, 1, 1], 1.0);
        let vol = Volume::new(grid, vec![-50.0, 300.0]).unwrap();
        let path = dir.path().join("v.rvol");
        write_volume(&path, &vol).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let header = b"RVOL 1\ndims 2 1 1\nspacing 1 1 1\norigin 0 0 0\ndtype int16\ndata raw-le\n\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(&bytes[header.len()..], &[0xce, 0xff, 0x2c, 0x01]);
    }

    #[test]
    fn rejects_truncated_data() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.rvol");
        std::fs::write(
            &path,
            b"RVOL 1\ndims 2 2 2\nspacing 1 1 1\norigin 0 0 0\ndtype int16\ndata raw-le\n\n\x00\x00",
        )
        .unwrap();
        assert!(matches!(read_volume(&path), Err(Error::Format { .. })));
        assert!(matches!(read_volume(dir.path().join("missing")), Err(Error::Io { .. })));
    }
}
