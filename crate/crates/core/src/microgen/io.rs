//! Serialization of microstructures: a compact binary container and a
//! human-readable text export. Both round-trip bit-exactly.
//!
//! Binary layout (little endian):
//! magic "SFRC", version u16, width u32, height u32, seed u64,
//! fiber count u32, fibers (cx i32, cy i32, length f64, diameter f64,
//! orientation f64), then the raster bit-packed row-major, LSB first.

use super::{Fiber, Microstructure, PhaseGrid};
use crate::error::{Error, Result};
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"SFRC";
const VERSION: u16 = 1;

pub fn write_binary<W: Write>(m: &Microstructure, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&m.width.to_le_bytes())?;
    w.write_all(&m.height.to_le_bytes())?;
    w.write_all(&m.seed.to_le_bytes())?;
    w.write_all(&(m.fibers.len() as u32).to_le_bytes())?;
    for f in &m.fibers {
        w.write_all(&f.center.0.to_le_bytes())?;
        w.write_all(&f.center.1.to_le_bytes())?;
        w.write_all(&f.length.to_le_bytes())?;
        w.write_all(&f.diameter.to_le_bytes())?;
        w.write_all(&f.orientation.to_le_bytes())?;
    }
    let cells = m.grid.raw_cells();
    let mut packed = vec![0u8; cells.len().div_ceil(8)];
    for (i, &c) in cells.iter().enumerate() {
        if c != 0 {
            packed[i / 8] |= 1 << (i % 8);
        }
    }
    w.write_all(&packed)?;
    Ok(())
}

fn read_exact<R: Read, const N: usize>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)
        .map_err(|_| Error::Format("truncated container".into()))?;
    Ok(buf)
}

pub fn read_binary<R: Read>(mut r: R) -> Result<Microstructure> {
    if &read_exact::<_, 4>(&mut r)? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u16::from_le_bytes(read_exact(&mut r)?);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let width = u32::from_le_bytes(read_exact(&mut r)?);
    let height = u32::from_le_bytes(read_exact(&mut r)?);
    let seed = u64::from_le_bytes(read_exact(&mut r)?);
    let n = u32::from_le_bytes(read_exact(&mut r)?);
    let total = width as usize * height as usize;
    if width == 0 || height == 0 || total > (1usize << 28) {
        return Err(Error::Format("implausible raster dimensions".into()));
    }
    let mut fibers = Vec::with_capacity(n as usize);
    for _ in 0..n {
        fibers.push(Fiber {
            center: (
                i32::from_le_bytes(read_exact(&mut r)?),
                i32::from_le_bytes(read_exact(&mut r)?),
            ),
            length: f64::from_le_bytes(read_exact(&mut r)?),
            diameter: f64::from_le_bytes(read_exact(&mut r)?),
            orientation: f64::from_le_bytes(read_exact(&mut r)?),
        });
    }
    let mut packed = vec![0u8; total.div_ceil(8)];
    r.read_exact(&mut packed)
        .map_err(|_| Error::Format("truncated raster".into()))?;
    let mut cells = vec![0u8; total];
    for (i, c) in cells.iter_mut().enumerate() {
        *c = (packed[i / 8] >> (i % 8)) & 1;
    }
    let grid = PhaseGrid::from_raw(width, height, cells)?;
    let achieved = grid.fiber_cell_count() as f64 / total as f64;
    Ok(Microstructure {
        width,
        height,
        grid,
        fibers,
        achieved_volume_fraction: achieved,
        seed,
    })
}

pub fn save_binary(m: &Microstructure, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_binary(m, std::io::BufWriter::new(f))
}

pub fn load_binary(path: &Path) -> Result<Microstructure> {
    let f = std::fs::File::open(path)?;
    read_binary(std::io::BufReader::new(f))
}

/// Text export: header, fiber table (floats in shortest round-trip
/// decimal form), then the raster as rows of 0/1 characters.
pub fn write_text<W: Write>(m: &Microstructure, mut w: W) -> Result<()> {
    writeln!(w, "sfrc-microstructure v{VERSION}")?;
    writeln!(w, "width_um {}", m.width)?;
    writeln!(w, "height_um {}", m.height)?;
    writeln!(w, "seed {}", m.seed)?;
    writeln!(w, "fibers {}", m.fibers.len())?;
    for f in &m.fibers {
        writeln!(
            w,
            "{} {} {} {} {}",
            f.center.0, f.center.1, f.length, f.diameter, f.orientation
        )?;
    }
    writeln!(w, "raster")?;
    let mut line = String::with_capacity(m.width as usize);
    for y in 0..m.height {
        line.clear();
        for x in 0..m.width {
            line.push(if m.grid.is_fiber(x, y) { '1' } else { '0' });
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn read_text<R: Read>(mut r: R) -> Result<Microstructure> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let mut lines = text.lines();
    let bad = |what: &str| Error::Format(format!("text container: {what}"));
    if lines.next() != Some(&format!("sfrc-microstructure v{VERSION}")) {
        return Err(bad("bad header"));
    }
    let mut field = |name: &str| -> Result<String> {
        let line = lines.next().ok_or_else(|| bad("truncated"))?;
        line.strip_prefix(name)
            .and_then(|s| s.strip_prefix(' '))
            .map(str::to_owned)
            .ok_or_else(|| bad(name))
    };
    let width: u32 = field("width_um")?.parse().map_err(|_| bad("width_um"))?;
    let height: u32 = field("height_um")?.parse().map_err(|_| bad("height_um"))?;
    let seed: u64 = field("seed")?.parse().map_err(|_| bad("seed"))?;
    let n: usize = field("fibers")?.parse().map_err(|_| bad("fibers"))?;
    let mut fibers = Vec::with_capacity(n);
    for _ in 0..n {
        let line = lines.next().ok_or_else(|| bad("truncated fiber table"))?;
        let v: Vec<&str> = line.split_whitespace().collect();
        if v.len() != 5 {
            return Err(bad("fiber row"));
        }
        fibers.push(Fiber {
            center: (
                v[0].parse().map_err(|_| bad("fiber row"))?,
                v[1].parse().map_err(|_| bad("fiber row"))?,
            ),
            length: v[2].parse().map_err(|_| bad("fiber row"))?,
            diameter: v[3].parse().map_err(|_| bad("fiber row"))?,
            orientation: v[4].parse().map_err(|_| bad("fiber row"))?,
        });
    }
    if lines.next() != Some("raster") {
        return Err(bad("missing raster"));
    }
    let mut cells = Vec::with_capacity(width as usize * height as usize);
    for _ in 0..height {
        let line = lines.next().ok_or_else(|| bad("truncated raster"))?;
        if line.len() != width as usize {
            return Err(bad("raster row width"));
        }
        for ch in line.chars() {
            cells.push(match ch {
                '0' => 0,
                '1' => 1,
                _ => return Err(bad("raster character")),
            });
        }
    }
    let grid = PhaseGrid::from_raw(width, height, cells)?;
    let achieved = grid.fiber_cell_count() as f64 / (width as f64 * height as f64);
    Ok(Microstructure {
        width,
        height,
        grid,
        fibers,
        achieved_volume_fraction: achieved,
        seed,
    })
}

pub fn save_text(m: &Microstructure, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_text(m, std::io::BufWriter::new(f))
}

pub fn load_text(path: &Path) -> Result<Microstructure> {
    let f = std::fs::File::open(path)?;
    read_text(std::io::BufReader::new(f))
}
