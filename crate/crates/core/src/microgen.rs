//! Random microstructure generation by an adapted Poisson process.
//!
//! Fibers are placed one at a time: an integer midpoint is drawn uniformly
//! over the domain, the fiber properties are sampled (or fixed), and the
//! candidate is rejected if it overlaps a previously committed fiber on
//! the 1 um raster. Rectangles protruding past the domain edge are either
//! rejected or truncated, depending on [`BoundaryMode`]. Placement repeats
//! until the target fiber volume fraction is reached.

pub mod io;

use crate::error::{Error, Result};
use crate::stochastic::{
    rng_from_seed, sample_fiber_diameter, sample_fiber_length, sample_fiber_orientation,
    EllipticOrientationParams, NormalParams, OrientationSampler, WeibullParams,
};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// One placed fiber: integer midpoint [um], rectangle length x diameter
/// [um], orientation in radians within [-pi/2, pi/2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fiber {
    pub center: (i32, i32),
    pub length: f64,
    pub diameter: f64,
    pub orientation: f64,
}

impl Fiber {
    /// Corner coordinates of the rotated rectangle.
    pub fn corners(&self) -> [(f64, f64); 4] {
        let (s, c) = self.orientation.sin_cos();
        let (hu, hv) = (0.5 * self.length, 0.5 * self.diameter);
        let (cx, cy) = (self.center.0 as f64, self.center.1 as f64);
        let mut out = [(0.0, 0.0); 4];
        for (i, (su, sv)) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
            .iter()
            .enumerate()
        {
            out[i] = (
                cx + su * hu * c - sv * hv * s,
                cy + su * hu * s + sv * hv * c,
            );
        }
        out
    }

    fn inside(&self, width: u32, height: u32) -> bool {
        self.corners().iter().all(|&(x, y)| {
            x >= 0.0 && x <= width as f64 && y >= 0.0 && y <= height as f64
        })
    }

    /// Whether the center of cell (x, y) lies inside the fiber rectangle.
    fn covers_cell(&self, x: u32, y: u32) -> bool {
        let (s, c) = self.orientation.sin_cos();
        let dx = x as f64 + 0.5 - self.center.0 as f64;
        let dy = y as f64 + 0.5 - self.center.1 as f64;
        let u = c * dx + s * dy;
        let v = -s * dx + c * dy;
        u.abs() <= 0.5 * self.length && v.abs() <= 0.5 * self.diameter
    }

    /// Raster cells whose centers lie inside the fiber rectangle, or None
    /// if the rectangle is not fully inside the domain.
    pub fn raster_cells(&self, width: u32, height: u32) -> Option<Vec<(u32, u32)>> {
        if !self.inside(width, height) {
            return None;
        }
        self.raster_cells_clipped(width, height)
    }

    /// Raster cells whose centers lie inside the fiber rectangle,
    /// truncated at the domain boundary; parts of the rectangle outside
    /// the raster are silently dropped.
    pub fn raster_cells_clipped(&self, width: u32, height: u32) -> Option<Vec<(u32, u32)>> {
        if !(self.length > 0.0 && self.diameter > 0.0) {
            return None;
        }
        let (s, c) = self.orientation.sin_cos();
        let hx = 0.5 * (self.length * c.abs() + self.diameter * s.abs());
        let hy = 0.5 * (self.length * s.abs() + self.diameter * c.abs());
        let x0 = ((self.center.0 as f64 - hx).floor().max(0.0)) as u32;
        let x1 = ((self.center.0 as f64 + hx).ceil() as u32).min(width - 1);
        let y0 = ((self.center.1 as f64 - hy).floor().max(0.0)) as u32;
        let y1 = ((self.center.1 as f64 + hy).ceil() as u32).min(height - 1);
        let mut cells = Vec::new();
        for y in y0..=y1 {
            for x in x0..=x1 {
                if self.covers_cell(x, y) {
                    cells.push((x, y));
                }
            }
        }
        Some(cells)
    }
}

/// Phase raster at 1 um pitch; false = matrix, true = fiber.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub width: u32,
    pub height: u32,
    cells: Vec<u8>,
}

impl PhaseGrid {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            cells: vec![0; (width as usize) * (height as usize)],
        }
    }

    #[inline]
    pub fn is_fiber(&self, x: u32, y: u32) -> bool {
        self.cells[y as usize * self.width as usize + x as usize] != 0
    }

    #[inline]
    fn set_fiber(&mut self, x: u32, y: u32) {
        self.cells[y as usize * self.width as usize + x as usize] = 1;
    }

    pub fn fiber_cell_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c != 0).count()
    }

    pub(crate) fn raw_cells(&self) -> &[u8] {
        &self.cells
    }

    /// Builds a grid from an externally produced raster; `cells` is
    /// row-major with nonzero marking fiber.
    pub fn from_raw(width: u32, height: u32, cells: Vec<u8>) -> Result<Self> {
        if cells.len() != width as usize * height as usize {
            return Err(Error::Format("raster size mismatch".into()));
        }
        Ok(Self {
            width,
            height,
            cells,
        })
    }
}

/// Marks every cell covered by the fiber; fails without mutating anything
/// if a covered cell is already fiber (the rejection test) or the fiber
/// leaves the domain.
pub fn rasterize_fiber(fiber: &Fiber, grid: &mut PhaseGrid) -> Result<usize> {
    let cells = fiber
        .raster_cells(grid.width, grid.height)
        .ok_or_else(|| Error::Geometry("fiber rectangle leaves the domain".into()))?;
    commit_cells(&cells, grid)
}

/// Like [`rasterize_fiber`] but truncates the fiber footprint at the
/// domain boundary instead of rejecting protruding rectangles.
pub fn rasterize_fiber_clipped(fiber: &Fiber, grid: &mut PhaseGrid) -> Result<usize> {
    let cells = fiber
        .raster_cells_clipped(grid.width, grid.height)
        .ok_or_else(|| Error::Geometry("degenerate fiber rectangle".into()))?;
    commit_cells(&cells, grid)
}

fn commit_cells(cells: &[(u32, u32)], grid: &mut PhaseGrid) -> Result<usize> {
    if cells.iter().any(|&(x, y)| grid.is_fiber(x, y)) {
        return Err(Error::Geometry("fiber overlaps an existing fiber".into()));
    }
    for &(x, y) in cells {
        grid.set_fiber(x, y);
    }
    Ok(cells.len())
}

/// Treatment of fibers whose rectangle extends past the domain edge.
/// Midpoints are always drawn inside the domain; the mode decides what
/// happens to the protruding part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum BoundaryMode {
    /// Reject candidates that leave the domain; every committed fiber
    /// lies fully inside. Leaves a fiber-depleted rim of about half a
    /// fiber length and correspondingly enriches the interior, since the
    /// fraction target is accounted over the whole raster.
    #[default]
    Contained,
    /// Rasterize only the in-domain part of the rectangle. Keeps the
    /// fiber coverage nearly stationary up to the boundary.
    Clipped,
}

/// Sampled-or-fixed mode of one fiber property.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PropertyMode {
    Sampled,
    Fixed(f64),
}

/// Configuration of one microstructure realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    /// Domain width [um].
    pub width: u32,
    /// Domain height [um].
    pub height: u32,
    pub target_volume_fraction: f64,
    pub length: PropertyMode,
    pub diameter: PropertyMode,
    pub orientation: PropertyMode,
    pub length_distribution: WeibullParams,
    pub diameter_distribution: NormalParams,
    pub orientation_distribution: EllipticOrientationParams,
    pub max_consecutive_rejections: usize,
    #[serde(default)]
    pub boundary: BoundaryMode,
    pub seed: u64,
}

/// Guard against non-terminating placement at high fractions.
pub const JAMMING_FRACTION_LIMIT: f64 = 0.35;

impl GenerationConfig {
    /// All properties sampled from the compound's measured distributions.
    pub fn all_sampled(width: u32, height: u32, target: f64, seed: u64) -> Self {
        Self {
            width,
            height,
            target_volume_fraction: target,
            length: PropertyMode::Sampled,
            diameter: PropertyMode::Sampled,
            orientation: PropertyMode::Sampled,
            length_distribution: crate::presets::fiber_length_distribution(),
            diameter_distribution: crate::presets::fiber_diameter_distribution(),
            orientation_distribution: crate::presets::fiber_orientation_distribution(),
            max_consecutive_rejections: 50_000,
            boundary: BoundaryMode::default(),
            seed,
        }
    }

    /// Mean fiber geometry, aligned with the x axis.
    pub fn aligned_mean_fibers(width: u32, height: u32, target: f64, seed: u64) -> Self {
        Self {
            length: PropertyMode::Fixed(crate::presets::MEAN_FIBER_LENGTH),
            diameter: PropertyMode::Fixed(crate::presets::MEAN_FIBER_DIAMETER),
            orientation: PropertyMode::Fixed(0.0),
            ..Self::all_sampled(width, height, target, seed)
        }
    }

    fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::Domain("domain must be non-empty".into()));
        }
        if !(0.0..=JAMMING_FRACTION_LIMIT).contains(&self.target_volume_fraction) {
            return Err(Error::Domain(format!(
                "target fraction {} outside (0, {JAMMING_FRACTION_LIMIT}]",
                self.target_volume_fraction
            )));
        }
        Ok(())
    }
}

/// A generated microstructure: fiber list plus the 1 um phase raster.
#[derive(Debug, Clone, PartialEq)]
pub struct Microstructure {
    pub width: u32,
    pub height: u32,
    pub grid: PhaseGrid,
    pub fibers: Vec<Fiber>,
    pub achieved_volume_fraction: f64,
    pub seed: u64,
}

/// Adapted Poisson placement until the target fraction is reached.
pub fn generate_microstructure(cfg: &GenerationConfig) -> Result<Microstructure> {
    cfg.validate()?;
    let mut rng = rng_from_seed(cfg.seed);
    let orientation_sampler = match cfg.orientation {
        PropertyMode::Sampled => Some(OrientationSampler::new(&cfg.orientation_distribution)),
        PropertyMode::Fixed(_) => None,
    };
    let mut grid = PhaseGrid::new(cfg.width, cfg.height);
    let mut fibers = Vec::new();
    let total_cells = cfg.width as f64 * cfg.height as f64;
    let mut fiber_cells = 0usize;
    let mut rejections = 0usize;

    while (fiber_cells as f64 / total_cells) < cfg.target_volume_fraction {
        // Every attempt redraws midpoint and all properties.
        let center = (
            rng.gen_range(0..=cfg.width as i32),
            rng.gen_range(0..=cfg.height as i32),
        );
        let length = match cfg.length {
            PropertyMode::Fixed(v) => v,
            PropertyMode::Sampled => sample_fiber_length(&mut rng, &cfg.length_distribution),
        };
        let diameter = match cfg.diameter {
            PropertyMode::Fixed(v) => v,
            PropertyMode::Sampled => sample_fiber_diameter(&mut rng, &cfg.diameter_distribution),
        };
        let orientation = match cfg.orientation {
            PropertyMode::Fixed(v) => v,
            PropertyMode::Sampled => {
                sample_fiber_orientation(&mut rng, orientation_sampler.as_ref().unwrap())
            }
        };
        let fiber = Fiber {
            center,
            length,
            diameter,
            orientation,
        };
        let rasterized = match cfg.boundary {
            BoundaryMode::Contained => rasterize_fiber(&fiber, &mut grid),
            BoundaryMode::Clipped => rasterize_fiber_clipped(&fiber, &mut grid),
        };
        match rasterized {
            Ok(added) => {
                fiber_cells += added;
                fibers.push(fiber);
                rejections = 0;
            }
            Err(_) => {
                rejections += 1;
                if rejections >= cfg.max_consecutive_rejections {
                    let achieved = fiber_cells as f64 / total_cells;
                    if achieved >= 0.9 * cfg.target_volume_fraction {
                        break;
                    }
                    return Err(Error::Jamming {
                        rejections,
                        achieved,
                        target: cfg.target_volume_fraction,
                    });
                }
            }
        }
    }

    Ok(Microstructure {
        width: cfg.width,
        height: cfg.height,
        achieved_volume_fraction: fiber_cells as f64 / total_cells,
        grid,
        fibers,
        seed: cfg.seed,
    })
}

/// Axis-aligned region in raster coordinates [um].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub x0: u32,
    pub y0: u32,
    pub width: u32,
    pub height: u32,
}

/// Fiber-cell fraction of a rectangular region of the raster.
pub fn area_fraction(grid: &PhaseGrid, region: Region) -> Result<f64> {
    if region.x0 + region.width > grid.width || region.y0 + region.height > grid.height {
        return Err(Error::Geometry("region leaves the raster".into()));
    }
    let mut count = 0usize;
    for y in region.y0..region.y0 + region.height {
        for x in region.x0..region.x0 + region.width {
            if grid.is_fiber(x, y) {
                count += 1;
            }
        }
    }
    Ok(count as f64 / (region.width as f64 * region.height as f64))
}

/// Read-only square sub-window of a microstructure raster with local
/// coordinates.
#[derive(Debug, Clone, Copy)]
pub struct GridView<'a> {
    grid: &'a PhaseGrid,
    pub x0: u32,
    pub y0: u32,
    pub size: u32,
}

impl<'a> GridView<'a> {
    /// View of the square `size` region of `grid` with origin (x0, y0).
    pub fn new(grid: &'a PhaseGrid, x0: u32, y0: u32, size: u32) -> Result<Self> {
        if x0 + size > grid.width || y0 + size > grid.height {
            return Err(Error::Geometry("view leaves the grid".into()));
        }
        Ok(Self { grid, x0, y0, size })
    }

    #[inline]
    pub fn is_fiber(&self, x: u32, y: u32) -> bool {
        debug_assert!(x < self.size && y < self.size);
        self.grid.is_fiber(self.x0 + x, self.y0 + y)
    }

    pub fn fiber_fraction(&self) -> f64 {
        let mut count = 0usize;
        for y in 0..self.size {
            for x in 0..self.size {
                if self.is_fiber(x, y) {
                    count += 1;
                }
            }
        }
        count as f64 / (self.size as f64 * self.size as f64)
    }
}

/// Square window of edge `size` centered at `center` (window origin is
/// center - size/2, so `size` must be even for an integer origin).
pub fn extract_window(m: &Microstructure, center: (u32, u32), size: u32) -> Result<GridView<'_>> {
    let half = size / 2;
    if !size.is_multiple_of(2) {
        return Err(Error::Geometry("window size must be even".into()));
    }
    if center.0 < half || center.1 < half {
        return Err(Error::Geometry("window leaves the domain".into()));
    }
    let (x0, y0) = (center.0 - half, center.1 - half);
    if x0 + size > m.width || y0 + size > m.height {
        return Err(Error::Geometry("window leaves the domain".into()));
    }
    Ok(GridView {
        grid: &m.grid,
        x0,
        y0,
        size,
    })
}
