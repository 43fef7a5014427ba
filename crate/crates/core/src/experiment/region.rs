use std::f64::consts::PI;

use super::output::SvgCanvas;
use crate::dmp::{ConditionForms, Tolerance};
use crate::error::{Error, Result};
use crate::geometry2d::{Angle, Vec2};

/// Cells of `(0, pi)^2` where the symmetric Delaunay-type condition holds,
/// sampled at cell centres. Column `i` is the angle `alpha'` in `K'`, row
/// `j` the angle `alpha` in `K`.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionMap {
    /// `det D_K' / det D_K`.
    pub det_ratio: f64,
    pub grid: usize,
    cells: Vec<bool>,
}

impl RegionMap {
    pub fn center(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * PI / self.grid as f64
    }

    /// Whether the cell with `alpha'` index `i` and `alpha` index `j` is
    /// inside the region.
    pub fn inside(&self, i: usize, j: usize) -> bool {
        self.cells[j * self.grid + i]
    }

    /// Row-major cell flags, rows indexed by `alpha`.
    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    /// Same map with the two angles swapped.
    pub fn transposed(&self) -> RegionMap {
        let g = self.grid;
        let mut cells = vec![false; g * g];
        for j in 0..g {
            for i in 0..g {
                cells[i * g + j] = self.inside(i, j);
            }
        }
        RegionMap {
            det_ratio: 1.0 / self.det_ratio,
            grid: g,
            cells,
        }
    }

    /// Per column, the number of inside cells counted up from `alpha = 0`
    /// until the first outside one. The region lies below this curve.
    pub fn column_heights(&self) -> Vec<usize> {
        (0..self.grid)
            .map(|i| (0..self.grid).take_while(|&j| self.inside(i, j)).count())
            .collect()
    }

    /// The upper boundary as `(alpha', alpha)` points, one per column.
    pub fn boundary(&self) -> Vec<(f64, f64)> {
        let h = PI / self.grid as f64;
        self.column_heights()
            .into_iter()
            .enumerate()
            .map(|(i, n)| (self.center(i), n as f64 * h))
            .collect()
    }

    pub fn to_svg(&self) -> String {
        let mut c = SvgCanvas::new(0.0, 0.0, PI, PI);
        let g = self.grid as f64;
        let h = PI / g;
        for j in 0..self.grid {
            for i in 0..self.grid {
                if self.inside(i, j) {
                    c.rect(i as f64 * h, j as f64 * h, h, h, "#cfe0f5");
                }
            }
        }
        let pts: Vec<Vec2> = self.boundary().into_iter().map(|(x, y)| Vec2::new(x, y)).collect();
        c.polyline(&pts, "#1f4e9a", 2.0);
        c.frame();
        c.label_axes("alpha' / pi", "alpha / pi");
        c.finish()
    }
}

pub fn sample_feasibility_region(det_ratio: f64, grid: usize) -> Result<RegionMap> {
    if !(det_ratio > 0.0 && det_ratio.is_finite()) {
        return Err(Error::InvalidParameter(format!("det_ratio must be positive, got {det_ratio}")));
    }
    if grid < 16 {
        return Err(Error::InvalidParameter(format!("grid must be at least 16, got {grid}")));
    }
    let tol = Tolerance::default();
    let center = |k: usize| (k as f64 + 0.5) * PI / grid as f64;
    let mut cells = Vec::with_capacity(grid * grid);
    for j in 0..grid {
        for i in 0..grid {
            let forms = ConditionForms::new(
                Angle::from_radians(center(j)),
                1.0,
                Angle::from_radians(center(i)),
                det_ratio,
            );
            cells.push(forms.symmetric_verdict(&tol));
        }
    }
    Ok(RegionMap {
        det_ratio,
        grid,
        cells,
    })
}
