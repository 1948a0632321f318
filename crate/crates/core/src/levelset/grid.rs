//! Regular sample grids over a window.

use rayon::prelude::*;

use super::{LevelSetError, Window};
use crate::Potential;

/// Sample lattice `(nx + 1) × (ny + 1)` covering a window; cell `(i, j)` spans samples
/// `(i..=i+1, j..=j+1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub window: Window,
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
}

impl GridSpec {
    /// Cells no larger than `shortest_period / cells_per_period` in both directions.
    pub fn for_potential(
        p: &Potential,
        window: Window,
        cells_per_period: usize,
    ) -> Result<Self, LevelSetError> {
        if cells_per_period < 8 {
            return Err(LevelSetError::ResolutionTooLow(cells_per_period));
        }
        let h = p.shortest_period() / cells_per_period as f64;
        Ok(Self::with_cell_size(window, h))
    }

    pub fn with_cell_size(window: Window, h: f64) -> Self {
        let nx = ((2.0 * window.half_extent[0] / h).ceil() as usize).max(1);
        let ny = ((2.0 * window.half_extent[1] / h).ceil() as usize).max(1);
        Self {
            window,
            nx,
            ny,
            hx: 2.0 * window.half_extent[0] / nx as f64,
            hy: 2.0 * window.half_extent[1] / ny as f64,
        }
    }

    pub fn samples(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.window.center[0] - self.window.half_extent[0] + i as f64 * self.hx
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        self.window.center[1] - self.window.half_extent[1] + j as f64 * self.hy
    }

    #[inline]
    pub fn point(&self, i: usize, j: usize) -> [f64; 2] {
        [self.x(i), self.y(j)]
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    /// Central sub-grid covering the window scaled by `1/2` (same cell size).
    pub fn central_half(&self) -> (GridSpec, usize, usize) {
        let nx = self.nx / 2;
        let ny = self.ny / 2;
        let i0 = (self.nx - nx) / 2;
        let j0 = (self.ny - ny) / 2;
        let x0 = self.x(i0);
        let y0 = self.y(j0);
        let half = [nx as f64 * self.hx / 2.0, ny as f64 * self.hy / 2.0];
        let window = Window {
            center: [x0 + half[0], y0 + half[1]],
            half_extent: half,
        };
        (
            GridSpec {
                window,
                nx,
                ny,
                hx: self.hx,
                hy: self.hy,
            },
            i0,
            j0,
        )
    }
}

/// Potential values on a [`GridSpec`], row-major in `j`.
#[derive(Debug, Clone)]
pub struct ValueGrid {
    pub spec: GridSpec,
    pub values: Vec<f64>,
}

impl ValueGrid {
    /// Samples `V` using the product form `cos(a x + b y + c) = cos(a x) cos(b y + c) −
    /// sin(a x) sin(b y + c)`; rows are independent so the banded parallel fill is
    /// bitwise identical to a sequential sweep.
    pub fn sample(p: &Potential, spec: GridSpec) -> Self {
        let nx1 = spec.nx + 1;
        let x_tables: Vec<(Vec<f64>, Vec<f64>)> = p
            .waves()
            .iter()
            .map(|w| {
                (0..nx1)
                    .map(|i| (w.k[0] * spec.x(i)).sin_cos())
                    .map(|(s, c)| (c, s))
                    .unzip()
            })
            .collect();
        let mut values = vec![0.0; spec.samples()];
        values.par_chunks_mut(nx1).enumerate().for_each(|(j, row)| {
            let y = spec.y(j);
            row.fill(p.constant());
            for (w, (cx, sx)) in p.waves().iter().zip(&x_tables) {
                let (sy, cy) = (w.k[1] * y + w.phase).sin_cos();
                let (ac, as_) = (w.amplitude * cy, w.amplitude * sy);
                for ((v, &c), &s) in row.iter_mut().zip(cx).zip(sx) {
                    *v += ac * c - as_ * s;
                }
            }
        });
        Self { spec, values }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.spec.index(i, j)]
    }
}
