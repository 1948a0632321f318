//! Sublevel regions `{V ≤ ε}`: labeling and spanning (percolation) tests.

use serde::{Deserialize, Serialize};

use super::grid::{GridSpec, ValueGrid};
use super::{LevelSetError, Window};
use crate::Potential;

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn reset(&mut self, n: usize) {
        self.parent.clear();
        self.parent.extend(0..n as u32);
    }

    #[inline]
    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let gp = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = gp;
            x = gp;
        }
        x
    }

    #[inline]
    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Smaller index wins: keeps labels independent of traversal details.
            if ra < rb {
                self.parent[rb as usize] = ra;
            } else {
                self.parent[ra as usize] = rb;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionInfo {
    pub label: u32,
    pub cells: usize,
    /// `[i_min, j_min, i_max, j_max]` in cell indices.
    pub bbox: [usize; 4],
    pub spans_horizontal: bool,
    pub spans_vertical: bool,
}

/// 4-connected labeling of the cells whose center satisfies `V ≤ ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SublevelLabeling {
    pub window: Window,
    pub nx: usize,
    pub ny: usize,
    pub level: f64,
    /// Row-major (`j * nx + i`), `0` for unoccupied cells, labels start at 1 in raster
    /// order of first appearance.
    pub labels: Vec<u32>,
    pub regions: Vec<RegionInfo>,
    pub spans_horizontal: bool,
    pub spans_vertical: bool,
}

impl SublevelLabeling {
    pub fn occupied(&self, i: usize, j: usize) -> bool {
        self.labels[j * self.nx + i] != 0
    }

    pub fn cell_center(&self, i: usize, j: usize) -> [f64; 2] {
        let hx = 2.0 * self.window.half_extent[0] / self.nx as f64;
        let hy = 2.0 * self.window.half_extent[1] / self.ny as f64;
        [
            self.window.center[0] - self.window.half_extent[0] + (i as f64 + 0.5) * hx,
            self.window.center[1] - self.window.half_extent[1] + (j as f64 + 0.5) * hy,
        ]
    }

    /// Plain-text PGM (`P2`) bitmap, top row first, occupied cells black.
    pub fn to_pgm(&self) -> String {
        let mut s = format!("P2\n{} {}\n1\n", self.nx, self.ny);
        for j in (0..self.ny).rev() {
            let row: Vec<&str> = (0..self.nx)
                .map(|i| if self.occupied(i, j) { "0" } else { "1" })
                .collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }
}

/// Labels `{V ≤ ε}` on the cell-center lattice of `w` with `cells_per_period` cells per
/// shortest period.
pub fn sublevel_region(
    p: &Potential,
    eps: f64,
    w: Window,
    cells_per_period: usize,
) -> Result<SublevelLabeling, LevelSetError> {
    let spec = GridSpec::for_potential(p, w, cells_per_period)?;
    let (nx, ny) = (spec.nx, spec.ny);
    // Cell centers form their own lattice, shifted by half a cell.
    let centers = GridSpec {
        window: Window {
            center: w.center,
            half_extent: [
                w.half_extent[0] - 0.5 * spec.hx,
                w.half_extent[1] - 0.5 * spec.hy,
            ],
        },
        nx: nx - 1,
        ny: ny - 1,
        hx: spec.hx,
        hy: spec.hy,
    };
    let values = if nx >= 2 && ny >= 2 {
        ValueGrid::sample(p, centers).values
    } else {
        (0..ny)
            .flat_map(|j| (0..nx).map(move |i| (i, j)))
            .map(|(i, j)| p.evaluate([spec.x(i) + 0.5 * spec.hx, spec.y(j) + 0.5 * spec.hy]))
            .collect()
    };
    let occ: Vec<bool> = values.iter().map(|&v| v <= eps).collect();
    let mut uf = UnionFind { parent: Vec::new() };
    uf.reset(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let k = j * nx + i;
            if !occ[k] {
                continue;
            }
            if i > 0 && occ[k - 1] {
                uf.union(k as u32, (k - 1) as u32);
            }
            if j > 0 && occ[k - nx] {
                uf.union(k as u32, (k - nx) as u32);
            }
        }
    }
    let mut root_label = vec![0u32; nx * ny];
    let mut labels = vec![0u32; nx * ny];
    let mut regions: Vec<RegionInfo> = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let k = j * nx + i;
            if !occ[k] {
                continue;
            }
            let r = uf.find(k as u32) as usize;
            if root_label[r] == 0 {
                regions.push(RegionInfo {
                    label: regions.len() as u32 + 1,
                    cells: 0,
                    bbox: [i, j, i, j],
                    spans_horizontal: false,
                    spans_vertical: false,
                });
                root_label[r] = regions.len() as u32;
            }
            let l = root_label[r];
            labels[k] = l;
            let reg = &mut regions[l as usize - 1];
            reg.cells += 1;
            reg.bbox = [
                reg.bbox[0].min(i),
                reg.bbox[1].min(j),
                reg.bbox[2].max(i),
                reg.bbox[3].max(j),
            ];
        }
    }
    for reg in &mut regions {
        reg.spans_horizontal = reg.bbox[0] == 0 && reg.bbox[2] == nx - 1;
        reg.spans_vertical = reg.bbox[1] == 0 && reg.bbox[3] == ny - 1;
    }
    let spans_horizontal = regions.iter().any(|r| r.spans_horizontal);
    let spans_vertical = regions.iter().any(|r| r.spans_vertical);
    Ok(SublevelLabeling {
        window: w,
        nx,
        ny,
        level: eps,
        labels,
        regions,
        spans_horizontal,
        spans_vertical,
    })
}

/// Which side of the level is tested for spanning.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Side {
    /// `{V ≤ ε}`.
    Below,
    /// `{V > ε}`.
    Above,
}

/// Spanning test on grid samples whose connectivity matches the marching-squares saddle
/// rule: 4-neighbours, plus the diagonal of a saddle cell whose center lies on the
/// same side. With this rule `{V ≤ ε}` crosses left-right iff `{V > ε}` does not cross
/// top-bottom, so a level line spans the window iff both sides span.
pub(crate) struct Percolator {
    uf: UnionFind,
    mark: Vec<u8>,
}

impl Percolator {
    pub fn new() -> Self {
        Self {
            uf: UnionFind { parent: Vec::new() },
            mark: Vec::new(),
        }
    }

    /// Tests the sub-block `[i0, i0 + spec.nx] × [j0, j0 + spec.ny]` of `grid`.
    pub fn spans(
        &mut self,
        p: &Potential,
        grid: &ValueGrid,
        sub: (&GridSpec, usize, usize),
        eps: f64,
        side: Side,
    ) -> bool {
        let (spec, i0, j0) = sub;
        let (nx1, ny1) = (spec.nx + 1, spec.ny + 1);
        let inside = |v: f64| match side {
            Side::Below => v <= eps,
            Side::Above => v > eps,
        };
        let at = |i: usize, j: usize| grid.at(i0 + i, j0 + j);
        let center_inside = |i: usize, j: usize| {
            let c = [spec.x(i) + 0.5 * spec.hx, spec.y(j) + 0.5 * spec.hy];
            inside(p.evaluate(c))
        };
        self.uf.reset(nx1 * ny1);
        let uf = &mut self.uf;
        let mut prev_row: Vec<bool> = (0..nx1).map(|i| inside(at(i, 0))).collect();
        let mut row = vec![false; nx1];
        for i in 1..nx1 {
            if prev_row[i] && prev_row[i - 1] {
                uf.union(i as u32, (i - 1) as u32);
            }
        }
        for j in 1..ny1 {
            for (i, slot) in row.iter_mut().enumerate() {
                *slot = inside(at(i, j));
            }
            let base = j * nx1;
            for i in 0..nx1 {
                if !row[i] {
                    continue;
                }
                let k = (base + i) as u32;
                if i > 0 && row[i - 1] {
                    uf.union(k, k - 1);
                }
                if prev_row[i] {
                    uf.union(k, k - nx1 as u32);
                }
                // Cell (i-1, j-1): this sample is its top-right corner.
                if i > 0
                    && prev_row[i - 1]
                    && !prev_row[i]
                    && !row[i - 1]
                    && center_inside(i - 1, j - 1)
                {
                    uf.union(k, k - nx1 as u32 - 1);
                }
                // Cell (i, j-1): this sample is its top-left corner.
                if i + 1 < nx1
                    && prev_row[i + 1]
                    && !prev_row[i]
                    && !row[i + 1]
                    && center_inside(i, j - 1)
                {
                    uf.union(k, k - nx1 as u32 + 1);
                }
            }
            std::mem::swap(&mut prev_row, &mut row);
        }
        // Boundary marks per root: 1 left, 2 right, 4 bottom, 8 top.
        self.mark.clear();
        self.mark.resize(nx1 * ny1, 0);
        let mut tag = |i: usize, j: usize, bit: u8, uf: &mut UnionFind| {
            if inside(at(i, j)) {
                let r = uf.find((j * nx1 + i) as u32) as usize;
                self.mark[r] |= bit;
            }
        };
        for j in 0..ny1 {
            tag(0, j, 1, uf);
            tag(nx1 - 1, j, 2, uf);
        }
        for i in 0..nx1 {
            tag(i, 0, 4, uf);
            tag(i, ny1 - 1, 8, uf);
        }
        self.mark.iter().any(|&m| m & 3 == 3 || m & 12 == 12)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::Preset;

    #[test]
    fn empty_and_full_sublevels() {
        let p = Preset::Regular100.potential();
        let w = Window::square([0.0, 0.0], 20.0);
        let empty = sublevel_region(&p, -3.5, w, 16).unwrap();
        assert!(empty.regions.is_empty() && !empty.spans_horizontal);
        let full = sublevel_region(&p, 3.5, w, 16).unwrap();
        assert_eq!(full.regions.len(), 1);
        assert!(full.spans_horizontal && full.spans_vertical);
        assert_eq!(full.regions[0].cells, full.nx * full.ny);
    }

    #[test]
    fn labels_partition_occupied_cells() {
        let p = Preset::Chaotic.potential();
        let lab = sublevel_region(&p, -0.4, Window::square([1.0, 2.0], 25.0), 12).unwrap();
        let total: usize = lab.regions.iter().map(|r| r.cells).sum();
        let occupied = lab.labels.iter().filter(|&&l| l != 0).count();
        assert_eq!(total, occupied);
        for j in 0..lab.ny {
            for i in 0..lab.nx {
                let v = p.evaluate(lab.cell_center(i, j));
                assert_eq!(lab.occupied(i, j), v <= -0.4);
            }
        }
        // 4-neighbours never carry different nonzero labels.
        for j in 0..lab.ny {
            for i in 1..lab.nx {
                let (a, b) = (lab.labels[j * lab.nx + i], lab.labels[j * lab.nx + i - 1]);
                assert!(a == 0 || b == 0 || a == b);
            }
        }
    }

    #[test]
    fn pgm_header() {
        let p = Preset::Chaotic.potential();
        let lab = sublevel_region(&p, 0.0, Window::square([0.0, 0.0], 5.0), 8).unwrap();
        assert!(lab
            .to_pgm()
            .starts_with(&format!("P2\n{} {}\n1\n", lab.nx, lab.ny)));
    }

    #[test]
    fn percolation_duality() {
        // Exactly one of: below spans left-right, above spans top-bottom.
        let p = Preset::Chaotic.potential();
        let spec = GridSpec::for_potential(&p, Window::square([0.0, 0.0], 30.0), 8).unwrap();
        let grid = ValueGrid::sample(&p, spec);
        let mut perc = Percolator::new();
        for k in 0..21 {
            let eps = -1.0 + 0.1 * k as f64;
            let below = perc.spans(&p, &grid, (&spec, 0, 0), eps, Side::Below);
            let above = perc.spans(&p, &grid, (&spec, 0, 0), eps, Side::Above);
            assert!(below || above, "eps {eps}");
        }
    }
}
