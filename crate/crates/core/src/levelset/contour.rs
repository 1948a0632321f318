//! Marching-squares extraction of `{V = ε}` with per-edge root refinement.

use serde::{Deserialize, Serialize};

use super::geometry::{principal_axes, transverse_deviation};
use super::grid::{GridSpec, ValueGrid};
use super::{LevelSetError, Window};
use crate::Potential;

const NONE: u32 = u32::MAX;

/// One connected component of a level set inside a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelComponent {
    pub points: Vec<[f64; 2]>,
    pub closed: bool,
    pub touches_boundary: bool,
    /// Principal direction, present iff the component connects opposite window edges.
    pub mean_direction: Option<[f64; 2]>,
    /// Max distance from the principal-axis line through the centroid.
    pub strip_deviation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ComponentClass {
    Closed,
    OpenSpanning,
    Truncated,
}

impl LevelComponent {
    fn from_points(points: Vec<[f64; 2]>, closed: bool, window: &Window) -> Self {
        let axes = principal_axes(&points);
        let strip_deviation =
            axes.map_or(0.0, |a| transverse_deviation(&points, a.centroid, a.major));
        let mut c = Self {
            points,
            closed,
            touches_boundary: !closed,
            mean_direction: None,
            strip_deviation,
        };
        if classify_component(&c, window) == ComponentClass::OpenSpanning {
            c.mean_direction = axes.map(|a| a.major);
        }
        c
    }

    /// Polyline length.
    pub fn length(&self) -> f64 {
        self.points
            .windows(2)
            .map(|s| (s[1][0] - s[0][0]).hypot(s[1][1] - s[0][1]))
            .sum()
    }
}

/// Closed iff the loop closes inside the window; open-spanning iff the endpoints lie
/// on opposite window edges; truncated otherwise.
pub fn classify_component(c: &LevelComponent, w: &Window) -> ComponentClass {
    if c.closed {
        return ComponentClass::Closed;
    }
    let (Some(first), Some(last)) = (c.points.first(), c.points.last()) else {
        return ComponentClass::Truncated;
    };
    let a = w.side_of(*first);
    let b = w.side_of(*last);
    match (a, b) {
        (Some(a), Some(b)) if a.opposite() == b => ComponentClass::OpenSpanning,
        _ => ComponentClass::Truncated,
    }
}

/// Refines the root of `V − ε` on the segment `a → b`, where `V(a) ≤ ε < V(b)` or the
/// reverse. Illinois false position, stopping once the bracket is below `1e-10` of
/// the segment.
fn refine_edge(p: &Potential, eps: f64, a: [f64; 2], b: [f64; 2], fa: f64, fb: f64) -> [f64; 2] {
    let at = |t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let (mut flo, mut fhi) = (fa - eps, fb - eps);
    if flo == 0.0 {
        return a;
    }
    if fhi == 0.0 {
        return b;
    }
    let mut best = if flo.abs() < fhi.abs() {
        (lo, flo)
    } else {
        (hi, fhi)
    };
    let mut side = 0i8;
    for _ in 0..200 {
        if hi - lo < 1e-10 {
            break;
        }
        let mut t = (lo * fhi - hi * flo) / (fhi - flo);
        if !(t > lo && t < hi) {
            t = 0.5 * (lo + hi);
        }
        let ft = p.evaluate(at(t)) - eps;
        if ft.abs() < best.1.abs() {
            best = (t, ft);
        }
        if ft == 0.0 {
            break;
        }
        if (ft > 0.0) == (fhi > 0.0) {
            hi = t;
            fhi = ft;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        } else {
            lo = t;
            flo = ft;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        }
    }
    at(best.0)
}

struct Node {
    point: [f64; 2],
    nb: [u32; 2],
}

fn link(nodes: &mut [Node], a: u32, b: u32) {
    for (from, to) in [(a, b), (b, a)] {
        let slot = &mut nodes[from as usize].nb;
        if slot[0] == NONE {
            slot[0] = to;
        } else {
            slot[1] = to;
        }
    }
}

/// Extracts all components of `{V = ε}` in `w` on a grid with
/// `cells_per_shortest_period` cells per shortest wave period.
pub fn extract_level_set(
    p: &Potential,
    eps: f64,
    w: Window,
    cells_per_shortest_period: usize,
) -> Result<Vec<LevelComponent>, LevelSetError> {
    let spec = GridSpec::for_potential(p, w, cells_per_shortest_period)?;
    let grid = ValueGrid::sample(p, spec);
    Ok(extract_on_grid(p, &grid, eps))
}

/// Marching squares over precomputed samples. Saddle cells connect the quadrants that
/// match the sign of `V(center) − ε`.
pub fn extract_on_grid(p: &Potential, grid: &ValueGrid, eps: f64) -> Vec<LevelComponent> {
    let spec = grid.spec;
    let (nx, ny) = (spec.nx, spec.ny);
    let n_h = nx * (ny + 1);
    let h_id = |i: usize, j: usize| j * nx + i;
    let v_id = |i: usize, j: usize| n_h + j * (nx + 1) + i;
    let inside = |v: f64| v <= eps;

    let mut edge_node = vec![NONE; n_h + (nx + 1) * ny];
    let mut nodes: Vec<Node> = Vec::new();
    let mut push = |nodes: &mut Vec<Node>, id: usize, a: (usize, usize), b: (usize, usize)| {
        let (fa, fb) = (grid.at(a.0, a.1), grid.at(b.0, b.1));
        let point = refine_edge(p, eps, spec.point(a.0, a.1), spec.point(b.0, b.1), fa, fb);
        edge_node[id] = nodes.len() as u32;
        nodes.push(Node {
            point,
            nb: [NONE; 2],
        });
    };
    for j in 0..=ny {
        for i in 0..nx {
            if inside(grid.at(i, j)) != inside(grid.at(i + 1, j)) {
                push(&mut nodes, h_id(i, j), (i, j), (i + 1, j));
            }
        }
    }
    for j in 0..ny {
        for i in 0..=nx {
            if inside(grid.at(i, j)) != inside(grid.at(i, j + 1)) {
                push(&mut nodes, v_id(i, j), (i, j), (i, j + 1));
            }
        }
    }

    for j in 0..ny {
        for i in 0..nx {
            let bl = inside(grid.at(i, j));
            let br = inside(grid.at(i + 1, j));
            let tr = inside(grid.at(i + 1, j + 1));
            let tl = inside(grid.at(i, j + 1));
            let bottom = edge_node[h_id(i, j)];
            let top = edge_node[h_id(i, j + 1)];
            let left = edge_node[v_id(i, j)];
            let right = edge_node[v_id(i + 1, j)];
            let crossing: Vec<u32> = [bottom, right, top, left]
                .into_iter()
                .filter(|&n| n != NONE)
                .collect();
            match crossing.len() {
                0 => {}
                2 => link(&mut nodes, crossing[0], crossing[1]),
                4 => {
                    let center = [spec.x(i) + 0.5 * spec.hx, spec.y(j) + 0.5 * spec.hy];
                    let center_in = inside(p.evaluate(center));
                    // Corners on the diagonal with status != center get cut off.
                    let cut_bl_tr = bl != center_in;
                    debug_assert!(bl == tr && br == tl && bl != br);
                    if cut_bl_tr {
                        link(&mut nodes, left, bottom);
                        link(&mut nodes, right, top);
                    } else {
                        link(&mut nodes, bottom, right);
                        link(&mut nodes, top, left);
                    }
                }
                _ => unreachable!("a cell has an even number of crossed edges"),
            }
        }
    }

    let mut visited = vec![false; nodes.len()];
    let mut out = Vec::new();
    let walk = |start: u32, visited: &mut [bool]| -> (Vec<[f64; 2]>, bool) {
        let mut pts = Vec::new();
        let (mut prev, mut cur) = (NONE, start);
        loop {
            visited[cur as usize] = true;
            pts.push(nodes[cur as usize].point);
            let nb = nodes[cur as usize].nb;
            let next = if nb[0] != prev { nb[0] } else { nb[1] };
            if next == NONE {
                return (pts, false);
            }
            if next == start {
                pts.push(nodes[start as usize].point);
                return (pts, true);
            }
            prev = cur;
            cur = next;
        }
    };
    // Open chains start at degree-one nodes, which sit on window edges.
    for s in 0..nodes.len() {
        if !visited[s] && nodes[s].nb[1] == NONE {
            let (pts, closed) = walk(s as u32, &mut visited);
            out.push(LevelComponent::from_points(pts, closed, &spec.window));
        }
    }
    for s in 0..nodes.len() {
        if !visited[s] {
            let (pts, closed) = walk(s as u32, &mut visited);
            out.push(LevelComponent::from_points(pts, closed, &spec.window));
        }
    }
    out
}

/// Components of the given class.
pub fn spanning(components: &[LevelComponent], w: &Window) -> Vec<usize> {
    components
        .iter()
        .enumerate()
        .filter(|(_, c)| classify_component(c, w) == ComponentClass::OpenSpanning)
        .map(|(i, _)| i)
        .collect()
}
